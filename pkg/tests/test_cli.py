import json

import numpy as np
import pytest

from cablegp.cli import main
from cablegp.evaluation import evaluate_map, reports_to_json
from cablegp.extract import clusters_to_json
from cablegp.frame import CableMap, SurveyConfig
from cablegp.pipeline import PipelineRun, locate_cables
from cablegp.synthetic import load_truths, scenario_from_mapping, synth_cluster


@pytest.fixture
def sim(tmp_path):
    pts, truth = tmp_path / "pts.csv", tmp_path / "truth.json"
    assert main(["simulate", "--seed", "7", "--output", str(pts), "--truth", str(truth)]) == 0
    return pts, truth


def test_simulate_then_map(sim, tmp_path):
    pts, _ = sim
    out = tmp_path / "map.json"
    assert main(["map", "--input", str(pts), "--output", str(out)]) == 0
    (cable,) = json.loads(out.read_text())
    xs = [s["x"] for s in cable["samples"]]
    assert xs[0] == 0.0 and xs[-1] == 20.0
    assert set(cable["samples"][0]) == {"x", "y", "z", "hw_y", "hw_z"}


def test_map_and_evaluate_match_library(sim, tmp_path):
    pts, truth = sim
    out, rep = tmp_path / "map.json", tmp_path / "eval.json"
    assert main(["map", "--input", str(pts), "--output", str(out)]) == 0
    assert main(["evaluate", "--input", str(out), "--truth", str(truth), "--points", str(pts),
                 "--output", str(rep)]) == 0
    from cablegp.frame import read_points_csv

    points = read_points_csv(pts)
    cmap, _ = locate_cables(points, SurveyConfig())
    assert cmap.to_json() == out.read_text()
    direct = evaluate_map(cmap, load_truths(truth), sorted({p.x for p in points}), seed=0)
    assert reports_to_json(direct) == rep.read_text()


def test_outputs_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        d.mkdir()
        assert main(["simulate", "--seed", "3", "--output", str(d / "p.csv"), "--truth", str(d / "t.json")]) == 0
        assert main(["map", "--input", str(d / "p.csv"), "--output", str(d / "m.json"),
                     "--svg", str(d / "m.svg"), "--report", str(d / "r.json")]) == 0
        outs.append([(d / n).read_bytes() for n in ("p.csv", "t.json", "m.json", "m.svg", "r.json")])
    assert outs[0] == outs[1]


def test_one_line_points_give_empty_map(tmp_path, caplog):
    pts = tmp_path / "p.csv"
    pts.write_text("x,y,z\n0,1,0.5\n0,4,0.5\n0,8,0.6\n")
    out = tmp_path / "m.json"
    assert main(["map", "--input", str(pts), "--output", str(out), "--min-trace-points", "3"]) == 0
    assert json.loads(out.read_text()) == []
    assert any(r.levelname == "WARNING" and "empty" in r.getMessage() for r in caplog.records)


def test_malformed_csv_exit_2(tmp_path, capsys):
    pts = tmp_path / "p.csv"
    pts.write_text("x,y,z\n0,1,0.5\n2,abc,0.5\n")
    out = tmp_path / "m.json"
    assert main(["map", "--input", str(pts), "--output", str(out)]) == 2
    err = capsys.readouterr().err
    assert "ParseError" in err and ":3:" in err
    assert not out.exists()


def test_degenerate_cluster_strict_exit_3(tmp_path, capsys, caplog):
    good = synth_cluster(2.0, 0.5, 0.1, n=20)
    y = np.linspace(0, 2, 10)
    flat = [{"line_x": 2.0, "samples": [[float(v), 10.0] for v in y]}]
    path = tmp_path / "c.json"
    path.write_text(json.dumps(json.loads(clusters_to_json([good])) + flat))
    out = tmp_path / "m.json"
    assert main(["map", "--input", str(path), "--output", str(out), "--strict"]) == 3
    assert "DegenerateCluster" in capsys.readouterr().err
    assert not out.exists()
    assert main(["map", "--input", str(path), "--output", str(out)]) == 0
    assert any("dropping cluster #1" in r.getMessage() for r in caplog.records)


def test_missing_file_exit_4(tmp_path):
    assert main(["map", "--input", str(tmp_path / "nope.csv"), "--input-mode", "points"]) == 4


def test_print_config_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("beta = 2.0\ntheta_y = 0.2\n")
    assert main(["map", "--input", "x.csv", "--config", str(cfg), "--theta-y", "0.4", "--print-config"]) == 0
    text = capsys.readouterr().out
    assert "beta = 2.0" in text and "theta_y = 0.4" in text
    assert main(["simulate", "--print-config", "--line-spacing", "5"]) == 0
    assert "line_positions = 0.0, 5.0, 10.0, 15.0, 20.0" in capsys.readouterr().out


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("beta = -1\n")
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert "InvalidConfig" in capsys.readouterr().err


def test_cluster_pipeline_via_extract_and_fit(tmp_path):
    from cablegp.extract import save_grid
    from cablegp.synthetic import rasterize_cluster

    grids = []
    for k, x in enumerate((0.0, 2.0, 4.0)):
        cl = synth_cluster(1.5 + 0.05 * k, 0.5, 0.1, n=120, phi_max=1.2)
        g = tmp_path / f"g{k}.csv"
        save_grid(rasterize_cluster(cl, 0.25, 0.02, 100, 160, line_x=x), g)
        grids.append(str(g))
    clusters, pts = tmp_path / "c.json", tmp_path / "p.csv"
    args = [a for g in grids for a in ("--input", g)]
    assert main(["extract", *args, "--output", str(clusters)]) == 0
    assert len(json.loads(clusters.read_text())) == 3
    assert main(["fit-hyperbolas", "--input", str(clusters), "--output", str(pts)]) == 0
    from cablegp.frame import read_points_csv

    got = read_points_csv(pts)
    assert [p.x for p in got] == [0.0, 2.0, 4.0]
    for k, p in enumerate(got):
        assert p.y == pytest.approx(1.5 + 0.05 * k, abs=0.03)
        assert p.z == pytest.approx(0.5, abs=0.05)
    out = tmp_path / "m.json"
    assert main(["map", *args, "--output", str(out)]) == 0
    assert len(json.loads(out.read_text())) == 1


def test_render_and_csv_map(sim, tmp_path):
    pts, _ = sim
    m = tmp_path / "m.json"
    assert main(["map", "--input", str(pts), "--output", str(m)]) == 0
    svg = tmp_path / "m.svg"
    assert main(["render", "--input", str(m), "--points", str(pts), "--svg", str(svg)]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")
    csv = tmp_path / "m.csv"
    assert main(["map", "--input", str(pts), "--output", str(csv), "--format", "csv"]) == 0
    assert csv.read_text().splitlines()[0] == "cable_id,x,y,z,hw_y,hw_z"


def test_pipeline_run_rejects_mixed_modes(tmp_path):
    from cablegp.errors import InputError

    a = tmp_path / "a.json"
    a.write_text("[]")
    b = tmp_path / "b.csv"
    b.write_text("x,y,z\n")
    with pytest.raises(InputError):
        PipelineRun(SurveyConfig(), [str(a), str(b)])


def test_scenario_file_input(tmp_path):
    sc = tmp_path / "s.scn"
    sc.write_text("y_mean = 2, 8\nline_spacing = 2\nseed = 5\n")
    out = tmp_path / "m.json"
    assert main(["map", "--input", str(sc), "--output", str(out)]) == 0
    assert len(json.loads(out.read_text())) == 2
    assert CableMap.from_json(out.read_text()).records[0].cable_id == 1
    assert len(scenario_from_mapping({"y_mean": "2, 8"}).cables) == 2
