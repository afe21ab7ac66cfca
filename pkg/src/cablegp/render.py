"""Plan-view (XOY) SVG of a cable map."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_svg(cable_map, points=(), line_xs=(), title=None) -> str:
    """Detection lines, detections, GP means and their +-2 sigma corridors.

    Output is byte-stable for identical inputs (fixed hash salt, no date).
    """
    with matplotlib.rc_context({"svg.hashsalt": "cablegp", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for x in line_xs:
            ax.axvline(x, color="0.75", lw=0.8, zorder=0)
        for i, rec in enumerate(cable_map.records):
            color = f"C{i % 10}"
            ax.fill_between(rec.x, rec.mean_y - rec.halfwidth_y, rec.mean_y + rec.halfwidth_y,
                            color=color, alpha=0.2, lw=0)
            ax.plot(rec.x, rec.mean_y, color=color, lw=1.5, label=f"cable {rec.cable_id}")
        if len(points):
            ax.plot([p.x for p in points], [p.y for p in points], "k.", ms=5, label="detections")
        ax.set_xlabel("X (m)")
        ax.set_ylabel("Y (m)")
        if title:
            ax.set_title(title)
        if cable_map.records or len(points):
            ax.legend(loc="best", fontsize="small")
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()
