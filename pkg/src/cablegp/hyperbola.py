"""Restricted hyperbola fitting for cable signatures in (y, t) space.

A thin cable at lateral position C and two-way apex time A traces

    y = B * sinh(phi) + C,    t = A * cosh(phi),

with B = v * A / 2 for wave speed v.  Fitting is algebraic least squares
on t**2 = a + b*y + c*y**2 for a starting point, then Gauss-Newton on the
stacked orthogonal residuals over (phi_1..phi_m, A, B, C).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCluster, NoConvergence, NonPositiveAxes
from .extract import PointCluster
from .frame import DetectedPoint

_PHI_CAP = 40.0


@dataclass(frozen=True)
class HyperbolaParams:
    A: float  # apex travel time t_0 [ns]
    B: float  # spatial semi-axis [m]
    C: float  # apex position y_0 [m]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.A, self.B, self.C)):
            raise NonPositiveAxes(f"non-finite hyperbola parameters {self!r}")
        if not (self.A > 0 and self.B > 0):
            raise NonPositiveAxes(f"hyperbola axes must be positive, got A={self.A}, B={self.B}")

    def point(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.B * np.sinh(phi) + self.C, self.A * np.cosh(phi)


@dataclass(frozen=True)
class FitReport:
    """Outcome of orthogonal refinement.

    Distances are measured after multiplying t by `scale_factor`
    (the cluster's y-range / t-range), so both rms values are in meters.
    """

    params: HyperbolaParams
    iterations: int
    rms_orthogonal_distance: float
    converged: bool
    scale_factor: float = 1.0
    init_rms_orthogonal_distance: float = float("nan")

    def to_json_obj(self) -> dict:
        return {
            "A": self.params.A,
            "B": self.params.B,
            "C": self.params.C,
            "iterations": self.iterations,
            "rms": self.rms_orthogonal_distance,
            "init_rms": self.init_rms_orthogonal_distance,
            "converged": self.converged,
            "scale_factor": self.scale_factor,
        }


def algebraic_init(cluster: PointCluster) -> HyperbolaParams:
    """Linear least-squares fit of t**2 = a + b*y + c*y**2 (apex on the t axis)."""
    y, t = cluster.y, cluster.t
    if len(np.unique(y)) < 3:
        raise DegenerateCluster("need at least 3 distinct y values")
    y_mid = y.mean()
    yc = y - y_mid
    design = np.column_stack([np.ones_like(yc), yc, yc * yc])
    t2 = t * t
    coef, _, rank, _ = np.linalg.lstsq(design, t2, rcond=None)
    if rank < 3:
        raise DegenerateCluster("singular normal equations in algebraic fit")
    a, b, c = coef
    span = np.ptp(yc)
    if not c * span * span > 1e-9 * np.mean(t2):
        raise DegenerateCluster(f"cluster is not downward-opening (c={c:.3g})")
    a_sq = a - b * b / (4.0 * c)
    if not a_sq > 0:
        raise DegenerateCluster(f"apex time squared is non-positive ({a_sq:.3g})")
    A = math.sqrt(a_sq)
    return HyperbolaParams(A=A, B=A / math.sqrt(c), C=y_mid - b / (2.0 * c))


def _stationarity(phi, u, t, A, B):
    sh, ch = np.sinh(phi), np.cosh(phi)
    f = (A * A + B * B) * sh * ch - B * u * ch - A * t * sh
    df = (A * A + B * B) * np.cosh(2.0 * phi) - B * u * sh - A * t * ch
    return f, df


def _sq_dist(phi, u, t, A, B):
    return (u - B * np.sinh(phi)) ** 2 + (t - A * np.cosh(phi)) ** 2


def nearest_params(y, t, params: HyperbolaParams, max_iter=200) -> np.ndarray:
    """Foot-point parameters phi_i for many points at once.

    Safeguarded Newton on the stationarity condition, kept inside a
    bracket where the derivative of the squared distance changes sign
    from negative to positive, so every answer is a local minimum.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    A, B = params.A, params.B
    u = y - params.C

    seed_y = np.arcsinh(u / B)
    # u == 0 is a symmetric case; take the +phi branch so a distance maximum at the apex is not picked
    seed_t = np.where(u < 0, -1.0, 1.0) * np.arccosh(np.maximum(t / A, 1.0))
    phi = np.where(_sq_dist(seed_y, u, t, A, B) <= _sq_dist(seed_t, u, t, A, B), seed_y, seed_t)
    phi = np.clip(phi, -_PHI_CAP, _PHI_CAP)

    lo = phi - 0.5
    hi = phi + 0.5
    width = np.full_like(phi, 0.5)
    for _ in range(64):
        f_lo, _ = _stationarity(lo, u, t, A, B)
        f_hi, _ = _stationarity(hi, u, t, A, B)
        bad_lo = f_lo >= 0
        bad_hi = f_hi <= 0
        if not (bad_lo.any() or bad_hi.any()):
            break
        width = np.where(bad_lo | bad_hi, 2.0 * width, width)
        lo = np.where(bad_lo, np.maximum(lo - width, -_PHI_CAP), lo)
        hi = np.where(bad_hi, np.minimum(hi + width, _PHI_CAP), hi)
    else:
        raise NoConvergence("could not bracket the foot point")

    active = np.ones_like(phi, dtype=bool)
    for _ in range(max_iter):
        f, df = _stationarity(phi, u, t, A, B)
        lo = np.where(f < 0, phi, lo)
        hi = np.where(f > 0, phi, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = phi - f / df
        ok = (df > 0) & (newton > lo) & (newton < hi)
        nxt = np.where(ok, newton, 0.5 * (lo + hi))
        # sitting exactly on a distance maximum: leave it towards the upper end of the bracket
        on_max = (f == 0) & (df < 0)
        nxt = np.where(on_max, 0.5 * (phi + hi), nxt)
        xtol = 4.0 * np.finfo(float).eps * (1.0 + np.abs(phi))
        done = (np.abs(nxt - phi) <= xtol) | ((hi - lo) <= xtol)
        phi = np.where(active, nxt, phi)
        active &= ~done
        if not active.any():
            return phi
    raise NoConvergence(f"foot-point iteration did not converge for {int(active.sum())} point(s)")


def nearest_param(point, params: HyperbolaParams) -> float:
    """phi of the nearest point on the hyperbola to `point` = (y, t)."""
    y, t = point
    phi = float(nearest_params([y], [t], params)[0])
    u = y - params.C
    h = 1e-4 * max(1.0, abs(phi))
    g0 = _sq_dist(phi, u, t, params.A, params.B)
    curvature = _sq_dist(phi - h, u, t, params.A, params.B) + _sq_dist(phi + h, u, t, params.A, params.B) - 2.0 * g0
    if curvature < -1e-12 * max(1.0, g0):
        raise NoConvergence(f"foot point for {point} is not a local minimum")
    return phi


def orthogonal_distances(y, t, params: HyperbolaParams) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    phi = nearest_params(y, t, params)
    return np.sqrt(_sq_dist(phi, y - params.C, t, params.A, params.B))


def residuals(unknowns, y, t) -> np.ndarray:
    """Stacked (y, t) residuals; unknowns are [phi_1..phi_m, A, B, C]."""
    unknowns = np.asarray(unknowns, dtype=float)
    phi, (A, B, C) = unknowns[:-3], unknowns[-3:]
    return np.concatenate([y - C - B * np.sinh(phi), t - A * np.cosh(phi)])


def jacobian(unknowns, y, t) -> np.ndarray:
    """d residuals / d unknowns, shape (2m, m + 3)."""
    unknowns = np.asarray(unknowns, dtype=float)
    phi, (A, B, _) = unknowns[:-3], unknowns[-3:]
    n_pts = len(phi)
    sh, ch = np.sinh(phi), np.cosh(phi)
    jac = np.zeros((2 * n_pts, n_pts + 3))
    idx = np.arange(n_pts)
    jac[idx, idx] = -B * ch
    jac[n_pts + idx, idx] = -A * sh
    jac[n_pts + idx, n_pts] = -ch
    jac[idx, n_pts + 1] = -sh
    jac[idx, n_pts + 2] = -1.0
    return jac


def gauss_newton_step(unknowns, y, t) -> np.ndarray:
    """Solve the Gauss-Newton normal equations via the 3x3 Schur complement.

    The foot-point block of J^T J is diagonal, so eliminating it leaves a
    3x3 system in (A, B, C).  Equivalent to ``lstsq(jacobian, -residuals)``.
    """
    unknowns = np.asarray(unknowns, dtype=float)
    phi, (A, B, C) = unknowns[:-3], unknowns[-3:]
    sh, ch = np.sinh(phi), np.cosh(phi)
    r_y = y - C - B * sh
    r_t = t - A * ch
    phi_diag = B * B * ch * ch + A * A * sh * sh
    g_phi = -B * ch * r_y - A * sh * r_t
    coupling = np.stack([A * sh * ch, B * sh * ch, B * ch])
    g_p = np.array([-(ch * r_t).sum(), -(sh * r_y).sum(), -r_y.sum()])
    p_block = np.array([
        [(ch * ch).sum(), 0.0, 0.0],
        [0.0, (sh * sh).sum(), sh.sum()],
        [0.0, sh.sum(), float(len(phi))],
    ])
    schur = p_block - (coupling / phi_diag) @ coupling.T
    rhs = -g_p + coupling @ (g_phi / phi_diag)
    eig = np.linalg.eigvalsh(schur)
    if not eig[0] > 1e-13 * max(eig[-1], 1e-300):
        raise DegenerateCluster("singular Gauss-Newton system")
    d_params = np.linalg.solve(schur, rhs)
    d_phi = (-g_phi - d_params @ coupling) / phi_diag
    return np.concatenate([d_phi, d_params])


def _scale_for(cluster: PointCluster) -> float:
    t_span = np.ptp(cluster.t)
    y_span = np.ptp(cluster.y)
    if not (t_span > 0 and y_span > 0):
        raise DegenerateCluster("cluster has zero extent in y or t")
    return float(y_span / t_span)


def orthogonal_refine(cluster: PointCluster, init: HyperbolaParams, max_iter=50, tol=1e-10) -> FitReport:
    """Minimize the summed squared orthogonal distances by damped Gauss-Newton.

    Each sweep re-seeds the foot points with `nearest_params`, takes a
    Gauss-Newton step on all m + 3 unknowns and halves it (up to 20 times)
    until the axes stay positive and the objective drops.  Stops when the
    relative decrease falls below `tol`.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    scale = _scale_for(cluster)
    y = cluster.y
    ts = cluster.t * scale
    n_pts = len(y)
    params = np.array([init.A * scale, init.B, init.C])

    def foot(p):
        return nearest_params(y, ts, HyperbolaParams(*p))

    phi = foot(params)
    r = residuals(np.concatenate([phi, params]), y, ts)
    obj = float(r @ r)
    init_rms = math.sqrt(obj / n_pts)
    # objective indistinguishable from rounding noise at this size
    floor = n_pts * (1e-13 * max(np.ptp(y), 1.0)) ** 2

    iterations = 0
    converged = obj <= floor
    while not converged and iterations < max_iter:
        unknowns = np.concatenate([phi, params])
        r = residuals(unknowns, y, ts)
        delta = gauss_newton_step(unknowns, y, ts)
        step = 1.0
        feasible = False
        accepted = None
        for _ in range(21):
            cand = unknowns + step * delta
            if cand[-3] > 0 and cand[-2] > 0:
                feasible = True
                rc = residuals(cand, y, ts)
                cand_obj = float(rc @ rc)
                if cand_obj < obj:
                    accepted = cand
                    break
            step *= 0.5
        if accepted is None:
            if not feasible:
                raise NonPositiveAxes("line search could not keep A and B positive")
            # no descent direction left at working precision
            converged = True
            break
        iterations += 1
        params = accepted[-3:]
        phi_step = accepted[:-3]
        phi_new = foot(params)
        u = y - params[2]
        # keep whichever foot point is closer (reseeding may land in a farther local minimum)
        d_step = _sq_dist(phi_step, u, ts, params[0], params[1])
        d_new = _sq_dist(phi_new, u, ts, params[0], params[1])
        phi = np.where(d_new <= d_step, phi_new, phi_step)
        new_obj = float(np.minimum(d_new, d_step).sum())
        rel = (obj - new_obj) / obj
        obj = new_obj
        if rel < tol or obj <= floor:
            converged = True

    fitted = HyperbolaParams(A=float(params[0] / scale), B=float(params[1]), C=float(params[2]))
    return FitReport(
        params=fitted,
        iterations=iterations,
        rms_orthogonal_distance=math.sqrt(obj / n_pts),
        converged=bool(converged),
        scale_factor=scale,
        init_rms_orthogonal_distance=init_rms,
    )


def fit_cluster(cluster: PointCluster, max_iter=50, tol=1e-10) -> FitReport:
    """Algebraic start followed by orthogonal refinement."""
    return orthogonal_refine(cluster, algebraic_init(cluster), max_iter=max_iter, tol=tol)


def apex_to_detection(params: HyperbolaParams, line_x: float, v: float) -> DetectedPoint:
    if not v > 0:
        raise ValueError("wave speed must be > 0")
    return DetectedPoint(x=float(line_x), y=params.C, z=v * params.A / 2.0)


def velocity_mismatch(params: HyperbolaParams, v: float) -> float:
    """|B - v*A/2|: zero when the fitted shape agrees with the assumed wave speed."""
    return abs(params.B - v * params.A / 2.0)
