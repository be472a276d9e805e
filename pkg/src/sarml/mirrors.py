"""Enumeration of mirror points: scene covectors sharing one data covector.

For a fixed data covector p, the base points solve the range-Doppler system

    g1(u, v) = 2|R(u, v, p.s)|/c0 - p.t = 0
    g2(u, v) = (2 p.tau / c0) (rhat . dgamma) - p.sigma = 0.

A grid scan seeds Newton refinements; solutions are clustered into isolated
points and one-dimensional families, the latter traced by predictor-corrector
continuation along the null direction of the residual Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .canonical import (DegeneracyReport, covector_pair, degeneracy_residuals,
                        projection_jacobians)
from .geometry import EPS_RANGE

TOL_ROOT = 1e-10
COND_FAMILY = 1e8
FAMILY_MIN_POINTS = 8
TRACE_STEP = 0.02
TRACE_MAX_STEPS = 10_000
TRACE_TOL = 1e-8


class TraceSeedError(ValueError):
    """Seed does not qualify for continuation (Jacobian nonsingular)."""


class TraceCorrectorError(RuntimeError):
    """Corrector could not bring the seed or a step onto the solution set."""


@dataclass(frozen=True)
class MirrorPoint:
    covector: object  # SceneCovector
    report: DegeneracyReport
    residual: float


@dataclass(frozen=True)
class MirrorFamily:
    covectors: tuple
    reports: tuple
    max_residual: float
    truncated: bool
    note: str = ""


@dataclass(frozen=True)
class MirrorSet:
    p: object  # DataCovector
    isolated: tuple
    families: tuple
    region: tuple
    grid_n: int
    discarded_seeds: int

    def counts(self):
        return {"isolated": len(self.isolated),
                "families": len(self.families),
                "family_points": sum(len(f.covectors) for f in self.families),
                "discarded_seeds": self.discarded_seeds}


def mirror_residuals(chart, path, p, u, v, c0, eps_range=EPS_RANGE):
    """Both range-Doppler residuals at (u, v) for the fixed covector p."""
    from .canonical import _components

    t, dop, _ = _components(chart, path, u, v, p.s, c0, eps_range)
    g1 = t - p.t
    g2 = (2.0 * p.tau / c0) * dop - p.sigma
    return g1, g2


def _residual_vec(chart, path, p, x, c0):
    g1, g2 = mirror_residuals(chart, path, p, x[0], x[1], c0)
    return np.array([float(g1), float(g2)])


def _jacobian(chart, path, p, x, c0, h=1e-6):
    hu = h * max(1.0, abs(x[0]))
    hv = h * max(1.0, abs(x[1]))
    gu_p = _residual_vec(chart, path, p, (x[0] + hu, x[1]), c0)
    gu_m = _residual_vec(chart, path, p, (x[0] - hu, x[1]), c0)
    gv_p = _residual_vec(chart, path, p, (x[0], x[1] + hv), c0)
    gv_m = _residual_vec(chart, path, p, (x[0], x[1] - hv), c0)
    return np.column_stack([(gu_p - gu_m) / (2 * hu), (gv_p - gv_m) / (2 * hv)])


def _newton(chart, path, p, x0, c0, region, tol, max_iter=40):
    """Damped Newton with minimum-norm steps near rank deficiency.

    Returns (x, residual_norm, condition, converged).
    """
    (u_lo, u_hi), (v_lo, v_hi) = region
    margin_u = 0.1 * (u_hi - u_lo)
    margin_v = 0.1 * (v_hi - v_lo)
    def cond_at(pt):
        sv = np.linalg.svd(_jacobian(chart, path, p, pt, c0), compute_uv=False)
        return np.inf if sv[-1] == 0 else sv[0] / sv[-1]

    x = np.array(x0, dtype=float)
    g = _residual_vec(chart, path, p, x, c0)
    gn = np.linalg.norm(g)
    cond = None
    for _ in range(max_iter):
        if gn <= tol:
            return x, gn, cond if cond is not None else cond_at(x), True
        J = _jacobian(chart, path, p, x, c0)
        sv = np.linalg.svd(J, compute_uv=False)
        cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
        step, *_ = np.linalg.lstsq(J, -g, rcond=1e-12)
        accepted = False
        for _ in range(10):
            x_new = x + step
            if not (u_lo - margin_u <= x_new[0] <= u_hi + margin_u
                    and v_lo - margin_v <= x_new[1] <= v_hi + margin_v):
                step *= 0.5
                continue
            g_new = _residual_vec(chart, path, p, x_new, c0)
            gn_new = np.linalg.norm(g_new)
            if gn_new < gn or gn_new <= tol:
                x, g, gn = x_new, g_new, gn_new
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    if cond is None:
        cond = cond_at(x)
    return x, gn, cond, gn <= tol


def _seed_cells(g1, g2):
    """Cells where both residuals change sign or fall under the grid-scale bound."""

    def per_field(g):
        c00, c10 = g[:-1, :-1], g[1:, :-1]
        c01, c11 = g[:-1, 1:], g[1:, 1:]
        pos = (c00 > 0).astype(np.int8) + (c10 > 0) + (c01 > 0) + (c11 > 0)
        crossing = (pos > 0) & (pos < 4)
        span = np.maximum.reduce([np.abs(c10 - c00), np.abs(c01 - c00),
                                  np.abs(c11 - c10), np.abs(c11 - c01)])
        low = np.minimum.reduce([np.abs(c00), np.abs(c10),
                                 np.abs(c01), np.abs(c11)])
        return crossing | (low <= 10.0 * span)

    return per_field(g1) & per_field(g2)


def _cluster(points, cell):
    """Connected components under the link metric max(|du|, |dv|)/cell <= 2."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if (abs(points[i][0] - points[j][0]) <= 2 * cell[0]
                    and abs(points[i][1] - points[j][1]) <= 2 * cell[1]):
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _point_report(chart, path, u, v, s, tau, c0):
    rep = degeneracy_residuals(chart, path, u, v, s, c0)
    _, _, msl, msr = projection_jacobians(chart, path, u, v, s, tau, c0)
    return DegeneracyReport(
        sigma1_residual=float(rep.sigma1_residual),
        sigma2_residual=float(rep.sigma2_residual),
        nadir_flag=bool(rep.nadir_flag),
        minsv_piL=float(msl), minsv_piR=float(msr))


def find_mirror_set(chart, path, p, region, grid_n, c0, tol_root=TOL_ROOT,
                    trace_step=TRACE_STEP, eps_range=EPS_RANGE):
    """Enumerate and classify all mirror points of p inside the region.

    An empty result is valid (no mirror points).  Seeds whose Newton
    refinement diverges are discarded and counted.
    """
    if p.tau == 0:
        raise ValueError("invalid covector: tau must be nonzero")
    (u_lo, u_hi), (v_lo, v_hi) = region
    u_lin = np.linspace(u_lo, u_hi, grid_n)
    v_lin = np.linspace(v_lo, v_hi, grid_n)
    du = u_lin[1] - u_lin[0]
    dv = v_lin[1] - v_lin[0]
    U, V = np.meshgrid(u_lin, v_lin, indexing="ij")
    g1, g2 = mirror_residuals(chart, path, p, U, V, c0, eps_range)

    seeds = np.argwhere(_seed_cells(np.asarray(g1), np.asarray(g2)))
    solutions = []
    discarded = 0
    for i, j in seeds:
        x0 = (u_lin[i] + 0.5 * du, v_lin[j] + 0.5 * dv)
        x, gn, cond, ok = _newton(chart, path, p, x0, c0, region, tol_root)
        inside = (u_lo - 1e-12 <= x[0] <= u_hi + 1e-12
                  and v_lo - 1e-12 <= x[1] <= v_hi + 1e-12)
        if ok and inside:
            solutions.append((float(x[0]), float(x[1]), float(gn), float(cond)))
        else:
            discarded += 1

    isolated = []
    families = []
    if solutions:
        dedup_tol = (du / 4.0, dv / 4.0)
        clusters = _cluster([(s[0], s[1]) for s in solutions], (du, dv))
        for idxs in clusters:
            members = [solutions[i] for i in idxs]
            distinct = []
            for m in sorted(members, key=lambda m: m[2]):
                if all(abs(m[0] - d[0]) > dedup_tol[0]
                       or abs(m[1] - d[1]) > dedup_tol[1] for d in distinct):
                    distinct.append(m)
            conds = np.array([m[3] for m in members])
            if len(distinct) >= FAMILY_MIN_POINTS and np.median(conds) >= COND_FAMILY:
                seed_pt = min(distinct,
                              key=lambda m: abs(m[0] - np.median([d[0] for d in distinct])))
                fam = trace_family(chart, path, p, (seed_pt[0], seed_pt[1]), c0,
                                   region=region, step=trace_step)
                families.append(fam)
            else:
                for m in distinct:
                    q = covector_pair(chart, path, m[0], m[1], p.s, p.tau, c0)[1]
                    rep = _point_report(chart, path, m[0], m[1], p.s, p.tau, c0)
                    isolated.append(MirrorPoint(covector=q, report=rep,
                                                residual=m[2]))

    isolated.sort(key=lambda mp: (mp.covector.u, mp.covector.v))
    families.sort(key=lambda f: (f.covectors[0].u, f.covectors[0].v))
    return MirrorSet(p=p, isolated=tuple(isolated), families=tuple(families),
                     region=region, grid_n=grid_n, discarded_seeds=discarded)


def _correct(chart, path, p, x, c0, tol=1e-12, max_iter=25):
    """Least-squares Newton onto the solution set; raises on failure."""
    x = np.array(x, dtype=float)
    g = _residual_vec(chart, path, p, x, c0)
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if gn <= tol:
            return x
        J = _jacobian(chart, path, p, x, c0)
        step, *_ = np.linalg.lstsq(J, -g, rcond=1e-12)
        x_new = x + step
        g_new = _residual_vec(chart, path, p, x_new, c0)
        if np.linalg.norm(g_new) >= gn and gn > 1e-9:
            raise TraceCorrectorError(
                f"corrector stalled at residual {gn:.3e}")
        x, g = x_new, g_new
    gn = np.linalg.norm(g)
    if gn <= tol:
        return x
    raise TraceCorrectorError(f"corrector did not converge (residual {gn:.3e})")


def _null_direction(chart, path, p, x, c0):
    J = _jacobian(chart, path, p, x, c0)
    _, sv, vt = np.linalg.svd(J)
    cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
    return vt[-1], cond


def trace_family(chart, path, p, seed, c0, region=None, step=TRACE_STEP,
                 max_steps=TRACE_MAX_STEPS, tol_emit=TRACE_TOL):
    """Trace a continuous mirror family through the seed point.

    Predictor steps follow the null direction of the residual Jacobian and are
    corrected back onto the solution set; every emitted point satisfies the
    residual bound.  Stops at the region boundary, after max_steps, or when
    the curve closes; a corrector failure truncates the curve with a note.
    """
    if region is None:
        cu, cv = float(seed[0]), float(seed[1])
        region = ((cu - 1e6, cu + 1e6), (cv - 1e6, cv + 1e6))
    (u_lo, u_hi), (v_lo, v_hi) = region

    x0 = _correct(chart, path, p, seed, c0)
    d0, cond = _null_direction(chart, path, p, x0, c0)
    if cond < COND_FAMILY:
        raise TraceSeedError(
            f"residual Jacobian is nonsingular at the seed (cond {cond:.3e}); "
            "isolated solution, nothing to trace")

    def march(direction):
        pts = []
        x = x0.copy()
        d = direction.copy()
        truncated = False
        note = ""
        for _ in range(max_steps):
            x_pred = x + step * d
            if not (u_lo <= x_pred[0] <= u_hi and v_lo <= x_pred[1] <= v_hi):
                break
            try:
                x_new = _correct(chart, path, p, x_pred, c0)
            except TraceCorrectorError as err:
                truncated = True
                note = str(err)
                break
            d_new, _ = _null_direction(chart, path, p, x_new, c0)
            if float(d_new @ d) < 0:
                d_new = -d_new
            if np.linalg.norm(x_new - x0) < 0.5 * step and len(pts) > 5:
                break  # closed curve
            pts.append(x_new.copy())
            x, d = x_new, d_new
        return pts, truncated, note

    fwd, trunc_f, note_f = march(d0)
    bwd, trunc_b, note_b = march(-d0)
    xs = [*reversed(bwd), x0, *fwd]

    covectors = []
    reports = []
    max_res = 0.0
    for x in xs:
        g = _residual_vec(chart, path, p, x, c0)
        max_res = max(max_res, float(np.linalg.norm(g)))
        covectors.append(covector_pair(chart, path, x[0], x[1], p.s, p.tau, c0)[1])
        reports.append(_point_report(chart, path, x[0], x[1], p.s, p.tau, c0))
    if max_res > tol_emit:
        raise TraceCorrectorError(
            f"traced point exceeds the residual bound ({max_res:.3e})")
    return MirrorFamily(covectors=tuple(covectors), reports=tuple(reports),
                        max_residual=max_res,
                        truncated=trunc_f or trunc_b,
                        note="; ".join(n for n in (note_f, note_b) if n))
