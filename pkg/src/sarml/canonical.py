"""Pointwise covector transport, projection Jacobians, and degeneracy maps.

The forward operator moves a scene singularity at (u, v) with frequency
parameter tau to a data singularity at (s, t); this module evaluates that
pairing, the 4x4 Jacobians of its left/right projections in the intrinsic
(s, tau, u, v) parameterisation, and the parallelism residuals that detect
where either projection drops rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import EPS_RANGE, raw_geometry

FD_STEP = 1e-5
EPS_PARALLEL = 1e-6
EPS_NADIR = 1e-9
EPS_RANK = 1e-6
EPS_GRAPH_FRACTION = 0.01


@dataclass(frozen=True)
class DataCovector:
    """Point of the data cotangent space: (s, t, sigma, tau), tau != 0."""

    s: float
    t: float
    sigma: float
    tau: float

    def as_array(self):
        return np.array([self.s, self.t, self.sigma, self.tau])

    def scaled(self, lam):
        """Scale the fibre components; the base point is unchanged."""
        return DataCovector(self.s, self.t, lam * self.sigma, lam * self.tau)


@dataclass(frozen=True)
class SceneCovector:
    """Point of the scene cotangent space: (u, v, xi, eta)."""

    u: float
    v: float
    xi: float
    eta: float

    def as_array(self):
        return np.array([self.u, self.v, self.xi, self.eta])

    @property
    def fiber_norm(self):
        return float(np.hypot(self.xi, self.eta))


@dataclass(frozen=True)
class DegeneracyReport:
    """Normalised parallelism residuals and projection rank indicators."""

    sigma1_residual: np.ndarray
    sigma2_residual: np.ndarray
    nadir_flag: np.ndarray
    minsv_piL: np.ndarray
    minsv_piR: np.ndarray


def _components(chart, path, u, v, s, c0, eps_range=EPS_RANGE):
    """travel time, along-track Doppler factor, tangent covector (vectorised)."""
    geo, dgamma = raw_geometry(chart, path, u, v, s, c0, eps_range)
    doppler = np.sum(geo.rhat * dgamma, axis=-1)
    return geo.travel_time, doppler, geo.tangent_covector


def covector_pair(chart, path, u, v, s, tau, c0, eps_range=EPS_RANGE):
    """Map a scene point with frequency weight tau to its covector pair.

    Returns (p, q): the data covector (s, t, sigma, tau) and the scene
    covector (u, v, xi, eta) with (xi, eta) = +(2 tau / c0) times the
    tangent covector.  At a nadir point the scene fibre is (0, 0); callers
    that need a nonzero fibre must check it.
    """
    if tau == 0:
        raise ValueError("invalid covector: tau must be nonzero")
    t, dop, a = _components(chart, path, u, v, s, c0, eps_range)
    scale = 2.0 * tau / c0
    p = DataCovector(float(s), float(t), float(scale * dop), float(tau))
    q = SceneCovector(float(u), float(v), float(scale * a[..., 0]),
                      float(scale * a[..., 1]))
    return p, q


def _cross_residual(a, b, eps_nadir):
    """|a x b| / (|a||b|) for stacked 2-vectors; 0 where either vanishes."""
    na = np.hypot(a[..., 0], a[..., 1])
    nb = np.hypot(b[..., 0], b[..., 1])
    cross = np.abs(a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])
    ok = (na > eps_nadir) & (nb > eps_nadir)
    denom = np.where(ok, na * nb, 1.0)
    return np.where(ok, cross / denom, 0.0)


def degeneracy_residuals(chart, path, u, v, s, c0, fd_step=FD_STEP,
                         eps_nadir=EPS_NADIR, eps_range=EPS_RANGE):
    """Parallelism residuals of the two degeneracy conditions (vectorised).

    sigma1: tangent covector vs the (u, v) gradient of the Doppler factor.
    sigma2: tangent covector vs its own s derivative.
    Residuals are scale invariant; both are reported as 0 at nadir points
    (vanishing tangent covector) together with nadir_flag.  The minsv fields
    are NaN here; use :func:`projection_jacobians` or :func:`degeneracy_map`
    to fill them.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)
    u, v, s = np.broadcast_arrays(u, v, s)
    h = fd_step

    _, dop, a = _components(chart, path, u, v, s, c0, eps_range)
    _, dop_up, a_up = _components(chart, path, u + h, v, s, c0, eps_range)
    _, dop_um, a_um = _components(chart, path, u - h, v, s, c0, eps_range)
    _, dop_vp, a_vp = _components(chart, path, u, v + h, s, c0, eps_range)
    _, dop_vm, a_vm = _components(chart, path, u, v - h, s, c0, eps_range)
    _, _, a_sp = _components(chart, path, u, v, s + h, c0, eps_range)
    _, _, a_sm = _components(chart, path, u, v, s - h, c0, eps_range)

    grad_dop = np.stack([(dop_up - dop_um) / (2 * h),
                         (dop_vp - dop_vm) / (2 * h)], axis=-1)
    ds_a = (a_sp - a_sm) / (2 * h)

    nadir = np.hypot(a[..., 0], a[..., 1]) <= eps_nadir
    sig1 = _cross_residual(a, grad_dop, eps_nadir)
    sig2 = _cross_residual(a, ds_a, eps_nadir)
    nan = np.full(np.shape(sig1), np.nan)
    return DegeneracyReport(sigma1_residual=sig1, sigma2_residual=sig2,
                            nadir_flag=nadir, minsv_piL=nan, minsv_piR=nan)


def projection_jacobians(chart, path, u, v, s, tau, c0, fd_step=FD_STEP,
                         eps_range=EPS_RANGE):
    """Jacobians of the left/right projections over (s, tau, u, v).

    Returns (JL, JR, minsv_L, minsv_R); JL rows are d(s, t, sigma, tau) and
    JR rows d(u, v, xi, eta), both against columns (s, tau, u, v).  Geometry
    derivatives use central differences with a relative step; tau enters the
    fibre components linearly, so its column is exact.
    """
    if tau == 0:
        raise ValueError("invalid covector: tau must be nonzero")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)
    u, v, s = np.broadcast_arrays(u, v, s)
    shape = u.shape
    scale = 2.0 * tau / c0

    h_s = fd_step * np.maximum(1.0, np.abs(s))
    h_u = fd_step * np.maximum(1.0, np.abs(u))
    h_v = fd_step * np.maximum(1.0, np.abs(v))

    t0, dop0, a0 = _components(chart, path, u, v, s, c0, eps_range)

    def diff(plus, minus, h):
        out = []
        for p, m in zip(plus, minus):
            d = p - m
            step = h if d.shape == np.shape(h) else h[..., None]
            out.append(d / (2 * step))
        return tuple(out)

    d_s = diff(_components(chart, path, u, v, s + h_s, c0, eps_range),
               _components(chart, path, u, v, s - h_s, c0, eps_range), h_s)
    d_u = diff(_components(chart, path, u + h_u, v, s, c0, eps_range),
               _components(chart, path, u - h_u, v, s, c0, eps_range), h_u)
    d_v = diff(_components(chart, path, u, v + h_v, s, c0, eps_range),
               _components(chart, path, u, v - h_v, s, c0, eps_range), h_v)

    zeros = np.zeros(shape)
    ones = np.ones(shape)

    def rows(dt_s, dt_u, dt_v, dd_s, dd_u, dd_v):
        # rows: s, t, sigma, tau against columns (s, tau, u, v)
        return np.stack([
            np.stack([ones, zeros, zeros, zeros], axis=-1),
            np.stack([dt_s, zeros, dt_u, dt_v], axis=-1),
            np.stack([scale * dd_s, (2.0 / c0) * dop0, scale * dd_u,
                      scale * dd_v], axis=-1),
            np.stack([zeros, ones, zeros, zeros], axis=-1),
        ], axis=-2)

    JL = rows(d_s[0], d_u[0], d_v[0], d_s[1], d_u[1], d_v[1])

    def fiber_rows(k):
        return np.stack([scale * d_s[2][..., k], (2.0 / c0) * a0[..., k],
                         scale * d_u[2][..., k], scale * d_v[2][..., k]], axis=-1)

    JR = np.stack([
        np.stack([zeros, zeros, ones, zeros], axis=-1),
        np.stack([zeros, zeros, zeros, ones], axis=-1),
        fiber_rows(0),
        fiber_rows(1),
    ], axis=-2)

    sv_L = np.linalg.svd(JL, compute_uv=False)
    sv_R = np.linalg.svd(JR, compute_uv=False)
    return JL, JR, sv_L[..., -1], sv_R[..., -1]


@dataclass(frozen=True)
class DegeneracyMap:
    """Grid sweep of degeneracy residuals and projection rank indicators."""

    u_grid: np.ndarray
    v_grid: np.ndarray
    s: float
    tau: float
    c0: float
    report: DegeneracyReport
    flagged: np.ndarray
    eps_parallel: float
    eps_graph_L: float
    eps_graph_R: float


def degeneracy_map(chart, path, u_grid, v_grid, s, tau, c0,
                   eps_parallel=EPS_PARALLEL, fd_step=FD_STEP,
                   eps_nadir=EPS_NADIR, eps_range=EPS_RANGE):
    """Evaluate residuals and minimal singular values over a (u, v) grid.

    Flags points where either residual falls at or below eps_parallel
    (nadir points included).  The graph-type floor eps_graph is calibrated as
    a fixed fraction of the median minimal singular value over the grid.
    """
    u_grid = np.asarray(u_grid, dtype=float)
    v_grid = np.asarray(v_grid, dtype=float)
    U, V = np.meshgrid(u_grid, v_grid, indexing="ij")

    rep = degeneracy_residuals(chart, path, U, V, s, c0, fd_step, eps_nadir,
                               eps_range)
    _, _, minsv_L, minsv_R = projection_jacobians(chart, path, U, V, s, tau,
                                                  c0, fd_step, eps_range)
    report = DegeneracyReport(sigma1_residual=rep.sigma1_residual,
                              sigma2_residual=rep.sigma2_residual,
                              nadir_flag=rep.nadir_flag,
                              minsv_piL=minsv_L, minsv_piR=minsv_R)
    flagged = (np.minimum(rep.sigma1_residual, rep.sigma2_residual)
               <= eps_parallel)
    eps_graph_L = EPS_GRAPH_FRACTION * float(np.median(minsv_L))
    eps_graph_R = EPS_GRAPH_FRACTION * float(np.median(minsv_R))
    return DegeneracyMap(u_grid=u_grid, v_grid=v_grid, s=float(s),
                         tau=float(tau), c0=float(c0), report=report,
                         flagged=flagged, eps_parallel=eps_parallel,
                         eps_graph_L=eps_graph_L, eps_graph_R=eps_graph_R)
