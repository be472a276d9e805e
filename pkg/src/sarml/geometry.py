"""Surface charts, flight paths, and the range geometry built on them.

Everything here is immutable after construction and evaluates with NumPy
broadcasting, so grids of chart points or path parameters can be processed in
one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.optimize import minimize_scalar

EPS_RANGE = 1e-9


class DomainError(ValueError):
    """Evaluation point outside a chart domain or path interval."""


class PathTouchesSurfaceError(ValueError):
    """Range fell below the guard: the flight path touches the surface."""


def _norm(vec):
    return np.sqrt(np.sum(vec * vec, axis=-1))


class SurfaceChart:
    """Parametric topography psi(u, v) with first derivatives.

    Subclasses implement ``evaluate`` without domain checks; use
    :func:`eval_surface` for validated evaluation.
    """

    kind = "abstract"
    u_range = (-np.inf, np.inf)
    v_range = (-np.inf, np.inf)

    def evaluate(self, u, v):
        """Return (psi, psi_u, psi_v), each shaped broadcast(u, v) + (3,)."""
        raise NotImplementedError

    def contains(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return (
            (u >= self.u_range[0])
            & (u <= self.u_range[1])
            & (v >= self.v_range[0])
            & (v <= self.v_range[1])
        )

    @staticmethod
    def flat_plane(height=0.0):
        return FlatPlane(height=float(height))

    @staticmethod
    def cylinder(radius=1.0, axis_height=1.0, u_range=(0.0, np.pi)):
        return Cylinder(radius=float(radius), axis_height=float(axis_height),
                        u_range=(float(u_range[0]), float(u_range[1])))

    @staticmethod
    def height_field(u_axis, v_axis, heights):
        return HeightField(u_axis=np.asarray(u_axis, dtype=float),
                           v_axis=np.asarray(v_axis, dtype=float),
                           heights=np.asarray(heights, dtype=float))


@dataclass(frozen=True)
class FlatPlane(SurfaceChart):
    """psi(u, v) = (u, v, height)."""

    height: float = 0.0
    kind = "flat-plane"

    def evaluate(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        shape = u.shape + (3,)
        psi = np.zeros(shape)
        psi[..., 0] = u
        psi[..., 1] = v
        psi[..., 2] = self.height
        psi_u = np.zeros(shape)
        psi_u[..., 0] = 1.0
        psi_v = np.zeros(shape)
        psi_v[..., 1] = 1.0
        return psi, psi_u, psi_v


@dataclass(frozen=True)
class Cylinder(SurfaceChart):
    """Upper half of a cylinder with horizontal axis along y.

    psi(u, v) = (r cos u, v, z0 - r sin u) with z0 the axis height; the unit
    radius, z0 = 1 instance is the standard test topography.
    """

    radius: float = 1.0
    axis_height: float = 1.0
    u_range: tuple = (0.0, np.pi)
    kind = "cylinder"

    def evaluate(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        shape = u.shape + (3,)
        r = self.radius
        sin_u = np.sin(u)
        cos_u = np.cos(u)
        psi = np.zeros(shape)
        psi[..., 0] = r * cos_u
        psi[..., 1] = v
        psi[..., 2] = self.axis_height - r * sin_u
        psi_u = np.zeros(shape)
        psi_u[..., 0] = -r * sin_u
        psi_u[..., 2] = -r * cos_u
        psi_v = np.zeros(shape)
        psi_v[..., 1] = 1.0
        return psi, psi_u, psi_v


class HeightField(SurfaceChart):
    """psi(u, v) = (u, v, h(u, v)) from a sampled grid, bicubic interpolation.

    Bicubic keeps the first derivatives continuous, which the degeneracy
    detection needs (it differentiates them once more by finite differences).
    """

    kind = "height-field"

    def __init__(self, u_axis, v_axis, heights):
        u_axis = np.asarray(u_axis, dtype=float)
        v_axis = np.asarray(v_axis, dtype=float)
        heights = np.asarray(heights, dtype=float)
        if heights.shape != (u_axis.size, v_axis.size):
            raise ValueError("heights must have shape (len(u_axis), len(v_axis))")
        kx = min(3, u_axis.size - 1)
        ky = min(3, v_axis.size - 1)
        self._spline = RectBivariateSpline(u_axis, v_axis, heights, kx=kx, ky=ky)
        self.u_axis = u_axis
        self.v_axis = v_axis
        self.u_range = (float(u_axis[0]), float(u_axis[-1]))
        self.v_range = (float(v_axis[0]), float(v_axis[-1]))

    def evaluate(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        u, v = np.broadcast_arrays(u, v)
        uf = u.ravel()
        vf = v.ravel()
        h = self._spline.ev(uf, vf).reshape(u.shape)
        h_u = self._spline.ev(uf, vf, dx=1).reshape(u.shape)
        h_v = self._spline.ev(uf, vf, dy=1).reshape(u.shape)
        shape = u.shape + (3,)
        psi = np.zeros(shape)
        psi[..., 0] = u
        psi[..., 1] = v
        psi[..., 2] = h
        psi_u = np.zeros(shape)
        psi_u[..., 0] = 1.0
        psi_u[..., 2] = h_u
        psi_v = np.zeros(shape)
        psi_v[..., 1] = 1.0
        psi_v[..., 2] = h_v
        return psi, psi_u, psi_v


class FlightPath:
    """Unit-speed curve gamma(s) with velocity.

    Subclasses implement ``evaluate`` without interval checks; use
    :func:`eval_path` for validated evaluation.
    """

    kind = "abstract"
    s_range = (-np.inf, np.inf)

    def evaluate(self, s):
        """Return (gamma, dgamma), each shaped s.shape + (3,)."""
        raise NotImplementedError

    def contains(self, s):
        s = np.asarray(s, dtype=float)
        return (s >= self.s_range[0]) & (s <= self.s_range[1])

    @staticmethod
    def straight(point=(0.0, 0.0, 1.0), direction=(0.0, 1.0, 0.0),
                 s_range=(-np.inf, np.inf)):
        return StraightPath(point, direction, s_range)

    @staticmethod
    def circle(center=(0.0, 0.0, 1.0), radius=1.0,
               e1=(1.0, 0.0, 0.0), e2=(0.0, 1.0, 0.0),
               s_range=(-np.inf, np.inf)):
        return CirclePath(center, radius, e1, e2, s_range)

    @staticmethod
    def spline(s_samples, points):
        return SplinePath(s_samples, points)


class StraightPath(FlightPath):
    """gamma(s) = point + s * direction, direction normalised at construction."""

    kind = "straight-line"

    def __init__(self, point, direction, s_range=(-np.inf, np.inf)):
        self.point = np.asarray(point, dtype=float)
        d = np.asarray(direction, dtype=float)
        nd = float(np.linalg.norm(d))
        if nd == 0.0:
            raise ValueError("direction must be nonzero")
        self.direction = d / nd
        self.s_range = (float(s_range[0]), float(s_range[1]))

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        gamma = self.point + s[..., None] * self.direction
        dgamma = np.broadcast_to(self.direction, s.shape + (3,)).copy()
        return gamma, dgamma


class CirclePath(FlightPath):
    """Arc-length parameterised circle: centre + r(cos(s/r) e1 + sin(s/r) e2)."""

    kind = "circle"

    def __init__(self, center, radius, e1=(1.0, 0.0, 0.0), e2=(0.0, 1.0, 0.0),
                 s_range=(-np.inf, np.inf)):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        e1 = np.asarray(e1, dtype=float)
        e2 = np.asarray(e2, dtype=float)
        if (abs(np.linalg.norm(e1) - 1) > 1e-12 or abs(np.linalg.norm(e2) - 1) > 1e-12
                or abs(float(e1 @ e2)) > 1e-12):
            raise ValueError("e1, e2 must be orthonormal")
        self.e1 = e1
        self.e2 = e2
        self.s_range = (float(s_range[0]), float(s_range[1]))

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        phase = s / self.radius
        c = np.cos(phase)[..., None]
        sn = np.sin(phase)[..., None]
        gamma = self.center + self.radius * (c * self.e1 + sn * self.e2)
        dgamma = -sn * self.e1 + c * self.e2
        return gamma, dgamma


class SplinePath(FlightPath):
    """Cubic-spline interpolation of sampled path positions."""

    kind = "sampled-spline"

    def __init__(self, s_samples, points):
        s_samples = np.asarray(s_samples, dtype=float)
        points = np.asarray(points, dtype=float)
        if points.shape != (s_samples.size, 3):
            raise ValueError("points must have shape (len(s_samples), 3)")
        self._spline = CubicSpline(s_samples, points, axis=0)
        self._dspline = self._spline.derivative()
        self.s_samples = s_samples
        self.s_range = (float(s_samples[0]), float(s_samples[-1]))

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        return self._spline(s), self._dspline(s)


@dataclass(frozen=True)
class AcquisitionWindow:
    """Recording window: path interval, two-way time interval, wave speed."""

    s_interval: tuple
    t_interval: tuple
    c0: float

    def __post_init__(self):
        s1, s2 = self.s_interval
        t1, t2 = self.t_interval
        if not s2 > s1:
            raise ValueError("s interval must satisfy s2 > s1")
        if not (t2 > t1 > 0):
            raise ValueError("t interval must satisfy t2 > t1 > 0")
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")


@dataclass(frozen=True)
class GeometryEval:
    """Range vector data for one or more (u, v, s) triples.

    tangent_covector holds the chart pairings (rhat . psi_u, rhat . psi_v),
    i.e. the chart components of the travel-time gradient up to the 2/c0
    factor; for non-orthonormal charts this differs from the orthogonal
    projection of rhat onto the tangent plane.
    """

    R: np.ndarray
    range: np.ndarray
    rhat: np.ndarray
    travel_time: np.ndarray
    tangent_covector: np.ndarray


def eval_surface(chart, u, v):
    """Validated chart evaluation: (psi, psi_u, psi_v)."""
    if not np.all(chart.contains(u, v)):
        raise DomainError(f"point outside {chart.kind} chart domain")
    return chart.evaluate(u, v)


def eval_path(path, s):
    """Validated path evaluation: (gamma, dgamma)."""
    if not np.all(path.contains(s)):
        raise DomainError(f"parameter outside {path.kind} path interval")
    return path.evaluate(s)


def raw_geometry(chart, path, u, v, s, c0, eps_range=EPS_RANGE):
    """Geometry evaluation without domain checks (for internal stencils)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=float)
    u, v, s = np.broadcast_arrays(u, v, s)
    psi, psi_u, psi_v = chart.evaluate(u, v)
    gamma, dgamma = path.evaluate(s)
    R = psi - gamma
    rng = _norm(R)
    if np.any(rng <= eps_range):
        raise PathTouchesSurfaceError(
            f"range at or below {eps_range:g}: flight path touches the surface")
    rhat = R / rng[..., None]
    travel_time = 2.0 * rng / c0
    tangent_covector = np.stack(
        [np.sum(rhat * psi_u, axis=-1), np.sum(rhat * psi_v, axis=-1)], axis=-1)
    return GeometryEval(R=R, range=rng, rhat=rhat, travel_time=travel_time,
                        tangent_covector=tangent_covector), dgamma


def eval_geometry(chart, path, u, v, s, c0, eps_range=EPS_RANGE):
    """Range vector, travel time, and tangent-plane covector at (u, v, s)."""
    if not np.all(chart.contains(u, v)):
        raise DomainError(f"point outside {chart.kind} chart domain")
    if not np.all(path.contains(s)):
        raise DomainError(f"parameter outside {path.kind} path interval")
    geo, _ = raw_geometry(chart, path, u, v, s, c0, eps_range)
    return geo


def travel_time_extrema(chart, path, window, u, v, n_samples=256):
    """Min and max of the two-way travel time over the window's s interval."""
    s1, s2 = window.s_interval
    s_grid = np.linspace(s1, s2, n_samples)
    geo, _ = raw_geometry(chart, path, u, v, s_grid, window.c0)
    tt = geo.travel_time

    def tt_of(s):
        g, _ = raw_geometry(chart, path, u, v, s, window.c0)
        return float(g.travel_time)

    t_lo = float(np.min(tt))
    t_hi = float(np.max(tt))
    # refine interior extrema brackets by bounded scalar minimisation
    for sign in (1.0, -1.0):
        y = sign * tt
        interior = np.nonzero((y[1:-1] <= y[:-2]) & (y[1:-1] <= y[2:]))[0] + 1
        for i in interior:
            res = minimize_scalar(lambda s: sign * tt_of(s),
                                  bounds=(s_grid[i - 1], s_grid[i + 1]),
                                  method="bounded",
                                  options={"xatol": 1e-10})
            val = sign * res.fun
            t_lo = min(t_lo, val)
            t_hi = max(t_hi, val)
    return t_lo, t_hi


def in_visible_set(chart, path, window, u, v, n_samples=256):
    """True iff some s in the window brings the travel time inside (t1, t2)."""
    t1, t2 = window.t_interval
    if not (t2 > t1):
        return False
    t_lo, t_hi = travel_time_extrema(chart, path, window, u, v, n_samples)
    return bool(t_lo < t2 and t_hi > t1)


@dataclass(frozen=True)
class SelfTestReport:
    max_surface_error: float
    max_path_error: float
    tolerance: float

    @property
    def passed(self):
        return max(self.max_surface_error, self.max_path_error) <= self.tolerance


def derivative_selftest(chart, path, u_samples, v_samples, s_samples,
                        h=1e-5, tolerance=1e-6):
    """Compare analytic first derivatives against central finite differences."""
    u = np.asarray(u_samples, dtype=float)
    v = np.asarray(v_samples, dtype=float)
    s = np.asarray(s_samples, dtype=float)

    _, psi_u, psi_v = chart.evaluate(u, v)
    fd_u = (chart.evaluate(u + h, v)[0] - chart.evaluate(u - h, v)[0]) / (2 * h)
    fd_v = (chart.evaluate(u, v + h)[0] - chart.evaluate(u, v - h)[0]) / (2 * h)
    surf_err = max(float(np.max(np.abs(psi_u - fd_u))),
                   float(np.max(np.abs(psi_v - fd_v))))

    _, dgamma = path.evaluate(s)
    fd_s = (path.evaluate(s + h)[0] - path.evaluate(s - h)[0]) / (2 * h)
    path_err = float(np.max(np.abs(dgamma - fd_s)))

    return SelfTestReport(max_surface_error=surf_err, max_path_error=path_err,
                          tolerance=tolerance)
