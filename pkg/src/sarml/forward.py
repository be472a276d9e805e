"""Forward data simulation: delta-shell and band-limited modes.

The delta-shell mode integrates A*V/|grad T| along iso-range curves
{T(u, v; s) = t} of the two-way travel time, extracted from the scene grid by
marching squares.  The band-limited mode truncates the frequency integral to
|omega| <= Omega and converges to the delta-shell value as Omega grows.  The
normalisation pairs the data with a plain delta (no 2*pi factor) so the
unit-radius cylinder scenario reproduces its closed form; the band-limited
mode carries the compensating 1/(2*pi).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import DomainError

GRAD_EPS = 1e-9
EPS_ALPHA = 0.05


class ConfigurationError(ValueError):
    """Invalid numerical configuration (grids, quadrature sizes, tags)."""


class NearCriticalWarning(RuntimeWarning):
    """Segments near travel-time critical points were skipped."""


@dataclass(frozen=True)
class AmplitudeSpec:
    """Constant-one amplitude or a user-supplied smooth taper a(u, v, s) >= 0."""

    taper: object = None

    @property
    def tag(self):
        return "constant" if self.taper is None else "taper"

    def sample(self, U, V, s):
        if self.taper is None:
            return None
        a = np.asarray(self.taper(U, V, s), dtype=float)
        if np.any(a < 0):
            raise ConfigurationError("amplitude taper must be nonnegative")
        return a

    @staticmethod
    def one():
        return AmplitudeSpec()


class SceneField:
    """Reflectivity samples on a uniform chart grid, with cached geometry.

    The chart position and tangent fields depend only on the grid, so they are
    evaluated once here and reused for every antenna position.
    """

    def __init__(self, chart, u_grid, v_grid, values):
        u_grid = np.asarray(u_grid, dtype=float)
        v_grid = np.asarray(v_grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.shape != (u_grid.size, v_grid.size):
            raise ValueError("values must have shape (len(u_grid), len(v_grid))")
        if u_grid.size < 2 or v_grid.size < 2:
            raise ValueError("scene grid needs at least 2 samples per axis")
        du = np.diff(u_grid)
        dv = np.diff(v_grid)
        if (np.any(du <= 0) or np.any(dv <= 0)
                or np.max(np.abs(du - du[0])) > 1e-9 * abs(du[0])
                or np.max(np.abs(dv - dv[0])) > 1e-9 * abs(dv[0])):
            raise ValueError("scene grids must be uniform and increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("scene samples must be finite")
        if not np.all(chart.contains(u_grid[:, None], v_grid[None, :])):
            raise DomainError("scene grid extends outside the chart domain")
        self.chart = chart
        self.u_grid = u_grid
        self.v_grid = v_grid
        self.values = values
        self.du = float(du[0])
        self.dv = float(dv[0])
        U, V = np.meshgrid(u_grid, v_grid, indexing="ij")
        self.U = U
        self.V = V
        psi, psi_u, psi_v = chart.evaluate(U, V)
        # contiguous per-component caches: the per-position sweep reduces over
        # them elementwise, which is much faster than strided axis reductions
        self._p = tuple(np.ascontiguousarray(psi[..., k]) for k in range(3))
        self._pu = tuple(np.ascontiguousarray(psi_u[..., k]) for k in range(3))
        self._pv = tuple(np.ascontiguousarray(psi_v[..., k]) for k in range(3))

    def with_values(self, values):
        """Same grid and cached geometry, new samples."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise ValueError("values shape mismatch")
        clone = object.__new__(SceneField)
        clone.__dict__.update(self.__dict__)
        clone.values = values
        return clone

    def travel_fields(self, path, s, c0):
        """(T, GT, t_min): travel time, |grad T|, and its grid minimum at s."""
        gamma, _ = path.evaluate(np.asarray(s, dtype=float))
        g = np.asarray(gamma, dtype=float).reshape(3)
        dx = self._p[0] - g[0]
        dy = self._p[1] - g[1]
        dz = self._p[2] - g[2]
        rng = np.sqrt(dx * dx + dy * dy + dz * dz)
        T = (2.0 / c0) * rng
        a0 = (dx * self._pu[0] + dy * self._pu[1] + dz * self._pu[2]) / rng
        a1 = (dx * self._pv[0] + dy * self._pv[1] + dz * self._pv[2]) / rng
        GT = (2.0 / c0) * np.hypot(a0, a1)
        return T, GT, float(T.min())


@dataclass(frozen=True)
class Sinogram:
    """Simulated data grid with its acquisition window and mode tags."""

    window: object
    s_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray       # shape (n_t, n_s)
    mask: np.ndarray         # True where the near-range guard applies
    skipped: np.ndarray      # near-critical segment counts per cell
    mode: str
    amplitude_tag: str
    omega_max: float = None

    def masked_values(self):
        out = self.values.copy()
        out[self.mask] = np.nan
        return out


def _va_grid(scene, amplitude, s):
    a = amplitude.sample(scene.U, scene.V, s)
    return scene.values if a is None else scene.values * a


def delta_shell_forward(scene, path, amplitude, s, t, c0, grad_eps=GRAD_EPS):
    """Weighted line integral of A*V/|grad T| over the iso-range curve T = t.

    Segments where the interpolated |grad T| falls at or below grad_eps sit
    near travel-time critical points; they are skipped and reported through a
    NearCriticalWarning.
    """
    T, GT, _ = scene.travel_fields(path, s, c0)
    va = _va_grid(scene, amplitude, s)
    vals, skipped = kernels.level_set_sums(T, va, GT, scene.du, scene.dv,
                                           float(t), 1.0, 1, grad_eps)
    if skipped[0]:
        warnings.warn(f"{int(skipped[0])} near-critical segments skipped at "
                      f"(s={s:g}, t={t:g})", NearCriticalWarning, stacklevel=2)
    return float(vals[0])


def forward_sinogram(scene, path, amplitude, window, n_s, n_t,
                     grad_eps=GRAD_EPS, eps_alpha=EPS_ALPHA, threads=1):
    """Delta-shell forward data on the full acquisition grid.

    Cells with t below the per-position minimal travel time plus the
    near-range guard eps_alpha are masked; per-cell near-critical skip counts
    are recorded instead of aborting the sweep.
    """
    s1, s2 = window.s_interval
    t1, t2 = window.t_interval
    c0 = window.c0
    if n_s < 2 or n_t < 2:
        raise ConfigurationError("sinogram grids need at least 2 samples per axis")
    s_grid = np.linspace(s1, s2, n_s)
    t_grid = np.linspace(t1, t2, n_t)
    dt = float(t_grid[1] - t_grid[0])

    values = np.zeros((n_t, n_s))
    skipped = np.zeros((n_t, n_s), dtype=np.int64)
    mask = np.zeros((n_t, n_s), dtype=bool)

    def column(i):
        s = float(s_grid[i])
        T, GT, t_min = scene.travel_fields(path, s, c0)
        va = _va_grid(scene, amplitude, s)
        vals, skip = kernels.level_set_sums(T, va, GT, scene.du, scene.dv,
                                            float(t_grid[0]), dt, n_t, grad_eps)
        return i, vals, skip, t_min

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(column, range(n_s)))
    else:
        results = [column(i) for i in range(n_s)]

    for i, vals, skip, t_min in results:
        values[:, i] = vals
        skipped[:, i] = skip
        mask[:, i] = t_grid - t_min < eps_alpha

    return Sinogram(window=window, s_grid=s_grid, t_grid=t_grid, values=values,
                    mask=mask, skipped=skipped, mode="delta-shell",
                    amplitude_tag=amplitude.tag)


def bandlimited_forward(scene, path, amplitude, s, t, omega_max, n_omega, c0):
    """Frequency-truncated forward value at one (s, t) point.

    (1/2pi) * int_{|omega|<=Omega} sum_grid A V exp(-i omega (t - T)) du dv,
    trapezoid rule in omega with n_omega nodes, scene-grid summation in
    (u, v); the real part is returned.
    """
    if omega_max <= 0:
        raise ConfigurationError("omega_max must be positive")
    if n_omega < 16:
        raise ConfigurationError("n_omega must be at least 16")
    T, _, _ = scene.travel_fields(path, s, c0)
    va = _va_grid(scene, amplitude, s)
    x = (t - T).ravel()
    w = (va * (scene.du * scene.dv)).ravel()
    domega = 2.0 * omega_max / (n_omega - 1)
    total = kernels.bandlimited_cosine_sum(x, w, -omega_max, domega, n_omega)
    return float(total * domega / (2.0 * math.pi))


def cylinder_closed_form(s, t, integral_f, c0):
    """Closed-form data value for the unit-radius cylinder with axial path.

    Valid for the scene V = f(u)H(v) with H the unit step (H(0) = 1):
    (c0^2/4) * t * [H(s + alpha) + H(s - alpha)] / alpha * integral_f with
    alpha = sqrt(c0^2 t^2 / 4 - 1).  Requires c0*t/2 > 1 (the two-way time
    must exceed the closest-range time).
    """
    ct = 0.5 * c0 * t
    if ct <= 1.0:
        raise DomainError("closed form needs c0*t/2 > 1 (alpha real and positive)")
    alpha = math.sqrt(ct * ct - 1.0)
    h = (1.0 if s + alpha >= 0 else 0.0) + (1.0 if s - alpha >= 0 else 0.0)
    return 0.25 * c0 * c0 * t * h / alpha * integral_f


def cylinder_jump_halfwidth(t, c0):
    """alpha(t): half-width of the illuminated s-interval in the cylinder case."""
    ct = 0.5 * c0 * t
    if ct <= 1.0:
        raise DomainError("alpha is undefined for c0*t/2 <= 1")
    return math.sqrt(ct * ct - 1.0)
