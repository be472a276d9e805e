"""Scenario configuration: JSON schema, validation, and object builders.

A scenario is a single versioned JSON document; unknown keys are rejected.
Every numerical tolerance used by the analysis modules has an override key in
the "tolerances" section with the documented default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import jsonschema
import numpy as np

from .cancellation import ISOMETRY_TAGS
from .forward import SceneField
from .geometry import AcquisitionWindow, FlightPath, SurfaceChart


class ConfigError(ValueError):
    """Invalid scenario configuration; message names the offending location."""


@dataclass(frozen=True)
class Tolerances:
    """All tunable tolerances with their documented defaults."""

    eps_range: float = 1e-9          # guard against the zero-range singularity
    eps_parallel: float = 1e-6       # parallelism residual flag threshold
    eps_nadir: float = 1e-9          # vanishing tangent-covector threshold
    eps_rank: float = 1e-6           # singular-value floor for rank drops
    eps_graph_fraction: float = 0.01  # graph-type floor, fraction of median
    fd_step: float = 1e-5            # central-difference step
    tol_root: float = 1e-10          # Newton residual target for mirror roots
    trace_step: float = 0.02         # family continuation arc step
    trace_max_steps: int = 10_000    # family continuation step cap
    trace_tol: float = 1e-8          # residual bound on emitted family points
    grad_eps: float = 1e-9           # |grad T| floor before skipping a segment
    eps_alpha: float = 0.05          # near-range guard band on t - t_min
    oracle_rtol: float = 0.01        # closed-form comparison tolerance
    tol_cancel_quadrature: float = 1e-3   # cancellation ratio, quadrature demos
    tol_cancel_exact: float = 1e-9        # cancellation ratio, exact symmetry
    smooth_factor: float = 3.0       # smooth verdict multiple of calibration
    jump_local_factor: float = 4.0   # jump dominance over nearby differences
    visible_samples: int = 256       # s samples for the visible-set test
    selftest_fd_step: float = 1e-5
    selftest_tol: float = 1e-6


_TOL_PROPS = {f.name: {"type": "number", "exclusiveMinimum": 0}
              for f in fields(Tolerances)}
_TOL_PROPS["trace_max_steps"] = {"type": "integer", "minimum": 1}
_TOL_PROPS["visible_samples"] = {"type": "integer", "minimum": 8}

_VEC3 = {"type": "array", "items": {"type": "number"},
         "minItems": 3, "maxItems": 3}
_PAIR = {"type": "array", "items": {"type": "number"},
         "minItems": 2, "maxItems": 2}
_REGION = {"type": "array", "items": _PAIR, "minItems": 2, "maxItems": 2}

_F_SPEC = {
    "oneOf": [
        {"type": "string", "enum": ["sin_u", "sin_2u", "sin_3u"]},
        {"type": "object",
         "properties": {
             "kind": {"const": "bump"},
             "center": {"type": "number"},
             "width": {"type": "number", "exclusiveMinimum": 0},
             "amplitude": {"type": "number"},
         },
         "required": ["kind", "center", "width"],
         "additionalProperties": False},
    ]
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "surface": {
            "oneOf": [
                {"type": "object",
                 "properties": {"kind": {"const": "flat-plane"},
                                "height": {"type": "number"}},
                 "required": ["kind"], "additionalProperties": False},
                {"type": "object",
                 "properties": {"kind": {"const": "cylinder"},
                                "radius": {"type": "number",
                                           "exclusiveMinimum": 0},
                                "axis_height": {"type": "number"},
                                "u_range": _PAIR},
                 "required": ["kind"], "additionalProperties": False},
                {"type": "object",
                 "properties": {"kind": {"const": "height-field"},
                                "u_axis": {"type": "array",
                                           "items": {"type": "number"}},
                                "v_axis": {"type": "array",
                                           "items": {"type": "number"}},
                                "heights": {"type": "array",
                                            "items": {"type": "array",
                                                      "items": {"type": "number"}}}},
                 "required": ["kind", "u_axis", "v_axis", "heights"],
                 "additionalProperties": False},
            ]
        },
        "path": {
            "oneOf": [
                {"type": "object",
                 "properties": {"kind": {"const": "straight-line"},
                                "point": _VEC3, "direction": _VEC3},
                 "required": ["kind", "point", "direction"],
                 "additionalProperties": False},
                {"type": "object",
                 "properties": {"kind": {"const": "circle"},
                                "center": _VEC3,
                                "radius": {"type": "number",
                                           "exclusiveMinimum": 0},
                                "e1": _VEC3, "e2": _VEC3},
                 "required": ["kind", "center", "radius"],
                 "additionalProperties": False},
                {"type": "object",
                 "properties": {"kind": {"const": "spline"},
                                "s_samples": {"type": "array",
                                              "items": {"type": "number"},
                                              "minItems": 4},
                                "points": {"type": "array", "items": _VEC3,
                                           "minItems": 4}},
                 "required": ["kind", "s_samples", "points"],
                 "additionalProperties": False},
            ]
        },
        "window": {
            "type": "object",
            "properties": {"s": _PAIR, "t": _PAIR,
                           "c0": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["s", "t", "c0"],
            "additionalProperties": False,
        },
        "scene": {
            "oneOf": [
                {"type": "object",
                 "properties": {"kind": {"const": "heaviside-product"},
                                "f": _F_SPEC,
                                "u_range": _PAIR, "v_range": _PAIR},
                 "required": ["kind", "f", "u_range", "v_range"],
                 "additionalProperties": False},
                {"type": "object",
                 "properties": {"kind": {"const": "file"},
                                "path": {"type": "string"}},
                 "required": ["kind", "path"],
                 "additionalProperties": False},
                {"type": "object",
                 "properties": {"kind": {"const": "symmetric-pair"},
                                "isometry": {"enum": list(ISOMETRY_TAGS)},
                                "u_halfwidth": {"type": "number",
                                                "exclusiveMinimum": 0},
                                "v_range": _PAIR,
                                "v_cut": {"type": "number"},
                                "bumps": {"type": "array",
                                          "items": {
                                              "type": "object",
                                              "properties": {
                                                  "u": {"type": "number"},
                                                  "v": {"type": "number"},
                                                  "width": {"type": "number",
                                                            "exclusiveMinimum": 0},
                                                  "amplitude": {"type": "number"},
                                              },
                                              "required": ["u", "v", "width"],
                                              "additionalProperties": False}},
                                "seed": {"type": "integer", "minimum": 0},
                                "n_random_bumps": {"type": "integer",
                                                   "minimum": 1}},
                 "required": ["kind", "isometry", "u_halfwidth", "v_range"],
                 "additionalProperties": False},
            ]
        },
        "grids": {
            "type": "object",
            "properties": {
                "n_u": {"type": "integer", "minimum": 2},
                "n_v": {"type": "integer", "minimum": 2},
                "n_s": {"type": "integer", "minimum": 2},
                "n_t": {"type": "integer", "minimum": 2},
                "n_omega": {"type": "integer", "minimum": 16},
                "omega_max": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["n_u", "n_v", "n_s", "n_t"],
            "additionalProperties": False,
        },
        "analyses": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {"type": "object",
                     "properties": {"kind": {"const": "simulate"},
                                    "tag": {"type": "string"},
                                    "mode": {"enum": ["delta-shell",
                                                      "band-limited"]},
                                    "oracle": {"enum": ["cylinder-closed-form"]}},
                     "required": ["kind", "tag"],
                     "additionalProperties": False},
                    {"type": "object",
                     "properties": {"kind": {"const": "mirrors"},
                                    "tag": {"type": "string"},
                                    "p": {"type": "array",
                                          "items": {"type": "number"},
                                          "minItems": 4, "maxItems": 4},
                                    "region": _REGION,
                                    "grid_n": {"type": "integer",
                                               "minimum": 8}},
                     "required": ["kind", "tag", "p"],
                     "additionalProperties": False},
                    {"type": "object",
                     "properties": {"kind": {"const": "degeneracy"},
                                    "tag": {"type": "string"},
                                    "s": {"type": "number"},
                                    "tau": {"type": "number"},
                                    "region": _REGION,
                                    "n": {"type": "integer", "minimum": 4}},
                     "required": ["kind", "tag", "s", "tau", "region"],
                     "additionalProperties": False},
                    {"type": "object",
                     "properties": {"kind": {"const": "cancel"},
                                    "tag": {"type": "string"},
                                    "isometry": {"enum":
                                                 [*ISOMETRY_TAGS, None]}},
                     "required": ["kind", "tag"],
                     "additionalProperties": False},
                    {"type": "object",
                     "properties": {"kind": {"const": "selftest"},
                                    "tag": {"type": "string"}},
                     "required": ["kind", "tag"],
                     "additionalProperties": False},
                ]
            },
        },
        "output_dir": {"type": "string"},
        "tolerances": {"type": "object", "properties": _TOL_PROPS,
                       "additionalProperties": False},
    },
    "required": ["version", "surface", "path", "window", "scene", "grids",
                 "analyses"],
    "additionalProperties": False,
}


def load_config(path):
    """Parse and schema-validate a scenario file; raises ConfigError."""
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}:{err.lineno}:{err.colno}: malformed JSON: {err.msg}") from err
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        key = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config key '{key}': {err.message}")
    return doc


def build_tolerances(doc):
    return Tolerances(**doc.get("tolerances", {}))


def build_chart(doc):
    cfg = doc["surface"]
    if cfg["kind"] == "flat-plane":
        return SurfaceChart.flat_plane(cfg.get("height", 0.0))
    if cfg["kind"] == "cylinder":
        return SurfaceChart.cylinder(cfg.get("radius", 1.0),
                                     cfg.get("axis_height", 1.0),
                                     tuple(cfg.get("u_range", (0.0, math.pi))))
    u_axis = np.asarray(cfg["u_axis"], dtype=float)
    v_axis = np.asarray(cfg["v_axis"], dtype=float)
    heights = np.asarray(cfg["heights"], dtype=float)
    if heights.shape != (u_axis.size, v_axis.size):
        raise ConfigError("config key 'surface.heights': shape must be "
                          "(len(u_axis), len(v_axis))")
    return SurfaceChart.height_field(u_axis, v_axis, heights)


def build_path(doc):
    cfg = doc["path"]
    if cfg["kind"] == "straight-line":
        return FlightPath.straight(cfg["point"], cfg["direction"])
    if cfg["kind"] == "circle":
        return FlightPath.circle(cfg["center"], cfg["radius"],
                                 cfg.get("e1", (1.0, 0.0, 0.0)),
                                 cfg.get("e2", (0.0, 1.0, 0.0)))
    s_samples = np.asarray(cfg["s_samples"], dtype=float)
    points = np.asarray(cfg["points"], dtype=float)
    if points.shape != (s_samples.size, 3):
        raise ConfigError("config key 'path.points': needs one 3-vector per "
                          "s sample")
    return FlightPath.spline(s_samples, points)


def build_window(doc):
    cfg = doc["window"]
    try:
        return AcquisitionWindow(tuple(cfg["s"]), tuple(cfg["t"]), cfg["c0"])
    except ValueError as err:
        raise ConfigError(f"config key 'window': {err}") from err


def mirrored_grid(n, halfwidth, center=0.0):
    """Uniform grid exactly antisymmetric about its centre."""
    step = 2.0 * halfwidth / (n - 1)
    offsets = (np.arange(n) - (n - 1) / 2.0) * step
    return center + offsets if center != 0.0 else offsets


def snapped_zero_grid(n, lo, hi):
    """Uniform grid over roughly [lo, hi] with 0 as an exact node."""
    step = (hi - lo) / (n - 1)
    j0 = int(round(-lo / step))
    return (np.arange(n) - j0) * step


def profile_samples(f_spec, u_grid):
    u = np.asarray(u_grid, dtype=float)
    if isinstance(f_spec, str):
        factor = {"sin_u": 1.0, "sin_2u": 2.0, "sin_3u": 3.0}[f_spec]
        return np.sin(factor * u)
    a = f_spec.get("amplitude", 1.0)
    return a * np.exp(-(((u - f_spec["center"]) / f_spec["width"]) ** 2))


def build_scene(doc, chart, base_dir):
    """Construct the SceneField named by the config (grids section sizes)."""
    from .outputs import read_scene_csv

    cfg = doc["scene"]
    grids = doc["grids"]
    n_u, n_v = grids["n_u"], grids["n_v"]
    if cfg["kind"] == "heaviside-product":
        from .cancellation import heaviside_scene

        u_lo, u_hi = cfg["u_range"]
        u_grid = np.linspace(u_lo, u_hi, n_u)
        v_grid = snapped_zero_grid(n_v, *cfg["v_range"])
        f = profile_samples(cfg["f"], u_grid)
        return heaviside_scene(chart, u_grid, f, v_grid)
    if cfg["kind"] == "file":
        u_grid, v_grid, values = read_scene_csv(base_dir / cfg["path"])
        return SceneField(chart, u_grid, v_grid, values)
    # symmetric-pair: one-sided singular scene on a reflection-symmetric grid
    center = 0.0 if cfg["isometry"] == "flat-reflect" else math.pi / 2.0
    u_grid = mirrored_grid(n_u, cfg["u_halfwidth"], center)
    v_cut = cfg.get("v_cut", 0.0)
    v_lo, v_hi = cfg["v_range"]
    step = (v_hi - v_lo) / (n_v - 1)
    j0 = int(round((v_cut - v_lo) / step))
    v_grid = v_cut + (np.arange(n_v) - j0) * step
    bumps = cfg.get("bumps")
    if bumps is None:
        rng = np.random.default_rng(cfg.get("seed", 0))
        n_b = cfg.get("n_random_bumps", 3)
        u_span = cfg["u_halfwidth"]
        bumps = [{"u": center + rng.uniform(0.15, 0.8) * u_span * rng.choice([-1, 1]),
                  "v": rng.uniform(v_cut, v_cut + 0.6 * (v_hi - v_cut)),
                  "width": rng.uniform(0.1, 0.3) * u_span,
                  "amplitude": rng.uniform(0.5, 1.5)}
                 for _ in range(n_b)]
    U, V = np.meshgrid(u_grid, v_grid, indexing="ij")
    values = np.zeros_like(U)
    for b in bumps:
        values += b.get("amplitude", 1.0) * np.exp(
            -(((U - b["u"]) ** 2 + (V - b["v"]) ** 2) / b["width"] ** 2))
    step_mask = np.where(v_grid > v_cut, 1.0,
                         np.where(v_grid < v_cut, 0.0, 0.5))
    values = values * step_mask[None, :]
    return SceneField(chart, u_grid, v_grid, values)
