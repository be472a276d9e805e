"""Command-line front end.

    sarml run <config.json> [--assert] [--svg] [--json] [--out DIR] [--threads N]
    sarml selftest

Exit codes: 0 success, 1 configuration or I/O error, 2 assert-mode tolerance
failure (or a failed selftest).  SARML_THREADS is the fallback for --threads.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .config import ConfigError
from .forward import ConfigurationError
from .geometry import (DomainError, FlightPath, PathTouchesSurfaceError,
                       SurfaceChart, derivative_selftest)
from .kernels import BACKEND
from .runner import _kernel_selfcheck, run_scenario


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sarml",
        description="Monostatic SAR modelling toolkit: scenario-driven "
                    "simulation, degeneracy and mirror-point analysis, and "
                    "cancellation demonstrations.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config")
    run_p.add_argument("config", help="path to the scenario JSON file")
    run_p.add_argument("--assert", dest="assert_mode", action="store_true",
                       help="turn tolerance failures into exit code 2")
    run_p.add_argument("--svg", action="store_true",
                       help="also write SVG heat maps")
    run_p.add_argument("--json", dest="json_out", action="store_true",
                       help="also write JSON reports")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: SARML_THREADS or 1)")

    sub.add_parser("selftest", help="derivative and kernel self-tests on the "
                                    "builtin charts and paths")
    return parser


def _builtin_selftest():
    gauss_u = np.linspace(-2, 2, 41)
    gauss_v = np.linspace(-2, 2, 41)
    bump = np.exp(-(gauss_u[:, None] ** 2 + gauss_v[None, :] ** 2))
    charts = [
        ("flat-plane", SurfaceChart.flat_plane(0.0), 1e-12),
        ("cylinder", SurfaceChart.cylinder(), 1e-6),
        ("height-field(gaussian)",
         SurfaceChart.height_field(gauss_u, gauss_v, bump), 1e-5),
    ]
    line = FlightPath.straight(point=(0, 0, 1), direction=(0, 1, 0))
    s_dense = np.linspace(-3, 3, 25)
    paths = [
        ("straight-line", line, 1e-12),
        ("circle", FlightPath.circle(center=(0, 0, 2), radius=2.0), 1e-6),
        ("sampled-spline",
         FlightPath.spline(np.linspace(-3, 3, 13),
                           line.evaluate(np.linspace(-3, 3, 13))[0]), 1e-6),
    ]
    u = np.linspace(0.3, 2.8, 9)
    v = np.linspace(-1.5, 1.5, 9)
    s = np.linspace(-2.5, 2.5, 9)

    ok = True
    for cname, chart, tol in charts:
        uu = u if chart.kind != "height-field" else np.linspace(-1.8, 1.8, 9)
        for pname, path, ptol in paths:
            rep = derivative_selftest(chart, path, uu, v, s,
                                      tolerance=max(tol, ptol))
            status = "ok" if rep.passed else "FAIL"
            ok = ok and rep.passed
            print(f"selftest {cname} + {pname}: surface {rep.max_surface_error:.2e} "
                  f"path {rep.max_path_error:.2e} (tol {rep.tolerance:g}) {status}")
    kerr = _kernel_selfcheck()
    kok = kerr <= 1e-10 and math.isfinite(kerr)
    ok = ok and kok
    print(f"selftest kernels ({BACKEND} vs fallback): relative error "
          f"{kerr:.2e} {'ok' if kok else 'FAIL'}")
    return 0 if ok else 2


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return _builtin_selftest()

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("SARML_THREADS", "1"))
    try:
        result = run_scenario(args.config, out_dir=args.out,
                              assert_mode=args.assert_mode, svg=args.svg,
                              json_out=args.json_out, threads=threads)
    except ConfigError as err:
        print(f"sarml: {err}", file=sys.stderr)
        return 1
    except (ConfigurationError, DomainError, PathTouchesSurfaceError) as err:
        print(f"sarml: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"sarml: {err}", file=sys.stderr)
        return 1
    for failure in result.failures:
        print(f"sarml: tolerance failure: {failure}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
