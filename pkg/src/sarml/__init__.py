"""Monostatic SAR modelling over arbitrary topography.

Forward data simulation, pointwise covector transport, degeneracy detection,
mirror-point enumeration, and reproducible cancellation-of-singularities
demonstrations.
"""

from .canonical import (DataCovector, DegeneracyReport, SceneCovector,
                        covector_pair, degeneracy_map, degeneracy_residuals,
                        projection_jacobians)
from .forward import (AmplitudeSpec, SceneField, Sinogram, bandlimited_forward,
                      cylinder_closed_form, delta_shell_forward,
                      forward_sinogram)
from .geometry import (AcquisitionWindow, FlightPath, GeometryEval,
                       SurfaceChart, derivative_selftest, eval_geometry,
                       eval_path, eval_surface, in_visible_set)
from .kernels import BACKEND as KERNEL_BACKEND
from .mirrors import (MirrorFamily, MirrorPoint, MirrorSet, find_mirror_set,
                      mirror_residuals, trace_family)

__version__ = "0.1.0"

__all__ = [
    "AcquisitionWindow", "AmplitudeSpec", "DataCovector", "DegeneracyReport",
    "FlightPath", "GeometryEval", "KERNEL_BACKEND", "MirrorFamily",
    "MirrorPoint", "MirrorSet", "SceneCovector", "SceneField", "Sinogram",
    "SurfaceChart", "bandlimited_forward", "covector_pair",
    "cylinder_closed_form", "degeneracy_map", "degeneracy_residuals",
    "delta_shell_forward", "derivative_selftest", "eval_geometry", "eval_path",
    "eval_surface", "find_mirror_set", "forward_sinogram", "in_visible_set",
    "mirror_residuals", "projection_jacobians", "trace_family",
]
