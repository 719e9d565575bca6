"""Pansharpening by grafting Brovey detail onto a trous wavelet residuals.

The public API re-exports the pieces most callers need; see the submodules
for the rest.
"""
__version__ = "0.1.0"

from bwfusion.atrous import WaveletDecomposition, decompose, reconstruct, substitute_planes
from bwfusion.errors import FormatError, FusionError, NumericError, ParameterError, ShapeError
from bwfusion.fusion import FusionConfig, FusionResult, fuse, pansharpen
from bwfusion.harness import ExperimentSpec, SyntheticScene, generate_scene, run_experiment
from bwfusion.metrics import QualityReport, WindowSpec, cc, evaluate_stack, uiqi, windowed_metric
from bwfusion.raster import BandStack, ResampleSpec, degrade, upsample

__all__ = [
    "BandStack", "ExperimentSpec", "FormatError", "FusionConfig", "FusionError",
    "FusionResult", "NumericError", "ParameterError", "QualityReport", "ResampleSpec",
    "ShapeError", "SyntheticScene", "WaveletDecomposition", "WindowSpec", "cc",
    "decompose", "degrade", "evaluate_stack", "fuse", "generate_scene", "pansharpen",
    "reconstruct", "run_experiment", "substitute_planes", "uiqi", "upsample",
    "windowed_metric",
]
