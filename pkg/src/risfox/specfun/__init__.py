"""Complex gamma function and Fox H-function evaluation."""
from ._backend import BACKEND
from .contour import auto_contour, contour_for
from .gamma import ln_gamma
from .mellin import HResult, fox_h, fox_h_multi, mellin_barnes, mellin_barnes_nd
from .moments import cdf_from_moments, cdf_kernel, pdf_from_moments
from .params import (ContourSpec, FoxHParams, GammaPair, JointPair, Kernel, LinearGamma,
                     MultiFoxHParams)

__all__ = [
    "BACKEND", "ContourSpec", "FoxHParams", "GammaPair", "HResult", "JointPair", "Kernel",
    "LinearGamma", "MultiFoxHParams", "auto_contour", "contour_for", "fox_h", "fox_h_multi",
    "ln_gamma", "mellin_barnes", "mellin_barnes_nd", "cdf_from_moments", "cdf_kernel",
    "pdf_from_moments",
]
