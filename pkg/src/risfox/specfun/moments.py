"""Densities and distribution functions from Mellin moment functions.

For a positive variable X with E[X^s] = m(s) on the strip lo < Re s < hi,

    f(x) = x^{-1} * 1/(2 pi i) * integral m(s) x^{-s} ds
    F(x) =          1/(2 pi i) * integral -m(s)/s x^{-s} ds,   lo < Re s < 0.
"""
import numpy as np

from .contour import UNIVARIATE_TOL
from .mellin import HResult, mellin_barnes
from .params import Kernel


def pdf_from_moments(moment, lo, hi, x, *, tol=UNIVARIATE_TOL, atol=0.0, contour=None):
    x = np.asarray(x, dtype=float)
    r = mellin_barnes(Kernel(moment, lo, hi), x, contour, tol=tol, atol=atol)
    return HResult(r.value / x, r.error / x)


def cdf_kernel(moment, lo) -> Kernel:
    return Kernel(lambda s: -moment(s) / s, lo, 0.0)


def cdf_from_moments(moment, lo, x, *, tol=UNIVARIATE_TOL, atol=0.0, contour=None):
    return mellin_barnes(cdf_kernel(moment, lo), x, contour, tol=tol, atol=atol)
