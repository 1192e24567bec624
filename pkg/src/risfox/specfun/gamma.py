"""Complex log-gamma with pole checking."""
import numpy as np
from scipy import special

from ..errors import PoleError


def ln_gamma(z):
    """Log-gamma on the principal branch (analytic continuation of ln Gamma).

    Accepts scalars or arrays. Raises :class:`PoleError` at non-positive
    integers, where Gamma has poles.
    """
    z = np.asarray(z, dtype=complex)
    bad = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(bad):
        raise PoleError(f"Gamma has a pole at {z[bad].ravel()[0].real:g}")
    out = special.loggamma(z)
    return out[()] if out.ndim == 0 else out
