"""Numpy fallback for the compiled joint-gamma kernels."""
import numpy as np
from scipy.special import loggamma

CHUNK = 1 << 16


def joint_points(pts, c0, coef, power):
    pts = np.ascontiguousarray(pts, dtype=complex)
    out = np.empty(pts.shape[0], dtype=complex)
    for i in range(0, pts.shape[0], CHUNK):
        z = c0[None, :] + pts[i:i + CHUNK] @ coef.T
        out[i:i + CHUNK] = np.exp(loggamma(z) @ power)
    return out


def joint_grid(flat, sizes, c0, coef, power):
    sizes = [int(s) for s in sizes]
    axes = np.split(np.asarray(flat, dtype=complex), np.cumsum(sizes)[:-1])
    n, J = len(sizes), len(c0)
    rows = max(1, CHUNK // int(np.prod(sizes[1:], dtype=np.int64)))
    out = np.empty(sizes, dtype=complex)
    lead = (J,) + (1,) * n
    for i in range(0, sizes[0], rows):
        sub = [axes[0][i:i + rows]] + axes[1:]
        z = np.broadcast_to(c0.reshape(lead), (J, len(sub[0]), *sizes[1:])).astype(complex)
        for d, ax in enumerate(sub):
            shape = [1] * (n + 1)
            shape[d + 1] = len(ax)
            z += coef[:, d].reshape(lead) * ax.reshape(shape)
        out[i:i + rows] = np.exp(np.tensordot(power, loggamma(z), axes=(0, 0)))
    return out.ravel()


def lattice_grid(table, toff, mult, sizes):
    sizes = [int(s) for s in sizes]
    n = len(sizes)
    out = np.empty(sizes, dtype=complex)
    rows = max(1, CHUNK // int(np.prod(sizes[1:], dtype=np.int64)))
    for i in range(0, sizes[0], rows):
        sub = [np.arange(i, min(i + rows, sizes[0]))] + [np.arange(s) for s in sizes[1:]]
        acc = 0
        for j in range(len(toff)):
            idx = toff[j]
            for d, ax in enumerate(sub):
                shape = [1] * n
                shape[d] = len(ax)
                idx = idx + (mult[j, d] * ax).reshape(shape)
            acc = acc + table[idx]
        out[i:i + rows] = np.exp(acc)
    return out.ravel()
