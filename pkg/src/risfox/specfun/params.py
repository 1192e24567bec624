"""Coefficient blocks describing Mellin-Barnes integrands.

All integrals use the convention

    H(x) = 1/(2 pi i) * integral of Theta(s) x**(-s) ds

along a vertical line, with

    Theta(s) = prod_{j<=m} G(b_j + B_j s) prod_{j<=n} G(1 - a_j - A_j s)
               / (prod_{j>m} G(1 - b_j - B_j s) prod_{j>n} G(a_j + A_j s)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from ..errors import NoAdmissibleContourError


@dataclass(frozen=True)
class GammaPair:
    """One (shift, scale) pair of an H-function parameter list."""

    a: float
    A: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.A)):
            raise ValueError("gamma pair entries must be finite")
        if self.A < 0:
            raise ValueError(f"gamma pair scale must be >= 0, got {self.A}")


def _as_pairs(seq) -> tuple:
    return tuple(p if isinstance(p, GammaPair) else GammaPair(float(p[0]), float(p[1]))
                 for p in seq)


@dataclass(frozen=True)
class FoxHParams:
    """Univariate H^{m,n}_{p,q} with ``upper`` = [(a_j, A_j)], ``lower`` = [(b_j, B_j)]."""

    m: int
    n: int
    upper: tuple = ()
    lower: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "upper", _as_pairs(self.upper))
        object.__setattr__(self, "lower", _as_pairs(self.lower))
        if not (0 <= self.m <= self.q and 0 <= self.n <= self.p):
            raise ValueError(f"need 0<=m<=q and 0<=n<=p, got m={self.m}, n={self.n}, "
                             f"p={self.p}, q={self.q}")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    def strip(self) -> tuple[float, float]:
        """Open interval of admissible real parts for the contour."""
        lo = max((-b.a / b.A for b in self.lower[: self.m] if b.A > 0), default=-math.inf)
        hi = min(((1 - a.a) / a.A for a in self.upper[: self.n] if a.A > 0), default=math.inf)
        return lo, hi

    def log_theta(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for j, b in enumerate(self.lower):
            if j < self.m:
                out += special.loggamma(b.a + b.A * s)
            else:
                out -= special.loggamma(1 - b.a - b.A * s)
        for j, a in enumerate(self.upper):
            if j < self.n:
                out += special.loggamma(1 - a.a - a.A * s)
            else:
                out -= special.loggamma(a.a + a.A * s)
        return out

    def theta(self, s):
        return np.exp(self.log_theta(s))

    def kernel(self) -> "Kernel":
        lo, hi = self.strip()
        return Kernel(self.theta, lo, hi)


@dataclass(frozen=True)
class Kernel:
    """A Mellin-Barnes integrand factor given as a callable.

    ``func`` maps complex ``s`` (array) to Theta(s). ``lo`` and ``hi`` bound
    the pole-free strip: every pole of ``func`` has real part <= lo or >= hi.
    """

    func: Callable
    lo: float
    hi: float

    def __call__(self, s):
        return self.func(np.asarray(s, dtype=complex))

    def strip(self) -> tuple[float, float]:
        return self.lo, self.hi


@dataclass(frozen=True)
class JointPair:
    """Joint gamma entry: shift plus one scale per contour variable."""

    shift: float
    scales: tuple

    def __post_init__(self):
        sc = tuple(float(v) for v in self.scales)
        if not all(math.isfinite(v) for v in sc) or not math.isfinite(self.shift):
            raise ValueError("joint pair entries must be finite")
        object.__setattr__(self, "scales", sc)


@dataclass(frozen=True)
class LinearGamma:
    """Factor Gamma(c0 + coef . s) raised to ``power`` (+1 or -1)."""

    c0: float
    coef: tuple
    power: int


@dataclass(frozen=True)
class MultiFoxHParams:
    """N-variate H-function.

    The first ``n_joint`` entries of ``joint_upper`` contribute
    Gamma(1 - a - A.s) to the numerator, the rest 1/Gamma(a + A.s).
    Entries of ``joint_lower`` contribute 1/Gamma(1 - b - B.s).
    """

    per_var: tuple
    joint_upper: tuple = ()
    n_joint: int = 0
    joint_lower: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "per_var", tuple(self.per_var))
        ju = tuple(j if isinstance(j, JointPair) else JointPair(j[0], tuple(j[1]))
                   for j in self.joint_upper)
        jl = tuple(j if isinstance(j, JointPair) else JointPair(j[0], tuple(j[1]))
                   for j in self.joint_lower)
        object.__setattr__(self, "joint_upper", ju)
        object.__setattr__(self, "joint_lower", jl)
        if self.dim < 1:
            raise ValueError("need at least one variable")
        for j in ju + jl:
            if len(j.scales) != self.dim:
                raise ValueError("joint scale vector length must equal the dimension")
        if not 0 <= self.n_joint <= len(ju):
            raise ValueError("n_joint out of range")

    @property
    def dim(self) -> int:
        return len(self.per_var)

    def kernels(self) -> list:
        return [p.kernel() if isinstance(p, FoxHParams) else p for p in self.per_var]

    def linear_terms(self) -> list:
        out = []
        for i, j in enumerate(self.joint_upper):
            if i < self.n_joint:
                out.append(LinearGamma(1 - j.shift, tuple(-v for v in j.scales), 1))
            else:
                out.append(LinearGamma(j.shift, j.scales, -1))
        for j in self.joint_lower:
            out.append(LinearGamma(1 - j.shift, tuple(-v for v in j.scales), -1))
        return out


@dataclass(frozen=True)
class ContourSpec:
    """Quadrature layout for one or more vertical contours.

    ``abscissa``, ``T``, ``nodes`` and ``margin`` hold one entry per variable.
    ``margin`` is the distance from the abscissa to the nearest pole and
    drives the step-size rule.
    """

    abscissa: tuple
    T: tuple
    nodes: tuple
    strategy: str = "tensor"
    margin: tuple = field(default=())

    def __post_init__(self):
        for name in ("abscissa", "T", "nodes", "margin"):
            v = getattr(self, name)
            if np.ndim(v) == 0:
                v = (v,)
            object.__setattr__(self, name, tuple(v))
        if not self.margin:
            object.__setattr__(self, "margin", (math.inf,) * len(self.abscissa))
        if any(t <= 0 for t in self.T):
            raise ValueError("truncation T must be positive")
        if any(n < 16 for n in self.nodes):
            raise ValueError("need at least 16 nodes per variable")
        if self.strategy not in ("tensor", "quasi-random"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if not (len(self.abscissa) == len(self.T) == len(self.nodes) == len(self.margin)):
            raise ValueError("per-variable fields must have equal length")

    @property
    def dim(self) -> int:
        return len(self.abscissa)

    @property
    def steps(self) -> tuple:
        return tuple(2 * t / (n - 1) for t, n in zip(self.T, self.nodes))

    def shifted(self, abscissa: Sequence[float]) -> "ContourSpec":
        return ContourSpec(tuple(abscissa), self.T, self.nodes, self.strategy, self.margin)


def check_strip(lo: float, hi: float, what: str = "integrand"):
    if not lo < hi:
        raise NoAdmissibleContourError(
            f"pole sets of the {what} overlap: left poles reach {lo:g}, right poles start at {hi:g}")
