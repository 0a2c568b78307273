"""Deterministic low-level numerics: seeded randomness, Gaussian sampling,
finite differences, and 1-D minimization.

Everything here is 64-bit float and fully reproducible: the random stream
is PCG64 (seeded), normals come from Box-Muller on that stream, and the
scalar reductions exposed here use a fixed left-to-right order so repeated
runs are bit-identical.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Rng",
    "as_vec",
    "dot",
    "norm",
    "gaussian_vec",
    "minimize_1d",
    "finite_diff_grad",
]

# golden-section reduction factor
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def as_vec(x: Sequence[float] | np.ndarray) -> np.ndarray:
    """Coerce to a finite 1-D float64 array (the vector type used throughout)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector with at least one entry, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def dot(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """Inner product with left-to-right accumulation.

    The summation order is fixed (no pairwise/tree reordering) so that
    trajectories built on top of it are bit-reproducible across runs.
    """
    va, vb = as_vec(a), as_vec(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    acc = 0.0
    for x, y in zip(va.tolist(), vb.tolist()):
        acc += x * y
    return acc


def norm(a: Sequence[float] | np.ndarray) -> float:
    """Euclidean norm via the fixed-order inner product."""
    return math.sqrt(dot(a, a))


class Rng:
    """Seeded pseudo-random stream.

    The generator is PCG64 (numpy's permuted congruential generator); the
    same seed always yields the same stream, independent of platform.
    Normal variates are produced by the Box-Muller transform on uniform
    draws from that stream rather than by ziggurat rejection, so the
    mapping seed -> normals is pinned down by this module alone.

    An ``Rng`` is single-owner mutable state: share datasets and configs
    freely between threads, but give each concurrent run its own ``Rng``.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, size: int | None = None):
        """Uniform draws in [0, 1)."""
        if size is None:
            return float(self._gen.random())
        return self._gen.random(size)

    def integers(self, low: int, high: int, size: int | None = None):
        """Integer draws in [low, high)."""
        if size is None:
            return int(self._gen.integers(low, high))
        return self._gen.integers(low, high, size=size)

    def rademacher(self, size: int) -> np.ndarray:
        """Uniform +/-1 draws."""
        return 2.0 * self._gen.integers(0, 2, size=size).astype(np.float64) - 1.0

    def normals(self, size: int) -> np.ndarray:
        """Standard normal draws via Box-Muller.

        Draws ceil(size/2) uniform pairs and discards the spare when size
        is odd, so the consumed stream length depends only on ``size``.
        """
        if size < 1:
            raise ValueError("size must be >= 1")
        pairs = (size + 1) // 2
        u1 = 1.0 - self._gen.random(pairs)  # in (0, 1]: keeps log finite
        u2 = self._gen.random(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * math.pi * u2
        z = np.empty(2 * pairs, dtype=np.float64)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:size]


def gaussian_vec(rng: Rng, dim: int) -> np.ndarray:
    """An i.i.d. standard-normal vector of the given dimension."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return rng.normals(dim)


def minimize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> tuple[float, float]:
    """Golden-section search for a minimizer of a unimodal f on [lo, hi].

    Returns (argmin, min value) with the argmin located within ``tol`` of
    a local minimizer.  Unimodality on the bracket is the caller's
    responsibility.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    a, b = float(lo), float(hi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def finite_diff_grad(
    f: Callable[[np.ndarray], float],
    w: np.ndarray,
    h: float = 1e-5,
) -> np.ndarray:
    """Central-difference gradient of f at w, one coordinate at a time."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    w = as_vec(w)
    g = np.empty_like(w)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (f(w + e) - f(w - e)) / (2.0 * h)
    return g
