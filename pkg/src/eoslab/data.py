"""Datasets for separable linear classification and max-margin certification.

The margin solver computes the exact maximum margin of a homogeneous
separator by min-norm-point duality: the margin equals the distance from
the origin to the convex hull of the signed samples {y_i x_i}, and the
minimizing point, normalized, is the certifying direction.  The min-norm
point is found by Gilbert's algorithm (greedy support point plus an exact
line search), which also detects non-separable inputs when the hull
contains the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import Rng

__all__ = [
    "Dataset",
    "MarginCertificate",
    "NotSeparable",
    "toy_dataset",
    "lower_bound_dataset",
    "synthetic_separable",
    "load_csv",
    "save_csv",
    "normalized",
    "margin",
    "verify_margin",
    "dataset_from_json",
]


class NotSeparable(ValueError):
    """The convex hull of {y_i x_i} contains the origin."""


@dataclass(frozen=True)
class Dataset:
    """Labeled samples: xs is (n, d), ys is (n,) with entries +/-1."""

    xs: np.ndarray
    ys: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[0] < 1:
            raise ValueError("xs must be a non-empty (n, d) array")
        if ys.shape != (xs.shape[0],):
            raise ValueError("ys must have one label per sample")
        if not np.all(np.isin(ys, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.xs.shape[0]

    @property
    def d(self) -> int:
        return self.xs.shape[1]

    @property
    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.xs, axis=1)))

    @property
    def norm_flag(self) -> bool:
        """True when every sample lies in the unit ball (up to roundoff)."""
        return self.max_norm <= 1.0 + 1e-12

    def signed(self) -> np.ndarray:
        """The (n, d) array of y_i x_i."""
        return self.ys[:, None] * self.xs


@dataclass(frozen=True)
class MarginCertificate:
    """A certified margin: min_i y_i <x_i, w_star> >= gamma - residual."""

    gamma: float
    w_star: np.ndarray
    residual: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError("certified margin must be positive")
        w = np.asarray(self.w_star, dtype=np.float64)
        if abs(float(np.linalg.norm(w)) - 1.0) > 1e-10:
            raise ValueError("w_star must be a unit vector")
        object.__setattr__(self, "w_star", w)


def toy_dataset() -> Dataset:
    """The four-sample 2-D dataset used throughout the demos.

    Kept unnormalized by default (one sample has norm > 1); pass it
    through :func:`normalized` for runs that need the unit-ball condition.
    """
    xs = np.array([[1.0, 0.2], [-2.0, 0.2], [-1.0, -0.2], [2.0, -0.2]])
    ys = np.array([1.0, 1.0, -1.0, -1.0])
    return Dataset(xs, ys, name="toy")


def lower_bound_dataset(gamma: float) -> Dataset:
    """Two positive unit-ball samples whose monotone-GD loss decays no
    faster than 1/t.  Requires 0 < gamma < 0.1."""
    if not 0.0 < gamma < 0.1:
        raise ValueError("gamma must lie in (0, 0.1)")
    s = math.sqrt(1.0 - gamma * gamma)
    xs = np.array([[gamma, s], [gamma, -s / 2.0]])
    ys = np.array([1.0, 1.0])
    return Dataset(xs, ys, name=f"lower_bound({gamma})")


def synthetic_separable(n: int, d: int, gamma: float, rng: Rng) -> Dataset:
    """Random unit-norm samples with margin >= gamma along e_1.

    Each sample starts as a unit Gaussian direction; the first coordinate
    is reflected and rescaled into [gamma, 1] and re-signed by the
    (Rademacher) label, then the remaining coordinates are rescaled so the
    sample stays on the unit sphere.  The pair (gamma, e_1) is therefore a
    valid construction certificate.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if d < 2:
        raise ValueError("need d >= 2")
    ys = rng.rademacher(n)
    xs = np.empty((n, d))
    for i in range(n):
        v = rng.normals(d)
        v /= np.linalg.norm(v)
        first = gamma + (1.0 - gamma) * abs(v[0])
        rest = v[1:]
        rest_norm2 = float(rest @ rest)
        target_rest2 = max(1.0 - first * first, 0.0)
        if rest_norm2 > 0.0:
            rest = rest * math.sqrt(target_rest2 / rest_norm2)
        xs[i, 0] = ys[i] * first
        xs[i, 1:] = rest
    return Dataset(xs, ys, name=f"synthetic(n={n},d={d},gamma={gamma})")


def load_csv(path: str | Path, normalize: str | None = None) -> Dataset:
    """Parse a header-less ``label,x1,...,xd`` CSV.

    ``normalize="max"`` divides every sample by the largest sample norm so
    the unit-ball condition holds.
    """
    path = Path(path)
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unparsable row: {exc}") from None
            if len(vals) < 2:
                raise ValueError(f"{path}:{lineno}: need a label and at least one feature")
            if vals[0] not in (1.0, -1.0):
                raise ValueError(f"{path}:{lineno}: label must be +1 or -1, got {vals[0]}")
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: empty dataset")
    width = len(rows[0])
    for lineno, r in enumerate(rows, start=1):
        if len(r) != width:
            raise ValueError(f"{path}: row {lineno} has {len(r)} fields, expected {width}")
    arr = np.array(rows)
    ds = Dataset(arr[:, 1:], arr[:, 0], name=path.stem)
    if normalize == "max":
        ds = normalized(ds)
    elif normalize is not None:
        raise ValueError(f"unknown normalize mode {normalize!r}")
    return ds


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write ``label,x1,...,xd`` rows with round-trippable float text."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for y, x in zip(ds.ys, ds.xs):
            fields = [repr(int(y))] + [repr(float(v)) for v in x]
            fh.write(",".join(fields) + "\n")


def normalized(ds: Dataset) -> Dataset:
    """Scale all samples by 1/max_i ||x_i|| so the unit-ball condition holds."""
    scale = ds.max_norm
    if scale <= 0.0:
        raise ValueError("cannot normalize an all-zero dataset")
    return Dataset(ds.xs / scale, ds.ys, name=ds.name + "/normalized")


# -- max-margin certification ------------------------------------------------


def _gilbert_min_norm_point(Z: np.ndarray, tol: float, max_iter: int = 200_000,
                            trace: list | None = None):
    """Min-norm point of conv(rows of Z) by Gilbert's algorithm.

    Returns (p, gap) where gap = <p, p> - min_i <p, z_i> is the final
    Frank-Wolfe gap.  Iterate norms are non-increasing because each step
    is an exact line search toward a support point; pass ``trace`` to
    collect them.
    """
    norms = np.linalg.norm(Z, axis=1)
    p = Z[int(np.argmin(norms))].copy()
    for _ in range(max_iter):
        if trace is not None:
            trace.append(float(np.linalg.norm(p)))
        scores = Z @ p
        q = Z[int(np.argmin(scores))]
        gap = float(p @ p - np.min(scores))
        if gap <= tol or float(p @ p) <= tol * tol:
            return p, gap
        d = q - p
        dd = float(d @ d)
        if dd == 0.0:
            return p, gap
        theta = min(1.0, max(0.0, float(-(p @ d)) / dd))
        p = p + theta * d
    return p, float(p @ p - np.min(Z @ p))


def margin(ds: Dataset, tol: float = 1e-10,
           trace: list | None = None) -> MarginCertificate:
    """Exact max margin of a homogeneous separator, with certificate.

    Raises :class:`NotSeparable` when the hull of the signed samples
    contains the origin (within tolerance).
    """
    Z = ds.signed()
    p, gap = _gilbert_min_norm_point(Z, tol, trace=trace)
    pnorm = float(np.linalg.norm(p))
    if pnorm <= math.sqrt(tol):
        raise NotSeparable(
            f"{ds.name}: the signed-sample hull contains the origin "
            f"(min-norm point has norm {pnorm:.3e})")
    w_star = p / pnorm
    # min_i <z_i, w_star> = (<p,p> - gap)/||p|| = ||p|| - gap/||p|| exactly
    residual = max(gap / pnorm, 0.0)
    return MarginCertificate(gamma=pnorm, w_star=w_star, residual=residual)


def verify_margin(ds: Dataset, cert: MarginCertificate, tol: float = 1e-9) -> bool:
    """True iff the certificate's direction attains its claimed margin."""
    w = np.asarray(cert.w_star, dtype=np.float64)
    if abs(float(np.linalg.norm(w)) - 1.0) > tol:
        return False
    margins = ds.signed() @ w
    return bool(np.min(margins) >= cert.gamma - tol)


def dataset_from_json(obj: dict, rng: Rng | None = None) -> Dataset:
    """Build a dataset from its config-JSON descriptor."""
    kind = obj.get("kind")
    if kind == "toy":
        ds = toy_dataset()
    elif kind == "lower_bound":
        ds = lower_bound_dataset(float(obj["gamma"]))
    elif kind == "synthetic":
        if rng is None:
            rng = Rng(int(obj.get("seed", 0)))
        ds = synthetic_separable(int(obj["n"]), int(obj["d"]), float(obj["gamma"]), rng)
    elif kind == "csv":
        ds = load_csv(obj["path"], normalize=obj.get("normalize"))
    else:
        raise ValueError(f"unknown dataset kind {kind!r}")
    if obj.get("normalize") == "max" and kind != "csv":
        ds = normalized(ds)
    return ds
