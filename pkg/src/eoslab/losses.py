"""Classification loss families with derivatives, regularity constants, and
executable conformance checks.

Three families are provided: the logistic loss, a flattened exponential
loss (exponential tail glued to a linear ramp on z <= 0), and a flattened
polynomial loss.  Flattening keeps the derivative globally bounded, which
is what allows arbitrarily large stepsizes without catastrophic blowup.

Each family carries its regularity constants:

* ``C_g``    -- global bound on g := |l'| (Lipschitzness of the loss),
* ``C_beta`` -- self-boundedness constant (g <= C_beta * l, plus a
  second-order growth condition on pairs closer than 1),
* ``C_e``    -- exponential-tail constant (l <= C_e * g on z >= 0),
  absent for the polynomial family,

and the closed-form upper bound ``rho_bound`` on the squared
regularization-path length rho(lambda) = min_z lambda*l(z) + z^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .numerics import Rng, minimize_1d

__all__ = [
    "LossSpec",
    "logistic",
    "flattened_exponential",
    "flattened_polynomial",
    "loss_from_json",
    "loss_to_json",
    "eval_loss",
    "deriv",
    "g",
    "rho_bound",
    "rho_exact",
    "psi",
    "psi_inverse",
    "ConditionCheck",
    "AssumptionReport",
    "check_assumptions",
]

LOGISTIC = "logistic"
FLAT_EXP = "flat_exp"
FLAT_POLY = "flat_poly"


@dataclass(frozen=True)
class LossSpec:
    """A classification loss together with its regularity constants.

    Instances are immutable and freely shareable.  Use the module
    factories (:func:`logistic`, :func:`flattened_exponential`,
    :func:`flattened_polynomial`) rather than the constructor; the
    constants they fill in are the ones every bound evaluator expects.
    """

    kind: str
    a: Optional[float]
    C_g: float
    C_beta: float
    C_e: Optional[float]
    ell0: float

    def __post_init__(self):
        if self.kind not in (LOGISTIC, FLAT_EXP, FLAT_POLY):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind != LOGISTIC and not (self.a is not None and self.a > 0):
            raise ValueError(f"{self.kind} requires a > 0")
        if self.C_g <= 0 or self.C_beta <= 0:
            raise ValueError("C_g and C_beta must be positive")
        if self.C_e is not None and self.C_e <= 0:
            raise ValueError("C_e must be positive when present")

    def with_constants(self, **kw) -> "LossSpec":
        """Copy with overridden constants (for negative-control tests)."""
        return replace(self, **kw)


def logistic() -> LossSpec:
    return LossSpec(LOGISTIC, None, C_g=1.0, C_beta=math.e / 2.0, C_e=2.0,
                    ell0=math.log(2.0))


def flattened_exponential(a: float) -> LossSpec:
    if a <= 0:
        raise ValueError("temperature a must be positive")
    return LossSpec(FLAT_EXP, float(a), C_g=float(a),
                    C_beta=max(a, a * math.exp(a) / 2.0, 1.0),
                    C_e=1.0 / a, ell0=1.0)


def flattened_polynomial(a: float) -> LossSpec:
    if a <= 0:
        raise ValueError("degree a must be positive")
    return LossSpec(FLAT_POLY, float(a), C_g=float(a),
                    C_beta=max(a, (a + 1.0) * 2.0 ** a),
                    C_e=None, ell0=1.0)


def loss_from_json(obj: dict) -> LossSpec:
    """Build a LossSpec from its config-JSON form {"kind": ..., "a": ...}."""
    kind = obj.get("kind")
    if kind == LOGISTIC:
        return logistic()
    if kind == FLAT_EXP:
        return flattened_exponential(float(obj["a"]))
    if kind == FLAT_POLY:
        return flattened_polynomial(float(obj["a"]))
    raise ValueError(f"unknown loss kind {kind!r}")


def loss_to_json(loss: LossSpec) -> dict:
    out = {"kind": loss.kind}
    if loss.a is not None:
        out["a"] = loss.a
    return out


# -- pointwise evaluation ---------------------------------------------------
#
# The breakpoint z = 0 is evaluated on the z <= 0 branch; both branches
# agree there, fixing one avoids any platform-dependent branch choice.


def eval_loss(loss: LossSpec, z):
    """l(z), elementwise over arrays."""
    z = np.asarray(z, dtype=np.float64)
    if loss.kind == LOGISTIC:
        out = np.logaddexp(0.0, -z)
    elif loss.kind == FLAT_EXP:
        pos = z > 0.0
        out = np.where(pos, np.exp(-loss.a * np.where(pos, z, 0.0)), 1.0 - loss.a * z)
    else:  # FLAT_POLY
        pos = z > 0.0
        out = np.where(pos, (1.0 + np.where(pos, z, 0.0)) ** (-loss.a),
                       1.0 - loss.a * z)
    return out if out.ndim else float(out)


def deriv(loss: LossSpec, z):
    """l'(z), elementwise; both branches agree at the z = 0 seam."""
    z = np.asarray(z, dtype=np.float64)
    if loss.kind == LOGISTIC:
        # -1/(1+e^z), computed stably on both tails
        pos = z >= 0.0
        ez = np.exp(-np.abs(z))
        out = np.where(pos, -ez / (1.0 + ez), -1.0 / (1.0 + ez))
    elif loss.kind == FLAT_EXP:
        pos = z > 0.0
        out = np.where(pos, -loss.a * np.exp(-loss.a * np.where(pos, z, 0.0)),
                       -loss.a)
    else:  # FLAT_POLY
        pos = z > 0.0
        out = np.where(pos, -loss.a * (1.0 + np.where(pos, z, 0.0)) ** (-(loss.a + 1.0)),
                       -loss.a)
    return out if out.ndim else float(out)


def g(loss: LossSpec, z):
    """g(z) := |l'(z)|; non-increasing in z."""
    out = np.abs(deriv(loss, z))
    return out if np.ndim(out) else float(out)


# -- regularization-path length rho and psi ---------------------------------


def rho_bound(loss: LossSpec, lam: float) -> float:
    """Closed-form upper bound on rho(lambda) for lambda >= 1."""
    if lam < 1.0:
        raise ValueError("rho is defined for lambda >= 1")
    if loss.kind == LOGISTIC:
        return 1.0 + math.log(lam) ** 2
    if loss.kind == FLAT_EXP:
        return 1.0 + math.log(lam) ** 2 / loss.a ** 2
    return 2.0 * lam ** (2.0 / (loss.a + 2.0))


def rho_exact(loss: LossSpec, lam: float, tol: float = 1e-8) -> float:
    """rho(lambda) = min_z lambda*l(z) + z^2 by bracketed golden section.

    The objective is strictly convex (convex loss plus z^2), so the
    bracket [-2, hi] is unimodal; hi is widened geometrically until the
    minimizer is interior.
    """
    if lam < 1.0:
        raise ValueError("rho is defined for lambda >= 1")

    def h(z: float) -> float:
        return lam * float(eval_loss(loss, z)) + z * z

    lo = -2.0
    if loss.C_e is not None:
        hi = max(10.0, 3.0 * loss.C_e * math.log(max(lam, math.e)))
    else:
        hi = max(10.0, 3.0 * lam)
    for _ in range(60):
        x, fx = minimize_1d(h, lo, hi, tol=tol)
        if x < hi - 100.0 * tol:
            return fx
        hi *= 2.0
    raise RuntimeError("rho_exact: bracket expansion failed to enclose the minimizer")


def psi(loss: LossSpec, lam: float) -> float:
    """psi(lambda) := lambda / rho(lambda), using the closed-form rho bound."""
    return lam / rho_bound(loss, lam)


def psi_inverse(loss: LossSpec, y: float, rel_tol: float = 1e-10) -> float:
    """Smallest lambda >= 1 with psi(lambda) >= y, by bisection.

    rho(lambda)/lambda is non-increasing, so psi is non-decreasing and the
    crossing is unique once psi exceeds y.
    """
    psi1 = psi(loss, 1.0)
    if y < psi1:
        raise ValueError(f"y={y} is below psi(1)={psi1}")
    if y == psi1:
        return 1.0
    lo, hi = 1.0, 2.0
    for _ in range(400):
        if psi(loss, hi) >= y:
            break
        lo, hi = hi, hi * 4.0
    else:
        raise RuntimeError("psi_inverse: upper bracket expansion failed")
    while (hi - lo) > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if psi(loss, mid) >= y:
            hi = mid
        else:
            lo = mid
    return hi


# -- executable conformance checks ------------------------------------------


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of one sampled inequality check.

    ``residual`` is the worst (largest) violation over the sample; the
    condition passes when it stays at or below the tolerance.  ``witness``
    is the sample point achieving it.
    """

    passed: bool
    residual: float
    witness: tuple


@dataclass(frozen=True)
class AssumptionReport:
    convexity: ConditionCheck
    monotone: ConditionCheck
    lipschitz: ConditionCheck
    self_bounded_first: ConditionCheck
    self_bounded_second: ConditionCheck
    exp_tail: Optional[ConditionCheck]  # None when the loss has no C_e

    @property
    def passed(self) -> bool:
        checks = [self.convexity, self.monotone, self.lipschitz,
                  self.self_bounded_first, self.self_bounded_second]
        if self.exp_tail is not None:
            checks.append(self.exp_tail)
        return all(c.passed for c in checks)

    def as_dict(self) -> dict:
        def enc(c):
            if c is None:
                return {"applicable": False}
            return {"applicable": True, "passed": c.passed,
                    "residual": c.residual, "witness": list(c.witness)}
        return {
            "convexity": enc(self.convexity),
            "monotone": enc(self.monotone),
            "lipschitz": enc(self.lipschitz),
            "self_bounded_first": enc(self.self_bounded_first),
            "self_bounded_second": enc(self.self_bounded_second),
            "exp_tail": enc(self.exp_tail),
            "passed": self.passed,
        }


def _worst(points, residuals, tol) -> ConditionCheck:
    i = int(np.argmax(residuals))
    point = points[i] if np.ndim(points[i]) == 0 else tuple(np.atleast_1d(points[i]).tolist())
    if np.ndim(point) == 0:
        point = (float(point),)
    return ConditionCheck(passed=bool(residuals[i] <= tol),
                          residual=float(residuals[i]), witness=point)


def check_assumptions(
    loss: LossSpec,
    rng: Rng | None = None,
    grid_points: int = 10_001,
    n_pairs: int = 10_000,
    tol: float = 1e-9,
    z_range: tuple[float, float] = (-20.0, 20.0),
) -> AssumptionReport:
    """Sampled verification of the loss conditions.

    All six inequalities are evaluated pointwise on a dense grid over
    ``z_range`` plus random pairs with |z - x| < 1; this is a sampled
    check with tolerance ``tol``, not a symbolic proof.
    """
    rng = rng if rng is not None else Rng(0)
    zs = np.linspace(z_range[0], z_range[1], grid_points)
    lz = eval_loss(loss, zs)
    gz = g(loss, zs)

    # convexity via the midpoint inequality on random pairs
    x1 = z_range[0] + (z_range[1] - z_range[0]) * rng.uniform(n_pairs)
    x2 = z_range[0] + (z_range[1] - z_range[0]) * rng.uniform(n_pairs)
    mid_res = eval_loss(loss, 0.5 * (x1 + x2)) - 0.5 * (eval_loss(loss, x1) + eval_loss(loss, x2))
    convexity = _worst(list(zip(x1, x2)), mid_res, tol)

    # non-increasing on the sorted grid
    mono_res = lz[1:] - lz[:-1]
    monotone = _worst(list(zip(zs[:-1], zs[1:])), mono_res, tol)

    # |l'| <= C_g
    lip_res = gz - loss.C_g
    lipschitz = _worst([(float(z),) for z in zs], lip_res, tol)

    # g <= C_beta * l
    sb1_res = gz - loss.C_beta * lz
    self_bounded_first = _worst([(float(z),) for z in zs], sb1_res, tol)

    # second-order growth on pairs with |z - x| < 1
    xs = z_range[0] + (z_range[1] - z_range[0]) * rng.uniform(n_pairs)
    delta = 2.0 * rng.uniform(n_pairs) - 1.0
    zp = xs + delta
    lhs = eval_loss(loss, zp)
    rhs = (eval_loss(loss, xs) + deriv(loss, xs) * (zp - xs)
           + loss.C_beta * g(loss, xs) * (zp - xs) ** 2)
    self_bounded_second = _worst(list(zip(xs, zp)), lhs - rhs, tol)

    # exponential tail, only on z >= 0 and only when a C_e is declared
    if loss.C_e is None:
        exp_tail = None
    else:
        pos = zs >= 0.0
        tail_res = lz[pos] - loss.C_e * gz[pos]
        exp_tail = _worst([(float(z),) for z in zs[pos]], tail_res, tol)

    return AssumptionReport(convexity, monotone, lipschitz,
                            self_bounded_first, self_bounded_second, exp_tail)
