"""Post-hoc trajectory analytics: asymptotic-rate fitting, comparison of
recorded series against the closed-form bounds, and the large-vs-small
stepsize acceleration experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import bounds as B
from . import losses as L
from .data import Dataset, margin
from .descent import DivergenceError, GdConfig, Trajectory, run_gd

__all__ = [
    "RateFit",
    "fit_rate",
    "zero_one_curve",
    "Violation",
    "compare_bounds",
    "write_violations_csv",
    "InfeasibleBudget",
    "AccelerationScore",
    "acceleration_score",
]

_REL_TOL = 1e-9  # relative slack before a bound comparison counts as violated


@dataclass(frozen=True)
class RateFit:
    """Log-log tail fit of the loss curve.

    ``slope`` is the least-squares coefficient of ln L(w_t) on ln t over
    the window; ``plateau`` is the mean of eta*t*L(w_t) there, with its
    coefficient of variation.  A slope near -1 with a flat plateau is the
    signature of a Theta(1/(eta t)) tail.
    """

    slope: float
    intercept: float
    window: tuple[int, int]
    plateau: float
    plateau_cv: float
    monotone_tail: bool
    n_points: int

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "window": list(self.window), "plateau": self.plateau,
                "plateau_cv": self.plateau_cv,
                "monotone_tail": self.monotone_tail, "n_points": self.n_points}


def fit_rate(traj: Trajectory, eta: float, tail_fraction: float = 0.5) -> RateFit:
    """Fit ln L against ln t over the last ``tail_fraction`` of recorded steps.

    A non-monotone tail is flagged but the fit is still returned.
    """
    if not 0.0 < tail_fraction <= 0.9:
        raise ValueError("tail_fraction must lie in (0, 0.9]")
    steps = traj.steps.astype(np.float64)
    keep = (steps >= 1.0) & (traj.loss > 0.0)
    steps, lossv = steps[keep], traj.loss[keep]
    start = int(math.floor(len(steps) * (1.0 - tail_fraction)))
    t = steps[start:]
    y = lossv[start:]
    if len(t) < 20:
        raise ValueError(f"tail window has {len(t)} points; need >= 20")
    lt, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lt, ly, 1)
    scaled = eta * t * y
    plateau = float(np.mean(scaled))
    cv = float(np.std(scaled) / plateau) if plateau > 0 else math.inf
    monotone = not bool(np.any(y[1:] > y[:-1]))
    return RateFit(slope=float(slope), intercept=float(intercept),
                   window=(int(t[0]), int(t[-1])), plateau=plateau,
                   plateau_cv=cv, monotone_tail=monotone, n_points=len(t))


def zero_one_curve(traj: Trajectory, ds: Dataset) -> np.ndarray:
    """Training zero-one error at every stored iterate.

    Lets accuracy curves be laid over the loss curve and phase markers;
    whether perfect accuracy precedes or follows the phase transition is
    an empirical, dataset-dependent observation.
    """
    if traj.iterates is None:
        raise ValueError("zero_one_curve needs stored iterates")
    margins = traj.iterates @ ds.signed().T
    return np.mean(margins <= 0.0, axis=1)


@dataclass(frozen=True)
class Violation:
    step: int
    bound: str
    observed: float
    value: float

    def as_dict(self) -> dict:
        return {"step": self.step, "bound": self.bound,
                "observed": self.observed, "value": self.value}


def compare_bounds(traj: Trajectory, gamma: float, eta: float, n: int,
                   loss: L.LossSpec) -> list[Violation]:
    """Check every applicable bound at every recorded step.

    For densely recorded logistic runs this checks the running-average
    loss, the running-average gradient potential, and the parameter norm;
    for other losses, only the general average-loss bound (with the
    initialization terms zeroed, as appropriate for linear predictors
    started at zero).  Steps with gamma^2*eta*t < 1 are skipped as not
    applicable.  On unit-ball data with a certified margin and logistic
    loss the returned list is empty.
    """
    traj._require_dense()
    out: list[Violation] = []
    avg_loss = traj.avg_loss()
    avg_G = np.cumsum(traj.G[:-1]) / np.arange(1, len(traj.G))
    for idx in range(1, len(traj.steps)):
        t = int(traj.steps[idx])
        if gamma * gamma * eta * t < 1.0:
            continue
        checks: list[tuple[str, float, float]] = []
        if loss.kind == L.LOGISTIC:
            checks.append(("eos_avg", float(avg_loss[t - 1]),
                           B.eos_avg_bound(gamma, eta, t)))
            checks.append(("avg_grad_potential", float(avg_G[t - 1]),
                           B.avg_grad_potential_bound(gamma, eta, t)))
            checks.append(("param_norm", float(traj.param_norm[idx]),
                           B.param_norm_bound(gamma, eta, t)))
        else:
            checks.append(("eos_avg_general", float(avg_loss[t - 1]),
                           B.ntk_eos_bound(loss, gamma, eta, t, n, 1.0, C_a=0.0)))
        for name, observed, value in checks:
            if observed > value * (1.0 + _REL_TOL):
                out.append(Violation(step=t, bound=name,
                                     observed=observed, value=value))
    return out


def write_violations_csv(violations: list[Violation], path) -> None:
    """Write a violation list as ``step,bound,observed`` rows (the bound
    column is the numeric bound value; names stay on the API objects)."""
    from pathlib import Path

    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,bound,observed\n")
        for v in violations:
            fh.write(f"{v.step},{v.value!r},{v.observed!r}\n")


class InfeasibleBudget(ValueError):
    """The step budget is below the certified acceleration threshold."""

    def __init__(self, T: float, threshold: float):
        super().__init__(
            f"budget T={T:g} is below the certified threshold "
            f"T >= 120 max{{e, n}}/gamma^2 = {threshold:g}")
        self.T = T
        self.threshold = threshold


@dataclass(frozen=True)
class AccelerationScore:
    """Final losses of the scheduled large-stepsize run versus the best
    never-ascending constant-stepsize run at the same budget."""

    eta_large: float
    loss_large_eta: float
    eta_small_best: Optional[float]
    loss_small_eta_best: Optional[float]
    ratio: Optional[float]
    bound: float

    def as_dict(self) -> dict:
        return {"eta_large": self.eta_large, "loss_large_eta": self.loss_large_eta,
                "eta_small_best": self.eta_small_best,
                "loss_small_eta_best": self.loss_small_eta_best,
                "ratio": self.ratio, "bound": self.bound}


def _is_monotone(traj: Trajectory) -> bool:
    return not bool(np.any(traj.loss[1:] > traj.loss[:-1]))


def acceleration_score(ds: Dataset, T: int,
                       loss: Optional[L.LossSpec] = None,
                       eta_grid: Optional[list[float]] = None) -> AccelerationScore:
    """Run the budget-T stepsize schedule and score it against the best
    empirically monotone constant stepsize.

    "Never enters the oscillatory regime" is operationalized as: not a
    single strict loss ascent over the full recorded horizon.  The
    baseline is the largest stepsize from a dyadic grid of stepsizes
    below the scheduled one that satisfies this.  Raises
    :class:`InfeasibleBudget` when T is below the certified schedule
    threshold.
    """
    loss = loss if loss is not None else L.logistic()
    cert = margin(ds)
    plan = B.acceleration_plan(cert.gamma, ds.n, T)
    if not plan.feasible:
        raise InfeasibleBudget(T, plan.threshold)

    big = run_gd(GdConfig(eta=plan.eta, steps=T, loss=loss), ds)
    loss_big = float(big.loss[-1])

    if eta_grid is None:
        # dyadic stepsizes at most half the scheduled one
        k_hi = int(math.floor(math.log2(plan.eta / 2.0) + 1e-12))
        eta_grid = [2.0 ** k for k in range(k_hi, -7, -1)]
    eta_best, loss_best = None, None
    for eta in sorted(eta_grid, reverse=True):
        try:
            traj = run_gd(GdConfig(eta=eta, steps=T, loss=loss), ds)
        except DivergenceError:
            continue
        if _is_monotone(traj):
            eta_best, loss_best = eta, float(traj.loss[-1])
            break

    ratio = loss_big / loss_best if loss_best else None
    return AccelerationScore(eta_large=plan.eta, loss_large_eta=loss_big,
                             eta_small_best=eta_best,
                             loss_small_eta_best=loss_best,
                             ratio=ratio, bound=plan.bound)
