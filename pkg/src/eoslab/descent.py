"""Full-batch GD and online SGD engines over linear predictors, with
per-step instrumentation and phase-transition detection.

A trajectory records, at every step, the loss L, the gradient norm, the
parameter norm, the distance from initialization, the gradient potential
G(w) = mean_i |l'(y_i x_i^T w)|, and the exponential potential
F(w) = mean_i exp(-y_i x_i^T w).  G drives the phase-transition bounds;
F is the stable-phase initial-condition term and is primarily meaningful
for logistic runs (it is still computed for every loss).

Runs are pure functions of their inputs: rerunning with the same config
and dataset reproduces every recorded number bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds as B
from . import losses as L
from .data import Dataset, MarginCertificate
from .numerics import Rng

__all__ = [
    "GdConfig",
    "Trajectory",
    "PhaseReport",
    "DivergenceError",
    "loss_value",
    "grad",
    "potentials",
    "run_gd",
    "detect_phase",
    "run_sgd",
    "split_optimization_check",
    "perceptron_potential_check",
    "write_trajectory_csv",
]

# divergence guard: abort after this many consecutive steps with loss
# above 1e3 * L(w_0), or immediately on a non-finite loss
_GUARD_FACTOR = 1e3
_GUARD_PATIENCE = 50

CSV_COLUMNS = ("step", "loss", "grad_norm", "param_norm", "dist_init", "G", "F")


class DivergenceError(RuntimeError):
    """Raised when a run blows up instead of converging."""

    def __init__(self, step: int, message: str):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class GdConfig:
    eta: float
    steps: int
    loss: L.LossSpec
    init: Optional[np.ndarray] = None
    record_every: int = 1
    store_iterates: bool = False

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Recorded series of one run; all arrays are aligned with ``steps``.

    ``iterates`` is the full (steps+1, d) parameter history and is only
    present when the run stored it (memory scales with steps * d).
    """

    steps: np.ndarray
    loss: np.ndarray
    grad_norm: np.ndarray
    param_norm: np.ndarray
    dist_init: np.ndarray
    G: np.ndarray
    F: np.ndarray
    eta: float
    loss_spec: L.LossSpec
    record_every: int
    w_final: np.ndarray
    iterates: Optional[np.ndarray] = None
    zero_one: Optional[np.ndarray] = None   # population 0-1 error (SGD runs)
    sample_idx: Optional[np.ndarray] = None  # drawn sample indices (SGD runs)

    @property
    def dense(self) -> bool:
        return self.record_every == 1

    @property
    def horizon(self) -> int:
        return int(self.steps[-1])

    def avg_loss(self) -> np.ndarray:
        """Running average (1/t) sum_{k<t} loss_k at t = 1..len; requires
        dense recording."""
        self._require_dense()
        return np.cumsum(self.loss[:-1]) / np.arange(1, len(self.loss))

    def _require_dense(self):
        if not self.dense:
            raise ValueError("this operation needs record_every=1")


@dataclass(frozen=True)
class PhaseReport:
    """Where a run switched from the oscillatory to the stable regime.

    ``s_theory`` is the first step meeting the stable-phase criterion on
    the loss value (None if never met within the horizon); ``s_empirical``
    is one past the last strict loss ascent (0 for monotone runs);
    ``tau_bound`` is the loss-appropriate phase-transition time bound.
    """

    s_theory: Optional[int]
    s_empirical: int
    tau_bound: float
    criterion_value: float

    def as_dict(self) -> dict:
        return {"s_theory": self.s_theory, "s_empirical": self.s_empirical,
                "tau_bound": self.tau_bound,
                "criterion_value": self.criterion_value}


def loss_value(loss: L.LossSpec, ds: Dataset, w: np.ndarray) -> float:
    """Mean loss over the dataset at parameter w."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (ds.d,):
        raise ValueError(f"dimension mismatch: w has shape {w.shape}, data is {ds.d}-dim")
    z = ds.signed() @ w
    return float(np.mean(L.eval_loss(loss, z)))


def grad(loss: L.LossSpec, ds: Dataset, w: np.ndarray) -> np.ndarray:
    """Analytic gradient of the mean loss at w."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (ds.d,):
        raise ValueError(f"dimension mismatch: w has shape {w.shape}, data is {ds.d}-dim")
    Zy = ds.signed()
    return Zy.T @ L.deriv(loss, Zy @ w) / ds.n


def potentials(loss: L.LossSpec, ds: Dataset, w: np.ndarray) -> tuple[float, float]:
    """(G, F) at w.  F is computed for every loss; it enters the stable
    phase bound only for logistic runs."""
    z = ds.signed() @ np.asarray(w, dtype=np.float64)
    with np.errstate(over="ignore"):
        Fv = float(np.mean(np.exp(-z)))
    return float(np.mean(L.g(loss, z))), Fv


def run_gd(cfg: GdConfig, ds: Dataset) -> Trajectory:
    """Constant-stepsize full-batch GD: w_t = w_{t-1} - eta * grad L(w_{t-1})."""
    w = np.zeros(ds.d) if cfg.init is None else np.array(cfg.init, dtype=np.float64)
    if w.shape != (ds.d,):
        raise ValueError("init has the wrong dimension")
    Zy = ds.signed()
    n = ds.n
    loss = cfg.loss
    T = cfg.steps

    rec_steps, rec = [], {k: [] for k in ("loss", "grad_norm", "param_norm",
                                          "dist_init", "G", "F")}
    iterates = np.empty((T + 1, ds.d)) if cfg.store_iterates else None
    w0 = w.copy()
    loss0 = None
    over = 0

    for t in range(T + 1):
        z = Zy @ w
        lvec = L.eval_loss(loss, z)
        lval = float(np.mean(lvec))
        if not math.isfinite(lval):
            raise DivergenceError(t, f"non-finite loss at step {t}")
        if loss0 is None:
            loss0 = lval
        over = over + 1 if lval > _GUARD_FACTOR * loss0 else 0
        if over >= _GUARD_PATIENCE:
            raise DivergenceError(
                t, f"loss exceeded {_GUARD_FACTOR:g} * L(w_0) for "
                   f"{_GUARD_PATIENCE} consecutive steps (step {t})")

        dvec = L.deriv(loss, z)
        gvec = Zy.T @ dvec / n
        if iterates is not None:
            iterates[t] = w
        if t % cfg.record_every == 0 or t == T:
            with np.errstate(over="ignore"):
                Fv = float(np.mean(np.exp(-z)))
            rec_steps.append(t)
            rec["loss"].append(lval)
            rec["grad_norm"].append(float(np.linalg.norm(gvec)))
            rec["param_norm"].append(float(np.linalg.norm(w)))
            rec["dist_init"].append(float(np.linalg.norm(w - w0)))
            rec["G"].append(float(np.mean(np.abs(dvec))))
            rec["F"].append(Fv)
        if t < T:
            w = w - cfg.eta * gvec

    return Trajectory(
        steps=np.array(rec_steps, dtype=np.int64),
        loss=np.array(rec["loss"]), grad_norm=np.array(rec["grad_norm"]),
        param_norm=np.array(rec["param_norm"]), dist_init=np.array(rec["dist_init"]),
        G=np.array(rec["G"]), F=np.array(rec["F"]),
        eta=cfg.eta, loss_spec=loss, record_every=cfg.record_every,
        w_final=w.copy(), iterates=iterates)


def stable_criterion(loss: L.LossSpec, eta: float, n: int) -> float:
    """Loss level below which the run is certified to descend monotonically."""
    if loss.kind == L.LOGISTIC:
        return 1.0 / eta
    return min(1.0 / (12.0 * loss.C_beta ** 2 * eta), loss.ell0 / n)


def detect_phase(traj: Trajectory, loss: L.LossSpec, eta: float, n: int,
                 gamma: float) -> PhaseReport:
    """Locate the phase transition in a densely recorded trajectory."""
    traj._require_dense()
    crit = stable_criterion(loss, eta, n)

    below = np.nonzero(traj.loss <= crit)[0]
    s_theory = int(traj.steps[below[0]]) if below.size else None

    ascents = np.nonzero(traj.loss[1:] > traj.loss[:-1])[0]
    s_empirical = int(traj.steps[ascents[-1]] + 1) if ascents.size else 0

    if loss.kind == L.LOGISTIC:
        tau = B.tau_logistic(gamma, eta, n)
    elif loss.C_e is not None:
        tau = B.tau_exp_tail(gamma, eta, n)
    else:
        tau = B.tau_general(loss, gamma, eta, n)
    return PhaseReport(s_theory=s_theory, s_empirical=s_empirical,
                       tau_bound=tau, criterion_value=crit)


def run_sgd(ds: Dataset, eta: float, steps: int, rng: Rng,
            loss: Optional[L.LossSpec] = None,
            store_iterates: bool = False) -> Trajectory:
    """One-sample-per-step SGD on the empirical distribution of ``ds``.

    Only the logistic loss is supported.  Because the sampling
    distribution has finite support, the recorded population loss and
    population zero-one error are computed exactly over the support at
    every step (no Monte Carlo error).
    """
    loss = loss if loss is not None else L.logistic()
    if loss.kind != L.LOGISTIC:
        raise ValueError("online SGD is analyzed for the logistic loss only")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    Zy = ds.signed()
    n = ds.n
    w = np.zeros(ds.d)
    T = steps
    # the whole index stream is drawn up front (one batched draw per run,
    # deterministic per seed)
    idx = rng.integers(0, n, size=T)

    rec = {k: np.empty(T + 1) for k in ("loss", "grad_norm", "param_norm",
                                        "dist_init", "G", "F", "zero_one")}
    iterates = np.empty((T + 1, ds.d)) if store_iterates else None
    loss0 = None
    over = 0

    with np.errstate(over="ignore", divide="ignore"):
        for t in range(T + 1):
            z = Zy @ w
            lval = float(np.mean(np.logaddexp(0.0, -z)))
            if not math.isfinite(lval):
                raise DivergenceError(t, f"non-finite loss at step {t}")
            if loss0 is None:
                loss0 = lval
            over = over + 1 if lval > _GUARD_FACTOR * loss0 else 0
            if over >= _GUARD_PATIENCE:
                raise DivergenceError(t, f"population loss diverged (step {t})")

            expz = np.exp(z)
            svec = 1.0 / (1.0 + expz)          # = |l'(z)| for the logistic loss
            rec["loss"][t] = lval
            rec["grad_norm"][t] = float(np.linalg.norm(Zy.T @ svec / n))
            rec["param_norm"][t] = float(np.linalg.norm(w))
            rec["dist_init"][t] = rec["param_norm"][t]  # w_0 = 0
            rec["G"][t] = float(np.mean(svec))
            rec["F"][t] = float(np.mean(1.0 / expz))
            rec["zero_one"][t] = float(np.mean(z <= 0.0))
            if iterates is not None:
                iterates[t] = w
            if t < T:
                i = int(idx[t])
                zi = float(Zy[i] @ w)
                if zi > 700.0:
                    coef = 0.0
                elif zi < -700.0:
                    coef = -1.0
                else:
                    coef = -1.0 / (1.0 + math.exp(zi))
                w = w - (eta * coef) * Zy[i]

    return Trajectory(
        steps=np.arange(T + 1, dtype=np.int64),
        loss=rec["loss"], grad_norm=rec["grad_norm"],
        param_norm=rec["param_norm"], dist_init=rec["dist_init"],
        G=rec["G"], F=rec["F"], eta=eta, loss_spec=loss, record_every=1,
        w_final=w.copy(), iterates=iterates, zero_one=rec["zero_one"],
        sample_idx=idx)


def split_optimization_check(traj: Trajectory, ds: Dataset,
                             cert: MarginCertificate, u1: np.ndarray,
                             t: int) -> float:
    """Residual of the split-comparator inequality at step t.

    With u = u1 + (eta/(2*gamma)) w_star, the inequality

        ||w_t - u||^2/(2 eta t) + avg_{k<t} L(w_k)
            <= L(u1) + ||w_0 - u||^2/(2 eta t)

    holds for logistic runs on unit-ball data with certified margin, for
    any u1.  Returns LHS - RHS (expected <= 0 on conformant inputs).
    """
    if traj.iterates is None:
        raise ValueError("split check needs stored iterates")
    traj._require_dense()
    if not 1 <= t <= traj.horizon:
        raise ValueError(f"t must lie in [1, {traj.horizon}]")
    eta = traj.eta
    u1 = np.asarray(u1, dtype=np.float64)
    u = u1 + (eta / (2.0 * cert.gamma)) * cert.w_star
    w0, wt = traj.iterates[0], traj.iterates[t]
    lhs = float(np.sum((wt - u) ** 2)) / (2.0 * eta * t) + float(np.mean(traj.loss[:t]))
    rhs = loss_value(traj.loss_spec, ds, u1) + float(np.sum((w0 - u) ** 2)) / (2.0 * eta * t)
    return lhs - rhs


def perceptron_potential_check(traj: Trajectory, cert: MarginCertificate,
                               eta: Optional[float] = None) -> float:
    """Minimum slack of the margin-alignment inequality along a run.

    Each step must advance the projection on the certified direction by at
    least gamma * eta * G(w_t); returns min_t of the actual advance minus
    that floor (expected >= 0 on conformant inputs).
    """
    if traj.iterates is None:
        raise ValueError("perceptron check needs stored iterates")
    traj._require_dense()
    eta = traj.eta if eta is None else eta
    proj = traj.iterates @ cert.w_star
    slack = (proj[1:] - proj[:-1]) - cert.gamma * eta * traj.G[:-1]
    return float(np.min(slack))


def write_trajectory_csv(traj: Trajectory, path: str | Path) -> None:
    """Write the recorded series as CSV (round-trippable decimal text)."""
    cols = list(CSV_COLUMNS)
    series = [traj.steps, traj.loss, traj.grad_norm, traj.param_norm,
              traj.dist_init, traj.G, traj.F]
    if traj.zero_one is not None:
        cols.append("zero_one")
        series.append(traj.zero_one)
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(len(traj.steps)):
            row = [repr(int(traj.steps[i]))]
            row += [repr(float(s[i])) for s in series[1:]]
            fh.write(",".join(row) + "\n")
