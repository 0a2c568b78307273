"""Width-m two-layer ReLU network trained by full-batch GD in the lazy
(kernel) regime, with diagnostics for how lazy the run actually was.

The network is f(x; w) = (1/sqrt(m)) sum_s a_s relu(x^T w^(s)) with fixed
output signs a_s in {+/-1} and trainable first-layer weights only.  The
ReLU subgradient at zero is fixed to 0.  Signs alternate by default so
they sum to zero, which satisfies the |sum_s a_s| <= C_a sqrt(m) condition
deterministically with C_a = 1; a random-sign mode is available for the
setting where the signs are sampled.

``lazy_radius`` and ``width_min`` evaluate the closed-form sufficiency
conditions under which the run provably stays near its linearization.
The width formula is a worst-case sufficiency threshold and is
astronomically large for practical inputs; runs at any width still fill
in the diagnostics (max distance from initialization vs. the lazy radius)
so laziness can be checked observationally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import losses as L
from .data import Dataset, MarginCertificate, margin
from .descent import DivergenceError, Trajectory, _GUARD_FACTOR, _GUARD_PATIENCE
from .numerics import Rng

__all__ = [
    "NtkNet",
    "NtkDiagnostics",
    "init_net",
    "forward",
    "forward_all",
    "grad_param",
    "ntk_loss",
    "ntk_grad",
    "linearization_error",
    "lazy_radius",
    "width_min",
    "run_gd_ntk",
    "ntk_margin_hat",
]


@dataclass
class NtkNet:
    """Two-layer ReLU net; ``w`` is the trainable (m, d) first layer and
    ``w0`` the frozen initialization snapshot."""

    a: np.ndarray   # (m,) output signs, +/-1, fixed
    w: np.ndarray   # (m, d) current weights
    w0: np.ndarray  # (m, d) initialization, drawn once

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]

    def dist_init(self) -> float:
        return float(np.linalg.norm(self.w - self.w0))


@dataclass(frozen=True)
class NtkDiagnostics:
    """Observed laziness of a run versus the certified radius."""

    R: float
    max_dist: float
    width_min: float
    ntk_margin_hat: Optional[float] = None

    @property
    def lazy_ok(self) -> bool:
        return self.max_dist <= self.R

    def as_dict(self) -> dict:
        return {"R": self.R, "max_dist": self.max_dist, "lazy_ok": self.lazy_ok,
                "width_min": self.width_min, "ntk_margin_hat": self.ntk_margin_hat}


def init_net(m: int, d: int, rng: Rng, random_signs: bool = False) -> NtkNet:
    """Fresh net with alternating signs and standard Gaussian weights.

    m must be even so the alternating signs sum to exactly zero.
    """
    if m < 2 or m % 2 != 0:
        raise ValueError("width m must be an even integer >= 2")
    if random_signs:
        a = rng.rademacher(m)
    else:
        a = np.tile([1.0, -1.0], m // 2)
    w0 = rng.normals(m * d).reshape(m, d)
    return NtkNet(a=a, w=w0.copy(), w0=w0)


def forward(net: NtkNet, x: np.ndarray) -> float:
    """f(x; w) for a single input."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.d,):
        raise ValueError("input dimension mismatch")
    pre = net.w @ x
    return float(net.a @ np.maximum(pre, 0.0)) / math.sqrt(net.m)


def forward_all(net: NtkNet, X: np.ndarray, w: Optional[np.ndarray] = None) -> np.ndarray:
    """f(x_i; w) for all rows of X (optionally at alternative weights w)."""
    W = net.w if w is None else w
    pre = X @ W.T
    return np.maximum(pre, 0.0) @ net.a / math.sqrt(net.m)


def grad_param(net: NtkNet, x: np.ndarray, w: Optional[np.ndarray] = None) -> np.ndarray:
    """Parameter gradient of f(x; .), flattened to (m*d,).

    Block s is (a_s/sqrt(m)) * 1[x^T w^(s) > 0] * x; the indicator is
    strict at zero, matching the fixed subgradient choice.
    """
    x = np.asarray(x, dtype=np.float64)
    W = net.w if w is None else w
    active = (W @ x > 0.0).astype(np.float64)
    blocks = (net.a * active)[:, None] * x[None, :] / math.sqrt(net.m)
    return blocks.ravel()


def ntk_loss(net: NtkNet, ds: Dataset, loss: L.LossSpec,
             w: Optional[np.ndarray] = None) -> float:
    z = ds.ys * forward_all(net, ds.xs, w)
    return float(np.mean(L.eval_loss(loss, z)))


def ntk_grad(net: NtkNet, ds: Dataset, loss: L.LossSpec) -> np.ndarray:
    """(m, d) gradient of the mean loss in the first-layer weights."""
    pre = ds.xs @ net.w.T                      # (n, m)
    f = np.maximum(pre, 0.0) @ net.a / math.sqrt(net.m)
    coeff = L.deriv(loss, ds.ys * f) * ds.ys / ds.n   # (n,)
    mask = pre > 0.0
    return (net.a[:, None] / math.sqrt(net.m)) * ((mask * coeff[:, None]).T @ ds.xs)


def linearization_error(net: NtkNet, w: np.ndarray, v: np.ndarray,
                        x: np.ndarray) -> float:
    """f(x; w) - f(x; v) - <grad f(x; v), w - v>.

    Exactly zero whenever w and v induce the same activation pattern on x
    (the network is piecewise linear in its parameters).
    """
    w = np.asarray(w, dtype=np.float64).reshape(net.m, net.d)
    v = np.asarray(v, dtype=np.float64).reshape(net.m, net.d)
    fw = forward_all(net, np.asarray(x)[None, :], w)[0]
    fv = forward_all(net, np.asarray(x)[None, :], v)[0]
    gv = grad_param(net, x, v)
    return float(fw - fv - gv @ (w - v).ravel())


def lazy_radius(loss: L.LossSpec, gamma: float, eta: float, T: float,
                n: float, delta: float, C_a: float = 1.0) -> float:
    """Certified bound on max_t ||w_t - w_0|| for a width-sufficient run."""
    rho = L.rho_bound(loss, max(gamma * gamma * eta * T, 1.0))
    return 6.0 * (math.sqrt(rho) + C_a + math.sqrt(2.0 * math.log(2.0 * n / delta))
                  + eta * loss.C_g) / gamma


def width_min(loss: L.LossSpec, gamma: float, eta: float, T: float,
              n: float, delta: float, C_a: float = 1.0) -> float:
    """Sufficient width for the lazy-regime guarantees.

    Worst-case sufficiency only: the value is far beyond what empirical
    laziness requires on small problems.
    """
    R = lazy_radius(loss, gamma, eta, T, n, delta, C_a)
    return ((30.0 * R ** (1.0 / 3.0) + 10.0 * math.log(n / delta) ** 0.25) / gamma) ** 6


def run_gd_ntk(net: NtkNet, ds: Dataset, loss: L.LossSpec, eta: float, T: int,
               gamma: Optional[float] = None, delta: float = 0.1,
               C_a: float = 1.0) -> tuple[Trajectory, NtkDiagnostics]:
    """Full-batch GD on the network loss, with laziness diagnostics.

    ``gamma`` (for the radius/width formulas) defaults to the certified
    linear margin of the dataset.  Diagnostics are observational: a run at
    insufficient width reports max_dist > R rather than failing.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if gamma is None:
        gamma = margin(ds).gamma
    rec = {k: np.empty(T + 1) for k in ("loss", "grad_norm", "param_norm",
                                        "dist_init", "G", "F")}
    loss0 = None
    over = 0
    max_dist = 0.0
    for t in range(T + 1):
        z = ds.ys * forward_all(net, ds.xs)
        lvec = L.eval_loss(loss, z)
        lval = float(np.mean(lvec))
        if not math.isfinite(lval):
            raise DivergenceError(t, f"non-finite loss at step {t}")
        if loss0 is None:
            loss0 = lval
        over = over + 1 if lval > _GUARD_FACTOR * loss0 else 0
        if over >= _GUARD_PATIENCE:
            raise DivergenceError(t, f"network loss diverged (step {t})")
        gmat = ntk_grad(net, ds, loss)
        dist = net.dist_init()
        max_dist = max(max_dist, dist)
        rec["loss"][t] = lval
        rec["grad_norm"][t] = float(np.linalg.norm(gmat))
        rec["param_norm"][t] = float(np.linalg.norm(net.w))
        rec["dist_init"][t] = dist
        rec["G"][t] = float(np.mean(L.g(loss, z)))
        with np.errstate(over="ignore"):
            rec["F"][t] = float(np.mean(np.exp(-z)))
        if t < T:
            net.w = net.w - eta * gmat

    traj = Trajectory(
        steps=np.arange(T + 1, dtype=np.int64),
        loss=rec["loss"], grad_norm=rec["grad_norm"],
        param_norm=rec["param_norm"], dist_init=rec["dist_init"],
        G=rec["G"], F=rec["F"], eta=eta, loss_spec=loss, record_every=1,
        w_final=net.w.ravel().copy())
    diag = NtkDiagnostics(
        R=lazy_radius(loss, gamma, eta, T, ds.n, delta, C_a),
        max_dist=max_dist,
        width_min=width_min(loss, gamma, eta, T, ds.n, delta, C_a))
    return traj, diag


def ntk_margin_hat(net: NtkNet, ds: Dataset, tol: float = 1e-10) -> MarginCertificate:
    """Certified margin of the finite-width tangent features at w_0.

    Runs the max-margin solver on the n vectors y_i * grad f(x_i; w_0) in
    m*d dimensions.  Raises :class:`NotSeparable` when the tangent
    features are not linearly separable.
    """
    feats = np.stack([ds.ys[i] * grad_param(net, ds.xs[i], net.w0)
                      for i in range(ds.n)])
    tangent = Dataset(feats, np.ones(ds.n), name=ds.name + "/tangent")
    return margin(tangent, tol=tol)
