"""Online SGD with a large stepsize still controls the population metrics.

Sampling one example per step from the empirical distribution of the
four-sample dataset, the exact population loss and population zero-one
error (computed over the finite support, no Monte Carlo) stay below their
high-probability bounds across seeds -- even at eta = sqrt(T).

Run:  python3 demos/05_sgd_population.py
"""

import math

import numpy as np

from eoslab import bounds, data, descent
from eoslab.numerics import Rng

toy = data.toy_dataset()
cert = data.margin(toy)
t_h, delta, n_seeds = 10_000, 0.05, 20

for eta in (1.0, math.sqrt(t_h)):
    loss_bound = bounds.sgd_loss_bound(cert.gamma, eta, t_h, delta)
    err_bound = bounds.sgd_error_bound(cert.gamma, eta, t_h, delta)
    avg_losses, avg_errs = [], []
    for seed in range(n_seeds):
        traj = descent.run_sgd(toy, eta, t_h, Rng(seed))
        avg_losses.append(float(np.mean(traj.loss[:t_h])))
        avg_errs.append(float(np.mean(traj.zero_one[:t_h])))
    ok_l = sum(v <= loss_bound for v in avg_losses)
    ok_e = sum(v <= err_bound for v in avg_errs)
    print(f"eta={eta:>5g}: time-avg population loss "
          f"{np.median(avg_losses):.4f} (median) vs bound {loss_bound:.4f} "
          f"-> {ok_l}/{n_seeds} seeds below")
    print(f"          time-avg population error "
          f"{np.median(avg_errs):.4f} (median) vs bound {err_bound:.4f} "
          f"-> {ok_e}/{n_seeds} seeds below")
