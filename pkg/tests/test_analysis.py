"""Trajectory analytics: rate fitting on exact power laws, bound
comparison soundness, and the acceleration experiment."""

import math

import numpy as np
import pytest

from eoslab import analysis, bounds, data, descent, losses

LOG = losses.logistic()
TOY = data.toy_dataset()
NTOY = data.normalized(TOY)
NCERT = data.margin(NTOY)


def synthetic_trajectory(loss_fn, T, eta=1.0):
    """Trajectory whose loss series follows an exact law loss_fn(t)."""
    steps = np.arange(T + 1, dtype=np.int64)
    lossv = np.array([loss_fn(max(int(t), 1)) for t in steps])
    zeros = np.zeros(T + 1)
    return descent.Trajectory(steps=steps, loss=lossv, grad_norm=zeros,
                              param_norm=zeros, dist_init=zeros, G=zeros,
                              F=zeros, eta=eta, loss_spec=LOG, record_every=1,
                              w_final=np.zeros(2))


class TestFitRate:
    def test_exact_inverse_law(self):
        eta = 4.0
        tr = synthetic_trajectory(lambda t: 1.0 / (eta * t), 2000, eta)
        fit = analysis.fit_rate(tr, eta, tail_fraction=0.5)
        assert fit.slope == pytest.approx(-1.0, abs=1e-6)
        assert fit.plateau == pytest.approx(1.0, abs=1e-9)
        assert fit.plateau_cv == pytest.approx(0.0, abs=1e-9)
        assert fit.monotone_tail

    def test_exact_power_law_exponent_recovery(self):
        for p in (-0.5, -1.0, -2.0):
            tr = synthetic_trajectory(lambda t, p=p: float(t) ** p, 5000)
            fit = analysis.fit_rate(tr, 1.0, tail_fraction=0.5)
            assert fit.slope == pytest.approx(p, abs=1e-6)

    def test_log_squared_correction(self):
        tr = synthetic_trajectory(lambda t: math.log(t + 1.0) ** 2 / t, 100_000)
        fit = analysis.fit_rate(tr, 1.0, tail_fraction=0.5)
        assert -1.0 < fit.slope < -0.8

    def test_toy_run_slope_near_inverse(self):
        tr = descent.run_gd(descent.GdConfig(eta=8.0, steps=20_000, loss=LOG), TOY)
        fit = analysis.fit_rate(tr, 8.0, tail_fraction=0.5)
        assert -1.15 <= fit.slope <= -0.85

    def test_non_monotone_tail_flagged(self):
        tr = synthetic_trajectory(lambda t: (1.0 + 0.5 * (t % 2)) / t, 500)
        fit = analysis.fit_rate(tr, 1.0, tail_fraction=0.5)
        assert not fit.monotone_tail

    def test_window_too_small(self):
        tr = synthetic_trajectory(lambda t: 1.0 / t, 15)
        with pytest.raises(ValueError):
            analysis.fit_rate(tr, 1.0, tail_fraction=0.5)

    def test_bad_fraction(self):
        tr = synthetic_trajectory(lambda t: 1.0 / t, 100)
        with pytest.raises(ValueError):
            analysis.fit_rate(tr, 1.0, tail_fraction=0.95)


class TestCompareBounds:
    def test_conformant_run_is_clean(self):
        tr = descent.run_gd(descent.GdConfig(eta=8.0, steps=2000, loss=LOG), NTOY)
        assert analysis.compare_bounds(tr, NCERT.gamma, 8.0, NTOY.n, LOG) == []

    def test_unnormalized_data_may_violate(self):
        # samples outside the unit ball void the certificate's premises;
        # violations are reported, not asserted against
        tr = descent.run_gd(descent.GdConfig(eta=8.0, steps=2000, loss=LOG), TOY)
        out = analysis.compare_bounds(tr, 0.2, 8.0, TOY.n, LOG)
        assert isinstance(out, list)

    def test_inflated_losses_reported_with_steps(self):
        tr = descent.run_gd(descent.GdConfig(eta=8.0, steps=500, loss=LOG), NTOY)
        inflated = descent.Trajectory(
            steps=tr.steps, loss=tr.loss * 50.0, grad_norm=tr.grad_norm,
            param_norm=tr.param_norm, dist_init=tr.dist_init, G=tr.G, F=tr.F,
            eta=tr.eta, loss_spec=tr.loss_spec, record_every=1,
            w_final=tr.w_final)
        out = analysis.compare_bounds(inflated, NCERT.gamma, 8.0, NTOY.n, LOG)
        assert out and all(v.step >= 1 for v in out)
        assert any(v.bound == "eos_avg" for v in out)

    def test_soundness_against_hand_values(self):
        # a flat series exactly at the bound is never flagged; just above is
        gamma, eta = 0.5, 2.0
        t_check = 40
        val = bounds.eos_avg_bound(gamma, eta, t_check)
        tr_ok = synthetic_trajectory(lambda t: val, 50, eta)
        flagged = [v for v in analysis.compare_bounds(tr_ok, gamma, eta, 4, LOG)
                   if v.bound == "eos_avg" and v.step == t_check]
        assert not flagged
        tr_bad = synthetic_trajectory(lambda t: val * 1.001, 50, eta)
        flagged = [v for v in analysis.compare_bounds(tr_bad, gamma, eta, 4, LOG)
                   if v.bound == "eos_avg"]
        assert flagged

    def test_general_loss_route(self):
        spec = losses.flattened_polynomial(2.0)
        tr = descent.run_gd(descent.GdConfig(eta=2.0, steps=800, loss=spec), NTOY)
        out = analysis.compare_bounds(tr, NCERT.gamma, 2.0, NTOY.n, spec)
        assert out == []

    def test_zero_one_curve(self):
        tr = descent.run_gd(descent.GdConfig(eta=8.0, steps=200, loss=LOG,
                                             store_iterates=True), TOY)
        err = analysis.zero_one_curve(tr, TOY)
        assert err.shape == (201,)
        assert err[0] == 1.0  # zero init misclassifies everything (margin 0)
        assert err[-1] == 0.0  # separable data ends perfectly classified
        # spot-check against a direct computation
        k = 17
        direct = float(np.mean(TOY.signed() @ tr.iterates[k] <= 0.0))
        assert err[k] == direct

    def test_zero_one_curve_needs_iterates(self):
        tr = descent.run_gd(descent.GdConfig(eta=8.0, steps=50, loss=LOG), TOY)
        with pytest.raises(ValueError):
            analysis.zero_one_curve(tr, TOY)

    def test_violations_csv(self, tmp_path):
        v = [analysis.Violation(step=7, bound="eos_avg", observed=2.5, value=2.0)]
        p = tmp_path / "v.csv"
        analysis.write_violations_csv(v, p)
        lines = p.read_text().splitlines()
        assert lines[0] == "step,bound,observed"
        step, bound, observed = lines[1].split(",")
        assert (int(step), float(bound), float(observed)) == (7, 2.0, 2.5)


class TestAccelerationScore:
    def test_toy_budget_experiment(self):
        score = analysis.acceleration_score(TOY, 12000)
        assert score.eta_large == pytest.approx(4.0)
        assert score.loss_large_eta <= score.bound
        assert score.ratio is not None and score.ratio < 1.0
        assert score.eta_small_best is not None
        assert score.eta_small_best < score.eta_large

    def test_infeasible_budget_raises_with_threshold(self):
        with pytest.raises(analysis.InfeasibleBudget) as exc:
            analysis.acceleration_score(TOY, 100)
        assert exc.value.threshold == pytest.approx(12000.0)
        assert "12000" in str(exc.value)

    def test_lower_bound_dataset_keeps_inverse_t_floor(self):
        # monotone runs on the two-point set: t * loss stays bounded away
        # from zero over the tail
        ds = data.lower_bound_dataset(0.05)
        tr = descent.run_gd(descent.GdConfig(eta=8.0, steps=20_000, loss=LOG), ds)
        assert not np.any(tr.loss[1:] > tr.loss[:-1])
        tail = np.arange(10_000, 20_001)
        scaled = tail * tr.loss[tail]
        assert float(scaled.min()) > 0.0
        fit = analysis.fit_rate(tr, 8.0, tail_fraction=0.5)
        assert fit.plateau_cv < 0.5
