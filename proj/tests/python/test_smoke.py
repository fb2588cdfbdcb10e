import math

import pytest

import scalelab as sl


def test_version():
    assert sl.__version__ == "0.1.0"


def test_adam_first_step_is_unit_sign():
    cfg = sl.OptimizerConfig(beta1=0.9, beta2=0.999, epsilon=0.0, bias_correction=True)
    state = sl.MomentState.zeros(3)
    new_state, r = sl.adam_step(state, [2.0, -0.5, 1e-3], cfg)
    assert new_state.k == 1
    assert r == pytest.approx([1.0, -1.0, 1.0])


def test_zero_second_moment_without_epsilon_raises():
    cfg = sl.OptimizerConfig(epsilon=0.0)
    with pytest.raises(sl.DomainError):
        sl.adam_step(sl.MomentState.zeros(1), [0.0], cfg)


def test_signsgd_and_gd():
    assert sl.signsgd_step([3.0, -2.0, 0.0]) == [1.0, -1.0, 0.0]
    assert sl.gd_step([3.0, -2.0]) == [3.0, -2.0]


def test_invariance_probe_classifies_methods():
    state = sl.MomentState([0.1, -0.2], [0.04, 0.09])
    lambdas = [0.5, 2.0, 10.0]
    cfg = sl.OptimizerConfig(epsilon=0.0)
    sign = sl.exact_invariance_probe(sl.Method.signsgd, state, [1.0, -3.0], lambdas, cfg)
    gd = sl.exact_invariance_probe(sl.Method.gd, state, [1.0, -3.0], lambdas, cfg)
    assert max(sign.deviations) == 0.0
    assert max(gd.deviations) > 1.0
    assert sign.classification != gd.classification


def test_beta_tau_roundtrip():
    tau = sl.tau_from_beta(0.9, 1.0)
    assert sl.beta_from_tau(tau, 1.0) == pytest.approx(0.9, rel=1e-14)


def test_exponential_flow_matches_gains():
    ts = sl.TimeScales(tau1=1.0, tau2=1.0, eta_bar=1.0)
    signal = sl.GradientSignal.uniform(sl.ScalarSignal.exponential(1.0, 0.05), 1)
    trace = sl.integrate_flow(signal, ts, t_end=40.0, stride=10)
    gains = sl.steady_state_exponential_gains(0.05, ts)
    assert gains.r == pytest.approx(1.1 ** 0.5 / 1.05, rel=1e-12)
    assert trace["norm_R"][-1] == pytest.approx(gains.r, rel=1e-6)
    assert len(trace["t"]) == len(trace["R"])


def test_oscillation_metrics():
    assert sl.oscillation_omega1([0.0, 1.0, 0.0, 1.0]) == pytest.approx(1.0)
    assert sl.oscillation_omega2([0.0, 1.0, 0.0]) == pytest.approx(2.0)
    smooth = sl.ema_smooth([1.0, 3.0], 3)
    assert smooth == pytest.approx([1.0, 2.0])


def test_binomial_tail():
    assert sl.binomial_diagonal_test(3, 3) == pytest.approx(1.0 / 27.0)
    assert sl.binomial_diagonal_test(0, 5) == pytest.approx(1.0)


def test_grid_report_counts_diagonal_hits():
    diag = [[1.0, 2.0, 3.0], [2.0, 1.0, 3.0], [3.0, 2.0, 1.0]]
    report = sl.grid_report([diag, diag], [0.9, 0.99, 0.999])
    assert (report.k, report.n) == (6, 6)
    assert report.p_value == pytest.approx(3.0 ** -6)


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        sl.TimeScales(tau1=-1.0)
    with pytest.raises(ValueError):
        sl.grid_report([[[1.0, 2.0]]], [0.9, 0.99])


def test_training_is_deterministic():
    a = sl.run_training("logistic", sl.OptimizerConfig(), seed=3, steps=50)
    b = sl.run_training("logistic", sl.OptimizerConfig(), seed=3, steps=50)
    assert a["loss"] == b["loss"]
    assert not a["diverged"]
    assert all(math.isfinite(x) for x in a["norm_R"])


def test_small_sweep():
    report, cells = sl.sweep("logistic", [0.9, 0.99], seeds=[0], steps=200, window=20, threads=1)
    assert len(cells) == 4
    assert report.n <= 2
