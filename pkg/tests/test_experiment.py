import math

import numpy as np
import pytest

from qlasso import (
    ErrorCurve,
    ExperimentConfig,
    Sparse,
    delta_sweep,
    fit_rate,
    onebit_dither_range,
    onebit_moment_check,
    run_curve,
    run_trial,
    substream,
)
from qlasso.experiment import (
    onebit_eta2_formula,
    onebit_xi2_formula,
    onebit_xi_mean_literal,
    onebit_xi_mean_norm_scaled,
    qfunc,
)


def _cfg(**kw):
    base = dict(
        n=50,
        structure=Sparse(10),
        norm_target=3.0,
        R=3.0,
        ensemble="gaussian",
        quantizer="uniform",
        delta=1.0,
        m_grid=(200, 400),
        trials=3,
        master_seed=7,
        estimators=("glasso", "pbp"),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        _cfg(R=2.0)  # below norm target
    with pytest.raises(ValueError):
        _cfg(m_grid=(400, 200))
    with pytest.raises(ValueError):
        _cfg(m_grid=(200, 200))
    with pytest.raises(ValueError):
        _cfg(trials=0)
    with pytest.raises(ValueError):
        _cfg(quantizer="ternary")
    with pytest.raises(ValueError):
        _cfg(delta=None)
    with pytest.raises(ValueError):
        _cfg(estimators=("glasso", "mle"))
    with pytest.raises(ValueError):
        _cfg(ensemble="cauchy")


def test_onebit_dither_range_value():
    assert onebit_dither_range(10.0, 1000) == pytest.approx(
        10.0 * math.sqrt(math.log(1000.0)), rel=1e-15
    )
    assert onebit_dither_range(10.0, 1000) == pytest.approx(26.28, abs=0.01)


def test_run_trial_deterministic():
    cfg = _cfg()
    a = run_trial(cfg, 200, 0, "glasso")
    b = run_trial(cfg, 200, 0, "glasso")
    assert a == b
    with pytest.raises(ValueError):
        run_trial(cfg, 300, 0, "glasso")


def test_run_trial_paired_across_estimators():
    # same (m, trial) sees identical data for every estimator: the pbp point
    # equals the first projected gradient step scaled, so with identical
    # streams the two error values are strongly correlated; verify directly
    # by rebuilding the instance for both estimators and checking the trial
    # substreams coincide.
    s1 = substream(7, 200, 0, "signal").standard_normal(5)
    s2 = substream(7, 200, 0, "signal").standard_normal(5)
    np.testing.assert_array_equal(s1, s2)


def test_run_curve_shapes_and_determinism():
    cfg = _cfg()
    c1 = run_curve(cfg, "glasso")
    c2 = run_curve(cfg, "glasso")
    assert c1.m_grid == (200, 400)
    assert c1.errors.shape == (2, 3)
    np.testing.assert_array_equal(c1.errors, c2.errors)
    np.testing.assert_array_equal(c1.mean_err, c1.errors.mean(axis=1))


def test_fit_rate_exact_inverse_sqrt():
    ms = (100, 200, 400, 800, 1600)
    errs = np.array([5.0 / math.sqrt(m) for m in ms])
    curve = ErrorCurve("glasso", ms, errs, np.zeros(5), 1, 0)
    fit = fit_rate(curve, "inv_sqrt_m")
    assert fit.loglog_slope == pytest.approx(-0.5, abs=1e-9)
    assert fit.coefficient == pytest.approx(5.0, rel=1e-12)
    assert fit.residual_rms <= 1e-12


def test_fit_rate_exact_sqrtlog():
    ms = (500, 1000, 2000, 4000)
    errs = np.array([2.0 * math.sqrt(math.log(m) / m) for m in ms])
    curve = ErrorCurve("glasso", ms, errs, np.zeros(4), 1, 0)
    fit = fit_rate(curve, "sqrtlog_m_over_sqrt_m")
    assert fit.coefficient == pytest.approx(2.0, rel=1e-12)
    assert fit.residual_rms <= 1e-12


def test_fit_rate_validation():
    curve = ErrorCurve("glasso", (100, 200), np.array([1.0, 0.5]), np.zeros(2), 1, 0)
    with pytest.raises(ValueError):
        fit_rate(curve, "inv_sqrt_m")
    bad = ErrorCurve("glasso", (1, 2, 3), np.array([1.0, 0.0, 1.0]), np.zeros(3), 1, 0)
    with pytest.raises(ValueError):
        fit_rate(bad, "inv_sqrt_m")
    ok = ErrorCurve("glasso", (1, 2, 4), np.array([1.0, 0.8, 0.6]), np.zeros(3), 1, 0)
    with pytest.raises(ValueError):
        fit_rate(ok, "log_m")


def test_delta_sweep_paired():
    cfg = _cfg(m_grid=(200,), trials=4)
    out = delta_sweep(cfg, [0.5, 2.0], estimators=("glasso", "pbp"))
    assert out["glasso"]["errors"].shape == (2, 4)
    assert out["glasso"]["deltas"] == (0.5, 2.0)
    # coarser cells cannot help on average with paired draws
    assert out["pbp"]["mean_err"][1] > out["pbp"]["mean_err"][0] * 0.5
    with pytest.raises(ValueError):
        delta_sweep(_cfg(m_grid=(200, 400)), [1.0])


def test_qfunc_values():
    assert qfunc(0.0) == pytest.approx(0.5, rel=1e-15)
    assert qfunc(1.959963984540054) == pytest.approx(0.025, rel=1e-9)


def test_eta2_formula_limits():
    # s = 0: eta = mu * sign(tau), so E[eta^2] = mu^2
    assert onebit_eta2_formula(0.0, 4.0, 4.0) == pytest.approx(16.0, rel=1e-12)
    # mu = T and T >> s: 1 - 2Q(T/s) -> 1, value -> T^2 - s^2
    val = onebit_eta2_formula(0.1, 50.0, 50.0)
    assert val == pytest.approx(50.0**2 - 0.1**2, rel=1e-6)


def test_moment_check_matches_closed_forms():
    rng = substream(0, "moments")
    for i, (s, ratio) in enumerate([(1.0, 2.0), (2.0, 3.0), (0.5, 4.0)]):
        T = ratio * s
        rep = onebit_moment_check(s, T, T, 200_000, substream(0, "mom", i))
        assert abs(rep.eta2_mc - rep.eta2_formula) <= 5 * rep.eta2_se
        assert abs(rep.xi2_mc - rep.xi2_formula) <= 5 * rep.xi2_se
        # the dimensionally consistent first-moment variant tracks the MC mean
        assert abs(rep.xi_mc - rep.xi_formula_norm_scaled) <= 5 * rep.xi_se


def test_xi_literal_vs_norm_scaled():
    # the two variants differ exactly by (||x0|| - 1) times the tail term
    s, T, mu = 2.0, 5.0, 5.0
    lit = onebit_xi_mean_literal(s, T, mu)
    scaled = onebit_xi_mean_norm_scaled(s, T, mu)
    gap = 2.0 * (mu / T) * (s - 1.0) * qfunc(T / s)
    assert scaled - lit == pytest.approx(-gap, rel=1e-12)


def test_moment_check_refuses_small_samples():
    with pytest.raises(ValueError):
        onebit_moment_check(1.0, 4.0, 4.0, 100, substream(1, "mom"))
