import numpy as np
import pytest

from uwarma.montecarlo import (
    StudyConfig,
    run_estimation_study,
    run_forecast_study,
    sine_covariate,
    forecast_design,
)


@pytest.fixture(scope="module")
def by_n():
    return {n: run_estimation_study(StudyConfig(replicas=1000, n=n)) for n in (250, 500, 1000)}


def test_sine_covariate_phase():
    assert sine_covariate(6) == 0.0
    assert sine_covariate(9) == pytest.approx(1.0)
    assert np.allclose(sine_covariate(np.arange(1, 13)), sine_covariate(np.arange(13, 25)))


def test_seed_schedule_and_config_validation():
    cfg = StudyConfig(replicas=3, base_seed=40)
    assert [cfg.seed(i) for i in range(3)] == [40, 41, 42]
    with pytest.raises(ValueError):
        StudyConfig(replicas=0)


def test_identical_seed_identical_summary():
    cfg = StudyConfig(replicas=5, n=300)
    a, b = run_estimation_study(cfg), run_estimation_study(cfg)
    assert np.array_equal(a.estimates, b.estimates) and np.array_equal(a.se, b.se)


def test_parallel_matches_serial():
    cfg = StudyConfig(replicas=6, n=300)
    from dataclasses import replace
    a = run_estimation_study(cfg)
    b = run_estimation_study(replace(cfg, jobs=2))
    assert np.array_equal(a.estimates, b.estimates)


def test_intercept_only_study():
    s = run_estimation_study(StudyConfig(replicas=100, n=500, phi=(), theta=(), alpha=0.3))
    assert s.names == ["alpha", "lambda"]
    sd = s.sd[0]
    assert abs(s.mean[0] - 0.3) < 3 * sd / np.sqrt(100)


def test_failures_are_counted_not_dropped(monkeypatch):
    import uwarma.montecarlo as mc
    from dataclasses import replace
    real = mc.fit_pmle
    calls = []

    def flaky(spec, data, options=None):
        calls.append(1)
        if len(calls) == 2:
            raise FloatingPointError("boom")
        fit = real(spec, data, options)
        return replace(fit, converged=False) if len(calls) == 3 else fit

    monkeypatch.setattr(mc, "fit_pmle", flaky)
    s = run_estimation_study(StudyConfig(replicas=4, n=300))
    assert s.failures == 2 and s.ok.shape[0] == 2
    assert "boom" in s.errors[1] and s.errors[2] == "did not converge"
    assert s.seeds[1] == 1
    assert np.allclose(s.mean, s.estimates[[0, 3]].mean(axis=0))


def test_sd_shrinks_like_root_n(by_n):
    for small, big in ((250, 500), (500, 1000)):
        ratio = by_n[big].sd[1:] / by_n[small].sd[1:]
        assert np.all((ratio >= 0.6) & (ratio <= 0.85)), ratio


def test_bias_shrinks_with_n(by_n):
    bias = {n: np.abs(s.bias) for n, s in by_n.items()}
    # phi and lambda carry a detectable small-sample bias
    for j in (1, 3):
        assert bias[250][j] > bias[500][j] > bias[1000][j]
    # theta's bias is below Monte Carlo resolution at every n
    for n, s in by_n.items():
        assert bias[n][2] < 3 * s.sd[2] / np.sqrt(1000)


def test_standardized_central_mass(by_n):
    z = by_n[1000].standardized()
    mass = np.mean(np.abs(z) <= 1.959963984540054, axis=0)
    assert np.all((mass >= 0.92) & (mass <= 0.98)), mass


def test_sampling_variance_matches_inverse_information(by_n):
    s = by_n[1000]
    ratio = s.sd**2 / np.mean(s.se[s.converged] ** 2, axis=0)
    assert np.all(np.abs(ratio - 1) <= 0.15), ratio


def test_forecast_study_shapes_and_rho_effect():
    low = run_forecast_study(forecast_design(replicas=30, rho=0.5))
    high = run_forecast_study(forecast_design(replicas=30, rho=0.75))
    m_low, m_high = low.mape(), high.mape()
    assert list(m_low) == [1, 6, 12, 18, 24]
    assert low.ape.shape == (30, 24)
    assert m_high[1] > m_low[1]


def test_large_lambda_forecast_study_is_sharp():
    s = run_forecast_study(forecast_design(replicas=10, lam=200.0, horizons=(1,)))
    assert s.mape()[1] < 0.01
