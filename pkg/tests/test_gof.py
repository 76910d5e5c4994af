import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavytail import gof
from heavytail.distributions import DistributionSpec, quantile, sample
from heavytail.errors import ConfigError, DomainError
from heavytail.gof import DEFAULT_REPLICATES, RefitMode, bootstrap_test, ks_statistic
from heavytail.tailfit import Method, TailFit, TailSelection, fit_power_mle, fit_power_regression, select_tail

UNIT_PARETO = DistributionSpec.pareto(1.0, 1.0)


def tail_of(values, cutoff=1.0):
    values = np.sort(np.asarray(values, dtype=float))
    return TailSelection(cutoff=cutoff, n_total=values.size, values=values)


def true_fit(alpha, n, cutoff=1.0):
    return TailFit("pareto", Method.MLE, alpha, cutoff, alpha / np.sqrt(n), n)


def ks_by_enumeration(cdf_values):
    """Both sup branches of the empirical step function, written out with a loop."""
    n = len(cdf_values)
    d = 0.0
    for i, g in enumerate(sorted(cdf_values), start=1):
        d = max(d, abs(i / n - g), abs((i - 1) / n - g))
    return d


def test_single_observation():
    # G(2) = 1 - 2**-1 = 0.5
    assert ks_statistic(tail_of([2.0]), UNIT_PARETO) == 0.5


def test_observations_at_mid_quantiles():
    n = 10
    x = [quantile(UNIT_PARETO, 1 - (i - 0.5) / n) for i in range(1, n + 1)]
    expected = ks_by_enumeration([(i - 0.5) / n for i in range(1, n + 1)])
    assert expected == pytest.approx(0.05, abs=1e-15)
    assert ks_statistic(tail_of(x), UNIT_PARETO) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(min_value=1.0, max_value=1e6), min_size=1, max_size=40))
def test_ks_matches_enumeration_and_is_positive(values):
    d = ks_statistic(tail_of(values), UNIT_PARETO)
    assert d == pytest.approx(ks_by_enumeration([1 - 1 / v for v in values]), abs=1e-12)
    assert 0 < d <= 1


def test_ks_requires_matching_cutoff():
    with pytest.raises(DomainError):
        ks_statistic(tail_of([2.0, 3.0], cutoff=1.5), UNIT_PARETO)


def test_too_few_replicates():
    tail = tail_of(np.linspace(1, 5, 20))
    with pytest.raises(ConfigError):
        bootstrap_test(tail, true_fit(1.0, 20), n_replicates=99)


def test_default_replicates():
    assert DEFAULT_REPLICATES == 10_000


def test_zero_observed_distance_gives_unit_p_value(monkeypatch):
    monkeypatch.setattr(gof, "ks_statistic", lambda tail, spec: 0.0)
    report = bootstrap_test(tail_of(np.linspace(1, 5, 20)), true_fit(1.0, 20), n_replicates=100, seed=1)
    assert report.p_value == 1.0


@pytest.fixture(scope="module")
def pareto_tail():
    return select_tail(sample(DistributionSpec.pareto(1.236, 1.0), 2000, 77), 1.0)


def test_self_consistent_tail_is_not_rejected(pareto_tail):
    report = bootstrap_test(pareto_tail, fit_power_mle(pareto_tail), n_replicates=10_000, seed=3)
    assert report.p_value > 0.05
    assert report.refit_mode is RefitMode.FIXED


def test_report_invariants(pareto_tail):
    fit = fit_power_regression(pareto_tail)
    report = bootstrap_test(pareto_tail, fit, n_replicates=1234, seed=8)
    count = np.count_nonzero(report.replicate_ks >= report.observed_ks)
    assert report.p_value == count / 1234
    assert (report.p_value * report.n_replicates).is_integer()
    assert report.critical_values[0.05] == np.percentile(report.replicate_ks, 95)
    levels = sorted(report.critical_values)
    assert all(report.critical_values[a] >= report.critical_values[b] for a, b in zip(levels, levels[1:]))
    assert report.replicate_ks.size == 1234


@pytest.mark.parametrize("mode", list(RefitMode))
def test_worker_count_does_not_change_report(pareto_tail, mode):
    fit = fit_power_mle(pareto_tail)
    one = bootstrap_test(pareto_tail, fit, n_replicates=1000, seed=5, refit_mode=mode, workers=1)
    many = bootstrap_test(pareto_tail, fit, n_replicates=1000, seed=5, refit_mode=mode, workers=8)
    assert one == many
    assert one.replicate_ks.tobytes() == many.replicate_ks.tobytes()


def test_replicates_depend_only_on_seed_and_index(pareto_tail):
    fit = fit_power_mle(pareto_tail)
    short = bootstrap_test(pareto_tail, fit, n_replicates=300, seed=5)
    long = bootstrap_test(pareto_tail, fit, n_replicates=600, seed=5)
    assert np.array_equal(long.replicate_ks[:300], short.replicate_ks)
    assert not np.array_equal(bootstrap_test(pareto_tail, fit, 300, seed=6).replicate_ks, short.replicate_ks)


def test_exponential_fit_is_supported():
    spec = DistributionSpec.exponential(0.5, 2.0)
    tail = select_tail(sample(spec, 500, 1), 2.0)
    fit = TailFit("exponential", Method.MLE, 0.5, 2.0, 0.02, 500)
    for mode in RefitMode:
        report = bootstrap_test(tail, fit, n_replicates=500, seed=2, refit_mode=mode)
        assert 0 <= report.p_value <= 1


def rejection_rate(n_datasets, n, n_replicates, fit_for, mode="fixed"):
    spec = DistributionSpec.pareto(1.236, 1.0)
    rejected = 0
    for d in range(n_datasets):
        tail = select_tail(sample(spec, n, 50_000 + d), 1.0)
        report = bootstrap_test(tail, fit_for(tail), n_replicates=n_replicates, seed=d, refit_mode=mode)
        rejected += report.p_value < 0.05
    return rejected / n_datasets


@pytest.mark.slow
def test_fixed_mode_is_calibrated_under_the_null():
    rate = rejection_rate(500, 200, 1000, lambda tail: true_fit(1.236, tail.n_tail))
    assert 0.02 <= rate <= 0.09


@pytest.mark.slow
def test_refit_mode_is_calibrated_with_estimated_exponent():
    rate = rejection_rate(300, 200, 1000, fit_power_mle, mode="refit")
    assert 0.02 <= rate <= 0.09


def test_fixed_mode_with_estimated_exponent_is_conservative():
    rate = rejection_rate(100, 200, 500, fit_power_mle)
    assert rate <= 0.05
