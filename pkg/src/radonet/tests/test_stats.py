import numpy as np
import pytest

from radonet.app.core.exceptions import EmptySampleError, ParameterDomainError
from radonet.app.utils import stats
from radonet.app.utils.rng import make_rng


def test_ecdf():
    sample = stats.ecdf([3.0, 1.0, 2.0, 2.0])
    assert sample.values.tolist() == [1.0, 2.0, 2.0, 3.0]
    assert sample(0.5) == 0.0
    assert sample(2.0) == 0.75
    assert sample(10) == 1.0
    with pytest.raises(EmptySampleError):
        stats.ecdf([])


def test_ks_statistic_single_point():
    assert stats.ks_statistic(stats.ecdf([0.5]), lambda x: x) == pytest.approx(0.5)
    assert stats.ks_statistic([0.25, 0.75], lambda x: x) == pytest.approx(0.25)


def test_kolmogorov_sf_reference_values():
    assert stats.kolmogorov_sf(1.3581) == pytest.approx(0.05, abs=1e-4)
    assert stats.kolmogorov_sf(1.0) == pytest.approx(0.2700, abs=1e-4)
    assert stats.kolmogorov_sf(0.5) == pytest.approx(0.9639, abs=1e-4)
    assert stats.kolmogorov_sf(0.0) == 1.0
    assert stats.kolmogorov_sf(5.0) < 1e-20


def test_kolmogorov_sf_is_continuous_between_series():
    below = stats.kolmogorov_sf(1.18 - 1e-9)
    above = stats.kolmogorov_sf(1.18)
    assert below == pytest.approx(above, abs=1e-8)
    grid = np.linspace(0.2, 3.0, 200)
    values = [stats.kolmogorov_sf(x) for x in grid]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_ks_p_value_domain():
    with pytest.raises(ParameterDomainError):
        stats.ks_p_value(0.2, 0)
    with pytest.raises(ParameterDomainError):
        stats.ks_p_value(1.2, 10)


@pytest.mark.parametrize("n", [1, 50, 4000])
def test_ks_p_value_does_not_increase_with_distance(n):
    values = [stats.ks_p_value(d, n) for d in np.linspace(0.0, 1.0, 101)]
    assert values[0] == 1.0
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_ks_statistic_is_invariant_under_monotone_transform():
    rng = make_rng(7)
    x = rng.random(500)
    d = stats.ks_statistic(stats.ecdf(x), lambda v: min(1.0, max(0.0, v)))
    # y = exp(3x) 与其分布函数 F(y) = ln(y)/3 一起变换
    d_exp = stats.ks_statistic(stats.ecdf(np.exp(3.0 * x)), lambda v: min(1.0, max(0.0, np.log(v) / 3.0)))
    assert d_exp == pytest.approx(d, abs=1e-12)

    a, b = rng.random(400), rng.random(300) ** 1.5
    d_two, _ = stats.ks_two_sample(a, b)
    d_two_cubed, _ = stats.ks_two_sample(a ** 3 - 2.0, b ** 3 - 2.0)
    assert d_two_cubed == d_two


def test_ks_test_accepts_uniform_and_rejects_shifted():
    rng = make_rng(5)
    uniform = rng.random(2000)
    _, p = stats.ks_test(uniform, lambda x: min(1.0, max(0.0, x)))
    assert p > 0.001
    _, p_shifted = stats.ks_test(uniform ** 2, lambda x: min(1.0, max(0.0, x)))
    assert p_shifted < 1e-6


def test_ks_two_sample():
    rng = make_rng(6)
    a, b = rng.random(1500), rng.random(1500)
    d, p = stats.ks_two_sample(a, b)
    assert 0.0 < d < 0.1
    assert p > 0.001
    _, p_diff = stats.ks_two_sample(a, b + 0.2)
    assert p_diff < 1e-6
    d_same, p_same = stats.ks_two_sample([1, 2, 3], [1, 2, 3])
    assert d_same == 0.0 and p_same == 1.0
    with pytest.raises(EmptySampleError):
        stats.ks_two_sample([], [1.0])


@pytest.mark.parametrize("x,dof", [(3.8415, 1), (5.9915, 2), (9.4877, 4), (18.307, 10)])
def test_chi2_sf_critical_values(x, dof):
    assert stats.chi2_sf(x, dof) == pytest.approx(0.05, abs=2e-4)


def test_chi2_sf_edges():
    assert stats.chi2_sf(0.0, 3) == 1.0
    assert stats.chi2_sf(2.0, 2) == pytest.approx(np.exp(-1.0))
    with pytest.raises(ParameterDomainError):
        stats.chi2_sf(1.0, 0)


def test_chi2_goodness_of_fit_pools_small_cells():
    stat, dof, p = stats.chi2_goodness_of_fit([50, 50, 1, 2], [50, 50, 2, 1])
    assert dof == 2
    assert stat == pytest.approx(0.0)
    assert p == pytest.approx(1.0)
    _, _, p_bad = stats.chi2_goodness_of_fit([90, 10], [50, 50])
    assert p_bad < 1e-6
    assert stats.chi2_goodness_of_fit([10], [10]) == (0.0, 0, 1.0)


def test_chi2_independence_2x2():
    stat, p = stats.chi2_independence_2x2(np.array([[25, 25], [25, 25]]))
    assert stat == 0.0 and p == 1.0
    stat, p = stats.chi2_independence_2x2(np.array([[40, 10], [10, 40]]))
    assert stat == pytest.approx(36.0)
    assert p < 1e-6
    assert stats.chi2_independence_2x2(np.array([[5, 0], [5, 0]])) == (0.0, 1.0)
    with pytest.raises(EmptySampleError):
        stats.chi2_independence_2x2(np.zeros((2, 2)))


def test_margins():
    assert stats.binomial_margin(0.5, 100) == pytest.approx(0.15)
    assert stats.binomial_margin(0.0, 100) == 0.0
    assert stats.poisson_margin(4) == pytest.approx(6.0)
    with pytest.raises(EmptySampleError):
        stats.binomial_margin(0.5, 0)


def test_wilson_interval():
    low, high = stats.wilson_interval(50, 100)
    assert low == pytest.approx(0.4038, abs=1e-4)
    assert high == pytest.approx(0.5962, abs=1e-4)
    low, high = stats.wilson_interval(0, 20)
    assert low == pytest.approx(0.0, abs=1e-12) and 0.0 < high < 0.2
    assert stats.wilson_interval(20, 20)[1] == pytest.approx(1.0, abs=1e-12)


def test_tail_check():
    t0 = 32
    # 阈值 2^{-i}·8/32: 0.125, 0.0625, 0.03125
    estimates = [0.01] * 5 + [0.1] * 10 + [0.5] * 85
    report = stats.tail_check(estimates, t0)
    assert [r.threshold for r in report.rows] == pytest.approx([0.125, 0.0625, 0.03125])
    assert [r.empirical_fraction for r in report.rows] == pytest.approx([0.15, 0.05, 0.05])
    assert report.passed
    failing = stats.tail_check([0.001] * 100, t0)
    assert not failing.passed


def test_hoeffding_check():
    report = stats.hoeffding_check(np.array([3, 4, 5]), np.array([0, 2, 0]), np.array([2, 4, 4]), xi=0.1)
    assert report.eligible_steps == 3
    assert report.violations == 2
    assert report.last_violation_t == 5
    assert report.last_zero_birth_t == 5
    assert report.bound_sum == pytest.approx(sum(np.exp(-0.01 * t) for t in (2, 3, 4)))
    # ξ=0.3 时阈值为 1.2, 2.7, 4.8, 加入前的边数为 2, 2, 4, 只有 t=2 一步满足且新顶点孤立
    strict = stats.hoeffding_check(np.array([3, 4, 5]), np.array([0, 2, 0]), np.array([2, 4, 4]), xi=0.3)
    assert strict.eligible_steps == 1 and strict.violations == 1
    assert strict.last_violation_t == 3
    none = stats.hoeffding_check(np.array([3, 4, 5]), np.array([0, 2, 0]), np.array([2, 4, 4]), xi=0.6)
    assert none.eligible_steps == 0 and none.bound_sum == 0.0
    with pytest.raises(ParameterDomainError):
        stats.hoeffding_check(np.array([3]), np.array([0]), np.array([2]), xi=0.0)


def test_hoeffding_aggregate():
    reports = [
        stats.hoeffding_check(np.array([3, 4, 5]), np.array([0, 2, 0]), np.array([2, 4, 4]), xi=0.1),
        stats.hoeffding_check(np.array([3, 4]), np.array([1, 2]), np.array([3, 5]), xi=0.1),
    ]
    total, limit, passed = stats.hoeffding_aggregate(reports)
    assert total == 2
    assert passed == (total <= limit)


def test_loglog_slope():
    ts = np.arange(1, 1001, dtype=float)
    assert stats.loglog_slope(ts, np.sqrt(ts)) == pytest.approx(0.5)
    assert stats.loglog_slope(ts, 3 * ts, t_min=100) == pytest.approx(1.0)
    with pytest.raises(ParameterDomainError):
        stats.loglog_slope([1, 2], [0, 1])
    with pytest.raises(ParameterDomainError):
        stats.loglog_slope([5], [1])


def test_geometric_grid():
    grid = stats.geometric_grid(10, 10_000, 4)
    assert grid.tolist() == [10, 100, 1000, 10_000]
    assert stats.geometric_grid(5, 5).tolist() == [5]
    assert np.all(np.diff(stats.geometric_grid(3, 50, 60)) > 0)

