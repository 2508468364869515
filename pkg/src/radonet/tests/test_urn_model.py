from fractions import Fraction

import mpmath
import numpy as np
import pytest
from pydantic import ValidationError

from radonet.app.core.exceptions import ParameterDomainError
from radonet.app.services.business.urn_model import (
    BetaParams,
    UrnState,
    beta_cdf,
    expected_next_fraction,
    no_new_ball_probability,
    regularized_incomplete_beta,
    urn_from_vertex,
    urn_run,
)
from radonet.app.utils.rng import make_rng
from radonet.app.utils.stats import ks_test


def test_urn_from_vertex(p3, c4):
    assert urn_from_vertex(p3, 0) == UrnState(black=1, white=1)
    assert urn_from_vertex(p3, 1) == UrnState(black=2, white=0)
    assert urn_from_vertex(c4, 3) == UrnState(black=2, white=1)
    assert urn_from_vertex(p3, 1).absorbing


def test_fraction_is_a_martingale():
    assert expected_next_fraction(UrnState(black=2, white=1)) == Fraction(2, 3)
    assert expected_next_fraction(UrnState(black=7, white=13)) == Fraction(7, 20)


def test_urn_run_path(rng):
    path = np.empty(500, dtype=np.int64)
    final = urn_run(UrnState(black=1, white=1), 502, rng, path=path)
    assert final.t == 502
    assert path[-1] == final.black
    steps = np.diff(np.concatenate([[1], path]))
    assert set(np.unique(steps).tolist()) <= {0, 1}


def test_urn_run_is_reproducible():
    a = urn_run(UrnState(black=3, white=5), 5000, make_rng(11, 3))
    b = urn_run(UrnState(black=3, white=5), 5000, make_rng(11, 3))
    assert a == b


def test_absorbing_urn_never_changes(rng):
    assert urn_run(UrnState(black=0, white=4), 1000, rng) == UrnState(black=0, white=1000)
    assert urn_run(UrnState(black=4, white=0), 1000, rng) == UrnState(black=1000, white=0)


def test_urn_run_domain(rng):
    with pytest.raises(ParameterDomainError):
        urn_run(UrnState(black=1, white=1), 1, rng)
    with pytest.raises(ParameterDomainError):
        urn_run(UrnState(black=0, white=0), 10, rng)


def test_no_new_ball_probability_matches_product():
    assert no_new_ball_probability(1, 2, 10) == Fraction(1, 9)
    direct = Fraction(1)
    for t in range(5, 20):
        direct *= 1 - Fraction(2, t)
    assert no_new_ball_probability(2, 5, 20) == direct
    assert no_new_ball_probability(0, 5, 1000) == 1
    values = [no_new_ball_probability(3, 8, h) for h in (10, 100, 1000, 10_000)]
    assert all(b < a for a, b in zip(values, values[1:]))
    with pytest.raises(ParameterDomainError):
        no_new_ball_probability(3, 2, 10)


@pytest.mark.parametrize("a,b,x", [
    (1, 1, 0.3), (2, 1, 0.5), (0.5, 0.5, 0.1), (16, 16, 0.3), (16, 16, 0.62),
    (5, 2, 0.9), (2.5, 40, 0.05), (100, 3, 0.97),
])
def test_incomplete_beta_matches_mpmath(a, b, x):
    expected = float(mpmath.betainc(a, b, 0, x, regularized=True))
    assert regularized_incomplete_beta(a, b, x) == pytest.approx(expected, abs=1e-10)


def test_incomplete_beta_closed_forms():
    for x in (0.0, 0.2, 0.5, 0.9, 1.0):
        assert regularized_incomplete_beta(1, 1, x) == pytest.approx(x, abs=1e-12)
        assert regularized_incomplete_beta(2, 1, x) == pytest.approx(x * x, abs=1e-12)
    assert beta_cdf(2, 1)(1.7) == 1.0
    assert beta_cdf(2, 1)(-0.5) == 0.0


def test_incomplete_beta_domain():
    with pytest.raises(ParameterDomainError):
        regularized_incomplete_beta(0, 1, 0.5)
    with pytest.raises(ParameterDomainError):
        regularized_incomplete_beta(1, 1, 1.5)


@pytest.mark.parametrize("a,b", [(1, 1), (0.5, 3), (2, 7.5), (16, 16), (40, 1.5)])
def test_incomplete_beta_reflection(a, b):
    for x in np.linspace(0.0, 1.0, 21):
        total = regularized_incomplete_beta(a, b, x) + regularized_incomplete_beta(b, a, 1.0 - x)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_beta_params():
    params = BetaParams.from_urn(UrnState(black=16, white=16))
    assert params.t0 == 32 and params.mean == 0.5
    with pytest.raises(ValidationError):
        BetaParams(a=1, b=2, t0=4)
    with pytest.raises(ParameterDomainError):
        BetaParams.from_urn(UrnState(black=0, white=3))


def test_urn_limit_is_uniform_from_one_one():
    fractions = [urn_run(UrnState(black=1, white=1), 2000, make_rng(99, i)).fraction for i in range(1000)]
    _, p = ks_test(fractions, BetaParams(a=1, b=1).cdf())
    assert p >= 0.001
    _, p_wrong = ks_test(fractions, BetaParams(a=2, b=1).cdf())
    assert p_wrong < 0.001
