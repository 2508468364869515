from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from radonet.app.constants.graph_types import Colour
from radonet.app.core.exceptions import EmptySampleError, ParameterDomainError
from radonet.app.core.schemas import ExperimentConfig
from radonet.app.models.growing_graph import new_seed
from radonet.app.services.business import martingale_lab as lab
from radonet.app.services.business import process_engine


@pytest.fixture
def trajectory(rng):
    config = ExperimentConfig(horizon=500, tracked_vertices=[0, 2, 10])
    return process_engine.run(config, rng)


def test_track_x_black_and_white(trajectory):
    black = lab.track_x(trajectory, 0)
    white = lab.track_x(trajectory, 0, Colour.WHITE)
    assert black.ts[0] == 2 and black.ts[-1] == 500
    assert black.values[0] == 0.5
    assert np.all((black.values >= 0) & (black.values <= 1))
    assert np.allclose(black.values + white.values, 1.0)

    late = lab.track_x(trajectory, 10)
    assert late.ts[0] == 10


def test_track_y_colours_sum_to_half(trajectory):
    black = lab.track_y(trajectory)
    white = lab.track_y(trajectory, "white")
    assert black.values[0] == pytest.approx(2 / 6)
    assert np.allclose(black.values + white.values, 0.5)


def test_oracle_identities_hold_at_lambda_one(p3, c4):
    for g in (p3, c4):
        results = lab.oracle_identities(g)
        assert results and all(results.values()), results
    keys = lab.oracle_identities(p3).keys()
    assert "x_martingale[black,u=0]" in keys
    assert "x_second_moment[white,u=2]" in keys
    assert "y_martingale[white]" in keys
    assert "x_martingale[black,u=1]" not in keys


def test_oracle_identities_hold_for_rational_lambda(p3, c4):
    for g in (p3, c4):
        results = lab.oracle_identities(g, "1/2")
        assert all(results.values()), results
        assert not any(k.startswith("y_") for k in results)
    assert "lambda_x_martingale[u=2]" in lab.oracle_identities(p3, Fraction(1, 3))
    assert "lambda_x_martingale[u=0]" not in lab.oracle_identities(p3, Fraction(1, 3))


def test_oracle_identities_on_irregular_seed():
    g = new_seed([(0, 1), (0, 2), (1, 3), (0, 4), (3, 4)], 5)
    assert all(lab.oracle_identities(g).values())
    assert all(lab.oracle_identities(g, "3/4").values())


def test_lambda_normalized_x():
    values = lab.lambda_normalized_x([5, 6, 7], u=5, lam=1)
    assert values == pytest.approx([1.0, 1.0, 1.0])
    half = lab.lambda_normalized_x([2, 2, 2], u=2, lam=0.5)
    assert half == pytest.approx([1.0, 1.0 / 1.25, 1.0 / (1.25 * 7 / 6)])
    seeded = lab.lambda_normalized_x([3, 4], u=1, lam=1, t_start=3)
    assert seeded == pytest.approx([1.0, 1.0])
    with pytest.raises(ParameterDomainError):
        lab.lambda_normalized_x([1, 2], u=0, lam=1)
    with pytest.raises(ParameterDomainError):
        lab.lambda_normalized_x([1, 2], u=3, lam=1, t_start=2)


def test_lambda_normalizer_exact():
    assert lab.lambda_normalizer_exact(2, 4, Fraction(1, 2)) == Fraction(35, 12)
    assert lab.lambda_normalizer_exact(3, 9, 1) == 9
    with pytest.raises(ParameterDomainError):
        lab.lambda_normalizer_exact(0, 4, 1)


def test_halving_times():
    assert lab.halving_times([1, 0.6, 0.4, 0.3, 0.19, 0.5]) == [0, 2, 4]
    assert lab.halving_times([0.2, 0.2, 0.2]) == [0]
    assert lab.halving_times([1, 0.6, 0.4], start_index=1) == [1]
    with pytest.raises(EmptySampleError):
        lab.halving_times([])


def test_estimate_limit_and_increments():
    assert lab.estimate_limit([1, 2, 3, 4], 2) == (4.0, 1.0)
    with pytest.raises(ParameterDomainError):
        lab.estimate_limit([1, 2], 3)
    assert lab.increment_square_sum([0, 1, 3]) == 5.0
    assert lab.l2_bound(2, 4) == pytest.approx(1 / 4 + 1 / 9)


def test_increment_squares_stay_below_l2_bound(trajectory):
    series = lab.track_x(trajectory, 0)
    assert lab.increment_square_sum(series.values) <= lab.l2_bound(2, 500)


def test_bound_params():
    x = lab.x_bound_params(32)
    assert (x.alpha, x.A, x.beta) == (16.0, 1.0, 0.5)
    assert x.applies
    y = lab.y_bound_params(8.0, 32)
    assert y.A == 0.5 and y.beta == 0.5
    assert not lab.MartingaleBoundParams(alpha=4.0, A=1.0, t1=10).applies
    with pytest.raises(ValidationError):
        lab.x_bound_params(3)


def test_halving_profile():
    rows = lab.halving_profile([0, 1, 1, 2, 0, 0, 0, 0], beta=0.5, i_max=2)
    assert [r.i for r in rows] == [1, 2]
    assert rows[0].empirical_fraction == pytest.approx(3 / 8)
    assert rows[1].empirical_fraction == pytest.approx(1 / 8)
    assert all(r.passed for r in rows)
    failing = lab.halving_profile([5] * 100, beta=0.5, i_max=3)
    assert not any(r.passed for r in failing)
