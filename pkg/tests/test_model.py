import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privexp.errors import GenericityViolation
from privexp.model import (
    ModelParams,
    after_failure,
    after_failures,
    before_failure,
    cutoff_set,
    disclosure_cutoff,
    dominance_cutoff,
    encouragement_cutoff,
    experiment_counts,
    joint_reveal_cutoff,
    likelihood_ratio,
    myopic_cutoff,
    planner_cutoff,
    stopping_cutoff,
)
from scipy.optimize import brentq

from conftest import DEFAULT, model_params, random_points

beliefs = st.floats(0.0, 1.0)


@pytest.mark.parametrize("bad", [
    dict(success_rate=0.0), dict(success_rate=1.0), dict(discount=1.0), dict(prior=0.0),
    dict(cost=0.0), dict(prize=-1.0), dict(prize=4.0),
])
def test_params_reject_boundaries(bad):
    fields = dict(success_rate=0.2, discount=0.9, cost=1.0, prize=10.0, prior=0.6, **{})
    fields.update(bad)
    with pytest.raises(ValueError):
        ModelParams(**fields)


def test_params_from_string():
    assert ModelParams.from_string("0.2, 0.9,1,10,0.6") == DEFAULT
    with pytest.raises(ValueError):
        ModelParams.from_string("0.2,0.9,1,10")


def test_after_failure_fixed_points_and_value():
    assert after_failure(1.0, DEFAULT) == 1.0
    assert after_failure(0.0, DEFAULT) == 0.0
    assert after_failure(0.5, DEFAULT) == pytest.approx(0.4 / 0.9, abs=1e-15)


def test_after_failures_examples():
    assert after_failures(0.37, 0, DEFAULT) == 0.37
    lr = 1.5 * 0.8 ** 7
    assert after_failures(0.6, 7, DEFAULT) == pytest.approx(lr / (1 + lr), abs=1e-15)
    assert after_failures(0.6, 7, DEFAULT) == pytest.approx(0.23930, abs=1e-5)
    assert after_failures(1.0, 50, DEFAULT) == 1.0


def test_before_failure_examples():
    assert before_failure(0.0, DEFAULT) == 0.0
    assert before_failure(0.4 / 0.9, DEFAULT) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        before_failure(1.0, DEFAULT)
    assert before_failure(1.0, DEFAULT, allow_fixed_point=True) == 1.0


@given(st.floats(0.0, 1.0, exclude_max=True), model_params())
def test_before_failure_round_trip(p, params):
    assert before_failure(after_failure(p, params), params) == pytest.approx(p, abs=1e-12)


@given(st.floats(0.001, 0.999), st.integers(0, 200), model_params())
def test_ladder_matches_repeated_updates(p, n, params):
    q = p
    for _ in range(n):
        q = after_failure(q, params)
    assert after_failures(p, n, params) == pytest.approx(q, abs=1e-12)


def test_cutoff_values_at_default():
    assert stopping_cutoff(DEFAULT) == pytest.approx(5 / 19, abs=1e-12)
    assert stopping_cutoff(DEFAULT) == pytest.approx(0.263158, abs=1e-6)
    assert planner_cutoff(DEFAULT) == pytest.approx(0.17552, abs=1e-5)
    assert stopping_cutoff(DEFAULT) < myopic_cutoff(DEFAULT) == 0.5
    assert encouragement_cutoff(DEFAULT) == pytest.approx(0.19623, abs=1e-5)


def test_dominance_cutoff_matches_bisection():
    lam, d, c, m, g = 0.2, 0.9, 1.0, 10.0, 1.0
    root = brentq(lambda p: (1 - d) * (p * lam * m - c) + d * p * g, 0, 1, xtol=1e-15)
    assert dominance_cutoff(DEFAULT) == pytest.approx(root, abs=1e-12)
    assert dominance_cutoff(DEFAULT) == pytest.approx(0.090909, abs=1e-6)


def test_dominance_cutoff_patient_limit():
    params = ModelParams(0.2, 0.999, 1.0, 10.0, 0.5)
    assert dominance_cutoff(params) == pytest.approx(params.cost * 0.001 / params.gain, rel=1e-2)


def test_encouragement_cutoff_matches_bisection():
    lam, d, c, m, g = 0.2, 0.9, 1.0, 10.0, 1.0
    trade = lambda p: (1 - d) * (p * lam * m - c) + d * p * g * (lam + d * (1 - lam) * lam)  # noqa: E731
    assert encouragement_cutoff(DEFAULT) == pytest.approx(brentq(trade, 0, 1, xtol=1e-15), abs=1e-12)


@given(model_params())
def test_zero_index_cutoffs(params):
    assert encouragement_cutoff(params, 0) == encouragement_cutoff(params)
    assert disclosure_cutoff(params, 0) == pytest.approx(stopping_cutoff(params), rel=1e-14)


@given(model_params())
def test_ordering_suite(params):
    p_star, p_hat, p_tilde = stopping_cutoff(params), encouragement_cutoff(params), dominance_cutoff(params)
    social = planner_cutoff(params)
    assert p_tilde < p_hat < p_star
    assert after_failures(p_hat, 2, params) < social < p_hat
    assert social < p_star
    bar = joint_reveal_cutoff(params)
    assert social <= bar < p_hat
    assert before_failure(social, params) >= bar
    hats = [encouragement_cutoff(params, n) for n in range(52)]
    stars = [disclosure_cutoff(params, n) for n in range(52)]
    # strict where (1 - lambda)^n is still resolvable in double precision
    resolvable = [n for n in range(51) if (1 - params.success_rate) ** n > 1e-10]
    assert all(hats[n] < hats[n + 1] and stars[n] < stars[n + 1] for n in resolvable)
    assert all(a <= b for a, b in zip(hats, hats[1:]))
    assert all(a <= b for a, b in zip(stars, stars[1:]))
    assert all(after_failure(stars[n + 1], params) < stars[n] for n in range(51))


def test_encouragement_eventually_above_disclosure():
    assert encouragement_cutoff(DEFAULT, 0) < disclosure_cutoff(DEFAULT, 0)
    n0 = next(n for n in range(1, 500) if encouragement_cutoff(DEFAULT, n) > disclosure_cutoff(DEFAULT, n))
    assert all(encouragement_cutoff(DEFAULT, n) > disclosure_cutoff(DEFAULT, n) for n in range(n0, 500))


def test_limits_of_indexed_cutoffs():
    assert disclosure_cutoff(DEFAULT, 200) == pytest.approx(myopic_cutoff(DEFAULT), abs=1e-6)
    assert disclosure_cutoff(DEFAULT, 10**7) == myopic_cutoff(DEFAULT)
    lam, d = 0.2, 0.9
    limit = (1 - d) / ((1 - d) + (1 - d) * (1 - d + lam * d))
    assert encouragement_cutoff(DEFAULT, 10**7) == pytest.approx(limit, abs=1e-15)


def test_counts_at_default():
    counts, generic = experiment_counts(DEFAULT)
    assert generic
    assert counts == {"N_star": 7, "N_star_social": 9, "N_tilde": 13, "N_hat": 9}
    # exact threshold: 1.5 * 0.8**n < 5/14
    n = next(n for n in range(100) if Fraction(3, 2) * Fraction(4, 5) ** n < Fraction(5, 14))
    assert n == 7


def test_counts_below_cutoff_and_hat_floor():
    counts, _ = experiment_counts(DEFAULT.with_prior(0.1))
    assert counts["N_star"] == 0
    assert counts["N_hat"] == 1


def test_genericity_flag_warns():
    lr = likelihood_ratio(stopping_cutoff(DEFAULT)) / 0.8 ** 3
    with pytest.warns(GenericityViolation):
        _, generic = experiment_counts(DEFAULT.with_prior(lr / (1 + lr)))
    assert not generic


def test_exact_rational_mode():
    params = ModelParams(Fraction(1, 5), Fraction(9, 10), Fraction(1), Fraction(10), Fraction(3, 5))
    assert params.exact
    assert stopping_cutoff(params) == Fraction(5, 19)
    assert after_failures(params.prior, 7, params) < stopping_cutoff(params) < after_failures(params.prior, 6, params)


def test_count_sandwich_grid(quiet):
    bad = []
    for params in random_points(1000, 7):
        if params.prior < planner_cutoff(params):
            continue
        counts, _ = experiment_counts(params)
        if not counts["N_star_social"] - 2 <= counts["N_hat"] <= counts["N_star_social"]:
            bad.append(params)
    assert bad == []


def test_cutoff_set_fields():
    cuts = cutoff_set(DEFAULT, 5)
    assert len(cuts.p_hat_n) == 6 and cuts.p_hat_n[0] == cuts.p_hat
    assert all(cuts.orderings(DEFAULT).values())
    assert set(cuts.to_dict()) >= {"p_star", "p_bar", "N_hat", "p_star_n"}
