import math
import random

import pytest

from privexp.beliefs import BeliefEngine, BeliefSystem, appendix_b_beliefs, reasonable_beliefs
from privexp.errors import HorizonExceeded
from privexp.histories import EMPTY, RISKY, SAFE, History, all_histories
from privexp.model import after_failures
from privexp.profiles import (
    TableProfile,
    make_example_622,
    make_mixed_example,
    make_sigma_n,
    make_threshold_phat,
)

from conftest import DEFAULT, MIXED, P622


def brute_posterior(profile, h, i):
    """(p, q) of never-successful player i at h, summing over the opponent's private success time.

    Player i's own moves contribute factors common to every branch, so only the
    opponent's moves and i's failures enter.
    """
    params = profile.params
    lam, p0 = params.success_rate, params.prior
    j = 1 - i
    moves = [(k, History.of(h.actions[:k]), a) for k, a in enumerate(h.actions) if k % 2 == j]
    n_j = sum(a == RISKY for _, _, a in moves)
    n_i = h.experiments[i]

    def path_weight(success_at):
        """Probability of j's moves when j's ``success_at``-th experiment (1-based) succeeds; 0 = never."""
        w, done = 1.0, 0
        for _, prefix, a in moves:
            succeeded = success_at and done >= success_at
            sigma = 1.0 if succeeded else profile.prob_risky(prefix)
            w *= sigma if a == RISKY else 1 - sigma
            if a == RISKY:
                done += 1
        return w

    good_none = p0 * (1 - lam) ** n_i * (1 - lam) ** n_j * path_weight(0)
    good_won = sum(p0 * (1 - lam) ** n_i * (1 - lam) ** (k - 1) * lam * path_weight(k) for k in range(1, n_j + 1))
    bad = (1 - p0) * path_weight(0)
    total = good_none + good_won + bad
    if total == 0:
        return None
    good = good_none + good_won
    return good / total, good_won / good


def on_path(profile, depth):
    for h in all_histories(depth):
        if brute_posterior(profile, h, h.active) is not None and brute_posterior(profile, h, 1 - h.active) is not None:
            yield h


def test_sigma_zero_beliefs_follow_own_experiments():
    prof = make_sigma_n(DEFAULT)
    engine = BeliefEngine(DEFAULT, prof.prob_risky)
    n_star = prof.n_star
    for k in range(2 * n_star + 1):
        h = History.of("R" * k)
        s = engine.state(h)
        for i in (0, 1):
            assert s.p(i) == pytest.approx(after_failures(DEFAULT.prior, h.experiments[i], DEFAULT), abs=1e-14)


def test_622_node_beliefs():
    prof = make_example_622(P622)
    assert prof.beliefs.state(History.of("RRR")).p(1) == 1.0
    s = prof.beliefs.state(History.of("RSSRRR"))
    assert s.p(0) == 1.0
    assert s.p(1) == pytest.approx(after_failures(P622.prior, 3, P622), abs=1e-14)


@pytest.mark.parametrize("make,params", [
    (make_threshold_phat, DEFAULT), (make_example_622, P622), (make_mixed_example, MIXED)])
def test_bayes_consistency_on_path(make, params):
    prof = make(params)
    checked = 0
    for h in on_path(prof, 10):
        s = prof.beliefs.state(h)
        for i in (0, 1):
            p, q = brute_posterior(prof, h, i)
            assert s.p(i) == pytest.approx(p, abs=1e-12), (h, i)
            if not s.players[i].convinced:
                assert s.q(i) == pytest.approx(q, abs=1e-12), (h, i)
        checked += 1
    assert checked > 10


@pytest.mark.parametrize("make,params", [(make_threshold_phat, DEFAULT), (make_example_622, P622)])
def test_pure_beliefs_on_ladder_and_pessimistic(make, params):
    prof = make(params)
    p0 = params.prior
    for h in all_histories(10):
        s = prof.beliefs.state(h)
        for i in (0, 1):
            b = s.players[i]
            assert 0.0 <= b.p <= 1.0
            if not b.convinced:
                assert b.scale == 1.0 and b.failures >= h.experiments[i]
                assert b.p <= after_failures(p0, h.experiments[i], params) + 1e-15
        for a in (RISKY, SAFE):
            child = prof.beliefs.state(h.extend(a))
            for i in (0, 1):
                assert child.players[i].convinced or child.p(i) <= s.p(i) + 1e-15


def test_beliefs_above_total_ladder_on_path():
    prof = make_threshold_phat(DEFAULT)
    for h in on_path(prof, 10):
        s = prof.beliefs.state(h)
        for i in (0, 1):
            assert s.p(i) >= after_failures(DEFAULT.prior, h.n_experiments, DEFAULT) - 1e-15


def test_traversal_order_does_not_matter():
    histories = list(all_histories(9))
    first = make_threshold_phat(DEFAULT)
    forward = {h.actions: first.beliefs.state(h).key for h in histories}
    second = make_threshold_phat(DEFAULT)
    shuffled = histories[:]
    random.Random(3).shuffle(shuffled)
    for h in reversed(shuffled):
        assert second.beliefs.state(h).key == forward[h.actions]


def test_appendix_b_deviation_after_experiment_convicts():
    # player 1 experiments, then player 2 experiments once; the profile says S after that
    table = TableProfile(DEFAULT, {"": 1.0, "R": 1.0, "RR": 0.0}, default=0.0)
    engine = BeliefEngine(DEFAULT, table.prob_risky, "appendix_b")
    s = engine.state(History.of("RRR"))
    assert s.p(1) == 1.0 and s.provenance == "deviation-conviction"
    for tail in ("S", "SR", "SRS"):
        assert engine.state(History.of("RRR" + tail)).p(1) == 1.0


def test_appendix_b_first_move_deviation_no_update():
    table = TableProfile(DEFAULT, {"": 0.0}, default=0.0)
    engine = BeliefEngine(DEFAULT, table.prob_risky, "appendix_b")
    before = engine.state(EMPTY).p(1)
    s = engine.state(History.of("R"))
    assert s.p(1) == before and s.provenance == "no-update"


def test_belief_system_horizon_and_csv():
    import io

    system = reasonable_beliefs(make_threshold_phat(DEFAULT), 2)
    with pytest.raises(HorizonExceeded):
        system.at(History.of("RRRRR"))
    buf = io.StringIO()
    system.write_csv(all_histories(2), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "history,p1,p2,q1,q2,provenance" and len(lines) == 8
    assert appendix_b_beliefs(make_sigma_n(DEFAULT), 1).engine.mode == "appendix_b"


def test_unknown_mode():
    with pytest.raises(ValueError):
        BeliefEngine(DEFAULT, lambda h: 1.0, "other")
