"""Closed-form payoffs, the one-player value, and scenario evaluation.

All values are per-period equivalents: a flow r received every period forever
is worth r.
"""

from __future__ import annotations

from .evaluator import Evaluator, PayoffReport, eval_profile
from .histories import EMPTY, RISKY, SAFE
from .model import (
    after_failures,
    disclosure_cutoff,
    encouragement_cutoff,
    experiment_counts,
    stopping_cutoff,
)
from .errors import PriorTooLow
from .profiles import PathProfile

__all__ = [
    "Evaluator", "PayoffReport", "eval_profile", "one_player_value", "one_player_policy_length",
    "extra_rounds_payoffs", "first_trade_payoff", "delayed_trade_payoff", "disclosed_trade_payoff",
    "stopping_payoffs", "scenario_value", "deviation_preferences", "preference_gaps",
]


def one_player_value(p, params, discount=None):
    """Value of the single-agent bandit at belief ``p``.

    Below the one-player cutoff the agent stops for good, so the value there
    is 0 and one backward pass up the failure ladder is exact.
    """
    d = params.discount if discount is None else discount
    lam, m, c = params.success_rate, params.prize, params.cost
    g = params.gain
    if p == 1:
        return g
    floor = stopping_cutoff(params, d)
    rungs = [p]
    while rungs[-1] >= floor:
        rungs.append(after_failures(p, len(rungs), params))
    value = 0.0
    for b in reversed(rungs[:-1]):
        value = max(0.0, (1 - d) * (b * lam * m - c) + d * (b * lam * g + (1 - b * lam) * value))
    return value


def one_player_policy_length(p, params, discount=None):
    """Number of experiments the optimal single agent runs before stopping when unlucky."""
    d = params.discount if discount is None else discount
    cut = stopping_cutoff(params, d)
    n = 0
    while after_failures(p, n, params) >= cut:
        n += 1
    return n


# -- extra rounds --------------------------------------------------------------------

def _ladder_top(params):
    if params.prior < stopping_cutoff(params):
        raise PriorTooLow("the closed forms need a prior of at least the one-player cutoff")
    counts, _ = experiment_counts(params)
    return counts["N_star"], after_failures(params.prior, counts["N_star"], params)


def extra_rounds_payoffs(params, n):
    """Player 1's continuation after N* joint rounds when both run ``n`` more, and the same for player 2.

    Returned as ``(first, second)``; the profile is an equilibrium iff ``first >= 0``.
    """
    n_star, top = _ladder_top(params)
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    keep = (1 - lam) ** n
    other = 1 - (1 - lam) ** (n + n_star)
    common = (1 - d ** n) * (top * lam * m - c)
    first = common + d ** n * g * top * ((1 - keep) + keep * other * d)
    second = common + d ** n * g * top * ((1 - keep) + keep * other)
    return first, second


# -- the trade-offs that define the cutoffs ---------------------------------------------

def first_trade_payoff(p, params):
    """R-then-S versus S when the opponent answers an R with exactly one more experiment."""
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    return (1 - d) * (p * lam * m - c) + d * p * (lam + d * (1 - lam) * lam) * g


def delayed_trade_payoff(p, n, params):
    """The same trade when the opponent holds ``n`` undisclosed experiments."""
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    keep = (1 - lam) ** n
    return ((1 - d) * (p * lam * m - c) + d * p * lam * g
            + d ** 2 * p * (1 - lam) * (1 - keep * (1 - lam)) * g
            - d * p * (1 - keep) * g)


def disclosed_trade_payoff(p, n, params):
    """R versus S when the opponent discloses ``n`` experiments next period whatever we do."""
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    return (1 - d) * (p * lam * m - c) + d * p * g * lam * (1 - lam) ** n


def stopping_payoffs(p, q, k, params):
    """Continuation payoffs compared when deciding to stop.

    ``stop``: S now, opponent reveals a success.  ``lead``: k+1 own experiments
    with the opponent matching k and then stopping.  ``match``: k rounds of joint
    experimentation started by us.  ``match_general``: the same with a general
    opponent success belief; equal to ``match`` when q = 0.
    """
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    flow = p * lam * m - c
    miss = lambda n: (1 - lam) ** n  # noqa: E731
    stop = d * p * g * q
    lead = flow * (1 - d ** (k + 1)) + d ** (k + 1) * p * g * (
        (1 - miss(k + 1)) + miss(k + 1) * (q + (1 - q) * (1 - miss(k)))
    )
    match = flow * (1 - d ** k) + d ** k * p * g * ((1 - miss(k)) + d * miss(k) * (1 - miss(k)))
    match_general = flow * (1 - d ** k) + d ** k * p * g * (
        (1 - miss(k)) + d * miss(k) * (q + (1 - q) * (1 - miss(k)))
    )
    return {"stop": stop, "lead": lead, "match": match, "match_general": match_general}


# -- scenarios -----------------------------------------------------------------------

def scenario_value(plan, params, p, q, tail=SAFE):
    """Player 1's value when play follows ``plan`` then ``tail`` forever; off-plan means R forever.

    The opponent has succeeded with probability ``q`` given a good arm; a
    successful opponent leaves the plan and thereby reveals his success.
    """
    ev = Evaluator(PathProfile(params, plan, tail=tail))
    return ev.node_value(EMPTY, p, q)


def deviation_preferences(p, undisclosed, k, params):
    """Three comparisons between joint-experimentation continuations, with their payoff gaps.

    ``undisclosed`` counts the opponent's past experiments not yet revealed.
    The first comparison is exactly the sign of ``alone_k``, the value of
    running k experiments alone and then stopping; the ladder test
    ``fail^(k-1)(p) >= p*`` implies it but is not implied by it.
    """
    q = 1 - (1 - params.success_rate) ** undisclosed
    joint = RISKY * (2 * k)
    now = scenario_value(joint, params, p, q)
    delay = scenario_value(SAFE + joint, params, p, q)
    shorter = scenario_value(RISKY * (2 * (k - 1)), params, p, q)
    longer = scenario_value(joint + RISKY + SAFE, params, p, q)
    p_star = stopping_cutoff(params)
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    alone_k = (1 - d ** k) * (p * lam * m - c) + d ** k * p * g * (1 - (1 - lam) ** k)
    return {
        "prefer_now_vs_delay": after_failures(p, k - 1, params) >= p_star,
        "prefer_k_vs_kminus1": after_failures(p, k - 1, params) >= encouragement_cutoff(params, undisclosed + k - 1),
        "prefer_extra_RS": after_failures(p, k, params) >= disclosure_cutoff(params, undisclosed + k),
        "gap_now_vs_delay": now - delay,
        "gap_k_vs_kminus1": now - shorter,
        "gap_extra_RS": longer - now,
        "alone_k": alone_k,
    }


def preference_gaps(p, undisclosed, k, params):
    """Closed forms of the three gaps reported by :func:`deviation_preferences`."""
    q = 1 - (1 - params.success_rate) ** undisclosed
    lam, d, m, c, g = params.success_rate, params.discount, params.prize, params.cost, params.gain
    alone_k = (1 - d ** k) * (p * lam * m - c) + d ** k * p * g * (1 - (1 - lam) ** k)
    now = stopping_payoffs(p, q, k, params)
    shorter = stopping_payoffs(p, q, k - 1, params)["match_general"]
    return {
        "gap_now_vs_delay": (1 - d) * alone_k,
        "gap_k_vs_kminus1": now["match_general"] - shorter,
        "gap_extra_RS": now["lead"] - now["match_general"],
    }
