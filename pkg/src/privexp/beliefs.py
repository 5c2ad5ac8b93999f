"""Belief systems induced by a strategy profile.

Each player's belief at a public history is a pair: the probability ``p`` that
the arm is good (held while the player has never succeeded) and ``q``, the
probability that the opponent has already succeeded given a good arm.

``p`` is stored as the prior's likelihood ratio times (1 - success_rate) to the
power ``failures``, times a residual ``scale`` left by Bayes updates on mixed
moves.  Conviction (p = 1) is ``scale = inf``.  Pure profiles therefore keep
``scale == 1`` and beliefs stay exactly on the prior's failure ladder.

Two update rules are implemented:

``reasonable``
    Own moves update by the failure map.  An opponent's S resets the observer
    to the ladder point of all experiments so far, with q = 0.  An opponent's
    R right after his own S (or as his first move) sets the observer to the
    same ladder point with q = success_rate.  Any other R is a Bayes update
    through the profile's probability of R; a zero-probability R after an
    experiment convicts the observer, because the limit of trembles that only
    the never-successful type makes is all mass on the successful type.

``appendix_b``
    Conviction and certainty are absorbing; moves of a convinced player carry
    no news about the arm; a move matching a pure profile is a Bayes update; an
    unexpected move after at least one experiment convicts the observer.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .errors import HorizonExceeded
from .histories import RISKY, SAFE, History, render
from .model import after_failures, likelihood_ratio


@dataclass(frozen=True)
class PlayerBelief:
    failures: int
    scale: float
    q: float
    lr: float

    @property
    def convinced(self):
        return self.lr == math.inf

    @property
    def p(self):
        return 1.0 if self.convinced else self.lr / (1 + self.lr)

    @property
    def key(self):
        return (self.failures, self.scale, self.q)


@dataclass(frozen=True)
class BeliefState:
    players: tuple
    provenance: str

    def p(self, i):
        return self.players[i].p

    def q(self, i):
        return self.players[i].q

    @property
    def key(self):
        return (self.players[0].key, self.players[1].key)


class BeliefEngine:
    """Lazily computes beliefs along histories, shortest prefix first.

    ``policy(h)`` must return the probability that the never-successful active
    player chooses R at ``h``; it may itself query this engine at ``h``.
    """

    MODES = ("reasonable", "appendix_b")

    def __init__(self, params, policy, mode="reasonable"):
        if mode not in self.MODES:
            raise ValueError(f"unknown belief mode {mode!r}")
        self.params = params
        self.policy = policy
        self.mode = mode
        self._lr0 = likelihood_ratio(params.prior)
        self._decay = 1 - params.success_rate
        root = self.make(0, 1.0, 0.0)
        self._memo = {"": BeliefState((root, root), "root")}
        self._histories = {}

    def make(self, failures, scale, q):
        if scale == math.inf:
            return PlayerBelief(failures, math.inf, 1.0, math.inf)
        return PlayerBelief(failures, scale, q, self._lr0 * self._decay ** failures * scale)

    def ladder(self, failures, q):
        return self.make(failures, 1.0, q)

    def convinced(self, failures=0):
        return self.make(failures, math.inf, 1.0)

    def state(self, h):
        actions = h.actions if isinstance(h, History) else h
        memo = self._memo
        if actions in memo:
            return memo[actions]
        k = len(actions) - 1
        while actions[:k] not in memo:
            k -= 1
        prefix = self._histories.get(actions[:k]) or History.of(actions[:k])
        current = memo[actions[:k]]
        for a in actions[k:]:
            current = self._update(current, prefix, a)
            prefix = prefix.extend(a)
            memo[prefix.actions] = current
            self._histories[prefix.actions] = prefix
        return current

    def p(self, h, i):
        return self.state(h).p(i)

    # -- updates ---------------------------------------------------------------

    def _own(self, b, action):
        if action == SAFE or b.convinced:
            return b
        return self.make(b.failures + 1, b.scale, b.q)

    def _bayes_after_risky(self, b, sigma):
        """Observer update when the mover plays R and R had probability ``sigma``."""
        lam = self.params.success_rate
        if b.convinced:
            return b, "success-conviction"
        q = b.q
        if sigma == 1:
            return self.make(b.failures, b.scale, q + (1 - q) * lam), "bayes"
        if sigma == 0:
            if q > 0:
                return self.convinced(b.failures), "success-conviction"
            return self.make(b.failures, b.scale, lam), "bayes"
        weight = q + (1 - q) * sigma
        return self.make(b.failures, b.scale * weight / sigma, (q + lam * (1 - q) * sigma) / weight), "bayes"

    def _update(self, s, h, action):
        i = h.active
        j = 1 - i
        players = list(s.players)
        players[i] = self._own(s.players[i], action)
        if self.mode == "reasonable":
            players[j], tag = self._reasonable(s, h, action)
        else:
            players[j], tag = self._appendix_b(s, h, action)
        return BeliefState(tuple(players), tag)

    def _reasonable(self, s, h, action):
        i = h.active
        n = h.n_experiments
        if action == SAFE:
            return self.ladder(n, 0.0), "reasonable-rule"
        if h.last[i] != RISKY:
            tag = "bayes" if h.last[i] is None else "reasonable-rule"
            return self.ladder(n, self.params.success_rate), tag
        return self._bayes_after_risky(s.players[1 - i], self.policy(h))

    def _appendix_b(self, s, h, action):
        i = h.active
        observer, mover = s.players[1 - i], s.players[i]
        lam = self.params.success_rate
        if observer.convinced:
            return observer, "conviction-absorbing"
        if mover.convinced:
            q = observer.q + (1 - observer.q) * lam if action == RISKY else observer.q
            return self.make(observer.failures, observer.scale, q), "no-update"
        sigma = self.policy(h)
        expected = 0 < sigma < 1 or (sigma == 1) == (action == RISKY)
        if expected:
            if action == RISKY:
                return self._bayes_after_risky(observer, sigma)
            return self.make(observer.failures, observer.scale * (1 - observer.q), 0.0), "bayes"
        if h.experiments[i] >= 1:
            return self.convinced(observer.failures), "deviation-conviction"
        q = lam if action == RISKY else 0.0
        return self.make(observer.failures, observer.scale, q), "no-update"


class BeliefSystem:
    """Beliefs of a profile, queryable up to ``horizon`` periods (two moves each)."""

    def __init__(self, engine, horizon):
        if horizon < 1:
            raise ValueError("horizon must be at least one period")
        self.engine = engine
        self.horizon = horizon

    @property
    def max_length(self):
        return 2 * self.horizon

    def at(self, h):
        if len(h) > self.max_length:
            raise HorizonExceeded(f"history of length {len(h)} beyond {self.horizon} periods")
        return self.engine.state(h)

    def rows(self, histories):
        for h in histories:
            s = self.at(h)
            yield {
                "history": render(h),
                "p1": s.p(0),
                "p2": s.p(1),
                "q1": s.q(0),
                "q2": s.q(1),
                "provenance": s.provenance,
            }

    def write_csv(self, histories, stream):
        writer = csv.DictWriter(stream, fieldnames=["history", "p1", "p2", "q1", "q2", "provenance"])
        writer.writeheader()
        for row in self.rows(histories):
            writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items()})


def reasonable_beliefs(profile, horizon):
    return BeliefSystem(BeliefEngine(profile.params, profile.prob_risky, "reasonable"), horizon)


def appendix_b_beliefs(profile, horizon):
    return BeliefSystem(BeliefEngine(profile.params, profile.prob_risky, "appendix_b"), horizon)


def public_belief(params, h):
    """Common belief in the public-outcome game while nobody has succeeded."""
    return after_failures(params.prior, h.n_experiments, params)

