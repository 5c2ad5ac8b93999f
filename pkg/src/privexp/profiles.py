"""Catalog of strategy profiles.

A profile maps a public history to the probability that the active player, if
he has never succeeded, chooses R.  Success always means R; that convention
lives in the evaluator, not here.
"""

from __future__ import annotations

import math
import re
import warnings

from .beliefs import BeliefEngine
from .errors import EmptyRegion, HypothesisViolated, OutsideRegion, PriorTooLow, RootNotBracketed
from .histories import EMPTY, RISKY, SAFE, History
from .model import (
    after_failure,
    after_failures,
    at_least,
    before_failure,
    disclosure_cutoff,
    encouragement_cutoff,
    experiment_counts,
    myopic_cutoff,
    stopping_cutoff,
)


class Profile:
    name = "profile"
    citation = ""
    public_outcomes = False
    belief_mode = None
    settle_hint = 0

    def __init__(self, params):
        self.params = params
        self._cache = {}

    def prob_risky(self, h):
        hit = self._cache.get(h.actions)
        if hit is None:
            hit = float(self.rule(h))
            if not 0.0 <= hit <= 1.0:
                raise ValueError(f"{self.name} returned probability {hit} at {h!r}")
            self._cache[h.actions] = hit
        return hit

    __call__ = prob_risky

    def rule(self, h):
        raise NotImplementedError

    def signature(self, h):
        """Key such that equal keys imply equal continuation play; defaults to the history."""
        return h.actions

    @property
    def pure(self):
        return True

    def describe(self):
        return {"name": self.name, "params": self.params.to_dict(), "citation": self.citation}

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class TableProfile(Profile):
    """User-supplied profile: explicit probabilities per history string, with a default."""

    name = "table"

    def __init__(self, params, table, default=0.0, settle_hint=0):
        super().__init__(params)
        self.table = {History.of(k).actions if isinstance(k, str) else k.actions: v for k, v in table.items()}
        self.default = default
        self.settle_hint = settle_hint or (max(map(len, self.table), default=0) + 2)

    def rule(self, h):
        return self.table.get(h.actions, self.default)

    @property
    def pure(self):
        return all(v in (0.0, 1.0) for v in self.table.values()) and self.default in (0.0, 1.0)


class PathProfile(Profile):
    """Follow ``plan`` from the empty history, then repeat ``tail``; R off the plan."""

    name = "path"

    def __init__(self, params, plan, tail=SAFE, off=RISKY, name=None):
        super().__init__(params)
        self.plan = plan
        self.tail = tail
        self.off = off
        self.settle_hint = len(plan) + 2
        if name:
            self.name = name

    def on_plan(self, h):
        a, n = h.actions, len(self.plan)
        return a[:n] == self.plan[:len(a)] and a[n:] == self.tail * max(0, len(a) - n)

    def rule(self, h):
        if self.on_plan(h):
            nxt = self.plan[len(h)] if len(h) < len(self.plan) else self.tail
        else:
            nxt = self.off
        return 1.0 if nxt == RISKY else 0.0


def _require_prior(params, what):
    if params.prior < stopping_cutoff(params):
        raise PriorTooLow(f"{what} needs a prior of at least the one-player cutoff")


def make_sigma_n(params, n=0):
    """Both players experiment N* + n times in a row, then stop; any deviation triggers R forever."""
    if n < 0:
        raise ValueError("n must be non-negative")
    _require_prior(params, "sigma_n")
    counts, _ = experiment_counts(params)
    prof = PathProfile(params, RISKY * (2 * (counts["N_star"] + n)), name=f"sigma_n:n={n}")
    prof.citation = "both players experiment N*+n times, R after any deviation"
    prof.extra = n
    prof.n_star = counts["N_star"]
    return prof


# -- belief-driven profiles ---------------------------------------------------------

class BeliefProfile(Profile):
    """Profiles whose choice reads the active player's own belief."""

    belief_mode = "reasonable"

    def __init__(self, params):
        super().__init__(params)
        self.beliefs = BeliefEngine(params, self.prob_risky, self.belief_mode)
        counts, _ = experiment_counts(params)
        self.settle_hint = 2 * (counts["N_hat"] + counts["N_star"] + 3)

    def own(self, h):
        return self.beliefs.state(h).players[h.active]

    def shape(self, h):
        return None

    def signature(self, h):
        s = self.beliefs.state(h)
        return (self.shape(h), h.active, h.n_experiments, h.last, s.key)


class EncouragementThreshold(BeliefProfile):
    """R exactly when the active player's belief is at least the encouragement cutoff."""

    name = "threshold_phat"
    citation = "experiment iff own belief >= encouragement cutoff"

    def __init__(self, params):
        super().__init__(params)
        self.cutoff = encouragement_cutoff(params)

    def rule(self, h):
        b = self.own(h)
        return 1.0 if b.convinced or at_least(b.p, self.cutoff, "encouragement cutoff") else 0.0


def make_threshold_phat(params):
    return EncouragementThreshold(params)


def _only_safe(actions):
    return actions.count(RISKY) == 0


class LeaderFollower(BeliefProfile):
    """R at S^k and at S^k R; elsewhere R only when convinced the opponent succeeded."""

    name = "example_622"
    citation = "first mover experiments, second mover experiments once more"

    def shape(self, h):
        a = h.actions
        if _only_safe(a):
            return "S*"
        if _only_safe(a[:-1]) and a[-1] == RISKY:
            return "S*R"
        return "other"

    def rule(self, h):
        if self.shape(h) != "other":
            return 1.0
        return 1.0 if self.own(h).convinced else 0.0


def validity_622(params):
    return disclosure_cutoff(params, 1), before_failure(encouragement_cutoff(params), params)


def _warn_region(params, low, high, what, closed=True):
    if low > high or (not closed and low >= high):
        warnings.warn(f"{what}: validity interval is empty for these parameters", EmptyRegion, stacklevel=3)
        return False
    inside = low <= params.prior <= high if closed else low < params.prior < high
    if not inside:
        warnings.warn(f"{what}: prior {params.prior} outside [{low:.6g}, {high:.6g}]", OutsideRegion, stacklevel=3)
    return inside


def make_example_622(params):
    low, high = validity_622(params)
    _warn_region(params, low, high, "example_622")
    return LeaderFollower(params)


class _RoleMapped(BeliefProfile):
    """Profiles defined on histories starting with R and extended to S-starts by role mapping.

    ``swap`` means sigma(S h) = sigma(h); otherwise sigma(S) = S, sigma(SS h) = sigma(h)
    and sigma(SR h) = sigma(R h).
    """

    swap = None

    def mapped(self, h):
        a = h.actions
        while a.startswith(SAFE):
            if self.swap:
                a = a[1:]
            elif a == SAFE:
                return None
            elif a.startswith(SAFE + SAFE):
                a = a[2:]
            else:
                a = a[1:]
        return History.of(a)

    def rule(self, h):
        if h.actions.startswith(SAFE):
            target = self.mapped(h)
            return 0.0 if target is None else self.prob_risky(target)
        return self.leader_rule(h)

    def signature(self, h):
        return h.actions

    def settle_roles(self):
        from .evaluator import Evaluator

        w = Evaluator(self).values(EMPTY, (False, False), True), Evaluator(self).values(EMPTY, (False, False), False)
        p0 = self.params.prior
        self.gamma = (p0 * w[0][0] + (1 - p0) * w[1][0], p0 * w[0][1] + (1 - p0) * w[1][1])
        self.swap = self.gamma[0] > self.params.discount * self.gamma[1]
        self._cache = {k: v for k, v in self._cache.items() if not k.startswith(SAFE)}


class SingleExperiment(_RoleMapped):
    """Player 1 experiments once; afterwards R only when convinced."""

    name = "remark6"
    citation = "one experiment, then R only when convinced"

    def leader_rule(self, h):
        if len(h) == 0:
            return 1.0
        return 1.0 if self.own(h).convinced else 0.0


def make_remark6(params):
    low = stopping_cutoff(params)
    high = min(disclosure_cutoff(params, 1), before_failure(encouragement_cutoff(params), params))
    _warn_region(params, low, high, "remark6")
    prof = SingleExperiment(params)
    prof.settle_roles()
    return prof


# -- mixed example ------------------------------------------------------------------

_MIXED_SHAPES = (
    (re.compile(r"(SS)*"), "even-S"),
    (re.compile(r"(SS)*S"), "odd-S"),
    (re.compile(r"S*R"), "S*R"),
    (re.compile(r"S*RS"), "S*RS"),
    (re.compile(r"S*RSR"), "S*RSR"),
)


class MixedExample(BeliefProfile):
    """Randomizes after RS (with prob alpha) and after RSR (with prob beta)."""

    name = "mixed_example"
    citation = "behavioral profile with randomization after RS and RSR"

    def __init__(self, params, alpha, beta):
        self.alpha, self.beta = alpha, beta
        super().__init__(params)
        self.settle_hint = 12

    def shape(self, h):
        for pattern, label in _MIXED_SHAPES:
            if pattern.fullmatch(h.actions):
                return label
        return "other"

    def rule(self, h):
        label = self.shape(h)
        if label == "even-S":
            return 1.0
        if label == "S*RS":
            return self.alpha
        if label == "S*RSR":
            return self.beta
        return 1.0 if self.own(h).convinced else 0.0

    @property
    def pure(self):
        return False


def mixed_hypotheses(params):
    """Names of violated hypotheses (empty when the construction applies)."""
    p_star, p_hat = stopping_cutoff(params), encouragement_cutoff(params)
    p_hat1, p_star1 = encouragement_cutoff(params, 1), disclosure_cutoff(params, 1)
    failed = []
    if not p_hat < after_failure(p_star, params) < p_hat1:
        failed.append("fail(p_star) must lie strictly between p_hat and p_hat_1")
    high = min(p_star1, before_failure(p_hat1, params))
    if not p_star < params.prior < high:
        failed.append(f"prior must lie strictly between p_star={p_star:.6g} and {high:.6g}")
    return failed


def mixed_alpha(params):
    p0, lam = params.prior, params.success_rate
    p_star2 = disclosure_cutoff(params, 2)
    num = p0 * lam * (1 - p_star2)
    return num / (num + (p_star2 - p0))


def mixed_indifference(params, alpha, beta):
    """Player 1's value of R minus value of S at history RS under the mixed profile."""
    from .evaluator import Evaluator

    prof = MixedExample(params, alpha, beta)
    h = History.of("RS")
    s = prof.beliefs.state(h).players[0]
    vals = Evaluator(prof).action_values(h, s.p, s.q)
    return vals[RISKY] - vals[SAFE]


def mixed_responder_gap(params, alpha):
    """Player 2's value of R minus value of S at history RSR; it does not depend on beta."""
    from .evaluator import Evaluator

    prof = MixedExample(params, alpha, 0.5)
    h = History.of("RSR")
    s = prof.beliefs.state(h).players[1]
    vals = Evaluator(prof).action_values(h, s.p, s.q)
    return vals[RISKY] - vals[SAFE]


def make_mixed_example(params, tol=1e-13, exact_alpha=False):
    """Build the mixed profile.

    By default alpha comes from the closed form that puts player 2's belief at
    RSR on the two-experiment disclosure cutoff.  That cutoff takes the
    opponent's success odds to be those of two uninformative experiments, but
    reaching RSR makes an earlier success more likely, so player 2 is then not
    quite indifferent.  ``exact_alpha=True`` instead solves player 2's
    indifference directly.
    """
    failed = mixed_hypotheses(params)
    if failed:
        raise HypothesisViolated("; ".join(failed))
    from scipy.optimize import brentq

    if exact_alpha:
        low, high = mixed_responder_gap(params, 1e-9), mixed_responder_gap(params, 1.0)
        if not (low > 0 > high):
            raise RootNotBracketed(f"responder gap at alpha=0 is {low:.3g} and at alpha=1 is {high:.3g}")
        alpha = brentq(lambda a: mixed_responder_gap(params, a), 1e-9, 1.0, xtol=tol)
    else:
        alpha = mixed_alpha(params)
    low, high = mixed_indifference(params, alpha, 0.0), mixed_indifference(params, alpha, 1.0)
    if not (low < 0 < high):
        raise RootNotBracketed(f"indifference at beta=0 is {low:.3g} and at beta=1 is {high:.3g}")
    beta = brentq(lambda b: mixed_indifference(params, alpha, b), 0.0, 1.0, xtol=tol)
    prof = MixedExample(params, alpha, beta)
    prof.exact_alpha = exact_alpha
    return prof


# -- public-outcome benchmark ---------------------------------------------------------

class PublicMarkov(Profile):
    """Symmetric Markov equilibrium of the game where outcomes are public."""

    name = "public_markov"
    citation = "symmetric Markov equilibrium with public outcomes"
    public_outcomes = True

    def __init__(self, params, ladder):
        super().__init__(params)
        self.ladder = ladder
        self.settle_hint = 2 * len(ladder) + 4

    def rule(self, h):
        n = h.n_experiments
        return self.ladder[n]["f"] if n < len(self.ladder) else 0.0

    def signature(self, h):
        return (h.active, h.n_experiments)

    @property
    def pure(self):
        return all(row["f"] in (0.0, 1.0) for row in self.ladder)


def markov_ladder(params, p=None, tol=1e-12):
    """Backward induction on the failure ladder from ``p`` (default: the prior).

    Returns rows with belief, experiment probability f, the two values
    (mover's and the other player's) and the indifference residual.
    """
    from scipy.optimize import brentq

    lam, delta, m, c = params.success_rate, params.discount, params.prize, params.cost
    g = params.gain
    p = params.prior if p is None else p
    p_star = stopping_cutoff(params)
    depth = 0
    while after_failures(p, depth, params) > p_star:
        at_least(after_failures(p, depth, params), p_star, "one-player cutoff")
        depth += 1
    rows = [None] * depth
    nxt_first, nxt_second = 0.0, 0.0
    for k in reversed(range(depth)):
        b = after_failures(p, k, params)
        first = (1 - delta) * (b * lam * m - c) + delta * (b * lam * g + (1 - b * lam) * nxt_second)
        other = b * lam * g + (1 - b * lam) * nxt_first
        gap = lambda f: f * other + (1 - f) * first - first / delta  # noqa: E731
        if gap(1.0) <= 0:
            f = 1.0
        else:
            f = brentq(gap, 0.0, 1.0, xtol=tol)
        second = f * other + (1 - f) * first
        rows[k] = {
            "belief": b,
            "f": f,
            "gamma1": first,
            "gamma2": second,
            "residual": first - delta * second if f < 1 else 0.0,
        }
        nxt_first, nxt_second = first, second
    return rows


def markov_policy(params, p):
    """f(p): experiment probability of the symmetric Markov equilibrium at belief p."""
    rows = markov_ladder(params, p)
    return rows[0]["f"] if rows else 0.0


def make_public_markov(params):
    return PublicMarkov(params, markov_ladder(params))


class PublicBudget(Profile):
    """Pure public-outcome equilibrium: a budget of N* experiments split by alternation.

    With ``first=2`` player 1 declines at the root and the roles are exchanged.
    An equilibrium when the prior is below the myopic cutoff; above it the
    player asked to wait would rather experiment himself.
    """

    public_outcomes = True

    def __init__(self, params, first=1):
        super().__init__(params)
        counts, _ = experiment_counts(params)
        self.budget = counts["N_star"]
        self.first = first
        self.name = f"public_budget:first={first}"
        self.settle_hint = 2 * self.budget + 6

    def rule(self, h):
        left = self.budget - h.n_experiments
        if left <= 0:
            return 0.0
        if len(h) == 0:
            return 1.0 if self.first == 1 else 0.0
        parent = History.of(h.actions[:-1])
        consistent = (self.prob_risky(parent) == 1.0) == (h.actions[-1] == RISKY)
        return 1.0 if consistent or left % 2 == 0 else 0.0

    def signature(self, h):
        # play from h onward depends on h only through these
        return (len(h) == 0, h.active, h.n_experiments, self.prob_risky(h))


def make_public_budget(params, first=1):
    _warn_region(params, 0.0, myopic_cutoff(params), "public_budget", closed=False)
    return PublicBudget(params, first)


# -- pure equilibrium with suspicious beliefs -----------------------------------------

class Staggered(_RoleMapped):
    """Play (RS)^r0 (RR)^(N*-r0), then stop unless successful; deviations after an experiment read as success."""

    name = "appendixB_SE"
    citation = "pure equilibrium with deviation-as-success beliefs"
    belief_mode = "appendix_b"

    def __init__(self, params, r0, gammas, n_star):
        self.r0, self.gammas, self.n_star = r0, gammas, n_star
        super().__init__(params)
        self.p_star = stopping_cutoff(params)
        self.settle_hint = 4 * n_star + 6

    def leader_rule(self, h):
        if len(h) == 0:
            return 1.0
        b = self.own(h)
        confident = b.convinced or at_least(b.p, self.p_star, "one-player cutoff")
        if h.active == 0:
            return 1.0 if confident else 0.0
        if not confident:
            return 0.0
        r = _rs_prefix(h.actions)
        if r is not None and r < self.n_star and self.gammas[r] < max(self.gammas[r:]):
            return 0.0
        return 1.0


def _rs_prefix(actions):
    """r if actions == (RS)^r R, else None."""
    if len(actions) % 2 == 0 or actions[-1] != RISKY:
        return None
    body = actions[:-1]
    return len(body) // 2 if body == "RS" * (len(body) // 2) else None


def staggered_gammas(params):
    """Player 2's payoff when play is (RS)^r (RR)^(N*-r) then stops unless someone succeeded."""
    from .evaluator import Evaluator

    counts, _ = experiment_counts(params)
    n_star = counts["N_star"]
    p0 = params.prior
    out = []
    for r in range(n_star + 1):
        prof = PathProfile(params, "RS" * r + "RR" * (n_star - r))
        ev = Evaluator(prof)
        good, bad = ev.values(EMPTY, (False, False), True), ev.values(EMPTY, (False, False), False)
        out.append(p0 * good[1] + (1 - p0) * bad[1])
    return out


def make_appendixB_SE(params):
    _require_prior(params, "appendixB_SE")
    counts, _ = experiment_counts(params)
    gammas = staggered_gammas(params)
    r0 = max(range(len(gammas)), key=lambda r: (gammas[r], -r))
    prof = Staggered(params, r0, gammas, counts["N_star"])
    prof.settle_roles()
    return prof


# -- registry -------------------------------------------------------------------------

CATALOG = {
    "sigma_n": make_sigma_n,
    "threshold_phat": make_threshold_phat,
    "example_622": make_example_622,
    "remark6": make_remark6,
    "mixed_example": make_mixed_example,
    "public_markov": make_public_markov,
    "appendixB_SE": make_appendixB_SE,
    "public_budget": make_public_budget,
}


def build_profile(spec, params):
    """Build from ``name`` or ``name:key=value,...`` (e.g. ``sigma_n:n=2``)."""
    name, _, args = spec.partition(":")
    if name not in CATALOG:
        raise ValueError(f"unknown profile {name!r}; choose from {', '.join(CATALOG)}")
    kwargs = {}
    for item in filter(None, args.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"profile argument {item!r} is not key=value")
        kwargs[key.strip()] = int(value) if re.fullmatch(r"-?\d+", value.strip()) else float(value)
    return CATALOG[name](params, **kwargs)

