"""Equilibrium checks: one-shot deviations, the extra-rounds Nash condition, bound checks."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

from .beliefs import BeliefEngine
from .errors import HypothesisViolated, NotAnEquilibrium, PriorTooLow
from .evaluator import Evaluator, default_horizon
from .histories import EMPTY, RISKY, SAFE, all_histories, parse, render
from .model import (
    after_failure,
    after_failures,
    before_failure,
    disclosure_cutoff,
    encouragement_cutoff,
    experiment_counts,
    failures_until_below,
    stopping_cutoff,
)
from .payoffs import extra_rounds_payoffs, first_trade_payoff, one_player_value, scenario_value

TOLERANCE = 1e-9
MIXED_TOLERANCE = 1e-8


@dataclass
class NodeCheck:
    history: str
    player: int
    prob_risky: float
    belief: float
    eq_value: float
    deviation: str
    dev_value: float
    gain: float
    verdict: str


@dataclass
class DeviationReport:
    profile: str
    belief_mode: str
    depth: int
    tolerance: float
    nodes: list = field(default_factory=list)

    @property
    def max_gain(self):
        return max((n.gain for n in self.nodes), default=0.0)

    @property
    def failures(self):
        return [n for n in self.nodes if n.verdict == "FAIL"]

    @property
    def verdict(self):
        return "FAIL" if self.failures else "PASS"

    def to_csv(self):
        out = io.StringIO()
        cols = ["history", "player", "eq_value", "dev_value", "gain", "verdict", "deviation", "prob_risky", "belief"]
        writer = csv.DictWriter(out, fieldnames=cols)
        writer.writeheader()
        for n in self.nodes:
            row = asdict(n)
            writer.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in row.items() if k in cols})
        return out.getvalue()

    def to_dict(self):
        return {
            "format": "deviation-report/1",
            "profile": self.profile,
            "belief_mode": self.belief_mode,
            "depth": self.depth,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "max_gain": self.max_gain,
            "checked": len(self.nodes),
            "failures": [asdict(n) for n in self.failures],
        }

    def to_json(self, all_nodes=False):
        data = self.to_dict()
        if all_nodes:
            data["nodes"] = [asdict(n) for n in self.nodes]
        return json.dumps(data, indent=2)


def _belief_reader(profile, mode):
    """Function h -> (p, q) of the active never-successful player."""
    if mode == "public":
        p0 = profile.params.prior
        return lambda h: (after_failures(p0, h.n_experiments, profile.params), 0.0)
    engine = getattr(profile, "beliefs", None)
    if engine is None or engine.mode != mode:
        engine = BeliefEngine(profile.params, profile.prob_risky, mode)

    def read(h):
        b = engine.state(h).players[h.active]
        return b.p, b.q

    return read


def default_mode(profile):
    if profile.public_outcomes:
        return "public"
    return profile.belief_mode or "reasonable"


def _classes(profile, depth, read):
    """One representative per (signature, active belief) class, by increasing length.

    Equal classes have equal continuation play and beliefs, so checking one
    representative covers every history of the class.
    """
    level = {None: EMPTY}
    seen = set()
    for _ in range(depth + 1):
        nxt = {}
        for h in level.values():
            key = (profile.signature(h), read(h))
            if key in seen:
                continue
            seen.add(key)
            yield h
            for a in (RISKY, SAFE):
                child = h.extend(a)
                nxt.setdefault((profile.signature(child), read(child)), child)
        level = nxt


def _node_check(profile, ev, read, h, tol, mixed_tol):
    p, q = read(h)
    values = ev.action_values(h, p, q)
    sigma = profile.prob_risky(h)
    eq = sigma * values[RISKY] + (1 - sigma) * values[SAFE]
    if sigma in (0.0, 1.0):
        dev = SAFE if sigma == 1.0 else RISKY
        dev_value = values[dev]
        gain = dev_value - eq
        verdict = "FAIL" if gain > tol else "PASS"
    else:
        dev = "indifference"
        dev_value = max(values[RISKY], values[SAFE])
        gain = abs(values[RISKY] - values[SAFE])
        verdict = "FAIL" if gain > mixed_tol else "PASS"
    return NodeCheck(render(h), h.active_player, sigma, p, eq, dev, dev_value, gain, verdict)


def one_shot_deviation_check(profile, depth, belief_mode=None, tol=TOLERANCE, mixed_tol=MIXED_TOLERANCE,
                             horizon=None, evaluator=None):
    """Check every history of length <= ``depth`` for a profitable one-step deviation.

    Histories are grouped by the profile's state signature; the report lists one
    representative per group.
    """
    mode = belief_mode or default_mode(profile)
    read = _belief_reader(profile, mode)
    ev = evaluator or Evaluator(profile, horizon=horizon or default_horizon(profile) + depth)
    report = DeviationReport(profile.name, mode, depth, tol)
    report.nodes = [_node_check(profile, ev, read, h, tol, mixed_tol) for h in _classes(profile, depth, read)]
    report.nodes.sort(key=lambda n: (len(n.history), n.history))
    return report


def check_nodes(profile, histories, belief_mode=None, tol=TOLERANCE, mixed_tol=MIXED_TOLERANCE):
    """One-step deviation check at the given histories only."""
    mode = belief_mode or default_mode(profile)
    read = _belief_reader(profile, mode)
    histories = [parse(h) if isinstance(h, str) else h for h in histories]
    ev = Evaluator(profile, horizon=default_horizon(profile) + max(len(h) for h in histories))
    report = DeviationReport(profile.name, mode, max(len(h) for h in histories), tol)
    report.nodes = [_node_check(profile, ev, read, h, tol, mixed_tol) for h in histories]
    return report


def threshold_conditions(params):
    """When experimenting above the encouragement cutoff is an equilibrium.

    ``n`` is the number of failures that takes the prior below the cutoff.
    ``stated`` is the published condition, ``last(n-1) >= disclosure_cutoff(n)``.
    ``refined`` adds ``last(n-1) >= encouragement_cutoff(n-1)``: the first mover
    at (RR)^(n-1) faces n-1 undisclosed experiments and buys one more
    experiment of the opponent with his own.
    """
    p_hat = encouragement_cutoff(params)
    n = failures_until_below(params.prior, p_hat, params)
    if n == 0:
        return {"n": 0, "stated": None, "refined": True, "belief": params.prior}
    belief = after_failures(params.prior, n - 1, params)
    stated = belief >= disclosure_cutoff(params, n)
    return {
        "n": n,
        "belief": belief,
        "stated": stated,
        "refined": stated and belief >= encouragement_cutoff(params, n - 1),
        "disclosure_cutoff": disclosure_cutoff(params, n),
        "encouragement_cutoff": encouragement_cutoff(params, n - 1),
    }


# -- the extra-rounds profile ------------------------------------------------------------

def _extra_rounds_conform(params, rounds):
    """Values at every move of the joint plan R...R (2*rounds moves) then stop, R forever after any deviation.

    Returns ``value[t]``: the mover's value at move t in the good state for each
    pair of success flags, computed by backward recursion independent of the
    general evaluator.
    """
    lam, d, g = params.success_rate, params.discount, params.gain
    flow = params.success_rate * params.prize - params.cost
    total = 2 * rounds
    # tail[t][flags] = (mover value, other value) at move t >= total in the good state
    def tail(t, s1, s2):
        flags = (s1, s2)
        mover = t % 2
        if flags[mover]:
            # a successful mover leaves the plan: everyone plays R from here
            return g, g
        if t == total and flags[1 - mover]:
            # player 2 will reveal at the next move; the mover stops now, then plays R
            return d * g, g
        if t == total + 1 and flags[1 - mover]:
            # player 1 already played R off plan, so everyone plays R
            return g, g
        return 0.0, 0.0
    value = {}
    for t in reversed(range(total)):
        mover = t % 2
        for s1 in (False, True):
            for s2 in (False, True):
                flags = [s1, s2]
                def nxt(f):
                    if t + 1 < total:
                        w = value[(t + 1, f[0], f[1])]
                    else:
                        w = tail(t + 1, *f)
                    # w is (mover at t+1, other at t+1); our mover is the other at t+1
                    return w[1], w[0]
                if flags[mover]:
                    won = nxt(flags)
                    own, other = (1 - d) * flow + d * won[0], won[1]
                else:
                    won_flags = list(flags)
                    won_flags[mover] = True
                    a, b = nxt(won_flags), nxt(flags)
                    own = (1 - d) * flow + d * (lam * a[0] + (1 - lam) * b[0])
                    other = lam * a[1] + (1 - lam) * b[1]
                value[(t, s1, s2)] = (own, other)
    return value, tail


def brute_force_extra_rounds(params, n, tol=1e-12):
    """Search deviations to S at every move of the joint plan, and to R when the plan stops."""
    counts, _ = experiment_counts(params)
    rounds = counts["N_star"] + n
    lam, d, c = params.success_rate, params.discount, params.cost
    p0 = params.prior
    value, tail = _extra_rounds_conform(params, rounds)
    worst = -math.inf
    for t in range(2 * rounds + 2):
        mover = t % 2
        own_done = t // 2
        other_done = (t + 1) // 2 if mover == 0 else t // 2 + 1
        other_done = min(other_done, rounds)
        p = after_failures(p0, own_done, params)
        q = 1 - (1 - lam) ** other_done
        bad_conform = -(1 - d) * c * sum(d ** k for k in range(rounds - own_done))
        if t < 2 * rounds:
            good_conform = q * value[(t, *((False, True) if mover == 0 else (True, False)))][0] + \
                (1 - q) * value[(t, False, False)][0]
            deviate = d * one_player_value(p, params)
        else:
            flags_won = (False, True) if mover == 0 else (True, False)
            good_conform = q * tail(t, *flags_won)[0] + (1 - q) * tail(t, False, False)[0]
            flow = p * lam * params.prize - c
            deviate = (1 - d) * flow + d * (p * lam * params.gain + (1 - p * lam) * one_player_value(after_failure(p, params), params))
            bad_conform = 0.0
        conform = p * good_conform + (1 - p) * bad_conform
        worst = max(worst, deviate - conform)
    return worst <= tol, worst


def nash_check_sigma_n(params, n):
    if params.prior < stopping_cutoff(params):
        raise PriorTooLow("the extra-rounds profile needs a prior of at least the one-player cutoff")
    first, _ = extra_rounds_payoffs(params, n)
    brute, gain = brute_force_extra_rounds(params, n)
    return {"closed_form": first >= 0, "brute_force": brute, "continuation": first, "best_gain": gain}


def sufficient_extra_rounds(lam, n, n_star):
    """Condition under which n extra rounds are an equilibrium for discounting close enough to 1."""
    return (n + 1) * lam + (1 - lam) ** (2 * n + n_star + 2) < 1


# -- bound checks ---------------------------------------------------------------------------

def _require_equilibrium(profile, depth, belief_mode=None):
    report = one_shot_deviation_check(profile, depth, belief_mode)
    if report.verdict != "PASS":
        worst = max(report.failures, key=lambda n: n.gain)
        raise NotAnEquilibrium(f"{profile.name}: profitable deviation {worst.deviation} at {worst.history!r}")
    return report


def check_low_beliefs_stop(profile, depth, verified=False):
    """Final beliefs fall below the encouragement cutoff with positive probability, and nobody experiments there."""
    if not verified:
        _require_equilibrium(profile, depth, "reasonable")
    params = profile.params
    cut = encouragement_cutoff(params)
    engine = BeliefEngine(params, profile.prob_risky, "reasonable")
    ev = Evaluator(profile)
    terminals = ev.terminals_given_bad()
    low_end = [t for t in terminals if t.probability > 0 and max(engine.state(t.history).p(0), engine.state(t.history).p(1)) < cut]
    violations = []
    for h in all_histories(depth):
        b = engine.state(h).players[h.active]
        if not b.convinced and b.p < cut and profile.prob_risky(h) > 0:
            violations.append(render(h))
    return {
        "low_final_belief": bool(low_end),
        "low_final_probability": sum(t.probability for t in low_end),
        "no_experiment_below_cutoff": not violations,
        "violations": violations,
        "experiments_given_bad": ev.experiments_given_bad(),
        "verdict": "PASS" if low_end and not violations else "FAIL",
    }


def check_experiment_bounds(profile, depth=None, verified=False):
    """Experiments in the bad state lie between N** - 2 and 2 N**."""
    params = profile.params
    if not profile.pure:
        raise NotAnEquilibrium("the bounds apply to pure profiles")
    if params.prior <= stopping_cutoff(params):
        raise PriorTooLow("the bounds need a prior above the one-player cutoff")
    if not verified:
        _require_equilibrium(profile, depth if depth is not None else 8, "reasonable")
    counts, _ = experiment_counts(params)
    dist = Evaluator(profile).experiments_given_bad()
    (count,) = dist
    social = counts["N_star_social"]
    return {
        "experiments": count,
        "N_star": counts["N_star"],
        "N_star_social": social,
        "lower": social - 2,
        "upper": 2 * social,
        "ratio": count / social if social else math.inf,
        "verdict": "PASS" if social - 2 <= count <= 2 * social else "FAIL",
    }


def no_pure_equilibrium_certificate(params):
    """Gain of deviating to R (then S) at RS when play after RS must be S forever."""
    p_hat = encouragement_cutoff(params)
    low, high = before_failure(p_hat, params), disclosure_cutoff(params, 1)
    if not low < stopping_cutoff(params):
        raise HypothesisViolated("needs the pre-image of the encouragement cutoff below the one-player cutoff")
    if not low < high:
        raise HypothesisViolated("the prior interval is empty for these parameters")
    if not low < params.prior < high:
        raise HypothesisViolated(f"prior must lie in ({low:.6g}, {high:.6g})")
    belief = after_failure(params.prior, params)
    gain = scenario_value(RISKY + RISKY, params, belief, 0.0)
    return {
        "belief_at_RS": belief,
        "gain": gain,
        "closed_form_gain": first_trade_payoff(belief, params),
        "interval": (low, high),
        "verdict": "PASS" if gain > 0 else "FAIL",
    }
