"""Exact expected payoffs of a strategy profile.

State of the recursion: (profile signature of the public history, success flag
of each player, whether the arm is good).  A successful player plays R.  Values
are normalized per-period equivalents measured at each player's next move, so
player 2's root value already discounts from his own first move.

Play far enough down the tree is closed off by tail classification: from a
node at or beyond the horizon the deterministic continuation is followed for a
lookahead window, and if every player's choice stays constant the value is the
closed-form value of S forever (0) or R forever (expected flow).  Profiles whose
signatures repeat (Markov profiles with mixing) fall back to a sparse linear
solve on the reachable state graph.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, identity
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .errors import UnclassifiableTail
from .histories import EMPTY, RISKY, SAFE
from .model import experiment_counts

HARD_CAP = 400
MAX_GRAPH_NODES = 400_000

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


class _Cycle(Exception):
    pass


def default_horizon(profile):
    counts, _ = experiment_counts(profile.params)
    base = 2 * (counts["N_tilde"] + counts["N_star"] + 4)
    return max(base, profile.settle_hint + 8)


@dataclass
class Terminal:
    history: object
    probability: float
    experiments: float
    settles_on: str


@dataclass
class PayoffReport:
    gamma1: float
    gamma2: float
    good: tuple
    bad: tuple
    experiments_given_bad: dict
    settles_given_bad: dict = field(default_factory=dict)
    profile: str = ""
    params: dict = field(default_factory=dict)

    def to_dict(self, unnormalized=False):
        scale = 1 / (1 - self.params["delta"]) if unnormalized and self.params else 1.0
        return {
            "format": "payoff-report/1",
            "profile": self.profile,
            "params": self.params,
            "normalized": not unnormalized,
            "gamma1": self.gamma1 * scale,
            "gamma2": self.gamma2 * scale,
            "given_good": [v * scale for v in self.good],
            "given_bad": [v * scale for v in self.bad],
            "experiments_given_bad": {str(k): v for k, v in sorted(self.experiments_given_bad.items())},
            "settles_given_bad": self.settles_given_bad,
        }


class Evaluator:
    def __init__(self, profile, horizon=None, success_forces_risky=True, lookahead=None, cap=HARD_CAP):
        self.profile = profile
        self.params = profile.params
        self.public = profile.public_outcomes
        self.success_forces_risky = success_forces_risky
        base = default_horizon(profile)
        self.horizon = base if horizon is None else max(horizon, profile.settle_hint + 8)
        self.lookahead = lookahead if lookahead is not None else max(16, base)
        self.cap = max(cap, self.horizon + 2)
        p = self.params
        self._flow = {True: p.success_rate * p.prize - p.cost, False: -p.cost}
        self._memo = {}
        self._busy = set()

    # -- one step --------------------------------------------------------------

    def _forced(self, s, a):
        if self.public:
            return s[0] or s[1]
        return self.success_forces_risky and s[a]

    def prob_risky(self, h, s):
        return 1.0 if self._forced(s, h.active) else self.profile.prob_risky(h)

    def transitions(self, h, s, good):
        """List of (probability, child history, child flags, flow to the mover)."""
        a = h.active
        pr = self.prob_risky(h, s)
        out = []
        if pr > 0:
            hr = h.extend(RISKY)
            flow = self._flow[good]
            if good and not s[a]:
                won = list(s)
                won[a] = True
                lam = self.params.success_rate
                out.append((pr * lam, hr, tuple(won), flow))
                out.append((pr * (1 - lam), hr, s, flow))
            else:
                out.append((pr, hr, s, flow))
        if pr < 1:
            out.append((1 - pr, h.extend(SAFE), s, None))
        return out

    # -- tails -----------------------------------------------------------------

    def _immediate_tail(self, s, good):
        if (self.public and (s[0] or s[1])) or (self.success_forces_risky and s[0] and s[1]):
            v = self._flow[good]
            return (v, v)
        return None

    def classify(self, h, s, good):
        """Per-player constant action over the lookahead window, or None."""
        seen = [None, None]
        for _ in range(self.lookahead):
            a = h.active
            pr = self.prob_risky(h, s)
            if pr not in (0.0, 1.0):
                return None
            act = RISKY if pr == 1.0 else SAFE
            if seen[a] is None:
                seen[a] = act
            elif seen[a] != act:
                return None
            h = h.extend(act)
        if self.public and good and not (s[0] or s[1]) and RISKY in seen and SAFE in seen:
            return None
        return tuple(self._flow[good] if act == RISKY else 0.0 for act in seen)

    # -- recursion ---------------------------------------------------------------

    def _key(self, h, s, good):
        return (self.profile.signature(h), s, good)

    def values(self, h=EMPTY, s=(False, False), good=True):
        """(W1, W2): each player's value measured at his next move from ``h``."""
        key = self._key(h, s, good)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        try:
            return self._dfs(h, s, good, key)
        except _Cycle:
            self._busy.clear()
            self._solve_graph(h, s, good)
            return self._memo[key]

    def _leaf(self, h, s, good):
        tail = self._immediate_tail(s, good)
        if tail is not None:
            return tail
        if len(h) >= self.horizon:
            tail = self.classify(h, s, good)
            if tail is not None:
                return tail
            if len(h) >= self.cap:
                raise UnclassifiableTail(
                    f"play after {h!r} does not settle within {self.cap} moves"
                )
        return None

    def _dfs(self, h, s, good, key):
        memo = self._memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        leaf = self._leaf(h, s, good)
        if leaf is not None:
            memo[key] = leaf
            return leaf
        if key in self._busy:
            raise _Cycle
        self._busy.add(key)
        a = h.active
        delta = self.params.discount
        mover = other = 0.0
        for prob, child, flags, flow in self.transitions(h, s, good):
            w = self._dfs(child, flags, good, self._key(child, flags, good))
            if flow is None:
                mover += prob * delta * w[a]
            else:
                mover += prob * ((1 - delta) * flow + delta * w[a])
            other += prob * w[1 - a]
        self._busy.discard(key)
        out = (mover, other) if a == 0 else (other, mover)
        memo[key] = out
        return out

    def _solve_graph(self, h0, s0, good):
        """Linear solve over the finite reachable state graph (used when signatures cycle)."""
        delta = self.params.discount
        index, nodes, rows = {}, [], []
        start = self._key(h0, s0, good)
        index[start] = 0
        nodes.append((h0, s0))
        k = 0
        while k < len(nodes):
            h, s = nodes[k]
            key = self._key(h, s, good)
            known = self._memo.get(key)
            if known is None:
                known = self._leaf(h, s, good)
            if known is not None:
                rows.append(("fixed", known))
            else:
                edges = []
                for prob, child, flags, flow in self.transitions(h, s, good):
                    ck = self._key(child, flags, good)
                    if ck not in index:
                        if len(nodes) >= MAX_GRAPH_NODES:
                            raise UnclassifiableTail("state graph too large to solve")
                        index[ck] = len(nodes)
                        nodes.append((child, flags))
                    edges.append((prob, index[ck], flow))
                rows.append(("node", h.active, edges))
            k += 1
        n = len(nodes)
        solution = []
        for player in (0, 1):
            r, c, v = [], [], []
            rhs = np.zeros(n)
            for i, row in enumerate(rows):
                if row[0] == "fixed":
                    rhs[i] = row[1][player]
                    continue
                _, active, edges = row
                for prob, j, flow in edges:
                    coef = prob * delta if active == player else prob
                    r.append(i)
                    c.append(j)
                    v.append(coef)
                    if active == player and flow is not None:
                        rhs[i] += prob * (1 - delta) * flow
            a = identity(n, format="csr") - csr_matrix((v, (r, c)), shape=(n, n))
            solution.append(np.atleast_1d(spsolve(a.tocsc(), rhs)))
        for i, (h, s) in enumerate(nodes):
            self._memo[self._key(h, s, good)] = (float(solution[0][i]), float(solution[1][i]))

    # -- player-level quantities -------------------------------------------------

    def _weights(self, i, p, q):
        """(weight, flags, good) over the opponent's success and the state, own flag off."""
        out = []
        for won, w_good in ((True, p * q), (False, p * (1 - q))):
            if w_good > 0:
                flags = [False, False]
                flags[1 - i] = won
                out.append((w_good, tuple(flags), True))
        if p < 1:
            out.append((1 - p, (False, False), False))
        return out

    def action_values(self, h, p, q):
        """Continuation value of R and of S for the never-successful active player."""
        i = h.active
        lam, delta = self.params.success_rate, self.params.discount
        hr, hs = h.extend(RISKY), h.extend(SAFE)
        risky = safe = 0.0
        for w, flags, good in self._weights(i, p, q):
            flow = self._flow[good]
            if good:
                won = list(flags)
                won[i] = True
                cont = lam * self.values(hr, tuple(won), True)[i] + (1 - lam) * self.values(hr, flags, True)[i]
            else:
                cont = self.values(hr, flags, False)[i]
            risky += w * ((1 - delta) * flow + delta * cont)
            safe += w * delta * self.values(hs, flags, good)[i]
        return {RISKY: risky, SAFE: safe}

    def node_value(self, h, p, q):
        """Value of following the profile at ``h`` for the active player with belief (p, q)."""
        i = h.active
        return sum(w * self.values(h, flags, good)[i] for w, flags, good in self._weights(i, p, q))

    # -- play in the bad state ---------------------------------------------------

    def terminals_given_bad(self, h0=EMPTY):
        """Absorption distribution of play in the bad state: list of ``Terminal``."""
        s = (False, False)
        index, nodes, exits, edges = {}, [], {}, []
        def key(h):
            return (self.profile.signature(h), h.n_experiments)
        index[key(h0)] = 0
        nodes.append(h0)
        k = 0
        while k < len(nodes):
            h = nodes[k]
            tail = None
            if len(h) >= self.horizon:
                tail = self.classify(h, s, False)
                if tail is None and len(h) >= self.cap:
                    raise UnclassifiableTail(f"play after {h!r} does not settle within {self.cap} moves")
            if tail is not None:
                kind = "R" if any(v != 0.0 for v in tail) else "S"
                exits[k] = kind
            else:
                for prob, child, _, _ in self.transitions(h, s, False):
                    ck = key(child)
                    if ck not in index:
                        if len(nodes) >= MAX_GRAPH_NODES:
                            raise UnclassifiableTail("state graph too large")
                        index[ck] = len(nodes)
                        nodes.append(child)
                    edges.append((k, index[ck], prob))
            k += 1
        n = len(nodes)
        graph = csr_matrix(([1.0] * len(edges), ([e[0] for e in edges], [e[1] for e in edges])), shape=(n, n))
        # closed classes of the state graph are loops of S with nothing left to learn
        _, label = connected_components(graph, directed=True, connection="strong")
        leaves = {label[a] for a, b, _ in edges if label[a] != label[b]}
        for k in range(n):
            if k not in exits and label[k] not in leaves and any(a == k for a, _, _ in edges):
                exits[k] = "S"
        edges = [e for e in edges if e[0] not in exits]
        q = csr_matrix(([e[2] for e in edges], ([e[0] for e in edges], [e[1] for e in edges])), shape=(n, n))
        start = np.zeros(n)
        start[0] = 1.0
        # expected visits; exits are absorbing so their visit count is the exit probability
        reach = np.atleast_1d(spsolve((identity(n, format="csc") - q.T.tocsc()), start))
        out = []
        for t in sorted(exits):
            h = nodes[t]
            kind = exits[t]
            count = h.n_experiments if kind == "S" else math.inf
            out.append(Terminal(h, float(reach[t]), count, kind))
        return out

    def experiments_given_bad(self, h0=EMPTY, tol=1e-14):
        dist = {}
        for t in self.terminals_given_bad(h0):
            if t.probability > tol:
                dist[t.experiments] = dist.get(t.experiments, 0.0) + t.probability
        return dict(sorted(dist.items()))

    def report(self):
        p0 = self.params.prior
        good, bad = self.values(EMPTY, (False, False), True), self.values(EMPTY, (False, False), False)
        terminals = self.terminals_given_bad()
        dist, settle = {}, {"S": 0.0, "R": 0.0}
        for t in terminals:
            if t.probability > 1e-14:
                dist[t.experiments] = dist.get(t.experiments, 0.0) + t.probability
                settle[t.settles_on] += t.probability
        return PayoffReport(
            gamma1=p0 * good[0] + (1 - p0) * bad[0],
            gamma2=p0 * good[1] + (1 - p0) * bad[1],
            good=good,
            bad=bad,
            experiments_given_bad=dict(sorted(dist.items())),
            settles_given_bad=settle,
            profile=self.profile.name,
            params=self.params.to_dict(),
        )


def eval_profile(profile, horizon=None):
    """Payoff report of ``profile`` from the empty history."""
    return Evaluator(profile, horizon=horizon).report()
