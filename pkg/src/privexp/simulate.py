"""Monte Carlo play of a strategy profile.

Runs advance in lockstep.  At each move the live runs are grouped by (public
history, success flags, state) so the profile is queried once per group.  A run
stops as soon as its continuation is deterministic and constant, and the exact
tail value is added instead of simulating it.  Runs still randomizing at the
horizon receive their exact conditional continuation value, and in the bad
state their exact distribution of further experiments.

Randomness is a single Philox stream: run ``r`` owns the stream positions
``[r*K, (r+1)*K)`` with ``K = 1 + 2 * horizon``, so results do not depend on
how runs are chunked.  Position 0 of a run draws the state, position ``1 + 2t``
the mixed choice at move ``t`` and ``2 + 2t`` the outcome of an experiment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from .evaluator import Evaluator
from .histories import EMPTY, RISKY, SAFE

CHUNK = 4096


@dataclass
class SimConfig:
    profile: object
    runs: int = 100_000
    seed: int = 0
    horizon: int | None = None
    theta: str | None = None  # "G", "B" or None to draw from the prior

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be positive")
        if self.theta not in (None, "G", "B"):
            raise ValueError("theta must be 'G', 'B' or None")

    @property
    def params(self):
        return self.profile.params


@dataclass
class SimResult:
    runs: int
    seed: int
    mean: tuple
    stderr: tuple
    experiments: dict = field(default_factory=dict)
    settles: dict = field(default_factory=dict)
    mean_settle_move: float = math.nan
    profile: str = ""

    def to_dict(self):
        return {
            "format": "simulation/1",
            "profile": self.profile,
            "runs": self.runs,
            "seed": self.seed,
            "gamma1": {"mean": self.mean[0], "stderr": self.stderr[0]},
            "gamma2": {"mean": self.mean[1], "stderr": self.stderr[1]},
            "experiments": {th: {str(k): v for k, v in sorted(d.items(), key=_count_order)}
                            for th, d in self.experiments.items()},
            "settles": self.settles,
            "mean_settle_move": self.mean_settle_move,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _count_order(item):
    # numeric counts first (inf last among them), then labels such as "truncated"
    key = item[0]
    return (1, 0.0, key) if isinstance(key, str) else (0, key, "")


def uniforms(seed, first_run, runs, width):
    """Rows ``first_run .. first_run+runs-1`` of the run-by-position uniform table."""
    start = first_run * width
    gen = Generator(Philox(key=seed, counter=[start // 4, 0, 0, 0]))
    if start % 4:
        gen.random(start % 4)
    return gen.random(runs * width).reshape(runs, width)


class _Tree:
    """Representative histories by id.

    Histories with the same profile signature continue identically, so they
    share an id; whether the history has reached the classification horizon is
    part of the key.
    """

    def __init__(self, profile, horizon):
        self.profile = profile
        self.horizon = horizon
        self.nodes = [EMPTY]
        self.ids = {self._key(EMPTY): 0}
        self.children = {}

    def _key(self, h):
        return (self.profile.signature(h), len(h) >= self.horizon)

    def child(self, node, action):
        hit = self.children.get((node, action))
        if hit is None:
            h = self.nodes[node].extend(action)
            hit = self.ids.setdefault(self._key(h), len(self.nodes))
            if hit == len(self.nodes):
                self.nodes.append(h)
            self.children[(node, action)] = hit
        return hit


def simulate(config):
    profile, params = config.profile, config.params
    ev = Evaluator(profile)
    horizon = config.horizon or ev.horizon + ev.lookahead
    width = 1 + 2 * horizon
    tree = _Tree(profile, ev.horizon)
    tails = {}

    def tail(node, s1, s2, good):
        key = (node, s1, s2, good)
        if key not in tails:
            flags = (bool(s1), bool(s2))
            h = tree.nodes[node]
            t = ev._immediate_tail(flags, bool(good))
            if t is None and len(h) >= ev.horizon:
                t = ev.classify(h, flags, bool(good))
            tails[key] = t
        return tails[key]

    def decide(node, s1, s2):
        return ev.prob_risky(tree.nodes[node], (bool(s1), bool(s2)))

    pay = np.zeros((config.runs, 2))
    count = np.zeros(config.runs, dtype=np.int64)
    infinite = np.zeros(config.runs, dtype=bool)
    settled_on = np.zeros(config.runs, dtype="<U1")
    settle_move = np.zeros(config.runs, dtype=np.int64)
    goods = np.zeros(config.runs, dtype=bool)
    truncated = []
    lam, delta = params.success_rate, params.discount
    flow = {True: params.success_rate * params.prize - params.cost, False: -params.cost}

    for first in range(0, config.runs, CHUNK):
        n = min(CHUNK, config.runs - first)
        u = uniforms(config.seed, first, n, width)
        if config.theta is None:
            good = u[:, 0] < params.prior
        else:
            good = np.full(n, config.theta == "G")
        goods[first:first + n] = good
        node = np.zeros(n, dtype=np.int64)
        flags = np.zeros((n, 2), dtype=bool)
        live = np.ones(n, dtype=bool)
        rows = np.arange(n)
        for t in range(horizon + 1):
            idx = rows[live]
            if idx.size == 0:
                break
            mover = t % 2
            # own-move index of each player's next move; player 1 moves at even t
            next_own = np.array([(t + 1) // 2, t // 2])
            disc = delta ** next_own
            key = node[idx] * 8 + flags[idx, 0] * 4 + flags[idx, 1] * 2 + good[idx]
            groups, inverse = np.unique(key, return_inverse=True)
            prob = np.empty(groups.size)
            done = np.zeros(groups.size, dtype=bool)
            tail_vals = np.zeros((groups.size, 2))
            for g, k in enumerate(groups):
                nd, s1, s2, gd = int(k) // 8, (k >> 2) & 1, (k >> 1) & 1, k & 1
                tv = tail(nd, s1, s2, gd)
                if tv is not None:
                    done[g] = True
                    tail_vals[g] = tv
                else:
                    prob[g] = decide(nd, s1, s2)
            stop = done[inverse]
            if stop.any():
                ended = idx[stop]
                pay[first + ended] += tail_vals[inverse[stop]] * disc
                tv = tail_vals[inverse[stop]]
                risky_tail = (tv != 0).any(axis=1)
                infinite[first + ended] = risky_tail & ~good[ended]
                settled_on[first + ended] = np.where(risky_tail, "R", "S")
                settle_move[first + ended] = t
                live[ended] = False
            idx, inv = idx[~stop], inverse[~stop]
            if idx.size == 0:
                break
            if t == horizon:
                # still mixing: add the exact continuation instead of simulating further
                for g in np.unique(inv):
                    sel = idx[inv == g]
                    k = int(groups[g])
                    h, flags_g, gd = tree.nodes[k // 8], (bool(k & 4), bool(k & 2)), bool(k & 1)
                    pay[first + sel] += np.asarray(ev.values(h, flags_g, gd)) * disc
                    truncated.append((first + sel, h if not gd else None))
                    settle_move[first + sel] = t
                break
            risky = u[idx, 1 + 2 * t] < prob[inv]
            # flow to the mover, discounted to his own move index
            own = t // 2
            pay[first + idx[risky], mover] += (1 - delta) * delta ** own * np.where(good[idx[risky]], flow[True], flow[False])
            count[first + idx[risky]] += 1
            success = risky & good[idx] & (u[idx, 2 + 2 * t] < lam)
            flags[idx[success], mover] = True
            for g in np.unique(inv):
                sel = inv == g
                parent = int(groups[g]) // 8
                if (sel & risky).any():
                    node[idx[sel & risky]] = tree.child(parent, RISKY)
                if (sel & ~risky).any():
                    node[idx[sel & ~risky]] = tree.child(parent, SAFE)

    n = config.runs
    mean = pay.mean(axis=0)
    stderr = pay.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(2)
    cut = np.zeros(config.runs, dtype=bool)
    for rows_cut, _ in truncated:
        cut[rows_cut] = True
    hist = {}
    for label, mask in (("G", goods), ("B", ~goods)):
        mask = mask & ~cut
        counts = np.where(infinite[mask], -1, count[mask])
        values, freq = np.unique(counts, return_counts=True)
        hist[label] = {(math.inf if v == -1 else int(v)): float(f) for v, f in zip(values, freq)}
    for rows_cut, h in truncated:
        if h is None:
            hist["G"]["truncated"] = hist["G"].get("truncated", 0.0) + len(rows_cut)
            continue
        # Rao-Blackwellized: spread each run over the exact absorption distribution
        for k, w in ev.experiments_given_bad(h).items():
            hist["B"][k] = hist["B"].get(k, 0.0) + w * len(rows_cut)
    hist = {k: v for k, v in hist.items() if v}
    bad = ~goods
    settles = {}
    for label, mask in (("G", goods), ("B", bad)):
        if mask.any():
            settles[label] = {k: float(np.mean(settled_on[mask] == k)) for k in ("S", "R")}
    return SimResult(
        runs=n,
        seed=config.seed,
        mean=(float(mean[0]), float(mean[1])),
        stderr=(float(stderr[0]), float(stderr[1])),
        experiments=hist,
        settles=settles,
        mean_settle_move=float(settle_move[bad].mean()) if bad.any() else math.nan,
        profile=profile.name,
    )
