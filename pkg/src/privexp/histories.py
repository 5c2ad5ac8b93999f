"""Public histories over {S, R} and the compact string notation for them.

Player 1 moves at even lengths and player 2 at odd lengths.  A ``History``
carries, per player, the number of experiments and the length of the trailing
run of R choices (experiments not yet disclosed by a later S).
"""

from __future__ import annotations

import re

from .errors import ParseError

SAFE, RISKY = "S", "R"
ACTIONS = (SAFE, RISKY)


class History:
    __slots__ = ("actions", "experiments", "trailing", "last")

    def __init__(self, actions="", experiments=(0, 0), trailing=(0, 0), last=(None, None)):
        self.actions = actions
        self.experiments = experiments
        self.trailing = trailing
        self.last = last

    @classmethod
    def of(cls, actions):
        h = EMPTY
        for a in actions:
            h = h.extend(a)
        return h

    def extend(self, action):
        i = len(self.actions) % 2
        exp, run, last = list(self.experiments), list(self.trailing), list(self.last)
        if action == RISKY:
            exp[i] += 1
            run[i] += 1
        elif action == SAFE:
            run[i] = 0
        else:
            raise ValueError(f"unknown action {action!r}")
        last[i] = action
        return History(self.actions + action, tuple(exp), tuple(run), tuple(last))

    @property
    def active(self):
        """Index (0 or 1) of the player who moves next."""
        return len(self.actions) % 2

    @property
    def active_player(self):
        return self.active + 1

    @property
    def n_experiments(self):
        return self.experiments[0] + self.experiments[1]

    def undisclosed(self, i):
        return self.trailing[i]

    def disclosed(self, i):
        return self.experiments[i] - self.trailing[i]

    def own_actions(self, i):
        return self.actions[i::2]

    def __len__(self):
        return len(self.actions)

    def __eq__(self, other):
        return isinstance(other, History) and self.actions == other.actions

    def __hash__(self):
        return hash(self.actions)

    def __repr__(self):
        return f"History({render(self) or '∅'!s})"

    def __str__(self):
        return render(self)


EMPTY = History()


def counters_from_scratch(actions):
    """Recompute (experiments, trailing) without incremental bookkeeping."""
    exp, run = [0, 0], [0, 0]
    for i in (0, 1):
        own = actions[i::2]
        exp[i] = own.count(RISKY)
        run[i] = len(own) - len(own.rstrip(RISKY))
    return tuple(exp), tuple(run)


# -- compact notation ----------------------------------------------------------

SEPARATORS = ("·", ".")


def parse(text, star=0):
    """Expand compact notation such as ``(RR)^2·S`` or ``RS·RR·S``.

    ``X^k`` repeats X k times; ``X*`` repeats it ``star`` times (a finite
    stand-in for an infinite tail).  ``·`` and ``.`` are ignored separators.
    """
    data = text.encode("utf-8")
    pos = 0

    def offset():
        return len(text[:pos].encode("utf-8"))

    def peek():
        return text[pos] if pos < len(text) else ""

    def sequence(closing):
        nonlocal pos
        out = []
        while pos < len(text):
            ch = peek()
            if ch == ")":
                if not closing:
                    raise ParseError("unmatched ')'", offset())
                return "".join(out)
            if ch in SEPARATORS:
                pos += 1
                continue
            if ch in ACTIONS:
                pos += 1
                atom = ch
            elif ch == "(":
                pos += 1
                atom = sequence(True)
                if peek() != ")":
                    raise ParseError("missing ')'", offset())
                pos += 1
            else:
                raise ParseError(f"unexpected character {ch!r}", offset())
            out.append(atom * repetitions())
        if closing:
            raise ParseError("missing ')'", len(data))
        return "".join(out)

    def repetitions():
        nonlocal pos
        if peek() == "*":
            pos += 1
            return star
        if peek() != "^":
            return 1
        pos += 1
        if peek() == "*":
            pos += 1
            return star
        m = re.match(r"\d+", text[pos:])
        if not m:
            raise ParseError("expected a repetition count after '^'", offset())
        pos += m.end()
        return int(m.group())

    return History.of(sequence(False))


def render(h):
    """Canonical compact form: periods joined by ``·``, runs of equal periods as ``(XY)^k``."""
    actions = h.actions if isinstance(h, History) else h
    periods = [actions[k:k + 2] for k in range(0, len(actions), 2)]
    parts, k = [], 0
    while k < len(periods):
        run = 1
        while k + run < len(periods) and periods[k + run] == periods[k] and len(periods[k]) == 2:
            run += 1
        parts.append(f"({periods[k]})^{run}" if run > 1 else periods[k])
        k += run
    return "·".join(parts)


def all_histories(depth, root=EMPTY):
    """Every history extending ``root`` by at most ``depth - len(root)`` moves, shortest first."""
    level = [root]
    while level:
        yield from level
        if len(level[0]) >= depth:
            break
        level = [h.extend(a) for h in level for a in ACTIONS]
