"""Model primitives, the failure update on beliefs, cutoffs and experiment counts.

Beliefs are probabilities that the risky arm is good.  A failed experiment
multiplies the likelihood ratio p / (1 - p) by (1 - success_rate); all ladder
arithmetic runs in that space so that n-fold updates cost one power.

Every function accepts floats, and also ``fractions.Fraction`` parameters for
the exact-rational mode used by oracle tests (the planner cutoff is the one
exception, since it needs a square root).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Real

from .errors import GenericityViolation

GENERICITY_BAND = 1e-9
LIMIT_INDEX = 10**6


@dataclass(frozen=True)
class ModelParams:
    success_rate: Real
    discount: Real
    cost: Real
    prize: Real
    prior: Real
    sqrt_discount: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("success_rate", "discount", "prior"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {value}")
        for name in ("cost", "prize"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not self.gain > 0:
            raise ValueError(
                f"net flow gain success_rate*prize - cost must be positive, got {self.gain}"
            )
        object.__setattr__(self, "sqrt_discount", math.sqrt(self.discount))

    @property
    def gain(self):
        return self.success_rate * self.prize - self.cost

    @property
    def exact(self):
        return all(
            isinstance(v, Fraction)
            for v in (self.success_rate, self.discount, self.cost, self.prize)
        )

    def with_prior(self, prior):
        return replace(self, prior=prior)

    def as_tuple(self):
        return (self.success_rate, self.discount, self.cost, self.prize, self.prior)

    def to_dict(self):
        return {
            "lambda": float(self.success_rate),
            "delta": float(self.discount),
            "c": float(self.cost),
            "m": float(self.prize),
            "p0": float(self.prior),
            "g": float(self.gain),
        }

    @classmethod
    def from_string(cls, text):
        """Build from the comma list ``lambda,delta,c,m,p0`` used on the command line."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 5:
            raise ValueError(f"expected five comma-separated values lambda,delta,c,m,p0, got {text!r}")
        return cls(*(float(s) for s in parts))


DEFAULT_PARAMS = ModelParams(0.2, 0.9, 1.0, 10.0, 0.6)


# -- belief ladder -----------------------------------------------------------

def likelihood_ratio(p):
    if p == 1:
        return math.inf
    return p / (1 - p)


def from_likelihood_ratio(lr):
    if lr == math.inf:
        return 1
    return lr / (1 + lr)


def after_failure(p, params):
    """Posterior that the arm is good after one failed experiment."""
    return after_failures(p, 1, params)


def after_failures(p, n, params):
    """Posterior after ``n`` failed experiments, computed in one step."""
    if n < 0:
        raise ValueError("number of failures must be non-negative")
    if p == 1 or n == 0:
        return p
    lr = likelihood_ratio(p) * (1 - params.success_rate) ** n
    return from_likelihood_ratio(lr)


def before_failure(p, params, allow_fixed_point=False):
    """The unique belief that one failure maps to ``p``."""
    if p == 1:
        if allow_fixed_point:
            return p
        raise ValueError("belief 1 is a fixed point of the failure update; pass allow_fixed_point=True")
    return from_likelihood_ratio(likelihood_ratio(p) / (1 - params.success_rate))


# -- cutoffs -----------------------------------------------------------------

def _threshold(params, weight):
    """Belief solving c(1-d)(1-p) = g * weight * p with d the per-period discount."""
    c, d = params.cost, params.discount
    return c * (1 - d) / (c * (1 - d) + params.gain * weight)


def stopping_cutoff(params, discount=None):
    """One-player cutoff: experiment once more iff the belief is at least this."""
    d = params.discount if discount is None else discount
    lam, c = params.success_rate, params.cost
    return c * (1 - d) / (c * (1 - d) + params.gain * (1 - d * (1 - lam)))


def planner_cutoff(params):
    return stopping_cutoff(params, params.sqrt_discount)


def dominance_cutoff(params):
    """Below this belief the safe arm is dominant whatever the opponent does."""
    lam, d, c, m = params.success_rate, params.discount, params.cost, params.prize
    return c * (1 - d) / ((1 - d) * lam * m + d * params.gain)


def myopic_cutoff(params):
    return params.cost / (params.success_rate * params.prize)


def encouragement_cutoff(params, n=0):
    """Cutoff of the trade "one more own experiment buys one more opponent experiment".

    ``n`` counts opponent experiments whose outcome is still undisclosed.
    """
    lam, d = params.success_rate, params.discount
    if n == 0:
        return _threshold(params, 1 - d + lam * d * (1 + d - lam * d))
    decay = 0 if n > LIMIT_INDEX else (1 - lam) ** n
    weight = (1 - d) * (1 - d + lam * d) + d * (1 - d * (1 - lam) ** 2) * decay
    return _threshold(params, weight)


def disclosure_cutoff(params, n=0):
    """Cutoff when the opponent reveals ``n`` undisclosed outcomes next period whatever we do."""
    lam, d = params.success_rate, params.discount
    if n > LIMIT_INDEX:
        return myopic_cutoff(params)
    return _threshold(params, 1 - d + d * lam * (1 - lam) ** n)


def joint_reveal_cutoff(params):
    """Cutoff at which an experiment now and the opponent's next are jointly worth their cost."""
    lam, d = params.success_rate, params.discount
    return _threshold(params, 1 - d * (1 - lam) ** 2)


# -- counts ------------------------------------------------------------------

def failures_until_below(p0, cutoff, params, start=0):
    """Smallest n >= start with after_failures(p0, n) < cutoff (math.inf if never)."""
    if p0 == 1:
        return math.inf
    lr0, lr_cut = likelihood_ratio(p0), likelihood_ratio(cutoff)
    if lr0 < lr_cut:
        n = 0
    else:
        n = max(0, math.floor(math.log(float(lr_cut / lr0)) / math.log(float(1 - params.success_rate))))
        # floating log can be off by one either way
        while n > 0 and after_failures(p0, n - 1, params) < cutoff:
            n -= 1
        while not after_failures(p0, n, params) < cutoff:
            n += 1
    return max(n, start)


def check_genericity(p0, cutoff, count, params, label):
    """Warn if a belief on the ladder next to the crossing sits inside the tolerance band."""
    near = [count - 1, count] if count > 0 else [0]
    for k in near:
        if k >= 0 and abs(float(after_failures(p0, k, params)) - float(cutoff)) <= GENERICITY_BAND:
            warnings.warn(
                f"belief after {k} failures is within {GENERICITY_BAND} of {label}",
                GenericityViolation,
                stacklevel=3,
            )
            return True
    return False


def at_least(p, cutoff, label="cutoff"):
    """Generic comparison p >= cutoff; warns when p is inside the tolerance band."""
    if p != 1 and abs(float(p) - float(cutoff)) <= GENERICITY_BAND:
        warnings.warn(f"belief {p} is within {GENERICITY_BAND} of {label}", GenericityViolation, stacklevel=2)
    return p >= cutoff


@dataclass(frozen=True)
class CutoffSet:
    p_star: float
    p_star_social: float
    p_tilde: float
    p_hat: float
    p_myop: float
    p_bar: float
    p_hat_n: tuple
    p_star_n: tuple
    N_star: int
    N_star_social: int
    N_tilde: int
    N_hat: int
    generic: bool = True

    def to_dict(self):
        out = {k: getattr(self, k) for k in (
            "p_star", "p_star_social", "p_tilde", "p_hat", "p_myop", "p_bar",
            "N_star", "N_star_social", "N_tilde", "N_hat", "generic")}
        out = {k: (float(v) if isinstance(v, Fraction) else v) for k, v in out.items()}
        out["p_hat_n"] = [float(v) for v in self.p_hat_n]
        out["p_star_n"] = [float(v) for v in self.p_star_n]
        return out

    def orderings(self, params):
        """Named ordering checks with their truth values."""
        hat, social = self.p_hat, self.p_star_social
        return {
            "p_tilde < p_hat < p_star": self.p_tilde < hat < self.p_star,
            "fail^2(p_hat) < p_star_social < p_hat": after_failures(hat, 2, params) < social < hat,
            "p_star_social < p_star": social < self.p_star,
            "p_star_social <= p_bar < p_hat": social <= self.p_bar < hat,
            "p_star < p_myop": self.p_star < self.p_myop,
            "p_hat_n increasing": all(a < b for a, b in zip(self.p_hat_n, self.p_hat_n[1:])),
            "p_star_n increasing": all(a < b for a, b in zip(self.p_star_n, self.p_star_n[1:])),
            "N_star_social - 2 <= N_hat <= N_star_social": self.N_star_social - 2 <= self.N_hat <= self.N_star_social,
        }


def experiment_counts(params):
    """(N_star, N_star_social, N_tilde, N_hat, generic) for the prior in ``params``."""
    p0 = params.prior
    cuts = {
        "N_star": (stopping_cutoff(params), 0),
        "N_star_social": (planner_cutoff(params), 0),
        "N_tilde": (dominance_cutoff(params), 0),
        "N_hat": (encouragement_cutoff(params), 1),
    }
    counts, generic = {}, True
    for name, (cut, start) in cuts.items():
        n = failures_until_below(p0, cut, params)
        if check_genericity(p0, cut, n, params, name):
            generic = False
        counts[name] = max(n, start)
    return counts, generic


def cutoff_set(params, n_max=50):
    counts, generic = experiment_counts(params)
    return CutoffSet(
        p_star=stopping_cutoff(params),
        p_star_social=planner_cutoff(params),
        p_tilde=dominance_cutoff(params),
        p_hat=encouragement_cutoff(params),
        p_myop=myopic_cutoff(params),
        p_bar=joint_reveal_cutoff(params),
        p_hat_n=tuple(encouragement_cutoff(params, n) for n in range(n_max + 1)),
        p_star_n=tuple(disclosure_cutoff(params, n) for n in range(n_max + 1)),
        generic=generic,
        **counts,
    )
