"""Two-player strategic experimentation with privately observed payoffs."""

from .errors import (
    EmptyRegion,
    GenericityViolation,
    HorizonExceeded,
    HypothesisViolated,
    NotAnEquilibrium,
    OutsideRegion,
    ParseError,
    PriorTooLow,
    RootNotBracketed,
    UnclassifiableTail,
)
from .histories import EMPTY, History, parse, render
from .model import CutoffSet, ModelParams, cutoff_set

__version__ = "0.1.0"
