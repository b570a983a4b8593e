"""Risk-aware reranking, calibration and evaluation for stochastic rankers."""

from .core import Qrels, RankedList, SampleRun
from .errors import DomainError, FormatError, ParseError

__version__ = "0.1.0"
