"""Exact domination and bondage computations on random graphs."""

__version__ = "0.1.0"

from .errors import BondlabError, CapacityError, DomainError
from .graph import Graph, PairSet, RandomSource, process_stream, sample_gnm, sample_gnp

__all__ = [
    "__version__",
    "BondlabError",
    "CapacityError",
    "DomainError",
    "Graph",
    "PairSet",
    "RandomSource",
    "process_stream",
    "sample_gnm",
    "sample_gnp",
]
