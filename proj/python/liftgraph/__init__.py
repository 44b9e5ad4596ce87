"""Hierarchical graph classification with lifting-based pooling."""

from ._liftgraph import *  # noqa: F401,F403
from ._liftgraph import (
    ConfigError,
    Dataset,
    Graph,
    ModelConfig,
    Params,
    ParseError,
    PoolConfig,
    ShapeError,
    TrainConfig,
)

__version__ = "0.1.0"


def cycle(n):
    """C_n with the one-hot degree features of the synthetic dataset."""
    g = make_cycle(n)  # noqa: F405
    g.features = degree_one_hot(g, 3, 2)  # noqa: F405
    return g


def path(n):
    """P_n with the one-hot degree features of the synthetic dataset."""
    g = make_path(n)  # noqa: F405
    g.features = degree_one_hot(g, 3, 2)  # noqa: F405
    return g
