"""Bayesian additive regression trees with partially fixed top layers."""

from pfbart.constraints import FixedLayerPolicy
from pfbart.priors import Hyperparams
from pfbart.sampler import SamplerConfig, Trace, predict, run_chain, variable_frequency
from pfbart.tree import Internal, Leaf, SplitRule, Tree

__all__ = [
    "FixedLayerPolicy",
    "Hyperparams",
    "Internal",
    "Leaf",
    "SamplerConfig",
    "SplitRule",
    "Trace",
    "Tree",
    "predict",
    "run_chain",
    "variable_frequency",
]

__version__ = "0.1.0"
