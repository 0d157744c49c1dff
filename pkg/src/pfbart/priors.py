"""Hyperparameters, their data-driven calibration, and the tree prior."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import stats

from pfbart.constraints import FixedLayerPolicy, allowed_variables, split_probability
from pfbart.tree import Tree


@dataclass(frozen=True)
class Hyperparams:
    """Prior constants.

    ``mu_mu``, ``sigma_mu`` and ``lam`` are left as ``None`` until
    :func:`calibrate` fills them from the (standardised) response.
    """

    alpha: float = 0.95
    beta: float = 2.0
    m: int = 200
    k: float = 2.0
    nu: float = 3.0
    q: float = 0.90
    mu_mu: float | None = None
    sigma_mu: float | None = None
    lam: float | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.k <= 0 or self.nu <= 0:
            raise ValueError("k and nu must be positive")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.sigma_mu is not None and self.sigma_mu <= 0:
            raise ValueError("sigma_mu must be positive")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be positive")

    @property
    def calibrated(self) -> bool:
        return None not in (self.mu_mu, self.sigma_mu, self.lam)


def derive_leaf_prior(y, m: int, k: float) -> tuple[float, float]:
    """Leaf prior ``(mu_mu, sigma_mu)`` for a response standardised to [-0.5, 0.5].

    The sum of ``m`` leaf values then has prior sd ``0.5 / k``, i.e. the
    data half-range sits ``k`` standard deviations from the centre.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0 or not y.max() > y.min():
        raise ValueError("leaf prior needs a non-constant response")
    return 0.0, 0.5 / (k * math.sqrt(m))


def derive_sigma_prior(y, nu: float, q: float) -> float:
    """Scale ``lam`` such that ``P(sigma < sd(y)) = q`` under ``sigma^2 ~ nu*lam/chi2_nu``."""
    y = np.asarray(y, dtype=float)
    s = float(np.std(y, ddof=1)) if y.size > 1 else 0.0
    if not s > 0:
        raise ValueError("sigma prior needs a response with positive sample sd")
    return s * s * float(stats.chi2.ppf(1.0 - q, nu)) / nu


def calibrate(hp: Hyperparams, y_std) -> Hyperparams:
    """Fill any unset data-dependent constants from the standardised response."""
    mu_mu, sigma_mu = derive_leaf_prior(y_std, hp.m, hp.k)
    return replace(
        hp,
        mu_mu=mu_mu if hp.mu_mu is None else hp.mu_mu,
        sigma_mu=sigma_mu if hp.sigma_mu is None else hp.sigma_mu,
        lam=derive_sigma_prior(y_std, hp.nu, hp.q) if hp.lam is None else hp.lam,
    )


def splittable_variables(
    policy: FixedLayerPolicy, depth: int, grids: Sequence[np.ndarray]
) -> list[int]:
    """Allowed variables at ``depth`` that have at least one cutpoint, sorted."""
    allowed = allowed_variables(policy, depth, len(grids))
    return sorted(v for v in allowed if len(grids[v]) > 0)


def node_split_probability(
    policy: FixedLayerPolicy,
    depth: int,
    hp: Hyperparams,
    grids: Sequence[np.ndarray],
    max_depth: int | None = None,
) -> float:
    """Split probability, zero where nothing can split or beyond ``max_depth``."""
    if max_depth is not None and depth >= max_depth:
        return 0.0
    if not splittable_variables(policy, depth, grids):
        return 0.0
    return split_probability(policy, depth, hp.alpha, hp.beta)


def log_tree_prior(
    tree: Tree,
    policy: FixedLayerPolicy,
    hp: Hyperparams,
    grids: Sequence[np.ndarray],
    max_depth: int | None = None,
) -> float:
    """Log prior probability of the tree's structure and split rules.

    Each internal node contributes its split probability times a uniform
    choice over the splittable allowed variables and over that variable's
    grid; each leaf contributes the probability of not splitting.
    ``max_depth`` truncates the split probability to zero at that depth.
    """
    total = 0.0
    for path, node in tree.nodes():
        depth = len(path)
        ps = node_split_probability(policy, depth, hp, grids, max_depth)
        if node.is_leaf:
            total += math.log1p(-ps) if ps > 0 else 0.0
            continue
        v, c = node.rule.variable, node.rule.cutpoint
        choices = splittable_variables(policy, depth, grids)
        if ps == 0.0 or v not in choices:
            raise ValueError(f"rule on covariate {v} at {path!r} is not allowed")
        grid = grids[v]
        pos = int(np.searchsorted(grid, c))
        if pos >= len(grid) or grid[pos] != c:
            raise ValueError(f"cutpoint {c} is not on the grid of covariate {v}")
        total += math.log(ps) - math.log(len(choices)) - math.log(len(grid))
    return total
