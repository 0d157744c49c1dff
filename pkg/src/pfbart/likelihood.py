"""Conjugate closed forms for the leaf values and the noise variance."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from pfbart.priors import Hyperparams

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LeafSuffStats:
    n: int
    sum_r: float
    sum_r2: float

    @classmethod
    def from_residuals(cls, r) -> LeafSuffStats:
        r = np.asarray(r, dtype=float)
        return cls(int(r.size), float(r.sum()), float(r @ r))


def _require_calibrated(hp: Hyperparams) -> None:
    if not hp.calibrated:
        raise ValueError("hyperparameters are not calibrated; call priors.calibrate first")


def leaf_log_marginal(
    n: int, sum_r: float, sum_r2: float, sigma2: float, mu_mu: float, tau2: float
) -> float:
    """Log density of ``n`` residuals with their shared mean integrated out.

    Model: ``r_i ~ N(mu, sigma2)`` i.i.d. given ``mu ~ N(mu_mu, tau2)``.
    """
    if n == 0:
        return 0.0
    prec = n / sigma2 + 1.0 / tau2
    lin = sum_r / sigma2 + mu_mu / tau2
    return (
        -0.5 * n * (_LOG_2PI + math.log(sigma2))
        - 0.5 * math.log1p(n * tau2 / sigma2)
        - 0.5 * sum_r2 / sigma2
        - 0.5 * mu_mu * mu_mu / tau2
        + 0.5 * lin * lin / prec
    )


def log_marginal_likelihood(stats: Iterable[LeafSuffStats], sigma: float, hp: Hyperparams) -> float:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    _require_calibrated(hp)
    sigma2 = sigma * sigma
    tau2 = hp.sigma_mu * hp.sigma_mu
    return sum(
        leaf_log_marginal(s.n, s.sum_r, s.sum_r2, sigma2, hp.mu_mu, tau2) for s in stats
    )


def leaf_posterior_params(
    n: int, sum_r: float, sigma2: float, mu_mu: float, tau2: float
) -> tuple[float, float]:
    denom = n * tau2 + sigma2
    return (tau2 * sum_r + sigma2 * mu_mu) / denom, sigma2 * tau2 / denom


def leaf_posterior(stats: LeafSuffStats, sigma: float, hp: Hyperparams) -> tuple[float, float]:
    """Posterior ``(mean, variance)`` of a leaf value given its residuals."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    _require_calibrated(hp)
    return leaf_posterior_params(stats.n, stats.sum_r, sigma * sigma, hp.mu_mu, hp.sigma_mu * hp.sigma_mu)


def sigma_conditional(n: int, ssr: float, hp: Hyperparams) -> tuple[float, float]:
    """Inverse-gamma ``(shape, scale)`` of ``sigma^2`` given ``n`` residuals with sum of squares ``ssr``."""
    if n < 1:
        raise ValueError(f"need at least one observation, got n={n}")
    if ssr < 0:
        raise ValueError(f"sum of squares must be non-negative, got {ssr}")
    _require_calibrated(hp)
    return 0.5 * (hp.nu + n), 0.5 * (hp.nu * hp.lam + ssr)


def draw_leaf_value(stats: LeafSuffStats, sigma: float, hp: Hyperparams, rng: np.random.Generator) -> float:
    mean, var = leaf_posterior(stats, sigma, hp)
    return mean + math.sqrt(var) * rng.standard_normal()


def draw_sigma2(n: int, ssr: float, hp: Hyperparams, rng: np.random.Generator) -> float:
    shape, scale = sigma_conditional(n, ssr, hp)
    return scale / rng.standard_gamma(shape)
