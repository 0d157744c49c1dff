"""Metropolis-within-Gibbs sampler for the sum-of-trees model.

Each sweep visits the trees in order.  Tree ``j`` sees the partial residual
``R_j = y - sum_{w != j} g(x; T_w, M_w)``, takes one grow / prune / swap /
change Metropolis-Hastings step on its structure, then has all of its leaf
values redrawn from their conjugate conditional.  The sweep ends with a draw
of the noise variance.

Passing ``policy=None`` runs the unconstrained reference path; a
:class:`~pfbart.constraints.FixedLayerPolicy` with no fixed variables goes
through the constraint machinery but samples the identical chain.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from pfbart.constraints import FixedLayerPolicy, move_legal, split_probability
from pfbart.data import Dataset, Standardization, make_grid
from pfbart.likelihood import (
    LeafSuffStats,
    leaf_log_marginal,
    leaf_posterior_params,
    log_marginal_likelihood,
    sigma_conditional,
)
from pfbart.priors import Hyperparams, calibrate, splittable_variables
from pfbart.tree import (
    Change,
    Grow,
    Internal,
    Leaf,
    MoveKind,
    Node,
    Prune,
    SplitRule,
    Swap,
    Tree,
    apply_move,
    from_nested,
    get_node,
    predict_tree,
    split_counts,
    to_nested,
)

TRACE_FORMAT = "pfbart-trace"
TRACE_VERSION = 1

MOVE_NAMES = ("grow", "prune", "swap", "change")


@dataclass(frozen=True)
class SamplerConfig:
    n_trees: int = 200
    burn_in: int = 500
    n_draws: int = 1000
    move_probs: tuple[float, float, float, float] = (0.25, 0.25, 0.10, 0.40)
    seed: int = 0
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    policy: FixedLayerPolicy | None = field(default_factory=FixedLayerPolicy)
    n_cut: int = 100

    def __post_init__(self):
        probs = tuple(float(x) for x in self.move_probs)
        if len(probs) != 4 or min(probs) < 0 or not math.isclose(sum(probs), 1.0, abs_tol=1e-12):
            raise ValueError(f"move_probs must be 4 non-negative numbers summing to 1, got {probs}")
        object.__setattr__(self, "move_probs", probs)
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.burn_in < 0 or self.n_draws < 0:
            raise ValueError("burn_in and n_draws must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["move_probs"] = list(self.move_probs)
        if self.policy is not None:
            d["policy"]["fixed_vars"] = list(self.policy.fixed_vars)
        return d


def derive_seed(root: int, *keys: int) -> int:
    """Deterministic 63-bit seed for the substream ``keys`` of ``root``."""
    ss = np.random.SeedSequence(entropy=int(root), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


# -- split rules as seen by the sampler -------------------------------------


class _PlainRules:
    """Unconstrained BART: every splittable variable, ``alpha (1 + d)^-beta``."""

    def __init__(self, hp: Hyperparams, grids: Sequence[np.ndarray]):
        self.alpha, self.beta = hp.alpha, hp.beta
        self._choices = [v for v in range(len(grids)) if len(grids[v]) > 0]

    def choices(self, depth: int) -> list[int]:
        return self._choices

    def split_prob(self, depth: int) -> float:
        if not self._choices:
            return 0.0
        return self.alpha * (1.0 + depth) ** -self.beta

    def legal(self, tree: Tree, move: MoveKind) -> bool:
        return True


class _PolicyRules:
    def __init__(self, policy: FixedLayerPolicy, hp: Hyperparams, grids: Sequence[np.ndarray]):
        self.policy = policy
        self.alpha, self.beta = hp.alpha, hp.beta
        self.grids = grids
        self._cache: dict[int, list[int]] = {}

    def choices(self, depth: int) -> list[int]:
        key = min(depth, self.policy.h)  # everything at depth >= h shares one set
        out = self._cache.get(key)
        if out is None:
            out = self._cache[key] = splittable_variables(self.policy, key, self.grids)
        return out

    def split_prob(self, depth: int) -> float:
        if not self.choices(depth):
            return 0.0
        return split_probability(self.policy, depth, self.alpha, self.beta)

    def legal(self, tree: Tree, move: MoveKind) -> bool:
        return move_legal(self.policy, tree, move)


def make_rules(policy: FixedLayerPolicy | None, hp: Hyperparams, grids: Sequence[np.ndarray]):
    if policy is None:
        return _PlainRules(hp, grids)
    return _PolicyRules(policy, hp, grids)


# -- proposals --------------------------------------------------------------


@dataclass
class Proposal:
    kind: MoveKind
    new_tree: Tree
    log_q_ratio: float
    log_prior_ratio: float
    old_leaves: list[str]  # leaves of the current tree whose rows change
    new_leaves: list[str]  # their replacements in ``new_tree``
    new_rows: dict[str, np.ndarray]  # routing of every node in the edited subtree
    stale: list[str]  # current-tree paths whose routing no longer applies


REJECTED = None  # propose_move's no-op outcome


def _pick(rng: np.random.Generator, k: int) -> int:
    return min(int(rng.random() * k), k - 1)


def _route(node: Node, path: str, rows: np.ndarray, Xc: np.ndarray, out: dict) -> bool:
    """Route ``rows`` through ``node``; False as soon as some leaf is empty."""
    out[path] = rows
    if node.is_leaf:
        return rows.size > 0
    go_left = Xc[node.rule.variable][rows] <= node.rule.cutpoint
    return _route(node.left, path + "L", rows[go_left], Xc, out) and _route(
        node.right, path + "R", rows[~go_left], Xc, out
    )


def _subtree_leaves(node: Node, path: str) -> list[str]:
    if node.is_leaf:
        return [path]
    return _subtree_leaves(node.left, path + "L") + _subtree_leaves(node.right, path + "R")


def _node_log_prior(rules, grids, depth: int, variable: int) -> float:
    """Log prior of the rule choice (variable then cutpoint) at one internal node."""
    return -math.log(len(rules.choices(depth))) - math.log(len(grids[variable]))


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def propose_move(
    tree: Tree,
    rows: dict[str, np.ndarray],
    Xc: np.ndarray,
    grids: Sequence[np.ndarray],
    rules,
    move_probs: Sequence[float],
    rng: np.random.Generator,
) -> Proposal | None:
    """Draw one structural proposal for ``tree``, or ``None`` if it is rejected outright.

    ``rows`` maps every node path of ``tree`` to the training rows reaching
    it and ``Xc`` holds the covariates column-wise.  Outright rejection
    happens when the drawn move kind has no target, breaks the fixed-layer
    policy, or would leave a leaf without training rows.
    """
    p_grow, p_prune, p_swap, p_change = move_probs
    u = rng.random()
    if u < p_grow:
        return _propose_grow(tree, rows, Xc, grids, rules, p_grow, p_prune, rng)
    if u < p_grow + p_prune:
        return _propose_prune(tree, rows, grids, rules, p_grow, p_prune, rng)
    if u < p_grow + p_prune + p_swap:
        return _propose_swap(tree, rows, Xc, grids, rules, rng)
    return _propose_change(tree, rows, Xc, grids, rules, rng)


def _propose_grow(tree, rows, Xc, grids, rules, p_grow, p_prune, rng):
    leaves = tree.leaves()
    path = leaves[_pick(rng, len(leaves))]
    depth = len(path)
    choices = rules.choices(depth)
    if not choices:
        return REJECTED
    v = choices[_pick(rng, len(choices))]
    grid = grids[v]
    c = float(grid[_pick(rng, len(grid))])
    move = Grow(path, SplitRule(v, c))
    if not rules.legal(tree, move):
        return REJECTED
    r = rows[path]
    go_left = Xc[v][r] <= c
    left, right = r[go_left], r[~go_left]
    if left.size == 0 or right.size == 0:
        return REJECTED
    new_tree = apply_move(tree, move)

    n_prunable = len(tree.prunable())
    if path and get_node(tree.root, _sibling(path)).is_leaf:
        n_prunable -= 1  # the parent stops being prunable
    n_prunable += 1
    log_q = _safe_log(p_prune / n_prunable) - math.log(p_grow / len(leaves)) + math.log(len(choices)) + math.log(len(grid))

    ps, ps_child = rules.split_prob(depth), rules.split_prob(depth + 1)
    log_prior = (
        math.log(ps)
        + _node_log_prior(rules, grids, depth, v)
        + 2.0 * _log1m(ps_child)
        - _log1m(ps)
    )
    return Proposal(
        move, new_tree, log_q, log_prior, [path], [path + "L", path + "R"],
        {path: r, path + "L": left, path + "R": right}, [],
    )


def _propose_prune(tree, rows, grids, rules, p_grow, p_prune, rng):
    prunable = tree.prunable()
    if not prunable:
        return REJECTED
    path = prunable[_pick(rng, len(prunable))]
    move = Prune(path)
    if not rules.legal(tree, move):
        return REJECTED
    depth = len(path)
    node = get_node(tree.root, path)
    v = node.rule.variable
    new_tree = apply_move(tree, move)
    n_leaves_new = len(tree.leaves()) - 1
    choices = rules.choices(depth)
    if v not in choices:
        return REJECTED  # the reverse grow could never propose this rule
    log_q = (
        _safe_log(p_grow / (n_leaves_new * len(choices) * len(grids[v])))
        - math.log(p_prune / len(prunable))
    )
    ps, ps_child = rules.split_prob(depth), rules.split_prob(depth + 1)
    log_prior = -(
        math.log(ps)
        + _node_log_prior(rules, grids, depth, v)
        + 2.0 * _log1m(ps_child)
        - _log1m(ps)
    )
    return Proposal(
        move, new_tree, log_q, log_prior, [path + "L", path + "R"], [path],
        {path: rows[path]}, [path + "L", path + "R"],
    )


def _propose_swap(tree, rows, Xc, grids, rules, rng):
    pairs = tree.swappable_pairs()
    if not pairs:
        return REJECTED
    parent, child = pairs[_pick(rng, len(pairs))]
    move = Swap(parent, child)
    if not rules.legal(tree, move):
        return REJECTED
    return _reroute_proposal(tree, rows, Xc, grids, rules, move, parent, n_choices_ratio=0.0)


def _propose_change(tree, rows, Xc, grids, rules, rng):
    internals = tree.internals()
    if not internals:
        return REJECTED
    path = internals[_pick(rng, len(internals))]
    depth = len(path)
    choices = rules.choices(depth)
    if not choices:
        return REJECTED
    v = choices[_pick(rng, len(choices))]
    grid = grids[v]
    c = float(grid[_pick(rng, len(grid))])
    move = Change(path, SplitRule(v, c))
    if not rules.legal(tree, move):
        return REJECTED
    v_old = get_node(tree.root, path).rule.variable
    # forward picks the new cutpoint among len(grid), reverse among the old grid
    log_q = math.log(len(grid)) - math.log(len(grids[v_old]))
    return _reroute_proposal(tree, rows, Xc, grids, rules, move, path, n_choices_ratio=log_q)


def _reroute_proposal(tree, rows, Xc, grids, rules, move, top, n_choices_ratio):
    new_tree = apply_move(tree, move)
    new_top = get_node(new_tree.root, top)
    new_rows: dict[str, np.ndarray] = {}
    if not _route(new_top, top, rows[top], Xc, new_rows):
        return REJECTED
    old_top = get_node(tree.root, top)
    log_prior = _subtree_rule_log_prior(new_top, top, rules, grids) - _subtree_rule_log_prior(
        old_top, top, rules, grids
    )
    leaves = _subtree_leaves(old_top, top)
    return Proposal(move, new_tree, n_choices_ratio, log_prior, leaves, leaves, new_rows, [])


def _subtree_rule_log_prior(node: Node, path: str, rules, grids) -> float:
    if node.is_leaf:
        return 0.0
    return (
        _node_log_prior(rules, grids, len(path), node.rule.variable)
        + _subtree_rule_log_prior(node.left, path + "L", rules, grids)
        + _subtree_rule_log_prior(node.right, path + "R", rules, grids)
    )


def _sibling(path: str) -> str:
    return path[:-1] + ("R" if path[-1] == "L" else "L")


def _log1m(p: float) -> float:
    return math.log1p(-p) if p > 0 else 0.0


def log_acceptance(prop: Proposal, log_lik_old: float, log_lik_new: float) -> float:
    total = prop.log_q_ratio + (log_lik_new - log_lik_old) + prop.log_prior_ratio
    if math.isnan(total) or total == math.inf:
        raise FloatingPointError(f"non-finite log acceptance ratio for {prop.kind}")
    return min(0.0, total)


def acceptance_probability(
    prop: Proposal,
    stats_old: Sequence[LeafSuffStats],
    stats_new: Sequence[LeafSuffStats],
    sigma: float,
    hp: Hyperparams,
) -> float:
    """MH acceptance ``min(1, q-ratio * likelihood ratio * prior ratio)``.

    Both stats sequences must come from the same residual vector; leaves
    untouched by the move may be omitted since they cancel.
    """
    ll_old = log_marginal_likelihood(stats_old, sigma, hp)
    ll_new = log_marginal_likelihood(stats_new, sigma, hp)
    return math.exp(log_acceptance(prop, ll_old, ll_new))


# -- state and sweeps -------------------------------------------------------


@dataclass
class ChainData:
    """Everything a sweep needs that does not change during the chain."""

    Xc: np.ndarray  # covariates, column-major (p, n)
    y: np.ndarray  # standardised response
    grids: list[np.ndarray]
    hp: Hyperparams
    rules: object
    move_probs: tuple[float, float, float, float]
    policy: FixedLayerPolicy | None

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.Xc.shape[0]


@dataclass
class SamplerState:
    forest: list[Tree]
    sigma: float
    fit_cache: np.ndarray  # (m, n): row j is g(x; T_j, M_j) on the training rows
    rng: np.random.Generator
    rows: list[dict[str, np.ndarray]]  # per tree: node path -> routed rows
    total_fit: np.ndarray
    y: np.ndarray
    accepted: list[tuple[int, MoveKind]] = field(default_factory=list)  # this sweep only
    n_proposed: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=np.int64))
    n_accepted: np.ndarray = field(default_factory=lambda: np.zeros(4, dtype=np.int64))

    @property
    def residual(self) -> np.ndarray:
        return self.y - self.total_fit

    def recompute_total(self) -> None:
        self.total_fit = self.fit_cache.sum(axis=0)


def init_state(data: ChainData, m: int, sigma0: float, rng: np.random.Generator) -> SamplerState:
    n = data.n
    all_rows = np.arange(n)
    state = SamplerState(
        forest=[Tree(Leaf(0.0), j) for j in range(m)],
        sigma=sigma0,
        fit_cache=np.zeros((m, n)),
        rng=rng,
        rows=[{"": all_rows} for _ in range(m)],
        total_fit=np.zeros(n),
        y=data.y,
    )
    return state


def _kind_index(move: MoveKind) -> int:
    return (Grow, Prune, Swap, Change).index(type(move))


def _set_leaves(node: Node, values: list[float], pos: list[int]) -> Node:
    if node.is_leaf:
        mu = values[pos[0]]
        pos[0] += 1
        return Leaf(mu)
    left = _set_leaves(node.left, values, pos)
    right = _set_leaves(node.right, values, pos)
    return Internal(node.rule, left, right)


def update_tree(state: SamplerState, data: ChainData, j: int) -> None:
    """One MH structure step and a full leaf redraw for tree ``j``."""
    rng = state.rng
    tree = state.forest[j]
    rows = state.rows[j]
    fit_j = state.fit_cache[j]
    resid = data.y - state.total_fit + fit_j

    prop = propose_move(tree, rows, data.Xc, data.grids, data.rules, data.move_probs, rng)
    if prop is not None:
        kind = _kind_index(prop.kind)
        state.n_proposed[kind] += 1
        sigma2 = state.sigma * state.sigma
        tau2 = data.hp.sigma_mu * data.hp.sigma_mu
        mu_mu = data.hp.mu_mu
        # sums of squares cancel: both partitions cover the same rows
        ll_old = sum(
            leaf_log_marginal(rows[p].size, float(resid[rows[p]].sum()), 0.0, sigma2, mu_mu, tau2)
            for p in prop.old_leaves
        )
        ll_new = sum(
            leaf_log_marginal(
                prop.new_rows[p].size, float(resid[prop.new_rows[p]].sum()), 0.0, sigma2, mu_mu, tau2
            )
            for p in prop.new_leaves
        )
        if math.log(rng.random()) < log_acceptance(prop, ll_old, ll_new):
            state.n_accepted[kind] += 1
            state.accepted.append((j, prop.kind))
            tree = prop.new_tree
            for p in prop.stale:
                del rows[p]
            rows.update(prop.new_rows)

    # leaf redraw, in pre-order
    leaves = tree.leaves()
    hp = data.hp
    sigma2 = state.sigma * state.sigma
    tau2 = hp.sigma_mu * hp.sigma_mu
    z = rng.standard_normal(len(leaves))
    new_fit = np.empty_like(fit_j)
    values = []
    for i, p in enumerate(leaves):
        r = rows[p]
        mean, var = leaf_posterior_params(r.size, float(resid[r].sum()), sigma2, hp.mu_mu, tau2)
        mu = mean + math.sqrt(var) * z[i]
        values.append(mu)
        new_fit[r] = mu
    state.forest[j] = tree.with_root(_set_leaves(tree.root, values, [0]))
    state.total_fit += new_fit - fit_j
    state.fit_cache[j] = new_fit


def draw_sigma(state: SamplerState, data: ChainData) -> None:
    r = data.y - state.total_fit
    shape, scale = sigma_conditional(data.n, float(r @ r), data.hp)
    state.sigma = math.sqrt(scale / state.rng.standard_gamma(shape))


def gibbs_sweep(state: SamplerState, data: ChainData) -> SamplerState:
    """Update every tree in order, then sigma.  Mutates and returns ``state``."""
    state.accepted = []
    for j in range(len(state.forest)):
        update_tree(state, data, j)
    state.recompute_total()
    draw_sigma(state, data)
    return state


# -- chains -----------------------------------------------------------------


@dataclass
class Trace:
    """Kept iterations of one chain (response quantities on the standardised scale)."""

    forests: list[tuple[Tree, ...]]
    sigma: np.ndarray
    split_counts: np.ndarray  # (n_draws, p)
    fitted: np.ndarray  # (n_draws, n) training-row sums of trees
    standardization: Standardization
    names: tuple[str, ...]
    config: dict
    acceptance: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.forests)

    @property
    def p(self) -> int:
        return len(self.names)

    @property
    def sigma_raw(self) -> np.ndarray:
        return self.sigma * self.standardization.scale


def prepare(dataset: Dataset, config: SamplerConfig, grids=None) -> tuple[ChainData, Standardization]:
    if config.policy is not None:
        config.policy.validate(dataset.p)
    std = Standardization.fit(dataset.y)
    y = std.standardize(dataset.y)
    if grids is None:
        grids = make_grid(dataset.X, config.n_cut)
    grids = [np.asarray(g, dtype=float) for g in grids]
    if len(grids) != dataset.p:
        raise ValueError(f"{len(grids)} cutpoint grids for {dataset.p} covariates")
    hp = calibrate(replace(config.hyperparams, m=config.n_trees), y)
    return ChainData(
        Xc=np.ascontiguousarray(dataset.X.T),
        y=y,
        grids=grids,
        hp=hp,
        rules=make_rules(config.policy, hp, grids),
        move_probs=config.move_probs,
        policy=config.policy,
    ), std


def run_chain(
    dataset: Dataset,
    config: SamplerConfig,
    grids=None,
    callback: Callable[[int, SamplerState, ChainData], None] | None = None,
) -> Trace:
    """Run ``burn_in + n_draws`` sweeps and keep the last ``n_draws``.

    ``grids`` overrides the quantile cutpoint grids (empty grids freeze the
    tree structure).  ``callback(sweep, state, data)`` runs after every sweep.
    """
    data, std = prepare(dataset, config, grids)
    rng = np.random.default_rng(config.seed)
    sigma0 = float(np.std(data.y, ddof=1))
    state = init_state(data, config.n_trees, sigma0, rng)

    forests, sigmas, counts, fitted = [], [], [], []
    for sweep in range(config.burn_in + config.n_draws):
        gibbs_sweep(state, data)
        if callback is not None:
            callback(sweep, state, data)
        if sweep >= config.burn_in:
            forests.append(tuple(state.forest))
            sigmas.append(state.sigma)
            counts.append(sum((split_counts(t, data.p) for t in state.forest), np.zeros(data.p, dtype=np.int64)))
            fitted.append(state.total_fit.copy())

    acceptance = {
        name: {"proposed": int(state.n_proposed[i]), "accepted": int(state.n_accepted[i])}
        for i, name in enumerate(MOVE_NAMES)
    }
    return Trace(
        forests=forests,
        sigma=np.array(sigmas),
        split_counts=np.array(counts, dtype=np.int64).reshape(len(forests), data.p),
        fitted=np.array(fitted).reshape(len(forests), data.n),
        standardization=std,
        names=dataset.names,
        config=config.to_dict(),
        acceptance=acceptance,
    )


def forest_predict(forest: Sequence[Tree], X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = np.zeros(X.shape[0])
    for tree in forest:
        out += predict_tree(tree, X)
    return out


def posterior_draws(trace: Trace, X_new) -> np.ndarray:
    """(n_draws, n_rows) raw-scale sums of trees for each kept iteration."""
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim != 2 or X_new.shape[1] != trace.p:
        raise ValueError(f"expected {trace.p} covariates, got shape {X_new.shape}")
    if not len(trace):
        raise ValueError("trace has no kept iterations")
    draws = np.array([forest_predict(f, X_new) for f in trace.forests])
    return trace.standardization.unstandardize(draws)


def predict(trace: Trace, X_new) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Posterior mean and empirical 5% / 95% quantiles of ``f`` at each row."""
    draws = posterior_draws(trace, X_new)
    q05, q95 = np.quantile(draws, [0.05, 0.95], axis=0)
    return draws.mean(axis=0), q05, q95


def variable_frequency(trace: Trace) -> np.ndarray:
    """Share of all kept internal nodes that split on each covariate.

    All zeros when the trace contains no split at all.
    """
    if not len(trace):
        raise ValueError("trace has no kept iterations")
    totals = trace.split_counts.sum(axis=0).astype(float)
    s = totals.sum()
    return totals / s if s > 0 else totals


# -- trace files ------------------------------------------------------------


def save_trace(trace: Trace, path) -> None:
    """Write a trace as JSON (see README for the field layout)."""
    doc = {
        "format": TRACE_FORMAT,
        "version": TRACE_VERSION,
        "config": trace.config,
        "names": list(trace.names),
        "standardization": {"shift": trace.standardization.shift, "scale": trace.standardization.scale},
        "acceptance": trace.acceptance,
        "sigma": trace.sigma.tolist(),
        "split_counts": trace.split_counts.tolist(),
        "fitted": trace.standardization.unstandardize(trace.fitted).tolist(),
        "forests": [[to_nested(t.root) for t in forest] for forest in trace.forests],
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n")


def load_trace(path) -> Trace:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != TRACE_FORMAT:
        raise ValueError(f"{path}: not a trace file")
    if doc.get("version") != TRACE_VERSION:
        raise ValueError(f"{path}: unsupported trace version {doc.get('version')}")
    std = Standardization(**doc["standardization"])
    p = len(doc["names"])
    forests = [tuple(Tree(from_nested(t), j) for j, t in enumerate(f)) for f in doc["forests"]]
    fitted = np.array(doc["fitted"], dtype=float)
    return Trace(
        forests=forests,
        sigma=np.array(doc["sigma"], dtype=float),
        split_counts=np.array(doc["split_counts"], dtype=np.int64).reshape(len(forests), p),
        fitted=std.standardize(fitted).reshape(len(forests), -1),
        standardization=std,
        names=tuple(doc["names"]),
        config=doc["config"],
        acceptance=doc["acceptance"],
    )
