"""Game value of the guide system by exhaustive search over control trees.

Players update piecewise-constant controls at the times of a short
partition; every sequence of grid choices is enumerated, the guide is
advanced along the tree edges, and the two per-step commitment orders give
a bracket on the value.  The same tree, re-rooted at a realized guide
state, yields optimal per-step controls for the feedback procedures.  The
production entry points run a level-batched sweep that advances all nodes
of a depth at once; the recursive per-node tree is kept as the reference
implementation the test suite cross-checks against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .dynamics import BlowUpError, ControlSet, Partition, Position, QualityIndex
from .fractional import SampledFunction, _grid_count, gl_coefficients, product_trapezoid_weights, rl_integral
from .guide import GuideConfig, GuideState, initial_guide_segment, reconstructed_path, step_guide

__all__ = [
    "BridgeReport",
    "BudgetExceededError",
    "DEFAULT_TREE_BITS",
    "ValueQuery",
    "ValueResult",
    "ValueSweepResult",
    "ValueSweepRow",
    "brute_force_value",
    "default_value_partition",
    "optimal_guide_control",
    "representation_bridge",
    "value_convergence_sweep",
    "value_map",
]

_TOL = 1e-9

#: Cap on partition_steps * log2(|U| * |V|); the default admits an
#: 8-step tree over 3-point grids and anything smaller.
DEFAULT_TREE_BITS = 16 * math.log2(3.0) + 1e-9


class BudgetExceededError(RuntimeError):
    """The requested control tree is larger than the configured budget."""


@dataclass
class ValueQuery:
    """What to evaluate: scenario, initial guide state, and decision times.

    `scenario` is any object exposing `dynamics()`, `sigma`, `theta`,
    `alpha`, `u_grid`, and `v_grid` (see `scenarios.ScenarioSpec`).  Control
    grids may be overridden explicitly.
    """

    scenario: Any
    guide_start: GuideState
    partition: Partition
    u_grid: ControlSet | None = None
    v_grid: ControlSet | None = None

    def __post_init__(self) -> None:
        if self.u_grid is None:
            self.u_grid = self.scenario.u_grid
        if self.v_grid is None:
            self.v_grid = self.scenario.v_grid
        if abs(self.partition.start - self.guide_start.t) > _TOL:
            raise ValueError("partition must start at the guide state's time")
        if abs(self.partition.end - self.scenario.theta) > _TOL:
            raise ValueError("partition must end at the horizon")
        self.partition.require_lattice(self.guide_start.t0, self.guide_start.config.h)


@dataclass(frozen=True)
class ValueResult:
    """Bracket on the tree-game value.

    `lower` is the value when the maximizer commits first at every step
    (the maximizing player's guaranteed level); `upper` when the minimizer
    commits first.  max-min never exceeds min-max, so gap = upper - lower
    is nonnegative up to rounding.
    """

    lower: float
    upper: float

    @property
    def gap(self) -> float:
        return self.upper - self.lower


class _Tree:
    """Control-history tree of guide states with memoized sweep values.

    Reference implementation: advances one node at a time through
    `step_guide` and recurses over control histories.  Production code uses
    `_BatchedTree`, which must produce the same values; the test suite
    checks the two against each other.
    """

    def __init__(
        self,
        dyn,
        sigma: QualityIndex,
        theta: float,
        u_grid: ControlSet,
        v_grid: ControlSet,
        times: np.ndarray,
        root: GuideState,
        max_norm: float | None,
    ) -> None:
        self.dyn = dyn
        self.sigma = sigma
        self.theta = theta
        self.u_grid = u_grid
        self.v_grid = v_grid
        self.times = times
        self.max_norm = max_norm
        self.depth = len(times) - 1
        self._states: dict[tuple, GuideState] = {(): root}
        self._memo: dict[tuple, float] = {}

    def state(self, path: tuple) -> GuideState:
        cached = self._states.get(path)
        if cached is not None:
            return cached
        parent = self.state(path[:-1])
        i, j = path[-1]
        child = step_guide(
            parent,
            self.dyn,
            self.u_grid[i],
            self.v_grid[j],
            float(self.times[len(path)]),
            max_norm=self.max_norm,
        )
        self._states[path] = child
        return child

    def value(self, path: tuple, min_first: bool) -> float:
        key = (path, min_first)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if len(path) == self.depth:
            leaf = self.state(path)
            val = self.sigma.evaluate(reconstructed_path(leaf, self.theta))
        else:
            table = [
                [self.value(path + ((i, j),), min_first) for j in range(len(self.v_grid))]
                for i in range(len(self.u_grid))
            ]
            if min_first:
                val = min(max(row) for row in table)
            else:
                val = max(min(row[j] for row in table) for j in range(len(self.v_grid)))
        self._memo[key] = val
        return val

    def best_first_control(self, player: str) -> np.ndarray:
        if player == "min":
            guarantees = [
                max(self.value(((i, j),), True) for j in range(len(self.v_grid)))
                for i in range(len(self.u_grid))
            ]
            return self.u_grid[int(np.argmin(guarantees))]
        if player == "max":
            guarantees = [
                min(self.value(((i, j),), False) for i in range(len(self.u_grid)))
                for j in range(len(self.v_grid))
            ]
            return self.v_grid[int(np.argmax(guarantees))]
        raise ValueError(f"player must be 'min' or 'max', got {player!r}")


class _BatchedTree:
    """Array twin of `_Tree`: one buffer holding every node history per level.

    Nodes at a depth all share the same time grid, so a level is advanced by
    vectorized Euler substeps over an (N, samples, dim) buffer — the same
    update, reconstruction window, and norm guard as `step_guide`, applied
    rowwise — and all leaves are scored in one call.  Child ordering is
    parent-major with the control pair (i, j) flattened as i * n_v + j,
    which makes the leaf array reshapeable to per-step (n_u, n_v) axes for
    the committed-first sweeps.
    """

    def __init__(
        self,
        dyn,
        sigma: QualityIndex,
        theta: float,
        u_grid: ControlSet,
        v_grid: ControlSet,
        times: np.ndarray,
        root: GuideState,
        max_norm: float | None,
    ) -> None:
        self.dyn = dyn
        self.sigma = sigma
        self.theta = theta
        self.u_grid = u_grid
        self.v_grid = v_grid
        self.times = times
        self.root = root
        self.max_norm = max_norm
        self.depth = len(times) - 1
        self._leaf_vals: np.ndarray | None = None

    def _leaves(self) -> np.ndarray:
        if self._leaf_vals is not None:
            return self._leaf_vals
        cfg = self.root.config
        es, spp, dim = cfg.euler_step, cfg.substeps_per_h, self.root.dim
        scale = cfg.h ** (cfg.alpha - 1.0)
        anchor = cfg.anchor
        t0 = self.root.t0
        m_total = _grid_count(self.theta - t0, cfg.h, what="tree horizon")
        coeffs = gl_coefficients(cfg.alpha, m_total + 2).coeffs
        pairs = [
            (self.u_grid[i], self.v_grid[j])
            for i in range(len(self.u_grid))
            for j in range(len(self.v_grid))
        ]
        npairs = len(pairs)
        buf = self.root.y.values[None, :, :].copy()
        for e in range(self.depth):
            count = buf.shape[1]
            steps = _grid_count(
                float(self.times[e + 1]) - float(self.times[e]), es, what="tree edge"
            )
            buf = np.repeat(buf, npairs, axis=0)
            buf = np.concatenate([buf, np.zeros((buf.shape[0], steps, dim))], axis=1)
            for k in range(steps):
                top = count + k - 1
                t_sub = t0 + es * top
                latt = (top // spp) * spp
                window = buf[:, latt::-spp, :]
                states = anchor + scale * np.einsum(
                    "nwd,w->nd", window, coeffs[: window.shape[1]]
                )
                if self.max_norm is not None:
                    sq = np.einsum("nd,nd->n", states, states)
                    worst = float(np.max(sq))
                    if not math.isfinite(worst) or worst > self.max_norm**2:
                        raise BlowUpError(
                            f"guide state norm {math.sqrt(worst) if math.isfinite(worst) else worst} "
                            f"exceeded the guard {self.max_norm} at t = {t_sub}"
                        )
                forces = np.empty_like(states)
                for r, (up, vp) in enumerate(pairs):
                    rows = slice(r, None, npairs)
                    forces[rows] = self.dyn.f_many(t_sub, states[rows], up, vp)
                buf[:, top + 1, :] = buf[:, top, :] + es * forces
        lattice = buf[:, ::spp, :]
        rows_idx, cols_idx = np.tril_indices(m_total + 1)
        toeplitz = np.zeros((m_total + 1, m_total + 1))
        toeplitz[rows_idx, cols_idx] = coeffs[rows_idx - cols_idx]
        recon = anchor + scale * np.einsum("ab,nbd->nad", toeplitz, lattice)
        self._leaf_vals = np.asarray(self.sigma.evaluate_many(recon), dtype=float)
        return self._leaf_vals

    def _reduced(self, levels: int, min_first: bool) -> np.ndarray:
        nu, nv = len(self.u_grid), len(self.v_grid)
        arr = self._leaves().reshape((nu, nv) * self.depth)
        for _ in range(levels):
            if min_first:
                arr = arr.max(axis=-1).min(axis=-1)
            else:
                arr = arr.min(axis=-2).max(axis=-1)
        return arr

    def value(self, min_first: bool) -> float:
        return float(self._reduced(self.depth, min_first))

    def best_first_control(self, player: str) -> np.ndarray:
        if player == "min":
            table = self._reduced(self.depth - 1, True)
            return self.u_grid[int(np.argmin(table.max(axis=1)))]
        if player == "max":
            table = self._reduced(self.depth - 1, False)
            return self.v_grid[int(np.argmax(table.min(axis=0)))]
        raise ValueError(f"player must be 'min' or 'max', got {player!r}")


def _check_budget(steps: int, n_u: int, n_v: int, max_tree_bits: float) -> None:
    bits = steps * math.log2(n_u * n_v)
    if bits > max_tree_bits:
        raise BudgetExceededError(
            f"control tree needs {bits:.1f} bits "
            f"({steps} steps over {n_u}x{n_v} grids), budget is {max_tree_bits:.1f}"
        )


def _make_tree(query: ValueQuery, root: GuideState, times: np.ndarray, max_norm) -> _Tree:
    return _Tree(
        query.scenario.dynamics(),
        query.scenario.sigma,
        query.scenario.theta,
        query.u_grid,
        query.v_grid,
        times,
        root,
        max_norm,
    )


def _make_batched(query: ValueQuery, root: GuideState, times: np.ndarray, max_norm) -> _BatchedTree:
    return _BatchedTree(
        query.scenario.dynamics(),
        query.scenario.sigma,
        query.scenario.theta,
        query.u_grid,
        query.v_grid,
        times,
        root,
        max_norm,
    )


def brute_force_value(
    query: ValueQuery,
    *,
    max_tree_bits: float = DEFAULT_TREE_BITS,
    max_norm: float | None = None,
) -> ValueResult:
    """Exact value bracket of the discretized guide game.

    Enumerates every sequence of per-step grid controls, sweeping the tree
    once with the minimizer committing first at each step and once with the
    maximizer committing first.
    """
    _check_budget(query.partition.steps, len(query.u_grid), len(query.v_grid), max_tree_bits)
    tree = _make_batched(query, query.guide_start, query.partition.times, max_norm)
    return ValueResult(lower=tree.value(False), upper=tree.value(True))


def optimal_guide_control(
    query: ValueQuery,
    g: GuideState,
    step_index: int,
    player: str,
    *,
    max_tree_bits: float = DEFAULT_TREE_BITS,
    max_norm: float | None = None,
) -> np.ndarray:
    """Optimal per-step control at a reached guide state.

    Re-solves the remaining control tree rooted at `g` for the steps from
    `step_index` on, and returns the first-move control whose worst-case
    continuation achieves the corresponding committed-first value.  Ties go
    to the lowest grid index.
    """
    times = query.partition.times[step_index:]
    if len(times) < 2:
        raise ValueError("no decision steps remain at this index")
    if abs(g.t - times[0]) > _TOL:
        raise ValueError(f"guide state at {g.t} does not match step time {times[0]}")
    _check_budget(len(times) - 1, len(query.u_grid), len(query.v_grid), max_tree_bits)
    tree = _make_batched(query, g, times, max_norm)
    return tree.best_first_control(player)


def default_value_partition(t_start: float, theta: float, h: float, max_steps: int = 4) -> Partition:
    """Lattice-aligned decision times, near-uniform, at most `max_steps` steps."""
    m = _grid_count(theta - t_start, h, what="game horizon")
    k = min(max_steps, m)
    if k < 1:
        raise ValueError("horizon shorter than one lattice step")
    idx = np.unique(np.round(np.linspace(0, m, k + 1)).astype(int))
    return Partition(t_start + h * idx)


def value_map(
    scenario: Any,
    init: Position,
    h: float,
    *,
    value_steps: int = 4,
    max_tree_bits: float = DEFAULT_TREE_BITS,
    max_norm: float | None = None,
) -> float:
    """Value of the approximating game started from an admissible position.

    Builds the guide's initial segment from the position, enumerates the
    control tree on a default short partition, and returns the
    minimizer-commits-first value, which this package uses as the canonical
    game-value estimate (the bracket is available via `brute_force_value`).
    """
    cfg = GuideConfig(w0=tuple(init.w.values[0]), h=h, alpha=scenario.alpha)
    g0 = initial_guide_segment(init, cfg)
    part = default_value_partition(init.t, scenario.theta, h, value_steps)
    query = ValueQuery(scenario=scenario, guide_start=g0, partition=part)
    return brute_force_value(query, max_tree_bits=max_tree_bits, max_norm=max_norm).upper


@dataclass(frozen=True)
class ValueSweepRow:
    h: float
    value: float
    gap: float
    cauchy_diff: float  # |value - previous value|, nan for the first row


@dataclass(frozen=True)
class ValueSweepResult:
    rows: tuple[ValueSweepRow, ...]
    value_estimate: float
    error_bar: float

    def cauchy_ratios(self) -> list[float]:
        diffs = [r.cauchy_diff for r in self.rows[1:]]
        return [diffs[i] / diffs[i + 1] for i in range(len(diffs) - 1) if diffs[i + 1] > 0]


def value_convergence_sweep(
    scenario: Any,
    init: Position,
    h_list: list[float],
    *,
    value_steps: int = 4,
    max_tree_bits: float = DEFAULT_TREE_BITS,
) -> ValueSweepResult:
    """Guide-game values along a decreasing sequence of lattice steps.

    The limit estimate is the finest-step value; its error bar is the last
    Cauchy difference between successive values (no extrapolation).
    """
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ValueError("h values must be strictly decreasing")
    rows: list[ValueSweepRow] = []
    prev = None
    for h in h_list:
        cfg = GuideConfig(w0=tuple(init.w.values[0]), h=h, alpha=scenario.alpha)
        g0 = initial_guide_segment(init, cfg)
        part = default_value_partition(init.t, scenario.theta, h, value_steps)
        res = brute_force_value(
            ValueQuery(scenario=scenario, guide_start=g0, partition=part),
            max_tree_bits=max_tree_bits,
        )
        diff = math.nan if prev is None else abs(res.upper - prev)
        rows.append(ValueSweepRow(h=h, value=res.upper, gap=res.gap, cauchy_diff=diff))
        prev = res.upper
    return ValueSweepResult(
        rows=tuple(rows),
        value_estimate=rows[-1].value,
        error_bar=rows[-1].cauchy_diff if len(rows) > 1 else math.inf,
    )


@dataclass(frozen=True)
class BridgeReport:
    """Round-trip between a motion and its guide-side representation.

    `y` is the order-(1 - alpha) fractional integral of the centered motion;
    its slope should match the stored Caputo-derivative samples, and pushing
    the slope back through the order-alpha integral should reproduce the
    motion.  The slope estimates at the first few nodes inherit a
    self-similar error layer from the singular kernel's corner (large at a
    fixed node index, but confined to a window that shrinks with the step),
    so both mismatch maxima are taken from node `skipped_nodes` on; the
    layer's own maximum is exposed separately.
    """

    y: SampledFunction
    max_derivative_mismatch: float
    max_roundtrip_error: float
    initial_layer_roundtrip_error: float
    skipped_nodes: int


def representation_bridge(pos: Position, alpha: float) -> BridgeReport:
    w = pos.w
    if w.sample_count < 3:
        raise ValueError("representation bridge needs at least 3 samples")
    y = rl_integral(w.shifted_by_initial(), 1.0 - alpha)
    g = w.step
    ydot = np.empty_like(y.values)
    ydot[1:-1] = (y.values[2:] - y.values[:-2]) / (2.0 * g)
    ydot[0] = (y.values[1] - y.values[0]) / g
    ydot[-1] = (y.values[-1] - y.values[-2]) / g
    skip = max(1, (w.sample_count - 1) // 8)
    deriv_mismatch = float(
        np.max(np.linalg.norm(ydot[skip:] - pos.phi.values[skip:], axis=1))
    )
    n = w.sample_count - 1
    base = np.arange(n + 1, dtype=float)
    tables = (base**alpha, base ** (alpha + 1.0))
    scale = g**alpha / math.gamma(alpha)
    recon = np.zeros_like(w.values)
    recon[0] = w.values[0]
    for m in range(1, n + 1):
        wts = product_trapezoid_weights(m, m, alpha, tables)
        recon[m] = w.values[0] + scale * (wts @ ydot[: m + 1])
    err = np.linalg.norm(recon - w.values, axis=1)
    return BridgeReport(
        y=y,
        max_derivative_mismatch=deriv_mismatch,
        max_roundtrip_error=float(np.max(err[skip:])),
        initial_layer_roundtrip_error=float(np.max(err[:skip])),
        skipped_nodes=skip,
    )
