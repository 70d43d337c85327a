"""Feedback control procedures that steer the real system with a guide.

The extremal-shift rule picks, from a finite control grid, the point whose
worst-case velocity is most opposed to (or aligned with) a given shift
vector.  The shift used here is the gap between the real state and the
state reconstructed from the guide, so one player's control pulls the
motion toward the guide while the guide's mirrored control pulls the guide
toward the motion.  The guide's other control channel follows the exact
tree-optimal strategy from the value module, re-solved at each decision
step from the realized guide state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dynamics import (
    ControlSet,
    Dynamics,
    Partition,
    PiecewiseConstantControl,
    Position,
    SystemBounds,
    bound_constants,
    evaluate_quality,
    solve_caputo,
)
from .fractional import _grid_count
from .guide import (
    GuideConfig,
    GuideState,
    initial_guide_segment,
    reconstruct_state,
    reconstructed_path,
    step_guide,
)
from .value import ValueQuery, default_value_partition, optimal_guide_control

__all__ = [
    "AimingVector",
    "GameRunResult",
    "ProcedureConfig",
    "aiming_vector",
    "control_with_guide_first",
    "control_with_guide_second",
    "guide_pre_strategy",
    "mutual_aiming_first",
    "mutual_aiming_second",
    "pre_strategy_max",
    "pre_strategy_min",
    "run_mutual_aiming_first",
    "run_mutual_aiming_second",
]

_TOL = 1e-9


@dataclass(frozen=True)
class AimingVector:
    """Shift vector between the real state and the guide's reconstruction."""

    s: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.s, dtype=float)
        if arr.ndim != 1 or not np.all(np.isfinite(arr)):
            raise ValueError("aiming vector must be a finite 1-D vector")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "s", arr)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.s))

    def __neg__(self) -> "AimingVector":
        return AimingVector(-self.s)


def _payoff_matrix(
    dyn: Dynamics,
    u_grid: ControlSet,
    v_grid: ControlSet,
    t: float,
    x: np.ndarray,
    s: np.ndarray,
) -> np.ndarray:
    return np.array(
        [[float(s @ dyn.f(t, x, u_grid[i], v_grid[j])) for j in range(len(v_grid))]
         for i in range(len(u_grid))]
    )


def pre_strategy_min(
    dyn: Dynamics,
    u_grid: ControlSet,
    v_grid: ControlSet,
    t: float,
    x: np.ndarray,
    s: np.ndarray,
) -> np.ndarray:
    """Grid point of U whose worst case minimizes the shift-aligned velocity.

    Exact argmin over u of max over v of <s, f(t, x, u, v)>; ties go to the
    lowest grid index (numpy's first-occurrence argmin/argmax).
    """
    worst = _payoff_matrix(dyn, u_grid, v_grid, t, x, s).max(axis=1)
    return u_grid[int(np.argmin(worst))]


def pre_strategy_max(
    dyn: Dynamics,
    u_grid: ControlSet,
    v_grid: ControlSet,
    t: float,
    x: np.ndarray,
    s: np.ndarray,
) -> np.ndarray:
    """Grid point of V whose worst case maximizes the shift-aligned velocity."""
    best = _payoff_matrix(dyn, u_grid, v_grid, t, x, s).min(axis=0)
    return v_grid[int(np.argmax(best))]


def guide_pre_strategy(
    dyn: Dynamics,
    u_grid: ControlSet,
    v_grid: ControlSet,
    g: GuideState,
    t: float,
    s: np.ndarray,
    player: str,
) -> np.ndarray:
    """Extremal-shift selection for the guide, at its reconstructed state.

    The guide's right-hand side is the same f evaluated at the state
    reconstructed from the guide's trajectory, so the selection delegates to
    the plain pre-strategies at that state.  `t` must lie on the guide
    lattice.
    """
    state = reconstruct_state(g, t)
    if player == "min":
        return pre_strategy_min(dyn, u_grid, v_grid, t, state, s)
    if player == "max":
        return pre_strategy_max(dyn, u_grid, v_grid, t, state, s)
    raise ValueError(f"player must be 'min' or 'max', got {player!r}")


def aiming_vector(x_pos: Position, g: GuideState, t: float) -> AimingVector:
    """Gap x(t) minus the guide's reconstructed state at a lattice time."""
    return AimingVector(x_pos.w.value_at(t) - reconstruct_state(g, t))


def mutual_aiming_first(
    scenario: Any, x_pos: Position, g: GuideState, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """Minimizing player's aiming pair at a decision time.

    Returns (u, q): u steers the motion toward the guide (worst case over
    v), q steers the guide toward the motion (worst case over p).  Both are
    held constant until the next decision time by the caller.
    """
    dyn = scenario.dynamics()
    s = aiming_vector(x_pos, g, t)
    u = pre_strategy_min(dyn, scenario.u_grid, scenario.v_grid, t, x_pos.w.value_at(t), s.s)
    q = guide_pre_strategy(dyn, scenario.u_grid, scenario.v_grid, g, t, s.s, "max")
    return u, q


def mutual_aiming_second(
    scenario: Any, x_pos: Position, g: GuideState, t: float
) -> tuple[np.ndarray, np.ndarray]:
    """Maximizing player's aiming pair (v, p), using the negated shift."""
    dyn = scenario.dynamics()
    s = -aiming_vector(x_pos, g, t)
    v = pre_strategy_max(dyn, scenario.u_grid, scenario.v_grid, t, x_pos.w.value_at(t), s.s)
    p = guide_pre_strategy(dyn, scenario.u_grid, scenario.v_grid, g, t, s.s, "min")
    return v, p


@dataclass(frozen=True)
class ProcedureConfig:
    """Knobs of a control-with-guide run.

    `partition` holds the decision times: aiming controls update there, and
    by default the guide's tree-optimal control is re-solved there too, over
    a receding lookahead of at most `value_steps` edges whose first edge is
    the step being decided.  Passing an explicit `value_partition` instead
    freezes the re-solve times to that coarser grid, holding the control in
    between (a diagnostic mode; the guarantee degrades when the opponent
    moves within a held interval).  `epsilon` is the accuracy parameter of
    the classical positional law; the exact tree strategy used here does
    not consume it, so it is recorded in results for provenance only.  The
    motion itself is solved on `solver_step` (default h/2), which must
    divide h.
    """

    h: float
    epsilon: float
    partition: Partition
    zeta: float
    value_partition: Partition | None = None
    value_steps: int = 4
    solver_step: float | None = None

    def __post_init__(self) -> None:
        if self.h <= 0 or self.epsilon <= 0 or self.zeta <= 0:
            raise ValueError("h, epsilon, and zeta must be positive")
        step = self.solver_step if self.solver_step is not None else self.h / 2.0
        if step <= 0:
            raise ValueError("solver step must be positive")
        _grid_count(self.h, step, what="lattice step over solver step")
        self.partition.require_lattice(self.partition.start, self.h)

    @property
    def motion_step(self) -> float:
        return self.solver_step if self.solver_step is not None else self.h / 2.0


@dataclass(frozen=True)
class GameRunResult:
    """Everything one feedback game run produced.

    `gamma` is the quality of the real motion, `gamma_h` the quality of the
    guide's reconstructed path, and `max_deviation` the largest gap between
    the motion and the reconstruction over the decision times.  Control
    realizations are kept for replay and reporting; `epsilon` is carried
    over from the configuration (None for aiming-only runs, which have no
    positional-law configuration).
    """

    x: Position
    guide: GuideState
    gamma: float
    gamma_h: float
    max_deviation: float
    u: PiecewiseConstantControl
    v: PiecewiseConstantControl
    p: PiecewiseConstantControl
    q: PiecewiseConstantControl
    epsilon: float | None
    deviations: tuple[float, ...] = field(repr=False, default=())


def _subset_indices(coarse: Partition, fine: Partition) -> set[int]:
    fine_times = fine.times
    out: set[int] = set()
    for t in coarse.times[:-1]:
        j = int(np.argmin(np.abs(fine_times - t)))
        if abs(fine_times[j] - t) > _TOL:
            raise ValueError(
                "value partition times must be a subset of the procedure partition"
            )
        out.add(j)
    return out


def _piecewise(times: np.ndarray, vals: list[np.ndarray], end: float) -> PiecewiseConstantControl:
    return PiecewiseConstantControl(times, np.vstack(vals), end)


def _lookahead_partition(a: float, b: float, theta: float, h: float, depth: int) -> Partition:
    """Decision horizon for one re-solve: the immediate step, then a coarse tail.

    The first edge covers exactly the step being decided, so the committed
    control and the opponent's realized response land on a child of the tree.
    The remaining horizon is re-spread into at most `depth - 1` further edges
    each time, keeping the tree within budget no matter how many steps remain.
    """
    if b >= theta - _TOL:
        return Partition(np.array([a, theta]))
    tail = default_value_partition(b, theta, h, max(depth - 1, 1))
    return Partition(np.concatenate(([a], tail.times)))


def _run_loop(
    scenario: Any,
    init: Position,
    partition: Partition,
    h: float,
    motion_step: float,
    external: PiecewiseConstantControl,
    guide_external: PiecewiseConstantControl | None,
    first_player: bool,
    epsilon: float | None,
    value_partition: Partition | None,
    value_steps: int,
) -> GameRunResult:
    """Shared feedback loop of the aiming and control-with-guide procedures.

    The aiming pair is always formed by extremal shift.  The guide's other
    channel comes from `guide_external` when given (aiming-only runs: the
    proximity guarantee holds against arbitrary realizations there).
    Otherwise it follows the tree-optimal strategy: by default the tree is
    re-solved at every partition step from the realized guide state over a
    receding lookahead (one fine edge plus a re-spread coarse tail), so the
    guarantee telescopes step by step; an explicit `value_partition`
    restricts re-solves to its times, holding the control in between.
    """
    dyn = scenario.dynamics()
    theta = float(scenario.theta)
    if abs(partition.start - init.t) > _TOL:
        raise ValueError("procedure partition must start at the initial position's time")
    if abs(partition.end - theta) > _TOL:
        raise ValueError("procedure partition must end at the horizon")
    partition.require_lattice(init.t0, h)
    for ctrl, name in ((external, "external"), (guide_external, "guide external")):
        if ctrl is not None and (
            abs(ctrl.start - init.t) > _TOL or ctrl.end < theta - _TOL
        ):
            raise ValueError(f"{name} control must cover the whole game interval")

    bounds: SystemBounds = bound_constants(dyn, scenario.R0, init.t0, theta, scenario.alpha)
    guard = 10.0 * bounds.R1
    gcfg = GuideConfig(w0=tuple(init.w.values[0]), h=h, alpha=scenario.alpha)
    g = initial_guide_segment(init, gcfg)
    player = "min" if first_player else "max"
    if guide_external is None and value_partition is not None:
        tree_steps = _subset_indices(value_partition, partition)
        hold_query = ValueQuery(
            scenario=scenario, guide_start=g, partition=value_partition
        )

    x_pos = init
    own_vals: list[np.ndarray] = []
    aim_vals: list[np.ndarray] = []
    other_times: list[float] = []
    other_vals: list[np.ndarray] = []
    deviations = [aiming_vector(x_pos, g, init.t).norm]
    guide_other: np.ndarray | None = None
    vstep = 0

    for j in range(partition.steps):
        a, b = float(partition.times[j]), float(partition.times[j + 1])
        if guide_external is None:
            if value_partition is None:
                look = _lookahead_partition(a, b, theta, h, value_steps)
                query = ValueQuery(scenario=scenario, guide_start=g, partition=look)
                guide_other = optimal_guide_control(query, g, 0, player, max_norm=guard)
                other_times.append(a)
                other_vals.append(guide_other)
            elif j in tree_steps:
                guide_other = optimal_guide_control(
                    hold_query, g, vstep, player, max_norm=guard
                )
                vstep += 1
                other_times.append(a)
                other_vals.append(guide_other)
        else:
            guide_other = guide_external.value_at(a)
        if first_player:
            u_j, q_j = mutual_aiming_first(scenario, x_pos, g, a)
            own_vals.append(u_j)
            aim_vals.append(q_j)
            u_seg = PiecewiseConstantControl.constant(u_j, a, b)
            v_seg = external.restrict(a, b)
            p_j = guide_other
        else:
            v_j, p_j = mutual_aiming_second(scenario, x_pos, g, a)
            own_vals.append(v_j)
            aim_vals.append(p_j)
            u_seg = external.restrict(a, b)
            v_seg = PiecewiseConstantControl.constant(v_j, a, b)
            q_j = guide_other
        x_pos = solve_caputo(dyn, x_pos, scenario.alpha, u_seg, v_seg, motion_step, bounds=bounds)
        g = step_guide(g, dyn, p_j, q_j, b, max_norm=guard)
        deviations.append(aiming_vector(x_pos, g, b).norm)

    step_times = partition.times[:-1]
    if guide_external is None:
        other_ctrl = _piecewise(np.array(other_times), other_vals, theta)
    else:
        other_ctrl = guide_external.restrict(init.t, theta)
    aim_ctrl = _piecewise(step_times, aim_vals, theta)
    own_ctrl = _piecewise(step_times, own_vals, theta)
    ext_ctrl = external.restrict(init.t, theta)
    if first_player:
        u_ctrl, v_ctrl, p_ctrl, q_ctrl = own_ctrl, ext_ctrl, other_ctrl, aim_ctrl
    else:
        u_ctrl, v_ctrl, p_ctrl, q_ctrl = ext_ctrl, own_ctrl, aim_ctrl, other_ctrl
    return GameRunResult(
        x=x_pos,
        guide=g,
        gamma=evaluate_quality(scenario.sigma, x_pos, theta),
        gamma_h=scenario.sigma.evaluate(reconstructed_path(g, theta)),
        max_deviation=max(deviations),
        u=u_ctrl,
        v=v_ctrl,
        p=p_ctrl,
        q=q_ctrl,
        epsilon=epsilon,
        deviations=tuple(deviations),
    )


def run_mutual_aiming_first(
    scenario: Any,
    init: Position,
    partition: Partition,
    h: float,
    v_realization: PiecewiseConstantControl,
    p_realization: PiecewiseConstantControl,
    *,
    solver_step: float | None = None,
) -> GameRunResult:
    """Aiming-only run: (u, q) by mutual aiming, (v, p) given externally.

    The proximity guarantee of the aiming pair holds against arbitrary
    opposing realizations, so both non-aiming channels are inputs here.
    """
    step = solver_step if solver_step is not None else h / 2.0
    return _run_loop(
        scenario, init, partition, h, step, v_realization, p_realization,
        first_player=True, epsilon=None, value_partition=None, value_steps=0,
    )


def run_mutual_aiming_second(
    scenario: Any,
    init: Position,
    partition: Partition,
    h: float,
    u_realization: PiecewiseConstantControl,
    q_realization: PiecewiseConstantControl,
    *,
    solver_step: float | None = None,
) -> GameRunResult:
    """Aiming-only run: (v, p) by mutual aiming, (u, q) given externally."""
    step = solver_step if solver_step is not None else h / 2.0
    return _run_loop(
        scenario, init, partition, h, step, u_realization, q_realization,
        first_player=False, epsilon=None, value_partition=None, value_steps=0,
    )


def control_with_guide_first(
    scenario: Any,
    init: Position,
    cfg: ProcedureConfig,
    v_realization: PiecewiseConstantControl,
) -> GameRunResult:
    """Full feedback loop for the minimizing player against a given v.

    At each partition time the player measures the gap to the guide's
    reconstruction, picks u by extremal shift toward the guide and the
    guide's q toward the motion, and holds the guide's p at the tree-optimal
    control recomputed at each value-partition time from the realized guide
    state.  The motion is advanced by the fractional solver, the guide by
    its Euler scheme.
    """
    return _run_loop(
        scenario, init, cfg.partition, cfg.h, cfg.motion_step, v_realization,
        None, first_player=True, epsilon=cfg.epsilon,
        value_partition=cfg.value_partition, value_steps=cfg.value_steps,
    )


def control_with_guide_second(
    scenario: Any,
    init: Position,
    cfg: ProcedureConfig,
    u_realization: PiecewiseConstantControl,
) -> GameRunResult:
    """Mirror procedure for the maximizing player against a given u."""
    return _run_loop(
        scenario, init, cfg.partition, cfg.h, cfg.motion_step, u_realization,
        None, first_player=False, epsilon=cfg.epsilon,
        value_partition=cfg.value_partition, value_steps=cfg.value_steps,
    )
