"""Controlled fractional dynamics: admissible positions, bounds, and the solver.

The state obeys a Caputo fractional differential equation driven by two
players' controls.  A position carries the whole sampled history of the
motion together with samples of its Caputo derivative, which is exactly the
information needed to restart the motion from an intermediate time through
the equivalent Volterra integral equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fractional import (
    AlignmentError,
    SampledFunction,
    _alpha_of,
    _grid_count,
    mittag_leffler,
    product_trapezoid_weights,
    rl_integral,
)

__all__ = [
    "AdmissibilityError",
    "AdmissibilityReport",
    "BlowUpError",
    "ControlSet",
    "Dynamics",
    "IsaacsReport",
    "MotionBoundReport",
    "Partition",
    "PiecewiseConstantControl",
    "Position",
    "QualityIndex",
    "SystemBounds",
    "bound_constants",
    "check_admissibility",
    "check_isaacs",
    "concatenate_controls",
    "constant_position",
    "evaluate_quality",
    "motion_bound_check",
    "power_history_position",
    "solve_caputo",
]

_TOL = 1e-9


class AdmissibilityError(ValueError):
    """An initial position violates the admissibility requirements."""


class BlowUpError(RuntimeError):
    """A computed motion left the a-priori bounded region by a wide margin."""


class ControlSet:
    """A compact control constraint represented by a finite grid of points."""

    __slots__ = ("points",)

    def __init__(self, points: Sequence[Sequence[float]] | np.ndarray) -> None:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("control set needs at least one point")
        if len({tuple(p) for p in pts.tolist()}) != pts.shape[0]:
            raise ValueError("control set points must be distinct")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        self.points = pts

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.points[i]

    def radius(self) -> float:
        return float(np.max(np.linalg.norm(self.points, axis=1)))


@dataclass(frozen=True)
class Dynamics:
    """Right-hand side of the controlled system with its structural constants.

    `rhs(t, x, u, v)` returns the Caputo derivative of the state.  `growth_c`
    is the constant of the sublinear growth bound |f| <= (1 + |x|) * c and
    `lipschitz` maps a radius R to a Lipschitz constant of f in x on the ball
    of that radius.  `rhs_many`, when given, evaluates the same right-hand
    side for a whole batch of states (N, dim) under one shared control pair;
    it must agree with `rhs` row by row.
    """

    dim: int
    rhs: Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    growth_c: float
    lipschitz: Callable[[float], float]
    rhs_many: Callable[[float, np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("state dimension must be positive")
        if not self.growth_c > 0.0:
            raise ValueError("growth constant must be positive")

    def f(self, t: float, x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.asarray(self.rhs(t, x, u, v), dtype=float).reshape(-1)
        if out.shape != (self.dim,):
            raise ValueError(
                f"dynamics returned shape {out.shape}, expected ({self.dim},)"
            )
        return out

    def f_many(self, t: float, xs: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Batched right-hand side with shape checking; falls back to a row loop."""
        if self.rhs_many is None:
            out = np.stack([self.rhs(t, x, u, v) for x in xs])
        else:
            out = np.asarray(self.rhs_many(t, xs, u, v), dtype=float)
        if out.shape != xs.shape:
            raise ValueError(
                f"batched dynamics returned shape {out.shape}, expected {xs.shape}"
            )
        return out


class Position:
    """A time together with the motion history and its Caputo derivative.

    `w` holds the state samples on [t0, t] and `phi` the matching samples of
    the Caputo derivative, both on the same uniform grid.  The pair is what
    the Volterra form of the dynamics needs in order to continue the motion.
    """

    __slots__ = ("w", "phi")

    def __init__(self, w: SampledFunction, phi: SampledFunction) -> None:
        if (
            abs(w.t0 - phi.t0) > _TOL
            or abs(w.step - phi.step) > _TOL * w.step
            or w.sample_count != phi.sample_count
            or w.dim != phi.dim
        ):
            raise ValueError("state and derivative histories must share one grid")
        self.w = w
        self.phi = phi

    @property
    def t(self) -> float:
        return self.w.end_time

    @property
    def t0(self) -> float:
        return self.w.t0

    @property
    def dim(self) -> int:
        return self.w.dim

    def state(self) -> np.ndarray:
        return self.w.values[-1]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Position(t={self.t}, dim={self.dim}, samples={self.w.sample_count})"


def constant_position(
    w0: Sequence[float] | np.ndarray,
    t0: float,
    t_star: float | None = None,
    step: float = 1.0,
) -> Position:
    """Position whose history sits at the constant state w0 on [t0, t_star]."""
    w0 = np.atleast_1d(np.asarray(w0, dtype=float))
    t_star = t0 if t_star is None else t_star
    count = _grid_count(t_star - t0, step, what="history span") if t_star > t0 else 0
    vals = np.tile(w0, (count + 1, 1))
    return Position(
        SampledFunction(t0, step, vals),
        SampledFunction(t0, step, np.zeros_like(vals)),
    )


def power_history_position(
    w0: Sequence[float] | np.ndarray,
    coef: Sequence[float] | np.ndarray,
    alpha: float,
    t0: float,
    t_star: float,
    step: float,
) -> Position:
    """Position with history w(t) = w0 + coef * (t - t0)**alpha.

    Its Caputo derivative is the constant coef * Gamma(1 + alpha), which makes
    the pair handy as a nontrivial yet exactly representable initial segment.
    """
    alpha = _alpha_of(alpha)
    w0 = np.atleast_1d(np.asarray(w0, dtype=float))
    coef = np.atleast_1d(np.asarray(coef, dtype=float))
    count = _grid_count(t_star - t0, step, what="history span")
    tt = step * np.arange(count + 1)
    vals = w0[None, :] + coef[None, :] * (tt**alpha)[:, None]
    phi = np.tile(coef * math.gamma(1.0 + alpha), (count + 1, 1))
    return Position(SampledFunction(t0, step, vals), SampledFunction(t0, step, phi))


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    max_growth_excess: float
    max_consistency_error: float
    start_radius: float


def check_admissibility(
    pos: Position,
    R0: float,
    growth_c: float,
    alpha: float,
    *,
    growth_rtol: float = 1e-8,
    consistency_atol: float | None = None,
) -> AdmissibilityReport:
    """Verify the defining properties of an admissible position.

    Checks that the motion starts inside the ball of radius R0, that the
    stored Caputo-derivative samples obey the sublinear growth bound, and
    that the state history is reproduced by fractionally integrating those
    samples.  Sampled data cannot verify almost-everywhere statements
    exactly, so the growth check uses a small relative slack and the
    integral consistency check a quadrature-scaled absolute one.
    """
    alpha = _alpha_of(alpha)
    start_radius = float(np.linalg.norm(pos.w.values[0]))
    norms_w = np.linalg.norm(pos.w.values, axis=1)
    norms_phi = np.linalg.norm(pos.phi.values, axis=1)
    allowed = (1.0 + norms_w) * growth_c
    growth_excess = float(np.max(norms_phi - allowed * (1.0 + growth_rtol)))
    if pos.w.sample_count > 1:
        recon = rl_integral(pos.phi, alpha)
        consistency = float(
            np.max(np.linalg.norm(pos.w.values - pos.w.values[0] - recon.values, axis=1))
        )
        if consistency_atol is None:
            consistency_atol = (
                10.0
                * pos.w.step ** (1.0 + alpha)
                * (1.0 + float(np.max(norms_phi)))
                * pos.w.sample_count**0.5
            )
    else:
        consistency = 0.0
        consistency_atol = consistency_atol or 1.0
    ok = (
        start_radius <= R0 * (1.0 + growth_rtol)
        and growth_excess <= 0.0
        and consistency <= consistency_atol
    )
    return AdmissibilityReport(ok, max(growth_excess, 0.0), consistency, start_radius)


def require_admissible(pos: Position, R0: float, growth_c: float, alpha: float) -> None:
    report = check_admissibility(pos, R0, growth_c, alpha)
    if not report.ok:
        raise AdmissibilityError(
            "initial position fails admissibility: "
            f"start radius {report.start_radius} (R0 = {R0}), "
            f"growth excess {report.max_growth_excess}, "
            f"consistency error {report.max_consistency_error}"
        )


class PiecewiseConstantControl:
    """A right-continuous step function of time with values in R^dim.

    The value on [breaks[i], breaks[i+1]) is values[i]; the final value
    extends up to and including `end`.  A zero-length control (start == end,
    no breaks) is allowed as an empty tail for concatenation.
    """

    __slots__ = ("breaks", "values", "end")

    def __init__(
        self,
        breaks: Sequence[float] | np.ndarray,
        values: Sequence[Sequence[float]] | np.ndarray,
        end: float,
    ) -> None:
        b = np.asarray(breaks, dtype=float).reshape(-1)
        vals = np.asarray(values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if b.size != vals.shape[0]:
            raise ValueError("need one value per break time")
        if b.size == 0:
            self.breaks = b
            self.values = vals.reshape(0, max(vals.shape[1] if vals.ndim == 2 else 1, 1))
            self.end = float(end)
            return
        if np.any(np.diff(b) <= 0):
            raise ValueError("break times must be strictly increasing")
        if not end > b[-1] - _TOL:
            raise ValueError("end time must not precede the last break")
        b.setflags(write=False)
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        self.breaks = b
        self.values = vals
        self.end = float(end)

    @classmethod
    def constant(
        cls, value: Sequence[float] | np.ndarray, start: float, end: float
    ) -> "PiecewiseConstantControl":
        return cls(np.array([start]), np.atleast_1d(np.asarray(value, float))[None, :], end)

    @property
    def start(self) -> float:
        return float(self.breaks[0]) if self.breaks.size else self.end

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def is_empty(self) -> bool:
        return self.breaks.size == 0

    def value_at(self, t: float) -> np.ndarray:
        if self.is_empty:
            raise ValueError("empty control has no values")
        if t < self.start - _TOL or t > self.end + _TOL:
            raise ValueError(f"time {t} outside control domain [{self.start}, {self.end}]")
        idx = int(np.searchsorted(self.breaks, t + _TOL, side="right")) - 1
        return self.values[max(idx, 0)]

    def restrict(self, a: float, b: float) -> "PiecewiseConstantControl":
        """The same control viewed on the subinterval [a, b]."""
        if a < self.start - _TOL or b > self.end + _TOL or b <= a:
            raise ValueError("restriction window must sit inside the control domain")
        inside = (self.breaks > a + _TOL) & (self.breaks < b - _TOL)
        b_new = np.concatenate(([a], self.breaks[inside]))
        v_new = np.vstack([self.value_at(a)[None, :], self.values[inside]])
        return PiecewiseConstantControl(b_new, v_new, b)


def concatenate_controls(
    first: PiecewiseConstantControl, second: PiecewiseConstantControl
) -> PiecewiseConstantControl:
    """Join two control realizations on abutting time intervals."""
    if abs(second.start - first.end) > _TOL * max(1.0, abs(first.end)):
        raise ValueError(
            f"controls do not abut: first ends at {first.end}, "
            f"second starts at {second.start}"
        )
    if second.is_empty:
        return first
    if first.is_empty:
        return second
    if first.dim != second.dim:
        raise ValueError("control dimensions differ")
    return PiecewiseConstantControl(
        np.concatenate([first.breaks, second.breaks]),
        np.vstack([first.values, second.values]),
        second.end,
    )


class Partition:
    """Strictly increasing decision times tau_1 < ... < tau_{k+1}."""

    __slots__ = ("times",)

    def __init__(self, times: Sequence[float] | np.ndarray) -> None:
        t = np.asarray(times, dtype=float).reshape(-1)
        if t.size < 2:
            raise ValueError("a partition needs at least two times")
        if np.any(np.diff(t) <= 0):
            raise ValueError("partition times must be strictly increasing")
        t.setflags(write=False)
        self.times = t

    @classmethod
    def uniform(cls, start: float, end: float, steps: int) -> "Partition":
        if steps < 1:
            raise ValueError("need at least one step")
        return cls(np.linspace(start, end, steps + 1))

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> int:
        return self.times.size - 1

    @property
    def diameter(self) -> float:
        return float(np.max(np.diff(self.times)))

    def require_lattice(self, t0: float, h: float) -> None:
        for t in self.times:
            _grid_count(t - t0, h, what=f"partition time {t}")


@dataclass(frozen=True)
class SystemBounds:
    """A-priori constants of the game: state radius, derivative and modulus bounds."""

    R1: float
    M1: float
    H1: float
    L1: float
    holder_const: float

    def __post_init__(self) -> None:
        if not (self.R1 >= 0 and self.M1 >= 0 and self.H1 >= 0):
            raise ValueError("bounds must be nonnegative")
        if self.L1 < self.M1 - 1e-12:
            raise ValueError("guide slope bound must dominate the derivative bound")


def bound_constants(
    dyn: Dynamics, R0: float, t0: float, theta: float, alpha: float
) -> SystemBounds:
    """A-priori bounds on every motion from a ball of admissible starts.

    The state stays inside radius R1 obtained from the comparison equation
    with sublinear growth (a Mittag-Leffler bound), the Caputo derivative is
    bounded by M1 = (1 + R1) * c, and increments obey a Holder bound with
    constant H1 = (2 / Gamma(1 + alpha)) * M1 and exponent alpha.
    """
    alpha = _alpha_of(alpha)
    if theta <= t0:
        raise ValueError("horizon must exceed the start time")
    if R0 < 0:
        raise ValueError("R0 must be nonnegative")
    z = (theta - t0) ** alpha * dyn.growth_c
    R1 = (1.0 + R0) * mittag_leffler(alpha, z, series_limit=max(25.0, z)) - 1.0
    M1 = (1.0 + R1) * dyn.growth_c
    holder = 2.0 / math.gamma(1.0 + alpha)
    return SystemBounds(R1=R1, M1=M1, H1=holder * M1, L1=M1, holder_const=holder)


@dataclass(frozen=True)
class IsaacsReport:
    gaps: np.ndarray
    max_gap: float

    @property
    def ok(self) -> bool:
        return self.max_gap <= 1e-9


def check_isaacs(
    dyn: Dynamics,
    u_set: ControlSet,
    v_set: ControlSet,
    probes: Sequence[tuple[float, np.ndarray, np.ndarray]],
) -> IsaacsReport:
    """Gap between min-max and max-min of <s, f(t, x, u, v)> over the grids.

    The saddle-point (small game) condition holds on a probe exactly when the
    gap vanishes there.  For rhs functions that separate into a u-part plus a
    v-part the gap is identically zero.
    """
    gaps = np.zeros(len(probes))
    for k, (t, x, s) in enumerate(probes):
        payoff = np.array(
            [
                [float(np.dot(s, dyn.f(t, x, u_set[i], v_set[j]))) for j in range(len(v_set))]
                for i in range(len(u_set))
            ]
        )
        minmax = payoff.max(axis=1).min()
        maxmin = payoff.min(axis=0).max()
        gaps[k] = minmax - maxmin
    max_gap = float(np.max(gaps)) if len(probes) else 0.0
    return IsaacsReport(gaps=gaps, max_gap=max_gap)


@dataclass(frozen=True)
class QualityIndex:
    """Continuous payoff functional of the whole motion.

    Supported kinds: "terminal_linear" (weights . x(theta) + offset),
    "terminal_norm" (|x(theta)|), "running_max_norm" (max_t |x(t)|), and
    "terminal_custom" with an arbitrary continuous function of x(theta).
    """

    kind: str
    weights: tuple[float, ...] | None = None
    offset: float = 0.0
    terminal_fn: Callable[[np.ndarray], float] | None = None

    def __post_init__(self) -> None:
        kinds = {"terminal_linear", "terminal_norm", "running_max_norm", "terminal_custom"}
        if self.kind not in kinds:
            raise ValueError(f"unknown quality index kind {self.kind!r}")
        if self.kind == "terminal_linear" and self.weights is None:
            raise ValueError("terminal_linear needs weights")
        if self.kind == "terminal_custom" and self.terminal_fn is None:
            raise ValueError("terminal_custom needs terminal_fn")

    def evaluate(self, traj: SampledFunction) -> float:
        if self.kind == "terminal_linear":
            return float(np.dot(np.asarray(self.weights), traj.values[-1]) + self.offset)
        if self.kind == "terminal_norm":
            return float(np.linalg.norm(traj.values[-1]))
        if self.kind == "running_max_norm":
            return float(np.max(np.linalg.norm(traj.values, axis=1)))
        return float(self.terminal_fn(traj.values[-1]))

    def evaluate_many(self, paths: np.ndarray) -> np.ndarray:
        """Payoffs of a batch of sampled trajectories, shaped (N, samples, dim)."""
        paths = np.asarray(paths, dtype=float)
        if paths.ndim != 3:
            raise ValueError("batched payoff needs an (N, samples, dim) array")
        if self.kind == "terminal_linear":
            return paths[:, -1, :] @ np.asarray(self.weights) + self.offset
        if self.kind == "terminal_norm":
            return np.linalg.norm(paths[:, -1, :], axis=1)
        if self.kind == "running_max_norm":
            return np.max(np.linalg.norm(paths, axis=2), axis=1)
        return np.array([float(self.terminal_fn(x)) for x in paths[:, -1, :]])


def evaluate_quality(sigma: QualityIndex, pos: Position, theta: float) -> float:
    """Quality of a full motion; the trajectory must reach the horizon."""
    if abs(pos.t - theta) > _TOL * max(1.0, abs(theta)):
        raise ValueError(f"trajectory ends at {pos.t}, expected horizon {theta}")
    return sigma.evaluate(pos.w)


def solve_caputo(
    dyn: Dynamics,
    init: Position,
    alpha: float,
    u: PiecewiseConstantControl,
    v: PiecewiseConstantControl,
    grid_step: float,
    bounds: SystemBounds | None = None,
) -> Position:
    """Continue the motion under given controls via the Volterra form.

    Integrates
        x(t) = w(t0) + (1/Gamma(alpha)) * [ integral over the stored history
               of phi against the kernel + integral of f(., x, u, v) from the
               current time ]
    with an Adams-type predictor (product rectangle) and a single corrector
    pass (product trapezoid), both exact for piecewise-linear integrands
    against the weakly singular kernel.  Control values are sampled at grid
    nodes right-continuously; the returned position stores the corrected
    Caputo-derivative samples so the motion can be restarted from any node.

    Parameters
    ----------
    dyn : controlled right-hand side.
    init : admissible position at the start of the controlled interval.
    alpha : Caputo order in (0, 1).
    u, v : piecewise-constant controls covering [init.t, T] with switch
        times on the solver grid.
    grid_step : solver step; must equal the history step when the history
        has more than one sample.
    bounds : optional a-priori bounds enabling the blow-up guard at 10 * R1.
    """
    alpha = _alpha_of(alpha)
    t_star = init.t
    for name, ctl in (("u", u), ("v", v)):
        if ctl.is_empty:
            raise ValueError(f"control {name} is empty")
        if abs(ctl.start - t_star) > _TOL * max(1.0, abs(t_star)):
            raise ValueError(f"control {name} starts at {ctl.start}, expected {t_star}")
    if abs(u.end - v.end) > _TOL * max(1.0, abs(u.end)):
        raise ValueError("controls must share one end time")
    T = u.end
    g = float(grid_step)
    if g <= 0:
        raise ValueError("grid step must be positive")
    K = init.w.sample_count - 1
    if K > 0 and abs(init.w.step - g) > _TOL * g:
        raise AlignmentError(
            f"grid step {g} must match the history step {init.w.step}"
        )
    M = _grid_count(T - t_star, g, what="controlled span")
    if M < 1:
        raise ValueError("controls must cover at least one grid step")
    for name, ctl in (("u", u), ("v", v)):
        for b in ctl.breaks:
            _grid_count(b - t_star, g, what=f"switch time {b} of {name}")

    n = init.dim
    guard = 10.0 * bounds.R1 if bounds is not None else math.inf
    gam = math.gamma(alpha)
    hist_phi = init.phi.values  # original history, junction value included
    w0 = init.w.values[0]

    times_new = t_star + g * np.arange(M + 1)
    u_nodes = np.array([u.value_at(t) for t in times_new])
    v_nodes = np.array([v.value_at(t) for t in times_new])

    base = np.arange(K + M + 1, dtype=float)
    tables = (base**alpha, base ** (alpha + 1.0))
    rect = (tables[0][1:] - tables[0][:-1]) / alpha  # rectangle kernel weights

    x_vals = np.vstack([init.w.values, np.zeros((M, n))])
    phi_vals = np.vstack([init.phi.values, np.zeros((M, n))])
    F = np.zeros((M + 1, n))
    F[0] = dyn.f(t_star, init.state(), u_nodes[0], v_nodes[0])
    phi_vals[K] = F[0]  # the junction node belongs to the new control regime

    ga = g**alpha
    for m in range(1, M + 1):
        t_m = times_new[m]
        if K > 0:
            w_hist = product_trapezoid_weights(K, K + m, alpha, tables)
            hist = ga * (w_hist @ hist_phi)
        else:
            hist = 0.0
        pred = w0 + (hist + ga * (rect[m - 1 :: -1] @ F[:m])) / gam
        f_pred = dyn.f(t_m, pred, u_nodes[m], v_nodes[m])
        w_corr = product_trapezoid_weights(m, m, alpha, tables)
        x_m = w0 + (hist + ga * (w_corr[:m] @ F[:m] + w_corr[m] * f_pred)) / gam
        norm = float(np.linalg.norm(x_m))
        if not math.isfinite(norm) or norm > guard:
            raise BlowUpError(
                f"motion norm {norm} exceeded the blow-up guard {guard} at t = {t_m}"
            )
        F[m] = dyn.f(t_m, x_m, u_nodes[m], v_nodes[m])
        x_vals[K + m] = x_m
        phi_vals[K + m] = F[m]

    return Position(
        SampledFunction(init.t0, g, x_vals),
        SampledFunction(init.t0, g, phi_vals),
    )


@dataclass(frozen=True)
class MotionBoundReport:
    max_norm: float
    norm_limit: float
    max_holder_quotient: float
    holder_limit: float
    tol: float

    @property
    def ok(self) -> bool:
        return (
            self.max_norm <= self.norm_limit + self.tol
            and self.max_holder_quotient <= self.holder_limit + self.tol
        )


def motion_bound_check(
    pos: Position,
    bounds: SystemBounds,
    alpha: float,
    *,
    tol: float | None = None,
    max_pairs: int = 512,
) -> MotionBoundReport:
    """Check the a-priori norm bound and the Holder modulus on a motion.

    The default tolerance is 10 * step**alpha, matching the discretization
    scale of the sampled trajectory.  Pairs are subsampled for long grids.
    """
    alpha = _alpha_of(alpha)
    w = pos.w
    if tol is None:
        tol = 10.0 * w.step**alpha
    norms = np.linalg.norm(w.values, axis=1)
    stride = max(1, (w.sample_count - 1) // max_pairs) if w.sample_count > 1 else 1
    vals = w.values[::stride]
    tt = w.times()[::stride]
    if vals.shape[0] >= 2:
        diff = vals[:, None, :] - vals[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        dt = np.abs(tt[:, None] - tt[None, :]) ** alpha
        mask = dt > 0
        quot = float(np.max(dist[mask] / dt[mask]))
    else:
        quot = 0.0
    return MotionBoundReport(
        max_norm=float(np.max(norms)),
        norm_limit=bounds.R1,
        max_holder_quotient=quot,
        holder_limit=bounds.H1,
        tol=float(tol),
    )
