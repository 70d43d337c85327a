"""First-order retarded guide system approximating the fractional dynamics.

The guide integrates an ordinary differential equation for an auxiliary
trajectory y and recovers an approximate state of the fractional system
through a scaled Grunwald-Letnikov difference of y over a lattice of step h.
Between lattice points the reconstructed state is held constant, matching
the integer-part truncation inside the difference operator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import BlowUpError, Dynamics, Position, SystemBounds
from .fractional import (
    SampledFunction,
    _alpha_of,
    _grid_count,
    gl_coefficients,
    rl_integral,
)

__all__ = [
    "GuideConfig",
    "GuideLipschitzReport",
    "GuideState",
    "initial_guide_segment",
    "guide_lipschitz_check",
    "position_distance",
    "reconstruct_state",
    "reconstructed_path",
    "step_guide",
]

_TOL = 1e-9


@dataclass(frozen=True)
class GuideConfig:
    """Static data of the guide: anchor state, lattice step, and Euler substep."""

    w0: tuple[float, ...]
    h: float
    alpha: float
    euler_step: float | None = None

    def __post_init__(self) -> None:
        _alpha_of(self.alpha)
        if not self.h > 0:
            raise ValueError("lattice step h must be positive")
        object.__setattr__(self, "w0", tuple(float(c) for c in self.w0))
        es = self.h if self.euler_step is None else float(self.euler_step)
        if not es > 0:
            raise ValueError("euler step must be positive")
        # the lattice must be a sublattice of the integration grid
        _grid_count(self.h, es, what="lattice step h")
        object.__setattr__(self, "euler_step", es)

    @property
    def substeps_per_h(self) -> int:
        return _grid_count(self.h, self.euler_step, what="lattice step h")

    @property
    def anchor(self) -> np.ndarray:
        return np.asarray(self.w0)


class GuideState:
    """Guide trajectory y on [t0, t], sampled on the Euler grid, with y(t0) = 0."""

    __slots__ = ("y", "config")

    def __init__(self, y: SampledFunction, config: GuideConfig) -> None:
        if float(np.max(np.abs(y.values[0]))) > _TOL:
            raise ValueError("guide trajectory must start at zero")
        if abs(y.step - config.euler_step) > _TOL * config.euler_step:
            raise ValueError("guide trajectory step must equal the Euler substep")
        self.y = y
        self.config = config

    @property
    def t(self) -> float:
        return self.y.end_time

    @property
    def t0(self) -> float:
        return self.y.t0

    @property
    def dim(self) -> int:
        return self.y.dim

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"GuideState(t={self.t}, dim={self.dim}, h={self.config.h})"


def initial_guide_segment(init: Position, config: GuideConfig) -> GuideState:
    """Guide history matching an admissible position of the original system.

    Applies the order-(1 - alpha) fractional integral to the centered state
    history, which continues into the guide dynamics with a bounded slope.
    The Euler substep must subsample the history grid exactly.
    """
    anchor = config.anchor
    if init.dim != anchor.size:
        raise ValueError("position dimension does not match the guide anchor")
    if float(np.max(np.abs(init.w.values[0] - anchor))) > 1e-7:
        raise ValueError("guide anchor must equal the initial state of the history")
    if init.w.sample_count == 1:
        y = SampledFunction(init.t0, config.euler_step, np.zeros((1, init.dim)))
        return GuideState(y, config)
    stride = _grid_count(config.euler_step, init.w.step, what="euler step")
    sub = SampledFunction(
        init.t0, config.euler_step, init.w.values[::stride] - init.w.values[0]
    )
    if abs(sub.end_time - init.t) > _TOL * max(1.0, abs(init.t)):
        raise ValueError("euler grid must reach the end of the history exactly")
    y = rl_integral(sub, 1.0 - config.alpha)
    return GuideState(y, config)


def _lattice_index(g: GuideState, t: float) -> int:
    """Index of the lattice point at or below t, in Euler-grid units."""
    cfg = g.config
    spp = cfg.substeps_per_h
    k = _grid_count(t - g.t0, cfg.euler_step, what=f"time {t}")
    if k < 0 or k > g.y.sample_count - 1:
        raise ValueError(f"time {t} outside the guide trajectory")
    return (k // spp) * spp


def reconstruct_state(g: GuideState, t: float) -> np.ndarray:
    """Approximate state of the fractional system read off the guide at time t.

    Evaluates anchor + h**(alpha-1) * (GL difference of y of order 1 - alpha)
    at the lattice point at or below t.
    """
    cfg = g.config
    idx = _lattice_index(g, t)
    spp = cfg.substeps_per_h
    window = g.y.values[idx::-spp]
    coeffs = gl_coefficients(cfg.alpha, window.shape[0]).coeffs
    return cfg.anchor + cfg.h ** (cfg.alpha - 1.0) * (coeffs @ window)


def reconstructed_path(g: GuideState, until: float | None = None) -> SampledFunction:
    """Reconstructed states at every lattice point of [t0, until] as a trajectory.

    The reconstruction at lattice index i is the GL-weighted sum over the
    window y(i h), y((i-1) h), ..., y(0), which over all i at once is a
    discrete convolution of the weight sequence with the lattice samples.
    """
    cfg = g.config
    until = g.t if until is None else until
    m = _grid_count(until - g.t0, cfg.h, what="path end")
    spp = cfg.substeps_per_h
    if m * spp > g.y.sample_count - 1:
        raise ValueError(f"time {until} outside the guide trajectory")
    lattice = g.y.values[: m * spp + 1 : spp]
    coeffs = gl_coefficients(cfg.alpha, m + 1).coeffs
    vals = np.empty((m + 1, g.dim))
    for d in range(g.dim):
        vals[:, d] = np.convolve(coeffs, lattice[:, d])[: m + 1]
    vals = np.asarray(cfg.anchor) + cfg.h ** (cfg.alpha - 1.0) * vals
    return SampledFunction(g.t0, cfg.h, vals)


def step_guide(
    g: GuideState,
    dyn: Dynamics,
    p: np.ndarray,
    q: np.ndarray,
    until: float,
    *,
    max_norm: float | None = None,
) -> GuideState:
    """Advance the guide to `until` under constant controls by explicit Euler.

    Each substep evaluates the right-hand side at the current substep time
    with the state reconstructed at the lattice point at or below it, so the
    driving state is piecewise constant on the lattice.
    """
    cfg = g.config
    steps = _grid_count(until - g.t, cfg.euler_step, what="advance span")
    if steps < 0:
        raise ValueError("cannot step the guide backwards")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    es = cfg.euler_step
    scale = cfg.h ** (cfg.alpha - 1.0)
    anchor = cfg.anchor
    spp = cfg.substeps_per_h
    y_old = g.y.values
    count = y_old.shape[0]
    vals = np.vstack([y_old, np.zeros((steps, g.dim))])
    coeffs_cache = gl_coefficients(cfg.alpha, (count + steps) // spp + 2).coeffs
    rhs = dyn.f  # validating call on the first substep only, raw rhs after
    for k in range(steps):
        top = count + k - 1  # index of the current sample
        t_sub = g.t0 + es * (count + k - 1)
        latt = ((count + k - 1) // spp) * spp
        window = vals[latt::-spp]
        state = anchor + scale * (coeffs_cache[: window.shape[0]] @ window)
        if max_norm is not None:
            sq = float(state @ state)
            if not math.isfinite(sq) or sq > max_norm * max_norm:
                raise BlowUpError(
                    f"guide state norm {math.sqrt(sq) if math.isfinite(sq) else sq} "
                    f"exceeded the guard {max_norm} at t = {t_sub}"
                )
        vals[top + 1] = vals[top] + es * rhs(t_sub, state, p, q)
        rhs = dyn.rhs
    return GuideState(SampledFunction(g.t0, es, vals), cfg)


@dataclass(frozen=True)
class GuideLipschitzReport:
    max_slope: float
    limit: float

    @property
    def ok(self) -> bool:
        return self.max_slope <= self.limit * (1.0 + 1e-9) + 1e-12


def guide_lipschitz_check(g: GuideState, bounds: SystemBounds) -> GuideLipschitzReport:
    """Largest per-substep slope of y against the a-priori guide bound."""
    if g.y.sample_count < 2:
        return GuideLipschitzReport(0.0, bounds.L1)
    slopes = np.linalg.norm(np.diff(g.y.values, axis=0), axis=1) / g.y.step
    return GuideLipschitzReport(float(np.max(slopes)), bounds.L1)


def position_distance(a: GuideState, b: GuideState) -> float:
    """Diagnostic symmetric distance between two guide positions.

    Compares the graphs of the two trajectories (time paired with value) by
    the two-sided Hausdorff distance over sampled points.  Used only for
    reporting; no algorithm in the package branches on it.
    """
    pa = np.hstack([a.y.times()[:, None], a.y.values])
    pb = np.hstack([b.y.times()[:, None], b.y.values])
    d = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
