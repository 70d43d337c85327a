"""Fractional-calculus kernels on uniformly sampled trajectories.

Grunwald-Letnikov difference weights, product-trapezoidal Riemann-Liouville
integrals, the L1 Caputo derivative, and a plain-series Mittag-Leffler
evaluator.  Every operator works on :class:`SampledFunction` values living on
a uniform time grid; everything is a pure function of its arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "AlignmentError",
    "FractionalOrder",
    "GLCoefficients",
    "SampledFunction",
    "SeriesConvergenceError",
    "caputo_derivative",
    "fractional_difference",
    "gl_coefficients",
    "mittag_leffler",
    "product_trapezoid_weights",
    "rl_integral",
]

_REL_TOL = 1e-9


class AlignmentError(ValueError):
    """A time or step does not sit on the required uniform grid."""


class SeriesConvergenceError(RuntimeError):
    """A power series failed to meet its stopping criterion under the term cap."""


def _check_order(alpha: float, *, allow_one: bool = False) -> float:
    alpha = float(alpha)
    hi_ok = alpha <= 1.0 if allow_one else alpha < 1.0
    if not (0.0 < alpha and hi_ok and math.isfinite(alpha)):
        rng = "(0, 1]" if allow_one else "(0, 1)"
        raise ValueError(f"fractional order must lie in {rng}, got {alpha}")
    return alpha


@dataclass(frozen=True)
class FractionalOrder:
    """A differentiation order strictly between 0 and 1."""

    alpha: float

    def __post_init__(self) -> None:
        _check_order(self.alpha)

    @property
    def beta(self) -> float:
        """Complementary order 1 - alpha used by the difference operator."""
        return 1.0 - self.alpha


def _alpha_of(order: float | FractionalOrder) -> float:
    if isinstance(order, FractionalOrder):
        return order.alpha
    return _check_order(order)


class SampledFunction:
    """A vector-valued function sampled on the uniform grid t0 + k*step.

    Values are stored as a read-only (num_samples, dim) array.  Scalar
    trajectories use dim == 1.
    """

    __slots__ = ("t0", "step", "values")

    def __init__(self, t0: float, step: float, values: np.ndarray) -> None:
        step = float(step)
        if not (step > 0.0 and math.isfinite(step)):
            raise ValueError(f"grid step must be positive, got {step}")
        vals = np.asarray(values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] < 1:
            raise ValueError("values must be a non-empty 1-D or 2-D array")
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        self.t0 = float(t0)
        self.step = step
        self.values = vals

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def sample_count(self) -> int:
        return self.values.shape[0]

    @property
    def end_time(self) -> float:
        return self.t0 + (self.sample_count - 1) * self.step

    def times(self) -> np.ndarray:
        return self.t0 + self.step * np.arange(self.sample_count)

    def index_at(self, t: float) -> int:
        """Exact grid index of time t; raises AlignmentError off-grid."""
        idx = _grid_count(t - self.t0, self.step, what=f"time {t}")
        if idx < 0 or idx >= self.sample_count:
            raise AlignmentError(
                f"time {t} outside sampled range [{self.t0}, {self.end_time}]"
            )
        return idx

    def value_at(self, t: float) -> np.ndarray:
        return self.values[self.index_at(t)]

    def shifted_by_initial(self) -> "SampledFunction":
        """Same samples with the first value subtracted from every sample."""
        return SampledFunction(self.t0, self.step, self.values - self.values[0])

    def restrict(self, until: float) -> "SampledFunction":
        return SampledFunction(self.t0, self.step, self.values[: self.index_at(until) + 1])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"SampledFunction(t0={self.t0}, step={self.step}, "
            f"samples={self.sample_count}, dim={self.dim})"
        )


def _grid_count(span: float, step: float, *, what: str = "span") -> int:
    """Integer number of steps in `span`, enforcing exact grid alignment."""
    ratio = span / step
    idx = int(round(ratio))
    if abs(ratio - idx) > _REL_TOL * max(1.0, abs(ratio)):
        raise AlignmentError(f"{what} is not an integer multiple of step {step}")
    return idx


@dataclass(frozen=True)
class GLCoefficients:
    """Grunwald-Letnikov weights c_i = (-1)^i * binom(beta, i) for a given beta."""

    beta: float
    coeffs: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.coeffs)

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.coeffs)


@lru_cache(maxsize=128)
def _gl_array(beta: float, count: int) -> np.ndarray:
    idx = np.arange(1, count)
    coeffs = np.concatenate(([1.0], np.cumprod((idx - 1.0 - beta) / idx)))
    coeffs.setflags(write=False)
    return coeffs


def gl_coefficients(order: float | FractionalOrder, count: int) -> GLCoefficients:
    """First `count` weights of the order-(1-alpha) backward difference.

    The weights follow the stable recurrence c_0 = 1,
    c_i = c_{i-1} * (i - 1 - beta) / i with beta = 1 - alpha.  For
    beta in (0, 1) every weight past the zeroth is negative and the partial
    sums decrease strictly from 1 toward 0.
    """
    alpha = _alpha_of(order)
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    return GLCoefficients(beta=1.0 - alpha, coeffs=_gl_array(1.0 - alpha, count))


def fractional_difference(
    y: SampledFunction, order: float | FractionalOrder, h: float, t: float
) -> np.ndarray:
    """Undivided Grunwald-Letnikov difference of order 1 - alpha at time t.

    Evaluates sum_{i=0}^{m} c_i * y(t - i*h) with m = floor((t - t0) / h).
    The lattice step h must be an integer multiple of the sampling step of y
    so that every lattice point falls on a stored sample.
    """
    alpha = _alpha_of(order)
    stride = _grid_count(h, y.step, what=f"lattice step {h}")
    if stride < 1:
        raise AlignmentError(f"lattice step {h} smaller than sampling step {y.step}")
    top = y.index_at(t)
    window = y.values[top::-stride]
    coeffs = gl_coefficients(alpha, window.shape[0]).coeffs
    return coeffs @ window


def product_trapezoid_weights(
    num_subintervals: int,
    target_index: int,
    order: float,
    power_tables: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Quadrature weights for the weakly singular kernel against a linear interpolant.

    For nodes tau_j = tau_0 + j*g, j = 0..K (K = num_subintervals) and target
    t_N = tau_0 + N*g with N >= K, returns W of length K + 1 such that

        integral_{tau_0}^{tau_K} (t_N - tau)^(order-1) * p(tau) dtau
            = g**order * sum_j W[j] * p(tau_j)

    exactly for every p that is linear on each subinterval.  `power_tables`
    may supply precomputed arrays (i**order, i**(order+1)) for i = 0..N to
    avoid repeated power evaluations in long solver loops.

    Parameters
    ----------
    num_subintervals : number of grid cells K covered by the integral.
    target_index : offset N of the kernel singularity in grid steps.
    order : kernel exponent in (0, 1).
    power_tables : optional (i**order, i**(order+1)) tables of length >= N+1.
    """
    K = int(num_subintervals)
    N = int(target_index)
    if K < 0 or N < K:
        raise ValueError(f"need 0 <= num_subintervals <= target_index, got {K}, {N}")
    alpha = _check_order(order)
    W = np.zeros(K + 1)
    if K == 0:
        return W
    if power_tables is None:
        base = np.arange(N + 1, dtype=float)
        pa = base**alpha
        pb = base ** (alpha + 1.0)
    else:
        pa, pb = power_tables
    d = np.arange(N, N - K, -1, dtype=float)  # distance target -> left node, j = 0..K-1
    da, ea = pa[N - K + 1 : N + 1][::-1], pa[N - K : N][::-1]
    db, eb = pb[N - K + 1 : N + 1][::-1], pb[N - K : N][::-1]
    right = d * (da - ea) / alpha - (db - eb) / (alpha + 1.0)
    left = (da - ea) / alpha - right
    W[:-1] += left
    W[1:] += right
    return W


def rl_integral(x: SampledFunction, order: float | FractionalOrder) -> SampledFunction:
    """Riemann-Liouville integral of x on its own grid via product trapezoid.

    Returns the samples of
    (I^order x)(t) = (1 / Gamma(order)) * integral_{t0}^{t} x(tau) (t - tau)^(order-1) dtau,
    using exact integration of the piecewise-linear interpolant of x against
    the kernel on every subinterval, which is well defined through the
    integrable endpoint singularity.
    """
    alpha = _alpha_of(order)
    n = x.sample_count - 1
    out = np.zeros_like(x.values)
    if n == 0:
        return SampledFunction(x.t0, x.step, out)
    base = np.arange(n + 1, dtype=float)
    tables = (base**alpha, base ** (alpha + 1.0))
    scale = x.step**alpha / math.gamma(alpha)
    for m in range(1, n + 1):
        w = product_trapezoid_weights(m, m, alpha, tables)
        out[m] = scale * (w @ x.values[: m + 1])
    return SampledFunction(x.t0, x.step, out)


def caputo_derivative(x: SampledFunction, order: float | FractionalOrder) -> SampledFunction:
    """Caputo derivative samples via the L1 scheme.

    Uses the piecewise-linear reconstruction of x inside the Riemann-Liouville
    kernel, i.e. the classical L1 weights b_i = (i+1)^(1-alpha) - i^(1-alpha)
    applied to successive increments of x.  The sample at t0, where the
    defining integral is empty, repeats the first computable value.
    """
    alpha = _alpha_of(order)
    n = x.sample_count - 1
    if n < 1:
        raise ValueError("caputo_derivative needs at least 2 samples")
    idx = np.arange(n + 1, dtype=float)
    b = idx[1:] ** (1.0 - alpha) - idx[:-1] ** (1.0 - alpha)  # b[i] for i = 0..n-1
    dx = np.diff(x.values, axis=0)
    coef = x.step ** (-alpha) / math.gamma(2.0 - alpha)
    out = np.zeros_like(x.values)
    for k in range(1, n + 1):
        out[k] = coef * (b[k - 1 :: -1] @ dx[:k])
    out[0] = out[1]
    return SampledFunction(x.t0, x.step, out)


def mittag_leffler(
    alpha: float,
    z: float,
    *,
    series_limit: float = 20.0,
    max_terms: int = 10_000,
    rtol: float = 1e-14,
) -> float:
    """One-parameter Mittag-Leffler function E_alpha(z) by direct summation.

    Terms z^k / Gamma(alpha*k + 1) are accumulated in log space until two
    successive terms fall below rtol times the partial sum.  Arguments beyond
    `series_limit` in magnitude are rejected to keep the plain series in a
    regime where it is numerically trustworthy.
    """
    alpha = _check_order(alpha, allow_one=True)
    z = float(z)
    if abs(z) > series_limit:
        raise ValueError(
            f"|z| = {abs(z)} exceeds the series safety limit {series_limit}"
        )
    if z == 0.0:
        return 1.0
    log_abs_z = math.log(abs(z))
    total = 0.0
    small_streak = 0
    for k in range(max_terms):
        term = math.exp(k * log_abs_z - math.lgamma(alpha * k + 1.0))
        if z < 0.0 and k % 2 == 1:
            term = -term
        total += term
        if abs(term) < rtol * max(abs(total), 1e-300):
            small_streak += 1
            if small_streak >= 2:
                return total
        else:
            small_streak = 0
    raise SeriesConvergenceError(
        f"Mittag-Leffler series did not converge within {max_terms} terms"
    )
