"""Error-bound machinery: moduli of continuity, Lipschitz gauges, total
variation, and the bounded-variation convergence bound.

All smoothness gauges are grid under-estimates that converge to the true
supremum from below as the grid step shrinks; every estimate reports the
step it was computed with.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .basis import TailEpsilon, TruncationSpec
from .moments import central_moment, zeta, zeta_sq
from .operator import apply
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig
from .targets import TargetFunction


def _grid_values(g, ts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(g(ts), dtype=np.float64)
        if vals.shape == ts.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(g(float(t))) for t in ts])


@dataclass(frozen=True)
class ModulusEstimate:
    delta: float
    value: float
    grid_step: float
    domain: tuple[float, float]


def _modulus_grid(delta: float, domain, step):
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    lo, hi = domain if domain is not None else (0.0, 2.5 + 4.0 * delta)
    if hi <= lo:
        raise ValueError("empty domain")
    step = step if step is not None else delta / 64.0
    if step > delta / 8.0:
        raise ValueError("grid step must be <= delta/8")
    ts = np.arange(lo, hi + 0.5 * step, step)
    return ts, step, (lo, hi)


def modulus(g, delta: float, domain=None, step=None) -> ModulusEstimate:
    """First modulus of continuity: sup |g(y) - g(x)| over |y - x| <= delta."""
    ts, step, dom = _modulus_grid(delta, domain, step)
    vals = _grid_values(g, ts)
    shifts = int(math.floor(delta / step + 1e-9))
    best = 0.0
    for k in range(1, shifts + 1):
        best = max(best, float(np.max(np.abs(vals[k:] - vals[:-k]))))
    return ModulusEstimate(delta, best, step, dom)


def second_modulus(g, delta: float, domain=None, step=None) -> ModulusEstimate:
    """Second modulus: sup |g(x+h) - 2g(x) + g(x-h)| over 0 <= h <= delta."""
    ts, step, dom = _modulus_grid(delta, domain, step)
    vals = _grid_values(g, ts)
    shifts = int(math.floor(delta / step + 1e-9))
    best = 0.0
    for k in range(1, shifts + 1):
        d2 = vals[2 * k :] - 2.0 * vals[k:-k] + vals[: -2 * k]
        best = max(best, float(np.max(np.abs(d2))))
    return ModulusEstimate(delta, best, step, dom)


@dataclass(frozen=True)
class KFunctionalBound:
    """Pieces of the second-order bound |B(g;x) - g(x)| <= C*w2 + w.

    The multiplier C is not pinned by the theory, so only the two modulus
    components and the widths they were evaluated at are reported; callers
    combine them with their own constant.
    """

    delta_n: float
    gamma_n: float
    omega2_component: float
    omega_component: float

    def combined(self, c: float = 1.0) -> float:
        return c * self.omega2_component + self.omega_component


def kfunctional_bound(g, u: float, x: float, domain=None, step=None) -> KFunctionalBound:
    """Second-modulus error decomposition at (u, x).

    delta_n adds 1/u^2 to the second central moment, the extra term the
    shifted auxiliary operator picks up; gamma_n is the first central
    moment 1/u.
    """
    if u <= 0.0:
        raise ValueError(f"u must be positive, got {u}")
    if x < 0.0:
        raise ValueError(f"x must be >= 0, got {x}")
    delta_n = central_moment(u, x, 2) + 1.0 / u**2
    gamma_n = 1.0 / u
    w2 = second_modulus(g, math.sqrt(delta_n) / 2.0, domain=domain, step=step)
    w1 = modulus(g, gamma_n, domain=domain, step=step)
    return KFunctionalBound(delta_n, gamma_n, w2.value, w1.value)


def lipschitz_maximal(g, s: float, x: float, domain=None, step=None) -> float:
    """Grid estimate of sup_{t != x} |g(t) - g(x)| / |t - x|^s.

    Under-estimates the true supremum; tightens as the step shrinks.
    """
    if not 0.0 < s <= 1.0:
        raise ValueError(f"order s must lie in (0, 1], got {s}")
    if x < 0.0:
        raise ValueError(f"x must be >= 0, got {x}")
    lo, hi = domain if domain is not None else (0.0, max(2.5, x + 1.0))
    step = step if step is not None else (hi - lo) / 4096.0
    ts = np.arange(lo, hi + 0.5 * step, step)
    vals = _grid_values(g, ts)
    gx = float(_grid_values(g, np.array([x]))[0])
    dist = np.abs(ts - x)
    keep = dist > 0.5 * step
    return float(np.max(np.abs(vals[keep] - gx) / dist[keep] ** s))


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def lipschitz_bound_check(
    g: TargetFunction,
    s: float,
    u: float,
    x: float,
    domain=None,
    step=None,
    tol: float = 1e-9,
    trunc: TruncationSpec = TailEpsilon(),
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> BoundCheck:
    """Check |B(g;x) - g(x)| <= tau_s(g,x) * (second central moment)^{s/2}."""
    op = apply(g, u, x, trunc, cfg)
    gx = float(_grid_values(g, np.array([x]))[0])
    lhs = abs(op.value - gx)
    rhs = lipschitz_maximal(g, s, x, domain=domain, step=step) * central_moment(
        u, x, 2
    ) ** (s / 2.0)
    return BoundCheck(lhs, rhs, lhs <= rhs + tol)


def lip_space_bound(
    M: float, m1: float, m2: float, s: float, u: float, x: float
) -> float:
    """Bound M * (second central moment / (x(x m1 + m2)))^{s/2}.

    The denominator must be positive; at x = 0 or x(x m1 + m2) <= 0 the
    bound is vacuous and a ValueError is raised.
    """
    if M <= 0.0:
        raise ValueError(f"constant M must be positive, got {M}")
    if not 0.0 < s <= 1.0:
        raise ValueError(f"order s must lie in (0, 1], got {s}")
    if u <= 0.0:
        raise ValueError(f"u must be positive, got {u}")
    denom = x * (x * m1 + m2)
    if denom <= 0.0:
        raise ValueError(f"bound is vacuous: x(x*m1 + m2) = {denom} <= 0")
    return M * (central_moment(u, x, 2) / denom) ** (s / 2.0)


# ---------------------------------------------------------------------------
# total variation and the bounded-variation bound

@dataclass(frozen=True)
class TotalVariationEstimate:
    interval: tuple[float, float]
    value: float
    samples: int


def total_variation(
    f: Callable[[float], float],
    interval: tuple[float, float],
    samples: int = 2048,
    breakpoints: Sequence[float] = (),
) -> TotalVariationEstimate:
    """Variation sum over a uniform partition, refined near breakpoints.

    Converges to the true total variation from below for regulated f; the
    refinement brackets each declared jump within 1e-6 so its full height is
    picked up without a globally fine grid.
    """
    a, b = float(interval[0]), float(interval[1])
    if b < a:
        raise ValueError(f"empty interval [{a}, {b}]")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    if b == a:
        return TotalVariationEstimate((a, b), 0.0, 2)
    pts = list(np.linspace(a, b, samples))
    for bp in breakpoints:
        for t in (bp - 1e-6, bp, bp + 1e-6):
            if a < t < b:
                pts.append(t)
    grid = np.unique(np.asarray(pts, dtype=np.float64))
    vals = np.array([float(f(float(t))) for t in grid])
    tv = float(np.sum(np.abs(np.diff(vals))))
    return TotalVariationEstimate((a, b), tv, len(grid))


@dataclass(frozen=True)
class DbvSpec:
    """A target with derivative of bounded variation.

    gprime_left / gprime_right supply the one-sided derivatives everywhere
    (they agree away from breakpoints); breakpoints lists where g' jumps.
    """

    g: TargetFunction
    gprime_left: Callable[[float], float]
    gprime_right: Callable[[float], float]
    breakpoints: tuple[float, ...] = ()


def recentered_derivative(spec: DbvSpec, x: float) -> Callable[[float], float]:
    """Derivative recentered at x: g'(t) - g'(x-) below x, 0 at x, and
    g'(t) - g'(x+) above x.  Affine pieces collapse to 0, so its variation
    isolates the genuinely curved/jumpy part of g'."""
    left_ref = float(spec.gprime_left(x))
    right_ref = float(spec.gprime_right(x))

    def h(t: float) -> float:
        if t < x:
            return float(spec.gprime_right(t)) - left_ref
        if t > x:
            return float(spec.gprime_right(t)) - right_ref
        return 0.0

    return h


@dataclass(frozen=True)
class DbvBound:
    """Bounded-variation error bound split into its six summands."""

    derivative_mean: float
    derivative_jump: float
    variation_left_sum: float
    variation_left_edge: float
    variation_right_edge: float
    variation_right_sum: float
    total: float

    def terms(self) -> tuple[float, ...]:
        return (
            self.derivative_mean,
            self.derivative_jump,
            self.variation_left_sum,
            self.variation_left_edge,
            self.variation_right_edge,
            self.variation_right_sum,
        )


def dbv_bound(
    spec: DbvSpec, u: float, x: float, tv_samples: int = 2048
) -> DbvBound:
    """Error bound for targets with derivative of bounded variation.

    The variation sums run j = 1..floor(sqrt(u)): the printed form starts
    the sum at j = 0 where the interval endpoint x/j is undefined, and j = 1
    reproduces the integral-to-sum estimate the bound comes from.
    """
    if x <= 0.0:
        raise ValueError("bound has 1/x factors; x must be positive")
    if u <= 1.0:
        raise ValueError("need u > 1 so that x - x/sqrt(u) > 0")
    dl = float(spec.gprime_left(x))
    dr = float(spec.gprime_right(x))
    z2 = zeta_sq(u, x)
    h = recentered_derivative(spec, x)
    bps = tuple(spec.breakpoints) + (x,)
    sq = math.floor(math.sqrt(u))
    rt = math.sqrt(u)

    def tv(a: float, b: float) -> float:
        return total_variation(h, (a, b), tv_samples, breakpoints=bps).value

    left_sum = sum(tv(x - x / j, x) for j in range(1, sq + 1))
    right_sum = sum(tv(x, x + x / j) for j in range(1, sq + 1))

    term_mean = abs(dr + dl) / (2.0 * u)
    term_jump = math.sqrt(1.0 / (2.0 * u)) * abs(dr - dl) * zeta(u, x)
    term_left_sum = 2.0 * z2 / (x * u) * left_sum
    term_left_edge = (x / rt) * tv(x - x / rt, x)
    term_right_edge = (x / rt) * tv(x, x + x / rt)
    term_right_sum = 2.0 * z2 / (x * u) * right_sum
    terms = (
        term_mean,
        term_jump,
        term_left_sum,
        term_left_edge,
        term_right_edge,
        term_right_sum,
    )
    return DbvBound(*terms, total=sum(terms))


@dataclass(frozen=True)
class DbvCheck:
    lhs: float
    bound: DbvBound
    holds: bool


def dbv_empirical_check(
    spec: DbvSpec,
    u: float,
    x: float,
    tol: float = 1e-9,
    trunc: TruncationSpec = TailEpsilon(),
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> DbvCheck:
    """Compare the realized error |B(g;x) - g(x)| with the variation bound."""
    op = apply(spec.g, u, x, trunc, cfg)
    gx = float(_grid_values(spec.g, np.array([x]))[0])
    lhs = abs(op.value - gx)
    bound = dbv_bound(spec, u, x)
    return DbvCheck(lhs, bound, lhs <= bound.total + tol)


def korovkin_sup_error(
    g: TargetFunction,
    u: float,
    x_grid,
    trunc: TruncationSpec = TailEpsilon(),
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> float:
    """sup over the grid of |B(g;x) - g(x)|, the quantity whose decay in u
    certifies uniform convergence on compacts."""
    xs = np.asarray(x_grid, dtype=np.float64)
    gvals = _grid_values(g, xs)
    errs = [abs(apply(g, u, float(x), trunc, cfg).value - gv) for x, gv in zip(xs, gvals)]
    return float(max(errs))
