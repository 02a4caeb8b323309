"""Torus skew products (x, y) -> (m x, y + t + g_t(x, y)) and the circle maps
obtained by restricting iterates to periodic vertical circles.

The x coordinate of a periodic circle is the exact rational k / (m^n - 1),
kept in rational arithmetic so fiber orbits never drift: a floating-point x
orbit of the expanding base map would leave the circle after ~50 steps and
silently change the composed map.  The y dynamics stays in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import rotation
from .circle_map import (
    TAU,
    ComposedCircleMap,
    FamilyNorm,
    TPoly,
    TrigPoly,
    _grid_for,
)
from .errors import DegenerateFiber


@dataclass(frozen=True)
class SkewMap:
    """Skew product with integer expanding base m and periodic part g_t(x, y).

    g is a trigonometric polynomial on the torus with t-polynomial
    coefficients: terms a(t) cos(2 pi (jx x + jy y)) + b(t) sin(...).
    The pair jx = jy = 0 contributes a plain constant.
    """

    m: int
    harmonics: tuple = ()  # tuple of (jx, jy, TPoly a, TPoly b)
    label: str = ""

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("base m must be an integer >= 2")
        merged = {}
        for jx, jy, a, b in self.harmonics:
            jx, jy = int(jx), int(jy)
            a = a if isinstance(a, TPoly) else TPoly(a)
            b = b if isinstance(b, TPoly) else TPoly(b)
            if (jx, jy) in merged:
                pa, pb = merged[(jx, jy)]
                merged[(jx, jy)] = (pa + a, pb + b)
            else:
                merged[(jx, jy)] = (a, b)
        object.__setattr__(
            self,
            "harmonics",
            tuple((jx, jy) + merged[(jx, jy)] for jx, jy in sorted(merged)),
        )

    def g(self, t, x, y):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast_shapes(t.shape, x.shape, y.shape))
        for jx, jy, a, b in self.harmonics:
            w = TAU * (jx * x + jy * y)
            out = out + a(t) * np.cos(w) + b(t) * np.sin(w)
        return out if out.ndim else float(out)

    def dy_sup_bound(self) -> float:
        """Bound for sup |d/dy g_t| over all t, x, y."""
        return sum(
            TAU * abs(jy) * (a.abs_bound() + b.abs_bound())
            for _, jy, a, b in self.harmonics
        )

    def fiber_stage(self, x: Fraction):
        """Periodic part of the fiber map over the vertical circle at x,
        as (const TPoly, harmonics in y with TPoly coefficients).

        Folding the x phase: with phi = 2 pi jx x,
        a cos(phi + 2 pi jy y) + b sin(phi + 2 pi jy y)
          = (a cos phi + b sin phi) cos(2 pi |jy| y)
            + sgn(jy) (b cos phi - a sin phi) sin(2 pi |jy| y).
        """
        const = TPoly((0.0,))
        merged = {}
        for jx, jy, a, b in self.harmonics:
            phase = float(Fraction(jx) * x % 1)
            c, s = math.cos(TAU * phase), math.sin(TAU * phase)
            ay = a.scaled(c) + b.scaled(s)
            by = (b.scaled(c) + a.scaled(-s)).scaled(1.0 if jy >= 0 else -1.0)
            if jy == 0:
                const = const + ay
                continue
            key = abs(jy)
            if key in merged:
                pa, pb = merged[key]
                merged[key] = (pa + ay, pb + by)
            else:
                merged[key] = (ay, by)
        return const, tuple((j,) + merged[j] for j in sorted(merged))


def skew_apply(F: SkewMap, t, xy):
    """One application of the torus map: (m x mod 1, y + t + g mod 1).

    A Fraction x stays exact; floats are reduced in floating point.
    """
    x, y = xy
    if isinstance(x, Fraction):
        x_new = (F.m * x) % 1
        xf = float(x)
    else:
        x_new = (F.m * x) % 1.0
        xf = float(x)
    y_new = (y + t + F.g(t, xf, y)) % 1.0
    return x_new, y_new


@dataclass(frozen=True)
class PeriodicCircle:
    """Vertical circle over x0 = k / (m^n - 1), invariant under the n-th
    iterate of the base map; n is the minimal period."""

    k: int
    n: int
    x0: Fraction

    def __str__(self):
        return f"S({self.x0}, n={self.n})"


def periodic_circles(m: int, n_max: int) -> list:
    """All periodic circles of the base map x -> m x with period <= n_max.

    Values reachable at several levels are deduplicated, keeping the minimal
    period (the first level at which a rational appears is its exact period).
    Ordered by (n ascending, k ascending).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    seen = {}
    out = []
    for n in range(1, n_max + 1):
        den = m ** n - 1
        if den == 0:
            continue
        for k in range(den):
            x0 = Fraction(k, den)
            if x0 not in seen:
                seen[x0] = True
                out.append(PeriodicCircle(k, n, x0))
    if not out:  # m**1 - 1 == 0 cannot happen for m >= 2, but keep the origin
        out.append(PeriodicCircle(0, 1, Fraction(0)))
    return out


@dataclass(frozen=True)
class RestrictedFamily:
    """The circle-map family obtained by restricting the n-th iterate of a
    skew map to a periodic circle:

        lift(t, theta) = theta + n * t + G_t(theta)

    where G_t accumulates the fiber periodic parts along the exact x orbit.
    The t-winding number equals the circle period n.
    """

    skew: SkewMap
    circle: PeriodicCircle
    stages: tuple  # tuple of (const TPoly, harmonics (j, TPoly, TPoly)) per fiber
    label: str = ""

    @property
    def winding(self) -> int:
        return self.circle.n

    # -- evaluation ---------------------------------------------------------

    def lift(self, t, theta):
        t = np.asarray(t, dtype=float)
        y = np.asarray(theta, dtype=float) + 0.0 * t  # broadcast
        for const, harm in self.stages:
            acc = y + t + const(t)
            for j, a, b in harm:
                w = (TAU * j) * y
                acc = acc + a(t) * np.cos(w) + b(t) * np.sin(w)
            y = acc
        return y if y.ndim else float(y)

    def step_factory(self, t):
        t = np.asarray(t, dtype=float)
        data = []
        for const, harm in self.stages:
            data.append(
                (t + const(t), [(TAU * j, a(t), b(t)) for j, a, b in harm])
            )

        def step(theta):
            y = theta
            for drift, coeff in data:
                acc = y + drift
                for w, a, b in coeff:
                    acc = acc + a * np.cos(w * y) + b * np.sin(w * y)
                y = acc
            return y

        return step

    def at(self, t: float) -> ComposedCircleMap:
        """Fixed-parameter snapshot as an explicit stage composition."""
        return ComposedCircleMap(
            tuple(
                (float(t), TrigPoly(const(t), tuple((j, a(t), b(t)) for j, a, b in harm)))
                for const, harm in self.stages
            )
        )

    # -- certified bounds ---------------------------------------------------

    def _stage_dy_bound(self, stage, t=None) -> float:
        _, harm = stage
        if t is None:
            return sum(TAU * j * (a.abs_bound() + b.abs_bound()) for j, a, b in harm)
        return sum(
            TAU * j * (abs(float(a(t))) + abs(float(b(t)))) for j, a, b in harm
        )

    def dtheta_lift_bound(self, t=None) -> float:
        out = 1.0
        for stage in self.stages:
            out *= 1.0 + self._stage_dy_bound(stage, t)
        return out

    def g_sup_bound(self) -> float:
        return sum(
            const.abs_bound() + sum(a.abs_bound() + b.abs_bound() for _, a, b in harm)
            for const, harm in self.stages
        )

    def dt_sup_dev(self) -> float:
        """Bound for sup |d/dt lift - n| = sup |d/dt G_t|.

        The t derivative of stage i propagates through the later stages'
        y derivatives, so each of the n unit contributions is distorted by
        at most the product of the stage derivative ranges.
        """
        n = len(self.stages)
        dev = 0.0
        for i in range(n):
            const, harm = self.stages[i]
            dtp = const.deriv().abs_bound() + sum(
                a.deriv().abs_bound() + b.deriv().abs_bound() for _, a, b in harm
            )
            ub = 1.0 + dtp
            lb = 1.0 - dtp
            for j in range(i + 1, n):
                s = self._stage_dy_bound(self.stages[j])
                ub *= 1.0 + s
                lb *= max(0.0, 1.0 - s)
            dev += max(ub - 1.0, 1.0 - lb)
        return dev


def restricted_family(F: SkewMap, circle: PeriodicCircle) -> RestrictedFamily:
    """Compose the fiber maps along the exact x orbit of a periodic circle.

    Raises DegenerateFiber when a stage demonstrably violates
    1 + d/dy g_t > 0.
    """
    if (F.m ** circle.n * circle.x0 - circle.x0) % 1 != 0:
        raise ValueError(f"{circle} is not periodic for base m={F.m}")
    stages = []
    x = circle.x0
    for _ in range(circle.n):
        stage = F.fiber_stage(x)
        _check_fiber_diffeo(stage)
        stages.append(stage)
        x = (F.m * x) % 1
    label = f"{F.label}|{circle.x0}" if F.label else f"restriction@{circle.x0}"
    return RestrictedFamily(F, circle, tuple(stages), label=label)


def _check_fiber_diffeo(stage, t_grid: int = 65, y_grid: int = 2048):
    const, harm = stage
    bound = sum(TAU * j * (a.abs_bound() + b.abs_bound()) for j, a, b in harm)
    if bound < 1.0:
        return
    y_grid = _grid_for(max((j for j, _, _ in harm), default=0), y_grid)
    ys = np.arange(y_grid) / y_grid
    for t in np.linspace(0.0, 1.0, t_grid):
        dp = TrigPoly(0.0, tuple((j, a(t), b(t)) for j, a, b in harm)).deriv()
        if float(np.min(1.0 + dp(ys))) <= 0.0:
            raise DegenerateFiber(f"fiber map degenerate at t={float(t):.6g}")


def a3_check(rf: RestrictedFamily, R: float, t_grid: int = 33,
             y_grid: int = 1024) -> tuple:
    """Estimate sup_t of the C3(y) norm of lift - (theta + n t) and compare
    against the closeness-to-identity threshold R.

    Per parameter value the theta sup is certified (exact chain-rule
    derivatives on a dense grid plus a Lipschitz margin from the composed
    derivative bounds); the sup over t is a grid estimate.  Returns
    (sup_c3, passes) with passes = sup_c3 < R.
    """
    if not 0.0 < R < 1.0:
        raise ValueError("R must lie in (0, 1)")
    max_j = max((j for _, harm in rf.stages for j, _, _ in harm), default=0)
    y_grid = _grid_for(max_j, y_grid)
    ys = np.arange(y_grid) / y_grid
    n = rf.winding
    sup = 0.0
    for t in np.linspace(0.0, 1.0, t_grid):
        snap = rf.at(float(t))
        v, d1, d2, d3 = snap.deriv_tuple(ys)
        b1, b2, b3, b4 = snap.theta_deriv_bounds()
        lb1 = 1.0
        for _, p in snap.stages:
            lb1 *= max(0.0, 1.0 - p.deriv_bound(1))
        g_lip = max(b1 - 1.0, 1.0 - lb1)
        vals = (
            float(np.max(np.abs(v - ys - n * float(t)))) + g_lip / y_grid,
            float(np.max(np.abs(d1 - 1.0))) + b2 / y_grid,
            float(np.max(np.abs(d2))) + b3 / y_grid,
            float(np.max(np.abs(d3))) + b4 / y_grid,
        )
        sup = max(sup, *vals)
    return sup, sup < R


def restricted_norm(rf: RestrictedFamily, t_grid: int = 33,
                    y_grid: int = 1024) -> FamilyNorm:
    """Family norm of a restricted map: C3(y) size of the periodic part and
    the t-derivative deviation bound."""
    sup_c3 = 0.0
    max_j = max((j for _, harm in rf.stages for j, _, _ in harm), default=0)
    y_grid = _grid_for(max_j, y_grid)
    ys = np.arange(y_grid) / y_grid
    n = rf.winding
    for t in np.linspace(0.0, 1.0, t_grid):
        snap = rf.at(float(t))
        v, d1, d2, d3 = snap.deriv_tuple(ys)
        _, b2, b3, b4 = snap.theta_deriv_bounds()
        sup_c3 = max(
            sup_c3,
            float(np.max(np.abs(v - ys - n * float(t)))),
            float(np.max(np.abs(d1 - 1.0))) + b2 / y_grid,
            float(np.max(np.abs(d2))) + b3 / y_grid,
            float(np.max(np.abs(d3))) + b4 / y_grid,
        )
    return FamilyNorm(c3_g=sup_c3, c0_dt=rf.dt_sup_dev())


def winding_check(rf: RestrictedFamily, t_grid: int = 64, theta_grid: int = 64,
                  dt: float = 1e-6) -> float:
    """Mean over (t, theta) of (d/dt lift) / n by central differences.

    For families within C3 distance R of rotations the result stays within
    R of 1; this is the observable form of "the t-winding number is n".
    """
    ts = (np.arange(t_grid) + 0.5) / t_grid
    thetas = (np.arange(theta_grid) + 0.5) / theta_grid
    tt, xx = np.meshgrid(ts, thetas, indexing="ij")
    hi = rf.lift(tt + dt, xx)
    lo = rf.lift(tt - dt, xx)
    return float(np.mean((hi - lo) / (2.0 * dt))) / rf.winding


def eligible_restrictions(F: SkewMap, n_max: int, R: float,
                          t_grid: int = 33, y_grid: int = 1024) -> list:
    """Restricted families over circles with period <= n_max passing the
    C3-closeness filter, in deterministic (n, k) order.

    Returns (circle, family, sup_c3) triples; degenerate fibers propagate.
    """
    out = []
    for circle in periodic_circles(F.m, n_max):
        rf = restricted_family(F, circle)
        sup_c3, ok = a3_check(rf, R, t_grid=t_grid, y_grid=y_grid)
        if ok:
            out.append((circle, rf, sup_c3))
    return out


def quasi_search(F: SkewMap, t: float, n_max: int, q_max: int, R: float,
                 n_iter: int = rotation.CLASSIFY_N_ITER,
                 candidates: list | None = None):
    """First periodic circle whose restricted map at parameter t classifies
    as an irrational candidate, or None when the search bounds exhaust.

    Circles are tried in (n, k) order after filtering by the C3-closeness
    check, so cheap maps are classified first and the result is
    deterministic.  ``candidates`` can carry precomputed
    ``eligible_restrictions`` output across many t values.
    """
    if candidates is None:
        candidates = eligible_restrictions(F, n_max, R)
    for circle, rf, _ in candidates:
        res = rotation.classify(rf, t, q_max=q_max, n_iter=n_iter)
        if res.classification == rotation.IRRATIONAL_CANDIDATE:
            return circle, res
    return None
