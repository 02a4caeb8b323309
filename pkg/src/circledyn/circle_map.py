"""Circle diffeomorphisms in lift form with trigonometric-polynomial periodic parts.

A parameterized family is represented as

    lift(t, theta) = theta + N * t + g_t(theta)

where ``g_t`` is a finite trigonometric polynomial in ``theta`` whose
coefficients are polynomials in ``t``.  This closed form gives exact
derivatives of every order, so sup norms (and the certified margins
attached to them) come from coefficient bounds instead of uncontrolled
finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DegenerateFamily

TAU = 2.0 * math.pi

# Grid sizes below are floors; callers may pass larger grids.
DEFAULT_THETA_GRID = 4096
DEFAULT_T_GRID = 129


def _as_float_tuple(seq):
    return tuple(float(v) for v in seq)


@dataclass(frozen=True)
class TPoly:
    """Polynomial in the family parameter t, coefficients in ascending degree."""

    coeffs: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_float_tuple(self.coeffs) or (0.0,))

    def __call__(self, t):
        return P.polyval(t, self.coeffs)

    def deriv(self) -> "TPoly":
        if len(self.coeffs) == 1:
            return TPoly((0.0,))
        return TPoly(P.polyder(self.coeffs))

    def abs_bound(self) -> float:
        """Upper bound for sup_{t in [0,1]} |p(t)|."""
        return float(sum(abs(c) for c in self.coeffs))

    def scaled(self, s: float) -> "TPoly":
        return TPoly(tuple(s * c for c in self.coeffs))

    def __add__(self, other: "TPoly") -> "TPoly":
        return TPoly(P.polyadd(self.coeffs, other.coeffs))

    def plus_const(self, c: float) -> "TPoly":
        coeffs = list(self.coeffs)
        coeffs[0] += c
        return TPoly(coeffs)

    def compose_affine(self, offset: float, scale: float) -> "TPoly":
        """Coefficients of t -> p(offset + scale * t)."""
        out = np.zeros(1)
        for c in reversed(self.coeffs):
            out = P.polyadd(P.polymul(out, (offset, scale)), (c,))
        return TPoly(out)


TPOLY_ZERO = TPoly((0.0,))


@dataclass(frozen=True)
class TrigPoly:
    """Finite real trigonometric polynomial, 1-periodic by construction.

    p(x) = const + sum_j  a_j cos(2 pi j x) + b_j sin(2 pi j x)
    """

    const: float = 0.0
    harmonics: tuple = ()  # tuple of (j, a_j, b_j), j a positive integer

    def __post_init__(self):
        merged = {}
        for j, a, b in self.harmonics:
            j = int(j)
            if j <= 0:
                raise ValueError("harmonic index must be a positive integer")
            aj, bj = merged.get(j, (0.0, 0.0))
            merged[j] = (aj + float(a), bj + float(b))
        object.__setattr__(
            self,
            "harmonics",
            tuple((j,) + merged[j] for j in sorted(merged)),
        )
        object.__setattr__(self, "const", float(self.const))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.const)
        for j, a, b in self.harmonics:
            w = (TAU * j) * x
            out += a * np.cos(w) + b * np.sin(w)
        return out if out.ndim else float(out)

    def deriv(self, order: int = 1) -> "TrigPoly":
        """Exact derivative; differentiation maps (a, b) to (2 pi j b, -2 pi j a)."""
        if order < 0:
            raise ValueError("order must be >= 0")
        harm = list(self.harmonics)
        const = self.const
        for _ in range(order):
            harm = [(j, TAU * j * b, -TAU * j * a) for j, a, b in harm]
            const = 0.0
        return TrigPoly(const, tuple(harm))

    def deriv_bound(self, k: int) -> float:
        """Coefficient bound sum_j (2 pi j)^k (|a_j| + |b_j|), dominating sup|p^(k)|."""
        s = sum((TAU * j) ** k * (abs(a) + abs(b)) for j, a, b in self.harmonics)
        if k == 0:
            s += abs(self.const)
        return float(s)

    def max_harmonic(self) -> int:
        return self.harmonics[-1][0] if self.harmonics else 0

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        return TrigPoly(self.const + other.const, self.harmonics + other.harmonics)

    def scaled(self, s: float) -> "TrigPoly":
        return TrigPoly(s * self.const, tuple((j, s * a, s * b) for j, a, b in self.harmonics))


def _grid_for(max_j: int, grid: int) -> int:
    # at least a few samples per oscillation of the highest harmonic
    return max(int(grid), 8 * max_j + 8, 16)


def c3_norm(p: TrigPoly, grid: int = DEFAULT_THETA_GRID) -> float:
    """C3 norm of a trigonometric polynomial: max over orders 0..3 of sup |p^(k)|.

    Each sup is a dense-grid maximum plus the margin grid_spacing *
    (coefficient bound of the next derivative), so the result is a
    certified upper bound of the true norm.
    """
    grid = _grid_for(p.max_harmonic(), grid)
    xs = np.arange(grid) / grid
    out = 0.0
    for k in range(4):
        dk = p.deriv(k)
        sup = float(np.max(np.abs(dk(xs)))) + p.deriv_bound(k + 1) / grid
        out = max(out, sup)
    return out


@dataclass(frozen=True)
class FamilyNorm:
    """Norm data for a parameterized family: C3 norm of the periodic part and
    the C0 norm of its t-derivative.  Both are certified upper bounds."""

    c3_g: float
    c0_dt: float

    @property
    def value(self) -> float:
        return max(self.c3_g, self.c0_dt)


@dataclass(frozen=True)
class CircleFamily:
    """Parameterized circle diffeomorphism t -> theta + winding * t + g_t(theta).

    ``g_t`` is stored as a trig polynomial in theta whose constant term and
    harmonic coefficients are :class:`TPoly` polynomials in t.  ``winding``
    is a positive integer for ordinary families; t-renormalized families
    (see :meth:`renormalized`) may carry a non-integer winding.
    """

    winding: float = 1
    const: TPoly = TPOLY_ZERO
    harmonics: tuple = ()  # tuple of (j, TPoly a_j, TPoly b_j)
    label: str = ""

    def __post_init__(self):
        harm = []
        for j, a, b in self.harmonics:
            j = int(j)
            if j <= 0:
                raise ValueError("harmonic index must be a positive integer")
            a = a if isinstance(a, TPoly) else TPoly(a)
            b = b if isinstance(b, TPoly) else TPoly(b)
            harm.append((j, a, b))
        harm.sort(key=lambda h: h[0])
        object.__setattr__(self, "harmonics", tuple(harm))
        const = self.const if isinstance(self.const, TPoly) else TPoly(self.const)
        object.__setattr__(self, "const", const)

    # -- evaluation ---------------------------------------------------------

    def g(self, t, theta):
        """Periodic part g_t(theta); t and theta broadcast."""
        t = np.asarray(t, dtype=float)
        theta = np.asarray(theta, dtype=float)
        out = np.broadcast_arrays(self.const(t), theta)[0].copy()
        for j, a, b in self.harmonics:
            w = (TAU * j) * theta
            out = out + a(t) * np.cos(w) + b(t) * np.sin(w)
        return out if out.ndim else float(out)

    def lift(self, t, theta):
        """Lift value theta + winding * t + g_t(theta); no reduction mod 1."""
        t = np.asarray(t, dtype=float)
        theta = np.asarray(theta, dtype=float)
        out = theta + self.winding * t + self.g(t, theta)
        return out if out.ndim else float(out)

    def step_factory(self, t):
        """Return a closure iterating the lift at fixed t (t may be an array,
        in which case each component advances under its own parameter)."""
        t = np.asarray(t, dtype=float)
        drift = self.winding * t + self.const(t)
        coeff = [(TAU * j, a(t), b(t)) for j, a, b in self.harmonics]

        def step(theta):
            out = theta + drift
            for w, a, b in coeff:
                out = out + a * np.cos(w * theta) + b * np.sin(w * theta)
            return out

        return step

    def periodic_part(self, t: float) -> TrigPoly:
        return TrigPoly(self.const(t), tuple((j, a(t), b(t)) for j, a, b in self.harmonics))

    def dt_part(self, t: float) -> TrigPoly:
        """d/dt of the periodic part at fixed t, as a trig polynomial in theta."""
        return TrigPoly(
            self.const.deriv()(t),
            tuple((j, a.deriv()(t), b.deriv()(t)) for j, a, b in self.harmonics),
        )

    # -- certified bounds ---------------------------------------------------

    def g_sup_bound(self) -> float:
        """Bound for sup_{t, theta} |g_t(theta)| from coefficient sums."""
        return self.const.abs_bound() + sum(
            a.abs_bound() + b.abs_bound() for _, a, b in self.harmonics
        )

    def dtheta_bound(self, t=None) -> float:
        """Bound for sup |d/dtheta g_t|; tighter when a single t is given."""
        if t is None:
            return sum(
                TAU * j * (a.abs_bound() + b.abs_bound()) for j, a, b in self.harmonics
            )
        return sum(
            TAU * j * (abs(float(a(t))) + abs(float(b(t))))
            for j, a, b in self.harmonics
        )

    def dtheta_lift_bound(self, t=None) -> float:
        """Bound for sup |d/dtheta lift| = 1 + sup |g'|."""
        return 1.0 + self.dtheta_bound(t)

    def dt_sup_bound(self) -> float:
        """Bound for sup_{t, theta} |d/dt g_t(theta)|."""
        return self.const.deriv().abs_bound() + sum(
            a.deriv().abs_bound() + b.deriv().abs_bound() for _, a, b in self.harmonics
        )

    def theta_deriv_bounds(self, t=None):
        """Bounds (b1, b2, b3, b4) for sup |d^k/dtheta^k lift|, k = 1..4."""
        def bk(k):
            if t is None:
                return sum(
                    (TAU * j) ** k * (a.abs_bound() + b.abs_bound())
                    for j, a, b in self.harmonics
                )
            return sum(
                (TAU * j) ** k * (abs(float(a(t))) + abs(float(b(t))))
                for j, a, b in self.harmonics
            )

        return (1.0 + bk(1), bk(2), bk(3), bk(4))

    # -- validity -----------------------------------------------------------

    def check_diffeo(self, t_grid: int = DEFAULT_T_GRID, theta_grid: int = DEFAULT_THETA_GRID):
        """Raise DegenerateFamily when 1 + d/dtheta g_t <= 0 is witnessed.

        A coefficient bound < 1 certifies the condition outright; otherwise a
        dense (t, theta) grid is scanned for a violation.
        """
        if self.dtheta_bound() < 1.0:
            return
        theta_grid = _grid_for(max((j for j, _, _ in self.harmonics), default=0), theta_grid)
        ts = np.linspace(0.0, 1.0, t_grid)
        xs = np.arange(theta_grid) / theta_grid
        for t in ts:
            dp = self.periodic_part(float(t)).deriv()
            if float(np.min(1.0 + dp(xs))) <= 0.0:
                raise DegenerateFamily(
                    f"1 + dg/dtheta <= 0 at t={float(t):.6g} for family {self.label!r}"
                )

    # -- derived families ---------------------------------------------------

    def scaled(self, s: float) -> "CircleFamily":
        """Same winding, periodic part multiplied by s."""
        return CircleFamily(
            self.winding,
            self.const.scaled(s),
            tuple((j, a.scaled(s), b.scaled(s)) for j, a, b in self.harmonics),
            label=f"{self.label}*{s:g}" if self.label else f"scaled*{s:g}",
        )

    def renormalized(self, a: float, b: float) -> "CircleFamily":
        """Family with t rescaled affinely over [a, b]: t -> a + (b - a) t.

        The winding becomes winding * (b - a) and the constant displacement
        winding * a is absorbed into the periodic part's constant term.
        """
        s = b - a
        if s <= 0:
            raise ValueError("renormalization interval must have positive length")
        return CircleFamily(
            self.winding * s,
            self.const.compose_affine(a, s).plus_const(self.winding * a),
            tuple(
                (j, ca.compose_affine(a, s), cb.compose_affine(a, s))
                for j, ca, cb in self.harmonics
            ),
            label=f"{self.label}|[{a:g},{b:g}]",
        )


def eval_lift(f: CircleFamily, t: float, theta: float) -> float:
    """Lift of f_t at theta: theta + winding * t + g_t(theta)."""
    return f.lift(t, theta)


def iterate_lift(f, t, theta, n: int):
    """n-fold composition of the lift of ``f`` at parameter t.

    Accepts any map exposing ``lift(t, theta)``; theta may be an array.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    out = theta
    for _ in range(n):
        out = f.lift(t, out)
    return out


def family_norm(
    f: CircleFamily,
    grid: int = DEFAULT_THETA_GRID,
    t_grid: int = DEFAULT_T_GRID,
    check: bool = True,
) -> FamilyNorm:
    """Norm of a family: sup_t of the C3 norm of g_t, and sup |dg/dt|.

    The t sweep uses a dense grid with a Lipschitz-in-t margin, so ``c3_g``
    is a certified upper bound.  Raises DegenerateFamily when the
    diffeomorphism condition fails on the scan grid; ``check=False`` skips
    that (used when measuring a raw family before rescaling it into range).
    """
    if check:
        f.check_diffeo(t_grid=t_grid, theta_grid=grid)
    ts = np.linspace(0.0, 1.0, t_grid)
    c3 = max(c3_norm(f.periodic_part(float(t)), grid) for t in ts)
    # |d/dt of any theta-derivative up to order 3| bound for the t margin
    dt_rate = 0.0
    for k in range(4):
        s = sum(
            (TAU * j) ** k * (a.deriv().abs_bound() + b.deriv().abs_bound())
            for j, a, b in f.harmonics
        )
        if k == 0:
            s += f.const.deriv().abs_bound()
        dt_rate = max(dt_rate, s)
    c3 += dt_rate / (t_grid - 1)
    return FamilyNorm(c3_g=c3, c0_dt=f.dt_sup_bound())


@dataclass(frozen=True)
class ComposedCircleMap:
    """Composition of single-variable circle-map lifts y -> y + c_i + p_i(y).

    This is the fixed-parameter snapshot of a restricted skew-product map;
    it is not itself a trig-polynomial lift, but every stage is.
    """

    stages: tuple  # tuple of (c_i, TrigPoly p_i)

    def lift1(self, y):
        for c, p in self.stages:
            y = y + c + p(y)
        return y

    # uniform signature with parameterized maps; the parameter is baked in
    def lift(self, _t, y):
        return self.lift1(y)

    def deriv_tuple(self, y):
        """(value, d1, d2, d3) of the composed lift at y, by exact chain rule."""
        y = np.asarray(y, dtype=float)
        v = y.copy()
        d1 = np.ones_like(v)
        d2 = np.zeros_like(v)
        d3 = np.zeros_like(v)
        for c, p in self.stages:
            l1 = 1.0 + p.deriv(1)(v)
            l2 = p.deriv(2)(v)
            l3 = p.deriv(3)(v)
            nd1 = l1 * d1
            nd2 = l1 * d2 + l2 * d1 ** 2
            nd3 = l1 * d3 + 3.0 * l2 * d1 * d2 + l3 * d1 ** 3
            v = v + c + p(v)
            d1, d2, d3 = nd1, nd2, nd3
        return v, d1, d2, d3

    def theta_deriv_bounds(self):
        """Certified bounds (b1, b2, b3, b4) for the composed derivatives."""
        h = (1.0, 0.0, 0.0, 0.0)
        for _, p in self.stages:
            l1 = 1.0 + p.deriv_bound(1)
            l2 = p.deriv_bound(2)
            l3 = p.deriv_bound(3)
            l4 = p.deriv_bound(4)
            h1, h2, h3, h4 = h
            h = (
                l1 * h1,
                l1 * h2 + l2 * h1 ** 2,
                l1 * h3 + 3.0 * l2 * h1 * h2 + l3 * h1 ** 3,
                l1 * h4 + l2 * (4.0 * h1 * h3 + 3.0 * h2 ** 2)
                + 6.0 * l3 * h1 ** 2 * h2 + l4 * h1 ** 4,
            )
        return h

    def dtheta_lift_bound(self, _t=None) -> float:
        return self.theta_deriv_bounds()[0]

    def check_diffeo(self, theta_grid: int = DEFAULT_THETA_GRID):
        for c, p in self.stages:
            if p.deriv_bound(1) < 1.0:
                continue
            grid = _grid_for(p.max_harmonic(), theta_grid)
            xs = np.arange(grid) / grid
            if float(np.min(1.0 + p.deriv(1)(xs))) <= 0.0:
                raise DegenerateFamily("composed stage is not a diffeomorphism")
