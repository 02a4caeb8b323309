"""Diophantine rotation numbers: membership up to a frequency cutoff and
measure estimation with an analytic lower bound.

x belongs to the Diophantine set at level C when |e^{2 pi i n x} - 1|
>= C / n^3 for every positive integer n, equivalently 2 |sin(pi n x)|
>= C / n^3.  True membership quantifies over all n and is not finitely
decidable, so the API only ever certifies membership up to a cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Apery's constant zeta(3), used by the excluded-interval union bound.
ZETA3 = 1.2020569031595943


@dataclass(frozen=True)
class DioParams:
    C: float
    n_max: int
    grid: int = 100_000

    def __post_init__(self):
        if not 0.0 < self.C <= 2.0:
            raise ValueError("C must lie in (0, 2]: beyond 2 the condition is empty")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.grid < 1:
            raise ValueError("grid must be >= 1")


@dataclass(frozen=True)
class DioMembership:
    member_up_to_cutoff: bool
    excluded_n: int | None = None


@dataclass(frozen=True)
class DioMeasure:
    estimate: float
    analytic_lower: float
    grid_error: float


def dio_member(x: float, params: DioParams) -> DioMembership:
    """Check 2|sin(pi n x)| >= C / n^3 for n = 1..n_max.

    Returns the first violating n if any.  A pass does not certify true
    membership, only membership up to the cutoff.
    """
    ns = np.arange(1, params.n_max + 1, dtype=float)
    bad = np.nonzero(2.0 * np.abs(np.sin(np.pi * ns * x)) < params.C / ns ** 3)[0]
    if bad.size:
        return DioMembership(False, int(bad[0]) + 1)
    return DioMembership(True)


def _member_mask(xs: np.ndarray, params: DioParams) -> np.ndarray:
    mask = np.ones(xs.shape, dtype=bool)
    for n in range(1, params.n_max + 1):
        thresh = params.C / n ** 3
        mask &= 2.0 * np.abs(np.sin(np.pi * n * xs)) >= thresh
        if not mask.any():
            break
    return mask


def analytic_lower_bound(C: float) -> float:
    """Union bound 1 - C * zeta(3) / pi.

    Linearizing sin near each rational p/n, the level-n condition excludes
    intervals of half-width about C / (2 pi n^4) around n rationals, so the
    excluded measure is at most sum_n C / (pi n^3) = C zeta(3) / pi.
    Overlaps between the intervals make the true excluded measure strictly
    smaller, which is the slack the estimate contract relies on.
    """
    return 1.0 - C * ZETA3 / np.pi


def dio_measure(params: DioParams) -> DioMeasure:
    """Midpoint-grid measure of the cutoff membership set.

    The estimate over-approximates the true Diophantine measure (it ignores
    violations beyond n_max) and satisfies
    estimate >= analytic_lower - grid_error.  The reported grid error uses
    the crude interval count sum_{n <= n_max} n, capped at 1.
    """
    xs = (np.arange(params.grid) + 0.5) / params.grid
    est = float(np.mean(_member_mask(xs, params)))
    intervals = params.n_max * (params.n_max + 1) / 2
    grid_error = min(1.0, intervals / params.grid)
    return DioMeasure(est, analytic_lower_bound(params.C), grid_error)
