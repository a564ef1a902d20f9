"""Spectral side of the machine: the q-recursion and its fibered Julia set.

The transition operator has a formal eigenvector whose entries are products
of the values q_{F_n}(lambda), generated by a two-term multiplicative
recursion.  Boundedness of those products decides candidate point-spectrum
membership; the escape locus of the recursion is the fibered Julia set E
rendered by the sibling render module.

Everything here is pure and reentrant; the grid kernel is vectorized with
numpy and the scalar entry points run the same kernel on a 1x1 array so that
scalar and raster answers agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    InvalidPolynomial,
    InvalidSeed,
    ZeroDelta,
)
from .chain import MATRIX_BUDGET, transition_terms
from .numeration import FIB64, BaseDef, digits_of_int
from .probseq import ProbSeq

#: Slack on the "modulus exceeds 1" tests; exact arithmetic needs none, the
#: slack only guards float noise at the boundary.
ETA = 1e-6

#: Orbit values beyond this modulus are declared escaped outright; every
#: threshold of interest is far smaller, and stopping here avoids overflow.
CLAMP = 1e150

#: Keeps the escape radius strictly above 1 even for an all-ones sequence.
RADIUS_EPS = 1e-9

#: Plateau window for the boundedness verdict: the running maximum must not
#: have grown over this many trailing levels to count as settled.
PLATEAU_WINDOW = 5


def r_index(n: int) -> int:
    """Index of the probability dividing recursion step n (n >= 1)."""
    if n < 1:
        raise ValueError("recursion coefficients start at step 1")
    return (n + 1) // 2 + 1


# ---------------------------------------------------------------------------
# the q-recursion


@dataclass(frozen=True)
class QOrbit:
    """Orbit q_{F_0}..q_{F_N} at one lambda, with its step coefficients.

    escaped_at is the first level whose modulus crossed the overflow clamp
    (the orbit stops there); None when the whole requested orbit is finite.
    """

    lam: complex
    values: tuple[complex, ...]
    coeffs: tuple[float, ...]
    escaped_at: int | None = None

    def level_count(self) -> int:
        return len(self.values)


def q_fib_orbit(lam: complex, p: ProbSeq, levels: int) -> QOrbit:
    """Run the q recursion up to q_{F_levels}.

    Seed (lambda - (1 - p_1))/p_1, evaluated as 1 + (lambda - 1)/p_1 so that
    lambda = 1 maps to exactly 1 for every p_1; step 1 squares the seed; step
    n multiplies the two previous values, each step dividing by its
    coefficient r_n and subtracting (1/r_n - 1).
    """
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    lam = complex(lam)
    p1 = p.p(1)
    values = [1.0 + (lam - 1.0) / p1]
    coeffs: list[float] = []
    escaped_at = 0 if abs(values[0]) > CLAMP else None
    n = 1
    while escaped_at is None and n <= levels:
        r = p.p(r_index(n))
        coeffs.append(r)
        prev = values[n - 1]
        prev2 = values[n - 2] if n >= 2 else values[0]
        q = prev * prev2 / r - (1.0 / r - 1.0)
        values.append(q)
        if not (abs(q) <= CLAMP):
            escaped_at = n
        n += 1
    return QOrbit(lam, tuple(values), tuple(coeffs), escaped_at)


def q_at_integer(n: int, lam: complex, p: ProbSeq) -> complex:
    """q_n = product of q_{F_i} over the greedy digits of n (empty = 1)."""
    if n < 0:
        raise ValueError("q is indexed by nonnegative integers")
    eps = digits_of_int(n)
    orbit = q_fib_orbit(lam, p, max(len(eps) - 1, 0))
    result = complex(1.0)
    for i, e in enumerate(eps):
        if e:
            result *= orbit.values[i]
    return result


def q_values_upto(level: int, lam: complex, p: ProbSeq) -> list[complex]:
    """All q_m for m = 0..F_level, via the block rule q(F_m + k) = q(F_m) q(k)."""
    if level < 0 or level >= len(FIB64):
        raise ValueError("level must index a 64-bit scale value")
    top = FIB64[level]
    orbit = q_fib_orbit(lam, p, level)
    out = [complex(1.0)] * (top + 1)
    for m in range(level + 1):
        lo = FIB64[m]
        hi = min(top + 1, FIB64[m + 1])
        qf = orbit.values[m]
        for idx in range(lo, hi):
            out[idx] = qf * out[idx - lo]
    return out


def fibered_pair(lam: complex, p: ProbSeq, levels: int) -> list[tuple[complex, complex]]:
    """Iterate the planar maps g_n from (lambda, lambda); returns psi_0..psi_N.

    g_0 applies the seed affine map to both coordinates; g_n maps (x, y) to
    (x y / r_n - (1/r_n - 1), x), so psi_n = (q_{F_n}, q_{F_(n-1)}).
    """
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    lam = complex(lam)
    p1 = p.p(1)
    x = 1.0 + (lam - 1.0) / p1
    y = x
    pairs = [(x, y)]
    for n in range(1, levels + 1):
        r = p.p(r_index(n))
        x, y = x * y / r - (1.0 / r - 1.0), x
        pairs.append((x, y))
    return pairs


# ---------------------------------------------------------------------------
# escape configuration and membership


def escape_radius(p: ProbSeq, margin: float = 0.0) -> float:
    """Safe escape radius max(1 + eps, 2/delta - 1) + margin."""
    if margin < 0.0:
        raise ValueError("margin must be nonnegative")
    delta = p.delta_lower_bound()
    if delta <= 0.0:
        raise ZeroDelta(
            "the descriptor has no positive lower bound; supply an explicit radius"
        )
    return max(1.0 + RADIUS_EPS, 2.0 / delta - 1.0) + margin


@dataclass(frozen=True)
class EscapeConfig:
    """How far and how hard to chase an orbit before calling it escaped."""

    radius: float
    max_level: int
    early_exit: bool = True

    def __post_init__(self) -> None:
        if not (self.radius > 1.0):
            raise ValueError("escape radius must exceed 1")
        if self.max_level < 0:
            raise ValueError("max_level must be nonnegative")

    @classmethod
    def for_probseq(
        cls,
        p: ProbSeq,
        max_level: int = 17,
        margin: float = 1.0,
        early_exit: bool = True,
    ) -> "EscapeConfig":
        return cls(escape_radius(p, margin), max_level, early_exit)


INSIDE = -1


@dataclass(frozen=True)
class EscapeResult:
    escaped: bool
    level: int | None

    @property
    def status(self) -> str:
        return "escaped" if self.escaped else "inside"


def escape_levels(lam_grid: np.ndarray, p: ProbSeq, cfg: EscapeConfig) -> np.ndarray:
    """Vectorized escape levels for an array of lambda values.

    Returns int32 of the same shape: INSIDE (-1) where no test triggered by
    max_level, else the triggering level.  The two-consecutive rule (checked
    first) reports the first level of the offending pair; the radius rule
    reports the level that crossed.  Settled lanes freeze at 0 so dead values
    never overflow.
    """
    lam = np.ascontiguousarray(lam_grid, dtype=np.complex128)
    out = np.full(lam.shape, INSIDE, dtype=np.int32)
    active = np.ones(lam.shape, dtype=bool)
    prev_big = np.zeros(lam.shape, dtype=bool)
    radius = cfg.radius
    p1 = p.p(1)
    cur = 1.0 + (lam - 1.0) / p1
    prev = np.zeros_like(cur)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(cfg.max_level + 1):
            if n == 1:
                r = p.p(r_index(1))
                cur, prev = cur * cur / r - (1.0 / r - 1.0), cur
            elif n >= 2:
                r = p.p(r_index(n))
                cur, prev = cur * prev / r - (1.0 / r - 1.0), cur
            mod = np.abs(cur)
            big = mod > 1.0 + ETA
            hit_pair = active & big & prev_big if (cfg.early_exit and n >= 1) else None
            hit_radius = active & ~(mod <= radius)
            if hit_pair is not None:
                out[hit_pair] = n - 1
                active &= ~hit_pair
                hit_radius &= active
            out[hit_radius] = n
            active &= ~hit_radius
            if not active.any():
                break
            cur = np.where(active, cur, 0.0)
            prev = np.where(active, prev, 0.0)
            prev_big = big & active
    return out


def in_E(lam: complex, p: ProbSeq, cfg: EscapeConfig) -> EscapeResult:
    """Membership in the fibered Julia set E, by the same kernel the renderer runs."""
    level = int(escape_levels(np.array([[complex(lam)]]), p, cfg)[0, 0])
    if level == INSIDE:
        return EscapeResult(False, None)
    return EscapeResult(True, level)


# ---------------------------------------------------------------------------
# point-spectrum boundedness


@dataclass(frozen=True)
class SpectrumResult:
    status: str  # "inside" | "escaped" | "undetermined"
    level: int | None
    bound_value: float  # running maximum B at the stopping level


def in_point_spectrum(
    lam: complex, p: ProbSeq, cfg: EscapeConfig, bound: float
) -> SpectrumResult:
    """Decide whether every product q_m(lambda) stays below `bound`.

    B_n = max(B_(n-1), B_(n-2) |q_{F_n}|) is the maximum of |q_m| over all m
    whose greedy digits live in {0..n} (adjacent indices never multiply).
    Escaped when B crosses the bound or the in_E escape tests trigger; inside
    when B has plateaued below the bound by max_level; undetermined when it
    was still growing there.  The inside verdict therefore implies in_E's.
    """
    if bound <= 0.0:
        raise ValueError("bound must be positive")
    lam = complex(lam)
    orbit = q_fib_orbit(lam, p, cfg.max_level)
    b_prev2 = 1.0
    b_prev1 = 1.0
    history = []
    for n, q in enumerate(orbit.values):
        b_cur = max(b_prev1, b_prev2 * abs(q))
        history.append(b_cur)
        if b_cur > bound:
            return SpectrumResult("escaped", n, b_cur)
        b_prev2, b_prev1 = b_prev1, b_cur
    esc = in_E(lam, p, cfg)
    if esc.escaped:
        return SpectrumResult("escaped", esc.level, history[-1])
    window = min(PLATEAU_WINDOW, len(history) - 1)
    if window >= 1 and history[-1] > history[-1 - window]:
        return SpectrumResult("undetermined", None, history[-1])
    return SpectrumResult("inside", None, history[-1])


def subset_max_exhaustive(lam: complex, p: ProbSeq, level: int) -> float:
    """Brute-force |q_m| maximum over all m with digits inside {0..level}.

    Slow reference used to pin the DP above; walks every admissible digit
    subset explicitly.  When the orbit stops early at the overflow clamp the
    walk covers the same truncated index set the DP sees.
    """
    orbit = q_fib_orbit(lam, p, level)
    mods = [abs(v) for v in orbit.values]
    level = min(level, len(mods) - 1)
    best = 1.0

    def walk(i: int, prod: float) -> None:
        nonlocal best
        if i > level:
            best = max(best, prod)
            return
        walk(i + 1, prod)
        walk(i + 2, prod * mods[i])
        if i == level:
            best = max(best, prod * mods[i])

    walk(0, 1.0)
    return best


# ---------------------------------------------------------------------------
# approximate-eigenvector residuals


@dataclass(frozen=True)
class EigenResidual:
    """Residual of the truncated formal eigenvector w = (1, q_1, .., q_{F_n}, 0..).

    value: max over rows 0..F_(n+1) of |((S - lambda I) w)_i|, together with
    the analytic p_1 cap for all deeper rows, scaled by 1/sup|w|.
    interior: same sup over rows 0..F_n - 1 only (the rows untouched by the
    truncation; exactly 0 at lambda = 1).
    bound: the analytic upper bound the residual is checked against.
    """

    level: int
    value: float
    interior: float
    bound: float
    sup_norm: float


def eigen_residual(lam: complex, p: ProbSeq, level: int) -> EigenResidual:
    if level < 1 or level + 1 >= len(FIB64):
        raise ValueError("level must leave F_(level+1) inside the 64-bit table")
    top = FIB64[level]
    rows = FIB64[level + 1]
    if rows + 1 > MATRIX_BUDGET:
        raise BudgetExceeded(f"residual check needs {rows + 1} rows, over the budget")
    lam = complex(lam)
    w = q_values_upto(level, lam, p)
    sup_norm = max(abs(v) for v in w)
    p1 = p.p(1)
    interior = 0.0
    full = 0.0
    for i in range(rows + 1):
        re_parts = []
        im_parts = []
        for target, factor in transition_terms(i):
            if target <= top:
                prob = factor.value(p)
                wt = w[target]
                re_parts.append(prob * wt.real)
                im_parts.append(prob * wt.imag)
        if i <= top:
            shift = lam * w[i]
            re_parts.append(-shift.real)
            im_parts.append(-shift.imag)
        res = abs(complex(math.fsum(re_parts), math.fsum(im_parts)))
        if i < top:
            interior = max(interior, res)
        full = max(full, res)
    q_top = abs(w[top])
    bound = (abs(1.0 - p1 - lam) * q_top + p1 * q_top + p1) / sup_norm
    return EigenResidual(
        level, max(full, p1) / sup_norm, interior / sup_norm, bound, sup_norm
    )


# ---------------------------------------------------------------------------
# critical orbits and connectedness


@dataclass(frozen=True)
class PhiOrbit:
    """Critical orbit of the fibered polynomial family seeded by h."""

    h_coefficients: tuple[complex, ...]  # coefficients of z^2, z^3, ...
    values: tuple[complex, ...]


def _phi_values(phi1: complex, p: ProbSeq, levels: int) -> list[complex]:
    # phi_0 is the identity map, so the critical orbit starts at 0; the
    # recursion then only ever sees phi_1 and the step coefficients.
    values = [complex(0.0), complex(phi1)]
    for n in range(2, levels + 1):
        r = p.p(r_index(n))
        q = values[n - 1] * values[n - 2] / r - (1.0 / r - 1.0)
        values.append(q)
        if not (abs(q) <= CLAMP):
            break
    return values[: levels + 1]


def phi_orbit(h: Sequence[complex], p: ProbSeq, levels: int) -> PhiOrbit:
    """Critical orbit phi_n(0) for h given by low-to-high coefficients.

    h must have zero constant and linear coefficients, so the critical value
    h(0) is 0 and the orbit is controlled by the step coefficients alone.
    """
    if levels < 1:
        raise ValueError("levels must be at least 1")
    coeffs = tuple(complex(c) for c in h)
    if len(coeffs) < 3 or coeffs[0] != 0 or coeffs[1] != 0:
        raise InvalidPolynomial(
            "h must have zero constant and linear coefficients (degree >= 2)"
        )
    if all(c == 0 for c in coeffs[2:]):
        raise InvalidPolynomial("h must not be identically zero")
    critical_value = complex(0.0)  # h(0) with no constant term
    return PhiOrbit(coeffs[2:], tuple(_phi_values(critical_value, p, levels)))


@dataclass(frozen=True)
class ConnectivityResult:
    status: str  # "NonConnected" | "Inconclusive"
    level: int | None
    modulus: float | None

    @property
    def non_connected(self) -> bool:
        return self.status == "NonConnected"


def non_connectedness_test(p: ProbSeq, levels: int = 40) -> ConnectivityResult:
    """Sufficient test for E being disconnected, via its conjugated family.

    The conjugating quadratic z^2/p_2 - (1/p_2 - 1) has a constant term, so
    its critical value 1 - 1/p_2 feeds the recursion directly.  Escape of the
    critical orbit (two consecutive moduli above 1, or one above the safe
    radius) certifies non-connectedness; anything else is Inconclusive.
    """
    radius = escape_radius(p, 0.0)
    p2 = p.p(2)
    values = _phi_values(1.0 - 1.0 / p2, p, levels)
    prev_big = False
    for n, v in enumerate(values):
        mod = abs(v)
        big = mod > 1.0 + ETA
        if n >= 1 and big and prev_big:
            return ConnectivityResult("NonConnected", n - 1, abs(values[n - 1]))
        if mod > radius:
            return ConnectivityResult("NonConnected", n, mod)
        prev_big = big
    return ConnectivityResult("Inconclusive", None, None)


# ---------------------------------------------------------------------------
# generalized bases


def q_general_orbit(
    lam: complex,
    p: ProbSeq,
    base: BaseDef,
    seeds: Sequence[complex] | None = None,
    levels: int = 20,
) -> list[complex]:
    """The q recursion for an order-d base with coefficients a_1..a_d.

    Level m >= d divides by p_(n+1+i) where (n, i) = divmod(m, d) and takes
    the a_j-fold products of the d previous values.  Seeds q_{F_0}..q_{F_(d-1)}
    may be supplied; the default chains squares, dividing level i by p_(i+1).
    For the order-2 all-ones base this reproduces q_fib_orbit exactly.
    """
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    lam = complex(lam)
    d = base.degree
    if seeds is not None:
        if len(seeds) != d:
            raise InvalidSeed(f"need exactly {d} seed values, got {len(seeds)}")
        values = [complex(s) for s in seeds]
    else:
        values = [1.0 + (lam - 1.0) / p.p(1)]
        for i in range(1, d):
            r = p.p(i + 1)
            values.append(values[i - 1] * values[i - 1] / r - (1.0 / r - 1.0))
    values = values[: levels + 1]
    for m in range(d, levels + 1):
        n, i = divmod(m, d)
        r = p.p(n + 1 + i)
        prod = complex(1.0)
        for j, aj in enumerate(base.coeffs, start=1):
            prod *= values[m - j] ** aj
        q = prod / r - (1.0 / r - 1.0)
        values.append(q)
        if not (abs(q) <= CLAMP):
            break
    return values
