"""The stochastic Fibonacci adding machine as a Markov chain on the naturals.

From state N the machine tries to increment: the first carry rung succeeds
with probability p_1, the next with p_2, and so on; the first failure freezes
the partially rewritten word.  Walking the digit ladder of N yields the exact
transition row analytically: a self-loop, a fallback target for each rung that
can fail mid-way, and the full increment when every rung succeeds.

Also here: truncated sparse matrices, trajectory simulation, the
transience/recurrence classification of a descriptor, the block-constant
eigenvector weights (beta), the stationary weights (xi), and the budget-driven
construction of a positive-recurrent sequence.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass
from typing import Callable

from .errors import (
    BudgetExceeded,
    CapacityError,
    InvalidBudget,
    InvalidProbability,
    UnsupportedVariant,
)
from .numeration import FIB64, UINT64_MAX, digits_of_int
from .probseq import ConstantTail, Explicit, GeometricDecay, PowerLawComplement, ProbSeq
from .rng import SplitMix64

#: Largest truncation size (number of states) any dense-ish loop will accept.
MATRIX_BUDGET = 1 << 22

#: phi^2 where phi is the golden ratio; scale values grow like phi^(2i) over
#: two index steps, which drives the weighted-series ratio test below.
PHI_SQUARED = (3.0 + math.sqrt(5.0)) / 2.0


# ---------------------------------------------------------------------------
# transition structure


@dataclass(frozen=True)
class ProbFactor:
    """A probability of the form p_1 * ... * p_hops * (1 - p_fail).

    hops counts leading success factors; fail is the index of a trailing
    complement factor or None for the pure-success product.
    """

    hops: int
    fail: int | None = None

    def value(self, p: ProbSeq) -> float:
        v = 1.0
        for k in range(1, self.hops + 1):
            v *= p.p(k)
        if self.fail is not None:
            v *= 1.0 - p.p(self.fail)
        return v

    def text(self) -> str:
        parts = [f"p{k}" for k in range(1, self.hops + 1)]
        if self.fail is not None:
            if not parts:
                return f"1-p{self.fail}"
            parts.append(f"(1-p{self.fail})")
        return "*".join(parts) if parts else "1"


def transition_terms(state: int) -> tuple[tuple[int, ProbFactor], ...]:
    """Symbolic transition row of `state`, sorted by target.

    Walking the digit ladder from the bottom: each rung that must succeed for
    the increment to keep propagating contributes a fallback term (the rung
    after it fails), and the terminal rung contributes both the last fallback
    and the completed increment.
    """
    if state < 0:
        raise ValueError("states are nonnegative integers")
    if state >= UINT64_MAX:
        raise CapacityError("the incremented state would exceed the 64-bit range")
    eps = digits_of_int(state)

    def digit(i: int) -> int:
        return eps[i] if i < len(eps) else 0

    terms: list[tuple[int, ProbFactor]] = []
    cleared = 0
    i = 0
    rung = 1
    if digit(0) == 1:
        terms.append((state, ProbFactor(0, 1)))
        cleared = FIB64[0]
        i = 1
        rung = 2
    while True:
        hi = digit(i + 1)
        if hi == 1:
            terms.append((state - cleared, ProbFactor(rung - 1, rung)))
            cleared += FIB64[i + 1]
            i += 2
            rung += 1
        else:
            terms.append((state - cleared, ProbFactor(rung - 1, rung)))
            terms.append((state + 1, ProbFactor(rung, None)))
            break
    terms.sort(key=lambda t: t[0])
    return tuple(terms)


@dataclass(frozen=True)
class Distribution:
    """One transition row: (target, probability) pairs, positive and sorted."""

    state: int
    entries: tuple[tuple[int, float], ...]

    def as_dict(self) -> dict[int, float]:
        return dict(self.entries)

    def prob_of(self, target: int) -> float:
        return self.as_dict().get(target, 0.0)

    def total(self) -> float:
        return math.fsum(prob for _, prob in self.entries)

    def sample(self, rng: SplitMix64) -> int:
        u = rng.random()
        acc = 0.0
        for target, prob in self.entries:
            acc += prob
            if u < acc:
                return target
        return self.entries[-1][0]


def transition_dist(state: int, p: ProbSeq) -> Distribution:
    """Numeric transition row of `state` under the descriptor p."""
    entries = []
    for target, factor in transition_terms(state):
        v = factor.value(p)
        if v > 0.0:
            entries.append((target, v))
    return Distribution(state, tuple(entries))


def sample_step(state: int, p: ProbSeq, rng: SplitMix64) -> int:
    return transition_dist(state, p).sample(rng)


@dataclass(frozen=True)
class TruncatedMatrix:
    """The square block of the transition operator on states < F_level.

    Only the top state F_level - 1 can leave the block (its completed
    increment lands on F_level); that single leak is recorded explicitly.
    """

    level: int
    size: int
    rows: tuple[Distribution, ...]
    leak_state: int
    leak_prob: float

    def row(self, i: int) -> Distribution:
        return self.rows[i]


def transition_matrix(level: int, p: ProbSeq) -> TruncatedMatrix:
    if level < 1 or level >= len(FIB64):
        raise ValueError("level must index a 64-bit scale value")
    size = FIB64[level]
    if size > MATRIX_BUDGET:
        raise BudgetExceeded(f"truncation at {size} states exceeds the budget")
    rows = []
    leak = 0.0
    for state in range(size):
        dist = transition_dist(state, p)
        kept = tuple((t, v) for t, v in dist.entries if t < size)
        if state == size - 1:
            leak = math.fsum(v for t, v in dist.entries if t >= size)
        rows.append(Distribution(state, kept))
    return TruncatedMatrix(level, size, tuple(rows), size - 1, leak)


# ---------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimulationSummary:
    start: int
    steps: int
    final_state: int
    max_state: int
    returns_to_zero: int
    visits: dict[int, int]


def simulate(start: int, steps: int, p: ProbSeq, rng: SplitMix64 | int) -> SimulationSummary:
    """Run `steps` transitions; deterministic for a fixed seed."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if isinstance(rng, int):
        rng = SplitMix64(rng)
    state = start
    visits: dict[int, int] = {state: 1}
    max_state = state
    returns = 0
    for _ in range(steps):
        state = sample_step(state, p, rng)
        visits[state] = visits.get(state, 0) + 1
        if state > max_state:
            max_state = state
        if state == 0:
            returns += 1
    return SimulationSummary(start, steps, state, max_state, returns, visits)


# ---------------------------------------------------------------------------
# classification


class ChainClass(enum.Enum):
    TRANSIENT = "Transient"
    NULL_RECURRENT = "NullRecurrent"
    POSITIVE_RECURRENT = "PositiveRecurrent"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class Classification:
    kind: ChainClass
    reason: str


def classify(p: ProbSeq) -> Classification:
    """Decide transience/recurrence from the descriptor's tail behaviour.

    Transient iff the infinite product of p_i stays positive; otherwise null
    recurrent when the series sum p_i diverges; otherwise positive recurrent
    when the weighted series sum p_i F_{2(i-1)} converges; Unknown in the
    remaining gap, which no implemented criterion decides.
    """
    if isinstance(p, ConstructedSeq):
        return Classification(
            ChainClass.POSITIVE_RECURRENT,
            "budget-driven construction: stationary weight partial sums are "
            "bounded by the summable budget",
        )
    if isinstance(p, (Explicit, ConstantTail)):
        tail = p.tail
        if tail is None:
            raise UnsupportedVariant(
                "explicit sequence with no tail rule: convergence is undecidable"
            )
        if tail == 1.0:
            return Classification(
                ChainClass.TRANSIENT,
                "all-ones tail: the infinite product of p_i converges to a positive value",
            )
        return Classification(
            ChainClass.NULL_RECURRENT,
            f"constant tail {tail:g} < 1: the product vanishes while sum p_i diverges",
        )
    if isinstance(p, PowerLawComplement):
        if p.alpha > 1.0:
            return Classification(
                ChainClass.TRANSIENT,
                f"complements c*i^(-{p.alpha:g}) are summable, so the product stays positive",
            )
        return Classification(
            ChainClass.NULL_RECURRENT,
            f"complements c*i^(-{p.alpha:g}) are not summable (product 0) and p_i -> 1 "
            "(sum diverges)",
        )
    if isinstance(p, GeometricDecay):
        if p.rho * PHI_SQUARED < 1.0:
            return Classification(
                ChainClass.POSITIVE_RECURRENT,
                f"ratio test: rho*phi^2 = {p.rho * PHI_SQUARED:.6g} < 1, so "
                "sum p_i F_(2(i-1)) converges",
            )
        return Classification(
            ChainClass.UNKNOWN,
            "product vanishes and sum p_i converges, but the weighted series "
            "sum p_i F_(2(i-1)) diverges; no implemented criterion applies",
        )
    raise UnsupportedVariant(f"cannot classify descriptor {type(p).__name__}")


# ---------------------------------------------------------------------------
# block weights (beta) and stationary weights (xi)


def block_index(n: int) -> int:
    """The r with F_r <= n < F_(r+1)."""
    if n < 1:
        raise ValueError("block index is defined for n >= 1")
    return bisect.bisect_right(FIB64, n) - 1


def _pi_block(r: int, p: ProbSeq) -> float:
    # Pi_0 = 1; odd steps divide by p_((k+3)/2), even steps by p_(k/2 + 1)
    v = 1.0
    for k in range(1, r + 1):
        v /= p.p((k + 3) // 2) if k % 2 else p.p(k // 2 + 1)
    return v


def beta(n: int, p: ProbSeq) -> float:
    """Block-constant eigenvector weight: beta(n) = Pi_r on block r."""
    return _pi_block(block_index(n), p)


def xi(n: int, p: ProbSeq) -> float:
    """Stationary weight of state n: product of per-digit factors.

    The factor of digit index 0 is 1; digit index i >= 1 contributes
    p_(floor((i+1)/2) + 1).  Multiplicative over the greedy digits.
    """
    if n < 0:
        raise ValueError("xi is defined for nonnegative n")
    v = 1.0
    for i, e in enumerate(digits_of_int(n)):
        if e and i >= 1:
            v *= p.p((i + 1) // 2 + 1)
    return v


def _xi_array(size: int, p: ProbSeq) -> list[float]:
    """xi_0..xi_(size-1) via the block recursion xi(F_m + k) = xi(F_m) xi(k)."""
    out = [1.0] * size
    m = 1
    while m < len(FIB64) and FIB64[m] < size:
        fm = FIB64[m]
        xif = p.p((m + 1) // 2 + 1)
        for k in range(fm, min(size, FIB64[m + 1])):
            out[k] = xif * out[k - fm]
        m += 1
    return out


def beta_eigen_residual(level: int, p: ProbSeq) -> float:
    """Worst deviation of the beta weights from the eigen identity.

    For every checkable row i (1 <= i < F_level - 1, whose full support lies
    inside the truncation) the sum of transition probabilities weighted by the
    target betas must reproduce beta(i).
    """
    if level < 1 or level >= len(FIB64):
        raise ValueError("level must index a 64-bit scale value")
    size = FIB64[level]
    if size > MATRIX_BUDGET:
        raise BudgetExceeded(f"truncation at {size} states exceeds the budget")
    betas = [0.0] * size
    r = 0
    while r < len(FIB64) and FIB64[r] < size:
        val = _pi_block(r, p)
        for n in range(FIB64[r], min(size, FIB64[r + 1])):
            betas[n] = val
        r += 1
    worst = 0.0
    for i in range(1, size - 1):
        acc = [-betas[i]]
        for target, factor in transition_terms(i):
            if target >= 1:
                acc.append(factor.value(p) * betas[target])
        worst = max(worst, abs(math.fsum(acc)))
    return worst


@dataclass(frozen=True)
class StationaryMeasure:
    level: int
    weights: tuple[float, ...]  # normalized over states < F_level
    partial_sum: float  # sum of raw xi weights in the truncation
    unsummable: bool
    threshold: float


def stationary_measure(
    level: int, p: ProbSeq, summable_threshold: float = 1e6
) -> StationaryMeasure:
    """Truncated stationary weights mu_i = xi_i, normalized.

    The raw partial sum is reported; when it exceeds `summable_threshold` the
    measure is flagged unsummable (the normalized vector is still returned, as
    a truncated diagnostic object).
    """
    if level < 1 or level >= len(FIB64):
        raise ValueError("level must index a 64-bit scale value")
    size = FIB64[level]
    if size > MATRIX_BUDGET:
        raise BudgetExceeded(f"truncation at {size} states exceeds the budget")
    raw = _xi_array(size, p)
    total = math.fsum(raw)
    weights = tuple(v / total for v in raw)
    return StationaryMeasure(level, weights, total, total > summable_threshold, summable_threshold)


def stationarity_residual(level: int, p: ProbSeq) -> float:
    """max over 1 <= j < F_level of |(mu S)_j - mu_j| with mu_i = xi_i.

    State 0 is excluded: it receives mass from outside the truncation.  No
    other state does, so the truncated product is exact for j >= 1.
    """
    if level < 1 or level >= len(FIB64):
        raise ValueError("level must index a 64-bit scale value")
    size = FIB64[level]
    if size > MATRIX_BUDGET:
        raise BudgetExceeded(f"truncation at {size} states exceeds the budget")
    mu = _xi_array(size, p)
    inflow: list[list[float]] = [[] for _ in range(size)]
    for i in range(size):
        for target, prob in transition_dist(i, p).entries:
            if target < size:
                inflow[target].append(prob * mu[i])
    return max(abs(math.fsum(inflow[j]) - mu[j]) for j in range(1, size))


# ---------------------------------------------------------------------------
# positive-recurrent construction


class ConstructedSeq(ProbSeq):
    """A probability sequence built so its stationary weights are summable.

    Given p_1, p_2 and a summable positive budget b (with b(1) = 1 and
    b(2) = 3 p_2), each later p_k is the largest value <= 1 whose companion
    block sums a_(2k-3) + a_(2k-2) stay below b(k).  The per-block stationary
    mass then telescopes against the budget, so the total mass is finite.
    """

    def __init__(self, p1: float, p2: float, budget: Callable[[int], float], count: int):
        if not (0.0 < p1 <= 1.0) or not (0.0 < p2 <= 1.0):
            raise InvalidProbability("p1 and p2 must lie in (0, 1]")
        if count < 3:
            raise ValueError("count must be at least 3")
        if abs(budget(1) - 1.0) > 1e-9:
            raise InvalidBudget("budget must be normalized with b(1) = 1")
        if abs(budget(2) - 3.0 * p2) > 1e-9:
            raise InvalidBudget("budget must satisfy b(2) = 3*p2")
        self._budget = budget
        self._values = [p1, p2]
        self._a = [1.0, p2, 2.0 * p2]
        self._k = 2
        self._extend(count)
        self.values = tuple(self._values)
        self.a = tuple(self._a)

    def _extend(self, upto: int) -> None:
        while self._k < upto:
            k = self._k + 1
            bk = self._budget(k)
            if not (bk > 0.0):
                raise InvalidBudget(f"budget b({k}) must be positive, got {bk!r}")
            s1 = math.fsum(self._a[: 2 * k - 4])
            denom = 2.0 * s1 + 2.0 + self._a[2 * k - 4]
            pk = min(1.0, bk / denom)
            self._values.append(pk)
            self._a.append(pk * (s1 + 1.0))
            s2 = s1 + self._a[2 * k - 4]
            self._a.append(pk * (s2 + 1.0))
            self._k = k

    def p(self, i: int) -> float:
        if i < 1:
            raise ValueError("probability index starts at 1")
        if i > self._k:
            self._extend(i)
        return self._values[i - 1]

    def delta_lower_bound(self) -> float:
        return 0.0

    def describe(self) -> str:
        return f"constructed positive-recurrent sequence ({len(self.values)} values computed)"


def geometric_budget(p2: float, ratio: float = 0.25) -> Callable[[int], float]:
    """A convenient summable budget: b(1)=1, b(2)=3*p2, then geometric decay."""
    if not (0.0 < ratio < 1.0):
        raise InvalidBudget("ratio must lie in (0, 1)")

    def b(k: int) -> float:
        if k == 1:
            return 1.0
        return 3.0 * p2 * ratio ** (k - 2)

    return b


def construct_positive_recurrent(
    p1: float, p2: float, budget: Callable[[int], float], count: int
) -> ConstructedSeq:
    """Build p_1..p_count (extendable on demand) with summable xi weights."""
    return ConstructedSeq(p1, p2, budget, count)
