"""Greedy numeration in Fibonacci-like linear-recurrence bases.

The default base is the Fibonacci one: F_0 = 1, F_1 = 2, F_n = F_{n-1} + F_{n-2}.
Every natural number has a unique greedy (Zeckendorf) expansion whose digit
word never contains two adjacent ones.  An order-d base with coefficients
a_1 >= a_2 >= ... >= a_d >= 1 works the same way, with admissibility meaning
that every length-d digit window reads lexicographically below a_1...a_d.

Words cross the API boundary as most-significant-first strings ("10101");
internally digits live least-significant-first so that carry propagation can
index from digit 0 upward.  The empty word encodes 0.  All integer values are
checked against an unsigned 64-bit cap.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import CapacityError, InadmissibleWord

UINT64_MAX = 2**64 - 1

Word = Union[str, Sequence[int]]


@dataclass(frozen=True)
class BaseDef:
    """An order-d numeration base with coefficient block a_1..a_d."""

    coeffs: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if len(c) < 2:
            raise ValueError("base degree must be at least 2")
        if c[-1] < 1:
            raise ValueError("base coefficients must be positive")
        if any(c[i] < c[i + 1] for i in range(len(c) - 1)):
            raise ValueError("base coefficients must be non-increasing")
        if c[0] > 9:
            raise ValueError("leading coefficient above 9 would need multi-character digits")

    @property
    def degree(self) -> int:
        return len(self.coeffs)


FIBONACCI = BaseDef((1, 1), name="fibonacci")


def base_sequence(base: BaseDef, count: int) -> list[int]:
    """First `count` scale values F_0..F_{count-1} of the base, 64-bit checked."""
    if count < 1:
        raise ValueError("count must be at least 1")
    d = base.degree
    a = base.coeffs
    values = [1]
    for n in range(1, count):
        if n < d:
            # below the recurrence depth the defining sum carries a trailing +1
            v = sum(a[j - 1] * values[n - j] for j in range(1, n + 1)) + 1
        else:
            v = sum(a[j - 1] * values[n - j] for j in range(1, d + 1))
        if v > UINT64_MAX:
            raise CapacityError(f"scale value F_{n} exceeds the 64-bit range")
        values.append(v)
    return values


def _max_count(base: BaseDef) -> int:
    if base.degree == 2 and base.coeffs == (1, 1):
        return len(FIB64)
    n = 1
    while True:
        try:
            base_sequence(base, n + 1)
        except CapacityError:
            return n
        n += 1


def _values_upto(base: BaseDef, n: int) -> list[int]:
    """All scale values <= n (at least F_0), without tripping the 64-bit check."""
    if base.degree == 2 and base.coeffs == (1, 1):
        hi = bisect_right(FIB64, n)
        return list(FIB64[:hi]) if hi else [1]
    values = base_sequence(base, _max_count(base))
    out = []
    for v in values:
        if v > n:
            break
        out.append(v)
    return out if out else [1]


def digits_lsb(word: str) -> tuple[int, ...]:
    """Parse an MSB-first display word into the internal LSB-first digit tuple."""
    try:
        raw = word.encode("ascii")
    except UnicodeEncodeError:
        raise InadmissibleWord(f"word {word!r} contains a non-digit character") from None
    if raw and not raw.isdigit():
        raise InadmissibleWord(f"word {word!r} contains a non-digit character")
    return tuple(b - 48 for b in reversed(raw))


def word_from_lsb(digits: Sequence[int]) -> str:
    """Render LSB-first digits as the canonical MSB-first word (no leading zeros)."""
    top = len(digits)
    while top > 0 and digits[top - 1] == 0:
        top -= 1
    return "".join(map(str, reversed(digits[:top])))


def _as_lsb(word: Word) -> tuple[int, ...]:
    if isinstance(word, str):
        return digits_lsb(word)
    return tuple(int(d) for d in word)


_ZERO_ONE = frozenset("01")


def is_admissible(word: Word, base: BaseDef = FIBONACCI) -> bool:
    """True iff every digit window reads lexicographically below a_1..a_d.

    Accepts either an MSB-first string or an LSB-first digit sequence.  Windows
    that extend below digit 0 are padded with zeros, which also enforces the
    per-digit bound on short words.  Leading zeros are harmless.
    """
    a = base.coeffs
    if isinstance(word, str) and a == (1, 1):
        # binary digits with no adjacent ones; checked at C speed
        return not (set(word) - _ZERO_ONE) and "11" not in word
    try:
        eps = _as_lsb(word)
    except InadmissibleWord:
        return False
    if len(a) == 2:
        a1, a2 = a
        prev = 0
        for e in eps:
            if e < 0 or e > a1 or (e == a1 and prev >= a2):
                return False
            prev = e
        return True
    d = base.degree
    if any(e < 0 for e in eps):
        return False
    for i in range(len(eps)):
        window = tuple(eps[i - k] if i - k >= 0 else 0 for k in range(d))
        if window >= a:
            return False
    return True


def digits_of_int(n: int, base: BaseDef = FIBONACCI) -> tuple[int, ...]:
    """Greedy LSB-first digits of n (empty tuple for 0)."""
    if n < 0:
        raise ValueError("cannot encode a negative integer")
    if n > UINT64_MAX:
        raise CapacityError(f"{n} exceeds the 64-bit range")
    if n == 0:
        return ()
    values = _values_upto(base, n)
    eps = [0] * len(values)
    r = n
    for k in range(len(values) - 1, -1, -1):
        if values[k] <= r:
            eps[k] = r // values[k]
            r -= eps[k] * values[k]
    return tuple(eps)


def encode(n: int, base: BaseDef = FIBONACCI) -> str:
    """Greedy expansion of n as an MSB-first word ("" encodes 0)."""
    return word_from_lsb(digits_of_int(n, base))


def decode(word: Word, base: BaseDef = FIBONACCI) -> int:
    """Value of an admissible word; inverse of encode on canonical words."""
    eps = _as_lsb(word)
    if base.coeffs == (1, 1):
        # hot path: admissibility fused into the accumulation over FIB64
        fib = FIB64
        nfib = len(fib)
        total = 0
        prev = 0
        for i, e in enumerate(eps):
            if e == 1:
                if prev:
                    raise InadmissibleWord(f"word {word!r} is not admissible in this base")
                if i >= nfib:
                    raise CapacityError("decoded value exceeds the 64-bit range")
                total += fib[i]
                prev = 1
            elif e == 0:
                prev = 0
            else:
                raise InadmissibleWord(f"word {word!r} is not admissible in this base")
        if total > UINT64_MAX:
            raise CapacityError("decoded value exceeds the 64-bit range")
        return total
    if not is_admissible(eps, base):
        raise InadmissibleWord(f"word {word!r} is not admissible in this base")
    top = len(eps)
    while top > 0 and eps[top - 1] == 0:
        top -= 1
    values = base_sequence(base, top) if top else []
    total = sum(e * v for e, v in zip(eps, values))
    if total > UINT64_MAX:
        raise CapacityError("decoded value exceeds the 64-bit range")
    return total


def _fib64() -> tuple[int, ...]:
    vals = [1, 2]
    while True:
        nxt = vals[-1] + vals[-2]
        if nxt > UINT64_MAX:
            return tuple(vals)
        vals.append(nxt)


#: Every Fibonacci-base scale value that fits in 64 bits (F_0..F_91).
FIB64 = _fib64()
