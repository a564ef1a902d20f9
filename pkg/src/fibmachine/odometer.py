"""The deterministic Fibonacci adding machine (successor N -> N+1).

Two independent routes compute the same map and are cross-checked in tests:

* succ_carry: digit rewriting with an auxiliary carry bit.  The update rules
  use integer-division expressions and come in two branches, selected by the
  lowest digit of N.  With digit 0 clear the carry walks the even/odd digit
  pairs (eps_2i, eps_2i+1); with digit 0 set the machine first clears it and
  the carry walks the pairs shifted by one.  Once a carry dies every higher
  digit is copied unchanged.

* succ_transducer: a two-state finite transducer that reads the word from the
  least-significant side in blocks of one or two digits, rewrites the carry
  prefix, then copies the rest verbatim.

Both reject inadmissible input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import CapacityError, InadmissibleWord, NoPath
from .numeration import UINT64_MAX, decode, digits_lsb, is_admissible, word_from_lsb

STATE_CARRY = "I"
STATE_COPY = "T"


@dataclass(frozen=True)
class CarryTrace:
    """Carry bits produced while incrementing one word.

    `carries[0]` is the initial carry (always 1).  For the branch taken when
    digit 0 is clear the sequence starts at index -1 (the pre-digit carry);
    for the other branch it starts at index 0.  The final entry is the first
    zero carry, after which all digits are copied unchanged.
    """

    branch: str  # "low_zero" or "low_one"
    carries: tuple[int, ...]
    start_index: int

    @property
    def halted_at(self) -> int:
        """Index of the carry bit that first became 0."""
        return self.start_index + len(self.carries) - 1


class TransducerEdge(NamedTuple):
    src: str
    label_in: str
    label_out: str
    dst: str


def _checked_input(word: str) -> list[int]:
    if not is_admissible(word):
        raise InadmissibleWord(f"word {word!r} is not an admissible Fibonacci word")
    eps = list(digits_lsb(word))
    if decode(eps) >= UINT64_MAX:
        raise CapacityError("successor would exceed the 64-bit range")
    return eps


def succ_carry(word: str) -> tuple[str, CarryTrace]:
    """Increment an admissible word via the carry rewriting rules."""
    eps = _checked_input(word)
    out = eps + [0, 0, 0, 0]  # headroom for the carry to die in padding
    eps = eps + [0, 0, 0, 0]

    if eps[0] == 0:
        branch, start = "low_zero", -1
        carries = [1]
        i = 0
        while carries[-1] == 1:
            c = carries[-1]
            lo, hi = eps[2 * i], eps[2 * i + 1]
            out[2 * i] = (lo + c) // (hi * c + 1)
            out[2 * i + 1] = hi // (c + 1)
            carries.append(c * hi)
            i += 1
    else:
        branch, start = "low_one", 0
        out[0] = 0
        carries = [1]
        i = 1
        while carries[-1] == 1:
            c = carries[-1]
            lo, hi = eps[2 * i - 1], eps[2 * i]
            out[2 * i - 1] = (lo + c) // (hi * c + 1)
            out[2 * i] = hi // (c + 1)
            carries.append(c * hi)
            i += 1

    return word_from_lsb(out), CarryTrace(branch, tuple(carries), start)


def succ_transducer(word: str) -> tuple[str, tuple[TransducerEdge, ...]]:
    """Increment an admissible word by running the two-state transducer."""
    if not is_admissible(word):
        raise NoPath(f"the transducer rejects {word!r}")
    orig = list(digits_lsb(word))
    if decode(orig) >= UINT64_MAX:
        raise CapacityError("successor would exceed the 64-bit range")
    eps = orig + [0, 0]  # the finishing edge may consume padding above the top digit
    out: list[int] = []
    edges: list[TransducerEdge] = []

    i = 0
    if eps[0] == 1:
        edges.append(TransducerEdge(STATE_CARRY, "1", "0", STATE_CARRY))
        out.append(0)
        i = 1
    while True:
        lo, hi = eps[i], eps[i + 1]
        if hi == 1:  # lo is 0 here in any admissible word
            edges.append(TransducerEdge(STATE_CARRY, "10", "00", STATE_CARRY))
            out.extend((0, 0))
            i += 2
        else:
            edges.append(TransducerEdge(STATE_CARRY, "00", "01", STATE_COPY))
            out.extend((1, 0))
            i += 2
            break
    for k in range(i, len(orig)):
        ch = str(orig[k])
        edges.append(TransducerEdge(STATE_COPY, ch, ch, STATE_COPY))
        out.append(orig[k])

    return word_from_lsb(out), tuple(edges)


def format_path(edges: tuple[TransducerEdge, ...]) -> str:
    """Render a run as (state,in/out,state) tuples, last-consumed block first."""
    return "".join(
        f"({e.dst},{e.label_in}/{e.label_out},{e.src})" for e in reversed(edges)
    )
