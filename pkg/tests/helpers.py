"""Independent oracle routines for the test suite.

Everything here recomputes results by a different route than the library:
sweep lines instead of interval algebra, leaf enumeration instead of the
recursive bracketer, literal word simulation instead of the counting DP.
None of these import anything from the modules they check beyond plain
data types.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb


def union_length_oracle(spans: list[tuple[Fraction, Fraction]]) -> Fraction:
    """Sweep-line total length of a union of closed spans."""
    events = sorted((lo, hi) for lo, hi in spans if hi > lo)
    total = Fraction(0)
    cur_lo = cur_hi = None
    for lo, hi in events:
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        elif hi > cur_hi:
            cur_hi = hi
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def leaf_masses(p: Fraction, depth: int) -> list[Fraction]:
    """Exact masses of the 2^depth dyadic leaves under the left-weight-p
    measure, by direct product over the bits of the leaf index."""
    out = []
    for idx in range(1 << depth):
        mass = Fraction(1)
        for level in range(depth):
            bit = (idx >> (depth - 1 - level)) & 1
            mass *= (1 - p) if bit else p
        out.append(mass)
    return out


def interval_mass_oracle(
    p: Fraction, depth: int, lo: Fraction, hi: Fraction
) -> tuple[Fraction, Fraction]:
    """(inner, outer) mass of [lo,hi]: leaves inside vs leaves overlapping."""
    masses = leaf_masses(p, depth)
    width = Fraction(1, 1 << depth)
    inner = outer = Fraction(0)
    for idx, mass in enumerate(masses):
        a, b = idx * width, (idx + 1) * width
        if a >= lo and b <= hi:
            inner += mass
        if a < hi and b > lo:  # interior overlap; endpoints carry no mass
            outer += mass
    return inner, outer


def logfloor_exponent_oracle(n: int) -> int:
    m = 0
    while (1 << (m + 1)) <= n + 1:
        m += 1
    return m


def logfloor_survivor_words(stages: int) -> list[tuple[int, int]]:
    """(zero_count, one_count) of every word surviving the removal schedule,
    by literal expansion: each stage replaces a word with all extensions of
    length m_stage except the all-zeros one."""
    words = [(0, 0)]
    for stage in range(1, stages + 1):
        m = logfloor_exponent_oracle(stage)
        grown = []
        for zeros, ones in words:
            for ext in range(1, 1 << m):  # skip 0 = the all-left extension
                grown.append((zeros + m - ext.bit_count(), ones + ext.bit_count()))
        words = grown
    return words


def logfloor_mass_oracle(p: Fraction, stages: int) -> Fraction:
    return sum(
        (p**z * (1 - p) ** o for z, o in logfloor_survivor_words(stages)),
        Fraction(0),
    )


def direct_product(terms: list[Fraction]) -> Fraction:
    out = Fraction(1)
    for t in terms:
        out *= 1 - t
    return out


def binomial_row_counts(m: int) -> list[int]:
    return [comb(m, k) for k in range(m + 1)]
