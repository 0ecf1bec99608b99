"""Increasing-map view of tree measures on [0,1].

A finite measure and the non-decreasing function f(x) = mu([0,x]) carry the
same information; this module moves between the two representations and
probes how strongly f distorts symmetric triples.  Ratio tables are
empirical: they lower-envelope any distortion gauge, they do not assert one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .enclosure import DEFAULT_BITS, Bounds, add_bounds, log2_bounds, mul_bounds, pow_bounds
from .errors import NonMonotone, PreconditionViolated
from .measure import (
    MassBracket,
    TableWeights,
    TreeMeasure,
    cdf,
    dyadic_cdf_grid,
)

DEFAULT_TAUS = (
    Fraction(1, 4),
    Fraction(1, 2),
    Fraction(1),
    Fraction(2),
    Fraction(4),
)

_STRADDLE_STEPS = (1, 2, 4)


@dataclass(frozen=True)
class QSMap:
    """f(x) = mu([0,x]) for a tree measure; f(0) = 0, f(1) = total mass."""

    source: TreeMeasure
    eval_depth: int = 24

    def __post_init__(self) -> None:
        if self.eval_depth < 0:
            raise PreconditionViolated("evaluation depth must be >= 0")


def evaluate(qsmap: QSMap, x: Fraction) -> MassBracket:
    """Bracket of f(x); exact at points aligned with the refinement grid."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise PreconditionViolated("map argument must lie in [0,1]")
    return cdf(qsmap.source, x, qsmap.eval_depth)


def tabulate(qsmap: QSMap, depth: int) -> list[Fraction]:
    """Exact values f(j / 2^depth) for j = 0 .. 2^depth."""
    return dyadic_cdf_grid(qsmap.source, depth)


def measure_from_map(table: list[Fraction]) -> TreeMeasure:
    """Rebuild the tree measure whose cdf matches a strictly increasing table
    on the dyadic grid: each node's left share is the fraction of the node's
    rise that happens on its left half."""
    values = [Fraction(v) for v in table]
    if len(values) < 2 or (len(values) - 1) & (len(values) - 2):
        raise PreconditionViolated("table length must be 2^depth + 1")
    depth = (len(values) - 1).bit_length() - 1
    for a, b in zip(values, values[1:]):
        if b <= a:
            raise NonMonotone(f"table stalls: {a} then {b}")
    rows = []
    for level in range(depth):
        stride = 1 << (depth - level)
        row = []
        for index in range(1 << level):
            lo = values[index * stride]
            mid = values[index * stride + stride // 2]
            hi = values[(index + 1) * stride]
            row.append((mid - lo) / (hi - lo))
        rows.append(tuple(row))
    return TreeMeasure(
        TableWeights(tuple(rows)), total_mass=values[-1] - values[0]
    )


@dataclass(frozen=True)
class RatioScanRow:
    tau: Fraction
    max_ratio: Fraction
    witness: tuple[Fraction, Fraction, Fraction]  # (x, y, z) attaining the max


def qs_ratio_scan(
    qsmap: QSMap,
    depth: int,
    taus: tuple[Fraction, ...] = DEFAULT_TAUS,
    random_triples: int = 0,
    seed: int = 0,
) -> list[RatioScanRow]:
    """Largest observed |f(x)-f(y)| / |f(x)-f(z)| per shape bound tau.

    Triples are symmetric dyadic straddles y = x -/+ a*2^-k, z = x +/- b*2^-k
    with a, b in {1, 2, 4}; a triple enters every row whose tau admits its
    shape ratio |x-y|/|x-z| = a/b, so rows grow monotonically with tau.
    Optionally mixes in uniformly random grid triples.
    """
    if depth < 1:
        raise PreconditionViolated("scan depth must be >= 1")
    grid = dyadic_cdf_grid(qsmap.source, depth)
    size = 1 << depth
    taus = tuple(sorted(Fraction(t) for t in taus))

    best: dict[Fraction, tuple[Fraction, tuple[Fraction, ...]] | None] = {
        t: None for t in taus
    }

    def offer(shape: Fraction, image: Fraction, witness: tuple[Fraction, ...]):
        for t in taus:
            if shape <= t:
                cur = best[t]
                if cur is None or image > cur[0]:
                    best[t] = (image, witness)

    def point(j: int) -> Fraction:
        return Fraction(j, size)

    for j in range(size + 1):
        for k in range(1, depth + 1):
            unit = 1 << (depth - k)
            for a in _STRADDLE_STEPS:
                for b in _STRADDLE_STEPS:
                    left, right = j - a * unit, j + b * unit
                    if left < 0 or right > size:
                        continue
                    rise_l = grid[j] - grid[left]
                    rise_r = grid[right] - grid[j]
                    shape = Fraction(a, b)
                    if rise_r > 0:
                        offer(shape, rise_l / rise_r,
                              (point(j), point(left), point(right)))
                    if rise_l > 0:
                        offer(Fraction(b, a), rise_r / rise_l,
                              (point(j), point(right), point(left)))

    if random_triples:
        rng = random.Random(seed)
        made = 0
        while made < random_triples:
            j, jy, jz = (rng.randrange(size + 1) for _ in range(3))
            if j == jy or j == jz or jy == jz:
                continue
            made += 1
            num = abs(grid[j] - grid[jy])
            den = abs(grid[j] - grid[jz])
            if den == 0:
                continue
            shape = Fraction(abs(j - jy), abs(j - jz))
            offer(shape, num / den, (point(j), point(jy), point(jz)))

    rows = []
    for t in taus:
        found = best[t]
        if found is None:
            continue
        rows.append(RatioScanRow(tau=t, max_ratio=found[0], witness=found[1]))
    return rows


def ratio_rows_csv(rows: list[RatioScanRow]) -> str:
    """CSV with columns tau, max_ratio_num, max_ratio_den, witness."""
    out = ["tau,max_ratio_num,max_ratio_den,witness"]
    for row in rows:
        wit = " ".join(str(v) for v in row.witness)
        out.append(
            f"{row.tau},{row.max_ratio.numerator},{row.max_ratio.denominator},{wit}"
        )
    return "\n".join(out) + "\n"


def pullback_constant(
    c: Fraction, eta2: Fraction, bits: int = DEFAULT_BITS
) -> Bounds:
    """Certified enclosure of c^(2*log2(eta2) + 1), the doubling constant a
    measure inherits when pulled back through a map with gauge value eta2 at
    ratio 2.  Exact whenever eta2 is a power of two."""
    c, eta2 = Fraction(c), Fraction(eta2)
    if c < 1 or eta2 < 1:
        raise PreconditionViolated("need c >= 1 and eta2 >= 1")
    exponent = add_bounds(
        mul_bounds(Bounds.exact(Fraction(2)), log2_bounds(eta2, bits)),
        Bounds.exact(Fraction(1)),
    )
    return pow_bounds(c, exponent, bits)
