"""Measures defined by binary mass splitting.

A TreeMeasure assigns mass by walking a binary tree: at each node a weight in
(0,1) decides how much of the node's mass goes to the left child. The tree is
either the dyadic subdivision of [0,1] or a Cantor-type construction tree (in
which case removed middles carry no mass). All masses are Fractions; interval
queries return certified two-sided brackets whose width is controlled by the
query depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import MisalignedTrees, PreconditionViolated, ZeroMassBall
from .geom import (
    ConstructionTree,
    CutOutConfig,
    RationalInterval,
    closed,
    interval_contains,
    remaining_set,
)
from .ratio import parse_rational


@dataclass(frozen=True)
class MassBracket:
    """Certified enclosure 0 <= lower <= mu(E) <= upper."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "lower", Fraction(self.lower))
        object.__setattr__(self, "upper", Fraction(self.upper))
        if not 0 <= self.lower <= self.upper:
            raise PreconditionViolated(
                f"bad mass bracket [{self.lower}, {self.upper}]"
            )

    def __add__(self, other: "MassBracket") -> "MassBracket":
        return MassBracket(self.lower + other.lower, self.upper + other.upper)

    def scale(self, k: Fraction) -> "MassBracket":
        k = Fraction(k)
        if k < 0:
            raise PreconditionViolated("mass brackets only scale by k >= 0")
        return MassBracket(self.lower * k, self.upper * k)

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    def exact(self) -> Fraction:
        if not self.is_exact:
            raise PreconditionViolated("bracket is not a point")
        return self.lower

    def contains(self, x: Fraction) -> bool:
        return self.lower <= x <= self.upper


EXACT_ZERO = MassBracket(Fraction(0), Fraction(0))


@dataclass(frozen=True)
class BinomialWeights:
    """Same left-share p at every node."""

    p: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", Fraction(self.p))
        if not 0 < self.p < 1:
            raise PreconditionViolated(f"binomial weight must be in (0,1), got {self.p}")

    def left_share(self, level: int, index: int) -> Fraction:
        return self.p

    @property
    def depth_limit(self) -> int | None:
        return None


@dataclass(frozen=True)
class TableWeights:
    """Explicit left-share table, one tuple per level; levels[k][i] is the
    left share of node i at level k. Below the table the split is even."""

    levels: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        frozen = []
        for k, row in enumerate(self.levels):
            if len(row) != (1 << k):
                raise PreconditionViolated(f"level {k} needs {1 << k} weights")
            vals = tuple(Fraction(w) for w in row)
            for w in vals:
                if not 0 < w < 1:
                    raise PreconditionViolated(f"weight {w} outside (0,1)")
            frozen.append(vals)
        object.__setattr__(self, "levels", tuple(frozen))

    def left_share(self, level: int, index: int) -> Fraction:
        if level < len(self.levels):
            return self.levels[level][index]
        return Fraction(1, 2)

    @property
    def depth_limit(self) -> int | None:
        return len(self.levels)


WeightRule = Union[BinomialWeights, TableWeights]


@dataclass(frozen=True)
class TreeMeasure:
    """base None = dyadic subdivision of [0,1]; otherwise the measure lives on
    the construction tree's nodes and every removed middle has mass zero."""

    weights: WeightRule
    base: ConstructionTree | None = None
    total_mass: Fraction = Fraction(1)
    base_mass_bracket: MassBracket | None = None  # provenance when restricted

    def __post_init__(self) -> None:
        object.__setattr__(self, "total_mass", Fraction(self.total_mass))
        if self.total_mass < 0:
            raise PreconditionViolated("total mass must be >= 0")

    @property
    def split_depth(self) -> int:
        """Deepest level at which node masses are defined; below a weight
        table the split is unknown and brackets stay put."""
        if self.base is not None:
            return self.base.depth
        limit = self.weights.depth_limit
        return 60 if limit is None else limit


def node_interval(m: TreeMeasure, level: int, index: int) -> RationalInterval:
    if level < 0 or index < 0 or index >= (1 << level):
        raise PreconditionViolated(f"no node ({level}, {index})")
    if m.base is not None:
        if level > m.base.depth:
            raise PreconditionViolated(f"tree base stops at depth {m.base.depth}")
        return m.base.nodes[level][index]
    unit = Fraction(1, 1 << level)
    return closed(index * unit, (index + 1) * unit)


def node_mass(m: TreeMeasure, level: int, index: int) -> Fraction:
    mass = m.total_mass
    for bit_pos in range(level - 1, -1, -1):
        prefix_level = level - 1 - bit_pos
        prefix = index >> (bit_pos + 1)
        w = m.weights.left_share(prefix_level, prefix)
        mass *= w if ((index >> bit_pos) & 1) == 0 else (1 - w)
    return mass


def effective_depth(m: TreeMeasure, depth: int) -> int:
    if depth < 0:
        raise PreconditionViolated("depth must be >= 0")
    return min(depth, m.split_depth)


def interval_mass(m: TreeMeasure, iv: RationalInterval, depth: int) -> MassBracket:
    """Bracket mu(iv): lower adds nodes inside iv, upper also charges the
    straddling boundary nodes at the query depth.

    Single points carry no mass, so the query is evaluated on its closed hull;
    open or half-open intervals get the same bracket as their closure.
    """
    if iv.lo == iv.hi:
        return EXACT_ZERO
    iv = closed(iv.lo, iv.hi)
    cap = effective_depth(m, depth)

    def rec(level: int, index: int, mass: Fraction) -> tuple[Fraction, Fraction]:
        node_iv = node_interval(m, level, index)
        # single-point contact contributes nothing: require interior overlap
        if mass == 0 or node_iv.hi <= iv.lo or node_iv.lo >= iv.hi:
            return Fraction(0), Fraction(0)
        if interval_contains(iv, node_iv):
            return mass, mass
        if level == cap:
            return Fraction(0), mass
        w = m.weights.left_share(level, index)
        lo_l, hi_l = rec(level + 1, 2 * index, mass * w)
        lo_r, hi_r = rec(level + 1, 2 * index + 1, mass * (1 - w))
        return lo_l + lo_r, hi_l + hi_r

    lo, hi = rec(0, 0, m.total_mass)
    return MassBracket(lo, hi)


def cdf(m: TreeMeasure, x: Fraction, depth: int) -> MassBracket:
    x = Fraction(x)
    if x <= 0:
        return EXACT_ZERO
    if x >= 1:
        return MassBracket(m.total_mass, m.total_mass)
    return interval_mass(m, closed(0, x), depth)


def ball_mass(m: TreeMeasure, x: Fraction, r: Fraction, depth: int) -> MassBracket:
    """Mass of the closed ball around x clipped to [0,1]."""
    x, r = Fraction(x), Fraction(r)
    if r <= 0:
        raise PreconditionViolated("ball radius must be > 0")
    lo = max(Fraction(0), x - r)
    hi = min(Fraction(1), x + r)
    if lo >= hi:
        raise ZeroMassBall(f"ball at {x} radius {r} misses [0,1]")
    return interval_mass(m, closed(lo, hi), depth)


def cutout_mass(
    m: TreeMeasure, config: CutOutConfig, n_balls: int, depth: int
) -> MassBracket:
    """Bracket the mass surviving after the first n_balls are removed."""
    pieces = remaining_set(config, n_balls, depth=None)
    total = EXACT_ZERO
    for piece in pieces:
        total = total + interval_mass(m, piece, depth)
    return total


def dyadic_cdf_grid(m: TreeMeasure, depth: int) -> list[Fraction]:
    """F[i] = mu([0, i/2^depth]) exactly, for dyadic-base measures."""
    if m.base is not None:
        raise PreconditionViolated("exact cdf grid needs the dyadic base")
    if depth < 0:
        raise PreconditionViolated("depth must be >= 0")
    if depth > m.split_depth:
        raise PreconditionViolated(
            f"grid depth {depth} exceeds the measure's split depth {m.split_depth}"
        )
    masses = [m.total_mass]
    for level in range(depth):
        nxt = []
        for index, mass in enumerate(masses):
            w = m.weights.left_share(level, index)
            nxt.append(mass * w)
            nxt.append(mass * (1 - w))
        masses = nxt
    out = [Fraction(0)]
    acc = Fraction(0)
    for mass in masses:
        acc += mass
        out.append(acc)
    return out


def restrict(
    m: TreeMeasure, tree: ConstructionTree, eval_depth: int | None = None
) -> TreeMeasure:
    """Renormalized trace of m on a construction tree.

    Each target node's left share is the midpoint ratio of the children's mass
    brackets, evaluated at eval_depth (default: tree depth + 6). Nodes whose
    upper mass vanishes mean the tree lives where m has no mass.
    """
    if eval_depth is None:
        eval_depth = tree.depth + 6
    root = interval_mass(m, tree.nodes[0][0], eval_depth)
    if root.upper == 0:
        raise MisalignedTrees("the measure puts no mass on the tree's root")
    rows: list[tuple[Fraction, ...]] = []
    for level in range(tree.depth):
        row = []
        for index in range(1 << level):
            left = interval_mass(m, tree.nodes[level + 1][2 * index], eval_depth)
            right = interval_mass(m, tree.nodes[level + 1][2 * index + 1], eval_depth)
            denom = left.midpoint + right.midpoint
            if denom == 0 or left.midpoint == 0 or right.midpoint == 0:
                raise MisalignedTrees(
                    f"node ({level}, {index}) splits with a vanishing side"
                )
            row.append(left.midpoint / denom)
        rows.append(tuple(row))
    leaf_total = EXACT_ZERO
    for leaf in tree.nodes[tree.depth]:
        leaf_total = leaf_total + interval_mass(m, leaf, eval_depth)
    weights = TableWeights(tuple(rows))
    # total mass = the surviving-set mass at the build depth (midpoint of the
    # certified bracket; the bracket itself rides along for consumers)
    return TreeMeasure(
        weights=weights,
        base=tree,
        total_mass=leaf_total.midpoint,
        base_mass_bracket=leaf_total,
    )


# --- JSON round trip ----------------------------------------------------------

def measure_to_spec(m: TreeMeasure) -> dict:
    if m.base is not None:
        raise PreconditionViolated("only dyadic-base measures serialize")
    out: dict = {"total_mass": str(m.total_mass)}
    if isinstance(m.weights, BinomialWeights):
        out["kind"] = "binomial"
        out["p"] = str(m.weights.p)
    else:
        out["kind"] = "table"
        out["weights"] = [[str(w) for w in row] for row in m.weights.levels]
    return out


def measure_from_spec(data: dict) -> TreeMeasure:
    kind = data.get("kind")
    total = parse_rational(str(data.get("total_mass", "1")))
    if kind == "binomial":
        return TreeMeasure(BinomialWeights(parse_rational(str(data["p"]))), total_mass=total)
    if kind == "table":
        rows = tuple(
            tuple(parse_rational(str(w)) for w in row) for row in data["weights"]
        )
        return TreeMeasure(TableWeights(rows), total_mass=total)
    raise PreconditionViolated(f"unknown measure kind {kind!r}")
