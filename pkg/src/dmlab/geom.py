"""Exact geometry on the unit interval.

Everything here is a finite union of intervals with rational endpoints:
Cantor-type construction trees (split each piece in two around an open middle
gap), cut-out configurations (remove a sequence of closed balls), dyadic
porous stages, and gap-with-witness structures whose conditions certify that
the residual set keeps mass under controlled-doubling measures.

Endpoint bookkeeping is explicit: removed middles are open, removed balls are
closed, so complements carry per-side openness flags instead of an epsilon.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from fractions import Fraction

from . import seq as seqmod
from .errors import (
    DepthBudgetExceeded,
    EmptyRemainder,
    FailsThickness,
    InvalidFamily,
    NodeBudgetExceeded,
    PreconditionViolated,
    ResolutionExhausted,
)
from .seq import SequenceFamily, term

DEFAULT_MAX_DEPTH = 32
DEFAULT_MAX_NODES = 1 << 20


def resolve_depth_cap(explicit: int | None = None) -> int:
    """CLI flag beats the DMLAB_MAX_DEPTH environment override beats default."""
    if explicit is not None:
        return explicit
    env = os.environ.get("DMLAB_MAX_DEPTH")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise PreconditionViolated(f"bad DMLAB_MAX_DEPTH {env!r}") from exc
    return DEFAULT_MAX_DEPTH


def resolve_node_cap(explicit: int | None = None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("DMLAB_MAX_NODES")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise PreconditionViolated(f"bad DMLAB_MAX_NODES {env!r}") from exc
    return DEFAULT_MAX_NODES


def check_depth(depth: int, max_depth: int | None = None) -> None:
    cap = resolve_depth_cap(max_depth)
    if depth < 0:
        raise PreconditionViolated("depth must be >= 0")
    if depth > cap:
        raise DepthBudgetExceeded(f"depth {depth} exceeds cap {cap}")


@dataclass(frozen=True)
class RationalInterval:
    """Subinterval of [0,1] with exact endpoints and per-side openness."""

    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if not 0 <= self.lo <= self.hi <= 1:
            raise PreconditionViolated(
                f"interval [{self.lo}, {self.hi}] must sit inside [0, 1]"
            )
        if self.lo == self.hi and (self.lo_open or self.hi_open):
            raise PreconditionViolated("degenerate interval cannot be open")

    @property
    def diameter(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def closedness(self) -> str:
        if self.lo_open and self.hi_open:
            return "open"
        if not self.lo_open and not self.hi_open:
            return "closed"
        return "half-open"

    def contains_point(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and self.lo_open:
            return False
        if x == self.hi and self.hi_open:
            return False
        return True


def closed(lo, hi) -> RationalInterval:
    return RationalInterval(Fraction(lo), Fraction(hi))


def open_interval(lo, hi) -> RationalInterval:
    return RationalInterval(Fraction(lo), Fraction(hi), lo_open=True, hi_open=True)


def intervals_intersect(a: RationalInterval, b: RationalInterval) -> bool:
    lo = max(a.lo, b.lo)
    hi = min(a.hi, b.hi)
    if lo > hi:
        return False
    if lo < hi:
        return True
    return a.contains_point(lo) and b.contains_point(lo)


def interval_contains(outer: RationalInterval, inner: RationalInterval) -> bool:
    """inner is a subset of outer, as point sets."""
    if inner.lo < outer.lo or inner.hi > outer.hi:
        return False
    if inner.lo == outer.lo and outer.lo_open and not inner.lo_open:
        return False
    if inner.hi == outer.hi and outer.hi_open and not inner.hi_open:
        return False
    return True


def _emit(out: list[RationalInterval], lo, lo_open, hi, hi_open) -> None:
    if lo > hi:
        return
    if lo == hi and (lo_open or hi_open):
        return
    out.append(RationalInterval(lo, hi, lo_open, hi_open))


def merge_components(pieces: list[RationalInterval]) -> list[RationalInterval]:
    """Union as maximal components (two pieces merge when the meeting point
    belongs to at least one of them)."""
    if not pieces:
        return []
    items = sorted(pieces, key=lambda p: (p.lo, p.lo_open))
    out = [items[0]]
    for p in items[1:]:
        cur = out[-1]
        touching = p.lo < cur.hi or (
            p.lo == cur.hi and (not p.lo_open or not cur.hi_open)
        )
        if not touching:
            out.append(p)
            continue
        if p.hi > cur.hi:
            hi, hi_open = p.hi, p.hi_open
        elif p.hi == cur.hi:
            hi, hi_open = cur.hi, cur.hi_open and p.hi_open
        else:
            hi, hi_open = cur.hi, cur.hi_open
        out[-1] = RationalInterval(cur.lo, hi, cur.lo_open, hi_open)
    return out


def union_length(pieces: list[RationalInterval]) -> Fraction:
    return sum((c.diameter for c in merge_components(pieces)), Fraction(0))


def subtract_intervals(
    piece: RationalInterval, cuts: list[RationalInterval]
) -> list[RationalInterval]:
    """piece minus the union of cuts, honoring openness on both sides."""
    live = [c for c in cuts if intervals_intersect(piece, c)]
    if not live:
        return [piece]
    out: list[RationalInterval] = []
    cur, cur_in = piece.lo, not piece.lo_open
    for c in merge_components(live):
        s = max(c.lo, piece.lo)
        s_kept = c.lo_open and c.lo >= piece.lo  # point s survives the cut
        if c.lo < piece.lo:
            s_kept = False
        if s > cur:
            # the cut keeps its open left endpoint inside the piece
            _emit(out, cur, not cur_in, s, not (s_kept and piece.contains_point(s)))
        elif s == cur and cur_in and s_kept:
            _emit(out, cur, False, cur, False)
        if c.hi >= piece.hi:
            cur = piece.hi
            cur_in = c.hi_open and c.hi == piece.hi and not piece.hi_open
            break
        cur, cur_in = c.hi, c.hi_open
    if cur < piece.hi:
        _emit(out, cur, not cur_in, piece.hi, piece.hi_open)
    elif cur == piece.hi and cur_in and not piece.hi_open:
        _emit(out, cur, False, cur, False)
    return out


def subtract_from_all(
    pieces: list[RationalInterval], cuts: list[RationalInterval]
) -> list[RationalInterval]:
    out: list[RationalInterval] = []
    for piece in pieces:
        out.extend(subtract_intervals(piece, cuts))
    return out


def max_overlap(pieces: list[RationalInterval]) -> tuple[int, Fraction | None]:
    """Largest number of pieces sharing a point, with a witness point."""
    if not pieces:
        return 0, None
    points = sorted({p.lo for p in pieces} | {p.hi for p in pieces})
    candidates = list(points)
    for a, b in zip(points, points[1:]):
        candidates.append((a + b) / 2)
    best, witness = 0, None
    for x in sorted(candidates):
        cover = sum(1 for p in pieces if p.contains_point(x))
        if cover > best:
            best, witness = cover, x
    return best, witness


# --- Cantor-type construction trees -----------------------------------------

@dataclass(frozen=True)
class ConstructionTree:
    """Nested splitting of [0,1]: level-k pieces split in two around an open
    middle gap occupying fraction beta_(k+1) of the parent."""

    beta: SequenceFamily
    depth: int
    nodes: tuple[tuple[RationalInterval, ...], ...]  # levels 0..depth
    gaps: tuple[tuple[RationalInterval, ...], ...]  # gaps[k]: middles of level-k nodes
    perfectness_constant: Fraction | None = None

    def node(self, level: int, index: int) -> RationalInterval:
        return self.nodes[level][index]

    def level_length(self, level: int) -> Fraction:
        return sum((n.diameter for n in self.nodes[level]), Fraction(0))


def build_cantor(
    beta: SequenceFamily,
    depth: int,
    max_depth: int | None = None,
    max_nodes: int | None = None,
) -> ConstructionTree:
    """Construct the tree to the given depth; splitting into level k uses the
    k-th gap fraction, so the level-k length sum is prod_{j<=k} (1 - beta_j)."""
    check_depth(depth, max_depth)
    if (1 << depth) > resolve_node_cap(max_nodes):
        raise NodeBudgetExceeded(f"2^{depth} leaves exceed the node cap")
    levels: list[tuple[RationalInterval, ...]] = [(closed(0, 1),)]
    gaps: list[tuple[RationalInterval, ...]] = []
    worst: Fraction | None = None
    for k in range(1, depth + 1):
        b = term(beta, k)
        if not 0 < b < 1:
            raise InvalidFamily(f"gap fraction at level {k} must be in (0,1), got {b}")
        worst = b if worst is None or b > worst else worst
        children: list[RationalInterval] = []
        middles: list[RationalInterval] = []
        half = (1 - b) / 2
        for node in levels[k - 1]:
            length = node.diameter
            left_hi = node.lo + half * length
            right_lo = node.hi - half * length
            children.append(closed(node.lo, left_hi))
            children.append(closed(right_lo, node.hi))
            middles.append(open_interval(left_hi, right_lo))
        levels.append(tuple(children))
        gaps.append(tuple(middles))
    perfectness = None if worst is None else (1 + worst) / (1 - worst)
    return ConstructionTree(
        beta=beta,
        depth=depth,
        nodes=tuple(levels),
        gaps=tuple(gaps),
        perfectness_constant=perfectness,
    )


def realized_beta_max(tree: ConstructionTree) -> Fraction | None:
    if tree.depth == 0:
        return None
    return max(term(tree.beta, k) for k in range(1, tree.depth + 1))


# --- Cut-out configurations --------------------------------------------------

@dataclass(frozen=True)
class CutOutConfig:
    """Closed balls to remove from an ambient ([0,1] or a construction tree),
    with a declared family bounding the ball diameters."""

    balls: tuple[RationalInterval, ...]
    diam_family: SequenceFamily | None = None
    ambient: ConstructionTree | None = None  # None means the unit interval

    def __post_init__(self) -> None:
        object.__setattr__(self, "balls", tuple(self.balls))
        for b in self.balls:
            if b.lo_open or b.hi_open:
                raise PreconditionViolated("cut-out balls must be closed")

    def normalize_order(self) -> "CutOutConfig":
        ordered = sorted(self.balls, key=lambda b: (-b.diameter, b.lo))
        return replace(self, balls=tuple(ordered))

    def validate_diameters(self) -> None:
        if self.diam_family is None:
            raise PreconditionViolated("no diameter family declared")
        for i, b in enumerate(self.balls, start=1):
            bound = term(self.diam_family, i)
            if b.diameter > bound:
                raise PreconditionViolated(
                    f"ball {i} has diameter {b.diameter} > declared bound {bound}"
                )


def ambient_pieces(
    config: CutOutConfig, depth: int | None = None
) -> list[RationalInterval]:
    if config.ambient is None:
        return [closed(0, 1)]
    level = config.ambient.depth if depth is None else min(depth, config.ambient.depth)
    return list(config.ambient.nodes[level])


def remaining_set(
    config: CutOutConfig, n_balls: int, depth: int | None = None
) -> list[RationalInterval]:
    """Exact components of (ambient minus the first n_balls closed balls)."""
    if n_balls < 0 or n_balls > len(config.balls):
        raise PreconditionViolated(f"n_balls must be in [0, {len(config.balls)}]")
    cuts = list(config.balls[:n_balls])
    return subtract_from_all(ambient_pieces(config, depth), cuts)


def largest_gap(
    config: CutOutConfig, n_balls: int, depth: int | None = None
) -> tuple[RationalInterval, Fraction]:
    """Maximal-diameter surviving component (leftmost on ties)."""
    pieces = remaining_set(config, n_balls, depth)
    if not pieces:
        raise EmptyRemainder(f"nothing survives the first {n_balls} balls")
    best = max(pieces, key=lambda p: p.diameter)
    for p in pieces:  # leftmost tie-break since pieces are ordered by position
        if p.diameter == best.diameter:
            return p, p.diameter
    raise AssertionError("unreachable")


def inflate(config: CutOutConfig, n_balls: int, zeta: Fraction) -> list[RationalInterval]:
    """Enlarge each of the first n_balls by zeta on both sides, clipped to
    [0,1]; deliberately does not merge overlapping results."""
    zeta = Fraction(zeta)
    if zeta <= 0:
        raise PreconditionViolated("inflation amount must be > 0")
    out = []
    for b in config.balls[:n_balls]:
        out.append(closed(max(Fraction(0), b.lo - zeta), min(Fraction(1), b.hi + zeta)))
    return out


# --- Dyadic porous stages ----------------------------------------------------

@dataclass(frozen=True)
class DyadicPiece:
    level: int
    index: int

    def interval(self) -> RationalInterval:
        unit = Fraction(1, 1 << self.level)
        return closed(self.index * unit, (self.index + 1) * unit)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.level)


@dataclass(frozen=True)
class PorousConstruction:
    alpha: SequenceFamily
    stages: tuple[tuple[DyadicPiece, ...], ...]  # stages[n] is F_n, stage 0 = [0,1]
    removed: tuple[tuple[DyadicPiece, ...], ...]  # removed[n] taken out of F_n

    def stage_length(self, n: int) -> Fraction:
        return sum((p.length for p in self.stages[n]), Fraction(0))


def _ceil_log2_inv(alpha: Fraction) -> int:
    """Smallest t >= 1 with 2^-t <= alpha, for alpha in (0,1)."""
    num, den = alpha.numerator, alpha.denominator
    t = max(1, den.bit_length() - num.bit_length())
    while (num << t) < den:
        t += 1
    while t > 1 and (num << (t - 1)) >= den:
        t -= 1
    return t


def build_porous(
    alpha: SequenceFamily,
    depth: int,
    max_level: int | None = None,
    max_depth: int | None = None,
) -> PorousConstruction:
    """From each surviving dyadic piece remove its leftmost aligned dyadic
    subinterval of the largest dyadic length <= alpha_n * piece length.

    That largest-dyadic choice pins the removed length L into the sandwich
    alpha*len/2 < L <= alpha*len, the scale the decay certificate needs.
    """
    check_depth(depth, max_depth)
    level_cap = resolve_depth_cap(max_level)
    node_cap = resolve_node_cap(None)
    stages: list[tuple[DyadicPiece, ...]] = [(DyadicPiece(0, 0),)]
    removed: list[tuple[DyadicPiece, ...]] = []
    for n in range(1, depth + 1):
        a_n = term(alpha, n)
        t = _ceil_log2_inv(a_n)
        survivors: list[DyadicPiece] = []
        cut: list[DyadicPiece] = []
        for piece in stages[n - 1]:
            m = piece.level + t
            if m > level_cap:
                raise ResolutionExhausted(
                    f"stage {n} needs dyadic level {m} > cap {level_cap}"
                )
            cut.append(DyadicPiece(m, piece.index << t))
            # binary decomposition of piece minus its leftmost level-m block
            for j in range(m, piece.level, -1):
                survivors.append(DyadicPiece(j, (piece.index << (j - piece.level)) + 1))
        survivors.sort(key=lambda p: Fraction(p.index, 1 << p.level))
        if len(survivors) > node_cap:
            raise NodeBudgetExceeded(f"stage {n} would hold {len(survivors)} pieces")
        stages.append(tuple(survivors))
        removed.append(tuple(cut))
    return PorousConstruction(alpha=alpha, stages=tuple(stages), removed=tuple(removed))


# --- Gap structures with witness balls ---------------------------------------

@dataclass(frozen=True)
class ThickPair:
    piece: RationalInterval  # I
    gap: RationalInterval  # J, the open part removed inside I
    witness_center: Fraction
    witness_radius: Fraction


@dataclass(frozen=True)
class ThickStructure:
    """Levelwise (piece, gap) pairs with witness balls.

    Conditions checked by verify_thick:
      i    every piece lies in [0,1] and each gap inside its piece
      ii   at each level no point lies in more than overlap_bound pieces
      iii  c * diam(gap) <= alpha_n * diam(piece)
      iv   the witness ball (radius >= c * diam(piece)) sits inside its piece
           and misses every earlier-level gap
      v    union of pieces minus all gaps stays inside the declared target
    """

    levels: tuple[tuple[ThickPair, ...], ...]
    overlap_bound: int
    witness_constant: Fraction
    alpha: SequenceFamily
    target: tuple[RationalInterval, ...] | None = None


@dataclass(frozen=True)
class ThickViolation:
    condition: str  # one of "i".."v"
    level: int  # 1-based structure level
    index: int
    detail: str


@dataclass(frozen=True)
class ThickVerdict:
    valid: bool
    violations: tuple[ThickViolation, ...] = ()


def verify_thick(ts: ThickStructure, depth: int | None = None) -> ThickVerdict:
    """Check conditions i..v exactly; violations are returned, not thrown."""
    levels = ts.levels if depth is None else ts.levels[:depth]
    bad: list[ThickViolation] = []
    c = Fraction(ts.witness_constant)
    if not 0 < c <= 1:
        bad.append(ThickViolation("iv", 0, 0, f"witness constant {c} outside (0,1]"))
    for n, pairs in enumerate(levels, start=1):
        a_n = term(ts.alpha, n)
        for j, pair in enumerate(pairs):
            if not interval_contains(pair.piece, pair.gap):
                bad.append(
                    ThickViolation("i", n, j, "gap escapes its piece")
                )
            if c * pair.gap.diameter > a_n * pair.piece.diameter:
                bad.append(
                    ThickViolation(
                        "iii",
                        n,
                        j,
                        f"c*diam(gap)={c * pair.gap.diameter} exceeds "
                        f"alpha_n*diam(piece)={a_n * pair.piece.diameter}",
                    )
                )
            radius = Fraction(pair.witness_radius)
            if radius < c * pair.piece.diameter or radius <= 0:
                bad.append(
                    ThickViolation("iv", n, j, "witness radius below c * diam(piece)")
                )
                continue
            lo = pair.witness_center - radius
            hi = pair.witness_center + radius
            if lo < pair.piece.lo or hi > pair.piece.hi:
                bad.append(ThickViolation("iv", n, j, "witness ball escapes the piece"))
                continue
            ball = closed(lo, hi)
            hit = None
            for k in range(n - 1):
                for g_idx, earlier in enumerate(levels[k]):
                    if intervals_intersect(ball, earlier.gap):
                        hit = (k + 1, g_idx)
                        break
                if hit:
                    break
            if hit:
                bad.append(
                    ThickViolation(
                        "iv", n, j, f"witness ball meets the level-{hit[0]} gap {hit[1]}"
                    )
                )
        count, witness = max_overlap([pair.piece for pair in pairs])
        if count > ts.overlap_bound:
            bad.append(
                ThickViolation(
                    "ii", n, -1, f"{count} pieces share the point {witness}"
                )
            )
    if ts.target is not None and levels:
        shell = merge_components([pair.piece for pairs in levels for pair in pairs])
        gaps = [pair.gap for pairs in levels for pair in pairs]
        residual = subtract_from_all(shell, gaps)
        target = merge_components(list(ts.target))
        for piece in residual:
            if not any(interval_contains(t, piece) for t in target):
                bad.append(
                    ThickViolation(
                        "v", 0, -1, f"residual piece [{piece.lo}, {piece.hi}] leaves the target"
                    )
                )
                break
    return ThickVerdict(valid=not bad, violations=tuple(bad))


def thick_from_cantor(
    tree: ConstructionTree,
    min_witness_constant: Fraction = Fraction(1, 1 << 16),
) -> ThickStructure:
    """Read the construction tree as a gap structure: level n pairs each
    level-(n-1) node with its removed middle, and puts the witness ball at the
    midpoint of the node's left child, radius c * diam(node) for
    c = min(1, (1 - beta_max)/4)."""
    if tree.depth == 0:
        # degenerate: no splits yet, so no gap/piece pairs; vacuously valid
        return ThickStructure(
            levels=(),
            overlap_bound=1,
            witness_constant=Fraction(1, 4),
            alpha=tree.beta,
            target=tree.nodes[0],
        )
    beta_max = realized_beta_max(tree)
    c = min(Fraction(1), (1 - beta_max) / 4)
    if c < min_witness_constant:
        raise FailsThickness(
            f"witness constant {c} below the floor {min_witness_constant}"
        )
    levels = []
    for n in range(1, tree.depth + 1):
        pairs = []
        for j, piece in enumerate(tree.nodes[n - 1]):
            gap = tree.gaps[n - 1][j]
            left_child = tree.nodes[n][2 * j]
            pairs.append(
                ThickPair(
                    piece=piece,
                    gap=gap,
                    witness_center=left_child.midpoint,
                    witness_radius=c * piece.diameter,
                )
            )
        levels.append(tuple(pairs))
    return ThickStructure(
        levels=tuple(levels),
        overlap_bound=1,
        witness_constant=c,
        alpha=tree.beta,
        target=tree.nodes[tree.depth],
    )
