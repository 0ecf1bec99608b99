"""Doubling diagnostics for tree measures on [0,1].

doubling_scan certifies two-sided bounds on the doubling constant over a
finite window of centers and radii. fit_ratio_decay validates a decay pair
(Lambda, t) bounding small-ball mass ratios, and fit_mass_window produces the
four-constant window fit (lam, s, Lambda, t) sandwiching ball masses between
multiples of diameter powers. verify_small_ball_bound is a conservative
three-state checker for the mass lower bound with exponent s: it certifies a
hold, certifies a counterexample, or raises after exhausting precision.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .enclosure import (
    DEFAULT_BITS,
    exp2_bounds,
    log2_bounds,
    mul_bounds,
    pow_bounds,
    Bounds,
)
from .errors import (
    EnclosureInconclusive,
    NotUniformlyPerfect,
    PreconditionViolated,
    ZeroMassBall,
)
from .geom import closed, realized_beta_max
from .measure import MassBracket, TreeMeasure, ball_mass, dyadic_cdf_grid, interval_mass

PERFECTNESS_GAP_CAP = Fraction(15, 16)


@dataclass(frozen=True)
class ScanWitness:
    x: Fraction
    r: Fraction
    ratio_lower: Fraction


@dataclass(frozen=True)
class RatioDecayFit:
    big_lam: Fraction
    t: Fraction
    pairs_checked: int
    holdout_size: int
    rounds: int


@dataclass(frozen=True)
class MassWindowFit:
    lam: Fraction
    s: Fraction
    big_lam: Fraction
    t: Fraction
    samples: int


@dataclass(frozen=True)
class DoublingReport:
    c_upper: Fraction
    c_lower: Fraction
    witness: ScanWitness
    s_lower: Fraction
    s_upper: Fraction
    window_lo: Fraction
    window_hi: Fraction
    depth: int
    exact: bool
    ratio_decay: RatioDecayFit | None = None
    mass_window: MassWindowFit | None = None
    notes: tuple[str, ...] = ()


class _MassOracle:
    """Uniform exact-or-bracket ball masses for the scan grids."""

    def __init__(self, m: TreeMeasure, depth: int):
        self.m = m
        self.depth = depth
        self.grid: list[Fraction] | None = None
        if m.base is None:
            grid_depth = min(depth + 1, m.split_depth)
            if grid_depth == depth + 1:
                self.grid = dyadic_cdf_grid(m, grid_depth)
                self.grid_depth = grid_depth
        self.eval_depth = m.split_depth if m.base is not None else min(
            depth + 8, m.split_depth
        )

    def ball(self, x: Fraction, r: Fraction) -> MassBracket:
        lo = max(Fraction(0), x - r)
        hi = min(Fraction(1), x + r)
        if self.grid is not None:
            scale = 1 << self.grid_depth
            li, hi_i = lo * scale, hi * scale
            if li.denominator == 1 and hi_i.denominator == 1:
                v = self.grid[int(hi_i)] - self.grid[int(li)]
                return MassBracket(v, v)
        return interval_mass(self.m, closed(lo, hi), self.eval_depth)


def _scan_centers(m: TreeMeasure, depth: int) -> list[Fraction]:
    if m.base is None:
        step = Fraction(1, 1 << (depth + 1))
        return [i * step for i in range((1 << (depth + 1)) + 1)]
    level = min(depth, m.base.depth)
    pts: set[Fraction] = set()
    for node in m.base.nodes[level]:
        pts.update((node.lo, node.midpoint, node.hi))
    return sorted(pts)


def scan_core(
    m: TreeMeasure, depth: int
) -> tuple[Fraction, Fraction, ScanWitness, bool, list[str]]:
    """Certified doubling-ratio bounds over the grid of centers and radii
    2^-k, k = 1..depth, comparing each ball with its doubled ball."""
    if depth < 1:
        raise PreconditionViolated("scan needs depth >= 1")
    if m.total_mass == 0:
        raise ZeroMassBall("the zero measure has no doubling ratios")
    oracle = _MassOracle(m, depth)
    centers = _scan_centers(m, depth)
    c_upper = Fraction(0)
    c_lower = Fraction(0)
    witness: ScanWitness | None = None
    exact = True
    skipped = 0
    for k in range(1, depth + 1):
        r = Fraction(1, 1 << k)
        for x in centers:
            small = oracle.ball(x, r)
            big = oracle.ball(x, 2 * r)
            if small.lower == 0:
                skipped += 1
                exact = False
                continue
            up = big.upper / small.lower
            lo = big.lower / small.upper
            exact = exact and small.is_exact and big.is_exact
            if up > c_upper:
                c_upper = up
            if lo > c_lower:
                c_lower = lo
                witness = ScanWitness(x=x, r=r, ratio_lower=lo)
    if witness is None:
        raise ZeroMassBall("no scanned ball produced a certifiable ratio")
    notes = []
    if skipped:
        notes.append(f"skipped {skipped} pairs whose small ball had no certified mass")
    return c_upper, c_lower, witness, exact, notes


def per_scale_max_ratios(m: TreeMeasure, depth: int) -> list[tuple[int, Fraction]]:
    """Certified max doubling ratio at each scale 2^-k, k = 1..depth.

    Lower-certified: each entry is a ratio the measure provably attains at
    that scale, so the list under-reports rather than over-reports."""
    if depth < 1:
        raise PreconditionViolated("scan needs depth >= 1")
    oracle = _MassOracle(m, depth)
    centers = _scan_centers(m, depth)
    out = []
    for k in range(1, depth + 1):
        r = Fraction(1, 1 << k)
        best = Fraction(0)
        for x in centers:
            small = oracle.ball(x, r)
            if small.upper == 0:
                continue
            lo = oracle.ball(x, 2 * r).lower / small.upper
            if lo > best:
                best = lo
        out.append((k, best))
    return out


def _guard_tree_perfectness(m: TreeMeasure) -> None:
    if m.base is None:
        return
    worst = realized_beta_max(m.base)
    if worst is not None and worst >= PERFECTNESS_GAP_CAP:
        raise NotUniformlyPerfect(
            f"construction gaps reach fraction {worst}; ratio fits need gaps "
            f"below {PERFECTNESS_GAP_CAP}"
        )


T_STEP = Fraction(1, 64)


def fit_ratio_decay(
    m: TreeMeasure,
    depth: int,
    lambda_cap: Fraction = Fraction(1),
    t_max: Fraction = Fraction(4),
    seed: int = 0,
    holdout: int = 64,
    bits: int = DEFAULT_BITS,
) -> RatioDecayFit:
    """Largest grid exponent t (steps of 1/64) with a validated ratio bound
    mu(B(x,r)) / mu(B(x,R)) <= Lambda * (r/R)^t, Lambda <= lambda_cap, over
    concentric interior pairs; then re-checked on a fresh random holdout.

    If the holdout finds a worse ratio the offending scales join the fitting
    sample and t is refitted, up to four rounds.
    """
    if depth < 2:
        raise PreconditionViolated("ratio fit needs depth >= 2")
    if lambda_cap < 1:
        raise PreconditionViolated("lambda cap below 1 can never validate l = 0")
    _guard_tree_perfectness(m)
    oracle = _MassOracle(m, depth)

    # best certified ratio upper bound at each scale separation l
    best: dict[int, Fraction] = {}

    def feed(x: Fraction, big_r: Fraction, l: int) -> bool:
        small = oracle.ball(x, big_r / (1 << l))
        big = oracle.ball(x, big_r)
        if big.lower == 0:
            return False
        ratio = small.upper / big.lower
        if ratio > best.get(l, Fraction(0)):
            best[l] = ratio
        return True

    pairs = 0
    for j in range(1, depth):
        big_r = Fraction(1, 1 << j)
        for i in range(1, 1 << j):
            x = i * big_r
            if x - big_r < 0 or x + big_r > 1:
                continue
            for l in range(0, depth - j + 1):
                if feed(x, big_r, l):
                    pairs += 1
    if not pairs:
        raise PreconditionViolated("no interior pair produced a certified ratio")

    grid_max = int(t_max / T_STEP)

    def lam_at(t_steps: int) -> Fraction:
        worst = Fraction(0)
        for l, ratio in best.items():
            growth = exp2_bounds(Fraction(l * t_steps, 64), bits).hi
            val = ratio * growth
            if val > worst:
                worst = val
        return worst

    def largest_feasible() -> int:
        lo_k, hi_k = 0, grid_max
        if lam_at(1) > lambda_cap:
            return 0
        lo_k = 1
        while lo_k < hi_k:
            mid = (lo_k + hi_k + 1) // 2
            if lam_at(mid) <= lambda_cap:
                lo_k = mid
            else:
                hi_k = mid - 1
        return lo_k

    rng = random.Random(seed)
    rounds = 0
    holdout_seen = 0
    while True:
        rounds += 1
        k = largest_feasible()
        if k == 0:
            raise PreconditionViolated(
                "no positive exponent validates at this Lambda cap"
            )
        t = k * T_STEP
        lam = lam_at(k)
        failures: list[tuple[Fraction, Fraction, int]] = []
        for _ in range(holdout):
            j = rng.randrange(1, depth)
            big_r = Fraction(1, 1 << j)
            i = rng.randrange(0, 1 << j) * 2 + 1
            x = Fraction(i, 1 << (j + 1))
            if x - big_r < 0 or x + big_r > 1:
                continue
            l = rng.randrange(0, depth - j + 1)
            small = oracle.ball(x, big_r / (1 << l))
            big = oracle.ball(x, big_r)
            if big.lower == 0:
                continue
            holdout_seen += 1
            ratio = small.upper / big.lower
            # same rounding direction as the fit, so a pair never fails
            # against the bound it itself defines
            growth_up = exp2_bounds(Fraction(l * k, 64), bits).hi
            if ratio * growth_up > lam:
                failures.append((x, big_r, l))
                if ratio > best.get(l, Fraction(0)):
                    best[l] = ratio
        if not failures:
            return RatioDecayFit(
                big_lam=lam,
                t=t,
                pairs_checked=pairs + holdout_seen,
                holdout_size=holdout_seen,
                rounds=rounds,
            )
        if rounds >= 4:
            raise PreconditionViolated(
                f"holdout kept failing after {rounds} refit rounds"
            )


def fit_mass_window(
    m: TreeMeasure,
    depth: int,
    c_upper: Fraction | None = None,
    lambda_cap: Fraction = Fraction(1),
    bits: int = DEFAULT_BITS,
) -> MassWindowFit:
    """Window fit lam * diam^s <= mass <= Lambda * diam^t over node samples
    and doubled-node samples: s is the 1/64-grid ceiling of log2(doubling
    constant); lam is the worst observed mass/diam^s; (Lambda, t) come from
    the same samples with t maximized subject to Lambda <= lambda_cap."""
    if depth < 1:
        raise PreconditionViolated("window fit needs depth >= 1")
    _guard_tree_perfectness(m)
    if c_upper is None:
        c_upper, _, _, _, _ = scan_core(m, depth)
    if c_upper < 1:
        raise PreconditionViolated("doubling bound below 1 is impossible")
    s_hi = log2_bounds(c_upper, bits).hi
    s = Fraction(math.ceil(s_hi * 64), 64)

    samples: list[tuple[Fraction, Fraction]] = []  # (mass, diam), both exact or safe
    if m.base is None:
        cap = min(depth, m.split_depth)
        masses = [m.total_mass]
        for level in range(cap + 1):
            diam = Fraction(1, 1 << level)
            for i, mass in enumerate(masses):
                samples.append((mass, diam))
                if i + 1 < len(masses):
                    samples.append((mass + masses[i + 1], 2 * diam))
            if level == cap:
                break
            nxt = []
            for i, mass in enumerate(masses):
                w = m.weights.left_share(level, i)
                nxt.append(mass * w)
                nxt.append(mass * (1 - w))
            masses = nxt
    else:
        cap = min(depth, m.base.depth)
        for level in range(cap + 1):
            nodes = m.base.nodes[level]
            row = [interval_mass(m, nd, m.split_depth) for nd in nodes]
            for i, nd in enumerate(nodes):
                samples.append((row[i].lower, nd.diameter))
                if i + 1 < len(nodes):
                    span = nodes[i + 1].hi - nd.lo
                    samples.append((row[i].lower + row[i + 1].lower, span))

    # lower constant: worst mass / diam^s, rounded down through the enclosure
    lam: Fraction | None = None
    for mass, diam in samples:
        denom = pow_bounds(diam, s, bits).hi
        val = mass / denom
        if lam is None or val < lam:
            lam = val
    assert lam is not None

    def upper_lam(t: Fraction) -> Fraction:
        worst = Fraction(0)
        for mass, diam in samples:
            denom = pow_bounds(diam, t, bits).lo
            if denom == 0:
                raise EnclosureInconclusive("diameter power underflowed")
            val = mass / denom
            if val > worst:
                worst = val
        return worst

    lo_k, hi_k = 0, 4 * 64
    if upper_lam(T_STEP) > lambda_cap:
        raise PreconditionViolated("no positive growth exponent fits under the cap")
    lo_k = 1
    while lo_k < hi_k:
        mid = (lo_k + hi_k + 1) // 2
        if upper_lam(mid * T_STEP) <= lambda_cap:
            lo_k = mid
        else:
            hi_k = mid - 1
    t = lo_k * T_STEP
    return MassWindowFit(
        lam=lam, s=s, big_lam=upper_lam(t), t=t, samples=len(samples)
    )


def doubling_scan(
    m: TreeMeasure,
    depth: int,
    fit: bool = True,
    lambda_cap: Fraction = Fraction(1),
    seed: int = 0,
    bits: int = DEFAULT_BITS,
) -> DoublingReport:
    c_upper, c_lower, witness, exact, notes = scan_core(m, depth)
    s_up = log2_bounds(c_upper, bits).hi
    s_lo = log2_bounds(c_lower, bits).lo if c_lower >= 1 else Fraction(0)
    ratio_decay = None
    window_fit = None
    if fit:
        try:
            ratio_decay = fit_ratio_decay(m, depth, lambda_cap=lambda_cap, seed=seed, bits=bits)
        except (PreconditionViolated, NotUniformlyPerfect) as exc:
            notes = notes + [f"ratio fit unavailable: {exc}"]
        try:
            window_fit = fit_mass_window(m, depth, c_upper=c_upper, lambda_cap=lambda_cap, bits=bits)
        except (PreconditionViolated, NotUniformlyPerfect) as exc:
            notes = notes + [f"window fit unavailable: {exc}"]
    return DoublingReport(
        c_upper=c_upper,
        c_lower=c_lower,
        witness=witness,
        s_lower=s_lo,
        s_upper=s_up,
        window_lo=Fraction(1, 1 << depth),
        window_hi=Fraction(1, 2),
        depth=depth,
        exact=exact,
        ratio_decay=ratio_decay,
        mass_window=window_fit,
        notes=tuple(notes),
    )


# --- conservative lower-bound verification ------------------------------------

@dataclass(frozen=True)
class SmallBallCase:
    a_lo: Fraction
    a_hi: Fraction
    x: Fraction
    r: Fraction


@dataclass(frozen=True)
class SmallBallResult:
    holds: bool
    checked: int
    counterexample: SmallBallCase | None = None
    margin: Fraction | None = None


def _rhs_bounds(
    rho: Fraction, c: Fraction | None, s: Fraction | None, bits: int
) -> Bounds:
    """Enclosure of 2^-s * rho^s with s either given or read off c = 2^s."""
    if s is not None:
        s_b = Bounds(Fraction(s), Fraction(s))
        inv = exp2_bounds(-Fraction(s), bits)
    else:
        assert c is not None
        s_b = log2_bounds(c, bits)
        inv = Bounds(1 / Fraction(c), 1 / Fraction(c))
    rho_pow = pow_bounds(rho, s_b, bits)
    return mul_bounds(inv, rho_pow)


def verify_small_ball_bound(
    m: TreeMeasure,
    c: Fraction | None = None,
    s: Fraction | None = None,
    count: int = 1000,
    depth: int = 10,
    seed: int = 0,
    cases: list[SmallBallCase] | None = None,
    bits: int = DEFAULT_BITS,
    max_bits: int = 4096,
) -> SmallBallResult:
    """For sampled sets A = [a,b], centers x in A and radii 0 < r < diam A,
    certify mu(B(x,r)) >= 2^-s (r/diam A)^s mu(A) or produce a certified
    counterexample. s may be given directly or derived from a constant c."""
    if (c is None) == (s is None):
        raise PreconditionViolated("give exactly one of c or s")
    if c is not None and Fraction(c) < 1:
        raise PreconditionViolated("constant must be >= 1")
    eval_depth = min(depth + 8, m.split_depth)
    todo: list[SmallBallCase] = list(cases) if cases else []
    rng = random.Random(seed)
    grid = 1 << depth
    while len(todo) < count:
        ia = rng.randrange(0, grid)
        ib = rng.randrange(ia + 1, grid + 1)
        a, b = Fraction(ia, grid), Fraction(ib, grid)
        ix = rng.randrange(ia, ib + 1)
        x = Fraction(ix, grid)
        r = (b - a) / (1 << rng.randrange(1, 5))
        todo.append(SmallBallCase(a, b, x, r))

    checked = 0
    for case in todo:
        if not (case.a_lo <= case.x <= case.a_hi):
            raise PreconditionViolated("center must lie in the set")
        if not 0 < case.r < case.a_hi - case.a_lo:
            raise PreconditionViolated("radius must be in (0, diam A)")
        mu_a = interval_mass(m, closed(case.a_lo, case.a_hi), eval_depth)
        mu_b = ball_mass(m, case.x, case.r, eval_depth)
        rho = case.r / (case.a_hi - case.a_lo)
        cur = bits
        while True:
            factor = _rhs_bounds(rho, c, s, cur)
            rhs_up = mu_a.upper * factor.hi
            rhs_lo = mu_a.lower * factor.lo
            if mu_b.lower >= rhs_up:
                break
            if mu_b.upper < rhs_lo:
                return SmallBallResult(
                    holds=False,
                    checked=checked + 1,
                    counterexample=case,
                    margin=rhs_lo - mu_b.upper,
                )
            if cur >= max_bits:
                raise EnclosureInconclusive(
                    f"cannot settle the case A=[{case.a_lo},{case.a_hi}], "
                    f"x={case.x}, r={case.r} at {cur} bits"
                )
            cur *= 2
        checked += 1
    return SmallBallResult(holds=True, checked=checked)
