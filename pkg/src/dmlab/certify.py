"""Positivity and decay certificates from exact products and tail bounds.

The central object is ProductBracket: an exact rational partial product of
factors (1 - x_i) together with certified rational bounds on the rest of the
infinite product, so that

    partial * tail_lower  <=  prod_{i>=1}(1 - x_i)  <=  partial * tail_upper

holds unconditionally.  The tail lower bound comes from the elementary
inequality prod(1 - x_i) >= 1 - sum(x_i) (useful once the remaining sum drops
below 1); the tail upper bound from prod(1 - x_i) <= exp(-sum(x_i)) with the
exponential enclosed rationally from above.

On top of that sit:
  * certify_fat_thick      positive-mass certificates for thick constructions
  * certify_thin_porous    decay-to-zero certificates for porous constructions
  * solve_inflation_exponent / tail_domination_start / cutout_lower_bound
                           the constant-chasing steps for cut-out sets
  * logfloor_schedule_mass the exactly solvable removal schedule driven by
                           floor(log2(j+1)), with an independent brute-force
                           tree enumeration that must agree rational-for-
                           rational with the closed form
  * interval_packing_verdict  the overlap criterion for unions of intervals
                           whose lengths use up an exact length budget
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Union

from .doubling import DoublingReport
from .enclosure import (
    DEFAULT_BITS,
    Bounds,
    exp2_bounds,
    exp_neg_upper,
    log2_bounds,
    pow_bounds,
    refine,
)
from .errors import (
    DivergentSeries,
    EnclosureInconclusive,
    ExponentWindowEmpty,
    GapTooSmall,
    LengthMismatch,
    NotInEllT,
    PreconditionViolated,
    SeriesConverges,
    TailTooLarge,
    Undecidable,
)
from .geom import (
    CutOutConfig,
    RationalInterval,
    ThickStructure,
    inflate,
    largest_gap,
    merge_components,
    verify_thick,
)
from .measure import TreeMeasure, cutout_mass
from .seq import (
    LogFloor,
    SequenceFamily,
    Summability,
    classify_ellp,
    family_length,
    logfloor_exponent,
    series_total,
    tail_sum_upper,
    term,
)


class Conclusion(enum.Enum):
    POSITIVE = "positive"
    INCONCLUSIVE = "inconclusive"


class LimitVerdict(enum.Enum):
    POSITIVE_LIMIT = "positive_limit"
    ZERO_LIMIT = "zero_limit"


class PackingVerdict(enum.Enum):
    THIN = "thin"
    FAT = "fat"


# --- certified infinite products ---------------------------------------------

@dataclass(frozen=True)
class ProductBracket:
    """Enclosure of an infinite product of factors (1 - x_i), x_i in (0,1).

    `partial` is the product of the first n_terms factors; when the factors
    are not exactly representable it is a certified lower bound and
    `partial_upper` carries the matching upper bound (None means exact).
    """

    partial: Fraction
    tail_lower: Fraction
    tail_upper: Fraction
    n_terms: int
    partial_upper: Fraction | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.tail_lower <= self.tail_upper <= 1:
            raise PreconditionViolated(
                f"tail bounds out of order: [{self.tail_lower}, {self.tail_upper}]"
            )
        if not 0 <= self.partial <= 1:
            raise PreconditionViolated(f"partial product {self.partial} outside [0,1]")
        if self.partial_upper is not None and not (
            self.partial <= self.partial_upper <= 1
        ):
            raise PreconditionViolated("partial bounds out of order")
        if self.n_terms < 0:
            raise PreconditionViolated("n_terms must be >= 0")

    @property
    def lower_value(self) -> Fraction:
        return self.partial * self.tail_lower

    @property
    def upper_value(self) -> Fraction:
        hi = self.partial if self.partial_upper is None else self.partial_upper
        return hi * self.tail_upper

    @property
    def width(self) -> Fraction:
        return self.upper_value - self.lower_value

    def encloses(self, value: Fraction) -> bool:
        return self.lower_value <= value <= self.upper_value


def _balanced_prod(vals: list[int]) -> int:
    """Product of a list of ints by pairwise halving (fast for many factors)."""
    if not vals:
        return 1
    work = list(vals)
    while len(work) > 1:
        nxt = [work[i] * work[i + 1] for i in range(0, len(work) - 1, 2)]
        if len(work) % 2:
            nxt.append(work[-1])
        work = nxt
    return work[0]


def _exact_partial(terms: list[Fraction]) -> Fraction:
    # accumulate numerators/denominators as raw ints; one gcd at the end
    nums = [t.denominator - t.numerator for t in terms]
    dens = [t.denominator for t in terms]
    return Fraction(_balanced_prod(nums), _balanced_prod(dens))


def _lookahead_sum(x: SequenceFamily, start: int, count: int) -> Fraction:
    """Exact sum of terms start+1 .. start+count (clipped to the family)."""
    length = family_length(x)
    stop = start + count if length is None else min(start + count, length)
    total = Fraction(0)
    for i in range(start + 1, stop + 1):
        total += term(x, i)
    return total


def product_bracket(
    x: SequenceFamily, n_partial: int, bits: int = DEFAULT_BITS, lookahead: int = 64
) -> ProductBracket:
    """Certified enclosure of prod_{i>=1}(1 - x_i) truncated after n_partial
    exact factors.

    Divergent sum(x_i) is fine: the lower bound degrades to 0 and the upper
    bound shrinks with the lookahead window, reflecting a vanishing product.
    """
    if n_partial < 0:
        raise PreconditionViolated("truncation index must be >= 0")
    length = family_length(x)
    used = n_partial if length is None else min(n_partial, length)
    terms = [term(x, i) for i in range(1, used + 1)]
    for i, t in enumerate(terms, start=1):
        if not 0 < t < 1:
            raise PreconditionViolated(f"factor term {i} = {t} outside (0,1)")
    partial = _exact_partial(terms)

    if length is not None:
        # finite families carry an exactly computable tail
        rest = [term(x, i) for i in range(used + 1, length + 1)]
        tail = _exact_partial(rest)
        return ProductBracket(partial, tail, tail, used)

    try:
        tail_sum = tail_sum_upper(x, Fraction(1), used, bits)
    except DivergentSeries:
        tail_sum = None
    tail_lower = 1 - tail_sum if tail_sum is not None and tail_sum < 1 else Fraction(0)
    ahead = _lookahead_sum(x, used, lookahead)
    tail_upper = min(Fraction(1), exp_neg_upper(ahead))
    return ProductBracket(partial, tail_lower, tail_upper, used)


# --- fatness: thick constructions --------------------------------------------

@dataclass(frozen=True)
class FatnessCertificate:
    alpha: SequenceFamily
    t: Fraction
    factor_scale: Fraction  # the combined constant multiplying alpha_n^t
    n0: int                 # first stage whose decay factor is certified < 1
    bound: ProductBracket
    conclusion: Conclusion
    notes: tuple[str, ...] = ()


def _scaled_power(
    scale: Fraction, base: Fraction, exponent: Fraction, bits: int
) -> Bounds:
    pb = pow_bounds(base, exponent, bits)
    return Bounds(scale * pb.lo, scale * pb.hi)


def _first_small_stage(
    alpha: SequenceFamily, t: Fraction, scale: Fraction, bits: int
) -> int:
    """Least n0 with scale * alpha_n^t certifiably < 1 for every n >= n0."""

    def decided(n: int) -> bool:
        def attempt(b: int):
            sp = _scaled_power(scale, term(alpha, n), t, b)
            if sp.hi < 1:
                return True
            if sp.lo >= 1:
                return False
            return None

        return refine(attempt, bits, max_bits=4096)

    length = family_length(alpha)
    if length is not None:
        # explicit prefixes need not be monotone: take the longest good suffix
        n0 = length + 1
        for n in range(length, 0, -1):
            if decided(n):
                n0 = n
            else:
                break
        return n0
    # the infinite families have non-increasing terms, first success is least
    n = 1
    while n <= 1_000_000:
        if decided(n):
            return n
        n += 1
    raise Undecidable("decay factors stayed >= 1 for 10^6 stages")


def certify_fat_thick(
    thick: Union[ThickStructure, SequenceFamily],
    t: Fraction,
    factor_scale: Fraction,
    tail_target: Fraction = Fraction(1, 1 << 34),
    max_terms: int = 65536,
    bits: int = DEFAULT_BITS,
) -> FatnessCertificate:
    """Certificate that a thick construction keeps positive mass.

    Accepts either a verified ThickStructure (its gap-ratio family is used)
    or the family directly when the geometry has been checked separately.
    The certified lower bound is a ProductBracket of the per-stage decay
    factors 1 - factor_scale * alpha_n^t starting at the first stage n0 where
    every later factor is positive.
    """
    notes: list[str] = []
    if isinstance(thick, ThickStructure):
        verdict = verify_thick(thick)
        if not verdict.valid:
            raise PreconditionViolated(
                f"structure fails verification: {verdict.violations[0].message}"
            )
        alpha = thick.alpha
        notes.append(f"structure verified across {len(thick.levels)} levels")
    else:
        alpha = thick
        notes.append("family supplied directly; geometry not re-checked here")
    t = Fraction(t)
    scale = Fraction(factor_scale)
    if t <= 0 or scale <= 0:
        raise PreconditionViolated("exponent and factor scale must be positive")
    length = family_length(alpha)
    if length is None:
        if classify_ellp(alpha, t) is not Summability.CONVERGES:
            raise NotInEllT(f"gap powers at exponent {t} are not summable")

    n0 = _first_small_stage(alpha, t, scale, bits)
    exact_terms = t.denominator == 1

    if length is not None:
        last = length
        tail_sum = Fraction(0)
    else:
        count = 64
        while True:
            last = n0 + count - 1
            tail_sum = scale * tail_sum_upper(alpha, t, last, bits)
            if tail_sum <= tail_target or count >= max_terms:
                break
            count = min(2 * count, max_terms)
        if tail_sum >= 1:
            raise TailTooLarge(
                f"tail sum {tail_sum} still >= 1 after {count} factors"
            )

    lower_factors: list[Fraction] = []
    upper_factors: list[Fraction] = []
    for n in range(n0, last + 1):
        if exact_terms:
            x = scale * term(alpha, n) ** t.numerator
            lower_factors.append(1 - x)
            upper_factors.append(1 - x)
        else:
            def attempt(b: int):
                sp = _scaled_power(scale, term(alpha, n), t, b)
                return sp if sp.hi < 1 else None

            sp = refine(attempt, bits, max_bits=4096)
            lower_factors.append(1 - sp.hi)
            upper_factors.append(1 - sp.lo)

    partial_lo = _frac_prod(lower_factors)
    partial_hi = _frac_prod(upper_factors)
    tail_lower = 1 - tail_sum if tail_sum < 1 else Fraction(0)
    if length is not None and last >= length:
        tail_upper = Fraction(1)
    else:
        ahead = Fraction(0)
        for n in range(last + 1, last + 65):
            if length is not None and n > length:
                break
            if exact_terms:
                ahead += scale * term(alpha, n) ** t.numerator
            else:
                ahead += _scaled_power(scale, term(alpha, n), t, bits).lo
        tail_upper = min(Fraction(1), exp_neg_upper(ahead))
    bound = ProductBracket(
        partial=partial_lo,
        tail_lower=tail_lower,
        tail_upper=tail_upper,
        n_terms=last - n0 + 1,
        partial_upper=None if partial_hi == partial_lo else partial_hi,
    )
    conclusion = (
        Conclusion.POSITIVE if bound.lower_value > 0 else Conclusion.INCONCLUSIVE
    )
    return FatnessCertificate(
        alpha=alpha,
        t=t,
        factor_scale=scale,
        n0=n0,
        bound=bound,
        conclusion=conclusion,
        notes=tuple(notes),
    )


def _frac_prod(vals: list[Fraction]) -> Fraction:
    nums = [v.numerator for v in vals]
    dens = [v.denominator for v in vals]
    return Fraction(_balanced_prod(nums), _balanced_prod(dens))


def combine_fatness_constants(
    c: Fraction,
    t: Fraction,
    c1: Fraction,
    c2: Fraction,
    doubling_c: Fraction,
    m: int,
    bits: int = DEFAULT_BITS,
) -> Fraction:
    """Certified upper bound for the combined factor scale c^(-t)*c1*c2*C^m.

    All five inputs are finite-scale estimates, so the result is only as
    trustworthy as they are; certify_fat_thick treats it as one opaque
    rational.
    """
    c, t = Fraction(c), Fraction(t)
    if not 0 < c <= 1:
        raise PreconditionViolated("witness constant must lie in (0,1]")
    if t <= 0 or m < 0:
        raise PreconditionViolated("need t > 0 and m >= 0")
    inv = pow_bounds(c, -t, bits).hi
    return inv * Fraction(c1) * Fraction(c2) * Fraction(doubling_c) ** m


# --- thinness: porous constructions ------------------------------------------

@dataclass(frozen=True)
class ThinnessCertificate:
    alpha: SequenceFamily
    s: Fraction
    c: Fraction
    divergence_witness: Summability
    decay_curve: tuple[Fraction, ...]
    epsilon: Fraction
    n_star: int
    skipped_stages: tuple[int, ...] = ()


def certify_thin_porous(
    alpha: SequenceFamily,
    s: Fraction,
    c: Fraction,
    epsilon: Fraction,
    max_stages: int = 1_000_000,
    bits: int = DEFAULT_BITS,
) -> ThinnessCertificate:
    """Decay certificate: stage masses shrink by (1 - c * alpha_n^s) each
    stage, and divergence of sum(alpha_n^s) drives the product to zero.

    Stages whose factor is not certifiably inside (0,1) carry no usable decay
    (a relative hole cannot exceed the whole piece) and are skipped; the
    recorded curve keeps the original stage indexing either way.
    """
    s, c, epsilon = Fraction(s), Fraction(c), Fraction(epsilon)
    if s <= 0:
        raise PreconditionViolated("porosity exponent must be positive")
    if not 0 < c <= 1:
        raise PreconditionViolated("comparability constant must lie in (0,1]")
    if not 0 < epsilon <= 1:
        raise PreconditionViolated("target epsilon must lie in (0,1]")
    witness = classify_ellp(alpha, s)
    if witness is not Summability.DIVERGES:
        raise SeriesConverges(
            f"sum of alpha^({s}) converges; no decay certificate this way"
        )
    exact_terms = s.denominator == 1

    curve: list[Fraction] = []
    skipped: list[int] = []
    u = Fraction(1)
    for n in range(1, max_stages + 1):
        a_n = term(alpha, n)
        if exact_terms:
            drop = c * a_n**s.numerator
        else:
            drop = c * pow_bounds(a_n, s, bits).lo
        factor_up = 1 - drop
        if factor_up <= 0:
            skipped.append(n)
        else:
            u *= factor_up
        curve.append(u)
        if u < epsilon:
            return ThinnessCertificate(
                alpha=alpha,
                s=s,
                c=c,
                divergence_witness=witness,
                decay_curve=tuple(curve),
                epsilon=epsilon,
                n_star=n,
                skipped_stages=tuple(skipped),
            )
    raise Undecidable(f"decay curve stayed >= {epsilon} for {max_stages} stages")


# --- constant solvers for cut-out sets ----------------------------------------

GRID_STEP = Fraction(1, 64)


def solve_inflation_exponent(
    big_lam: Fraction,
    t: Fraction,
    d: Fraction,
    epsilon: Fraction,
    bits: int = DEFAULT_BITS,
    max_bits: int = 4096,
) -> Fraction:
    """Least grid multiple Q of 1/64 with big_lam*(d+2)^t * 2^(1-t*Q) < eps/6.

    The left side is strictly decreasing in Q, so an analytic enclosure of the
    crossing point pins down a short certified scan.
    """
    big_lam, t, d, epsilon = map(Fraction, (big_lam, t, d, epsilon))
    if min(big_lam, t, d, epsilon) <= 0:
        raise PreconditionViolated("all inputs must be positive")
    rhs = epsilon / 6
    base = d + 2

    # crossing point: Q* = (1 + log2(big_lam/rhs) + t*log2(base)) / t
    l1 = log2_bounds(big_lam / rhs, bits)
    l2 = log2_bounds(base, bits)
    q_lo = (1 + l1.lo + t * l2.lo) / t
    q_hi = (1 + l1.hi + t * l2.hi) / t

    def certified(q: Fraction) -> bool:
        def attempt(b: int):
            lhs_pow = pow_bounds(base, t, b)
            lhs_exp = exp2_bounds(1 - t * q, b)
            hi = big_lam * lhs_pow.hi * lhs_exp.hi
            lo = big_lam * lhs_pow.lo * lhs_exp.lo
            if hi < rhs:
                return True
            if lo >= rhs:
                return False
            return None

        return refine(attempt, bits, max_bits)

    q = Fraction((q_lo / GRID_STEP).__floor__()) * GRID_STEP
    steps = int((q_hi - q_lo) / GRID_STEP) + 3
    for _ in range(steps):
        if certified(q):
            return q
        q += GRID_STEP
    raise EnclosureInconclusive("no grid point certified within the scan window")


def power_tail_upper(
    delta: Fraction, n_from: int, bits: int = DEFAULT_BITS, head: int = 64
) -> Fraction:
    """Certified upper bound on sum_{m >= n_from} m^(-delta), delta > 1.

    First `head` terms are bounded individually, the rest by the integral
    comparison from n_from+head-1.
    """
    delta = Fraction(delta)
    if delta <= 1:
        raise DivergentSeries("polynomial tail needs delta > 1")
    if n_from < 1:
        raise PreconditionViolated("tail start must be >= 1")
    cut = n_from + head
    total = Fraction(0)
    for m in range(n_from, cut):
        total += pow_bounds(Fraction(m), -delta, bits).hi
    integral = pow_bounds(Fraction(cut - 1), 1 - delta, bits).hi / (delta - 1)
    return total + integral


def power_tail_lower(
    delta: Fraction, n_from: int, bits: int = DEFAULT_BITS, head: int = 64
) -> Fraction:
    delta = Fraction(delta)
    if n_from < 1:
        raise PreconditionViolated("tail start must be >= 1")
    total = Fraction(0)
    for m in range(n_from, n_from + head):
        total += pow_bounds(Fraction(m), -delta, bits).lo
    return total


def _tail_dominated(
    n: int, delta: Fraction, gamma: Fraction, epsilon: Fraction, bits: int
) -> bool:
    """Certified decision of sum_{m>=n} m^(-delta) < epsilon * n^(-gamma)."""

    def attempt(b: int):
        head = min(4096, 64 * max(1, b // DEFAULT_BITS))
        up = power_tail_upper(delta, n, b, head)
        rhs = pow_bounds(Fraction(n), -gamma, b)
        if up < epsilon * rhs.lo:
            return True
        lo = power_tail_lower(delta, n, b, head)
        if lo >= epsilon * rhs.hi:
            return False
        return None

    return refine(attempt, bits, max_bits=4096)


def tail_domination_start(
    epsilon: Fraction,
    delta: Fraction,
    gamma: Fraction,
    bits: int = DEFAULT_BITS,
    scan_cap: int = 10000,
) -> int:
    """Least M with sum_{m>=N} m^(-delta) < epsilon * N^(-gamma) for all
    N >= M, certified.

    Beyond a computed stage the closed-form envelope
    N^gamma * (N-1)^(1-delta) / (delta-1), strictly decreasing when
    delta > gamma + 1, settles every remaining N; up to that stage each N is
    checked directly.
    """
    epsilon, delta, gamma = map(Fraction, (epsilon, delta, gamma))
    if epsilon <= 0:
        raise PreconditionViolated("epsilon must be positive")
    if gamma <= 0 or delta <= gamma + 1:
        raise PreconditionViolated("need delta > gamma + 1 > 1")

    def envelope_ok(n: int) -> bool:
        def attempt(b: int):
            h_hi = (
                pow_bounds(Fraction(n), gamma, b).hi
                * pow_bounds(Fraction(n - 1), 1 - delta, b).hi
                / (delta - 1)
            )
            if h_hi < epsilon:
                return True
            h_lo = (
                pow_bounds(Fraction(n), gamma, b).lo
                * pow_bounds(Fraction(n - 1), 1 - delta, b).lo
                / (delta - 1)
            )
            if h_lo >= epsilon:
                return False
            return None

        return refine(attempt, bits, max_bits=4096)

    n1 = None
    for n in range(2, scan_cap):
        if envelope_ok(n):
            n1 = n
            break
    if n1 is None:
        raise Undecidable(f"envelope never dropped below {epsilon} by {scan_cap}")

    cache: dict[int, bool] = {}

    def direct(n: int) -> bool:
        if n not in cache:
            cache[n] = _tail_dominated(n, delta, gamma, epsilon, bits)
        return cache[n]

    for m in range(1, scan_cap):
        if not direct(m):
            continue
        horizon = max(4 * m, n1)
        if all(direct(k) for k in range(m + 1, horizon + 1)):
            return m
    raise Undecidable(f"no certified start found below {scan_cap}")


# --- the final lower bound for cut-out sets -----------------------------------

@dataclass(frozen=True)
class CutoutBound:
    value: Fraction          # certified lower bound on the surviving mass
    conclusion: Conclusion
    main_term: Fraction      # lam * n_balls^(-r*s), rounded down
    penalty: Fraction        # upper bound on the subtracted tail expression
    lam: Fraction
    s: Fraction
    big_lam: Fraction
    t: Fraction
    p: Fraction
    r: Fraction
    n_balls: int
    diam_power_sum_upper: Fraction  # upper bound on sum of ball diameters^p
    tail_upper: Fraction            # upper bound on sum_{m>=N} m^(-t/p)
    gap: RationalInterval
    gap_diameter: Fraction


def cutout_lower_bound(
    config: CutOutConfig,
    report: DoublingReport,
    r: Fraction,
    n_balls: int,
    p: Fraction,
    bits: int = DEFAULT_BITS,
) -> CutoutBound:
    """Certified lower bound on the mass left after removing the first
    n_balls balls, using a validated mass-window fit (lam, s, big_lam, t).

    The bound is main_term - penalty with
        main_term = lam * n_balls^(-r*s)          (rounded down)
        penalty   = (sum diam^p)^(t/p) * big_lam * sum_{m>=n_balls} m^(-t/p)
                                                   (rounded up)
    A positive value certifies survival at the fit's scale window; a negative
    value decides nothing.
    """
    r, p = Fraction(r), Fraction(p)
    fit = report.mass_window
    if fit is None:
        raise PreconditionViolated("doubling report carries no mass-window fit")
    lam, s, big_lam, t = fit.lam, fit.s, fit.big_lam, fit.t
    if p <= 0 or r <= 0:
        raise PreconditionViolated("need p > 0 and r > 0")
    if n_balls < 1:
        raise PreconditionViolated("need at least one removed ball")
    if p * (r * s + 1) >= t:
        raise ExponentWindowEmpty(
            f"p = {p} does not satisfy p * (r*s + 1) < t = {t}"
        )
    if config.diam_family is None:
        raise PreconditionViolated("config must declare a diameter family")
    if classify_ellp(config.diam_family, p) is not Summability.CONVERGES:
        raise NotInEllT(f"diameter powers at exponent {p} are not summable")

    gap, gap_diam = largest_gap(config, n_balls)

    def gap_big_enough() -> bool:
        def attempt(b: int):
            nb = pow_bounds(Fraction(n_balls), -r, b)
            if gap_diam >= nb.hi:
                return True
            if gap_diam < nb.lo:
                return False
            return None

        return refine(attempt, bits, max_bits=4096)

    if not gap_big_enough():
        raise GapTooSmall(
            f"largest surviving gap {gap_diam} < {n_balls}^(-{r})"
        )

    main_term = lam * pow_bounds(Fraction(n_balls), -(r * s), bits).lo

    # sum of ball diameters^p: listed balls exactly, declared family beyond
    cp_up = Fraction(0)
    for ball in config.balls:
        cp_up += pow_bounds(ball.diameter, p, bits).hi
    cp_up += tail_sum_upper(config.diam_family, p, len(config.balls), bits)

    delta = t / p
    cp_pow_up = pow_bounds(cp_up, delta, bits).hi
    tail_up = power_tail_upper(delta, n_balls, bits)
    penalty = cp_pow_up * big_lam * tail_up
    value = main_term - penalty
    return CutoutBound(
        value=value,
        conclusion=Conclusion.POSITIVE if value > 0 else Conclusion.INCONCLUSIVE,
        main_term=main_term,
        penalty=penalty,
        lam=lam,
        s=s,
        big_lam=big_lam,
        t=t,
        p=p,
        r=r,
        n_balls=n_balls,
        diam_power_sum_upper=cp_up,
        tail_upper=tail_up,
        gap=gap,
        gap_diameter=gap_diam,
    )


@dataclass(frozen=True)
class InflationCheck:
    zeta_upper: Fraction      # inflation radius used (upper bound on 2N^-Q)
    remaining_lower: Fraction  # certified lower mass outside the inflated balls
    slack_required: Fraction   # the epsilon/2 the remainder must exceed
    passed: bool


def inflated_remainder_check(
    m: TreeMeasure,
    config: CutOutConfig,
    n_balls: int,
    q: Fraction,
    epsilon: Fraction,
    depth: int,
    bits: int = DEFAULT_BITS,
) -> InflationCheck:
    """Check that the first n_balls balls, inflated by 2*n_balls^(-q) on each
    side, still leave more than epsilon/2 of the mass untouched.

    Inflating by an upper bound of the true radius only shrinks the
    remainder, so a pass here certifies the pass at the exact radius.
    """
    q, epsilon = Fraction(q), Fraction(epsilon)
    if epsilon <= 0:
        raise PreconditionViolated("epsilon must be positive")
    zeta_up = 2 * pow_bounds(Fraction(n_balls), -q, bits).hi
    grown = inflate(config, n_balls, zeta_up)
    merged = merge_components(grown)
    grown_config = CutOutConfig(
        balls=tuple(merged), diam_family=None, ambient=config.ambient
    )
    remaining = cutout_mass(m, grown_config, len(merged), depth)
    required = epsilon / 2
    return InflationCheck(
        zeta_upper=zeta_up,
        remaining_lower=remaining.lower,
        slack_required=required,
        passed=remaining.lower > required,
    )


# --- the exactly solvable removal schedule ------------------------------------

@dataclass(frozen=True)
class ScheduleMassReport:
    p: Fraction
    stages: int
    exponents: tuple[int, ...]          # removal depth at each stage
    closed_form: ProductBracket
    brute_force: Fraction | None        # exact tree mass, None when skipped
    match_exact: bool | None
    verdict: LimitVerdict
    stage_partials: tuple[Fraction, ...]


def logfloor_schedule_mass(
    p: Fraction,
    stages: int,
    with_brute: bool | None = None,
    brute_limit: int = 512,
    bits: int = DEFAULT_BITS,
) -> ScheduleMassReport:
    """Mass of the set left by the floor(log2(j+1))-driven removal schedule.

    Stage j removes, from every surviving piece, its leftmost descendant
    m_j = floor(log2(j+1)) levels down; under the left-weight-p tree measure
    each stage scales the mass by exactly (1 - p^(m_j)).  The closed-form
    partial product and an independent brute-force enumeration (aggregated by
    left-edge counts, never forming the per-stage factors) must agree exactly.
    """
    p = Fraction(p)
    if not 0 < p < 1:
        raise PreconditionViolated("weight p must lie in (0,1)")
    if stages < 1:
        raise PreconditionViolated("need at least one stage")
    exponents = tuple(logfloor_exponent(j) for j in range(1, stages + 1))

    partials: list[Fraction] = []
    num, den = 1, 1
    for m_j in exponents:
        num *= p.denominator**m_j - p.numerator**m_j
        den *= p.denominator**m_j
        partials.append(Fraction(num, den))

    closed_form = product_bracket(LogFloor(p), stages, bits)

    brute = None
    match: bool | None = None
    if with_brute or (with_brute is None and stages <= brute_limit):
        brute = _schedule_brute_force(p, exponents)
        match = brute == closed_form.partial

    verdict = (
        LimitVerdict.POSITIVE_LIMIT
        if classify_ellp(LogFloor(p), Fraction(1)) is Summability.CONVERGES
        else LimitVerdict.ZERO_LIMIT
    )
    return ScheduleMassReport(
        p=p,
        stages=stages,
        exponents=exponents,
        closed_form=closed_form,
        brute_force=brute,
        match_exact=match,
        verdict=verdict,
        stage_partials=tuple(partials),
    )


def _schedule_brute_force(p: Fraction, exponents: tuple[int, ...]) -> Fraction:
    """Exact surviving mass by enumerating the tree, aggregated by the number
    of left edges on each surviving path (the measure only sees that count)."""
    counts = [1]  # counts[a] = surviving paths with a left edges
    for m in exponents:
        rows = [comb(m, z) for z in range(m)]  # all-left child is the removal
        new = [0] * (len(counts) + m)
        for a, cnt in enumerate(counts):
            if cnt == 0:
                continue
            for z, ways in enumerate(rows):
                new[a + z] += cnt * ways
        counts = new
    depth = sum(exponents)
    pn, pd = p.numerator, p.denominator
    qn = pd - pn
    total = 0
    for a, cnt in enumerate(counts):
        if cnt:
            total += cnt * pn**a * qn ** (depth - a)
    return Fraction(total, pd**depth)


def logfloor_vanishing_stage(
    p: Fraction, threshold: Fraction, max_stages: int = 200_000
) -> tuple[int, Fraction]:
    """First stage whose exact partial product drops below the threshold."""
    p, threshold = Fraction(p), Fraction(threshold)
    if not 0 < p < 1:
        raise PreconditionViolated("weight p must lie in (0,1)")
    if not 0 < threshold < 1:
        raise PreconditionViolated("threshold must lie in (0,1)")
    num, den = 1, 1
    for j in range(1, max_stages + 1):
        m_j = logfloor_exponent(j)
        num *= p.denominator**m_j - p.numerator**m_j
        den *= p.denominator**m_j
        if num < threshold * den:
            return j, Fraction(num, den)
    raise Undecidable(
        f"partial product stayed >= {threshold} through {max_stages} stages"
    )


# --- interval packings ---------------------------------------------------------

def interval_packing_verdict(
    intervals: list[RationalInterval],
    lengths: SequenceFamily,
    total: Fraction | None = None,
) -> PackingVerdict:
    """Overlap criterion for a union of intervals whose declared lengths sum
    to the ambient length `total` (ambient rescaled to [0,1]).

    Thin exactly when the interiors are pairwise disjoint: the packing then
    spends its entire length budget with nothing doubled up.  Any interior
    overlap (or an empty prefix) wastes budget and the union stays fat.
    """
    if total is None:
        total = series_total(lengths)
    total = Fraction(total)
    if total <= 0:
        raise PreconditionViolated("ambient length must be positive")
    if not intervals:
        return PackingVerdict.FAT

    declared = Fraction(0)
    for i, iv in enumerate(intervals, start=1):
        expected = term(lengths, i)
        if iv.diameter * total != expected:
            raise LengthMismatch(
                f"interval {i} has rescaled length {iv.diameter}, "
                f"declared {expected}/{total}"
            )
        declared += expected
    if declared > total:
        raise LengthMismatch(
            f"prefix lengths sum to {declared} > ambient length {total}"
        )

    ordered = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
    for prev, nxt in zip(ordered, ordered[1:]):
        # open interiors overlap iff they share more than an endpoint
        if nxt.lo < prev.hi and prev.lo < prev.hi and nxt.lo < nxt.hi:
            return PackingVerdict.FAT
    return PackingVerdict.THIN
