"""Symbolic families of sequences in (0, 1) with exact-summability tooling.

A family describes all of its terms at once, so membership of (a_n) in the
class "sum of a_n^p converges" is decided by exact rational comparisons, and
tails carry certified rational upper bounds instead of sampled estimates.

Families
    Geometric(a, q)          a_n = a * q^(n-1)
    Power(a, gamma, offset)  a_n = a / (n + offset)^gamma, integer gamma >= 1
                             (first term may equal 1, later terms are < 1)
    LogFloor(base)           a_n = base^floor(log2(n+1))
    Constant(value)          a_n = value
    ExplicitFinite(terms)    a finite prefix given outright
    Scaled(c, inner)         a_n = c * inner_n

Indices start at n = 1.  All parameters are exact rationals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .enclosure import DEFAULT_BITS, pow_bounds, refine
from .errors import (
    DivergentSeries,
    IndexOutOfRange,
    InvalidFamily,
    PreconditionViolated,
    Undecidable,
)
from .ratio import format_rational, parse_rational


def _frac(x) -> Fraction:
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InvalidFamily(f"not a rational: {x!r}") from exc


@dataclass(frozen=True)
class Geometric:
    a: Fraction
    q: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _frac(self.a))
        object.__setattr__(self, "q", _frac(self.q))
        if not 0 < self.q < 1:
            raise InvalidFamily("geometric ratio must satisfy 0 < q < 1")
        if not 0 < self.a < 1:
            raise InvalidFamily("geometric scale must satisfy 0 < a < 1")


@dataclass(frozen=True)
class Power:
    a: Fraction
    gamma: int
    offset: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", _frac(self.a))
        if not isinstance(self.gamma, int) or self.gamma < 1:
            raise InvalidFamily("power exponent must be an integer >= 1")
        if not isinstance(self.offset, int) or self.offset < 0:
            raise InvalidFamily("power offset must be an integer >= 0")
        # first term may equal 1 (consumers clip or skip degenerate factors)
        if self.a <= 0 or self.a / Fraction(1 + self.offset) ** self.gamma > 1:
            raise InvalidFamily("power family needs 0 < a/(1+offset)^gamma <= 1")


@dataclass(frozen=True)
class LogFloor:
    base: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "base", _frac(self.base))
        if not 0 < self.base < 1:
            raise InvalidFamily("logfloor base must satisfy 0 < base < 1")


@dataclass(frozen=True)
class Constant:
    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", _frac(self.value))
        if not 0 < self.value < 1:
            raise InvalidFamily("constant value must satisfy 0 < value < 1")


@dataclass(frozen=True)
class ExplicitFinite:
    terms: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        terms = tuple(_frac(t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise InvalidFamily("explicit family needs at least one term")
        if any(not 0 < t < 1 for t in terms):
            raise InvalidFamily("explicit terms must lie in (0, 1)")


@dataclass(frozen=True)
class Scaled:
    c: Fraction
    inner: "SequenceFamily"

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _frac(self.c))
        if self.c <= 0:
            raise InvalidFamily("scale must be positive")
        if self.c * sup_term(self.inner) >= 1:
            raise InvalidFamily("scaled terms must stay below 1")


SequenceFamily = Union[Geometric, Power, LogFloor, Constant, ExplicitFinite, Scaled]


class Summability(enum.Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"


class Ell0Kind(enum.Enum):
    IN_ELL0 = "in_ell0"
    NOT_IN_ELL0 = "not_in_ell0"
    UNDECIDABLE = "undecidable"


@dataclass(frozen=True)
class Ell0Class:
    kind: Ell0Kind
    witness: Fraction | None = None  # an exponent p where the p-th power sum diverges


def logfloor_exponent(n: int) -> int:
    """floor(log2(n+1)) for n >= 1."""
    if n < 1:
        raise IndexOutOfRange("term indices start at 1")
    return (n + 1).bit_length() - 1


def term(f: SequenceFamily, n: int) -> Fraction:
    """Exact n-th term, n >= 1."""
    if n < 1:
        raise IndexOutOfRange("term indices start at 1")
    if isinstance(f, Geometric):
        return f.a * f.q ** (n - 1)
    if isinstance(f, Power):
        return f.a / Fraction(n + f.offset) ** f.gamma
    if isinstance(f, LogFloor):
        return f.base ** logfloor_exponent(n)
    if isinstance(f, Constant):
        return f.value
    if isinstance(f, ExplicitFinite):
        if n > len(f.terms):
            raise IndexOutOfRange(f"finite family has {len(f.terms)} terms")
        return f.terms[n - 1]
    if isinstance(f, Scaled):
        return f.c * term(f.inner, n)
    raise InvalidFamily(f"unknown family {f!r}")


def terms_prefix(f: SequenceFamily, count: int) -> list[Fraction]:
    return [term(f, n) for n in range(1, count + 1)]


def sup_term(f: SequenceFamily) -> Fraction:
    """Exact supremum of the terms (every family here is non-increasing)."""
    if isinstance(f, ExplicitFinite):
        return max(f.terms)
    if isinstance(f, Scaled):
        return f.c * sup_term(f.inner)
    return term(f, 1)


def family_length(f: SequenceFamily) -> int | None:
    """Number of terms for finite families, None for infinite ones."""
    if isinstance(f, ExplicitFinite):
        return len(f.terms)
    if isinstance(f, Scaled):
        return family_length(f.inner)
    return None


def classify_ellp(f: SequenceFamily, p: Fraction) -> Summability:
    """Decide whether the sum of a_n^p converges, by exact comparison."""
    p = Fraction(p)
    if p <= 0:
        raise PreconditionViolated("summability exponent must be positive")
    if isinstance(f, Geometric):
        return Summability.CONVERGES
    if isinstance(f, Power):
        return Summability.CONVERGES if f.gamma * p > 1 else Summability.DIVERGES
    if isinstance(f, LogFloor):
        # block k holds 2^k equal terms base^k, so the sum is geometric with
        # ratio 2 * base^p; convergence is 2 * base^p < 1, i.e.
        # base^u * 2^v < 1 for p = u/v, an exact integer comparison.
        u, v = p.numerator, p.denominator
        lhs = f.base.numerator**u * (1 << v)
        rhs = f.base.denominator**u
        return Summability.CONVERGES if lhs < rhs else Summability.DIVERGES
    if isinstance(f, Constant):
        return Summability.DIVERGES
    if isinstance(f, ExplicitFinite):
        raise Undecidable("a finite prefix cannot decide summability")
    if isinstance(f, Scaled):
        return classify_ellp(f.inner, p)
    raise InvalidFamily(f"unknown family {f!r}")


def classify_ell0(f: SequenceFamily) -> Ell0Class:
    """Decide membership in the intersection of all p-summability classes."""
    if isinstance(f, Geometric):
        return Ell0Class(Ell0Kind.IN_ELL0)
    if isinstance(f, Power):
        return Ell0Class(Ell0Kind.NOT_IN_ELL0, witness=Fraction(1, f.gamma))
    if isinstance(f, LogFloor):
        # witness p = 2^-k with base >= 2^(-2^k), so 2 * base^p >= 1
        k = 0
        while f.base < Fraction(1, 1 << (1 << k)):
            k += 1
        return Ell0Class(Ell0Kind.NOT_IN_ELL0, witness=Fraction(1, 1 << k))
    if isinstance(f, Constant):
        return Ell0Class(Ell0Kind.NOT_IN_ELL0, witness=Fraction(1))
    if isinstance(f, ExplicitFinite):
        return Ell0Class(Ell0Kind.UNDECIDABLE)
    if isinstance(f, Scaled):
        return classify_ell0(f.inner)
    raise InvalidFamily(f"unknown family {f!r}")


def series_total(f: SequenceFamily) -> Fraction:
    """Exact value of the full sum of the terms, where a closed form exists.

    Geometric: a/(1-q).  LogFloor: blocks of 2^k copies of base^k give
    2b/(1-2b) when 2b < 1.  ExplicitFinite: plain sum.  Raises
    DivergentSeries when the sum is infinite and Undecidable when no closed
    form is available (Power sums have no rational closed form).
    """
    if isinstance(f, Geometric):
        return f.a / (1 - f.q)
    if isinstance(f, LogFloor):
        if 2 * f.base >= 1:
            raise DivergentSeries("logfloor blocks do not shrink")
        return 2 * f.base / (1 - 2 * f.base)
    if isinstance(f, Constant):
        raise DivergentSeries("constant terms never sum")
    if isinstance(f, ExplicitFinite):
        return sum(f.terms, Fraction(0))
    if isinstance(f, Scaled):
        return f.c * series_total(f.inner)
    if isinstance(f, Power):
        raise Undecidable("no exact closed form for power-law sums")
    raise InvalidFamily(f"unknown family {f!r}")


def _pow_upper(x: Fraction, e: Fraction, bits: int) -> Fraction:
    return pow_bounds(x, e, bits).hi


def tail_sum_upper(
    f: SequenceFamily, p: Fraction, n_from: int, bits: int = DEFAULT_BITS
) -> Fraction:
    """Exact rational B with sum_{n > n_from} a_n^p <= B.

    Closed geometric forms for Geometric and LogFloor, an integral comparison
    for Power.  Raises DivergentSeries when no finite bound exists.
    """
    p = Fraction(p)
    if p <= 0:
        raise PreconditionViolated("summability exponent must be positive")
    if n_from < 0:
        raise PreconditionViolated("tail start must be >= 0")
    if isinstance(f, ExplicitFinite):
        if n_from >= len(f.terms):
            return Fraction(0)
        raise Undecidable("a finite prefix has no certified infinite tail")
    if classify_ellp(f, p) is Summability.DIVERGES:
        raise DivergentSeries("series diverges at this exponent")

    if isinstance(f, Geometric):
        # sum_{n > N} (a q^(n-1))^p = a^p q^(pN) / (1 - q^p)
        def attempt(bits_now: int):
            a_up = _pow_upper(f.a, p, bits_now)
            qp = pow_bounds(f.q, p, bits_now)
            if qp.hi >= 1:
                return None
            qN_up = _pow_upper(f.q, p * n_from, bits_now)
            return a_up * qN_up / (1 - qp.hi)

        return refine(attempt, bits)

    if isinstance(f, Power):
        # sum_{n > N} (n+offset)^(-gamma p) <= integral_{N+offset}^inf x^(-gamma p) dx
        start = n_from + f.offset
        if start < 1:
            # integral comparison needs a positive lower limit; peel one term
            first_up = _pow_upper(term(f, n_from + 1), p, bits)
            return first_up + tail_sum_upper(f, p, n_from + 1, bits)
        gp = f.gamma * p
        a_up = _pow_upper(f.a, p, bits)
        decay_up = _pow_upper(Fraction(start), -(gp - 1), bits)
        return a_up * decay_up / (gp - 1)

    if isinstance(f, LogFloor):
        # terms in block k (2^k of them) all equal base^k; bound the partial
        # block at n_from exactly and the full later blocks geometrically
        def attempt(bits_now: int):
            bp = pow_bounds(f.base, p, bits_now)
            ratio_hi = 2 * bp.hi
            if ratio_hi >= 1:
                return None
            if n_from == 0:
                k_next = 1
                rest_in_block = 0
            else:
                k_next = logfloor_exponent(n_from)
                rest_in_block = ((1 << (k_next + 1)) - 2) - n_from
                if rest_in_block == 0:
                    k_next += 1
            block_term_up = _pow_upper(f.base, Fraction(p * k_next), bits_now)
            bound = rest_in_block * block_term_up
            # all blocks from k_next+1 (or k_next when nothing remains in it)
            k_full = k_next + 1 if rest_in_block else k_next
            head_up = (1 << k_full) * _pow_upper(
                f.base, Fraction(p * k_full), bits_now
            )
            bound += head_up / (1 - ratio_hi)
            return bound

        return refine(attempt, bits)

    if isinstance(f, Scaled):
        c_up = _pow_upper(f.c, p, bits)
        return c_up * tail_sum_upper(f.inner, p, n_from, bits)

    raise InvalidFamily(f"unknown family {f!r}")


# --- JSON specs ------------------------------------------------------------

def family_to_spec(f: SequenceFamily) -> dict:
    if isinstance(f, Geometric):
        return {"kind": "geometric", "a": format_rational(f.a), "q": format_rational(f.q)}
    if isinstance(f, Power):
        return {
            "kind": "power",
            "a": format_rational(f.a),
            "gamma": f.gamma,
            "offset": f.offset,
        }
    if isinstance(f, LogFloor):
        return {"kind": "logfloor", "base": format_rational(f.base)}
    if isinstance(f, Constant):
        return {"kind": "constant", "value": format_rational(f.value)}
    if isinstance(f, ExplicitFinite):
        return {"kind": "explicit", "terms": [format_rational(t) for t in f.terms]}
    if isinstance(f, Scaled):
        return {"kind": "scaled", "c": format_rational(f.c), "inner": family_to_spec(f.inner)}
    raise InvalidFamily(f"unknown family {f!r}")


def family_from_spec(spec: dict) -> SequenceFamily:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidFamily("family spec must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "geometric":
            return Geometric(parse_rational(spec["a"]), parse_rational(spec["q"]))
        if kind == "power":
            return Power(
                parse_rational(spec["a"]), int(spec["gamma"]), int(spec.get("offset", 0))
            )
        if kind == "logfloor":
            return LogFloor(parse_rational(spec["base"]))
        if kind == "constant":
            return Constant(parse_rational(spec["value"]))
        if kind == "explicit":
            return ExplicitFinite(tuple(parse_rational(t) for t in spec["terms"]))
        if kind == "scaled":
            return Scaled(parse_rational(spec["c"]), family_from_spec(spec["inner"]))
    except KeyError as exc:
        raise InvalidFamily(f"family spec missing field {exc}") from exc
    raise InvalidFamily(f"unknown family kind {kind!r}")
