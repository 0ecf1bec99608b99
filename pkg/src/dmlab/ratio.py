"""Parsing and deterministic rendering of exact rationals.

Rationals travel through configs and reports as "num/den" strings (plain
integers allowed).  Decimal renderings are produced by integer long division
only, so report bytes do not depend on platform float behavior.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import PreconditionViolated


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse "num/den", "num", or pass through ints and Fractions."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise PreconditionViolated(f"cannot parse rational from {type(text).__name__}")
    s = text.strip()
    try:
        if "/" in s:
            num, den = s.split("/", 1)
            return Fraction(int(num.strip()), int(den.strip()))
        return Fraction(int(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise PreconditionViolated(f"malformed rational {text!r}") from exc


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _digits10(n: int) -> int:
    # number of decimal digits of n >= 1
    return len(str(n))


def decimal_str(x: Fraction, sig: int = 12) -> str:
    """Render x with `sig` significant digits, round-half-even, no floats.

    Uses positional notation for moderate magnitudes and e-notation outside
    [1e-4, 1e+16).  Deterministic across platforms.
    """
    x = Fraction(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    n, d = abs(x).numerator, abs(x).denominator
    # e = floor(log10(n/d)), first estimate from digit counts then correct
    e = _digits10(n) - _digits10(d)
    if 10 ** max(e, 0) * d > n * 10 ** max(-e, 0):
        e -= 1
    # now 10^e <= n/d < 10^(e+1)
    shift = sig - 1 - e
    num = n * 10 ** max(shift, 0)
    den = d * 10 ** max(-shift, 0)
    q, r = divmod(num, den)
    # round half to even
    if 2 * r > den or (2 * r == den and q % 2 == 1):
        q += 1
    if q == 10 ** sig:  # rounding bumped into the next decade
        q //= 10
        e += 1
    digits = str(q)
    if -4 <= e < 16:
        if e >= sig - 1:
            out = digits + "0" * (e - sig + 1)
        elif e >= 0:
            out = digits[: e + 1] + "." + digits[e + 1 :]
        else:
            out = "0." + "0" * (-e - 1) + digits
        out = out.rstrip("0").rstrip(".") if "." in out else out
        return sign + out
    mantissa = digits[0] + ("." + digits[1:] if len(digits) > 1 else "")
    mantissa = mantissa.rstrip("0").rstrip(".") if "." in mantissa else mantissa
    return f"{sign}{mantissa}e{e:+d}"
