"""Report payloads: tagged rational values, stable JSON, plot-data CSV.

Every number that enters a report is wrapped with an exactness tag so a
reader can tell a true value from an enclosure from a finite-scale
observation:

  "exact"            single rational, no approximation anywhere
  "bracket"          certified enclosure [lo, hi] of the true value
  "window-validated" constant checked only over a finite range of scales

Serialization is byte-stable: rationals render as canonical fraction
strings, decimals via exact integer rounding, JSON with sorted keys.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Union

from .certify import ProductBracket
from .doubling import DoublingReport
from .enclosure import Bounds
from .measure import MassBracket
from .ratio import decimal_str

Rat = Union[Fraction, int, str]


def rat_str(x: Rat) -> str:
    return str(Fraction(x))


def tag_exact(x: Rat) -> dict:
    x = Fraction(x)
    return {"kind": "exact", "value": rat_str(x), "decimal": decimal_str(x)}


def round_outward(lo: Fraction, hi: Fraction, places: int) -> tuple[Fraction, Fraction]:
    """Widen [lo, hi] to decimal-grid endpoints; the result still encloses."""
    scale = 10**places
    lo2 = Fraction(lo.numerator * scale // lo.denominator, scale)
    hi2 = Fraction(-(-hi.numerator * scale // hi.denominator), scale)
    return lo2, hi2


def tag_bracket(lo: Rat, hi: Rat, places: int | None = None) -> dict:
    lo, hi = Fraction(lo), Fraction(hi)
    if places is not None:
        lo, hi = round_outward(lo, hi, places)
    if lo == hi:
        return tag_exact(lo)
    return {
        "kind": "bracket",
        "lo": rat_str(lo),
        "hi": rat_str(hi),
        "lo_decimal": decimal_str(lo),
        "hi_decimal": decimal_str(hi),
    }


def tag_window(x: Rat, window: tuple[Rat, Rat]) -> dict:
    """A constant that was only checked for scales inside `window`."""
    return {
        "kind": "window-validated",
        "value": rat_str(Fraction(x)),
        "decimal": decimal_str(Fraction(x)),
        "window": [rat_str(window[0]), rat_str(window[1])],
    }


def tag_mass(b: MassBracket) -> dict:
    return tag_bracket(b.lower, b.upper)


def tag_bounds(b: Bounds) -> dict:
    return tag_bracket(b.lo, b.hi)


SERIALIZE_PLACES = 60  # partial products carry huge exact rationals; reports
                       # store a certified outward rounding instead


def tag_product(pb: ProductBracket) -> dict:
    out = tag_bracket(pb.lower_value, pb.upper_value, places=SERIALIZE_PLACES)
    out["n_terms"] = pb.n_terms
    return out


def doubling_report_payload(rep: DoublingReport) -> dict:
    """Serialize a scan report; scan constants hold on the scanned window."""
    window = (rep.window_lo, rep.window_hi)
    out: dict[str, Any] = {
        "c_lower": tag_window(rep.c_lower, window),
        "c_upper": tag_window(rep.c_upper, window),
        "s_lower": tag_window(rep.s_lower, window),
        "s_upper": tag_window(rep.s_upper, window),
        "depth": rep.depth,
        "exact": rep.exact,
        "witness": {
            "x": rat_str(rep.witness.x),
            "r": rat_str(rep.witness.r),
            "ratio_lower": rat_str(rep.witness.ratio_lower),
        },
        "notes": list(rep.notes),
    }
    if rep.ratio_decay is not None:
        out["ratio_decay"] = {
            "big_lam": tag_window(rep.ratio_decay.big_lam, window),
            "t": tag_window(rep.ratio_decay.t, window),
            "pairs_checked": rep.ratio_decay.pairs_checked,
            "holdout_size": rep.ratio_decay.holdout_size,
            "rounds": rep.ratio_decay.rounds,
        }
    if rep.mass_window is not None:
        out["mass_window"] = {
            "lam": tag_window(rep.mass_window.lam, window),
            "s": tag_window(rep.mass_window.s, window),
            "big_lam": tag_window(rep.mass_window.big_lam, window),
            "t": tag_window(rep.mass_window.t, window),
            "samples": rep.mass_window.samples,
        }
    return out


def _plot_value(y: Rat) -> Fraction:
    # keep small rationals exact; park astronomical ones on the decimal grid
    y = Fraction(y)
    if y.denominator.bit_length() > 200:
        scale = 10**SERIALIZE_PLACES
        y = Fraction(y.numerator * scale // y.denominator, scale)
    return y


def plot_series(name: str, points: list[tuple[Rat, Rat]]) -> dict:
    """One named series of (x, y) rational pairs for the plot-data CSV."""
    return {
        "series": name,
        "points": [
            {"x": rat_str(x), "y": rat_str(_plot_value(y))} for x, y in points
        ],
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


PLOT_HEADER = "series,x,y_num,y_den,y_decimal"


def emit_plotdata(report: dict) -> str:
    """Long-format CSV of every series in the report's plot block."""
    lines = [PLOT_HEADER]
    for series in report.get("plot", []):
        name = series["series"]
        for pt in series["points"]:
            y = Fraction(pt["y"])
            lines.append(
                f"{name},{pt['x']},{y.numerator},{y.denominator},{decimal_str(y)}"
            )
    return "\n".join(lines) + "\n"
