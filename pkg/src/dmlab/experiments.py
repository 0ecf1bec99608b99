"""Named end-to-end experiments with statement-level pass/fail checks.

Each runner builds its objects from exact inputs, runs the relevant
certificates, and returns a deterministic report dict: inputs, results,
a list of named boolean checks, and an overall status.  Anything the
machinery cannot decide is reported as inconclusive, never as failure.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable

from . import certify, doubling, geom, measure, reports, seq
from .errors import PreconditionViolated
from .ratio import parse_rational

EXPERIMENT_NAMES = (
    "interval_packing",
    "middle_cantor",
    "logfloor_removal",
    "porous_thin",
    "thick_fat",
    "cutout_fat",
)

SCHEMA = "dmlab-report/1"


def _frac(overrides: dict, key: str, default: Fraction) -> Fraction:
    if key in overrides:
        return parse_rational(str(overrides[key]))
    return default


def _int(overrides: dict, key: str, default: int) -> int:
    return int(overrides.get(key, default))


def _family(overrides: dict, key: str, default: seq.SequenceFamily):
    if key in overrides:
        return seq.family_from_spec(overrides[key])
    return default


def _finish(report: dict, checks: list[tuple[str, bool]], inconclusive: bool = False) -> dict:
    report["checks"] = [{"name": n, "passed": ok} for n, ok in checks]
    if inconclusive:
        report["status"] = "inconclusive"
    elif all(ok for _, ok in checks):
        report["status"] = "pass"
    else:
        report["status"] = "fail"
    return report


# --- runners ---------------------------------------------------------------


def run_interval_packing(overrides: dict) -> dict:
    """Packings that spend the whole length budget: thin exactly when the
    pieces have disjoint interiors, fat as soon as anything overlaps."""
    half = Fraction(1, 2)
    lengths = seq.ExplicitFinite((half, half))
    disjoint = [geom.closed(0, half), geom.closed(half, 1)]
    overlapping = [geom.closed(0, half), geom.closed(Fraction(1, 4), Fraction(3, 4))]

    v_disjoint = certify.interval_packing_verdict(disjoint, lengths, total=Fraction(1))
    v_overlap = certify.interval_packing_verdict(overlapping, lengths, total=Fraction(1))
    v_empty = certify.interval_packing_verdict([], lengths, total=Fraction(1))

    report = {
        "schema": SCHEMA,
        "experiment": "interval_packing",
        "inputs": {
            "lengths": seq.family_to_spec(lengths),
            "total": reports.tag_exact(1),
            "disjoint_intervals": [[reports.rat_str(iv.lo), reports.rat_str(iv.hi)] for iv in disjoint],
            "overlapping_intervals": [[reports.rat_str(iv.lo), reports.rat_str(iv.hi)] for iv in overlapping],
        },
        "results": {
            "disjoint_verdict": v_disjoint.name,
            "overlapping_verdict": v_overlap.name,
            "empty_prefix_verdict": v_empty.name,
        },
    }
    checks = [
        ("disjoint interiors give a thin packing", v_disjoint is certify.PackingVerdict.THIN),
        ("interior overlap gives a fat packing", v_overlap is certify.PackingVerdict.FAT),
        ("an empty packing wastes the whole budget and is fat", v_empty is certify.PackingVerdict.FAT),
    ]
    return _finish(report, checks)


def run_middle_cantor(overrides: dict) -> dict:
    """Middle-interval construction with gap fractions 1/(n+1)^2: the gap
    family sits in ell^(3/5) but not ell^(2/5), the surviving length is
    exactly the telescoping product with limit 1/2, and fatness is left
    open because no finite scan can refute it."""
    beta = _family(overrides, "beta", seq.Power(Fraction(1), 2, 1))
    n_partial = _int(overrides, "n_partial", 10_000)
    cross_depth = _int(overrides, "cross_depth", 8)

    in_35 = seq.classify_ellp(beta, Fraction(3, 5))
    in_25 = seq.classify_ellp(beta, Fraction(2, 5))
    mass = certify.product_bracket(beta, n_partial)

    tree = geom.build_cantor(beta, cross_depth)
    partial = Fraction(1)
    construction_matches = True
    for level in range(1, cross_depth + 1):
        partial *= 1 - seq.term(beta, level)
        if tree.level_length(level) != partial:
            construction_matches = False
            break

    stage_partials = []
    running = Fraction(1)
    for n in range(1, 13):
        running *= 1 - seq.term(beta, n)
        stage_partials.append((n, running))

    half = Fraction(1, 2)
    report = {
        "schema": SCHEMA,
        "experiment": "middle_cantor",
        "inputs": {
            "beta": seq.family_to_spec(beta),
            "n_partial": n_partial,
            "cross_depth": cross_depth,
        },
        "results": {
            "ellp_three_fifths": in_35.name,
            "ellp_two_fifths": in_25.name,
            "lebesgue_mass": reports.tag_product(mass),
            "fatness": {
                "status": "open",
                "flag": "desk-scale cannot refute",
                "note": "no finite scan distinguishes fat from not-fat here",
            },
        },
        "plot": [reports.plot_series("partial_product", stage_partials)],
    }
    checks = [
        ("gap family lies in ell^(3/5)", in_35 is seq.Summability.CONVERGES),
        ("gap family escapes ell^(2/5)", in_25 is seq.Summability.DIVERGES),
        ("surviving length encloses 1/2", mass.encloses(half)),
        ("bracket width below 1/1000", mass.width <= Fraction(1, 1000)),
        ("finite construction matches the partial products exactly", construction_matches),
    ]
    return _finish(report, checks)


def run_logfloor_removal(overrides: dict) -> dict:
    """Removal schedule driven by floor(log2(stage+1)): under the left-weight
    p tree measure the survivor keeps positive mass for p = 1/3 and loses all
    mass for p = 2/3, with the brute-force tree count agreeing exactly with
    the closed form at every checked stage."""
    p = _frac(overrides, "p", Fraction(1, 3))
    stages = _int(overrides, "stages", 12)
    deep_stage = _int(overrides, "deep_stage", 4096)
    threshold = _frac(overrides, "threshold", Fraction(1, 10**6))

    schedule = certify.logfloor_schedule_mass(p, stages)
    results: dict[str, Any] = {
        "stage_mass": reports.tag_product(schedule.closed_form),
        "verdict": schedule.verdict.name,
        "removal_depths": list(schedule.exponents),
    }
    checks: list[tuple[str, bool]] = []
    if schedule.brute_force is not None:
        results["brute_force_mass"] = reports.tag_exact(schedule.brute_force)
        checks.append(
            ("independent tree count equals the closed form exactly", bool(schedule.match_exact))
        )

    monotone = all(
        a > b for a, b in zip(schedule.stage_partials, schedule.stage_partials[1:])
    )
    checks.append(("partial products strictly decrease", monotone))

    if schedule.verdict is certify.LimitVerdict.POSITIVE_LIMIT:
        deep = certify.product_bracket(seq.LogFloor(p), deep_stage)
        results["limit_lower_bound"] = reports.tag_product(deep)
        checks.append(
            ("limit mass certified at least 1/10", deep.lower_value >= Fraction(1, 10))
        )
    else:
        stage, value = certify.logfloor_vanishing_stage(p, threshold)
        results["vanishing_stage"] = stage
        results["vanishing_partial"] = reports.tag_exact(value)
        checks.append(
            (f"partial product falls below {threshold} at a finite stage", value < threshold)
        )

    report = {
        "schema": SCHEMA,
        "experiment": "logfloor_removal",
        "inputs": {
            "p": reports.tag_exact(p),
            "stages": stages,
            "deep_stage": deep_stage,
            "threshold": reports.tag_exact(threshold),
        },
        "results": results,
        "plot": [
            reports.plot_series(
                "partial_product",
                [(n, v) for n, v in enumerate(schedule.stage_partials, start=1)],
            )
        ],
    }
    return _finish(report, checks)


def run_porous_thin(overrides: dict) -> dict:
    """Uniform relative holes force thinness: each stage multiplies the mass
    upper bound by (1 - c * alpha_n^s) and divergence drives it to zero."""
    alpha = _family(overrides, "alpha", seq.Constant(Fraction(1, 2)))
    s = _frac(overrides, "s", Fraction(1))
    c = _frac(overrides, "c", Fraction(1))
    epsilon = _frac(overrides, "epsilon", Fraction(1, 1000))

    cert = certify.certify_thin_porous(alpha, s, c, epsilon)
    curve_points = [(n, v) for n, v in enumerate(cert.decay_curve, start=1)]

    report = {
        "schema": SCHEMA,
        "experiment": "porous_thin",
        "inputs": {
            "alpha": seq.family_to_spec(alpha),
            "s": reports.tag_exact(s),
            "c": reports.tag_exact(c),
            "epsilon": reports.tag_exact(epsilon),
        },
        "results": {
            "divergence_witness": cert.divergence_witness.name,
            "n_star": cert.n_star,
            "final_mass_upper": reports.tag_exact(cert.decay_curve[-1]),
            "skipped_stages": list(cert.skipped_stages),
        },
        "plot": [reports.plot_series("stage_mass_upper", curve_points)],
    }
    checks = [
        ("hole sizes diverge in the s-th power", cert.divergence_witness is seq.Summability.DIVERGES),
        ("mass upper bound falls below epsilon", cert.decay_curve[-1] < epsilon),
        (
            "decay curve never increases",
            all(a >= b for a, b in zip(cert.decay_curve, cert.decay_curve[1:])),
        ),
    ]
    return _finish(report, checks)


def run_thick_fat(overrides: dict) -> dict:
    """Geometric gap ratios keep a thick construction fat: the per-stage
    decay factors multiply to a certified positive limit."""
    alpha = _family(overrides, "alpha", seq.Geometric(Fraction(1, 2), Fraction(1, 2)))
    t = _frac(overrides, "t", Fraction(1))
    factor_scale = _frac(overrides, "factor_scale", Fraction(1))

    cert = certify.certify_fat_thick(alpha, t, factor_scale)

    report = {
        "schema": SCHEMA,
        "experiment": "thick_fat",
        "inputs": {
            "alpha": seq.family_to_spec(alpha),
            "t": reports.tag_exact(t),
            "factor_scale": reports.tag_exact(factor_scale),
        },
        "results": {
            "conclusion": cert.conclusion.name,
            "first_contracting_stage": cert.n0,
            "mass_lower_bound": reports.tag_product(cert.bound),
            "notes": list(cert.notes),
        },
    }
    positive = cert.conclusion is certify.Conclusion.POSITIVE
    checks = [
        ("limit product certified positive", positive),
        ("certified bracket is nondegenerate", cert.bound.lower_value > 0),
    ]
    return _finish(report, checks, inconclusive=not positive)


def run_cutout_fat(overrides: dict) -> dict:
    """Nested dyadic balls removed from the unit interval under Lebesgue
    measure: the window-validated mass fit plus the declared diameter family
    certify that enough balls still leave positive mass, and inflating the
    removed balls slightly does not destroy the remainder."""
    m = (
        measure.measure_from_spec(overrides["measure"])
        if "measure" in overrides
        else measure.TreeMeasure(measure.BinomialWeights(Fraction(1, 2)))
    )
    scan_depth = _int(overrides, "scan_depth", 6)
    n_total = _int(overrides, "n_total", 64)
    n_balls = _int(overrides, "n_balls", 18)
    probe_n = _int(overrides, "probe_n", 4)
    r = _frac(overrides, "r", Fraction(1))
    p = _frac(overrides, "p", Fraction(1, 4))
    eval_depth = _int(overrides, "eval_depth", 20)

    scan = doubling.doubling_scan(m, scan_depth)
    balls = [geom.closed(0, Fraction(1, 1 << i)) for i in range(1, n_total + 1)]
    diam_family = seq.Geometric(Fraction(1, 2), Fraction(1, 2))
    config = geom.CutOutConfig(balls, diam_family=diam_family)

    bound = certify.cutout_lower_bound(config, scan, r, n_balls, p)
    probe = certify.cutout_lower_bound(config, scan, r, probe_n, p)
    direct = measure.cutout_mass(m, config, n_balls, eval_depth)

    q_exp = certify.solve_inflation_exponent(
        scan.mass_window.big_lam, scan.mass_window.t, Fraction(1), Fraction(1, 2)
    )
    inflation = certify.inflated_remainder_check(
        m, config, n_balls, q_exp, Fraction(1, 2), eval_depth
    )

    window = (scan.window_lo, scan.window_hi)
    report = {
        "schema": SCHEMA,
        "experiment": "cutout_fat",
        "inputs": {
            "measure": measure.measure_to_spec(m),
            "scan_depth": scan_depth,
            "n_total_balls": n_total,
            "n_balls": n_balls,
            "probe_n": probe_n,
            "r": reports.tag_exact(r),
            "p": reports.tag_exact(p),
            "diam_family": seq.family_to_spec(diam_family),
        },
        "results": {
            "doubling": reports.doubling_report_payload(scan),
            "certified_bound": {
                "value": reports.tag_window(bound.value, window),
                "conclusion": bound.conclusion.name,
                "main_term": reports.tag_window(bound.main_term, window),
                "penalty": reports.tag_window(bound.penalty, window),
                "gap": [reports.rat_str(bound.gap.lo), reports.rat_str(bound.gap.hi)],
                "gap_diameter": reports.tag_exact(bound.gap_diameter),
            },
            "small_n_probe": {
                "n_balls": probe_n,
                "value": reports.tag_window(probe.value, window),
                "conclusion": probe.conclusion.name,
            },
            "direct_mass": reports.tag_mass(direct),
            "inflation": {
                "exponent": reports.tag_exact(q_exp),
                "zeta_upper": reports.tag_exact(inflation.zeta_upper),
                "remaining_lower": reports.tag_exact(inflation.remaining_lower),
                "passed": inflation.passed,
            },
        },
        "plot": [
            reports.plot_series(
                "doubling_ratio_by_scale",
                [(k, v) for k, v in doubling.per_scale_max_ratios(m, scan_depth)],
            )
        ],
    }
    positive = bound.conclusion is certify.Conclusion.POSITIVE
    checks = [
        ("mass window fit is available", scan.mass_window is not None),
        ("certified lower bound is positive", positive),
        ("direct mass evaluation dominates the certified bound", direct.lower >= bound.value),
        ("small-ball-count probe stays honestly inconclusive",
         probe.conclusion is certify.Conclusion.INCONCLUSIVE),
        ("inflated removal keeps the required mass", inflation.passed),
    ]
    return _finish(report, checks, inconclusive=not positive)


_RUNNERS: dict[str, Callable[[dict], dict]] = {
    "interval_packing": run_interval_packing,
    "middle_cantor": run_middle_cantor,
    "logfloor_removal": run_logfloor_removal,
    "porous_thin": run_porous_thin,
    "thick_fat": run_thick_fat,
    "cutout_fat": run_cutout_fat,
}


def run_experiment(name: str, overrides: dict | None = None) -> dict:
    if name not in _RUNNERS:
        known = ", ".join(EXPERIMENT_NAMES)
        raise PreconditionViolated(f"unknown experiment {name!r}; known: {known}")
    return _RUNNERS[name](overrides or {})
