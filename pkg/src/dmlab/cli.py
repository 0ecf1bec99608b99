"""Command-line front end.

One binary, subcommand style.  Every command prints a deterministic JSON
report to stdout (or --out); timing goes to stderr so reports stay
byte-identical across runs.  Exit codes: 0 when the statement-level check
passed, 2 when the machinery was inconclusive, 1 on any error (including
usage errors).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import certify, doubling, experiments, geom, measure, qs, reports, seq
from .errors import DmlabError
from .ratio import parse_rational

PASS, ERROR, INCONCLUSIVE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for inconclusive results; usage errors are errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ERROR, f"{self.prog}: error: {message}\n")


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DmlabError("config file must hold a JSON object")
    return data


def _setting(args, config: dict, key: str, default=None):
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if key in config:
        return config[key]
    return default


def _require(args, config: dict, key: str):
    value = _setting(args, config, key)
    if value is None:
        raise DmlabError(f"missing required option --{key}")
    return value


def _family_arg(value) -> seq.SequenceFamily:
    if isinstance(value, str):
        value = json.loads(value)
    return seq.family_from_spec(value)


def _measure_arg(value) -> measure.TreeMeasure:
    if isinstance(value, str):
        value = json.loads(value)
    return measure.measure_from_spec(value)


def _rat(value) -> Fraction:
    return parse_rational(str(value))


def _depth_arg(args, config: dict, key: str, default: int) -> int:
    depth = int(_setting(args, config, key, default))
    geom.check_depth(depth, getattr(args, "max_depth", None))
    return depth


# --- seq ---------------------------------------------------------------------


def _cmd_seq_classify(args, config):
    family = _family_arg(_require(args, config, "family"))
    p = _rat(_setting(args, config, "p", "1"))
    verdict = seq.classify_ellp(family, p)
    report = {
        "command": "seq classify",
        "family": seq.family_to_spec(family),
        "p": reports.rat_str(p),
        "classification": verdict.name,
    }
    return report, "pass"


def _cmd_seq_tail(args, config):
    family = _family_arg(_require(args, config, "family"))
    p = _rat(_setting(args, config, "p", "1"))
    n_from = int(_setting(args, config, "from", 1))
    upper = seq.tail_sum_upper(family, p, n_from)
    report = {
        "command": "seq tail",
        "family": seq.family_to_spec(family),
        "p": reports.rat_str(p),
        "from": n_from,
        "tail_sum_upper": reports.tag_exact(upper),
        "note": "certified upper bound on sum of term^p beyond the index",
    }
    return report, "pass"


# --- cantor --------------------------------------------------------------------


def _cmd_cantor_build(args, config):
    beta = _family_arg(_require(args, config, "beta"))
    depth = _depth_arg(args, config, "depth", 8)
    tree = geom.build_cantor(beta, depth, max_depth=args.max_depth, max_nodes=args.max_nodes)
    lengths = [(k, tree.level_length(k)) for k in range(depth + 1)]
    report = {
        "command": "cantor build",
        "beta": seq.family_to_spec(beta),
        "depth": depth,
        "level_lengths": {str(k): reports.tag_exact(v) for k, v in lengths},
        "leaf_count": len(tree.nodes[depth]),
        "plot": [reports.plot_series("level_length", lengths)],
    }
    if tree.perfectness_constant is not None:
        report["perfectness_constant"] = reports.tag_exact(tree.perfectness_constant)
    return report, "pass"


def _nested_balls(count: int) -> list[geom.RationalInterval]:
    return [geom.closed(0, Fraction(1, 1 << i)) for i in range(1, count + 1)]


def _balls_from(args, config) -> list[geom.RationalInterval]:
    nested = _setting(args, config, "nested")
    raw = _setting(args, config, "balls")
    if nested is not None:
        return _nested_balls(int(nested))
    if raw is None:
        raise DmlabError("provide --balls JSON or --nested COUNT")
    if isinstance(raw, str):
        raw = json.loads(raw)
    return [geom.closed(_rat(lo), _rat(hi)) for lo, hi in raw]


def _cmd_cantor_cutout(args, config):
    balls = _balls_from(args, config)
    n_balls = int(_setting(args, config, "n-balls", len(balls)))
    fam = _setting(args, config, "diam-family")
    diam_family = _family_arg(fam) if fam is not None else None
    cfg = geom.CutOutConfig(balls, diam_family=diam_family)
    if diam_family is not None:
        cfg.validate_diameters()
    pieces = geom.remaining_set(cfg, n_balls)
    gap, diameter = geom.largest_gap(cfg, n_balls)
    report = {
        "command": "cantor cutout",
        "n_balls": n_balls,
        "component_count": len(pieces),
        "components": [
            [reports.rat_str(p.lo), reports.rat_str(p.hi)] for p in pieces
        ],
        "remaining_length": reports.tag_exact(geom.union_length(pieces)),
        "largest_gap": {
            "interval": [reports.rat_str(gap.lo), reports.rat_str(gap.hi)],
            "diameter": reports.tag_exact(diameter),
        },
    }
    return report, "pass"


# --- measure ---------------------------------------------------------------------


def _cmd_measure_mass(args, config):
    m = _measure_arg(_require(args, config, "measure"))
    lo = _rat(_require(args, config, "lo"))
    hi = _rat(_require(args, config, "hi"))
    depth = _depth_arg(args, config, "depth", 16)
    bracket = measure.interval_mass(m, geom.closed(lo, hi), depth)
    report = {
        "command": "measure mass",
        "measure": measure.measure_to_spec(m),
        "interval": [reports.rat_str(lo), reports.rat_str(hi)],
        "depth": depth,
        "mass": reports.tag_mass(bracket),
    }
    return report, "pass"


def _cmd_measure_grid(args, config):
    m = _measure_arg(_require(args, config, "measure"))
    depth = _depth_arg(args, config, "depth", 8)
    grid = measure.dyadic_cdf_grid(m, depth)
    points = [(Fraction(i, 1 << depth), v) for i, v in enumerate(grid)]
    report = {
        "command": "measure grid",
        "measure": measure.measure_to_spec(m),
        "depth": depth,
        "total_mass": reports.tag_exact(m.total_mass),
        "plot": [reports.plot_series("cdf", points)],
    }
    return report, "pass"


# --- doubling ---------------------------------------------------------------------


def _cmd_doubling_scan(args, config):
    m = _measure_arg(_require(args, config, "measure"))
    depth = _depth_arg(args, config, "depth", 6)
    fit = not bool(_setting(args, config, "no-fit", False))
    rep = doubling.doubling_scan(m, depth, fit=fit, seed=args.seed or 0)
    report = {
        "command": "doubling scan",
        "measure": measure.measure_to_spec(m),
        **reports.doubling_report_payload(rep),
        "plot": [
            reports.plot_series(
                "doubling_ratio_by_scale", doubling.per_scale_max_ratios(m, depth)
            )
        ],
    }
    return report, "pass"


# --- certify ---------------------------------------------------------------------


def _cmd_certify_fat(args, config):
    alpha = _family_arg(_require(args, config, "alpha"))
    t = _rat(_setting(args, config, "t", "1"))
    scale = _rat(_setting(args, config, "factor-scale", "1"))
    cert = certify.certify_fat_thick(alpha, t, scale)
    positive = cert.conclusion is certify.Conclusion.POSITIVE
    report = {
        "command": "certify fat",
        "alpha": seq.family_to_spec(alpha),
        "t": reports.rat_str(t),
        "factor_scale": reports.rat_str(scale),
        "conclusion": cert.conclusion.name,
        "first_contracting_stage": cert.n0,
        "mass_lower_bound": reports.tag_product(cert.bound),
        "notes": list(cert.notes),
    }
    return report, "pass" if positive else "inconclusive"


def _cmd_certify_thin(args, config):
    alpha = _family_arg(_require(args, config, "alpha"))
    s = _rat(_setting(args, config, "s", "1"))
    c = _rat(_setting(args, config, "c", "1"))
    epsilon = _rat(_setting(args, config, "epsilon", "1/1000"))
    cert = certify.certify_thin_porous(alpha, s, c, epsilon)
    report = {
        "command": "certify thin",
        "alpha": seq.family_to_spec(alpha),
        "s": reports.rat_str(s),
        "c": reports.rat_str(c),
        "epsilon": reports.rat_str(epsilon),
        "divergence_witness": cert.divergence_witness.name,
        "n_star": cert.n_star,
        "skipped_stages": list(cert.skipped_stages),
        "plot": [
            reports.plot_series(
                "stage_mass_upper",
                list(enumerate(cert.decay_curve, start=1)),
            )
        ],
    }
    return report, "pass"


def _cmd_certify_cutout(args, config):
    m = _measure_arg(_setting(args, config, "measure", '{"kind":"binomial","p":"1/2"}'))
    scan_depth = _depth_arg(args, config, "scan-depth", 6)
    n_total = int(_setting(args, config, "n-total", 64))
    n_balls = int(_setting(args, config, "n-balls", 18))
    r = _rat(_setting(args, config, "r", "1"))
    p = _rat(_setting(args, config, "p", "1/4"))
    scan = doubling.doubling_scan(m, scan_depth)
    cfg = geom.CutOutConfig(
        _nested_balls(n_total),
        diam_family=seq.Geometric(Fraction(1, 2), Fraction(1, 2)),
    )
    bound = certify.cutout_lower_bound(cfg, scan, r, n_balls, p)
    positive = bound.conclusion is certify.Conclusion.POSITIVE
    window = (scan.window_lo, scan.window_hi)
    report = {
        "command": "certify cutout",
        "measure": measure.measure_to_spec(m),
        "n_balls": n_balls,
        "r": reports.rat_str(r),
        "p": reports.rat_str(p),
        "conclusion": bound.conclusion.name,
        "value": reports.tag_window(bound.value, window),
        "main_term": reports.tag_window(bound.main_term, window),
        "penalty": reports.tag_window(bound.penalty, window),
        "gap": [reports.rat_str(bound.gap.lo), reports.rat_str(bound.gap.hi)],
        "doubling": reports.doubling_report_payload(scan),
    }
    return report, "pass" if positive else "inconclusive"


def _cmd_certify_logfloor(args, config):
    p = _rat(_setting(args, config, "p", "1/3"))
    stages = int(_setting(args, config, "stages", 12))
    schedule = certify.logfloor_schedule_mass(p, stages)
    report = {
        "command": "certify logfloor",
        "p": reports.rat_str(p),
        "stages": stages,
        "verdict": schedule.verdict.name,
        "stage_mass": reports.tag_product(schedule.closed_form),
        "plot": [
            reports.plot_series(
                "partial_product",
                list(enumerate(schedule.stage_partials, start=1)),
            )
        ],
    }
    status = "pass"
    if schedule.brute_force is not None:
        report["brute_force_mass"] = reports.tag_exact(schedule.brute_force)
        report["match_exact"] = bool(schedule.match_exact)
        if not schedule.match_exact:
            status = "fail"
    return report, status


# --- qs ---------------------------------------------------------------------


def _cmd_qs_scan(args, config):
    m = _measure_arg(_require(args, config, "measure"))
    depth = _depth_arg(args, config, "depth", 8)
    random_triples = int(_setting(args, config, "random-triples", 0))
    qsmap = qs.QSMap(m, eval_depth=depth)
    rows = qs.qs_ratio_scan(
        qsmap, depth, random_triples=random_triples, seed=args.seed or 0
    )
    report = {
        "command": "qs scan",
        "measure": measure.measure_to_spec(m),
        "depth": depth,
        "rows": [
            {
                "tau": reports.rat_str(row.tau),
                "max_ratio": reports.tag_exact(row.max_ratio),
                "witness": [reports.rat_str(w) for w in row.witness],
            }
            for row in rows
        ],
        "plot": [
            reports.plot_series(
                "qs_ratio_envelope", [(row.tau, row.max_ratio) for row in rows]
            )
        ],
        "note": "empirical distortion envelope; a lower bound for any gauge",
    }
    return report, "pass"


def _cmd_qs_pullback(args, config):
    c = _rat(_require(args, config, "C"))
    eta2 = _rat(_require(args, config, "eta2"))
    bounds = qs.pullback_constant(c, eta2)
    report = {
        "command": "qs pullback",
        "C": reports.rat_str(c),
        "eta2": reports.rat_str(eta2),
        "pullback_constant": reports.tag_bounds(bounds),
    }
    return report, "pass"


# --- example ---------------------------------------------------------------------


def _cmd_example(args, config):
    overrides = dict(config)
    inline = getattr(args, "override", None)
    if inline:
        data = json.loads(inline)
        if not isinstance(data, dict):
            raise DmlabError("--override must be a JSON object")
        overrides.update(data)
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise DmlabError(f"--set needs KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    overrides.pop("config", None)
    report = experiments.run_experiment(args.name, overrides)
    return report, report["status"]


# --- wiring ---------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the JSON report to this file")
    p.add_argument("--plot", help="write plot-data CSV to this file")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--seed", type=int, default=None, help="seed for randomized scans")
    p.add_argument("--max-depth", type=int, default=None, help="hard depth cap")
    p.add_argument("--max-nodes", type=int, default=None, help="hard node cap")


def _opt(p: argparse.ArgumentParser, *names: str) -> None:
    for name in names:
        p.add_argument(f"--{name}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmlab", description=__doc__)
    sub = parser.add_subparsers(dest="topic", required=True)

    seq_p = sub.add_parser("seq", help="sequence families")
    seq_sub = seq_p.add_subparsers(dest="verb", required=True)
    p = seq_sub.add_parser("classify", help="summability class of term^p")
    _add_common(p); _opt(p, "family", "p"); p.set_defaults(handler=_cmd_seq_classify)
    p = seq_sub.add_parser("tail", help="certified tail sum upper bound")
    _add_common(p); _opt(p, "family", "p", "from"); p.set_defaults(handler=_cmd_seq_tail)

    cantor_p = sub.add_parser("cantor", help="middle-gap and cut-out geometry")
    cantor_sub = cantor_p.add_subparsers(dest="verb", required=True)
    p = cantor_sub.add_parser("build", help="middle-gap construction tree")
    _add_common(p); _opt(p, "beta", "depth"); p.set_defaults(handler=_cmd_cantor_build)
    p = cantor_sub.add_parser("cutout", help="components left after removing balls")
    _add_common(p); _opt(p, "balls", "nested", "n-balls", "diam-family")
    p.set_defaults(handler=_cmd_cantor_cutout)

    measure_p = sub.add_parser("measure", help="tree measures on [0,1]")
    measure_sub = measure_p.add_subparsers(dest="verb", required=True)
    p = measure_sub.add_parser("mass", help="bracket the mass of an interval")
    _add_common(p); _opt(p, "measure", "lo", "hi", "depth")
    p.set_defaults(handler=_cmd_measure_mass)
    p = measure_sub.add_parser("grid", help="exact cdf on a dyadic grid")
    _add_common(p); _opt(p, "measure", "depth"); p.set_defaults(handler=_cmd_measure_grid)

    doubling_p = sub.add_parser("doubling", help="doubling-ratio scans and fits")
    doubling_sub = doubling_p.add_subparsers(dest="verb", required=True)
    p = doubling_sub.add_parser("scan", help="certified ratio scan with window fits")
    _add_common(p); _opt(p, "measure", "depth")
    p.add_argument("--no-fit", action="store_true", default=None)
    p.set_defaults(handler=_cmd_doubling_scan)

    certify_p = sub.add_parser("certify", help="fatness/thinness certificates")
    certify_sub = certify_p.add_subparsers(dest="verb", required=True)
    p = certify_sub.add_parser("fat", help="positive limit product for thick sets")
    _add_common(p); _opt(p, "alpha", "t", "factor-scale")
    p.set_defaults(handler=_cmd_certify_fat)
    p = certify_sub.add_parser("thin", help="decay certificate for porous sets")
    _add_common(p); _opt(p, "alpha", "s", "c", "epsilon")
    p.set_defaults(handler=_cmd_certify_thin)
    p = certify_sub.add_parser("cutout", help="survival bound after removing balls")
    _add_common(p); _opt(p, "measure", "scan-depth", "n-total", "n-balls", "r", "p")
    p.set_defaults(handler=_cmd_certify_cutout)
    p = certify_sub.add_parser("logfloor", help="log-floor removal schedule mass")
    _add_common(p); _opt(p, "p", "stages"); p.set_defaults(handler=_cmd_certify_logfloor)

    qs_p = sub.add_parser("qs", help="increasing-map view and ratio scans")
    qs_sub = qs_p.add_subparsers(dest="verb", required=True)
    p = qs_sub.add_parser("scan", help="empirical distortion envelope")
    _add_common(p); _opt(p, "measure", "depth", "random-triples")
    p.set_defaults(handler=_cmd_qs_scan)
    p = qs_sub.add_parser("pullback", help="doubling constant through a gauge value")
    _add_common(p); _opt(p, "C", "eta2"); p.set_defaults(handler=_cmd_qs_pullback)

    example_p = sub.add_parser("example", help="named end-to-end experiments")
    example_p.add_argument("name", choices=experiments.EXPERIMENT_NAMES)
    _add_common(example_p)
    example_p.add_argument("--override", help="JSON object of experiment overrides")
    example_p.add_argument("--set", action="append", help="KEY=VALUE scalar override")
    example_p.set_defaults(handler=_cmd_example)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        config = _load_config(getattr(args, "config", None))
        report, status = args.handler(args, config)
    except DmlabError as exc:
        print(
            json.dumps({"error": str(exc), "kind": type(exc).__name__}),
            file=sys.stderr,
        )
        return ERROR
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__}), file=sys.stderr)
        return ERROR

    report.setdefault("schema", experiments.SCHEMA)
    text = reports.dump_report(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        with open(args.plot, "w", encoding="utf-8") as fh:
            fh.write(reports.emit_plotdata(report))
    print(f"elapsed: {time.monotonic() - started:.3f}s", file=sys.stderr)
    if status == "pass":
        return PASS
    if status == "inconclusive":
        return INCONCLUSIVE
    return ERROR


if __name__ == "__main__":
    sys.exit(main())
