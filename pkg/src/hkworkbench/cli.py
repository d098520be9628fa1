"""``hkw`` command line.

Subcommands: compute, fit, bundle-sections, bundle-sequence, p1check,
crossval. Settings come from flags and optionally from an INI file
(``--config``, section ``[job]``); flags win. Exit codes: 0 success,
2 parse error, 3 fit failure, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from .bundlecalc import (
    InconsistentSequenceError,
    InconsistentSyzygyError,
    InvalidInputError,
    InvalidRangeError,
    exact_sequence_coefficient,
    parse_curve,
    parse_hn,
    section_formula,
)
from .colength import ColengthCache, NotPrimaryError, parse_ideal, write_degree_csv
from .gradedring import InvalidPowerError, PolyParseError, parse_ring
from .hkfit import (
    FitFailure,
    default_e_max,
    fit_quadratic_periodic,
    fraction_str,
    hk_samples,
    linear_term_audit,
    read_samples_csv,
)
from .p1oracle import (
    P1,
    InvalidCurveError,
    exact_sequence_audit,
    p1_h1_oracle,
    p1_window_sum_direct,
    parse_split_bundle,
    random_exact_sequence,
    random_split_case,
    run_formula_trial,
    split_hn,
)

EXIT_OK, EXIT_PARSE, EXIT_FIT, EXIT_INVARIANT = 0, 2, 3, 4

# every key a config file may set; the flag of the same name wins
CONFIG_KEYS = ("ring", "ideal", "emax", "tau_max", "threads", "cache_dir", "seed", "curve", "hn", "trials")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise CliError(f"config {path}: {exc}", EXIT_PARSE) from None
    if not parser.has_section("job"):
        raise CliError(f"config {path}: missing [job] section", EXIT_PARSE)
    out = dict(parser["job"])
    unknown = sorted(set(out) - set(CONFIG_KEYS))
    if unknown:
        raise CliError(f"config {path}: unknown keys {', '.join(unknown)}", EXIT_PARSE)
    return out


def _setting(args, conf: dict[str, str], key: str, default=None, kind=str):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in conf:
        try:
            return kind(conf[key])
        except ValueError:
            raise CliError(f"config key {key}: cannot read {conf[key]!r}", EXIT_PARSE) from None
    return default


def _require(value, name: str):
    if value is None:
        raise CliError(f"missing --{name.replace('_', '-')} (flag or config key {name})", EXIT_PARSE)
    return value


def _cache(args, conf) -> ColengthCache | None:
    if getattr(args, "no_cache", False):
        return None
    root = args.cache_dir or os.environ.get("HKW_CACHE_DIR") or conf.get("cache_dir")
    if root is None:
        root = Path.home() / ".cache" / "hkworkbench"
    return ColengthCache(root)


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _ring_and_ideal(args, conf):
    ring = parse_ring(_require(_setting(args, conf, "ring"), "ring"))
    ideal = parse_ideal(_require(_setting(args, conf, "ideal"), "ideal"), ring)
    return ring, ideal


def _gnuplot_block(samples, fit) -> str:
    lines = [f"# e_hk={fraction_str(fit.e_hk)} tau={fit.tau} e0={fit.e0}", "# q phi-e_hk*q^2"]
    for s in samples:
        lines.append(f"{s.q} {fraction_str(s.phi - fit.e_hk * s.q * s.q)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_compute(args, conf) -> int:
    ring, ideal = _ring_and_ideal(args, conf)
    e_max = _setting(args, conf, "emax", default_e_max(ring.p), int)
    if e_max < 1:
        raise CliError("emax must be at least 1", EXIT_PARSE)
    threads = _setting(args, conf, "threads", None, int)
    details: dict = {}
    samples = hk_samples(ring, ideal, e_max, threads=threads, cache=_cache(args, conf), details=details)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["e", "q", "phi"])
    for s in samples:
        w.writerow([s.e, s.q, s.phi])
    _emit(buf.getvalue(), args.out)

    detail_path = args.details
    if detail_path is None and args.out:
        detail_path = str(Path(args.out).with_suffix("")) + ".degrees.csv"
    if detail_path:
        write_degree_csv(sorted(details.items()), detail_path)
    if args.plot:
        from .plotting import plot_degree_profile

        plot_degree_profile(sorted(details.items()), args.plot)
    return EXIT_OK


def cmd_fit(args, conf) -> int:
    try:
        samples = read_samples_csv(args.samples)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc), EXIT_PARSE) from None
    tau_max = _setting(args, conf, "tau_max", 6, int)
    try:
        fit = fit_quadratic_periodic(samples, tau_max)
    except FitFailure as exc:
        _emit(_json(exc.to_json()), args.out)
        return EXIT_FIT
    try:
        beta = linear_term_audit(samples, fit)
    except ValueError:
        beta = None
    if args.gnuplot:
        _emit(_gnuplot_block(samples, fit), args.out)
    else:
        _emit(_json(fit.to_json(beta)), args.out)
    if args.plot:
        from .plotting import plot_periodic_part

        plot_periodic_part(samples, fit, args.plot)
    return EXIT_OK


def _zero_oracle(k: int, m: int, q: int) -> int:
    return 0


def cmd_bundle_sections(args, conf) -> int:
    sigma, rho = Fraction(args.sigma), Fraction(args.rho)
    q = args.p**args.e
    if args.split:
        bundle = parse_split_bundle(args.split)
        curve = parse_curve(args.curve) if args.curve else P1
        hn = split_hn(bundle, curve)
        oracle = p1_h1_oracle(bundle)
    else:
        hn = parse_hn(_require(_setting(args, conf, "hn"), "hn"))
        curve = parse_curve(_require(_setting(args, conf, "curve"), "curve"))
        oracle = _zero_oracle
    total, queries = section_formula(hn, curve, sigma, rho, q, oracle)
    report = {"q": q, "total": fraction_str(total), "queries": [list(km) for km in queries]}
    code = EXIT_OK
    if args.split:
        direct = p1_window_sum_direct(bundle, sigma, rho, q)
        report["direct"] = fraction_str(direct)
        report["agree"] = direct == total
        if direct != total:
            code = EXIT_INVARIANT
    _emit(_json(report), args.out)
    return code


def cmd_bundle_sequence(args, conf) -> int:
    if args.split:
        S, T, Q = (parse_split_bundle(t) for t in (args.S, args.T, args.Q))
        report = exact_sequence_audit(S, T, Q, args.p, args.emax)
        out = {
            "coefficient": fraction_str(report["coefficient"]),
            "constants": [fraction_str(c) for c in report["constants"]],
            "period": None if report["period"] is None else list(report["period"]),
        }
        _emit(_json(out), args.out)
        return EXIT_OK if report["period"] is not None else EXIT_INVARIANT
    curve = parse_curve(_require(_setting(args, conf, "curve"), "curve"))
    coef = exact_sequence_coefficient(parse_hn(args.S), parse_hn(args.T), parse_hn(args.Q), curve)
    _emit(_json({"coefficient": fraction_str(coef)}), args.out)
    return EXIT_OK


def _case_line(i, case, formula, direct) -> str:
    b, p, e, sigma, rho = case
    return (
        f"case {i}: bundle={b} p={p} e={e} sigma={fraction_str(sigma)} rho={fraction_str(rho)} "
        f"formula={fraction_str(formula)} direct={direct}"
    )


def cmd_p1check(args, conf) -> int:
    trials = _setting(args, conf, "trials", 1000, int)
    seed = _setting(args, conf, "seed", 0, int)
    if trials < 1:
        raise CliError("trials must be at least 1", EXIT_PARSE)
    rng = random.Random(seed)
    lines, failures = [], 0
    for i in range(trials):
        case = random_split_case(rng)
        if args.case is not None and i != args.case:
            continue
        formula, direct = run_formula_trial(*case)
        if trials == 1 or args.case is not None:
            lines.append(_case_line(i, case, formula, direct))
        if formula != direct:
            failures += 1
            if trials > 1 and args.case is None:
                lines.append(_case_line(i, case, formula, direct))
            lines.append(f"replay: hkw p1check --seed {seed} --trials {trials} --case {i}")
    checked = 1 if args.case is not None else trials
    lines.append(f"{checked - failures}/{checked} exact")

    if args.case is None and args.sequences:
        srng = random.Random(f"{seed}/sequences")
        bad = 0
        for j in range(args.sequences):
            S, T, Q, split = random_exact_sequence(srng)
            p = srng.choice((2, 3, 5, 7))
            rep = exact_sequence_audit(S, T, Q, p)
            ok = rep["period"] is not None and (
                not split or (rep["coefficient"] == 0 and not any(rep["constants"]))
            )
            if not ok:
                bad += 1
                lines.append(f"sequence {j}: S={S} T={T} Q={Q} p={p} failed")
        lines.append(f"{args.sequences - bad}/{args.sequences} sequences periodic")
        failures += bad
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_INVARIANT if failures else EXIT_OK


def cmd_crossval(args, conf) -> int:
    from .crossval import reconcile

    ring, ideal = _ring_and_ideal(args, conf)
    curve = parse_curve(_require(_setting(args, conf, "curve"), "curve"))
    hn_text = _setting(args, conf, "hn")
    hn = parse_hn(hn_text) if hn_text else None
    e_max = _setting(args, conf, "emax", 3, int)
    tau_max = _setting(args, conf, "tau_max", 6, int)
    threads = _setting(args, conf, "threads", None, int)
    try:
        report = reconcile(ring, ideal, curve, hn, e_max, tau_max, threads=threads, cache=_cache(args, conf))
    except FitFailure as exc:
        _emit(_json(exc.to_json()), args.out)
        return EXIT_FIT
    if args.gnuplot:
        _emit(_gnuplot_block(report.samples, report.fit), args.out)
    else:
        _emit(_json(report.to_json()), args.out)
    if args.plot:
        from .plotting import plot_periodic_part

        plot_periodic_part(report.samples, report.fit, args.plot, title=ring.describe())
    return EXIT_INVARIANT if report.agree is False else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hkw", description="Hilbert-Kunz workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *, cache=False):
        p.add_argument("--config", help="INI file with a [job] section")
        p.add_argument("-o", "--out", help="output file (default stdout)")
        if cache:
            p.add_argument("--cache-dir", help="colength cache (default $HKW_CACHE_DIR or ~/.cache/hkworkbench)")
            p.add_argument("--no-cache", action="store_true")
            p.add_argument("--threads", type=int, help="rank worker threads (default: all cores)")

    p = sub.add_parser("compute", help="phi(p^e) for e = 1..emax as CSV")
    common(p, cache=True)
    p.add_argument("--ring", help='e.g. "p=7;vars=x,y,z;rel=x^3+y^3+z^3"')
    p.add_argument("--ideal", help='e.g. "x,y,z"')
    p.add_argument("--emax", type=int)
    p.add_argument("--details", help="per-degree CSV (default: next to --out)")
    p.add_argument("--plot", help="write a per-degree profile figure")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("fit", help="fit e_HK and the periodic part from a samples CSV")
    common(p)
    p.add_argument("samples", help="CSV with columns e,q,phi")
    p.add_argument("--tau-max", type=int)
    p.add_argument("--gnuplot", action="store_true", help="emit (q, phi - e_hk q^2) pairs instead of JSON")
    p.add_argument("--plot", help="write a figure of the periodic part")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bundle-sections", help="evaluate the global-section formula")
    common(p)
    p.add_argument("--hn", help='HN data, e.g. "2:-9/2;1:-6" (h^1 taken as 0)')
    p.add_argument("--curve", help='e.g. "g=1,degY=3"')
    p.add_argument("--split", help='split bundle on the projective line, e.g. "0,-1"; uses the exact h^1 oracle')
    p.add_argument("--sigma", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--e", type=int, required=True)
    p.set_defaults(func=cmd_bundle_sections)

    p = sub.add_parser("bundle-sequence", help="q^2 coefficient of an exact sequence")
    common(p)
    p.add_argument("--S", required=True)
    p.add_argument("--T", required=True)
    p.add_argument("--Q", required=True)
    p.add_argument("--curve")
    p.add_argument("--split", action="store_true", help="S, T, Q are split bundles on the projective line; audit c(e)")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--emax", type=int, default=8)
    p.set_defaults(func=cmd_bundle_sequence)

    p = sub.add_parser("p1check", help="seeded formula-vs-oracle suite on the projective line")
    common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sequences", type=int, default=0, help="also audit this many random exact sequences")
    p.add_argument("--case", type=int, help="replay a single case index")
    p.set_defaults(func=cmd_p1check)

    p = sub.add_parser("crossval", help="measured versus predicted e_HK")
    common(p, cache=True)
    p.add_argument("--ring")
    p.add_argument("--ideal")
    p.add_argument("--curve")
    p.add_argument("--hn", help="HN data of the syzygy bundle")
    p.add_argument("--emax", type=int)
    p.add_argument("--tau-max", type=int)
    p.add_argument("--gnuplot", action="store_true")
    p.add_argument("--plot")
    p.set_defaults(func=cmd_crossval)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        conf = _load_config(args.config)
        return args.func(args, conf)
    except CliError as exc:
        print(f"hkw: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidRangeError, InconsistentSequenceError, InconsistentSyzygyError, NotPrimaryError) as exc:
        print(f"hkw: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (PolyParseError, InvalidInputError, InvalidPowerError, InvalidCurveError, ValueError) as exc:
        print(f"hkw: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
