"""Command-line front end: ``wignercorr <subcommand> ...``.

Exit status is 0 on success, 1 when a check fails (fixture mismatch, MC
flag) and 2 on usage errors.  Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import asymptotics as asy
from .correlators import (
    CACHE_ENV,
    TraceSignature,
    ensemble_difference,
    exact_connected,
    exact_moment,
    normalize_and_expand,
    representation_note,
    to_report,
)
from .algebra import poly_evaluate
from .ensemble import EnsembleSpec
from .errors import (
    ConnectedMismatch,
    DegenerateVariance,
    DegreeTooLarge,
    DomainError,
    MissingMoment,
    MomentOrderViolation,
    WignerCorrError,
)
from .walks import DEFAULT_CAP

log = logging.getLogger("wignercorr")


class UsageError(Exception):
    pass


# flag most likely responsible for each input error
_FLAG_FOR = {
    DegreeTooLarge: "--sig/--max-degree",
    DomainError: "--y/--y1/--y2",
    MissingMoment: "--ensemble",
    MomentOrderViolation: "--ensemble/--other/--j",
}


def _sig(text: str) -> TraceSignature:
    try:
        return TraceSignature.of(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--sig: {exc}") from None


def _ensemble(text: str, n=None) -> EnsembleSpec:
    if os.path.exists(text):
        return EnsembleSpec.from_file(text, n=n)
    return EnsembleSpec.from_name(text, n=n)


def _cap(args) -> int:
    cap = args.max_degree if args.max_degree is not None else DEFAULT_CAP
    if cap > DEFAULT_CAP and not args.allow_large:
        raise UsageError(f"--max-degree {cap} exceeds {DEFAULT_CAP}; pass --allow-large to confirm")
    return cap


def _emit(args, text: str, payload) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, default=str))
    elif args.format == "csv" and isinstance(payload, list) and payload and isinstance(payload[0], dict):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(payload[0]))
        w.writeheader()
        w.writerows(payload)
        print(buf.getvalue(), end="")
    else:
        print(text)


# -- subcommands ---------------------------------------------------------------


def cmd_exact(args, connected: bool = False) -> int:
    meta: dict = {}
    cap = _cap(args)
    if connected:
        poly = exact_connected(
            args.sig, method=args.method, cap=cap, threads=args.threads, cache_dir=args.cache_dir, metadata=meta
        )
    else:
        poly = exact_moment(args.sig, cap=cap, threads=args.threads, cache_dir=args.cache_dir, metadata=meta)
    report = to_report(args.sig, poly, meta, kind="connected" if connected else "moment")
    text = poly.to_text()
    if args.n is not None:
        ens = _ensemble(args.ensemble, n=args.n)
        val = poly_evaluate(poly, ens)
        report["metadata"].update(n=args.n, ensemble=ens.label(), value=str(val), note=representation_note(args.sig, args.n))
        text += f"\n= {val}  (n={args.n}, {ens.label()}, {representation_note(args.sig, args.n)})"
    _emit(args, text, report)
    return 0


def cmd_expand(args) -> int:
    poly = exact_connected(args.sig, cap=_cap(args), threads=args.threads, cache_dir=args.cache_dir)
    exp = normalize_and_expand(poly, args.sig, args.order)
    payload = exp.to_json()
    payload["signature"] = list(args.sig.powers)
    _emit(args, exp.to_text(), payload)
    return 0


def cmd_diff(args) -> int:
    e1, e2 = _ensemble(args.ensemble), _ensemble(args.other)
    rep = ensemble_difference(args.sig, e1, e2, j=args.j)
    payload = {
        "signature": list(args.sig.powers),
        "j": rep.j,
        "power_of_n": rep.power,
        "predicted": str(rep.predicted),
        "observed": str(rep.observed),
        "match": rep.match,
        "exact": {f"N{s}": str(c) for s, c in sorted(rep.exact.items())},
        "expansion": {str(-p): str(v) for p, v in sorted(rep.expansion.items())},
    }
    if rep.j is None:
        text = "ensembles agree on every moment this correlator uses; difference is 0"
    else:
        text = (
            f"difference leading term n^{rep.power}: predicted {rep.predicted}, observed {rep.observed} "
            f"-> {'MATCH' if rep.match else 'MISMATCH'}"
        )
    _emit(args, text, payload)
    return 0 if rep.match else 1


def cmd_series(args) -> int:
    o = args.order
    name = args.name
    if name == "catalan":
        s = asy.catalan_series(o)
    elif name == "tpower":
        s = asy.t_power_series(args.s, o)
    elif name == "special":
        s = asy.special_edge_series(args.m, o)
    elif name == "phi":
        s = asy.phi_r_series(args.r, o, args.z_order or o)
    elif name in ("S2", "S3", "S4"):
        c = asy.one_point_corrections(o, Fraction(args.s2), Fraction(args.v4))
        s = getattr(c, name)
    elif name == "C2":
        tp = asy.two_point_leading(o)
        s = tp.const + tp.fourth * Fraction(args.v4) + tp.diagonal * Fraction(args.s2)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(name)
    payload = dict(name=name, **s.to_json())
    _emit(args, repr(s), payload)
    return 0


def cmd_rj(args) -> int:
    if args.k is not None:
        val = asy.rj_moment(args.j, args.k)
        want = math.comb(2 * args.k, args.k - args.j) if args.k >= args.j else 0
        payload = {"j": args.j, "k": args.k, "moment": val, "binomial": want}
        _emit(args, f"{val:.12g}", payload)
        return 0
    ys = np.linspace(-2, 2, args.points + 2)[1:-1] if not args.y else np.asarray(args.y)
    vals = asy.rj_eval(args.j, ys)
    rows = [{"y": float(y), f"R{args.j}": float(v)} for y, v in zip(ys, vals)]
    text = "\n".join(f"{r['y']:.12g},{r[f'R{args.j}']:.12g}" for r in rows)
    if args.format == "text":
        text = f"y,R{args.j}\n" + text
    _emit(args, text, rows)
    return 0


def cmd_twopoint(args) -> int:
    if args.y1 is not None:
        g = float(asy.gc2(args.y1, args.y2, float(args.v4), float(args.s2)))
        payload = {"y1": args.y1, "y2": args.y2, "n2_Gc": g}
        if float(args.s2) == 2:
            payload["n2_Gc_resolvent_form"] = float(asy.gc2_kkp(args.y1, args.y2, float(args.v4)))
        _emit(args, f"{g:.15g}", payload)
        return 0
    m1, m2 = args.m
    tp = asy.two_point_leading(max(m1, m2, 2))
    series = tp.coefficient(m1, m2)
    exact = asy.exact_two_point_leading(m1, m2)
    closed = asy.two_point_leading_coefficient(m1, m2)
    const = series.get(asy.MomentMonomial(), Fraction(0))
    ok = series == exact and const == closed
    payload = {
        "m1": m1,
        "m2": m2,
        "series": {str(k): str(v) for k, v in series.items()},
        "exact": {str(k): str(v) for k, v in exact.items()},
        "closed_form": closed,
        "match": ok,
    }
    pretty = " + ".join(f"{v}*{k}" for k, v in series.items()) or "0"
    _emit(args, f"leading coefficient: {pretty.replace('*1', '').replace('v4', 'v~4')}  [{'MATCH' if ok else 'MISMATCH'}]", payload)
    return 0 if ok else 1


def cmd_mc(args) -> int:
    from .montecarlo import SamplerConfig, scorecard

    try:
        ens = _ensemble(args.ensemble)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"--ensemble: {exc}") from None
    if ens.preset_name == "custom":
        raise UsageError("--ensemble: sampling needs a preset law, not a bare moment list")
    try:
        cfg = SamplerConfig(
            n=args.n,
            distribution=ens.preset_name,
            param=float(ens.param),
            diagonal_variance=float(ens.diagonal_second_moment),
            samples=args.samples,
            seed=args.seed,
            batch_count=args.batches,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    card = scorecard(args.sig_list, cfg, connected=not args.raw)
    if args.format == "json":
        print(card.to_json())
    elif args.format == "csv":
        print(card.to_csv(), end="")
    else:
        for r in card.reports:
            flag = "FLAG" if r.z_score is not None and abs(r.z_score) > card.threshold else "ok"
            z = "n/a" if r.z_score is None else f"{r.z_score:.3f}"
            print(f"({','.join(map(str, r.signature))}) est={r.estimate:.6g} se={r.standard_error:.3g} exact={r.exact_value} z={z} {flag}")
    return 0 if card.ok else 1


def cmd_fixtures(args) -> int:
    from .goldens import run_suite

    failures = 0
    rows = []
    for entry, ok, diff in run_suite(args.suite, threads=args.threads, cache_dir=args.cache_dir):
        label = f"{entry.kind} ({entry.signature})"
        rows.append({"entry": label, "pass": ok, "difference": diff.to_text()})
        if args.format == "text":
            print(f"{'PASS' if ok else 'FAIL'}  {label}" + ("" if ok else f"  diff: {diff}"))
        failures += not ok
    if args.format != "text":
        _emit(args, "", rows)
    print(f"{len(rows) - failures}/{len(rows)} fixtures passed", file=sys.stderr)
    return 0 if failures == 0 else 1


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--threads", type=int, default=1, help="worker processes for enumeration")
    common.add_argument("--cache-dir", default=os.environ.get(CACHE_ENV), help=f"disk cache (env {CACHE_ENV})")
    common.add_argument("--max-degree", type=int, default=None, help=f"enumeration cap (default {DEFAULT_CAP})")
    common.add_argument("--allow-large", action="store_true", help="acknowledge a cap above the default")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="wignercorr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    for name, helptext in (("exact", "exact moment <prod tr A^k>"), ("connected", "exact connected correlator")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--sig", type=_sig, required=True, help="trace powers, e.g. 4 or 2,2")
        sp.add_argument("--n", type=int, help="also evaluate at this matrix order")
        sp.add_argument("--ensemble", default="rademacher", help="preset[:param] or JSON file")
        if name == "connected":
            sp.add_argument("--method", choices=("direct", "partition", "checked"), default="checked")

    sp = sub.add_parser("expand", parents=[common], help="1/n expansion of the normalised connected correlator")
    sp.add_argument("--sig", type=_sig, required=True)
    sp.add_argument("--order", type=int, default=None)

    sp = sub.add_parser("diff", parents=[common], help="leading difference between two ensembles")
    sp.add_argument("--sig", type=_sig, required=True)
    sp.add_argument("--ensemble", required=True)
    sp.add_argument("--other", required=True, help="second ensemble")
    sp.add_argument("--j", type=int, default=None)

    sp = sub.add_parser("series", parents=[common], help="generating functions")
    sp.add_argument("--name", choices=("catalan", "tpower", "special", "phi", "S2", "S3", "S4", "C2"), required=True)
    sp.add_argument("--order", type=int, default=12)
    sp.add_argument("--s", type=int, default=2, help="power of T for tpower")
    sp.add_argument("--m", type=int, default=2, help="special edge runs 2m times")
    sp.add_argument("--r", type=int, default=2, help="number of traces for phi")
    sp.add_argument("--z-order", type=int, default=None)
    sp.add_argument("--s2", default="0", help="diagonal variance over v2")
    sp.add_argument("--v4", default="1", help="standardized fourth moment")

    sp = sub.add_parser("rj", parents=[common], help="density-difference kernels")
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--k", type=int, default=None, help="return the y^{2k} moment")
    sp.add_argument("--y", type=float, nargs="*", default=None)
    sp.add_argument("--points", type=int, default=199)

    sp = sub.add_parser("twopoint", parents=[common], help="leading two-point connected correlator")
    sp.add_argument("--m", type=int, nargs=2, metavar=("M1", "M2"), default=(2, 2))
    sp.add_argument("--y1", type=float, default=None)
    sp.add_argument("--y2", type=float, default=None)
    sp.add_argument("--v4", default="3")
    sp.add_argument("--s2", default="0")

    sp = sub.add_parser("mc", parents=[common], help="Monte Carlo scorecard")
    sp.add_argument("--sig", type=_sig, action="append", dest="sig_list", required=True)
    sp.add_argument("--n", type=int, default=12)
    sp.add_argument("--ensemble", default="rademacher", help="rademacher | gaussian[:v2] | uniform[:a] | two_point[:c]")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--batches", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--raw", action="store_true", help="estimate plain moments, not connected parts")

    sp = sub.add_parser("fixtures", parents=[common], help="check the golden tables")
    sp.add_argument("--suite", default="appendix-e")
    return p


HANDLERS = {
    "exact": cmd_exact,
    "connected": lambda a: cmd_exact(a, connected=True),
    "expand": cmd_expand,
    "diff": cmd_diff,
    "series": cmd_series,
    "rj": cmd_rj,
    "twopoint": cmd_twopoint,
    "mc": cmd_mc,
    "fixtures": cmd_fixtures,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.command == "twopoint" and (args.y1 is None) != (args.y2 is None):
        print("wignercorr: error: --y1 and --y2 go together", file=sys.stderr)
        return 2
    try:
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"wignercorr: error: {exc}", file=sys.stderr)
        return 2
    except (ConnectedMismatch, DegenerateVariance) as exc:
        print(f"wignercorr: check failed: {exc}", file=sys.stderr)
        return 1
    except (WignerCorrError, ValueError, KeyError) as exc:
        flag = next((f for t, f in _FLAG_FOR.items() if isinstance(exc, t)), None)
        print(f"wignercorr: error: {f'{flag}: ' if flag else ''}{exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
