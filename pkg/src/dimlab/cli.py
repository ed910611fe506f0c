"""``dimlab`` command line.

Exit codes: 0 success, 1 rejected certificate or failed verification/audit,
2 usage error.  Human-readable messages go to stderr; machine output goes
to the ``--out`` files (or stdout where a command has no ``--out``).  Every
run that writes files also writes ``<out>.manifest.json``.
"""
from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .capacity import (GridSubset, ParameterError, ResolutionError, estimate_dimension,
                       parse_scales)
from .exact import as_fraction
from .functions import DomainError, GridError

DEFAULT_SCALES = "2^-2..2^-16"
EMPIRICAL_BANNER = "EMPIRICAL: floating-point mode; nothing in this run is exactly certified"
PROXY_BANNER = ("inputs are deterministic proxy functions; typical continuous functions "
                "form a residual set, which carries no distribution to sample from")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers

def _say(*parts) -> None:
    print(*parts, file=sys.stderr)


def _number(text: str, float_mode: bool = False):
    try:
        if float_mode:
            return float(Fraction(text)) if "/" in text else float(text)
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse number {text!r}") from exc


def _default_jobs() -> int:
    raw = os.environ.get("DIMLAB_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _versions() -> dict:
    import mpmath
    import numpy
    from .rng import VERSION as RNG_VERSION
    return {"dimlab": __version__, "python": platform.python_version(),
            "numpy": numpy.__version__, "mpmath": mpmath.__version__, "rng": RNG_VERSION}


def _write_manifest(args, out: Path, inputs=(), outputs=(), extra=None, empirical=False) -> None:
    from .serialize import dump_json, file_sha256
    data = {
        "command": args.command,
        "argv": list(getattr(args, "_argv", [])),
        "options": {k: v for k, v in sorted(vars(args).items())
                    if not k.startswith("_") and k not in ("func",) and _jsonable(v)},
        "seed": getattr(args, "seed", None),
        "mode": "EMPIRICAL" if empirical else "exact",
        "inputs": {str(p): file_sha256(p) for p in inputs},
        "outputs": {str(p): file_sha256(p) for p in outputs},
        "versions": _versions(),
    }
    if empirical:
        data["banner"] = EMPIRICAL_BANNER
    if extra:
        data.update(extra)
    dump_json(data, Path(str(out) + ".manifest.json"))


def _jsonable(v) -> bool:
    return v is None or isinstance(v, (str, int, float, bool, list))


# --------------------------------------------------------------------------
# subcommands

def cmd_generate(args) -> int:
    from .generator import GeneratorSpec, generate
    from .serialize import dump_json, sampled_to_json, write_sampled_csv
    spec = GeneratorSpec.parse(args.family, seed=args.seed, n=args.n)
    f = generate(spec)
    out = Path(args.out)
    if out.suffix.lower() == ".json":
        dump_json({"spec": spec.to_json(), **sampled_to_json(f)}, out)
    else:
        write_sampled_csv(f, out)
    _write_manifest(args, out, outputs=[out], extra={"spec": spec.to_json(), "note": PROXY_BANNER})
    _say(f"wrote {spec.n} samples of {spec.describe()} to {out}")
    return 0


def _center(args):
    from .construction import center_from_samples, center_from_spec
    from .serialize import read_sampled
    src = args.f0
    if Path(src).is_file():
        return center_from_samples(read_sampled(src), f"samples:{Path(src).name}"), [Path(src)]
    return center_from_spec(src, n=args.center_n, seed=args.seed), []


def cmd_construct(args) -> int:
    from .construction import BVParams, HolderParams, build_bv_certificate, build_holder_certificate
    from .serialize import dump_json
    from .verify import certificate_to_json
    fm = args.float
    center, inputs = _center(args)
    r0 = _number(args.r0)
    if args.mode == "holder":
        params = HolderParams(_number(args.alpha, fm), args.N, args.M, r0, _number(args.K))
        cert = build_holder_certificate(params, center)
    else:
        if fm:
            raise UsageError("--float applies to the Hölder construction only")
        params = BVParams(args.N, args.M, r0, _number(args.V))
        cert = build_bv_certificate(params, center)
    out = Path(args.out)
    dump_json(certificate_to_json(cert), out)
    _write_manifest(args, out, inputs, [out], empirical=cert.float_mode,
                    extra={"plan": cert.plan.to_json(), "accepted": cert.accepted})
    if cert.float_mode:
        _say(EMPIRICAL_BANNER)
    if not center.certified:
        _say("warning: the centre's modulus is a grid estimate, not a certified bound")
    _say(f"plan m={cert.plan.m} k={cert.plan.k}; "
         f"{'accepted' if cert.accepted else 'REJECTED'}; wrote {out}")
    for e in cert.ledger:
        if not e.verdict:
            _say(f"  failed: {e.id} ({e.relation})")
    return 0 if cert.accepted else 1


def _load_certificate(path):
    from .verify import certificate_from_json
    try:
        data = json.loads(Path(path).read_text())
        return certificate_from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read certificate {path}: {exc}") from exc


def cmd_verify(args) -> int:
    from .verify import verify_certificate
    cert = _load_certificate(args.certificate)
    checks = verify_certificate(cert)
    ok = all(c.ok for c in checks)
    if cert.float_mode:
        _say(EMPIRICAL_BANNER)
    for c in checks:
        if args.verbose or not c.ok:
            _say(f"{'ok  ' if c.ok else 'FAIL'} {c.id}: {c.detail}")
    _say(f"{sum(c.ok for c in checks)}/{len(checks)} checks passed; "
         f"certificate {'VERIFIED' if ok else 'NOT verified'}")
    print(json.dumps({"verified": ok, "failed": [c.id for c in checks if not c.ok]}))
    return 0 if ok else 1


def cmd_audit(args) -> int:
    from .audit import (AdversaryError, Adversary, default_battery, empirical_agreement_audit,
                        standard_probes)
    from .serialize import piecewise_from_json
    cert = _load_certificate(args.certificate)
    probes = standard_probes(cert, args.random_probes, args.seed)
    inputs = [Path(args.certificate)]
    if Path(args.battery).is_file():
        data = json.loads(Path(args.battery).read_text())
        battery = [Adversary(a.get("id", f"A{i:04d}"), a.get("kind", "file"),
                             piecewise_from_json(a["function"])) for i, a in enumerate(data)]
        inputs.append(Path(args.battery))
    else:
        try:
            size = int(args.battery)
        except ValueError as exc:
            raise UsageError("--battery takes a size or a JSON file of adversaries") from exc
        battery = default_battery(cert, probes, size, args.seed)
    try:
        report = empirical_agreement_audit(cert, battery, probes, jobs=args.jobs)
    except AdversaryError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    out.write_text(report.to_csv())
    worst = max((r.max_meets if cert.kind == "holder" else r.total) for r in report.rows)
    cost = max(r.cover_cost for r in report.rows)
    summary = {"pairs": len(report.rows), "violations": len(report.violations),
               "worst_count": worst, "count_bound": report.bound, "max_cover_cost": cost}
    _write_manifest(args, out, inputs, [out], extra={"summary": summary},
                    empirical=cert.float_mode)
    label = "max meets per block" if cert.kind == "holder" else "max sum of l_i"
    _say(f"{len(report.rows)} pairs; {label} {worst} (bound {report.bound:g}); "
         f"max cover cost {cost:.6g}; violations {len(report.violations)}")
    return 0 if report.ok else 1


def cmd_search(args) -> int:
    from .agreement import (check_witness, max_bv_subset, max_holder_subset,
                            max_monotone_subset)
    from .serialize import dump_json, read_sampled
    f = read_sampled(args.input)
    fm = args.float
    if args.cls == "holder":
        if args.alpha is None or args.K is None:
            raise UsageError("--class holder needs --alpha and --K")
        w = max_holder_subset(f, _number(args.alpha, fm), _number(args.K, fm), args.budget)
    elif args.cls == "bv":
        if args.V is None:
            raise UsageError("--class bv needs --V")
        w = max_bv_subset(f, _number(args.V, fm))
    else:
        w = max_monotone_subset(f)
    checks = check_witness(w)
    out = Path(args.out)
    dump_json(w.to_json(), out)
    _write_manifest(args, out, [Path(args.input)], [out], empirical=not w.exact,
                    extra={"size": w.size, "search_mode": w.mode, "note": PROXY_BANNER})
    dim = "n/a" if w.dimension is None else f"{w.dimension.slope:.4f}"
    _say(f"|S| = {w.size} of {f.n} ({w.mode}); hull box dimension {dim}")
    bad = [c.id for c in checks if not c.ok]
    if bad:
        _say(f"witness self-check failed: {', '.join(bad)}")
        return 1
    return 0


def cmd_dimension(args) -> int:
    from .serialize import dump_json
    try:
        data = json.loads(Path(args.input).read_text())
        if isinstance(data, dict) and data.get("format") == "dimlab-witness/1":
            from .agreement import witness_cells
            cells = witness_cells(int(data["n"]), data["indices"])
        else:
            cells = GridSubset.from_json(data)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read cell set {args.input}: {exc}") from exc
    if args.scales:
        scales = parse_scales(args.scales)
    else:
        scales = [s for s in parse_scales(DEFAULT_SCALES) if s >= cells.resolution]
    est = estimate_dimension(cells, scales)
    text = dump_json(est.to_json())
    outputs = []
    if args.out:
        Path(args.out).write_text(text)
        outputs.append(Path(args.out))
    else:
        sys.stdout.write(text)
    if args.csv:
        rows = ["scale,count"] + [f"{s!r},{c}" for s, c in est.csv_rows()]
        Path(args.csv).write_text("\n".join(rows) + "\n")
        outputs.append(Path(args.csv))
    if outputs:
        _write_manifest(args, outputs[0], [Path(args.input)], outputs)
    _say(f"box-counting slope {est.slope:.6f} (rms residual {est.residual:.3g}); "
         "an upper bound for Hausdorff dimension, not an estimate of it")
    return 0


def cmd_probe(args) -> int:
    from .agreement import probe_csv, probe_medians, threshold_probe
    params = [p.strip() for p in args.params.split(",") if p.strip()] if args.params else []
    ns = [int(n) for n in str(args.n).split(",")]
    rows = threshold_probe(args.family, args.cls, params, args.trials, args.seed, ns,
                           args.K, args.budget, args.jobs)
    out = Path(args.out)
    out.write_text(probe_csv(rows))
    medians = probe_medians(rows)
    _write_manifest(args, out, outputs=[out], extra={"medians": medians, "note": PROXY_BANNER,
                                                     "exploratory": True})
    _say(PROXY_BANNER)
    for m in medians:
        _say(f"{m['class']} param={m['param']} n={m['n']}: median |S|={m['median_size']}, "
             f"median box dim={m['median_box_dim']:.4f} (reference line {m['reference']:.4g})")
    failed = sum(r.mode == "failed" for r in rows)
    if failed:
        _say(f"{failed} trial(s) failed and are marked in the report")
    return 0


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults")
    common.add_argument("--jobs", type=int, default=_default_jobs(),
                        help="worker processes for audit and probe (default: $DIMLAB_JOBS or 1)")

    p = argparse.ArgumentParser(prog="dimlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dimlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="sample a probe function")
    g.add_argument("--family", default="takagi:terms=12", help="family[:key=value,...]")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=4097, help="grid size, a power of two plus one")
    g.add_argument("--out", required=True, help=".csv or .json")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("construct", parents=[common], help="build a staircase certificate")
    c.add_argument("--mode", choices=["holder", "bv"], default="holder")
    c.add_argument("--alpha", default="1/2")
    c.add_argument("--N", type=int, default=2)
    c.add_argument("--M", type=int, default=1)
    c.add_argument("--r0", default="1")
    c.add_argument("--K", default="1")
    c.add_argument("--V", default="1")
    c.add_argument("--f0", default="constant:c=0", help="generator spec or a samples file")
    c.add_argument("--center-n", type=int, default=257, help="grid size for sampled centres")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--float", action="store_true", help="floating-point alpha (empirical)")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    v.add_argument("certificate")
    v.add_argument("-v", "--verbose", action="store_true")
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("audit", parents=[common], help="audit a certificate against adversaries")
    a.add_argument("certificate")
    a.add_argument("--battery", default="200", help="battery size or a JSON file of adversaries")
    a.add_argument("--random-probes", type=int, default=0)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_audit)

    s = sub.add_parser("search", parents=[common], help="largest in-class agreement subset")
    s.add_argument("--class", dest="cls", choices=["holder", "bv", "monotone"], required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--alpha")
    s.add_argument("--K")
    s.add_argument("--V")
    s.add_argument("--budget", type=int, default=20, help="largest grid searched exactly")
    s.add_argument("--float", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_search)

    d = sub.add_parser("dimension", parents=[common], help="box-counting slope of a cell set")
    d.add_argument("--input", required=True)
    d.add_argument("--scales", default=None,
                   help="e.g. 2^-2..2^-10 or a comma list (default: 1/4 down to the resolution)")
    d.add_argument("--csv")
    d.add_argument("--out")
    d.set_defaults(func=cmd_dimension)

    r = sub.add_parser("probe", parents=[common], help="threshold probe over parameters and trials")
    r.add_argument("--class", dest="cls", choices=["holder", "bv", "monotone"], required=True)
    r.add_argument("--params", default="", help="comma list of alpha or V values")
    r.add_argument("--trials", type=int, default=5)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--family", default="midpoint_displacement:hurst=1/2")
    r.add_argument("--n", default="129", help="grid size(s), comma separated")
    r.add_argument("--K", default="1")
    r.add_argument("--budget", type=int, default=20)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_probe)
    return p


def _apply_config(parser, argv):
    """Re-parse with defaults taken from ``--config`` (flat, or keyed by subcommand)."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    merged = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
    merged.update(cfg.get(args.command, {}))
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(merged) - known
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    sub.set_defaults(**merged)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    from .construction import ConstructionError
    from .generator import GeneratorError
    from .agreement import PreconditionError
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        args._argv = argv
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else 2
    except (UsageError, ConstructionError, GeneratorError, ParameterError, PreconditionError,
            DomainError, GridError, ResolutionError) as exc:
        _say(f"dimlab: error: {exc}")
        return 2
    except FileNotFoundError as exc:
        _say(f"dimlab: error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
