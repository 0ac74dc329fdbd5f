"""Command-line entry point: ``twoway <subcommand> [options]``.

Every subcommand validates its arguments before computing anything and
writes its files atomically (temp file then rename), so a failed run leaves
no partial output.  Without ``--out`` the primary result goes to stdout.

Exit codes: 0 ok, 1 validation error, 2 search budget exceeded, 3 a check
reported ``pass=false``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import gaussian_bounds as gb
from . import oracle as orc
from . import rate_region as rr
from . import schemes as sc
from . import sym_curves as sy
from .ld_core import LDNetwork, TableLaw, ld_law, modk_law, multiplier_ic_law

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_FAIL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# -- parsing helpers --------------------------------------------------------

def parse_assignments(text: str | None) -> dict[str, Fraction]:
    """``"n12=3,n32=1"`` -> ``{"n12": 3, "n32": 1}`` (values may be ``num/den``)."""
    out: dict[str, Fraction] = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"expected name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = Fraction(v.strip())
        except ValueError:
            raise UsageError(f"bad number {v!r} for {k}") from None
    return out


def parse_fractions(text: str) -> list[Fraction]:
    """Comma list of rationals, or ``lo:hi:count`` with exact equispaced steps."""
    try:
        if ":" in text:
            lo, hi, cnt = text.split(":")
            lo, hi, cnt = Fraction(lo), Fraction(hi), int(cnt)
            if cnt < 1:
                raise UsageError("grid needs at least one point")
            if cnt == 1:
                return [lo]
            return [lo + (hi - lo) * k / (cnt - 1) for k in range(cnt)]
        vals = [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise UsageError(f"bad number list {text!r}: {e}") from None
    if not vals:
        raise UsageError("empty grid")
    return vals


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:count`` (inclusive, equispaced) or a comma list."""
    try:
        if ":" in text:
            lo, hi, cnt = text.split(":")
            cnt = int(cnt)
            if cnt < 1:
                raise UsageError("grid needs at least one point")
            return np.linspace(float(lo), float(hi), cnt)
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise UsageError(f"bad grid {text!r}: {e}") from None
    if not vals:
        raise UsageError("empty grid")
    return np.asarray(vals)


def read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from None


def _int_gains(values: dict, names: tuple[str, ...]) -> dict[str, int]:
    missing = [n for n in names if n not in values]
    if missing:
        raise UsageError(f"missing gains {missing}")
    extra = sorted(set(values) - set(names))
    if extra:
        raise UsageError(f"unknown gains {extra}")
    out = {}
    for n in names:
        v = Fraction(values[n])
        if v.denominator != 1 or v < 0:
            raise UsageError(f"gain {n} must be a nonnegative integer, got {values[n]}")
        out[n] = int(v)
    return out


def _gains_arg(args, names):
    vals: dict = {}
    if getattr(args, "params", None):
        obj = read_json(args.params)
        if not isinstance(obj, dict):
            raise UsageError("params file must hold a JSON object")
        vals.update(obj)
    vals.update(parse_assignments(getattr(args, "gains", None)))
    return _int_gains(vals, names)


# -- output -----------------------------------------------------------------

def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, files: dict[str, str], primary: str) -> None:
    """Write ``files`` into ``--out`` (a directory), or print the primary one."""
    if args.out is None:
        sys.stdout.write(files[primary])
        return
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise UsageError(f"--out {out} exists and is not a directory")
    for name, text in files.items():
        atomic_write(out / name, text)


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, Fraction):
        return rr.frac_str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


# -- subcommands ------------------------------------------------------------

REGION_GAINS = {
    "ld-macbc": ("n12", "n32", "n21", "n23"),
    "ld-z": ("n12", "n32", "n34", "n43", "n23", "n21"),
    "ld-ic": ("n12", "n34", "n32", "n14", "n21", "n43", "n23", "n41"),
    "ld-ic-sym": ("p", "q"),
}


def build_region(args) -> rr.RateRegion:
    m = args.model
    if m == "mod2-macbc":
        return rr.region_mod2_macbc()
    if m == "modk":
        if args.kappa is None or args.kappa < 2:
            raise UsageError("modk needs --kappa >= 2")
        return rr.region_modk(args.topology, args.kappa)
    g = _gains_arg(args, REGION_GAINS[m])
    ctor = {"ld-macbc": rr.region_ld_macbc, "ld-z": rr.region_ld_z,
            "ld-ic": rr.region_ld_ic, "ld-ic-sym": rr.region_ld_ic_sym}[m]
    if m == "ld-ic-sym" and g["p"] < 1:
        raise UsageError("p must be at least 1")
    return ctor(**g)


def cmd_region(args) -> int:
    region = build_region(args)
    doc = region.to_json()
    doc["vertex_count"] = len(region.vertices())
    files = {"region.json": dumps(doc), "vertices.csv": region.vertices_csv()}
    emit(args, files, "vertices.csv" if args.format == "csv" else "region.json")
    return EXIT_OK


def cmd_curve(args) -> int:
    alphas = parse_fractions(args.alphas) if args.alphas else sy.default_grid()
    if any(a < 0 for a in alphas):
        raise UsageError("alpha must be nonnegative")
    rows = sy.sweep_fig_curves(alphas)
    files = {"curves.csv": sy.curves_csv(rows), "curves.json": sy.curves_json(rows) + "\n"}
    emit(args, files, "curves.csv" if args.format == "csv" else "curves.json")
    return EXIT_OK


def cmd_gaps(args) -> int:
    if args.snr is not None or args.inr is not None:
        if args.snr is None or args.inr is None:
            raise UsageError("--snr and --inr go together")
        p = gb.GaussianSymParams(args.snr, args.inr)
        entries = gb.gap_report(p, args.refined)
        doc = {"snr": args.snr, "inr": args.inr, "regime": gb.regime(p).name,
               "entries": [gb.to_jsonable(e) for e in entries],
               "max_gap": max(e.gap for e in entries),
               "pass": all(e.passed for e in entries)}
        emit(args, {"gap_point.json": dumps(doc)}, "gap_point.json")
        return EXIT_OK if doc["pass"] else EXIT_FAIL
    snr = parse_grid(args.snr_grid)
    inr = parse_grid(args.inr_grid)
    sweep = gb.gap_sweep(snr, inr, args.refined)
    files = {"gaps.csv": sweep.to_csv(), "gaps_summary.json": sweep.to_json() + "\n"}
    emit(args, files, "gaps.csv" if args.format == "csv" else "gaps_summary.json")
    print(f"gaps: {sweep.summary['rows']} rows, {sweep.failures} failures", file=sys.stderr)
    return EXIT_OK if sweep.failures == 0 else EXIT_FAIL


def _network_arg(args, names, builder):
    if args.network:
        try:
            return LDNetwork.from_json(read_json(args.network))
        except (KeyError, TypeError) as e:
            raise UsageError(f"malformed network file: {e}") from None
    return builder(*_gains_arg(args, names).values())


def _target(args, coords) -> dict[str, Fraction]:
    t = parse_assignments(args.target)
    bad = sorted(set(t) - set(coords))
    if bad:
        raise UsageError(f"unknown rates {bad}; expected a subset of {list(coords)}")
    if any(v < 0 for v in t.values()):
        raise UsageError("target rates must be nonnegative")
    return t


def _payloads(target, L):
    sizes = {}
    for c, r in target.items():
        bits = r * L
        if bits.denominator != 1:
            raise UsageError(f"rate {c}={r} needs a blocklength multiple of {r.denominator}")
        sizes["M" + c[1:]] = int(bits)
    return sizes


def run_scheme(args) -> sc.SchemeRun:
    if args.scheme == "macbc":
        net = _network_arg(args, REGION_GAINS["ld-macbc"], sc.macbc_network)
        target = _target(args, rr.MACBC_COORDS)
        if args.share:
            a, b = parse_fractions(args.share)
            cfg = sc.TimeShareConfig(a, b)
        else:
            cfg = sc.plan_macbc(net, target)
        L = args.blocklength or cfg.blocklength
        return sc.run_macbc_timeshare(net, cfg, _payloads(target, L), L, seed=args.seed)
    if args.scheme == "z":
        net = _network_arg(args, REGION_GAINS["ld-z"], sc.z_network)
        target = _target(args, rr.Z_COORDS)
        cfg = sc.plan_z_point(net, target)
        L = args.blocklength or cfg.blocklength
        return sc.run_z_timeshare(net, cfg, _payloads(target, L), L, seed=args.seed)
    if args.scheme == "ic":
        if args.p is None or args.q is None:
            raise UsageError("ic needs --p and --q")
        params = sy.SymLDParams(args.p, args.q)
        tgt = parse_fractions(args.target)[0] if args.target else None
        return sc.run_ic_symmetric(params, tgt, self_gain=args.self_gain, seed=args.seed)
    return sc.run_routing_demo(args.k, args.blocklength or 3, args.mirrored, seed=args.seed)


def cmd_simulate(args) -> int:
    run = run_scheme(args)
    result = {"scheme": args.scheme, "label": run.label, "status": run.status,
              "blocklength": run.blocklength, "non_adaptive": run.non_adaptive,
              "achieved_rates": run.achieved_rates, "notes": run.notes,
              "network": run.network.to_json(),
              "payloads": {m: "".join(map(str, b)) for m, b in sorted(run.payloads.items())}}
    files = {"transcript.jsonl": run.transcript_jsonl(), "run.json": dumps(result)}
    emit(args, files, "run.json" if args.format == "json" else "transcript.jsonl")
    print(run.status, file=sys.stderr)
    return EXIT_OK if run.passed else EXIT_FAIL


BUILTIN_CHANNELS = {
    "mod2-macbc": ("macbc", lambda: modk_law(2, "macbc")),
    "mod2-z": ("z", lambda: modk_law(2, "z")),
    "mod2-ic": ("ic", lambda: modk_law(2, "ic")),
    "multiplier-ic": ("ic", multiplier_ic_law),
    "routing": ("ic", lambda: ld_law(sc.routing_network(1))),
}


def _oracle_inputs(args):
    if args.channel:
        model, make = BUILTIN_CHANNELS[args.channel]
        law = make()
        if args.model and args.model != model:
            raise UsageError(f"channel {args.channel} is a {model} channel")
    else:
        if not args.law or not args.model:
            raise UsageError("give --channel, or --law FILE together with --model")
        try:
            law = TableLaw.from_json(read_json(args.law))
        except (KeyError, TypeError, ValueError) as e:
            raise UsageError(f"malformed law file: {e}") from None
        model = args.model
    try:
        sizes = [int(s) for s in args.sizes.split(",")]
    except ValueError:
        raise UsageError(f"bad --sizes {args.sizes!r}") from None
    msgs = orc.MODEL_MESSAGES[model]
    if len(sizes) == 1:
        sizes = sizes * len(msgs)
    orc._check_inputs(law, model, args.n, sizes)
    return law, model, tuple(sizes)


def _cache_path(args, key: str) -> Path | None:
    if args.no_cache:
        return None
    base = Path(args.cache_dir) if args.cache_dir else Path.home() / ".cache" / "twoway-oracle"
    return base / f"{key}.json"


def cmd_oracle(args) -> int:
    law, model, sizes = _oracle_inputs(args)
    classes = orc.CLASSES if args.cls == "all" else (args.cls,)
    key = orc.law_hash(law, model, args.n, list(sizes), list(classes), args.budget)
    cache = _cache_path(args, key)
    if cache is not None and cache.exists():
        text = cache.read_text()
    else:
        try:
            if args.cls == "all":
                cmp = orc.compare_classes(law, model, args.n, sizes, args.budget, jobs=args.jobs)
                doc = cmp.to_json()
            else:
                reg = orc.enumerate_zero_error(law, model, args.n, sizes, args.cls,
                                               args.budget, jobs=args.jobs)
                doc = reg.to_json()
        except orc.BudgetExceeded as e:
            part = e.partial.to_json() if e.partial else None
            print(f"budget exceeded: {e}", file=sys.stderr)
            if part is not None:
                print(json.dumps({"partial": part}, sort_keys=True), file=sys.stderr)
            return EXIT_BUDGET
        text = dumps(doc)
        if cache is not None:
            atomic_write(cache, text)
    emit(args, {"oracle.json": text}, "oracle.json")
    return EXIT_OK


def cmd_macbc_gap(args) -> int:
    m = gb.MacBcParams(args.p1, args.p2, args.p3, args.n1, args.n2, args.n3)
    if args.alphas < 2:
        raise UsageError("--alphas needs at least 2 points")
    rep = gb.macbc_bounds(m, np.linspace(0.0, 1.0, args.alphas))
    doc = rep.to_dict()
    doc["params"] = {k: getattr(m, k) for k in ("p1", "p2", "p3", "n1", "n2", "n3")}
    emit(args, {"macbc_gap.json": dumps(doc)}, "macbc_gap.json")
    print(f"mac gap {rep.mac_gap:.6f}, max bc gap {float(rep.bc_gap.max()):.6f}: "
          f"{'pass' if rep.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


# -- parser -----------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, top: bool) -> None:
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--out", default=d(None), help="output directory (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"))
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--jobs", type=int, default=d(1))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twoway", description="Two-way network capacity toolkit.")
    _global_flags(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, top=False)
        p.set_defaults(func=func)
        return p

    p = add("region", cmd_region, "capacity region H-rep and vertices")
    p.add_argument("model", choices=("mod2-macbc", "modk", *REGION_GAINS))
    p.add_argument("--kappa", type=int)
    p.add_argument("--topology", choices=("macbc", "z", "ic"), default="macbc")
    p.add_argument("--gains", help="comma list name=value, e.g. n12=3,n32=1,n21=2,n23=2")
    p.add_argument("--params", help="JSON file of gains")

    p = add("curve", cmd_curve, "normalized symmetric capacity curves")
    p.add_argument("--alphas", help="comma list of rationals or lo:hi:count (default k/12, k=0..36)")

    p = add("gaps", cmd_gaps, "Gaussian constant-gap sweep")
    p.add_argument("--snr-grid", default="0:60:50", help="dB grid lo:hi:count or list")
    p.add_argument("--inr-grid", default="0:60:50", help="dB grid lo:hi:count or list")
    p.add_argument("--snr", type=float, help="single linear SNR (with --inr)")
    p.add_argument("--inr", type=float)
    p.add_argument("--refined", action="store_true", help="add the partial-adaptation entries")

    p = add("simulate", cmd_simulate, "run a deterministic coding scheme")
    p.add_argument("scheme", choices=("macbc", "z", "ic", "routing"))
    p.add_argument("--gains")
    p.add_argument("--params")
    p.add_argument("--network", help="LDNetwork JSON file")
    p.add_argument("--target", help="rates, e.g. R12=1,R32=1 (ic: per-user rate)")
    p.add_argument("--share", help="macbc time shares a,b")
    p.add_argument("--blocklength", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--self-gain", type=int)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--mirrored", action="store_true")

    p = add("oracle", cmd_oracle, "exhaustive zero-error feasibility search")
    p.add_argument("--channel", choices=sorted(BUILTIN_CHANNELS))
    p.add_argument("--law", help="TableLaw JSON file")
    p.add_argument("--model", choices=tuple(orc.MODEL_MESSAGES))
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--sizes", default="2", help="max size per message (one value or a list)")
    p.add_argument("--class", dest="cls", choices=(*orc.CLASSES, "all"), default="all")
    p.add_argument("--budget", type=int, default=orc.DEFAULT_BUDGET)
    p.add_argument("--cache-dir")
    p.add_argument("--no-cache", action="store_true")

    p = add("macbc-gap", cmd_macbc_gap, "Gaussian MAC/BC half-bit check")
    for name in ("p1", "p2", "p3", "n1", "n2", "n3"):
        p.add_argument(f"--{name}", type=float, default=1.0)
    p.add_argument("--alphas", type=int, default=101, help="power-split grid size")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be positive")
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"twoway {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
