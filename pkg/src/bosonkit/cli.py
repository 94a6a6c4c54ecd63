"""Command-line interface: ``bosonkit <unitary|dist|correction|sample|pkm>``.

Exit codes: 0 success, 1 usage error, 2 validation/domain error,
3 quadrature accuracy error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import detectors as det
from .errors import AccuracyError, BosonKitError, ShapeError, UnitarityError
from .ideal import ideal_distribution, parse_pattern
from .interferometer import (
    UNITARITY_TOL,
    beam_splitter,
    dft_unitary,
    haar_random_unitary,
    identity_unitary,
    load_matrix,
    matrix_from_json,
    unitarity_residual,
)
from .quadrature import QuadratureSpec
from .realistic import correction_csv, correction_json, correction_table, realistic_distribution
from .sampling import postselect, sample

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_ACCURACY = 0, 1, 2, 3
DIGITS = 12

DETECTORS = ("ideal", "lossy", "array", "deadtime-mono", "deadtime-exp")
CONFIG_KEYS = (
    "unitary", "input", "detector", "eta", "K", "ratio", "gamma",
    "trials", "seed", "shards", "postselect", "format", "out", "prune", "quad_tol",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{x:.{DIGITS}g}"


# --- argument parsing -----------------------------------------------------------


def parse_unitary_spec(spec: str):
    """``dft:N``, ``haar:N,SEED``, ``bs:T[,PHASE]``, ``identity:N`` or a JSON file path."""
    kind, _, arg = spec.partition(":")
    try:
        if kind == "dft":
            return dft_unitary(int(arg))
        if kind == "haar":
            n, _, seed = arg.partition(",")
            return haar_random_unitary(int(n), int(seed or 0))
        if kind == "bs":
            t, _, phase = arg.partition(",")
            return beam_splitter(float(t), float(phase or 0.0))
        if kind == "identity":
            return identity_unitary(int(arg))
    except ValueError as exc:
        if isinstance(exc, BosonKitError):
            raise
        raise UsageError(f"bad unitary spec {spec!r}: {exc}") from exc
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"unitary spec {spec!r} is neither a known form nor an existing file")
    return load_matrix(path)


def build_detector(cfg: dict) -> det.DetectorModel:
    kind = cfg.get("detector") or "ideal"
    eta = 1.0 if cfg.get("eta") is None else float(cfg["eta"])

    def need(key):
        if cfg.get(key) is None:
            raise UsageError(f"detector {kind!r} needs --{key}")
        return cfg[key]

    if kind == "ideal":
        return det.IdealPNR()
    if kind == "lossy":
        return det.LossyPNR(eta)
    if kind == "array":
        return det.OnOffArray(int(need("K")), eta)
    if kind == "deadtime-mono":
        return det.DeadTimeMono(float(need("ratio")), eta)
    if kind == "deadtime-exp":
        quad = QuadratureSpec(tol=float(cfg["quad_tol"])) if cfg.get("quad_tol") else QuadratureSpec()
        return det.DeadTimeExp(float(need("ratio")), float(need("gamma")), eta, quad)
    raise UsageError(f"unknown detector {kind!r}; choose from {', '.join(DETECTORS)}")


def merge_config(args: argparse.Namespace) -> dict:
    """Config-file values overlaid by any flag given on the command line."""
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(cfg) - set(CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    return cfg


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _experiment(cfg: dict):
    if not cfg.get("unitary"):
        raise UsageError("--unitary is required")
    if not cfg.get("input"):
        raise UsageError("--input is required")
    u = parse_unitary_spec(str(cfg["unitary"]))
    inp = cfg["input"]
    inp = parse_pattern(inp) if isinstance(inp, str) else parse_pattern(",".join(map(str, inp)))
    if len(inp) != u.dim:
        raise ShapeError(f"input pattern has {len(inp)} modes but the unitary has {u.dim}")
    model = build_detector(cfg)
    return u, inp, model


def _distribution(u, inp, model):
    ideal = ideal_distribution(u, inp)
    if isinstance(model, det.IdealPNR):
        return ideal
    return realistic_distribution(u, inp, model, ideal=ideal)


# --- commands -------------------------------------------------------------------


def cmd_unitary(args) -> int:
    if args.validate:
        try:
            obj = json.loads(Path(args.validate).read_text())
            a = matrix_from_json(obj)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read {args.validate}: {exc}") from exc
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"matrix is not square: {a.shape}")
        residual = unitarity_residual(a)
        status = "ok" if residual <= args.tol else "NOT UNITARY"
        print(f"dim={a.shape[0]} residual={residual:.3e} tol={args.tol:.1e} {status}")
        return EXIT_OK if residual <= args.tol else EXIT_DOMAIN
    if args.dft is not None:
        u = dft_unitary(args.dft)
    elif args.haar is not None:
        u = haar_random_unitary(args.haar, args.seed)
    elif args.bs is not None:
        u = beam_splitter(args.bs, args.phase)
    elif args.identity is not None:
        u = identity_unitary(args.identity)
    else:
        raise UsageError("choose one of --dft, --haar, --bs, --identity, --validate")
    _emit(json.dumps(u.to_json()) + "\n", args.out)
    print(f"unitarity residual {unitarity_residual(u.matrix):.3e}", file=sys.stderr)
    return EXIT_OK


def cmd_dist(args) -> int:
    cfg = merge_config(args)
    u, inp, model = _experiment(cfg)
    dist = _distribution(u, inp, model)
    print(f"normalization residual {dist.normalization_residual():+.3e}", file=sys.stderr)
    prune = float(cfg.get("prune") or 0.0)
    shown = {k: p for k, p in dist.entries.items() if p >= prune} if prune > 0 else dist.entries
    if cfg.get("format", "json") == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["pattern", "p"])
        for k, p in shown.items():
            w.writerow([" ".join(map(str, k)), _fmt(p)])
        text = buf.getvalue()
    else:
        obj = dist.to_json(DIGITS)
        obj["detector"] = det.describe(model)
        if prune > 0:
            obj["outcomes"] = [o for o in obj["outcomes"] if tuple(o["pattern"]) in shown]
        text = json.dumps(obj, indent=1) + "\n"
    _emit(text, cfg.get("out"))
    return EXIT_OK


def _sweep_points(kind: str, sweep: str | None, cfg: dict) -> list:
    if sweep is None:
        key = "K" if kind == "array" else "ratio" if kind.startswith("deadtime") else None
        return [cfg.get(key)] if key else [None]
    parts = sweep.split(":")
    try:
        if kind == "array":
            if len(parts) != 2:
                raise ValueError("array sweep is KMIN:KMAX")
            lo, hi = int(parts[0]), int(parts[1])
            return list(range(lo, hi + 1))
        if kind.startswith("deadtime"):
            if len(parts) != 3:
                raise ValueError("dead-time sweep is RMIN:RMAX:POINTS")
            return [float(x) for x in np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))]
    except ValueError as exc:
        raise UsageError(f"bad --sweep {sweep!r}: {exc}") from exc
    raise UsageError(f"detector {kind!r} has no sweep parameter")


def cmd_correction(args) -> int:
    cfg = merge_config(args)
    kind = cfg.get("detector") or "array"
    tables = []
    for x in _sweep_points(kind, args.sweep, cfg):
        point = dict(cfg, detector=kind)
        if kind == "array":
            point["K"] = x
        elif kind.startswith("deadtime"):
            point["ratio"] = x
        tables.append(correction_table(build_detector(point), args.photons))
    text = correction_json(tables, DIGITS) + "\n" if cfg.get("format") == "json" else correction_csv(tables, DIGITS)
    _emit(text, cfg.get("out"))
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = merge_config(args)
    u, inp, model = _experiment(cfg)
    dist = _distribution(u, inp, model)
    trials = int(cfg.get("trials") or 100_000)
    seed = int(cfg.get("seed") or 0)
    report = sample(dist, trials, seed, shards=int(cfg.get("shards") or 1))
    if cfg.get("postselect"):
        report = postselect(report, sum(inp))
        print(f"acceptance {_fmt(report.acceptance)} +- {_fmt(report.acceptance_stderr)}", file=sys.stderr)
    text = report.to_csv(DIGITS) if cfg.get("format") == "csv" else report.dumps() + "\n"
    _emit(text, cfg.get("out"))
    return EXIT_OK


def cmd_pkm(args) -> int:
    cfg = merge_config(args)
    table = det.cond_prob_table(build_detector(cfg), args.max_m)
    text = table.dumps(DIGITS) + "\n" if cfg.get("format") == "json" else table.to_csv(DIGITS)
    _emit(text, cfg.get("out"))
    return EXIT_OK


# --- parser ---------------------------------------------------------------------


def _add_detector_args(p):
    p.add_argument("--detector", choices=DETECTORS)
    p.add_argument("--eta", type=float, help="detection efficiency in [0, 1]")
    p.add_argument("--K", type=int, help="number of on/off detectors in the array")
    p.add_argument("--ratio", type=float, help="dead time / measurement window")
    p.add_argument("--gamma", type=float, help="decay rate of the exponential mode")
    p.add_argument("--quad-tol", dest="quad_tol", type=float, help="quadrature accuracy target")


def _add_output_args(p, default_format="json"):
    p.add_argument("--format", choices=("json", "csv"), help=f"output format (default {default_format})")
    p.add_argument("--out", help="output path (default stdout)")


def _add_experiment_args(p):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--unitary", help="dft:N | haar:N,SEED | bs:T[,PHASE] | identity:N | FILE")
    p.add_argument("--input", help='input photon pattern, e.g. "1,1,0"')
    _add_detector_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bosonkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("unitary", help="generate or validate an interferometer matrix")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dft", type=int, metavar="N")
    g.add_argument("--haar", type=int, metavar="N")
    g.add_argument("--bs", type=float, metavar="T", help="beam splitter transmittance amplitude")
    g.add_argument("--identity", type=int, metavar="N")
    g.add_argument("--validate", metavar="FILE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=UNITARITY_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_unitary)

    p = sub.add_parser("dist", help="ideal or realistic output distribution")
    _add_experiment_args(p)
    _add_output_args(p)
    p.add_argument("--prune", type=float, help="hide outcomes below this probability")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("correction", help="correction coefficients, optionally swept")
    p.add_argument("--config")
    _add_detector_args(p)
    p.add_argument("-n", "--photons", type=int, required=True)
    p.add_argument("--sweep", help="KMIN:KMAX for arrays, RMIN:RMAX:POINTS for dead time")
    _add_output_args(p, "csv")
    p.set_defaults(func=cmd_correction)

    p = sub.add_parser("sample", help="sample outcomes, optionally postselected")
    _add_experiment_args(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--shards", type=int)
    p.add_argument("--postselect", action="store_true")
    _add_output_args(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("pkm", help="dump the P(k|m) table of a detector")
    p.add_argument("--config")
    _add_detector_args(p)
    p.add_argument("--max-m", dest="max_m", type=int, default=12)
    _add_output_args(p, "csv")
    p.set_defaults(func=cmd_pkm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bosonkit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(
            f"bosonkit: accuracy error: {exc} (estimate {exc.estimate:.6g}, bound {exc.error_bound:.2e})",
            file=sys.stderr,
        )
        return EXIT_ACCURACY
    except UnitarityError as exc:
        print(f"bosonkit: validation error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except BosonKitError as exc:
        print(f"bosonkit: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
