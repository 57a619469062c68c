"""Command line entry point.

Exit codes: 0 success, 1 bad input file, 2 usage error, 3 exclusion violated or
unsatisfiable, 4 solver inconsistency, 130 interrupted.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .benchgen import (CSV_COLUMNS, MODELS, InstanceConfig, cell_seed, make_instance, metrics,
                       run_instance)
from .cbn import validate
from .disentangle import (DEFAULT_EPSILON, TableOracle, disentangle_finite,
                          disentangle_oracle_report)
from .errors import (ExclusionUnsatisfiable, ExclusionViolated, Inconsistent, IntermixError)
from .estimate import (DEFAULT_DELTA, FrequencyOracle, ancestral_sample, mixture_sample,
                       mle_cpds, spawn)
from .formats import (dump_json, load_json, load_net, load_samples, load_tupleset,
                      mixture_table_from_dict, save_net, save_samples, save_tupleset)
from .intervene import check_exclusion

log = logging.getLogger("intermix")

EXIT_INPUT = 1
EXIT_EXCLUSION = 3
EXIT_INCONSISTENT = 4
EXIT_INTERRUPTED = 130

FULL_GRID = "4,8,12x2^4..2^20"


class UsageError(Exception):
    pass


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(path, command: str, args: argparse.Namespace, inputs, outputs, started,
                   **extra) -> None:
    config = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "started": started,
        "finished": _now(),
    }
    manifest.update(extra)
    dump_json(manifest, path)


def _resolve_seed(args) -> None:
    env = os.environ.get("DISENTANGLE_SEED")
    if env is not None and hasattr(args, "seed"):
        args.seed = int(env)


def parse_grid(spec: str) -> tuple[list[int], list[int]]:
    """``"4,8x2^4..2^6,1000"`` -> ([4, 8], [16, 32, 64, 1000])."""
    if spec == "full":
        spec = FULL_GRID
    try:
        ns, ms = spec.split("x")
        Ns = [int(n) for n in ns.split(",")]
        Ms = []
        for part in ms.split(","):
            m = re.fullmatch(r"2\^(\d+)\.\.2\^(\d+)", part)
            if m:
                Ms.extend(2 ** e for e in range(int(m.group(1)), int(m.group(2)) + 1))
            elif part.startswith("2^"):
                Ms.append(2 ** int(part[2:]))
            else:
                Ms.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}; expected e.g. 4,8x2^4..2^10")
    if not Ns or not Ms or min(Ns) < 1 or min(Ms) < 1:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}")
    return Ns, Ms


def positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def cardinality(s: str) -> int:
    v = int(s)
    if v < 2:
        raise argparse.ArgumentTypeError(f"cardinality must be >= 2, got {v}")
    return v


def positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def cmd_gen(args) -> int:
    started = _now()
    cfg = InstanceConfig(N=args.nodes, model=args.model, k=args.cardinality,
                         cpd_alpha=args.alpha, seed=args.seed)
    net, ts, _, _ = make_instance(cfg)
    if args.exact:
        net, ts = net.to_exact(args.exact), ts.to_exact(args.exact)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    net_path, ts_path = out / "net.json", out / "tuples.json"
    save_net(net, net_path)
    save_tupleset(ts, ts_path)
    write_manifest(out / "manifest.json", "gen", args, [], [net_path, ts_path], started)
    print(f"wrote {net_path} and {ts_path} ({len(ts)} tuples)")
    return 0


def cmd_sample(args) -> int:
    started = _now()
    net = load_net(args.net)
    inputs = [args.net]
    if args.tuples:
        ts = load_tupleset(args.tuples)
        samples = mixture_sample(net, ts, args.seed, args.samples)
        inputs.append(args.tuples)
    else:
        samples = ancestral_sample(net, args.seed, args.samples)
    save_samples(samples, args.out)
    write_manifest(str(args.out) + ".manifest.json", "sample", args, inputs, [args.out], started)
    print(f"wrote {samples.M} {samples.source} samples to {args.out}")
    return 0


def cmd_disentangle(args) -> int:
    started = _now()
    net = load_net(args.net)
    validate(net)
    inputs = [args.net]
    truth = None
    if args.tuples:
        truth = load_tupleset(args.tuples)
        truth.check_against(net)
        inputs.append(args.tuples)
    if args.mode == "oracle":
        if args.exact:
            net = net.to_exact()
            truth = truth.to_exact() if truth is not None else None
        if args.mixture_table:
            cols, table = mixture_table_from_dict(load_json(args.mixture_table))
            mix = TableOracle(cols, table)
            inputs.append(args.mixture_table)
        elif truth is not None:
            check_exclusion(truth, net)
            mix = truth
        else:
            raise UsageError("oracle mode needs --tuples or --mixture-table")
        report = disentangle_oracle_report(net, mix)
    else:
        if args.obs_samples and args.mix_samples:
            B = load_samples(args.obs_samples)
            Bmix = load_samples(args.mix_samples, "mixture")
            inputs += [args.obs_samples, args.mix_samples]
        elif truth is not None and args.samples:
            obs_ss, mix_ss = spawn(args.seed, 2)
            B = ancestral_sample(net, obs_ss, args.samples)
            Bmix = mixture_sample(net, truth, mix_ss, args.samples)
        else:
            raise UsageError("finite mode needs --obs-samples and --mix-samples, "
                             "or --tuples with --samples")
        net_hat = mle_cpds(B, net, args.delta)
        oracle = FrequencyOracle(Bmix, {n: net.card(n) for n in net.node_ids})
        report = disentangle_finite(net_hat, oracle, args.epsilon)
    out = report.to_dict()
    if truth is not None:
        mr = metrics(truth, report.tuples)
        out["metrics"] = {"recall": mr.recall, "rmse": mr.rmse,
                          "fp_rmse": mr.fp_rmse, "fn_rmse": mr.fn_rmse}
    dump_json(out, args.out)
    write_manifest(str(args.out) + ".manifest.json", "disentangle", args, inputs,
                   [args.out], started)
    print(f"recovered {len(report.tuples)} tuples; report in {args.out}")
    return 0


def _bench_jobs(args, Ns, Ms, models):
    for model in models:
        for N in Ns:
            for M in Ms:
                for inst in range(args.instances):
                    seed = cell_seed(args.seed, model, N, M, inst)
                    yield InstanceConfig(N=N, M=M, model=model, k=args.cardinality,
                                         seed=seed, epsilon=args.epsilon, delta=args.delta)


def _fmt(v):
    return f"{v:.10g}" if isinstance(v, float) else str(v)


def cmd_bench(args) -> int:
    started = _now()
    Ns, Ms = args.grid
    models = list(MODELS) if args.model == "both" else [args.model]
    jobs = list(_bench_jobs(args, Ns, Ms, models))
    out = Path(args.out)
    n_rows = 0
    interrupted = False
    pool = ProcessPoolExecutor(args.workers) if args.workers > 1 else None
    try:
        with open(out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            fh.flush()
            results = pool.map(run_instance, jobs) if pool else map(run_instance, jobs)
            try:
                for res in results:
                    row = res.row()
                    w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
                    fh.flush()
                    n_rows += 1
            except KeyboardInterrupt:
                interrupted = True
    finally:
        if pool:
            pool.shutdown(wait=not interrupted, cancel_futures=True)
    write_manifest(str(out) + ".manifest.json", "bench", args, [], [out], started,
                   grid={"N": Ns, "M": Ms, "models": models, "instances": args.instances},
                   rows=n_rows, interrupted=interrupted)
    print(f"wrote {n_rows} rows to {out}")
    return EXIT_INTERRUPTED if interrupted else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intermix", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random network and tuple set")
    g.add_argument("--nodes", type=positive_int, required=True)
    g.add_argument("--cardinality", type=cardinality, default=3)
    g.add_argument("--model", choices=MODELS, default="sf")
    g.add_argument("--alpha", type=positive_float, default=2.0, help="CPD Dirichlet parameter")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--exact", type=int, nargs="?", const=1000, default=None, metavar="MAXDEN",
                   help="write rational CPDs/weights with denominators up to MAXDEN")
    g.add_argument("--out", default=".", help="output directory")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample", help="draw observational or mixture samples as CSV")
    s.add_argument("--net", required=True)
    s.add_argument("--tuples", help="tuple set JSON; omit for observational samples")
    s.add_argument("--samples", type=positive_int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("disentangle", help="recover intervention targets and weights")
    d.add_argument("--mode", choices=("oracle", "finite"), required=True)
    d.add_argument("--net", required=True)
    d.add_argument("--tuples", help="tuple set JSON (self-oracle, or ground truth for metrics)")
    d.add_argument("--mixture-table", help="explicit mixture table JSON (oracle mode)")
    d.add_argument("--float", dest="exact", action="store_false",
                   help="oracle mode in floating point instead of exact rationals")
    d.add_argument("--obs-samples", help="observational samples CSV (finite mode)")
    d.add_argument("--mix-samples", help="mixture samples CSV (finite mode)")
    d.add_argument("--samples", type=positive_int, help="sample internally from --tuples")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--epsilon", type=positive_float, default=DEFAULT_EPSILON)
    d.add_argument("--delta", type=positive_float, default=DEFAULT_DELTA)
    d.add_argument("--out", default="report.json")
    d.set_defaults(func=cmd_disentangle)

    b = sub.add_parser("bench", help="run the simulation grid and write a results CSV")
    b.add_argument("--grid", type=parse_grid, default=parse_grid("4x2^10"),
                   help='NsxMs, e.g. 4,8x2^4..2^10; "full" is 4,8,12x2^4..2^20')
    b.add_argument("--instances", type=positive_int, default=20)
    b.add_argument("--workers", type=positive_int, default=1)
    b.add_argument("--model", choices=MODELS + ("both",), default="sf")
    b.add_argument("--cardinality", type=cardinality, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--epsilon", type=positive_float, default=DEFAULT_EPSILON)
    b.add_argument("--delta", type=positive_float, default=DEFAULT_DELTA)
    b.add_argument("--out", default="results.csv")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _resolve_seed(args)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ExclusionViolated, ExclusionUnsatisfiable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXCLUSION
    except Inconsistent as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (IntermixError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KeyboardInterrupt:
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
