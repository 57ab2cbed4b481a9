"""Command-line interface: ``ipclust {estimate-k,simulate,gap,ari,generate}``."""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from . import harness
from .cluster import ClusterConfig, make_clusterer
from .comparators import adjusted_rand_index, gap_statistic
from .dataset import DataError, load_csv, load_labeled_csv
from .homogeneity import MODES
from .ipindex import NEAREST_RULES, IpConfig
from .simgen import SETTINGS, generate


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(","))


def _add_common(p, multi=False):
    p.add_argument("--alpha", type=float, default=0.01)
    if multi:
        p.add_argument("--w", type=int, nargs="+", default=[3])
        p.add_argument("--nearest", choices=NEAREST_RULES, nargs="+", default=["mean"])
    else:
        p.add_argument("--w", type=int, default=3)
        p.add_argument("--nearest", choices=NEAREST_RULES, default="mean")
    p.add_argument("--b", type=int, default=10_000, help="Monte Carlo replicates per test")
    p.add_argument("--mode", choices=MODES, default="auto", help="p-value method")
    p.add_argument("--max-k", type=int, default=10)
    p.add_argument("--algorithm", choices=("kmeans", "kmedoids"), default="kmeans")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")


def _add_input(p):
    p.add_argument("input", type=Path, help="CSV file, one observation per row")
    p.add_argument("--header", action="store_true", help="first row is a header")
    p.add_argument("--label-column", type=int,
                   help="0-based column of class labels to exclude (negative counts from the end)")


def _add_gap(p, flag=True):
    if flag:
        p.add_argument("--gap", action="store_true", help="also run the gap statistic")
    p.add_argument("--gap-refs", type=int, default=100)
    p.add_argument("--gap-k-max", type=int, default=10)


def _add_setting_options(p):
    p.add_argument("--separation", type=float, help="S2 spacing between group centers")
    p.add_argument("--shift", type=_floats, help="S3 displacement of the second group, e.g. 3,3")


def _setting_options(args) -> dict:
    opts = {}
    if args.separation is not None:
        opts["separation"] = args.separation
    if args.shift is not None:
        opts["shift"] = args.shift
    return opts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipclust", description="Estimate the number of clusters with the integrated p-value index."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate-k", help="estimate the number of clusters in a CSV file")
    _add_input(p)
    _add_common(p)
    _add_gap(p)
    p.add_argument("--no-p-values", action="store_true", help="omit per-observation p-values")

    p = sub.add_parser("simulate", help="run a seeded replication study")
    p.add_argument("--setting", choices=SETTINGS, required=True)
    p.add_argument("--reps", type=int, default=25)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock times (makes the report non-reproducible)")
    _add_common(p, multi=True)
    _add_gap(p)
    _add_setting_options(p)

    p = sub.add_parser("gap", help="gap statistic for a CSV file")
    _add_input(p)
    p.add_argument("--algorithm", choices=("kmeans", "kmedoids"), default="kmeans")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--metric", choices=("euclidean", "manhattan"), default="euclidean")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", type=Path)
    _add_gap(p, flag=False)

    p = sub.add_parser("ari", help="adjusted Rand index between two label files")
    p.add_argument("labels_a", type=Path)
    p.add_argument("labels_b", type=Path)
    p.add_argument("--header", action="store_true")
    p.add_argument("--column", type=int, default=-1,
                   help="0-based label column in each file (default: last)")

    p = sub.add_parser("generate", help="write a simulated data set as CSV with a truth column")
    p.add_argument("--setting", choices=SETTINGS, required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", type=Path)
    _add_setting_options(p)
    return parser


def _ip_config(args, **override) -> IpConfig:
    fields = dict(w=args.w, alpha=args.alpha, nearest_rule=args.nearest, b=args.b,
                  max_k=args.max_k, mode=args.mode)
    fields.update(override)
    return IpConfig(**fields)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _read_labels(path: Path, column: int, header: bool) -> list[str]:
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if header:
        rows = rows[1:]
    try:
        return [row[column].strip() for row in rows]
    except IndexError:
        raise DataError(f"{path}: column {column} missing in some row") from None


def _cmd_estimate(args):
    config = harness.EstimateConfig(
        ip_config=_ip_config(args),
        algorithm=args.algorithm,
        cluster_config=ClusterConfig(args.restarts, args.max_iterations, args.seed),
        metric=args.metric,
        seed=args.seed,
        has_header=args.header,
        label_column=args.label_column,
        gap=args.gap,
        gap_refs=args.gap_refs,
        gap_k_max=args.gap_k_max,
        include_p_values=not args.no_p_values,
    )
    _emit(harness.dumps(harness.run_estimate(args.input, config)), args.out)


def _cmd_simulate(args):
    config = harness.ExperimentConfig(
        setting=args.setting,
        replications=args.reps,
        ip_config=_ip_config(args, w=args.w[0], nearest_rule=args.nearest[0]),
        w_values=tuple(args.w),
        nearest_rules=tuple(args.nearest),
        algorithm=args.algorithm,
        cluster_config=ClusterConfig(args.restarts, args.max_iterations, 0),
        metric=args.metric,
        gap=args.gap,
        gap_refs=args.gap_refs,
        gap_k_max=args.gap_k_max,
        base_seed=args.seed,
        setting_options=_setting_options(args),
    )
    report = harness.run_simulation(config, jobs=args.jobs)
    _emit(harness.dumps(report.to_dict(timings=args.timings)), args.out)


def _cmd_gap(args):
    if args.label_column is None:
        data = load_csv(args.input, args.header)
    else:
        data, _ = load_labeled_csv(args.input, args.label_column, args.header)
    clusterer = make_clusterer(args.algorithm, ClusterConfig(args.restarts, 100, args.seed), args.metric)
    result = gap_statistic(data, clusterer, args.gap_k_max, args.gap_refs, args.seed)
    _emit(harness.dumps(result.to_dict()), args.out)


def _cmd_ari(args):
    a = _read_labels(args.labels_a, args.column, args.header)
    b = _read_labels(args.labels_b, args.column, args.header)
    sys.stdout.write(harness.dumps({"ari": adjusted_rand_index(a, b), "n": len(a)}))


def _cmd_generate(args):
    data, truth = generate(args.setting, seed=args.seed,
                           **{**harness.SETTING_DEFAULTS.get(args.setting, {}), **_setting_options(args)})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{j + 1}" for j in range(data.dim)] + ["truth"])
    for row, label in zip(data.values, truth.labels):
        writer.writerow([repr(float(v)) for v in row] + [int(label) + 1])
    _emit(buf.getvalue(), args.out)


COMMANDS = {
    "estimate-k": _cmd_estimate,
    "simulate": _cmd_simulate,
    "gap": _cmd_gap,
    "ari": _cmd_ari,
    "generate": _cmd_generate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (DataError, ValueError, RuntimeError, OSError, np.linalg.LinAlgError) as exc:
        print(f"ipclust {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
