"""Command-line entry point: ``cmfs {rank,select,evaluate,bench,viz}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
The default seed can be overridden with the ``CMFS_SEED`` environment
variable.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from cmfs import __version__
from cmfs.dataset import Dataset, parse_delimited, standardize, stratified_split
from cmfs.errors import DataError, NumericError
from cmfs.evaluation import ExperimentConfig, run_sweep
from cmfs.output import FORMATS, Document, fingerprint, render
from cmfs.scoring import DEFAULT_LAPLACIAN_K, FeatureRanking, Method, rank, select_top

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

SEED_ENV = "CMFS_SEED"
BUILTIN_PREFIX = "builtin:"


class UsageError(Exception):
    pass


def builtin_path(name: str) -> Path:
    path = Path(str(resources.files("cmfs") / "data" / f"{name}.csv"))
    if not path.is_file():
        raise DataError(f"no bundled dataset named {name!r}")
    return path


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be non-negative")
    return seed


def _parse_method(value: str) -> Method:
    try:
        return Method.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_label(value: str) -> int | str:
    return int(value) if value.lstrip("-").isdigit() else value


def _parse_bandwidth(value: str) -> float | None:
    if value == "auto":
        return None
    try:
        t = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be a number or 'auto', got {value!r}") from None
    if not t > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return t


def _delimiter(value: str) -> str:
    return {"tab": "\t", "\\t": "\t", "comma": ","}.get(value, value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmfs", description="Filter feature selection toolkit.")
    parser.add_argument("--version", action="version", version=f"cmfs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    io_opts = argparse.ArgumentParser(add_help=False)
    io_opts.add_argument("--label", type=_parse_label, default=-1, help="label column name or index (default: last)")
    io_opts.add_argument("--delimiter", type=_delimiter, default=None, help="',' or 'tab' (default: sniffed)")
    io_opts.add_argument("--no-header", action="store_true", help="first row is data, not column names")
    io_opts.add_argument("--format", choices=FORMATS, default=None, help="default: table (viz: delimited)")
    io_opts.add_argument("--output", type=Path, default=None, help="write to this file instead of stdout")

    one = argparse.ArgumentParser(add_help=False, parents=[io_opts])
    one.add_argument("dataset", nargs="?", help="path, or builtin:wine / builtin:sanity")
    one.add_argument("--stdin", action="store_true", help="read the dataset from standard input")

    lap = argparse.ArgumentParser(add_help=False)
    lap.add_argument("--laplacian-k", type=int, default=DEFAULT_LAPLACIAN_K)
    lap.add_argument("--bandwidth", type=_parse_bandwidth, default=None, help="heat-kernel t, or 'auto'")

    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument("--method", type=_parse_method, action="append", help="repeatable; default all four")
    experiment.add_argument("--seed", type=int, default=None, help=f"base seed (default ${SEED_ENV} or 0)")
    experiment.add_argument("--repetitions", type=int, default=5)
    experiment.add_argument("-k", "--knn-k", dest="knn_k", type=int, default=5)
    experiment.add_argument("--train-fraction", type=float, default=0.5)
    experiment.add_argument("--sweep-fraction", type=float, default=0.8)
    experiment.add_argument("--lowdim-fraction", type=float, default=0.4)
    experiment.add_argument("--laplacian-k", type=int, default=DEFAULT_LAPLACIAN_K)

    p = sub.add_parser("rank", parents=[one, lap], help="score and rank every feature")
    p.add_argument("--method", type=_parse_method, default=Method.CONFIDENCE_MACHINE)

    p = sub.add_parser("select", parents=[one, lap], help="print the top-m features")
    p.add_argument("--method", type=_parse_method, default=Method.CONFIDENCE_MACHINE)
    p.add_argument("-m", "--count", type=int, required=True)

    sub.add_parser("evaluate", parents=[one, experiment], help="repeated-split kNN accuracy sweep")

    p = sub.add_parser("bench", parents=[io_opts, experiment], help="low-dimension accuracy across datasets")
    p.add_argument("datasets", nargs="+")

    p = sub.add_parser("viz", parents=[one], help="2-D scatter data for the top-2 features of the test half")
    p.add_argument("--method", type=_parse_method, action="append", help="repeatable; default all four")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--laplacian-k", type=int, default=DEFAULT_LAPLACIAN_K)
    p.add_argument("--output-dir", type=Path, default=None, help="one file per method: viz_<method>.<ext>")
    return parser


def _read_source(args) -> tuple[str, bytes]:
    if args.stdin:
        if args.dataset is not None:
            raise UsageError("give either a dataset path or --stdin, not both")
        return "<stdin>", sys.stdin.buffer.read()
    if args.dataset is None:
        raise UsageError("a dataset path (or --stdin) is required")
    return _read_path(args.dataset)


def _read_path(spec: str) -> tuple[str, bytes]:
    path = builtin_path(spec[len(BUILTIN_PREFIX):]) if spec.startswith(BUILTIN_PREFIX) else Path(spec)
    try:
        return path.name, path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {spec}: {exc.strerror or exc}") from None


def _load(name: str, raw: bytes, args) -> tuple[Dataset, dict]:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise DataError(f"{name}: not UTF-8 text") from None
    data = parse_delimited(io.StringIO(text), delimiter=args.delimiter, header=not args.no_header, label=args.label)
    return data, fingerprint(name, raw, data.n_samples, data.n_features, data.n_classes)


def _io_config(args) -> dict:
    return {
        "label": args.label,
        "delimiter": args.delimiter or "auto",
        "header": not args.no_header,
        "format": args.format,
    }


def _experiment_config(args) -> ExperimentConfig:
    seed = _default_seed() if args.seed is None else args.seed
    try:
        return ExperimentConfig(
            repetitions=args.repetitions,
            train_fraction=args.train_fraction,
            base_seed=seed,
            k_neighbors=args.knn_k,
            sweep_max_fraction=args.sweep_fraction,
            lowdim_fraction=args.lowdim_fraction,
            methods=tuple(args.method) if args.method else tuple(Method),
            laplacian_k=args.laplacian_k,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def ranking_rows(ranking: FeatureRanking) -> tuple[list[str], list[list]]:
    if ranking.method is Method.CONFIDENCE_MACHINE:
        columns = ["rank", "index", "feature", "relevance", "redundancy", "nonconformity", "p_value", "degenerate"]
        rows = [
            [pos + 1, r.feature_index, r.feature_name, r.relevance, r.redundancy, r.nonconformity, r.p_value, r.degenerate]
            for pos, r in enumerate(ranking.ranked_records())
        ]
    else:
        columns = ["rank", "index", "feature", "score", "degenerate"]
        rows = [
            [pos + 1, r.feature_index, r.feature_name, r.baseline_score, r.degenerate]
            for pos, r in enumerate(ranking.ranked_records())
        ]
    return columns, rows


def _rank_full(data: Dataset, args) -> FeatureRanking:
    if data.n_samples < 2:
        raise DataError("need at least 2 samples")
    z, _ = standardize(data)
    return rank(z, args.method, k_neighbors=args.laplacian_k, bandwidth=args.bandwidth)


def cmd_rank(args) -> list[tuple[Path | None, Document]]:
    name, raw = _read_source(args)
    data, fp = _load(name, raw, args)
    ranking = _rank_full(data, args)
    config = {"method": ranking.method.value, "laplacian_k": args.laplacian_k,
              "bandwidth": "auto" if args.bandwidth is None else args.bandwidth, "standardize": "full-data", **_io_config(args)}
    columns, rows = ranking_rows(ranking)
    return [(args.output, Document("rank", config, [fp], columns, rows))]


def cmd_select(args) -> list[tuple[Path | None, Document]]:
    name, raw = _read_source(args)
    data, fp = _load(name, raw, args)
    ranking = _rank_full(data, args)
    try:
        chosen = select_top(ranking, args.count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    config = {"method": ranking.method.value, "count": args.count, "laplacian_k": args.laplacian_k,
              "bandwidth": "auto" if args.bandwidth is None else args.bandwidth, "standardize": "full-data", **_io_config(args)}
    rows = [[pos + 1, i, data.feature_names[i]] for pos, i in enumerate(chosen)]
    return [(args.output, Document("select", config, [fp], ["rank", "index", "feature"], rows))]


def cmd_evaluate(args) -> list[tuple[Path | None, Document]]:
    config = _experiment_config(args)
    name, raw = _read_source(args)
    data, fp = _load(name, raw, args)
    report = run_sweep(data, config)
    columns = ["method", "classifier", "feature_count", "repetition", "seed", "accuracy"]
    rows = []
    for method in config.methods:
        acc = report.per_repetition[method]
        for j, m in enumerate(report.feature_counts):
            for r, seed in enumerate(report.seeds):
                rows.append([method.value, report.classifier, m, r, seed, float(acc[r, j])])
    means = {
        method.value: {str(m): float(v) for m, v in zip(report.feature_counts, report.mean_accuracy[method])}
        for method in config.methods
    }
    summary = {
        "sweep": f"1..{report.feature_counts[-1]}",
        "low_dim_range": f"1..{report.low_dim_limit}",
        "mean_accuracy_low_dim": {m.value: v for m, v in report.low_dim.items()},
    }
    doc = Document("evaluate", {**config.as_dict(), **_io_config(args)}, [fp], columns, rows, summary=summary)
    if args.format == "table":
        doc.columns = ["method", "m", "mean_accuracy"] + [f"rep{r}" for r in range(len(report.seeds))]
        doc.rows = [
            [method.value, m, means[method.value][str(m)]] + [float(v) for v in report.per_repetition[method][:, j]]
            for method in config.methods
            for j, m in enumerate(report.feature_counts)
        ]
    else:
        doc.summary["mean_accuracy"] = means
    return [(args.output, doc)]


def cmd_bench(args) -> tuple[list[tuple[Path | None, Document]], bool]:
    config = _experiment_config(args)
    columns = ["dataset", "method", "lowdim_accuracy_pct", "best"]
    rows, fps, notes = [], [], []
    failed = False
    for spec in args.datasets:
        try:
            name, raw = _read_path(spec)
            data, fp = _load(name, raw, args)
            report = run_sweep(data, config)
        except (DataError, NumericError, ValueError) as exc:
            failed = True
            notes.append(f"error: {spec}: {exc}")
            continue
        fps.append(fp)
        low = report.low_dim
        best = max(low.values())
        for method in config.methods:
            rows.append([fp["name"], method.value, 100.0 * low[method], low[method] == best])
    doc = Document("bench", {**config.as_dict(), **_io_config(args)}, fps, columns, rows, notes=notes)
    return [(args.output, doc)], failed


def cmd_viz(args) -> list[tuple[Path | None, Document]]:
    seed = _default_seed() if args.seed is None else args.seed
    if not 0 < args.train_fraction < 1:
        raise UsageError("train fraction must lie in (0, 1)")
    methods = list(dict.fromkeys(args.method)) if args.method else list(Method)
    if len(methods) > 1 and args.output is not None and args.output_dir is None:
        raise UsageError("several methods need --output-dir (one file per method) rather than --output")
    name, raw = _read_source(args)
    data, fp = _load(name, raw, args)
    if data.n_features < 2:
        raise DataError("viz needs at least 2 features")
    split = stratified_split(data, args.train_fraction, seed)
    train_z, _ = standardize(split.train)
    docs = []
    ext = {"table": "txt", "delimited": "csv", "structured": "json"}[args.format]
    for method in methods:
        ranking = rank(train_z, method, k_neighbors=args.laplacian_k)
        a, b = select_top(ranking, 2)
        fa, fb = data.feature_names[a], data.feature_names[b]
        config = {"method": method.value, "seed": seed, "train_fraction": args.train_fraction,
                  "laplacian_k": args.laplacian_k, "train_size": split.train.n_samples,
                  "test_size": split.test.n_samples, **_io_config(args)}
        rows = [
            [int(row), float(split.test.features[i, a]), float(split.test.features[i, b]),
             data.class_names[split.test.labels[i]], int(split.test.labels[i])]
            for i, row in enumerate(split.test_index)
        ]
        doc = Document("viz", config, [fp], ["sample", fa, fb, "class", "label"], rows,
                       notes=[f"method {method.value} features: {fa} | {fb}"])
        target = args.output_dir / f"viz_{method.value}.{ext}" if args.output_dir is not None else args.output
        docs.append((target, doc))
    return docs


def _emit(docs, fmt: str, stdout) -> None:
    for target, doc in docs:
        text = render(doc, fmt)
        if target is None:
            stdout.write(text)
        else:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8", newline="\n")


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    if args.format is None:
        args.format = "delimited" if args.command == "viz" else "table"
    handlers = {"rank": cmd_rank, "select": cmd_select, "evaluate": cmd_evaluate, "viz": cmd_viz}
    try:
        if args.command == "bench":
            docs, failed = cmd_bench(args)
            _emit(docs, args.format, stdout)
            for _, doc in docs:
                for note in doc.notes:
                    print(f"cmfs: {note}", file=stderr)
            return EXIT_DATA if failed else EXIT_OK
        _emit(handlers[args.command](args), args.format, stdout)
    except UsageError as exc:
        print(f"cmfs: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"cmfs: numeric failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (DataError, ValueError) as exc:
        print(f"cmfs: data error: {exc}", file=stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
