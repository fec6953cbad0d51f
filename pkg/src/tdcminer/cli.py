"""Command-line entry point: one binary, nine subcommands.

Every subcommand is a thin wrapper over the library modules; the CLI only
parses flags, wires calls together and writes files.  Errors exit non-zero
with a single-line ``error: <Type>: <message>`` on standard error, and no
partially written output file survives a failure (everything is staged and
atomically moved into place at the end of a successful run).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import cluster, evotemplate, harness, recommend as recommend_mod, seqcore
from .surrogate import (
    family_reports,
    load_model,
    save_model,
    train_each,
    train_general,
)

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# flag parsing helpers


def _tokens(text: str) -> tuple[str, ...]:
    return tuple(t for t in text.replace(",", " ").split() if t)


def _templates(text: str) -> tuple[tuple[str, ...], ...]:
    parts = [chunk for chunk in text.split(";") if chunk.strip()]
    if not parts:
        raise ValueError("no templates given")
    return tuple(_tokens(chunk) for chunk in parts)


def _triple(text: str) -> tuple[float, float, float]:
    values = tuple(float(v) for v in text.split(","))
    if len(values) != 3:
        raise ValueError("--mutation-prob needs exactly three values: p_sub,p_del,p_ins")
    return values


def _krange(text: str) -> range:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ValueError("--krange must look like lo:hi")
    return range(int(lo), int(hi) + 1)


def _ga_params(args) -> evotemplate.GAParams:
    return evotemplate.GAParams(
        increment=args.increment,
        mutation_probability=args.mutation_prob,
        mutation_number=args.mutation_number,
        parent_fraction=args.parent_fraction,
        start_population_factor=args.start_pop_factor,
    )


def _stopping(args) -> evotemplate.StoppingConfig:
    return evotemplate.StoppingConfig(
        epsilon=args.epsilon,
        patience=args.patience,
        max_generations=args.max_generations,
    )


def _add_ga_flags(parser):
    parser.add_argument("--increment", type=float, required=True)
    parser.add_argument(
        "--mutation-prob",
        type=_triple,
        required=True,
        metavar="P_SUB,P_DEL,P_INS",
    )
    parser.add_argument("--mutation-number", type=int, required=True)
    parser.add_argument("--parent-fraction", type=float, required=True)
    parser.add_argument("--start-pop-factor", type=float, required=True)


def _add_stopping_flags(parser):
    parser.add_argument("--epsilon", type=float, default=1e-3)
    parser.add_argument("--patience", type=int, default=5)
    parser.add_argument("--max-generations", type=int, default=200)


def _read_set(path) -> seqcore.SequenceSet:
    p = Path(path)
    return seqcore.parse_sequence_file(p.read_text(encoding="utf-8"), name=p.stem)


# ---------------------------------------------------------------------------
# output staging: nothing lands on disk unless the whole command succeeded


def _commit_outputs(outputs: dict) -> None:
    staged = []
    try:
        for path, text in outputs.items():
            tmp = str(path) + ".tmp"
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, str(path)))
        for tmp, final in staged:
            os.replace(tmp, final)
    except BaseException:
        for tmp, _ in staged:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
        raise


def _emit(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        _commit_outputs({out_path: text})


def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    if args.random:
        if not args.alphabet:
            raise ValueError("--random requires --alphabet")
        sset = seqcore.random_set(
            name=args.name,
            alphabet=_tokens(args.alphabet),
            size=args.set_size,
            min_len=args.min_len,
            max_len=args.max_len,
            seed=args.seed,
        )
    else:
        if not args.templates:
            raise ValueError("either --templates or --random is required")
        cfg = seqcore.GeneratorConfig(
            templates=tuple(seqcore.make_sequence(t) for t in _templates(args.templates)),
            mutation_probability=args.mutation_prob,
            set_size=args.set_size,
            seed=args.seed,
            name=args.name,
        )
        sset = seqcore.generate_set(cfg)
    _emit(seqcore.format_sequence_file(sset), args.out)
    return 0


def cmd_describe(args) -> int:
    descriptor = seqcore.compute_descriptor(_read_set(args.set_file))
    grams = sorted(descriptor.ngram_freqs)
    header = list(seqcore.DESCRIPTOR_STAT_COLUMNS) + [
        harness.NGRAM_COLUMN_PREFIX + g for g in grams
    ]
    values = descriptor.csv_values()[: len(seqcore.DESCRIPTOR_STAT_COLUMNS)] + [
        descriptor.ngram_freqs[g] for g in grams
    ]
    _emit(_csv_text(header, [[_fmt(v) for v in values]]), args.out)
    return 0


def cmd_tdc(args) -> int:
    sset = _read_set(args.set_file)
    result = cluster.run_tdc(sset, _ga_params(args), args.krange, _stopping(args), args.seed)
    columns = result.outcome.as_columns()
    outcome_csv = _csv_text(
        cluster.OUTCOME_COLUMNS, [[_fmt(columns[c]) for c in cluster.OUTCOME_COLUMNS]]
    )
    outputs = {}
    if args.graph_out is not None:
        graphs = cluster.transition_graphs(result)
        if args.graph_format == "dot":
            graph_text = cluster.graphs_to_dot(graphs)
        else:
            graph_text = json.dumps(
                {
                    "set": sset.name,
                    "non_clustered": len(result.non_clustered),
                    "clusters": graphs,
                },
                indent=2,
            ) + "\n"
        outputs[args.graph_out] = graph_text
    if args.out is None:
        _commit_outputs(outputs)
        sys.stdout.write(outcome_csv)
    else:
        outputs[args.out] = outcome_csv
        _commit_outputs(outputs)
    return 0


def cmd_sweep(args) -> int:
    grid = harness.build_grid(args.values_per_param, seed=args.grid_seed)
    stop = _stopping(args)
    samples = []
    for set_file in args.set_files:
        sset = _read_set(set_file)
        samples.extend(
            harness.sweep(sset, grid, args.krange, stop, args.seed, jobs=args.jobs)
        )
    # persist() writes to a path; stage through a temp name for atomicity.
    tmp = str(args.out) + ".tmp"
    try:
        harness.persist(samples, tmp)
        os.replace(tmp, args.out)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return 0


def _sanitize(name: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in name)


def _corpus_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:12]


def _train_one_set(task):
    name, rows = task
    models = train_each(rows)
    return name, models.get(name)


def cmd_train(args) -> int:
    samples = harness.load(args.samples)
    corpus_hash = _corpus_hash(args.samples)
    if args.family == "general":
        model = train_general(samples)
        save_model(
            model,
            args.out,
            metadata={"family": "general", "corpus_hash": corpus_hash},
        )
        return 0
    by_set: dict[str, list] = {}
    for s in samples:
        by_set.setdefault(s.set_name, []).append(s)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = sorted(by_set.items())
    if args.jobs <= 1:
        results = [_train_one_set(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_train_one_set, tasks))
    wrote = 0
    for name, model in results:
        if model is None:
            continue
        save_model(
            model,
            out_dir / f"each_{_sanitize(name)}.json",
            metadata={"family": "each", "set_name": name, "corpus_hash": corpus_hash},
        )
        wrote += 1
    if wrote == 0:
        raise ValueError("no set had enough samples to train a per-set model")
    return 0


def _load_models(paths):
    each_models, general_model = {}, None
    for path in paths:
        model, metadata = load_model(path)
        family = metadata.get("family")
        if family == "each":
            each_models[metadata["set_name"]] = model
        elif family == "general":
            general_model = model
        else:
            raise ValueError(f"model {path} has unknown family {family!r}")
    return each_models, general_model


def cmd_evaluate(args) -> int:
    samples = harness.load(args.samples)
    each_models, general_model = _load_models(args.models)
    reports = family_reports(samples, each_models, general_model, knn_k=args.knn_k)
    header = ["family", "split"] + list(cluster.OUTCOME_COLUMNS)
    rows = []
    for family in ("each", "general", "average", "knn"):
        if family not in reports:
            continue
        report = reports[family]
        for split_name in ("train", "test"):
            scores = getattr(report, split_name)
            rows.append(
                [family, split_name]
                + [_fmt(scores[t].mape) for t in cluster.OUTCOME_COLUMNS]
            )
    _emit(_csv_text(header, rows), args.out)
    return 0


def cmd_importance(args) -> int:
    model, _ = load_model(args.model)
    rows = []
    for target, pairs in model.feature_importance().items():
        for rank, (feature, share) in enumerate(pairs, start=1):
            rows.append([target, str(rank), feature, _fmt(share)])
    _emit(_csv_text(["target", "rank", "feature", "share"], rows), args.out)
    return 0


def cmd_recommend(args) -> int:
    model, _ = load_model(args.model)
    spec = recommend_mod.ObjectiveSpec.parse(args.objectives)
    grid = harness.build_grid(args.values_per_param, seed=args.grid_seed)
    table = recommend_mod.recommend(
        args.set_file, model, grid, spec, show_all=not args.nondominated_only
    )
    outputs = {args.out: recommend_mod.table_to_csv(table)}
    if table.scatter is not None:
        scatter_out = args.scatter_out
        if scatter_out is None:
            scatter_out = str(args.out) + ".scatter.csv"
        outputs[scatter_out] = recommend_mod.scatter_to_csv(table)
    _commit_outputs(outputs)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        model_path=args.model,
        max_upload_bytes=args.max_upload_bytes,
        static_dir=args.static_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdcminer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic sequence set")
    p.add_argument("--templates", help='templates like "A,B,C;B,C" (";"-separated)')
    p.add_argument("--mutation-prob", type=float, default=0.1)
    p.add_argument("--set-size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--name", default="generated")
    p.add_argument("--random", action="store_true", help="uniform random set instead")
    p.add_argument("--alphabet", help="states for --random")
    p.add_argument("--min-len", type=int, default=2)
    p.add_argument("--max-len", type=int, default=10)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("describe", help="descriptor CSV row for a sequence file")
    p.add_argument("set_file")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(handler=cmd_describe)

    p = sub.add_parser("tdc", help="one full TDC run")
    p.add_argument("set_file")
    _add_ga_flags(p)
    _add_stopping_flags(p)
    p.add_argument("--krange", type=_krange, default=range(2, 11), metavar="LO:HI")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--out", default=None)
    p.add_argument("--graph-out", default=None)
    p.add_argument("--graph-format", choices=("dot", "json"), default="json")
    p.set_defaults(handler=cmd_tdc)

    p = sub.add_parser("sweep", help="grid sweep into a training-sample CSV")
    p.add_argument("set_files", nargs="+")
    p.add_argument("--values-per-param", type=int, default=3)
    p.add_argument("--grid-seed", type=int, default=0)
    p.add_argument("--krange", type=_krange, default=range(2, 11), metavar="LO:HI")
    _add_stopping_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("train", help="train surrogate model(s) from a samples CSV")
    p.add_argument("--samples", required=True)
    p.add_argument("--family", choices=("each", "general"), required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument(
        "-o", "--out", required=True, help="model file (general) or directory (each)"
    )
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("evaluate", help="per-family train/test MAPE table")
    p.add_argument("--samples", required=True)
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--knn-k", type=int, default=2)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("importance", help="ranked feature-importance table")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(handler=cmd_importance)

    p = sub.add_parser("recommend", help="predict a grid and flag Pareto rows")
    p.add_argument("--model", required=True)
    p.add_argument("--set", dest="set_file", required=True)
    p.add_argument("--objectives", required=True, help='e.g. "dbi,elapsed_seconds"')
    p.add_argument("--values-per-param", type=int, default=3)
    p.add_argument("--grid-seed", type=int, default=0)
    p.add_argument("--nondominated-only", action="store_true")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--scatter-out", default=None)
    p.set_defaults(handler=cmd_recommend)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--model", default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static-dir", default=None)
    p.add_argument("--max-upload-bytes", type=int, default=1 << 20)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except Exception as exc:  # single-line, machine-parsable failure surface
        message = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
