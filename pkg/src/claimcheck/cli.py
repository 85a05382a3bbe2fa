"""Single entry point exposing the pipeline as subcommands.

Exit codes: 0 success, 1 usage error, 2 data error. All file outputs are
written atomically (temp file + rename) and every run emits a JSON manifest
recording the resolved configuration; re-running with the manifest's values
reproduces the outputs byte for byte (manifest timestamps aside). Logs go to
stderr as JSON lines, data to stdout or the --out path.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from . import bench as bench_mod
from . import classifier, corpus, evaluation, preprocess, service
from .errors import ClaimCheckError, DataError, RecipeError

logger = logging.getLogger("claimcheck")


class _JsonLogFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "ts": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "level": record.levelname.lower(),
            "event": record.getMessage(),
        }
        fields = getattr(record, "fields", None)
        if fields:
            entry.update(fields)
        return json.dumps(entry, ensure_ascii=False, sort_keys=True)


def _setup_logging() -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonLogFormatter())
    root = logging.getLogger("claimcheck")
    root.handlers = [handler]
    root.setLevel(logging.INFO)
    root.propagate = False


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}") from None

    def exit(self, status=0, message=None):
        if message:
            sys.stderr.write(message)
        raise SystemExit(status if status == 0 else 1)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _atomic(path: Path, write_fn) -> None:
    """Run write_fn against a temp path, then rename over the target."""
    tmp = path.with_name(path.name + ".tmp")
    write_fn(tmp)
    os.replace(tmp, path)


def _write_manifest(args: argparse.Namespace, started: str,
                    inputs: list[str], outputs: list[str]) -> None:
    resolved = {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "manifest") and not k.startswith("_")
    }
    manifest = {
        "tool": "claimcheck",
        "version": __version__,
        "subcommand": args._subcommand,
        "args": {k: (str(v) if isinstance(v, Path) else v) for k, v in resolved.items()},
        "inputs": inputs,
        "outputs": outputs,
        "seed": getattr(args, "seed", None),
        "started": started,
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if args.manifest:
        target = Path(args.manifest)
    elif outputs:
        target = Path(outputs[0] + ".manifest.json")
    else:
        target = Path(f"{args._subcommand}.manifest.json")
    _atomic_write_text(target, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _fmt(value: Optional[float], width: int = 6) -> str:
    return "undef" if value is None else f"{value:.4f}"


def _render_eval(report: evaluation.EvalReport) -> str:
    lines = [f"task: {report.task}  n: {report.n}"]
    header = f"{'subset':<10} {'acc':>7} {'recall':>7} {'prec':>7} {'f1':>7} {'tp':>6} {'fp':>6} {'fn':>6} {'tn':>6}"
    lines.append(header)

    def row(name: str, rep: evaluation.EvalReport) -> str:
        return (
            f"{name:<10} {_fmt(rep.accuracy):>7} {_fmt(rep.recall):>7} "
            f"{_fmt(rep.precision):>7} {_fmt(rep.f1):>7} "
            f"{rep.tp:>6} {rep.fp:>6} {rep.fn:>6} {rep.tn:>6}"
        )

    lines.append(row("overall", report))
    for language, sub in sorted(report.per_language.items()):
        lines.append(row(language, sub))
    return "\n".join(lines)


def _render_comparison(table: evaluation.ComparisonTable) -> str:
    lines = [f"{'model':<28} {'acc':>10} {'recall':>10} {'f1':>10}"]
    for row in table.rows:
        cells = []
        for metric in table.metrics:
            text = _fmt(row[metric])
            if row[f"{metric}_best"]:
                text += "*"
            cells.append(f"{text:>10}")
        lines.append(f"{row['name']:<28} " + " ".join(cells))
    lines.append("(* best per column)")
    return "\n".join(lines)


def _load_gold(path: str, fold: Optional[str]) -> list[corpus.Post]:
    if fold and fold != "all":
        collection = corpus.load_collection(path)
        return collection.fold(fold)
    return corpus.load_dataset(path)


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns the list of inputs/outputs for the manifest)


def _cmd_ingest(args) -> tuple[list[str], list[str]]:
    fmt = corpus.DatasetFormat(
        id_col=args.id_col,
        text_col=args.text_col,
        language_col=args.language_col,
        vfc_col=args.vfc_col,
        harmful_col=args.harmful_col,
    )
    posts = corpus.load_dataset(args.input, fmt, source=args.source)
    _atomic(Path(args.out), lambda p: corpus.write_dataset(posts, p))
    logger.info("ingested dataset", extra={"fields": {"posts": len(posts), "out": args.out}})
    return [args.input], [args.out]


def _cmd_preprocess(args) -> tuple[list[str], list[str]]:
    config = preprocess.PreprocessConfig(
        method=args.method,
        min_len_chars=args.min_len,
        max_len_chars=args.max_len,
        min_nondigit_chars=args.min_nondigit,
    )
    posts = corpus.load_dataset(args.input)
    survivors = preprocess.preprocess(posts, config)
    _atomic(Path(args.out), lambda p: corpus.write_dataset(survivors, p))
    logger.info(
        "preprocessed dataset",
        extra={"fields": {"in": len(posts), "out": len(survivors), "method": args.method}},
    )
    return [args.input], [args.out]


def _make_translator(spec: Optional[str]):
    if spec is None or spec == "identity":
        return preprocess.IdentityTranslator()
    if spec.startswith("dict:"):
        path = spec[len("dict:"):]
        mapping = json.loads(Path(path).read_text(encoding="utf-8"))
        return preprocess.DictionaryTranslator(mapping)
    raise DataError(f"unknown translator {spec!r} (use 'identity' or 'dict:PATH')")


def _cmd_compose(args) -> tuple[list[str], list[str]]:
    recipe, source_paths = corpus.read_recipe(args.recipe)
    for override in args.dataset or []:
        if "=" not in override:
            raise DataError(f"--dataset expects id=path, got {override!r}")
        dataset_id, path = override.split("=", 1)
        source_paths[dataset_id] = path
    datasets = {}
    inputs = [args.recipe]
    for spec in recipe.sources:
        if spec.dataset not in source_paths:
            raise RecipeError(f"no path known for dataset {spec.dataset!r}")
        path = Path(source_paths[spec.dataset])
        if args.data_dir and not path.is_absolute():
            path = Path(args.data_dir) / path
        datasets[spec.dataset] = corpus.load_dataset(path, source=spec.dataset)
        inputs.append(str(path))
    translator = _make_translator(args.translator)
    collection = corpus.compose_collection(recipe, datasets, translator=translator)
    if collection.split_assignment is None:
        collection = corpus.split(
            collection, corpus.SplitSpec(mode="fractions", train=1.0, val=0.0, test=0.0)
        )
    _atomic(Path(args.out), lambda p: corpus.write_collection(collection, p))
    logger.info(
        "composed collection",
        extra={"fields": {"collection": collection.id, "posts": len(collection.posts)}},
    )
    return inputs, [args.out]


def _parse_three(raw: str, kind: str) -> tuple[float, float, float]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise DataError(f"--{kind} expects three comma-separated values, got {raw!r}")
    caster = int if kind == "counts" else float
    try:
        return tuple(caster(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise DataError(f"--{kind}: {exc}") from exc


def _cmd_split(args) -> tuple[list[str], list[str]]:
    if (args.counts is None) == (args.fractions is None):
        raise DataError("pass exactly one of --counts or --fractions")
    posts = corpus.load_dataset(args.input)
    collection = corpus.Collection(id=Path(args.input).stem, posts=posts)
    if args.counts:
        train, val, test = _parse_three(args.counts, "counts")
        spec = corpus.SplitSpec(
            mode="explicit-counts", train=train, val=val, test=test,
            seed=args.seed, stratify=args.stratify,
        )
    else:
        train, val, test = _parse_three(args.fractions, "fractions")
        spec = corpus.SplitSpec(
            mode="fractions", train=train, val=val, test=test,
            seed=args.seed, stratify=args.stratify,
        )
    collection = corpus.split(collection, spec)
    _atomic(Path(args.out), lambda p: corpus.write_collection(collection, p))
    sizes = {fold: len(collection.fold(fold)) for fold in corpus.FOLDS}
    logger.info("split collection", extra={"fields": sizes})
    return [args.input], [args.out]


def _cmd_train(args) -> tuple[list[str], list[str]]:
    collection = corpus.load_collection(args.input)
    train_posts = collection.fold("train")
    val_posts = collection.fold("val")
    config = classifier.TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        anneal_factor=args.anneal_factor,
        patience=args.patience,
        max_epochs=args.max_epochs,
        seed=args.seed,
    )
    hashing = classifier.HashingParams(
        ngram_min=args.ngram_min,
        ngram_max=args.ngram_max,
        hash_dim=args.hash_dim,
        hash_seed=args.hash_seed,
    )
    result = classifier.train_baseline(train_posts, val_posts, config, hashing)
    for entry in result.log:
        logger.info(
            "epoch",
            extra={"fields": {
                "epoch": entry.epoch,
                "lr": entry.learning_rate,
                "train_loss": round(entry.train_loss, 6),
                "val_metric": round(entry.val_metric, 6),
                "improved": entry.improved,
                "annealed": entry.annealed_after,
            }},
        )
    _atomic(Path(args.out_best), lambda p: classifier.save_model(result.best, p))
    _atomic(Path(args.out_last), lambda p: classifier.save_model(result.last, p))
    return [args.input], [args.out_best, args.out_last]


def _cmd_predict(args) -> tuple[list[str], list[str]]:
    model = classifier.load_model(args.model)
    posts = _load_gold(args.input, args.split)
    provenance = args.provenance or Path(args.model).stem
    preds = classifier.predict_posts(model, posts, provenance=provenance)
    _atomic(Path(args.out), lambda p: classifier.write_predictions(preds, p))
    logger.info("predicted", extra={"fields": {"posts": len(preds), "out": args.out}})
    return [args.model, args.input], [args.out]


def _cmd_evaluate(args) -> tuple[list[str], list[str]]:
    gold = _load_gold(args.gold, args.split)
    pred_paths = args.pred
    reports = []
    for path in pred_paths:
        preds = classifier.load_predictions(path)
        reports.append((preds.provenance, evaluation.evaluate(preds, gold, args.task)))
    if len(reports) == 1:
        report = reports[0][1]
        body = (
            json.dumps(report.to_dict(), indent=2, sort_keys=True)
            if args.format == "structured"
            else _render_eval(report)
        )
    else:
        table = evaluation.compare_report(reports)
        body = (
            json.dumps(table.to_dict(), indent=2, sort_keys=True)
            if args.format == "structured"
            else _render_comparison(table)
        )
    outputs = []
    if args.out:
        _atomic_write_text(Path(args.out), body + "\n")
        outputs.append(args.out)
    else:
        print(body)
    return pred_paths + [args.gold], outputs


def _cmd_mcnemar(args) -> tuple[list[str], list[str]]:
    gold = _load_gold(args.gold, args.split)
    preds_a = classifier.load_predictions(args.pred_a)
    preds_b = classifier.load_predictions(args.pred_b)
    method = None if args.method == "auto" else args.method
    result = evaluation.mcnemar(
        evaluation.correctness(preds_a, gold, args.task),
        evaluation.correctness(preds_b, gold, args.task),
        alpha=args.alpha,
        method=method,
    )
    body_dict = {
        "b": result.b,
        "c": result.c,
        "method": result.method,
        "statistic": result.statistic,
        "p_value": result.p_value,
        "alpha": result.alpha,
        "null_rejected": result.null_rejected,
        "degenerate": result.degenerate,
    }
    if args.format == "structured":
        body = json.dumps(body_dict, indent=2, sort_keys=True)
    else:
        stat = "-" if result.statistic is None else f"{result.statistic:.4f}"
        body = (
            f"discordant: b={result.b} c={result.c}  method={result.method}\n"
            f"statistic={stat}  p={result.p_value:.6f}  alpha={result.alpha}\n"
            f"null hypothesis {'REJECTED' if result.null_rejected else 'not rejected'}"
        )
    print(body)
    return [args.pred_a, args.pred_b, args.gold], []


def _cmd_length_analysis(args) -> tuple[list[str], list[str]]:
    gold = _load_gold(args.gold, args.split)
    preds = classifier.load_predictions(args.pred)
    items = evaluation.positive_items(preds, gold, args.task)
    report = evaluation.length_quartile_recall(items)
    if args.format == "structured":
        body = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    else:
        lines = [
            f"positive-class items: {report.n}  "
            f"cut points: {report.cut_points[0]}/{report.cut_points[1]}/{report.cut_points[2]} chars",
            f"{'bin':<12} {'chars':<14} {'count':>6} {'recall':>8}",
        ]
        names = ("0-25%", "25-50%", "50-75%", "75-100%")
        for name, b in zip(names, report.bins):
            lines.append(
                f"{name:<12} {f'{b.low}..{b.high}':<14} {b.count:>6} {_fmt(b.recall):>8}"
            )
        lines.append(f"overall recall: {report.overall_recall:.4f}")
        body = "\n".join(lines)
    print(body)
    return [args.pred, args.gold], []


def _cmd_bench(args) -> tuple[list[str], list[str]]:
    if args.model:
        model = classifier.load_model(args.model)
    else:
        model = classifier.zero_model(classifier.HashingParams())
    inputs = [args.model] if args.model else []
    if args.corpus:
        posts = corpus.load_dataset(args.corpus)
        inputs.append(args.corpus)
    else:
        posts = bench_mod.synth_corpus(args.synth, seed=args.seed)
    counts = [int(c) for c in args.counts.split(",")]
    report = bench_mod.run_bench(
        model, posts, counts, warmup=args.warmup, hardware_label=args.label
    )
    if args.format == "structured":
        body = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    else:
        lines = [
            f"hardware: {report.hardware_label or '(unlabeled)'}  warmup passes: {report.warmup_passes}",
            f"{'items':>8} {'elapsed_s':>12} {'posts/s':>12} {'speedup_vs_human':>18}",
        ]
        for row in report.rows:
            lines.append(
                f"{row.n:>8} {row.elapsed_sec:>12.4f} {row.throughput:>12.1f} {row.speedup:>18.1f}"
            )
        body = "\n".join(lines)
    print(body)
    return inputs, []


def _cmd_serve(args) -> tuple[list[str], list[str]]:
    model_path = args.model or os.environ.get("CLAIM_MODEL_PATH")
    model = classifier.load_model(model_path) if model_path else None
    port = args.port if args.port is not None else int(os.environ.get("CLAIM_PORT", "8080"))
    model_id = Path(model_path).stem if model_path else "none"
    server = service.make_server(
        model, host=args.host, port=port, model_id=model_id, max_batch=args.max_batch
    )
    logger.info(
        "serving",
        extra={"fields": {"host": args.host, "port": server.server_address[1], "model": model_id}},
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return [model_path] if model_path else [], []


def _cmd_verify_counts(args) -> tuple[list[str], list[str]]:
    expect = json.loads(Path(args.expect).read_text(encoding="utf-8"))
    task = expect.get("task")
    fold = expect.get("fold", "test")
    per_language = {k: tuple(v) for k, v in expect.get("per_language", {}).items()}
    totals = tuple(expect["totals"]) if "totals" in expect else None
    collection = corpus.load_collection(args.input)
    report = corpus.verify_reference_counts(
        collection, task, per_language,
        expected_totals=totals,
        fold=None if fold == "all" else fold,
    )
    if args.format == "structured":
        body = json.dumps(
            {
                "task": report.task,
                "fold": report.fold,
                "passed": report.passed,
                "rows": [
                    {
                        "language": r.language,
                        "expected": [r.expected_pos, r.expected_neg],
                        "actual": [r.actual_pos, r.actual_neg],
                        "ok": r.ok,
                    }
                    for r in report.rows + [report.totals]
                ],
            },
            indent=2,
            sort_keys=True,
        )
    else:
        lines = [
            f"task: {report.task}  fold: {report.fold or 'all'}",
            f"{'language':<10} {'exp_pos':>8} {'act_pos':>8} {'exp_neg':>8} {'act_neg':>8}  status",
        ]
        for r in report.rows + [report.totals]:
            status = "ok" if r.ok else "MISMATCH"
            lines.append(
                f"{r.language:<10} {r.expected_pos:>8} {r.actual_pos:>8} "
                f"{r.expected_neg:>8} {r.actual_neg:>8}  {status}"
            )
        lines.append("PASS" if report.passed else "FAIL")
        body = "\n".join(lines)
    print(body)
    return [args.input, args.expect], []


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> _Parser:
    parser = _Parser(prog="claimcheck", description=__doc__)
    parser.add_argument("--version", action="version", version=f"claimcheck {__version__}")
    sub = parser.add_subparsers(dest="_subcommand", required=True, metavar="SUBCOMMAND")

    def add(name: str, help_text: str, func) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--manifest", help="manifest path (default: alongside the first output)")
        return p

    p = add("ingest", "validate a dataset TSV and write it in canonical form", _cmd_ingest)
    p.add_argument("--input", required=True, help="input TSV path")
    p.add_argument("--out", required=True, help="output TSV path")
    p.add_argument("--source", help="source name recorded on each post (default: file stem)")
    p.add_argument("--id-col", default="id", help="header name of the id column")
    p.add_argument("--text-col", default="text", help="header name of the text column")
    p.add_argument("--language-col", default="language", help="header name of the language column")
    p.add_argument("--vfc-col", default="vfc_label", help="header name of the claim label column")
    p.add_argument("--harmful-col", default="harmful_label", help="header name of the harmful label column")

    p = add("preprocess", "clean and filter a dataset", _cmd_preprocess)
    p.add_argument("--input", required=True, help="input TSV path")
    p.add_argument("--out", required=True, help="output TSV path")
    p.add_argument("--method", type=int, choices=(1, 2), default=1, help="pre-processing method")
    p.add_argument("--min-len", type=int, default=15, help="minimum characters (method 2)")
    p.add_argument("--max-len", type=int, default=500, help="maximum characters (method 2)")
    p.add_argument("--min-nondigit", type=int, default=30, help="minimum non-digit characters (method 2)")

    p = add("compose", "materialize a collection from a recipe", _cmd_compose)
    p.add_argument("--recipe", required=True, help="recipe JSON path")
    p.add_argument("--out", required=True, help="output collection TSV path")
    p.add_argument("--data-dir", help="base directory for relative dataset paths")
    p.add_argument("--dataset", action="append", help="id=path override, repeatable")
    p.add_argument("--translator", help="'identity' or 'dict:PATH' for the translate transform")

    p = add("split", "assign train/val/test folds", _cmd_split)
    p.add_argument("--input", required=True, help="input TSV path")
    p.add_argument("--out", required=True, help="output collection TSV path")
    p.add_argument("--counts", help="explicit fold sizes train,val,test")
    p.add_argument("--fractions", help="fold fractions train,val,test")
    p.add_argument("--seed", type=int, default=0, help="shuffle seed")
    stratify = p.add_mutually_exclusive_group()
    stratify.add_argument("--stratify", dest="stratify", action="store_true", default=None,
                          help="force stratified assignment")
    stratify.add_argument("--no-stratify", dest="stratify", action="store_false",
                          help="force unstratified assignment")

    p = add("train", "train the baseline scorer on a split collection", _cmd_train)
    p.add_argument("--input", required=True, help="collection TSV with split column")
    p.add_argument("--out-best", required=True, help="path for the best-validation model")
    p.add_argument("--out-last", required=True, help="path for the final-epoch model")
    p.add_argument("--lr", type=float, default=0.1, help="initial learning rate")
    p.add_argument("--batch-size", type=int, default=32, help="mini-batch size")
    p.add_argument("--anneal-factor", type=float, default=0.5, help="plateau learning-rate factor")
    p.add_argument("--patience", type=int, default=3, help="non-improving epochs before annealing")
    p.add_argument("--max-epochs", type=int, default=15, help="number of training epochs")
    p.add_argument("--seed", type=int, default=0, help="training seed")
    p.add_argument("--ngram-min", type=int, default=1, help="smallest character n-gram")
    p.add_argument("--ngram-max", type=int, default=5, help="largest character n-gram")
    p.add_argument("--hash-dim", type=int, default=2**18, help="feature buckets (power of two)")
    p.add_argument("--hash-seed", type=int, default=0, help="feature hashing seed")

    p = add("predict", "score posts with a saved model", _cmd_predict)
    p.add_argument("--model", required=True, help="model file path")
    p.add_argument("--input", required=True, help="posts TSV path")
    p.add_argument("--out", required=True, help="output predictions JSONL path")
    p.add_argument("--split", default="all", choices=("all",) + corpus.FOLDS,
                   help="restrict to one fold of a collection TSV")
    p.add_argument("--provenance", help="model name stored in the predictions file")

    p = add("evaluate", "score predictions against gold labels", _cmd_evaluate)
    p.add_argument("--pred", required=True, action="append",
                   help="predictions JSONL; repeat to compare several models")
    p.add_argument("--gold", required=True, help="gold TSV path")
    p.add_argument("--task", required=True, choices=corpus.TASKS, help="task to evaluate")
    p.add_argument("--split", default="all", choices=("all",) + corpus.FOLDS,
                   help="restrict to one fold of a collection TSV")
    p.add_argument("--format", default="table", choices=("table", "structured"),
                   help="output format")
    p.add_argument("--out", help="write the report here instead of stdout")

    p = add("mcnemar", "paired significance test between two prediction files", _cmd_mcnemar)
    p.add_argument("--pred-a", required=True, help="first predictions JSONL")
    p.add_argument("--pred-b", required=True, help="second predictions JSONL")
    p.add_argument("--gold", required=True, help="gold TSV path")
    p.add_argument("--task", required=True, choices=corpus.TASKS, help="task to compare on")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p.add_argument("--method", default="auto",
                   choices=("auto", "exact-binomial", "chi-square-cc"),
                   help="force a test variant (default: by discordant count)")
    p.add_argument("--split", default="all", choices=("all",) + corpus.FOLDS,
                   help="restrict to one fold of a collection TSV")
    p.add_argument("--format", default="table", choices=("table", "structured"),
                   help="output format")

    p = add("length-analysis", "recall by character-length quartile", _cmd_length_analysis)
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--gold", required=True, help="gold TSV path")
    p.add_argument("--task", required=True, choices=corpus.TASKS, help="task to analyze")
    p.add_argument("--split", default="all", choices=("all",) + corpus.FOLDS,
                   help="restrict to one fold of a collection TSV")
    p.add_argument("--format", default="table", choices=("table", "structured"),
                   help="output format")

    p = add("bench", "time classification throughput", _cmd_bench)
    p.add_argument("--model", help="model file (default: zero-weight baseline)")
    p.add_argument("--counts", default="100,1000,2000", help="comma-separated item counts")
    p.add_argument("--warmup", type=int, default=1, help="untimed warmup passes per count")
    p.add_argument("--label", default="", help="hardware label recorded in the report")
    p.add_argument("--corpus", help="posts TSV to time on (default: synthetic corpus)")
    p.add_argument("--synth", type=int, default=2000, help="synthetic corpus size")
    p.add_argument("--seed", type=int, default=0, help="synthetic corpus seed")
    p.add_argument("--format", default="table", choices=("table", "structured"),
                   help="output format")

    p = add("serve", "run the HTTP scoring service", _cmd_serve)
    p.add_argument("--model", help="model file (or CLAIM_MODEL_PATH)")
    p.add_argument("--host", default="127.0.0.1", help="bind address")
    p.add_argument("--port", type=int, help="port (or CLAIM_PORT; default 8080)")
    p.add_argument("--max-batch", type=int, default=service.DEFAULT_MAX_BATCH,
                   help="largest accepted classify batch")

    p = add("verify-counts", "compare label counts against an expectations file", _cmd_verify_counts)
    p.add_argument("--input", required=True, help="collection TSV with split column")
    p.add_argument("--expect", required=True, help="expectations JSON path")
    p.add_argument("--format", default="table", choices=("table", "structured"),
                   help="output format")

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        return int(exc.code or 0)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    try:
        inputs, outputs = args.func(args)
    except ClaimCheckError as exc:
        logger.error(str(exc), extra={"fields": {"subcommand": args._subcommand}})
        return 2
    except OSError as exc:
        logger.error(str(exc), extra={"fields": {"subcommand": args._subcommand}})
        return 2
    _write_manifest(args, started, inputs, outputs)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
