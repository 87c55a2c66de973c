"""Command-line front end: corpus -> profile -> scores -> model -> report.

Subcommands: build-profile, score, fit, evaluate, validate. Standard
output carries one machine-readable JSON summary line per command;
standard error carries human diagnostics. Exit codes: 0 success,
1 usage error, 2 data/validation error, 3 numerical failure.

Usage:
    driftscope build-profile --corpus train.jsonl --output profile.json
    driftscope score --profile profile.json --corpus eval.jsonl --output scores.jsonl
    driftscope fit --scores scores.jsonl --output model.json
    driftscope evaluate --model model.json --in-domain scores.jsonl \
        --out-of-domain ood.jsonl --output report.json --figures-dir figures/
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

from . import evaluation, figures, metrics, predictor, profile, schema
from .errors import DataError, DriftscopeError, NumericalError, UsageError

PROG = "driftscope"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures exit 1, per the exit-code
    contract (argparse's default is 2, which is reserved for data errors)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def _atomic_writer(path: str | Path):
    """Write to a sibling temp file; publish on success, drop on failure."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    fh = open(tmp, "w", encoding="utf-8")
    try:
        yield fh
        fh.close()
        os.replace(tmp, path)
    except BaseException:
        fh.close()
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _parse_metric_list(raw: str | None) -> list[str] | None:
    if raw is None:
        return None
    names = [part for part in (s.strip() for s in raw.split(",")) if part]
    if not names:
        raise UsageError("empty metric selection")
    return names


def _check_scoring_params(floor: float, k: float) -> None:
    if not 0.0 < floor < 1.0:
        raise UsageError(f"--oov-floor must lie in (0, 1); got {floor}")
    if k <= 0.0:
        raise UsageError(f"--smoothing-k must be positive; got {k}")


def _emit(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def cmd_build_profile(args) -> int:
    sources = args.corpus or []
    shards = args.merge or []
    if not sources and not shards:
        raise UsageError("build-profile needs at least one --corpus or --merge input")
    built: profile.TrainProfile | None = None
    for path in sources:
        handle, stream = schema.load_corpus(path)
        part = profile.build_profile(stream, dim=handle.dim)
        built = part if built is None else profile.merge_profiles(built, part)
    for path in shards:
        part = profile.load_profile(path)
        built = part if built is None else profile.merge_profiles(built, part)
    assert built is not None
    profile.save_profile(built, args.output)
    _emit({
        "examples": built.example_count,
        "dim": built.dim,
        "domains": dict(built.domains),
        "content_vocabulary": len(built.content_unigrams.counts),
        "subword_vocabulary": len(built.subword_unigrams.counts),
        "pos_contexts": len(built.pos_ngrams.context_counts),
        "token_embedding_vocabulary": len(built.token_embeddings.sums),
        "examples_with_embedding": built.example_embedding_count,
        "output": str(args.output),
    })
    return EXIT_OK


def cmd_score(args) -> int:
    _check_scoring_params(args.oov_floor, args.smoothing_k)
    selected = metrics.resolve_metrics(_parse_metric_list(args.metrics))
    prof = profile.load_profile(args.profile)
    _, stream = schema.load_corpus(args.corpus)

    def scored_rows():
        for example in stream:
            vector = metrics.score_example(example, prof, selected,
                                           floor=args.oov_floor, k=args.smoothing_k)
            yield metrics.ScoredExample(vector=vector, domain=example.domain,
                                        correct=example.correct)

    with _atomic_writer(args.output) as sink:
        if args.format == "csv":
            n = metrics.write_scores_csv(scored_rows(), sink, selected)
        else:
            n = metrics.write_scores_jsonl(scored_rows(), sink, selected)
    _emit({"examples": n, "metrics": selected, "format": args.format,
           "output": str(args.output)})
    return EXIT_OK


def _load_labeled_scores(path: str | Path) -> tuple[list, int]:
    """Rows with a correctness label, plus the count of unlabeled rows."""
    rows = metrics.read_scores_jsonl(path)
    labeled = [r for r in rows if r.correct is not None]
    return labeled, len(rows) - len(labeled)


def cmd_fit(args) -> int:
    if args.ridge < 0:
        raise UsageError(f"--ridge must be nonnegative; got {args.ridge}")
    labeled, n_unlabeled = _load_labeled_scores(args.scores)
    if n_unlabeled:
        print(f"{PROG}: excluding {n_unlabeled} unlabeled examples from the fit",
              file=sys.stderr)
    if not labeled:
        raise DataError(f"no labeled examples in '{args.scores}'")
    selection = _parse_metric_list(args.metrics)
    if selection is None:
        present = {name for row in labeled for name, value in
                   ((n, row.vector.value(n)) for n in metrics.METRIC_NAMES)
                   if value is not None}
        selection = [m for m in metrics.METRIC_NAMES if m in present]
        if not selection:
            raise DataError(f"score file '{args.scores}' carries no metric values")
    matrix = predictor.assemble_features([r.vector for r in labeled],
                                         [bool(r.correct) for r in labeled],
                                         selection)
    for warning in matrix.warnings:
        print(f"{PROG}: warning: {warning}", file=sys.stderr)
    model = predictor.fit_logistic(matrix, ridge=args.ridge)
    predictor.save_model(model, args.output)
    if not model.diagnostics.get("converged", False):
        print(f"{PROG}: warning: fit did not converge within "
              f"{predictor.MAX_ITERATIONS} iterations", file=sys.stderr)
    _emit({
        "features": list(model.feature_names),
        "weights": [float(w) for w in model.weights],
        "intercept": model.intercept,
        "n_rows": len(matrix.labels),
        "n_excluded_missing_metric": matrix.n_excluded,
        "n_excluded_unlabeled": n_unlabeled,
        "iterations": model.diagnostics["iterations"],
        "gradient_norm": model.diagnostics["gradient_norm"],
        "converged": model.diagnostics["converged"],
        "output": str(args.output),
    })
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.folds < 2:
        raise UsageError(f"--folds must be at least 2; got {args.folds}")
    model = predictor.load_model(args.model)

    def load_datasets(paths):
        out = []
        for path in paths or []:
            rows, n_unlabeled = _load_labeled_scores(path)
            if n_unlabeled:
                raise DataError(f"dataset '{Path(path).stem}' has {n_unlabeled} "
                                f"examples without a correctness label")
            out.append((Path(path).stem, rows))
        return out

    in_domain = load_datasets(args.in_domain)
    out_of_domain = load_datasets(args.out_of_domain)
    names = [name for name, _ in in_domain + out_of_domain]
    duplicates = {n for n in names if names.count(n) > 1}
    if duplicates:
        raise UsageError("duplicate dataset names (rename the input files): "
                         + ", ".join(sorted(duplicates)))

    report = evaluation.evaluate_model(model, in_domain, out_of_domain,
                                       folds=args.folds, seed=args.seed,
                                       ridge=args.ridge,
                                       in_domain_accuracy=args.in_domain_accuracy)
    output = Path(args.output)
    with _atomic_writer(output) as sink:
        report.write_json(sink)
    csv_path = output.with_suffix(".csv")
    if csv_path == output:
        csv_path = output.with_name(output.name + ".csv")
    with _atomic_writer(csv_path) as sink:
        report.write_csv(sink)
    figure_paths: list[str] = []
    if args.figures_dir:
        figure_paths = [str(p) for p in
                        figures.render_report_figures(report, args.figures_dir)]
    summary = report.to_dict()["aggregate"]
    summary.update({"output": str(output), "csv": str(csv_path),
                    "figures": figure_paths})
    _emit(summary)
    return EXIT_OK


def cmd_validate(args) -> int:
    summary = schema.validate_corpus(args.corpus)
    _emit(summary.to_dict())
    return EXIT_OK if not summary.issues else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description=__doc__.splitlines()[0],
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-profile", help="aggregate a training corpus into a profile")
    p.add_argument("--corpus", action="append", metavar="JSONL",
                   help="annotated training corpus (repeatable)")
    p.add_argument("--merge", action="append", metavar="PROFILE",
                   help="existing profile shard to merge in (repeatable)")
    p.add_argument("--output", required=True, metavar="PROFILE")
    p.set_defaults(func=cmd_build_profile)

    p = sub.add_parser("score", help="compute drift metrics for an evaluation corpus")
    p.add_argument("--profile", required=True, metavar="PROFILE")
    p.add_argument("--corpus", required=True, metavar="JSONL")
    p.add_argument("--output", required=True, metavar="SCORES")
    p.add_argument("--metrics", metavar="LIST",
                   help="comma-separated metric names (default: all)")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--oov-floor", type=float, default=profile.DEFAULT_OOV_FLOOR,
                   metavar="EPS", help="out-of-vocabulary probability floor")
    p.add_argument("--smoothing-k", type=float, default=profile.DEFAULT_SMOOTHING_K,
                   metavar="K", help="add-k smoothing constant for the tag model")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("fit", help="fit the correctness regression on labeled scores")
    p.add_argument("--scores", required=True, metavar="SCORES")
    p.add_argument("--output", required=True, metavar="MODEL")
    p.add_argument("--metrics", metavar="LIST",
                   help="comma-separated feature metrics (default: those present)")
    p.add_argument("--ridge", type=float, default=predictor.DEFAULT_RIDGE)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="score a fitted model over datasets")
    p.add_argument("--model", required=True, metavar="MODEL")
    p.add_argument("--in-domain", action="append", metavar="SCORES",
                   help="labeled in-domain score file (repeatable)")
    p.add_argument("--out-of-domain", action="append", metavar="SCORES",
                   help="labeled out-of-domain score file (repeatable)")
    p.add_argument("--output", required=True, metavar="REPORT",
                   help="report path; a flat CSV is written next to it")
    p.add_argument("--figures-dir", metavar="DIR",
                   help="also render ROC and accuracy figures into this directory")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ridge", type=float, default=None,
                   help="ridge for cross-validation refits (default: the model's)")
    p.add_argument("--in-domain-accuracy", type=float, default=None,
                   help="baseline accuracy (default: pooled in-domain actual)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("validate", help="check a corpus against the annotation format")
    p.add_argument("--corpus", required=True, metavar="JSONL")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"{PROG}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DataError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DriftscopeError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
