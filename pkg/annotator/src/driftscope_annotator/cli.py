"""Command-line front end for corpus annotation.

Subcommands: run (annotate raw documents), verify (validate an output
file). Standard output carries one machine-readable JSON summary line
per command; standard error carries diagnostics such as skipped
document ids. Exit codes: 0 success, 1 usage error, 2 data/validation
error (including unloadable tagger or embedding models).

Usage:
    drift-annotate run --input docs.txt --output corpus.jsonl
    drift-annotate run --input rows.tsv --output corpus.jsonl \
        --tagger builtin:rule-en --embedder hashed:16 --layers last-2
    drift-annotate verify --corpus corpus.jsonl
"""

from __future__ import annotations

import argparse
import json
import sys

from driftscope import DriftscopeError, UsageError

from .pipeline import AnnotationJob, annotate, verify_output

PROG = "drift-annotate"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage failures exit 1, per the exit-code
    contract (argparse's default is 2, which is reserved for data errors)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(summary: dict) -> None:
    print(json.dumps(summary, sort_keys=True))


def cmd_run(args) -> int:
    job = AnnotationJob(input_path=args.input, output_path=args.output,
                        tagger_id=args.tagger, embedder_id=args.embedder,
                        layers=args.layers, input_format=args.format,
                        default_domain=args.domain)
    result = annotate(job)
    for doc_id in result.skipped:
        print(f"{PROG}: skipped '{doc_id}': no tokens", file=sys.stderr)
    _emit(result.to_dict())
    return EXIT_OK


def cmd_verify(args) -> int:
    summary = verify_output(args.corpus)
    _emit(summary.to_dict())
    return EXIT_OK if not summary.issues else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description=__doc__.splitlines()[0],
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="annotate raw documents into a corpus file")
    p.add_argument("--input", required=True, metavar="FILE",
                   help="text file (one document per line) or .csv/.tsv with "
                        "a 'text' column and optional id/domain/correct")
    p.add_argument("--output", required=True, metavar="JSONL")
    p.add_argument("--tagger", default="builtin:rule-en", metavar="ID",
                   help="tagger pipeline: builtin:rule-en or spacy:<pipeline>")
    p.add_argument("--embedder", default="hashed:16", metavar="ID",
                   help="embedding backend: none, hashed:<dim>, or "
                        "hf:<model-or-path>")
    p.add_argument("--layers", default="last-2", metavar="SPEC",
                   help="layers to average: 'last-N' or comma-separated indices")
    p.add_argument("--format", choices=("text", "delimited"), default=None,
                   help="input format (default: by file suffix)")
    p.add_argument("--domain", default="default", metavar="NAME",
                   help="domain for documents that do not declare one")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="validate an annotated corpus file")
    p.add_argument("--corpus", required=True, metavar="JSONL")
    p.set_defaults(func=cmd_verify)
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
