"""Command-line entry point: ``markov-order {select,generate,structure,counts}``.

Exit codes: 0 success, 1 internal error, 2 invalid input or options.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .corpus import (CorpusError, PathCorpus, generate_markov_corpus, generate_uniform_corpus,
                     load_msnbc, parse_corpus)
from .counts import count_transitions
from .report import run_selection
from .structure import (CENTRALITIES, global_heatmap, heatmap_csv, local_graph,
                        self_transition_profile, split_by_endpoints)

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("markov_order")


class UsageError(Exception):
    pass


def _delimiter(text: str) -> str:
    named = {"tab": "\t", "\\t": "\t", "space": " ", "comma": ","}
    value = named.get(text.lower(), text)
    if len(value) != 1 or not (value.isprintable() or value == "\t"):
        raise argparse.ArgumentTypeError(f"invalid delimiter {text!r}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _read_corpus(args) -> PathCorpus:
    if args.msnbc:
        if len(args.input) != 1:
            raise UsageError("--msnbc takes exactly one --input")
        return load_msnbc(args.input[0], args.min_path_length)
    lines: list[str] = []
    for path in args.input:
        with open(path, encoding="utf-8") as fh:
            lines.extend(fh)
    return parse_corpus(lines, args.delimiter, args.min_path_length)


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _add_corpus_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", "-i", action="append", required=True,
                   help="corpus file, one path per line (repeatable)")
    p.add_argument("--delimiter", type=_delimiter, default="\t",
                   help="token delimiter: a character or tab/space/comma (default: tab)")
    p.add_argument("--min-path-length", type=_positive_int, default=2,
                   help="drop shorter paths (default: 2)")
    p.add_argument("--msnbc", action="store_true",
                   help="input is a UCI MSNBC .seq file (header skipped, categories named)")


def cmd_select(args) -> int:
    if args.max_order < 1:
        raise UsageError("--max-order must be at least 1")
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    corpus = _read_corpus(args)
    log.info("loaded %d paths, %d clicks, %d dropped", corpus.n_paths, corpus.n_clicks,
             corpus.n_dropped)
    report = run_selection(corpus, args.max_order, args.alpha, args.folds, args.seed,
                           threads=args.threads,
                           df_include_reset=not args.df_exclude_reset,
                           bic_n_include_reset=not args.bic_exclude_reset,
                           cv_include_reset_targets=not args.cv_exclude_reset)
    if args.format == "json":
        _write(report.to_json(pretty=not args.compact) + "\n", args.out)
    else:
        if not args.out or args.out == "-":
            raise UsageError("--format csv needs --out as a directory")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in report.panel_csvs().items():
            _write(text, str(out / f"{name}.csv"))
    print(report.summary(), file=sys.stderr)
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.out is None and args.truth:
        raise UsageError("--truth needs --out")
    if args.kind == "uniform":
        if args.clicks is None:
            raise UsageError("uniform generation needs --clicks")
        corpus = generate_uniform_corpus(args.states, args.clicks, args.seed)
        truth = {"generator": "uniform", "n_states": args.states,
                 "total_clicks": args.clicks, "seed": args.seed}
    else:
        if (args.clicks is None) == (args.paths is None):
            raise UsageError("markov generation needs exactly one of --clicks or --paths")
        corpus, gt = generate_markov_corpus(
            args.order, args.concentration, args.states, n_paths=args.paths,
            mean_path_length=args.mean_length, seed=args.seed, total_clicks=args.clicks)
        truth = {"generator": "markov", "order": args.order, "n_states": args.states,
                 "concentration": args.concentration, "mean_path_length": args.mean_length,
                 "n_paths": args.paths, "total_clicks": args.clicks, "seed": args.seed,
                 "labels": list(corpus.vocabulary.labels[1:]),
                 "tensor": gt.tensor.tolist()}
    truth.update(n_paths_generated=corpus.n_paths, n_clicks_generated=corpus.n_clicks)
    _write(corpus.to_text(args.delimiter), args.out)
    if args.out and args.out != "-":
        truth_path = args.truth or f"{args.out}.truth.json"
        _write(json.dumps(truth, indent=2, sort_keys=True) + "\n", truth_path)
    return EXIT_OK


def _parse_anchor(text: str | None, corpus: PathCorpus) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(corpus.vocabulary.id_of(lab) for lab in text.split(","))
    except KeyError as exc:
        raise UsageError(f"unknown anchor state {exc.args[0]!r}") from None


def cmd_structure(args) -> int:
    corpus = _read_corpus(args)
    labels = list(corpus.vocabulary.labels)
    out_dir = Path(args.out_dir)
    did_something = False
    if args.heatmap:
        _write(heatmap_csv(global_heatmap(count_transitions(corpus, 1)), labels),
               str(out_dir / args.heatmap))
        did_something = True
    if args.split_endpoints:
        same, diff = split_by_endpoints(corpus)
        for name, part in (("same", same), ("different", diff)):
            _write(heatmap_csv(global_heatmap(count_transitions(part, 1)), labels),
                   str(out_dir / f"heatmap_{name}_endpoints.csv"))
        did_something = True
    if args.graph:
        anchor = _parse_anchor(args.anchor, corpus)
        order = args.graph_order if args.graph_order else len(anchor) + 1
        if len(anchor) != order - 1:
            raise UsageError(f"--anchor must name {order - 1} states for --graph-order {order}")
        graph = local_graph(count_transitions(corpus, order), args.top_nodes, args.top_edges,
                            anchor, args.centrality)
        _write(graph.to_json(labels) + "\n", str(out_dir / args.graph))
        if not graph.anchor_found:
            log.warning("anchor %s was never observed; graph is empty", args.anchor)
        did_something = True
    if args.self_profile:
        if args.max_order < 1:
            raise UsageError("--max-order must be at least 1")
        profile = self_transition_profile(corpus, args.max_order, args.top)
        _write(profile.to_csv(labels), str(out_dir / args.self_profile))
        for t, k in profile.missing:
            log.warning("no context %s^%d observed; point omitted", labels[t], k)
        did_something = True
    if not did_something:
        raise UsageError("nothing to do: give --heatmap, --graph, --self-profile "
                         "or --split-endpoints")
    return EXIT_OK


def cmd_counts(args) -> int:
    corpus = _read_corpus(args)
    counts = count_transitions(corpus, args.order)
    _write(counts.to_csv(list(corpus.vocabulary.labels)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markov-order",
                                     description="Markov chain order selection for path corpora")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="run all order-selection methods")
    _add_corpus_options(p)
    p.add_argument("--max-order", type=int, default=5)
    p.add_argument("--alpha", type=_positive_float, default=1.0)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", "-o", help="output file (json) or directory (csv); default stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--compact", action="store_true", help="single-line JSON")
    p.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    p.add_argument("--df-exclude-reset", action="store_true",
                   help="count |S| without RESET in degrees of freedom")
    p.add_argument("--bic-exclude-reset", action="store_true",
                   help="use clicks only (no path terminations) as the BIC sample size")
    p.add_argument("--cv-exclude-reset", action="store_true",
                   help="do not score transitions into RESET during cross-validation")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("generate", help="write a synthetic corpus")
    p.add_argument("kind", choices=("uniform", "markov"))
    p.add_argument("--states", type=int, default=26)
    p.add_argument("--clicks", type=_positive_int)
    p.add_argument("--paths", type=_positive_int)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--concentration", type=_positive_float, default=1.0)
    p.add_argument("--mean-length", type=_positive_float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delimiter", type=_delimiter, default="\t")
    p.add_argument("--out", "-o")
    p.add_argument("--truth", help="ground-truth JSON path (default: OUT.truth.json)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("structure", help="heatmaps, local graphs and self-transition profiles")
    _add_corpus_options(p)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--heatmap", nargs="?", const="heatmap.csv")
    p.add_argument("--split-endpoints", action="store_true")
    p.add_argument("--graph", nargs="?", const="graph.json")
    p.add_argument("--graph-order", type=_positive_int)
    p.add_argument("--anchor", help="comma-separated context prefix, e.g. news,news")
    p.add_argument("--top-nodes", type=_positive_int, default=4)
    p.add_argument("--top-edges", type=_positive_int, default=4)
    p.add_argument("--centrality", choices=CENTRALITIES, default="incoming")
    p.add_argument("--self-profile", nargs="?", const="self_profile.csv")
    p.add_argument("--max-order", type=int, default=5)
    p.add_argument("--top", type=_positive_int, default=3)
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("counts", help="dump order-k transition counts as CSV")
    _add_corpus_options(p)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_counts)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, CorpusError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
