"""Command-line front end: structure, dataset, eval, selfcheck.

Every run writes a machine-readable manifest (inputs, configuration, seed,
versions, timings, per-document reports) next to its output, so published
results can be reproduced. Exit codes: 0 success, 1 validation error,
2 runtime error, 3 property failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .constraints import BUILTIN_PROFILES, ConstraintPolicy, TokenizerProfile
from .corpus import (
    ActionDocument,
    SegmentDocument,
    TreeDocument,
    read_actions,
    read_segments,
    read_trees,
    write_actions,
    write_segments,
    write_trees,
)
from .datagen import (
    SyntheticSpec,
    emit_training_examples,
    generate_synthetic_corpus,
    tree_to_actions,
    write_training_examples,
)
from .engine import structure_document
from .errors import DocstructError, FormatError, JoinError
from .metrics import evaluate_corpus
from .model import StructuringConfig, TextSegment
from .predictors import HeuristicPredictor, OraclePredictor, RemotePredictor
from .treedist import kernel_name

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PROPERTY = 3


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with the validation code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _manifest_base(command: str, args: argparse.Namespace) -> dict:
    return {
        "command": command,
        "args": {k: v for k, v in vars(args).items() if k != "func"},
        "version": __version__,
        "python": sys.version.split()[0],
        "edit_distance_kernel": kernel_name(),
        "started_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def _write_manifest(path: str, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def _default_manifest_path(out: str) -> str:
    return out + ".manifest.json"


def _resolve_profile(name: str) -> TokenizerProfile:
    if name in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[name]
    if os.path.exists(name):
        return TokenizerProfile.load(name)
    raise DocstructError(
        f"unknown tokenizer profile {name!r} (builtin: {sorted(BUILTIN_PROFILES)})"
    )


# --- structure --------------------------------------------------------------

def cmd_structure(args: argparse.Namespace) -> int:
    if args.predictor == "oracle" and not args.gold_actions:
        print("error: --predictor oracle requires --gold-actions", file=sys.stderr)
        return EXIT_VALIDATION
    if args.predictor == "remote" and not args.endpoint:
        print("error: --predictor remote requires --endpoint", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        config = StructuringConfig(
            w_i=args.wi,
            w_o=args.wo,
            join_separator=args.join_separator,
            stack_entry_truncation=args.truncate_stack,
        )
        profile = _resolve_profile(args.profile)
        policy = ConstraintPolicy(mode=args.constraint_mode, profile=profile)
    except (ValueError, DocstructError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        documents = read_segments(args.input)
        gold_actions = None
        if args.gold_actions:
            gold_actions = {d.doc_id: d.actions for d in read_actions(args.gold_actions)}
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    def make_predictor(doc: SegmentDocument):
        if args.predictor == "oracle":
            actions = gold_actions.get(doc.doc_id)
            if actions is None:
                raise DocstructError(f"no gold actions for doc_id {doc.doc_id!r}")
            return OraclePredictor(actions, commit_window=config.w_o)
        if args.predictor == "heuristic":
            return HeuristicPredictor()
        return RemotePredictor(
            args.endpoint,
            timeout_s=args.timeout,
            max_attempts=args.retries,
            max_new_tokens_per_action=args.max_new_tokens_per_action,
        )

    def run_one(doc: SegmentDocument):
        predictor = make_predictor(doc)
        tree, report = structure_document(
            list(doc.segments), predictor, config, policy, doc_id=doc.doc_id
        )
        return TreeDocument(doc.doc_id, tree), report

    manifest = _manifest_base("structure", args)
    manifest["tokenizer_profile"] = profile.name
    manifest["constraint_mode"] = policy.mode
    started = time.perf_counter()
    outputs: list[TreeDocument] = []
    reports = []
    errors: list[str] = []
    workers = args.workers or min(32, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_one, doc) for doc in documents]
        for doc, future in zip(documents, futures):
            try:
                tree_doc, report = future.result()
            except DocstructError as exc:
                errors.append(f"{doc.doc_id}: {exc}")
                continue
            outputs.append(tree_doc)
            reports.append(report.to_json_obj())
            if args.print_tree:
                print(f"# {doc.doc_id}")
                print(tree_doc.tree.pretty(config.join_separator))

    write_trees(args.out, outputs)
    manifest["wall_ms_total"] = (time.perf_counter() - started) * 1000.0
    manifest["documents"] = reports
    manifest["errors"] = errors
    _write_manifest(args.manifest or _default_manifest_path(args.out), manifest)
    if errors:
        print(f"{len(errors)} document(s) aborted:", file=sys.stderr)
        for line in errors:
            print(f"  {line}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"structured {len(outputs)} document(s) -> {args.out}")
    return EXIT_OK


# --- dataset ----------------------------------------------------------------

def cmd_dataset(args: argparse.Namespace) -> int:
    if args.synthetic == (args.trees is not None):
        print("error: use exactly one of --synthetic or --trees", file=sys.stderr)
        return EXIT_VALIDATION
    manifest = _manifest_base("dataset", args)
    started = time.perf_counter()

    if args.synthetic:
        if not args.out:
            print("error: --synthetic requires --out", file=sys.stderr)
            return EXIT_VALIDATION
        try:
            spec = SyntheticSpec(
                doc_count=args.docs,
                max_depth=args.max_depth,
                max_children=args.max_children,
                max_paragraph_lines=args.max_paragraph_lines,
                seed=args.seed,
            )
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        trees = generate_synthetic_corpus(spec)
        documents = [
            TreeDocument(f"synth-{args.seed}-{i:05d}", tree) for i, tree in enumerate(trees)
        ]
        write_trees(args.out, documents)
        manifest["documents"] = len(documents)
        manifest["wall_ms_total"] = (time.perf_counter() - started) * 1000.0
        _write_manifest(args.manifest or _default_manifest_path(args.out), manifest)
        print(f"wrote {len(documents)} synthetic tree(s) -> {args.out}")
        return EXIT_OK

    try:
        documents = read_trees(args.trees)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    wrote = []
    if args.segments_out or args.actions_out:
        segment_docs = []
        action_docs = []
        for doc in documents:
            texts, actions = tree_to_actions(doc.tree)
            segments = tuple(TextSegment(doc.doc_id, i, t) for i, t in enumerate(texts))
            segment_docs.append(SegmentDocument(doc.doc_id, segments))
            action_docs.append(ActionDocument(doc.doc_id, tuple(actions)))
        if args.segments_out:
            write_segments(args.segments_out, segment_docs)
            wrote.append(args.segments_out)
        if args.actions_out:
            write_actions(args.actions_out, action_docs)
            wrote.append(args.actions_out)

    if args.out:
        try:
            config = StructuringConfig(w_i=args.wi, w_o=args.wi)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        examples = []
        for doc in documents:
            examples.extend(emit_training_examples(doc.tree, config, doc.doc_id))
        write_training_examples(args.out, examples)
        manifest["examples"] = len(examples)
        wrote.append(args.out)

    if not wrote:
        print("error: nothing to do (need --out, --segments-out, or --actions-out)", file=sys.stderr)
        return EXIT_VALIDATION
    manifest["wall_ms_total"] = (time.perf_counter() - started) * 1000.0
    _write_manifest(args.manifest or _default_manifest_path(wrote[0]), manifest)
    print(f"wrote {', '.join(wrote)}")
    return EXIT_OK


# --- eval -------------------------------------------------------------------

def cmd_eval(args: argparse.Namespace) -> int:
    try:
        pred_docs = {d.doc_id: d.tree for d in read_trees(args.pred)}
        gold_docs = {d.doc_id: d.tree for d in read_trees(args.gold)}
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    missing_pred = sorted(set(gold_docs) - set(pred_docs))
    missing_gold = sorted(set(pred_docs) - set(gold_docs))
    if missing_pred or missing_gold:
        error = JoinError(missing_pred, missing_gold)
        print(f"error: {error}", file=sys.stderr)
        return EXIT_VALIDATION

    pairs = [(doc_id, pred_docs[doc_id], gold_docs[doc_id]) for doc_id in sorted(gold_docs)]
    report = evaluate_corpus(
        pairs, separator=args.join_separator, match=args.match, toc_only=args.toc_only
    )
    for line in report.summary_lines():
        print(line)
    if args.out:
        manifest = _manifest_base("eval", args)
        obj = report.to_json_obj()
        obj["manifest"] = manifest
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(obj, handle, ensure_ascii=False, indent=2)
            handle.write("\n")
        print(f"report -> {args.out}")
    return EXIT_OK


# --- selfcheck --------------------------------------------------------------

def cmd_selfcheck(args: argparse.Namespace) -> int:
    from . import selfcheck

    results = selfcheck.run_all(
        trials=args.trials, seed=args.seed, include_baseline=args.baseline
    )
    for result in results:
        print(result.line())
    failures = [r for r in results if not r.passed]
    if failures:
        first = failures[0]
        print(f"first failure: {first.name}: {first.detail}", file=sys.stderr)
        return EXIT_PROPERTY
    print(f"all {len(results)} properties hold")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="docstruct", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("structure", help="segments.jsonl -> trees.jsonl")
    p.add_argument("--input", required=True, help="segments JSONL")
    p.add_argument("--predictor", required=True, choices=["oracle", "heuristic", "remote"])
    p.add_argument("--wi", type=int, default=3, help="input segment window")
    p.add_argument("--wo", type=int, default=3, help="output action window")
    p.add_argument("--out", required=True, help="trees JSONL output")
    p.add_argument("--gold-actions", help="actions JSONL (oracle predictor)")
    p.add_argument("--endpoint", default=os.environ.get("DOCSTRUCT_REMOTE_ENDPOINT"))
    p.add_argument("--timeout", type=float, default=30.0, help="remote timeout seconds")
    p.add_argument("--retries", type=int, default=3, help="remote attempt limit")
    p.add_argument("--max-new-tokens-per-action", type=int, default=8)
    p.add_argument("--profile", default="baichuan-7b", help="tokenizer profile name or file")
    p.add_argument("--constraint-mode", default="repair", choices=["mask", "repair", "strict"])
    p.add_argument("--join-separator", default=" ")
    p.add_argument("--truncate-stack", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--manifest", help="manifest path (default <out>.manifest.json)")
    p.add_argument("--print-tree", action="store_true")
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("dataset", help="training data / gold exports / synthetic corpora")
    p.add_argument("--trees", help="trees JSONL input")
    p.add_argument("--synthetic", action="store_true")
    p.add_argument("--docs", type=int, default=100, help="synthetic document count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-depth", type=int, default=4)
    p.add_argument("--max-children", type=int, default=4)
    p.add_argument("--max-paragraph-lines", type=int, default=3)
    p.add_argument("--wi", type=int, default=3, help="training window (w_o = w_i)")
    p.add_argument("--out", help="training JSONL or synthetic trees JSONL")
    p.add_argument("--segments-out", help="export gold segments JSONL")
    p.add_argument("--actions-out", help="export gold actions JSONL")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("eval", help="compare predicted and gold trees")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--toc-only", action="store_true", help="prune paragraphs first")
    p.add_argument("--match", default="strict", choices=["strict", "loose"])
    p.add_argument("--join-separator", default=" ")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("selfcheck", help="run the property suite")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--baseline", action="store_true", default=True,
                   help="include shift-reduce comparison properties (default on)")
    p.add_argument("--no-baseline", dest="baseline", action="store_false")
    p.set_defaults(func=cmd_selfcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "structure" and not 1 <= args.wo <= args.wi:
        print(
            f"error: need 1 <= w_o <= w_i, got w_o={args.wo}, w_i={args.wi}",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except DocstructError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
