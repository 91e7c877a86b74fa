"""Evaluation metrics: node F1, heading detection, edit-distance similarity, exact match.

Node matching is multiset-based over node keys. The strict key is
(kind, depth, joined text, ancestor heading path), the tightest structural
reading and the one consistent with exact document accuracy as its limit;
``match="loose"`` drops the ancestor path for comparability with laxer
conventions. Exact document accuracy compares content lists, never joined
strings, so the join separator is presentation only.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptyCorpusError
from .model import HEADING, PARAGRAPH, LogicalTree, tree_equal
from .treedist import similarity


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f1: float

    def to_json_obj(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def _prf(intersection: int, n_pred: int, n_gold: int) -> Score:
    if n_pred == 0 and n_gold == 0:
        return Score(1.0, 1.0, 1.0)
    precision = intersection / n_pred if n_pred else 0.0
    recall = intersection / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Score(precision, recall, f1)


def node_keys(
    tree: LogicalTree, separator: str = " ", with_path: bool = True
) -> list[tuple]:
    """One key per non-root node: (kind, depth, joined text[, ancestor heading path])."""
    keys: list[tuple] = []

    def visit(node_id: int, path: tuple[str, ...]) -> None:
        node = tree.node(node_id)
        if node_id != tree.root:
            joined = separator.join(node.content)
            depth = tree.depth(node_id)
            if with_path:
                keys.append((node.kind, depth, joined, path))
            else:
                keys.append((node.kind, depth, joined))
            if node.kind == HEADING:
                path = path + (joined,)
        for child in node.children:
            visit(child, path)

    visit(tree.root, ())
    return keys


def _category_counts(
    pred: LogicalTree,
    gold: LogicalTree,
    category: str,
    separator: str,
    with_path: bool,
) -> tuple[int, int, int]:
    def kept(key: tuple) -> bool:
        return category == "total" or key[0] == category

    pred_counter = Counter(k for k in node_keys(pred, separator, with_path) if kept(k))
    gold_counter = Counter(k for k in node_keys(gold, separator, with_path) if kept(k))
    intersection = sum((pred_counter & gold_counter).values())
    return intersection, sum(pred_counter.values()), sum(gold_counter.values())


def node_f1(
    pred: LogicalTree,
    gold: LogicalTree,
    category: str = "total",
    separator: str = " ",
    match: str = "strict",
) -> Score:
    """Multiset precision/recall/F1 over node keys, filtered by node category."""
    if category not in (HEADING, PARAGRAPH, "total"):
        raise ValueError(f"unknown category {category!r}")
    if match not in ("strict", "loose"):
        raise ValueError(f"unknown match mode {match!r}")
    counts = _category_counts(pred, gold, category, separator, match == "strict")
    return _prf(*counts)


def heading_detection_f1(
    pred: LogicalTree, gold: LogicalTree, separator: str = " "
) -> Score:
    """Flat heading detection: multiset F1 over heading texts, ignoring depth and path."""
    pred_counter = Counter(
        k[2] for k in node_keys(pred, separator, with_path=False) if k[0] == HEADING
    )
    gold_counter = Counter(
        k[2] for k in node_keys(gold, separator, with_path=False) if k[0] == HEADING
    )
    intersection = sum((pred_counter & gold_counter).values())
    return _prf(intersection, sum(pred_counter.values()), sum(gold_counter.values()))


def prune_paragraphs(tree: LogicalTree) -> LogicalTree:
    """Heading-only copy, for table-of-contents style evaluation."""
    pruned = LogicalTree()

    def visit(node_id: int, new_parent: int) -> None:
        node = tree.node(node_id)
        if node_id == tree.root:
            new_id = pruned.root
        elif node.kind == HEADING:
            new_id = pruned.add_heading(new_parent, node.level, node.content[0])
            for extra in node.content[1:]:
                pruned.append_content(new_id, extra)
        else:
            return
        for child in node.children:
            visit(child, new_id)

    visit(tree.root, pruned.root)
    return pruned


def teds(
    pred: LogicalTree,
    gold: LogicalTree,
    toc_only: bool = False,
    separator: str = " ",
) -> float:
    """Tree-edit-distance similarity in [0, 1]; 1 means structurally identical.

    Relabel cost compares (kind, joined text); node counts include the root.
    With ``toc_only`` paragraphs are pruned from both trees first.
    """
    if toc_only:
        pred = prune_paragraphs(pred)
        gold = prune_paragraphs(gold)
    return similarity(pred, gold, separator)


def doc_acc(pairs: Sequence[tuple[LogicalTree, LogicalTree]]) -> float:
    """Fraction of documents whose predicted tree exactly matches gold."""
    if not pairs:
        raise EmptyCorpusError("doc_acc needs at least one document pair")
    return sum(1 for pred, gold in pairs if tree_equal(pred, gold)) / len(pairs)


@dataclass
class DocumentEval:
    doc_id: str
    teds: float
    exact_match: bool
    total_f1: float

    def to_json_obj(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "teds": self.teds,
            "exact_match": self.exact_match,
            "total_f1": self.total_f1,
        }


@dataclass
class EvalReport:
    """Corpus-level metric roll-up with a per-document breakdown.

    F1 scores are micro-averaged (counts pooled over documents); the
    edit-distance similarity is the per-document mean.
    """

    documents: int
    heading: Score
    paragraph: Score
    total: Score
    heading_detection: Score
    teds_mean: float
    doc_acc: float
    match_mode: str = "strict"
    toc_only: bool = False
    per_document: list[DocumentEval] = field(default_factory=list)

    def to_json_obj(self) -> dict:
        return {
            "documents": self.documents,
            "match_mode": self.match_mode,
            "toc_only": self.toc_only,
            "heading": self.heading.to_json_obj(),
            "paragraph": self.paragraph.to_json_obj(),
            "total": self.total.to_json_obj(),
            "heading_detection": self.heading_detection.to_json_obj(),
            "teds_mean": self.teds_mean,
            "doc_acc": self.doc_acc,
            "per_document": [d.to_json_obj() for d in self.per_document],
        }

    def summary_lines(self) -> list[str]:
        def pct(score: Score) -> str:
            return f"P {score.precision:6.2%}  R {score.recall:6.2%}  F1 {score.f1:6.2%}"

        return [
            f"documents          {self.documents}",
            f"heading            {pct(self.heading)}",
            f"paragraph          {pct(self.paragraph)}",
            f"total              {pct(self.total)}",
            f"heading detection  {pct(self.heading_detection)}",
            f"teds (mean)        {self.teds_mean:6.2%}",
            f"doc accuracy       {self.doc_acc:6.2%}",
        ]


def evaluate_corpus(
    pairs: Iterable[tuple[str, LogicalTree, LogicalTree]],
    *,
    separator: str = " ",
    match: str = "strict",
    toc_only: bool = False,
) -> EvalReport:
    """Evaluate (doc_id, predicted, gold) triples; order of documents is irrelevant."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyCorpusError("evaluation needs at least one document pair")
    if toc_only:
        pairs = [(d, prune_paragraphs(p), prune_paragraphs(g)) for d, p, g in pairs]

    with_path = match == "strict"
    sums = {HEADING: [0, 0, 0], PARAGRAPH: [0, 0, 0], "total": [0, 0, 0], "hd": [0, 0, 0]}
    per_document: list[DocumentEval] = []
    teds_total = 0.0
    exact_total = 0

    for doc_id, pred, gold in pairs:
        for category in (HEADING, PARAGRAPH, "total"):
            counts = _category_counts(pred, gold, category, separator, with_path)
            for slot in range(3):
                sums[category][slot] += counts[slot]
        pred_hd = Counter(
            k[2] for k in node_keys(pred, separator, with_path=False) if k[0] == HEADING
        )
        gold_hd = Counter(
            k[2] for k in node_keys(gold, separator, with_path=False) if k[0] == HEADING
        )
        sums["hd"][0] += sum((pred_hd & gold_hd).values())
        sums["hd"][1] += sum(pred_hd.values())
        sums["hd"][2] += sum(gold_hd.values())

        doc_teds = teds(pred, gold, separator=separator)
        exact = tree_equal(pred, gold)
        teds_total += doc_teds
        exact_total += exact
        doc_counts = _category_counts(pred, gold, "total", separator, with_path)
        per_document.append(
            DocumentEval(doc_id, doc_teds, exact, _prf(*doc_counts).f1)
        )

    return EvalReport(
        documents=len(pairs),
        heading=_prf(*sums[HEADING]),
        paragraph=_prf(*sums[PARAGRAPH]),
        total=_prf(*sums["total"]),
        heading_detection=_prf(*sums["hd"]),
        teds_mean=teds_total / len(pairs),
        doc_acc=exact_total / len(pairs),
        match_mode=match,
        toc_only=toc_only,
        per_document=per_document,
    )
