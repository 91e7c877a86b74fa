"""Gold-data generation: tree-to-actions inversion, training examples, synthetic corpora.

The inversion walks the tree in preorder and emits one action per content
entry, a heading or paragraph opener for the first entry of each node and a
concatenation for every further entry, so segments and actions always pair
one to one and a gold replay reconstructs the tree exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable

from .engine import EngineState, apply_action
from .model import (
    HEADING,
    NEW_PARAGRAPH,
    CONCATENATION,
    Action,
    LogicalTree,
    StructuringConfig,
    TextSegment,
    validate_tree,
)
from .prompts import format_action_block, render_prompt


def tree_to_actions(tree: LogicalTree) -> tuple[list[str], list[Action]]:
    """Invert a tree into its segment texts and gold action sequence.

    Preorder from the root's children; each node contributes its content
    entries as consecutive segments, the first paired with its opening
    action and the rest with concatenations.

    The conversion is total, but the action grammar attaches each paragraph
    under the most recently added heading, so a paragraph that follows a
    heading sibling re-attaches deeper on replay. Trees meant for round
    trips must keep paragraph children ahead of heading children, as the
    synthetic generator does.
    """
    validate_tree(tree)
    segments: list[str] = []
    actions: list[Action] = []
    for node_id in tree.preorder():
        if node_id == tree.root:
            continue
        node = tree.node(node_id)
        segments.extend(node.content)
        if node.kind == HEADING:
            actions.append(Action.heading(node.level))
        else:
            actions.append(NEW_PARAGRAPH)
        actions.extend([CONCATENATION] * (len(node.content) - 1))
    return segments, actions


@dataclass(frozen=True)
class TrainingExample:
    """One prediction step's prompt paired with its gold action lines."""

    prompt: str
    target: str
    doc_id: str
    step_index: int


def emit_training_examples(
    tree: LogicalTree, config: StructuringConfig, doc_id: str = ""
) -> list[TrainingExample]:
    """Replay the gold actions and capture (prompt, target) at each step boundary.

    Training is aligned, one action per input segment, so this requires
    ``w_i == w_o``; the final partial window keeps its true remaining count.
    """
    if config.w_i != config.w_o:
        raise ValueError("training emission requires w_i == w_o")
    texts, actions = tree_to_actions(tree)
    segments = [TextSegment(doc_id, i, t) for i, t in enumerate(texts)]
    state = EngineState.initial()
    examples: list[TrainingExample] = []
    for step, start in enumerate(range(0, len(segments), config.w_i)):
        window = segments[start : start + config.w_i]
        window_actions = actions[start : start + config.w_i]
        prompt = render_prompt(state.stack, state.tree, window, config)
        examples.append(
            TrainingExample(prompt, format_action_block(window_actions), doc_id, step)
        )
        for action, segment in zip(window_actions, window):
            apply_action(state, action, segment)
    return examples


def write_training_examples(path: str, examples: Iterable[TrainingExample]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for example in examples:
            obj = {
                "doc_id": example.doc_id,
                "step": example.step_index,
                "prompt": example.prompt,
                "target": example.target,
            }
            handle.write(json.dumps(obj, ensure_ascii=False))
            handle.write("\n")


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the synthetic corpus generator.

    Heading texts carry numbering whose dotted depth matches the node depth
    ("Chapter 2", "2.1", "2.1.3"), giving rule-based predictors real signal;
    paragraphs are split across up to ``max_paragraph_lines`` segments to
    simulate OCR line breaking. A small fraction of headings is left
    unnumbered and a few are split across two lines, as noise.
    """

    doc_count: int
    max_depth: int = 4
    max_children: int = 4
    max_paragraph_lines: int = 3
    seed: int = 0
    max_segments: int = 300
    unnumbered_heading_rate: float = 0.08
    split_heading_rate: float = 0.03

    def __post_init__(self) -> None:
        if self.doc_count < 1:
            raise ValueError("doc_count must be >= 1")
        if not 1 <= self.max_depth <= 16:
            raise ValueError("max_depth must be in 1..16")
        if self.max_children < 1:
            raise ValueError("max_children must be >= 1")
        if self.max_paragraph_lines < 1:
            raise ValueError("max_paragraph_lines must be >= 1")
        if self.max_segments < 4:
            raise ValueError("max_segments must be >= 4")


_TITLE_WORDS = (
    "Overview Risk Analysis Proceeds Credit Quality Payment Security Structure "
    "Summary Scope Basis Plan Report Policy Market Capital Reserve Issuance Terms "
    "Governance Liquidity Outlook Rating Maturity Collateral Covenants Disclosure"
).split()

_BODY_WORDS = (
    "the funds raised from bonds are used for projects related to agriculture "
    "forestry water resources and social services company announced that "
    "operational revenues derived this issue with net asset value rate about "
    "equity group short term annual growth capital market investors interests "
    "rights holders proceeds repayment schedule remains stable under current "
    "conditions board approved measures during period results reflect changes"
).split()


class _DocBuilder:
    def __init__(self, spec: SyntheticSpec, rng: random.Random):
        self.spec = spec
        self.rng = rng
        self.tree = LogicalTree()
        self.depth_budget = rng.randint(1, spec.max_depth)
        # Mostly small documents, with an occasional long one.
        if rng.random() < 0.05:
            self.segment_budget = rng.randint(min(80, spec.max_segments), spec.max_segments)
        else:
            self.segment_budget = rng.randint(min(6, spec.max_segments), min(40, spec.max_segments))
        self.segments_used = 0

    def build(self) -> LogicalTree:
        self._grow(self.tree.root, depth=0, numbering="")
        if len(self.tree) == 1:
            self.tree.add_paragraph(self.tree.root, self._sentence())
        return self.tree

    def _grow(self, parent_id: int, depth: int, numbering: str) -> None:
        rng = self.rng
        child_count = rng.randint(1, self.spec.max_children)
        can_head = depth + 1 < self.depth_budget
        if can_head and rng.random() < (0.7 if depth == 0 else 0.5):
            heading_count = rng.randint(1, child_count)
        else:
            heading_count = 0
        # Paragraph children come first: the action grammar hangs each
        # paragraph off the most recent heading, so one may never follow a
        # heading sibling.
        for _ in range(child_count - heading_count):
            if self.segments_used >= self.segment_budget:
                return
            self._add_paragraph(parent_id)
        for heading_index in range(1, heading_count + 1):
            if self.segments_used >= self.segment_budget:
                return
            child_numbering = (
                str(heading_index) if not numbering else f"{numbering}.{heading_index}"
            )
            lines = self._heading_lines(depth + 1, child_numbering)
            node_id = self.tree.add_heading(parent_id, depth + 1, lines[0])
            self.segments_used += 1
            for extra in lines[1:]:
                self.tree.append_content(node_id, extra)
                self.segments_used += 1
            self._grow(node_id, depth + 1, child_numbering)

    def _add_paragraph(self, parent_id: int) -> None:
        rng = self.rng
        sentence = self._sentence()
        words = sentence.split(" ")
        line_count = rng.randint(1, min(self.spec.max_paragraph_lines, len(words)))
        line_count = min(line_count, self.segment_budget - self.segments_used)
        if line_count < 1:
            return
        cuts = sorted(rng.sample(range(1, len(words)), line_count - 1)) if line_count > 1 else []
        pieces, prev = [], 0
        for cut in cuts + [len(words)]:
            pieces.append(" ".join(words[prev:cut]))
            prev = cut
        node_id = self.tree.add_paragraph(parent_id, pieces[0])
        self.segments_used += 1
        for piece in pieces[1:]:
            self.tree.append_content(node_id, piece)
            self.segments_used += 1

    def _heading_lines(self, depth: int, numbering: str) -> list[str]:
        rng = self.rng
        words = " ".join(rng.choice(_TITLE_WORDS) for _ in range(rng.randint(1, 4)))
        if rng.random() < self.spec.unnumbered_heading_rate:
            title = words
        elif depth == 1 and rng.random() < 0.5:
            title = f"Chapter {numbering} {words}"
        else:
            title = f"{numbering} {words}" if depth > 1 else f"{numbering}. {words}"
        if (
            rng.random() < self.spec.split_heading_rate
            and self.segments_used + 2 <= self.segment_budget
            and " " in title
        ):
            head, _, tail = title.rpartition(" ")
            return [head, tail]
        return [title]

    def _sentence(self) -> str:
        rng = self.rng
        words = [rng.choice(_BODY_WORDS) for _ in range(rng.randint(6, 18))]
        if len(words) > 9 and rng.random() < 0.4:
            words[rng.randint(3, len(words) - 3)] += ","
        words[0] = words[0].capitalize()
        return " ".join(words) + "."


def generate_synthetic_tree(spec: SyntheticSpec, index: int) -> LogicalTree:
    """Deterministic tree for corpus position ``index`` under ``spec.seed``."""
    rng = random.Random(spec.seed * 1_000_003 + index)
    return _DocBuilder(spec, rng).build()


def generate_synthetic_corpus(spec: SyntheticSpec) -> list[LogicalTree]:
    """Deterministic corpus of valid trees; same spec, same trees, always."""
    return [generate_synthetic_tree(spec, i) for i in range(spec.doc_count)]
