"""Shift-reduce baseline: pairwise transitions over (stack top, pending segment).

Four actions drive construction: attach the pending segment as a sub-heading
or sub-text of the stack top, pop the top and re-compare (reduce), or append
the pending text to the top node (concat). A segment can be re-examined many
times through reduces, so a run takes N plus the number of reduces
transitions, never fewer than the one-action-per-segment engine.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .engine import RunReport
from .errors import (
    InvalidTransitionError,
    LivelockError,
    MalformedActionError,
    PredictorError,
)
from .model import (
    HEADING,
    MAX_HEADING_LEVEL,
    PARAGRAPH,
    ContextStack,
    LogicalTree,
    StructuringConfig,
    TextSegment,
    validate_tree,
)
from .predictors import ActionPredictor, PredictionRequest, PredictionResponse
from .prompts import ACTION_HEADER, SEGMENT_HEADER, render_prompt

TOP_HEADER = "### TOP:"


class TracerAction(Enum):
    SUB_HEADING = "sub-heading"
    SUB_TEXT = "sub-text"
    REDUCE = "reduce"
    CONCAT = "concat"


def tracer_action_to_string(action: TracerAction) -> str:
    return action.value


def string_to_tracer_action(s: str) -> TracerAction:
    for action in TracerAction:
        if action.value == s:
            return action
    raise MalformedActionError(f"not a shift-reduce action string: {s!r}")


@dataclass
class TracerState:
    tree: LogicalTree
    stack: list[int]
    pending: TextSegment | None = None

    @staticmethod
    def initial() -> "TracerState":
        tree = LogicalTree()
        return TracerState(tree, [tree.root])


def tracer_allowed_actions(state: TracerState) -> frozenset[TracerAction]:
    """Legal actions for the current stack.

    Only attachments are legal on the bare root (it can neither pop nor take
    text), and a paragraph top only admits reduce or concat since paragraphs
    stay leaves.
    """
    if len(state.stack) == 1:
        return frozenset({TracerAction.SUB_HEADING, TracerAction.SUB_TEXT})
    if state.tree.node(state.stack[-1]).kind == PARAGRAPH:
        return frozenset({TracerAction.REDUCE, TracerAction.CONCAT})
    return frozenset(TracerAction)


def tracer_step(state: TracerState, action: TracerAction) -> TracerState:
    """Apply one transition in place; attachments and concat consume the pending segment."""
    if action not in tracer_allowed_actions(state):
        raise InvalidTransitionError(f"{action.value} not legal for this stack")
    top = state.stack[-1]
    if action is TracerAction.REDUCE:
        state.stack.pop()
        return state
    if state.pending is None:
        raise InvalidTransitionError(f"{action.value} requires a pending segment")
    if action is TracerAction.SUB_HEADING:
        level = (state.tree.node(top).level or 0) + 1
        node_id = state.tree.add_heading(top, level, state.pending.text)
        state.stack.append(node_id)
    elif action is TracerAction.SUB_TEXT:
        node_id = state.tree.add_paragraph(top, state.pending.text)
        state.stack.append(node_id)
    else:
        state.tree.append_content(top, state.pending.text)
    state.pending = None
    return state


def tracer_gold_actions(tree: LogicalTree) -> tuple[list[str], list[TracerAction]]:
    """Inverse transition sequence: the minimal action run that rebuilds the tree."""
    validate_tree(tree)
    segments: list[str] = []
    actions: list[TracerAction] = []
    stack = [tree.root]
    for node_id in tree.preorder():
        if node_id == tree.root:
            continue
        node = tree.node(node_id)
        while stack[-1] != node.parent:
            actions.append(TracerAction.REDUCE)
            stack.pop()
        if node.kind == HEADING:
            actions.append(TracerAction.SUB_HEADING)
        else:
            actions.append(TracerAction.SUB_TEXT)
        segments.append(node.content[0])
        stack.append(node_id)
        for extra in node.content[1:]:
            actions.append(TracerAction.CONCAT)
            segments.append(extra)
    return segments, actions


class TracerGoldPredictor:
    """Replays a gold shift-reduce action sequence one transition per call."""

    def __init__(self, gold_actions: Sequence[TracerAction]):
        self._gold = list(gold_actions)
        self._cursor = 0

    def predict(self, request: PredictionRequest) -> PredictionResponse:
        if self._cursor >= len(self._gold):
            raise PredictorError("gold shift-reduce sequence exhausted")
        action = self._gold[self._cursor]
        self._cursor += 1
        return PredictionResponse(action.value + "\n", 0.0)


def _pairwise_prompt(state: TracerState, config: StructuringConfig) -> str:
    top = state.stack[-1]
    top_text = "" if top == state.tree.root else state.tree.joined(top, config.join_separator)
    return (
        f"{TOP_HEADER}\n{top_text}\n\n"
        f"{SEGMENT_HEADER}\n{state.pending.text}\n\n"
        f"{ACTION_HEADER}\n"
    )


def _global_context_prompt(state: TracerState, config: StructuringConfig) -> str:
    stack = ContextStack(
        list(state.stack),
        has_paragraph_top=state.tree.node(state.stack[-1]).kind == PARAGRAPH,
    )
    return render_prompt(stack, state.tree, [state.pending], config)


def tracer_structure_document(
    segments: Sequence[TextSegment],
    predictor: ActionPredictor,
    config: StructuringConfig,
    *,
    use_global_context: bool = True,
    doc_id: str | None = None,
) -> tuple[LogicalTree, RunReport]:
    """Run the shift-reduce loop: re-query until each segment is consumed.

    ``use_global_context`` renders the full stack template per query; the
    plain configuration shows only the stack-top text and the pending
    segment. A predicted action outside the legal set skips the segment.
    """
    if doc_id is None:
        doc_id = segments[0].doc_id if segments else ""
    started = time.perf_counter()
    state = TracerState.initial()
    transitions = 0
    reduces = 0
    skipped: list[int] = []
    budget = (MAX_HEADING_LEVEL + 2) * max(1, len(segments))

    for segment in segments:
        state.pending = segment
        while state.pending is not None:
            if transitions >= budget:
                raise LivelockError(
                    f"{transitions} transitions without consuming segment {segment.index}"
                )
            prompt = (
                _global_context_prompt(state, config)
                if use_global_context
                else _pairwise_prompt(state, config)
            )
            response = predictor.predict(PredictionRequest(prompt, expected_actions=1))
            line = response.action_lines.strip().split("\n")[0].strip()
            try:
                action = string_to_tracer_action(line)
            except MalformedActionError:
                skipped.append(segment.index)
                state.pending = None
                break
            if action not in tracer_allowed_actions(state):
                skipped.append(segment.index)
                state.pending = None
                break
            transitions += 1
            if action is TracerAction.REDUCE:
                reduces += 1
            tracer_step(state, action)

    wall_ms = (time.perf_counter() - started) * 1000.0
    report = RunReport(
        doc_id,
        steps=transitions,
        skipped_segment_indices=skipped,
        wall_ms=wall_ms,
        transitions=transitions,
        reduces=reduces,
    )
    return state.tree, report
