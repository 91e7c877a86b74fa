"""Transition engine: applies structuring actions and runs the windowed loop.

Construction is strictly sequential within a document. Each step shows the
predictor ``w_i`` segments starting at the commit frontier, commits the first
``min(w_o, remaining)`` predicted actions, and drops the rest as look-ahead;
the next step re-predicts them against the updated stack. A step whose
output fails to parse skips exactly its committed segments and the run
continues.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .constraints import (
    ConstraintPolicy,
    DecoderState,
    allowed_next_tokens,
    validate_and_repair,
)
from .errors import InvalidTransitionError, MismatchError, PredictorError
from .model import (
    Action,
    ContextStack,
    LogicalTree,
    StructuringConfig,
    TextSegment,
    validate_stack,
    validate_tree,
)
from .predictors import ActionPredictor, ConstraintHints, PredictionRequest
from .prompts import parse_action_block, render_prompt


@dataclass
class EngineState:
    tree: LogicalTree
    stack: ContextStack
    consumed: int = 0
    skipped: list[int] = field(default_factory=list)
    last_touched: int | None = None

    @staticmethod
    def initial() -> "EngineState":
        tree = LogicalTree()
        return EngineState(tree, ContextStack.initial(tree.root))


@dataclass
class RunReport:
    """Per-document accounting for one structuring run."""

    doc_id: str
    steps: int
    skipped_segment_indices: list[int]
    wall_ms: float
    transitions: int | None = None
    reduces: int | None = None

    def to_json_obj(self) -> dict:
        obj = {
            "doc_id": self.doc_id,
            "steps": self.steps,
            "skipped_segment_indices": list(self.skipped_segment_indices),
            "wall_ms": self.wall_ms,
        }
        if self.transitions is not None:
            obj["transitions"] = self.transitions
        if self.reduces is not None:
            obj["reduces"] = self.reduces
        return obj


def update_stack(stack: ContextStack, action: Action, new_node: int | None) -> ContextStack:
    """The stack half of an action, as a pure function.

    A level-k heading pops until the level-(k-1) heading is on top, then
    pushes; a paragraph replaces any paragraph top; concatenation leaves the
    stack untouched.
    """
    if action.is_heading:
        if new_node is None:
            raise InvalidTransitionError("heading actions push a new node")
        if action.level > stack.max_heading_level + 1:
            raise InvalidTransitionError(
                f"level-{action.level} heading skips past {stack.max_heading_level + 1}"
            )
        return ContextStack(stack.entries[: action.level] + [new_node], False)
    if action.is_paragraph:
        if new_node is None:
            raise InvalidTransitionError("paragraph actions push a new node")
        kept = stack.entries[:-1] if stack.has_paragraph_top else list(stack.entries)
        return ContextStack(kept + [new_node], True)
    if stack.is_root_only:
        raise InvalidTransitionError("concatenation with only the root on the stack")
    return stack.copy()


def apply_action(state: EngineState, action: Action, segment: TextSegment) -> EngineState:
    """Execute one validated action against the tree and stack, in place.

    Callers must have run the action through constraint validation first;
    InvalidTransitionError here signals a bypass, not bad model output.
    """
    tree, stack = state.tree, state.stack
    if action.is_heading:
        if action.level > stack.max_heading_level + 1:
            raise InvalidTransitionError(
                f"level-{action.level} heading skips past {stack.max_heading_level + 1}"
            )
        parent = stack.entries[action.level - 1]
        node_id = tree.add_heading(parent, action.level, segment.text)
    elif action.is_paragraph:
        parent = stack.entries[-2] if stack.has_paragraph_top else stack.entries[-1]
        node_id = tree.add_paragraph(parent, segment.text)
    else:
        if stack.is_root_only:
            raise InvalidTransitionError("concatenation with only the root on the stack")
        node_id = stack.top
        tree.append_content(node_id, segment.text)
    state.stack = update_stack(stack, action, None if action.is_concat else node_id)
    state.consumed += 1
    state.last_touched = node_id
    return state


def check_engine_invariants(state: EngineState) -> None:
    """Debug validator: full tree/stack invariants plus stack-equals-path."""
    validate_tree(state.tree)
    validate_stack(state.stack, state.tree)
    if state.last_touched is not None:
        path = state.tree.path_to(state.last_touched)
        if state.stack.entries != path:
            raise InvalidTransitionError(
                f"stack {state.stack.entries} is not the path to the last touched node {path}"
            )


def structure_document(
    segments: Sequence[TextSegment],
    predictor: ActionPredictor,
    config: StructuringConfig,
    constraints: ConstraintPolicy | None = None,
    *,
    doc_id: str | None = None,
    debug: bool = False,
) -> tuple[LogicalTree, RunReport]:
    """Run the full windowed structuring loop over one document.

    Returns the constructed tree and a report with the step count, skipped
    segment indices, and wall-clock time. Predictor transport failures
    propagate as PredictorError annotated with the failing step.
    """
    policy = constraints if constraints is not None else ConstraintPolicy()
    if doc_id is None:
        doc_id = segments[0].doc_id if segments else ""
    started = time.perf_counter()
    state = EngineState.initial()
    n = len(segments)
    steps = -(-n // config.w_o) if n else 0

    for step in range(steps):
        start = step * config.w_o
        window = segments[start : start + config.w_i]
        commit_n = min(config.w_o, n - start)
        prompt = render_prompt(state.stack, state.tree, window, config)
        decoder_state = DecoderState(
            last_token=None,
            actions_emitted=0,
            stack_is_root_only=state.stack.is_root_only,
            current_max_level=state.stack.max_heading_level,
            window_size=len(window),
        )
        request = PredictionRequest(
            prompt,
            expected_actions=len(window),
            constraint_hints=ConstraintHints(
                first_tokens=allowed_next_tokens(decoder_state, policy.profile),
                profile=policy.profile.name,
            ),
        )
        try:
            response = predictor.predict(request)
        except PredictorError as exc:
            raise PredictorError(
                f"step {step}: {exc}",
                step_index=step,
                status=exc.status,
                attempts=exc.attempts,
            ) from exc
        try:
            actions = parse_action_block(response.action_lines, len(window))
        except MismatchError:
            state.skipped.extend(range(start, start + commit_n))
            continue
        committed = validate_and_repair(actions[:commit_n], state.stack, policy)
        for action, segment in zip(committed, window):
            apply_action(state, action, segment)
            if debug:
                check_engine_invariants(state)

    wall_ms = (time.perf_counter() - started) * 1000.0
    report = RunReport(doc_id, steps, state.skipped, wall_ms)
    return state.tree, report
