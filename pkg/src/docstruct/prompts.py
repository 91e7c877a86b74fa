"""Prompt template rendering and action-block parsing.

The prediction template has three fixed sections::

    ### STACK:
    + Top-level heading text
    ++ Deeper heading text
    * Open paragraph text

    ### SEGMENT:
    first pending segment
    second pending segment

    ### ACTION:

The model continues after the action header with one action string per
segment line, each terminated by a line break.
"""

from __future__ import annotations

from typing import Sequence

from .errors import MalformedActionError, MismatchError
from .model import (
    HEADING,
    Action,
    ContextStack,
    LogicalTree,
    StructuringConfig,
    TextSegment,
    action_to_string,
    string_to_action,
)

STACK_HEADER = "### STACK:"
SEGMENT_HEADER = "### SEGMENT:"
ACTION_HEADER = "### ACTION:"


def render_stack_lines(
    stack: ContextStack, tree: LogicalTree, config: StructuringConfig
) -> list[str]:
    """One line per non-root stack entry, bottom to top: symbol, space, joined text."""
    lines = []
    for node_id in stack.entries[1:]:
        node = tree.node(node_id)
        symbol = "+" * node.level if node.kind == HEADING else "*"
        text = config.join_separator.join(node.content)
        if config.stack_entry_truncation is not None:
            text = text[: config.stack_entry_truncation]
        lines.append(f"{symbol} {text}")
    return lines


def render_prompt(
    stack: ContextStack,
    tree: LogicalTree,
    segments: Sequence[TextSegment],
    config: StructuringConfig,
) -> str:
    """Render the template for one prediction step, byte-for-byte deterministic."""
    if not 1 <= len(segments) <= config.w_i:
        raise ValueError(
            f"need 1 <= segments <= w_i ({config.w_i}), got {len(segments)}"
        )
    parts = [STACK_HEADER]
    parts.extend(render_stack_lines(stack, tree, config))
    parts.append("")
    parts.append(SEGMENT_HEADER)
    parts.extend(segment.text for segment in segments)
    parts.append("")
    parts.append(ACTION_HEADER)
    return "\n".join(parts) + "\n"


def parse_prompt_sections(prompt: str) -> tuple[list[str], list[str]]:
    """Recover (stack lines, segment lines) from a rendered prompt.

    Used by predictors that work from the prompt text alone.
    """
    lines = prompt.split("\n")
    try:
        stack_at = lines.index(STACK_HEADER)
        segment_at = lines.index(SEGMENT_HEADER, stack_at + 1)
        action_at = lines.index(ACTION_HEADER, segment_at + 1)
    except ValueError:
        raise ValueError("prompt is missing a template header") from None
    # Each section is separated from the next header by exactly one blank line.
    stack_lines = lines[stack_at + 1 : segment_at - 1]
    segment_lines = lines[segment_at + 1 : action_at - 1]
    return stack_lines, segment_lines


def format_action_block(actions: Sequence[Action]) -> str:
    """Actions as the template's continuation text, one per line-break-terminated line."""
    return "".join(action_to_string(a) + "\n" for a in actions)


def parse_action_block(s: str, expected_count: int) -> list[Action]:
    """Parse generated action lines; raise MismatchError on wrong count or bad line.

    Lines are trimmed and trailing empty lines dropped, so output with or
    without a final line break parses identically.
    """
    lines = [line.strip() for line in s.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    actions: list[Action] = []
    for line in lines:
        try:
            actions.append(string_to_action(line))
        except MalformedActionError as exc:
            raise MismatchError(expected_count, actions, f"bad action line: {exc}") from exc
    if len(actions) != expected_count:
        raise MismatchError(expected_count, actions)
    return actions
