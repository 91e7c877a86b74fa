"""Shared test helpers."""

from __future__ import annotations

import pytest

from docstruct import (
    Action,
    EngineState,
    LogicalTree,
    NEW_PARAGRAPH,
    TextSegment,
    apply_action,
)


def segments(texts, doc_id="doc"):
    return [TextSegment(doc_id, i, t) for i, t in enumerate(texts)]


def build_tree(spec) -> LogicalTree:
    """Build a tree from a nested spec: ("h", text, [children...]) / ("p", [lines])."""
    tree = LogicalTree()

    def add(node_spec, parent, level):
        if node_spec[0] == "h":
            _, text, children = node_spec
            lines = text if isinstance(text, list) else [text]
            node = tree.add_heading(parent, level + 1, lines[0])
            for line in lines[1:]:
                tree.append_content(node, line)
            for child in children:
                add(child, node, level + 1)
        else:
            _, lines = node_spec
            lines = lines if isinstance(lines, list) else [lines]
            node = tree.add_paragraph(parent, lines[0])
            for line in lines[1:]:
                tree.append_content(node, line)

    for child in spec:
        add(child, tree.root, 0)
    return tree


@pytest.fixture
def demo_state() -> EngineState:
    """The documented mid-run state: three nested headings and an open paragraph."""
    state = EngineState.initial()
    apply_action(
        state, Action.heading(1), TextSegment("demo", 0, "Government Bonds Credit Rating Report")
    )
    apply_action(
        state, Action.heading(2), TextSegment("demo", 1, "Credit Quality Analysis for this Series")
    )
    apply_action(state, Action.heading(3), TextSegment("demo", 2, "Use of Proceeds"))
    apply_action(
        state,
        NEW_PARAGRAPH,
        TextSegment(
            "demo",
            3,
            "The funds raised from the Government Bonds are ... and projects related to agriculture,",
        ),
    )
    return state
