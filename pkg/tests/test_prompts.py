"""Prompt rendering and action-block parsing."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from docstruct import (
    Action,
    CONCATENATION,
    EngineState,
    MismatchError,
    NEW_PARAGRAPH,
    StructuringConfig,
    format_action_block,
    parse_action_block,
    render_prompt,
)
from docstruct.prompts import parse_prompt_sections

from conftest import segments

DEMO_PROMPT = (
    "### STACK:\n"
    "+ Government Bonds Credit Rating Report\n"
    "++ Credit Quality Analysis for this Series\n"
    "+++ Use of Proceeds\n"
    "* The funds raised from the Government Bonds are ... and projects related to agriculture,\n"
    "\n"
    "### SEGMENT:\n"
    "forestry, water resources and social services.\n"
    "Payment Security Analysis\n"
    "The proceeds for the projects funded by this bond issue are derived from project operational revenues\n"
    "\n"
    "### ACTION:\n"
)

DEMO_SEGMENTS = [
    "forestry, water resources and social services.",
    "Payment Security Analysis",
    "The proceeds for the projects funded by this bond issue are derived from project operational revenues",
]


class TestRenderPrompt:
    def test_demo_state_renders_byte_exact(self, demo_state):
        prompt = render_prompt(
            demo_state.stack, demo_state.tree, segments(DEMO_SEGMENTS), StructuringConfig()
        )
        assert prompt == DEMO_PROMPT

    def test_root_only_stack_renders_empty_stack_section(self):
        state = EngineState.initial()
        prompt = render_prompt(
            state.stack, state.tree, segments(["Hello"]), StructuringConfig(w_i=1, w_o=1)
        )
        assert prompt == "### STACK:\n\n### SEGMENT:\nHello\n\n### ACTION:\n"

    def test_multi_entry_content_joins_with_separator(self):
        state = EngineState.initial()
        state.tree.add_heading(0, 1, "Chapter 1")
        state.tree.append_content(1, "Introduction")
        state.stack.entries.append(1)
        prompt = render_prompt(
            state.stack, state.tree, segments(["x"]), StructuringConfig(w_i=1, w_o=1)
        )
        assert "+ Chapter 1 Introduction\n" in prompt
        # Joining is configuration: the empty separator concatenates directly.
        cjk = render_prompt(
            state.stack,
            state.tree,
            segments(["x"]),
            StructuringConfig(w_i=1, w_o=1, join_separator=""),
        )
        assert "+ Chapter 1Introduction\n" in cjk

    def test_truncation_keeps_head(self, demo_state):
        config = StructuringConfig(stack_entry_truncation=9)
        prompt = render_prompt(
            demo_state.stack, demo_state.tree, segments(DEMO_SEGMENTS), config
        )
        assert "+ Governmen\n" in prompt

    def test_determinism(self, demo_state):
        config = StructuringConfig()
        first = render_prompt(demo_state.stack, demo_state.tree, segments(DEMO_SEGMENTS), config)
        second = render_prompt(demo_state.stack, demo_state.tree, segments(DEMO_SEGMENTS), config)
        assert first == second

    def test_window_size_enforced(self, demo_state):
        with pytest.raises(ValueError):
            render_prompt(
                demo_state.stack,
                demo_state.tree,
                segments(DEMO_SEGMENTS),
                StructuringConfig(w_i=2, w_o=2),
            )
        with pytest.raises(ValueError):
            render_prompt(demo_state.stack, demo_state.tree, [], StructuringConfig())

    def test_sections_parse_back(self, demo_state):
        prompt = render_prompt(
            demo_state.stack, demo_state.tree, segments(DEMO_SEGMENTS), StructuringConfig()
        )
        stack_lines, segment_lines = parse_prompt_sections(prompt)
        assert len(stack_lines) == 4
        assert stack_lines[0].startswith("+ Government")
        assert segment_lines == DEMO_SEGMENTS


class TestParseActionBlock:
    def test_demo_block(self):
        actions = parse_action_block("=\n+++\n*\n", expected_count=3)
        assert actions == [CONCATENATION, Action.heading(3), NEW_PARAGRAPH]

    def test_single_line(self):
        assert parse_action_block("*\n", 1) == [NEW_PARAGRAPH]

    def test_count_mismatch(self):
        with pytest.raises(MismatchError) as info:
            parse_action_block("*\n=\n", 3)
        assert info.value.expected == 3
        assert info.value.parsed == [NEW_PARAGRAPH, CONCATENATION]

    def test_malformed_line_carries_partial_parse(self):
        with pytest.raises(MismatchError) as info:
            parse_action_block("*\n?\n=\n", 3)
        assert info.value.parsed == [NEW_PARAGRAPH]

    def test_no_trailing_newline_is_equivalent(self):
        assert parse_action_block("=\n+++\n*", 3) == parse_action_block("=\n+++\n*\n", 3)

    def test_interior_blank_line_is_mismatch(self):
        with pytest.raises(MismatchError):
            parse_action_block("*\n\n=\n", 3)

    def test_whitespace_trimmed(self):
        assert parse_action_block(" ++ \n", 1) == [Action.heading(2)]

    @given(
        st.lists(
            st.one_of(
                st.integers(min_value=1, max_value=8).map(Action.heading),
                st.just(NEW_PARAGRAPH),
                st.just(CONCATENATION),
            ),
            min_size=1,
            max_size=16,
        )
    )
    def test_format_parse_round_trip(self, actions):
        assert parse_action_block(format_action_block(actions), len(actions)) == actions
