"""Shift-reduce baseline: transitions, constraints, gold replay, economy."""

import pytest

from docstruct import (
    InvalidTransitionError,
    LivelockError,
    MalformedActionError,
    PredictionRequest,
    PredictionResponse,
    StructuringConfig,
    TextSegment,
    TracerAction,
    TracerGoldPredictor,
    TracerState,
    tracer_allowed_actions,
    tracer_gold_actions,
    tracer_step,
    tracer_structure_document,
    tree_equal,
    tree_to_actions,
)
from docstruct.datagen import SyntheticSpec, generate_synthetic_corpus
from docstruct.tracer import string_to_tracer_action, tracer_action_to_string

from conftest import build_tree, segments


class TestActionStrings:
    def test_canonical_forms(self):
        assert [tracer_action_to_string(a) for a in TracerAction] == [
            "sub-heading",
            "sub-text",
            "reduce",
            "concat",
        ]

    def test_round_trip(self):
        for action in TracerAction:
            assert string_to_tracer_action(tracer_action_to_string(action)) is action

    def test_malformed(self):
        with pytest.raises(MalformedActionError):
            string_to_tracer_action("shift")


def pending(state, text="pending"):
    state.pending = TextSegment("doc", 0, text)
    return state


class TestAllowedActions:
    def test_initial_state_attach_only(self):
        state = pending(TracerState.initial())
        assert tracer_allowed_actions(state) == frozenset(
            {TracerAction.SUB_HEADING, TracerAction.SUB_TEXT}
        )

    def test_paragraph_top_reduce_or_concat(self):
        state = pending(TracerState.initial())
        tracer_step(state, TracerAction.SUB_TEXT)
        assert tracer_allowed_actions(state) == frozenset(
            {TracerAction.REDUCE, TracerAction.CONCAT}
        )

    def test_heading_top_allows_all_four(self):
        state = pending(TracerState.initial())
        tracer_step(state, TracerAction.SUB_HEADING)
        assert tracer_allowed_actions(state) == frozenset(TracerAction)


class TestTracerStep:
    def test_subheading_on_root(self):
        state = pending(TracerState.initial(), "Title")
        tracer_step(state, TracerAction.SUB_HEADING)
        assert state.stack == [0, 1]
        node = state.tree.node(1)
        assert node.kind == "heading" and node.level == 1 and state.pending is None

    def test_reduce_past_paragraph_then_attach_level_one(self):
        # Recovering a shallow sibling requires popping the open paragraph
        # and its heading before attaching; the pairwise system needs two
        # reduce transitions where the action engine needs one prediction.
        state = pending(TracerState.initial(), "Heading A")
        tracer_step(state, TracerAction.SUB_HEADING)
        pending(state, "body text.")
        tracer_step(state, TracerAction.SUB_TEXT)
        pending(state, "Chapter 3 Basis and Scope")
        tracer_step(state, TracerAction.REDUCE)
        assert state.pending is not None  # reduce leaves the segment pending
        tracer_step(state, TracerAction.REDUCE)
        tracer_step(state, TracerAction.SUB_HEADING)
        node = state.tree.node(state.stack[-1])
        assert node.level == 1 and node.parent == 0
        assert node.content == ["Chapter 3 Basis and Scope"]

    def test_concat_extends_top(self):
        state = pending(TracerState.initial(), "start of text")
        tracer_step(state, TracerAction.SUB_TEXT)
        pending(state, "continuation text")
        tracer_step(state, TracerAction.CONCAT)
        assert state.tree.node(1).content == ["start of text", "continuation text"]

    def test_illegal_action_raises(self):
        state = pending(TracerState.initial())
        with pytest.raises(InvalidTransitionError):
            tracer_step(state, TracerAction.REDUCE)

    def test_attach_under_paragraph_rejected(self):
        state = pending(TracerState.initial())
        tracer_step(state, TracerAction.SUB_TEXT)
        pending(state, "more")
        with pytest.raises(InvalidTransitionError):
            tracer_step(state, TracerAction.SUB_HEADING)


class TestGoldReplay:
    def test_round_trip_small(self):
        tree = build_tree(
            [
                ("h", "A", [("p", ["a1", "a2"]), ("h", "B", [("p", "b.")]), ("h", "C", [])]),
                ("h", "D", [("p", "d.")]),
            ]
        )
        texts, actions = tracer_gold_actions(tree)
        rebuilt, report = tracer_structure_document(
            segments(texts), TracerGoldPredictor(actions), StructuringConfig(w_i=1, w_o=1)
        )
        assert tree_equal(rebuilt, tree)
        assert report.transitions == len(actions)
        assert report.reduces == sum(1 for a in actions if a is TracerAction.REDUCE)

    def test_round_trip_corpus(self):
        for tree in generate_synthetic_corpus(SyntheticSpec(doc_count=60, max_depth=6, seed=53)):
            texts, actions = tracer_gold_actions(tree)
            rebuilt, report = tracer_structure_document(
                segments(texts), TracerGoldPredictor(actions), StructuringConfig(w_i=1, w_o=1)
            )
            assert tree_equal(rebuilt, tree)
            assert not report.skipped_segment_indices

    def test_segment_conservation(self):
        tree = build_tree([("h", "A", [("p", ["x", "y"]), ("h", "B", [("p", "z.")])])])
        texts, actions = tracer_gold_actions(tree)
        consuming = sum(1 for a in actions if a is not TracerAction.REDUCE)
        assert consuming == len(texts)

    def test_same_segment_order_as_action_engine(self):
        tree = build_tree([("h", "A", [("p", "x."), ("h", "B", [("p", "y.")])]), ("h", "C", [])])
        assert tracer_gold_actions(tree)[0] == tree_to_actions(tree)[0]


class TestTracerRun:
    def test_flat_paragraph_list_never_reduces(self):
        texts = [f"para {i}." for i in range(8)]
        actions = [TracerAction.SUB_TEXT] + [TracerAction.REDUCE, TracerAction.SUB_TEXT] * 7
        # A flat list alternates reduce/attach after the first paragraph,
        # but the minimal gold run below confirms the count formula.
        tree = build_tree([("p", t) for t in texts])
        gold_texts, gold_actions = tracer_gold_actions(tree)
        rebuilt, report = tracer_structure_document(
            segments(gold_texts), TracerGoldPredictor(gold_actions), StructuringConfig()
        )
        assert tree_equal(rebuilt, tree)
        assert report.transitions == len(gold_texts) + report.reduces

    def test_single_segment_single_transition(self):
        tree = build_tree([("p", "only.")])
        texts, actions = tracer_gold_actions(tree)
        _, report = tracer_structure_document(
            segments(texts), TracerGoldPredictor(actions), StructuringConfig()
        )
        assert report.transitions == 1 and report.reduces == 0

    def test_disallowed_prediction_skips_segment(self):
        class AlwaysReduce:
            def predict(self, request):
                return PredictionResponse("reduce\n")

        texts = ["first segment."]
        tree, report = tracer_structure_document(
            segments(texts), AlwaysReduce(), StructuringConfig()
        )
        assert report.skipped_segment_indices == [0]
        assert len(tree) == 1

    def test_malformed_prediction_skips_segment(self):
        class Gibberish:
            def predict(self, request):
                return PredictionResponse("SHIFT!\n")

        tree, report = tracer_structure_document(
            segments(["a.", "b."]), Gibberish(), StructuringConfig()
        )
        assert report.skipped_segment_indices == [0, 1]

    def test_livelock_guard(self, monkeypatch):
        # The legality gate makes real livelock unreachable (reduces are
        # bounded by pushes), so shrink the budget to prove the guard fires.
        import docstruct.tracer as tracer_module

        monkeypatch.setattr(tracer_module, "MAX_HEADING_LEVEL", -1)

        class PingPong:
            def __init__(self):
                self.flip = False

            def predict(self, request):
                self.flip = not self.flip
                return PredictionResponse("sub-heading\n" if self.flip else "reduce\n")

        with pytest.raises(LivelockError):
            tracer_structure_document(segments(["a", "b"]), PingPong(), StructuringConfig())

    def test_global_context_prompt_shape(self):
        prompts = []

        class Recording:
            def __init__(self, inner):
                self.inner = inner

            def predict(self, request):
                prompts.append(request.prompt)
                return self.inner.predict(request)

        tree = build_tree([("h", "A", [("p", "x.")])])
        texts, actions = tracer_gold_actions(tree)
        tracer_structure_document(
            segments(texts),
            Recording(TracerGoldPredictor(actions)),
            StructuringConfig(),
            use_global_context=True,
        )
        assert prompts[0].startswith("### STACK:\n")
        assert "### SEGMENT:\nA\n" in prompts[0]
        assert "+ A\n" in prompts[1]

    def test_pairwise_prompt_shape(self):
        prompts = []

        class Recording:
            def __init__(self, inner):
                self.inner = inner

            def predict(self, request):
                prompts.append(request.prompt)
                return self.inner.predict(request)

        tree = build_tree([("h", "A", [("p", "x.")])])
        texts, actions = tracer_gold_actions(tree)
        tracer_structure_document(
            segments(texts),
            Recording(TracerGoldPredictor(actions)),
            StructuringConfig(),
            use_global_context=False,
        )
        assert prompts[0] == "### TOP:\n\n\n### SEGMENT:\nA\n\n### ACTION:\n"
        assert prompts[1] == "### TOP:\nA\n\n### SEGMENT:\nx.\n\n### ACTION:\n"


class TestPredictionEconomy:
    def test_transition_count_exceeds_segments_with_sibling_headings(self):
        tree = build_tree(
            [("h", "A", [("p", "a."), ("h", "B", [("p", "b.")]), ("h", "C", [("p", "c.")])])]
        )
        texts, actions = tracer_gold_actions(tree)
        _, report = tracer_structure_document(
            segments(texts), TracerGoldPredictor(actions), StructuringConfig()
        )
        assert report.transitions > len(texts)
        assert report.transitions == len(texts) + report.reduces
