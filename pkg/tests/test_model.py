"""Core types: actions, trees, stacks, validators, JSON codec."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from docstruct import (
    Action,
    CONCATENATION,
    ContextStack,
    InvalidTreeError,
    LogicalTree,
    MAX_HEADING_LEVEL,
    MalformedActionError,
    NEW_PARAGRAPH,
    action_to_string,
    string_to_action,
    tree_equal,
    tree_from_json_obj,
    tree_to_json_obj,
    validate_tree,
)

from conftest import build_tree


class TestActionStrings:
    def test_heading_three(self):
        assert action_to_string(Action.heading(3)) == "+++"

    def test_paragraph(self):
        assert action_to_string(NEW_PARAGRAPH) == "*"

    def test_concatenation(self):
        assert action_to_string(CONCATENATION) == "="

    def test_parse_double_plus(self):
        assert string_to_action("++") == Action.heading(2)

    def test_parse_paragraph(self):
        assert string_to_action("*") == NEW_PARAGRAPH

    @pytest.mark.parametrize("bad", ["+*", "", " ", "**", "==", "+=", "x", "+ +", "*="])
    def test_malformed(self, bad):
        with pytest.raises(MalformedActionError):
            string_to_action(bad)

    def test_level_zero_heading_rejected(self):
        with pytest.raises(MalformedActionError):
            Action.heading(0)

    def test_level_cap(self):
        assert string_to_action("+" * MAX_HEADING_LEVEL) == Action.heading(MAX_HEADING_LEVEL)
        with pytest.raises(MalformedActionError):
            string_to_action("+" * (MAX_HEADING_LEVEL + 1))

    @given(st.integers(min_value=1, max_value=MAX_HEADING_LEVEL))
    def test_heading_round_trip(self, level):
        assert string_to_action(action_to_string(Action.heading(level))) == Action.heading(level)


class TestTree:
    def test_root_shape(self):
        tree = LogicalTree()
        root = tree.node(tree.root)
        assert root.kind == "heading" and root.level == 0 and root.content == []
        validate_tree(tree)

    def test_depths(self):
        tree = build_tree([("h", "A", [("p", ["x", "y"]), ("h", "B", [])])])
        ids = list(tree.preorder())
        assert [tree.depth(i) for i in ids] == [0, 1, 2, 2]

    def test_insertion_order_is_preorder(self):
        tree = build_tree(
            [("h", "A", [("h", "B", [("p", "x")]), ("h", "C", [])]), ("h", "D", [])]
        )
        assert tree.insertion_order == list(tree.preorder())
        validate_tree(tree)

    def test_level_gap_rejected_on_attach(self):
        tree = LogicalTree()
        with pytest.raises(InvalidTreeError):
            tree.add_heading(tree.root, 2, "skips")

    def test_paragraph_under_paragraph_rejected(self):
        tree = LogicalTree()
        p = tree.add_paragraph(tree.root, "text")
        with pytest.raises(InvalidTreeError):
            tree.add_paragraph(p, "nested")

    def test_root_content_rejected(self):
        tree = LogicalTree()
        with pytest.raises(InvalidTreeError):
            tree.append_content(tree.root, "illegal")

    def test_validator_rejects_empty_content(self):
        tree = build_tree([("p", "x")])
        tree.node(1).content.clear()
        with pytest.raises(InvalidTreeError, match="empty content"):
            validate_tree(tree)

    def test_validator_rejects_linebreak_content(self):
        tree = build_tree([("p", "x")])
        tree.node(1).content[0] = "two\nlines"
        with pytest.raises(InvalidTreeError, match="line break"):
            validate_tree(tree)

    def test_validator_rejects_bad_insertion_order(self):
        tree = build_tree([("h", "A", []), ("h", "B", [])])
        tree.insertion_order.reverse()
        with pytest.raises(InvalidTreeError, match="preorder"):
            validate_tree(tree)


class TestTreeEquality:
    def test_identical(self):
        spec = [("h", "A", [("p", ["x", "y"])])]
        assert tree_equal(build_tree(spec), build_tree(spec))

    def test_content_split_differs(self):
        a = build_tree([("p", ["x y"])])
        b = build_tree([("p", ["x", "y"])])
        assert not tree_equal(a, b)

    def test_kind_differs(self):
        a = build_tree([("h", "x", [])])
        b = build_tree([("p", "x")])
        assert not tree_equal(a, b)

    def test_child_order_matters(self):
        a = build_tree([("h", "A", []), ("h", "B", [])])
        b = build_tree([("h", "B", []), ("h", "A", [])])
        assert not tree_equal(a, b)


class TestTreeJson:
    def test_round_trip(self):
        tree = build_tree(
            [
                ("p", ["intro line", "continued"]),
                ("h", "Chapter 1", [("p", "body."), ("h", "1.1", [("p", "deep.")])]),
            ]
        )
        obj = tree_to_json_obj(tree)
        assert obj["kind"] == "heading" and obj["level"] == 0 and obj["content"] == []
        assert tree_equal(tree_from_json_obj(obj), tree)

    def test_paragraph_objects_carry_no_level(self):
        obj = tree_to_json_obj(build_tree([("p", "x")]))
        assert "level" not in obj["children"][0]

    def test_bad_root_level(self):
        with pytest.raises(InvalidTreeError, match="level-0"):
            tree_from_json_obj({"kind": "heading", "level": 1, "content": [], "children": []})

    def test_level_skip_rejected(self):
        obj = {
            "kind": "heading",
            "level": 0,
            "content": [],
            "children": [{"kind": "heading", "level": 2, "content": ["x"], "children": []}],
        }
        with pytest.raises(InvalidTreeError):
            tree_from_json_obj(obj)

    def test_paragraph_with_children_rejected(self):
        obj = {
            "kind": "heading",
            "level": 0,
            "content": [],
            "children": [
                {
                    "kind": "paragraph",
                    "content": ["x"],
                    "children": [{"kind": "paragraph", "content": ["y"], "children": []}],
                }
            ],
        }
        with pytest.raises(InvalidTreeError, match="lea(f|ves)"):
            tree_from_json_obj(obj)


class TestContextStack:
    def test_initial(self):
        stack = ContextStack.initial()
        assert stack.is_root_only and stack.max_heading_level == 0

    def test_max_level_with_paragraph_top(self):
        stack = ContextStack([0, 1, 2, 3], has_paragraph_top=True)
        assert stack.max_heading_level == 2
        assert stack.top == 3

    def test_copy_is_independent(self):
        stack = ContextStack([0, 1])
        clone = stack.copy()
        clone.entries.append(2)
        assert stack.entries == [0, 1]
