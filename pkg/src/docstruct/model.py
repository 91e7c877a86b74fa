"""Core data types: segments, structuring actions, logical trees, context stacks.

A document is an ordered run of text segments (one extracted/OCR line each).
Structuring turns it into a tree of heading and paragraph nodes under a
contentless level-0 root heading. Three actions drive construction: starting
a new level-k heading (written as k ``+`` characters), starting a new
paragraph (``*``), and concatenating the segment onto the last added node
(``=``). The context stack mirrors the path from the root to the last node
added or extended.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from .errors import InvalidTreeError, MalformedActionError

HEADING = "heading"
PARAGRAPH = "paragraph"

# Engineering bound on the action grammar; observed corpora stay below depth 7.
MAX_HEADING_LEVEL = 64


class ActionKind(Enum):
    HEADING = "heading"
    PARAGRAPH = "paragraph"
    CONCAT = "concat"


@dataclass(frozen=True)
class Action:
    """One structuring action; ``level`` is meaningful for headings only."""

    kind: ActionKind
    level: int = 0

    def __post_init__(self) -> None:
        if self.kind is ActionKind.HEADING:
            if not 1 <= self.level <= MAX_HEADING_LEVEL:
                raise MalformedActionError(
                    f"heading level must be in 1..{MAX_HEADING_LEVEL}, got {self.level}"
                )
        elif self.level != 0:
            raise MalformedActionError(f"{self.kind.value} actions carry no level")

    @staticmethod
    def heading(level: int) -> "Action":
        return Action(ActionKind.HEADING, level)

    @property
    def is_heading(self) -> bool:
        return self.kind is ActionKind.HEADING

    @property
    def is_paragraph(self) -> bool:
        return self.kind is ActionKind.PARAGRAPH

    @property
    def is_concat(self) -> bool:
        return self.kind is ActionKind.CONCAT


NEW_PARAGRAPH = Action(ActionKind.PARAGRAPH)
CONCATENATION = Action(ActionKind.CONCAT)


def action_to_string(action: Action) -> str:
    """Canonical string form: ``+``x``level``, ``*``, or ``=``."""
    if action.is_heading:
        return "+" * action.level
    if action.is_paragraph:
        return "*"
    return "="


def string_to_action(s: str) -> Action:
    """Inverse of :func:`action_to_string`; rejects anything else."""
    if s == "*":
        return NEW_PARAGRAPH
    if s == "=":
        return CONCATENATION
    if s and set(s) == {"+"}:
        if len(s) > MAX_HEADING_LEVEL:
            raise MalformedActionError(
                f"heading level {len(s)} exceeds the cap of {MAX_HEADING_LEVEL}"
            )
        return Action.heading(len(s))
    raise MalformedActionError(f"not an action string: {s!r}")


@dataclass(frozen=True)
class TextSegment:
    """One line of extracted text at a 0-based position within its document."""

    doc_id: str
    index: int
    text: str

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"segment index must be >= 0, got {self.index}")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("segment text must not contain line breaks")


@dataclass(frozen=True)
class StructuringConfig:
    """Windowing and rendering knobs for a structuring run.

    ``w_i`` segments are shown per prediction step and ``w_o`` of the
    predicted actions are committed (``w_i == w_o`` is the one-pass default).
    ``join_separator`` is used only when rendering or comparing joined node
    text; pass ``""`` for CJK corpora. ``stack_entry_truncation`` caps each
    rendered stack line to its first N characters.
    """

    w_i: int = 3
    w_o: int = 3
    join_separator: str = " "
    stack_entry_truncation: int | None = None

    def __post_init__(self) -> None:
        if self.w_i < 1:
            raise ValueError(f"w_i must be >= 1, got {self.w_i}")
        if not 1 <= self.w_o <= self.w_i:
            raise ValueError(f"need 1 <= w_o <= w_i, got w_o={self.w_o}, w_i={self.w_i}")
        if self.stack_entry_truncation is not None and self.stack_entry_truncation < 1:
            raise ValueError("stack_entry_truncation must be >= 1 when set")


@dataclass
class Node:
    """Tree node. ``level`` is set for headings only (root is 0)."""

    node_id: int
    kind: str
    content: list[str]
    level: int | None = None
    parent: int | None = None
    children: list[int] = field(default_factory=list)


class LogicalTree:
    """Arena of heading/paragraph nodes rooted at a contentless level-0 heading.

    Nodes are append-only and always attached under an existing parent, so
    ``insertion_order`` doubles as a preorder traversal.
    """

    def __init__(self) -> None:
        self.nodes: dict[int, Node] = {0: Node(0, HEADING, [], level=0)}
        self.root: int = 0
        self.insertion_order: list[int] = [0]
        self._next_id = 1

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def __len__(self) -> int:
        return len(self.nodes)

    def _attach(self, node: Node) -> int:
        self.nodes[node.node_id] = node
        self.nodes[node.parent].children.append(node.node_id)
        self.insertion_order.append(node.node_id)
        return node.node_id

    def add_heading(self, parent_id: int, level: int, text: str) -> int:
        parent = self.nodes[parent_id]
        if parent.kind != HEADING:
            raise InvalidTreeError("headings attach to heading parents only")
        if level != (parent.level or 0) + 1:
            raise InvalidTreeError(
                f"level-{level} heading under level-{parent.level} parent"
            )
        node = Node(self._next_id, HEADING, [text], level=level, parent=parent_id)
        self._next_id += 1
        return self._attach(node)

    def add_paragraph(self, parent_id: int, text: str) -> int:
        parent = self.nodes[parent_id]
        if parent.kind != HEADING:
            raise InvalidTreeError("paragraphs attach to heading parents only")
        node = Node(self._next_id, PARAGRAPH, [text], parent=parent_id)
        self._next_id += 1
        return self._attach(node)

    def append_content(self, node_id: int, text: str) -> None:
        if node_id == self.root:
            raise InvalidTreeError("the root carries no textual content")
        self.nodes[node_id].content.append(text)

    def depth(self, node_id: int) -> int:
        """Heading depth equals its level; a paragraph sits one below its parent."""
        node = self.nodes[node_id]
        if node.kind == HEADING:
            return node.level or 0
        return (self.nodes[node.parent].level or 0) + 1

    def joined(self, node_id: int, separator: str = " ") -> str:
        return separator.join(self.nodes[node_id].content)

    def preorder(self) -> Iterator[int]:
        stack = [self.root]
        while stack:
            node_id = stack.pop()
            yield node_id
            stack.extend(reversed(self.nodes[node_id].children))

    def path_to(self, node_id: int) -> list[int]:
        """Node ids from the root down to ``node_id`` inclusive."""
        path = []
        cur: int | None = node_id
        while cur is not None:
            path.append(cur)
            cur = self.nodes[cur].parent
        path.reverse()
        return path

    def pretty(self, separator: str = " ") -> str:
        """Indented plain-text rendering, one node per line."""
        lines = []
        for node_id in self.preorder():
            if node_id == self.root:
                continue
            node = self.nodes[node_id]
            depth = self.depth(node_id)
            symbol = "+" * node.level if node.kind == HEADING else "*"
            lines.append(f"{'  ' * (depth - 1)}{symbol} {self.joined(node_id, separator)}")
        return "\n".join(lines)


@dataclass
class ContextStack:
    """Bottom-to-top path from the root to the last node added or extended.

    Entry ``i`` below any paragraph top is always the level-``i`` heading on
    the path, so the level structure is fully determined by the entry count
    and ``has_paragraph_top``.
    """

    entries: list[int]
    has_paragraph_top: bool = False

    @staticmethod
    def initial(root_id: int = 0) -> "ContextStack":
        return ContextStack([root_id])

    @property
    def top(self) -> int:
        return self.entries[-1]

    @property
    def is_root_only(self) -> bool:
        return len(self.entries) == 1

    @property
    def max_heading_level(self) -> int:
        return len(self.entries) - 1 - (1 if self.has_paragraph_top else 0)

    def copy(self) -> "ContextStack":
        return ContextStack(list(self.entries), self.has_paragraph_top)


def tree_equal(a: LogicalTree, b: LogicalTree) -> bool:
    """Exact structural equality: kinds, heading levels, content lists, child order.

    Joined/rendered text plays no part; the comparison is separator-free.
    """

    def eq(na: int, nb: int) -> bool:
        x, y = a.nodes[na], b.nodes[nb]
        if x.kind != y.kind or x.level != y.level or x.content != y.content:
            return False
        if len(x.children) != len(y.children):
            return False
        return all(eq(ca, cb) for ca, cb in zip(x.children, y.children))

    return eq(a.root, b.root)


def validate_tree(tree: LogicalTree) -> None:
    """Check every structural invariant; raise InvalidTreeError naming the first violated."""
    if tree.root not in tree.nodes:
        raise InvalidTreeError("root id is not a node")
    root = tree.nodes[tree.root]
    if root.kind != HEADING or root.level != 0:
        raise InvalidTreeError("the root must be a level-0 heading")
    if root.content:
        raise InvalidTreeError("the root must have no textual content")
    if root.parent is not None:
        raise InvalidTreeError("the root must have no parent")

    seen: set[int] = set()
    for node_id in tree.preorder():
        if node_id in seen:
            raise InvalidTreeError(f"node {node_id} reachable twice (cycle or shared child)")
        seen.add(node_id)
        node = tree.nodes.get(node_id)
        if node is None:
            raise InvalidTreeError(f"child reference to missing node {node_id}")
        if node.node_id != node_id:
            raise InvalidTreeError(f"node {node_id} stored under mismatched id")
        for child_id in node.children:
            child = tree.nodes.get(child_id)
            if child is None:
                raise InvalidTreeError(f"node {node_id} references missing child {child_id}")
            if child.parent != node_id:
                raise InvalidTreeError(f"node {child_id} has inconsistent parent link")
        if node_id == tree.root:
            continue
        if node.parent is None or node.parent not in tree.nodes:
            raise InvalidTreeError(f"non-root node {node_id} lacks a valid parent")
        if node_id not in tree.nodes[node.parent].children:
            raise InvalidTreeError(f"node {node_id} missing from its parent's children")
        if not node.content:
            raise InvalidTreeError(f"non-root node {node_id} has empty content")
        if any("\n" in entry or "\r" in entry for entry in node.content):
            raise InvalidTreeError(f"node {node_id} content contains line breaks")
        if node.kind == HEADING:
            if node.level is None or node.level < 1:
                raise InvalidTreeError(f"heading {node_id} must have level >= 1")
            if node.level > MAX_HEADING_LEVEL:
                raise InvalidTreeError(f"heading {node_id} exceeds the level cap")
            parent = tree.nodes[node.parent]
            if parent.kind != HEADING or node.level != (parent.level or 0) + 1:
                raise InvalidTreeError(
                    f"level-{node.level} heading {node_id} not under a level-{node.level - 1} heading"
                )
        elif node.kind == PARAGRAPH:
            if node.level is not None:
                raise InvalidTreeError(f"paragraph {node_id} must not carry a level")
            if node.children:
                raise InvalidTreeError(f"paragraph {node_id} must be a leaf")
            if tree.nodes[node.parent].kind != HEADING:
                raise InvalidTreeError(f"paragraph {node_id} not under a heading")
        else:
            raise InvalidTreeError(f"node {node_id} has unknown kind {node.kind!r}")

    if len(seen) != len(tree.nodes):
        raise InvalidTreeError("tree contains nodes unreachable from the root")
    if tree.insertion_order != list(tree.preorder()):
        raise InvalidTreeError("insertion order is not a preorder traversal")


def validate_stack(stack: ContextStack, tree: LogicalTree) -> None:
    """Check the stack invariants against the tree it indexes into."""
    if not stack.entries:
        raise InvalidTreeError("context stack must never be empty")
    if stack.entries[0] != tree.root:
        raise InvalidTreeError("context stack bottom must be the root")
    for position, node_id in enumerate(stack.entries):
        node = tree.nodes.get(node_id)
        if node is None:
            raise InvalidTreeError(f"stack entry {node_id} is not a node")
        is_top = position == len(stack.entries) - 1
        if stack.has_paragraph_top and is_top:
            if node.kind != PARAGRAPH:
                raise InvalidTreeError("has_paragraph_top set but top is a heading")
        else:
            if node.kind != HEADING or node.level != position:
                raise InvalidTreeError(
                    f"stack entry {position} must be a level-{position} heading"
                )
    # Entries must lie on one root-to-node path.
    for lower, upper in zip(stack.entries, stack.entries[1:]):
        if tree.nodes[upper].parent != lower:
            raise InvalidTreeError("stack entries do not form a root-to-node path")


def tree_to_json_obj(tree: LogicalTree) -> dict:
    """Nested-object form used by the corpus files (root carries level 0)."""

    def encode(node_id: int) -> dict:
        node = tree.nodes[node_id]
        obj: dict = {"kind": node.kind}
        if node.kind == HEADING:
            obj["level"] = node.level
        obj["content"] = list(node.content)
        obj["children"] = [encode(c) for c in node.children]
        return obj

    return encode(tree.root)


def tree_from_json_obj(obj: dict) -> LogicalTree:
    """Decode the nested-object form, validating every invariant on the way in."""
    if not isinstance(obj, dict):
        raise InvalidTreeError("tree must be a JSON object")
    if obj.get("kind") != HEADING or obj.get("level") != 0:
        raise InvalidTreeError("the root must be a level-0 heading")
    if obj.get("content"):
        raise InvalidTreeError("the root must have no textual content")

    tree = LogicalTree()

    def decode(child_obj: dict, parent_id: int) -> None:
        if not isinstance(child_obj, dict):
            raise InvalidTreeError("tree nodes must be JSON objects")
        kind = child_obj.get("kind")
        content = child_obj.get("content")
        if not isinstance(content, list) or not all(isinstance(t, str) for t in content):
            raise InvalidTreeError("node content must be a list of strings")
        if not content:
            raise InvalidTreeError("non-root node has empty content")
        children = child_obj.get("children", [])
        if not isinstance(children, list):
            raise InvalidTreeError("node children must be a list")
        if kind == HEADING:
            level = child_obj.get("level")
            if not isinstance(level, int):
                raise InvalidTreeError("headings must carry an integer level")
            node_id = tree.add_heading(parent_id, level, content[0])
        elif kind == PARAGRAPH:
            if "level" in child_obj:
                raise InvalidTreeError("paragraphs must not carry a level")
            if children:
                raise InvalidTreeError("paragraphs must be leaves")
            node_id = tree.add_paragraph(parent_id, content[0])
        else:
            raise InvalidTreeError(f"unknown node kind {kind!r}")
        for extra in content[1:]:
            tree.append_content(node_id, extra)
        for grandchild in children:
            decode(grandchild, node_id)

    for child in obj.get("children", []):
        decode(child, tree.root)
    validate_tree(tree)
    return tree
