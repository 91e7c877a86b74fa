"""Tree edit distance over logical trees: flattening plus kernel selection.

The Zhang-Shasha kernel exists twice: a compiled extension (``_ted``) and a
pure-Python fallback (``_ted_py``) with identical semantics. The compiled
one is picked at import when present; set ``DOCSTRUCT_PURE_PYTHON=1`` to
force the fallback. ``benchmarks/bench_ted.py`` compares the two.
"""

from __future__ import annotations

import os

from .model import LogicalTree

if os.environ.get("DOCSTRUCT_PURE_PYTHON", "") not in ("", "0"):
    from . import _ted_py as _kernel

    _KERNEL_NAME = "pure-python (forced)"
else:
    try:
        from . import _ted as _kernel  # type: ignore[no-redef]

        _KERNEL_NAME = "compiled"
    except ImportError:
        from . import _ted_py as _kernel  # type: ignore[no-redef]

        _KERNEL_NAME = "pure-python"


def kernel_name() -> str:
    """Which edit-distance kernel this process is using."""
    return _KERNEL_NAME


def _postorder(tree: LogicalTree) -> list[int]:
    order: list[int] = []

    def visit(node_id: int) -> None:
        for child in tree.node(node_id).children:
            visit(child)
        order.append(node_id)

    visit(tree.root)
    return order


def flatten(
    tree: LogicalTree, label_ids: dict[tuple[str, str], int], separator: str = " "
) -> tuple[list[int], list[int], list[int]]:
    """Postorder (labels, leftmost-leaf indices, keyroots) for the kernel.

    ``label_ids`` interns (kind, joined text) labels; share one dict across
    the two trees of a pair so equal labels get equal ids.
    """
    order = _postorder(tree)
    position = {node_id: i for i, node_id in enumerate(order)}
    labels: list[int] = []
    lmld: list[int] = []
    for i, node_id in enumerate(order):
        node = tree.node(node_id)
        key = (node.kind, separator.join(node.content))
        labels.append(label_ids.setdefault(key, len(label_ids)))
        lmld.append(lmld[position[node.children[0]]] if node.children else i)
    last_with_lmld: dict[int, int] = {}
    for i, leftmost in enumerate(lmld):
        last_with_lmld[leftmost] = i
    keyroots = sorted(last_with_lmld.values())
    return labels, lmld, keyroots


def tree_distance(pred: LogicalTree, gold: LogicalTree, separator: str = " ") -> int:
    """Exact ordered tree edit distance between two logical trees."""
    label_ids: dict[tuple[str, str], int] = {}
    flat_pred = flatten(pred, label_ids, separator)
    flat_gold = flatten(gold, label_ids, separator)
    return int(_kernel.ted_distance(*flat_pred, *flat_gold))


def similarity(pred: LogicalTree, gold: LogicalTree, separator: str = " ") -> float:
    """Edit-distance similarity: 1 - TED / max(|pred|, |gold|), floored at 0.

    Node counts include the root, whose empty-content label always matches.
    """
    distance = tree_distance(pred, gold, separator)
    return max(0.0, 1.0 - distance / max(len(pred), len(gold)))
