"""Kernel selection, flattening, and compiled/pure equivalence."""

import random
import subprocess
import sys

import pytest

from docstruct import _ted_py
from docstruct.model import LogicalTree
from docstruct.selfcheck import brute_force_tree_distance
from docstruct.treedist import flatten, kernel_name, tree_distance

try:
    from docstruct import _ted as compiled
except ImportError:
    compiled = None


def random_tree(rng, nodes=10):
    tree = LogicalTree()
    headings = [(tree.root, 0)]
    for _ in range(rng.randint(1, nodes)):
        parent, level = rng.choice(headings)
        if rng.random() < 0.45 and level < 6:
            node = tree.add_heading(parent, level + 1, rng.choice("abcde"))
            headings.append((node, level + 1))
        else:
            tree.add_paragraph(parent, rng.choice("vwxyz"))
    return tree


def test_flatten_single_root():
    labels, lmld, keyroots = flatten(LogicalTree(), {})
    assert labels == [0] and lmld == [0] and keyroots == [0]


def test_flatten_shapes():
    tree = LogicalTree()
    a = tree.add_heading(tree.root, 1, "a")
    tree.add_paragraph(a, "x")
    tree.add_paragraph(a, "y")
    labels, lmld, keyroots = flatten(tree, {})
    # Postorder: x, y, a, root.
    assert len(labels) == 4
    assert lmld == [0, 1, 0, 0]
    assert keyroots == [1, 3]  # y (has a left sibling) and the root


def test_shared_interning_across_pair():
    t1 = LogicalTree()
    t1.add_paragraph(t1.root, "same")
    t2 = LogicalTree()
    t2.add_paragraph(t2.root, "same")
    ids = {}
    l1, _, _ = flatten(t1, ids)
    l2, _, _ = flatten(t2, ids)
    assert l1 == l2


def test_pure_kernel_matches_brute_force():
    rng = random.Random(5)
    for _ in range(150):
        a, b = random_tree(rng, 6), random_tree(rng, 6)
        ids = {}
        fa, fb = flatten(a, ids), flatten(b, ids)
        assert _ted_py.ted_distance(*fa, *fb) == brute_force_tree_distance(a, b)


@pytest.mark.skipif(compiled is None, reason="compiled kernel not built")
def test_compiled_kernel_matches_pure():
    rng = random.Random(9)
    for _ in range(100):
        a, b = random_tree(rng, 40), random_tree(rng, 40)
        ids = {}
        fa, fb = flatten(a, ids), flatten(b, ids)
        assert compiled.ted_distance(*fa, *fb) == _ted_py.ted_distance(*fa, *fb)


def test_distance_symmetry_and_identity():
    rng = random.Random(13)
    for _ in range(30):
        a, b = random_tree(rng), random_tree(rng)
        assert tree_distance(a, a) == 0
        assert tree_distance(a, b) == tree_distance(b, a)


def test_env_var_forces_pure_python():
    code = (
        "import docstruct.treedist as td; "
        "print(td.kernel_name())"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PATH": "/usr/bin:/bin", "DOCSTRUCT_PURE_PYTHON": "1"},
    )
    assert out.stdout.strip() == "pure-python (forced)"


def test_kernel_name_reports_selection():
    expected = "compiled" if compiled is not None else "pure-python"
    assert kernel_name() == expected
