#!/usr/bin/env python3
"""Benchmark the compiled edit-distance kernel against the pure-Python fallback.

Builds random document-tree pairs at several sizes, checks both kernels
agree, and reports per-pair timings and the speedup. Run from the repository
root after installing the package:

    python benchmarks/bench_ted.py [--sizes 10 30 100 300] [--pairs 20] [--seed 0]
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

from docstruct import _ted_py
from docstruct.model import LogicalTree
from docstruct.treedist import flatten

try:
    from docstruct import _ted as compiled
except ImportError:
    compiled = None


def tree_with_size(node_count: int, seed: int) -> LogicalTree:
    """Random tree with exactly ``node_count`` nodes beyond the root."""
    rng = random.Random(seed)
    tree = LogicalTree()
    headings = [(tree.root, 0)]
    for i in range(node_count):
        parent, level = rng.choice(headings)
        if rng.random() < 0.4 and level < 8:
            node = tree.add_heading(parent, level + 1, f"h{rng.randint(0, 30)}")
            headings.append((node, level + 1))
        else:
            tree.add_paragraph(parent, f"p{rng.randint(0, 30)}")
    return tree


def time_kernel(kernel, flat_pairs) -> tuple[list[int], float]:
    distances = []
    started = time.perf_counter()
    for a, b in flat_pairs:
        distances.append(kernel.ted_distance(*a, *b))
    return distances, time.perf_counter() - started


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 30, 100, 300])
    parser.add_argument("--pairs", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if compiled is None:
        print("compiled kernel not built; timing the pure-Python kernel only")

    print(f"{'nodes':>8} {'pairs':>6} {'pure ms/pair':>14} {'compiled ms/pair':>18} {'speedup':>9}")
    for size in args.sizes:
        flat_pairs = []
        node_counts = []
        for pair_index in range(args.pairs):
            seed = args.seed * 7919 + size * 131 + pair_index
            t1 = tree_with_size(size, seed)
            t2 = tree_with_size(size, seed + 1)
            labels: dict = {}
            flat_pairs.append((flatten(t1, labels), flatten(t2, labels)))
            node_counts.extend([len(t1), len(t2)])

        pure_d, pure_s = time_kernel(_ted_py, flat_pairs)
        mean_nodes = statistics.mean(node_counts)
        if compiled is not None:
            comp_d, comp_s = time_kernel(compiled, flat_pairs)
            if comp_d != pure_d:
                print(f"MISMATCH at size {size}: kernels disagree")
                return 1
            print(
                f"{mean_nodes:8.1f} {args.pairs:6d} {1000 * pure_s / args.pairs:14.3f} "
                f"{1000 * comp_s / args.pairs:18.3f} {pure_s / comp_s:8.1f}x"
            )
        else:
            print(f"{mean_nodes:8.1f} {args.pairs:6d} {1000 * pure_s / args.pairs:14.3f} {'-':>18} {'-':>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
