"""Pure-Python ordered tree edit distance (Zhang-Shasha), unit costs.

Fallback for the compiled kernel in ``_ted``; both take the same flattened
postorder representation and must return identical distances. Trees are
described by three parallel structures over postorder indices 0..n-1:

- ``labels``: integer label per node (relabel cost is 0 iff labels match),
- ``lmld``: index of the leftmost leaf descendant of each node,
- ``keyroots``: ascending indices of nodes with no lower-indexed node
  sharing their leftmost leaf (subtree roots the algorithm anchors on).

Insert and delete cost 1; relabel costs 1 when labels differ, else 0.
"""

from __future__ import annotations

from typing import Sequence


def ted_distance(
    labels1: Sequence[int],
    lmld1: Sequence[int],
    keyroots1: Sequence[int],
    labels2: Sequence[int],
    lmld2: Sequence[int],
    keyroots2: Sequence[int],
) -> int:
    n1 = len(labels1)
    n2 = len(labels2)
    if n1 == 0 or n2 == 0:
        return n1 + n2
    # Permanent subtree-pair distances, filled keyroot by keyroot.
    td = [[0] * n2 for _ in range(n1)]
    # Forest-distance scratch space, sized once for the largest spans.
    fd = [[0] * (n2 + 1) for _ in range(n1 + 1)]

    for x in keyroots1:
        lx = lmld1[x]
        m = x - lx + 2
        ioff = lx - 1
        for y in keyroots2:
            ly = lmld2[y]
            n = y - ly + 2
            joff = ly - 1

            fd[0][0] = 0
            for i in range(1, m):
                fd[i][0] = fd[i - 1][0] + 1
            for j in range(1, n):
                fd[0][j] = fd[0][j - 1] + 1

            for i in range(1, m):
                li = lmld1[i + ioff]
                for j in range(1, n):
                    if li == lx and lmld2[j + joff] == ly:
                        # Both prefixes end at subtree roots: full forest
                        # recurrence, and the value doubles as a tree distance.
                        cost = 0 if labels1[i + ioff] == labels2[j + joff] else 1
                        best = fd[i - 1][j] + 1
                        alt = fd[i][j - 1] + 1
                        if alt < best:
                            best = alt
                        alt = fd[i - 1][j - 1] + cost
                        if alt < best:
                            best = alt
                        fd[i][j] = best
                        td[i + ioff][j + joff] = best
                    else:
                        # Otherwise reuse the stored distance of the subtree
                        # pair hanging off this cell.
                        p = li - 1 - ioff
                        q = lmld2[j + joff] - 1 - joff
                        best = fd[i - 1][j] + 1
                        alt = fd[i][j - 1] + 1
                        if alt < best:
                            best = alt
                        alt = fd[p][q] + td[i + ioff][j + joff]
                        if alt < best:
                            best = alt
                        fd[i][j] = best

    return td[n1 - 1][n2 - 1]
