"""Pure-Python matching kernel.

Enumerates injective type-preserving object assignments of a pattern into a
host over integer-encoded graphs.  The compiled twin (_matchcore_cy) exposes
the same function; the active kernel is selected in efmct.matching.
"""

from __future__ import annotations

KERNEL_NAME = "python"


def enumerate_maps(
    p_types: list[int],
    p_links: list[tuple[int, int, int]],
    h_types: list[int],
    h_links: list[tuple[int, int, int]],
    iso: bool,
) -> list[tuple[int, ...]]:
    """All injective maps pattern-index -> host-index preserving types and links.

    Assignments are produced in lexicographic order.  With iso=True only
    bijections are produced (object and link counts must agree; link
    bijectivity then follows from injectivity of the induced link map).
    """
    n, m = len(p_types), len(h_types)
    if iso:
        if n != m or len(p_links) != len(h_links) or sorted(p_types) != sorted(h_types):
            return []
    elif n > m:
        return []
    if n == 0:
        return [()]

    host_set = {(e, s, t) for (e, s, t) in h_links}
    # Links checkable once position k is assigned: both endpoints <= k.
    pending: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for (e, s, t) in p_links:
        pending[max(s, t)].append((e, s, t))

    results: list[tuple[int, ...]] = []
    assignment = [-1] * n
    used = [False] * m

    def extend(k: int) -> None:
        if k == n:
            results.append(tuple(assignment))
            return
        want = p_types[k]
        for j in range(m):
            if used[j] or h_types[j] != want:
                continue
            assignment[k] = j
            ok = True
            for (e, s, t) in pending[k]:
                if (e, assignment[s], assignment[t]) not in host_set:
                    ok = False
                    break
            if ok:
                used[j] = True
                extend(k + 1)
                used[j] = False
        assignment[k] = -1

    extend(0)
    return results
