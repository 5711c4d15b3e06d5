#!/usr/bin/env python3
"""Benchmark the compiled matching kernel against the pure-Python fallback.

Measures full match enumeration (pattern into host) and isomorphism search
on random typed graphs of growing size.  Run after `pip install -e .`:

    python3 benchmarks/bench_matching.py
"""

from __future__ import annotations

import random
import sys
import time

from efmct.matching import (
    find_isomorphisms, find_isomorphisms_python, find_matches, find_matches_python, kernel_name,
)


def random_graph(rng: random.Random, n_objects: int, n_types: int, link_probability: float):
    from efmct.graph import SymbolicGraph, TypeGraph
    from efmct.sorts import NATURAL, Variable

    type_names = [f"T{i}" for i in range(n_types)]
    tg = TypeGraph(
        "bench",
        {t: {"v": NATURAL} for t in type_names},
        {f"e{i}": (type_names[i % n_types], type_names[(i + 1) % n_types]) for i in range(n_types)},
    )
    objects = [(f"o{i}", rng.choice(type_names)) for i in range(n_objects)]
    slots = {(oid, "v"): Variable(f"v{oid}", NATURAL) for oid, _ in objects}
    by_type: dict[str, list[str]] = {}
    for oid, otype in objects:
        by_type.setdefault(otype, []).append(oid)
    links = []
    k = 0
    for etype, (src_t, tgt_t) in tg.edge_types.items():
        for src in by_type.get(src_t, []):
            for tgt in by_type.get(tgt_t, []):
                if src != tgt and rng.random() < link_probability:
                    k += 1
                    links.append((f"l{k}", etype, src, tgt))
    return SymbolicGraph.build(tg, objects, links, slots)


def timed(fn, *args, repeat: int = 3) -> tuple[float, int]:
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, len(result)


def main() -> int:
    if kernel_name() != "cython":
        print("compiled kernel not built; pure-Python numbers only", file=sys.stderr)
    rng = random.Random(42)
    print(f"{'case':<28}{'matches':>9}{'python':>12}{'compiled':>12}{'speedup':>9}")
    cases = [
        ("match 4 -> 10", 4, 10, 2, 0.5),
        ("match 5 -> 14", 5, 14, 2, 0.4),
        ("match 6 -> 16", 6, 16, 3, 0.35),
        ("match 6 -> 20", 6, 20, 3, 0.3),
    ]
    for name, np, nh, ntypes, p in cases:
        pattern = random_graph(rng, np, ntypes, p)
        host = random_graph(rng, nh, ntypes, p)
        t_py, n_py = timed(find_matches_python, pattern, host)
        t_cy, n_cy = timed(find_matches, pattern, host)
        assert n_py == n_cy
        speedup = t_py / t_cy if t_cy > 0 else float("inf")
        print(f"{name:<28}{n_py:>9}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms{speedup:>8.1f}x")
    for n in (8, 10, 12):
        g1 = random_graph(rng, n, 2, 0.4)
        perm = list(g1.objects)
        rng.shuffle(perm)
        t_py, n_py = timed(find_isomorphisms_python, g1, g1)
        t_cy, n_cy = timed(find_isomorphisms, g1, g1)
        assert n_py == n_cy
        speedup = t_py / t_cy if t_cy > 0 else float("inf")
        name = f"iso self {n} objects"
        print(f"{name:<28}{n_py:>9}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms{speedup:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
