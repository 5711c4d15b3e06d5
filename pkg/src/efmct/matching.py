"""Pattern matching and isomorphism search on symbolic graphs.

The inner enumeration runs in a compiled kernel when the extension built at
install time is importable, with a pure-Python fallback selected at import.
Matching is injective and ignores formulas; results come in a deterministic
order (lexicographic in the object-id assignment).
"""

from __future__ import annotations

from .graph import GraphError, Morphism, SymbolicGraph, TypeGraphMismatch

try:  # pragma: no cover - exercised indirectly via kernel_name()
    from . import _matchcore_cy as _kernel  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover
    from . import _matchcore as _kernel  # type: ignore[no-redef]

from . import _matchcore as _pykernel


def kernel_name() -> str:
    return _kernel.KERNEL_NAME


def _encode(pattern: SymbolicGraph, host: SymbolicGraph):
    node_names = sorted(set(pattern.objects.values()) | set(host.objects.values()))
    edge_names = sorted(set(l.type for l in pattern.links.values()) | set(l.type for l in host.links.values()))
    ncode = {nm: i for i, nm in enumerate(node_names)}
    ecode = {nm: i for i, nm in enumerate(edge_names)}

    def rows(g: SymbolicGraph):
        ids = sorted(g.objects)
        idx = {oid: i for i, oid in enumerate(ids)}
        types = [ncode[g.objects[oid]] for oid in ids]
        links = [
            (ecode[l.type], idx[l.source], idx[l.target])
            for _, l in sorted(g.links.items())
        ]
        return ids, idx, types, links

    return rows(pattern), rows(host)


def _to_morphisms(
    pattern: SymbolicGraph,
    host: SymbolicGraph,
    p_ids: list[str],
    h_ids: list[str],
    tuples: list[tuple[int, ...]],
) -> list[Morphism]:
    host_links = host.links_between()
    out: list[Morphism] = []
    for assignment in tuples:
        object_map = {p_ids[i]: h_ids[j] for i, j in enumerate(assignment)}
        link_map: dict[str, str] = {}
        for lid in sorted(pattern.links):
            link = pattern.links[lid]
            key = (link.type, object_map[link.source], object_map[link.target])
            link_map[lid] = host_links[key]
        m = Morphism(pattern, host, object_map, link_map)
        try:
            m.variable_map()
        except GraphError:
            # A pattern sharing one variable across slots only matches hosts
            # sharing a variable the same way.
            continue
        out.append(m)
    return out


def _run(pattern: SymbolicGraph, host: SymbolicGraph, iso: bool, kernel) -> list[Morphism]:
    if pattern.type_graph is not host.type_graph and pattern.type_graph != host.type_graph:
        raise TypeGraphMismatch("pattern and host are typed over different type graphs")
    (p_ids, _, p_types, p_links), (h_ids, _, h_types, h_links) = _encode(pattern, host)
    tuples = kernel.enumerate_maps(p_types, p_links, h_types, h_links, iso)
    return _to_morphisms(pattern, host, p_ids, h_ids, tuples)


def find_matches(pattern: SymbolicGraph, host: SymbolicGraph) -> list[Morphism]:
    """All injective type-preserving morphisms pattern -> host."""
    return _run(pattern, host, iso=False, kernel=_kernel)


def find_isomorphisms(g1: SymbolicGraph, g2: SymbolicGraph) -> list[Morphism]:
    """All bijective type-preserving morphisms g1 -> g2 (objects and links)."""
    return _run(g1, g2, iso=True, kernel=_kernel)


def find_matches_python(pattern: SymbolicGraph, host: SymbolicGraph) -> list[Morphism]:
    """Fallback-kernel variant, kept callable for parity tests and benchmarks."""
    return _run(pattern, host, iso=False, kernel=_pykernel)


def find_isomorphisms_python(g1: SymbolicGraph, g2: SymbolicGraph) -> list[Morphism]:
    return _run(g1, g2, iso=True, kernel=_pykernel)


def is_isomorphic(g1: SymbolicGraph, g2: SymbolicGraph) -> bool:
    return bool(find_isomorphisms(g1, g2))
