import random

import pytest

from efmct import fixtures as FX
from efmct.efm import FEATURE, GROUP, NAT_ATTR, REAL_ATTR, efm_type_graph
from efmct.graph import SymbolicGraph
from efmct.smt import SolverConfig, shutdown_sessions
from efmct.sorts import Variable


@pytest.fixture(scope="session")
def solver() -> SolverConfig:
    return SolverConfig()


@pytest.fixture(scope="session")
def fast_solver() -> SolverConfig:
    """Short timeout; hard queries resolve to timeout/unknown quickly."""
    return SolverConfig(timeout_ms=1500)


@pytest.fixture(scope="session", autouse=True)
def _cleanup_solver_sessions():
    yield
    shutdown_sessions()


@pytest.fixture(scope="session")
def lock_excerpt() -> SymbolicGraph:
    return FX.lock_excerpt()


@pytest.fixture(scope="session")
def lock_full() -> SymbolicGraph:
    return FX.lock_full()


@pytest.fixture(scope="session")
def hoist():
    return FX.rule_hoist_attribute()


@pytest.fixture(scope="session")
def raise10():
    return FX.rule_raise_by_10()


@pytest.fixture(scope="session")
def scale10():
    return FX.rule_scale_by_10()


def random_efm_graph(
    rng: random.Random,
    max_objects: int = 8,
    min_objects: int = 1,
    types: tuple[str, ...] = (FEATURE, GROUP, REAL_ATTR, NAT_ATTR),
    link_probability: float = 0.5,
) -> SymbolicGraph:
    """Random structurally valid graph over the EFM metamodel (not
    necessarily well-formed as a feature model)."""
    tg = efm_type_graph()
    n = rng.randint(min_objects, max_objects)
    objects = [(f"o{i}", rng.choice(types)) for i in range(n)]
    by_type: dict[str, list[str]] = {}
    for oid, otype in objects:
        by_type.setdefault(otype, []).append(oid)
    slots = {}
    for oid, otype in objects:
        for attr, sort in tg.attributes(otype).items():
            slots[(oid, attr)] = Variable(f"v_{oid}_{attr}", sort)
    links = []
    k = 0
    for etype, (src_t, tgt_t) in sorted(tg.edge_types.items()):
        for src in by_type.get(src_t, []):
            for tgt in by_type.get(tgt_t, []):
                if src != tgt and rng.random() < link_probability:
                    k += 1
                    links.append((f"l{k}", etype, src, tgt))
    return SymbolicGraph.build(tg, objects, links, slots)
