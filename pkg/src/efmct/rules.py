"""Symbolic graph transformation rules and their application.

A rule is (LHS, RHS, phi) with a partial preservation correspondence between
the two patterns.  Application at a match deletes the images of LHS-only
elements, adds fresh copies of RHS-only elements, and conjoins the
substituted rule formula onto the host formula.  Deleted elements' variables
and all formula clauses are retained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import formula as F
from .formula import Formula, Substitution
from .graph import Link, Morphism, SymbolicGraph, Violation
from .matching import find_matches
from .smt import SatResult, SmtVerdict, SolverConfig, check_sat, check_validity, Validity
from .sorts import Variable


class RuleError(Exception):
    pass


@dataclass
class SymbolicRule:
    """LHS/RHS patterns, a preservation mapping, and a rule formula.

    A preserved object whose RHS slot holds a different variable id than its
    LHS slot is *reassigned*: application installs a fresh variable there.
    """

    name: str
    lhs: SymbolicGraph
    rhs: SymbolicGraph
    preserve_objects: dict[str, str]  # lhs object id -> rhs object id
    preserve_links: dict[str, str]  # lhs link id -> rhs link id
    phi: Formula = F.TRUE

    def deleted_objects(self) -> list[str]:
        return sorted(set(self.lhs.objects) - set(self.preserve_objects))

    def deleted_links(self) -> list[str]:
        return sorted(set(self.lhs.links) - set(self.preserve_links))

    def added_objects(self) -> list[str]:
        return sorted(set(self.rhs.objects) - set(self.preserve_objects.values()))

    def added_links(self) -> list[str]:
        return sorted(set(self.rhs.links) - set(self.preserve_links.values()))

    def lhs_variables(self) -> dict[str, Variable]:
        return dict(self.lhs.variables)

    def fresh_variables(self) -> dict[str, Variable]:
        """RHS variables not shared with the LHS (by id)."""
        return {vid: v for vid, v in self.rhs.variables.items() if vid not in self.lhs.variables}

    def reassigned_slots(self) -> list[tuple[str, str]]:
        """(lhs object id, attr) pairs whose slot gets a fresh variable on application."""
        out = []
        for lo, ro in sorted(self.preserve_objects.items()):
            for attr, lvar in sorted(self.lhs.slots.get(lo, {}).items()):
                rvar = self.rhs.slots.get(ro, {}).get(attr)
                if rvar is not None and rvar.id != lvar.id:
                    out.append((lo, attr))
        return out

    def deletes_or_reassigns(self) -> bool:
        return bool(self.deleted_objects() or self.deleted_links() or self.reassigned_slots())


def validate_rule(r: SymbolicRule) -> list[Violation]:
    out: list[Violation] = []
    if r.lhs.formula != F.TRUE:
        out.append(Violation("pattern-formula", "lhs", "pattern formulas must be true"))
    if r.rhs.formula != F.TRUE:
        out.append(Violation("pattern-formula", "rhs", "pattern formulas must be true"))
    if len(set(r.preserve_objects.values())) != len(r.preserve_objects):
        out.append(Violation("preserve", "objects", "preservation map is not injective"))
    if len(set(r.preserve_links.values())) != len(r.preserve_links):
        out.append(Violation("preserve", "links", "preservation map is not injective"))
    for lo, ro in sorted(r.preserve_objects.items()):
        if lo not in r.lhs.objects or ro not in r.rhs.objects:
            out.append(Violation("preserve", lo, f"pair ({lo!r}, {ro!r}) names a missing object"))
        elif r.lhs.objects[lo] != r.rhs.objects[ro]:
            out.append(Violation("preserve", lo, f"{lo!r} and {ro!r} differ in type"))
    for ll, rl in sorted(r.preserve_links.items()):
        if ll not in r.lhs.links or rl not in r.rhs.links:
            out.append(Violation("preserve", ll, f"pair ({ll!r}, {rl!r}) names a missing link"))
            continue
        a, b = r.lhs.links[ll], r.rhs.links[rl]
        if a.type != b.type:
            out.append(Violation("preserve", ll, "preserved links differ in type"))
        if r.preserve_objects.get(a.source) != b.source or r.preserve_objects.get(a.target) != b.target:
            out.append(Violation("preserve", ll, "preserved link endpoints are not preserved consistently"))
    for vid in sorted(set(r.lhs.variables) & set(r.rhs.variables)):
        if r.lhs.variables[vid] != r.rhs.variables[vid]:
            out.append(Violation("variable-sort", vid, "shared variable id has two sorts"))
    housed = set(r.lhs.variables) | set(r.rhs.variables)
    for v in sorted(F.free_vars(r.phi)):
        if v.id not in housed:
            out.append(Violation("unhoused-variable", v.id, "rule formula mentions a variable of neither side"))
    try:
        F.check_boolean(r.phi)
    except F.FormulaError as exc:
        out.append(Violation("ill-sorted-formula", "phi", str(exc)))
    return out


class Admissibility(Enum):
    ADMISSIBLE = "admissible"
    INADMISSIBLE = "inadmissible"
    UNKNOWN = "unknown"


@dataclass
class AdmissibilityReport:
    verdict: Admissibility
    application_conditions: list[Formula]  # conjuncts over LHS variables only
    effect_conditions: list[Formula]  # conjuncts constraining fresh variables
    query: Formula | None
    solver_wall_ms: float = 0.0


def check_admissibility(r: SymbolicRule, config: SolverConfig | None = None) -> AdmissibilityReport:
    """Splits phi into application conditions (over LHS variables only) and
    effect conditions, then decides whether fresh variables can always be
    chosen: validity of (forall lhs-vars, exists fresh-vars, effect)."""
    lhs_ids = set(r.lhs.variables)
    phi_app: list[Formula] = []
    phi_eff: list[Formula] = []
    for clause in F.conjuncts(r.phi):
        if all(v.id in lhs_ids for v in F.free_vars(clause)):
            phi_app.append(clause)
        else:
            phi_eff.append(clause)
    if not phi_eff:
        return AdmissibilityReport(Admissibility.ADMISSIBLE, phi_app, [], None)
    effect = F.conj(*phi_eff)
    free = sorted(F.free_vars(effect))
    outer = tuple(v for v in free if v.id in lhs_ids)
    inner = tuple(v for v in free if v.id not in lhs_ids)
    query: Formula = effect
    if inner:
        query = F.Exists(inner, query)
    if outer:
        query = F.Forall(outer, query)
    verdict = check_validity(query, config, decls=())
    mapping = {
        Validity.VALID: Admissibility.ADMISSIBLE,
        Validity.INVALID: Admissibility.INADMISSIBLE,
        Validity.UNKNOWN: Admissibility.UNKNOWN,
        Validity.TIMEOUT: Admissibility.UNKNOWN,
        Validity.ERROR: Admissibility.UNKNOWN,
    }
    return AdmissibilityReport(mapping[verdict.result], phi_app, phi_eff, query, verdict.wall_ms)


def find_rule_matches(r: SymbolicRule, host: SymbolicGraph) -> list[Morphism]:
    return find_matches(r.lhs, host)


class ApplyStatus(Enum):
    APPLIED = "applied"
    INVALID_DANGLING = "invalid-dangling"
    INVALID_UNSAT = "invalid-unsat"
    UNKNOWN_SAT = "unknown-sat"


@dataclass
class ApplicationResult:
    status: ApplyStatus
    result: SymbolicGraph | None = None
    comatch: Morphism | None = None
    sigma: Substitution | None = None
    sat_verdict: SmtVerdict | None = None
    dangling_links: list[str] = field(default_factory=list)

    @property
    def applied(self) -> bool:
        return self.status is ApplyStatus.APPLIED


def _fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    k = 2
    while f"{base}~{k}" in taken:
        k += 1
    return f"{base}~{k}"


def apply(
    r: SymbolicRule,
    m: Morphism,
    host: SymbolicGraph,
    config: SolverConfig | None = None,
) -> ApplicationResult:
    """Apply r at match m.  Fresh object/variable names are derived from the
    RHS names, namespaced by the rule name, so repeated runs are identical."""
    if m.source is not r.lhs or m.target is not host:
        raise RuleError("match does not relate this rule's left-hand side to the host")
    if m.check():
        raise RuleError("morphism is not a valid match")

    deleted_objs = {m.object_map[o] for o in r.deleted_objects()}
    deleted_links = {m.link_map[l] for l in r.deleted_links()}

    dangling = [
        lid
        for lid in sorted(host.links)
        if lid not in deleted_links
        and (host.links[lid].source in deleted_objs or host.links[lid].target in deleted_objs)
    ]
    if dangling:
        return ApplicationResult(ApplyStatus.INVALID_DANGLING, dangling_links=dangling)

    objects = {oid: t for oid, t in host.objects.items() if oid not in deleted_objs}
    links = {lid: l for lid, l in host.links.items() if lid not in deleted_links}
    slots = {oid: dict(attrs) for oid, attrs in host.slots.items() if oid not in deleted_objs}
    variables = dict(host.variables)

    # sigma' sends LHS variables through the match and RHS variables through
    # the comatch being constructed.
    sigma_map: dict[Variable, Variable] = m.variable_map().mapping
    co_objects: dict[str, str] = {}
    co_links: dict[str, str] = {}
    for lo, ro in r.preserve_objects.items():
        co_objects[ro] = m.object_map[lo]
    for ll, rl in r.preserve_links.items():
        co_links[rl] = m.link_map[ll]

    def install_fresh_variable(rhs_var: Variable) -> Variable:
        name = _fresh_name(f"{rhs_var.id}@{r.name}", set(variables))
        fresh = Variable(name, rhs_var.sort)
        variables[name] = fresh
        return fresh

    # Fresh copies of added objects, with fresh variables in their slots.
    for ro in r.added_objects():
        oid = _fresh_name(f"{ro}@{r.name}", set(objects))
        co_objects[ro] = oid
        objects[oid] = r.rhs.objects[ro]
        slots[oid] = {}
        for attr, rvar in sorted(r.rhs.slots.get(ro, {}).items()):
            known = sigma_map.get(rvar)
            if known is None:
                known = install_fresh_variable(rvar)
                sigma_map[rvar] = known
            slots[oid][attr] = known

    # Reassignment: preserved slots whose RHS variable differs get a fresh one.
    for lo, ro in sorted(r.preserve_objects.items()):
        target_obj = m.object_map[lo]
        for attr, lvar in sorted(r.lhs.slots.get(lo, {}).items()):
            rvar = r.rhs.slots.get(ro, {}).get(attr)
            if rvar is None or rvar.id == lvar.id:
                continue
            known = sigma_map.get(rvar)
            if known is None:
                known = install_fresh_variable(rvar)
                sigma_map[rvar] = known
            slots[target_obj][attr] = known

    link_shapes = {(l.type, l.source, l.target) for l in links.values()}
    for rl in r.added_links():
        link = r.rhs.links[rl]
        new_link = Link(link.type, co_objects[link.source], co_objects[link.target])
        shape = (new_link.type, new_link.source, new_link.target)
        if shape in link_shapes:
            raise RuleError(
                f"rule {r.name!r} would add a parallel {link.type!r} link between "
                f"{new_link.source!r} and {new_link.target!r}"
            )
        link_shapes.add(shape)
        lid = _fresh_name(f"{rl}@{r.name}", set(links))
        co_links[rl] = lid
        links[lid] = new_link

    # Cover RHS variables that sit on no slot (housed but unassigned).
    for vid in sorted(r.rhs.variables):
        rvar = r.rhs.variables[vid]
        if rvar not in sigma_map:
            sigma_map[rvar] = install_fresh_variable(rvar)

    sigma = Substitution(sigma_map)
    new_formula = F.conj(host.formula, sigma(r.phi))
    result = SymbolicGraph(host.type_graph, objects, links, slots, variables.values(), new_formula)
    comatch = Morphism(r.rhs, result, co_objects, co_links)

    verdict = check_sat(new_formula, config)
    if verdict.result is SatResult.UNSAT:
        return ApplicationResult(ApplyStatus.INVALID_UNSAT, sigma=sigma, sat_verdict=verdict)
    if verdict.result is SatResult.SAT:
        return ApplicationResult(ApplyStatus.APPLIED, result, comatch, sigma, verdict)
    return ApplicationResult(ApplyStatus.UNKNOWN_SAT, result, comatch, sigma, verdict)
