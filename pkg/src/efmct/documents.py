"""File formats for models, rules, assignments and conflict reports.

Documents are JSON with a canonical serialization: arrays sorted by id,
object keys sorted, formulas carried as SMT-LIB2 term text over the declared
variables.  parse followed by serialize is the identity on canonical files.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from . import analysis as A
from . import formula as F
from .efm import efm_type_graph
from .graph import SymbolicGraph, TypeGraph, validate_graph
from .rules import SymbolicRule, validate_rule
from .smt import SolverConfig
from .smttext import SmtTextError, TermParser, render_term
from .sorts import BOOLEAN, NATURAL, REAL, Sort, SortKind, Variable

MODEL_FORMAT = "efmct-model/1"
RULE_FORMAT = "efmct-rule/1"
REPORT_FORMAT = "efmct-report/1"

TOOL_NAME = "efmct"
TOOL_VERSION = "0.1.0"


class ParseError(Exception):
    def __init__(self, locus: str, message: str):
        self.locus = locus
        self.message = message
        super().__init__(f"{locus}: {message}")


def _enum_sorts(tg: TypeGraph) -> dict[str, Sort]:
    out: dict[str, Sort] = {}
    for attrs in tg.node_types.values():
        for sort in attrs.values():
            if sort.kind is SortKind.ENUMERATION:
                out[sort.enum_name] = sort
    return out


def _sort_by_name(name: str, tg: TypeGraph, locus: str) -> Sort:
    if name == "Bool":
        return BOOLEAN
    if name == "Real":
        return REAL
    if name == "Nat":
        return NATURAL
    enum = _enum_sorts(tg).get(name)
    if enum is None:
        raise ParseError(locus, f"unknown sort {name!r}")
    return enum


def _sort_name(sort: Sort) -> str:
    if sort.kind is SortKind.BOOLEAN:
        return "Bool"
    if sort.kind is SortKind.REAL:
        return "Real"
    if sort.kind is SortKind.NATURAL:
        return "Nat"
    return sort.enum_name


def _expect(doc: Mapping[str, Any], key: str, kind: type, locus: str) -> Any:
    if key not in doc:
        raise ParseError(locus, f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ParseError(f"{locus}.{key}", f"expected {kind.__name__}")
    return value


def _load_json(text: str, locus: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{locus}:line {exc.lineno}", f"invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(locus, "document must be a JSON object")
    return doc


def _parse_graph_fragment(
    doc: Mapping[str, Any],
    tg: TypeGraph,
    locus: str,
    formula_text: str | None,
) -> SymbolicGraph:
    variables: dict[str, Variable] = {}
    for i, entry in enumerate(_expect(doc, "variables", list, locus)):
        vlocus = f"{locus}.variables[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(vlocus, "expected an object")
        vid = _expect(entry, "id", str, vlocus)
        sort = _sort_by_name(_expect(entry, "sort", str, vlocus), tg, vlocus)
        if vid in variables:
            raise ParseError(vlocus, f"duplicate variable {vid!r}")
        variables[vid] = Variable(vid, sort)

    objects: list[tuple[str, str]] = []
    slots: dict[tuple[str, str], Variable] = {}
    seen_objects: set[str] = set()
    for i, entry in enumerate(_expect(doc, "objects", list, locus)):
        olocus = f"{locus}.objects[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(olocus, "expected an object")
        oid = _expect(entry, "id", str, olocus)
        otype = _expect(entry, "type", str, olocus)
        if oid in seen_objects:
            raise ParseError(olocus, f"duplicate object id {oid!r}")
        seen_objects.add(oid)
        if otype not in tg.node_types:
            raise ParseError(olocus, f"unknown node type {otype!r}")
        objects.append((oid, otype))
        for attr, vid in sorted(_expect(entry, "slots", dict, olocus).items()):
            if not isinstance(vid, str) or vid not in variables:
                raise ParseError(f"{olocus}.slots.{attr}", f"undeclared variable {vid!r}")
            slots[(oid, attr)] = variables[vid]

    links: list[tuple[str, str, str, str]] = []
    seen_links: set[str] = set()
    for i, entry in enumerate(_expect(doc, "links", list, locus)):
        llocus = f"{locus}.links[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(llocus, "expected an object")
        lid = _expect(entry, "id", str, llocus)
        ltype = _expect(entry, "type", str, llocus)
        src = _expect(entry, "source", str, llocus)
        tgt = _expect(entry, "target", str, llocus)
        if lid in seen_links:
            raise ParseError(llocus, f"duplicate link id {lid!r}")
        seen_links.add(lid)
        if ltype not in tg.edge_types:
            raise ParseError(llocus, f"unknown edge type {ltype!r}")
        for endpoint in (src, tgt):
            if endpoint not in seen_objects:
                raise ParseError(llocus, f"unresolved object id {endpoint!r}")
        links.append((lid, ltype, src, tgt))

    formula = F.TRUE
    if formula_text is not None:
        try:
            formula = TermParser(variables, _enum_sorts(tg).values()).parse(formula_text)
        except (SmtTextError, F.FormulaError) as exc:
            raise ParseError(f"{locus}.formula", str(exc)) from exc

    try:
        graph = SymbolicGraph.build(tg, objects, links, slots, variables.values(), formula)
    except Exception as exc:
        raise ParseError(locus, str(exc)) from exc
    return graph


def _graph_fragment_doc(g: SymbolicGraph) -> dict:
    return {
        "variables": [
            {"id": vid, "sort": _sort_name(g.variables[vid].sort)} for vid in sorted(g.variables)
        ],
        "objects": [
            {
                "id": oid,
                "type": g.objects[oid],
                "slots": {attr: var.id for attr, var in sorted(g.slots.get(oid, {}).items())},
            }
            for oid in sorted(g.objects)
        ],
        "links": [
            {
                "id": lid,
                "type": g.links[lid].type,
                "source": g.links[lid].source,
                "target": g.links[lid].target,
            }
            for lid in sorted(g.links)
        ],
    }


def parse_model(text: str, type_graph: TypeGraph | None = None) -> SymbolicGraph:
    tg = type_graph or efm_type_graph()
    doc = _load_json(text, "model")
    if doc.get("format") != MODEL_FORMAT:
        raise ParseError("model.format", f"expected {MODEL_FORMAT!r}")
    formula_text = _expect(doc, "formula", str, "model")
    graph = _parse_graph_fragment(doc, tg, "model", formula_text)
    problems = validate_graph(graph, tg)
    if problems:
        raise ParseError("model", "; ".join(str(p) for p in problems))
    return graph


def serialize_model(g: SymbolicGraph) -> str:
    doc = {"format": MODEL_FORMAT, **_graph_fragment_doc(g), "formula": render_term(g.formula)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_rule(text: str, type_graph: TypeGraph | None = None) -> SymbolicRule:
    tg = type_graph or efm_type_graph()
    doc = _load_json(text, "rule")
    if doc.get("format") != RULE_FORMAT:
        raise ParseError("rule.format", f"expected {RULE_FORMAT!r}")
    name = _expect(doc, "name", str, "rule")
    lhs = _parse_graph_fragment(_expect(doc, "lhs", dict, "rule"), tg, "rule.lhs", None)
    rhs = _parse_graph_fragment(_expect(doc, "rhs", dict, "rule"), tg, "rule.rhs", None)
    preserve = _expect(doc, "preserve", dict, "rule")
    pobjects: dict[str, str] = {}
    for i, pair in enumerate(_expect(preserve, "objects", list, "rule.preserve")):
        locus = f"rule.preserve.objects[{i}]"
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ParseError(locus, "expected a [lhs, rhs] pair")
        pobjects[str(pair[0])] = str(pair[1])
    plinks: dict[str, str] = {}
    for i, pair in enumerate(_expect(preserve, "links", list, "rule.preserve")):
        locus = f"rule.preserve.links[{i}]"
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ParseError(locus, "expected a [lhs, rhs] pair")
        plinks[str(pair[0])] = str(pair[1])
    phi_text = _expect(doc, "phi", str, "rule")
    shared: dict[str, Variable] = dict(lhs.variables)
    for vid, var in rhs.variables.items():
        if shared.setdefault(vid, var) != var:
            raise ParseError("rule", f"variable {vid!r} has different sorts on the two sides")
    try:
        phi = TermParser(shared, _enum_sorts(tg).values()).parse(phi_text)
    except (SmtTextError, F.FormulaError) as exc:
        raise ParseError("rule.phi", str(exc)) from exc
    rule = SymbolicRule(name, lhs, rhs, pobjects, plinks, phi)
    problems = validate_rule(rule)
    if problems:
        raise ParseError("rule", "; ".join(str(p) for p in problems))
    return rule


def serialize_rule(r: SymbolicRule) -> str:
    doc = {
        "format": RULE_FORMAT,
        "name": r.name,
        "lhs": _graph_fragment_doc(r.lhs),
        "rhs": _graph_fragment_doc(r.rhs),
        "preserve": {
            "objects": [[a, b] for a, b in sorted(r.preserve_objects.items())],
            "links": [[a, b] for a, b in sorted(r.preserve_links.items())],
        },
        "phi": render_term(r.phi),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_assignment(text: str) -> dict[str, object]:
    doc = _load_json(text, "assignment")
    return dict(doc)


# --- conflict reports ---------------------------------------------------------

_REASON_CODES = {
    A.ConflictReason.NO_SECOND_MATCH: "NS",
    A.ConflictReason.NO_ISOMORPHIC_RESULT: "NI",
    A.ConflictReason.FORMULAS_NOT_EQUIVALENT: "NE",
    A.ConflictReason.SOLVER_UNKNOWN: "SU",
    A.ConflictReason.SOLVER_TIMEOUT: "ST",
}


def _overlap_doc(overlap) -> dict:
    return {
        "objects": [[a, b] for a, b in overlap.object_pairs],
        "links": [[a, b] for a, b in overlap.link_pairs],
    }


def _trace_doc(trace: A.ContextTrace) -> dict:
    doc: dict[str, Any] = {
        "index": trace.index,
        "overlap": _overlap_doc(trace.overlap),
        "verdict": trace.verdict.value,
        "m1_objects": trace.m1_objects,
        "m2_objects": trace.m2_objects,
    }
    if trace.reason is not None:
        doc["reason"] = trace.reason.value
    if trace.wf_violations:
        doc["wf_violations"] = trace.wf_violations
    if trace.cpa is not None:
        doc["cpa"] = {"kind": trace.cpa.kind.value, "reasons": trace.cpa.reasons}
    if trace.first_status:
        doc["first_applications"] = trace.first_status
    if trace.dangling:
        doc["dangling_links"] = trace.dangling
    if trace.second_m2 is not None:
        doc["second_m2"] = trace.second_m2
    if trace.second_m1 is not None:
        doc["second_m1"] = trace.second_m1
    if trace.iso_objects is not None:
        doc["iso_objects"] = trace.iso_objects
    if trace.equivalence is not None:
        eq = trace.equivalence
        eqdoc: dict[str, Any] = {
            "verdict": eq.verdict.value,
            "aux_first_order": list(eq.aux12),
            "aux_second_order": list(eq.aux21),
            "sigma": eq.sigma,
        }
        if eq.query is not None:
            eqdoc["query"] = render_term(eq.query)
        if eq.solver is not None:
            eqdoc["solver"] = {"result": eq.solver.result.value, "wall_ms": round(eq.solver.wall_ms, 3)}
        if eq.note:
            eqdoc["note"] = eq.note
        doc["equivalence"] = eqdoc
    if trace.notes:
        doc["notes"] = trace.notes
    return doc


def _solver_doc(config: SolverConfig) -> dict:
    return {
        "command": list(config.command) if config.command else "bundled z3 adapter",
        "timeout_ms": config.timeout_ms,
        "logic": config.logic,
        "enum_encoding": config.enum_encoding,
        "seed": config.seed,
    }


def _pair_reason_codes(verdict: A.PairVerdict) -> list[str]:
    codes = []
    for trace in verdict.traces:
        if trace.verdict is A.ContextVerdict.CONFLICT_HERE and trace.reason is not None:
            code = _REASON_CODES[trace.reason]
            if code not in codes:
                codes.append(code)
    return codes


def report_doc(
    matrix: A.RulesetMatrix,
    config: SolverConfig,
    cpa_only: bool = False,
    include_traces: bool = False,
) -> dict:
    pairs = []
    for (i, j) in sorted(matrix.entries):
        verdict = matrix.entries[(i, j)]
        stats = verdict.stats
        entry: dict[str, Any] = {
            "i": i,
            "j": j,
            "rules": [verdict.rule1, verdict.rule2],
            "verdict": verdict.verdict.value,
            "reason_codes": _pair_reason_codes(verdict),
            "stats": {
                "enumerated": stats.enumerated,
                "filtered_ill_formed": stats.filtered_ill_formed,
                "filtered_independent": stats.filtered_independent,
                "filtered_invalid_application": stats.filtered_invalid_application,
                "proven": stats.proven,
                "conflicts": stats.conflicts,
            },
        }
        if include_traces:
            entry["contexts"] = [_trace_doc(t) for t in verdict.traces]
        pairs.append(entry)
    return {
        "format": REPORT_FORMAT,
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "solver": _solver_doc(config),
        "mode": "cpa-only" if cpa_only else "full",
        "rules": matrix.rules,
        "pairs": pairs,
        "summary": {
            "non_conflicting": matrix.non_conflicting_count(),
            "conflicting": matrix.conflicting_count(),
        },
    }


def serialize_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def render_matrix(matrix: A.RulesetMatrix, cpa_only: bool = False) -> str:
    """Lower-triangular text table; ✓ non-conflicting, ✗ conflicting."""
    names = matrix.rules
    tags = [f"r{i + 1}" for i in range(len(names))]
    width = max([4] + [len(t) + 4 for t in tags])
    lines = []
    header = " " * width + "".join(t.ljust(width) for t in tags)
    lines.append(header.rstrip())
    for i in range(len(names)):
        row = tags[i].ljust(width)
        for j in range(i + 1):
            verdict = matrix.entries.get((i, j))
            if verdict is None:
                cell = "·"
            elif verdict.verdict is A.PairOutcome.NON_CONFLICTING:
                cell = "✓"
            else:
                codes = _pair_reason_codes(verdict)
                cell = "✗" if cpa_only or not codes else f"✗ {','.join(codes)}"
            row += cell.ljust(width)
        lines.append(row.rstrip())
    legend = ", ".join(f"{tags[i]}={names[i]}" for i in range(len(names)))
    lines.append(f"legend: {legend}")
    lines.append("✓ non-conflicting   ✗ conflicting   " +
                 "NS=no second match, NI=no isomorphic result, NE=formulas not equivalent, "
                 "SU=solver unknown, ST=solver timeout")
    return "\n".join(lines) + "\n"
