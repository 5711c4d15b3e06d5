"""Built-in models and edit rules used by the test suite, the docs and the
CLI examples: an electronic-lock product line, a small excerpt of it, and
three edit operations on feature attributes.
"""

from __future__ import annotations

from fractions import Fraction

from . import formula as F
from .efm import (
    EXCLUDE, FEATURE, FEATURES, GROUP, GROUPS, GROUP_TYPE, NAT_ATTR, NAT_ATTRS,
    REAL_ATTR, REAL_ATTRS, REQUIRES, efm_type_graph,
)
from .graph import SymbolicGraph
from .rules import SymbolicRule
from .sorts import BOOLEAN, NATURAL, REAL, Variable


def _bool(vid: str) -> Variable:
    return Variable(vid, BOOLEAN)


def _real(vid: str) -> Variable:
    return Variable(vid, REAL)


def _group(vid: str) -> Variable:
    return Variable(vid, GROUP_TYPE)


def _gt(lit: str) -> F.Const:
    return F.Const(lit, GROUP_TYPE)


def _r(x: int | str) -> F.Const:
    return F.Const(Fraction(x), REAL)


def lock_excerpt() -> SymbolicGraph:
    """Excerpt of the lock model: an optional mission-security feature whose
    mandatory child carries the minimum security level."""
    s_lock, s_msec, s_ameth, s_low = (_bool(f"s_{n}") for n in ("lock", "msec", "ameth", "low"))
    t_o, t_m = _group("t_o"), _group("t_m")
    v_low, v_ameth = _real("v_low"), _real("v_ameth")
    phi = F.conj(
        F.Eq(F.Var(t_o), _gt("OPT")),
        F.Eq(F.Var(t_m), _gt("MAN")),
        F.Implies(
            F.Var(s_low),
            F.And((F.Ge(F.Var(v_low), _r(20)), F.Ge(F.Var(v_ameth), F.Var(v_low)))),
        ),
    )
    return SymbolicGraph.build(
        efm_type_graph(),
        objects=[
            ("lock", FEATURE), ("mSec", FEATURE), ("ameth", FEATURE), ("low", FEATURE),
            ("o", GROUP), ("m", GROUP), ("loLev", REAL_ATTR), ("aLev", REAL_ATTR),
        ],
        links=[
            ("l1", GROUPS, "lock", "o"),
            ("l2", FEATURES, "o", "mSec"),
            ("l3", GROUPS, "mSec", "m"),
            ("l4", FEATURES, "m", "low"),
            ("l5", REAL_ATTRS, "low", "loLev"),
            ("l6", REAL_ATTRS, "ameth", "aLev"),
        ],
        slots={
            ("lock", "sel"): s_lock,
            ("mSec", "sel"): s_msec,
            ("ameth", "sel"): s_ameth,
            ("low", "sel"): s_low,
            ("o", "type"): t_o,
            ("m", "type"): t_m,
            ("loLev", "val"): v_low,
            ("aLev", "val"): v_ameth,
        },
        formula=phi,
    )


def lock_full() -> SymbolicGraph:
    """The whole lock product line: authentication devices with real-valued
    security levels, accumulated into the authentication method's level, and
    mission-security constraints over it.

    Device level values and the guard placement are a reconstruction; the
    keycard level of 10 and the minimum of 20 are load-bearing for the
    configuration examples.
    """
    features = [
        "lock", "authMeth", "token", "knowledge", "biometric", "keycard",
        "transponder", "pin", "password", "fingerprint", "iris", "mSec",
        "high", "low",
    ]
    groups = {
        "gAuth": ("lock", ["authMeth"]),
        "gDev": ("authMeth", ["token", "knowledge", "biometric"]),
        "gTok": ("token", ["keycard", "transponder"]),
        "gKnow": ("knowledge", ["pin", "password"]),
        "gBio": ("biometric", ["fingerprint", "iris"]),
        "gMsec": ("lock", ["mSec"]),
        "gSec": ("mSec", ["high", "low"]),
    }
    group_types = {
        "gAuth": "MAN", "gDev": "OR", "gTok": "ALT", "gKnow": "ALT",
        "gBio": "ALT", "gMsec": "OPT", "gSec": "ALT",
    }
    sel = {f: _bool(f"s_{f}") for f in features}
    gtype = {g: _group(f"t_{g}") for g in groups}
    v_amlev, v_toklev, v_knowlev, v_biolev, v_lowlev = (
        _real(n) for n in ("v_amlev", "v_toklev", "v_knowlev", "v_biolev", "v_lowlev")
    )
    n_minlen = Variable("n_minlen", NATURAL)

    objects = [(f, FEATURE) for f in features]
    objects += [(g, GROUP) for g in groups]
    objects += [
        ("amLev", REAL_ATTR), ("tokLev", REAL_ATTR), ("knowLev", REAL_ATTR),
        ("bioLev", REAL_ATTR), ("lowLev", REAL_ATTR), ("minLen", NAT_ATTR),
    ]
    links = []
    k = 0
    for g, (parent, kids) in groups.items():
        k += 1
        links.append((f"lg{k}", GROUPS, parent, g))
        for kid in kids:
            k += 1
            links.append((f"lf{k}", FEATURES, g, kid))
    links += [
        ("la1", REAL_ATTRS, "authMeth", "amLev"),
        ("la2", REAL_ATTRS, "token", "tokLev"),
        ("la3", REAL_ATTRS, "knowledge", "knowLev"),
        ("la4", REAL_ATTRS, "biometric", "bioLev"),
        ("la5", REAL_ATTRS, "low", "lowLev"),
        ("la6", NAT_ATTRS, "knowledge", "minLen"),
        ("lr1", REQUIRES, "high", "biometric"),
    ]
    slots: dict[tuple[str, str], Variable] = {}
    for f in features:
        slots[(f, "sel")] = sel[f]
    for g in groups:
        slots[(g, "type")] = gtype[g]
    slots[("amLev", "val")] = v_amlev
    slots[("tokLev", "val")] = v_toklev
    slots[("knowLev", "val")] = v_knowlev
    slots[("bioLev", "val")] = v_biolev
    slots[("lowLev", "val")] = v_lowlev
    slots[("minLen", "val")] = n_minlen

    def level(feature: str, var: Variable, one: str, low_value: int, high_value: int) -> F.Formula:
        # Deselected devices contribute a default of zero.
        return F.Eq(
            F.Var(var),
            F.Ite(
                F.Var(sel[feature]),
                F.Ite(F.Var(sel[one]), _r(low_value), _r(high_value)),
                _r(0),
            ),
        )

    phi = F.conj(
        *[F.Eq(F.Var(gtype[g]), _gt(group_types[g])) for g in groups],
        level("token", v_toklev, "keycard", 10, 20),
        level("knowledge", v_knowlev, "pin", 15, 25),
        level("biometric", v_biolev, "fingerprint", 30, 40),
        F.Eq(F.Var(v_amlev), F.Add((F.Var(v_toklev), F.Var(v_knowlev), F.Var(v_biolev)))),
        F.Implies(
            F.Var(sel["low"]),
            F.And((F.Ge(F.Var(v_lowlev), _r(20)), F.Ge(F.Var(v_amlev), F.Var(v_lowlev)))),
        ),
        F.Implies(
            F.Var(sel["high"]),
            F.And((
                F.Ge(F.Var(v_lowlev), _r(20)),
                F.Ge(F.Var(v_amlev), F.Mul((_r(3), F.Var(v_lowlev)))),
            )),
        ),
    )
    return SymbolicGraph.build(efm_type_graph(), objects, links, slots, formula=phi)


def keycard_only_selection(msec_selected: bool) -> dict[str, object]:
    """Total assignment: a lock with a single keycard device; mission
    security optionally selected (with the low regulation picked)."""
    values: dict[str, object] = {}
    selected = {"lock", "authMeth", "token", "keycard"}
    if msec_selected:
        selected |= {"mSec", "low"}
    for f in (
        "lock", "authMeth", "token", "knowledge", "biometric", "keycard",
        "transponder", "pin", "password", "fingerprint", "iris", "mSec",
        "high", "low",
    ):
        values[f"s_{f}"] = f in selected
    values.update({
        "t_gAuth": "MAN", "t_gDev": "OR", "t_gTok": "ALT", "t_gKnow": "ALT",
        "t_gBio": "ALT", "t_gMsec": "OPT", "t_gSec": "ALT",
    })
    values.update({
        "v_toklev": 10, "v_knowlev": 0, "v_biolev": 0, "v_amlev": 10,
        "v_lowlev": 20 if msec_selected else 0,
        "n_minlen": 0,
    })
    return values


def rule_hoist_attribute() -> SymbolicRule:
    """Delete a mandatory child feature and its real attribute, adding a
    replacement attribute on the parent that carries the same value while
    the parent is selected."""
    s1, s2 = _bool("s1"), _bool("s2")
    t_man = _group("t_man")
    v2, v_new = _real("v2"), _real("v_new")
    lhs = SymbolicGraph.build(
        efm_type_graph(),
        objects=[("f1", FEATURE), ("man", GROUP), ("f2", FEATURE), ("a2", REAL_ATTR)],
        links=[
            ("lg", GROUPS, "f1", "man"),
            ("lf", FEATURES, "man", "f2"),
            ("la", REAL_ATTRS, "f2", "a2"),
        ],
        slots={("f1", "sel"): s1, ("man", "type"): t_man, ("f2", "sel"): s2, ("a2", "val"): v2},
    )
    rhs = SymbolicGraph.build(
        efm_type_graph(),
        objects=[("f1", FEATURE), ("a_new", REAL_ATTR)],
        links=[("ln", REAL_ATTRS, "f1", "a_new")],
        slots={("f1", "sel"): s1, ("a_new", "val"): v_new},
    )
    phi = F.conj(
        F.Eq(F.Var(t_man), _gt("MAN")),
        F.Implies(F.Var(s1), F.Eq(F.Var(v_new), F.Var(v2))),
    )
    return SymbolicRule("hoist-attribute", lhs, rhs, {"f1": "f1"}, {}, phi)


def _reassign_rule(name: str, phi_of) -> SymbolicRule:
    s_x, v_x, v_x2 = _bool("s_x"), _real("v_x"), _real("v_x2")
    lhs = SymbolicGraph.build(
        efm_type_graph(),
        objects=[("fx", FEATURE), ("ax", REAL_ATTR)],
        links=[("lx", REAL_ATTRS, "fx", "ax")],
        slots={("fx", "sel"): s_x, ("ax", "val"): v_x},
    )
    rhs = SymbolicGraph.build(
        efm_type_graph(),
        objects=[("fx", FEATURE), ("ax", REAL_ATTR)],
        links=[("lx", REAL_ATTRS, "fx", "ax")],
        slots={("fx", "sel"): s_x, ("ax", "val"): v_x2},
    )
    return SymbolicRule(name, lhs, rhs, {"fx": "fx", "ax": "ax"}, {"lx": "lx"}, phi_of(v_x, v_x2))


def rule_raise_by_10() -> SymbolicRule:
    """Reassign a real feature attribute to its old value plus ten."""
    return _reassign_rule(
        "raise-by-10", lambda v, v2: F.Eq(F.Var(v2), F.Add((F.Var(v), _r(10))))
    )


def rule_scale_by_10() -> SymbolicRule:
    """Reassign a real feature attribute to ten times its old value."""
    return _reassign_rule(
        "scale-by-10", lambda v, v2: F.Eq(F.Var(v2), F.Mul((_r(10), F.Var(v))))
    )


def edit_rules() -> list[SymbolicRule]:
    return [rule_hoist_attribute(), rule_raise_by_10(), rule_scale_by_10()]


def single_feature_pattern(feature_id: str = "f", var_id: str = "s") -> SymbolicGraph:
    return SymbolicGraph.build(
        efm_type_graph(),
        objects=[(feature_id, FEATURE)],
        slots={(feature_id, "sel"): _bool(var_id)},
    )


def identity_rule(name: str = "identity") -> SymbolicRule:
    """Matches one feature and changes nothing."""
    pattern = single_feature_pattern()
    return SymbolicRule(name, pattern, pattern, {"f": "f"}, {}, F.TRUE)


def add_nat_attribute_rule(name: str = "add-counter") -> SymbolicRule:
    """Adds a fresh natural attribute to a feature; deletes and reassigns nothing."""
    s = _bool("s")
    n_new = Variable("n_new", NATURAL)
    lhs = single_feature_pattern()
    rhs = SymbolicGraph.build(
        efm_type_graph(),
        objects=[("f", FEATURE), ("a_new", NAT_ATTR)],
        links=[("ln", NAT_ATTRS, "f", "a_new")],
        slots={("f", "sel"): s, ("a_new", "val"): n_new},
    )
    return SymbolicRule(name, lhs, rhs, {"f": "f"}, {}, F.TRUE)
