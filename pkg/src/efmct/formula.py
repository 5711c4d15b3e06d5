"""Sorted first-order formulas over typed variables.

The AST covers boolean connectives, equality and numeric comparisons,
linear/nonlinear arithmetic, if-then-else and quantifiers.  Values are
immutable; all operations return fresh formulas.  Equality on booleans acts
as bi-implication, so there is no separate iff node.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .sorts import BOOLEAN, NATURAL, REAL, Sort, SortKind, Variable


class FormulaError(Exception):
    pass


class SortError(FormulaError):
    pass


class CannotEvaluate(FormulaError):
    """Raised when constant folding hits a quantifier or an unassigned variable."""


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Formula):
    value: object
    sort: Sort

    def __post_init__(self) -> None:
        kind = self.sort.kind
        if kind is SortKind.BOOLEAN and not isinstance(self.value, bool):
            raise SortError(f"boolean constant expected, got {self.value!r}")
        if kind is SortKind.NATURAL and not (isinstance(self.value, int) and not isinstance(self.value, bool)):
            raise SortError(f"integer constant expected, got {self.value!r}")
        if kind is SortKind.REAL and not isinstance(self.value, Fraction):
            raise SortError(f"Fraction constant expected, got {self.value!r}")
        if kind is SortKind.ENUMERATION and self.value not in self.sort.enum_values:
            raise SortError(f"{self.value!r} is not a literal of {self.sort.name}")


@dataclass(frozen=True)
class Var(Formula):
    var: Variable


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Ne(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Lt(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Le(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Gt(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Ge(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Add(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Mul(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Sub(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Neg(Formula):
    arg: Formula


@dataclass(frozen=True)
class Div(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Ite(Formula):
    cond: Formula
    then: Formula
    orelse: Formula


@dataclass(frozen=True)
class Exists(Formula):
    bound: tuple[Variable, ...]
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    bound: tuple[Variable, ...]
    body: Formula


TRUE = Const(True, BOOLEAN)
FALSE = Const(False, BOOLEAN)


def nat(value: int) -> Const:
    return Const(value, NATURAL)


def real(value: int | float | str | Fraction) -> Const:
    return Const(Fraction(value), REAL)


def conj(*parts: Formula) -> Formula:
    """Conjunction that drops true conjuncts and flattens nothing else."""
    kept = [p for p in parts if p != TRUE]
    if not kept:
        return TRUE
    if len(kept) == 1:
        return kept[0]
    return And(tuple(kept))


def disj(*parts: Formula) -> Formula:
    kept = [p for p in parts if p != FALSE]
    if not kept:
        return FALSE
    if len(kept) == 1:
        return kept[0]
    return Or(tuple(kept))


def at_least_one(parts: Iterable[Formula]) -> Formula:
    return disj(*parts)


def exactly_one(parts: Iterable[Formula]) -> Formula:
    items = list(parts)
    if not items:
        return FALSE
    clauses: list[Formula] = [disj(*items)]
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            clauses.append(Not(And((items[i], items[j]))))
    return conj(*clauses)


def conjuncts(f: Formula) -> list[Formula]:
    """Top-level conjuncts, flattening nested conjunctions."""
    if isinstance(f, And):
        out: list[Formula] = []
        for a in f.args:
            out.extend(conjuncts(a))
        return out
    return [f]


def _children(f: Formula) -> Iterator[Formula]:
    if isinstance(f, (Not, Neg)):
        yield f.arg
    elif isinstance(f, (And, Or, Add, Mul)):
        yield from f.args
    elif isinstance(f, (Implies, Eq, Ne, Lt, Le, Gt, Ge, Sub, Div)):
        yield f.lhs
        yield f.rhs
    elif isinstance(f, Ite):
        yield f.cond
        yield f.then
        yield f.orelse
    elif isinstance(f, (Exists, Forall)):
        yield f.body


def free_vars(f: Formula) -> frozenset[Variable]:
    if isinstance(f, Var):
        return frozenset((f.var,))
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - frozenset(f.bound)
    out: frozenset[Variable] = frozenset()
    for child in _children(f):
        out |= free_vars(child)
    return out


def all_enum_sorts(f: Formula) -> frozenset[Sort]:
    out: set[Sort] = set()

    def walk(g: Formula) -> None:
        if isinstance(g, Const) and g.sort.kind is SortKind.ENUMERATION:
            out.add(g.sort)
        elif isinstance(g, Var) and g.var.sort.kind is SortKind.ENUMERATION:
            out.add(g.var.sort)
        elif isinstance(g, (Exists, Forall)):
            for b in g.bound:
                if b.sort.kind is SortKind.ENUMERATION:
                    out.add(b.sort)
        for child in _children(g):
            walk(child)

    walk(f)
    return frozenset(out)


class Substitution:
    """A finite, sort-preserving map between variables.

    Application to a formula replaces free occurrences only; bound variables
    are renamed when they would capture a substituted variable.
    """

    def __init__(self, mapping: Mapping[Variable, Variable]):
        for src, dst in mapping.items():
            if src.sort != dst.sort:
                raise SortError(f"substitution {src!r} -> {dst!r} does not preserve sorts")
        self._map = dict(mapping)

    @property
    def mapping(self) -> dict[Variable, Variable]:
        return dict(self._map)

    def get(self, v: Variable) -> Variable:
        return self._map.get(v, v)

    def __contains__(self, v: Variable) -> bool:
        return v in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __repr__(self) -> str:
        inner = ", ".join(f"{s.id}->{t.id}" for s, t in sorted(self._map.items()))
        return f"Substitution({inner})"

    def __call__(self, f: Formula) -> Formula:
        return substitute(f, self)

    def compose(self, first: "Substitution") -> "Substitution":
        """self after first: (self.compose(first))(f) == self(first(f)) on disjoint-domain chains."""
        combined = {src: self.get(dst) for src, dst in first._map.items()}
        for src, dst in self._map.items():
            combined.setdefault(src, dst)
        return Substitution(combined)


def _fresh_variable(base: Variable, taken: set[str]) -> Variable:
    k = 1
    while True:
        candidate = f"{base.id}!{k}"
        if candidate not in taken:
            return Variable(candidate, base.sort)
        k += 1


def substitute(f: Formula, subst: Substitution | Mapping[Variable, Variable]) -> Formula:
    if not isinstance(subst, Substitution):
        subst = Substitution(subst)
    return _substitute(f, subst._map)


def _substitute(f: Formula, mapping: dict[Variable, Variable]) -> Formula:
    if isinstance(f, Const):
        return f
    if isinstance(f, Var):
        return Var(mapping.get(f.var, f.var))
    if isinstance(f, (Exists, Forall)):
        body_free = free_vars(f.body)
        live = {src: dst for src, dst in mapping.items() if src not in f.bound and src in body_free}
        targets = {dst.id for dst in live.values()}
        bound = list(f.bound)
        body = f.body
        # Rename any binder that would capture a substituted target.
        for i, b in enumerate(bound):
            if b.id in targets:
                taken = targets | {v.id for v in free_vars(body)} | {v.id for v in bound}
                fresh = _fresh_variable(b, taken)
                body = _substitute(body, {b: fresh})
                bound[i] = fresh
        new_body = _substitute(body, live)
        return type(f)(tuple(bound), new_body)
    if isinstance(f, Not):
        return Not(_substitute(f.arg, mapping))
    if isinstance(f, Neg):
        return Neg(_substitute(f.arg, mapping))
    if isinstance(f, (And, Or, Add, Mul)):
        return type(f)(tuple(_substitute(a, mapping) for a in f.args))
    if isinstance(f, (Implies, Eq, Ne, Lt, Le, Gt, Ge, Sub, Div)):
        return type(f)(_substitute(f.lhs, mapping), _substitute(f.rhs, mapping))
    if isinstance(f, Ite):
        return Ite(
            _substitute(f.cond, mapping),
            _substitute(f.then, mapping),
            _substitute(f.orelse, mapping),
        )
    raise FormulaError(f"unknown formula node {type(f).__name__}")


def instantiate(f: Formula, env: Mapping[Variable, Const]) -> Formula:
    """Replace free variable occurrences by constant nodes."""
    for src, c in env.items():
        if src.sort != c.sort:
            raise SortError(f"constant for {src!r} has sort {c.sort.name}")
    return _instantiate(f, dict(env))


def _instantiate(f: Formula, env: dict[Variable, Const]) -> Formula:
    if isinstance(f, Const):
        return f
    if isinstance(f, Var):
        return env.get(f.var, f)
    if isinstance(f, (Exists, Forall)):
        live = {v: c for v, c in env.items() if v not in f.bound}
        return type(f)(f.bound, _instantiate(f.body, live))
    if isinstance(f, Not):
        return Not(_instantiate(f.arg, env))
    if isinstance(f, Neg):
        return Neg(_instantiate(f.arg, env))
    if isinstance(f, (And, Or, Add, Mul)):
        return type(f)(tuple(_instantiate(a, env) for a in f.args))
    if isinstance(f, (Implies, Eq, Ne, Lt, Le, Gt, Ge, Sub, Div)):
        return type(f)(_instantiate(f.lhs, env), _instantiate(f.rhs, env))
    if isinstance(f, Ite):
        return Ite(_instantiate(f.cond, env), _instantiate(f.then, env), _instantiate(f.orelse, env))
    raise FormulaError(f"unknown formula node {type(f).__name__}")


_NUMERIC = (SortKind.REAL, SortKind.NATURAL)


def infer_sort(f: Formula) -> Sort:
    """Sort of a term, checking well-sortedness of the whole subtree."""
    if isinstance(f, Const):
        return f.sort
    if isinstance(f, Var):
        return f.var.sort
    if isinstance(f, Not):
        _expect(f.arg, BOOLEAN, "negation")
        return BOOLEAN
    if isinstance(f, (And, Or)):
        for a in f.args:
            _expect(a, BOOLEAN, "connective")
        return BOOLEAN
    if isinstance(f, Implies):
        _expect(f.lhs, BOOLEAN, "implication")
        _expect(f.rhs, BOOLEAN, "implication")
        return BOOLEAN
    if isinstance(f, (Eq, Ne)):
        ls, rs = infer_sort(f.lhs), infer_sort(f.rhs)
        if ls != rs:
            raise SortError(f"equality between {ls.name} and {rs.name}")
        return BOOLEAN
    if isinstance(f, (Lt, Le, Gt, Ge)):
        ls, rs = infer_sort(f.lhs), infer_sort(f.rhs)
        if ls.kind not in _NUMERIC or ls != rs:
            raise SortError(f"comparison between {ls.name} and {rs.name}")
        return BOOLEAN
    if isinstance(f, (Add, Mul)):
        if not f.args:
            raise SortError("empty arithmetic term")
        sorts = [infer_sort(a) for a in f.args]
        if any(s.kind not in _NUMERIC or s != sorts[0] for s in sorts):
            raise SortError("arithmetic over mixed or non-numeric sorts")
        return sorts[0]
    if isinstance(f, (Sub,)):
        ls, rs = infer_sort(f.lhs), infer_sort(f.rhs)
        if ls.kind not in _NUMERIC or ls != rs:
            raise SortError("subtraction over mixed or non-numeric sorts")
        return ls
    if isinstance(f, Neg):
        s = infer_sort(f.arg)
        if s.kind not in _NUMERIC:
            raise SortError("negation of a non-numeric term")
        return s
    if isinstance(f, Div):
        ls, rs = infer_sort(f.lhs), infer_sort(f.rhs)
        if ls != REAL or rs != REAL:
            raise SortError("division is only defined on reals")
        return REAL
    if isinstance(f, Ite):
        _expect(f.cond, BOOLEAN, "if-then-else condition")
        ts, es = infer_sort(f.then), infer_sort(f.orelse)
        if ts != es:
            raise SortError(f"if-then-else branches have sorts {ts.name} and {es.name}")
        return ts
    if isinstance(f, (Exists, Forall)):
        if not f.bound:
            raise SortError("quantifier without bound variables")
        _expect(f.body, BOOLEAN, "quantifier body")
        return BOOLEAN
    raise FormulaError(f"unknown formula node {type(f).__name__}")


def _expect(f: Formula, sort: Sort, where: str) -> None:
    got = infer_sort(f)
    if got != sort:
        raise SortError(f"{where} expects {sort.name}, got {got.name}")


def check_boolean(f: Formula) -> None:
    _expect(f, BOOLEAN, "formula")


def evaluate(f: Formula, env: Mapping[Variable, object]) -> object:
    """Constant-fold a formula under a variable assignment.

    Raises CannotEvaluate on quantifiers and on unassigned variables; callers
    needing those fall back to a solver.
    """
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Var):
        if f.var not in env:
            raise CannotEvaluate(f"variable {f.var.id} is unassigned")
        return env[f.var]
    if isinstance(f, (Exists, Forall)):
        raise CannotEvaluate("cannot fold a quantifier over an infinite domain")
    if isinstance(f, Not):
        return not evaluate(f.arg, env)
    if isinstance(f, And):
        return all(evaluate(a, env) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, env) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.lhs, env)) or bool(evaluate(f.rhs, env))
    if isinstance(f, Eq):
        return evaluate(f.lhs, env) == evaluate(f.rhs, env)
    if isinstance(f, Ne):
        return evaluate(f.lhs, env) != evaluate(f.rhs, env)
    if isinstance(f, Lt):
        return evaluate(f.lhs, env) < evaluate(f.rhs, env)
    if isinstance(f, Le):
        return evaluate(f.lhs, env) <= evaluate(f.rhs, env)
    if isinstance(f, Gt):
        return evaluate(f.lhs, env) > evaluate(f.rhs, env)
    if isinstance(f, Ge):
        return evaluate(f.lhs, env) >= evaluate(f.rhs, env)
    if isinstance(f, Add):
        total = evaluate(f.args[0], env)
        for a in f.args[1:]:
            total = total + evaluate(a, env)
        return total
    if isinstance(f, Mul):
        total = evaluate(f.args[0], env)
        for a in f.args[1:]:
            total = total * evaluate(a, env)
        return total
    if isinstance(f, Sub):
        return evaluate(f.lhs, env) - evaluate(f.rhs, env)
    if isinstance(f, Neg):
        return -evaluate(f.arg, env)
    if isinstance(f, Div):
        return Fraction(evaluate(f.lhs, env)) / Fraction(evaluate(f.rhs, env))
    if isinstance(f, Ite):
        return evaluate(f.then, env) if evaluate(f.cond, env) else evaluate(f.orelse, env)
    raise FormulaError(f"unknown formula node {type(f).__name__}")
