"""SMT-LIB2 term rendering and parsing.

One grammar serves both the document formats and the solver scripts, so a
formula stored in a file is passed to the solver byte-for-byte unchanged.
Naturals are emitted as integers; their non-negativity is asserted per
declared constant and guarded under binders.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from . import formula as F
from .formula import Formula
from .sorts import BOOLEAN, NATURAL, REAL, Sort, SortKind, Variable


class SmtTextError(Exception):
    pass


_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_+=<>.?/-][A-Za-z0-9~!@$%^&*_+=<>.?/-]*$")
_RESERVED = {
    "and", "or", "not", "=>", "=", "distinct", "ite", "exists", "forall", "let",
    "true", "false", "as", "par", "match", "_", "!",
}


def symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name) and name not in _RESERVED:
        return name
    if "|" in name or "\\" in name:
        raise SmtTextError(f"symbol {name!r} cannot be quoted in SMT-LIB")
    return f"|{name}|"


def _sort_text(sort: Sort, enum_encoding: str, for_solver: bool) -> str:
    if sort.kind is SortKind.BOOLEAN:
        return "Bool"
    if sort.kind is SortKind.REAL:
        return "Real"
    if sort.kind is SortKind.NATURAL:
        return "Int" if for_solver else "Nat"
    if for_solver and enum_encoding == "integer":
        return "Int"
    return symbol(sort.enum_name)


def _real_text(value: Fraction) -> str:
    if value < 0:
        return f"(- {_real_text(-value)})"
    if value.denominator == 1:
        return f"{value.numerator}.0"
    return f"(/ {value.numerator}.0 {value.denominator}.0)"


def _int_text(value: int) -> str:
    return f"(- {-value})" if value < 0 else str(value)


def render_term(f: Formula, enum_encoding: str = "datatype", for_solver: bool = False) -> str:
    """Deterministic SMT-LIB2 rendering of a formula or term.

    With for_solver=True, Nat binders are lowered to Int with non-negativity
    guards and enum literals follow the configured encoding; the plain mode
    keeps the document's own sort names so parse/render is idempotent.
    """
    rec = lambda g: render_term(g, enum_encoding, for_solver)  # noqa: E731
    if isinstance(f, F.Const):
        if f.sort.kind is SortKind.BOOLEAN:
            return "true" if f.value else "false"
        if f.sort.kind is SortKind.NATURAL:
            return _int_text(f.value)  # type: ignore[arg-type]
        if f.sort.kind is SortKind.REAL:
            return _real_text(f.value)  # type: ignore[arg-type]
        if for_solver and enum_encoding == "integer":
            return str(f.sort.enum_values.index(f.value))  # type: ignore[arg-type]
        return symbol(str(f.value))
    if isinstance(f, F.Var):
        return symbol(f.var.id)
    if isinstance(f, F.Not):
        return f"(not {rec(f.arg)})"
    if isinstance(f, F.And):
        return "(and " + " ".join(rec(a) for a in f.args) + ")"
    if isinstance(f, F.Or):
        return "(or " + " ".join(rec(a) for a in f.args) + ")"
    if isinstance(f, F.Implies):
        return f"(=> {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Eq):
        return f"(= {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Ne):
        return f"(distinct {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Lt):
        return f"(< {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Le):
        return f"(<= {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Gt):
        return f"(> {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Ge):
        return f"(>= {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Add):
        return "(+ " + " ".join(rec(a) for a in f.args) + ")"
    if isinstance(f, F.Mul):
        return "(* " + " ".join(rec(a) for a in f.args) + ")"
    if isinstance(f, F.Sub):
        return f"(- {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Neg):
        return f"(- {rec(f.arg)})"
    if isinstance(f, F.Div):
        return f"(/ {rec(f.lhs)} {rec(f.rhs)})"
    if isinstance(f, F.Ite):
        return f"(ite {rec(f.cond)} {rec(f.then)} {rec(f.orelse)})"
    if isinstance(f, (F.Exists, F.Forall)):
        word = "exists" if isinstance(f, F.Exists) else "forall"
        binders = " ".join(
            f"({symbol(v.id)} {_sort_text(v.sort, enum_encoding, for_solver)})" for v in f.bound
        )
        body = rec(f.body)
        if for_solver:
            guards = [f"(>= {symbol(v.id)} 0)" for v in f.bound if v.sort == NATURAL]
            if guards:
                guard = guards[0] if len(guards) == 1 else "(and " + " ".join(guards) + ")"
                body = f"(and {guard} {body})" if word == "exists" else f"(=> {guard} {body})"
        return f"({word} ({binders}) {body})"
    raise SmtTextError(f"cannot render {type(f).__name__}")


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(r"""\(|\)|\|[^|]*\||[^\s()|]+""")


def _tokenize(text: str) -> list[str]:
    tokens = []
    pos = 0
    for m in _TOKEN.finditer(text):
        between = text[pos:m.start()]
        if between.strip():
            raise SmtTextError(f"stray characters {between.strip()!r}")
        tokens.append(m.group(0))
        pos = m.end()
    if text[pos:].strip():
        raise SmtTextError(f"stray characters {text[pos:].strip()!r}")
    return tokens


def _read_sexpr(tokens: list[str], idx: int) -> tuple[object, int]:
    if idx >= len(tokens):
        raise SmtTextError("unexpected end of input")
    tok = tokens[idx]
    if tok == "(":
        items = []
        idx += 1
        while idx < len(tokens) and tokens[idx] != ")":
            item, idx = _read_sexpr(tokens, idx)
            items.append(item)
        if idx >= len(tokens):
            raise SmtTextError("unbalanced parenthesis")
        return items, idx + 1
    if tok == ")":
        raise SmtTextError("unexpected ')'")
    return tok, idx + 1


_INT_LIT = re.compile(r"^-?\d+$")
_DEC_LIT = re.compile(r"^-?\d+\.\d+$")


class TermParser:
    """Parses one SMT-LIB2 term against a set of declared variables."""

    def __init__(self, variables: Mapping[str, Variable], enum_sorts: Iterable[Sort] = ()):
        self.variables = dict(variables)
        self.literals: dict[str, Sort] = {}
        for sort in enum_sorts:
            for lit in sort.enum_values:
                if lit in self.literals and self.literals[lit] != sort:
                    raise SmtTextError(f"enumeration literal {lit!r} is ambiguous")
                self.literals[lit] = sort

    def parse(self, text: str) -> Formula:
        tokens = _tokenize(text)
        if not tokens:
            raise SmtTextError("empty term")
        sexpr, idx = _read_sexpr(tokens, 0)
        if idx != len(tokens):
            raise SmtTextError("trailing input after term")
        term = self._term(sexpr, {})
        F.infer_sort(term)
        return term

    def _atom(self, tok: str, bound: dict[str, Variable]) -> Formula:
        name = tok[1:-1] if tok.startswith("|") else tok
        if tok == "true":
            return F.TRUE
        if tok == "false":
            return F.FALSE
        if _INT_LIT.match(tok):
            return F.Const(int(tok), NATURAL)
        if _DEC_LIT.match(tok):
            return F.Const(Fraction(tok), REAL)
        if name in bound:
            return F.Var(bound[name])
        if name in self.variables:
            return F.Var(self.variables[name])
        if name in self.literals:
            return F.Const(name, self.literals[name])
        raise SmtTextError(f"unknown symbol {name!r}")

    def _sort(self, sexpr: object) -> Sort:
        if sexpr == "Bool":
            return BOOLEAN
        if sexpr == "Real":
            return REAL
        if sexpr in ("Int", "Nat"):
            return NATURAL
        if isinstance(sexpr, str):
            for sort in set(self.literals.values()):
                if sort.enum_name == sexpr:
                    return sort
        raise SmtTextError(f"unknown sort {sexpr!r}")

    def _term(self, sexpr: object, bound: dict[str, Variable]) -> Formula:
        if isinstance(sexpr, str):
            return self._atom(sexpr, bound)
        if not isinstance(sexpr, list) or not sexpr:
            raise SmtTextError("empty application")
        head = sexpr[0]
        args = sexpr[1:]
        if head in ("exists", "forall"):
            if len(args) != 2 or not isinstance(args[0], list):
                raise SmtTextError(f"malformed {head}")
            binders: list[Variable] = []
            inner = dict(bound)
            for b in args[0]:
                if not (isinstance(b, list) and len(b) == 2 and isinstance(b[0], str)):
                    raise SmtTextError(f"malformed binder in {head}")
                bname = b[0][1:-1] if b[0].startswith("|") else b[0]
                var = Variable(bname, self._sort(b[1]))
                binders.append(var)
                inner[bname] = var
            body = self._term(args[1], inner)
            node = F.Exists if head == "exists" else F.Forall
            return node(tuple(binders), body)
        if not isinstance(head, str):
            raise SmtTextError("higher-order application is not supported")
        sub = [self._term(a, bound) for a in args]
        return self._apply(head, sub)

    def _apply(self, op: str, args: list[Formula]) -> Formula:
        def arity(n: int) -> None:
            if len(args) != n:
                raise SmtTextError(f"operator {op!r} expects {n} arguments, got {len(args)}")

        if op == "not":
            arity(1)
            return F.Not(args[0])
        if op == "and":
            if not args:
                raise SmtTextError("empty 'and'")
            return F.And(tuple(args))
        if op == "or":
            if not args:
                raise SmtTextError("empty 'or'")
            return F.Or(tuple(args))
        if op == "=>":
            arity(2)
            return F.Implies(args[0], args[1])
        if op == "=":
            arity(2)
            return F.Eq(args[0], args[1])
        if op == "distinct":
            arity(2)
            return F.Ne(args[0], args[1])
        if op == "<":
            arity(2)
            return F.Lt(args[0], args[1])
        if op == "<=":
            arity(2)
            return F.Le(args[0], args[1])
        if op == ">":
            arity(2)
            return F.Gt(args[0], args[1])
        if op == ">=":
            arity(2)
            return F.Ge(args[0], args[1])
        if op == "+":
            if len(args) < 2:
                raise SmtTextError("'+' expects at least two arguments")
            return F.Add(tuple(args))
        if op == "*":
            if len(args) < 2:
                raise SmtTextError("'*' expects at least two arguments")
            return F.Mul(tuple(args))
        if op == "-":
            if len(args) == 1:
                arg = args[0]
                # Fold negated numerals into constants.
                if isinstance(arg, F.Const) and arg.sort in (NATURAL, REAL):
                    value = -arg.value  # type: ignore[operator]
                    return F.Const(value, arg.sort)
                return F.Neg(arg)
            arity(2)
            return F.Sub(args[0], args[1])
        if op == "/":
            arity(2)
            lhs, rhs = args
            if (
                isinstance(lhs, F.Const)
                and isinstance(rhs, F.Const)
                and lhs.sort in (NATURAL, REAL)
                and rhs.sort in (NATURAL, REAL)
            ):
                return F.Const(Fraction(Fraction(lhs.value), Fraction(rhs.value)), REAL)  # type: ignore[arg-type]
            return F.Div(lhs, rhs)
        if op == "ite":
            arity(3)
            return F.Ite(args[0], args[1], args[2])
        raise SmtTextError(f"unknown operator {op!r}")


def parse_term(
    text: str,
    variables: Mapping[str, Variable],
    enum_sorts: Iterable[Sort] = (),
) -> Formula:
    return TermParser(variables, enum_sorts).parse(text)
