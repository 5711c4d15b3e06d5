import random
from fractions import Fraction

import pytest

from efmct import formula as F
from efmct.formula import Substitution, free_vars, substitute
from efmct.sorts import BOOLEAN, NATURAL, REAL, Variable

v1 = Variable("v1", REAL)
v2 = Variable("v2", REAL)
x = Variable("x", REAL)
b = Variable("b", BOOLEAN)
n = Variable("n", NATURAL)


def test_substitute_simple():
    f = F.Eq(F.Var(v1), F.Add((F.Var(v2), F.real(10))))
    out = substitute(f, {v1: x})
    assert out == F.Eq(F.Var(x), F.Add((F.Var(v2), F.real(10))))


def test_substitute_identity_is_structural_noop():
    f = F.Implies(F.Var(b), F.Lt(F.Var(v1), F.Var(v2)))
    assert substitute(f, {}) == f
    assert substitute(f, {v1: v1}) == f


def test_substitute_replaces_free_occurrences_only():
    inner = F.Eq(F.Var(v1), F.Var(v2))
    f = F.Exists((v1,), inner)
    out = substitute(f, {v1: x, v2: x})
    assert out == F.Exists((v1,), F.Eq(F.Var(v1), F.Var(x)))


def test_substitute_avoids_capture():
    f = F.Exists((x,), F.Eq(F.Var(x), F.Var(v2)))
    out = substitute(f, {v2: x})
    assert isinstance(out, F.Exists)
    renamed = out.bound[0]
    assert renamed.id != "x"
    assert out.body == F.Eq(F.Var(renamed), F.Var(x))


def test_substitution_requires_sort_preservation():
    with pytest.raises(F.SortError):
        Substitution({v1: b})


def test_free_vars_excludes_bound():
    f = F.Exists((v1,), F.Eq(F.Var(v1), F.Var(v2)))
    assert free_vars(f) == frozenset((v2,))
    assert free_vars(F.TRUE) == frozenset()


def test_free_vars_nested():
    f = F.And((F.Var(b), F.Forall((v1,), F.Or((F.Lt(F.Var(v1), F.Var(v2)), F.Var(b))))))
    assert free_vars(f) == frozenset((b, v2))


def _random_formula(rng: random.Random, pool: list[Variable], depth: int = 3) -> F.Formula:
    if depth == 0 or rng.random() < 0.3:
        choice = rng.random()
        if choice < 0.5:
            a, c = rng.choice(pool), rng.choice(pool)
            return F.Le(F.Var(a), F.Var(c))
        return F.Eq(F.Var(rng.choice(pool)), F.real(rng.randint(0, 5)))
    kind = rng.randint(0, 3)
    if kind == 0:
        return F.Not(_random_formula(rng, pool, depth - 1))
    if kind == 1:
        return F.And((_random_formula(rng, pool, depth - 1), _random_formula(rng, pool, depth - 1)))
    if kind == 2:
        return F.Implies(_random_formula(rng, pool, depth - 1), _random_formula(rng, pool, depth - 1))
    bound = rng.choice(pool)
    return F.Exists((bound,), _random_formula(rng, pool, depth - 1))


def test_substitute_composes_on_disjoint_domains():
    rng = random.Random(7)
    pool = [Variable(f"p{i}", REAL) for i in range(4)]
    targets1 = [Variable(f"q{i}", REAL) for i in range(4)]
    targets2 = [Variable(f"r{i}", REAL) for i in range(4)]
    for _ in range(150):
        f = _random_formula(rng, pool)
        s1 = Substitution({pool[0]: targets1[0], pool[1]: targets1[1]})
        s2 = Substitution({targets1[0]: targets2[0], pool[2]: targets2[2]})
        assert substitute(substitute(f, s1), s2) == substitute(f, s2.compose(s1))


def test_sort_checking():
    with pytest.raises(F.SortError):
        F.infer_sort(F.Lt(F.Var(v1), F.Var(n)))  # Real vs Nat
    with pytest.raises(F.SortError):
        F.infer_sort(F.Eq(F.Var(b), F.Var(v1)))
    with pytest.raises(F.SortError):
        F.infer_sort(F.Ite(F.Var(v1), F.Var(v2), F.Var(v2)))
    with pytest.raises(F.SortError):
        F.infer_sort(F.Div(F.Var(n), F.Var(n)))  # division only on reals
    assert F.infer_sort(F.Ite(F.Var(b), F.Var(v1), F.Var(v2))) == REAL
    assert F.infer_sort(F.Add((F.Var(n), F.nat(3)))) == NATURAL


def test_evaluate():
    env = {v1: Fraction(3), v2: Fraction(5), b: True, n: 2}
    assert F.evaluate(F.Lt(F.Var(v1), F.Var(v2)), env) is True
    assert F.evaluate(F.Ite(F.Var(b), F.Var(v1), F.Var(v2)), env) == Fraction(3)
    assert F.evaluate(F.Sub(F.Var(v2), F.Var(v1)), env) == Fraction(2)
    assert F.evaluate(F.Implies(F.Var(b), F.Eq(F.Var(n), F.nat(2))), env) is True
    with pytest.raises(F.CannotEvaluate):
        F.evaluate(F.Exists((v1,), F.TRUE), env)
    with pytest.raises(F.CannotEvaluate):
        F.evaluate(F.Var(x), env)


def test_exactly_one():
    cases = [
        ((True, False, False), True),
        ((False, False, False), False),
        ((True, True, False), False),
    ]
    flags = [Variable(f"f{i}", BOOLEAN) for i in range(3)]
    formula = F.exactly_one([F.Var(f) for f in flags])
    for values, expect in cases:
        assert F.evaluate(formula, dict(zip(flags, values))) is expect


def test_conj_drops_true():
    f = F.Lt(F.Var(v1), F.Var(v2))
    assert F.conj(F.TRUE, f) == f
    assert F.conj() == F.TRUE
    assert F.conjuncts(F.And((f, F.And((f, f))))) == [f, f, f]


def test_instantiate():
    f = F.Exists((v1,), F.Lt(F.Var(v1), F.Var(v2)))
    out = F.instantiate(f, {v2: F.real(4), v1: F.real(9)})
    assert out == F.Exists((v1,), F.Lt(F.Var(v1), F.real(4)))
