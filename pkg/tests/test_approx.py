import pytest
from hypothesis import given, settings, strategies as st

from mlf.approx import (
    ArrowApprox,
    BaseApprox,
    CtxApprox,
    CtxTypeApprox,
    TypedEntry,
    UnknownEntry,
    approx_leq,
    approx_lt,
    erase_type,
    node_count,
    shape_equal,
)
from mlf.errors import ErrorKind, KernelError
from mlf.syntax import Sort, SortRef, TypeConst, Var

import random

a = BaseApprox("a")
b = BaseApprox("b")


def cta(t, *entries):
    return CtxTypeApprox(t, CtxApprox(tuple(entries)))


def test_erase_rejects_sorts():
    with pytest.raises(KernelError) as e:
        erase_type(SortRef(Sort.TYPE))
    assert e.value.kind == ErrorKind.NOT_A_TYPE


def test_leq_is_reflexive():
    assert approx_leq(a, a)


def test_proper_occurrence_in_arrow():
    arrow = cta(ArrowApprox(cta(a), b))
    assert approx_lt(a, arrow)
    assert approx_lt(b, arrow)


def test_arrow_does_not_occur_in_base():
    arrow = ArrowApprox(cta(a), b)
    assert not approx_lt(arrow, cta(a))


def test_occurrence_inside_context_entries():
    # a occurs via the context entry of the arrow's domain
    inner = cta(b, TypedEntry(Var("y", 0), cta(a)))
    arrow = cta(ArrowApprox(inner, b))
    assert approx_leq(a, arrow)


def test_unknown_entries_hide_occurrences():
    inner = cta(b, UnknownEntry(Var("y", 0)))
    arrow = cta(ArrowApprox(inner, b))
    assert not approx_leq(a, arrow)


def test_labels_are_ignored():
    left = cta(b, TypedEntry(Var("y", 0), cta(a)))
    right = cta(b, TypedEntry(Var("z", 0), cta(a)))
    assert shape_equal(left, right)


def _random_approx(rng, depth):
    if depth <= 0 or rng.random() < 0.4:
        return BaseApprox(rng.choice("ab"))
    entries = tuple(
        TypedEntry(Var(f"v{k}", 0), cta(_random_approx(rng, depth - 1)))
        for k in range(rng.randrange(0, 2))
    )
    dom = CtxTypeApprox(_random_approx(rng, depth - 1), CtxApprox(entries))
    return ArrowApprox(dom, _random_approx(rng, depth - 1))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_occurrence_bounds_node_count(seed):
    # No infinite descending chains: anything strictly below has fewer nodes.
    rng = random.Random(seed)
    big = _random_approx(rng, 3)
    small = _random_approx(rng, 2)
    if approx_leq(small, big):
        assert node_count(small) <= node_count(big)
    if approx_lt(small, big):
        assert node_count(small) < node_count(big)


def _arrows_in(x):
    out = []

    def go(n):
        match n:
            case ArrowApprox(domain=d, codomain=cd):
                out.append(n)
                go(d)
                go(cd)
            case CtxTypeApprox(approx=ap, context=g):
                go(ap)
                go(g)
            case CtxApprox(entries=es):
                for e in es:
                    go(e)
            case TypedEntry(approx=ap):
                go(ap)
            case _:
                pass

    go(x)
    return out


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_strict_chains_terminate(seed):
    # Descend the way a fired redex does: from a bound to the domain of an
    # arrow occurring in it.  Chain length is capped by the node count.
    rng = random.Random(seed)
    current = cta(_random_approx(rng, 3))
    steps = 0
    cap = node_count(current) + 1
    while True:
        arrows = _arrows_in(current)
        if not arrows:
            break
        arrow = rng.choice(arrows)
        assert approx_leq(arrow, current)
        nxt = arrow.domain
        assert node_count(nxt) < node_count(current)
        current = nxt
        steps += 1
        assert steps <= cap


def test_beta_step_recurses_at_smaller_approximation():
    # The argument annotation of a fired redex is smaller than the guard bound.
    dom = cta(a, TypedEntry(Var("y", 0), cta(b)))
    arrow = ArrowApprox(dom, b)
    bound = cta(arrow)
    assert approx_leq(arrow, bound)
    assert node_count(dom) < node_count(bound)


def test_erasure_of_skeleton_is_stable(ct, mkdecl):
    # Erasing a type rebuilt from an approximation's skeleton changes nothing.
    from mlf.syntax import Pi, ContextualType, Context, ctx_of

    nat = TypeConst("nat")
    x0 = Var("x", 0)
    t = Pi(x0, ContextualType(nat, ctx_of()), TypeConst("vec"))
    first = erase_type(t)
    assert first == ArrowApprox(cta(BaseApprox("nat")), BaseApprox("vec"))
    assert erase_type(t) == first
