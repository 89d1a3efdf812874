import pytest

from mlf.syntax import (
    BoundBody,
    ContextualType,
    Decl,
    HatContext,
    Var,
    VarClosure,
    EMPTY_CTX,
    EMPTY_SUBST,
)


@pytest.fixture
def ct():
    def make(t, c=EMPTY_CTX):
        return ContextualType(t, c)

    return make


@pytest.fixture
def mkdecl(ct):
    def make(name, level, t, c=EMPTY_CTX):
        return Decl(Var(name, level), ct(t, c))

    return make


@pytest.fixture
def var():
    def make(name, level=0, subst=EMPTY_SUBST):
        return VarClosure(Var(name, level), subst)

    return make


@pytest.fixture
def arg():
    def make(m, *binders, bound=0):
        return BoundBody(HatContext(tuple(binders), bound), m)

    return make
