"""Dependency-erased type approximations and the ordering that bounds
hereditary substitution.

An approximation keeps only the simple-type skeleton of a type: base family
names and arrow structure.  Erasure drops spine arguments and dependencies.
The occurrence ordering (a approximation occurring inside another) is
well-founded and is the termination measure for hereditary substitution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import ErrorKind, fail
from .syntax import (
    Context,
    ContextualType,
    Pi,
    SortRef,
    Type,
    TypeApp,
    TypeConst,
    Var,
)


@dataclass(frozen=True, repr=False)
class BaseApprox:
    """A base type family, dependencies erased."""

    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class ArrowApprox:
    """Erased function type ``alpha[gamma] => beta``."""

    domain: "CtxTypeApprox"
    codomain: "TypeApprox"

    def __repr__(self):
        return f"{self.domain!r} => {self.codomain!r}"


TypeApprox = Union[BaseApprox, ArrowApprox]


@dataclass(frozen=True, repr=False)
class TypedEntry:
    """Context-approximation entry with a known approximate type."""

    var: Var
    approx: "CtxTypeApprox"

    def __repr__(self):
        return f"{self.var!r} : {self.approx!r}"


@dataclass(frozen=True, repr=False)
class UnknownEntry:
    """Entry whose approximate type is not available (written ``x : _``).

    These never come from erasure; they arise when a substitution must be
    extended under a binder whose type is out of reach.
    """

    var: Var

    def __repr__(self):
        return f"{self.var!r} : _"


CtxEntry = Union[TypedEntry, UnknownEntry]


@dataclass(frozen=True, repr=False)
class CtxApprox:
    """Erased context: ordered entries mirroring the source context."""

    entries: tuple[CtxEntry, ...] = ()

    def __repr__(self):
        return ", ".join(repr(e) for e in self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


EMPTY_CTX_APPROX = CtxApprox()


@dataclass(frozen=True, repr=False)
class CtxTypeApprox:
    """Erased contextual type ``alpha[phi]``."""

    approx: TypeApprox
    context: CtxApprox

    def __repr__(self):
        return f"{self.approx!r}[{self.context!r}]"


# ---------------------------------------------------------------------------
# Erasure


def erase_type(a: Type) -> TypeApprox:
    """Erase a type to its simple skeleton.

    Fails on sorts and kinds: only proper types (atomic head a constant, or a
    function type over such) have approximations.
    """
    match a:
        case TypeConst(name=n):
            return BaseApprox(n)
        case TypeApp(head=h):
            return erase_type(h)
        case Pi(domain=d, body=b):
            return ArrowApprox(erase_contextual(d), erase_type(b))
        case SortRef():
            fail(ErrorKind.NOT_A_TYPE, f"cannot erase the sort {a!r}")
        case _:
            fail(ErrorKind.NOT_A_TYPE, f"cannot erase {a!r}")


def erase_ctx(ctx: Context) -> CtxApprox:
    """Pointwise erasure of a context; never produces unknown entries."""
    return CtxApprox(
        tuple(TypedEntry(d.var, erase_contextual(d.ctype)) for d in ctx.decls)
    )


def erase_contextual(ct: ContextualType) -> CtxTypeApprox:
    return CtxTypeApprox(erase_type(ct.type), erase_ctx(ct.context))


# ---------------------------------------------------------------------------
# Occurrence ordering


def shape_equal(a, b) -> bool:
    """Structural equality of approximations ignoring entry variable names."""
    match a, b:
        case BaseApprox(name=n1), BaseApprox(name=n2):
            return n1 == n2
        case ArrowApprox(domain=d1, codomain=c1), ArrowApprox(domain=d2, codomain=c2):
            return shape_equal(d1, d2) and shape_equal(c1, c2)
        case CtxTypeApprox(approx=a1, context=g1), CtxTypeApprox(approx=a2, context=g2):
            return shape_equal(a1, a2) and shape_equal(g1, g2)
        case CtxApprox(entries=e1), CtxApprox(entries=e2):
            if len(e1) != len(e2):
                return False
            return all(shape_equal(x, y) for x, y in zip(e1, e2))
        case TypedEntry(approx=a1), TypedEntry(approx=a2):
            return shape_equal(a1, a2)
        case UnknownEntry(), UnknownEntry():
            return True
        case _:
            return False


def _occurs_in_type(a: TypeApprox, b: TypeApprox) -> bool:
    if shape_equal(a, b):
        return True
    match b:
        case ArrowApprox(domain=d, codomain=c):
            return _occurs_in_ctxtype(a, d) or _occurs_in_type(a, c)
        case _:
            return False


def _occurs_in_ctx(a: TypeApprox, psi: CtxApprox) -> bool:
    # All entries are searched, order-insensitively; unknown entries hide
    # their contents and contribute no occurrences.
    for e in psi.entries:
        if isinstance(e, TypedEntry) and _occurs_in_ctxtype(a, e.approx):
            return True
    return False


def _occurs_in_ctxtype(a: TypeApprox, b: CtxTypeApprox) -> bool:
    return _occurs_in_type(a, b.approx) or _occurs_in_ctx(a, b.context)


def approx_leq(candidate, bound) -> bool:
    """Occurrence ordering: the candidate occurs somewhere inside the bound.

    The candidate may be a plain approximation or a contextual one; the bound
    may be either as well.  Occurrences inside unknown entries do not count.
    """
    if isinstance(candidate, CtxTypeApprox):
        # A contextual candidate occurs iff it matches a whole arrow domain
        # or its components occur.
        if isinstance(bound, CtxTypeApprox):
            return shape_equal(candidate, bound) or _occurs_ctxtype_in_ctxtype(
                candidate, bound
            )
        return _occurs_ctxtype_in_type(candidate, bound)
    if isinstance(bound, CtxTypeApprox):
        return _occurs_in_ctxtype(candidate, bound)
    return _occurs_in_type(candidate, bound)


def _occurs_ctxtype_in_type(a: CtxTypeApprox, b: TypeApprox) -> bool:
    match b:
        case ArrowApprox(domain=d, codomain=c):
            if shape_equal(a, d):
                return True
            return _occurs_ctxtype_in_ctxtype(a, d) or _occurs_ctxtype_in_type(a, c)
        case _:
            return False


def _occurs_ctxtype_in_ctxtype(a: CtxTypeApprox, b: CtxTypeApprox) -> bool:
    if _occurs_ctxtype_in_type(a, b.approx):
        return True
    for e in b.context.entries:
        if isinstance(e, TypedEntry):
            if shape_equal(a, e.approx) or _occurs_ctxtype_in_ctxtype(a, e.approx):
                return True
    return False


def approx_lt(candidate, bound) -> bool:
    """Strict occurrence: occurs and is not the whole bound."""
    return approx_leq(candidate, bound) and not shape_equal(candidate, bound)


def node_count(x) -> int:
    """Size of an approximation; unknown entries weigh nothing."""
    match x:
        case BaseApprox():
            return 1
        case ArrowApprox(domain=d, codomain=c):
            return 1 + node_count(d) + node_count(c)
        case CtxTypeApprox(approx=a, context=g):
            return node_count(a) + node_count(g)
        case CtxApprox(entries=es):
            return sum(node_count(e) for e in es)
        case TypedEntry(approx=a):
            return node_count(a)
        case UnknownEntry():
            return 0
        case _:
            raise TypeError(f"no node count for {x!r}")


def level_of_approx(phi: CtxApprox) -> int:
    """Least upper bound on entry levels, like a context's level."""
    return max((e.var.level + 1 for e in phi.entries), default=0)


def chop_ctx_approx(phi: CtxApprox, n: int) -> CtxApprox:
    return CtxApprox(tuple(e for e in phi.entries if e.var.level >= n))
