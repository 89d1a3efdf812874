"""Hereditary substitution.

Substituting a canonical term for a variable can create redices; hereditary
substitution eliminates them on the fly so results stay canonical.  Every
operation is annotated with a dependency-erased approximation of the type of
the object being substituted, and recursion is bounded lexicographically by
(approximation size, subject size), so the operations are total: they return
a result or raise a classified error.

Two families live here:

* single substitution ``[hat.N / x^n]`` applied to terms, neutral terms,
  substitutions, contexts and types;
* simultaneous substitution ``[sigma]`` with an (approximate) domain, applied
  to the same categories.

A variable missing from a simultaneous substitution's domain passes through
untouched; this makes substitutions compose (applying a substitution to the
image of another never trips over foreign variables).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .approx import (
    ArrowApprox,
    CtxApprox,
    CtxTypeApprox,
    TypedEntry,
    UnknownEntry,
    approx_leq,
    erase_contextual,
    erase_ctx,
    level_of_approx,
)
from .contexts import merge_plan
from .errors import ErrorKind, fail
from .syntax import (
    BoundBody,
    Context,
    ContextualType,
    Decl,
    HatContext,
    Lam,
    Pi,
    Rename,
    SortRef,
    Substitution,
    Term,
    TermApp,
    TermConst,
    TermEntry,
    Type,
    TypeApp,
    TypeConst,
    Var,
    VarClosure,
    free_vars,
    free_vars_subst,
    fresh_var,
    occurring_vars,
    rename_free,
)

DEFAULT_MAX_DEPTH = 10000


def _spend(d: int) -> int:
    if d <= 0:
        fail(ErrorKind.DEPTH_EXCEEDED, "substitution recursion budget exhausted")
    return d - 1


# ---------------------------------------------------------------------------
# Single substitution


@dataclass(frozen=True)
class SingleSubst:
    """The substitution ``[hat.N / x^n]`` at approximate type ``alpha[phi]``."""

    replacement: BoundBody
    target: Var
    bound: CtxTypeApprox

    def __post_init__(self):
        if self.target.level != self.replacement.hat.bound:
            raise ValueError(
                f"replacement binds locals up to level {self.replacement.hat.bound} "
                f"but the target {self.target!r} sits at level {self.target.level}"
            )


def single_subst(replacement: BoundBody, target: Var, annotation: ContextualType):
    """Build a single substitution, erasing the annotation to its skeleton."""
    return SingleSubst(replacement, target, erase_contextual(annotation))


@dataclass(frozen=True)
class StillNeutral:
    term: object  # AtomicTerm


@dataclass(frozen=True)
class Reduced:
    """A normal term together with the approximation of its type."""

    term: Term
    approx: object  # TypeApprox


HsubNeutralResult = Union[StillNeutral, Reduced]


def _relabel(phi: CtxApprox, binders: tuple[Var, ...]) -> Optional[CtxApprox]:
    """Relabel a context approximation positionally with the given binders.

    The approximation of a local context travels with its declaration, but the
    body it gets applied to names its locals after its own binder list; the
    labels are aligned here.  Returns None on arity mismatch.
    """
    if len(phi.entries) != len(binders):
        return None
    out = []
    for e, v in zip(phi.entries, binders):
        if isinstance(e, TypedEntry):
            out.append(TypedEntry(v, e.approx))
        else:
            out.append(UnknownEntry(v))
    return CtxApprox(tuple(out))


def hsub_normal(s: SingleSubst, m: Term, *, max_depth=DEFAULT_MAX_DEPTH) -> Term:
    """Apply a single hereditary substitution to a normal term."""
    return _hsub_normal(s, m, max_depth)


def _hsub_normal(s: SingleSubst, m: Term, d: int) -> Term:
    d = _spend(d)
    match m:
        case Lam(binder=y, body=body):
            n = s.target.level
            if y.level >= n:
                fv = free_vars(s.replacement)
                if y == s.target or y in fv:
                    avoid = {v.name for v in fv}
                    avoid |= {v.name for v in occurring_vars(body)}
                    avoid.add(s.target.name)
                    y2 = fresh_var(y, avoid)
                    body = rename_free(body, {y: y2})
                    y = y2
            return Lam(y, _hsub_normal(s, body, d))
        case _:
            res = _hsub_neutral(s, m, d)
            if isinstance(res, StillNeutral):
                return res.term
            return res.term


def hsub_neutral(s: SingleSubst, r, *, max_depth=DEFAULT_MAX_DEPTH):
    """Apply a single hereditary substitution to a neutral term.

    Either the term stays neutral, or hitting the target variable triggers
    reductions and a normal term comes back with its type approximation.
    """
    return _hsub_neutral(s, r, max_depth)


def _hsub_neutral(s: SingleSubst, r, d: int) -> HsubNeutralResult:
    d = _spend(d)
    match r:
        case TermConst():
            return StillNeutral(r)
        case VarClosure(var=y, subst=sigma):
            sigma2 = _hsub_subst(s, sigma, d)
            if y != s.target:
                return StillNeutral(VarClosure(y, sigma2))
            phi = _relabel(s.bound.context, s.replacement.hat.binders)
            if phi is None:
                fail(
                    ErrorKind.SUBST_FAILS,
                    f"replacement for {y!r} binds {len(s.replacement.hat)} locals "
                    f"but its approximate type lists {len(s.bound.context)}",
                )
            if len(sigma2) != len(phi.entries):
                fail(
                    ErrorKind.SUBST_FAILS,
                    f"closure of {y!r} carries {len(sigma2)} entries "
                    f"for {len(phi.entries)} locals",
                )
            reduced = _simsub_normal(_SimSub(sigma2.entries, phi), s.replacement.body, d)
            return Reduced(reduced, s.bound.approx)
        case TermApp(head=h, arg=arg):
            n = s.target.level
            k = arg.hat.bound
            if k <= n:
                arg = BoundBody(arg.hat, _hsub_normal(s, arg.body, d))
            head_res = _hsub_neutral(s, h, d)
            if isinstance(head_res, StillNeutral):
                return StillNeutral(TermApp(head_res.term, arg))
            return _beta_step(head_res, arg, s.bound, d)
        case _:
            fail(ErrorKind.SUBST_FAILS, f"not a neutral term: {r!r}")


def _beta_step(head_res: Reduced, arg: BoundBody, outer_bound, d: int) -> Reduced:
    """Apply a reduced head to an argument, continuing hereditarily.

    ``outer_bound`` is the enclosing annotation to check the approximation
    guard against, or None when no guard applies.
    """
    head = head_res.term
    approx = head_res.approx
    if not isinstance(head, Lam):
        fail(
            ErrorKind.SUBST_FAILS,
            f"application head reduced to the non-function {head!r}",
        )
    if not isinstance(approx, ArrowApprox):
        fail(
            ErrorKind.SUBST_FAILS,
            f"function {head.binder!r} carries the non-arrow approximation {approx!r}",
        )
    if outer_bound is not None and not approx_leq(approx, outer_bound):
        fail(
            ErrorKind.SUBST_FAILS,
            f"approximation guard failed: {approx!r} does not occur in {outer_bound!r}",
        )
    binder = head.binder
    if any(v.level >= binder.level for v in arg.hat.binders):
        fail(
            ErrorKind.SUBST_FAILS,
            f"argument binds locals at or above level {binder.level}",
        )
    hat = HatContext(arg.hat.binders, binder.level)
    inner = SingleSubst(BoundBody(hat, arg.body), binder, approx.domain)
    return Reduced(_hsub_normal(inner, head.body, d), approx.codomain)


def hsub_subst(s: SingleSubst, sigma: Substitution, *, max_depth=DEFAULT_MAX_DEPTH):
    """Push a single substitution through a simultaneous one, entrywise."""
    return _hsub_subst(s, sigma, max_depth)


def _hsub_subst(s: SingleSubst, sigma: Substitution, d: int) -> Substitution:
    d = _spend(d)
    n = s.target.level
    out = []
    for e in sigma.entries:
        match e:
            case TermEntry(body=bb):
                if bb.hat.bound <= n:
                    out.append(TermEntry(BoundBody(bb.hat, _hsub_normal(s, bb.body, d))))
                else:
                    out.append(e)
            case Rename(var=y):
                if y == s.target:
                    out.append(TermEntry(s.replacement))
                else:
                    out.append(e)
    return Substitution(tuple(out))


def hsub_ctx(s: SingleSubst, ctx: Context, *, max_depth=DEFAULT_MAX_DEPTH) -> Context:
    """Rewrite the declarations of a context at or below the target's level."""
    return _hsub_ctx(s, ctx, max_depth)


def _hsub_ctx(s: SingleSubst, ctx: Context, d: int) -> Context:
    d = _spend(d)
    n = s.target.level
    decls = []
    for decl in ctx.decls:
        if decl.var.level <= n:
            decls.append(Decl(decl.var, _hsub_contextual(s, decl.ctype, d)))
        else:
            decls.append(decl)
    return Context(tuple(decls))


def hsub_contextual(s: SingleSubst, ct: ContextualType, *, max_depth=DEFAULT_MAX_DEPTH):
    return _hsub_contextual(s, ct, max_depth)


def _hsub_contextual(s: SingleSubst, ct: ContextualType, d: int) -> ContextualType:
    return ContextualType(_hsub_type(s, ct.type, d), _hsub_ctx(s, ct.context, d))


def hsub_type(s: SingleSubst, a: Type, *, max_depth=DEFAULT_MAX_DEPTH) -> Type:
    """Apply a single hereditary substitution to a type or kind.

    Atomic heads are constants, so no reduction can trigger at the type level;
    spine arguments are rewritten like term-level application arguments.
    """
    return _hsub_type(s, a, max_depth)


def _hsub_type(s: SingleSubst, a: Type, d: int) -> Type:
    d = _spend(d)
    n = s.target.level
    match a:
        case SortRef() | TypeConst():
            return a
        case TypeApp(head=h, arg=arg):
            if arg.hat.bound <= n:
                arg = BoundBody(arg.hat, _hsub_normal(s, arg.body, d))
            return TypeApp(_hsub_type(s, h, d), arg)
        case Pi(binder=y, domain=dom, body=b):
            if y.level <= n:
                dom = _hsub_contextual(s, dom, d)
            if y.level >= n:
                fv = free_vars(s.replacement)
                if y == s.target or y in fv:
                    avoid = {v.name for v in fv}
                    avoid |= {v.name for v in occurring_vars(b)}
                    avoid.add(s.target.name)
                    y2 = fresh_var(y, avoid)
                    b = rename_free(b, {y: y2})
                    y = y2
            return Pi(y, dom, _hsub_type(s, b, d))
        case _:
            fail(ErrorKind.SUBST_FAILS, f"not a type: {a!r}")


# ---------------------------------------------------------------------------
# Simultaneous substitution


@dataclass(frozen=True)
class _SimSub:
    """A substitution paired with its (approximate, resurrected) domain."""

    entries: tuple
    domain: CtxApprox

    def __post_init__(self):
        if len(self.entries) != len(self.domain.entries):
            fail(
                ErrorKind.ARITY_MISMATCH,
                f"substitution has {len(self.entries)} entries for a domain "
                f"of {len(self.domain.entries)}",
            )

    @property
    def level(self) -> int:
        return level_of_approx(self.domain)

    def domain_names(self) -> set[str]:
        return {e.var.name for e in self.domain.entries}

    def find(self, v: Var) -> Optional[int]:
        for i, e in enumerate(self.domain.entries):
            if e.var == v:
                return i
        return None


def _as_ctx_approx(domain) -> CtxApprox:
    if isinstance(domain, Context):
        return erase_ctx(domain)
    if isinstance(domain, CtxApprox):
        return domain
    raise TypeError(f"not a substitution domain: {domain!r}")


def _mk_simsub(sigma: Substitution, domain) -> _SimSub:
    return _SimSub(tuple(sigma.entries), _as_ctx_approx(domain))


def _merge_sim(ss: _SimSub, entries, approx_entries) -> _SimSub:
    """Merge extra (entry, domain-entry) pairs into a substitution by level."""
    plan = merge_plan(
        [e.var.level for e in ss.domain.entries],
        [e.var.level for e in approx_entries],
    )
    new_entries = tuple(
        ss.entries[k] if side == "L" else entries[k] for side, k in plan
    )
    new_domain = tuple(
        ss.domain.entries[k] if side == "L" else approx_entries[k] for side, k in plan
    )
    return _SimSub(new_entries, CtxApprox(new_domain))


def _chop_sim(ss: _SimSub, n: int) -> _SimSub:
    kept = [
        (e, de)
        for e, de in zip(ss.entries, ss.domain.entries)
        if de.var.level >= n
    ]
    return _SimSub(
        tuple(e for e, _ in kept), CtxApprox(tuple(de for _, de in kept))
    )


def _sub_fv_names(ss: _SimSub) -> set[str]:
    return {v.name for v in free_vars_subst(Substitution(ss.entries))}


def _freshen_binders(
    binders: tuple[Var, ...], body, ss: _SimSub
) -> tuple[tuple[Var, ...], object]:
    """Rename binders apart from a substitution's domain and free variables."""
    clash_names = ss.domain_names() | _sub_fv_names(ss)
    clash_vars = free_vars_subst(Substitution(ss.entries))
    out = list(binders)
    for i, b in enumerate(out):
        if b.name in clash_names or b in clash_vars:
            avoid = set(clash_names)
            avoid |= {v.name for v in occurring_vars(body)}
            avoid |= {v.name for v in out}
            b2 = fresh_var(b, avoid)
            body = rename_free(body, {b: b2})
            out[i] = b2
    return tuple(out), body


def _push_under_binders(ss: _SimSub, bb: BoundBody, d: int):
    """Rewrite an argument or entry body under its local binders.

    For a body binding locals below the substitution's level, the substitution
    is chopped at the body's bound and extended with the identity on the
    binders (their approximate types unknown).
    """
    k = bb.hat.bound
    if k >= ss.level:
        return bb
    chopped = _chop_sim(ss, k)
    binders, body = _freshen_binders(bb.hat.binders, bb.body, chopped)
    extended = _merge_sim(
        chopped,
        [Rename(v) for v in binders],
        [UnknownEntry(v) for v in binders],
    )
    return BoundBody(HatContext(binders, k), _simsub_normal(extended, body, d))


def simsub_normal(sigma: Substitution, domain, m: Term, *, max_depth=DEFAULT_MAX_DEPTH):
    """Apply a simultaneous substitution (with the given domain) to a term."""
    return _simsub_normal(_mk_simsub(sigma, domain), m, max_depth)


def _simsub_normal(ss: _SimSub, m: Term, d: int) -> Term:
    d = _spend(d)
    match m:
        case Lam(binder=y, body=body):
            if y.level < ss.level:
                binders, body = _freshen_binders((y,), body, ss)
                y = binders[0]
                extended = _merge_sim(ss, [Rename(y)], [UnknownEntry(y)])
                return Lam(y, _simsub_normal(extended, body, d))
            if y in free_vars_subst(Substitution(ss.entries)):
                avoid = _sub_fv_names(ss) | {v.name for v in occurring_vars(body)}
                y2 = fresh_var(y, avoid)
                body = rename_free(body, {y: y2})
                y = y2
            return Lam(y, _simsub_normal(ss, body, d))
        case _:
            res = _simsub_neutral(ss, m, d)
            if isinstance(res, StillNeutral):
                return res.term
            return res.term


def simsub_neutral(sigma: Substitution, domain, r, *, max_depth=DEFAULT_MAX_DEPTH):
    """Apply a simultaneous substitution to a neutral term."""
    return _simsub_neutral(_mk_simsub(sigma, domain), r, max_depth)


def _simsub_neutral(ss: _SimSub, r, d: int) -> HsubNeutralResult:
    d = _spend(d)
    match r:
        case TermConst():
            return StillNeutral(r)
        case VarClosure(var=y, subst=rho):
            rho2 = _simsub_subst(ss, rho, d)
            i = ss.find(y)
            if i is None:
                return StillNeutral(VarClosure(y, rho2))
            entry = ss.entries[i]
            match entry:
                case Rename(var=z):
                    return StillNeutral(VarClosure(z, rho2))
                case TermEntry(body=bb):
                    dom_entry = ss.domain.entries[i]
                    if isinstance(dom_entry, UnknownEntry):
                        fail(
                            ErrorKind.UNKNOWN_APPROX,
                            f"instantiating {y!r} needs its approximate type, "
                            "which is unknown here",
                        )
                    gamma = _relabel(dom_entry.approx.context, bb.hat.binders)
                    if gamma is None:
                        fail(
                            ErrorKind.SUBST_FAILS,
                            f"entry for {y!r} binds {len(bb.hat)} locals but its "
                            f"approximate type lists {len(dom_entry.approx.context)}",
                        )
                    if len(rho2) != len(gamma.entries):
                        fail(
                            ErrorKind.SUBST_FAILS,
                            f"closure of {y!r} carries {len(rho2)} entries "
                            f"for {len(gamma.entries)} locals",
                        )
                    inner = _SimSub(rho2.entries, gamma)
                    return Reduced(
                        _simsub_normal(inner, bb.body, d), dom_entry.approx.approx
                    )
        case TermApp(head=h, arg=arg):
            arg2 = _push_under_binders(ss, arg, d)
            head_res = _simsub_neutral(ss, h, d)
            if isinstance(head_res, StillNeutral):
                return StillNeutral(TermApp(head_res.term, arg2))
            return _beta_step(head_res, arg2, None, d)
        case _:
            fail(ErrorKind.SUBST_FAILS, f"not a neutral term: {r!r}")


def simsub_subst(
    sigma: Substitution, domain, rho: Substitution, *, max_depth=DEFAULT_MAX_DEPTH
):
    """Compose: apply a simultaneous substitution to another substitution."""
    return _simsub_subst(_mk_simsub(sigma, domain), rho, max_depth)


def _simsub_subst(ss: _SimSub, rho: Substitution, d: int) -> Substitution:
    d = _spend(d)
    out = []
    for e in rho.entries:
        match e:
            case TermEntry(body=bb):
                out.append(TermEntry(_push_under_binders(ss, bb, d)))
            case Rename(var=y):
                i = ss.find(y)
                out.append(e if i is None else ss.entries[i])
    return Substitution(tuple(out))


def simsub_type(sigma: Substitution, domain, a: Type, *, max_depth=DEFAULT_MAX_DEPTH):
    """Apply a simultaneous substitution to a type or kind."""
    return _simsub_type(_mk_simsub(sigma, domain), a, max_depth)


def _simsub_type(ss: _SimSub, a: Type, d: int) -> Type:
    d = _spend(d)
    match a:
        case SortRef() | TypeConst():
            return a
        case TypeApp(head=h, arg=arg):
            return TypeApp(_simsub_type(ss, h, d), _push_under_binders(ss, arg, d))
        case Pi(binder=y, domain=dom, body=b):
            if y.level < ss.level:
                dom = _simsub_contextual(ss, dom, y.level, d)
                binders, b = _freshen_binders((y,), b, ss)
                y = binders[0]
                extended = _merge_sim(
                    ss, [Rename(y)], [TypedEntry(y, erase_contextual(dom))]
                )
                return Pi(y, dom, _simsub_type(extended, b, d))
            if y in free_vars_subst(Substitution(ss.entries)):
                avoid = _sub_fv_names(ss) | {v.name for v in occurring_vars(b)}
                y2 = fresh_var(y, avoid)
                b = rename_free(b, {y: y2})
                y = y2
            return Pi(y, dom, _simsub_type(ss, b, d))
        case _:
            fail(ErrorKind.SUBST_FAILS, f"not a type: {a!r}")


def simsub_ctx(sigma: Substitution, domain, ctx: Context, *, max_depth=DEFAULT_MAX_DEPTH):
    """Apply a simultaneous substitution to a context, declaration-wise."""
    return _simsub_ctx(_mk_simsub(sigma, domain), ctx, max_depth)


def _simsub_ctx(ss: _SimSub, ctx: Context, d: int) -> Context:
    d = _spend(d)
    decls = []
    for decl in ctx.decls:
        decls.append(
            Decl(decl.var, _simsub_contextual(ss, decl.ctype, decl.var.level, d))
        )
    return Context(tuple(decls))


def simsub_contextual(
    sigma: Substitution, domain, ct: ContextualType, level: int, *,
    max_depth=DEFAULT_MAX_DEPTH,
):
    """Apply a simultaneous substitution to a contextual type at some level.

    The substitution is restricted to the levels the declaration can see and
    extended with the identity on the local context.
    """
    return _simsub_contextual(_mk_simsub(sigma, domain), ct, level, max_depth)


def _simsub_contextual(ss: _SimSub, ct: ContextualType, level: int, d: int):
    chopped = _chop_sim(ss, level)
    if not chopped.entries:
        return ct
    local = ct.context
    body_type = ct.type
    # Rename the local declarations apart from anything the substitution could
    # confuse them with or capture under them.
    clash_names = chopped.domain_names() | _sub_fv_names(chopped)
    mapping = {}
    taken = {v.name for v in occurring_vars(ct.context)} | {
        v.name for v in occurring_vars(body_type)
    }
    for dv in local.vars():
        if dv.name in clash_names:
            nv = fresh_var(dv, clash_names | taken)
            taken.add(nv.name)
            mapping[dv] = nv
    if mapping:
        # Declared names are binding positions for everything to their right
        # and for the type, so rename declarations and references in step.
        new_decls = []
        active: dict[Var, Var] = {}
        for dc in local.decls:
            ct2 = rename_free(dc.ctype, active) if active else dc.ctype
            nv = mapping.get(dc.var, dc.var)
            if nv != dc.var:
                active = {**active, dc.var: nv}
            new_decls.append(Decl(nv, ct2))
        local = Context(tuple(new_decls))
        body_type = rename_free(body_type, active) if active else body_type
    local2 = _simsub_ctx(chopped, local, d)
    extended = _merge_sim(
        chopped,
        [Rename(v) for v in local2.vars()],
        [TypedEntry(dc.var, erase_contextual(dc.ctype)) for dc in local2.decls],
    )
    return ContextualType(_simsub_type(extended, body_type, d), local2)
