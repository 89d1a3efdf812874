"""Surface-syntax printer.

The output reparses to an alpha-equivalent value.  Level annotations ``^n``
are omitted at level 0, closures ``[...]`` are omitted for level-0 variables
with an empty substitution, and empty local contexts are omitted in Pi types
and context declarations.
"""

from __future__ import annotations

from .approx import ArrowApprox, BaseApprox, CtxApprox, CtxTypeApprox, TypedEntry
from .syntax import (
    BoundBody,
    Context,
    ContextualType,
    Lam,
    Pi,
    Rename,
    Signature,
    SortRef,
    Substitution,
    TermApp,
    TermConst,
    TermConstDecl,
    TermEntry,
    TypeApp,
    TypeConst,
    TypeConstDecl,
    Var,
    VarClosure,
)


def show_var(v: Var) -> str:
    return f"{v.name}^{v.level}" if v.level else v.name


def show_term(m) -> str:
    match m:
        case Lam(binder=x, body=b):
            return f"\\{show_var(x)}. {show_term(b)}"
        case VarClosure(var=v, subst=s):
            if v.level == 0 and not s.entries:
                return show_var(v)
            return f"{show_var(v)}[{show_subst(s)}]"
        case TermConst(name=c):
            return c
        case TermApp(head=h, arg=a):
            return f"{show_term(h)} ({show_bound_body(a)})"
        case _:
            raise TypeError(f"not a term: {m!r}")


def show_bound_body(bb: BoundBody) -> str:
    if not bb.hat.binders:
        return show_term(bb.body)
    binders = ", ".join(show_var(v) for v in bb.hat.binders)
    return f"{binders}. {show_term(bb.body)}"


def show_entry(e) -> str:
    match e:
        case Rename(var=v):
            return show_var(v)
        case TermEntry(body=bb):
            binders = " ".join(show_var(v) for v in bb.hat.binders)
            return f"{binders} . {show_term(bb.body)}" if binders else f". {show_term(bb.body)}"
        case _:
            raise TypeError(f"not a substitution entry: {e!r}")


def show_subst(s: Substitution) -> str:
    return ", ".join(show_entry(e) for e in s.entries)


def show_type(a) -> str:
    match a:
        case SortRef(sort=s):
            return s.value
        case TypeConst(name=n):
            return n
        case TypeApp(head=h, arg=b):
            return f"{show_type(h)} ({show_bound_body(b)})"
        case Pi(binder=x, domain=d, body=b):
            return f"{{{show_var(x)} : {show_ctype(d)}}} {show_type(b)}"
        case _:
            raise TypeError(f"not a type: {a!r}")


def show_ctype(ct: ContextualType) -> str:
    if not ct.context.decls:
        return show_type(ct.type)
    return f"{show_type(ct.type)} [{show_ctx(ct.context)}]"


def show_decl(d) -> str:
    return f"{show_var(d.var)} : {show_ctype(d.ctype)}"


def show_ctx(ctx: Context) -> str:
    return ", ".join(show_decl(d) for d in ctx.decls)


def show_sig_decl(d) -> str:
    match d:
        case TypeConstDecl(name=n, kind=k):
            return f"{n} : {show_type(k)}."
        case TermConstDecl(name=n, type=a):
            return f"{n} : {show_type(a)}."
        case _:
            raise TypeError(f"not a signature declaration: {d!r}")


def show_signature(sig: Signature) -> str:
    return "\n".join(show_sig_decl(d) for d in sig.decls)


def show_approx(a) -> str:
    match a:
        case BaseApprox(name=n):
            return n
        case ArrowApprox(domain=d, codomain=c):
            return f"{show_ctx_type_approx(d)} => {show_approx(c)}"
        case _:
            raise TypeError(f"not a type approximation: {a!r}")


def show_ctx_approx(g: CtxApprox) -> str:
    parts = []
    for e in g.entries:
        if isinstance(e, TypedEntry):
            parts.append(f"{show_var(e.var)} : {show_ctx_type_approx(e.approx)}")
        else:
            parts.append(f"{show_var(e.var)} : _")
    return ", ".join(parts)


def show_ctx_type_approx(ct: CtxTypeApprox) -> str:
    if not ct.context.entries:
        return show_approx(ct.approx)
    return f"({show_approx(ct.approx)} [{show_ctx_approx(ct.context)}])"
