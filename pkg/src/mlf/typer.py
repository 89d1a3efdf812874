"""Bidirectional type checker.

Normal terms and types are checked against classifiers; atomic terms and
types synthesize theirs.  All rules are syntax-directed, so every judgement
terminates with acceptance or a classified error.  The checker enforces the
eta-long discipline: an atomic term never checks against a function type.

Binders are renamed apart from the ambient context on the fly, so user terms
never fail merely because a bound name collides with a declared one.
"""

from __future__ import annotations

from typing import Optional, Union

from dataclasses import dataclass

from . import printer
from .approx import erase_contextual
from .contexts import chop_ctx, id_subst, lookup, merge_ctx, merge_subst, chop_subst
from .errors import ErrorKind, KernelError, fail
from .hsubst import (
    DEFAULT_MAX_DEPTH,
    SingleSubst,
    hsub_type,
    simsub_contextual,
    simsub_ctx,
    simsub_type,
)
from .syntax import (
    AtomicTerm,
    AtomicType,
    BoundBody,
    Context,
    ContextualType,
    Decl,
    HatContext,
    Lam,
    Pi,
    Rename,
    Signature,
    Sort,
    SortRef,
    Substitution,
    Term,
    TermApp,
    TermConst,
    TermConstDecl,
    TermEntry,
    Type,
    TypeApp,
    TypeConst,
    TypeConstDecl,
    Var,
    VarClosure,
    EMPTY_CTX,
    EMPTY_SIG,
    ctx_of,
    fresh_var,
    freshen_decl_names,
    occurring_vars,
    rebind_contextual,
    rename_free,
    well_sorted,
)


def _spend(d: int) -> int:
    if d <= 0:
        fail(ErrorKind.DEPTH_EXCEEDED, "typing recursion budget exhausted")
    return d - 1


# ---------------------------------------------------------------------------
# Judgement forms


@dataclass(frozen=True)
class CheckTerm:
    context: Context
    term: Term
    type: Type


@dataclass(frozen=True)
class SynthTerm:
    context: Context
    term: AtomicTerm


@dataclass(frozen=True)
class CheckSubst:
    context: Context
    subst: Substitution
    domain: Context


@dataclass(frozen=True)
class CheckType:
    context: Context
    type: Type
    sort: Sort


@dataclass(frozen=True)
class SynthType:
    context: Context
    type: AtomicType


@dataclass(frozen=True)
class CheckCtx:
    context: Context
    subject: Context
    level: int


Judgement = Union[CheckTerm, SynthTerm, CheckSubst, CheckType, SynthType, CheckCtx]


# ---------------------------------------------------------------------------
# Eta expansion


def eta_expand_var(v: Var, ct: ContextualType) -> BoundBody:
    """The fully applied form of a variable at a contextual type.

    Drives only on the Pi skeleton of the type, so dependencies are irrelevant.
    """
    hat = ct.context.hat(v.level)
    return BoundBody(hat, _expand_spine(VarClosure(v, id_subst(hat)), ct.type))


def _expand_spine(r: AtomicTerm, a: Type) -> Term:
    if not isinstance(a, Pi):
        return r
    z, dom, body = a.binder, a.domain, a.body
    taken = {u.name for u in occurring_vars(r)}
    if z.name in taken:
        z2 = fresh_var(z, taken | {u.name for u in occurring_vars(body)})
        body = rename_free(body, {z: z2})
        z = z2
    arg = eta_expand_var(z, dom)
    return Lam(z, _expand_spine(TermApp(r, arg), body))


# ---------------------------------------------------------------------------
# Eta-aware equality
#
# Structural alpha-equality everywhere, except that substitution entries may
# differ in eta: a renaming entry equals a term entry when the term is the
# expansion of the variable at the entry's declared type.  Deciding that needs
# the domain's declaration types, so the comparison threads a typing
# environment for the variables in scope (None for binders whose types are
# out of reach, such as hat binders).


class _EqState:
    __slots__ = ("left", "right", "depth", "types")

    def __init__(self, types):
        self.left: dict[Var, int] = {}
        self.right: dict[Var, int] = {}
        self.depth = 0
        self.types: dict[Var, Optional[ContextualType]] = types

    def bind(self, u: Var, v: Var, ctype: Optional[ContextualType]):
        saved = (self.left.get(u), self.right.get(v), self.types.get(u, _MISSING))
        self.left[u] = self.depth
        self.right[v] = self.depth
        self.types[u] = ctype
        self.depth += 1
        return saved

    def unbind(self, u: Var, v: Var, saved):
        lu, rv, ty = saved
        self.depth -= 1
        if lu is None:
            del self.left[u]
        else:
            self.left[u] = lu
        if rv is None:
            del self.right[v]
        else:
            self.right[v] = rv
        if ty is _MISSING:
            del self.types[u]
        else:
            self.types[u] = ty

    def var_equal(self, u: Var, v: Var) -> bool:
        lu = self.left.get(u)
        rv = self.right.get(v)
        if lu is None and rv is None:
            return u == v
        return lu is not None and lu == rv


_MISSING = object()


def _eq_type(a: Type, b: Type, st: _EqState) -> bool:
    match a, b:
        case SortRef(sort=s1), SortRef(sort=s2):
            return s1 == s2
        case TypeConst(name=n1), TypeConst(name=n2):
            return n1 == n2
        case TypeApp(head=h1, arg=a1), TypeApp(head=h2, arg=a2):
            return _eq_type(h1, h2, st) and _eq_bb(a1, a2, None, st)
        case Pi(binder=x1, domain=d1, body=b1), Pi(binder=x2, domain=d2, body=b2):
            if x1.level != x2.level:
                return False
            if not _eq_ctype(d1, d2, st):
                return False
            saved = st.bind(x1, x2, d1)
            ok = _eq_type(b1, b2, st)
            st.unbind(x1, x2, saved)
            return ok
        case _:
            return False


def _eq_ctype(a: ContextualType, b: ContextualType, st: _EqState) -> bool:
    if len(a.context.decls) != len(b.context.decls):
        return False
    saves = []
    pairs = []
    ok = True
    for d1, d2 in zip(a.context.decls, b.context.decls):
        if d1.var.level != d2.var.level or not _eq_ctype(d1.ctype, d2.ctype, st):
            ok = False
            break
        saves.append(st.bind(d1.var, d2.var, d1.ctype))
        pairs.append((d1.var, d2.var))
    if ok:
        ok = _eq_type(a.type, b.type, st)
    for (u, v), s in zip(reversed(pairs), reversed(saves)):
        st.unbind(u, v, s)
    return ok


def _eq_term(m: Term, n: Term, st: _EqState) -> bool:
    match m, n:
        case Lam(binder=x1, body=b1), Lam(binder=x2, body=b2):
            if x1.level != x2.level:
                return False
            saved = st.bind(x1, x2, None)
            ok = _eq_term(b1, b2, st)
            st.unbind(x1, x2, saved)
            return ok
        case (AtomicTerm() as r1), (AtomicTerm() as r2):
            return _eq_atomic_term(r1, r2, st)
        case _:
            return False


def _eq_atomic_term(r1, r2, st: _EqState) -> bool:
    match r1, r2:
        case TermConst(name=n1), TermConst(name=n2):
            return n1 == n2
        case TermApp(head=h1, arg=a1), TermApp(head=h2, arg=a2):
            return _eq_atomic_term(h1, h2, st) and _eq_bb(a1, a2, None, st)
        case VarClosure(var=v1, subst=s1), VarClosure(var=v2, subst=s2):
            if not st.var_equal(v1, v2):
                return False
            domain = st.types.get(v1)
            return _eq_subst(s1, s2, domain.context if domain else None, st)
        case _:
            return False


def _eq_bb(a: BoundBody, b: BoundBody, local: Optional[Context], st: _EqState) -> bool:
    """Compare bound bodies; binder types come from `local` when known."""
    if len(a.hat.binders) != len(b.hat.binders):
        return False
    if any(u.level != v.level for u, v in zip(a.hat.binders, b.hat.binders)):
        return False
    ctypes: list[Optional[ContextualType]]
    if local is not None and len(local.decls) == len(a.hat.binders):
        # Relabel the declaration types so references among locals use the
        # left-hand binder names (the dummy wrapper type is discarded).
        relabeled = rebind_contextual(
            ContextualType(SortRef(Sort.TYPE), local), a.hat.binders
        ).context
        ctypes = [d.ctype for d in relabeled.decls]
    else:
        ctypes = [None] * len(a.hat.binders)
    saves = []
    pairs = []
    for u, v, ct in zip(a.hat.binders, b.hat.binders, ctypes):
        saves.append(st.bind(u, v, ct))
        pairs.append((u, v))
    ok = _eq_term(a.body, b.body, st)
    for (u, v), s in zip(reversed(pairs), reversed(saves)):
        st.unbind(u, v, s)
    return ok


def _eq_subst(
    s1: Substitution, s2: Substitution, domain: Optional[Context], st: _EqState
) -> bool:
    if len(s1) != len(s2):
        return False
    if domain is not None and len(domain.decls) != len(s1.entries):
        domain = None
    for i, (e1, e2) in enumerate(zip(s1.entries, s2.entries)):
        decl = domain.decls[i] if domain is not None else None
        if not _eq_entry(e1, e2, decl, st):
            return False
    return True


def _eq_entry(e1, e2, decl: Optional[Decl], st: _EqState) -> bool:
    local = decl.ctype.context if decl is not None else None
    match e1, e2:
        case Rename(var=v1), Rename(var=v2):
            return st.var_equal(v1, v2)
        case TermEntry(body=b1), TermEntry(body=b2):
            return _eq_bb(b1, b2, local, st)
        case Rename(var=v1), TermEntry(body=b2):
            if decl is None:
                return False
            return _eq_bb(eta_expand_var(v1, decl.ctype), b2, local, st)
        case TermEntry(body=b1), Rename(var=v2):
            if decl is None:
                return False
            return _eq_bb(b1, eta_expand_var(v2, decl.ctype), local, st)
        case _:
            return False


def _types_of(psi: Context) -> dict[Var, Optional[ContextualType]]:
    return {d.var: d.ctype for d in psi.decls}


# ---------------------------------------------------------------------------
# The checker


class TypeChecker:
    """Checks judgements against a fixed, already validated signature.

    The checker holds no mutable state beyond an optional trace callback, so
    independent judgements may be checked concurrently against the same
    instance.
    """

    def __init__(self, sig: Signature, *, max_depth: int = DEFAULT_MAX_DEPTH, trace=None):
        self.sig = sig
        self.max_depth = max_depth
        self.trace = trace

    # -- public judgement entry points ------------------------------------

    def check_normal(self, psi: Context, m: Term, a: Type) -> None:
        self._check_normal(psi, m, a, (), self.max_depth)

    def synth_atomic(self, psi: Context, r: AtomicTerm) -> Type:
        return self._synth_atomic(psi, r, (), self.max_depth)

    def check_subst(self, psi: Context, sigma: Substitution, phi: Context) -> None:
        self._check_subst(psi, sigma, phi, (), self.max_depth)

    def check_type(self, psi: Context, a: Type, s: Sort) -> None:
        self._check_type(psi, a, s, (), self.max_depth)

    def synth_atomic_type(self, psi: Context, p: AtomicType) -> Type:
        return self._synth_atomic_type(psi, p, (), self.max_depth)

    def check_ctx(self, psi: Context, phi: Context, n: int) -> None:
        self._check_ctx(psi, phi, n, (), self.max_depth)

    def check(self, j: Judgement):
        """Run any judgement; synthesis judgements return the classifier."""
        match j:
            case CheckTerm(context=c, term=m, type=a):
                return self.check_normal(c, m, a)
            case SynthTerm(context=c, term=r):
                return self.synth_atomic(c, r)
            case CheckSubst(context=c, subst=s, domain=p):
                return self.check_subst(c, s, p)
            case CheckType(context=c, type=a, sort=s):
                return self.check_type(c, a, s)
            case SynthType(context=c, type=p):
                return self.synth_atomic_type(c, p)
            case CheckCtx(context=c, subject=p, level=n):
                return self.check_ctx(c, p, n)
            case _:
                raise TypeError(f"not a judgement: {j!r}")

    # -- equality ----------------------------------------------------------

    def equal_atomic(self, psi: Context, p: AtomicType, q: AtomicType) -> bool:
        return _eq_type(p, q, _EqState(_types_of(psi)))

    def equal_type(self, psi: Context, a: Type, b: Type) -> bool:
        return _eq_type(a, b, _EqState(_types_of(psi)))

    def equal_ctx_type(self, psi: Context, a: ContextualType, b: ContextualType) -> bool:
        return _eq_ctype(a, b, _EqState(_types_of(psi)))

    def equal_subst(
        self, psi: Context, s1: Substitution, s2: Substitution, domain: Context
    ) -> bool:
        return _eq_subst(s1, s2, domain, _EqState(_types_of(psi)))

    # -- internals ---------------------------------------------------------

    def _t(self, rule: str, detail: str):
        if self.trace is not None:
            self.trace(f"{rule}: {detail}")

    def _check_normal(self, psi, m, a, path, d):
        d = _spend(d)
        match m:
            case Lam(binder=y, body=body):
                if not isinstance(a, Pi):
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        f"function checked against the non-function type "
                        f"{printer.show_type(a)}",
                        path,
                        expected=printer.show_type(a),
                    )
                if y.level != a.binder.level:
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        f"binder {y!r} sits at level {y.level} but the type "
                        f"binds at level {a.binder.level}",
                        path,
                    )
                self._t("check-lam", printer.show_term(m))
                if y.name in psi.names():
                    y2 = fresh_var(y, psi.names() | {v.name for v in occurring_vars(body)})
                    body = rename_free(body, {y: y2})
                    y = y2
                b = a.body
                if a.binder != y:
                    b = rename_free(b, {a.binder: y})
                ctx2 = merge_ctx(psi, ctx_of(Decl(y, a.domain)))
                self._check_normal(ctx2, body, b, path + (f"\\{y.name}",), d)
            case AtomicTerm():
                if isinstance(a, Pi):
                    fail(
                        ErrorKind.NOT_ETA_LONG,
                        "atomic term checked against a function type; "
                        "canonical objects are fully applied",
                        path,
                        expected=printer.show_type(a),
                    )
                self._t("check-atomic", printer.show_term(m))
                p = self._synth_atomic(psi, m, path, d)
                if not self.equal_atomic(psi, p, a):
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        f"synthesized {printer.show_type(p)} but expected "
                        f"{printer.show_type(a)}",
                        path,
                        expected=printer.show_type(a),
                        actual=printer.show_type(p),
                    )
            case _:
                fail(ErrorKind.TYPE_MISMATCH, f"not a term: {m!r}", path)

    def _synth_atomic(self, psi, r, path, d):
        d = _spend(d)
        match r:
            case VarClosure(var=v, subst=sigma):
                self._t("synth-var", printer.show_term(r))
                try:
                    ct = lookup(psi, v)
                except KernelError as e:
                    raise KernelError(e.kind, e.message, path) from None
                self._check_subst(psi, sigma, ct.context, path + (f"{v!r}[..]",), d)
                return simsub_type(sigma, ct.context, ct.type, max_depth=d)
            case TermConst(name=c):
                self._t("synth-const", c)
                decl = self.sig.lookup(c)
                if decl is None:
                    fail(ErrorKind.UNBOUND_CONSTANT, f"constant {c} is not declared", path)
                if not isinstance(decl, TermConstDecl):
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        f"{c} is a type-family constant, not a term constant",
                        path,
                    )
                return decl.type
            case TermApp(head=h, arg=arg):
                self._t("synth-app", printer.show_term(r))
                head_ty = self._synth_atomic(psi, h, path + ("head",), d)
                if not isinstance(head_ty, Pi):
                    fail(
                        ErrorKind.NOT_PI,
                        f"applied a term of the non-function type "
                        f"{printer.show_type(head_ty)}",
                        path,
                        actual=printer.show_type(head_ty),
                    )
                bb, ct = self._check_app(psi, head_ty, arg, path, d)
                s = SingleSubst(bb, head_ty.binder, erase_contextual(ct))
                return hsub_type(s, head_ty.body, max_depth=d)
            case _:
                fail(ErrorKind.SUBST_FAILS, f"not an atomic term: {r!r}", path)

    def _check_app(self, psi, pi: Pi, arg: BoundBody, path, d):
        """Check an application argument against a Pi domain.

        The argument's local binders are renamed apart from the ambient
        context, the domain is rebound to those names, and the body is checked
        in the chopped-and-merged context.  Returns the aligned argument and
        the aligned domain.
        """
        n = pi.binder.level
        phi = pi.domain.context
        if len(arg.hat.binders) != len(phi.decls):
            fail(
                ErrorKind.ARITY_MISMATCH,
                f"argument binds {len(arg.hat.binders)} locals but the function "
                f"expects {len(phi.decls)}",
                path + ("arg",),
            )
        for u, dc in zip(arg.hat.binders, phi.decls):
            if u.level != dc.var.level:
                fail(
                    ErrorKind.LEVEL_VIOLATION,
                    f"argument binder {u!r} does not match the expected "
                    f"level {dc.var.level}",
                    path + ("arg",),
                )
        chopped = chop_ctx(psi, n)
        binders = list(arg.hat.binders)
        body = arg.body
        for i, u in enumerate(binders):
            if u.name in chopped.names():
                avoid = set(chopped.names())
                avoid |= {v.name for v in occurring_vars(body)}
                avoid |= {v.name for v in binders}
                u2 = fresh_var(u, avoid)
                body = rename_free(body, {u: u2})
                binders[i] = u2
        binders = tuple(binders)
        ct = rebind_contextual(pi.domain, binders)
        ctx2 = merge_ctx(chopped, ct.context)
        self._check_normal(ctx2, body, ct.type, path + ("arg",), d)
        return BoundBody(HatContext(binders, n), body), ct

    def _check_subst(self, psi, sigma, phi, path, d):
        d = _spend(d)
        if len(sigma.entries) != len(phi.decls):
            fail(
                ErrorKind.ARITY_MISMATCH,
                f"substitution has {len(sigma.entries)} entries for a domain "
                f"of {len(phi.decls)} declarations",
                path,
            )
        self._t("check-subst", f"[{printer.show_subst(sigma)}]")
        for i, (entry, decl) in enumerate(zip(sigma.entries, phi.decls)):
            prefix = Substitution(sigma.entries[:i])
            phi_prefix = Context(phi.decls[:i])
            k = decl.var.level
            step = (f"entry {i + 1}",)
            match entry:
                case Rename(var=y):
                    if y.level != k:
                        fail(
                            ErrorKind.LEVEL_VIOLATION,
                            f"entry {y!r} renames a level-{k} declaration",
                            path + step,
                        )
                    try:
                        actual = lookup(psi, y)
                    except KernelError as e:
                        raise KernelError(e.kind, e.message, path + step) from None
                    expected = simsub_contextual(
                        prefix, phi_prefix, decl.ctype, k, max_depth=d
                    )
                    if not self.equal_ctx_type(psi, actual, expected):
                        fail(
                            ErrorKind.TYPE_MISMATCH,
                            f"{y!r} is declared at "
                            f"{printer.show_ctype(actual)} but the domain needs "
                            f"{printer.show_ctype(expected)}",
                            path + step,
                            expected=printer.show_ctype(expected),
                            actual=printer.show_ctype(actual),
                        )
                case TermEntry(body=bb):
                    gamma = decl.ctype.context
                    if len(bb.hat.binders) != len(gamma.decls):
                        fail(
                            ErrorKind.ARITY_MISMATCH,
                            f"entry binds {len(bb.hat.binders)} locals but the "
                            f"declaration has {len(gamma.decls)}",
                            path + step,
                        )
                    for u, dc in zip(bb.hat.binders, gamma.decls):
                        if u.level != dc.var.level:
                            fail(
                                ErrorKind.LEVEL_VIOLATION,
                                f"entry binder {u!r} does not match the "
                                f"declared level {dc.var.level}",
                                path + step,
                            )
                    chopped_psi = chop_ctx(psi, k)
                    sig_k, phi_k = chop_subst(prefix, phi_prefix, k)
                    forbidden = (
                        chopped_psi.names()
                        | phi_prefix.names()
                        | {v.name for e in sig_k.entries for v in _entry_vars(e)}
                    )
                    binders = list(bb.hat.binders)
                    body = bb.body
                    for j, u in enumerate(binders):
                        if u.name in forbidden:
                            avoid = set(forbidden)
                            avoid |= {v.name for v in occurring_vars(body)}
                            avoid |= {v.name for v in binders}
                            u2 = fresh_var(u, avoid)
                            body = rename_free(body, {u: u2})
                            binders[j] = u2
                    binders = tuple(binders)
                    aligned = rebind_contextual(decl.ctype, binders)
                    gamma_sub = simsub_ctx(prefix, phi_prefix, aligned.context, max_depth=d)
                    sig2, dom2 = merge_subst(
                        sig_k,
                        phi_k,
                        id_subst(HatContext(binders, k)),
                        aligned.context,
                    )
                    expected = simsub_type(sig2, dom2, aligned.type, max_depth=d)
                    ctx2 = merge_ctx(chopped_psi, gamma_sub)
                    self._check_normal(ctx2, body, expected, path + step, d)

    def _check_type(self, psi, a, s, path, d):
        d = _spend(d)
        match a:
            case SortRef(sort=Sort.TYPE):
                self._t("check-sort", "type")
                if s is not Sort.KIND:
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        "the sort `type` classifies only as a kind",
                        path,
                    )
            case SortRef(sort=Sort.KIND):
                fail(ErrorKind.TYPE_MISMATCH, "`kind` is not a classifier", path)
            case AtomicType():
                self._t("check-atomic-type", printer.show_type(a))
                k = self._synth_atomic_type(psi, a, path, d)
                want = SortRef(Sort.TYPE) if s is Sort.TYPE else None
                if want is None:
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        f"{printer.show_type(a)} is a type, not a kind",
                        path,
                    )
                if not self.equal_type(psi, k, want):
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        f"{printer.show_type(a)} has kind {printer.show_type(k)}, "
                        "not `type`",
                        path,
                        expected="type",
                        actual=printer.show_type(k),
                    )
            case Pi(binder=x, domain=dom, body=b):
                self._t("check-pi", printer.show_type(a))
                n = x.level
                dom = freshen_decl_names(dom, psi.names())
                self._check_ctx(psi, dom.context, n, path + ("domain context",), d)
                inner = merge_ctx(chop_ctx(psi, n), dom.context)
                self._check_type(inner, dom.type, Sort.TYPE, path + ("domain",), d)
                if x.name in psi.names():
                    x2 = fresh_var(x, psi.names() | {v.name for v in occurring_vars(b)})
                    b = rename_free(b, {x: x2})
                    x = x2
                ctx2 = merge_ctx(psi, ctx_of(Decl(x, dom)))
                self._check_type(ctx2, b, s, path + (f"{{{x.name}}}",), d)
            case _:
                fail(ErrorKind.NOT_A_TYPE, f"not a type: {a!r}", path)

    def _synth_atomic_type(self, psi, p, path, d):
        d = _spend(d)
        match p:
            case SortRef():
                fail(
                    ErrorKind.NOT_A_TYPE,
                    "sorts synthesize no kind",
                    path,
                )
            case TypeConst(name=name):
                self._t("synth-type-const", name)
                decl = self.sig.lookup(name)
                if decl is None:
                    fail(
                        ErrorKind.UNBOUND_CONSTANT,
                        f"type constant {name} is not declared",
                        path,
                    )
                if not isinstance(decl, TypeConstDecl):
                    fail(
                        ErrorKind.TYPE_MISMATCH,
                        f"{name} is a term constant, not a type family",
                        path,
                    )
                return decl.kind
            case TypeApp(head=h, arg=arg):
                self._t("synth-type-app", printer.show_type(p))
                head_kind = self._synth_atomic_type(psi, h, path + ("head",), d)
                if not isinstance(head_kind, Pi):
                    fail(
                        ErrorKind.NOT_PI,
                        f"applied a family of the non-function kind "
                        f"{printer.show_type(head_kind)}",
                        path,
                        actual=printer.show_type(head_kind),
                    )
                bb, ct = self._check_app(psi, head_kind, arg, path, d)
                s = SingleSubst(bb, head_kind.binder, erase_contextual(ct))
                return hsub_type(s, head_kind.body, max_depth=d)
            case _:
                fail(ErrorKind.NOT_A_TYPE, f"not an atomic type: {p!r}", path)

    def _check_ctx(self, psi, phi, n, path, d):
        d = _spend(d)
        self._t("check-ctx", f"{printer.show_ctx(phi)} at {n}")
        if not well_sorted(phi):
            fail(
                ErrorKind.ILL_FORMED_CONTEXT,
                f"context {printer.show_ctx(phi)} is not sorted by level",
                path,
            )
        for i, decl in enumerate(phi.decls):
            k = decl.var.level
            step = (f"decl {decl.var.name}",)
            if k >= n:
                fail(
                    ErrorKind.LEVEL_VIOLATION,
                    f"declaration {decl.var!r} sits at level {k}, not below {n}",
                    path + step,
                )
            base = merge_ctx(chop_ctx(psi, n), chop_ctx(Context(phi.decls[:i]), k))
            ct = freshen_decl_names(decl.ctype, base.names())
            self._check_ctx(base, ct.context, k, path + step, d)
            self._check_type(
                merge_ctx(base, ct.context), ct.type, Sort.TYPE, path + step, d
            )


def _entry_vars(e):
    match e:
        case Rename(var=v):
            return {v}
        case TermEntry(body=bb):
            return set(occurring_vars(bb))
    return set()


def check_signature(
    sig: Signature, *, max_depth: int = DEFAULT_MAX_DEPTH, trace=None
) -> Signature:
    """Validate a signature declaration by declaration against its prefix."""
    acc = EMPTY_SIG
    for decl in sig.decls:
        tc = TypeChecker(acc, max_depth=max_depth, trace=trace)
        try:
            match decl:
                case TypeConstDecl(name=name, kind=k):
                    tc.check_type(EMPTY_CTX, k, Sort.KIND)
                case TermConstDecl(name=name, type=a):
                    tc.check_type(EMPTY_CTX, a, Sort.TYPE)
                case _:
                    raise TypeError(f"not a signature declaration: {decl!r}")
        except KernelError as e:
            raise e.at(f"declaration {decl.name}") from None
        acc = acc.extend(decl)
    return acc
