"""Independent ground truth for hereditary substitution, plus generators.

The oracle works in a tiny non-canonical lambda calculus where redices are
representable: canonical terms are embedded by flattening closures into spine
applications (a meta-variable closure becomes the variable applied to its
substitution entries), substitution is the naive capture-avoiding one, and
normalization is leftmost-outermost beta reduction with a step budget.
Reading a beta-normal raw term back into canonical syntax is type-directed.

The generators produce well-typed-by-construction instances by running the
typing rules generatively; every emitted instance is verified by the checker.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Union

from .contexts import chop_ctx, merge_ctx
from .errors import KernelError
from .hsubst import hsub_type, simsub_contextual, simsub_type, single_subst
from .syntax import (
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
    EMPTY_SUBST,
    alpha_equal,
    ctx_of,
    fresh_var,
    rebind_contextual,
    rename_free,
)
from .typer import TypeChecker, check_signature, eta_expand_var


class OracleError(Exception):
    pass


class NotNormal(OracleError):
    pass


class BudgetExceeded(OracleError):
    pass


# ---------------------------------------------------------------------------
# Raw terms


@dataclass(frozen=True)
class RVar:
    var: Var


@dataclass(frozen=True)
class RConst:
    name: str


@dataclass(frozen=True)
class RLam:
    binder: Var
    body: "RawTerm"


@dataclass(frozen=True)
class RApp:
    fn: "RawTerm"
    arg: "RawTerm"


RawTerm = Union[RVar, RConst, RLam, RApp]


def closure(v: Var, args: list) -> RawTerm:
    """A closure, flattened to a spine application over the variable."""
    out: RawTerm = RVar(v)
    for a in args:
        out = RApp(out, a)
    return out


def raw_free(r: RawTerm) -> frozenset[Var]:
    match r:
        case RVar(var=v):
            return frozenset((v,))
        case RConst():
            return frozenset()
        case RLam(binder=x, body=b):
            return raw_free(b) - {x}
        case RApp(fn=f, arg=a):
            return raw_free(f) | raw_free(a)


def raw_names(r: RawTerm) -> set[str]:
    match r:
        case RVar(var=v):
            return {v.name}
        case RConst():
            return set()
        case RLam(binder=x, body=b):
            return raw_names(b) | {x.name}
        case RApp(fn=f, arg=a):
            return raw_names(f) | raw_names(a)


def raw_alpha_equal(a: RawTerm, b: RawTerm) -> bool:
    def go(a, b, env_l, env_r, depth):
        match a, b:
            case RVar(var=u), RVar(var=v):
                lu, rv = env_l.get(u), env_r.get(v)
                if lu is None and rv is None:
                    return u == v
                return lu is not None and lu == rv
            case RConst(name=n1), RConst(name=n2):
                return n1 == n2
            case RLam(binder=x, body=bx), RLam(binder=y, body=by):
                if x.level != y.level:
                    return False
                return go(
                    bx, by, {**env_l, x: depth}, {**env_r, y: depth}, depth + 1
                )
            case RApp(fn=f1, arg=a1), RApp(fn=f2, arg=a2):
                return go(f1, f2, env_l, env_r, depth) and go(
                    a1, a2, env_l, env_r, depth
                )
            case _:
                return False

    return go(a, b, {}, {}, 0)


# ---------------------------------------------------------------------------
# Embedding


def embed(m: Term) -> RawTerm:
    match m:
        case Lam(binder=x, body=b):
            return RLam(x, embed(b))
        case TermConst(name=c):
            return RConst(c)
        case VarClosure(var=v, subst=s):
            return closure(v, [_embed_entry(e) for e in s.entries])
        case TermApp(head=h, arg=bb):
            return RApp(embed(h), embed_bound(bb))
        case _:
            raise TypeError(f"cannot embed {m!r}")


def _embed_entry(e) -> RawTerm:
    match e:
        case Rename(var=v):
            return RVar(v)
        case TermEntry(body=bb):
            return embed_bound(bb)


def embed_bound(bb: BoundBody) -> RawTerm:
    out = embed(bb.body)
    for v in reversed(bb.hat.binders):
        out = RLam(v, out)
    return out


# ---------------------------------------------------------------------------
# Naive substitution and normalization


def naive_subst(r: RawTerm, v: Var, s: RawTerm) -> RawTerm:
    match r:
        case RVar(var=u):
            return s if u == v else r
        case RConst():
            return r
        case RApp(fn=f, arg=a):
            return RApp(naive_subst(f, v, s), naive_subst(a, v, s))
        case RLam(binder=x, body=b):
            if x == v:
                return r
            if x in raw_free(s) and v in raw_free(b):
                x2 = fresh_var(x, raw_names(b) | raw_names(s) | {v.name})
                b = naive_subst(b, x, RVar(x2))
                x = x2
            return RLam(x, naive_subst(b, v, s))


def _step(r: RawTerm) -> Optional[RawTerm]:
    """One leftmost-outermost beta step, or None if r is normal."""
    match r:
        case RApp(fn=RLam(binder=x, body=b), arg=a):
            return naive_subst(b, x, a)
        case RApp(fn=f, arg=a):
            f2 = _step(f)
            if f2 is not None:
                return RApp(f2, a)
            a2 = _step(a)
            if a2 is not None:
                return RApp(f, a2)
            return None
        case RLam(binder=x, body=b):
            b2 = _step(b)
            return None if b2 is None else RLam(x, b2)
        case _:
            return None


def beta_normalize(r: RawTerm, budget: int = 20000) -> RawTerm:
    steps = 0
    while True:
        r2 = _step(r)
        if r2 is None:
            return r
        r = r2
        steps += 1
        if steps > budget:
            raise BudgetExceeded(f"no normal form after {budget} steps")


def naive_subst_normalize(r: RawTerm, v: Var, s: RawTerm, budget: int = 20000):
    """Capture-avoiding substitution followed by beta-normalization."""
    return beta_normalize(naive_subst(r, v, s), budget)


# ---------------------------------------------------------------------------
# Readback


def _unwind(r: RawTerm):
    args = []
    while isinstance(r, RApp):
        args.append(r.arg)
        r = r.fn
    args.reverse()
    return r, args


def readback(
    r: RawTerm, a: Type, env: dict[Var, ContextualType], sig: Signature
) -> Term:
    """Read a beta-normal raw term back at a type, eta-expanding as needed."""
    if isinstance(a, Pi):
        if isinstance(r, RLam):
            z = r.binder
            if z.level != a.binder.level:
                raise NotNormal(
                    f"binder {z!r} does not match level {a.binder.level}"
                )
            body_raw = r.body
            if z in env:
                z2 = fresh_var(z, {v.name for v in env} | raw_names(r.body))
                body_raw = naive_subst(body_raw, z, RVar(z2))
                z = z2
            body_ty = a.body
            if a.binder != z:
                body_ty = rename_free(body_ty, {a.binder: z})
            env2 = dict(env)
            env2[z] = a.domain
            return Lam(z, readback(body_raw, body_ty, env2, sig))
        z = fresh_var(a.binder, {v.name for v in env} | raw_names(r))
        expanded = RLam(z, RApp(r, embed_bound(eta_expand_var(z, a.domain))))
        return readback(expanded, a, env, sig)
    head, args = _unwind(r)
    match head:
        case RConst(name=c):
            decl = sig.lookup(c)
            if not isinstance(decl, TermConstDecl):
                raise NotNormal(f"unknown constant {c}")
            return _readback_spine(TermConst(c), decl.type, args, env, sig)
        case RVar(var=v):
            ct = env.get(v)
            if ct is None:
                raise NotNormal(f"unbound variable {v!r}")
            arity = len(ct.context.decls)
            if len(args) < arity:
                raise NotNormal(f"{v!r} is applied to too few locals")
            entries = []
            for i, decl in enumerate(ct.context.decls):
                prefix = Substitution(tuple(entries))
                phi_prefix = Context(ct.context.decls[:i])
                expected = simsub_contextual(
                    prefix, phi_prefix, decl.ctype, decl.var.level
                )
                entries.append(
                    TermEntry(
                        _readback_bound(args[i], expected, decl.var.level, env, sig)
                    )
                )
            sigma = Substitution(tuple(entries))
            r0 = VarClosure(v, sigma)
            ty = simsub_type(sigma, ct.context, ct.type)
            return _readback_spine(r0, ty, args[arity:], env, sig)
        case RLam():
            raise NotNormal("beta redex in readback")
    raise NotNormal(f"cannot read back {r!r}")


def _readback_spine(head, ty: Type, args, env, sig) -> Term:
    for raw_arg in args:
        if not isinstance(ty, Pi):
            raise NotNormal("over-applied spine")
        bb = _readback_bound(raw_arg, ty.domain, ty.binder.level, env, sig)
        head = TermApp(head, bb)
        ty = hsub_type(single_subst(bb, ty.binder, ty.domain), ty.body)
    if isinstance(ty, Pi):
        raise NotNormal("under-applied spine at function type")
    return head


def _readback_bound(
    r: RawTerm, ct: ContextualType, level: int, env, sig
) -> BoundBody:
    binders: list[Var] = []
    body = r
    for decl in ct.context.decls:
        if isinstance(body, RLam):
            z = body.binder
            inner = body.body
            if z in env or z in binders:
                z2 = fresh_var(
                    z, {v.name for v in env} | {b.name for b in binders} | raw_names(inner)
                )
                inner = naive_subst(inner, z, RVar(z2))
                z = z2
            binders.append(z)
            body = inner
        else:
            z = fresh_var(
                decl.var, {v.name for v in env} | {b.name for b in binders} | raw_names(body)
            )
            body = RApp(body, embed_bound(eta_expand_var(z, decl.ctype)))
            body = beta_normalize(body)
            binders.append(z)
    aligned = rebind_contextual(ct, tuple(binders))
    env2 = dict(env)
    for d in aligned.context.decls:
        env2[d.var] = d.ctype
    hat = HatContext(tuple(binders), level)
    return BoundBody(hat, readback(body, aligned.type, env2, sig))


# ---------------------------------------------------------------------------
# The generator signature: two base types, a dependent family, and constants


def base_signature() -> Signature:
    i = TypeConst("i")
    o = TypeConst("o")
    x0, y0, u0 = Var("x", 0), Var("y", 0), Var("u", 0)
    ct = lambda t, c=EMPTY_CTX: ContextualType(t, c)
    q_of = lambda v: TypeApp(
        TypeConst("q"), BoundBody(HatContext((), 0), VarClosure(v, EMPTY_SUBST))
    )
    return check_signature(
        Signature(
            (
                TypeConstDecl("i", SortRef(Sort.TYPE)),
                TypeConstDecl("o", SortRef(Sort.TYPE)),
                TypeConstDecl("q", Pi(x0, ct(i), SortRef(Sort.TYPE))),
                TermConstDecl("cc", i),
                TermConstDecl("dd", o),
                TermConstDecl("ff", Pi(x0, ct(i), i)),
                TermConstDecl("gg", Pi(x0, ct(i), Pi(y0, ct(o), i))),
                TermConstDecl("kk", Pi(y0, ct(o), o)),
                TermConstDecl("hh", Pi(u0, ct(Pi(x0, ct(i), i)), i)),
                TermConstDecl("mk", Pi(x0, ct(i), q_of(x0))),
            )
        )
    )


BASE_SIGNATURE = base_signature()


@dataclass(frozen=True)
class Instance:
    sig: Signature
    ctx: Context
    term: Term
    type: Type


@dataclass(frozen=True)
class SubstInstance:
    """A well-typed single-substitution scenario.

    ``ctx`` does not contain the target; the subject checks in ``ctx`` merged
    with the target's declaration, and the replacement body checks in the
    chopped context merged with the annotation's local context.
    """

    sig: Signature
    ctx: Context
    target: Var
    annotation: ContextualType
    replacement: BoundBody
    subject: Term
    subject_type: Type

    @property
    def extended_ctx(self) -> Context:
        return merge_ctx(self.ctx, ctx_of(Decl(self.target, self.annotation)))


class DeadEnd(Exception):
    pass


class Generator:
    """Seeded generator of well-typed instances."""

    def __init__(
        self,
        seed: int,
        *,
        size: int = 8,
        level: int = 2,
        allow_renames: bool = True,
        allow_dependent: bool = True,
        sig: Optional[Signature] = None,
    ):
        self.rng = random.Random(seed)
        self.size = size
        self.level = level
        self.allow_renames = allow_renames
        self.allow_dependent = allow_dependent
        self.sig = sig if sig is not None else BASE_SIGNATURE
        self.tc = TypeChecker(self.sig)
        self._names = 0
        self.prefer: Optional[Var] = None

    # -- naming ------------------------------------------------------------

    def fresh(self, level: int, hint: str = "v") -> Var:
        self._names += 1
        return Var(f"{hint}{self._names}", level)

    # -- types -------------------------------------------------------------

    def gen_base(self, psi: Context, fuel: int, leaf: Optional[Type] = None) -> Type:
        if leaf is not None and self.rng.random() < 0.8:
            return leaf
        roll = self.rng.random()
        if self.allow_dependent and roll < 0.25 and fuel > 1:
            dep = self.gen_check(psi, TypeConst("i"), max(1, fuel // 3))
            return TypeApp(TypeConst("q"), BoundBody(HatContext((), 0), dep))
        return TypeConst(self.rng.choice(("i", "o")))

    def gen_type(
        self,
        psi: Context,
        fuel: int,
        pi_budget: int,
        level_bound: int,
        leaf: Optional[Type] = None,
    ) -> Type:
        if pi_budget <= 0 or self.rng.random() < 0.45:
            return self.gen_base(psi, fuel, leaf)
        lvl = self.rng.randrange(0, max(1, level_bound))
        dom = self.gen_ctype(psi, lvl, max(1, fuel // 2))
        binder = self.fresh(lvl)
        inner = merge_ctx(psi, ctx_of(Decl(binder, dom)))
        return Pi(
            binder, dom, self.gen_type(inner, fuel, pi_budget - 1, level_bound, leaf)
        )

    def gen_ctype(self, psi: Context, level: int, fuel: int) -> ContextualType:
        chopped = chop_ctx(psi, level)
        local = self.gen_context(chopped, max_decls=2 if level else 0, level_bound=level)
        merged = merge_ctx(chopped, local)
        pi_budget = 1 if self.rng.random() < 0.3 else 0
        ty = self.gen_type(merged, fuel, pi_budget, level_bound=max(1, level))
        return ContextualType(ty, local)

    def gen_context(self, psi: Context, max_decls: int, level_bound: int) -> Context:
        # Declaration types may only see the ambient chopped at the context's
        # bound, mirroring the well-formedness rule.
        if level_bound <= 0 or max_decls <= 0:
            return EMPTY_CTX
        count = self.rng.randrange(0, max_decls + 1)
        decls: list[Decl] = []
        acc = chop_ctx(psi, level_bound)
        levels = sorted(
            (self.rng.randrange(0, level_bound) for _ in range(count)), reverse=True
        )
        for lvl in levels:
            ct = self.gen_ctype(acc, lvl, 2)
            v = self.fresh(lvl)
            d = Decl(v, ct)
            decls.append(d)
            acc = merge_ctx(acc, ctx_of(d))
        return Context(tuple(decls))

    # -- terms ---------------------------------------------------------------

    def gen_check(self, psi: Context, a: Type, fuel: int) -> Term:
        if isinstance(a, Pi):
            binder = a.binder
            if binder.name in psi.names():
                binder = self.fresh(binder.level)
            body_ty = a.body
            if binder != a.binder:
                body_ty = rename_free(body_ty, {a.binder: binder})
            inner = merge_ctx(psi, ctx_of(Decl(binder, a.domain)))
            return Lam(binder, self.gen_check(inner, body_ty, fuel))
        return self.gen_atomic(psi, a, fuel)

    def _target_base(self, t: Type):
        while isinstance(t, Pi):
            t = t.body
        while isinstance(t, TypeApp):
            t = t.head
        return t

    def gen_atomic(self, psi: Context, a: Type, fuel: int) -> Term:
        want = self._target_base(a)
        # A dependent family is matched by its forced constructor.
        if isinstance(a, TypeApp) and isinstance(want, TypeConst) and want.name == "q":
            return TermApp(TermConst("mk"), BoundBody(HatContext((), 0), a.arg.body))
        candidates: list = []
        for d in self.sig.decls:
            if isinstance(d, TermConstDecl) and alpha_equal(
                self._target_base(d.type), want
            ):
                cost = self._arity(d.type)
                if cost == 0 or fuel > cost:
                    candidates.append(("const", d))
        for decl in psi.decls:
            base = self._target_base(decl.ctype.type)
            if isinstance(base, TypeConst) and alpha_equal(base, want):
                cost = self._arity(decl.ctype.type) + len(decl.ctype.context.decls)
                if cost == 0 or fuel > cost:
                    # Several var candidates make closures likelier than consts.
                    candidates.append(("var", decl))
                    candidates.append(("var", decl))
        if not candidates:
            raise DeadEnd(f"no candidate for {a!r}")
        preferred = [
            c for c in candidates if c[0] == "var" and c[1].var == self.prefer
        ]
        if preferred and self.rng.random() < 0.85:
            kind, pick = preferred[0]
        else:
            kind, pick = self.rng.choice(candidates)
        if kind == "const":
            cost = self._arity(pick.type)
            return self._finish_spine(
                psi, TermConst(pick.name), pick.type, a, max(0, fuel - max(1, cost))
            )
        cost = self._arity(pick.ctype.type) + len(pick.ctype.context.decls)
        return self._var_head(psi, pick, a, max(0, fuel - max(1, cost)))

    def _arity(self, t: Type) -> int:
        n = 0
        while isinstance(t, Pi):
            n += 1
            t = t.body
        return n

    def _var_head(self, psi: Context, decl: Decl, a: Type, fuel: int) -> Term:
        entries: list = []
        phi = decl.ctype.context
        for i, d in enumerate(phi.decls):
            prefix = Substitution(tuple(entries))
            phi_prefix = Context(phi.decls[:i])
            expected = simsub_contextual(prefix, phi_prefix, d.ctype, d.var.level)
            entry = None
            if self.allow_renames and self.rng.random() < 0.8:
                options = [
                    w.var
                    for w in psi.decls
                    if w.var.level == d.var.level
                    and self.tc.equal_ctx_type(psi, w.ctype, expected)
                ]
                if options:
                    entry = Rename(self.rng.choice(options))
            if entry is None:
                k = d.var.level
                fresh_names = tuple(
                    self.fresh(dc.var.level) for dc in expected.context.decls
                )
                aligned = rebind_contextual(expected, fresh_names)
                inner = merge_ctx(chop_ctx(psi, k), aligned.context)
                body = self.gen_check(inner, aligned.type, fuel)
                entry = TermEntry(BoundBody(HatContext(fresh_names, k), body))
            entries.append(entry)
        sigma = Substitution(tuple(entries))
        head = VarClosure(decl.var, sigma)
        ty = simsub_type(sigma, phi, decl.ctype.type)
        return self._finish_spine(psi, head, ty, a, fuel)

    def _finish_spine(self, psi: Context, head, ty: Type, a: Type, fuel: int) -> Term:
        while isinstance(ty, Pi):
            n = ty.binder.level
            fresh_names = tuple(
                self.fresh(dc.var.level) for dc in ty.domain.context.decls
            )
            aligned = rebind_contextual(ty.domain, fresh_names)
            inner = merge_ctx(chop_ctx(psi, n), aligned.context)
            body = self.gen_check(inner, aligned.type, fuel)
            bb = BoundBody(HatContext(fresh_names, n), body)
            head = TermApp(head, bb)
            ty = hsub_type(single_subst(bb, ty.binder, ty.domain), ty.body)
        if not self.tc.equal_type(psi, ty, a):
            raise DeadEnd("spine target does not match")
        return head

    # -- instances -----------------------------------------------------------

    def instance(self, max_tries: int = 60) -> Instance:
        for attempt in range(max_tries):
            try:
                psi = self.gen_context(
                    EMPTY_CTX, max_decls=3, level_bound=self.level + 1
                )
                ty = self.gen_type(
                    psi,
                    self.size,
                    pi_budget=self.rng.randrange(0, 2),
                    level_bound=self.level + 1,
                )
                term = self.gen_check(psi, ty, self.size)
                return Instance(self.sig, psi, term, ty)
            except (DeadEnd, KernelError):
                continue
        raise DeadEnd("no instance after retries")

    def gen_subst_for(self, psi: Context, phi: Context) -> Substitution:
        """A substitution with range psi and the given (checked) domain."""
        entries: list = []
        for idx, d in enumerate(phi.decls):
            prefix = Substitution(tuple(entries))
            phi_prefix = Context(phi.decls[:idx])
            expected = simsub_contextual(prefix, phi_prefix, d.ctype, d.var.level)
            entry = None
            if self.allow_renames and self.rng.random() < 0.5:
                options = [
                    w.var
                    for w in psi.decls
                    if w.var.level == d.var.level
                    and self.tc.equal_ctx_type(psi, w.ctype, expected)
                ]
                if options:
                    entry = Rename(self.rng.choice(options))
            if entry is None:
                k = d.var.level
                fresh_names = tuple(
                    self.fresh(dc.var.level) for dc in expected.context.decls
                )
                aligned = rebind_contextual(expected, fresh_names)
                inner = merge_ctx(chop_ctx(psi, k), aligned.context)
                body = self.gen_check(inner, aligned.type, self.size // 2)
                entry = TermEntry(BoundBody(HatContext(fresh_names, k), body))
            entries.append(entry)
        return Substitution(tuple(entries))

    def subst_instance(
        self, max_tries: int = 80, target_level: Optional[int] = None
    ) -> SubstInstance:
        for attempt in range(max_tries):
            try:
                n = (
                    target_level
                    if target_level is not None
                    else self.rng.randrange(0, self.level + 1)
                )
                psi = self.gen_context(EMPTY_CTX, max_decls=2, level_bound=self.level + 1)
                annotation = self.gen_ctype(psi, n, max(2, self.size // 2))
                target = self.fresh(n, hint="t")
                extended = merge_ctx(psi, ctx_of(Decl(target, annotation)))
                leaf = self._target_base(annotation.type)
                if not isinstance(leaf, TypeConst) or leaf.name == "q":
                    leaf = None
                subject_ty = self.gen_type(
                    extended,
                    self.size,
                    self.rng.randrange(0, 2),
                    self.level + 1,
                    leaf=leaf,
                )
                self.prefer = target
                try:
                    subject = self.gen_check(extended, subject_ty, self.size)
                finally:
                    self.prefer = None
                repl_ctx = merge_ctx(chop_ctx(psi, n), annotation.context)
                repl_body = self.gen_check(repl_ctx, annotation.type, self.size)
                hat = HatContext(annotation.context.vars(), n)
                return SubstInstance(
                    self.sig,
                    psi,
                    target,
                    annotation,
                    BoundBody(hat, repl_body),
                    subject,
                    subject_ty,
                )
            except (DeadEnd, KernelError):
                continue
        raise DeadEnd("no substitution instance after retries")


def generate_instance(seed: int, size: int = 8, level: int = 2, **kw):
    """A well-typed (signature, context, term, type) quadruple, seeded."""
    gen = Generator(seed, size=size, level=level, **kw)
    inst = gen.instance()
    return inst.sig, inst.ctx, inst.term, inst.type


# ---------------------------------------------------------------------------
# Arbitrary (not necessarily well-typed) syntax for totality fuzzing


class RawGen:
    """Structurally valid but otherwise unconstrained syntax."""

    def __init__(self, seed: int, max_level: int = 2):
        self.rng = random.Random(seed)
        self.max_level = max_level
        self._n = 0

    def var(self) -> Var:
        return Var(
            self.rng.choice("xyzw") + str(self.rng.randrange(0, 3)),
            self.rng.randrange(0, self.max_level + 1),
        )

    def name(self) -> str:
        return self.rng.choice(("i", "o", "cc", "ff", "gg", "zz"))

    def term(self, depth: int) -> Term:
        if depth <= 0:
            return self.rng.choice((TermConst(self.name()), VarClosure(self.var(), EMPTY_SUBST)))
        match self.rng.randrange(0, 4):
            case 0:
                return Lam(self.var(), self.term(depth - 1))
            case 1:
                return TermApp(
                    self.atomic(depth - 1), self.bound_body(depth - 1)
                )
            case 2:
                return VarClosure(self.var(), self.subst(depth - 1))
            case _:
                return TermConst(self.name())

    def atomic(self, depth: int):
        if depth <= 0 or self.rng.random() < 0.5:
            return self.rng.choice(
                (TermConst(self.name()), VarClosure(self.var(), EMPTY_SUBST))
            )
        return TermApp(self.atomic(depth - 1), self.bound_body(depth - 1))

    def bound_body(self, depth: int) -> BoundBody:
        binders = []
        names = set()
        for _ in range(self.rng.randrange(0, 3)):
            v = self.var()
            if v.name not in names:
                names.add(v.name)
                binders.append(v)
        bound = self.rng.randrange(0, self.max_level + 1)
        return BoundBody(HatContext(tuple(binders), bound), self.term(depth))

    def subst(self, depth: int) -> Substitution:
        entries = []
        for _ in range(self.rng.randrange(0, 3)):
            if self.rng.random() < 0.5:
                entries.append(Rename(self.var()))
            else:
                entries.append(TermEntry(self.bound_body(depth)))
        return Substitution(tuple(entries))

    def type(self, depth: int) -> Type:
        if depth <= 0 or self.rng.random() < 0.5:
            t: Type = TypeConst(self.rng.choice(("i", "o", "q", "zz")))
            if self.rng.random() < 0.4:
                t = TypeApp(t, self.bound_body(depth - 1))
            return t
        v = self.var()
        return Pi(
            v,
            ContextualType(self.type(depth - 1), self.context(depth - 1, v.level)),
            self.type(depth - 1),
        )

    def context(self, depth: int, level_bound: Optional[int] = None) -> Context:
        decls = []
        names = set()
        bound = self.max_level if level_bound is None else level_bound
        for _ in range(self.rng.randrange(0, 3)):
            v = self.var()
            if bound and v.level >= bound:
                v = Var(v.name, self.rng.randrange(0, bound) if bound else 0)
            if bound == 0:
                continue
            if v.name in names:
                continue
            names.add(v.name)
            decls.append(
                Decl(v, ContextualType(self.type(depth - 1), self.context(depth - 1, v.level)))
            )
        try:
            return Context(tuple(decls))
        except KernelError:
            return EMPTY_CTX
