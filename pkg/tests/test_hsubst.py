"""Simultaneous substitution clauses and substitution totality.

The single-substitution clauses have one direct test each in the shared
defining-equation registry (run from test_contexts); this module covers the
reconstructed simultaneous substitution and the failure discipline.
"""

import pytest

from mlf.errors import ErrorKind, KernelError
from mlf.hsubst import (
    Reduced,
    StillNeutral,
    hsub_normal,
    simsub_ctx,
    simsub_neutral,
    simsub_normal,
    simsub_subst,
    simsub_type,
    single_subst,
)
from mlf.oracle import Generator, RawGen
from mlf.syntax import (
    BoundBody,
    ContextualType,
    Decl,
    HatContext,
    Lam,
    Rename,
    Substitution,
    TermApp,
    TermConst,
    TermEntry,
    TypeApp,
    TypeConst,
    Var,
    VarClosure,
    EMPTY_CTX,
    EMPTY_SUBST,
    alpha_equal,
    ctx_of,
)

i = TypeConst("i")
b = TypeConst("b")
c = TermConst("c")
x0, y0, z0, w0 = Var("x", 0), Var("y", 0), Var("z", 0), Var("w", 0)
F1 = Var("F", 1)


def ct(t, ctx=EMPTY_CTX):
    return ContextualType(t, ctx)


def var(v):
    return VarClosure(v, EMPTY_SUBST)


def entry(m, *binders, bound=0):
    return TermEntry(BoundBody(HatContext(tuple(binders), bound), m))


def arg(m):
    return BoundBody(HatContext((), 0), m)


class TestSimsubNormal:
    def test_empty_substitution_is_identity(self):
        m = Lam(x0, TermApp(c, arg(var(x0))))
        assert simsub_normal(EMPTY_SUBST, EMPTY_CTX, m) == m

    def test_variable_hit_through_term_entry(self):
        # [z/y] applied to  c (y)
        dom = ctx_of(Decl(y0, ct(b)))
        sigma = Substitution((entry(var(z0)),))
        m = TermApp(c, arg(var(y0)))
        out = simsub_normal(sigma, dom, m)
        assert alpha_equal(out, TermApp(c, arg(var(z0))))

    def test_lambda_extension_reaches_the_body(self):
        # [c/y] applied to \w. y  -->  \w. c
        dom = ctx_of(Decl(y0, ct(TypeConst("a"))))
        sigma = Substitution((entry(c),))
        out = simsub_normal(sigma, dom, Lam(w0, var(y0)))
        assert alpha_equal(out, Lam(w0, c))

    def test_binder_at_or_above_level_passes_through(self):
        dom = ctx_of(Decl(y0, ct(TypeConst("a"))))
        sigma = Substitution((entry(c),))
        out = simsub_normal(sigma, dom, Lam(F1, var(y0)))
        assert alpha_equal(out, Lam(F1, c))

    def test_capture_is_dodged_by_renaming(self):
        # [z/y] under a binder also called z
        dom = ctx_of(Decl(y0, ct(b)))
        sigma = Substitution((Rename(z0),))
        m = Lam(z0, TermApp(var(y0, ), arg(var(z0))))

        out = simsub_normal(sigma, dom, m)
        assert isinstance(out, Lam)
        assert out.binder != z0
        # the head is now the renamed-away free z
        assert out.body.head == var(z0)


class TestSimsubNeutral:
    def test_constant_stays(self):
        assert simsub_neutral(EMPTY_SUBST, EMPTY_CTX, c) == StillNeutral(c)

    def test_meta_entry_hit_reduces(self):
        # [y. c (y) / F] applied to F[z]  -->  c (z) at approximation i
        dom = ctx_of(Decl(F1, ct(i, ctx_of(Decl(y0, ct(b))))))
        sigma = Substitution((entry(TermApp(c, arg(var(y0))), y0, bound=1),))
        subject = VarClosure(F1, Substitution((entry(var(z0)),)))
        out = simsub_neutral(sigma, dom, subject)
        assert isinstance(out, Reduced)
        assert alpha_equal(out.term, TermApp(c, arg(var(z0))))

    def test_renaming_entry_hit_stays_neutral(self):
        dom = ctx_of(Decl(w0, ct(TypeConst("a"))))
        sigma = Substitution((Rename(x0),))
        out = simsub_neutral(sigma, dom, var(w0))
        assert out == StillNeutral(var(x0))

    def test_missing_variable_passes_through(self):
        dom = ctx_of(Decl(w0, ct(TypeConst("a"))))
        sigma = Substitution((Rename(x0),))
        out = simsub_neutral(sigma, dom, var(z0))
        assert out == StillNeutral(var(z0))

    def test_unknown_approximation_is_reported(self):
        from mlf.approx import CtxApprox, UnknownEntry

        dom = CtxApprox((UnknownEntry(y0),))
        sigma = Substitution((entry(c),))
        with pytest.raises(KernelError) as e:
            simsub_neutral(sigma, dom, VarClosure(y0, EMPTY_SUBST))
        assert e.value.kind == ErrorKind.UNKNOWN_APPROX

    def test_renaming_through_unknown_entry_is_fine(self):
        from mlf.approx import CtxApprox, UnknownEntry

        dom = CtxApprox((UnknownEntry(y0),))
        sigma = Substitution((Rename(z0),))
        out = simsub_neutral(sigma, dom, VarClosure(y0, EMPTY_SUBST))
        assert out == StillNeutral(var(z0))


class TestSimsubSubst:
    def test_empty(self):
        assert simsub_subst(EMPTY_SUBST, EMPTY_CTX, EMPTY_SUBST) == EMPTY_SUBST

    def test_renaming_replaced_by_entry(self):
        dom = ctx_of(Decl(y0, ct(TypeConst("a"))))
        sigma = Substitution((entry(c),))
        rho = Substitution((Rename(y0),))
        assert simsub_subst(sigma, dom, rho) == Substitution((entry(c),))

    def test_term_entry_rewritten(self):
        dom = ctx_of(Decl(y0, ct(TypeConst("a"))))
        sigma = Substitution((entry(c),))
        rho = Substitution((entry(var(y0)),))
        out = simsub_subst(sigma, dom, rho)
        assert alpha_equal(out, Substitution((entry(c),)))

    def test_foreign_renaming_kept(self):
        dom = ctx_of(Decl(y0, ct(TypeConst("a"))))
        sigma = Substitution((entry(c),))
        rho = Substitution((Rename(z0),))
        assert simsub_subst(sigma, dom, rho) == rho


class TestSimsubTypesAndContexts:
    def test_closed_type_unchanged(self):
        dom = ctx_of(Decl(Var("n", 0), ct(TypeConst("nat"))))
        sigma = Substitution((entry(TermConst("zero")),))
        assert simsub_type(sigma, dom, TypeConst("a")) == TypeConst("a")

    def test_spine_argument_rewritten(self):
        n0 = Var("n", 0)
        dom = ctx_of(Decl(n0, ct(TypeConst("nat"))))
        sigma = Substitution((entry(TermConst("zero")),))
        vec_n = TypeApp(TypeConst("vec"), arg(var(n0)))
        out = simsub_type(sigma, dom, vec_n)
        assert alpha_equal(out, TypeApp(TypeConst("vec"), arg(TermConst("zero"))))

    def test_context_declaration_rewritten(self):
        n0, xs0 = Var("n", 0), Var("xs", 0)
        dom = ctx_of(Decl(n0, ct(TypeConst("nat"))))
        sigma = Substitution((entry(TermConst("zero")),))
        vec_n = TypeApp(TypeConst("vec"), arg(var(n0)))
        out = simsub_ctx(sigma, dom, ctx_of(Decl(xs0, ct(vec_n))))
        expected = ctx_of(Decl(xs0, ct(TypeApp(TypeConst("vec"), arg(TermConst("zero"))))))
        assert alpha_equal(out, expected)

    def test_declaration_above_level_untouched(self):
        n0 = Var("n", 0)
        dom = ctx_of(Decl(n0, ct(TypeConst("nat"))))
        sigma = Substitution((entry(TermConst("zero")),))
        high = ctx_of(Decl(Var("G", 1), ct(i)))
        assert simsub_ctx(sigma, dom, high) == high


class TestFailureDiscipline:
    def test_arity_mismatch_is_classified(self):
        dom = ctx_of(Decl(y0, ct(b)))
        with pytest.raises(KernelError) as e:
            simsub_normal(EMPTY_SUBST, dom, c)
        assert e.value.kind == ErrorKind.ARITY_MISMATCH

    def test_depth_budget_is_enforced(self):
        m = Lam(x0, TermApp(c, arg(var(x0))))
        s = single_subst(arg(c), z0, ct(i))
        with pytest.raises(KernelError) as e:
            hsub_normal(s, m, max_depth=1)
        assert e.value.kind == ErrorKind.DEPTH_EXCEEDED

    def test_totality_on_arbitrary_syntax(self):
        # Every call returns or raises a classified error; nothing escapes.
        for seed in range(400):
            raw = RawGen(seed)
            subject = raw.term(3)
            repl = raw.bound_body(2)
            target = Var("x", repl.hat.bound)
            ann = ContextualType(raw.type(2), raw.context(1, repl.hat.bound))
            try:
                s = single_subst(repl, target, ann)
                hsub_normal(s, subject, max_depth=500)
            except KernelError:
                pass


def _levels_in(t, out):
    match t:
        case Lam(binder=v, body=body):
            out.add(v.level)
            _levels_in(body, out)
        case VarClosure(var=v, subst=s):
            out.add(v.level)
            for e in s.entries:
                match e:
                    case Rename(var=w):
                        out.add(w.level)
                    case TermEntry(body=bb):
                        for u in bb.hat.binders:
                            out.add(u.level)
                        _levels_in(bb.body, out)
        case TermApp(head=h, arg=a):
            _levels_in(h, out)
            for u in a.hat.binders:
                out.add(u.level)
            _levels_in(a.body, out)
        case _:
            pass


def test_substitution_never_changes_levels():
    for seed in range(150):
        gen = Generator(seed, size=7, level=2)
        si = gen.subst_instance()
        s = single_subst(si.replacement, si.target, si.annotation)
        out = hsub_normal(s, si.subject)
        before: set = set()
        _levels_in(si.subject, before)
        _levels_in(si.replacement.body, before)
        before.update(v.level for v in si.replacement.hat.binders)
        after: set = set()
        _levels_in(out, after)
        assert after <= before


class TestOracleAgreementSmoke:
    def test_small_sample_matches_oracle(self):
        from mlf.oracle import embed, embed_bound, naive_subst_normalize, readback
        from mlf.hsubst import hsub_ctx, hsub_type

        for seed in range(40):
            gen = Generator(seed, size=7, level=2, allow_renames=False)
            si = gen.subst_instance()
            s = single_subst(si.replacement, si.target, si.annotation)
            kernel_out = hsub_normal(s, si.subject)
            raw = naive_subst_normalize(
                embed(si.subject), si.target, embed_bound(si.replacement)
            )
            ctx_after = hsub_ctx(s, si.ctx)
            ty_after = hsub_type(s, si.subject_type)
            env = {d.var: d.ctype for d in ctx_after.decls}
            assert alpha_equal(kernel_out, readback(raw, ty_after, env, si.sig))
