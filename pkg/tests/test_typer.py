import pytest

from mlf.errors import ErrorKind, KernelError
from mlf.syntax import (
    BoundBody,
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
    TermApp,
    TermConst,
    TermConstDecl,
    TermEntry,
    TypeApp,
    TypeConst,
    TypeConstDecl,
    Var,
    VarClosure,
    EMPTY_CTX,
    EMPTY_SUBST,
    alpha_equal,
    ctx_of,
    level_of,
)
from mlf.contexts import id_subst
from mlf.typer import TypeChecker, check_signature, eta_expand_var

i = TypeConst("i")
nat = TypeConst("nat")
x0, y0, z0, n0 = Var("x", 0), Var("y", 0), Var("z", 0), Var("n", 0)
F1 = Var("F", 1)


def ct(t, c=EMPTY_CTX):
    return ContextualType(t, c)


def var(v):
    return VarClosure(v, EMPTY_SUBST)


def arg(m):
    return BoundBody(HatContext((), 0), m)


def entry(m, *binders, bound=0):
    return TermEntry(BoundBody(HatContext(tuple(binders), bound), m))


def sig_nat() -> Signature:
    return check_signature(
        Signature(
            (
                TypeConstDecl("nat", SortRef(Sort.TYPE)),
                TypeConstDecl("bool", SortRef(Sort.TYPE)),
                TermConstDecl("zero", nat),
                TermConstDecl("suc", Pi(x0, ct(nat), nat)),
            )
        )
    )


@pytest.fixture(scope="module")
def nat_checker():
    return TypeChecker(sig_nat())


class TestSignature:
    def test_nat_signature_accepted(self):
        sig_nat()

    def test_unbound_constant_in_declaration(self):
        with pytest.raises(KernelError) as e:
            check_signature(Signature((TermConstDecl("c", TypeConst("d")),)))
        assert e.value.kind == ErrorKind.UNBOUND_CONSTANT

    def test_unbound_constant_in_kind(self):
        bad = Pi(x0, ct(TypeConst("missing")), SortRef(Sort.TYPE))
        with pytest.raises(KernelError) as e:
            check_signature(Signature((TypeConstDecl("a", bad),)))
        assert e.value.kind == ErrorKind.UNBOUND_CONSTANT

    def test_term_type_must_be_a_type(self):
        with pytest.raises(KernelError):
            check_signature(Signature((TermConstDecl("c", SortRef(Sort.TYPE)),)))


class TestSynth:
    def test_constant_type_from_signature(self, nat_checker):
        assert nat_checker.synth_atomic(EMPTY_CTX, TermConst("zero")) == nat

    def test_application(self, nat_checker):
        t = nat_checker.synth_atomic(
            EMPTY_CTX, TermApp(TermConst("suc"), arg(TermConst("zero")))
        )
        assert t == nat

    def test_unbound_constant(self, nat_checker):
        with pytest.raises(KernelError) as e:
            nat_checker.synth_atomic(EMPTY_CTX, TermConst("missing"))
        assert e.value.kind == ErrorKind.UNBOUND_CONSTANT

    def test_unbound_variable(self, nat_checker):
        with pytest.raises(KernelError) as e:
            nat_checker.synth_atomic(EMPTY_CTX, var(x0))
        assert e.value.kind == ErrorKind.UNBOUND_VARIABLE

    def test_not_pi(self, nat_checker):
        with pytest.raises(KernelError) as e:
            nat_checker.synth_atomic(EMPTY_CTX, TermApp(TermConst("zero"), arg(TermConst("zero"))))
        assert e.value.kind == ErrorKind.NOT_PI

    def test_variable_rule_applies_closure_to_type(self, nat_checker):
        # F : nat [m:nat];  F[. zero] synthesizes nat
        psi = ctx_of(Decl(F1, ct(nat, ctx_of(Decl(Var("m", 0), ct(nat))))))
        t = nat_checker.synth_atomic(
            psi, VarClosure(F1, Substitution((entry(TermConst("zero")),)))
        )
        assert t == nat

    def test_arity_mismatch_in_closure(self, nat_checker):
        psi = ctx_of(Decl(F1, ct(nat, ctx_of(Decl(Var("m", 0), ct(nat))))))
        with pytest.raises(KernelError) as e:
            nat_checker.synth_atomic(psi, VarClosure(F1, EMPTY_SUBST))
        assert e.value.kind == ErrorKind.ARITY_MISMATCH


class TestCheckNormal:
    def test_identity_function(self, nat_checker):
        idfn = Lam(x0, var(x0))
        nat_checker.check_normal(EMPTY_CTX, idfn, Pi(x0, ct(nat), nat))

    def test_type_mismatch(self, nat_checker):
        with pytest.raises(KernelError) as e:
            nat_checker.check_normal(EMPTY_CTX, TermConst("zero"), TypeConst("bool"))
        assert e.value.kind == ErrorKind.TYPE_MISMATCH

    def test_eta_long_discipline(self, nat_checker):
        with pytest.raises(KernelError) as e:
            nat_checker.check_normal(EMPTY_CTX, TermConst("suc"), Pi(x0, ct(nat), nat))
        assert e.value.kind == ErrorKind.NOT_ETA_LONG

    def test_lambda_against_atomic_type(self, nat_checker):
        with pytest.raises(KernelError) as e:
            nat_checker.check_normal(EMPTY_CTX, Lam(x0, var(x0)), nat)
        assert e.value.kind == ErrorKind.TYPE_MISMATCH

    def test_binder_shadowing_the_context_is_renamed(self, nat_checker):
        psi = ctx_of(Decl(x0, ct(nat)))
        nat_checker.check_normal(psi, Lam(x0, var(x0)), Pi(y0, ct(nat), nat))


class TestCheckSubst:
    def test_empty_against_empty(self, nat_checker):
        nat_checker.check_subst(EMPTY_CTX, EMPTY_SUBST, EMPTY_CTX)

    def test_term_entry_with_empty_local_context(self, nat_checker):
        phi = ctx_of(Decl(n0, ct(nat)))
        nat_checker.check_subst(
            EMPTY_CTX, Substitution((entry(TermConst("zero")),)), phi
        )

    def test_identity_checks_against_declared_context(self, nat_checker):
        psi = ctx_of(
            Decl(F1, ct(nat, ctx_of(Decl(Var("m", 0), ct(nat))))),
            Decl(x0, ct(nat)),
        )
        nat_checker.check_subst(psi, id_subst(psi.hat(level_of(psi))), psi)

    def test_arity_mismatch(self, nat_checker):
        phi = ctx_of(Decl(n0, ct(nat)))
        with pytest.raises(KernelError) as e:
            nat_checker.check_subst(EMPTY_CTX, EMPTY_SUBST, phi)
        assert e.value.kind == ErrorKind.ARITY_MISMATCH

    def test_renaming_entry_type_mismatch(self, nat_checker):
        psi = ctx_of(Decl(y0, ct(TypeConst("bool"))))
        phi = ctx_of(Decl(n0, ct(nat)))
        with pytest.raises(KernelError) as e:
            nat_checker.check_subst(psi, Substitution((Rename(y0),)), phi)
        assert e.value.kind == ErrorKind.TYPE_MISMATCH


class TestCheckTypeAndCtx:
    def test_type_checks_against_kind(self, nat_checker):
        nat_checker.check_type(EMPTY_CTX, SortRef(Sort.TYPE), Sort.KIND)

    def test_type_not_against_type(self, nat_checker):
        with pytest.raises(KernelError):
            nat_checker.check_type(EMPTY_CTX, SortRef(Sort.TYPE), Sort.TYPE)

    def test_pi_type_with_dependent_family(self):
        sig = check_signature(
            Signature(
                (
                    TypeConstDecl("nat", SortRef(Sort.TYPE)),
                    TypeConstDecl("vec", Pi(n0, ct(nat), SortRef(Sort.TYPE))),
                    TermConstDecl("zero", nat),
                )
            )
        )
        tc = TypeChecker(sig)
        vec_n = TypeApp(TypeConst("vec"), arg(var(n0)))
        tc.check_type(EMPTY_CTX, Pi(n0, ct(nat), vec_n), Sort.TYPE)

    def test_meta_level_pi_kind(self):
        # {F^1 : i [x:i]} type is a well-formed kind
        sig = check_signature(Signature((TypeConstDecl("i", SortRef(Sort.TYPE)),)))
        tc = TypeChecker(sig)
        dom = ct(TypeConst("i"), ctx_of(Decl(x0, ct(TypeConst("i")))))
        tc.check_type(EMPTY_CTX, Pi(F1, dom, SortRef(Sort.TYPE)), Sort.KIND)

    def test_check_ctx_empty(self, nat_checker):
        nat_checker.check_ctx(EMPTY_CTX, EMPTY_CTX, 0)

    def test_check_ctx_level_zero_at_bound_one(self, nat_checker):
        nat_checker.check_ctx(EMPTY_CTX, ctx_of(Decl(x0, ct(nat))), 1)

    def test_check_ctx_level_violation(self, nat_checker):
        with pytest.raises(KernelError) as e:
            nat_checker.check_ctx(EMPTY_CTX, ctx_of(Decl(Var("x", 1), ct(nat))), 1)
        assert e.value.kind == ErrorKind.LEVEL_VIOLATION

    def test_check_ctx_rejects_unsorted(self, nat_checker):
        phi = ctx_of(Decl(y0, ct(nat)), Decl(F1, ct(nat)))
        with pytest.raises(KernelError) as e:
            nat_checker.check_ctx(EMPTY_CTX, phi, 2)
        assert e.value.kind == ErrorKind.ILL_FORMED_CONTEXT


class TestEtaEquality:
    @pytest.fixture
    def setup(self):
        sig = check_signature(
            Signature(
                (
                    TypeConstDecl("a", SortRef(Sort.TYPE)),
                    TypeConstDecl("b", SortRef(Sort.TYPE)),
                )
            )
        )
        tc = TypeChecker(sig)
        a, b = TypeConst("a"), TypeConst("b")
        psi = ctx_of(Decl(F1, ct(a, ctx_of(Decl(y0, ct(b))))))
        dom = ctx_of(Decl(Var("G", 1), ct(a, ctx_of(Decl(y0, ct(b))))))
        return tc, psi, dom

    def test_renaming_equals_its_expansion(self, setup):
        tc, psi, dom = setup
        expansion = eta_expand_var(F1, ct(TypeConst("a"), ctx_of(Decl(y0, ct(TypeConst("b"))))))
        s_short = Substitution((Rename(F1),))
        s_long = Substitution((TermEntry(expansion),))
        assert tc.equal_subst(psi, s_short, s_long, dom)
        assert tc.equal_subst(psi, s_long, s_short, dom)

    def test_non_eta_equal_pair_rejected(self, setup):
        tc, psi, dom = setup
        s_short = Substitution((Rename(F1),))
        other = Substitution(
            (TermEntry(BoundBody(HatContext((y0,), 1), TermConst("c"))),)
        )
        assert not tc.equal_subst(psi, s_short, other, dom)

    def test_atomic_spine_equality(self, nat_checker):
        vec_n = TypeApp(TypeConst("vec"), arg(var(n0)))
        assert nat_checker.equal_atomic(EMPTY_CTX, vec_n, vec_n)
        vec_zero = TypeApp(TypeConst("vec"), arg(TermConst("zero")))
        assert not nat_checker.equal_atomic(EMPTY_CTX, vec_zero, vec_n)


class TestPaperExamples:
    def test_vec_cons_instantiation(self):
        booly = TypeConst("bool")
        xs0 = Var("xs", 0)
        vec = lambda m: TypeApp(TypeConst("vec"), arg(m))
        sig = check_signature(
            Signature(
                (
                    TypeConstDecl("nat", SortRef(Sort.TYPE)),
                    TypeConstDecl("bool", SortRef(Sort.TYPE)),
                    TypeConstDecl("vec", Pi(n0, ct(nat), SortRef(Sort.TYPE))),
                    TermConstDecl(
                        "cons",
                        Pi(
                            n0,
                            ct(nat),
                            Pi(x0, ct(booly), Pi(xs0, ct(vec(var(n0))), vec(var(n0)))),
                        ),
                    ),
                )
            )
        )
        tc = TypeChecker(sig)
        gamma = ctx_of(
            Decl(n0, ct(nat)), Decl(x0, ct(booly)), Decl(xs0, ct(vec(var(n0))))
        )
        tc.check_ctx(EMPTY_CTX, gamma, 1)
        spine = TermApp(
            TermApp(TermApp(TermConst("cons"), arg(var(n0))), arg(var(x0))),
            arg(var(xs0)),
        )
        assert alpha_equal(tc.synth_atomic(gamma, spine), vec(var(n0)))
        tc.check_normal(gamma, spine, vec(var(n0)))

    def test_all_intro_derivation_with_meta_variable(self):
        # The opening example: under x:i and a meta-variable F standing for a
        # derivation of p(y,x) in locals [x:i, y:i], the term
        #   allI \y. andI (F x y) (F y x)
        # checks at nd (all \z. p(z,x) and p(x,z)).
        i_ = TypeConst("i")
        o_ = TypeConst("o")
        z0 = Var("z", 0)
        p = lambda l, r: TypeApp(
            TypeApp(TypeConst("p"), arg(l)), arg(r)
        )
        and_ = lambda l, r: TypeApp(TypeApp(TypeConst("and"), arg(l)), arg(r))
        nd = lambda d: TypeApp(TypeConst("nd"), arg(d))
        andm = lambda l, r: TermApp(TermApp(TermConst("and"), arg(l)), arg(r))
        pm = lambda l, r: TermApp(TermApp(TermConst("p"), arg(l)), arg(r))
        f0 = Var("f", 0)
        a0, b0, d0, e0 = Var("a", 0), Var("b", 0), Var("d", 0), Var("e", 0)
        fz = TermApp(VarClosure(f0, EMPTY_SUBST), arg(var(z0)))
        sig = check_signature(
            Signature(
                (
                    TypeConstDecl("i", SortRef(Sort.TYPE)),
                    TypeConstDecl("o", SortRef(Sort.TYPE)),
                    TermConstDecl("p", Pi(x0, ct(i_), Pi(y0, ct(i_), o_))),
                    TermConstDecl("and", Pi(a0, ct(o_), Pi(b0, ct(o_), o_))),
                    TermConstDecl("all", Pi(f0, ct(Pi(z0, ct(i_), o_)), o_)),
                    TypeConstDecl("nd", Pi(a0, ct(o_), SortRef(Sort.TYPE))),
                    TermConstDecl(
                        "andI",
                        Pi(
                            a0,
                            ct(o_),
                            Pi(
                                b0,
                                ct(o_),
                                Pi(
                                    d0,
                                    ct(nd(var(a0))),
                                    Pi(e0, ct(nd(var(b0))), nd(andm(var(a0), var(b0)))),
                                ),
                            ),
                        ),
                    ),
                    TermConstDecl(
                        "allI",
                        Pi(
                            f0,
                            ct(Pi(z0, ct(i_), o_)),
                            Pi(
                                d0,
                                ct(Pi(z0, ct(i_), nd(fz))),
                                nd(TermApp(TermConst("all"), arg(Lam(z0, fz)))),
                            ),
                        ),
                    ),
                )
            )
        )
        tc = TypeChecker(sig)
        # Psi = F^1 : nd (p y x) [x:i, y:i],  x : i
        F_local = ctx_of(Decl(x0, ct(i_)), Decl(y0, ct(i_)))
        psi = ctx_of(
            Decl(F1, ct(nd(pm(var(y0), var(x0))), F_local)),
            Decl(x0, ct(i_)),
        )
        tc.check_ctx(EMPTY_CTX, psi, 2)
        family = Lam(z0, andm(pm(var(z0), var(x0)), pm(var(x0), var(z0))))
        F_xy = VarClosure(F1, Substitution((Rename(x0), Rename(y0))))
        F_yx = VarClosure(F1, Substitution((Rename(y0), Rename(x0))))
        body = Lam(
            y0,
            TermApp(
                TermApp(
                    TermApp(
                        TermApp(TermConst("andI"), arg(pm(var(y0), var(x0)))),
                        arg(pm(var(x0), var(y0))),
                    ),
                    arg(F_xy),
                ),
                arg(F_yx),
            ),
        )
        derivation = TermApp(TermApp(TermConst("allI"), arg(family)), arg(body))
        expected = nd(TermApp(TermConst("all"), arg(family)))
        tc.check_normal(psi, derivation, expected)

    def test_generated_instances_check(self):
        from mlf.oracle import Generator

        for seed in range(60):
            gen = Generator(seed, size=6, level=2)
            inst = gen.instance()
            tc = TypeChecker(inst.sig)
            tc.check_type(inst.ctx, inst.type, Sort.TYPE)
            tc.check_normal(inst.ctx, inst.term, inst.type)

    def test_synthesized_types_are_well_formed(self):
        from mlf.oracle import Generator
        from mlf.syntax import AtomicTerm

        count = 0
        seed = 0
        while count < 100:
            gen = Generator(seed, size=6, level=2)
            seed += 1
            inst = gen.instance()
            if not isinstance(inst.term, AtomicTerm):
                continue
            tc = TypeChecker(inst.sig)
            a = tc.synth_atomic(inst.ctx, inst.term)
            tc.check_type(inst.ctx, a, Sort.TYPE)
            count += 1
