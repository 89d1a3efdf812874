"""Built-in check suite: one direct unit check per defining equation.

Shared between the ``selftest`` CLI subcommand and the test suite.  Each check
is a zero-argument callable that raises AssertionError (or a kernel error) on
failure.  The registry covers merging and chopping of contexts and of
substitutions, erasure, the identity substitution, hereditary substitution on
normal terms, neutral terms, substitutions and contexts, and eta-aware
equality.
"""

from __future__ import annotations

import json

from .approx import (
    ArrowApprox,
    BaseApprox,
    CtxApprox,
    CtxTypeApprox,
    TypedEntry,
    approx_leq,
    erase_ctx,
    erase_type,
)
from .contexts import chop_ctx, chop_subst, id_subst, merge_ctx, merge_subst
from .errors import ErrorKind, KernelError
from .hsubst import (
    Reduced,
    SingleSubst,
    StillNeutral,
    hsub_ctx,
    hsub_neutral,
    hsub_normal,
    hsub_subst,
    hsub_type,
    single_subst,
)
from .syntax import (
    BoundBody,
    ContextualType,
    Decl,
    HatContext,
    Lam,
    Pi,
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

# Shared scaffolding -----------------------------------------------------------

i = TypeConst("i")
b = TypeConst("b")
x0, y0, z0, w0 = Var("x", 0), Var("y", 0), Var("z", 0), Var("w", 0)
F1, G1, x2 = Var("F", 1), Var("G", 1), Var("x", 2)


def ct(t, c=EMPTY_CTX) -> ContextualType:
    return ContextualType(t, c)


def decl(v, t, c=EMPTY_CTX) -> Decl:
    return Decl(v, ct(t, c))


def var(v) -> VarClosure:
    return VarClosure(v, EMPTY_SUBST)


def arg(m) -> BoundBody:
    return BoundBody(HatContext((), 0), m)


def term_entry(m, *binders, bound=0) -> TermEntry:
    return TermEntry(BoundBody(HatContext(tuple(binders), bound), m))


c_ = TermConst("c")
d_ = TermConst("d")


def expect_fail(kind: ErrorKind, thunk):
    try:
        thunk()
    except KernelError as e:
        assert e.kind == kind, f"expected {kind}, got {e.kind}: {e}"
        return
    raise AssertionError(f"expected {kind}, but the call succeeded")


# Defining equations -----------------------------------------------------------


def merge_ctx_empty_left():
    phi = ctx_of(decl(y0, i))
    assert merge_ctx(EMPTY_CTX, phi) == phi


def merge_ctx_empty_right():
    psi = ctx_of(decl(x2, i))
    assert merge_ctx(psi, EMPTY_CTX) == psi


def merge_ctx_right_goes_last():
    # Last right declaration at level k <= n goes rightmost.
    out = merge_ctx(ctx_of(decl(x2, i)), ctx_of(decl(y0, b)))
    assert [d.var for d in out.decls] == [x2, y0]


def merge_ctx_left_goes_last():
    # Otherwise the left declaration goes rightmost.
    out = merge_ctx(ctx_of(decl(y0, b)), ctx_of(decl(x2, i)))
    assert [d.var for d in out.decls] == [x2, y0]


def chop_ctx_empty():
    assert chop_ctx(EMPTY_CTX, 3) == EMPTY_CTX


def chop_ctx_drops_below():
    out = chop_ctx(ctx_of(decl(x2, i), decl(y0, b)), 1)
    assert [d.var for d in out.decls] == [x2]


def chop_ctx_all_below_bound():
    # A whole context at level k <= n chops to nothing.
    assert chop_ctx(ctx_of(decl(y0, b)), 1) == EMPTY_CTX


def merge_subst_empty_left():
    tau = Substitution((Rename(y0),))
    phi = ctx_of(decl(y0, b))
    out, dom = merge_subst(EMPTY_SUBST, EMPTY_CTX, tau, phi)
    assert out == tau and dom == phi


def merge_subst_empty_right():
    sig = Substitution((Rename(z0),))
    psi = ctx_of(decl(x0, i))
    out, dom = merge_subst(sig, psi, EMPTY_SUBST, EMPTY_CTX)
    assert out == sig and dom == psi


def merge_subst_right_goes_last():
    sig = Substitution((term_entry(c_, bound=2),))
    psi = ctx_of(decl(x2, i))
    tau = Substitution((Rename(z0),))
    phi = ctx_of(decl(y0, b))
    out, dom = merge_subst(sig, psi, tau, phi)
    assert out.entries == (sig.entries[0], tau.entries[0])
    assert [d.var for d in dom.decls] == [x2, y0]


def merge_subst_left_goes_last():
    sig = Substitution((Rename(z0),))
    psi = ctx_of(decl(y0, b))
    tau = Substitution((term_entry(c_, bound=2),))
    phi = ctx_of(decl(x2, i))
    out, dom = merge_subst(sig, psi, tau, phi)
    assert out.entries == (tau.entries[0], sig.entries[0])
    assert [d.var for d in dom.decls] == [x2, y0]


def chop_subst_empty():
    out, dom = chop_subst(EMPTY_SUBST, EMPTY_CTX, 4)
    assert out == EMPTY_SUBST and dom == EMPTY_CTX


def chop_subst_drops_below():
    sig = Substitution((term_entry(c_, bound=2), Rename(z0)))
    psi = ctx_of(decl(x2, i), decl(y0, b))
    out, dom = chop_subst(sig, psi, 1)
    assert out.entries == (sig.entries[0],)
    assert [d.var for d in dom.decls] == [x2]


def chop_subst_at_zero_keeps_all():
    sig = Substitution((term_entry(c_, bound=2), Rename(z0)))
    psi = ctx_of(decl(x2, i), decl(y0, b))
    out, dom = chop_subst(sig, psi, 0)
    assert out == sig and dom == psi


def id_subst_empty():
    assert id_subst(HatContext((), 1)) == EMPTY_SUBST


def id_subst_unrolls():
    out = id_subst(HatContext((F1, y0), 2))
    assert out.entries == (Rename(F1), Rename(y0))


def erase_base():
    assert erase_type(i) == BaseApprox("i")


def erase_application_erases_spine():
    vec_n = TypeApp(TypeConst("vec"), arg(var(Var("n", 0))))
    assert erase_type(vec_n) == BaseApprox("vec")


def erase_pi_is_arrow():
    nat = TypeConst("nat")
    vec_x = TypeApp(TypeConst("vec"), arg(var(x0)))
    out = erase_type(Pi(x0, ct(nat), vec_x))
    assert out == ArrowApprox(
        CtxTypeApprox(BaseApprox("nat"), CtxApprox(())), BaseApprox("vec")
    )


def erase_ctx_empty():
    assert erase_ctx(EMPTY_CTX) == CtxApprox(())


def erase_ctx_pointwise():
    phi = ctx_of(decl(F1, i, ctx_of(decl(y0, b))), decl(x0, b))
    out = erase_ctx(phi)
    assert out == CtxApprox(
        (
            TypedEntry(
                F1,
                CtxTypeApprox(
                    BaseApprox("i"),
                    CtxApprox((TypedEntry(y0, CtxTypeApprox(BaseApprox("b"), CtxApprox(()))),)),
                ),
            ),
            TypedEntry(x0, CtxTypeApprox(BaseApprox("b"), CtxApprox(()))),
        )
    )


# Hereditary substitution: normal terms


def _subst_c_for_x0() -> SingleSubst:
    return single_subst(arg(c_), x0, ct(i))


def hsub_lam_below_target_level():
    # [y. c / F^1] under \z0 recurses freely: binders below the level are safe.
    s = single_subst(BoundBody(HatContext((y0,), 1), c_), F1, ct(i, ctx_of(decl(y0, b))))
    subject = Lam(z0, VarClosure(F1, Substitution((term_entry(var(z0)),))))
    assert alpha_equal(hsub_normal(s, subject), Lam(z0, c_))


def hsub_lam_at_or_above_renames():
    # A binder at the target's level shadowing it is renamed apart.
    s = _subst_c_for_x0()
    subject = Lam(x0, var(x0))
    out = hsub_normal(s, subject)
    assert alpha_equal(out, Lam(y0, var(y0)))


def hsub_atomic_drops_approximation():
    s = _subst_c_for_x0()
    assert hsub_normal(s, var(x0)) == c_


def hsub_atomic_stays_neutral():
    s = _subst_c_for_x0()
    assert hsub_normal(s, var(y0)) == var(y0)


def hsub_fails_when_no_clause_applies():
    # The head reduces to a constant, which cannot be applied further.
    s = _subst_c_for_x0()
    subject = TermApp(var(x0), arg(d_))
    expect_fail(ErrorKind.SUBST_FAILS, lambda: hsub_normal(s, subject))


# Hereditary substitution: neutral terms


def hsub_neutral_constant():
    assert hsub_neutral(_subst_c_for_x0(), c_) == StillNeutral(c_)


def hsub_neutral_variable_hit():
    # Hitting x^n applies the pushed-through closure to the replacement.
    s = single_subst(
        BoundBody(HatContext((y0,), 1), TermApp(c_, arg(var(y0)))),
        F1,
        ct(i, ctx_of(decl(y0, b))),
    )
    subject = VarClosure(F1, Substitution((term_entry(var(z0)),)))
    out = hsub_neutral(s, subject)
    assert isinstance(out, Reduced)
    assert alpha_equal(out.term, TermApp(c_, arg(var(z0))))
    assert out.approx == BaseApprox("i")


def hsub_neutral_other_variable():
    s = _subst_c_for_x0()
    subject = VarClosure(y0, Substitution((term_entry(var(x0)),)))
    out = hsub_neutral(s, subject)
    assert out == StillNeutral(VarClosure(y0, Substitution((term_entry(c_),))))


def hsub_neutral_app_rewrites_low_argument():
    # Argument bodies binding locals at or below the target level are rewritten.
    s = _subst_c_for_x0()
    subject = TermApp(var(y0), arg(var(x0)))
    out = hsub_neutral(s, subject)
    assert out == StillNeutral(TermApp(var(y0), arg(c_)))


def hsub_neutral_app_skips_high_argument():
    # Argument bodies binding locals above the target level are left alone.
    s = _subst_c_for_x0()
    high = BoundBody(HatContext((w0,), 1), var(x0))
    subject = TermApp(var(y0), high)
    out = hsub_neutral(s, subject)
    assert out == StillNeutral(TermApp(var(y0), high))


def hsub_neutral_beta_low():
    # Reducing the motivating redex: substituting \y. c (y) for x in x (z).
    fn_ty = Pi(y0, ct(i), i)
    s = single_subst(arg(Lam(y0, TermApp(c_, arg(var(y0))))), x0, ct(fn_ty))
    subject = TermApp(var(x0), arg(var(z0)))
    out = hsub_neutral(s, subject)
    assert isinstance(out, Reduced)
    assert alpha_equal(out.term, TermApp(c_, arg(var(z0))))
    assert out.approx == BaseApprox("i")
    assert approx_leq(out.approx, s.bound)


def hsub_neutral_beta_high():
    # The argument sits above the target's level; the beta step still fires.
    pi_ty = Pi(F1, ct(i, ctx_of(decl(y0, i))), i)
    repl = arg(Lam(F1, VarClosure(F1, Substitution((term_entry(c_),)))))
    s = single_subst(repl, x0, ct(pi_ty))
    subject = TermApp(var(x0), BoundBody(HatContext((y0,), 1), var(y0)))
    out = hsub_neutral(s, subject)
    assert isinstance(out, Reduced)
    assert alpha_equal(out.term, c_)


def hsub_neutral_fails_on_flat_approximation():
    # A function hiding behind a base approximation is rejected.
    s = SingleSubst(arg(Lam(y0, var(y0))), x0, CtxTypeApprox(BaseApprox("i"), CtxApprox(())))
    subject = TermApp(var(x0), arg(c_))
    expect_fail(ErrorKind.SUBST_FAILS, lambda: hsub_neutral(s, subject))


# Hereditary substitution: substitutions


def hsub_subst_empty():
    assert hsub_subst(_subst_c_for_x0(), EMPTY_SUBST) == EMPTY_SUBST


def hsub_subst_rewrites_low_entry():
    s = _subst_c_for_x0()
    out = hsub_subst(s, Substitution((term_entry(var(x0)),)))
    assert out == Substitution((term_entry(c_),))


def hsub_subst_skips_high_entry():
    s = _subst_c_for_x0()
    entry = TermEntry(BoundBody(HatContext((w0,), 1), var(x0)))
    out = hsub_subst(s, Substitution((entry,)))
    assert out == Substitution((entry,))


def hsub_subst_renaming_hit_becomes_term():
    s = _subst_c_for_x0()
    out = hsub_subst(s, Substitution((Rename(x0),)))
    assert out == Substitution((TermEntry(s.replacement),))


def hsub_subst_renaming_miss_passes():
    s = _subst_c_for_x0()
    out = hsub_subst(s, Substitution((Rename(y0),)))
    assert out == Substitution((Rename(y0),))


# Hereditary substitution: contexts and types


def hsub_ctx_empty():
    assert hsub_ctx(_subst_c_for_x0(), EMPTY_CTX) == EMPTY_CTX


def hsub_ctx_rewrites_low_declaration():
    n0 = Var("n", 0)
    s = single_subst(arg(TermConst("zero")), n0, ct(TypeConst("nat")))
    vec_n = TypeApp(TypeConst("vec"), arg(var(n0)))
    out = hsub_ctx(s, ctx_of(decl(Var("xs", 0), vec_n)))
    expected = ctx_of(decl(Var("xs", 0), TypeApp(TypeConst("vec"), arg(TermConst("zero")))))
    assert alpha_equal(out, expected)


def hsub_ctx_skips_high_declaration():
    n0 = Var("n", 0)
    s = single_subst(arg(TermConst("zero")), n0, ct(TypeConst("nat")))
    high = ctx_of(decl(G1, i))
    assert hsub_ctx(s, high) == high


def hsub_type_spine_argument():
    n0 = Var("n", 0)
    s = single_subst(arg(TermConst("zero")), n0, ct(TypeConst("nat")))
    vec_n = TypeApp(TypeConst("vec"), arg(var(n0)))
    out = hsub_type(s, vec_n)
    assert alpha_equal(out, TypeApp(TypeConst("vec"), arg(TermConst("zero"))))


def hsub_type_pi_no_capture():
    n0 = Var("n", 0)
    s = single_subst(arg(TermConst("zero")), n0, ct(TypeConst("nat")))
    vec_n = TypeApp(TypeConst("vec"), arg(var(n0)))
    out = hsub_type(s, Pi(x0, ct(TypeConst("bool")), vec_n))
    assert alpha_equal(
        out, Pi(x0, ct(TypeConst("bool")), TypeApp(TypeConst("vec"), arg(TermConst("zero"))))
    )


DEFINING_EQUATION_CHECKS = [
    (fn.__name__, fn)
    for fn in (
        merge_ctx_empty_left,
        merge_ctx_empty_right,
        merge_ctx_right_goes_last,
        merge_ctx_left_goes_last,
        chop_ctx_empty,
        chop_ctx_drops_below,
        chop_ctx_all_below_bound,
        merge_subst_empty_left,
        merge_subst_empty_right,
        merge_subst_right_goes_last,
        merge_subst_left_goes_last,
        chop_subst_empty,
        chop_subst_drops_below,
        chop_subst_at_zero_keeps_all,
        id_subst_empty,
        id_subst_unrolls,
        erase_base,
        erase_application_erases_spine,
        erase_pi_is_arrow,
        erase_ctx_empty,
        erase_ctx_pointwise,
        hsub_lam_below_target_level,
        hsub_lam_at_or_above_renames,
        hsub_atomic_drops_approximation,
        hsub_atomic_stays_neutral,
        hsub_fails_when_no_clause_applies,
        hsub_neutral_constant,
        hsub_neutral_variable_hit,
        hsub_neutral_other_variable,
        hsub_neutral_app_rewrites_low_argument,
        hsub_neutral_app_skips_high_argument,
        hsub_neutral_beta_low,
        hsub_neutral_beta_high,
        hsub_neutral_fails_on_flat_approximation,
        hsub_subst_empty,
        hsub_subst_rewrites_low_entry,
        hsub_subst_skips_high_entry,
        hsub_subst_renaming_hit_becomes_term,
        hsub_subst_renaming_miss_passes,
        hsub_ctx_empty,
        hsub_ctx_rewrites_low_declaration,
        hsub_ctx_skips_high_declaration,
        hsub_type_spine_argument,
        hsub_type_pi_no_capture,
    )
]


def run(seeds: int = 25, size: int = 8, level: int = 2, as_json=False, out=None) -> int:
    """Run the defining-equation suite plus generator cross-checks."""
    import sys

    from .hsubst import hsub_normal as _hn, hsub_ctx as _hc, hsub_type as _ht
    from .oracle import (
        Generator,
        embed,
        embed_bound,
        naive_subst_normalize,
        readback,
    )
    from .typer import TypeChecker

    out = out or sys.stdout
    failures = 0

    def report(name, ok, message=""):
        nonlocal failures
        if not ok:
            failures += 1
        if as_json:
            print(
                json.dumps(
                    {"check": name, "status": "ok" if ok else "fail", "message": message},
                    sort_keys=True,
                ),
                file=out,
            )
        else:
            mark = "ok  " if ok else "FAIL"
            print(f"{mark} {name}{(': ' + message) if message else ''}", file=out)

    for name, fn in DEFINING_EQUATION_CHECKS:
        try:
            fn()
            report(name, True)
        except Exception as e:  # noqa: BLE001 - reported as a failure
            report(name, False, str(e))

    for seed in range(seeds):
        name = f"generator_roundtrip[{seed}]"
        try:
            gen = Generator(seed, size=size, level=level, allow_renames=False)
            inst = gen.instance()
            tc = TypeChecker(inst.sig)
            tc.check_normal(inst.ctx, inst.term, inst.type)
            si = gen.subst_instance()
            s = single_subst(si.replacement, si.target, si.annotation)
            kernel_out = _hn(s, si.subject)
            raw = naive_subst_normalize(
                embed(si.subject), si.target, embed_bound(si.replacement)
            )
            ctx_after = _hc(s, si.ctx)
            ty_after = _ht(s, si.subject_type)
            env = {d.var: d.ctype for d in ctx_after.decls}
            back = readback(raw, ty_after, env, si.sig)
            ok = alpha_equal(kernel_out, back)
            report(name, ok, "" if ok else "oracle disagreement")
        except Exception as e:  # noqa: BLE001
            report(name, False, str(e))

    if not as_json:
        total = len(DEFINING_EQUATION_CHECKS) + seeds
        print(f"{total - failures}/{total} checks passed", file=out)
    return 0 if failures == 0 else 1
