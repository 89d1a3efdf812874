"""Acceptance gate: every criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion.
"""

import functools
import json
import time
from pathlib import Path

import pytest

from mlf.cli import main as cli_main
from mlf.errors import KernelError
from mlf.hsubst import hsub_ctx, hsub_normal, hsub_type, single_subst
from mlf.oracle import (
    Generator,
    RawGen,
    embed,
    embed_bound,
    naive_subst_normalize,
    readback,
)
from mlf.selftest import DEFINING_EQUATION_CHECKS
from mlf.syntax import (
    BoundBody,
    ContextualType,
    HatContext,
    Lam,
    Pi,
    Rename,
    Substitution,
    TermApp,
    TermConst,
    TermEntry,
    TypeConst,
    Var,
    VarClosure,
    EMPTY_CTX,
    EMPTY_SUBST,
    alpha_equal,
    ctx_of,
)
from mlf import printer
from mlf.typer import TypeChecker, eta_expand_var

FIXTURES = Path(__file__).parent / "fixtures"


def criterion(name):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kw):
            try:
                fn(*args, **kw)
            except BaseException:
                print(f"FAIL: {name}")
                raise
            print(f"PASS: {name}")

        return wrapper

    return deco


@criterion("defining-equation suite (one direct unit test per clause, < 1 s)")
def test_defining_equations():
    started = time.perf_counter()
    assert len(DEFINING_EQUATION_CHECKS) >= 40
    for name, check in DEFINING_EQUATION_CHECKS:
        check()
    assert time.perf_counter() - started < 1.0


@criterion("paper examples: vec instantiation, allI derivation, c z substitution")
def test_paper_examples(capsys):
    # The two typing examples live in the good fixtures; both must check.
    for name in ("nat.mlf", "fol.mlf"):
        assert cli_main(["check", str(FIXTURES / name)]) == 0
    capsys.readouterr()
    # Substituting \y. c (y) for x in x (z) must yield exactly c (z).
    i = TypeConst("i")
    x0, y0, z0 = Var("x", 0), Var("y", 0), Var("z", 0)
    c = TermConst("c")
    fn_ty = Pi(y0, ContextualType(i, EMPTY_CTX), i)
    s = single_subst(
        BoundBody(HatContext((), 0), Lam(y0, TermApp(c, BoundBody(HatContext((), 0), VarClosure(y0, EMPTY_SUBST))))),
        x0,
        ContextualType(fn_ty, EMPTY_CTX),
    )
    subject = TermApp(
        VarClosure(x0, EMPTY_SUBST),
        BoundBody(HatContext((), 0), VarClosure(z0, EMPTY_SUBST)),
    )
    out = hsub_normal(s, subject)
    expected = TermApp(c, BoundBody(HatContext((), 0), VarClosure(z0, EMPTY_SUBST)))
    assert alpha_equal(out, expected)
    assert printer.show_term(out) == "c (z)"


@criterion("oracle equivalence on >= 1000 instances, exact alpha-equality, < 60 s")
def test_oracle_equivalence():
    started = time.perf_counter()
    done = 0
    seed = 0
    while done < 1000:
        gen = Generator(seed, size=12, level=2, allow_renames=False)
        seed += 1
        try:
            si = gen.subst_instance(max_tries=20)
        except Exception:
            continue
        s = single_subst(si.replacement, si.target, si.annotation)
        kernel_out = hsub_normal(s, si.subject)
        raw = naive_subst_normalize(
            embed(si.subject), si.target, embed_bound(si.replacement)
        )
        env = {d.var: d.ctype for d in hsub_ctx(s, si.ctx).decls}
        back = readback(raw, hsub_type(s, si.subject_type), env, si.sig)
        assert alpha_equal(kernel_out, back), f"seed {seed - 1}"
        done += 1
    elapsed = time.perf_counter() - started
    assert done >= 1000
    assert elapsed < 60.0, f"{elapsed:.1f}s"


@criterion("lemma suite, >= 200 generated instances each, zero failures")
def test_lemma_suite():
    import test_lemmas

    test_lemmas.test_cumulativity()
    test_lemmas.test_cumulativity_needs_an_independent_context()
    test_lemmas.test_closure_under_independent_merging()
    test_lemmas.test_well_formed_context_extension()
    test_lemmas.test_closure_under_chopping()
    test_lemmas.test_weakening()
    test_lemmas.test_identity_substitution_checks()
    test_lemmas.test_level_k_well_formedness_iff()
    test_lemmas.test_termination_side_condition()
    test_lemmas.test_composition_part_one()
    test_lemmas.test_composition_part_two()
    test_lemmas.test_composition_part_three()
    test_lemmas.test_composition_part_four()
    test_lemmas.test_identity_extension()
    test_lemmas.test_substitution_property_single()
    test_lemmas.test_substitution_property_simultaneous()


@criterion("decidability/totality on 10^4 fuzzed inputs each, classified errors only")
def test_totality_fuzz():
    sig = Generator(0).sig
    tc = TypeChecker(sig, max_depth=2000)
    worst = 0.0
    for seed in range(10000):
        raw = RawGen(seed)
        term = raw.term(3)
        ty = raw.type(2)
        ctx = raw.context(2)
        t0 = time.perf_counter()
        try:
            tc.check_normal(ctx, term, ty)
        except KernelError:
            pass
        worst = max(worst, time.perf_counter() - t0)
    for seed in range(10000):
        raw = RawGen(seed + 10000)
        subject = raw.term(3)
        repl = raw.bound_body(2)
        ann = ContextualType(raw.type(2), raw.context(1, repl.hat.bound))
        t0 = time.perf_counter()
        try:
            s = single_subst(repl, Var("x", repl.hat.bound), ann)
            hsub_normal(s, subject, max_depth=2000)
        except KernelError:
            pass
        worst = max(worst, time.perf_counter() - t0)
    assert worst < 1.0, f"slowest case took {worst:.3f}s"


@criterion("eta discipline: rejection kind and eta-aware entry comparison")
def test_eta_discipline():
    from mlf.errors import ErrorKind
    from mlf.syntax import (
        Decl,
        Signature,
        Sort,
        SortRef,
        TypeConstDecl,
    )
    from mlf.typer import check_signature

    i = TypeConst("i")
    b = TypeConst("b")
    x0, y0 = Var("x", 0), Var("y", 0)
    F1 = Var("F", 1)
    sig = check_signature(
        Signature(
            (
                TypeConstDecl("i", SortRef(Sort.TYPE)),
                TypeConstDecl("b", SortRef(Sort.TYPE)),
            )
        )
    )
    tc = TypeChecker(sig)
    with pytest.raises(KernelError) as e:
        tc.check_normal(
            ctx_of(Decl(x0, ContextualType(Pi(y0, ContextualType(i, EMPTY_CTX), i), EMPTY_CTX))),
            VarClosure(x0, EMPTY_SUBST),
            Pi(y0, ContextualType(i, EMPTY_CTX), i),
        )
    assert e.value.kind == ErrorKind.NOT_ETA_LONG
    psi = ctx_of(Decl(F1, ContextualType(i, ctx_of(Decl(y0, ContextualType(b, EMPTY_CTX))))))
    dom = ctx_of(Decl(Var("G", 1), ContextualType(i, ctx_of(Decl(y0, ContextualType(b, EMPTY_CTX))))))
    expansion = eta_expand_var(
        F1, ContextualType(i, ctx_of(Decl(y0, ContextualType(b, EMPTY_CTX))))
    )
    short = Substitution((Rename(F1),))
    long = Substitution((TermEntry(expansion),))
    other = Substitution((TermEntry(BoundBody(HatContext((y0,), 1), TermConst("k"))),))
    assert tc.equal_subst(psi, short, long, dom)
    assert not tc.equal_subst(psi, short, other, dom)


@criterion("CLI contract: exit codes over the fixture set; --json byte-stable")
def test_cli_contract(capsys):
    cases = [
        (["check", str(FIXTURES / "nat.mlf")], 0),
        (["check", str(FIXTURES / "fol.mlf")], 0),
        (["check", str(FIXTURES / "bad_type.mlf")], 1),
        (["check", str(FIXTURES / "bad_eta.mlf")], 1),
        (["check", str(FIXTURES / "bad_parse.mlf")], 2),
        (["--max-depth", "16", "check", str(FIXTURES / "bomb.mlf")], 3),
    ]
    for argv, expected in cases:
        code = cli_main(argv)
        capsys.readouterr()
        assert code == expected, f"{argv} -> {code}, wanted {expected}"
    argv = ["--json", "check", str(FIXTURES / "nat.mlf")]
    cli_main(argv)
    first = capsys.readouterr().out
    cli_main(argv)
    second = capsys.readouterr().out
    assert first.encode("utf-8") == second.encode("utf-8")
    for line in first.splitlines():
        json.loads(line)
