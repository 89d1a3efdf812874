"""Ordered-context and substitution algebra: merge, chop, lookup, identity.

Merging interleaves two level-sorted sequences like the merge step of
mergesort, working from the right: when the right sequence's last item sits at
a level less than or equal to the left's last, the right item goes rightmost.
The merge is stable and deterministic.  Chopping drops everything below a
level.
"""

from __future__ import annotations

from .errors import ErrorKind, fail
from .syntax import (
    Context,
    ContextualType,
    HatContext,
    Rename,
    Substitution,
    Var,
)


def merge_plan(left_levels, right_levels):
    """Interleaving order for two level-sorted sequences, as (side, index) pairs."""
    i, j = len(left_levels), len(right_levels)
    out = []
    while i > 0 and j > 0:
        if right_levels[j - 1] <= left_levels[i - 1]:
            j -= 1
            out.append(("R", j))
        else:
            i -= 1
            out.append(("L", i))
    for k in range(j - 1, -1, -1):
        out.append(("R", k))
    for k in range(i - 1, -1, -1):
        out.append(("L", k))
    out.reverse()
    return out


def _check_disjoint(left_names, right_names, what):
    clash = set(left_names) & set(right_names)
    if clash:
        fail(
            ErrorKind.DUPLICATE_NAME,
            f"{what} share declared names: {', '.join(sorted(clash))}",
        )


def merge_ctx(left: Context, right: Context) -> Context:
    """Stable level-ordered interleaving of two independent contexts."""
    _check_disjoint(left.names(), right.names(), "merged contexts")
    plan = merge_plan(
        [d.var.level for d in left.decls], [d.var.level for d in right.decls]
    )
    decls = tuple(
        left.decls[k] if side == "L" else right.decls[k] for side, k in plan
    )
    return Context(decls)


def chop_ctx(ctx: Context, n: int) -> Context:
    """Drop exactly the declarations below level n; idempotent."""
    return Context(tuple(d for d in ctx.decls if d.var.level >= n))


def lookup(ctx: Context, v: Var) -> ContextualType:
    """The declared contextual type of v; name and level must both match."""
    for d in ctx.decls:
        if d.var == v:
            return d.ctype
    fail(ErrorKind.UNBOUND_VARIABLE, f"variable {v!r} is not declared")


def merge_subst(
    left: Substitution,
    left_dom: Context,
    right: Substitution,
    right_dom: Context,
) -> tuple[Substitution, Context]:
    """Merge two substitutions by the level order of their domains.

    Entries travel with their domain declarations, so the result matches the
    merged domain positionally.
    """
    if len(left) != len(left_dom) or len(right) != len(right_dom):
        fail(
            ErrorKind.ARITY_MISMATCH,
            "substitution length differs from its domain's "
            f"({len(left)}/{len(left_dom)} and {len(right)}/{len(right_dom)})",
        )
    _check_disjoint(left_dom.names(), right_dom.names(), "merged substitution domains")
    plan = merge_plan(
        [d.var.level for d in left_dom.decls],
        [d.var.level for d in right_dom.decls],
    )
    entries = tuple(
        left.entries[k] if side == "L" else right.entries[k] for side, k in plan
    )
    decls = tuple(
        left_dom.decls[k] if side == "L" else right_dom.decls[k] for side, k in plan
    )
    return Substitution(entries), Context(decls)


def chop_subst(
    subst: Substitution, domain: Context, n: int
) -> tuple[Substitution, Context]:
    """Drop the entries whose domain declaration sits below level n."""
    if len(subst) != len(domain):
        fail(
            ErrorKind.ARITY_MISMATCH,
            f"substitution has {len(subst)} entries for {len(domain)} declarations",
        )
    kept = [
        (e, d)
        for e, d in zip(subst.entries, domain.decls)
        if d.var.level >= n
    ]
    return (
        Substitution(tuple(e for e, _ in kept)),
        Context(tuple(d for _, d in kept)),
    )


def id_subst(hat: HatContext) -> Substitution:
    """The identity substitution: one renaming entry per binder, in order."""
    return Substitution(tuple(Rename(v) for v in hat.binders))
