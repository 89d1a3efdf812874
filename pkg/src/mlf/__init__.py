"""Canonical LF with multi-level contextual variables: kernel, parser, CLI.

Terms are beta-normal, eta-long canonical forms.  Variables carry a level
(bound variables at 0, meta-variables at 1, meta^2-variables at 2, ...) and
occur as closures paired with a substitution for their local context.
Hereditary substitution keeps everything canonical; the bidirectional checker
decides all judgements.
"""

from .errors import ErrorKind, KernelError
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
    alpha_equal,
    free_vars,
    level_of,
    well_sorted,
)
from .contexts import chop_ctx, chop_subst, id_subst, lookup, merge_ctx, merge_subst
from .approx import (
    ArrowApprox,
    BaseApprox,
    CtxApprox,
    CtxTypeApprox,
    approx_leq,
    approx_lt,
    erase_ctx,
    erase_type,
)
from .hsubst import (
    Reduced,
    SingleSubst,
    StillNeutral,
    hsub_ctx,
    hsub_neutral,
    hsub_normal,
    hsub_subst,
    hsub_type,
    simsub_ctx,
    simsub_neutral,
    simsub_normal,
    simsub_subst,
    simsub_type,
    single_subst,
)
from .typer import TypeChecker, check_signature, eta_expand_var
from .parser import ParseError, parse_file

__all__ = [
    "ErrorKind",
    "KernelError",
    "BoundBody",
    "Context",
    "ContextualType",
    "Decl",
    "HatContext",
    "Lam",
    "Pi",
    "Rename",
    "Signature",
    "Sort",
    "SortRef",
    "Substitution",
    "Term",
    "TermApp",
    "TermConst",
    "TermConstDecl",
    "TermEntry",
    "Type",
    "TypeApp",
    "TypeConst",
    "TypeConstDecl",
    "Var",
    "VarClosure",
    "alpha_equal",
    "free_vars",
    "level_of",
    "well_sorted",
    "chop_ctx",
    "chop_subst",
    "id_subst",
    "lookup",
    "merge_ctx",
    "merge_subst",
    "ArrowApprox",
    "BaseApprox",
    "CtxApprox",
    "CtxTypeApprox",
    "approx_leq",
    "approx_lt",
    "erase_ctx",
    "erase_type",
    "Reduced",
    "SingleSubst",
    "StillNeutral",
    "hsub_ctx",
    "hsub_neutral",
    "hsub_normal",
    "hsub_subst",
    "hsub_type",
    "simsub_ctx",
    "simsub_neutral",
    "simsub_normal",
    "simsub_subst",
    "simsub_type",
    "single_subst",
    "TypeChecker",
    "check_signature",
    "eta_expand_var",
    "ParseError",
    "parse_file",
]
