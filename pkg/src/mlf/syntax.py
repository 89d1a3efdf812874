"""Abstract syntax for canonical LF with multi-level contextual variables.

Terms are beta-normal by construction: applications take atomic heads only,
and every variable occurrence is a closure ``x^n[sigma]`` pairing the variable
with a postponed substitution for its local context.  Variables carry a level
(0 = ordinary bound variable, 1 = meta-variable, 2 = meta^2-variable, ...) and
the level is part of a variable's identity: ``x^0`` and ``x^1`` are distinct.

Contexts are ordered with higher levels to the left, so lower-level variables
may depend on higher-level ones but never the other way around.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Union

from .errors import ErrorKind, KernelError


class Sort(Enum):
    TYPE = "type"
    KIND = "kind"


@dataclass(frozen=True)
class Var:
    """A named variable at some level; identity is the (name, level) pair."""

    name: str
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"negative level on variable {self.name}")

    def __repr__(self):
        return f"{self.name}^{self.level}" if self.level else self.name


# ---------------------------------------------------------------------------
# Types and kinds


class Type:
    """Base class for normal types and kinds."""

    __slots__ = ()


class AtomicType(Type):
    """Base class for atomic types/kinds (spine applications of constants)."""

    __slots__ = ()


@dataclass(frozen=True, repr=False)
class SortRef(AtomicType):
    """The sort ``type`` (or ``kind``) used as an atomic classifier."""

    sort: Sort

    def __repr__(self):
        return self.sort.value


@dataclass(frozen=True, repr=False)
class TypeConst(AtomicType):
    """Reference to a type-family constant declared in the signature."""

    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class TypeApp(AtomicType):
    """Application of an atomic type to one argument.

    Heads are atomic by construction, so a function type can never sit in
    head position and spines are always canonical.
    """

    head: AtomicType
    arg: "BoundBody"

    def __post_init__(self):
        if not isinstance(self.head, AtomicType):
            raise TypeError(f"non-atomic head in a type application: {self.head!r}")

    def __repr__(self):
        return f"{self.head!r} ({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Pi(Type):
    """Dependent function type ``{x^n : A [Phi]} B``."""

    binder: Var
    domain: "ContextualType"
    body: Type

    def __repr__(self):
        return f"{{{self.binder!r} : {self.domain!r}}} {self.body!r}"


@dataclass(frozen=True, repr=False)
class ContextualType:
    """A type paired with the local context its inhabitants may mention."""

    type: Type
    context: "Context"

    def __repr__(self):
        return f"{self.type!r} [{self.context!r}]"


# ---------------------------------------------------------------------------
# Terms


class Term:
    """Base class for normal terms."""

    __slots__ = ()


class AtomicTerm(Term):
    """Base class for atomic (neutral) terms."""

    __slots__ = ()


@dataclass(frozen=True, repr=False)
class VarClosure(AtomicTerm):
    """A variable occurrence ``x^n[sigma]``; level-0 uses carry an empty sigma."""

    var: Var
    subst: "Substitution"

    def __repr__(self):
        return f"{self.var!r}[{self.subst!r}]"


@dataclass(frozen=True, repr=False)
class TermConst(AtomicTerm):
    """Reference to a term constant declared in the signature."""

    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class TermApp(AtomicTerm):
    """Application of an atomic term to one argument."""

    head: AtomicTerm
    arg: "BoundBody"

    def __post_init__(self):
        if not isinstance(self.head, AtomicTerm):
            raise TypeError(f"non-atomic head in an application: {self.head!r}")

    def __repr__(self):
        return f"{self.head!r} ({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Lam(Term):
    """Lambda abstraction; binders are unannotated."""

    binder: Var
    body: Term

    def __repr__(self):
        return f"\\{self.binder!r}. {self.body!r}"


# ---------------------------------------------------------------------------
# Binders, substitutions, contexts


@dataclass(frozen=True, repr=False)
class HatContext:
    """A list of binders (names with levels, no types) below a level bound.

    ``bound`` is the level of the variable this hat context belongs to: all
    binders live at strictly lower levels.
    """

    binders: tuple[Var, ...]
    bound: int = field(default=0)

    def __post_init__(self):
        names = [v.name for v in self.binders]
        if len(set(names)) != len(names):
            raise KernelError(
                ErrorKind.DUPLICATE_NAME,
                f"duplicate binder name in {names}",
            )

    def __repr__(self):
        return ", ".join(repr(v) for v in self.binders)

    def __len__(self):
        return len(self.binders)


@dataclass(frozen=True, repr=False)
class BoundBody:
    """An argument or substitution entry ``hat. body``."""

    hat: HatContext
    body: Term

    def __repr__(self):
        return f"{self.hat!r}. {self.body!r}"


@dataclass(frozen=True, repr=False)
class TermEntry:
    """Substitution entry carrying a term under local binders."""

    body: BoundBody

    def __repr__(self):
        return repr(self.body)


@dataclass(frozen=True, repr=False)
class Rename:
    """Substitution entry mapping a declaration to a variable."""

    var: Var

    def __repr__(self):
        return repr(self.var)


SubstEntry = Union[TermEntry, Rename]


@dataclass(frozen=True, repr=False)
class Substitution:
    """A simultaneous substitution; entry i matches declaration i of its domain."""

    entries: tuple[SubstEntry, ...] = ()

    def __repr__(self):
        return ", ".join(repr(e) for e in self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[SubstEntry]:
        return iter(self.entries)


EMPTY_SUBST = Substitution()


@dataclass(frozen=True, repr=False)
class Decl:
    """A context declaration ``x^n : A [Phi]``."""

    var: Var
    ctype: ContextualType

    def __repr__(self):
        return f"{self.var!r} : {self.ctype!r}"


@dataclass(frozen=True, repr=False)
class Context:
    """An ordered context; higher-level declarations to the left.

    Duplicate declared names are rejected at construction.  Level ordering is
    *not* enforced here: it is checked by ``well_sorted`` and by the typer, so
    that ill-sorted inputs are representable and get a classified error.
    """

    decls: tuple[Decl, ...] = ()

    def __post_init__(self):
        names = [d.var.name for d in self.decls]
        if len(set(names)) != len(names):
            raise KernelError(
                ErrorKind.DUPLICATE_NAME,
                f"duplicate declaration name in context ({', '.join(names)})",
            )

    def __repr__(self):
        return ", ".join(repr(d) for d in self.decls)

    def __len__(self):
        return len(self.decls)

    def __iter__(self) -> Iterator[Decl]:
        return iter(self.decls)

    def names(self) -> frozenset[str]:
        return frozenset(d.var.name for d in self.decls)

    def vars(self) -> tuple[Var, ...]:
        return tuple(d.var for d in self.decls)

    def hat(self, bound: int) -> HatContext:
        """The type-erased view of this context at the given level bound."""
        return HatContext(self.vars(), bound)


EMPTY_CTX = Context()


def ctx_of(*decls: Decl) -> Context:
    return Context(tuple(decls))


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True, repr=False)
class TypeConstDecl:
    """Signature entry ``a : K`` declaring a type-family constant."""

    name: str
    kind: Type

    def __repr__(self):
        return f"{self.name} : {self.kind!r}"


@dataclass(frozen=True, repr=False)
class TermConstDecl:
    """Signature entry ``c : A`` declaring a term constant."""

    name: str
    type: Type

    def __repr__(self):
        return f"{self.name} : {self.type!r}"


SigDecl = Union[TypeConstDecl, TermConstDecl]


@dataclass(frozen=True, repr=False)
class Signature:
    """An ordered signature of constant declarations."""

    decls: tuple[SigDecl, ...] = ()

    def __post_init__(self):
        names = [d.name for d in self.decls]
        if len(set(names)) != len(names):
            raise KernelError(
                ErrorKind.DUPLICATE_NAME, "duplicate constant name in signature"
            )

    def __repr__(self):
        return "\n".join(repr(d) for d in self.decls)

    def __iter__(self) -> Iterator[SigDecl]:
        return iter(self.decls)

    def lookup(self, name: str) -> Optional[SigDecl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    def extend(self, decl: SigDecl) -> "Signature":
        return Signature(self.decls + (decl,))


EMPTY_SIG = Signature()


# ---------------------------------------------------------------------------
# Level bookkeeping


def level_of(ctx: Context) -> int:
    """Least upper bound on declaration levels: max of level+1, 0 if empty."""
    return max((d.var.level + 1 for d in ctx.decls), default=0)


def level_of_vars(vs: Iterable[Var]) -> int:
    return max((v.level + 1 for v in vs), default=0)


def well_sorted(ctx: Context) -> bool:
    """Levels weakly descending left to right; names pairwise distinct.

    Name distinctness already holds by construction; it is re-checked here so
    the predicate stands on its own.
    """
    levels = [d.var.level for d in ctx.decls]
    if any(a < b for a, b in zip(levels, levels[1:])):
        return False
    names = [d.var.name for d in ctx.decls]
    return len(set(names)) == len(names)


def fresh_var(base: Var, avoid: Iterable[str]) -> Var:
    """A variable at base's level whose name avoids the given names."""
    taken = set(avoid)
    name = base.name
    while name in taken:
        name += "'"
    return Var(name, base.level)


# ---------------------------------------------------------------------------
# Free variables


def _free_term(t: Term, bound: set[Var], out: set[Var]):
    match t:
        case Lam(binder=y, body=b):
            extra = y not in bound
            if extra:
                bound.add(y)
            _free_term(b, bound, out)
            if extra:
                bound.discard(y)
        case VarClosure(var=v, subst=s):
            if v not in bound:
                out.add(v)
            _free_subst(s, bound, out)
        case TermConst():
            pass
        case TermApp(head=h, arg=a):
            _free_term(h, bound, out)
            out.update(v for v in free_vars(a) if v not in bound)
        case _:
            raise TypeError(f"not a term: {t!r}")


def _free_subst(s: Substitution, bound: set[Var], out: set[Var]):
    for e in s.entries:
        match e:
            case Rename(var=v):
                if v not in bound:
                    out.add(v)
            case TermEntry(body=bb):
                out.update(v for v in free_vars(bb) if v not in bound)


def free_vars(bb: BoundBody) -> frozenset[Var]:
    """Variables occurring in the body that the bound body does not capture.

    A bound body at level bound n captures its listed binders and, because
    every well-formed body closes over all its lower-level variables, any
    variable below n is treated as captured and never reported.
    """
    out: set[Var] = set()
    _free_term(bb.body, set(bb.hat.binders), out)
    return frozenset(v for v in out if v.level >= bb.hat.bound)


def free_vars_term(t: Term) -> frozenset[Var]:
    """Free variables of a bare term (no surrounding binders)."""
    out: set[Var] = set()
    _free_term(t, set(), out)
    return frozenset(out)


def free_vars_subst(s: Substitution) -> frozenset[Var]:
    """Union of the free variables of a substitution's entries."""
    out: set[Var] = set()
    _free_subst(s, set(), out)
    return frozenset(out)


# ---------------------------------------------------------------------------
# Alpha-equivalence

Node = Union[
    Term, Type, ContextualType, Substitution, Context, BoundBody, SubstEntry
]


class _AlphaEnv:
    """Pairing of bound variables on both sides, de Bruijn style."""

    __slots__ = ("left", "right", "depth")

    def __init__(self):
        self.left: dict[Var, int] = {}
        self.right: dict[Var, int] = {}
        self.depth = 0

    def bind(self, u: Var, v: Var):
        saved = (self.left.get(u), self.right.get(v), self.depth)
        self.left[u] = self.depth
        self.right[v] = self.depth
        self.depth += 1
        return saved

    def unbind(self, u: Var, v: Var, saved):
        lu, rv, d = saved
        self.depth = d
        if lu is None:
            del self.left[u]
        else:
            self.left[u] = lu
        if rv is None:
            del self.right[v]
        else:
            self.right[v] = rv

    def var_equal(self, u: Var, v: Var) -> bool:
        lu = self.left.get(u)
        rv = self.right.get(v)
        if lu is None and rv is None:
            return u == v
        return lu is not None and lu == rv


def _alpha(a, b, env: _AlphaEnv) -> bool:
    if type(a) is not type(b):
        return False
    match a, b:
        case Var(), Var():
            return env.var_equal(a, b)
        case SortRef(sort=s1), SortRef(sort=s2):
            return s1 == s2
        case (TypeConst(name=n1), TypeConst(name=n2)) | (
            TermConst(name=n1),
            TermConst(name=n2),
        ):
            return n1 == n2
        case (TypeApp(head=h1, arg=a1), TypeApp(head=h2, arg=a2)) | (
            TermApp(head=h1, arg=a1),
            TermApp(head=h2, arg=a2),
        ):
            return _alpha(h1, h2, env) and _alpha(a1, a2, env)
        case Pi(binder=x1, domain=d1, body=b1), Pi(binder=x2, domain=d2, body=b2):
            if x1.level != x2.level or not _alpha(d1, d2, env):
                return False
            saved = env.bind(x1, x2)
            ok = _alpha(b1, b2, env)
            env.unbind(x1, x2, saved)
            return ok
        case ContextualType(type=t1, context=c1), ContextualType(type=t2, context=c2):
            return _alpha_under_ctx(c1, c2, env, lambda: _alpha(t1, t2, env))
        case Lam(binder=x1, body=b1), Lam(binder=x2, body=b2):
            if x1.level != x2.level:
                return False
            saved = env.bind(x1, x2)
            ok = _alpha(b1, b2, env)
            env.unbind(x1, x2, saved)
            return ok
        case VarClosure(var=v1, subst=s1), VarClosure(var=v2, subst=s2):
            return env.var_equal(v1, v2) and _alpha(s1, s2, env)
        case BoundBody(hat=h1, body=b1), BoundBody(hat=h2, body=b2):
            if len(h1.binders) != len(h2.binders):
                return False
            if any(u.level != v.level for u, v in zip(h1.binders, h2.binders)):
                return False
            saves = [env.bind(u, v) for u, v in zip(h1.binders, h2.binders)]
            ok = _alpha(b1, b2, env)
            for (u, v), s in zip(
                reversed(list(zip(h1.binders, h2.binders))), reversed(saves)
            ):
                env.unbind(u, v, s)
            return ok
        case Substitution(entries=e1), Substitution(entries=e2):
            if len(e1) != len(e2):
                return False
            return all(_alpha(x, y, env) for x, y in zip(e1, e2))
        case Rename(var=v1), Rename(var=v2):
            return env.var_equal(v1, v2)
        case TermEntry(body=b1), TermEntry(body=b2):
            return _alpha(b1, b2, env)
        case Context(), Context():
            return _alpha_under_ctx(a, b, env, lambda: True)
        case _:
            return False


def _alpha_under_ctx(c1: Context, c2: Context, env: _AlphaEnv, cont) -> bool:
    """Compare two contexts declaration-wise, then run cont with all bound."""
    if len(c1.decls) != len(c2.decls):
        return False
    saves = []
    ok = True
    bound_pairs = []
    for d1, d2 in zip(c1.decls, c2.decls):
        if d1.var.level != d2.var.level or not _alpha(d1.ctype, d2.ctype, env):
            ok = False
            break
        saves.append(env.bind(d1.var, d2.var))
        bound_pairs.append((d1.var, d2.var))
    if ok:
        ok = cont()
    for (u, v), s in zip(reversed(bound_pairs), reversed(saves)):
        env.unbind(u, v, s)
    return ok


def alpha_equal(a: Node, b: Node) -> bool:
    """Equality up to consistent renaming of binders; levels must match.

    Works on terms, types, contextual types, substitutions, contexts, and
    bound bodies.  Substitution entries compare strictly by shape: a renaming
    entry never equals a term entry here (eta-aware comparison lives in the
    typer).
    """
    return _alpha(a, b, _AlphaEnv())


# ---------------------------------------------------------------------------
# Capture-avoiding renaming of free variables (variable for variable)


def rename_free(node, mapping: dict[Var, Var]):
    """Simultaneously rename free variable occurrences per the mapping.

    Binders shadow mapped names as usual; a binder that collides with the
    image of an active mapping entry is itself renamed apart first so no free
    occurrence is captured.
    """
    if not mapping:
        return node
    return _rename(node, dict(mapping))


def _rename_binder(binder: Var, body_parts, mapping):
    """Prepare a binder: drop shadowed entries, dodge value collisions.

    Returns (new_binder, new_mapping, renamed_parts).
    """
    mapping = {k: v for k, v in mapping.items() if k != binder}
    if binder in mapping.values():
        avoid = {v.name for v in mapping.values()}
        for part in body_parts:
            avoid |= {v.name for v in _occurring_names(part)}
        fresh = fresh_var(binder, avoid | {binder.name})
        body_parts = [_rename(p, {binder: fresh}) for p in body_parts]
        binder = fresh
    return binder, mapping, body_parts


def _occurring_names(node) -> set[Var]:
    """All variables occurring anywhere in node (free or bound)."""
    out: set[Var] = set()

    def go(n):
        match n:
            case Var():
                out.add(n)
            case Lam(binder=y, body=b):
                out.add(y)
                go(b)
            case VarClosure(var=v, subst=s):
                out.add(v)
                go(s)
            case TermApp(head=h, arg=a) | TypeApp(head=h, arg=a):
                go(h)
                go(a)
            case BoundBody(hat=h, body=b):
                out.update(h.binders)
                go(b)
            case Substitution(entries=es):
                for e in es:
                    go(e)
            case Rename(var=v):
                out.add(v)
            case TermEntry(body=b):
                go(b)
            case Pi(binder=x, domain=d, body=b):
                out.add(x)
                go(d)
                go(b)
            case ContextualType(type=t, context=c):
                go(t)
                go(c)
            case Context(decls=ds):
                for d in ds:
                    out.add(d.var)
                    go(d.ctype)
            case TermConst() | TypeConst() | SortRef():
                pass
            case _:
                raise TypeError(f"unexpected node: {n!r}")

    go(node)
    return out


def occurring_vars(node) -> set[Var]:
    """All variables occurring anywhere in the node, free or bound."""
    return _occurring_names(node)


def _rename(node, mapping: dict[Var, Var]):
    if not mapping:
        return node
    match node:
        case Lam(binder=y, body=b):
            y2, m2, [b2] = _rename_binder(y, [b], mapping)
            return Lam(y2, _rename(b2, m2))
        case VarClosure(var=v, subst=s):
            return VarClosure(mapping.get(v, v), _rename(s, mapping))
        case TermConst() | TypeConst() | SortRef():
            return node
        case TermApp(head=h, arg=a):
            return TermApp(_rename(h, mapping), _rename(a, mapping))
        case TypeApp(head=h, arg=a):
            return TypeApp(_rename(h, mapping), _rename(a, mapping))
        case BoundBody(hat=h, body=b):
            binders = list(h.binders)
            m2 = dict(mapping)
            body = b
            for i, u in enumerate(binders):
                m2 = {k: v for k, v in m2.items() if k != u}
                if u in m2.values():
                    avoid = {v.name for v in m2.values()}
                    avoid |= {v.name for v in _occurring_names(body)}
                    avoid |= {w.name for w in binders}
                    u2 = fresh_var(u, avoid)
                    body = _rename(body, {u: u2})
                    binders[i] = u2
            return BoundBody(HatContext(tuple(binders), h.bound), _rename(body, m2))
        case Substitution(entries=es):
            return Substitution(tuple(_rename(e, mapping) for e in es))
        case Rename(var=v):
            return Rename(mapping.get(v, v))
        case TermEntry(body=b):
            return TermEntry(_rename(b, mapping))
        case Pi(binder=x, domain=d, body=b):
            d2 = _rename(d, mapping)
            x2, m2, [b2] = _rename_binder(x, [b], mapping)
            return Pi(x2, d2, _rename(b2, m2))
        case ContextualType(type=t, context=c):
            c2, m2 = _rename_ctx_binding(c, mapping)
            return ContextualType(_rename(t, m2), c2)
        case Context():
            c2, _ = _rename_ctx_binding(node, mapping)
            return c2
        case _:
            raise TypeError(f"cannot rename in {node!r}")


def _rename_ctx_binding(ctx: Context, mapping: dict[Var, Var]):
    """Rename inside a context's declaration types.

    Declared names shadow mapped names for the declarations to their right.
    A declaration whose name collides with the image of an active mapping
    entry is renamed apart (it is a binding position for its right siblings).
    """
    decls = list(ctx.decls)
    m = dict(mapping)
    for i, d in enumerate(decls):
        ct = _rename(d.ctype, m)
        m = {k: v for k, v in m.items() if k != d.var}
        var = d.var
        if var in m.values():
            avoid = {v.name for v in m.values()}
            avoid |= {x.var.name for x in decls}
            for rest in decls[i + 1 :]:
                avoid |= {v.name for v in _occurring_names(rest.ctype)}
            var2 = fresh_var(var, avoid)
            ren = {var: var2}
            for j in range(i + 1, len(decls)):
                decls[j] = Decl(decls[j].var, _rename(decls[j].ctype, ren))
            var = var2
        decls[i] = Decl(var, ct)
    return Context(tuple(decls)), m


def rebind_contextual(ct: ContextualType, new_vars: tuple[Var, ...]) -> ContextualType:
    """Rename a contextual type's local declarations, positionally.

    References in later declarations and in the type follow along.  The caller
    is responsible for arity and level agreement.
    """
    if len(new_vars) != len(ct.context.decls):
        raise ValueError("rebind arity mismatch")
    decls = []
    active: dict[Var, Var] = {}
    for d, nv in zip(ct.context.decls, new_vars):
        ctype = _rename(d.ctype, active) if active else d.ctype
        if nv != d.var:
            active = {**active, d.var: nv}
        decls.append(Decl(nv, ctype))
    body = _rename(ct.type, active) if active else ct.type
    return ContextualType(body, Context(tuple(decls)))


def freshen_decl_names(
    ct: ContextualType, avoid: Iterable[str]
) -> ContextualType:
    """Rename the local declarations that collide with the given names."""
    taken = set(avoid)
    occupied = {v.name for v in _occurring_names(ct)}
    new_vars = []
    for d in ct.context.decls:
        if d.var.name in taken:
            nv = fresh_var(d.var, taken | occupied)
            occupied.add(nv.name)
            new_vars.append(nv)
        else:
            new_vars.append(d.var)
    if all(nv == d.var for nv, d in zip(new_vars, ct.context.decls)):
        return ct
    return rebind_contextual(ct, tuple(new_vars))


# ---------------------------------------------------------------------------
# Sizes (used by generators and termination tests)


def size_of(node) -> int:
    match node:
        case Lam(body=b):
            return 1 + size_of(b)
        case VarClosure(subst=s):
            return 1 + size_of(s)
        case TermConst() | TypeConst() | SortRef():
            return 1
        case TermApp(head=h, arg=a) | TypeApp(head=h, arg=a):
            return 1 + size_of(h) + size_of(a)
        case BoundBody(body=b):
            return 1 + size_of(b)
        case Substitution(entries=es):
            return sum(size_of(e) for e in es)
        case Rename():
            return 1
        case TermEntry(body=b):
            return size_of(b)
        case Pi(domain=d, body=b):
            return 1 + size_of(d) + size_of(b)
        case ContextualType(type=t, context=c):
            return size_of(t) + size_of(c)
        case Context(decls=ds):
            return sum(1 + size_of(d.ctype) for d in ds)
        case _:
            raise TypeError(f"no size for {node!r}")
