"""Concrete syntax for .mlf files.

Grammar sketch (declarations and directives end with a top-level dot):

    item   := NAME ':' type '.'
            | '%context' NAME '=' ctx '.'
            | '%check' term ':' type ('in' ctxref)? '.'
            | '%hsub' '[' binders '.' term '/' VAR ':' type ('[' ctx ']')? ']'
                      term ('in' ctxref)? '.'
    type   := '{' VAR ':' type ('[' ctx ']')? '}' type | head args
    term   := '\\' VAR '.' term | head args
    args   := ( '(' (binder-list '.')? term ')' )*        binder-list comma-split
    ctx    := (VAR ':' type ('[' ctx ']')?) (',' ...)*
    subst  := entry (',' entry)*                          inside 'x^n[...]'
    entry  := VAR | VAR* '.' term                         binders space-split

Variables are written ``x^n``; ``^0`` may be omitted.  A ``%`` not followed by
a directive keyword starts a comment running to the end of the line.

Names are resolved in layers: binders in scope resolve immediately; remaining
bare names resolve against the local context of their contextual type, then
against the directive's context, and whatever is left refers to signature
constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .syntax import (
    BoundBody,
    Context,
    ContextualType,
    Decl,
    HatContext,
    Lam,
    Pi,
    Rename,
    AtomicTerm,
    Sort,
    SortRef,
    Substitution,
    Term,
    TermApp,
    TermConst,
    TermEntry,
    Type,
    TypeApp,
    TypeConst,
    Var,
    VarClosure,
    EMPTY_CTX,
    EMPTY_SUBST,
    level_of_vars,
)

RESERVED = {"type", "kind", "in"}
DIRECTIVES = {"check", "hsub", "context"}


class ParseError(Exception):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Placeholders for names whose binding site appears later in the source


@dataclass(frozen=True)
class _PendingClosure(AtomicTerm):
    name: str
    subst: Substitution


@dataclass(frozen=True)
class _PendingRename:
    name: str


# ---------------------------------------------------------------------------
# Lexer


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int
    level: Optional[int] = None


_PUNCT = {
    "[": "lbrack",
    "]": "rbrack",
    "{": "lbrace",
    "}": "rbrace",
    "(": "lparen",
    ")": "rparen",
    ":": "colon",
    ",": "comma",
    ".": "dot",
    "\\": "backslash",
    "/": "slash",
    "=": "equals",
}


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i + 1 : j]
            if word in DIRECTIVES:
                toks.append(Token("directive", word, line, col))
                col += j - i
                i = j
                continue
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            name = text[i:j]
            level = None
            if j < n and text[j] == "^":
                k = j + 1
                if k >= n or not text[k].isdigit():
                    raise ParseError("expected a level after '^'", line, col + (j - i))
                while k < n and text[k].isdigit():
                    k += 1
                level = int(text[j + 1 : k])
                j = k
            toks.append(Token("ident", name, line, col, level))
            col += j - i
            i = j
            continue
        if ch in _PUNCT:
            toks.append(Token(_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Source items


@dataclass(frozen=True)
class DeclItem:
    name: str
    classifier: Type
    line: int


@dataclass(frozen=True)
class ContextItem:
    name: str
    context: Context
    line: int


CtxRef = Union[None, str, Context]


@dataclass(frozen=True)
class CheckItem:
    term: Term
    type: Type
    context: CtxRef
    line: int


@dataclass(frozen=True)
class HsubItem:
    replacement: BoundBody
    target: Var
    annotation: ContextualType
    subject: Term
    context: CtxRef
    line: int


SourceItem = Union[DeclItem, ContextItem, CheckItem, HsubItem]


@dataclass(frozen=True)
class SourceFile:
    items: tuple[SourceItem, ...]


# ---------------------------------------------------------------------------
# Name resolution


def resolve_names(node, mapping: dict[str, int]):
    """Replace pending references per the name -> level mapping.

    Bare constants whose name is mapped become level-``mapping[name]``
    variable closures with an empty substitution; unmapped pending closures
    and renamings default to level 0.
    """

    def var_for(name: str) -> Var:
        return Var(name, mapping.get(name, 0))

    def go(n):
        match n:
            case TermConst(name=name):
                if name in mapping:
                    return VarClosure(var_for(name), EMPTY_SUBST)
                return n
            case _PendingClosure(name=name, subst=s):
                return VarClosure(var_for(name), go(s))
            case _PendingRename(name=name):
                return Rename(var_for(name))
            case VarClosure(var=v, subst=s):
                return VarClosure(v, go(s))
            case Lam(binder=x, body=b):
                return Lam(x, go(b))
            case TermApp(head=h, arg=a):
                return TermApp(go(h), go(a))
            case TypeApp(head=h, arg=a):
                return TypeApp(go(h), go(a))
            case BoundBody(hat=h, body=b):
                return BoundBody(h, go(b))
            case Substitution(entries=es):
                return Substitution(tuple(go(e) for e in es))
            case TermEntry(body=b):
                return TermEntry(go(b))
            case Rename():
                return n
            case Pi(binder=x, domain=d, body=b):
                return Pi(x, go(d), go(b))
            case ContextualType(type=t, context=c):
                return ContextualType(go(t), go(c))
            case Context(decls=ds):
                return Context(tuple(Decl(d.var, go(d.ctype)) for d in ds))
            case SortRef() | TypeConst():
                return n
            case _:
                raise TypeError(f"cannot resolve names in {n!r}")

    return go(node)


# ---------------------------------------------------------------------------
# Parser


class Parser:
    def __init__(self, text: str, sig_names: Optional[set[str]] = None):
        self.toks = tokenize(text)
        self.pos = 0
        self.sig_names: set[str] = set(sig_names or ())
        self.scopes: list[dict[str, int]] = []

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead=0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, kind: str, ahead=0) -> bool:
        return self.peek(ahead).kind == kind

    def expect(self, kind: str, what: str = "") -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(
                f"expected {what or kind}, found {t.value!r}", t.line, t.col
            )
        return self.next()

    def error(self, message) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)

    # -- scopes -----------------------------------------------------------

    def _scope_level(self, name) -> Optional[int]:
        for sc in reversed(self.scopes):
            if name in sc:
                return sc[name]
        return None

    # -- variables ----------------------------------------------------------

    def parse_var(self) -> Var:
        t = self.expect("ident", "a variable")
        if t.value in RESERVED:
            raise ParseError(f"{t.value!r} is reserved", t.line, t.col)
        return Var(t.value, t.level or 0)

    # -- terms --------------------------------------------------------------

    def parse_term(self) -> Term:
        if self.at("backslash"):
            self.next()
            v = self.parse_var()
            self.expect("dot", "'.' after the binder")
            self.scopes.append({v.name: v.level})
            body = self.parse_term()
            self.scopes.pop()
            return Lam(v, body)
        return self.parse_atomic_term()

    def parse_atomic_term(self) -> Term:
        t = self.expect("ident", "a term")
        if t.value in RESERVED:
            raise ParseError(f"{t.value!r} cannot start a term", t.line, t.col)
        head = self._resolve_term_head(t)
        while self.at("lparen"):
            self.next()
            arg = self.parse_arg_body()
            self.expect("rparen", "')'")
            head = TermApp(head, arg)
        return head

    def _resolve_term_head(self, t: Token):
        name = t.value
        level = t.level
        scoped = self._scope_level(name)
        if self.at("lbrack"):
            self.next()
            subst = self.parse_subst()
            self.expect("rbrack", "']'")
            if level is not None:
                return VarClosure(Var(name, level), subst)
            if scoped is not None:
                return VarClosure(Var(name, scoped), subst)
            return _PendingClosure(name, subst)
        if level is not None:
            return VarClosure(Var(name, level), EMPTY_SUBST)
        if scoped is not None:
            return VarClosure(Var(name, scoped), EMPTY_SUBST)
        return TermConst(name)

    def parse_arg_body(self) -> BoundBody:
        """An application argument: optional comma-split binders, then a term."""
        binders = self._try_binder_list("comma")
        if binders is None:
            binders = ()
        self.scopes.append({v.name: v.level for v in binders})
        body = self.parse_term()
        self.scopes.pop()
        hat = HatContext(tuple(binders), level_of_vars(binders))
        return BoundBody(hat, body)

    def _try_binder_list(self, sep: str) -> Optional[tuple[Var, ...]]:
        """Parse ``x, y, z .`` (or space-split when sep is None); backtracks."""
        start = self.pos
        binders: list[Var] = []
        while True:
            if self.at("dot"):
                self.next()
                return tuple(binders)
            if not self.at("ident") or self.peek().value in RESERVED:
                break
            binders.append(self.parse_var())
            if sep == "comma":
                if self.at("comma"):
                    self.next()
                    continue
                if self.at("dot"):
                    continue
                break
        self.pos = start
        return None

    # -- substitutions ------------------------------------------------------

    def parse_subst(self) -> Substitution:
        entries = []
        if self.at("rbrack"):
            return EMPTY_SUBST
        while True:
            entries.append(self.parse_entry())
            if self.at("comma"):
                self.next()
                continue
            break
        return Substitution(tuple(entries))

    def parse_entry(self):
        if self.at("dot"):
            self.next()
            body = self.parse_term()
            return TermEntry(BoundBody(HatContext((), 0), body))
        binders = self._try_binder_list(None)
        if binders is not None:
            self.scopes.append({v.name: v.level for v in binders})
            body = self.parse_term()
            self.scopes.pop()
            hat = HatContext(tuple(binders), level_of_vars(binders))
            return TermEntry(BoundBody(hat, body))
        t = self.expect("ident", "a substitution entry")
        if t.value in RESERVED:
            raise ParseError(f"{t.value!r} is reserved", t.line, t.col)
        if t.level is not None:
            return Rename(Var(t.value, t.level))
        scoped = self._scope_level(t.value)
        if scoped is not None:
            return Rename(Var(t.value, scoped))
        return _PendingRename(t.value)

    # -- types ----------------------------------------------------------------

    def parse_type(self) -> Type:
        if self.at("lbrace"):
            self.next()
            v = self.parse_var()
            self.expect("colon", "':' after the binder")
            dom = self.parse_ctype()
            self.expect("rbrace", "'}'")
            self.scopes.append({v.name: v.level})
            body = self.parse_type()
            self.scopes.pop()
            return Pi(v, dom, body)
        return self.parse_atomic_type()

    def parse_atomic_type(self) -> Type:
        t = self.expect("ident", "a type")
        if t.value == "type":
            head: Type = SortRef(Sort.TYPE)
        elif t.value == "kind":
            head = SortRef(Sort.KIND)
        elif t.value in RESERVED:
            raise ParseError(f"{t.value!r} cannot start a type", t.line, t.col)
        else:
            head = TypeConst(t.value)
        while self.at("lparen"):
            self.next()
            arg = self.parse_arg_body()
            self.expect("rparen", "')'")
            head = TypeApp(head, arg)
        return head

    def parse_ctype(self) -> ContextualType:
        ty = self.parse_type()
        local = EMPTY_CTX
        if self.at("lbrack"):
            self.next()
            local = self.parse_context(stop="rbrack")
            self.expect("rbrack", "']'")
        ty = resolve_names(ty, {d.var.name: d.var.level for d in local.decls})
        return ContextualType(ty, local)

    # -- contexts ---------------------------------------------------------

    def parse_context(self, stop: str) -> Context:
        decls: list[Decl] = []
        mapping: dict[str, int] = {}
        if self.at(stop) or self.at("dot"):
            return EMPTY_CTX
        while True:
            v = self.parse_var()
            self.expect("colon", "':' in a context declaration")
            ct = self.parse_ctype()
            ct = resolve_names(ct, mapping)
            decls.append(Decl(v, ct))
            mapping[v.name] = v.level
            if self.at("comma"):
                self.next()
                continue
            break
        return Context(tuple(decls))

    # -- items ---------------------------------------------------------------

    def parse_file(self) -> SourceFile:
        items: list[SourceItem] = []
        while not self.at("eof"):
            items.append(self.parse_item())
        return SourceFile(tuple(items))

    def parse_item(self) -> SourceItem:
        t = self.peek()
        if t.kind == "directive":
            self.next()
            if t.value == "context":
                return self._parse_context_item(t)
            if t.value == "check":
                return self._parse_check_item(t)
            if t.value == "hsub":
                return self._parse_hsub_item(t)
            raise ParseError(f"unknown directive %{t.value}", t.line, t.col)
        name = self.expect("ident", "a declaration")
        if name.value in RESERVED:
            raise ParseError(f"{name.value!r} is reserved", name.line, name.col)
        if name.level is not None:
            raise ParseError("constants carry no level", name.line, name.col)
        self.expect("colon", "':' in a declaration")
        classifier = self.parse_type()
        self.expect("dot", "'.' ending the declaration")
        self.sig_names.add(name.value)
        return DeclItem(name.value, classifier, name.line)

    def _parse_context_item(self, t: Token) -> ContextItem:
        name = self.expect("ident", "a context name")
        self.expect("equals", "'='")
        ctx = self.parse_context(stop="dot")
        self.expect("dot", "'.' ending the directive")
        return ContextItem(name.value, ctx, t.line)

    def _parse_ctx_ref(self) -> CtxRef:
        if not (self.at("ident") and self.peek().value == "in"):
            return None
        self.next()
        if self.at("ident") and not self.at("colon", 1):
            name = self.next()
            return name.value
        return self.parse_context(stop="dot")

    def _parse_check_item(self, t: Token) -> CheckItem:
        term = self.parse_term()
        self.expect("colon", "':' separating term and type")
        ty = self.parse_type()
        ref = self._parse_ctx_ref()
        self.expect("dot", "'.' ending the directive")
        return CheckItem(term, ty, ref, t.line)

    def _parse_hsub_item(self, t: Token) -> HsubItem:
        self.expect("lbrack", "'['")
        binders = self._try_binder_list(None)
        if binders is None:
            raise self.error("expected binders and '.' in the replacement")
        self.scopes.append({v.name: v.level for v in binders})
        replacement_body = self.parse_term()
        self.scopes.pop()
        self.expect("slash", "'/'")
        target = self.parse_var()
        self.expect("colon", "':' before the annotation type")
        ann_type = self.parse_type()
        local = EMPTY_CTX
        if self.at("lbrack"):
            self.next()
            local = self.parse_context(stop="rbrack")
            self.expect("rbrack", "']'")
        self.expect("rbrack", "']' closing the substitution")
        subject = self.parse_term()
        ref = self._parse_ctx_ref()
        self.expect("dot", "'.' ending the directive")
        ann_type = resolve_names(
            ann_type, {d.var.name: d.var.level for d in local.decls}
        )
        if any(v.level >= target.level for v in binders):
            raise ParseError(
                "replacement binders must sit below the target's level",
                t.line,
                t.col,
            )
        hat = HatContext(tuple(binders), target.level)
        return HsubItem(
            BoundBody(hat, replacement_body),
            target,
            ContextualType(ann_type, local),
            subject,
            ref,
            t.line,
        )


def parse_file(text: str, sig_names: Optional[set[str]] = None) -> SourceFile:
    return Parser(text, sig_names).parse_file()
