"""Command-line driver for .mlf files.

Subcommands:

* ``check FILE``   parse, check the signature, run every directive
* ``hsub FILE``    run the substitution directives and print the results
* ``erase FILE``   print the type approximations of the term constants
* ``selftest``     run the built-in unit suite and generator cross-checks

Exit codes: 0 success, 1 type or substitution error, 2 parse error,
3 internal or budget error.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading

from . import printer
from .approx import erase_type
from .errors import ErrorKind, KernelError
from .hsubst import hsub_normal, single_subst
from .parser import (
    CheckItem,
    ContextItem,
    DeclItem,
    HsubItem,
    ParseError,
    SourceFile,
    parse_file,
    resolve_names,
)
from .syntax import (
    Context,
    Pi,
    Sort,
    SortRef,
    TermConstDecl,
    TypeConstDecl,
    EMPTY_CTX,
    EMPTY_SIG,
    level_of,
)
from .typer import TypeChecker

EXIT_OK = 0
EXIT_TYPE_ERROR = 1
EXIT_PARSE_ERROR = 2
EXIT_INTERNAL = 3

_STACK_BYTES = 256 * 1024 * 1024


def _run_deep(fn, max_depth: int):
    """Run fn on a worker thread with a large stack and recursion limit."""
    box = {}

    def work():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, max_depth * 12 + 10000))
        try:
            box["value"] = fn()
        except BaseException as e:  # noqa: BLE001 - reported to the caller
            box["error"] = e
        finally:
            sys.setrecursionlimit(old)

    old_size = threading.stack_size(_STACK_BYTES)
    try:
        t = threading.Thread(target=work)
        t.start()
        t.join()
    finally:
        threading.stack_size(old_size)
    if "error" in box:
        raise box["error"]
    return box["value"]


def _classify(classifier) -> bool:
    """True when a declaration's classifier is a kind."""
    t = classifier
    while isinstance(t, Pi):
        t = t.body
    return isinstance(t, SortRef)


class Diagnostic:
    def __init__(self, index, form, line):
        self.index = index
        self.form = form
        self.line = line
        self.status = "ok"
        self.error_kind = None
        self.message = None
        self.path = []
        self.result = None

    def set_error(self, e: KernelError):
        self.status = "error"
        self.error_kind = e.kind.value
        self.message = e.message
        self.path = list(e.path)

    def to_json(self) -> str:
        return json.dumps(
            {
                "directive": self.index,
                "form": self.form,
                "line": self.line,
                "status": self.status,
                "error_kind": self.error_kind,
                "message": self.message,
                "path": self.path,
                "result": self.result,
            },
            sort_keys=True,
        )

    def to_text(self) -> str:
        head = f"[{self.index}] {self.form} (line {self.line})"
        if self.status == "ok":
            tail = f": {self.result}" if self.result is not None else ""
            return f"ok    {head}{tail}"
        loc = "/".join(self.path)
        at = f" at {loc}" if loc else ""
        return f"error {head}: {self.error_kind}{at}: {self.message}"


class Runner:
    """Processes the items of one source file in order."""

    def __init__(self, max_depth: int, trace=None, validate_contexts=True):
        self.sig = EMPTY_SIG
        self.contexts: dict[str, Context] = {}
        self.max_depth = max_depth
        self.trace = trace
        self.validate_contexts = validate_contexts
        self.diagnostics: list[Diagnostic] = []

    def _checker(self) -> TypeChecker:
        return TypeChecker(self.sig, max_depth=self.max_depth, trace=self.trace)

    def _resolve_ctx(self, ref) -> Context:
        if ref is None:
            return EMPTY_CTX
        if isinstance(ref, Context):
            if self.validate_contexts:
                tc = self._checker()
                tc.check_ctx(EMPTY_CTX, ref, level_of(ref))
            return ref
        ctx = self.contexts.get(ref)
        if ctx is None:
            raise KernelError(
                ErrorKind.ILL_FORMED_CONTEXT, f"unknown context name {ref!r}"
            )
        return ctx

    def run(self, source: SourceFile) -> int:
        for i, item in enumerate(source.items):
            form = {
                DeclItem: "declaration",
                ContextItem: "context",
                CheckItem: "check",
                HsubItem: "hsub",
            }[type(item)]
            diag = Diagnostic(i, form, item.line)
            self.diagnostics.append(diag)
            try:
                self._run_item(item)
            except KernelError as e:
                diag.set_error(e)
            except RecursionError:
                diag.set_error(
                    KernelError(
                        ErrorKind.DEPTH_EXCEEDED, "recursion limit exhausted"
                    )
                )
        return self.exit_code()

    def exit_code(self) -> int:
        code = EXIT_OK
        for d in self.diagnostics:
            if d.status != "ok":
                if d.error_kind == ErrorKind.DEPTH_EXCEEDED.value:
                    return EXIT_INTERNAL
                code = EXIT_TYPE_ERROR
        return code

    def _run_item(self, item):
        match item:
            case DeclItem(name=name, classifier=classifier):
                tc = self._checker()
                if _classify(classifier):
                    tc.check_type(EMPTY_CTX, classifier, Sort.KIND)
                    decl = TypeConstDecl(name, classifier)
                else:
                    tc.check_type(EMPTY_CTX, classifier, Sort.TYPE)
                    decl = TermConstDecl(name, classifier)
                self.sig = self.sig.extend(decl)
            case ContextItem(name=name, context=ctx):
                tc = self._checker()
                tc.check_ctx(EMPTY_CTX, ctx, level_of(ctx))
                self.contexts[name] = ctx
            case CheckItem(term=term, type=ty, context=ref):
                ctx = self._resolve_ctx(ref)
                mapping = {d.var.name: d.var.level for d in ctx.decls}
                term = resolve_names(term, mapping)
                ty = resolve_names(ty, mapping)
                tc = self._checker()
                tc.check_type(ctx, ty, Sort.TYPE)
                tc.check_normal(ctx, term, ty)
            case HsubItem() as h:
                self._run_hsub(h)
            case _:
                raise TypeError(f"unknown item {item!r}")

    def _run_hsub(self, h: HsubItem) -> str:
        ctx = self._resolve_ctx(h.context)
        mapping = {d.var.name: d.var.level for d in ctx.decls}
        mapping[h.target.name] = h.target.level
        subject = resolve_names(h.subject, mapping)
        annotation = resolve_names(h.annotation, mapping)
        replacement = resolve_names(h.replacement, mapping)
        s = single_subst(replacement, h.target, annotation)
        result = hsub_normal(s, subject, max_depth=self.max_depth)
        text = printer.show_term(result)
        self.diagnostics[-1].result = text
        return text


def _emit(diags, as_json: bool, out):
    for d in diags:
        print(d.to_json() if as_json else d.to_text(), file=out)


def _cmd_check(args) -> int:
    return _with_parsed(args, lambda runner, src: runner.run(src))


def _cmd_hsub(args) -> int:
    def go(runner: Runner, src: SourceFile) -> int:
        runner.validate_contexts = False
        hsubs = [it for it in src.items if isinstance(it, HsubItem)]
        contexts = [it for it in src.items if isinstance(it, ContextItem)]
        for c in contexts:
            runner.contexts[c.name] = c.context
        for i, h in enumerate(hsubs):
            diag = Diagnostic(i, "hsub", h.line)
            runner.diagnostics.append(diag)
            try:
                runner._run_hsub(h)
            except KernelError as e:
                diag.set_error(e)
            except RecursionError:
                diag.set_error(
                    KernelError(ErrorKind.DEPTH_EXCEEDED, "recursion limit exhausted")
                )
        return runner.exit_code()

    return _with_parsed(args, go)


def _cmd_erase(args) -> int:
    def go(runner: Runner, src: SourceFile) -> int:
        idx = 0
        for item in src.items:
            if isinstance(item, DeclItem) and not _classify(item.classifier):
                diag = Diagnostic(idx, "erase", item.line)
                runner.diagnostics.append(diag)
                idx += 1
                try:
                    approx = erase_type(item.classifier)
                    diag.result = f"{item.name} : {printer.show_approx(approx)}"
                except KernelError as e:
                    diag.set_error(e)
        return runner.exit_code()

    return _with_parsed(args, go)


def _with_parsed(args, body) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"cannot read {args.file}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    trace = (lambda msg: print(msg, file=sys.stderr)) if args.trace else None
    runner = Runner(args.max_depth, trace=trace)

    def work():
        try:
            src = parse_file(text)
        except ParseError as e:
            return EXIT_PARSE_ERROR, e
        return body(runner, src), None

    try:
        code, parse_err = _run_deep(work, args.max_depth)
    except RecursionError:
        print("internal error: recursion limit exhausted", file=sys.stderr)
        return EXIT_INTERNAL
    if parse_err is not None:
        if args.json:
            print(
                json.dumps(
                    {
                        "directive": None,
                        "form": "parse",
                        "line": parse_err.line,
                        "status": "error",
                        "error_kind": "ParseError",
                        "message": parse_err.message,
                        "path": [f"{parse_err.line}:{parse_err.col}"],
                        "result": None,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(f"parse error: {parse_err}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    _emit(runner.diagnostics, args.json, sys.stdout)
    return code


def _cmd_selftest(args) -> int:
    from . import selftest

    def work():
        return selftest.run(
            seeds=args.seeds,
            size=args.size,
            level=args.level,
            as_json=args.json,
            out=sys.stdout,
        )

    return _run_deep(work, args.max_depth)


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mlf",
        description="Type checker for multi-level contextual LF (.mlf files)",
    )
    ap.add_argument("--json", action="store_true", help="machine-readable diagnostics")
    ap.add_argument("--trace", action="store_true", help="print each typing rule applied")
    ap.add_argument(
        "--max-depth",
        type=int,
        default=10000,
        metavar="N",
        help="recursion budget (default 10000)",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    p_check = sub.add_parser("check", help="check a source file")
    p_check.add_argument("file")
    p_check.set_defaults(fn=_cmd_check)
    p_hsub = sub.add_parser("hsub", help="run substitution directives")
    p_hsub.add_argument("file")
    p_hsub.set_defaults(fn=_cmd_hsub)
    p_erase = sub.add_parser("erase", help="print type approximations")
    p_erase.add_argument("file")
    p_erase.set_defaults(fn=_cmd_erase)
    p_self = sub.add_parser("selftest", help="run the built-in test suite")
    p_self.add_argument("--seeds", type=int, default=25)
    p_self.add_argument("--size", type=int, default=8)
    p_self.add_argument("--level", type=int, default=2)
    p_self.set_defaults(fn=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KernelError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except RecursionError:
        print("internal error: recursion limit exhausted", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
