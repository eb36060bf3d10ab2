"""Line-oriented concrete syntax for transition programs (``.ctp``).

    shared <name> = <int>|*
    local <Proc>.<name> = <int>|*
    init <formula>
    resource <name> <= <linterm>
    flag <name>
    property always <formula>
    process <Name> {
      <src> -> <dst> : [<guard>] <var> := <linexpr> ;
      <src> -> <dst> : [<guard>] skip ;
    }

Comments run from ``#`` to end of line.  Location 0 is each process's
entry point.  Inside a process block a bare variable name refers to that
process's local when one is declared, to the shared variable otherwise;
rendering always emits the qualified form, and ``parse(render(p))`` is
structurally equal to ``p``.
"""

from __future__ import annotations

from typing import Optional

from .formula import (
    TRUE,
    Atom,
    LinTerm,
    ParseError,
    TokenStream,
    atom_le,
    conj,
    map_atoms,
    parse_formula_stream,
    parse_term_stream,
    render,
    tokenize,
)
from .program import Flag, Process, Program, Resource, Transition

_KEYWORDS = {"shared", "local", "init", "resource", "flag", "property", "process"}


def parse(text: str) -> Program:
    """Parse program text; raises ParseError with line/column on bad input."""
    shared = []
    locals_ = []
    init_parts = []
    annotations = []
    prop_parts = []
    blocks = []  # (name, line, [raw transition token streams])

    lines = text.split("\n")
    current: Optional[list] = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if current is not None:
            if line == "}":
                current = None
                continue
            current.append((lineno, line))
            continue
        ts = TokenStream(tokenize(line, start_line=lineno))
        head = ts.peek()
        if head.kind != "ident" or head.text not in _KEYWORDS:
            raise ParseError(f"expected a declaration, got {head.text!r}", lineno, head.column)
        ts.next()
        if head.text == "shared":
            shared.append(_parse_var_decl(ts, allow_dot=False))
        elif head.text == "local":
            name, init = _parse_var_decl(ts, allow_dot=True)
            if "." not in name:
                raise ParseError("local variables are written <Process>.<name>", lineno, 1)
            locals_.append((name, init))
        elif head.text == "init":
            init_parts.append(parse_formula_stream(ts))
            _expect_eol(ts)
        elif head.text == "resource":
            var = _expect_ident(ts)
            ts.expect_sym("<=")
            bound = parse_term_stream(ts)
            _expect_eol(ts)
            annotations.append(Resource(var, atom_le(LinTerm.var(var), bound)))
        elif head.text == "flag":
            annotations.append(Flag(_expect_ident(ts)))
            _expect_eol(ts)
        elif head.text == "property":
            kw = ts.peek()
            if kw.kind != "ident" or kw.text != "always":
                raise ParseError("expected 'always' after 'property'", kw.line, kw.column)
            ts.next()
            prop_parts.append(parse_formula_stream(ts))
            _expect_eol(ts)
        elif head.text == "process":
            name = _expect_ident(ts)
            ts.expect_sym("{")
            _expect_eol(ts)
            current = []
            blocks.append((name, lineno, current))
    if current is not None:
        raise ParseError("unterminated process block", len(lines), 1)
    if not prop_parts:
        raise ParseError("missing 'property always' declaration", len(lines), 1)

    shared_names = {n for n, _ in shared}
    local_names = {n for n, _ in locals_}
    process_names = [name for name, _, _ in blocks]
    if len(set(process_names)) != len(process_names):
        raise ParseError("duplicate process name", 1, 1)
    for qual, _ in locals_:
        owner = qual.split(".", 1)[0]
        if owner not in process_names:
            raise ParseError(f"local variable {qual!r} names unknown process {owner!r}", 1, 1)

    processes = []
    tid = 0
    for index, (name, _, entries) in enumerate(blocks):
        transitions = []
        for lineno, line in entries:
            t = _parse_transition(line, lineno, tid, index, name, shared_names, local_names)
            transitions.append(t)
            tid += 1
        processes.append(Process(index, name, 0, tuple(transitions)))

    prop = prop_parts[0] if len(prop_parts) == 1 else conj(prop_parts)
    init = conj(init_parts)
    return Program(
        shared=tuple(shared),
        locals=tuple(locals_),
        processes=tuple(processes),
        prop=prop,
        init_constraint=init,
        annotations=tuple(annotations),
    )


def _parse_var_decl(ts: TokenStream, allow_dot: bool):
    name = _expect_ident(ts)
    if not allow_dot and "." in name:
        ts.error(f"unexpected '.' in shared variable name {name!r}")
    ts.expect_sym("=")
    t = ts.peek()
    if t.kind == "sym" and t.text == "*":
        ts.next()
        init = None
    else:
        sign = 1
        if ts.try_sym("-"):
            sign = -1
        t = ts.peek()
        if t.kind != "int":
            ts.error("expected integer or '*' as initial value")
        ts.next()
        init = sign * int(t.text)
    _expect_eol(ts)
    return name, init


def _expect_ident(ts: TokenStream) -> str:
    t = ts.peek()
    if t.kind != "ident":
        ts.error(f"expected a name, got {t.text or 'end of line'!r}")
    ts.next()
    return t.text


def _expect_eol(ts: TokenStream) -> None:
    t = ts.peek()
    if t.kind != "eof":
        ts.error(f"trailing input {t.text!r}")


def _parse_transition(line, lineno, tid, index, procname, shared_names, local_names):
    ts = TokenStream(tokenize(line, start_line=lineno))
    src = _expect_int(ts)
    ts.expect_sym("->")
    dst = _expect_int(ts)
    ts.expect_sym(":")
    ts.expect_sym("[")
    guard = parse_formula_stream(ts)
    ts.expect_sym("]")
    t = ts.peek()
    if t.kind == "ident" and t.text == "skip":
        ts.next()
        assign = None
    else:
        var = _expect_ident(ts)
        ts.expect_sym(":=")
        expr = parse_term_stream(ts)
        var = _resolve_name(var, procname, shared_names, local_names, ts)
        expr = _resolve_term(expr, procname, shared_names, local_names, ts)
        assign = (var, expr)
    ts.expect_sym(";")
    _expect_eol(ts)
    guard = map_atoms(
        guard,
        lambda a: Atom(
            _resolve_term(a.lhs, procname, shared_names, local_names, ts),
            a.rel,
            _resolve_term(a.rhs, procname, shared_names, local_names, ts),
        ),
    )
    return Transition(tid, index, src, dst, guard, assign)


def _expect_int(ts: TokenStream) -> int:
    t = ts.peek()
    if t.kind != "int":
        ts.error(f"expected a location number, got {t.text or 'end of line'!r}")
    ts.next()
    return int(t.text)


def _resolve_name(name, procname, shared_names, local_names, ts) -> str:
    if "." in name:
        owner = name.split(".", 1)[0]
        if name not in local_names:
            ts.error(f"unknown local variable {name!r}")
        if owner != procname:
            ts.error(f"process {procname} may not touch {name!r}")
        return name
    qualified = f"{procname}.{name}"
    if qualified in local_names:
        return qualified
    if name in shared_names:
        return name
    ts.error(f"undeclared variable {name!r}")


def _resolve_term(t: LinTerm, procname, shared_names, local_names, ts) -> LinTerm:
    coeffs = {}
    for v, c in t.coeffs:
        r = _resolve_name(v, procname, shared_names, local_names, ts)
        coeffs[r] = coeffs.get(r, 0) + c
    return LinTerm.make(coeffs, t.constant)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def render_program(p: Program) -> str:
    out = []
    for name, init in p.shared:
        out.append(f"shared {name} = {'*' if init is None else init}")
    for name, init in p.locals:
        out.append(f"local {name} = {'*' if init is None else init}")
    if p.init_constraint != TRUE:
        out.append(f"init {render(p.init_constraint)}")
    for a in p.annotations:
        if isinstance(a, Resource):
            out.append(f"resource {a.var} <= {a.bound.rhs.render()}")
        else:
            out.append(f"flag {a.var}")
    out.append(f"property always {render(p.prop)}")
    for proc in p.processes:
        out.append(f"process {proc.name} {{")
        for t in proc.transitions:
            if t.assign is None:
                stmt = "skip"
            else:
                var, expr = t.assign
                stmt = f"{var} := {expr.render()}"
            out.append(f"  {t.src} -> {t.dst} : [{render(t.guard)}] {stmt} ;")
        out.append("}")
    return "\n".join(out) + "\n"


def load(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())
