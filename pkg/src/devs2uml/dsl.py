"""Reader and canonical printer for ``.devs`` model files.

Grammar sketch::

    atomic NAME {
      inports { a b : int }  outports { c }
      finite v in { s1, s2 } = s1
      free w : real = 0.0
      ta { v=s1 -> INF ; v=s2 -> 2.5 }
      ext from PATTERN on PORT(BINDER) when EXPR -> PATTERN with { w = EXPR, ... }
      int from PATTERN when EXPR -> PATTERN with { ... } output PORT(EXPR)
    }
    coupled NAME {
      inports { ... } outports { ... }
      components { ref: Model, ... }
      couple NAME.port -> NAME.port
      select order { ref, ... }
    }

A PATTERN is ``*`` or a comma list of ``var=value``.  Ports are ``real``
unless annotated with ``: int`` or ``: bool``.
"""

from __future__ import annotations

from . import expr as X
from .errors import DslSyntaxError, ModelError
from .expr import Token, TokenStream, tokenize
from .model import (
    AtomicModel,
    ComponentRef,
    CoupledModel,
    Coupling,
    Endpoint,
    ExternalRule,
    FiniteVar,
    FreeVar,
    InternalRule,
    ModelSet,
    PortDecl,
    TaEntry,
)

_SECTIONS = ("inports", "outports", "finite", "free", "ta", "ext", "int")


def _loc(tok: Token):
    return (tok.line, tok.col)


def _symbol(ts: TokenStream) -> str:
    """A finite-domain value: identifier or non-negative integer."""
    tok = ts.peek
    if tok.kind == "IDENT" or tok.kind == "INT":
        ts.next()
        return tok.text
    ts.error("expected a finite value")


def _ports(ts, direction):
    ts.expect("{")
    ports = []
    while not ts.at("}"):
        tok = ts.expect_ident("port name")
        ty = "real"
        if ts.accept(":"):
            ty = ts.expect_ident("type").text
        ports.append(PortDecl(tok.text, direction, ty, _loc(tok)))
        ts.accept(",")
    ts.expect("}")
    return ports


def _pattern(ts):
    if ts.accept("*"):
        return ()
    pairs = []
    while True:
        var = ts.expect_ident("variable").text
        ts.expect("=")
        pairs.append((var, _symbol(ts)))
        if not ts.accept(","):
            break
    return tuple(pairs)


def _literal(ts):
    start = ts.peek
    e = X.parse_expression(ts)
    if not isinstance(e, X.Lit):
        ts.error("expected a literal", start)
    return e


def _updates(ts):
    ts.expect("{")
    out = []
    while not ts.at("}"):
        var = ts.expect_ident("variable").text
        ts.expect("=")
        out.append((var, X.parse_expression(ts)))
        if not ts.accept(","):
            break
    ts.expect("}")
    return tuple(out)


def _atomic(ts, name_tok):
    ports, finite, free, ta, ext, internal = [], [], [], [], [], []
    ts.expect("{")
    while not ts.at("}"):
        tok = ts.peek
        if tok.kind != "IDENT" or tok.text not in _SECTIONS:
            ts.error("expected one of " + ", ".join(_SECTIONS))
        ts.next()
        word = tok.text
        if word == "inports":
            ports += _ports(ts, "in")
        elif word == "outports":
            ports += _ports(ts, "out")
        elif word == "finite":
            var = ts.expect_ident("variable")
            ts.expect("in")
            ts.expect("{")
            domain = []
            while not ts.at("}"):
                domain.append(_symbol(ts))
                if not ts.accept(","):
                    break
            ts.expect("}")
            default = _symbol(ts) if ts.accept("=") else None
            finite.append(FiniteVar(var.text, tuple(domain), default, _loc(var)))
        elif word == "free":
            var = ts.expect_ident("variable")
            ts.expect(":")
            ty = ts.expect_ident("type").text
            default = _literal(ts) if ts.accept("=") else None
            free.append(FreeVar(var.text, ty, default, _loc(var)))
        elif word == "ta":
            ts.expect("{")
            while not ts.at("}"):
                start = ts.peek
                pat = _pattern(ts)
                ts.expect("->")
                ta.append(TaEntry(pat, X.parse_expression(ts), _loc(start)))
                if not ts.accept(";"):
                    break
            ts.expect("}")
        elif word == "ext":
            ts.expect("from")
            source = _pattern(ts)
            ts.expect("on")
            port = ts.expect_ident("port").text
            ts.expect("(")
            binder = ts.expect_ident("binder").text
            ts.expect(")")
            guard = X.parse_expression(ts) if ts.accept("when") else X.TRUE
            ts.expect("->")
            target = _pattern(ts)
            updates = _updates(ts) if ts.accept("with") else ()
            ext.append(ExternalRule(source, port, binder, guard, target, updates, _loc(tok)))
        else:
            ts.expect("from")
            source = _pattern(ts)
            guard = X.parse_expression(ts) if ts.accept("when") else X.TRUE
            ts.expect("->")
            target = _pattern(ts)
            updates = _updates(ts) if ts.accept("with") else ()
            output = None
            if ts.accept("output"):
                port = ts.expect_ident("port").text
                ts.expect("(")
                value = X.parse_expression(ts)
                ts.expect(")")
                output = (port, value)
            internal.append(InternalRule(source, guard, target, updates, output, _loc(tok)))
    ts.expect("}")
    return AtomicModel(name_tok.text, tuple(ports), tuple(finite), tuple(free), tuple(ta),
                       tuple(ext), tuple(internal), _loc(name_tok))


def _endpoint(ts):
    owner = ts.expect_ident("component").text
    ts.expect(".")
    port = ts.expect_ident("port").text
    return Endpoint(owner, port)


def _coupled(ts, name_tok):
    ports, comps, couplings = [], [], []
    select = None
    ts.expect("{")
    while not ts.at("}"):
        tok = ts.next()
        word = tok.text if tok.kind == "IDENT" else None
        if word == "inports":
            ports += _ports(ts, "in")
        elif word == "outports":
            ports += _ports(ts, "out")
        elif word == "components":
            ts.expect("{")
            while not ts.at("}"):
                ref = ts.expect_ident("component name")
                ts.expect(":")
                comps.append(ComponentRef(ref.text, ts.expect_ident("model name").text, _loc(ref)))
                if not ts.accept(","):
                    break
            ts.expect("}")
        elif word == "couple":
            src = _endpoint(ts)
            ts.expect("->")
            couplings.append(Coupling(src, _endpoint(ts), _loc(tok)))
        elif word == "select":
            ts.expect("order")
            ts.expect("{")
            order = []
            while not ts.at("}"):
                order.append(ts.expect_ident("component name").text)
                if not ts.accept(","):
                    break
            ts.expect("}")
            select = tuple(order)
        else:
            ts.error("expected inports, outports, components, couple or select", tok)
    ts.expect("}")
    return CoupledModel(name_tok.text, tuple(ports), tuple(comps), tuple(couplings), select, _loc(name_tok))


def parse_model_file(text: str) -> ModelSet:
    """Parse a model file into a resolved :class:`ModelSet`.

    The root is the last declared model that no coupled model references.
    Raises DslSyntaxError on bad syntax and ModelError on duplicate names or
    unresolved component references.
    """
    ts = TokenStream(tokenize(text))
    ms = ModelSet()
    while ts.peek.kind != "EOF":
        kw = ts.next()
        if kw.text not in ("atomic", "coupled") or kw.kind != "IDENT":
            ts.error("expected 'atomic' or 'coupled'", kw)
        name = ts.expect_ident("model name")
        if name.text in ms.models:
            raise ModelError(f"{name.line}:{name.col}: duplicate model name {name.text!r}")
        model = _atomic(ts, name) if kw.text == "atomic" else _coupled(ts, name)
        ms.models[name.text] = model

    referenced = set()
    for m in ms.models.values():
        if isinstance(m, CoupledModel):
            for c in m.components:
                if c.model not in ms.models:
                    line, col = c.loc
                    raise ModelError(f"{line}:{col}: unresolved component reference {c.model!r}")
                referenced.add(c.model)
    roots = [n for n in ms.models if n not in referenced]
    ms.root = roots[-1] if roots else None
    return ms


# -- printing ---------------------------------------------------------------


def format_pattern(p) -> str:
    if not p:
        return "*"
    return ", ".join(f"{var}={val}" for var, val in p)


def _format_ports(ports, direction):
    names = []
    for p in ports:
        if p.direction != direction:
            continue
        names.append(p.name if p.type == "real" else f"{p.name} : {p.type}")
    return "{ " + " ".join(names) + " }" if names else "{ }"


def _format_updates(updates):
    return "{ " + ", ".join(f"{v} = {X.format_expr(e)}" for v, e in updates) + " }"


def format_model(m) -> str:
    lines = []
    if isinstance(m, AtomicModel):
        lines.append(f"atomic {m.name} {{")
        lines.append(f"  inports {_format_ports(m.ports, 'in')}")
        lines.append(f"  outports {_format_ports(m.ports, 'out')}")
        for v in m.finite:
            line = f"  finite {v.name} in {{ {', '.join(v.domain)} }}"
            if v.default is not None:
                line += f" = {v.default}"
            lines.append(line)
        for v in m.free:
            line = f"  free {v.name} : {v.type}"
            if v.default is not None:
                line += f" = {X.format_expr(v.default)}"
            lines.append(line)
        lines.append("  ta {")
        for i, entry in enumerate(m.ta):
            sep = " ;" if i < len(m.ta) - 1 else ""
            lines.append(f"    {format_pattern(entry.pattern)} -> {X.format_expr(entry.expr)}{sep}")
        lines.append("  }")
        for r in m.external:
            line = (f"  ext from {format_pattern(r.source)} on {r.port}({r.binder}) "
                    f"when {X.format_expr(r.guard)} -> {format_pattern(r.target)}")
            if r.updates:
                line += " with " + _format_updates(r.updates)
            lines.append(line)
        for r in m.internal:
            line = f"  int from {format_pattern(r.source)} when {X.format_expr(r.guard)} -> {format_pattern(r.target)}"
            if r.updates:
                line += " with " + _format_updates(r.updates)
            if r.output is not None:
                line += f" output {r.output[0]}({X.format_expr(r.output[1])})"
            lines.append(line)
    else:
        lines.append(f"coupled {m.name} {{")
        lines.append(f"  inports {_format_ports(m.ports, 'in')}")
        lines.append(f"  outports {_format_ports(m.ports, 'out')}")
        comps = ", ".join(f"{c.name}: {c.model}" for c in m.components)
        lines.append(f"  components {{ {comps} }}" if comps else "  components { }")
        for c in m.couplings:
            lines.append(f"  couple {c.source.owner}.{c.source.port} -> {c.target.owner}.{c.target.port}")
        if m.select is not None:
            lines.append(f"  select order {{ {', '.join(m.select)} }}" if m.select else "  select order { }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def format_model_set(ms: ModelSet) -> str:
    """Canonical DSL text; ``parse_model_file`` reads it back unchanged."""
    return "\n".join(format_model(m) for m in ms.models.values())


__all__ = ["parse_model_file", "format_model_set", "format_model", "format_pattern", "DslSyntaxError"]
