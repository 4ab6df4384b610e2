"""Scenarios (initial state, injections, horizon) and output traces.

Both simulators consume a *resolved* :class:`Scenario` (every state variable
of every atomic instance assigned) and produce a :class:`Trace`.

Scenario files look like::

    root Pipeline
    init Pipeline.p1.phase = idle
    at 1.0 inject jobs 7.0
    until 10
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as X
from .errors import DslSyntaxError, ScenarioError
from .expr import TokenStream, tokenize
from .model import AtomicModel, ModelSet


@dataclass(frozen=True)
class Injection:
    time: float
    port: str
    value: object  # raw text before resolution, a Value afterwards


@dataclass
class Scenario:
    root: str
    init: dict[str, dict[str, object]] = field(default_factory=dict)
    injections: list[Injection] = field(default_factory=list)
    horizon: float = 0.0


@dataclass(frozen=True)
class Event:
    time: float
    port: str
    value: X.Value
    # (producer priority, port) orders simultaneous events; not printed
    rank: tuple = field(default=(), compare=False, repr=False)


@dataclass
class Trace:
    events: list[Event] = field(default_factory=list)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def sorted(self) -> "Trace":
        """Stable order: time, then producer priority, then port name."""
        return Trace(sorted(self.events, key=lambda e: (e.time, e.rank, e.port)))

    def lines(self) -> list[str]:
        return [format_event(e) for e in self.events]

    def text(self) -> str:
        return "".join(line + "\n" for line in self.lines())


def format_event(e: Event) -> str:
    return f"{e.time:.9f}\t{e.port}\t{X.format_value(e.value)}"


def format_trace(trace: Trace) -> str:
    return trace.text()


# -- reading ----------------------------------------------------------------


def _value_text(ts: TokenStream) -> str:
    tok = ts.peek
    if tok.kind == "OP" and tok.text == "-":
        ts.next()
        num = ts.peek
        if num.kind not in ("INT", "REAL"):
            ts.error("expected a number after '-'")
        ts.next()
        return "-" + num.text
    if tok.kind in ("INT", "REAL", "IDENT"):
        ts.next()
        return tok.text
    ts.error("expected a value")


def _time(ts: TokenStream) -> float:
    tok = ts.peek
    if tok.kind not in ("INT", "REAL"):
        ts.error("expected a time")
    ts.next()
    return float(tok.text)


def parse_scenario(text: str) -> Scenario:
    """Read a scenario file; values stay as text until :func:`resolve_scenario`."""
    ts = TokenStream(tokenize(text))
    root = None
    init: dict[str, dict[str, object]] = {}
    injections = []
    horizon = None
    while ts.peek.kind != "EOF":
        kw = ts.next()
        if kw.kind != "IDENT":
            ts.error("expected root, init, at or until", kw)
        if kw.text == "root":
            root = ts.expect_ident("model name").text
        elif kw.text == "init":
            parts = [ts.expect_ident("instance path").text]
            while ts.accept("."):
                parts.append(ts.expect_ident("name").text)
            if len(parts) < 2:
                ts.error("init needs PATH.variable", kw)
            ts.expect("=")
            path, var = ".".join(parts[:-1]), parts[-1]
            init.setdefault(path, {})[var] = _value_text(ts)
        elif kw.text == "at":
            t = _time(ts)
            ts.expect("inject")
            port = ts.expect_ident("port").text
            injections.append(Injection(t, port, _value_text(ts)))
        elif kw.text == "until":
            horizon = _time(ts)
        else:
            ts.error("expected root, init, at or until", kw)
    if root is None:
        raise DslSyntaxError("scenario has no 'root' line", 1, 1)
    if horizon is None:
        raise DslSyntaxError("scenario has no 'until' line", ts.peek.line, ts.peek.col)
    return Scenario(root, init, injections, horizon)


# -- resolution -------------------------------------------------------------


def atomic_instances(ms: ModelSet, root: str) -> list[tuple[str, AtomicModel]]:
    """(path, model) for every atomic instance below ``root``, depth first."""
    out = []

    def walk(name, path):
        m = ms[name]
        if isinstance(m, AtomicModel):
            out.append((path, m))
        else:
            for c in m.components:
                walk(c.model, f"{path}.{c.name}")

    walk(root, root)
    return out


def _literal_value(text: str, ty: str, what: str):
    try:
        e = X.parse_expr(text)
    except DslSyntaxError:
        raise ScenarioError(f"{what}: {text!r} is not a literal") from None
    if not isinstance(e, X.Lit) or X.contains_inf(e):
        raise ScenarioError(f"{what}: {text!r} is not a literal")
    if not X.assignable(e.kind, ty):
        raise ScenarioError(f"{what}: expected {ty}, got {e.kind}")
    return X.coerce(e.value, ty)


def resolve_scenario(ms: ModelSet, sc: Scenario) -> Scenario:
    """Fill defaults, convert values to their declared types, and check the
    scenario against the model set.  Raises ScenarioError on any mismatch."""
    if sc.root not in ms.models:
        raise ScenarioError(f"unknown root model {sc.root!r}")
    root = ms[sc.root]
    instances = atomic_instances(ms, sc.root)
    known = {path for path, _ in instances}
    for path in sc.init:
        if path not in known:
            raise ScenarioError(f"unknown instance {path!r}")

    init: dict[str, dict[str, object]] = {}
    for path, m in instances:
        given = dict(sc.init.get(path, {}))
        state: dict[str, object] = {}
        for v in m.finite:
            val = given.pop(v.name, v.default)
            if val is None:
                raise ScenarioError(f"{path}.{v.name} has no initial value")
            if isinstance(val, str) and val in v.domain:
                state[v.name] = val
            else:
                raise ScenarioError(f"{path}.{v.name}: {val!r} is not in {{{', '.join(v.domain)}}}")
        for v in m.free:
            if v.name in given:
                raw = given.pop(v.name)
                if isinstance(raw, str):
                    state[v.name] = _literal_value(raw, v.type, f"{path}.{v.name}")
                elif X.assignable(X.type_of(raw), v.type):
                    state[v.name] = X.coerce(raw, v.type)
                else:
                    raise ScenarioError(f"{path}.{v.name}: expected {v.type}, got {X.type_of(raw)}")
            elif v.default is not None:
                state[v.name] = X.coerce(v.default.value, v.type)
            else:
                raise ScenarioError(f"{path}.{v.name} has no initial value")
        if given:
            raise ScenarioError(f"{path} has no state variable {sorted(given)[0]!r}")
        init[path] = state

    injections = []
    last = 0.0
    for inj in sc.injections:
        port = root.port(inj.port)
        if port is None or port.direction != "in":
            raise ScenarioError(f"{sc.root} has no input port {inj.port!r}")
        if inj.time < last:
            raise ScenarioError(f"injection at {inj.time} is out of order")
        if inj.time > sc.horizon:
            raise ScenarioError(f"injection at {inj.time} is past the horizon {sc.horizon}")
        last = inj.time
        value = inj.value
        if isinstance(value, str):
            value = _literal_value(value, port.type, f"injection on {inj.port}")
        elif X.assignable(X.type_of(value), port.type):
            value = X.coerce(value, port.type)
        else:
            raise ScenarioError(f"injection on {inj.port}: expected {port.type}")
        injections.append(Injection(float(inj.time), inj.port, value))
    if not sc.horizon >= 0:
        raise ScenarioError("horizon must be non-negative")
    return Scenario(sc.root, init, injections, float(sc.horizon))


__all__ = [
    "Scenario", "Injection", "Event", "Trace", "format_trace", "format_event",
    "parse_scenario", "resolve_scenario", "atomic_instances",
]


def format_scenario(sc: Scenario) -> str:
    """Scenario file text; reads back through :func:`parse_scenario`."""

    def text(v):
        return v if isinstance(v, str) else X.format_value(v)

    lines = [f"root {sc.root}"]
    for path, assignment in sc.init.items():
        for var, v in assignment.items():
            lines.append(f"init {path}.{var} = {text(v)}")
    for inj in sc.injections:
        lines.append(f"at {X.format_real(float(inj.time))} inject {inj.port} {text(inj.value)}")
    lines.append(f"until {X.format_real(float(sc.horizon))}")
    return "\n".join(lines) + "\n"
