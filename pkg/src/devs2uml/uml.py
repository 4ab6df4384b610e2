"""UML state diagrams and component diagrams as immutable value types.

State diagrams follow the tuple (states, initial states, final states,
events, transitions) with pseudostate variables ``H`` declared alongside.
Component diagrams hold components, a containment relation, delegation
connectors (parent/child, same direction) and assembly connectors
(siblings, opposite direction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from . import expr as X
from .errors import ExprTypeError
from .model import Diagnostic


# -- actions ----------------------------------------------------------------


@dataclass(frozen=True)
class RecordEntryTime:
    """``t_e := t_curr``"""


@dataclass(frozen=True)
class Assign:
    var: str
    expr: X.Expr


@dataclass(frozen=True)
class Send:
    """Send ``event`` to ``self`` or out through the port of the same name
    after ``delay``; an infinite delay skips the send."""

    event: str
    target: str  # "self" | "port"
    value: X.Expr | None
    delay: X.Expr


@dataclass(frozen=True)
class CaptureTicket:
    """``y := ticket of the preceding send`` (none if it was skipped)."""


Action = Union[RecordEntryTime, Assign, Send, CaptureTicket]
ActionScript = tuple  # tuple[Action, ...]


# -- state diagrams ---------------------------------------------------------


@dataclass(frozen=True)
class UmlEvent:
    name: str
    kind: str  # "port" | "timeout"
    owner: str | None = None  # owning state for timeout events
    type: str | None = None  # value type of port events


@dataclass(frozen=True)
class UmlState:
    id: str
    entry: ActionScript = ()
    exit: ActionScript = ()
    ticket: bool = False  # holds a timeout-ticket slot y


@dataclass(frozen=True)
class UmlTransition:
    source: str
    target: str
    trigger: str
    guard: X.Expr = X.TRUE
    action: ActionScript = ()
    binder: str | None = None  # name bound to the event value in guard/action


@dataclass(frozen=True)
class StateDiagram:
    name: str
    states: tuple[UmlState, ...] = ()
    events: tuple[UmlEvent, ...] = ()
    transitions: tuple[UmlTransition, ...] = ()
    variables: tuple[tuple[str, str], ...] = ()  # pseudostate variables H
    initial: tuple[str, ...] = ()
    final: tuple[str, ...] = ()

    def state(self, sid: str) -> UmlState | None:
        return next((s for s in self.states if s.id == sid), None)

    def event(self, name: str) -> UmlEvent | None:
        return next((e for e in self.events if e.name == name), None)


@dataclass(frozen=True)
class ClassRecord:
    """One-class diagram recording the pseudostate variables of a machine."""

    name: str
    attributes: tuple[tuple[str, str], ...] = ()


# -- component diagrams -----------------------------------------------------


@dataclass(frozen=True)
class UmlPort:
    name: str
    interface: str
    kind: str  # "provided" (input) | "required" (output)
    type: str = "real"

    @property
    def direction(self) -> str:
        return "in" if self.kind == "provided" else "out"


@dataclass(frozen=True)
class Component:
    name: str
    ports: tuple[UmlPort, ...] = ()
    payload: Union[StateDiagram, "ComponentDiagram", None] = None

    def port(self, name: str) -> UmlPort | None:
        return next((p for p in self.ports if p.name == name), None)


@dataclass(frozen=True)
class Connector:
    source: tuple[str, str]  # (component, port)
    target: tuple[str, str]


@dataclass(frozen=True)
class ComponentDiagram:
    name: str
    components: tuple[Component, ...] = ()
    containment: tuple[tuple[str, str], ...] = ()  # (parent, child)
    delegations: tuple[Connector, ...] = ()
    assemblies: tuple[Connector, ...] = ()
    # beyond the formal tuple: priority of simultaneous components
    priority: tuple[str, ...] = field(default=())

    def component(self, name: str) -> Component | None:
        return next((c for c in self.components if c.name == name), None)

    def parent_of(self, name: str) -> str | None:
        return next((p for p, c in self.containment if c == name), None)

    def children(self, name: str) -> list[str]:
        return [c for p, c in self.containment if p == name]

    def top_level(self) -> list[str]:
        """Components without a container."""
        contained = {c for _, c in self.containment}
        return [c.name for c in self.components if c.name not in contained]

    def descendants(self, name: str) -> set[str]:
        """Z(name): everything reachable by descending the containment relation."""
        seen: set[str] = set()
        stack = self.children(name)
        while stack:
            n = stack.pop()
            if n not in seen:
                seen.add(n)
                stack.extend(self.children(n))
        return seen


# -- validation -------------------------------------------------------------


def _diag(name, kind, message):
    return Diagnostic(name, (), kind, message)


def validate_state_diagram(sd: StateDiagram) -> list[Diagnostic]:
    out = []
    add = lambda kind, msg: out.append(_diag(sd.name, kind, msg))  # noqa: E731

    ids = set()
    for s in sd.states:
        if s.id in ids:
            add("DuplicateStateId", f'state "{s.id}" declared more than once')
        ids.add(s.id)
    names = set()
    for e in sd.events:
        if e.name in names:
            add("DuplicateEvent", f'event "{e.name}" declared more than once')
        names.add(e.name)
        if e.kind == "timeout" and e.owner not in ids:
            add("UnknownState", f'timeout event "{e.name}" owned by unknown state "{e.owner}"')
        if e.kind == "port" and e.type not in X.TYPES:
            add("UnknownType", f'event "{e.name}" has no value type')
    hvars = {}
    for var, ty in sd.variables:
        if var in hvars:
            add("DuplicateVariable", f'pseudostate variable "{var}" declared more than once')
        if ty not in X.TYPES:
            add("UnknownType", f'pseudostate variable "{var}" has unknown type {ty}')
        hvars[var] = ty
    if len(sd.initial) > 1:
        add("MultipleInitial", "at most one initial state is allowed")
    for sid in sd.initial + sd.final:
        if sid not in ids:
            add("UnknownState", f'initial/final state "{sid}" does not exist')

    def check_expr(e, env, want, where):
        try:
            t = X.typecheck(e, env)
        except ExprTypeError as err:
            kind = "UnknownVariable" if str(err).startswith("unknown variable") else "TypeMismatch"
            add(kind, f"{where}: {err}")
            return
        if want == "numeric":
            if t not in ("int", "real"):
                add("TypeMismatch", f"{where}: expected a number, got {t}")
        elif not X.assignable(t, want):
            add("TypeMismatch", f"{where}: expected {want}, got {t}")

    def check_actions(actions, env, where, in_entry):
        sent = False
        for a in actions:
            if isinstance(a, Assign):
                if a.var not in hvars:
                    add("UnknownVariable", f'{where}: assignment to undeclared variable "{a.var}"')
                else:
                    check_expr(a.expr, env, hvars[a.var], where)
            elif isinstance(a, Send):
                ev = sd.event(a.event)
                if ev is None:
                    add("UnknownEvent", f'{where}: send of unknown event "{a.event}"')
                elif a.target == "port":
                    if ev.kind != "port":
                        add("BadSend", f'{where}: "{a.event}" is not a port event')
                    elif a.value is None:
                        add("BadSend", f'{where}: port send of "{a.event}" carries no value')
                    else:
                        check_expr(a.value, env, ev.type, where)
                elif a.target != "self":
                    add("BadSend", f"{where}: unknown send target {a.target!r}")
                check_expr(a.delay, env, "numeric", where)
                sent = True
            elif isinstance(a, CaptureTicket):
                if not (in_entry and sent):
                    add("BadTicket", f"{where}: ticket captured without a preceding send")
            elif not isinstance(a, RecordEntryTime):
                add("UnknownAction", f"{where}: {a!r}")

    for s in sd.states:
        check_actions(s.entry, hvars, f'entry of "{s.id}"', True)
        check_actions(s.exit, hvars, f'exit of "{s.id}"', False)
        has_capture = any(isinstance(a, CaptureTicket) for a in s.entry)
        if s.ticket != has_capture:
            add("BadTicket", f'state "{s.id}" ticket slot does not match its entry action')

    for i, t in enumerate(sd.transitions, 1):
        where = f"transition #{i} ({t.source} -> {t.target})"
        for sid in (t.source, t.target):
            if sid not in ids:
                add("UnknownState", f'{where}: unknown state "{sid}"')
        ev = sd.event(t.trigger)
        if ev is None:
            add("UnknownEvent", f'{where}: unknown trigger "{t.trigger}"')
        env = dict(hvars)
        env["elapsed"] = "real"
        env["ticket_ok"] = "bool"
        if t.binder is not None:
            if ev is not None and ev.kind != "port":
                add("BadBinder", f"{where}: timeout events carry no value")
            if t.binder in env:
                add("ShadowedName", f'{where}: binder "{t.binder}" shadows a variable')
            env[t.binder] = ev.type if ev is not None and ev.type else "real"
        check_expr(t.guard, env, "bool", where)
        check_actions(t.action, env, where, False)
    return out


def validate_component_diagram(cd: ComponentDiagram) -> list[Diagnostic]:
    out = []
    add = lambda kind, msg: out.append(_diag(cd.name, kind, msg))  # noqa: E731

    names = set()
    for c in cd.components:
        if c.name in names:
            add("DuplicateComponent", f'component "{c.name}" declared more than once')
        names.add(c.name)
        pnames = set()
        for p in c.ports:
            if p.name in pnames:
                add("DuplicatePort", f'{c.name}: port "{p.name}" declared more than once')
            pnames.add(p.name)
            if p.kind not in ("provided", "required"):
                add("BadInterface", f"{c.name}.{p.name}: interface must be provided or required")

    parents: dict[str, str] = {}
    for parent, child in cd.containment:
        for n in (parent, child):
            if n not in names:
                add("UnknownComponent", f'containment names unknown component "{n}"')
        if parent == child:
            add("SelfContainment", f'component "{parent}" contains itself')
            continue
        if child in parents and parents[child] != parent:
            add("MultipleParents", f'component "{child}" has more than one container')
        parents[child] = parent
    for c in cd.components:
        if c.name in cd.descendants(c.name) and (c.name, c.name) not in cd.containment:
            add("ContainmentCycle", f'component "{c.name}" is a subcomponent of itself')

    def port_of(end, where):
        comp = cd.component(end[0])
        if comp is None:
            add("UnknownComponent", f'{where}: unknown component "{end[0]}"')
            return None
        p = comp.port(end[1])
        if p is None:
            add("UnknownPort", f'{where}: unknown port "{end[0]}.{end[1]}"')
        return p

    for k in cd.delegations:
        where = f"delegation {k.source[0]}.{k.source[1]} -> {k.target[0]}.{k.target[1]}"
        ps, pt = port_of(k.source, where), port_of(k.target, where)
        if ps is None or pt is None:
            continue
        if ps.direction != pt.direction:
            add("DirectionClash", f"{where}: delegation joins ports of different direction")
            continue
        if ps.direction == "in":
            ok = parents.get(k.target[0]) == k.source[0]
        else:
            ok = parents.get(k.source[0]) == k.target[0]
        if not ok:
            add("BadDelegation", f"{where}: delegation must run parent-to-child for inputs, child-to-parent for outputs")
        if ps.type != pt.type:
            add("PortTypeMismatch", f"{where}: {ps.type} port joined to {pt.type} port")

    for k in cd.assemblies:
        where = f"assembly {k.source[0]}.{k.source[1]} -> {k.target[0]}.{k.target[1]}"
        ps, pt = port_of(k.source, where), port_of(k.target, where)
        if ps is None or pt is None:
            continue
        if ps.direction == pt.direction:
            add("DirectionClash", f"{where}: assembly joins two {ps.kind} ports")
            continue
        if ps.direction != "out":
            add("DirectionClash", f"{where}: assembly must run from a required to a provided port")
        if k.source[0] == k.target[0] or parents.get(k.source[0]) != parents.get(k.target[0]):
            add("BadAssembly", f"{where}: assembly must join distinct siblings")
        if ps.type != pt.type:
            add("PortTypeMismatch", f"{where}: {ps.type} port joined to {pt.type} port")

    for c in cd.components:
        if isinstance(c.payload, StateDiagram):
            sd = c.payload
            for p in c.ports:
                ev = sd.event(p.name)
                if ev is None or ev.kind != "port":
                    add("PortEventMismatch", f'{c.name}: port "{p.name}" has no matching event in {sd.name}')
            out.extend(validate_state_diagram(sd))
        elif isinstance(c.payload, ComponentDiagram):
            inner = c.payload
            tops = inner.top_level()
            if len(tops) != 1:
                add("NestedTopLevel", f"{c.name}: nested diagram must have one top-level component")
            else:
                top = inner.component(tops[0])
                if {(p.name, p.kind, p.type) for p in top.ports} != {(p.name, p.kind, p.type) for p in c.ports}:
                    add("PortEventMismatch", f"{c.name}: ports differ from nested diagram {inner.name}")
            out.extend(validate_component_diagram(inner))
    return out


__all__ = [
    "RecordEntryTime", "Assign", "Send", "CaptureTicket", "UmlEvent", "UmlState",
    "UmlTransition", "StateDiagram", "ClassRecord", "UmlPort", "Component",
    "Connector", "ComponentDiagram", "validate_state_diagram", "validate_component_diagram",
]
