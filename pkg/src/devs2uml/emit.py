"""Serializers for the UML IR: a versioned XMI-flavoured XML schema with a
loader, and PlantUML text for state, class and component diagrams.

The canonical DSL and expression printers live next to their parsers and
are re-exported here.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from . import expr as X
from .dsl import format_model_set
from .errors import DslSyntaxError, XmiParseError, XmiSchemaError, XmiVersionError
from .expr import format_expr
from .uml import (
    Assign,
    CaptureTicket,
    ClassRecord,
    Component,
    ComponentDiagram,
    Connector,
    RecordEntryTime,
    Send,
    StateDiagram,
    UmlEvent,
    UmlPort,
    UmlState,
    UmlTransition,
)

FORMAT = "devs2uml-xmi"
VERSION = "1"
ROOT_TAG = "XMI"

__all__ = [
    "to_xmi", "from_xmi", "to_plantuml_state", "to_plantuml_class",
    "to_plantuml_component", "format_expr", "format_model_set",
]


# -- XMI writer -------------------------------------------------------------


def _el(_node, _tag, **attrs):
    attrib = {k.replace("_", "-"): v for k, v in attrs.items() if v is not None}
    attrib = dict(sorted(attrib.items()))
    if _node is None:
        return ET.Element(_tag, attrib)
    return ET.SubElement(_node, _tag, attrib)


def _bool(b):
    return "true" if b else "false"


def _actions(parent, tag, actions):
    node = _el(parent, tag)
    for a in actions:
        if isinstance(a, RecordEntryTime):
            _el(node, "recordEntryTime")
        elif isinstance(a, Assign):
            _el(node, "assign", var=a.var, expr=format_expr(a.expr))
        elif isinstance(a, Send):
            _el(node, "send", event=a.event, target=a.target, delay=format_expr(a.delay),
                value=None if a.value is None else format_expr(a.value))
        elif isinstance(a, CaptureTicket):
            _el(node, "captureTicket")
        else:
            raise TypeError(f"unknown action {a!r}")
    return node


def _state_diagram(parent, sd: StateDiagram):
    node = _el(parent, "stateDiagram", name=sd.name)
    cls = _el(node, "class", name=sd.name)
    for var, ty in sd.variables:
        _el(cls, "attribute", name=var, type=ty)
    for e in sd.events:
        _el(node, "event", name=e.name, kind=e.kind, owner=e.owner, type=e.type)
    for s in sd.states:
        st = _el(node, "state", id=s.id, ticket=_bool(s.ticket))
        _actions(st, "entry", s.entry)
        _actions(st, "exit", s.exit)
    for t in sd.transitions:
        tr = _el(node, "transition", source=t.source, target=t.target, trigger=t.trigger,
                 guard=format_expr(t.guard), binder=t.binder)
        _actions(tr, "action", t.action)
    for sid in sd.initial:
        _el(node, "initial", ref=sid)
    for sid in sd.final:
        _el(node, "final", ref=sid)
    return node


def _component_diagram(parent, cd: ComponentDiagram):
    node = _el(parent, "componentDiagram", name=cd.name)
    for c in cd.components:
        comp = _el(node, "component", name=c.name)
        for p in c.ports:
            _el(comp, "port", name=p.name, interface=p.interface, kind=p.kind, type=p.type)
        if c.payload is not None:
            payload = _el(comp, "payload")
            if isinstance(c.payload, StateDiagram):
                _state_diagram(payload, c.payload)
            else:
                _component_diagram(payload, c.payload)
    for parent_name, child in cd.containment:
        _el(node, "contains", parent=parent_name, child=child)
    for tag, conns in (("delegation", cd.delegations), ("assembly", cd.assemblies)):
        for k in conns:
            _el(node, tag, source_component=k.source[0], source_port=k.source[1],
                target_component=k.target[0], target_port=k.target[1])
    if cd.priority:
        prio = _el(node, "priority")
        for name in cd.priority:
            _el(prio, "ref", name=name)
    return node


def to_xmi(diagram) -> str:
    """Serialize a StateDiagram or ComponentDiagram deterministically."""
    root = _el(None, ROOT_TAG, format=FORMAT, version=VERSION)
    if isinstance(diagram, StateDiagram):
        _state_diagram(root, diagram)
    elif isinstance(diagram, ComponentDiagram):
        _component_diagram(root, diagram)
    else:
        raise TypeError(f"cannot serialize {type(diagram).__name__}")
    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode", short_empty_elements=True)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


# -- XMI reader -------------------------------------------------------------


class _Reader:
    def __init__(self):
        self.path = []

    def fail(self, message):
        raise XmiSchemaError(message, "/" + "/".join(self.path))

    def children(self, node):
        counts: dict[str, int] = {}
        for child in node:
            counts[child.tag] = counts.get(child.tag, 0) + 1
            self.path.append(f"{child.tag}[{counts[child.tag]}]")
            yield child
            self.path.pop()

    def attr(self, node, name, required=True):
        v = node.get(name)
        if v is None and required:
            self.fail(f"missing attribute {name!r}")
        return v

    def expr(self, node, name, required=True):
        text = self.attr(node, name, required)
        if text is None:
            return None
        try:
            return X.parse_expr(text)
        except DslSyntaxError as err:
            self.fail(f"bad expression in {name!r}: {err}")

    def actions(self, node):
        out = []
        for a in self.children(node):
            if a.tag == "recordEntryTime":
                out.append(RecordEntryTime())
            elif a.tag == "assign":
                out.append(Assign(self.attr(a, "var"), self.expr(a, "expr")))
            elif a.tag == "send":
                out.append(Send(self.attr(a, "event"), self.attr(a, "target"),
                                self.expr(a, "value", required=False), self.expr(a, "delay")))
            elif a.tag == "captureTicket":
                out.append(CaptureTicket())
            else:
                self.fail(f"unknown action element <{a.tag}>")
        return tuple(out)

    def boolean(self, node, name):
        v = self.attr(node, name)
        if v not in ("true", "false"):
            self.fail(f"attribute {name!r} must be true or false")
        return v == "true"

    def state_diagram(self, node) -> StateDiagram:
        name = self.attr(node, "name")
        variables, events, states, transitions, initial, final = [], [], [], [], [], []
        for child in self.children(node):
            tag = child.tag
            if tag == "class":
                for a in self.children(child):
                    if a.tag != "attribute":
                        self.fail(f"unknown element <{a.tag}>")
                    variables.append((self.attr(a, "name"), self.attr(a, "type")))
            elif tag == "event":
                events.append(UmlEvent(self.attr(child, "name"), self.attr(child, "kind"),
                                       child.get("owner"), child.get("type")))
            elif tag == "state":
                entry, exit_ = (), ()
                for part in self.children(child):
                    if part.tag == "entry":
                        entry = self.actions(part)
                    elif part.tag == "exit":
                        exit_ = self.actions(part)
                    else:
                        self.fail(f"unknown element <{part.tag}>")
                states.append(UmlState(self.attr(child, "id"), entry, exit_, self.boolean(child, "ticket")))
            elif tag == "transition":
                action = ()
                for part in self.children(child):
                    if part.tag != "action":
                        self.fail(f"unknown element <{part.tag}>")
                    action = self.actions(part)
                transitions.append(UmlTransition(
                    self.attr(child, "source"), self.attr(child, "target"), self.attr(child, "trigger"),
                    self.expr(child, "guard"), action, child.get("binder")))
            elif tag == "initial":
                initial.append(self.attr(child, "ref"))
            elif tag == "final":
                final.append(self.attr(child, "ref"))
            else:
                self.fail(f"unknown element <{tag}>")
        return StateDiagram(name, tuple(states), tuple(events), tuple(transitions), tuple(variables),
                            tuple(initial), tuple(final))

    def component_diagram(self, node) -> ComponentDiagram:
        name = self.attr(node, "name")
        comps, containment, delegations, assemblies, priority = [], [], [], [], []
        for child in self.children(node):
            tag = child.tag
            if tag == "component":
                ports, payload = [], None
                for part in self.children(child):
                    if part.tag == "port":
                        ports.append(UmlPort(self.attr(part, "name"), self.attr(part, "interface"),
                                             self.attr(part, "kind"), self.attr(part, "type")))
                    elif part.tag == "payload":
                        inner = list(self.children(part))
                        if len(inner) != 1:
                            self.fail("payload must hold exactly one diagram")
                        self.path.append(f"{inner[0].tag}[1]")
                        if inner[0].tag == "stateDiagram":
                            payload = self.state_diagram(inner[0])
                        elif inner[0].tag == "componentDiagram":
                            payload = self.component_diagram(inner[0])
                        else:
                            self.fail(f"unknown element <{inner[0].tag}>")
                        self.path.pop()
                    else:
                        self.fail(f"unknown element <{part.tag}>")
                comps.append(Component(self.attr(child, "name"), tuple(ports), payload))
            elif tag == "contains":
                containment.append((self.attr(child, "parent"), self.attr(child, "child")))
            elif tag in ("delegation", "assembly"):
                k = Connector((self.attr(child, "source-component"), self.attr(child, "source-port")),
                              (self.attr(child, "target-component"), self.attr(child, "target-port")))
                (delegations if tag == "delegation" else assemblies).append(k)
            elif tag == "priority":
                for ref in self.children(child):
                    if ref.tag != "ref":
                        self.fail(f"unknown element <{ref.tag}>")
                    priority.append(self.attr(ref, "name"))
            else:
                self.fail(f"unknown element <{tag}>")
        return ComponentDiagram(name, tuple(comps), tuple(containment), tuple(delegations),
                                tuple(assemblies), tuple(priority))


def from_xmi(text: str):
    """Load a document written by :func:`to_xmi`.

    Raises XmiParseError on malformed XML, XmiVersionError on a missing or
    unsupported version, XmiSchemaError (carrying an XML path) otherwise.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as err:
        raise XmiParseError(f"malformed XML: {err}") from None
    if root.tag != ROOT_TAG or root.get("format") != FORMAT:
        raise XmiSchemaError(f"not a {FORMAT} document", "/" + root.tag)
    version = root.get("version")
    if version is None:
        raise XmiVersionError("document has no version attribute")
    if version != VERSION:
        raise XmiVersionError(f"unsupported version {version!r} (expected {VERSION!r})")
    reader = _Reader()
    reader.path.append(ROOT_TAG)
    kids = list(root)
    if len(kids) != 1:
        reader.fail("expected exactly one diagram")
    reader.path.append(f"{kids[0].tag}[1]")
    if kids[0].tag == "stateDiagram":
        return reader.state_diagram(kids[0])
    if kids[0].tag == "componentDiagram":
        return reader.component_diagram(kids[0])
    reader.fail(f"unknown element <{kids[0].tag}>")


# -- PlantUML ---------------------------------------------------------------


def format_action(a) -> str:
    if isinstance(a, RecordEntryTime):
        return "t_e := t_curr"
    if isinstance(a, Assign):
        return f"{a.var} := {format_expr(a.expr)}"
    if isinstance(a, Send):
        if a.target == "self":
            return f"^self.{a.event} after {format_expr(a.delay)}"
        return f"^{a.event}({format_expr(a.value)}) after {format_expr(a.delay)}"
    if isinstance(a, CaptureTicket):
        return "y := ref(last timeout)"
    raise TypeError(f"unknown action {a!r}")


def _q(text):
    return '"' + text.replace('"', "'") + '"'


def to_plantuml_state(sd: StateDiagram) -> str:
    lines = [f"@startuml {sd.name}", "hide empty description"]
    for s in sd.states:
        lines.append(f"state {_q(s.id)}")
        for a in s.entry:
            lines.append(f"{_q(s.id)} : entry / {format_action(a)}")
        for a in s.exit:
            lines.append(f"{_q(s.id)} : exit / {format_action(a)}")
    for sid in sd.initial:
        lines.append(f"[*] --> {_q(sid)}")
    for sid in sd.final:
        lines.append(f"{_q(sid)} --> [*]")
    for t in sd.transitions:
        label = f"{t.trigger} [{format_expr(t.guard)}]"
        if t.action:
            label += " / " + "; ".join(format_action(a) for a in t.action)
        lines.append(f"{_q(t.source)} --> {_q(t.target)} : {label}")
    lines.append("@enduml")
    return "\n".join(lines) + "\n"


def to_plantuml_class(record: ClassRecord) -> str:
    lines = [f"@startuml {record.name}", f"class {record.name} {{"]
    lines += [f"  {name} : {ty}" for name, ty in record.attributes]
    lines += ["}", "@enduml"]
    return "\n".join(lines) + "\n"


def to_plantuml_component(cd: ComponentDiagram) -> str:
    aliases: dict[str, str] = {}

    def alias(path):
        if path not in aliases:
            aliases[path] = "c" + str(len(aliases)) + "_" + re.sub(r"\W", "_", path.split(".")[-1])
        return aliases[path]

    body: list[str] = []
    links: list[str] = []

    def ports(comp, path, indent):
        for p in comp.ports:
            kw = "portin" if p.kind == "provided" else "portout"
            body.append(f"{indent}{kw} {_q(p.name)} as {alias(path)}_{p.name}")

    def diagram(d, top, top_path, indent):
        # children of ``top`` inside ``d``, plus the connectors of ``d``
        for child in d.children(top):
            comp = d.component(child)
            path = f"{top_path}.{child}"
            body.append(f"{indent}component {_q(child)} as {alias(path)} {{")
            ports(comp, path, indent + "  ")
            if isinstance(comp.payload, ComponentDiagram):
                inner = comp.payload
                for inner_top in inner.top_level():
                    diagram(inner, inner_top, path, indent + "  ")
            body.append(f"{indent}}}")

        def end(e):
            path = top_path if e[0] == top else f"{top_path}.{e[0]}"
            return f"{alias(path)}_{e[1]}"

        for k in d.delegations:
            if top in (k.source[0], k.target[0]) or d.parent_of(k.source[0]) == top:
                links.append(f"{end(k.source)} ..> {end(k.target)} : delegation")
        for k in d.assemblies:
            if d.parent_of(k.source[0]) == top:
                links.append(f"{end(k.source)} --> {end(k.target)} : assembly")

    lines = [f"@startuml {cd.name}"]
    for top in cd.top_level():
        comp = cd.component(top)
        body.append(f"component {_q(top)} as {alias(top)} {{")
        ports(comp, top, "  ")
        diagram(cd, top, top, "  ")
        body.append("}")
    lines += body + links + ["@enduml"]
    return "\n".join(lines) + "\n"
