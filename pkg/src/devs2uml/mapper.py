"""Transformation of atomic DEVS models into UML state diagrams and of
coupled DEVS models into UML component diagrams.

Finite state variables become UML states (one per combination), free
variables become pseudostate variables, ports become events, and the time
advance becomes a self-addressed timeout event scheduled by each state's
entry action.  A ticket stamped on each timeout lets the machine ignore
timeouts that an intervening external transition made obsolete.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import expr as X
from .errors import StateExplosion
from .model import AtomicModel, CoupledModel, ModelSet, is_literal_false, total_state_type
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

DEFAULT_CAP = 10_000
UNIT = "UNIT"
TICKET_OK = "ticket_ok"
ELAPSED = "elapsed"


def state_id(m: AtomicModel, combo: tuple) -> str:
    if not m.finite:
        return UNIT
    return "__".join(f"{v.name}={val}" for v, val in zip(m.finite, combo))


def parse_state_id(sid: str) -> dict[str, str]:
    """Inverse of :func:`state_id`: ``"a=0__b=x"`` -> ``{"a": "0", "b": "x"}``."""
    if sid == UNIT:
        return {}
    # "=" only separates a name from its value, and each value/name
    # boundary is the single "__" in the piece between two "=" signs
    pieces = sid.split("=")
    names, values = [pieces[0]], []
    for middle in pieces[1:-1]:
        val, sep, var = middle.partition("__")
        if not sep or "__" in var:
            raise ValueError(f"malformed state id {sid!r}")
        values.append(val)
        names.append(var)
    values.append(pieces[-1])
    return dict(zip(names, values))


def timeout_event(sid: str) -> str:
    return f"timeout_{sid}"


def enumerate_states(m: AtomicModel, cap: int = DEFAULT_CAP) -> list[str]:
    """All finite-state ids in declaration/domain order; ``["UNIT"]`` when
    the model has no finite variables."""
    count, _ = total_state_type(m)
    if count > cap:
        raise StateExplosion(m.name, count, cap)
    return [state_id(m, combo) for combo in m.combinations()]


@dataclass
class Provenance:
    diagram: str
    index: int  # position in the diagram's transition list
    rule: str  # "ext#k" / "int#k"
    source: str


@dataclass
class MappingReport:
    states: int = 0
    transitions: int = 0
    events: int = 0
    provenance: list[Provenance] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    _seen: set = field(default_factory=set, repr=False)

    def text(self) -> str:
        lines = [f"states: {self.states}", f"transitions: {self.transitions}", f"events: {self.events}"]
        for p in self.provenance:
            lines.append(f"provenance: {p.diagram} #{p.index} <- {p.rule} from {p.source}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


def map_atomic(m: AtomicModel, cap: int = DEFAULT_CAP,
               report: MappingReport | None = None) -> tuple[StateDiagram, ClassRecord]:
    """Build the state diagram for ``m`` and the class recording its
    pseudostate variables.  If ``report`` is given it is filled in."""
    ids = enumerate_states(m, cap)
    combos = list(m.combinations())
    warnings = []
    provenance = []

    ta_for = {}
    for combo in combos:
        entry = next(e for e in m.ta if m.matches(e.pattern, combo))
        ta_for[combo] = entry.expr

    states = []
    timeouts = []
    for sid, combo in zip(ids, combos):
        ta = ta_for[combo]
        entry = [RecordEntryTime()]
        scheduled = not X.is_inf_literal(ta)
        if scheduled:
            entry += [Send(timeout_event(sid), "self", None, ta), CaptureTicket()]
            timeouts.append(UmlEvent(timeout_event(sid), "timeout", owner=sid))
        states.append(UmlState(sid, tuple(entry), (), scheduled))
    has_timeout = {e.owner for e in timeouts}

    events = [UmlEvent(p.name, "port", type=p.type) for p in m.ports] + timeouts

    transitions = []
    for k, r in enumerate(m.external, 1):
        if is_literal_false(r.guard):
            warnings.append(f"{m.name} ext#{k}: guard is literally false")
        guard = X.Binary("and", X.Binary(">=", X.Var(ELAPSED), X.Lit(0, "int")), r.guard)
        action = tuple(Assign(var, e) for var, e in r.updates)
        target = state_id(m, m.key(r.target))
        for sid, combo in zip(ids, combos):
            if m.matches(r.source, combo):
                provenance.append(Provenance(m.name, len(transitions) + 1, f"ext#{k}", sid))
                transitions.append(UmlTransition(sid, target, r.port, guard, action, r.binder))

    for k, r in enumerate(m.internal, 1):
        if is_literal_false(r.guard):
            warnings.append(f"{m.name} int#{k}: guard is literally false")
        guard = X.Binary("and", X.Var(TICKET_OK), r.guard)
        action = []
        if r.output is not None:
            action.append(Send(r.output[0], "port", r.output[1], X.Lit(0.0, "real")))
        action += [Assign(var, e) for var, e in r.updates]
        target = state_id(m, m.key(r.target))
        for sid, combo in zip(ids, combos):
            if not m.matches(r.source, combo):
                continue
            if sid not in has_timeout:
                warnings.append(f"{m.name} int#{k}: never fires from passive state {sid}")
                continue
            provenance.append(Provenance(m.name, len(transitions) + 1, f"int#{k}", sid))
            transitions.append(UmlTransition(sid, target, timeout_event(sid), guard, tuple(action)))

    variables = tuple((v.name, v.type) for v in m.free)
    sd = StateDiagram(m.name, tuple(states), tuple(events), tuple(transitions), variables)
    record = ClassRecord(m.name, variables)
    if report is not None and m.name not in report._seen:
        report._seen.add(m.name)
        report.states += len(states)
        report.transitions += len(transitions)
        report.events += len(events)
        report.provenance += provenance
        report.warnings += warnings
    return sd, record


def _uml_ports(model) -> tuple[UmlPort, ...]:
    return tuple(
        UmlPort(p.name, p.name, "provided" if p.direction == "in" else "required", p.type)
        for p in model.ports
    )


def map_coupled(ms: ModelSet, root: str | None = None, cap: int = DEFAULT_CAP,
                report: MappingReport | None = None, _cache: dict | None = None) -> ComponentDiagram:
    """Component diagram for the coupled model ``root``: one top-level
    component with the model's ports, one subcomponent per DEVS component,
    delegation connectors for external couplings and assembly connectors for
    internal ones."""
    root = root or ms.root
    c = ms[root]
    if not isinstance(c, CoupledModel):
        raise TypeError(f"{root} is not a coupled model")
    cache = {} if _cache is None else _cache
    components = [Component(c.name, _uml_ports(c))]
    containment = []
    for ref in c.components:
        sub = ms[ref.model]
        if ref.model not in cache:
            if isinstance(sub, AtomicModel):
                cache[ref.model] = map_atomic(sub, cap, report)[0]
            else:
                cache[ref.model] = map_coupled(ms, ref.model, cap, report, cache)
        components.append(Component(ref.name, _uml_ports(sub), cache[ref.model]))
        containment.append((c.name, ref.name))
    delegations, assemblies = [], []
    for cp in c.couplings:
        k = Connector((cp.source.owner, cp.source.port), (cp.target.owner, cp.target.port))
        (assemblies if c.coupling_kind(cp) == "IC" else delegations).append(k)
    if report is not None and len(c.components) > 1 and c.name not in report._seen:
        report._seen.add(c.name)
        report.warnings.append(
            f"{c.name}: select order {', '.join(c.select_order)} carried as a priority annotation"
            " (no UML counterpart)")
    return ComponentDiagram(c.name, tuple(components), tuple(containment), tuple(delegations),
                            tuple(assemblies), tuple(c.select_order))


def wrap_atomic(m: AtomicModel, sd: StateDiagram) -> ComponentDiagram:
    """Single-component diagram hosting an atomic root's state machine."""
    return ComponentDiagram(m.name, (Component(m.name, _uml_ports(m), sd),))


def map_model(ms: ModelSet, root: str | None = None,
              cap: int = DEFAULT_CAP) -> tuple[ComponentDiagram, MappingReport]:
    """Map any root (atomic roots are wrapped) and collect a report."""
    root = root or ms.root
    report = MappingReport()
    m = ms[root]
    if isinstance(m, AtomicModel):
        sd, _ = map_atomic(m, cap, report)
        return wrap_atomic(m, sd), report
    return map_coupled(ms, root, cap, report), report


def state_diagrams(cd: ComponentDiagram) -> dict[str, StateDiagram]:
    """Every distinct state diagram in ``cd`` (recursively), by name."""
    out: dict[str, StateDiagram] = {}
    for comp in cd.components:
        if isinstance(comp.payload, StateDiagram):
            out.setdefault(comp.payload.name, comp.payload)
        elif isinstance(comp.payload, ComponentDiagram):
            for name, sd in state_diagrams(comp.payload).items():
                out.setdefault(name, sd)
    return out


def component_diagrams(cd: ComponentDiagram) -> list[ComponentDiagram]:
    out = [cd]
    for comp in cd.components:
        if isinstance(comp.payload, ComponentDiagram):
            out += component_diagrams(comp.payload)
    return out
