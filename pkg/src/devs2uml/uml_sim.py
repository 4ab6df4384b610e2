"""Interpreter for generated state and component diagrams with simulated time.

Each state-diagram payload in the component tree becomes a machine.  Events
wait on a single agenda ordered by (due time, external-before-timeout,
priority of the target machine, insertion sequence).  A delivered event
fires the first transition, in diagram order, whose trigger matches and
whose guard holds; firing runs exit(source), the transition action, then
entry(target).

An optional log list receives tuples whose first field names the record:
"action", "ticket", "capture", "deliver", "discard", "fire" and
"routing-error"; the second field is always the simulation time.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from . import expr as X
from .errors import EvaluationError, ScenarioError, SimulationError
from .expr import INF
from .mapper import ELAPSED, TICKET_OK, parse_state_id
from .scenario import Event, Scenario, Trace, _literal_value
from .uml import Assign, CaptureTicket, ComponentDiagram, RecordEntryTime, Send, StateDiagram

EXTERNAL, TIMEOUT = 0, 1
ROOT = "<root>"


@dataclass
class Clock:
    now: float = 0.0


@dataclass
class MachineState:
    state: str
    H: dict
    t_e: float = 0.0
    y: int | None = None
    clock: Clock = field(default_factory=Clock)


def elapsed(ms: MachineState, state: str | None = None) -> float:
    """Time spent in ``state`` (default: the current one); infinite for any
    state the machine is not in."""
    if state is not None and state != ms.state:
        return INF
    return ms.clock.now - ms.t_e


@dataclass(order=True)
class AgendaEntry:
    time: float
    kind: int
    priority: tuple
    seq: int
    target: str = field(compare=False)
    event: str = field(compare=False)
    value: object = field(compare=False, default=None)
    ticket: int | None = field(compare=False, default=None)


@dataclass
class Machine:
    path: str
    diagram: StateDiagram
    priority: tuple
    where: tuple  # (diagram, component name, diagram path, host)
    ms: MachineState | None = None

    def __post_init__(self):
        sd = self.diagram
        self.by_trigger: dict[tuple[str, str], list] = {}
        for t in sd.transitions:
            self.by_trigger.setdefault((t.source, t.trigger), []).append(t)
        self.states = {s.id: s for s in sd.states}
        self.events = {e.name: e for e in sd.events}
        self.types = dict(sd.variables)


def _top(cd: ComponentDiagram) -> str:
    tops = cd.top_level()
    if len(tops) != 1:
        raise SimulationError(f"{cd.name}: expected exactly one top-level component, found {len(tops)}")
    return tops[0]


class UmlSimulator:
    def __init__(self, cd: ComponentDiagram, sc: Scenario, log: list | None = None):
        self.cd = cd
        self.sc = sc
        self.log = log
        self.clock = Clock()
        self.machines: dict[str, Machine] = {}
        self.agenda: list[AgendaEntry] = []
        self.trace = Trace()
        self.seq = itertools.count()
        self.tickets = itertools.count(1)
        self.routing_errors: list[str] = []
        self._discover(cd, _top(cd), cd.name if sc is None else sc.root, (), None)
        if sc is not None and sc.root != cd.name:
            raise ScenarioError(f"scenario root {sc.root!r} does not match diagram {cd.name!r}")

    # -- structure ----------------------------------------------------------

    def _discover(self, cd, top, dpath, prio, host):
        order = list(cd.priority)
        names = [c.name for c in cd.components]
        for comp in cd.components:
            if comp.name == top:
                path, p = dpath, prio
            else:
                path = f"{dpath}.{comp.name}"
                rank = order.index(comp.name) if comp.name in order else len(order) + names.index(comp.name)
                p = prio + (rank,)
            if isinstance(comp.payload, StateDiagram):
                self.machines[path] = Machine(path, comp.payload, p, (cd, comp.name, dpath, host))
            elif isinstance(comp.payload, ComponentDiagram) and comp.name != top:
                inner = comp.payload
                self._discover(inner, _top(inner), path, p, (cd, comp.name, dpath, host))

    def _into(self, cd, cname, port, dpath):
        """Machines reached by an event entering component ``cname``'s port."""
        top = _top(cd)
        comp = cd.component(cname)
        path = dpath if cname == top else f"{dpath}.{cname}"
        if isinstance(comp.payload, StateDiagram):
            return [(path, port)]
        if cname == top:
            out = []
            for k in cd.delegations:
                if k.source == (cname, port):
                    out += self._into(cd, k.target[0], k.target[1], dpath)
            return out
        if isinstance(comp.payload, ComponentDiagram):
            inner = comp.payload
            return self._into(inner, _top(inner), port, path)
        return []

    def _out_of(self, cd, cname, port, dpath, host):
        """Destinations of an event leaving component ``cname``'s port."""
        top = _top(cd)
        if cname == top:
            if host is None:
                return [(ROOT, port)]
            pcd, hname, pdpath, phost = host
            return self._out_of(pcd, hname, port, pdpath, phost)
        out = []
        for k in cd.assemblies:
            if k.source == (cname, port):
                out += self._into(cd, k.target[0], k.target[1], dpath)
        for k in cd.delegations:
            if k.source == (cname, port):
                out += self._out_of(cd, k.target[0], k.target[1], dpath, host)
        return out

    # -- execution ----------------------------------------------------------

    def _note(self, *record):
        if self.log is not None:
            self.log.append(record)

    def _push(self, time, kind, target, event, value=None, ticket=None):
        prio = self.machines[target].priority
        heapq.heappush(self.agenda, AgendaEntry(time, kind, prio, next(self.seq), target, event, value, ticket))

    def _eval(self, e, env, m):
        try:
            return X.evaluate(e, env)
        except EvaluationError as err:
            raise EvaluationError(str(err), path=m.path) from None

    def _route(self, m: Machine, port, value, when):
        cd, cname, dpath, host = m.where
        dests = self._out_of(cd, cname, port, dpath, host)
        if not dests:
            msg = f"{m.path}: no connector for port {port!r}; event dropped"
            self.routing_errors.append(msg)
            self._note("routing-error", when, m.path, port)
        for path, p in dests:
            if path == ROOT:
                self.trace.events.append(Event(when, p, value, m.priority))
            else:
                self._push(when, EXTERNAL, path, p, value)

    def _run_actions(self, m: Machine, actions, env, phase):
        ms = m.ms
        now = self.clock.now
        last_ticket = None
        for a in actions:
            self._note("action", now, m.path, phase, type(a).__name__)
            if isinstance(a, RecordEntryTime):
                ms.t_e = now
            elif isinstance(a, Assign):
                v = X.coerce(self._eval(a.expr, env, m), m.types[a.var])
                ms.H[a.var] = v
                env[a.var] = v
            elif isinstance(a, Send):
                delay = float(self._eval(a.delay, env, m))
                if delay < 0 or delay != delay:
                    raise EvaluationError(f"send delay {delay!r} is negative", path=m.path)
                if delay == INF:
                    last_ticket = None
                    continue
                if a.target == "self":
                    last_ticket = next(self.tickets)
                    self._note("ticket", now, m.path, a.event, last_ticket)
                    self._push(now + delay, TIMEOUT, m.path, a.event, None, last_ticket)
                else:
                    ev = m.events[a.event]
                    value = X.coerce(self._eval(a.value, env, m), ev.type)
                    self._route(m, a.event, value, now + delay)
            elif isinstance(a, CaptureTicket):
                ms.y = last_ticket
                self._note("capture", now, m.path, last_ticket)

    def _enter_initial(self, m: Machine):
        init = self.sc.init.get(m.path)
        if init is None:
            raise ScenarioError(f"no initial state for {m.path}")
        H = {}
        finite = {}
        for var, raw in init.items():
            if var in m.types:
                ty = m.types[var]
                H[var] = _literal_value(raw, ty, f"{m.path}.{var}") if isinstance(raw, str) else X.coerce(raw, ty)
            else:
                finite[var] = str(raw)
        missing = [v for v in m.types if v not in H]
        if missing:
            raise ScenarioError(f"{m.path}.{missing[0]} has no initial value")
        sid = next((s.id for s in m.diagram.states if parse_state_id(s.id) == finite), None)
        if sid is None:
            raise ScenarioError(f"{m.path}: no state matches {finite}")
        m.ms = MachineState(sid, H, 0.0, None, self.clock)
        self._run_actions(m, m.states[sid].entry, dict(H), "entry")

    def _deliver(self, entry: AgendaEntry):
        m = self.machines[entry.target]
        ms = m.ms
        ev = m.events.get(entry.event)
        if ev is None:
            self._note("discard", entry.time, m.path, entry.event, "unknown-event")
            return
        is_timeout = ev.kind == "timeout"
        self._note("deliver", entry.time, m.path, entry.event, entry.ticket)
        ticket_ok = is_timeout and entry.ticket is not None and entry.ticket == ms.y
        base = dict(ms.H)
        base[ELAPSED] = self.clock.now - ms.t_e
        base[TICKET_OK] = ticket_ok
        value = X.coerce(entry.value, ev.type) if not is_timeout else None
        for t in m.by_trigger.get((ms.state, entry.event), ()):
            env = dict(base)
            if t.binder is not None:
                env[t.binder] = value
            if self._eval(t.guard, env, m):
                self._fire(m, t, env)
                return
        reason = "stale-ticket" if is_timeout and not ticket_ok else "no-enabled-transition"
        self._note("discard", entry.time, m.path, entry.event, reason)

    def _fire(self, m: Machine, t, env):
        ms = m.ms
        self._note("fire", self.clock.now, m.path, t.source, t.target, t.trigger)
        self._run_actions(m, m.states[t.source].exit, env, "exit")
        ms.y = None  # the ticket slot is local to the state being left
        self._run_actions(m, t.action, env, "transition")
        ms.state = t.target
        self._run_actions(m, m.states[t.target].entry, env, "entry")

    def run(self) -> Trace:
        sc = self.sc
        for m in self.machines.values():
            self._enter_initial(m)
        top = _top(self.cd)
        for inj in sc.injections:
            dests = self._into(self.cd, top, inj.port, self.cd.name)
            for path, port in dests:
                ev = self.machines[path].events.get(port)
                value = inj.value
                if isinstance(value, str):
                    value = _literal_value(value, ev.type if ev else "real", f"injection on {inj.port}")
                self._push(float(inj.time), EXTERNAL, path, port, value)
        while self.agenda:
            if self.agenda[0].time > sc.horizon:
                break
            entry = heapq.heappop(self.agenda)
            if entry.time < self.clock.now:
                raise SimulationError("clock moved backwards")
            self.clock.now = entry.time
            self._deliver(entry)
        return self.trace.sorted()


def run_uml(cd: ComponentDiagram, sc: Scenario, log: list | None = None) -> Trace:
    """Execute ``cd`` on a resolved scenario and return the root output trace."""
    return UmlSimulator(cd, sc, log).run()
