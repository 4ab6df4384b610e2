"""Reference simulator with classic DEVS semantics.

Coupled models are flattened into atomic instances whose paths are the
dot-joined reference names below the root (``Pipeline.p1``).  At equal
times, injections and routed events are delivered before imminence is
evaluated, so an external transition preempts a same-time internal one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from . import expr as X
from .errors import EvaluationError, SimulationError, UnresolvedTie
from .expr import INF
from .model import AtomicModel, CoupledModel, ModelSet
from .scenario import Event, Scenario, Trace, resolve_scenario

ROOT = "<root>"


@dataclass(frozen=True)
class Dest:
    """Delivery target: an atomic instance input, or a root output when
    ``path`` is ``ROOT``."""

    path: str
    port: str


class CompiledAtomic:
    """Rule tables expanded per finite-state combination."""

    def __init__(self, m: AtomicModel):
        self.model = m
        self.ta = {}
        self.ext: dict[tuple, list] = {}
        self.int: dict[tuple, list] = {}
        for combo in m.combinations():
            for entry in m.ta:
                if m.matches(entry.pattern, combo):
                    self.ta[combo] = entry.expr
                    break
            for r in m.external:
                if m.matches(r.source, combo):
                    self.ext.setdefault((combo, r.port), []).append(r)
            self.int[combo] = [r for r in m.internal if m.matches(r.source, combo)]
        self.types = m.free_env
        self.port_types = {p.name: p.type for p in m.ports}


@lru_cache(maxsize=256)
def _compile(m: AtomicModel) -> CompiledAtomic:
    return CompiledAtomic(m)


@dataclass
class Instance:
    path: str
    model: AtomicModel
    priority: tuple


@dataclass
class InstanceTree:
    root: str
    instances: dict[str, Instance] = field(default_factory=dict)
    inputs: dict[str, list[Dest]] = field(default_factory=dict)
    routes: dict[tuple[str, str], list[Dest]] = field(default_factory=dict)


def instantiate(ms: ModelSet, root: str | None = None) -> InstanceTree:
    """Flatten ``root`` into atomic instances and compile routing tables."""
    root = root or ms.root
    tree = InstanceTree(root)
    parents: dict[str, tuple[CoupledModel, str, str]] = {}

    def build(name, path, priority):
        m = ms[name]
        if isinstance(m, AtomicModel):
            tree.instances[path] = Instance(path, m, priority)
            return
        order = m.select_order
        for c in m.components:
            child = f"{path}.{c.name}"
            parents[child] = (m, path, c.name)
            build(c.model, child, priority + (order.index(c.name),))

    def model_at(path):
        if path == root:
            return ms[root]
        parent, _, ref = parents[path]
        return ms[parent.component(ref).model]

    def route_in(path, port):
        m = model_at(path)
        if isinstance(m, AtomicModel):
            return [Dest(path, port)]
        out = []
        for cp in m.couplings:
            if m.coupling_kind(cp) == "EIC" and cp.source.port == port:
                out += route_in(f"{path}.{cp.target.owner}", cp.target.port)
        return out

    def route_out(path, port):
        if path == root:
            return [Dest(ROOT, port)]
        parent, ppath, ref = parents[path]
        out = []
        for cp in parent.couplings:
            if cp.source.owner != ref or cp.source.port != port:
                continue
            kind = parent.coupling_kind(cp)
            if kind == "IC":
                out += route_in(f"{ppath}.{cp.target.owner}", cp.target.port)
            elif kind == "EOC":
                out += route_out(ppath, cp.target.port)
        return out

    build(root, root, ())
    rm = ms[root]
    for p in rm.inports:
        tree.inputs[p.name] = route_in(root, p.name)
    for path, inst in tree.instances.items():
        for p in inst.model.outports:
            tree.routes[(path, p.name)] = route_out(path, p.name)
    return tree


@dataclass
class TotalState:
    finite: tuple
    free: dict
    t_last: float = 0.0
    t_next: float = INF


def finite_key(m: AtomicModel, assignment: dict) -> tuple:
    return tuple(assignment[v.name] for v in m.finite)


def time_advance(m: AtomicModel, s: TotalState, path: str | None = None, compiled=None) -> float:
    """Evaluate the unique ta entry for the current finite state."""
    e = (compiled or _compile(m)).ta[s.finite]
    try:
        v = float(X.evaluate(e, s.free))
    except EvaluationError as err:
        raise EvaluationError(str(err), path=path) from None
    if v < 0 or v != v:
        raise EvaluationError(f"time advance {v!r} is not a non-negative duration", e.loc, path)
    return v


class DevsSimulator:
    def __init__(self, ms: ModelSet, sc: Scenario, log: list | None = None):
        self.ms = ms
        self.sc = resolve_scenario(ms, sc)
        self.tree = instantiate(ms, self.sc.root)
        self.log = log
        self.states: dict[str, TotalState] = {}
        self.trace = Trace()
        by_model = {}
        self.compiled = {}
        for path, inst in self.tree.instances.items():
            if id(inst.model) not in by_model:
                by_model[id(inst.model)] = CompiledAtomic(inst.model)
            self.compiled[path] = by_model[id(inst.model)]
        for path, inst in self.tree.instances.items():
            init = self.sc.init[path]
            s = TotalState(finite_key(inst.model, init), {v.name: init[v.name] for v in inst.model.free})
            s.t_next = self._schedule(inst, s, 0.0)
            self.states[path] = s

    def _note(self, *record):
        if self.log is not None:
            self.log.append(record)

    def _schedule(self, inst, s, t):
        ta = time_advance(inst.model, s, inst.path, self.compiled[inst.path])
        return t + ta if ta != INF else INF

    def _eval(self, e, bindings, path):
        try:
            return X.evaluate(e, bindings)
        except EvaluationError as err:
            raise EvaluationError(str(err), path=path) from None

    def _apply(self, inst, s, updates, bindings, target, t):
        types = self.compiled[inst.path].types
        env = dict(bindings)
        for var, e in updates:
            v = X.coerce(self._eval(e, env, inst.path), types[var])
            s.free[var] = v
            env[var] = v
        s.finite = inst.model.key(target)
        s.t_last = t
        s.t_next = self._schedule(inst, s, t)

    def _external(self, dest: Dest, value, t):
        inst = self.tree.instances[dest.path]
        s = self.states[dest.path]
        comp = self.compiled[dest.path]
        value = X.coerce(value, comp.port_types[dest.port])
        elapsed = t - s.t_last
        for r in comp.ext.get((s.finite, dest.port), ()):
            bindings = dict(s.free)
            bindings[r.binder] = value
            bindings["elapsed"] = elapsed
            if self._eval(r.guard, bindings, inst.path):
                ta = s.t_next - s.t_last if s.t_next != INF else INF
                self._note("ext", t, dest.path, dest.port, elapsed, ta)
                self._apply(inst, s, r.updates, bindings, r.target, t)
                return
        self._note("ignore", t, dest.path, dest.port)

    def _deliver(self, dests, value, t, rank):
        for d in dests:
            if d.path == ROOT:
                self.trace.events.append(Event(t, d.port, value, rank))
            else:
                self._external(d, value, t)

    def _internal(self, inst, t):
        s = self.states[inst.path]
        comp = self.compiled[inst.path]
        for r in comp.int[s.finite]:
            if not self._eval(r.guard, s.free, inst.path):
                continue
            self._note("int", t, inst.path)
            out = None
            if r.output is not None:
                port, e = r.output
                value = X.coerce(self._eval(e, s.free, inst.path), comp.port_types[port])
                out = (port, value)
            self._apply(inst, s, r.updates, s.free, r.target, t)
            if out is not None:
                self._deliver(self.tree.routes[(inst.path, out[0])], out[1], t, inst.priority)
            return
        # no enabled internal rule: passive until the next external event
        self._note("stall", t, inst.path)
        s.t_next = INF

    def run(self) -> Trace:
        injections = self.sc.injections
        horizon = self.sc.horizon
        i = 0
        while True:
            t_inj = injections[i].time if i < len(injections) else INF
            t_int = min((s.t_next for s in self.states.values()), default=INF)
            t = min(t_inj, t_int)
            if t == INF or t > horizon:
                break
            if t_inj == t:
                inj = injections[i]
                i += 1
                self._note("inject", t, inj.port)
                self._deliver(self.tree.inputs.get(inj.port, []), inj.value, t, ())
                continue
            imminent = [self.tree.instances[p] for p, s in self.states.items() if s.t_next == t]
            imminent.sort(key=lambda inst: inst.priority)
            if len(imminent) > 1 and imminent[0].priority == imminent[1].priority:
                raise UnresolvedTie(f"{imminent[0].path} and {imminent[1].path} share a priority")
            self._internal(imminent[0], t)
        return self.trace.sorted()


def run(ms: ModelSet, sc: Scenario, log: list | None = None) -> Trace:
    """Simulate ``sc`` on ``ms`` and return the root output trace."""
    return DevsSimulator(ms, sc, log).run()


__all__ = ["instantiate", "time_advance", "run", "DevsSimulator", "TotalState", "Dest", "ROOT", "SimulationError"]
