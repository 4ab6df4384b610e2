"""Co-simulation of a DEVS model and its mapped UML diagrams.

Both simulators run on the same scenario and their root traces are compared
line by line in canonical text form.  The mutation helpers build
deliberately broken diagrams used to check that the comparison has teeth.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from . import expr as X
from .devs_sim import run as run_devs
from .errors import CosimulationError, Devs2UmlError
from .mapper import DEFAULT_CAP, map_model
from .model import ModelSet
from .scenario import Scenario, Trace, resolve_scenario
from .uml import ComponentDiagram, Send, StateDiagram
from .uml_sim import run_uml


@dataclass
class Divergence:
    index: int
    time: float | None
    devs: str | None  # trace line, or None when that side ran out
    uml: str | None


@dataclass
class EquivalenceReport:
    name: str
    verdict: str  # "pass" or "fail"
    count: int  # events compared equal (all of them on a pass)
    divergence: Divergence | None = None
    devs_trace: list[str] = field(default_factory=list)
    uml_trace: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def text(self) -> str:
        if self.divergence is None:
            return f"{self.verdict.upper()} {self.name}: {self.count} events\n"
        head = f"{self.verdict.upper()} {self.name}: {self.count} matching events before the divergence"
        d = self.divergence
        lines = [head, f"  first divergence at index {d.index} (t={_time_text(d.time)})",
                 f"    devs: {d.devs if d.devs is not None else '<end of trace>'}",
                 f"    uml:  {d.uml if d.uml is not None else '<end of trace>'}",
                 "  devs trace:"]
        lines += [f"    {line}" for line in self.devs_trace]
        lines.append("  uml trace:")
        lines += [f"    {line}" for line in self.uml_trace]
        return "\n".join(lines) + "\n"

    def records(self) -> str:
        """Line-oriented ``key: value`` form for machine consumption."""
        out = [f"name: {self.name}", f"verdict: {self.verdict}", f"count: {self.count}"]
        if self.divergence is not None:
            d = self.divergence
            out += [f"divergence.index: {d.index}", f"divergence.time: {_time_text(d.time)}",
                    f"divergence.devs: {_escape(d.devs)}", f"divergence.uml: {_escape(d.uml)}"]
            out += [f"devs.event: {_escape(line)}" for line in self.devs_trace]
            out += [f"uml.event: {_escape(line)}" for line in self.uml_trace]
        return "\n".join(out) + "\n"


def _time_text(t):
    return "none" if t is None else f"{t:.9f}"


def _escape(line):
    return "none" if line is None else line.replace("\t", "\\t")


def _split(line):
    t, port, value = line.split("\t")
    return float(t), port, value


def _same(a: str, b: str, tol: float | None) -> bool:
    if tol is None:
        return a == b
    ta, pa, va = _split(a)
    tb, pb, vb = _split(b)
    if pa != pb or abs(ta - tb) > tol:
        return False
    if va == vb:
        return True
    try:
        return abs(float(va) - float(vb)) <= tol
    except ValueError:
        return False


def compare(devs: Trace, uml: Trace, name: str = "", tol: float | None = None) -> EquivalenceReport:
    """Compare two traces; byte equality unless a tolerance is given."""
    a, b = devs.lines(), uml.lines()
    for i in range(max(len(a), len(b))):
        la = a[i] if i < len(a) else None
        lb = b[i] if i < len(b) else None
        if la is None or lb is None or not _same(la, lb, tol):
            t = _split(la if la is not None else lb)[0]
            return EquivalenceReport(name, "fail", i, Divergence(i, t, la, lb), a, b)
    return EquivalenceReport(name, "pass", len(a), None, a, b)


def cosimulate(ms: ModelSet, sc: Scenario, diagram: ComponentDiagram | None = None,
               name: str | None = None, tol: float | None = None,
               cap: int = DEFAULT_CAP) -> EquivalenceReport:
    """Run ``sc`` through the DEVS simulator and through the UML interpreter
    on ``diagram`` (by default the mapping of the scenario's root) and
    compare the traces.  Simulator errors are re-raised tagged by side."""
    sc = resolve_scenario(ms, sc)
    if diagram is None:
        diagram, _ = map_model(ms, sc.root, cap)
    try:
        devs = run_devs(ms, sc)
    except Devs2UmlError as err:
        raise CosimulationError("devs", err) from err
    try:
        uml = run_uml(diagram, sc)
    except Devs2UmlError as err:
        raise CosimulationError("uml", err) from err
    return compare(devs, uml, name or sc.root, tol)


def fuzz_corpus(seed: int, count: int, caps=None) -> list[EquivalenceReport]:
    """Cosimulate ``count`` generated (model, scenario) pairs from ``seed``."""
    from .fuzz import generate_cases

    reports = []
    for case in generate_cases(seed, count, caps):
        reports.append(cosimulate(case.models, case.scenario, name=case.name))
    return reports


# -- mutations --------------------------------------------------------------


def _rewrite(cd: ComponentDiagram, name: str, fn, seen: list) -> ComponentDiagram:
    comps = []
    for c in cd.components:
        payload = c.payload
        if isinstance(payload, StateDiagram) and payload.name == name:
            payload = fn(payload)
            seen.append(name)
        elif isinstance(payload, ComponentDiagram):
            payload = _rewrite(payload, name, fn, seen)
        comps.append(dataclasses.replace(c, payload=payload))
    return dataclasses.replace(cd, components=tuple(comps))


def rewrite_state_diagram(cd: ComponentDiagram, name: str, fn) -> ComponentDiagram:
    """Copy of ``cd`` with every state diagram called ``name`` replaced by ``fn(sd)``."""
    seen: list = []
    out = _rewrite(cd, name, fn, seen)
    if not seen:
        raise KeyError(f"no state diagram named {name!r}")
    return out


def negate_guard(cd: ComponentDiagram, name: str, index: int) -> ComponentDiagram:
    """Negate the guard of transition ``index`` (0-based) in diagram ``name``."""
    def fn(sd):
        ts = list(sd.transitions)
        ts[index] = dataclasses.replace(ts[index], guard=X.Unary("not", ts[index].guard))
        return dataclasses.replace(sd, transitions=tuple(ts))
    return rewrite_state_diagram(cd, name, fn)


def drop_transition(cd: ComponentDiagram, name: str, index: int) -> ComponentDiagram:
    def fn(sd):
        ts = list(sd.transitions)
        del ts[index]
        return dataclasses.replace(sd, transitions=tuple(ts))
    return rewrite_state_diagram(cd, name, fn)


def alter_timeout(cd: ComponentDiagram, name: str, state: str, delay: float) -> ComponentDiagram:
    """Replace the timeout delay scheduled on entry to ``state``."""
    def fn(sd):
        states = []
        for s in sd.states:
            if s.id == state:
                entry = tuple(
                    dataclasses.replace(a, delay=X.lit(delay)) if isinstance(a, Send) and a.target == "self" else a
                    for a in s.entry)
                s = dataclasses.replace(s, entry=entry)
            states.append(s)
        return dataclasses.replace(sd, states=tuple(states))
    return rewrite_state_diagram(cd, name, fn)
