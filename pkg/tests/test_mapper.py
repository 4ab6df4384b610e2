import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PROCESSOR, load, model_files
from devs2uml import expr as X
from devs2uml.dsl import parse_model_file
from devs2uml.errors import StateExplosion
from devs2uml.mapper import (
    UNIT, MappingReport, enumerate_states, map_atomic, map_coupled, map_model, parse_state_id, state_diagrams,
    state_id,
)
from devs2uml.model import AtomicModel, FiniteVar, state_word_ok, validate_model
from devs2uml.uml import CaptureTicket, RecordEntryTime, Send, validate_component_diagram, validate_state_diagram


def test_processor_mapping(processor):
    sd, record = map_atomic(processor["Processor"])
    assert [s.id for s in sd.states] == ["phase=idle", "phase=busy"]
    assert [e.name for e in sd.events] == ["in", "out", "timeout_phase=busy"]
    assert [(t.source, t.target, t.trigger) for t in sd.transitions] == [
        ("phase=idle", "phase=busy", "in"), ("phase=busy", "phase=idle", "timeout_phase=busy")]
    assert sd.initial == () and sd.final == ()
    assert record.attributes == (("job", "real"),)
    idle, busy = sd.states
    assert idle.entry == (RecordEntryTime(),) and not idle.ticket
    assert busy.entry == (RecordEntryTime(), Send("timeout_phase=busy", "self", None, X.lit(2.5)), CaptureTicket())
    ext, internal = sd.transitions
    assert X.format_expr(ext.guard) == "((elapsed >= 0) and true)"
    assert ext.binder == "v"
    assert X.format_expr(internal.guard) == "(ticket_ok and true)"
    assert internal.action[0] == Send("out", "port", X.Var("job"), X.lit(0.0))


def test_m_zero_maps_to_one_state():
    sd, record = map_atomic(load("counter")["Counter"])
    assert [s.id for s in sd.states] == [UNIT]
    assert record.attributes == (("count", "int"),)


def test_m_equals_n_has_no_pseudostate_variables():
    sd, record = map_atomic(load("traffic")["TrafficLight"])
    assert record.attributes == ()
    assert sd.variables == ()
    assert len(sd.states) == 6


def test_state_cap():
    m = load("thermostat")["Thermostat"]
    assert len(enumerate_states(m, cap=6)) == 6
    with pytest.raises(StateExplosion) as info:
        enumerate_states(m, cap=5)
    assert info.value.count == 6


def test_wildcards_expand_per_state():
    sd, _ = map_atomic(load("thermostat")["Thermostat"])
    resets = [t for t in sd.transitions if t.trigger == "reset"]
    assert len(resets) == 6


def test_passive_internal_rule_warns():
    text = PROCESSOR.replace("int from phase=busy", "int from *")
    report = MappingReport()
    sd, _ = map_atomic(parse_model_file(text)["Processor"], report=report)
    assert any("passive state phase=idle" in w for w in report.warnings)
    assert all(t.source != "phase=idle" or t.trigger == "in" for t in sd.transitions)


def test_literal_false_guard_warns_but_is_emitted():
    text = PROCESSOR.replace("on in(v) when true", "on in(v) when false")
    report = MappingReport()
    sd, _ = map_atomic(parse_model_file(text)["Processor"], report=report)
    assert any("literally false" in w for w in report.warnings)
    assert len(sd.transitions) == 2


def test_report_provenance(pipeline):
    _, report = map_model(pipeline)
    assert report.states == 2 and report.transitions == 2 and report.events == 3
    assert [(p.rule, p.source) for p in report.provenance] == [("ext#1", "phase=idle"), ("int#1", "phase=busy")]
    assert any("select order" in w for w in report.warnings)
    assert "provenance: Processor #1 <- ext#1 from phase=idle" in report.text()


def test_pipeline_component_diagram(pipeline):
    cd = map_coupled(pipeline)
    assert cd.name == "Pipeline" and cd.top_level() == ["Pipeline"]
    top = cd.component("Pipeline")
    assert [(p.name, p.kind) for p in top.ports] == [("jobs", "provided"), ("done", "required")]
    assert cd.containment == (("Pipeline", "p1"), ("Pipeline", "p2"))
    assert len(cd.delegations) == 2 and len(cd.assemblies) == 1
    assert cd.assemblies[0].source == ("p1", "out") and cd.assemblies[0].target == ("p2", "in")
    assert cd.priority == ("p1", "p2")
    assert cd.component("p1").payload is cd.component("p2").payload


def test_atomic_root_is_wrapped(processor):
    cd, _ = map_model(processor)
    assert [c.name for c in cd.components] == ["Processor"]
    assert cd.components[0].payload.name == "Processor"


@pytest.mark.parametrize("path", model_files(), ids=lambda p: p.stem)
def test_corpus_diagrams_validate_and_ports_match_events(path):
    ms = parse_model_file(path.read_text())
    cd, _ = map_model(ms)
    assert validate_component_diagram(cd) == []
    for name, sd in state_diagrams(cd).items():
        assert validate_state_diagram(sd) == []
        m = ms[name]
        port_events = [e.name for e in sd.events if e.kind == "port"]
        assert port_events == [p.name for p in m.ports]  # one event per port, same order
        assert len(set(port_events)) == len(port_events)


# -- the state id encoding is injective ----------------------------------------

ident = st.text(alphabet="ab_x1", min_size=1, max_size=5).filter(state_word_ok)


@st.composite
def finite_models(draw):
    names = draw(st.lists(ident, min_size=1, max_size=4, unique=True))
    variables = []
    for n in names:
        dom = draw(st.lists(ident | st.integers(0, 99).map(str), min_size=1, max_size=4, unique=True))
        variables.append(FiniteVar(n, tuple(dom)))
    return AtomicModel("M", (), tuple(variables))


def test_ambiguous_state_words_rejected():
    assert not state_word_ok("a__b") and not state_word_ok("a_") and not state_word_ok("_a")
    assert state_word_ok("a_b") and state_word_ok("0")
    text = PROCESSOR.replace("{ idle, busy }", "{ idle, busy_ }").replace("phase=busy", "phase=busy_")
    assert [d.kind for d in validate_model(parse_model_file(text))] == ["BadStateName"]


@settings(max_examples=1000, deadline=None)
@given(finite_models(), st.data())
def test_state_ids_are_injective(m, data):
    combos = list(itertools.islice(m.combinations(), 200))
    a = data.draw(st.sampled_from(combos))
    b = data.draw(st.sampled_from(combos))
    assert (state_id(m, a) == state_id(m, b)) == (a == b)
    assert parse_state_id(state_id(m, a)) == {v.name: val for v, val in zip(m.finite, a)}
    ids = [state_id(m, c) for c in combos]
    assert len(set(ids)) == len(ids)
