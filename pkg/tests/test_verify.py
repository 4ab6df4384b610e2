import pytest

from conftest import PIPELINE, load, scenario, scn
from devs2uml.dsl import parse_model_file
from devs2uml.errors import CosimulationError
from devs2uml.mapper import map_model
from devs2uml.scenario import Event, Trace
from devs2uml.verify import (
    alter_timeout, compare, cosimulate, drop_transition, fuzz_corpus, negate_guard,
)


def test_pipeline_passes(pipeline):
    r = cosimulate(pipeline, scn("root Pipeline\nat 1.0 inject jobs 7.0\nuntil 20"))
    assert r.passed and r.count == 1
    assert r.devs_trace == r.uml_trace == ["6.000000000\tdone\t7"]


def test_mutated_guard_fails_at_index_zero(pipeline):
    cd, _ = map_model(pipeline)
    bad = negate_guard(cd, "Processor", 0)
    r = cosimulate(pipeline, scn("root Pipeline\nat 1.0 inject jobs 7.0\nuntil 20"), bad)
    assert r.verdict == "fail"
    assert r.divergence.index == 0
    assert r.divergence.devs == "6.000000000\tdone\t7" and r.divergence.uml is None


def test_passive_empty_scenario_passes():
    r = cosimulate(load("sink"), scenario("sink-1"))
    assert r.passed and r.count == 0


def test_dropped_transition_and_altered_timeout(pipeline):
    cd, _ = map_model(pipeline)
    sc = scn("root Pipeline\nat 1.0 inject jobs 7.0\nuntil 20")
    r = cosimulate(pipeline, sc, drop_transition(cd, "Processor", 1))
    assert not r.passed and r.divergence.index == 0
    r = cosimulate(pipeline, sc, alter_timeout(cd, "Processor", "phase=busy", 3.0))
    assert not r.passed
    assert r.divergence.index == 0 and r.divergence.uml == "7.000000000\tdone\t7"


def test_first_divergence_is_located():
    devs = Trace([Event(1.0, "a", 1), Event(2.0, "a", 2), Event(3.0, "a", 3)])
    uml = Trace([Event(1.0, "a", 1), Event(2.0, "a", 5)])
    r = compare(devs, uml, "x")
    assert (r.divergence.index, r.divergence.time) == (1, 2.0)
    assert "first divergence at index 1" in r.text()
    assert "divergence.index: 1" in r.records()


def test_tolerance_is_opt_in():
    devs = Trace([Event(1.0, "a", 0.1 + 0.2)])
    uml = Trace([Event(1.0, "a", 0.3)])
    assert not compare(devs, uml).passed
    assert compare(devs, uml, tol=1e-9).passed


def test_records_format(pipeline):
    r = cosimulate(pipeline, scn("root Pipeline\nat 1.0 inject jobs 7.0\nuntil 20"), name="p")
    assert r.records() == "name: p\nverdict: pass\ncount: 1\n"
    assert r.text() == "PASS p: 1 events\n"


def test_errors_are_tagged_by_side(pipeline):
    ms = parse_model_file(PIPELINE.replace("output out(job)", "output out(1.0 / (job - job))"))
    with pytest.raises(CosimulationError) as info:
        cosimulate(ms, scn("root Pipeline\nat 1 inject jobs 2.0\nuntil 10"))
    assert info.value.side == "devs"


def test_fuzz_examples():
    reports = fuzz_corpus(1, 10)
    assert len(reports) == 10 and all(r.passed for r in reports)
    with pytest.raises(ValueError):
        fuzz_corpus(1, 0)
    again = fuzz_corpus(1, 10)
    assert [(r.name, r.verdict, r.devs_trace) for r in reports] == [(r.name, r.verdict, r.devs_trace) for r in again]


def test_mutation_sensitivity_on_fixture():
    ms = load("generator")
    sc = scenario("generator-1")
    cd, _ = map_model(ms)
    assert cosimulate(ms, sc, cd).passed
    sd = cd.components[0].payload
    for i in range(len(sd.transitions)):
        t = sd.transitions[i]
        if t.trigger.startswith("timeout_"):
            assert not cosimulate(ms, sc, negate_guard(cd, "Generator", i)).passed
            assert not cosimulate(ms, sc, drop_transition(cd, "Generator", i)).passed
