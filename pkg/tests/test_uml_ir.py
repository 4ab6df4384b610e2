import dataclasses

from conftest import load
from devs2uml import expr as X
from devs2uml.mapper import map_atomic, map_coupled, map_model
from devs2uml.uml import (
    Assign, Component, ComponentDiagram, Connector, UmlPort, UmlTransition, validate_component_diagram,
    validate_state_diagram,
)


def kinds(diags):
    return [d.kind for d in diags]


def test_processor_diagram_is_valid(processor):
    sd, _ = map_atomic(processor["Processor"])
    assert validate_state_diagram(sd) == []


def test_duplicate_state_id(processor):
    sd, _ = map_atomic(processor["Processor"])
    bad = dataclasses.replace(sd, states=sd.states + (sd.states[0],))
    assert "DuplicateStateId" in kinds(validate_state_diagram(bad))


def test_assignment_to_undeclared_variable(processor):
    sd, _ = map_atomic(processor["Processor"])
    t = dataclasses.replace(sd.transitions[0], action=(Assign("nope", X.lit(1.0)),))
    bad = dataclasses.replace(sd, transitions=(t,) + sd.transitions[1:])
    assert kinds(validate_state_diagram(bad)) == ["UnknownVariable"]


def test_unknown_trigger_and_state(processor):
    sd, _ = map_atomic(processor["Processor"])
    t = UmlTransition("phase=idle", "phase=gone", "zap", X.TRUE)
    assert set(kinds(validate_state_diagram(dataclasses.replace(sd, transitions=(t,))))) == {
        "UnknownState", "UnknownEvent"}


def test_multiple_initial_states(processor):
    sd, _ = map_atomic(processor["Processor"])
    bad = dataclasses.replace(sd, initial=("phase=idle", "phase=busy"))
    assert kinds(validate_state_diagram(bad)) == ["MultipleInitial"]


def test_guard_type_checked(processor):
    sd, _ = map_atomic(processor["Processor"])
    t = dataclasses.replace(sd.transitions[0], guard=X.parse_expr("job + 1"))
    bad = dataclasses.replace(sd, transitions=(t,) + sd.transitions[1:])
    assert kinds(validate_state_diagram(bad)) == ["TypeMismatch"]


def test_pipeline_diagram_is_valid(pipeline):
    assert validate_component_diagram(map_coupled(pipeline)) == []


def test_assembly_between_two_provided_ports(pipeline):
    cd = map_coupled(pipeline)
    bad = dataclasses.replace(cd, assemblies=(Connector(("p1", "in"), ("p2", "in")),))
    assert "DirectionClash" in kinds(validate_component_diagram(bad))


def test_delegation_direction(pipeline):
    cd = map_coupled(pipeline)
    bad = dataclasses.replace(cd, delegations=(Connector(("Pipeline", "jobs"), ("p1", "out")),) + cd.delegations[1:])
    assert "DirectionClash" in kinds(validate_component_diagram(bad))


def test_self_containment():
    port = UmlPort("a", "a", "provided", "real")
    cd = ComponentDiagram("X", (Component("X", (port,)),), (("X", "X"),))
    assert kinds(validate_component_diagram(cd)) == ["SelfContainment"]


def test_containment_cycle():
    comps = (Component("A"), Component("B"))
    cd = ComponentDiagram("A", comps, (("A", "B"), ("B", "A")))
    assert "ContainmentCycle" in kinds(validate_component_diagram(cd))


def test_port_direction_property():
    assert UmlPort("a", "a", "provided").direction == "in"
    assert UmlPort("a", "a", "required").direction == "out"


def test_nested_payloads_validated():
    cd, _ = map_model(load("nested"))
    assert validate_component_diagram(cd) == []
