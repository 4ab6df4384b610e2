import xml.etree.ElementTree as ET

import pytest

from conftest import load, model_files
from devs2uml.dsl import parse_model_file
from devs2uml.emit import from_xmi, to_plantuml_class, to_plantuml_component, to_plantuml_state, to_xmi
from devs2uml.errors import XmiParseError, XmiSchemaError, XmiVersionError
from devs2uml.fuzz import generate_cases
from devs2uml.mapper import component_diagrams, map_atomic, map_model, state_diagrams
from devs2uml.uml import ComponentDiagram, StateDiagram


def test_processor_xmi_counts(processor):
    sd, _ = map_atomic(processor["Processor"])
    root = ET.fromstring(to_xmi(sd))
    assert root.get("version") == "1" and root.get("format")
    assert len(root.findall(".//state")) == 2
    assert len(root.findall(".//event")) == 3
    assert len(root.findall(".//transition")) == 2
    classes = root.findall(".//class")
    assert len(classes) == 1
    assert [(a.get("name"), a.get("type")) for a in classes[0]] == [("job", "real")]


def test_empty_component_diagram():
    cd = ComponentDiagram("Empty")
    text = to_xmi(cd)
    assert ET.fromstring(text).findall(".//component") == []
    assert from_xmi(text) == cd


def test_deterministic_and_sorted_attributes(pipeline):
    cd, _ = map_model(pipeline)
    a, b = to_xmi(cd), to_xmi(cd)
    assert a == b
    assert "\r" not in a
    for el in ET.fromstring(a).iter():
        assert list(el.attrib) == sorted(el.attrib)


@pytest.mark.parametrize("path", model_files(), ids=lambda p: p.stem)
def test_round_trip_corpus(path):
    cd, _ = map_model(parse_model_file(path.read_text()))
    for d in [*component_diagrams(cd), *state_diagrams(cd).values()]:
        assert from_xmi(to_xmi(d)) == d


def test_round_trip_generated():
    for case in generate_cases(11, 25):
        cd, _ = map_model(case.models)
        assert from_xmi(to_xmi(cd)) == cd


def test_missing_version(processor):
    text = to_xmi(map_atomic(processor["Processor"])[0]).replace(' version="1"', "")
    with pytest.raises(XmiVersionError):
        from_xmi(text)
    with pytest.raises(XmiVersionError):
        from_xmi(text.replace("<XMI ", '<XMI version="9" '))


def test_truncated(processor):
    text = to_xmi(map_atomic(processor["Processor"])[0])
    with pytest.raises(XmiParseError):
        from_xmi(text[: len(text) // 2])


def test_unknown_element_reports_path(processor):
    text = to_xmi(map_atomic(processor["Processor"])[0])
    text = text.replace("<captureTicket />", "<teleport />")
    with pytest.raises(XmiSchemaError) as info:
        from_xmi(text)
    assert info.value.path == "/XMI/stateDiagram[1]/state[2]/entry[1]/teleport[1]"


def test_missing_attribute_reports_path(processor):
    text = to_xmi(map_atomic(processor["Processor"])[0]).replace('<state id="phase=busy"', "<state")
    with pytest.raises(XmiSchemaError, match=r"state\[2\]"):
        from_xmi(text)


def test_plantuml_state(processor):
    text = to_plantuml_state(map_atomic(processor["Processor"])[0])
    assert text.startswith("@startuml Processor\n") and text.endswith("@enduml\n")
    assert '"phase=idle" --> "phase=busy" : in [' in text
    assert '"phase=busy" --> "phase=idle" : timeout_phase=busy [' in text
    assert '"phase=busy" : entry / t_e := t_curr' in text


def test_plantuml_single_state():
    m = parse_model_file("atomic One { inports { } outports { } ta { * -> INF } }")["One"]
    lines = to_plantuml_state(map_atomic(m)[0]).splitlines()
    assert lines == ["@startuml One", "hide empty description", 'state "UNIT"',
                     '"UNIT" : entry / t_e := t_curr', "@enduml"]


def test_plantuml_self_arrow():
    text = to_plantuml_state(map_atomic(load("generator")["Generator"])[0])
    assert '"phase=active" --> "phase=active" : timeout_phase=active' in text


def test_plantuml_class():
    text = to_plantuml_class(map_atomic(load("server")["Server"])[1])
    assert "class Server {\n  size : real\n  served : int\n}" in text


def _connectors(text):
    return [line for line in text.splitlines() if " --> " in line or " ..> " in line]


def test_plantuml_component_pipeline(pipeline):
    text = to_plantuml_component(map_model(pipeline)[0])
    lines = text.splitlines()
    outer = [line for line in lines if line.startswith("component ")]
    inner = [line for line in lines if line.startswith("  component ")]
    assert len(outer) == 1 and len(inner) == 2
    assert len(_connectors(text)) == 3
    assert "portin" in text and "portout" in text


def test_plantuml_component_empty():
    assert to_plantuml_component(ComponentDiagram("E")) == "@startuml E\n@enduml\n"


def test_plantuml_component_nested():
    text = to_plantuml_component(map_model(load("nested"))[0])
    assert '    component "p1"' in text  # Pipeline's processors inside the "line" block
    assert len(_connectors(text)) == 4 + 3


def test_payload_kinds(pipeline):
    cd, _ = map_model(load("nested"))
    assert isinstance(cd.component("line").payload, ComponentDiagram)
    assert isinstance(cd.component("qa").payload, StateDiagram)
