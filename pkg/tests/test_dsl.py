import pytest

from conftest import PROCESSOR, model_files
from devs2uml.dsl import format_model_set, parse_model_file
from devs2uml.errors import DslSyntaxError, ModelError
from devs2uml.model import AtomicModel, validate_model


def test_processor_counts():
    ms = parse_model_file(PROCESSOR)
    assert list(ms.models) == ["Processor"]
    m = ms["Processor"]
    assert isinstance(m, AtomicModel)
    assert len(m.ports) == 2
    assert len(m.finite) + len(m.free) == 2
    assert len(m.external) == 1 and len(m.internal) == 1


def test_empty_file_has_no_root():
    ms = parse_model_file("")
    assert ms.models == {} and ms.root is None
    diags = validate_model(ms)
    assert [d.kind for d in diags] == ["NoRoot"]
    assert "no root model" in diags[0].message


def test_self_coupling_parses_but_fails_validation():
    text = PROCESSOR + """
    coupled Pipeline { inports { jobs } outports { done } components { p1: Processor }
      couple Pipeline.jobs -> p1.in couple p1.out -> p1.in couple p1.out -> Pipeline.done }"""
    ms = parse_model_file(text)
    kinds = [(d.model, d.kind) for d in validate_model(ms)]
    assert ("Pipeline", "Feedback") in kinds


def test_syntax_error_carries_position():
    with pytest.raises(DslSyntaxError) as info:
        parse_model_file("atomic A {\n  inports { a }\n  ta { * => 1.0 }\n}")
    assert info.value.line == 3


def test_duplicate_model_name():
    with pytest.raises(ModelError, match="Processor"):
        parse_model_file(PROCESSOR + PROCESSOR)


def test_unresolved_component():
    with pytest.raises(ModelError, match="Nope"):
        parse_model_file("coupled C { inports { a } outports { b } components { x: Nope } }")


def test_root_is_last_unreferenced_model():
    text = PROCESSOR + """
    coupled Solo { inports { a } outports { b } components { p: Processor }
      couple Solo.a -> p.in couple p.out -> Solo.b }"""
    assert parse_model_file(text).root == "Solo"
    assert parse_model_file(PROCESSOR).root == "Processor"


def test_optional_when_and_typed_ports():
    ms = parse_model_file("""atomic T { inports { a : int } outports { b : bool }
      free n : int = 0 ta { * -> INF } ext from * on a(v) -> * with { n = n + v } }""")
    m = ms["T"]
    assert m.port("a").type == "int" and m.port("b").type == "bool"
    assert validate_model(ms) == []


@pytest.mark.parametrize("path", model_files(), ids=lambda p: p.stem)
def test_print_parse_fixpoint(path):
    ms = parse_model_file(path.read_text())
    text = format_model_set(ms)
    again = parse_model_file(text)
    assert format_model_set(again) == text
    assert again.models == ms.models
