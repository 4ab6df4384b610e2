from pathlib import Path

import pytest

from devs2uml.dsl import parse_model_file
from devs2uml.scenario import parse_scenario

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

PROCESSOR = """
atomic Processor { inports { in } outports { out } finite phase in { idle, busy } = idle
  free job : real = 0.0 ta { phase=idle -> INF ; phase=busy -> 2.5 }
  ext from phase=idle on in(v) when true -> phase=busy with { job = v }
  int from phase=busy when true -> phase=idle output out(job) }
"""

PIPELINE = PROCESSOR + """
coupled Pipeline { inports { jobs } outports { done } components { p1: Processor, p2: Processor }
  couple Pipeline.jobs -> p1.in couple p1.out -> p2.in couple p2.out -> Pipeline.done
  select order { p1, p2 } }
"""


def model_files():
    return sorted(CORPUS.glob("*.devs"))


def scenario_files(model_path=None):
    if model_path is None:
        return sorted(CORPUS.glob("*.scn"))
    return sorted(CORPUS.glob(f"{Path(model_path).stem}-*.scn"))


def load(stem):
    return parse_model_file((CORPUS / f"{stem}.devs").read_text())


def scenario(name):
    return parse_scenario((CORPUS / f"{name}.scn").read_text())


def scn(text):
    return parse_scenario(text)


@pytest.fixture
def processor():
    return parse_model_file(PROCESSOR)


@pytest.fixture
def pipeline():
    return parse_model_file(PIPELINE)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
