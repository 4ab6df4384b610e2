"""Check that a model and its UML mapping behave the same, then break the
mapping on purpose and watch the check catch it."""

from pathlib import Path

from devs2uml.dsl import parse_model_file
from devs2uml.mapper import map_model
from devs2uml.scenario import parse_scenario
from devs2uml.verify import alter_timeout, cosimulate, fuzz_corpus, negate_guard

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

ms = parse_model_file((CORPUS / "pipeline.devs").read_text())
sc = parse_scenario((CORPUS / "pipeline-2.scn").read_text())
diagram, _ = map_model(ms)

print(cosimulate(ms, sc, diagram).text())

# Two broken diagrams: the acceptance guard negated, and a slower service.
print(cosimulate(ms, sc, negate_guard(diagram, "Processor", 0), name="negated guard").text())
print(cosimulate(ms, sc, alter_timeout(diagram, "Processor", "phase=busy", 3.0), name="slower").records())

# Randomly generated models, all expected to agree.
reports = fuzz_corpus(seed=1, count=25)
print(sum(r.passed for r in reports), "of", len(reports), "generated models agree")
