"""Map the single-server processor to UML and look at what comes out.

Run from the repository root:  python3 demos/01_map_processor.py
"""

from pathlib import Path

from devs2uml.dsl import parse_model_file
from devs2uml.emit import to_plantuml_class, to_plantuml_state, to_xmi
from devs2uml.mapper import MappingReport, map_atomic

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

ms = parse_model_file((CORPUS / "processor.devs").read_text())
model = ms["Processor"]

# One UML state per value of the finite variable `phase`; the free
# variable `job` becomes a pseudostate variable recorded on a class.
report = MappingReport()
diagram, record = map_atomic(model, report=report)

print("states:", [s.id for s in diagram.states])
print("events:", [e.name for e in diagram.events])
print("class attributes:", record.attributes)
print()

# The busy state schedules its own timeout on entry and keeps the ticket,
# so a later external transition can make that timeout stale.
for action in diagram.state("phase=busy").entry:
    print("entry action:", action)
print()

print(to_plantuml_state(diagram))
print(to_plantuml_class(record))
print(report.text())

xmi = to_xmi(diagram)
print(xmi.splitlines()[1])
print(f"... {len(xmi.splitlines())} lines of XMI in total")
