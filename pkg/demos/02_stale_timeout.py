"""Why timeouts carry tickets.

A job arrives at 1.0 and is cancelled at 2.0.  The timeout scheduled on
entry to `busy` is still on the agenda and gets delivered at 3.5; its
ticket no longer matches, so the machine discards it and emits nothing.
"""

from pathlib import Path

from devs2uml.devs_sim import run
from devs2uml.dsl import parse_model_file
from devs2uml.mapper import map_model
from devs2uml.scenario import parse_scenario, resolve_scenario
from devs2uml.uml_sim import run_uml

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

ms = parse_model_file((CORPUS / "cancel.devs").read_text())
sc = resolve_scenario(ms, parse_scenario((CORPUS / "cancel-1.scn").read_text()))
diagram, _ = map_model(ms)

log = []
trace = run_uml(diagram, sc, log)
for record in log:
    if record[0] in ("ticket", "capture", "deliver", "discard", "fire"):
        print(*record)

print()
print("UML trace: ", repr(trace.text()))
print("DEVS trace:", repr(run(ms, sc).text()))

# Without the cancel the same timeout is current and fires.
sc2 = resolve_scenario(ms, parse_scenario((CORPUS / "cancel-2.scn").read_text()))
print("without the cancel:", repr(run_uml(diagram, sc2).text()))
