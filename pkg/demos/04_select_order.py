"""Simultaneous events in a coupled model.

Two clocks tick every 2.0.  The left clock's tick is also wired to the
right clock, so whenever both are due at the same instant the order in
which they run matters: the select order picks the left clock, its tick
reaches the right clock first, and the right clock's own timeout becomes
stale.  Swapping the order changes the trace, and the UML side follows in
both cases because the order travels as a priority annotation.
"""

from pathlib import Path

from devs2uml.devs_sim import run
from devs2uml.dsl import parse_model_file
from devs2uml.scenario import parse_scenario
from devs2uml.verify import cosimulate

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

source = (CORPUS / "race.devs").read_text()
sc = parse_scenario((CORPUS / "race-1.scn").read_text())

for order in ("left, right, probe", "right, left, probe"):
    ms = parse_model_file(source.replace("select order { left, right, probe }", f"select order {{ {order} }}"))
    print(f"select order {{ {order} }}")
    print(run(ms, sc).text(), end="")
    print(cosimulate(ms, sc).text())
