"""Mapping of DEVS models to UML state and component diagrams, with
simulators for both sides and a co-simulation equivalence check."""

from .devs_sim import run
from .dsl import parse_model_file
from .emit import from_xmi, to_plantuml_component, to_plantuml_state, to_xmi
from .mapper import map_atomic, map_coupled, map_model
from .model import validate_model
from .scenario import parse_scenario, resolve_scenario
from .uml import validate_component_diagram, validate_state_diagram
from .uml_sim import run_uml
from .verify import cosimulate, fuzz_corpus

__version__ = "0.1.0"

__all__ = [
    "parse_model_file", "validate_model", "parse_scenario", "resolve_scenario", "run", "run_uml",
    "map_atomic", "map_coupled", "map_model", "validate_state_diagram", "validate_component_diagram",
    "to_xmi", "from_xmi", "to_plantuml_state", "to_plantuml_component", "cosimulate", "fuzz_corpus",
]
