"""Seeded generator of small valid DEVS models and scenarios.

Models are produced as DSL text and parsed, so every case also exercises
the front end.  Time advances are strictly positive (or INF) to rule out
zero-time loops, and free-variable updates stay far from integer overflow
within the horizon.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .dsl import parse_model_file
from .model import ModelSet, validate_model
from .scenario import Scenario, parse_scenario


@dataclass(frozen=True)
class Caps:
    finite_vars: int = 3
    values: int = 3
    free_vars: int = 2
    rules: int = 4
    components: int = 3
    injections: int = 8
    horizon: float = 100.0


@dataclass
class Case:
    name: str
    source: str  # DSL text
    scenario_text: str
    models: ModelSet
    scenario: Scenario


DELAYS = ["0.5", "1.0", "1.5", "2.0", "2.5", "3.0", "0.75", "INF"]  # INF last
VALUES = ["0.5", "1.0", "2.5", "4.0", "7.0", "9.5"]
TIMES = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 6.0, 7.5, 10.0, 12.5]


class _Atomic:
    def __init__(self, rng: random.Random, name: str, caps: Caps, n_in: int, n_out: int):
        self.rng = rng
        self.name = name
        self.inports = [f"i{k}" for k in range(n_in)]
        self.outports = [f"o{k}" for k in range(n_out)]
        self.finite = []
        for k in range(rng.randint(0, caps.finite_vars)):
            size = rng.randint(1, caps.values)
            self.finite.append((f"f{k}", [f"s{j}" for j in range(size)]))
        self.free = [(f"x{k}", rng.choice(["int", "real"])) for k in range(rng.randint(0, caps.free_vars))]
        self.caps = caps

    # -- pieces ----------------------------------------------------------------

    def pattern(self, full=False, wildcard=0.3):
        rng = self.rng
        if not self.finite:
            return "*"
        if not full and rng.random() < wildcard:
            return "*"
        chosen = self.finite if full else [v for v in self.finite if rng.random() < 0.6] or self.finite[:1]
        return ", ".join(f"{var}={rng.choice(dom)}" for var, dom in chosen)

    def ta_expr(self):
        rng = self.rng
        if self.free and rng.random() < 0.3:
            var, ty = rng.choice(self.free)
            if ty == "int":
                return f"if {var} > 1 then {var} + 0.5 else {rng.choice(DELAYS[:-1])}"
            return f"if {var} > 1.0 then {var} else {rng.choice(DELAYS[:-1])}"
        return "INF" if rng.random() < 0.1 else rng.choice(DELAYS[:-1])

    def ta(self):
        rng = self.rng
        if not self.finite or rng.random() < 0.3:
            return f"* -> {self.ta_expr()}"
        var, dom = rng.choice(self.finite)
        return " ; ".join(f"{var}={val} -> {self.ta_expr()}" for val in dom)

    def update(self, var, ty, external):
        rng = self.rng
        if ty == "int":
            return rng.choice([f"{var} + 1", f"{var} - 1", "0", f"{var} + 2"])
        options = [f"{var} + 1.0", f"{var} * 0.5", "1.5"]
        if external:
            options += ["v", f"{var} + v", "elapsed"]
        return rng.choice(options)

    def updates(self, external):
        ups = [f"{var} = {self.update(var, ty, external)}" for var, ty in self.free if self.rng.random() < 0.6]
        return f" with {{ {', '.join(ups)} }}" if ups else ""

    def ext_guard(self):
        rng = self.rng
        options = ["true", "true", "v > 2.0", "elapsed >= 1.0", "elapsed < 2.0 or v > 5.0"]
        for var, ty in self.free:
            options.append(f"{var} < 3" if ty == "int" else f"{var} <= 4.0")
        return rng.choice(options)

    def int_guard(self):
        options = ["true", "true"]
        for var, ty in self.free:
            options.append(f"{var} > 0" if ty == "int" else f"not ({var} > 6.0)")
        return self.rng.choice(options)

    def output(self):
        rng = self.rng
        if not self.outports or rng.random() < 0.1:
            return ""
        options = ["2.0", "1.0"] + [var if ty == "real" else f"{var} * 1.0" for var, ty in self.free]
        return f" output {rng.choice(self.outports)}({rng.choice(options)})"

    def text(self):
        rng = self.rng
        lines = [f"atomic {self.name} {{", f"  inports {{ {' '.join(self.inports)} }}",
                 f"  outports {{ {' '.join(self.outports)} }}"]
        for var, dom in self.finite:
            lines.append(f"  finite {var} in {{ {', '.join(dom)} }} = {dom[0]}")
        for var, ty in self.free:
            lines.append(f"  free {var} : {ty} = {'0' if ty == 'int' else '0.0'}")
        lines.append(f"  ta {{ {self.ta()} }}")
        n_ext = rng.randint(1, self.caps.rules - 1) if self.inports else 0
        n_int = rng.randint(min(1, self.caps.rules - n_ext), self.caps.rules - n_ext)
        for _ in range(n_ext):
            lines.append(f"  ext from {self.pattern()} on {rng.choice(self.inports)}(v) when {self.ext_guard()}"
                         f" -> {self.pattern(full=True)}{self.updates(True)}")
        for _ in range(n_int):
            lines.append(f"  int from {self.pattern(wildcard=0.5)} when {self.int_guard()} -> {self.pattern(full=True)}"
                         f"{self.updates(False)}{self.output()}")
        lines.append("}")
        return "\n".join(lines)

    def init_lines(self, path):
        out = []
        for var, dom in self.finite:
            if self.rng.random() < 0.5:
                out.append(f"init {path}.{var} = {self.rng.choice(dom)}")
        return out


def _coupled(rng, name, parts, caps):
    """``parts`` is a list of (ref, model name, inports, outports)."""
    lines = [f"coupled {name} {{", "  inports { in0 in1 }", "  outports { out0 }"]
    lines.append("  components { " + ", ".join(f"{ref}: {model}" for ref, model, _, _ in parts) + " }")
    couplings = []
    for port in ("in0", "in1"):
        for ref, _, ins, _ in parts:
            if ins and rng.random() < 0.6:
                couplings.append(f"{name}.{port} -> {ref}.{rng.choice(ins)}")
    if not any(c.startswith(f"{name}.") for c in couplings):
        ref, _, ins, _ = next(p for p in parts if p[2])
        couplings.append(f"{name}.in0 -> {ref}.{ins[0]}")
    for src, _, _, outs in parts:
        for dst, _, ins, _ in parts:
            if src != dst and outs and ins and rng.random() < 0.5:
                couplings.append(f"{src}.{rng.choice(outs)} -> {dst}.{rng.choice(ins)}")
    eoc = [f"{ref}.{o} -> {name}.out0" for ref, _, _, outs in parts for o in outs if rng.random() < 0.8]
    if not eoc:
        ref, _, _, outs = next(p for p in parts if p[3])
        eoc.append(f"{ref}.{outs[0]} -> {name}.out0")
    for c in dict.fromkeys(couplings + eoc):
        lines.append(f"  couple {c}")
    order = [ref for ref, _, _, _ in parts]
    rng.shuffle(order)
    lines.append(f"  select order {{ {', '.join(order)} }}")
    lines.append("}")
    return "\n".join(lines)


def generate_case(rng: random.Random, name: str, caps: Caps | None = None) -> Case:
    caps = caps or Caps()
    blocks, inits = [], []
    shape = rng.random()
    n_comp = 1 if shape < 0.2 else rng.randint(1, caps.components)
    nested = shape > 0.85 and caps.components >= 2

    atomics = []
    for k in range(n_comp):
        a = _Atomic(rng, f"{name}A{k}", caps, rng.randint(1, 2), rng.randint(1, 2))
        atomics.append(a)
        blocks.append(a.text())

    if shape < 0.2:
        a = atomics[0]
        root = a.name
        inports = a.inports
        inits += a.init_lines(root)
    else:
        root = f"{name}Top"
        parts = [(f"c{k}", a.name, a.inports, a.outports) for k, a in enumerate(atomics)]
        inner_paths = {}
        if nested and len(parts) >= 2:
            inner = f"{name}Sub"
            blocks.append(_coupled(rng, inner, parts[1:], caps))
            for ref, _, _, _ in parts[1:]:
                inner_paths[ref] = f"{root}.sub.{ref}"
            parts = [parts[0], ("sub", inner, ["in0", "in1"], ["out0"])]
        blocks.append(_coupled(rng, root, parts, caps))
        inports = ["in0", "in1"]
        for k, a in enumerate(atomics):
            path = inner_paths.get(f"c{k}", f"{root}.c{k}")
            inits += a.init_lines(path)

    source = "\n\n".join(blocks) + "\n"
    times = sorted(rng.choice(TIMES) + rng.choice([0.0, 0.25]) for _ in range(rng.randint(min(1, caps.injections), caps.injections)))
    horizon = rng.choice([h for h in (20.0, 50.0, 100.0) if h <= caps.horizon] or [caps.horizon])
    sc_lines = [f"root {root}"] + inits
    sc_lines += [f"at {t!r} inject {rng.choice(inports)} {rng.choice(VALUES)}" for t in times if t <= horizon]
    sc_lines.append(f"until {horizon!r}")
    scenario_text = "\n".join(sc_lines) + "\n"

    ms = parse_model_file(source)
    diags = validate_model(ms)
    assert not diags, f"generator produced an invalid model:\n{source}\n" + "\n".join(map(str, diags))
    sc = parse_scenario(scenario_text)
    return Case(name, source, scenario_text, ms, sc)


def generate_cases(seed: int, count: int, caps: Caps | None = None) -> list[Case]:
    """``count`` cases, fully determined by ``seed``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = random.Random(seed)
    return [generate_case(rng, f"F{seed}x{i}", caps) for i in range(count)]
