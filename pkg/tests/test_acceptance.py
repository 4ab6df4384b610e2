"""Acceptance criteria, one test each.  Every test records a single
``ACCEPTANCE <n> PASS|FAIL <summary>`` line, printed in the pytest summary
(also when this file is run directly)."""

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, load, model_files, scenario, scenario_files  # noqa: E402
from devs2uml import expr as X  # noqa: E402
from devs2uml.devs_sim import run as run_devs  # noqa: E402
from devs2uml.dsl import format_model_set, parse_model_file  # noqa: E402
from devs2uml.emit import from_xmi, to_xmi  # noqa: E402
from devs2uml.mapper import component_diagrams, map_atomic, map_model, parse_state_id, state_diagrams, state_id  # noqa: E402
from devs2uml.model import AtomicModel, CoupledModel, FiniteVar  # noqa: E402
from devs2uml.scenario import resolve_scenario  # noqa: E402
from devs2uml.uml import validate_component_diagram, validate_state_diagram  # noqa: E402
from devs2uml.uml_sim import run_uml  # noqa: E402
from devs2uml.verify import alter_timeout, cosimulate, drop_transition, fuzz_corpus, negate_guard  # noqa: E402

FUZZ_SEEDS = (1, 2, 3)


def _line(n, ok, summary):
    ACCEPTANCE_LINES.append(f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {summary}")


def _check(n, summary, ok, detail=""):
    _line(n, ok, summary + (f" ({detail})" if detail else ""))
    assert ok, detail or summary


# -- 1 ------------------------------------------------------------------------


def _features():
    """Required corpus members, each checked structurally."""
    def atomic(stem, name):
        return load(stem)[name]

    def has_self_loop(stem, name):
        sd, _ = map_atomic(atomic(stem, name))
        return any(t.source == t.target for t in sd.transitions)

    def ta_uses_free(stem, name):
        m = atomic(stem, name)
        free = {v.name for v in m.free}
        return any(X.variables(e.expr) & free for e in m.ta)

    def simultaneous(stem, sc):
        log = []
        run_devs(load(stem), scenario(sc), log)
        ext = {(r[1], r[2]) for r in log if r[0] == "ext"}
        ints = {(r[1], r[2]) for r in log if r[0] == "int"}
        # an instance preempted at the same instant another one fired
        return any(t == t2 and p != p2 for (t, p) in ints for (t2, p2) in ext)

    def nested(stem):
        ms = load(stem)
        root = ms.root_model()
        return isinstance(root, CoupledModel) and any(isinstance(ms[c.model], CoupledModel) for c in root.components)

    return {
        "Processor": lambda: isinstance(load("processor")["Processor"], AtomicModel),
        "Pipeline": lambda: load("pipeline").root == "Pipeline",
        "Processor-with-cancel": lambda: atomic("cancel", "ProcessorWithCancel").port("cancel") is not None,
        "traffic light m=n": lambda: not atomic("traffic", "TrafficLight").free,
        "m=0": lambda: not atomic("counter", "Counter").finite,
        "passive": lambda: all(X.is_inf_literal(e.expr) for e in atomic("sink", "Sink").ta),
        "nested coupled": lambda: nested("nested"),
        "loopback transition": lambda: has_self_loop("generator", "Generator"),
        "H-dependent ta": lambda: ta_uses_free("server", "Server"),
        "simultaneous imminents": lambda: simultaneous("race", "race-1"),
    }


def test_1_conformance_suite():
    missing = [name for name, check in _features().items() if not check()]
    models = model_files()
    per_model = {p.stem: scenario_files(p) for p in models}
    thin = [stem for stem, scns in per_model.items() if len(scns) < 3]
    start = time.perf_counter()
    failed, total = [], 0
    for p in models:
        ms = parse_model_file(p.read_text())
        for s in per_model[p.stem]:
            total += 1
            r = cosimulate(ms, scenario(s.stem), name=s.stem)
            if not r.passed or r.devs_trace != r.uml_trace:
                failed.append(s.stem)
    elapsed = time.perf_counter() - start
    ok = len(models) >= 12 and not thin and not missing and not failed and elapsed < 5.0
    detail = f"{len(models)} models, {total} scenarios, {total - len(failed)} pass, {elapsed:.2f}s"
    if missing:
        detail += f"; missing features: {missing}"
    if thin:
        detail += f"; fewer than 3 scenarios: {thin}"
    if failed:
        detail += f"; failed: {failed}"
    _check(1, "conformance suite byte-identical", ok, detail)


# -- 2 ------------------------------------------------------------------------


def test_2_fuzz_equivalence():
    start = time.perf_counter()
    reports = [r for seed in FUZZ_SEEDS for r in fuzz_corpus(seed, 100)]
    elapsed = time.perf_counter() - start
    passed = sum(r.passed for r in reports)
    ok = len(reports) == 300 and passed == 300 and elapsed < 60.0
    _check(2, "fuzz equivalence", ok, f"{passed}/{len(reports)} pass in {elapsed:.2f}s")


# -- 3 ------------------------------------------------------------------------


def test_3_stale_timeout():
    ms = load("cancel")
    sc = resolve_scenario(ms, scenario("cancel-1"))
    cd, _ = map_model(ms)
    log = []
    trace = run_uml(cd, sc, log)
    delivered = [r for r in log if r[0] == "deliver" and r[3].startswith("timeout_")]
    stale = [r for r in log if r[0] == "discard" and r[4] == "stale-ticket"]
    other = [r for r in log if r[0] == "discard" and r[4] != "stale-ticket"]
    ok = trace.text() == "" and len(delivered) == 1 and len(stale) == 1 and not other \
        and stale[0][1] == delivered[0][1] == 3.5
    _check(3, "stale timeout discarded", ok,
           f"trace={trace.text()!r}, timeouts delivered={len(delivered)}, stale discards={len(stale)}")


# -- 4 ------------------------------------------------------------------------


def _random_configuration(rng):
    words = ["a", "b", "x", "a_b", "b1", "x_1", "0", "1", "22", "s", "s_s"]
    variables = []
    for k in range(rng.randint(1, 4)):
        dom = rng.sample(words, rng.randint(1, 4))
        variables.append(FiniteVar(rng.choice(["v", "w", "p_q", "z"]) + str(k), tuple(dom)))
    return AtomicModel("M", (), tuple(variables))


def test_4_structural_invariants():
    problems = []
    for p in model_files():
        ms = parse_model_file(p.read_text())
        cd, _ = map_model(ms)
        for d in component_diagrams(cd):
            problems += [f"{p.stem}: {x}" for x in validate_component_diagram(d)]
        for name, sd in state_diagrams(cd).items():
            problems += [f"{p.stem}: {x}" for x in validate_state_diagram(sd)]
            ports = [q.name for q in ms[name].ports]
            events = [e.name for e in sd.events if e.kind == "port"]
            if ports != events or len(set(events)) != len(events):
                problems.append(f"{p.stem}: ports {ports} vs events {events}")
    rng = random.Random(20240)
    for _ in range(1000):
        m = _random_configuration(rng)
        combos = list(m.combinations())
        ids = [state_id(m, c) for c in combos]
        if len(set(ids)) != len(ids):
            problems.append(f"collision in {m.finite}")
        for c, sid in zip(combos, ids):
            if parse_state_id(sid) != {v.name: val for v, val in zip(m.finite, c)}:
                problems.append(f"cannot parse {sid}")
    _check(4, "structural invariants", not problems,
           f"{len(model_files())} models, 1000 configurations" + (f"; {problems[:3]}" if problems else ""))


# -- 5 ------------------------------------------------------------------------


def test_5_edge_cases():
    sd0, _ = map_atomic(load("counter")["Counter"])
    sdn, record = map_atomic(load("traffic")["TrafficLight"])
    ok = len(sd0.states) == 1 and record.attributes == () and sdn.variables == ()
    _check(5, "m=0 gives one state, m=n gives no pseudostate variables", ok,
           f"m=0 states={len(sd0.states)}, m=n class attributes={len(record.attributes)}")


# -- 6 ------------------------------------------------------------------------


def test_6_round_trips():
    bad = []
    for p in model_files():
        ms = parse_model_file(p.read_text())
        text = format_model_set(ms)
        again = parse_model_file(text)
        if format_model_set(again) != text or again.models != ms.models:
            bad.append(f"dsl {p.stem}")
        cd, _ = map_model(ms)
        for d in [*component_diagrams(cd), *state_diagrams(cd).values()]:
            if from_xmi(to_xmi(d)) != d:
                bad.append(f"xmi {p.stem}/{d.name}")
    _check(6, "XMI and DSL round trips", not bad, f"{len(model_files())} models" + (f"; {bad}" if bad else ""))


# -- 7 ------------------------------------------------------------------------


def _index(sd, source, trigger_prefix):
    return next(i for i, t in enumerate(sd.transitions) if t.source == source and t.trigger.startswith(trigger_prefix))


def test_7_mutation_sensitivity():
    # expected divergences are worked out by hand from the mutated models
    results = []

    ms = load("pipeline")
    cd, _ = map_model(ms)
    sd = state_diagrams(cd)["Processor"]
    sc = scenario("pipeline-2")
    r = cosimulate(ms, sc, negate_guard(cd, "Processor", _index(sd, "phase=idle", "in")))
    results.append(("negated guard", r, (0, 6.0, "6.000000000\tdone\t1", None)))
    r = cosimulate(ms, sc, alter_timeout(cd, "Processor", "phase=busy", 3.0))
    results.append(("altered ta", r, (0, 6.0, "6.000000000\tdone\t1", "7.000000000\tdone\t1")))

    ms = load("thermostat")
    cd, _ = map_model(ms)
    sd = state_diagrams(cd)["Thermostat"]
    r = cosimulate(ms, scenario("thermostat-1"),
                   drop_transition(cd, "Thermostat", _index(sd, "mode=cool__fault=ok", "timeout_")))
    results.append(("dropped transition", r, (1, 2.5, "2.500000000\tcommand\t-1", None)))

    wrong = []
    for label, r, (index, t, devs, uml) in results:
        d = r.divergence
        if r.passed or (d.index, d.time, d.devs, d.uml) != (index, t, devs, uml):
            wrong.append(f"{label}: {r.verdict} {d}")
    _check(7, "mutations detected at the expected divergence", not wrong,
           "; ".join(f"{label} -> index {r.divergence.index if r.divergence else '-'}" for label, r, _ in results)
           + (f"; wrong: {wrong}" if wrong else ""))


# -- 8 ------------------------------------------------------------------------


def test_8_elapsed_guard():
    ms = load("gate")
    cd, _ = map_model(ms)
    threshold = 2.0
    rows = []
    for name in ("gate-1", "gate-2", "gate-3"):
        sc = resolve_scenario(ms, scenario(name))
        t_key = sc.injections[0].time
        log = []
        run_uml(cd, sc, log)
        fired = any(r[0] == "fire" and r[5] == "key" for r in log)
        agree = cosimulate(ms, sc).passed
        # t_e is 0 because nothing happens before the key press
        rows.append((name, t_key - 0.0, fired, fired == (t_key - 0.0 >= threshold) and agree))
    ok = all(r[3] for r in rows) and {r[2] for r in rows} == {True, False}
    _check(8, "elapsed guard fires iff t_curr - t_e >= 2.0", ok,
           ", ".join(f"elapsed {e:g} -> {'fires' if f else 'blocked'}" for _, e, f, _ in rows))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
