"""Command-line entry point.

Exit statuses: 0 success, 1 semantic failure (invalid model, failed
verification, scenario mismatch), 2 I/O or usage error, 3 state cap hit.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import emit
from .dsl import parse_model_file
from .errors import CosimulationError, Devs2UmlError, StateExplosion, XmiError
from .mapper import DEFAULT_CAP, map_atomic, map_model
from .model import AtomicModel, ModelSet, validate_model
from .scenario import parse_scenario, resolve_scenario

OK, FAIL, USAGE, CAP = 0, 1, 2, 3


class _Exit(Exception):
    def __init__(self, status, message=None):
        self.status = status
        self.message = message


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise _Exit(USAGE, f"cannot read {path}: {err.strerror or err}") from None


def _load(path, root=None) -> ModelSet:
    try:
        ms = parse_model_file(_read(path))
    except Devs2UmlError as err:
        raise _Exit(FAIL, f"{path}: {err}") from None
    if root is not None:
        if root not in ms.models:
            raise _Exit(FAIL, f"{path}: no model named {root!r}")
        ms.root = root
    return ms


def _check(ms: ModelSet, path) -> None:
    diags = validate_model(ms)
    for d in diags:
        print(f"{path}: {d}", file=sys.stderr)
    if diags:
        raise _Exit(FAIL)


def _warn(report, werror):
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if werror and report.warnings:
        raise _Exit(FAIL, "warnings treated as errors")


def _map(ms, cap):
    try:
        return map_model(ms, ms.root, cap)
    except StateExplosion as err:
        raise _Exit(CAP, str(err)) from None


def _write(outdir: Path, name: str, text: str, written: list):
    path = outdir / name
    path.write_text(text, encoding="utf-8", newline="\n")
    written.append(path)


def _artifacts(ms, cd, cap):
    """(file name, text) pairs for the mapped root, in a fixed order."""
    from .mapper import state_diagrams

    out = []
    for name, sd in state_diagrams(cd).items():
        _, record = map_atomic(ms[name], cap)
        out.append((f"{name}.state.xmi.xml", emit.to_xmi(sd)))
        out.append((f"{name}.state.puml", emit.to_plantuml_state(sd)))
        out.append((f"{name}.class.puml", emit.to_plantuml_class(record)))
    if not isinstance(ms[ms.root], AtomicModel):
        out.append((f"{ms.root}.component.xmi.xml", emit.to_xmi(cd)))
        out.append((f"{ms.root}.component.puml", emit.to_plantuml_component(cd)))
    return out


# -- commands -----------------------------------------------------------------


def cmd_validate(args) -> int:
    ms = _load(args.model, args.root)
    _check(ms, args.model)
    if args.werror:
        _, report = _map(ms, args.cap)
        _warn(report, True)
    return OK


def cmd_map(args) -> int:
    ms = _load(args.model, args.root)
    _check(ms, args.model)
    cd, report = _map(ms, args.cap)
    _warn(report, args.werror)
    outdir = Path(args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        written: list = []
        for name, text in _artifacts(ms, cd, args.cap):
            _write(outdir, name, text, written)
        _write(outdir, "mapping-report.txt", report.text(), written)
    except OSError as err:
        raise _Exit(USAGE, f"cannot write to {outdir}: {err}") from None
    for path in written:
        print(path)
    return OK


def cmd_render(args) -> int:
    ms = _load(args.model, args.root)
    _check(ms, args.model)
    cd, report = _map(ms, args.cap)
    _warn(report, args.werror)
    pieces = [(n, t) for n, t in _artifacts(ms, cd, args.cap) if n.endswith(".puml")]
    if args.out is None:
        sys.stdout.write("".join(t for _, t in pieces))
        return OK
    outdir = Path(args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        written: list = []
        for name, text in pieces:
            _write(outdir, name, text, written)
    except OSError as err:
        raise _Exit(USAGE, f"cannot write to {outdir}: {err}") from None
    for path in written:
        print(path)
    return OK


def _scenario(ms, path):
    try:
        return resolve_scenario(ms, parse_scenario(_read(path)))
    except Devs2UmlError as err:
        raise _Exit(FAIL, f"{path}: {err}") from None


def cmd_sim(args) -> int:
    from .devs_sim import run as run_devs
    from .uml_sim import run_uml

    ms = _load(args.model, args.root)
    _check(ms, args.model)
    sc = _scenario(ms, args.scenario)
    if ms.root != sc.root:
        ms.root = sc.root
    try:
        if args.engine == "devs":
            trace = run_devs(ms, sc)
        else:
            cd, _ = _map(ms, args.cap)
            trace = run_uml(cd, sc)
    except Devs2UmlError as err:
        raise _Exit(FAIL, str(err)) from None
    sys.stdout.write(trace.text())
    return OK


def _load_diagram(path):
    try:
        return emit.from_xmi(_read(path))
    except XmiError as err:
        raise _Exit(FAIL, f"{path}: {err}") from None


def _emit_reports(reports, records):
    for r in reports:
        sys.stdout.write(r.records() if records else r.text())
        if records:
            sys.stdout.write("\n")
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports) - failed}/{len(reports)} passed", file=sys.stderr)
    return OK if failed == 0 else FAIL


def cmd_verify(args) -> int:
    from .verify import cosimulate, fuzz_corpus

    if args.fuzz is not None:
        seed, count = args.fuzz
        if count < 1:
            raise _Exit(USAGE, "--fuzz COUNT must be at least 1")
        try:
            return _emit_reports(fuzz_corpus(seed, count), args.records)
        except Devs2UmlError as err:
            raise _Exit(FAIL, str(err)) from None
    if args.model is None or not args.scenarios:
        raise _Exit(USAGE, "verify needs MODEL SCENARIO... or --fuzz SEED COUNT")
    ms = _load(args.model, args.root)
    _check(ms, args.model)
    diagram = _load_diagram(args.diagram) if args.diagram else None
    reports = []
    for path in args.scenarios:
        sc = _scenario(ms, path)
        try:
            reports.append(cosimulate(ms, sc, diagram, name=f"{Path(path).name}", tol=args.tol, cap=args.cap))
        except StateExplosion as err:
            raise _Exit(CAP, str(err)) from None
        except CosimulationError as err:
            raise _Exit(FAIL, str(err)) from None
    return _emit_reports(reports, args.records)


# -- argument parsing ---------------------------------------------------------


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="devs2uml", description="Map DEVS models to UML diagrams and check the mapping.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=False):
        sp.add_argument("model", help="model file (.devs)")
        if scenario:
            sp.add_argument("scenario", help="scenario file (.scn)")
        sp.add_argument("--root", help="root model (default: last unreferenced model)")
        sp.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="maximum finite states per model")
        sp.add_argument("--werror", action="store_true", help="treat mapping warnings as errors")

    sp = sub.add_parser("validate", help="check a model file")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("map", help="write XMI, PlantUML and a mapping report")
    common(sp)
    sp.add_argument("--out", default=".", help="output directory")
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("render", help="PlantUML only")
    common(sp)
    sp.add_argument("--out", help="output directory (default: standard output)")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("sim", help="simulate a scenario and print the trace")
    common(sp, scenario=True)
    sp.add_argument("--engine", choices=("devs", "uml"), default="devs")
    sp.set_defaults(func=cmd_sim)

    sp = sub.add_parser("verify", help="co-simulate DEVS and UML and compare traces")
    sp.add_argument("model", nargs="?")
    sp.add_argument("scenarios", nargs="*")
    sp.add_argument("--root")
    sp.add_argument("--cap", type=_positive, default=DEFAULT_CAP)
    sp.add_argument("--werror", action="store_true")
    sp.add_argument("--fuzz", nargs=2, type=int, metavar=("SEED", "COUNT"))
    sp.add_argument("--diagram", help="verify against this component-diagram XMI instead of a fresh mapping")
    sp.add_argument("--tol", type=float, help="numeric tolerance (exploratory; default is exact)")
    sp.add_argument("--records", action="store_true", help="key: value output")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except _Exit as exc:
        if exc.message:
            print(f"devs2uml: {exc.message}", file=sys.stderr)
        return exc.status


if __name__ == "__main__":
    sys.exit(main())
