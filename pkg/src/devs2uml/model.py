"""DEVS atomic and coupled models in rule-table form, plus static validation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Union

from . import expr as X
from .errors import ExprTypeError, ModelError

RESERVED = frozenset({"elapsed", "ticket_ok"})

Loc = tuple


@dataclass(frozen=True)
class PortDecl:
    name: str
    direction: str  # "in" | "out"
    type: str = "real"
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FiniteVar:
    name: str
    domain: tuple[str, ...]
    default: str | None = None
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FreeVar:
    name: str
    type: str
    default: X.Lit | None = None
    loc: Loc | None = field(default=None, compare=False, repr=False)


# A pattern is a tuple of (variable, value) pairs; the empty tuple is ``*``.
Pattern = tuple


@dataclass(frozen=True)
class TaEntry:
    pattern: Pattern
    expr: X.Expr
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ExternalRule:
    source: Pattern
    port: str
    binder: str
    guard: X.Expr
    target: Pattern
    updates: tuple[tuple[str, X.Expr], ...] = ()
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class InternalRule:
    source: Pattern
    guard: X.Expr
    target: Pattern
    updates: tuple[tuple[str, X.Expr], ...] = ()
    output: tuple[str, X.Expr] | None = None
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AtomicModel:
    name: str
    ports: tuple[PortDecl, ...] = ()
    finite: tuple[FiniteVar, ...] = ()
    free: tuple[FreeVar, ...] = ()
    ta: tuple[TaEntry, ...] = ()
    external: tuple[ExternalRule, ...] = ()
    internal: tuple[InternalRule, ...] = ()
    loc: Loc | None = field(default=None, compare=False, repr=False)

    @property
    def inports(self) -> list[PortDecl]:
        return [p for p in self.ports if p.direction == "in"]

    @property
    def outports(self) -> list[PortDecl]:
        return [p for p in self.ports if p.direction == "out"]

    def port(self, name: str) -> PortDecl | None:
        return next((p for p in self.ports if p.name == name), None)

    @property
    def free_env(self) -> dict[str, str]:
        return {v.name: v.type for v in self.free}

    def combinations(self) -> Iterator[tuple[str, ...]]:
        """Every finite-state combination, lexicographic in domain order."""
        return itertools.product(*(v.domain for v in self.finite))

    def key(self, pattern: Pattern) -> tuple[str, ...]:
        """Combination tuple for a full pattern."""
        d = dict(pattern)
        return tuple(d[v.name] for v in self.finite)

    def matches(self, pattern: Pattern, combo: tuple[str, ...]) -> bool:
        index = {v.name: i for i, v in enumerate(self.finite)}
        return all(combo[index[var]] == val for var, val in pattern)


@dataclass(frozen=True)
class ComponentRef:
    name: str
    model: str
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Endpoint:
    owner: str  # the coupled model's own name or a component reference
    port: str


@dataclass(frozen=True)
class Coupling:
    source: Endpoint
    target: Endpoint
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class CoupledModel:
    name: str
    ports: tuple[PortDecl, ...] = ()
    components: tuple[ComponentRef, ...] = ()
    couplings: tuple[Coupling, ...] = ()
    select: tuple[str, ...] | None = None
    loc: Loc | None = field(default=None, compare=False, repr=False)

    @property
    def inports(self) -> list[PortDecl]:
        return [p for p in self.ports if p.direction == "in"]

    @property
    def outports(self) -> list[PortDecl]:
        return [p for p in self.ports if p.direction == "out"]

    def port(self, name: str) -> PortDecl | None:
        return next((p for p in self.ports if p.name == name), None)

    @property
    def select_order(self) -> tuple[str, ...]:
        """Component priority, highest first; declaration order by default."""
        if self.select is not None:
            return self.select
        return tuple(c.name for c in self.components)

    def component(self, name: str) -> ComponentRef | None:
        return next((c for c in self.components if c.name == name), None)

    def coupling_kind(self, c: Coupling) -> str:
        """``EIC``, ``EOC``, ``IC`` or ``BAD`` depending on the endpoints."""
        s_self = c.source.owner == self.name
        t_self = c.target.owner == self.name
        if s_self and not t_self:
            return "EIC"
        if t_self and not s_self:
            return "EOC"
        if not s_self and not t_self:
            return "IC"
        return "BAD"


Model = Union[AtomicModel, CoupledModel]


@dataclass
class ModelSet:
    models: dict[str, Model] = field(default_factory=dict)
    root: str | None = None

    def __getitem__(self, name: str) -> Model:
        return self.models[name]

    def __contains__(self, name: str) -> bool:
        return name in self.models

    def root_model(self) -> Model:
        if self.root is None or self.root not in self.models:
            raise ModelError("no root model")
        return self.models[self.root]


# -- diagnostics ------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Diagnostic:
    model: str
    loc: tuple = ()
    kind: str = ""
    message: str = ""
    rule: str | None = None

    def __str__(self):
        where = self.model
        if self.loc:
            where += f":{self.loc[0]}:{self.loc[1]}"
        rule = f" [{self.rule}]" if self.rule else ""
        return f"{where}: {self.kind}: {self.message}{rule}"


def _sort_key(d: Diagnostic):
    return (d.model, d.loc or (0, 0), d.kind, d.message)


def state_word_ok(word: str) -> bool:
    """Finite variable names and values are joined into state ids with
    ``=`` and ``__``; these restrictions keep the join reversible."""
    return "__" not in word and not word.startswith("_") and not word.endswith("_")


def total_state_type(m: AtomicModel) -> tuple[int, dict[str, str]]:
    """Number of finite-state combinations and the free-variable environment."""
    count = 1
    for v in m.finite:
        count *= len(v.domain)
    return count, m.free_env


class _Checker:
    def __init__(self, model_name):
        self.model = model_name
        self.out: list[Diagnostic] = []

    def add(self, kind, message, loc=None, rule=None):
        self.out.append(Diagnostic(self.model, tuple(loc or ()), kind, message, rule))

    def expr(self, e, env, want, what, loc, rule, allow_inf=False):
        if not allow_inf and X.contains_inf(e):
            self.add("InfOutsideTa", f"INF is only allowed in time advances ({what})", loc, rule)
        try:
            t = X.typecheck(e, env)
        except ExprTypeError as err:
            kind = "UnknownVariable" if str(err).startswith("unknown variable") else "TypeMismatch"
            self.add(kind, f"{what}: {err}", (err.expr.loc if err.expr is not None and err.expr.loc else loc), rule)
            return
        if want == "numeric":
            if t not in ("int", "real"):
                self.add("TypeMismatch", f"{what} must be numeric, got {t}", loc, rule)
        elif not X.assignable(t, want):
            self.add("TypeMismatch", f"{what} must be {want}, got {t}", loc, rule)


def _check_ports(ck: _Checker, ports):
    seen = set()
    for p in ports:
        if p.name in seen:
            ck.add("DuplicatePort", f'port "{p.name}" declared more than once', p.loc)
        seen.add(p.name)
        if p.type not in X.TYPES:
            ck.add("UnknownType", f'port "{p.name}" has unknown type {p.type}', p.loc)


def _check_pattern(ck, m, pattern, full, what, loc, rule):
    domains = {v.name: v.domain for v in m.finite}
    seen = set()
    for var, val in pattern:
        if var not in domains:
            ck.add("UnknownVariable", f'{what} names unknown finite variable "{var}"', loc, rule)
        elif val not in domains[var]:
            ck.add("UnknownValue", f'{what}: "{val}" is not in the domain of {var}', loc, rule)
        if var in seen:
            ck.add("DuplicateAssignment", f'{what} assigns "{var}" twice', loc, rule)
        seen.add(var)
    if full:
        missing = [v.name for v in m.finite if v.name not in seen]
        if missing:
            ck.add("PartialTarget", f"{what} leaves {', '.join(missing)} unassigned", loc, rule)


def _check_updates(ck, m, updates, env, loc, rule):
    free = m.free_env
    seen = set()
    for var, e in updates:
        if var not in free:
            ck.add("UnknownVariable", f'update assigns unknown free variable "{var}"', loc, rule)
            continue
        if var in seen:
            ck.add("DuplicateAssignment", f'update assigns "{var}" twice', loc, rule)
        seen.add(var)
        ck.expr(e, env, free[var], f"update of {var}", loc, rule)


def _validate_atomic(m: AtomicModel) -> list[Diagnostic]:
    ck = _Checker(m.name)
    _check_ports(ck, m.ports)

    names = set()
    for v in list(m.finite) + list(m.free):
        if v.name in names:
            ck.add("DuplicateVariable", f'state variable "{v.name}" declared more than once', v.loc)
        names.add(v.name)
        if v.name in RESERVED:
            ck.add("ReservedName", f'"{v.name}" is reserved', v.loc)
    for v in m.finite:
        if not v.domain:
            ck.add("EmptyDomain", f'finite variable "{v.name}" has an empty domain', v.loc)
        if len(set(v.domain)) != len(v.domain):
            ck.add("DuplicateValue", f'finite variable "{v.name}" repeats a domain value', v.loc)
        for word in (v.name,) + tuple(v.domain):
            if not state_word_ok(word):
                ck.add("BadStateName", f'"{word}" cannot appear in a state id '
                       "(no double underscore, no leading or trailing underscore)", v.loc)
        if v.default is not None and v.default not in v.domain:
            ck.add("UnknownValue", f'default "{v.default}" is not in the domain of {v.name}', v.loc)
    for v in m.free:
        if v.type not in X.TYPES:
            ck.add("UnknownType", f'free variable "{v.name}" has unknown type {v.type}', v.loc)
        elif v.default is not None and not X.assignable(v.default.kind, v.type):
            ck.add("TypeMismatch", f'default of {v.name} must be {v.type}, got {v.default.kind}', v.loc)
        if v.default is not None and X.contains_inf(v.default):
            ck.add("InfOutsideTa", f"INF is only allowed in time advances (default of {v.name})", v.loc)

    free_env = m.free_env

    # time advance table: exactly one entry per combination
    for i, entry in enumerate(m.ta, 1):
        rule = f"ta#{i}"
        _check_pattern(ck, m, entry.pattern, False, "ta pattern", entry.loc, rule)
        ck.expr(entry.expr, free_env, "numeric", "time advance", entry.loc, rule, allow_inf=True)
    pattern_ok = not any(d.kind in ("UnknownVariable", "UnknownValue", "EmptyDomain") for d in ck.out)
    if pattern_ok:
        for combo in m.combinations():
            hits = [i for i, entry in enumerate(m.ta, 1) if m.matches(entry.pattern, combo)]
            state = "__".join(f"{v.name}={c}" for v, c in zip(m.finite, combo)) or "UNIT"
            if not hits:
                ck.add("TaGap", f"no time advance for {state}", m.loc)
            elif len(hits) > 1:
                ck.add("TaOverlap", f"{state} matched by ta entries {', '.join(map(str, hits))}",
                       m.ta[hits[1] - 1].loc, f"ta#{hits[1]}")

    for i, r in enumerate(m.external, 1):
        rule = f"ext#{i}"
        _check_pattern(ck, m, r.source, False, "source pattern", r.loc, rule)
        _check_pattern(ck, m, r.target, True, "target", r.loc, rule)
        port = m.port(r.port)
        if port is None:
            ck.add("UnknownPort", f'unknown port "{r.port}"', r.loc, rule)
        elif port.direction != "in":
            ck.add("PortDirection", f'external rule listens on output port "{r.port}"', r.loc, rule)
        if r.binder in RESERVED:
            ck.add("ReservedName", f'binder "{r.binder}" is reserved', r.loc, rule)
        elif r.binder in free_env:
            ck.add("ShadowedName", f'binder "{r.binder}" shadows a free variable', r.loc, rule)
        env = dict(free_env)
        env[r.binder] = port.type if port is not None else "real"
        env["elapsed"] = "real"
        ck.expr(r.guard, env, "bool", "guard", r.loc, rule)
        _check_updates(ck, m, r.updates, env, r.loc, rule)

    for i, r in enumerate(m.internal, 1):
        rule = f"int#{i}"
        _check_pattern(ck, m, r.source, False, "source pattern", r.loc, rule)
        _check_pattern(ck, m, r.target, True, "target", r.loc, rule)
        ck.expr(r.guard, free_env, "bool", "guard", r.loc, rule)
        _check_updates(ck, m, r.updates, free_env, r.loc, rule)
        if r.output is not None:
            pname, value = r.output
            port = m.port(pname)
            if port is None:
                ck.add("UnknownPort", f'unknown port "{pname}"', r.loc, rule)
            elif port.direction != "out":
                ck.add("PortDirection", f'output on input port "{pname}"', r.loc, rule)
            ck.expr(value, free_env, port.type if port is not None else "numeric", "output value", r.loc, rule)
    return ck.out


def _validate_coupled(c: CoupledModel, ms: ModelSet) -> list[Diagnostic]:
    ck = _Checker(c.name)
    _check_ports(ck, c.ports)
    refs = set()
    for comp in c.components:
        if comp.name in refs:
            ck.add("DuplicateComponent", f'component "{comp.name}" declared more than once', comp.loc)
        refs.add(comp.name)
        if comp.name == c.name:
            ck.add("AmbiguousComponent", f'component "{comp.name}" shares the coupled model name', comp.loc)
        if comp.model not in ms.models:
            ck.add("UnresolvedComponent", f'component "{comp.name}" refers to unknown model "{comp.model}"', comp.loc)

    if c.select is not None and sorted(c.select) != sorted(refs):
        ck.add("BadSelectOrder", "select order must list every component exactly once", c.loc)

    def lookup(ep: Endpoint, want: str, loc):
        if ep.owner == c.name:
            port = c.port(ep.port)
            # a coupled model's own input is a source, its output a sink
            want_dir = "in" if want == "source" else "out"
            owner_desc = c.name
        else:
            comp = c.component(ep.owner)
            if comp is None:
                ck.add("UnknownComponent", f'unknown component "{ep.owner}"', loc)
                return None
            if comp.model not in ms.models:
                return None
            port = ms.models[comp.model].port(ep.port)
            want_dir = "out" if want == "source" else "in"
            owner_desc = ep.owner
        if port is None:
            ck.add("UnknownPort", f'unknown port "{owner_desc}.{ep.port}"', loc)
            return None
        if port.direction != want_dir:
            ck.add("PortDirection", f'"{owner_desc}.{ep.port}" cannot be a coupling {want}', loc)
            return None
        return port

    seen = set()
    for cp in c.couplings:
        if (cp.source, cp.target) in seen:
            ck.add("DuplicateCoupling", f"{cp.source.owner}.{cp.source.port} -> {cp.target.owner}.{cp.target.port} repeated", cp.loc)
        seen.add((cp.source, cp.target))
        kind = c.coupling_kind(cp)
        if kind == "BAD":
            ck.add("BadCoupling", "a coupling must involve at least one component", cp.loc)
            continue
        if kind == "IC" and cp.source.owner == cp.target.owner:
            ck.add("Feedback", f"component {cp.source.owner} is coupled to itself", cp.loc)
        src = lookup(cp.source, "source", cp.loc)
        dst = lookup(cp.target, "target", cp.loc)
        if src is not None and dst is not None and src.type != dst.type:
            ck.add("PortTypeMismatch", f"{src.type} port coupled to {dst.type} port", cp.loc)
    return ck.out


def validate_model(ms: ModelSet) -> list[Diagnostic]:
    """Check every structural invariant; the result is empty iff ``ms`` is valid.

    Diagnostics are sorted by model name, then source location.
    """
    out: list[Diagnostic] = []
    if ms.root is None or ms.root not in ms.models:
        out.append(Diagnostic("<file>", (), "NoRoot", "no root model"))
    for m in ms.models.values():
        if isinstance(m, AtomicModel):
            out.extend(_validate_atomic(m))
        else:
            out.extend(_validate_coupled(m, ms))

    # containment must be acyclic
    state: dict[str, int] = {}

    def visit(name, stack):
        state[name] = 1
        m = ms.models[name]
        if isinstance(m, CoupledModel):
            for comp in m.components:
                if comp.model not in ms.models:
                    continue
                if state.get(comp.model) == 1:
                    cycle = " -> ".join(stack + [comp.model])
                    out.append(Diagnostic(name, tuple(comp.loc or ()), "ContainmentCycle", cycle))
                elif comp.model not in state:
                    visit(comp.model, stack + [comp.model])
        state[name] = 2

    for name in ms.models:
        if name not in state:
            visit(name, [name])
    return sorted(out, key=_sort_key)


def is_literal_false(e: X.Expr) -> bool:
    return isinstance(e, X.Lit) and e.kind == "bool" and e.value is False
