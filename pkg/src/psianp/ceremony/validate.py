"""Static checks on a parsed ceremony, plus the variable-scoping plan the compiler follows.

Every event process is nested (hosted) inside the continuation of the latest
event whose variables it needs, so variables are shared by lexical scope.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field

from .diagnostics import Diagnostic, error, warning
from .model import CeremonySpec, EventDecl, SApp, STerm, term_applications, term_identifiers
from .parser import forest_diagnostics


@dataclass
class Scoping:
    order: tuple[str, ...] = ()
    binder: dict[str, str] = field(default_factory=dict)
    # input event -> the output dependency it synchronises with
    sync: dict[str, str] = field(default_factory=dict)
    host: dict[str, str | None] = field(default_factory=dict)


def validate(spec: CeremonySpec) -> list[Diagnostic]:
    """All diagnostics for ``spec``; no errors means it compiles."""
    return _Checker(spec).run()[1]


def analyze(spec: CeremonySpec) -> tuple[Scoping, list[Diagnostic]]:
    return _Checker(spec).run()


class _Checker:
    def __init__(self, spec: CeremonySpec) -> None:
        self.spec = spec
        self.diags: list[Diagnostic] = []

    def at(self, *key) -> tuple[int, int]:
        return self.spec.locations.get(tuple(key), (1, 1))

    def err(self, loc: tuple[int, int], code: str, message: str) -> None:
        self.diags.append(error(loc[0], loc[1], code, message))

    def warn(self, loc: tuple[int, int], code: str, message: str) -> None:
        self.diags.append(warning(loc[0], loc[1], code, message))

    def run(self) -> tuple[Scoping, list[Diagnostic]]:
        self.declarations()
        self.diags.extend(d for d in forest_diagnostics(self.spec) if d not in self.diags)
        self.rules()
        scoping = Scoping()
        order = self.event_order()
        if order is not None:
            scoping.order = order
            self.events(scoping)
        self.desired_run()
        return scoping, self.diags

    # declarations

    def declarations(self) -> None:
        spec = self.spec
        seen: dict[str, str] = {}

        def declare(kind: str, name: str) -> None:
            if name in seen:
                self.err(self.at(kind, name), "E001", f"{name} is already declared as {seen[name]}")
            else:
                seen[name] = kind

        for i in spec.identities:
            declare("identity", i)
        for c in spec.configurations:
            declare("configuration", c.name)
        for c in spec.channels:
            declare("channel", c.name)
        for c in spec.constructors:
            declare("constructor", c.name)
        for c in spec.constants:
            declare("constant", c.name)
        ids: set[str] = set()
        for e in spec.events:
            if e.id in ids:
                self.err(self.at("event", e.id), "E001", f"event {e.id} is declared twice")
            ids.add(e.id)

        configs = {c.name for c in spec.configurations}
        for c in spec.configurations:
            if c.controller is not None and c.controller not in spec.identities:
                self.err(self.at("controller", c.name), "E002", f"unknown identity {c.controller}")
            if c.parent is not None and c.parent not in configs:
                self.err(self.at("parent", c.name), "E003", f"unknown parent configuration {c.parent}")
        for ch in spec.channels:
            for end in (ch.source, ch.target):
                if end not in configs:
                    self.err(self.at("channel", ch.name), "E004", f"channel {ch.name} attaches to unknown configuration {end}")
        for k in spec.constants:
            if k.secret and not k.known_by:
                self.err(self.at("constant", k.name), "E015", f"secret {k.name} is known by nobody")
            for c in k.known_by:
                if c not in configs:
                    self.err(self.at("constant", k.name), "E015", f"secret {k.name} is known by unknown configuration {c}")

    def check_applications(self, t: STerm, loc: tuple[int, int]) -> None:
        arity = {c.name: c.arity for c in self.spec.constructors}
        for app in term_applications(t):
            if app.fn not in arity:
                self.err(loc, "E010", f"unknown constructor {app.fn}")
            elif arity[app.fn] != len(app.args):
                self.err(loc, "E010", f"{app.fn} takes {arity[app.fn]} argument(s), given {len(app.args)}")

    def rules(self) -> None:
        constants = {k.name for k in self.spec.constants}
        for i, r in enumerate(self.spec.rules):
            loc = self.at("rule", i)
            self.check_applications(r.lhs, loc)
            self.check_applications(r.rhs, loc)
            if not isinstance(r.lhs, SApp):
                self.err(loc, "E020", "a rewrite rule must start with a constructor application")
            bound = {n.id for n in term_identifiers(r.lhs) if n.binding}
            for n in term_identifiers(r.lhs):
                if not n.binding and n.id not in constants:
                    self.err(loc, "E020", f"{n.id} in a rule must be a ?variable or a declared constant")
            for n in term_identifiers(r.rhs):
                if n.binding:
                    self.err(loc, "E020", f"?{n.id} may only appear on the left of a rule")
                elif n.id not in bound and n.id not in constants:
                    self.err(loc, "E020", f"{n.id} on the right of a rule is not bound on the left")

    # events

    def event_order(self) -> tuple[str, ...] | None:
        spec = self.spec
        ids = {e.id for e in spec.events}
        graph: dict[str, set[str]] = {}
        for e in spec.events:
            graph.setdefault(e.id, set())
            for d in e.after:
                if d not in ids:
                    self.err(self.at("event", e.id), "E008", f"event {e.id} depends on unknown event {d}")
                elif d == e.id:
                    self.err(self.at("event", e.id), "E009", f"event {e.id} depends on itself")
                else:
                    graph[e.id].add(d)
        try:
            static = tuple(graphlib.TopologicalSorter(graph).static_order())
        except graphlib.CycleError as exc:
            cycle = exc.args[1]
            self.err(self.at("event", cycle[0]), "E009", "dependency cycle " + " -> ".join(reversed(cycle)))
            return None
        # Deterministic order: declaration order among ready events.
        index = {e.id: i for i, e in enumerate(spec.events)}
        ts = graphlib.TopologicalSorter(graph)
        ts.prepare()
        out: list[str] = []
        while ts.is_active():
            ready = sorted(ts.get_ready(), key=index.__getitem__)
            out.extend(ready)
            ts.done(*ready)
        assert set(out) == set(static)
        return tuple(out)

    def events(self, scoping: Scoping) -> None:
        spec = self.spec
        events = {e.id: e for e in spec.events}
        rank = {eid: i for i, eid in enumerate(scoping.order)}
        preds = _predecessors(spec)
        constants = {k.name: k for k in spec.constants}
        configs = {c.name for c in spec.configurations}
        declared = set(spec.identities) | configs | {c.name for c in spec.channels} | {c.name for c in spec.constructors}

        for e in spec.events:
            for v in e.bound_variables():
                loc = self.at("event", e.id)
                if v in constants or v in declared:
                    self.err(loc, "E013", f"variable {v} clashes with a declared name")
                elif v in scoping.binder:
                    self.err(loc, "E013", f"variable {v} is already bound by event {scoping.binder[v]}")
                else:
                    scoping.binder[v] = e.id

        outputs_on: dict[str, list[str]] = {}
        for e in spec.events:
            if e.kind == "out" and e.channel is not None:
                outputs_on.setdefault(e.channel, []).append(e.id)

        needs: dict[str, set[str]] = {}
        for e in spec.events:
            loc = self.at("event", e.id)
            if e.config not in configs:
                self.err(loc, "E005", f"event {e.id} happens at unknown configuration {e.config}")
            self.channel_attachment(e, loc)
            for t in (e.term, e.rhs):
                if t is not None:
                    self.check_applications(t, loc)
            if e.kind != "in":
                for t in e.used_terms():
                    if any(n.binding for n in term_identifiers(t)):
                        self.err(loc, "E019", "?variables may only appear in input patterns")
            else:
                names = [n.id for n in term_identifiers(e.term) if n.binding]
                if len(names) != len(set(names)):
                    self.err(loc, "E019", "a pattern binds the same variable twice")

            need: set[str] = set()
            for n in _used_identifiers(e):
                if n in scoping.binder:
                    b = scoping.binder[n]
                    if b == e.id:
                        continue
                    if b not in preds[e.id]:
                        self.err(loc, "E012", f"variable {n} is bound by {b}, which {e.id} does not depend on")
                        continue
                    if e.config in configs and events[b].config in configs and not spec.related(events[b].config, e.config):
                        self.err(loc, "E014", f"variable {n} of {events[b].config} is not shared with {e.config}")
                    need.add(b)
                elif n in constants:
                    k = constants[n]
                    if k.secret and e.config in configs and not any(
                        c in configs and spec.related(c, e.config) for c in k.known_by
                    ):
                        self.err(loc, "E016", f"{e.config} does not know secret {n}")
                else:
                    self.err(loc, "E012", f"unknown name {n} in event {e.id}")

            sync = [d for d in e.after if d in events and _synchronises(events[d], e)]
            if len(sync) > 1:
                self.err(loc, "E017", f"input {e.id} depends on several outputs on its channel: {', '.join(sync)}")
            elif sync:
                scoping.sync[e.id] = sync[0]
            elif e.kind == "in" and outputs_on.get(e.channel):
                self.warn(loc, "W001", f"input {e.id} names no output on {e.channel}; it only receives undeclared ones")
            for d in e.after:
                if d not in events or d in sync:
                    continue
                dep = events[d]
                if dep.bound_variables():
                    need.add(d)
                for n in _record_identifiers(dep):
                    if n in scoping.binder and scoping.binder[n] != d:
                        need.add(scoping.binder[n])
            needs[e.id] = need

        for e in spec.events:
            if e.kind == "out" and e.channel is not None and not any(
                x.kind == "in" and x.channel == e.channel for x in spec.events
            ):
                self.warn(self.at("event", e.id), "W002", f"output {e.id} on {e.channel} has no matching input")

        if any(d.severity.value == "error" for d in self.diags):
            return
        # Fresh values are restricted at top level and computed values are
        # expanded in place, so only input-bound variables need a host.
        scopes: dict[str, set[str]] = {}

        def scope_of(b: str) -> set[str]:
            if b not in scopes:
                ev = events[b]
                if ev.kind == "in":
                    scopes[b] = {b}
                elif ev.kind == "compute":
                    used = [n.id for n in term_identifiers(ev.term) if n.id in scoping.binder]
                    scopes[b] = set().union(*(scope_of(scoping.binder[n]) for n in used))
                else:
                    scopes[b] = set()
            return scopes[b]

        needs = {e: set().union(*(scope_of(b) for b in need)) for e, need in needs.items()}
        anc = _host_closure(needs, rank)
        for eid in scoping.order:
            scoping.host[eid] = max(anc[eid], key=rank.__getitem__) if anc[eid] else None
        for e_id, d_id in scoping.sync.items():
            if d_id in anc[e_id] or e_id in anc[d_id]:
                self.err(
                    self.at("event", e_id),
                    "E018",
                    f"{e_id} and {d_id} must synchronise but one is only enabled after the other",
                )

    def channel_attachment(self, e: EventDecl, loc: tuple[int, int]) -> None:
        if e.kind not in ("out", "in"):
            return
        ch = self.spec.channel(e.channel)
        if ch is None:
            self.err(self.at("event-channel", e.id), "E006", f"unknown channel {e.channel}")
            return
        end = ch.source if e.kind == "out" else ch.target
        if end != e.config:
            role = "send on" if e.kind == "out" else "receive from"
            self.err(self.at("event-channel", e.id), "E007", f"{e.config} cannot {role} {e.channel} ({ch.source} -> {ch.target})")

    def desired_run(self) -> None:
        ids = {e.id for e in self.spec.events}
        for a, b in self.spec.desired_run:
            for x in (a, b):
                if x not in ids:
                    self.err(self.at("run", (a, b)), "E021", f"desired run mentions unknown event {x}")


def _synchronises(dep: EventDecl, e: EventDecl) -> bool:
    return e.kind == "in" and dep.kind == "out" and dep.channel == e.channel


def _used_identifiers(e: EventDecl) -> list[str]:
    names = [n.id for t in e.used_terms() for n in term_identifiers(t)]
    if e.kind == "in" and e.term is not None:
        names += [n.id for n in term_identifiers(e.term) if not n.binding]
    return names


def _record_identifiers(e: EventDecl) -> list[str]:
    """Identifiers in the payload recorded for ``e``."""
    if e.kind in ("fresh", "compute"):
        return [e.variable] if e.variable else []
    if e.term is None:
        return []
    return [n.id for n in term_identifiers(e.term)]


def _predecessors(spec: CeremonySpec) -> dict[str, set[str]]:
    direct = {e.id: set(e.after) for e in spec.events}
    out: dict[str, set[str]] = {}

    def visit(x: str, trail: frozenset) -> set[str]:
        if x in out:
            return out[x]
        acc: set[str] = set()
        for d in direct.get(x, ()):
            if d in trail:
                continue
            acc.add(d)
            acc |= visit(d, trail | {x})
        out[x] = acc
        return acc

    for e in spec.events:
        visit(e.id, frozenset())
    return out


def _host_closure(needs: dict[str, set[str]], rank: dict[str, int]) -> dict[str, set[str]]:
    """Close the hosting requirements so that every event sits on one nesting chain."""
    anc = {k: set(v) for k, v in needs.items()}
    changed = True
    while changed:
        changed = False
        for e in sorted(anc, key=rank.__getitem__):
            chain = sorted(anc[e], key=rank.__getitem__)
            extra = set().union(*(anc[b] for b in chain)) - anc[e] if chain else set()
            if extra:
                anc[e] |= extra
                changed = True
            for lo, hi in zip(chain, chain[1:]):
                if lo not in anc[hi]:
                    anc[hi].add(lo)
                    changed = True
    return anc
