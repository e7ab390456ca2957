"""Ceremony to psi process.

Each event becomes ``case {deps done : prefix . (trailing assertion | hosted events)}``.
Local actions (fresh, compute, test) talk to themselves over a restricted
``loc`` channel so that they show up as steps and get recorded like any other
action. An output and the input that depends on it meet on a private subject
of their own, so the input cannot take another output's message; records
still name the declared channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ..anp import (
    ActionRecord,
    AnpAssertion,
    ChannelTerm,
    ConfigPath,
    Conj,
    Done,
    Polarity,
    RewriteRule,
    make_anp_instance,
)
from ..nominal import Fn, Name, Sort, fresh_name
from ..psi import AssertionProc, Case, Input, InstanceSignature, Nil, Output, Process, TermEq, nu, par
from .diagnostics import ParseError, Severity
from .model import CeremonySpec, EventDecl, SName, STerm, term_identifiers
from .validate import Scoping, analyze

_POLARITY = {"out": Polarity.OUTPUT, "in": Polarity.INPUT}


class CompileError(ParseError):
    """The spec does not validate; carries the error diagnostics."""


@dataclass
class CompiledCeremony:
    spec: CeremonySpec
    process: Process
    signature: InstanceSignature
    event_ids: tuple[str, ...]
    records: dict[str, ActionRecord]
    names: dict[str, Name]
    scoping: Scoping
    secrets: tuple[Name, ...] = ()
    channel_kinds: dict[Name, str] = field(default_factory=dict)


def compile_ceremony(spec: CeremonySpec) -> CompiledCeremony:
    scoping, diags = analyze(spec)
    errors = [d for d in diags if d.severity is Severity.ERROR]
    if errors:
        raise CompileError(errors)
    return _Compiler(spec, scoping).build()


def compile_process(spec: CeremonySpec) -> Process:
    return compile_ceremony(spec).process


class _Compiler:
    def __init__(self, spec: CeremonySpec, scoping: Scoping) -> None:
        self.spec = spec
        self.scoping = scoping
        self.names: dict[str, Name] = {}
        for i in spec.identities:
            self.names[i] = fresh_name(Sort.IDENTITY, hint=i)
        for c in spec.configurations:
            self.names[c.name] = fresh_name(Sort.CONFIGURATION, hint=c.name)
        for c in spec.channels:
            self.names[c.name] = fresh_name(Sort.CHANNEL, hint=c.name)
        for k in spec.constants:
            self.names[k.name] = fresh_name(Sort.MESSAGE, hint=k.name)
        # Fresh values are names restricted at top level; computed values are
        # macros for their defining term. Only input variables are bound.
        self.fresh: list[Name] = []
        self.defs: dict[str, STerm] = {}
        for e in spec.events:
            if e.kind == "fresh":
                self.names[e.variable] = fresh_name(Sort.MESSAGE, hint="fr")
                self.fresh.append(self.names[e.variable])
            elif e.kind == "compute":
                self.defs[e.variable] = e.term
            else:
                for v in e.bound_variables():
                    self.names[v] = fresh_name(Sort.VARIABLE, hint=v)
        # Records of local actions name this free channel; the real handshake is on a restricted copy.
        self.loc = fresh_name(Sort.CHANNEL, hint="loc")
        self.events = {e.id: e for e in spec.events}
        self.subjects: dict[str, Name] = {}
        for d in dict.fromkeys(scoping.sync.values()):
            out = self.events[d]
            self.subjects[d] = fresh_name(Sort.CHANNEL, hint=f"{out.channel}_{d}")
        self.records = {e.id: self.record(e) for e in spec.events}

    def term(self, t: STerm) -> Any:
        if isinstance(t, SName):
            if t.id in self.defs:
                return self.term(self.defs[t.id])
            return self.names[t.id]
        return Fn(t.fn, tuple(self.term(a) for a in t.args))

    def path(self, config: str) -> ConfigPath:
        decl = self.spec.config(config)
        controller = self.names[decl.controller] if decl and decl.controller else None
        return ConfigPath(controller, tuple(self.names[c] for c in self.spec.ancestors(config)))

    def channel(self, e: EventDecl) -> ChannelTerm:
        if e.kind in _POLARITY:
            return ChannelTerm(self.path(self.spec.channel(e.channel).source), self.names[e.channel])
        return ChannelTerm(self.path(e.config), self.loc)

    def record(self, e: EventDecl) -> ActionRecord:
        if e.kind in _POLARITY:
            return ActionRecord(e.id, _POLARITY[e.kind], self.channel(e), self.term(e.term))
        payload = self.term(SName(e.variable)) if e.kind in ("fresh", "compute") else self.term(e.term)
        return ActionRecord(e.id, Polarity.INTERNAL, self.channel(e), payload)

    def dep_record(self, e: EventDecl, d: str) -> ActionRecord:
        rec = self.records[d]
        if self.scoping.sync.get(e.id) == d:
            # Realised by the communication itself; the output carried exactly our pattern.
            return ActionRecord(d, rec.polarity, rec.channel, self.term(e.term))
        return rec

    def event(self, e: EventDecl) -> Process:
        own = self.records[e.id]
        deps = [self.dep_record(e, d) for d in e.after]
        trailing = AnpAssertion.of([own], [(r, own) for r in deps])
        children = [self.event(x) for x in self.hosted(e.id)]
        k = par(AssertionProc(trailing), *children)
        chan = self.channel(e)
        partner = e.id if e.id in self.subjects else self.scoping.sync.get(e.id)
        subject = ChannelTerm(chan.at, self.subjects[partner]) if partner else chan
        if e.kind == "out":
            body: Process = Output(subject, own.payload, k)
        elif e.kind == "in":
            variables = tuple(self.names[n.id] for n in term_identifiers(e.term) if n.binding)
            body = Input(subject, variables, own.payload, k)
        else:
            loc = fresh_name(Sort.CHANNEL, hint="loc")
            here = ChannelTerm(chan.at, loc)
            x = fresh_name(Sort.VARIABLE, hint="z")
            sender: Process = Output(here, own.payload, Nil())
            body = nu([loc], par(sender, Input(here, (x,), x, k)))
        conds: list[Any] = []
        waits = [self.records[d] for d in e.after if self.scoping.sync.get(e.id) != d]
        if waits:
            conds.append(Done(frozenset(waits)))
        if e.kind == "test":
            conds.append(TermEq(self.term(e.term), self.term(e.rhs)))
        if not conds:
            return body
        return Case(((Conj.of(*conds), body),))

    def hosted(self, host: str | None) -> list[EventDecl]:
        return [self.events[x] for x in self.scoping.order if self.scoping.host.get(x) == host]

    def build(self) -> CompiledCeremony:
        spec = self.spec
        secrets = tuple(self.names[k.name] for k in spec.constants if k.secret)
        channels = tuple(self.names[c.name] for c in spec.channels)
        body = par(*(self.event(e) for e in self.hosted(None)))
        process = nu(channels + tuple(self.subjects.values()) + secrets + tuple(self.fresh), body)
        equations = [self.rule(r.lhs, r.rhs) for r in spec.rules]
        probes = [
            TermEq(self.term(e.term), self.term(e.rhs))
            for e in spec.events
            if e.kind == "test"
        ]
        signature = make_anp_instance(self.records.values(), equations, probes)
        return CompiledCeremony(
            spec=spec,
            process=process,
            signature=signature,
            event_ids=tuple(e.id for e in spec.events),
            records=dict(self.records),
            names=dict(self.names),
            scoping=self.scoping,
            secrets=secrets,
            channel_kinds={self.names[c.name]: c.kind for c in spec.channels},
        )

    def rule(self, lhs: STerm, rhs: STerm) -> RewriteRule:
        local = {n.id: fresh_name(Sort.VARIABLE, hint=n.id) for n in term_identifiers(lhs) if n.binding}

        def conv(t: STerm) -> Any:
            if isinstance(t, SName):
                return local.get(t.id) or self.names[t.id]
            return Fn(t.fn, tuple(conv(a) for a in t.args))

        return RewriteRule(conv(lhs), conv(rhs), frozenset(local.values()))
