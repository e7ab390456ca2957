"""Parametric psi-calculus: processes, frames and the labelled transition relation.

An instance is described by an :class:`InstanceSignature`.  Assertions, conditions
and terms are whatever nominal data the instance chooses; this module only ever
touches them through the signature and the generic nominal operations.

Inputs use a symbolic (late) reading when they fire on their own: the label
carries the pattern with freshly renamed variables and the continuation keeps
those variables free.  Inside a communication the pattern is matched against
the output payload and the continuation is instantiated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Mapping, Sequence

from .nominal import (
    _field_names,
    Name,
    Nominal,
    apply_substitution,
    bind_levels,
    canonical,
    enter_binders,
    free_names,
    fresh_name,
    match_term,
    rename,
    structural_key,
)


class WellFormednessError(ValueError):
    pass


@dataclass(frozen=True)
class TermEq(Nominal):
    """Condition ``lhs = rhs``; shared by the bundled instances."""

    lhs: Any
    rhs: Any


@dataclass(frozen=True)
class InstanceSignature:
    name: str
    channel_eq: Callable[[Any, Any], Any]
    entails: Callable[[Any, Any], bool]
    compose: Callable[[Any, Any], Any]
    unit: Any
    condition_sample: tuple = ()


# ---------------------------------------------------------------- processes


class Process(Nominal):
    _contains_binders = True

    def __str__(self) -> str:
        from .printing import render

        return render(self)


@dataclass(frozen=True)
class Nil(Process):
    pass


@dataclass(frozen=True)
class Output(Process):
    channel: Any
    payload: Any
    continuation: Process = Nil()


@dataclass(frozen=True)
class Input(Process):
    """``channel(λ variables) pattern . continuation``; variables bind in pattern and continuation."""

    channel: Any
    variables: tuple[Name, ...]
    pattern: Any
    continuation: Process = Nil()

    @cached_property
    def _free(self) -> frozenset[Name]:
        inner = free_names(self.pattern) | free_names(self.continuation)
        return free_names(self.channel) | (inner - frozenset(self.variables))

    def _apply(self, s: Mapping[Name, Any]) -> Input:
        channel = apply_substitution(self.channel, s)
        scope = (free_names(self.pattern) | free_names(self.continuation)) - frozenset(self.variables)
        variables, inner = enter_binders(self.variables, s, scope)
        return Input(
            channel,
            variables,
            apply_substitution(self.pattern, inner),
            apply_substitution(self.continuation, inner),
        )

    def _canon(self, env: Mapping[Name, Name], level: int) -> Input:
        channel = canonical(self.channel, env, level)
        variables, inner, level = bind_levels(self.variables, env, level)
        return Input(
            channel,
            variables,
            canonical(self.pattern, inner, level),
            canonical(self.continuation, inner, level),
        )


@dataclass(frozen=True)
class Case(Process):
    branches: tuple[tuple[Any, Process], ...]


@dataclass(frozen=True)
class Restriction(Process):
    name: Name
    body: Process

    @cached_property
    def _free(self) -> frozenset[Name]:
        return free_names(self.body) - {self.name}

    def _apply(self, s: Mapping[Name, Any]) -> Restriction:
        (name,), inner = enter_binders((self.name,), s, self._free)
        return Restriction(name, apply_substitution(self.body, inner))

    def _canon(self, env: Mapping[Name, Name], level: int) -> Restriction:
        (name,), inner, level = bind_levels((self.name,), env, level)
        return Restriction(name, canonical(self.body, inner, level))


@dataclass(frozen=True)
class Parallel(Process):
    left: Process
    right: Process


@dataclass(frozen=True)
class Replication(Process):
    body: Process


@dataclass(frozen=True)
class AssertionProc(Process):
    assertion: Any


def par(*processes: Process) -> Process:
    """Right-nested parallel composition; ``par()`` is ``Nil``."""
    if not processes:
        return Nil()
    out = processes[-1]
    for p in reversed(processes[:-1]):
        out = Parallel(p, out)
    return out


def nu(names: Iterable[Name], body: Process) -> Process:
    for n in reversed(tuple(names)):
        body = Restriction(n, body)
    return body


# ---------------------------------------------------------------- frames and labels


@dataclass(frozen=True)
class Frame(Nominal):
    binders: tuple[Name, ...]
    assertion: Any

    _contains_binders = True

    @cached_property
    def _free(self) -> frozenset[Name]:
        return free_names(self.assertion) - frozenset(self.binders)

    def _apply(self, s: Mapping[Name, Any]) -> Frame:
        binders, inner = enter_binders(self.binders, s, self._free)
        return Frame(binders, apply_substitution(self.assertion, inner))

    def _canon(self, env: Mapping[Name, Name], level: int) -> Frame:
        binders, inner, level = bind_levels(self.binders, env, level)
        return Frame(binders, canonical(self.assertion, inner, level))


class Label(Nominal):
    def __str__(self) -> str:
        from .printing import render

        return render(self)


@dataclass(frozen=True)
class OutputLabel(Label):
    """``channel ⟨(ν extruded) payload⟩``; extruded names bind into the payload."""

    channel: Any
    extruded: tuple[Name, ...]
    payload: Any

    _contains_binders = True

    @cached_property
    def _free(self) -> frozenset[Name]:
        return free_names(self.channel) | (free_names(self.payload) - frozenset(self.extruded))

    def _canon(self, env: Mapping[Name, Name], level: int) -> OutputLabel:
        channel = canonical(self.channel, env, level)
        extruded, inner, level = bind_levels(self.extruded, env, level)
        return OutputLabel(channel, extruded, canonical(self.payload, inner, level))


@dataclass(frozen=True)
class InputLabel(Label):
    """Symbolic input ``channel (λ variables) pattern``."""

    channel: Any
    variables: tuple[Name, ...]
    payload: Any

    _contains_binders = True

    @cached_property
    def _free(self) -> frozenset[Name]:
        return free_names(self.channel) | (free_names(self.payload) - frozenset(self.variables))

    def _canon(self, env: Mapping[Name, Name], level: int) -> InputLabel:
        channel = canonical(self.channel, env, level)
        variables, inner, level = bind_levels(self.variables, env, level)
        return InputLabel(channel, variables, canonical(self.payload, inner, level))


@dataclass(frozen=True)
class Tau(Label):
    """Internal step.  ``comm`` records (channel, payload) of the synchronisation for diagnostics only."""

    comm: tuple | None = field(default=None, compare=False)


# ---------------------------------------------------------------- frame


def _freshen(binders: tuple[Name, ...], assertion: Any, avoid: frozenset[Name]) -> Frame:
    if avoid.isdisjoint(binders):
        return Frame(binders, assertion)
    mapping = {b: fresh_name(b.sort, hint=b.display) for b in binders if b in avoid}
    return Frame(tuple(mapping.get(b, b) for b in binders), rename(assertion, mapping))


def frame(p: Process, sig: InstanceSignature) -> Frame:
    """Outermost assertions of ``p`` composed, with the restrictions above them as binders."""
    match p:
        case AssertionProc(assertion):
            return Frame((), assertion)
        case Parallel(left, right):
            fl = frame(left, sig)
            fr = frame(right, sig)
            if fr.binders:
                fr = _freshen(fr.binders, fr.assertion, frozenset(fl.binders) | free_names(fl.assertion))
            if fl.binders:
                fl = _freshen(fl.binders, fl.assertion, free_names(fr.assertion) - frozenset(fr.binders))
            return Frame(fl.binders + fr.binders, sig.compose(fl.assertion, fr.assertion))
        case Restriction(name, body):
            inner = frame(body, sig)
            if name in inner.binders:
                inner = _freshen(inner.binders, inner.assertion, frozenset((name,)))
            return Frame((name,) + inner.binders, inner.assertion)
        case Process():
            return Frame((), sig.unit)
    raise WellFormednessError(f"not a process: {p!r}")


def assertion_equivalent(a: Any, b: Any, sig: InstanceSignature) -> bool:
    return all(sig.entails(a, phi) == sig.entails(b, phi) for phi in sig.condition_sample)


# ---------------------------------------------------------------- matching


def check_pattern(variables: Sequence[Name], pattern: Any) -> None:
    if len(set(variables)) != len(variables):
        raise WellFormednessError(f"pattern variables are not distinct: {variables}")
    missing = set(variables) - free_names(pattern)
    if missing:
        raise WellFormednessError(f"pattern variables {sorted(map(str, missing))} do not occur in the pattern")


def match_pattern(variables: Sequence[Name], pattern: Any, value: Any) -> dict[Name, Any] | None:
    """The unique substitution over ``variables`` taking ``pattern`` to ``value``, if any."""
    check_pattern(variables, pattern)
    return match_term(pattern, value, frozenset(variables))


# ---------------------------------------------------------------- transitions


def transitions(
    context: Any, p: Process, sig: InstanceSignature, unfold_budget: int = 0
) -> list[tuple[Label, Process]]:
    """Every single-step transition of ``p`` in the environment ``context``."""
    return _trans(context, p, sig, unfold_budget)


def _trans(psi: Any, p: Process, sig: InstanceSignature, budget: int) -> list[tuple[Label, Process]]:
    match p:
        case Nil() | AssertionProc():
            return []
        case Output(channel, payload, cont):
            return [(OutputLabel(channel, (), payload), cont)]
        case Input(channel, variables, pattern, cont):
            check_pattern(variables, pattern)
            mapping = {x: fresh_name(x.sort, hint=x.display) for x in variables}
            label = InputLabel(channel, tuple(mapping.values()), rename(pattern, mapping))
            return [(label, rename(cont, mapping))]
        case Case(branches):
            out = []
            for phi, branch in branches:
                if sig.entails(psi, phi):
                    out.extend(_trans(psi, branch, sig, budget))
            return out
        case Restriction():
            return _trans_restriction(psi, p, sig, budget)
        case Parallel():
            return _trans_parallel(psi, p, sig, budget)
        case Replication(body):
            if budget <= 0:
                return []
            return _trans(psi, Parallel(body, p), sig, budget - 1)
    raise WellFormednessError(f"not a process: {p!r}")


def _assertion_names(psi: Any) -> frozenset[Name]:
    return free_names(psi)


def _trans_restriction(psi: Any, p: Restriction, sig: InstanceSignature, budget: int):
    a, body = p.name, p.body
    if a in _assertion_names(psi):
        a2 = fresh_name(a.sort, hint=a.display)
        body = rename(body, {a: a2})
        a = a2
    out = []
    for label, residual in _trans(psi, body, sig, budget):
        if isinstance(label, Tau):
            out.append((label, Restriction(a, residual)))
        elif isinstance(label, OutputLabel):
            if a in free_names(label.channel):
                continue
            if a in free_names(label.payload) and a not in label.extruded:
                a2 = fresh_name(a.sort, hint=a.display)
                m = {a: a2}
                opened = OutputLabel(label.channel, (a2,) + label.extruded, rename(label.payload, m))
                out.append((opened, rename(residual, m)))
            else:
                out.append((label, Restriction(a, residual)))
        elif isinstance(label, InputLabel):
            if a in free_names(label.channel) or a in free_names(label.payload):
                continue
            out.append((label, Restriction(a, residual)))
    return out


def _trans_parallel(psi: Any, p: Parallel, sig: InstanceSignature, budget: int):
    left, right = p.left, p.right
    avoid = _assertion_names(psi)
    fl = frame(left, sig)
    fr = frame(right, sig)
    fl = _freshen(fl.binders, fl.assertion, avoid | free_names(right))
    fr = _freshen(fr.binders, fr.assertion, avoid | free_names(left) | frozenset(fl.binders))
    tl = _trans(sig.compose(fr.assertion, psi), left, sig, budget)
    tr = _trans(sig.compose(fl.assertion, psi), right, sig, budget)
    out: list[tuple[Label, Process]] = []
    for label, residual in tl:
        out.append((label, Parallel(residual, right)))
    for label, residual in tr:
        out.append((label, Parallel(left, residual)))
    if not (tl and tr):
        return out
    full = None
    for (lo, ro, left_outputs) in ((tl, tr, True), (tr, tl, False)):
        outs = [(lab, res) for lab, res in lo if isinstance(lab, OutputLabel)]
        ins = [(lab, res) for lab, res in ro if isinstance(lab, InputLabel)]
        if not outs or not ins:
            continue
        if full is None:
            full = sig.compose(sig.compose(fr.assertion, fl.assertion), psi)
        for olab, ores in outs:
            for ilab, ires in ins:
                if not sig.entails(full, sig.channel_eq(olab.channel, ilab.channel)):
                    continue
                sigma = match_term(ilab.payload, olab.payload, frozenset(ilab.variables))
                if sigma is None:
                    continue
                received = apply_substitution(ires, sigma)
                pair = Parallel(ores, received) if left_outputs else Parallel(received, ores)
                comm = (olab.channel, olab.payload)
                out.append((Tau(comm), _nu_all(olab.extruded, pair)))
    return out


def _nu_all(names: tuple[Name, ...], body: Process) -> Process:
    for n in reversed(names):
        body = Restriction(n, body)
    return body


# ---------------------------------------------------------------- normal form


def normalize(p: Process, sig: InstanceSignature) -> Process:
    """Canonical representative used to deduplicate states.

    Top-level restrictions are pulled out of parallel compositions, top-level
    assertions are merged, ``Nil`` and unit assertions dropped, unused binders
    discarded, components sorted, and every binder renamed canonically.  Each
    step is a structural-congruence law, so the result has the same transitions.
    """
    binders: list[Name] = []
    assertions: list[Any] = []
    components: list[Process] = []
    _flatten(p, binders, assertions, components)
    merged = sig.unit
    for a in assertions:
        merged = sig.compose(merged, a)
    parts: list[Process] = []
    if merged != sig.unit:
        parts.append(AssertionProc(merged))
    parts.extend(components)
    used = free_names(tuple(parts))
    binders = [b for b in binders if b in used]
    masked = frozenset(binders)
    head = parts[:1] if parts and isinstance(parts[0], AssertionProc) else []
    rest = sorted(parts[len(head):], key=lambda q: structural_key(canonical(q), masked))
    parts = head + rest
    order: list[Name] = []
    seen: set[Name] = set()
    for q in parts:
        for n in _occurrence_order(q, masked):
            if n in masked and n not in seen:
                seen.add(n)
                order.append(n)
    return canonical(nu(order, par(*parts)))


def _flatten(p: Process, binders: list[Name], assertions: list[Any], components: list[Process]) -> None:
    match p:
        case Parallel(left, right):
            _flatten(left, binders, assertions, components)
            _flatten(right, binders, assertions, components)
        case Restriction(name, body):
            fresh = fresh_name(name.sort, hint=name.display)
            binders.append(fresh)
            _flatten(rename(body, {name: fresh}), binders, assertions, components)
        case Nil():
            pass
        case AssertionProc(assertion):
            assertions.append(assertion)
        case _:
            components.append(p)


def _occurrence_order(obj: Any, masked: frozenset[Name]) -> Iterable[Name]:
    """Names in a left-to-right traversal; set members are visited in masked-key order."""
    if isinstance(obj, Name):
        yield obj
    elif isinstance(obj, Nominal):
        for attr in _field_names(type(obj)):
            yield from _occurrence_order(getattr(obj, attr), masked)
    elif isinstance(obj, tuple):
        for x in obj:
            yield from _occurrence_order(x, masked)
    elif isinstance(obj, frozenset):
        for x in sorted(obj, key=lambda y: structural_key(y, masked)):
            yield from _occurrence_order(x, masked)
