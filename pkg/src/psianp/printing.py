"""Canonical text for processes, terms, conditions, assertions and labels.

Names print by their display hint.  When two distinct names in one rendered
object share a hint, the later ones get a ``'1``, ``'2`` ... suffix so the text
stays unambiguous.
"""

from __future__ import annotations

from typing import Any

from .anp import ActionRecord, AnpAssertion, ChannelTerm, ConfigPath, Conj, Done, Ordered
from .nominal import Fn, Name, Nominal, _field_names, structural_key
from .pi import PiUnit
from .psi import (
    AssertionProc,
    Case,
    Frame,
    Input,
    InputLabel,
    Nil,
    Output,
    OutputLabel,
    Parallel,
    Replication,
    Restriction,
    Tau,
    TermEq,
)


def render(obj: Any) -> str:
    return _Renderer(_display_map(obj)).show(obj)


def _display_map(obj: Any) -> dict[Name, str]:
    names: list[Name] = []
    seen: set[Name] = set()
    _collect(obj, names, seen)
    by_hint: dict[str, int] = {}
    out: dict[Name, str] = {}
    for n in names:
        base = n.display or f"_{abs(n.ident)}"
        k = by_hint.get(base, 0)
        by_hint[base] = k + 1
        out[n] = base if k == 0 else f"{base}'{k}"
    return out


def _collect(obj: Any, names: list[Name], seen: set[Name]) -> None:
    if isinstance(obj, Name):
        if obj not in seen:
            seen.add(obj)
            names.append(obj)
    elif isinstance(obj, Nominal):
        for attr in _field_names(type(obj)):
            _collect(getattr(obj, attr), names, seen)
    elif isinstance(obj, tuple):
        for x in obj:
            _collect(x, names, seen)
    elif isinstance(obj, frozenset):
        for x in sorted(obj, key=structural_key):
            _collect(x, names, seen)


class _Renderer:
    def __init__(self, names: dict[Name, str]) -> None:
        self.names = names

    def show(self, obj: Any) -> str:
        match obj:
            case Name():
                return self.names.get(obj, str(obj))
            case Fn(symbol, args):
                return f"{symbol}({', '.join(self.show(a) for a in args)})"
            case ConfigPath(controller, path):
                head = self.show(controller) if controller is not None else ""
                return f"{head}[{', '.join(self.show(n) for n in path)}]"
            case ChannelTerm(at, channel):
                return f"{self.show(at)}{self.show(channel)}"
            case ActionRecord(event_id, polarity, channel, payload):
                return f"{event_id}:{polarity.value} {self.show(channel)}⟨{self.show(payload)}⟩"
            case AnpAssertion(done, depends):
                parts = sorted(self.show(r) for r in done)
                parts += sorted(f"{self.show(a)} ≺ {self.show(b)}" for a, b in depends)
                return "{" + "; ".join(parts) + "}"
            case PiUnit():
                return "1"
            case TermEq(lhs, rhs):
                return f"{self.show(lhs)} = {self.show(rhs)}"
            case Done(records):
                return "done{" + ", ".join(sorted(self.show(r) for r in records)) + "}"
            case Ordered(pairs):
                return "ordered{" + ", ".join(sorted(f"{self.show(a)} ≺ {self.show(b)}" for a, b in pairs)) + "}"
            case Conj(parts):
                return " ∧ ".join(self.show(p) for p in parts)
            case Frame(binders, assertion):
                return "".join(f"ν {self.show(b)}." for b in binders) + self.show(assertion)
            case OutputLabel(channel, extruded, payload):
                nus = "".join(f"ν {self.show(b)}." for b in extruded)
                return f"'{self.show(channel)}⟨{nus}{self.show(payload)}⟩"
            case InputLabel(channel, variables, payload):
                return f"{self.show(channel)}(λ{', '.join(self.show(v) for v in variables)}){self.show(payload)}"
            case Tau():
                return "tau"
            case _:
                return self.process(obj)

    def process(self, p: Any) -> str:
        match p:
            case Nil():
                return "0"
            case Output(channel, payload, cont):
                return f"out {self.show(channel)}⟨{self.show(payload)}⟩{self._then(cont)}"
            case Input(channel, variables, pattern, cont):
                vs = ", ".join(self.show(v) for v in variables)
                return f"in {self.show(channel)}(λ{vs}){self.show(pattern)}{self._then(cont)}"
            case Case(branches):
                arms = " [] ".join(f"{self.show(phi)} : {self.process(q)}" for phi, q in branches)
                return f"case {{ {arms} }}"
            case Restriction(name, body):
                return f"ν {self.show(name)}.{self._atom(body)}"
            case Parallel():
                return "(" + " | ".join(self.process(q) for q in _components(p)) + ")"
            case Replication(body):
                return f"!{self._atom(body)}"
            case AssertionProc(assertion):
                return f"⦇{self.show(assertion)}⦈"
        raise TypeError(f"cannot render {p!r}")

    def _then(self, cont: Any) -> str:
        if isinstance(cont, Nil):
            return ""
        return "." + self._atom(cont)

    def _atom(self, p: Any) -> str:
        text = self.process(p)
        if isinstance(p, (Output, Input)) and not isinstance(p.continuation, Nil):
            return f"({text})"
        return text


def _components(p: Any) -> list[Any]:
    if isinstance(p, Parallel):
        return _components(p.left) + _components(p.right)
    return [p]
