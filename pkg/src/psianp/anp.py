"""The actor-network instance: path-structured channels, executed-action sets, dependency pairs."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .nominal import Fn, Name, Nominal, Sort, match_term, apply_substitution, free_names
from .psi import InstanceSignature, TermEq


class CycleError(ValueError):
    """Composing two assertions produced a dependency cycle."""


class RewriteDivergence(RuntimeError):
    """Normalisation exceeded the configured number of rewrite steps."""


class Polarity(enum.Enum):
    INPUT = "in"
    OUTPUT = "out"
    INTERNAL = "local"


@dataclass(frozen=True)
class ConfigPath(Nominal):
    """Ancestor-first list of configuration names, optionally controlled by an identity."""

    controller: Name | None
    path: tuple[Name, ...]

    def __post_init__(self) -> None:
        if not self.path:
            raise ValueError("configuration path must be nonempty")
        if len(set(self.path)) != len(self.path):
            raise ValueError(f"configuration path repeats a name: {self.path}")


@dataclass(frozen=True)
class ChannelTerm(Nominal):
    at: ConfigPath
    channel: Name


@dataclass(frozen=True)
class ActionRecord(Nominal):
    event_id: str
    polarity: Polarity
    channel: ChannelTerm
    payload: Any


@dataclass(frozen=True)
class AnpAssertion(Nominal):
    done: frozenset = frozenset()
    depends: frozenset = frozenset()

    @classmethod
    def of(cls, done: Iterable[ActionRecord] = (), depends: Iterable[tuple] = ()) -> AnpAssertion:
        """Build an assertion, closing ``depends`` transitively."""
        return cls(frozenset(done), _closure(frozenset(depends)))


@dataclass(frozen=True)
class Done(Nominal):
    records: frozenset


@dataclass(frozen=True)
class Ordered(Nominal):
    """Entailed when every pair is among the assertion's dependency pairs."""

    pairs: frozenset


@dataclass(frozen=True)
class Conj(Nominal):
    parts: tuple

    @classmethod
    def of(cls, *parts: Any) -> Any:
        flat: list[Any] = []
        for p in parts:
            flat.extend(p.parts if isinstance(p, Conj) else (p,))
        return flat[0] if len(flat) == 1 else cls(tuple(flat))


UNIT = AnpAssertion()


@dataclass(frozen=True)
class RewriteRule:
    """``lhs -> rhs``; names in ``variables`` match any subterm."""

    lhs: Any
    rhs: Any
    variables: frozenset[Name]


DEFAULT_STEP_CAP = 10_000


def normalize_term(t: Any, rules: Sequence[RewriteRule], cap: int = DEFAULT_STEP_CAP) -> Any:
    """Innermost normal form of ``t`` under ``rules``."""
    if not rules:
        return t
    budget = [cap]
    return _norm(t, rules, budget)


def _norm(t: Any, rules: Sequence[RewriteRule], budget: list[int]) -> Any:
    while True:
        if isinstance(t, Fn):
            t = Fn(t.symbol, tuple(_norm(a, rules, budget) for a in t.args))
        for rule in rules:
            sigma = match_term(rule.lhs, t, rule.variables)
            if sigma is not None:
                budget[0] -= 1
                if budget[0] < 0:
                    raise RewriteDivergence(f"rewriting did not terminate from {t}")
                t = apply_substitution(rule.rhs, sigma)
                break
        else:
            return t


def message_eq(m: Any, n: Any, equations: Sequence[RewriteRule] = (), cap: int = DEFAULT_STEP_CAP) -> bool:
    return normalize_term(m, equations, cap) == normalize_term(n, equations, cap)


def anp_channel_eq(m: ChannelTerm, k: ChannelTerm) -> TermEq:
    return TermEq(m, k)


def anp_entails(psi: AnpAssertion, phi: Any, equations: Sequence[RewriteRule] = ()) -> bool:
    match phi:
        case TermEq(lhs, rhs):
            return message_eq(lhs, rhs, equations)
        case Done(records):
            return records <= psi.done
        case Ordered(pairs):
            return pairs <= psi.depends
        case Conj(parts):
            return all(anp_entails(psi, p, equations) for p in parts)
    raise TypeError(f"not an ANP condition: {phi!r}")


def anp_compose(a: AnpAssertion, b: AnpAssertion) -> AnpAssertion:
    if not (b.done or b.depends):
        return a
    if not (a.done or a.depends):
        return b
    done = a.done | b.done
    if b.depends <= a.depends:
        return AnpAssertion(done, a.depends)
    if a.depends <= b.depends:
        return AnpAssertion(done, b.depends)
    return AnpAssertion(done, _closure(a.depends | b.depends))


def _closure(pairs: frozenset) -> frozenset:
    succ: dict[Any, set] = {}
    for x, y in pairs:
        succ.setdefault(x, set()).add(y)
    out = set()
    for start in succ:
        stack = list(succ[start])
        seen: set = set()
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(succ.get(node, ()))
        if start in seen:
            raise CycleError(f"dependency cycle through {start}")
        out.update((start, y) for y in seen)
    return frozenset(out)


def make_anp_instance(
    records: Iterable[ActionRecord] = (),
    equations: Sequence[RewriteRule] = (),
    probes: Iterable[TermEq] = (),
) -> InstanceSignature:
    """ANP signature; the condition sample covers ``records`` singletons and ordered pairs."""
    records = tuple(records)
    equations = tuple(equations)
    sample: list[Any] = [Done(frozenset((r,))) for r in records]
    sample += [Ordered(frozenset(((r, s),))) for r in records for s in records if r != s]
    sample += list(probes)
    return InstanceSignature(
        name="anp",
        channel_eq=anp_channel_eq,
        entails=lambda psi, phi: anp_entails(psi, phi, equations),
        compose=anp_compose,
        unit=UNIT,
        condition_sample=tuple(sample),
    )


def record_event_ids(psi: AnpAssertion) -> frozenset[str]:
    return frozenset(r.event_id for r in psi.done)


def is_ground(t: Any) -> bool:
    return all(n.sort is not Sort.VARIABLE for n in free_names(t))
