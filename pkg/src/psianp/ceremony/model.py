"""Surface syntax of ceremony descriptions.

Everything here is plain strings and tuples so that two parses of the same text
compare equal; names are only minted by the compiler.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class SName:
    """An identifier; ``binding`` marks a ``?x`` occurrence that introduces a variable."""

    id: str
    binding: bool = False

    def __str__(self) -> str:
        return f"?{self.id}" if self.binding else self.id


@dataclass(frozen=True)
class SApp:
    fn: str
    args: tuple["STerm", ...]

    def __str__(self) -> str:
        return f"{self.fn}({', '.join(map(str, self.args))})"


STerm = Union[SName, SApp]


def term_identifiers(t: STerm) -> list[SName]:
    if isinstance(t, SName):
        return [t]
    out: list[SName] = []
    for a in t.args:
        out.extend(term_identifiers(a))
    return out


def term_applications(t: STerm) -> list[SApp]:
    if isinstance(t, SName):
        return []
    out = [t]
    for a in t.args:
        out.extend(term_applications(a))
    return out


@dataclass(frozen=True)
class ConfigDecl:
    name: str
    parent: str | None = None
    controller: str | None = None


@dataclass(frozen=True)
class ChannelDecl:
    name: str
    kind: str
    source: str
    target: str


@dataclass(frozen=True)
class ConstructorDecl:
    name: str
    arity: int


@dataclass(frozen=True)
class RuleDecl:
    lhs: STerm
    rhs: STerm


@dataclass(frozen=True)
class ConstantDecl:
    name: str
    secret: bool = False
    known_by: tuple[str, ...] = ()


EVENT_KINDS = ("out", "in", "fresh", "compute", "test")


@dataclass(frozen=True)
class EventDecl:
    """One ceremony event.

    ``term`` is the payload for ``out``, the pattern for ``in``, the assigned
    expression for ``compute`` and the left side for ``test``.  ``variable`` is
    the name bound by ``fresh``/``compute``; ``rhs`` the right side of a test.
    """

    id: str
    config: str
    kind: str
    channel: str | None = None
    term: STerm | None = None
    variable: str | None = None
    rhs: STerm | None = None
    after: tuple[str, ...] = ()

    def bound_variables(self) -> list[str]:
        if self.kind == "in" and self.term is not None:
            return [n.id for n in term_identifiers(self.term) if n.binding]
        if self.kind in ("fresh", "compute") and self.variable:
            return [self.variable]
        return []

    def used_terms(self) -> list[STerm]:
        if self.kind == "in":
            return []
        return [t for t in (self.term, self.rhs) if t is not None]


@dataclass(frozen=True)
class CeremonySpec:
    name: str = "ceremony"
    identities: tuple[str, ...] = ()
    configurations: tuple[ConfigDecl, ...] = ()
    channels: tuple[ChannelDecl, ...] = ()
    constructors: tuple[ConstructorDecl, ...] = ()
    rules: tuple[RuleDecl, ...] = ()
    constants: tuple[ConstantDecl, ...] = ()
    events: tuple[EventDecl, ...] = ()
    desired_run: tuple[tuple[str, str], ...] = ()
    # Source positions keyed by (section, name); not part of the value.
    locations: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def config(self, name: str) -> ConfigDecl | None:
        return next((c for c in self.configurations if c.name == name), None)

    def channel(self, name: str) -> ChannelDecl | None:
        return next((c for c in self.channels if c.name == name), None)

    def event(self, event_id: str) -> EventDecl | None:
        return next((e for e in self.events if e.id == event_id), None)

    def ancestors(self, config: str) -> list[str]:
        """Root-first path to ``config``; assumes the containment forest is acyclic."""
        parents = {c.name: c.parent for c in self.configurations}
        path = [config]
        while parents.get(path[-1]) is not None and len(path) <= len(parents):
            path.append(parents[path[-1]])
        return list(reversed(path))

    def related(self, a: str, b: str) -> bool:
        """True when one configuration contains the other (or they coincide)."""
        return a in self.ancestors(b) or b in self.ancestors(a)
