"""Sorted names and the capture-avoiding operations every other module is built on.

Nominal data are frozen dataclasses deriving from :class:`Nominal`.  Binder-free
classes get free names, substitution and canonicalisation for free by walking
their fields; classes that bind names (restriction, input patterns, frames,
labels) override the three hooks.
"""

from __future__ import annotations

import enum
import itertools
import threading
from dataclasses import dataclass, field, fields
from functools import cached_property
from typing import Any, Iterable, Mapping


class Sort(enum.Enum):
    CONFIGURATION = "configuration"
    CHANNEL = "channel"
    IDENTITY = "identity"
    MESSAGE = "message"
    VARIABLE = "variable"


@dataclass(frozen=True)
class Name:
    """An atom.  Identity is ``(ident, sort)``; ``display`` is only a hint."""

    ident: int
    sort: Sort
    display: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.display or f"_{self.ident}"

    def __repr__(self) -> str:
        return f"Name({self.display or '?'}#{self.ident}:{self.sort.value})"


_EMPTY: frozenset[Name] = frozenset()
_counter = itertools.count(1)
_counter_lock = threading.Lock()


def fresh_name(sort: Sort, avoid: Iterable[Name] = (), hint: str = "") -> Name:
    """Return a name of ``sort`` never handed out before and not in ``avoid``."""
    avoid = frozenset(avoid)
    while True:
        with _counter_lock:
            ident = next(_counter)
        name = Name(ident, sort, hint)
        if name not in avoid:
            return name


def level_name(level: int, sort: Sort, display: str = "") -> Name:
    # Negative identifiers are reserved for canonical binders; fresh_name never yields them.
    return Name(-(level + 1), sort, display)


_FIELDS: dict[type, tuple[str, ...]] = {}


def _field_names(cls: type) -> tuple[str, ...]:
    try:
        return _FIELDS[cls]
    except KeyError:
        names = _FIELDS[cls] = tuple(f.name for f in fields(cls))
        return names


class Nominal:
    """Mixin for frozen dataclasses carrying names."""

    # Set on classes whose instances may contain binders, so canonical() descends into them.
    _contains_binders = False

    @cached_property
    def _free(self) -> frozenset[Name]:
        acc: set[Name] = set()
        for attr in _field_names(type(self)):
            acc |= free_names(getattr(self, attr))
        return frozenset(acc)

    def _apply(self, s: Mapping[Name, Any]) -> Any:
        old = [getattr(self, attr) for attr in _field_names(type(self))]
        new = [apply_substitution(v, s) for v in old]
        if all(a is b for a, b in zip(old, new)):
            return self
        return type(self)(*new)

    def _canon(self, env: Mapping[Name, Name], level: int) -> Any:
        old = [getattr(self, attr) for attr in _field_names(type(self))]
        new = [canonical(v, env, level) for v in old]
        if all(a is b for a, b in zip(old, new)):
            return self
        return type(self)(*new)


@dataclass(frozen=True)
class Fn(Nominal):
    """Constructor application ``symbol(args...)`` over a user signature."""

    symbol: str
    args: tuple = ()

    def __str__(self) -> str:
        return f"{self.symbol}({', '.join(map(str, self.args))})"


Substitution = Mapping[Name, Any]


def free_names(obj: Any) -> frozenset[Name]:
    if isinstance(obj, Name):
        return frozenset((obj,))
    if isinstance(obj, Nominal):
        return obj._free
    if isinstance(obj, (tuple, list, frozenset, set)):
        acc: set[Name] = set()
        for item in obj:
            acc |= free_names(item)
        return frozenset(acc)
    return _EMPTY


def apply_substitution(obj: Any, s: Substitution) -> Any:
    """Capture-avoiding simultaneous substitution with no checks on the domain.

    Used both for variable instantiation and for renaming bound names.
    """
    if not s:
        return obj
    if isinstance(obj, Name):
        return s.get(obj, obj)
    if isinstance(obj, Nominal):
        if obj._free.isdisjoint(s):
            return obj
        return obj._apply(s)
    if isinstance(obj, tuple):
        new = tuple(apply_substitution(x, s) for x in obj)
        return obj if all(a is b for a, b in zip(obj, new)) else new
    if isinstance(obj, frozenset):
        return frozenset(apply_substitution(x, s) for x in obj)
    return obj


def substitute(obj: Any, s: Substitution) -> Any:
    """Replace free variables according to ``s``, renaming binders that would capture."""
    for name in s:
        if not isinstance(name, Name) or name.sort is not Sort.VARIABLE:
            raise ValueError(f"substitution domain must hold variables only, got {name!r}")
    return apply_substitution(obj, s)


def rename(obj: Any, mapping: Mapping[Name, Name]) -> Any:
    return apply_substitution(obj, mapping)


def enter_binders(
    binders: tuple[Name, ...], s: Substitution, scope_free: frozenset[Name]
) -> tuple[tuple[Name, ...], dict[Name, Any]]:
    """Push ``s`` under ``binders`` whose scope has free names ``scope_free``.

    Returns the (possibly renamed) binders and the substitution to use inside.
    Shadowed entries are dropped; a binder that would capture a free name of the
    relevant part of the range is renamed to a fresh name.
    """
    inner = {k: v for k, v in s.items() if k not in binders and k in scope_free}
    if not inner:
        return binders, inner
    captured = free_names(tuple(inner.values()))
    if captured.isdisjoint(binders):
        return binders, inner
    out = []
    for b in binders:
        if b in captured:
            b2 = fresh_name(b.sort, hint=b.display)
            inner[b] = b2
            out.append(b2)
        else:
            out.append(b)
    return tuple(out), inner


def canonical(obj: Any, env: Mapping[Name, Name] | None = None, level: int = 0) -> Any:
    """Rename every bound name to a de Bruijn-level name; free names are kept."""
    env = env or {}
    if isinstance(obj, Name):
        return env.get(obj, obj)
    if isinstance(obj, Nominal):
        if not obj._contains_binders and obj._free.isdisjoint(env):
            return obj
        return obj._canon(env, level)
    if isinstance(obj, tuple):
        new = tuple(canonical(x, env, level) for x in obj)
        return obj if all(a is b for a, b in zip(obj, new)) else new
    if isinstance(obj, frozenset):
        return frozenset(canonical(x, env, level) for x in obj)
    return obj


def bind_levels(
    binders: tuple[Name, ...], env: Mapping[Name, Name], level: int
) -> tuple[tuple[Name, ...], dict[Name, Name], int]:
    """Assign consecutive level names to ``binders``; returns (names, env, next level)."""
    inner = dict(env)
    out = []
    for b in binders:
        c = level_name(level, b.sort, b.display)
        inner[b] = c
        out.append(c)
        level += 1
    return tuple(out), inner, level


def alpha_equivalent(a: Any, b: Any) -> bool:
    return canonical(a) == canonical(b)


def match_term(
    pattern: Any, value: Any, variables: frozenset[Name] | set[Name]
) -> dict[Name, Any] | None:
    """One-sided syntactic matching; repeated variables must match equal subterms."""
    out: dict[Name, Any] = {}
    stack = [(pattern, value)]
    while stack:
        p, v = stack.pop()
        if isinstance(p, Name) and p in variables:
            seen = out.get(p)
            if seen is None:
                out[p] = v
            elif seen != v:
                return None
            continue
        if type(p) is not type(v):
            return None
        if isinstance(p, Name):
            if p != v:
                return None
        elif isinstance(p, Nominal):
            for attr in _field_names(type(p)):
                stack.append((getattr(p, attr), getattr(v, attr)))
        elif isinstance(p, tuple):
            if len(p) != len(v):
                return None
            stack.extend(zip(p, v))
        elif p != v:
            return None
    return out


def structural_key(obj: Any, masked: frozenset[Name] = _EMPTY) -> Any:
    """A total-order key ignoring display hints; names in ``masked`` compare equal."""
    if isinstance(obj, Name):
        if obj in masked:
            return ("~", obj.sort.value)
        return ("N", obj.sort.value, obj.ident)
    if isinstance(obj, Nominal):
        return (type(obj).__name__,) + tuple(
            structural_key(getattr(obj, attr), masked) for attr in _field_names(type(obj))
        )
    if isinstance(obj, tuple):
        return ("T",) + tuple(structural_key(x, masked) for x in obj)
    if isinstance(obj, frozenset):
        return ("S",) + tuple(sorted(structural_key(x, masked) for x in obj))
    if isinstance(obj, enum.Enum):
        return ("E", obj.value)
    if obj is None:
        return ("0",)
    return ("V", obj)
