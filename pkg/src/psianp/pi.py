"""The pi-calculus as a psi instance: names as terms, name equality as the only condition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .nominal import Name, Nominal, Sort, fresh_name
from .psi import Case, Input, InstanceSignature, Nil, Output, Parallel, Process, Replication, Restriction, TermEq


class UnsupportedConstruct(ValueError):
    pass


@dataclass(frozen=True)
class PiUnit(Nominal):
    """The single pi assertion."""

    def __str__(self) -> str:
        return "1"


PI_UNIT = PiUnit()

# Fixed name whose self-equality plays the always-true guard.
TOP = fresh_name(Sort.CHANNEL, hint="top")
TRUE = TermEq(TOP, TOP)


def pi_entails(psi: PiUnit, phi: TermEq) -> bool:
    return isinstance(phi, TermEq) and phi.lhs == phi.rhs


def make_pi_instance(universe: Iterable[Name] = ()) -> InstanceSignature:
    """Pi instance; the condition sample is every equality over ``universe`` plus two reserved names."""
    names = tuple(universe) + (
        fresh_name(Sort.CHANNEL, hint="r0"),
        fresh_name(Sort.CHANNEL, hint="r1"),
    )
    return InstanceSignature(
        name="pi",
        channel_eq=TermEq,
        entails=pi_entails,
        compose=lambda a, b: PI_UNIT,
        unit=PI_UNIT,
        condition_sample=tuple(TermEq(a, b) for a in names for b in names),
    )


# Surface pi processes, names are plain strings.


@dataclass(frozen=True)
class PNil:
    pass


@dataclass(frozen=True)
class POut:
    channel: str
    obj: str
    cont: "PiProc" = PNil()


@dataclass(frozen=True)
class PIn:
    channel: str
    var: str
    cont: "PiProc" = PNil()


@dataclass(frozen=True)
class PPar:
    left: "PiProc"
    right: "PiProc"


@dataclass(frozen=True)
class PSum:
    left: "PiProc"
    right: "PiProc"


@dataclass(frozen=True)
class PNew:
    name: str
    body: "PiProc"


@dataclass(frozen=True)
class PRep:
    body: "PiProc"


@dataclass(frozen=True)
class PMismatch:
    """``[a != b] P``: outside the supported fragment."""

    a: str
    b: str
    body: "PiProc"


PiProc = Union[PNil, POut, PIn, PPar, PSum, PNew, PRep, PMismatch]


def encode_pi(p: PiProc, free: dict[str, Name] | None = None) -> Process:
    """Translate a pi process; ``free`` maps free name strings to names and is filled in place."""
    if free is None:
        free = {}
    return _encode(p, {}, free)


def _lookup(s: str, env: dict[str, Name], free: dict[str, Name]) -> Name:
    if s in env:
        return env[s]
    if s not in free:
        free[s] = fresh_name(Sort.CHANNEL, hint=s)
    return free[s]


def _encode(p: PiProc, env: dict[str, Name], free: dict[str, Name]) -> Process:
    match p:
        case PNil():
            return Nil()
        case POut(c, o, cont):
            return Output(_lookup(c, env, free), _lookup(o, env, free), _encode(cont, env, free))
        case PIn(c, v, cont):
            x = fresh_name(Sort.VARIABLE, hint=v)
            channel = _lookup(c, env, free)
            return Input(channel, (x,), x, _encode(cont, {**env, v: x}, free))
        case PPar(left, right):
            return Parallel(_encode(left, env, free), _encode(right, env, free))
        case PSum(left, right):
            return Case(((TRUE, _encode(left, env, free)), (TRUE, _encode(right, env, free))))
        case PNew(n, body):
            a = fresh_name(Sort.CHANNEL, hint=n)
            return Restriction(a, _encode(body, {**env, n: a}, free))
        case PRep(body):
            return Replication(_encode(body, env, free))
    raise UnsupportedConstruct(f"{type(p).__name__} is outside the supported pi fragment")
