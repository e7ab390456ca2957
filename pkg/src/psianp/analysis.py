"""Bounded exploration, pomset extraction, desired-run verdicts and PDL queries."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .anp import ActionRecord, AnpAssertion, Polarity
from .nominal import Fn, Name, canonical, rename
from .printing import render
from .psi import InputLabel, InstanceSignature, Label, OutputLabel, Process, frame, normalize, transitions

# Identifiers for names bound by trace labels; far away from fresh and canonical ones.
_TRACE_BASE = -(10**9)


class InconsistentAssertion(ValueError):
    """A dependency pair names an executed event through a record that is not in the done set."""


@dataclass(frozen=True)
class Step:
    label: Label
    records: tuple[ActionRecord, ...] = ()

    @property
    def event_ids(self) -> tuple[str, ...]:
        return tuple(r.event_id for r in self.records)


@dataclass(frozen=True)
class Trace:
    steps: tuple[Step, ...]
    final_assertion: Any
    complete: bool
    truncated: bool = False

    @property
    def deadlocked(self) -> bool:
        return not self.complete and not self.truncated

    @property
    def event_ids(self) -> tuple[str, ...]:
        return tuple(i for s in self.steps for i in s.event_ids)


def _done_ids(assertion: Any) -> frozenset[str]:
    done = getattr(assertion, "done", None)
    return frozenset(r.event_id for r in done) if done else frozenset()


_POLARITY_RANK = {Polarity.OUTPUT: 0, Polarity.INTERNAL: 1, Polarity.INPUT: 2}


def _new_records(before: Any, after: Any) -> tuple[ActionRecord, ...]:
    old = _done_ids(before)
    fresh = [r for r in getattr(after, "done", ()) if r.event_id not in old]
    return tuple(sorted(fresh, key=lambda r: (_POLARITY_RANK[r.polarity], natural_key(r.event_id))))


def _bind_label(label: Label, target: Process, counter: int) -> tuple[Label, Process, int]:
    """Give the names a label binds stable trace-level identities."""
    if isinstance(label, OutputLabel):
        bound = label.extruded
    elif isinstance(label, InputLabel):
        bound = label.variables
    else:
        return label, target, counter
    mapping: dict[Name, Name] = {}
    for b in bound:
        mapping[b] = Name(_TRACE_BASE - counter, b.sort, b.display)
        counter += 1
    new = tuple(mapping[b] for b in bound)
    if isinstance(label, OutputLabel):
        label = OutputLabel(rename(label.channel, mapping), new, rename(label.payload, mapping))
    else:
        label = InputLabel(rename(label.channel, mapping), new, rename(label.payload, mapping))
    return label, rename(target, mapping), counter


def explore(
    p: Process,
    sig: InstanceSignature,
    depth_bound: int,
    unfold_budget: int = 2,
    expected_events: Iterable[str] | None = None,
) -> tuple[Trace, ...]:
    """All maximal traces of ``p`` up to ``depth_bound`` steps.

    A trace stopped by the bound is marked ``truncated``.  A maximal trace is
    ``complete`` when every expected event id was executed (always, when no
    events are expected).  States are deduplicated by their normal form.
    """
    if depth_bound < 0 or unfold_budget < 0:
        raise ValueError("bounds must be nonnegative")
    expected = frozenset(expected_events) if expected_events is not None else None
    memo: dict[tuple, list[tuple[tuple[Step, ...], Any, bool, bool]]] = {}

    def successors(state: Process, counter: int):
        seen = set()
        out = []
        for label, target in transitions(sig.unit, state, sig, unfold_budget):
            label, target, next_counter = _bind_label(label, target, counter)
            key = (canonical(label), getattr(label, "comm", None), canonical(normalize(target, sig)))
            if key in seen:
                continue
            seen.add(key)
            out.append((label, target, next_counter))
        return out

    def run(state: Process, depth: int, counter: int):
        key = (canonical(normalize(state, sig)), depth, counter)
        if key in memo:
            return memo[key]
        here = frame(state, sig).assertion
        succ = successors(state, counter)
        result: list[tuple[tuple[Step, ...], Any, bool, bool]] = []
        if not succ:
            complete = expected is None or expected <= _done_ids(here)
            result.append(((), here, complete, False))
        elif depth == 0:
            result.append(((), here, False, True))
        else:
            for label, target, next_counter in succ:
                after = frame(target, sig).assertion
                step = Step(label, _new_records(here, after))
                for steps, final, complete, truncated in run(target, depth - 1, next_counter):
                    result.append(((step,) + steps, final, complete, truncated))
        memo[key] = result
        return result

    traces = {Trace(steps, final, complete, truncated) for steps, final, complete, truncated in run(p, depth_bound, 0)}
    return tuple(sorted(traces, key=_trace_key))


def _trace_key(t: Trace) -> tuple:
    return (tuple((render(s.label), tuple(natural_key(i) for i in s.event_ids)) for s in t.steps), t.complete, t.truncated)


def natural_key(text: str) -> tuple:
    return tuple(int(part) if part.isdigit() else part for part in re.split(r"(\d+)", text))


# ---------------------------------------------------------------- pomsets


@dataclass(frozen=True)
class PomsetRun:
    elements: frozenset = frozenset()
    order: frozenset = frozenset()

    def event_ids(self) -> frozenset[str]:
        return frozenset(r.event_id for r in self.elements)

    def id_order(self) -> frozenset[tuple[str, str]]:
        return frozenset((a.event_id, b.event_id) for a, b in self.order)


def extract_pomset(trace_or_assertion: Trace | AnpAssertion) -> PomsetRun:
    psi = trace_or_assertion.final_assertion if isinstance(trace_or_assertion, Trace) else trace_or_assertion
    done = frozenset(getattr(psi, "done", frozenset()))
    depends = frozenset(getattr(psi, "depends", frozenset()))
    ids = {r.event_id for r in done}
    order = set()
    for a, b in depends:
        in_a, in_b = a in done, b in done
        if in_a and in_b:
            order.add((a, b))
            continue
        if (a.event_id in ids and not in_a) or (b.event_id in ids and not in_b):
            if a.event_id in ids and b.event_id in ids:
                raise InconsistentAssertion(f"{render(a)} ≺ {render(b)} does not name the executed records")
    return PomsetRun(done, frozenset(order))


@dataclass(frozen=True)
class Verdict:
    missing_pairs: tuple[tuple[str, str], ...] = ()
    missing_elements: tuple[str, ...] = ()
    extra_elements: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not (self.missing_pairs or self.missing_elements or self.extra_elements)

    @property
    def status(self) -> str:
        if self.ok:
            return "Match"
        if self.missing_pairs:
            return "MissingPairs"
        return "ExtraElements"


def check_desired_run(run: PomsetRun, spec: Any) -> Verdict:
    """Compare a run with the spec's events and desired dependency pairs."""
    wanted = [e.id for e in spec.events]
    have = run.event_ids()
    order = run.id_order()
    return Verdict(
        missing_pairs=tuple(p for p in spec.desired_run if p not in order),
        missing_elements=tuple(e for e in wanted if e not in have),
        extra_elements=tuple(sorted(have - set(wanted), key=natural_key)),
    )


# ---------------------------------------------------------------- PDL


@dataclass(frozen=True)
class Wildcard:
    def __str__(self) -> str:
        return "_"


WILDCARD = Wildcard()


@dataclass(frozen=True)
class RecordPattern:
    event_id: str
    polarity: Polarity | None = None
    channel: Any = None
    payload: Any = WILDCARD

    def matches(self, r: ActionRecord) -> bool:
        if r.event_id != self.event_id:
            return False
        if self.polarity is not None and r.polarity is not self.polarity:
            return False
        if self.channel is not None and r.channel != self.channel:
            return False
        return _payload_matches(self.payload, r.payload)


def _payload_matches(pattern: Any, value: Any) -> bool:
    if isinstance(pattern, Wildcard):
        return True
    if isinstance(pattern, Fn):
        return (
            isinstance(value, Fn)
            and value.symbol == pattern.symbol
            and len(value.args) == len(pattern.args)
            and all(_payload_matches(p, v) for p, v in zip(pattern.args, value.args))
        )
    return pattern == value


@dataclass(frozen=True)
class Happened:
    pattern: RecordPattern


@dataclass(frozen=True)
class Before:
    first: RecordPattern
    second: RecordPattern


PdlQuery = Happened | Before


def eval_pdl(psi: Any, q: PdlQuery) -> bool:
    done = getattr(psi, "done", frozenset())
    if isinstance(q, Happened):
        return any(q.pattern.matches(r) for r in done)
    depends = getattr(psi, "depends", frozenset())
    return any(
        a in done and b in done and q.first.matches(a) and q.second.matches(b) for a, b in depends
    )


_QUERY = re.compile(r"^\s*(happened|before)\s*\(\s*([A-Za-z_][\w']*)\s*(?:,\s*([A-Za-z_][\w']*)\s*)?\)\s*$")


class QuerySyntaxError(ValueError):
    pass


def parse_query(text: str) -> PdlQuery:
    """``happened(ID)`` or ``before(ID, ID)``."""
    m = _QUERY.match(text)
    if m is None:
        raise QuerySyntaxError(f"cannot parse query {text!r}; expected happened(ID) or before(ID, ID)")
    op, a, b = m.groups()
    if op == "happened":
        if b is not None:
            raise QuerySyntaxError("happened takes one event id")
        return Happened(RecordPattern(a))
    if b is None:
        raise QuerySyntaxError("before takes two event ids")
    return Before(RecordPattern(a), RecordPattern(b))


# ---------------------------------------------------------------- output


def trace_document(traces: Sequence[Trace]) -> dict:
    out = []
    for t in traces:
        run = extract_pomset(t)
        out.append(
            {
                "steps": [{"label": render(s.label), "event_ids": list(s.event_ids)} for s in t.steps],
                "complete": t.complete,
                "truncated": t.truncated,
                "pomset": {
                    "elements": sorted(run.event_ids(), key=natural_key),
                    "order": [list(p) for p in sorted(run.id_order(), key=lambda p: (natural_key(p[0]), natural_key(p[1])))],
                },
            }
        )
    return {"traces": out}


def traces_to_json(traces: Sequence[Trace]) -> str:
    return json.dumps(trace_document(traces), indent=2, ensure_ascii=False) + "\n"
