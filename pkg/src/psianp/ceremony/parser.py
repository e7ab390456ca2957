"""Line-oriented ceremony syntax.

::

    ceremony cap
    identities:
      A
    configurations:
      C_A by A
      S_A in Q by A
    channels:
      cyb1: cyb C_B -> C_A
    signature:
      hash/2
      pair/2
      fst/1
      rule fst(pair(?X, ?Y)) -> X
    constants:
      secret s_AB known C_B S_A
      public m
    events:
      e1: C_B fresh x
      e2: C_B out cyb1 x after e1
      e3: C_A in cyb1 ?y after e2
      e4: Q compute r = hash(s_AB, y) after e3
      e5: Q test r = r after e4
    run:
      e2 < e3

``#`` starts a comment.  ``?x`` marks the occurrence that binds a variable.
"""

from __future__ import annotations

import re

from .diagnostics import Diagnostic, ParseError, error
from .model import (
    CeremonySpec,
    ChannelDecl,
    ConfigDecl,
    ConstantDecl,
    ConstructorDecl,
    EventDecl,
    RuleDecl,
    SApp,
    SName,
    STerm,
)

SECTIONS = ("identities", "configurations", "channels", "signature", "constants", "events", "run")

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<num>\d+)|(?P<op>->|[?(),=<:/]))")


class _Fail(Exception):
    def __init__(self, col: int, message: str) -> None:
        self.col = col
        self.message = message


class _Line:
    """Token cursor over one source line."""

    def __init__(self, text: str, lineno: int) -> None:
        self.lineno = lineno
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if m is None or m.end() == pos:
                bad = pos + len(stripped[pos:]) - len(stripped[pos:].lstrip())
                raise _Fail(bad + 1, f"unexpected character {stripped[bad]!r}")
            kind = m.lastgroup or "op"
            self.tokens.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0
        self.end_col = len(stripped) + 1

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def col(self) -> int:
        tok = self.peek()
        return tok[2] if tok else self.end_col

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[1] == value and tok[0] != "num"

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> None:
        if not self.accept(value):
            raise _Fail(self.col(), f"expected {value!r}{self._found()}")

    def ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok is None or tok[0] != "id":
            raise _Fail(self.col(), f"expected {what}{self._found()}")
        self.i += 1
        return tok[1]

    def number(self) -> int:
        tok = self.peek()
        if tok is None or tok[0] != "num":
            raise _Fail(self.col(), f"expected a number{self._found()}")
        self.i += 1
        return int(tok[1])

    def done(self) -> None:
        if self.peek() is not None:
            raise _Fail(self.col(), f"unexpected {self.peek()[1]!r}")

    def _found(self) -> str:
        tok = self.peek()
        return f", found {tok[1]!r}" if tok else ", found end of line"

    def term(self) -> STerm:
        if self.accept("?"):
            return SName(self.ident("variable name"), binding=True)
        head = self.ident("term")
        if not self.accept("("):
            return SName(head)
        args: list[STerm] = []
        if not self.accept(")"):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
        return SApp(head, tuple(args))


def parse_ceremony(source: str | bytes) -> CeremonySpec:
    """Parse ceremony text; raises :class:`ParseError` carrying located diagnostics."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError([error(1, 1, "P000", f"input is not valid UTF-8 ({exc.reason})")]) from None
    diags: list[Diagnostic] = []
    fields: dict[str, list] = {s: [] for s in SECTIONS}
    locations: dict = {}
    name = "ceremony"
    section: str | None = None
    seen_content = False
    for lineno, raw in enumerate(source.splitlines(), start=1):
        text = raw.split("#", 1)[0]
        if not text.strip():
            continue
        try:
            if "\x00" in text:
                raise _Fail(text.index("\x00") + 1, "unexpected NUL character")
            line = _Line(text, lineno)
            header = _section_header(line)
            if header is not None:
                section = header
                seen_content = True
                continue
            if section is None:
                if not seen_content and line.accept("ceremony"):
                    name = line.ident("ceremony name")
                    line.done()
                    seen_content = True
                    continue
                raise _Fail(line.col(), "entry outside of any section")
            seen_content = True
            _ENTRY[section](line, fields[section], locations)
        except _Fail as fail:
            diags.append(error(lineno, fail.col, "P001", fail.message))
    if not seen_content and not diags:
        raise ParseError([error(1, 1, "P002", "empty specification")])
    spec = CeremonySpec(
        name=name,
        identities=tuple(fields["identities"]),
        configurations=tuple(fields["configurations"]),
        channels=tuple(fields["channels"]),
        constructors=tuple(c for c in fields["signature"] if isinstance(c, ConstructorDecl)),
        rules=tuple(c for c in fields["signature"] if isinstance(c, RuleDecl)),
        constants=tuple(fields["constants"]),
        events=tuple(fields["events"]),
        desired_run=tuple(fields["run"]),
        locations=locations,
    )
    diags.extend(forest_diagnostics(spec))
    if diags:
        raise ParseError(diags)
    return spec


def _section_header(line: _Line) -> str | None:
    if len(line.tokens) == 2 and line.tokens[0][1] in SECTIONS and line.tokens[1][1] == ":":
        return line.tokens[0][1]
    return None


def _loc(line: _Line, col: int | None = None) -> tuple[int, int]:
    return (line.lineno, col if col is not None else line.tokens[0][2])


def _identity(line: _Line, out: list, locations: dict) -> None:
    name = line.ident("identity name")
    line.done()
    locations.setdefault(("identity", name), _loc(line))
    out.append(name)


def _configuration(line: _Line, out: list, locations: dict) -> None:
    name = line.ident("configuration name")
    parent = controller = None
    if line.accept("in"):
        locations.setdefault(("parent", name), _loc(line, line.col()))
        parent = line.ident("parent configuration")
    if line.accept("by"):
        locations.setdefault(("controller", name), _loc(line, line.col()))
        controller = line.ident("identity name")
    line.done()
    locations.setdefault(("configuration", name), _loc(line))
    out.append(ConfigDecl(name, parent, controller))


def _channel(line: _Line, out: list, locations: dict) -> None:
    name = line.ident("channel name")
    line.expect(":")
    kind = line.ident("channel kind")
    source = line.ident("source configuration")
    line.expect("->")
    target = line.ident("target configuration")
    line.done()
    locations.setdefault(("channel", name), _loc(line))
    out.append(ChannelDecl(name, kind, source, target))


def _signature(line: _Line, out: list, locations: dict) -> None:
    if line.at("rule") and len(line.tokens) > 1 and line.tokens[1][1] != "/":
        line.accept("rule")
        lhs = line.term()
        line.expect("->")
        rhs = line.term()
        line.done()
        locations.setdefault(("rule", len([r for r in out if isinstance(r, RuleDecl)])), _loc(line))
        out.append(RuleDecl(lhs, rhs))
        return
    name = line.ident("constructor name")
    line.expect("/")
    arity = line.number()
    line.done()
    locations.setdefault(("constructor", name), _loc(line))
    out.append(ConstructorDecl(name, arity))


def _constant(line: _Line, out: list, locations: dict) -> None:
    if line.accept("public"):
        name = line.ident("constant name")
        line.done()
        locations.setdefault(("constant", name), _loc(line))
        out.append(ConstantDecl(name))
        return
    if not line.accept("secret"):
        raise _Fail(line.col(), "expected 'secret' or 'public'")
    name = line.ident("constant name")
    line.expect("known")
    known = [line.ident("configuration name")]
    while line.peek() is not None:
        known.append(line.ident("configuration name"))
    locations.setdefault(("constant", name), _loc(line))
    out.append(ConstantDecl(name, True, tuple(known)))


def _event(line: _Line, out: list, locations: dict) -> None:
    event_id = line.ident("event id")
    line.expect(":")
    config = line.ident("configuration name")
    kind_col = line.col()
    kind = line.ident("event kind")
    channel = variable = None
    term = rhs = None
    if kind in ("out", "in"):
        locations.setdefault(("event-channel", event_id), _loc(line, line.col()))
        channel = line.ident("channel name")
        term = line.term()
    elif kind == "fresh":
        variable = line.ident("variable name")
    elif kind == "compute":
        variable = line.ident("variable name")
        line.expect("=")
        term = line.term()
    elif kind == "test":
        term = line.term()
        line.expect("=")
        rhs = line.term()
    else:
        raise _Fail(kind_col, f"unknown event kind {kind!r} (expected out, in, fresh, compute or test)")
    after: list[str] = []
    if line.accept("after"):
        after.append(line.ident("event id"))
        while line.accept(","):
            after.append(line.ident("event id"))
    line.done()
    locations.setdefault(("event", event_id), _loc(line))
    out.append(EventDecl(event_id, config, kind, channel, term, variable, rhs, tuple(after)))


def _run(line: _Line, out: list, locations: dict) -> None:
    a = line.ident("event id")
    line.expect("<")
    b = line.ident("event id")
    line.done()
    locations.setdefault(("run", (a, b)), _loc(line))
    out.append((a, b))


_ENTRY = {
    "identities": _identity,
    "configurations": _configuration,
    "channels": _channel,
    "signature": _signature,
    "constants": _constant,
    "events": _event,
    "run": _run,
}


def forest_diagnostics(spec: CeremonySpec) -> list[Diagnostic]:
    """Errors for configurations that (transitively) contain themselves."""
    parents = {c.name: c.parent for c in spec.configurations}
    out = []
    for c in spec.configurations:
        seen = {c.name}
        node = c.parent
        while node is not None and node in parents:
            if node in seen:
                line, col = spec.locations.get(("parent", c.name), spec.locations.get(("configuration", c.name), (1, 1)))
                out.append(error(line, col, "E011", f"configuration {c.name} is contained in itself (containment cycle)"))
                break
            seen.add(node)
            node = parents[node]
    return out
