"""Random ceremony specs: arbitrary well-shaped ones for printing, valid acyclic ones for exploration."""

from __future__ import annotations

import random

from psianp.ceremony.model import (
    CeremonySpec,
    ChannelDecl,
    ConfigDecl,
    ConstantDecl,
    ConstructorDecl,
    EventDecl,
    RuleDecl,
    SApp,
    SName,
)

# Keywords are legal identifiers and must survive printing.
POOL = ["a", "b", "C_1", "x'", "in", "by", "out", "after", "rule", "secret", "known", "public", "run", "ceremony", "fresh", "k9"]


def _ident(rng: random.Random) -> str:
    return rng.choice(POOL) if rng.random() < 0.5 else f"{rng.choice('pqrsXYZ')}{rng.randrange(50)}"


def _term(rng: random.Random, depth: int = 2, binding: bool = False):
    if depth == 0 or rng.random() < 0.5:
        return SName(_ident(rng), binding and rng.random() < 0.4)
    return SApp(_ident(rng), tuple(_term(rng, depth - 1, binding) for _ in range(rng.randrange(0, 3))))


def random_shaped_spec(rng: random.Random) -> CeremonySpec:
    """Syntactically printable, not necessarily valid."""
    configs = []
    for i in range(rng.randrange(0, 5)):
        parent = rng.choice([c.name for c in configs]) if configs and rng.random() < 0.4 else None
        controller = _ident(rng) if rng.random() < 0.6 else None
        configs.append(ConfigDecl(f"{_ident(rng)}_{i}", parent, controller))
    events = []
    for i in range(rng.randrange(0, 6)):
        kind = rng.choice(("out", "in", "fresh", "compute", "test"))
        after = tuple(_ident(rng) for _ in range(rng.randrange(0, 3)))
        cfg = _ident(rng)
        eid = _ident(rng)
        if kind in ("out", "in"):
            events.append(EventDecl(eid, cfg, kind, channel=_ident(rng), term=_term(rng, binding=kind == "in"), after=after))
        elif kind == "fresh":
            events.append(EventDecl(eid, cfg, kind, variable=_ident(rng), after=after))
        elif kind == "compute":
            events.append(EventDecl(eid, cfg, kind, variable=_ident(rng), term=_term(rng), after=after))
        else:
            events.append(EventDecl(eid, cfg, kind, term=_term(rng), rhs=_term(rng), after=after))
    constants = []
    for _ in range(rng.randrange(0, 3)):
        if rng.random() < 0.5:
            constants.append(ConstantDecl(_ident(rng), True, tuple(_ident(rng) for _ in range(rng.randrange(1, 3)))))
        else:
            constants.append(ConstantDecl(_ident(rng)))
    return CeremonySpec(
        name=_ident(rng),
        identities=tuple(_ident(rng) for _ in range(rng.randrange(0, 3))),
        configurations=tuple(configs),
        channels=tuple(
            ChannelDecl(_ident(rng), _ident(rng), _ident(rng), _ident(rng)) for _ in range(rng.randrange(0, 3))
        ),
        constructors=tuple(ConstructorDecl(_ident(rng), rng.randrange(0, 4)) for _ in range(rng.randrange(0, 3))),
        rules=tuple(RuleDecl(_term(rng, binding=True), _term(rng)) for _ in range(rng.randrange(0, 2))),
        constants=tuple(constants),
        events=tuple(events),
        desired_run=tuple((_ident(rng), _ident(rng)) for _ in range(rng.randrange(0, 3))),
    )


CONFIG_TREE = (ConfigDecl("K0", None, "A"), ConfigDecl("K1", "K0", "A"), ConfigDecl("K2", None, "B"))
CHANNELS = tuple(
    ChannelDecl(f"{s.lower()}_{t.lower()}", "cyb", s, t)
    for s in ("K0", "K1", "K2")
    for t in ("K0", "K1", "K2")
    if s != t
)


def _related(a: str, b: str) -> bool:
    return a == b or {a, b} == {"K0", "K1"}


def random_valid_spec(rng: random.Random, max_events: int = 8) -> CeremonySpec:
    """An acyclic spec whose variables are always in scope; tests may fail at run time."""
    events: list[EventDecl] = []
    binder_cfg: dict[str, tuple[str, str]] = {}  # variable -> (event id, config)
    preds: dict[str, set[str]] = {}

    def visible(cfg: str, chosen: set[str]) -> list[str]:
        return [v for v, (eid, c) in binder_cfg.items() if _related(c, cfg) and eid in chosen]

    def closure(ids: set[str]) -> set[str]:
        out = set(ids)
        for i in ids:
            out |= preds[i]
        return out

    def term(cfg: str, scope: list[str]):
        leaves = ["m"] + scope
        if rng.random() < 0.3:
            return SApp("h", (SName(rng.choice(leaves)), SName(rng.choice(leaves))))
        return SName(rng.choice(leaves))

    def add(e: EventDecl) -> None:
        events.append(e)
        preds[e.id] = closure(set(e.after))
        for v in e.bound_variables():
            binder_cfg[v] = (e.id, e.config)

    n = rng.randrange(1, max_events + 1)
    while len(events) < n:
        eid = f"e{len(events) + 1}"
        cfg = rng.choice(("K0", "K1", "K2"))
        ids = [e.id for e in events]
        after = set(rng.sample(ids, k=min(len(ids), rng.randrange(0, 3))))
        scope = visible(cfg, closure(after))
        kind = rng.choice(("fresh", "compute", "test", "send"))
        if kind == "fresh":
            add(EventDecl(eid, cfg, "fresh", variable=f"v{eid}", after=tuple(sorted(after))))
        elif kind == "compute":
            add(EventDecl(eid, cfg, "compute", variable=f"v{eid}", term=term(cfg, scope), after=tuple(sorted(after))))
        elif kind == "test":
            left = term(cfg, scope)
            right = left if rng.random() < 0.7 else term(cfg, scope)
            add(EventDecl(eid, cfg, "test", term=left, rhs=right, after=tuple(sorted(after))))
        else:
            if len(events) + 2 > max_events:
                continue
            target = rng.choice([c for c in ("K0", "K1", "K2") if c != cfg])
            chan = f"{cfg.lower()}_{target.lower()}"
            payload = term(cfg, scope)
            add(EventDecl(eid, cfg, "out", channel=chan, term=payload, after=tuple(sorted(after))))
            rid = f"e{len(events) + 1}"
            if isinstance(payload, SApp) and rng.random() < 0.5:
                pattern = SApp("h", (SName(f"v{rid}a", True), SName(f"v{rid}b", True)))
            else:
                pattern = SName(f"v{rid}", True)
            add(EventDecl(rid, target, "in", channel=chan, term=pattern, after=(eid,)))
    desired = []
    for e in events:
        desired.extend((d, e.id) for d in e.after if rng.random() < 0.5)
    return CeremonySpec(
        name="random",
        identities=("A", "B"),
        configurations=CONFIG_TREE,
        channels=CHANNELS,
        constructors=(ConstructorDecl("h", 2),),
        constants=(ConstantDecl("m"),),
        events=tuple(events),
        desired_run=tuple(desired),
    )
