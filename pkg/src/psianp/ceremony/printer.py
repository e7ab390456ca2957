from __future__ import annotations

from .model import CeremonySpec, EventDecl


def pretty_print(spec: CeremonySpec) -> str:
    """Canonical source text; re-parsing it yields an equal spec."""
    lines = [f"ceremony {spec.name}", ""]

    def section(title: str, entries: list[str]) -> None:
        if entries:
            lines.append(f"{title}:")
            lines.extend(f"  {e}" for e in entries)

    section("identities", list(spec.identities))
    section("configurations", [_config(c.name, c.parent, c.controller) for c in spec.configurations])
    section("channels", [f"{c.name}: {c.kind} {c.source} -> {c.target}" for c in spec.channels])
    section(
        "signature",
        [f"{c.name}/{c.arity}" for c in spec.constructors] + [f"rule {r.lhs} -> {r.rhs}" for r in spec.rules],
    )
    section(
        "constants",
        [f"secret {c.name} known {' '.join(c.known_by)}" if c.secret else f"public {c.name}" for c in spec.constants],
    )
    section("events", [_event(e) for e in spec.events])
    section("run", [f"{a} < {b}" for a, b in spec.desired_run])
    return "\n".join(lines) + "\n"


def _config(name: str, parent: str | None, controller: str | None) -> str:
    text = name
    if parent is not None:
        text += f" in {parent}"
    if controller is not None:
        text += f" by {controller}"
    return text


def _event(e: EventDecl) -> str:
    head = f"{e.id}: {e.config} {e.kind}"
    if e.kind in ("out", "in"):
        body = f" {e.channel} {e.term}"
    elif e.kind == "fresh":
        body = f" {e.variable}"
    elif e.kind == "compute":
        body = f" {e.variable} = {e.term}"
    else:
        body = f" {e.term} = {e.rhs}"
    after = f" after {', '.join(e.after)}" if e.after else ""
    return head + body + after
