"""``anp`` command line: check, compile, run, verify and query ceremony files."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import TextIO

from .analysis import (
    QuerySyntaxError,
    Trace,
    check_desired_run,
    eval_pdl,
    explore,
    extract_pomset,
    natural_key,
    parse_query,
    trace_document,
)
from .ceremony.compiler import CompiledCeremony, compile_ceremony
from .ceremony.diagnostics import Diagnostic, ParseError, Severity
from .ceremony.parser import parse_ceremony
from .ceremony.validate import validate
from .printing import render

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_IO = 2
EXIT_NO_COMPLETE = 3

COMMANDS = ("check", "compile", "run", "verify", "query")


@dataclass(frozen=True)
class CliConfig:
    command: str
    input_path: str
    depth_bound: int = 64
    unfold_budget: int = 2
    output_format: str = "text"
    query_string: str | None = None


def _nonnegative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="anp", description="Analyse actor-network ceremony specifications.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("input_path", metavar="FILE")
        if name == "query":
            p.add_argument("query_pos", nargs="?", metavar="QUERY")
        p.add_argument("--depth", type=_nonnegative, default=64, dest="depth_bound")
        p.add_argument("--unfold", type=_nonnegative, default=2, dest="unfold_budget")
        p.add_argument("--format", choices=("text", "json"), default="text", dest="output_format")
        p.add_argument("--query", dest="query_string")
    return parser


def parse_config(argv: list[str] | None = None) -> CliConfig:
    ns = build_parser().parse_args(argv)
    query = ns.query_string or getattr(ns, "query_pos", None)
    return CliConfig(ns.command, ns.input_path, ns.depth_bound, ns.unfold_budget, ns.output_format, query)


class _Out:
    def __init__(self, config: CliConfig, stdout: TextIO, stderr: TextIO) -> None:
        self.config = config
        self.stdout = stdout
        self.stderr = stderr
        self.color = os.environ.get("ANP_COLOR", "1") != "0" and stderr.isatty()

    def json(self, doc: dict) -> None:
        self.stdout.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")

    def line(self, text: str = "") -> None:
        self.stdout.write(text + "\n")

    def diagnostic(self, d: Diagnostic) -> None:
        text = d.format(self.config.input_path)
        if self.color:
            code = "31" if d.severity is Severity.ERROR else "33"
            text = f"\x1b[{code}m{text}\x1b[0m"
        self.stderr.write(text + "\n")


def _diag_json(d: Diagnostic) -> dict:
    return {"severity": d.severity.value, "line": d.line, "col": d.col, "code": d.code, "message": d.message}


def _load(config: CliConfig, out: _Out) -> tuple[int, CompiledCeremony | None, list[Diagnostic]]:
    try:
        with open(config.input_path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        out.stderr.write(f"{config.input_path}: {exc.strerror or exc}\n")
        return EXIT_IO, None, []
    try:
        spec = parse_ceremony(data)
    except ParseError as exc:
        return EXIT_FAIL, None, exc.diagnostics
    diags = validate(spec)
    if any(d.severity is Severity.ERROR for d in diags):
        return EXIT_FAIL, None, diags
    return EXIT_OK, compile_ceremony(spec), diags


def _explore(config: CliConfig, compiled: CompiledCeremony) -> tuple[Trace, ...]:
    return explore(compiled.process, compiled.signature, config.depth_bound, config.unfold_budget, compiled.event_ids)


def _step_text(trace: Trace) -> str:
    return " ".join(f"{render(s.label)}[{','.join(s.event_ids)}]" for s in trace.steps) or "(no steps)"


def _status(trace: Trace) -> str:
    return "complete" if trace.complete else "truncated" if trace.truncated else "deadlocked"


def run_cli(config: CliConfig, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    out = _Out(config, stdout or sys.stdout, stderr or sys.stderr)
    query = None
    if config.command == "query":
        if not config.query_string:
            out.stderr.write("query: a query is required (--query 'happened(ID)')\n")
            return EXIT_FAIL
        try:
            query = parse_query(config.query_string)
        except QuerySyntaxError as exc:
            out.stderr.write(f"query: {exc}\n")
            return EXIT_FAIL
    code, compiled, diags = _load(config, out)
    if code == EXIT_IO:
        return code
    if config.output_format == "json" and config.command == "check":
        out.json({"ok": code == EXIT_OK, "diagnostics": [_diag_json(d) for d in diags]})
    else:
        for d in diags:
            out.diagnostic(d)
    if compiled is None:
        if config.output_format == "json" and config.command != "check":
            out.json({"ok": False, "diagnostics": [_diag_json(d) for d in diags]})
        return code
    if config.command == "check":
        if config.output_format == "text":
            out.line(f"{config.input_path}: ok ({len(compiled.event_ids)} events)")
        return EXIT_OK
    if config.command == "compile":
        text = render(compiled.process)
        if config.output_format == "json":
            out.json({"process": text})
        else:
            out.line(text)
        return EXIT_OK

    traces = _explore(config, compiled)
    complete = [t for t in traces if t.complete]
    if config.command == "run":
        if config.output_format == "json":
            out.json(trace_document(traces))
        else:
            for i, t in enumerate(traces, 1):
                run = extract_pomset(t)
                out.line(f"trace {i} ({_status(t)}): {_step_text(t)}")
                pairs = sorted(run.id_order(), key=lambda p: (natural_key(p[0]), natural_key(p[1])))
                out.line("  pomset: " + (", ".join(f"{a} < {b}" for a, b in pairs) or "(empty)"))
        return EXIT_OK if complete else EXIT_NO_COMPLETE

    if config.command == "verify":
        verdicts = [check_desired_run(extract_pomset(t), compiled.spec) for t in complete]
        if config.output_format == "json":
            out.json(
                {
                    "complete_traces": len(complete),
                    "traces": len(traces),
                    "verdicts": [
                        {
                            "status": v.status,
                            "missing_pairs": [list(p) for p in v.missing_pairs],
                            "missing_elements": list(v.missing_elements),
                            "extra_elements": list(v.extra_elements),
                        }
                        for v in verdicts
                    ],
                }
            )
        else:
            out.line(f"{len(traces)} trace(s), {len(complete)} complete")
            for i, v in enumerate(verdicts, 1):
                detail = ""
                if v.missing_pairs:
                    detail += " missing pairs: " + ", ".join(f"{a} < {b}" for a, b in v.missing_pairs)
                if v.missing_elements:
                    detail += " missing events: " + ", ".join(v.missing_elements)
                if v.extra_elements:
                    detail += " extra events: " + ", ".join(v.extra_elements)
                out.line(f"complete trace {i}: {v.status}{detail}")
        if not complete:
            return EXIT_NO_COMPLETE
        return EXIT_OK if all(v.ok for v in verdicts) else EXIT_FAIL

    results = [eval_pdl(t.final_assertion, query) for t in complete]
    if config.output_format == "json":
        out.json({"query": config.query_string, "results": results})
    else:
        for i, r in enumerate(results, 1):
            out.line(f"complete trace {i}: {'true' if r else 'false'}")
    if not complete:
        return EXIT_NO_COMPLETE
    return EXIT_OK if all(results) else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    return run_cli(parse_config(argv))


if __name__ == "__main__":
    sys.exit(main())
