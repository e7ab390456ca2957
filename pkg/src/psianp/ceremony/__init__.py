from importlib import resources

from .compiler import CompiledCeremony, CompileError, compile_ceremony, compile_process
from .diagnostics import Diagnostic, ParseError, Severity
from .model import CeremonySpec
from .parser import parse_ceremony
from .printer import pretty_print
from .validate import validate


def bundled_source(name: str = "cap") -> str:
    """Text of a ceremony shipped with the package."""
    return resources.files("psianp").joinpath("data", f"{name}.anp").read_text(encoding="utf-8")


def bundled_path(name: str = "cap") -> str:
    return str(resources.files("psianp").joinpath("data", f"{name}.anp"))


__all__ = [
    "CeremonySpec",
    "CompileError",
    "CompiledCeremony",
    "Diagnostic",
    "ParseError",
    "Severity",
    "bundled_path",
    "bundled_source",
    "compile_ceremony",
    "compile_process",
    "parse_ceremony",
    "pretty_print",
    "validate",
]
