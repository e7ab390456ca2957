import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from psianp.analysis import explore  # noqa: E402
from psianp.ceremony import bundled_source, compile_ceremony, parse_ceremony  # noqa: E402


def cap_variant(kind: str) -> str:
    """CAP source, honest or with one step tampered."""
    src = bundled_source()
    if kind == "honest":
        return src
    if kind == "wrong_password":
        src = src.replace("e6: I_A out kyb2 pair(p_A, z)", "e6: I_A out kyb2 pair(p_guess, z)")
        return src.replace("constants:\n", "constants:\n  public p_guess\n")
    if kind == "tampered_response":
        src = src.replace("e9: Q compute r = hash(s_AB, w)", "e9: Q compute r = hash(s_AB, n_other)")
        return src.replace("constants:\n", "constants:\n  public n_other\n")
    raise ValueError(kind)


_CACHE = {}


def explored(kind: str, depth: int = 64, unfold: int = 2):
    key = (kind, depth, unfold)
    if key not in _CACHE:
        compiled = compile_ceremony(parse_ceremony(cap_variant(kind)))
        _CACHE[key] = compiled, explore(compiled.process, compiled.signature, depth, unfold, compiled.event_ids)
    return _CACHE[key]


@pytest.fixture(scope="session")
def cap():
    return explored("honest")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
