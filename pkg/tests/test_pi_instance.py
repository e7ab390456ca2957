import random
import time

import pytest

from psianp.analysis import explore
from psianp.nominal import Name, Sort, fresh_name
from psianp.pi import (
    PI_UNIT,
    TRUE,
    PIn,
    PMismatch,
    PNew,
    PNil,
    POut,
    PPar,
    PRep,
    PSum,
    UnsupportedConstruct,
    encode_pi,
    make_pi_instance,
)
from psianp.psi import Case, Input, InputLabel, Output, OutputLabel, Restriction, TermEq

from pi_oracle import canonical_traces, traces as oracle_traces

O, I, N = POut, PIn, PNil()


def par(*ps):
    out = ps[-1]
    for p in reversed(ps[:-1]):
        out = PPar(p, out)
    return out


HAND_PICKED = [
    N,
    O("a", "b"),
    I("a", "x"),
    par(O("a", "b"), I("a", "x")),
    par(O("a", "b"), I("a", "x", O("x", "c"))),
    PNew("n", par(O("a", "n"), I("a", "x", O("x", "c")))),
    PNew("n", O("a", "n", O("n", "b"))),
    par(PNew("n", O("a", "n")), I("a", "x", I("x", "y"))),
    PNew("a", par(O("a", "b"), I("a", "x", O("c", "x")))),
    PSum(O("a", "b"), I("c", "x")),
    par(PSum(O("a", "b"), O("a", "c")), I("a", "x", O("x", "x"))),
    PRep(O("a", "b")),
    par(PRep(I("a", "x")), O("a", "b")),
    par(PRep(O("a", "b")), I("a", "x", I("a", "y"))),
    PNew("a", par(PRep(O("a", "b")), I("a", "x", O("x", "c")))),
    par(O("a", "b", O("a", "c")), I("a", "x", I("a", "y", O("y", "x")))),
    I("a", "x", I("x", "y", O("y", "a"))),
    PNew("n", PNew("m", par(O("n", "m"), I("n", "x", O("x", "n"))))),
    par(I("a", "x", O("x", "b")), I("a", "y", O("y", "c")), O("a", "d")),
    PNew("n", par(O("a", "n"), O("a", "n"))),
    PNew("n", I("n", "x")),
    par(PNew("n", O("n", "b")), I("n", "x")),
]


def random_pi(rng: random.Random, depth: int, bound: list[str]):
    names = ["a", "b"] + bound
    if depth == 0:
        return N
    k = rng.choice((1, 1, 2, 2, 3, 4, 5, 6))
    if k == 1:
        return O(rng.choice(names), rng.choice(names), random_pi(rng, depth - 1, bound))
    if k == 2:
        x = f"x{len(bound)}"
        return I(rng.choice(names), x, random_pi(rng, depth - 1, bound + [x]))
    if k == 3:
        return PPar(random_pi(rng, depth - 1, bound), random_pi(rng, depth - 1, bound))
    if k == 4:
        return PSum(random_pi(rng, depth - 1, bound), random_pi(rng, depth - 1, bound))
    if k == 5:
        n = f"n{len(bound)}"
        return PNew(n, random_pi(rng, depth - 1, bound + [n]))
    return PRep(random_pi(rng, depth - 1, bound))


def random_corpus(count: int, seed: int = 7):
    rng = random.Random(seed)
    return [PPar(random_pi(rng, 3, []), random_pi(rng, 2, [])) for _ in range(count)]


def psi_traces(p, depth: int, budget: int):
    free: dict[str, Name] = {}
    proc = encode_pi(p, free)
    sig = make_pi_instance(free.values())
    back = {v: k for k, v in free.items()}
    out = set()
    for t in explore(proc, sig, depth, budget):
        seen: dict[Name, str] = {}

        def nm(x):
            if x in back:
                return back[x]
            if x not in seen:
                seen[x] = f"${len(seen)}"
            return seen[x]

        labels = []
        for s in t.steps:
            lab = s.label
            if isinstance(lab, OutputLabel):
                labels.append(("out", nm(lab.channel), nm(lab.payload), bool(lab.extruded)))
            elif isinstance(lab, InputLabel):
                labels.append(("in", nm(lab.channel), nm(lab.payload)))
            else:
                labels.append(("tau",))
        out.add((tuple(labels), t.truncated))
    return out, set(free)


def _compare(p, depth=4, budget=1):
    mine, free = psi_traces(p, depth, budget)
    theirs = canonical_traces(oracle_traces(p, depth, budget), free)
    return mine, theirs


@pytest.mark.parametrize("p", HAND_PICKED, ids=[f"hand{i}" for i in range(len(HAND_PICKED))])
def test_trace_sets_match_oracle(p):
    mine, theirs = _compare(p)
    assert mine == theirs


@pytest.mark.parametrize("p", random_corpus(30), ids=[f"rand{i}" for i in range(30)])
def test_random_trace_sets_match_oracle(p):
    mine, theirs = _compare(p)
    assert mine == theirs


def test_oracle_corpus_runs_quickly():
    start = time.perf_counter()
    for p in HAND_PICKED + random_corpus(30):
        _compare(p)
    assert time.perf_counter() - start < 10


def test_encoding_shapes():
    free = {}
    p = encode_pi(PNew("n", I("a", "x", O("x", "n"))), free)
    assert isinstance(p, Restriction)
    inp = p.body
    assert isinstance(inp, Input) and inp.channel == free["a"]
    (x,) = inp.variables
    assert x.sort is Sort.VARIABLE and inp.pattern == x
    assert isinstance(inp.continuation, Output) and inp.continuation.channel == x
    s = encode_pi(PSum(N, N))
    assert isinstance(s, Case) and all(phi == TRUE for phi, _ in s.branches)


def test_mismatch_is_rejected():
    with pytest.raises(UnsupportedConstruct):
        encode_pi(PMismatch("a", "b", N))


def test_pi_entailment_is_name_equality():
    a = fresh_name(Sort.CHANNEL, hint="a")
    b = fresh_name(Sort.CHANNEL, hint="b")
    sig = make_pi_instance([a, b])
    assert sig.entails(PI_UNIT, TermEq(a, a))
    assert not sig.entails(PI_UNIT, TermEq(a, b))
    assert sig.compose(PI_UNIT, PI_UNIT) == PI_UNIT == sig.unit


def test_send_receive_pair_has_tau_and_both_interleavings():
    mine, _ = psi_traces(par(O("a", "m"), I("a", "x")), 2, 0)
    seqs = {t for t, _ in mine}
    assert (("tau",),) in seqs
    assert (("out", "a", "m", False), ("in", "a", "$0")) in seqs
    assert (("in", "a", "$0"), ("out", "a", "m", False)) in seqs
    assert len(seqs) == 3
