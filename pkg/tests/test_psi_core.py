from hypothesis import given, settings

from psianp.anp import UNIT, ActionRecord, AnpAssertion, ChannelTerm, ConfigPath, Done, Polarity, anp_compose, make_anp_instance
from psianp.nominal import Fn, Sort, alpha_equivalent, canonical, fresh_name, free_names, rename
from psianp.psi import (
    AssertionProc,
    Case,
    Frame,
    Input,
    InputLabel,
    Nil,
    Output,
    OutputLabel,
    Parallel,
    Replication,
    Restriction,
    Tau,
    TermEq,
    frame,
    normalize,
    par,
    transitions,
)

from strategies import CHANNELS, CONFIGS, MESSAGES, RECORDS, VARIABLES, anp_assertions, processes

SIG = make_anp_instance(RECORDS)
a, b, c = CHANNELS
m0, m1, m2 = MESSAGES
x, y, _ = VARIABLES


def oracle_frame(p):
    """Frame by the definitional table, after renaming every restriction apart."""
    binders = []
    assertions = []

    def walk(q):
        match q:
            case AssertionProc(psi):
                assertions.append(psi)
            case Parallel(l, r):
                walk(l)
                walk(r)
            case Restriction(n, body):
                n2 = fresh_name(n.sort, hint=n.display)
                binders.append(n2)
                walk(rename(body, {n: n2}))
            case _:
                pass  # prefixes, case, replication and nil contribute nothing

    walk(p)
    psi = UNIT
    for s in assertions:
        psi = anp_compose(psi, s)
    return Frame(tuple(binders), psi)


@settings(max_examples=600, deadline=None)
@given(processes())
def test_frame_matches_definitional_table(p):
    assert alpha_equivalent(frame(p, SIG), oracle_frame(p))


@settings(max_examples=200, deadline=None)
@given(anp_assertions())
def test_guarded_assertions_are_not_visible(psi):
    for p in (
        Output(a, m0, AssertionProc(psi)),
        Input(a, (x,), x, AssertionProc(psi)),
        Case(((TermEq(m0, m0), AssertionProc(psi)),)),
        Replication(AssertionProc(psi)),
    ):
        assert frame(p, SIG) == Frame((), UNIT)
    assert frame(AssertionProc(psi), SIG) == Frame((), psi)


def test_frame_binders_do_not_capture_other_side():
    rec_a = ActionRecord("e0", Polarity.OUTPUT, ChannelTerm(ConfigPath(None, (CONFIGS[0],)), a), m0)
    left = AssertionProc(AnpAssertion.of([rec_a]))
    right = Restriction(m0, AssertionProc(AnpAssertion.of([rec_a])))
    f = frame(Parallel(left, right), SIG)
    assert len(f.binders) == 1 and f.binders[0] != m0
    assert m0 in free_names(f)


def test_output_and_input_communicate():
    p = Parallel(Output(a, Fn("f", (m0, m1))), Input(a, (x,), Fn("f", (m0, x)), Output(b, x)))
    steps = transitions(UNIT, p, SIG)
    taus = [(lab, q) for lab, q in steps if isinstance(lab, Tau)]
    assert len(taus) == 1
    (_, q) = taus[0]
    assert alpha_equivalent(normalize(q, SIG), normalize(Output(b, m1), SIG))


def test_pattern_mismatch_blocks_communication():
    p = Parallel(Output(a, Fn("g", (m0, m1))), Input(a, (x,), Fn("f", (m0, x))))
    assert not any(isinstance(lab, Tau) for lab, _ in transitions(UNIT, p, SIG))


def test_case_reads_assertion_from_parallel_component():
    rec = RECORDS[0]
    guarded = Case(((Done(frozenset({rec})), Output(a, m0)),))
    assert transitions(UNIT, guarded, SIG) == []
    enabled = transitions(UNIT, Parallel(AssertionProc(AnpAssertion.of([rec])), guarded), SIG)
    assert [type(lab) for lab, _ in enabled] == [OutputLabel]


def test_restriction_blocks_and_extrudes():
    n = fresh_name(Sort.CHANNEL, hint="n")
    assert transitions(UNIT, Restriction(n, Output(n, m0)), SIG) == []
    ((lab, _),) = transitions(UNIT, Restriction(n, Output(a, n)), SIG)
    assert isinstance(lab, OutputLabel) and len(lab.extruded) == 1
    p = Parallel(Restriction(n, Output(a, n)), Input(a, (x,), x, Output(x, m0)))
    taus = [q for lab, q in transitions(UNIT, p, SIG) if isinstance(lab, Tau)]
    assert len(taus) == 1
    # the received private name can now be used as a channel by the receiver
    after = transitions(UNIT, taus[0], SIG)
    assert after == []  # its only use is an output on the still-private name
    assert isinstance(taus[0], Restriction)


def test_input_label_is_symbolic():
    ((lab, q),) = transitions(UNIT, Input(a, (x,), x, Output(b, x)), SIG)
    assert isinstance(lab, InputLabel)
    (v,) = lab.variables
    assert q == Output(b, v)


def test_replication_needs_budget():
    p = Replication(Output(a, m0))
    assert transitions(UNIT, p, SIG, 0) == []
    assert len(transitions(UNIT, p, SIG, 1)) == 1


@settings(max_examples=300, deadline=None)
@given(processes(), processes())
def test_normal_form_identifies_structural_congruence(p, q):
    n = normalize
    assert n(Parallel(p, q), SIG) == n(Parallel(q, p), SIG)
    assert n(Parallel(p, Nil()), SIG) == n(p, SIG)
    assert n(Restriction(fresh_name(Sort.CHANNEL), p), SIG) == n(p, SIG)
    assert n(n(p, SIG), SIG) == n(p, SIG)


@settings(max_examples=300, deadline=None)
@given(processes(), processes(), processes())
def test_normal_form_is_associative(p, q, r):
    assert normalize(Parallel(p, Parallel(q, r)), SIG) == normalize(Parallel(Parallel(p, q), r), SIG)


def _label_keys(p):
    return sorted("tau" if isinstance(lab, Tau) else repr(canonical(lab)) for lab, _ in transitions(UNIT, p, SIG, 1))


@settings(max_examples=300, deadline=None)
@given(processes())
def test_normal_form_keeps_transitions(p):
    q = normalize(p, SIG)
    assert _label_keys(p) == _label_keys(q)


def test_par_helper():
    assert par() == Nil()
    assert par(Nil(), Output(a, m0)) == Parallel(Nil(), Output(a, m0))
