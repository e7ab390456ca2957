import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psianp.nominal import (
    Fn,
    Name,
    Sort,
    alpha_equivalent,
    canonical,
    fresh_name,
    free_names,
    match_term,
    rename,
    structural_key,
    substitute,
)
from psianp.psi import Input, Nil, Output, Parallel, Restriction

from strategies import CHANNELS, MESSAGES, VARIABLES, processes, terms

x, y = VARIABLES[:2]
a, b = CHANNELS[:2]
m = MESSAGES[0]


def rename_binders(p):
    """Rename every restriction binder to a fresh name (an alpha-variant)."""
    match p:
        case Restriction(n, body):
            n2 = fresh_name(n.sort, hint=n.display)
            return Restriction(n2, rename_binders(rename(body, {n: n2})))
        case Parallel(l, r):
            return Parallel(rename_binders(l), rename_binders(r))
        case Output(c, t, k):
            return Output(c, t, rename_binders(k))
        case Input(c, vs, pat, k):
            return Input(c, vs, pat, rename_binders(k))
    return p


def test_fresh_names_are_new():
    seen = {fresh_name(Sort.MESSAGE) for _ in range(200)}
    assert len(seen) == 200
    avoid = {fresh_name(Sort.CHANNEL)}
    assert fresh_name(Sort.CHANNEL, avoid) not in avoid


def test_display_does_not_affect_identity():
    assert Name(5, Sort.CHANNEL, "p") == Name(5, Sort.CHANNEL, "q")
    assert Name(5, Sort.CHANNEL) != Name(5, Sort.MESSAGE)


def test_substitution_avoids_capture():
    p = Restriction(a, Output(b, x))
    q = substitute(p, {x: a})
    assert a in free_names(q)
    assert isinstance(q, Restriction) and q.name != a
    assert q.body.payload == a


def test_substitution_respects_input_binders():
    p = Input(a, (x,), x, Output(b, Fn("f", (x, y))))
    assert substitute(p, {x: m}) == p
    q = substitute(p, {y: x})
    (v,) = q.variables
    assert v != x and q.continuation.payload == Fn("f", (v, x))


def test_substitution_domain_must_be_variables():
    with pytest.raises(ValueError):
        substitute(Output(a, m), {m: b})


@settings(max_examples=300, deadline=None)
@given(processes())
def test_alpha_variants_are_equivalent(p):
    q = rename_binders(p)
    assert alpha_equivalent(p, q)
    assert free_names(p) == free_names(q)


@settings(max_examples=300, deadline=None)
@given(processes(), st.sampled_from(VARIABLES), terms)
def test_substitution_free_names(p, v, t):
    q = substitute(p, {v: t})
    assert free_names(q) <= (free_names(p) - {v}) | free_names(t)
    if v in free_names(p):
        assert free_names(t) <= free_names(q)
    else:
        assert q == p


@settings(max_examples=300, deadline=None)
@given(processes(), st.sampled_from(VARIABLES), terms)
def test_substitution_respects_alpha(p, v, t):
    assert alpha_equivalent(substitute(p, {v: t}), substitute(rename_binders(p), {v: t}))


@settings(max_examples=200, deadline=None)
@given(processes())
def test_canonical_is_idempotent(p):
    assert canonical(canonical(p)) == canonical(p)


@settings(max_examples=300, deadline=None)
@given(terms, st.dictionaries(st.sampled_from(VARIABLES), terms, max_size=3))
def test_matching_recovers_instances(pattern, sigma):
    value = substitute(pattern, sigma)
    found = match_term(pattern, value, frozenset(VARIABLES))
    assert found is not None
    assert substitute(pattern, found) == value


@settings(max_examples=300, deadline=None)
@given(terms, terms)
def test_structural_key_agrees_with_equality(s, t):
    assert (structural_key(s) == structural_key(t)) == (s == t)


def test_masked_names_compare_equal():
    assert structural_key(Output(a, m), frozenset({a, b})) == structural_key(Output(b, m), frozenset({a, b}))
    assert structural_key(Output(a, m)) != structural_key(Output(b, m))


def test_canonical_binder_names_are_positional():
    n1 = fresh_name(Sort.CHANNEL)
    n2 = fresh_name(Sort.CHANNEL)
    assert canonical(Restriction(n1, Output(n1, m, Nil()))) == canonical(Restriction(n2, Output(n2, m, Nil())))
    assert not alpha_equivalent(Restriction(n1, Output(n1, m)), Restriction(n1, Output(a, m)))
