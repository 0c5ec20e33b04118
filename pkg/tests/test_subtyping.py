import pytest
from hypothesis import given, settings, strategies as st

import corpus
import oracles
from strategies import local_types, skeleton_variants, to_type
from sessionforge import parse_local, queue_subtype, sync_subtype
from sessionforge.core import END, End, Message, Sort, unfold
from sessionforge.semantics import local_transitions
from sessionforge.subtyping import (
    NO, UNKNOWN, YES, Verdict3, act_set, async_subtype_bounded, async_subtype_check, is_siso,
    siso_refine_bounded,
)

SUITE = settings(max_examples=500, derandomize=True, deadline=None)


def L(s):
    return parse_local(s)


def a_chain(n: int):
    body = "p & { b . end }"
    for _ in range(n):
        body = f"p & {{ a . {body} }}"
    return L(body)


COMPACT = L("rec t . p & { a . t, b . end }")


def test_verdict_has_no_truth_value():
    with pytest.raises(TypeError):
        bool(YES)
    assert str(UNKNOWN) == "unknown" and isinstance(NO, Verdict3)


def test_sync_examples(local):
    assert sync_subtype(L("q (+) { add(int) . end }"),
                        L("q (+) { add(int) . end, sub(int) . end }"))
    assert sync_subtype(local("T_P"), local("T_P"))
    assert not sync_subtype(local("TOPT_Q"), local("T_Q"))
    # payloads: covariant on selection, contravariant on branching
    assert sync_subtype(L("q (+) { l(int) . end }"), L("q (+) { l(real) . end }"))
    assert not sync_subtype(L("q (+) { l(real) . end }"), L("q (+) { l(int) . end }"))
    assert sync_subtype(L("q & { l(real) . end }"), L("q & { l(int) . end }"))
    assert not sync_subtype(L("q & { l(int) . end }"), L("q & { l(real) . end }"))


def test_queue_subtype_examples():
    i, r = Message("q", "l", Sort.INT), Message("q", "l", Sort.REAL)
    assert queue_subtype((i,), (r,))
    assert queue_subtype((), ())
    assert not queue_subtype((r,), (i,))
    assert not queue_subtype((i,), ())
    assert queue_subtype((Message("r", "x", Sort.UNIT), i), (r, Message("r", "x", Sort.UNIT)))


def test_act_sets():
    assert act_set(END) == frozenset()
    assert act_set(L("rec t . p & { l . t }")) == {("p", "?")}
    assert act_set(L("p (+) { l . q & { m . end } }")) == {("p", "!"), ("q", "?")}


def test_siso_refinement_examples():
    w1 = L("r (+) { sub(int) . p & { add(int) . end } }")
    w2 = L("p & { add(int) . r (+) { sub(int) . end } }")
    assert siso_refine_bounded(w1, w2, 1) == YES
    assert siso_refine_bounded(END, END, 0) == YES
    bad1, bad2 = L("p & { l . end }"), L("q (+) { m . p & { l . end } }")
    for k in range(4):
        assert siso_refine_bounded(bad1, bad2, k) == NO
    with pytest.raises(ValueError):
        siso_refine_bounded(L("p & { a . end, b . end }"), END, 1)
    assert is_siso(w1) and not is_siso(L("p & { a . end, b . end }"))


def test_ring_async_verdicts(local):
    topt, tq = local("TOPT_Q"), local("T_Q")
    assert async_subtype_bounded(topt, tq, 2) == YES
    assert async_subtype_bounded(tq, topt, 2) == NO
    res = async_subtype_check(topt, tq, 2)
    assert res.window == 1 and res.trace


def test_end_against_input_is_no():
    for k in range(3):
        assert async_subtype_bounded(END, L("p & { l . end }"), k) == NO


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_compactness_family(n):
    assert async_subtype_bounded(COMPACT, a_chain(n), 1) == YES
    assert async_subtype_bounded(COMPACT, a_chain(n), 2) == YES


def test_reordering_window_grows_with_n():
    tp = L(corpus.NONDET_P)
    for n in range(4):
        tn = L(corpus.t_n(n))
        assert async_subtype_bounded(tn, tp, n + 1) == YES
        assert async_subtype_bounded(tn, tp, n) == UNKNOWN
    assert async_subtype_bounded(L(corpus.T_PRIME), tp, 0) == YES


def test_subtyping_is_not_head_matching(local):
    topt, tq = local("TOPT_Q"), local("T_Q")
    la = {a for a, _ in local_transitions(topt)}
    lb = {a for a, _ in local_transitions(tq)}
    assert not la & lb
    assert async_subtype_bounded(topt, tq, 2) == YES


# -- properties ----------------------------------------------------------------

pairs = skeleton_variants(max_members=2).map(lambda sk: sk[1] + sk[1][:1])


@SUITE
@given(local_types)
def test_reflexivity(t):
    assert sync_subtype(t, t)
    for k in (0, 1):
        assert async_subtype_bounded(t, t, k) == YES


@SUITE
@given(pairs)
def test_sync_agrees_with_tree_oracle(ts):
    a, b = ts[0], ts[1]
    assert sync_subtype(a, b) == oracles.bounded_sync_subtype(a, b, 30)


@settings(max_examples=300, derandomize=True, deadline=None)
@given(skeleton_variants(max_members=3))
def test_sync_transitive(sk):
    ts = sk[1]
    if len(ts) < 3:
        return
    a, b, c = ts[:3]
    if sync_subtype(a, b) and sync_subtype(b, c):
        assert sync_subtype(a, c)


@SUITE
@given(pairs)
def test_sync_contained_in_async(ts):
    a, b = ts[0], ts[1]
    if sync_subtype(a, b):
        assert async_subtype_bounded(a, b, 0) == YES


@SUITE
@given(local_types, st.one_of(local_types, st.just(END)))
def test_end_subtyping(t, t2):
    for sub, sup in ((END, t), (t2, t)):
        if isinstance(unfold(sub), End) and async_subtype_bounded(sub, sup, 2) == YES:
            assert isinstance(unfold(sup), End)


@settings(max_examples=200, derandomize=True, deadline=None)
@given(local_types, local_types)
def test_verdicts_monotone_in_bound(a, b):
    v = [async_subtype_bounded(a, b, k) for k in range(3)]
    for lo, hi in zip(v, v[1:]):
        if lo == YES:
            assert hi == YES
        if lo == NO:
            assert hi == NO


def test_loop_through_a_synced_state_is_accepted():
    # one unrolled round of Topt_Q followed by Topt_Q itself
    sub = parse_local(f"r (+) {{ add(int) . p & {{ add(int) . {corpus.TOPT_Q} }} }}")
    assert async_subtype_bounded(sub, parse_local(corpus.T_Q), 1) == YES


def test_loop_that_never_catches_up_is_not_accepted():
    # the subtype may send a forever and never pay the anticipated receive
    sub = parse_local("rec t . r (+) { a . t, c . p & { b . end } }")
    sup = parse_local("p & { b . rec t . r (+) { a . t, c . end } }")
    assert async_subtype_bounded(sub, sup, 3) != YES
