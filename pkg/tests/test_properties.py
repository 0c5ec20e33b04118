import pytest

import corpus
from sessionforge import parse_context, parse_global
from sessionforge.association import associated
from sessionforge.core import END
from sessionforge.projection import projected_context
from sessionforge.properties import (
    check_all, check_deadlock_freedom, check_liveness, check_safety, explore, replay,
)
from sessionforge.semantics import TypingContext
from sessionforge.subtyping import YES, async_subtype_bounded
from sessionforge.wellformed import is_balanced_plus

EMPTY = TypingContext.of({})
ENDS = TypingContext.of({"p": ((), END), "q": ((), END)})


def C(s):
    return parse_context(s)


def _replayable(ctx, v):
    assert v.counterexample is not None
    assert replay(ctx, v.counterexample, v.loop_start)


def test_unsafe_context():
    ctx = C(corpus.UNSAFE_CTX)
    v = check_safety(ctx)
    assert v.holds is False
    _replayable(ctx, v)
    assert check_liveness(ctx).holds is False


def test_deadlocked_context():
    ctx = C(corpus.DEADLOCK_CTX)
    assert check_safety(ctx).holds is True
    v = check_deadlock_freedom(ctx)
    assert v.holds is False
    _replayable(ctx, v)
    assert check_liveness(ctx).holds is False


def test_livelocked_context():
    ctx = C(corpus.LIVELOCK_CTX)
    res = check_all(ctx)
    assert res["safety"].holds is True
    assert res["deadlock_freedom"].holds is True
    live = res["liveness"]
    assert live.holds is False and live.kind == "L1"
    assert live.loop_start is not None
    _replayable(ctx, live)


def test_trivial_contexts():
    for ctx in (EMPTY, ENDS):
        for v in check_all(ctx).values():
            assert v.holds is True and not v.bound_hit


def test_ring_context_is_live(ring_ctx0):
    for name, v in check_all(ring_ctx0).items():
        assert v.holds is True and not v.bound_hit, name


def test_stuck_receive_violates_liveness():
    ctx = C("{ p : (eps, q & { l . end }), q : (eps, end) }")
    v = check_liveness(ctx)
    assert v.holds is False and v.kind == "L2"


def test_liveness_respects_fairness():
    # p and r may ping-pong forever, but fairness forces q's send to fire,
    # which in turn discharges s's waiting receive
    ctx = C("{ p : (eps, rec t . r (+) { a . r & { a . t } }), "
            "r : (eps, rec t . p & { a . p (+) { a . t } }), "
            "q : (eps, s (+) { b . end }), s : (eps, q & { b . end }) }")
    v = check_liveness(ctx)
    assert v.holds is True and not v.bound_hit


def test_unbounded_sender_is_unknown_not_refuted():
    ctx = C("{ p : (eps, rec t . r (+) { a . t }), r : (eps, rec t . p & { a . t }), "
            "q : (eps, s (+) { b . end }), s : (eps, q & { b . end }) }")
    res = check_all(ctx)
    assert res["safety"].holds is True and res["safety"].bound_hit
    assert res["deadlock_freedom"].holds is True
    assert res["liveness"].holds is None and res["liveness"].bound_hit


def test_bound_is_reported():
    ctx = C("{ p : (eps, rec t . q (+) { l . t }), q : (eps, end) }")
    sg = explore(ctx, queue_bound=2)
    assert sg.bound_hit
    v = check_liveness(ctx, queue_bound=2)
    assert v.holds is False and v.bound_hit and v.kind == "L1"
    _replayable(ctx, v)


def test_doomed_wait_is_refuted_past_the_bound():
    ctx = C("{ p : (eps, rec t . q (+) { l . t }), q : (eps, p & { l . r & { m . end } }), "
            "r : (eps, end) }")
    v = check_liveness(ctx, queue_bound=2)
    assert v.holds is False and v.kind == "L2"
    _replayable(ctx, v)


def test_counterexample_json(ring_ctx0):
    v = check_liveness(C(corpus.LIVELOCK_CTX))
    doc = v.to_json()
    assert doc["holds"] is False and doc["counterexample"]


CONTEXTS = [corpus.RING_CTX0, corpus.RING_CTX_PROJ, corpus.REORDER_CTX, corpus.UNSAFE_CTX,
            corpus.DEADLOCK_CTX, corpus.LIVELOCK_CTX,
            *(corpus.nondet_ctx(corpus.t_n(n)) for n in range(3)),
            corpus.nondet_ctx(corpus.T_PRIME)]


@pytest.mark.parametrize("src", CONTEXTS)
def test_liveness_implies_safety_and_deadlock_freedom(src):
    res = check_all(C(src))
    if res["liveness"].holds:
        assert res["safety"].holds and res["deadlock_freedom"].holds
    for v in res.values():
        if v.holds is False:
            _replayable(C(src), v)


def test_liveness_downward_closed(ring):
    big = C(corpus.RING_CTX_PROJ)
    small = C(corpus.RING_CTX0)
    for r in "pqr":
        assert async_subtype_bounded(small[r][1], big[r][1], 2) == YES
    assert check_liveness(big).holds is True
    assert check_liveness(small).holds is True


def _global_outruns(g, bound: int, cap: int = 3000) -> bool:
    """Whether the global semantics itself piles up more than ``bound``
    messages between one sender and receiver."""
    from sessionforge.core import canonical_type, role_sets
    from sessionforge.semantics import global_transitions
    from sessionforge.wellformed import mcount

    start = canonical_type(g)
    roles = sorted(role_sets(g).roles)
    seen, work = {start}, [start]
    while work and len(seen) < cap:
        cur = work.pop()
        for p in roles:
            for q in roles:
                c = mcount(cur, p, q)
                if p != q and c is not None and c > bound:
                    return True
        for _, nxt in global_transitions(cur, 3):
            nxt = canonical_type(nxt)
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    return False


@pytest.mark.parametrize("p_type", [corpus.t_n(0), corpus.t_n(1), corpus.T_PRIME])
def test_liveness_downward_closed_nondet(p_type):
    g = parse_global(corpus.NONDET)
    big = projected_context(g)
    small = C(corpus.nondet_ctx(p_type))
    assert async_subtype_bounded(small["p"][1], big["p"][1], 2) == YES
    vb, vs = check_liveness(big), check_liveness(small)
    # p may run arbitrarily far ahead of q in the projected context, so
    # the bounded search cannot settle it; it must not refute it either
    assert vb.holds is None and vb.bound_hit
    assert vs.holds is not False
    if vb.holds:
        assert vs.holds
    if not vs.bound_hit:
        assert vs.holds is True


def test_projected_contexts_pass_everything():
    for src in corpus.GLOBALS:
        g = parse_global(src)
        if not is_balanced_plus(g):
            continue
        ctx = projected_context(g)
        if ctx is None:
            continue
        assert associated(ctx, g, 2) == YES
        res = check_all(ctx)
        assert res["safety"].holds is True, (src, res["safety"].reason)
        for name, v in res.items():
            if v.bound_hit and v.holds is None:
                # only acceptable when the protocol itself lets a sender outrun
                assert _global_outruns(g, 4), (src, name)
            else:
                assert v.holds is True, (src, name, v.reason)
