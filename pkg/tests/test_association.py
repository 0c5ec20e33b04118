import pytest

import corpus
from sessionforge import parse_context, parse_global, parse_local
from sessionforge.association import (
    associated, completeness_probe, explain_association, soundness_probe,
)
from sessionforge.core import END, Message, Sort
from sessionforge.projection import NotBalancedError, projected_context
from sessionforge.semantics import TypingContext, context_transitions, global_step_matching, label_leq
from sessionforge.subtyping import NO, UNKNOWN, YES

NONDET = parse_global(corpus.NONDET)


def test_ring_association(ring, ring_ctx0):
    assert associated(ring_ctx0, ring, 2) == YES
    assert associated(projected_context(ring), ring, 2) == YES


def test_reorder_association():
    assert associated(parse_context(corpus.REORDER_CTX), parse_global(corpus.REORDER_G), 2) == YES


def test_association_failures(ring, ring_ctx0):
    # missing role
    small = TypingContext.of({"p": ((), parse_local(corpus.T_P))})
    v, why = explain_association(small, ring, 2)
    assert v == NO and "lacks" in why
    # queue content not in the projection
    q = ring_ctx0.replace({"p": ((Message("q", "add", Sort.INT),), ring_ctx0["p"][1])})
    assert associated(q, ring, 2) == NO
    # q's reversed refinement is refuted
    bad = ring_ctx0.replace({"q": ((), parse_local(corpus.T_Q))})
    assert associated(bad, ring, 2) == YES
    wrong = parse_context(corpus.RING_CTX0.replace(corpus.T_R, corpus.T_P))
    assert associated(wrong, ring, 2) == NO


def test_association_requires_balanced_plus(ring_ctx0):
    with pytest.raises(NotBalancedError):
        associated(ring_ctx0, parse_global(corpus.UNBALANCED["G1"][0]), 2)


def test_extra_roles_are_allowed(ring, ring_ctx0):
    ctx = ring_ctx0.compose(TypingContext.of({"s": ((), END)}))
    assert associated(ctx, ring, 2) == YES


@pytest.mark.parametrize("n,expected", [(0, YES), (1, YES), (2, UNKNOWN)])
def test_nondet_association_depends_on_window(n, expected):
    ctx = parse_context(corpus.nondet_ctx(corpus.t_n(n)))
    assert associated(ctx, NONDET, 2) == expected
    assert associated(ctx, NONDET, n + 1) == YES


def test_probes_on_trivial_inputs():
    empty = TypingContext.of({})
    rep = completeness_probe(empty, END, steps=10)
    assert rep.verdict == "pass" and rep.steps_checked == 0
    ends = TypingContext.of({"p": ((), END), "q": ((), END)})
    rep = soundness_probe(ends, END, steps=10)
    assert rep.verdict == "pass" and rep.steps_checked == 0


def test_ring_short_probe(ring, ring_ctx0):
    rep = completeness_probe(ring_ctx0, ring, steps=6)
    assert rep.verdict == "pass" and rep.steps_checked == 6


@pytest.mark.parametrize("direction", [completeness_probe, soundness_probe])
def test_ring_probes(ring, ring_ctx0, direction):
    rep = direction(ring_ctx0, ring, steps=400, seed=3)
    assert rep.verdict == "pass", rep.to_json()
    assert rep.states_explored >= 200


def test_reorder_probe_changes_subject():
    ctx, g = parse_context(corpus.REORDER_CTX), parse_global(corpus.REORDER_G)
    assert soundness_probe(ctx, g, steps=50).verdict == "pass"
    assert completeness_probe(ctx, g, steps=50).verdict == "pass"
    # the only context move is r's send, while the global head is q's receive
    (lab, _), = context_transitions(ctx)
    assert lab.subject == "r"


@pytest.mark.parametrize("n", [0, 1])
def test_nondet_probes(n):
    ctx = parse_context(corpus.nondet_ctx(corpus.t_n(n)))
    for probe in (completeness_probe, soundness_probe):
        rep = probe(ctx, NONDET, steps=300, seed=1)
        assert rep.verdict == "pass", rep.to_json()


def test_association_invariant_along_matched_trace(ring, ring_ctx0):
    ctx, g = ring_ctx0, ring
    for _ in range(12):
        lab, ctx2 = sorted(context_transitions(ctx), key=str)[0]
        nxt = [g2 for g2 in global_step_matching(g, lab) if associated(ctx2, g2, 2) == YES]
        assert nxt
        ctx, g = ctx2, sorted(nxt, key=str)[0]


def test_probe_reports_violations():
    # association does not hold, so some context step has no associated match
    ctx = parse_context("{ p : (eps, q (+) { a . end, b . end }), q : (eps, p & { a . end, b . end }) }")
    g = parse_global("p -> q { a . end }")
    rep = completeness_probe(ctx, g, steps=20)
    assert rep.verdict == "fail" and rep.violations
    assert rep.to_json()["violations"][0]["label"]
