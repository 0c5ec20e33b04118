"""Protocol texts used across the test suite, in the package's ASCII syntax."""

RING = ("rec t . p -> q { add(int) . q -> r { add(int) . r -> p { add(int) . t }, "
        "sub(int) . r -> p { sub(int) . t } } }")
T_P = "rec t . q (+) { add(int) . r & { add(int) . t, sub(int) . t } }"
T_Q = "rec t . p & { add(int) . r (+) { add(int) . t, sub(int) . t } }"
T_R = "rec t . q & { add(int) . p (+) { add(int) . t }, sub(int) . p (+) { sub(int) . t } }"
TOPT_Q = "rec t . r (+) { add(int) . p & { add(int) . t }, sub(int) . p & { add(int) . t } }"

RING_CTX0 = f"{{ p : (eps, {T_P}), q : (eps, {TOPT_Q}), r : (eps, {T_R}) }}"
RING_CTX_PROJ = f"{{ p : (eps, {T_P}), q : (eps, {T_Q}), r : (eps, {T_R}) }}"

# the ring after p has sent add: the message is en route to q
RING_1 = ("p ~> q { add(int) . q -> r { add(int) . r -> p { add(int) . "
          + RING + " }, sub(int) . r -> p { sub(int) . " + RING + " } } }")

# global type with a message already queued from q to p, and a tail loop
COIND = ("p -> r { l1 . q ~> p { l . rec t . p -> q { l1 . t } }, "
         "l2 . q ~> p { l . p -> q { l2 . rec t . p -> q { l1 . t } } } }")
COIND_P = ("r (+) { l1 . q & { l . rec t . q (+) { l1 . t } }, "
           "l2 . q & { l . q (+) { l2 . rec t . q (+) { l1 . t } } } }")
COIND_Q = "p & { l1 . rec t . p & { l1 . t }, l2 . rec t . p & { l1 . t } }"
COIND_R = "p & { l1 . end, l2 . end }"

NONDET = "rec t . p -> q { l1 . q -> r { l1 . t }, l2 . q -> r { l2 . p -> r { l . end } } }"
NONDET_P = "rec t . q (+) { l1 . t, l2 . r (+) { l . end } }"


def t_n(n: int) -> str:
    """p's refinement that sends to r first and then n times l1 before l2."""
    body = "q (+) { l2 . end }"
    for _ in range(n):
        body = f"q (+) {{ l1 . {body} }}"
    return f"r (+) {{ l . {body} }}"


T_PRIME = "rec t . q (+) { l1 . t }"
NONDET_Q = "rec t . p & { l1 . r (+) { l1 . t }, l2 . r (+) { l2 . end } }"
NONDET_R = "rec t . q & { l1 . t, l2 . p & { l . end } }"


def nondet_ctx(p_type: str) -> str:
    return f"{{ p : (eps, {p_type}), q : (eps, {NONDET_Q}), r : (eps, {NONDET_R}) }}"


# context and global type where the receiver of the head message acts first
REORDER_CTX = "{ p : (<q, l>, end), q : (eps, r & { l2 . p & { l . end } }), r : (eps, q (+) { l2 . end }) }"
REORDER_G = "p ~> q { l . r -> q { l2 . end } }"

# the three faulty contexts
UNSAFE_CTX = "{ p : (<q, l>, end), q : (eps, p & { l2 . end }) }"
DEADLOCK_CTX = "{ p : (eps, q & { l . end }) }"
LIVELOCK_CTX = ("{ p : (eps, rec t . q (+) { l . t }), q : (eps, rec t . p & { l . t }), "
                "r : (<p, l2>, end) }")

BALANCED = [
    "p -> q { l0 . q -> p { l1 . end }, l1 . q -> p { l1 . end } }",
    "p -> q { l0 . r -> s { l1 . end }, l1 . r -> s { l1 . end } }",
    "p -> q { l0 . r -> s { l1 . end }, l1 . r -> s { l2 . end } }",
]

# name -> (text, roles whose depth is undefined)
UNBALANCED = {
    "G0": ("p -> q { l0 . r -> s { l1 . end }, l1 . p -> q { l1 . end } }", {"r", "s"}),
    "G1": ("rec t . p -> q { l0 . t, l1 . p -> r { l . end } }", {"r"}),
    "G2": ("rec t . p -> q { l0 . t, l1 . s -> r { l . end } }", {"r", "s"}),
}


def primed(g: str) -> str:
    return f"p -> q {{ l . s -> r {{ l . {g} }} }}"


ENROUTE_FAMILY = {
    "unbalanced": ("rec t . p -> q { l1 . t, l2 . p -> r { l . end } }", False),
    "G1": ("rec t . p ~> q { l . t }", False),
    "G2": ("rec t . p ~> q { l . end }", True),
    "G3": ("p -> q { l1 . p ~> q { l . end } }", False),
    "G4": ("p2 -> q2 { l1 . p -> q { l . end }, l2 . p ~> q { l . end } }", False),
}

# every parseable example, for round-trip checks
GLOBALS = [RING, RING_1, COIND, NONDET, REORDER_G, *BALANCED,
           *(t for t, _ in UNBALANCED.values()), *(t for t, _ in ENROUTE_FAMILY.values())]
LOCALS = [T_P, T_Q, T_R, TOPT_Q, COIND_P, COIND_Q, COIND_R, NONDET_P, T_PRIME,
          NONDET_Q, NONDET_R, *(t_n(n) for n in range(4))]
CONTEXTS = [RING_CTX0, RING_CTX_PROJ, REORDER_CTX, UNSAFE_CTX, DEADLOCK_CTX, LIVELOCK_CTX,
            nondet_ctx(t_n(1))]

RING_P = "rec X . q!add<1> . sum { r?add(x) . X, r?sub(x) . X }"
RING_PQ = "rec X . if nondet then r!add<2> . p?add(y) . X else r!sub<2> . p?add(y) . X"
RING_PR = "rec X . sum { q?add(z) . p!add<z + 3> . X, q?sub(z) . p!sub<z - 3> . X }"
NONDET_PP = ("if nondet then r!l . q!l2 else if nondet then r!l . q!l1 . q!l2 "
             "else rec X . q!l1 . X")
NONDET_PQ = "rec X . sum { p?l1 . r!l1 . X, p?l2 . r!l2 }"
NONDET_PR = "rec X . sum { q?l1 . X, q?l2 . p?l }"
PROCESSES = [RING_P, RING_PQ, RING_PR, NONDET_PP, NONDET_PQ, NONDET_PR, "0",
             "q!a<1 + 2> . p?b(x) . 0", "if x < 3 then q!a<true> else q!b"]
