import itertools

import pytest

from tgw.errors import PreconditionError
from tgw.formula import FALSE, TRUE, Eq, VarRef, conj, neg, parse_formula
from tgw.groupoid import (ClopenSet, Refusal, SubGroupoid, act_clopen,
                          base_clopen, build_level_table, cantor_branching,
                          clopen, clopen_equiv, compose_clopen, contains_base,
                          en_clopen, invert_clopen, is_en_invariant,
                          is_subgroupoid, minimal_en_index, project_clopen,
                          source_clopen, target_clopen, theta_fiber,
                          theta_reindex, verify_level_axioms)
from tgw.rich import RichSequence
from tgw.theories import get_theory

SEQS = {t: RichSequence(t) for t in ("pureset", "dlo", "randomgraph", "equivinf")}


def cl(theory, text, arity=None, level=None):
    seq = SEQS[theory]
    return clopen(seq, parse_formula(text, seq.theory.signature), arity=arity,
                  level=level)


def corpus(theory, level=1):
    """Small clopen corpus per theory: atoms, negations, conjunctions over
    the k=2 window at the given level."""
    texts = {"pureset": ["true", "false", "eq(x0,y0)", "!eq(x0,y0)"],
             "dlo": ["true", "false", "eq(x0,y0)", "lt(x0,y0)", "lt(y0,x0)",
                     "(lt(x0,y0) | eq(x0,y0))"],
             "randomgraph": ["true", "false", "eq(x0,y0)", "adj(x0,y0)",
                             "(!adj(x0,y0) & !eq(x0,y0))",
                             "(adj(x0,y0) | eq(x0,y0))"],
             "equivinf": ["true", "false", "eq(x0,y0)", "equiv(x0,y0)",
                          "!equiv(x0,y0)", "(equiv(x0,y0) & !eq(x0,y0))"]}
    return [cl(theory, t, arity=2, level=level) for t in texts[theory]]


def test_compose_examples():
    U = cl("pureset", "eq(x0,y0)", arity=2)
    V = cl("pureset", "eq(x0,y1)", arity=2, level=2)
    assert compose_clopen(U, V).formula == Eq(VarRef(0, 0), VarRef(1, 1))
    # the level base acts as a two-sided unit
    E = en_clopen(SEQS["pureset"], 2)
    for W in corpus("pureset", level=2):
        assert clopen_equiv(compose_clopen(E, W), W)
        assert clopen_equiv(compose_clopen(W, E), W)
    # the empty clopen absorbs
    Z = cl("pureset", "false", arity=2, level=1)
    assert compose_clopen(Z, U).formula == FALSE


def test_invert_examples():
    V = cl("pureset", "eq(x0,y1)", arity=2, level=2)
    assert invert_clopen(V).formula == Eq(VarRef(1, 0), VarRef(0, 1))
    for theory in SEQS:
        for U in corpus(theory):
            assert invert_clopen(invert_clopen(U)) == U


def test_inversion_antihomomorphism():
    for theory in SEQS:
        for U, V in itertools.combinations(corpus(theory), 2):
            lhs = invert_clopen(compose_clopen(U, V))
            rhs = compose_clopen(invert_clopen(V), invert_clopen(U))
            assert clopen_equiv(lhs, rhs), theory


def test_composition_associative_on_corpus():
    for theory in SEQS:
        cs = corpus(theory)[:4]
        for U, V, W in itertools.product(cs, repeat=3):
            lhs = compose_clopen(compose_clopen(U, V), W)
            rhs = compose_clopen(U, compose_clopen(V, W))
            assert clopen_equiv(lhs, rhs), theory


def test_source_examples():
    U = cl("pureset", "eq(x0,y1)", arity=2, level=2)
    assert source_clopen(U).formula == TRUE
    assert source_clopen(base_clopen(SEQS["pureset"], 1)).formula == TRUE
    Z = cl("pureset", "false", arity=2, level=1)
    assert source_clopen(Z).formula == FALSE
    # source of the inverse is the target
    for theory in SEQS:
        for U in corpus(theory):
            assert clopen_equiv(source_clopen(invert_clopen(U)), target_clopen(U))


def test_contains_base_examples():
    assert contains_base(en_clopen(SEQS["pureset"], 1)) is True
    assert contains_base(cl("dlo", "lt(x0,y0)", arity=2)) is False
    assert contains_base(cl("dlo", "true", arity=2, level=1)) is True


def test_subgroupoid_examples():
    E2 = en_clopen(SEQS["pureset"], 2)
    assert isinstance(is_subgroupoid(E2), SubGroupoid)
    bad = is_subgroupoid(cl("dlo", "lt(x0,y0)", arity=2))
    assert isinstance(bad, Refusal) and bad.axiom == "symmetric"
    assert bad.witness is not None
    coarse = is_subgroupoid(cl("equivinf", "true", arity=2, level=1))
    assert isinstance(coarse, SubGroupoid)
    mid = is_subgroupoid(cl("equivinf", "equiv(x0,y0)", arity=2))
    assert isinstance(mid, SubGroupoid)


def test_minimal_en_index():
    E2 = is_subgroupoid(en_clopen(SEQS["dlo"], 2))
    assert minimal_en_index(E2, 4) == 2
    full = is_subgroupoid(cl("dlo", "true", arity=2, level=1))
    assert minimal_en_index(full, 4) == 0
    eq1 = is_subgroupoid(cl("dlo", "eq(x0,y0)", arity=2))
    assert minimal_en_index(eq1, 4) == 1


def test_build_level_table_counts():
    assert len(build_level_table(SEQS["pureset"], 2, 1).points) == 2
    assert len(build_level_table(SEQS["pureset"], 2, 1).base) == 1
    assert len(build_level_table(SEQS["dlo"], 2, 1).points) == 3
    assert len(build_level_table(SEQS["dlo"], 1, 0).points) == 1


def test_verify_level_axioms_all_theories():
    for theory, seq in SEQS.items():
        report = verify_level_axioms(build_level_table(seq, 2, 1))
        assert report["associativity"] and report["neutrality"]
        assert report["inversion"] and report["openness"]


def test_point_clopen_agreement():
    # composition of clopens matches relational composition of point sets
    for theory, seq in SEQS.items():
        tab = build_level_table(seq, 2, 1)
        comp = tab.compose_sets()
        for U, V in itertools.product(corpus(theory), repeat=2):
            pu, pv = tab.points_of(U), tab.points_of(V)
            expected = set()
            for a in pu:
                for b in pv:
                    expected |= comp.get((a, b), set())
            got = tab.points_of(compose_clopen(U, V))
            assert got == frozenset(expected), theory


def test_en_neutrality_on_levels():
    for theory, seq in SEQS.items():
        E = en_clopen(seq, 2)
        for U in corpus(theory, level=2):
            assert clopen_equiv(compose_clopen(U, E), U)


def test_clopen_roundtrip_through_points():
    # formula -> point set -> disjunction of diagrams -> equivalent formula
    for theory, seq in SEQS.items():
        tab = build_level_table(seq, 2, 1)
        for U in corpus(theory):
            back = tab.clopen_of(tab.points_of(U))
            assert clopen_equiv(back, U), theory


def test_en_invariance():
    U = cl("dlo", "lt(x0,y0)", arity=2)
    assert is_en_invariant(U, 1)
    V = cl("dlo", "lt(x0,y1)", arity=2, level=2)
    assert is_en_invariant(V, 2)
    assert not is_en_invariant(V, 1)


def test_theta_reindex():
    seq = SEQS["pureset"]
    tab3 = build_level_table(seq, 3, 1)
    for p in tab3.points:
        base, pairs = theta_reindex(p)
        assert base.k == 1 and len(pairs) == 2
        fiber = theta_fiber(tab3, base, pairs)
        assert tab3.index(p) in fiber
    # all-equal point decomposes into the diagonal pair twice
    diag = [p for p in tab3.points if p.num_classes() == 1][0]
    base, pairs = theta_reindex(diag)
    E = build_level_table(seq, 2, 1)
    assert all(E.points[E.index(g)] in (E.points[i] for i in E.base) for g in pairs)


def test_theta_diagonal_two_tape():
    seq = SEQS["dlo"]
    tab = build_level_table(seq, 2, 1)
    for b in tab.base:
        base, pairs = theta_reindex(tab.points[b])
        assert len(pairs) == 1
        assert tab.index(pairs[0]) in tab.base


def test_project_clopen():
    U = cl("pureset", "!eq(x1,y1)", arity=2, level=2)
    down = project_clopen(U, 1)
    assert down.level == 1 and down.formula == TRUE
    assert project_clopen(U, 2) is U
    Z = cl("pureset", "false", arity=2, level=2)
    assert project_clopen(Z, 1).formula == FALSE


def test_project_matches_point_restriction():
    for theory, seq in SEQS.items():
        tab2 = build_level_table(seq, 2, 2)
        tab1 = build_level_table(seq, 2, 1)
        for U in corpus(theory, level=2):
            down = project_clopen(U, 1)
            expected = {tab1.index(tab2.points[i].restrict((0, 1), 1))
                        for i in tab2.points_of(U)}
            assert tab1.points_of(down) == frozenset(expected), theory


def test_cantor_branching():
    for theory, seq in SEQS.items():
        assert cantor_branching(seq, 2, 2), theory


def test_clopen_window_validation():
    with pytest.raises(PreconditionError):
        ClopenSet(SEQS["dlo"], 1, parse_formula("lt(x0,y0)",
                  get_theory("dlo").signature), 1)
