from fractions import Fraction

import pytest

from tgw.errors import EvaluationCapError, PreconditionError
from tgw.formula import VarRef, parse_formula
from tgw.models import (DTuple, build_dtuple, evaluate, make_model,
                        tuple_type)
from tgw.theories import decide_sentence, enumerate_types, get_theory


def x(i):
    return VarRef(0, i)


def sig(theory):
    return get_theory(theory).signature


class SeqStub:
    """Minimal enumeration handle: a fixed prefix, then true forever."""

    def __init__(self, theory_id, prefix):
        self.theory = get_theory(theory_id)
        self.prefix = [parse_formula(t, self.theory.signature) for t in prefix]

    def rich_formula(self, n):
        from tgw.formula import TRUE
        if 1 <= n <= len(self.prefix):
            return self.prefix[n - 1]
        return TRUE


def test_evaluate_dlo_atom():
    M = make_model("dlo")
    f = parse_formula("lt(x0,x1)", sig("dlo"))
    assert evaluate(f, M, {x(0): Fraction(1, 2), x(1): Fraction(2, 1)}) is True


def test_evaluate_pureset_fresh_witness():
    M = make_model("pureset")
    f = parse_formula("exists y0. !eq(y0,x0)", sig("pureset"))
    assert evaluate(f, M, {x(0): 5}) is True


def test_evaluate_randomgraph_extension_sentence():
    M = make_model("randomgraph")
    f = parse_formula(
        "forall x0. forall x1. (!eq(x0,x1) -> exists y0."
        "(adj(x0,y0) & !adj(x1,y0) & !eq(y0,x0) & !eq(y0,x1)))",
        sig("randomgraph"))
    assert evaluate(f, M, {}) is True


def test_evaluate_equivinf_class_structure():
    M = make_model("equivinf")
    f = parse_formula("exists y0. (equiv(y0,x0) & !eq(y0,x0))", sig("equivinf"))
    assert evaluate(f, M, {x(0): 0}) is True
    g = parse_formula("exists y0. !equiv(y0,x0)", sig("equivinf"))
    assert evaluate(g, M, {x(0): 0}) is True


def test_evaluate_missing_assignment():
    M = make_model("dlo")
    with pytest.raises(PreconditionError):
        evaluate(parse_formula("lt(x0,x1)", sig("dlo")), M, {x(0): Fraction(0)})


def test_evaluate_depth_cap():
    M = make_model("pureset", max_quantifier_depth=1)
    f = parse_formula("exists y0. exists y1. !eq(y0,y1)", sig("pureset"))
    with pytest.raises(EvaluationCapError):
        evaluate(f, M, {})


def test_tuple_type_examples():
    M = make_model("pureset")
    t = tuple_type(M, [[0], [0]])
    assert t.k == 2 and t.n == 1
    assert t.classes == (0, 0)

    D = make_model("dlo")
    t2 = tuple_type(D, [[Fraction(0), Fraction(1)]])
    assert t2.satisfies_qf(parse_formula("lt(x0,x1)", sig("dlo")))

    G = make_model("randomgraph")
    G.witness_candidates([0])  # posts the one-vertex patterns
    t3 = tuple_type(G, [[0, 1]])
    assert t3.classes == (0, 1)


def test_build_dtuple_level_zero():
    M = make_model("dlo")
    dt = build_dtuple(M, SeqStub("dlo", []), 0)
    assert dt.elements == () and dt.ok


def test_build_dtuple_pureset_cover_and_witness():
    M = make_model("pureset")
    dt = build_dtuple(M, SeqStub("pureset", ["!eq(x0,y0)"]), 2, cover=[0, 1])
    assert dt.elements == (0, 1)
    assert dt.ok


def test_build_dtuple_dlo_least_witness_above():
    M = make_model("dlo")
    dt = build_dtuple(M, SeqStub("dlo", ["lt(x0,y0)"]), 2)
    assert dt.elements[0] == Fraction(0)
    # least-index rational above 0 in the carrier order 0, 1, -1, 1/2, ...
    assert dt.elements[1] == Fraction(1)
    assert dt.ok


def test_build_dtuple_extension_keeps_prefix():
    M = make_model("equivinf")
    seq = SeqStub("equivinf", ["equiv(x0,y0)", "!equiv(x0,y0)"])
    dt = build_dtuple(M, seq, 2, cover=[0, 1, 2])
    ext = build_dtuple(M, seq, 5, cover=[0, 1, 2], base=dt.elements)
    assert ext.elements[:2] == dt.elements
    assert ext.ok


def test_dtuple_certificate_reevaluates():
    M = make_model("dlo")
    seq = SeqStub("dlo", ["lt(x0,y0)", "lt(y0,x0)"])
    dt = build_dtuple(M, seq, 3)
    assert dt.ok
    bad = DTuple("dlo", 2, (Fraction(0), Fraction(-1)), ())
    from tgw.models import certify_dtuple
    assert certify_dtuple(M, seq, bad.elements) == (True, False)


def test_oracle_agreement_on_sentences():
    corpora = {
        "pureset": ["exists x0. exists y0. !eq(x0,y0)",
                    "forall x0. exists y0. eq(x0,y0)",
                    "exists x0. forall y0. eq(x0,y0)"],
        "dlo": ["forall x0. exists y0. lt(x0,y0)",
                "exists x0. forall y0. lt(x0,y0)",
                "forall x0. forall x1. (lt(x0,x1) -> exists y0.(lt(x0,y0) & lt(y0,x1)))"],
        "randomgraph": ["forall x0. exists y0. adj(x0,y0)",
                        "exists x0. forall y0. adj(x0,y0)"],
        "equivinf": ["forall x0. exists y0. (equiv(x0,y0) & !eq(x0,y0))",
                     "exists x0. forall y0. equiv(x0,y0)"],
    }
    for theory, texts in corpora.items():
        M = make_model(theory)
        for text in texts:
            f = parse_formula(text, sig(theory))
            assert evaluate(f, M, {}) == decide_sentence(f, theory), (theory, text)


def test_tuple_types_are_enumerated_types():
    M = make_model("dlo")
    pts = [Fraction(0), Fraction(1), Fraction(1)]
    t = tuple_type(M, [pts])
    keys = {u.key() for u in enumerate_types("dlo", 1, 3)}
    assert t.key() in keys


def test_model_dump_deterministic():
    a = make_model("randomgraph").dump(4)
    b = make_model("randomgraph").dump(4)
    assert a == b
    assert a["theory"] == "randomgraph"
    assert len(a["carrier"]) == 4
