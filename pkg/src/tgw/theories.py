"""Decision procedures for the built-in complete theories.

Each theory is complete, decidable, and eliminates quantifiers:

  pureset     -- infinite pure set (equality only)
  dlo         -- dense linear order without endpoints (lt)
  randomgraph -- the random (Rado) graph (adj, irreflexive symmetric)
  equivinf    -- equivalence relation with infinitely many infinite classes

Quantifier elimination works inside out: negations are pushed to literals
(with per-theory literal normalisation), one existential is eliminated from
each DNF cube by the theory's textbook rule, and universals go through
negation.  A complete quantifier-free diagram over finitely many variables
is represented by a partition of the variables plus relation values on the
partition classes; admissibility of the diagram is exactly consistency with
the theory, so enumerating admissible diagrams enumerates complete types.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (InternalConsistencyError, PreconditionError,
                     ResourceCapError, SignatureError)
from .formula import (FALSE, TRUE, And, Atom, Bot, Eq, Exists, Forall,
                      Formula, Implies, Not, Or, Signature, Top, VarRef, conj,
                      disj, free_vars, neg, render_formula, sort_key,
                      substitute_vars)

DEFAULT_GRID_CAP = 12
DNF_CUBE_CAP = 200_000


def _sorted_pair(a: VarRef, b: VarRef) -> tuple[VarRef, VarRef]:
    return (a, b) if (a.tape, a.position) <= (b.tape, b.position) else (b, a)


class Theory:
    """Base for the built-in theories; subclasses fix the signature, the
    literal normal form, the single-existential rule, and the diagram
    enumeration."""

    id: str = ""
    signature: Signature = Signature("empty")

    # every model is infinite, so two distinct elements always exist
    def normalize_literal(self, negated: bool, atom: Formula) -> Formula:
        if isinstance(atom, Eq):
            if atom.lhs == atom.rhs:
                return FALSE if negated else TRUE
            a, b = _sorted_pair(atom.lhs, atom.rhs)
            lit = Eq(a, b)
            return Not(lit) if negated else lit
        raise SignatureError(f"{self.id} has no relation {atom.rel!r}")

    def eliminate_one(self, v: VarRef, lits: list[Formula]) -> Formula:
        raise NotImplementedError

    def rel_assignments(self, num_classes: int) -> list[dict[str, frozenset]]:
        raise NotImplementedError

    def diagram_admissible(self, classes: tuple[int, ...], rels: dict[str, frozenset]) -> bool:
        raise NotImplementedError

    def pair_literals(self, a: VarRef, b: VarRef, forward: bool, backward: bool) -> list[Formula]:
        """Minimal literals pinning one unordered pair of distinct diagram
        classes, given the relation values in both directions; literals the
        theory already implies are omitted."""
        return [self.normalize_literal(True, Eq(a, b))]

    def literal_conflict(self, a: Formula, b: Formula) -> bool:
        """Theory-level contradiction between two normalized literals beyond
        the syntactic complement (used to prune DNF cubes early)."""
        return False

    # shared helpers ---------------------------------------------------------

    def _subst_out(self, v: VarRef, w: VarRef, lits: list[Formula]) -> Formula:
        out = []
        for lit in lits:
            negated = isinstance(lit, Not)
            atom = lit.sub if negated else lit
            out.append(self.normalize_literal(negated, substitute_vars(atom, {v: w})))
        return conj(out)

    def _find_eq(self, v: VarRef, lits: list[Formula]):
        """First positive equality naming v, with its partner variable."""
        for lit in lits:
            if isinstance(lit, Eq):
                return lit, (lit.rhs if lit.lhs == v else lit.lhs)
        return None, None

    def _demands(self, v: VarRef, lits: list[Formula], rel: str):
        """Positive and negative rel-partners of v; negated equalities place
        no constraint on a fresh witness and are dropped."""
        pos, negs = [], []
        for lit in lits:
            negated = isinstance(lit, Not)
            atom = lit.sub if negated else lit
            if isinstance(atom, Eq):
                continue
            if atom.rel != rel:
                raise SignatureError(f"unexpected relation {atom.rel!r}")
            w = atom.args[1] if atom.args[0] == v else atom.args[0]
            (negs if negated else pos).append(w)
        return pos, negs


class PureSet(Theory):
    id = "pureset"
    signature = Signature("pureset")

    def eliminate_one(self, v, lits):
        lit, w = self._find_eq(v, lits)
        if lit is not None:
            return self._subst_out(v, w, [l for l in lits if l is not lit])
        return TRUE  # only inequations remain; the model is infinite

    def rel_assignments(self, num_classes):
        return [{}]

    def diagram_admissible(self, classes, rels):
        return True


class DenseLinearOrder(Theory):
    id = "dlo"
    signature = Signature("dlo", (("lt", 2),))

    def normalize_literal(self, negated, atom):
        if isinstance(atom, Eq):
            if atom.lhs == atom.rhs:
                return FALSE if negated else TRUE
            a, b = _sorted_pair(atom.lhs, atom.rhs)
            if negated:  # a != b  <=>  a < b or b < a
                return disj([Atom("lt", (a, b)), Atom("lt", (b, a))])
            return Eq(a, b)
        a, b = atom.args
        if a == b:
            return TRUE if negated else FALSE
        if negated:  # not a < b  <=>  b < a or a = b
            return disj([Atom("lt", (b, a)), Eq(*_sorted_pair(a, b))])
        return atom

    def eliminate_one(self, v, lits):
        lit, w = self._find_eq(v, lits)
        if lit is not None:
            return self._subst_out(v, w, [l for l in lits if l is not lit])
        lowers = [l.args[0] for l in lits if isinstance(l, Atom) and l.args[1] == v]
        uppers = [l.args[1] for l in lits if isinstance(l, Atom) and l.args[0] == v]
        # density and lack of endpoints: a witness exists iff every lower
        # bound sits below every upper bound
        return conj(self.normalize_literal(False, Atom("lt", (a, b)))
                    for a in lowers for b in uppers)

    def pair_literals(self, a, b, forward, backward):
        # exactly one direction holds between distinct classes; the strict
        # order implies the inequality
        return [Atom("lt", (a, b) if forward else (b, a))]

    def literal_conflict(self, a, b):
        if isinstance(a, Atom) and isinstance(b, Atom):
            return a.args == b.args[::-1]
        if isinstance(a, Atom) and isinstance(b, Eq):
            return set(a.args) == {b.lhs, b.rhs}
        if isinstance(a, Eq) and isinstance(b, Atom):
            return set(b.args) == {a.lhs, a.rhs}
        return False

    def rel_assignments(self, num_classes):
        out = []
        for order in itertools.permutations(range(num_classes)):
            pairs = frozenset((order[i], order[j])
                              for i in range(num_classes) for j in range(i + 1, num_classes))
            out.append({"lt": pairs})
        return out

    def diagram_admissible(self, classes, rels):
        lt = rels["lt"]
        c = max(classes, default=-1) + 1
        for i in range(c):
            if (i, i) in lt:
                return False
            for j in range(c):
                if i != j and ((i, j) in lt) == ((j, i) in lt):
                    return False
                for k in range(c):
                    if (i, j) in lt and (j, k) in lt and (i, k) not in lt:
                        return False
        return True


class RandomGraph(Theory):
    id = "randomgraph"
    signature = Signature("randomgraph", (("adj", 2),))

    def normalize_literal(self, negated, atom):
        if isinstance(atom, Eq):
            return super().normalize_literal(negated, atom)
        a, b = atom.args
        if a == b:
            return TRUE if negated else FALSE  # adjacency is irreflexive
        lit = Atom("adj", _sorted_pair(a, b))
        return Not(lit) if negated else lit

    def eliminate_one(self, v, lits):
        lit, w = self._find_eq(v, lits)
        if lit is not None:
            return self._subst_out(v, w, [l for l in lits if l is not lit])
        pos, negs = self._demands(v, lits, "adj")
        # extension axiom: a fresh witness adjacent to all of pos and none of
        # negs exists iff the two demand sets name distinct elements
        return conj(self.normalize_literal(True, Eq(a, b))
                    for a in pos for b in negs)

    def pair_literals(self, a, b, forward, backward):
        if forward:  # adjacency is irreflexive, so it implies the inequality
            return [Atom("adj", _sorted_pair(a, b))]
        return [self.normalize_literal(True, Eq(a, b)),
                Not(Atom("adj", _sorted_pair(a, b)))]

    def literal_conflict(self, a, b):
        if isinstance(a, Eq):
            a, b = b, a
        if isinstance(a, Atom) and isinstance(b, Eq):
            return a.args == (b.lhs, b.rhs)
        return False

    def rel_assignments(self, num_classes):
        pairs = [(i, j) for i in range(num_classes) for j in range(i + 1, num_classes)]
        out = []
        for bits in itertools.product((False, True), repeat=len(pairs)):
            edges = frozenset(p for p, b in zip(pairs, bits) if b)
            out.append({"adj": edges | frozenset((j, i) for i, j in edges)})
        return out

    def diagram_admissible(self, classes, rels):
        adj = rels["adj"]
        if any((i, i) in adj for i in set(classes)):
            return False
        return all((j, i) in adj for (i, j) in adj)


class EquivInf(Theory):
    id = "equivinf"
    signature = Signature("equivinf", (("equiv", 2),))

    def normalize_literal(self, negated, atom):
        if isinstance(atom, Eq):
            return super().normalize_literal(negated, atom)
        a, b = atom.args
        if a == b:
            return FALSE if negated else TRUE  # reflexive
        lit = Atom("equiv", _sorted_pair(a, b))
        return Not(lit) if negated else lit

    def eliminate_one(self, v, lits):
        lit, w = self._find_eq(v, lits)
        if lit is not None:
            return self._subst_out(v, w, [l for l in lits if l is not lit])
        pos, negs = self._demands(v, lits, "equiv")
        parts = [self.normalize_literal(False, Atom("equiv", (a, b)))
                 for a, b in itertools.combinations(pos, 2)]
        parts += [self.normalize_literal(True, Atom("equiv", (a, b)))
                  for a in pos for b in negs]
        # classes are infinite and there are infinitely many of them, so the
        # pairwise conditions are all that is required
        return conj(parts)

    def pair_literals(self, a, b, forward, backward):
        if forward:  # equivalence is reflexive, so the inequality is needed
            return [Atom("equiv", _sorted_pair(a, b)),
                    self.normalize_literal(True, Eq(a, b))]
        return [Not(Atom("equiv", _sorted_pair(a, b)))]

    def literal_conflict(self, a, b):
        if isinstance(a, Eq):
            a, b = b, a
        if isinstance(a, Not) and isinstance(a.sub, Atom) and isinstance(b, Eq):
            return a.sub.args == (b.lhs, b.rhs)
        return False

    def rel_assignments(self, num_classes):
        out = []
        for part in set_partitions(num_classes):
            pairs = set()
            for i in range(num_classes):
                for j in range(num_classes):
                    if part[i] == part[j]:
                        pairs.add((i, j))
            out.append({"equiv": frozenset(pairs)})
        return out

    def diagram_admissible(self, classes, rels):
        eqv = rels["equiv"]
        cs = sorted(set(classes))
        for i in cs:
            if (i, i) not in eqv:
                return False
            for j in cs:
                if ((i, j) in eqv) != ((j, i) in eqv):
                    return False
                for k in cs:
                    if (i, j) in eqv and (j, k) in eqv and (i, k) not in eqv:
                        return False
        return True


THEORIES: dict[str, Theory] = {t.id: t for t in
                               (PureSet(), DenseLinearOrder(), RandomGraph(), EquivInf())}


def get_theory(theory_id) -> Theory:
    if isinstance(theory_id, Theory):
        return theory_id
    try:
        return THEORIES[theory_id]
    except KeyError:
        raise PreconditionError(f"unsupported theory id {theory_id!r}") from None


def set_partitions(m: int):
    """All partitions of range(m) as restricted-growth strings, in
    lexicographic order."""
    if m == 0:
        yield ()
        return
    rgs = [0] * m

    def rec(i, mx):
        if i == m:
            yield tuple(rgs)
            return
        for c in range(mx + 2):
            rgs[i] = c
            yield from rec(i + 1, max(mx, c))
    yield from rec(1, 0)


# -- quantifier elimination --------------------------------------------------

_QE_CACHE: dict[tuple[str, Formula], Formula] = {}


def _nnf(theory: Theory, f: Formula, negated: bool) -> Formula:
    if isinstance(f, Top):
        return FALSE if negated else TRUE
    if isinstance(f, Bot):
        return TRUE if negated else FALSE
    if isinstance(f, (Atom, Eq)):
        return theory.normalize_literal(negated, f)
    if isinstance(f, Not):
        return _nnf(theory, f.sub, not negated)
    if isinstance(f, And):
        parts = [_nnf(theory, c, negated) for c in f.children]
        return disj(parts) if negated else conj(parts)
    if isinstance(f, Or):
        parts = [_nnf(theory, c, negated) for c in f.children]
        return conj(parts) if negated else disj(parts)
    if isinstance(f, Implies):
        if negated:
            return conj([_nnf(theory, f.lhs, False), _nnf(theory, f.rhs, True)])
        return disj([_nnf(theory, f.lhs, True), _nnf(theory, f.rhs, False)])
    if isinstance(f, Exists):
        body = _nnf(theory, f.body, negated)
        node = Forall if negated else Exists
    else:
        body = _nnf(theory, f.body, negated)
        node = Exists if negated else Forall
    if isinstance(body, (Top, Bot)):
        return body
    return node(f.var, body)


def _conflicts(theory: Theory, cube: frozenset, add: frozenset) -> bool:
    for l in add:
        nl = neg(l)
        for m in cube:
            if m == nl or theory.literal_conflict(l, m) or \
                    theory.literal_conflict(m, l):
                return True
    return False


def _dnf(theory: Theory, f: Formula) -> list[frozenset]:
    if isinstance(f, Top):
        return [frozenset()]
    if isinstance(f, Bot):
        return []
    if isinstance(f, (Atom, Eq, Not)):
        return [frozenset((f,))]
    if isinstance(f, Or):
        out = []
        seen = set()
        for c in f.children:
            for cube in _dnf(theory, c):
                if cube not in seen:
                    seen.add(cube)
                    out.append(cube)
        return out
    if isinstance(f, And):
        cubes = [frozenset()]
        for c in f.children:
            nxt = []
            seen = set()
            for add in _dnf(theory, c):
                for cube in cubes:
                    if _conflicts(theory, cube, add):
                        continue
                    merged = cube | add
                    if merged in seen:
                        continue
                    seen.add(merged)
                    nxt.append(merged)
            if len(nxt) > DNF_CUBE_CAP:
                raise ResourceCapError("DNF cube cap exceeded")
            cubes = nxt
        return cubes
    raise InternalConsistencyError(f"not in NNF: {render_formula(f)}")


def _cube_formula(cube: frozenset) -> Formula:
    return conj(sorted(cube, key=sort_key))


def _exists_one(theory: Theory, v: VarRef, qf: Formula) -> Formula:
    if v not in free_vars(qf):
        return qf
    out = []
    for cube in _dnf(theory, qf):
        with_v = sorted((l for l in cube if v in free_vars(l)), key=sort_key)
        rest = [l for l in cube if v not in free_vars(l)]
        reduced = theory.eliminate_one(v, with_v)
        out.append(conj([_cube_formula(frozenset(rest)), reduced]))
    return disj(out)


def _elim(theory: Theory, f: Formula) -> Formula:
    if isinstance(f, (Top, Bot, Atom, Eq, Not)):
        return f
    if isinstance(f, And):
        return conj(_elim(theory, c) for c in f.children)
    if isinstance(f, Or):
        return disj(_elim(theory, c) for c in f.children)
    if isinstance(f, Exists):
        return _exists_one(theory, f.var, _elim(theory, f.body))
    if isinstance(f, Forall):
        inner = _elim(theory, f.body)
        negated = _nnf(theory, neg(inner), False)
        return _nnf(theory, neg(_exists_one(theory, f.var, negated)), False)
    raise InternalConsistencyError("unexpected node after NNF")


def eliminate_quantifiers(f: Formula, theory) -> Formula:
    """Quantifier-free formula equivalent to `f` modulo the theory, with
    normalised literals and canonically ordered connectives."""
    theory = get_theory(theory)
    key = (theory.id, f)
    hit = _QE_CACHE.get(key)
    if hit is None:
        hit = _elim(theory, _nnf(theory, f, False))
        _QE_CACHE[key] = hit
    return hit


def decide_sentence(f: Formula, theory) -> bool:
    theory = get_theory(theory)
    if free_vars(f):
        raise PreconditionError("decide_sentence requires a sentence (no free variables)")
    result = eliminate_quantifiers(f, theory)
    if isinstance(result, Top):
        return True
    if isinstance(result, Bot):
        return False
    raise InternalConsistencyError(
        f"QE left a non-ground residue: {render_formula(result)}")


# -- complete types ----------------------------------------------------------

@dataclass(frozen=True)
class CompleteType:
    """A complete quantifier-free diagram over a k-tapes-by-n-positions grid.
    Variable (tape, pos) maps to index tape*n + pos; `classes` is the
    equality partition in restricted-growth form and `rels` holds the full
    relation tables on partition classes."""

    theory_id: str
    k: int
    n: int
    classes: tuple[int, ...]
    rels: tuple[tuple[str, frozenset], ...]

    @property
    def theory(self) -> Theory:
        return THEORIES[self.theory_id]

    def rel_table(self, rel: str) -> frozenset:
        for name, pairs in self.rels:
            if name == rel:
                return pairs
        raise SignatureError(f"no relation {rel!r} in diagram")

    def num_classes(self) -> int:
        return max(self.classes, default=-1) + 1

    def var_class(self, v: VarRef) -> int:
        if not (0 <= v.tape < self.k and 0 <= v.position < self.n):
            raise PreconditionError(
                f"variable {v.render()} outside the {self.k}x{self.n} grid")
        return self.classes[v.tape * self.n + v.position]

    def satisfies_qf(self, f: Formula) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Eq):
            return self.var_class(f.lhs) == self.var_class(f.rhs)
        if isinstance(f, Atom):
            pair = (self.var_class(f.args[0]), self.var_class(f.args[1]))
            return pair in self.rel_table(f.rel)
        if isinstance(f, Not):
            return not self.satisfies_qf(f.sub)
        if isinstance(f, And):
            return all(self.satisfies_qf(c) for c in f.children)
        if isinstance(f, Or):
            return any(self.satisfies_qf(c) for c in f.children)
        if isinstance(f, Implies):
            return (not self.satisfies_qf(f.lhs)) or self.satisfies_qf(f.rhs)
        raise PreconditionError("satisfies_qf needs a quantifier-free formula")

    def grid_vars(self) -> list[VarRef]:
        return [VarRef(t, p) for t in range(self.k) for p in range(self.n)]

    def diagram_formula(self) -> Formula:
        """Minimal conjunction pinning the whole diagram: each variable is
        tied to its class representative and each representative pair is
        pinned by the theory's pair literals."""
        theory = self.theory
        vs = self.grid_vars()
        lits = []
        reps: dict[int, VarRef] = {}
        for i, c in enumerate(self.classes):
            if c in reps:
                lits.append(Eq(*_sorted_pair(reps[c], vs[i])))
            else:
                reps[c] = vs[i]
        rel_tables = {rel: self.rel_table(rel) for rel, _ in theory.signature.relations}
        for a in sorted(reps):
            for b in sorted(reps):
                if a >= b:
                    continue
                if rel_tables:
                    for rel, table in rel_tables.items():
                        lits.extend(theory.pair_literals(
                            reps[a], reps[b], (a, b) in table, (b, a) in table))
                else:
                    lits.extend(theory.pair_literals(reps[a], reps[b], False, False))
        return conj(lits)

    def restrict(self, tapes: tuple[int, ...], positions: int | None = None) -> "CompleteType":
        """Sub-diagram on the listed tapes (in the listed order), keeping
        positions < `positions` (defaults to all)."""
        n = self.n if positions is None else positions
        idx = [t * self.n + p for t in tapes for p in range(n)]
        return self._select(idx, len(tapes), n)

    def restrict_vars(self, indices: list[int]) -> "CompleteType":
        """Sub-diagram on an explicit variable-index list, as a 1xm grid."""
        return self._select(indices, 1, len(indices))

    def _select(self, idx: list[int], k: int, n: int) -> "CompleteType":
        remap: dict[int, int] = {}
        classes = []
        for i in idx:
            c = self.classes[i]
            remap.setdefault(c, len(remap))
            classes.append(remap[c])
        rels = []
        for rel, pairs in self.rels:
            kept = frozenset((remap[a], remap[b]) for a, b in pairs
                             if a in remap and b in remap)
            rels.append((rel, kept))
        return CompleteType(self.theory_id, k, n, tuple(classes), tuple(rels))

    def key(self):
        return (self.classes, tuple((r, tuple(sorted(p))) for r, p in self.rels))


def _diagrams(theory: Theory, m: int) -> list[CompleteType]:
    out = []
    for classes in set_partitions(m):
        c = max(classes, default=-1) + 1
        for rels in theory.rel_assignments(c):
            out.append(CompleteType(theory.id, 1, m, classes,
                                    tuple(sorted(rels.items()))))
    out.sort(key=CompleteType.key)
    return out


_DIAGRAM_CACHE: dict[tuple[str, int], list[CompleteType]] = {}


def diagrams_over(theory, m: int, cap: int = DEFAULT_GRID_CAP) -> list[CompleteType]:
    theory = get_theory(theory)
    if m > cap:
        raise ResourceCapError(
            f"grid of {m} variables exceeds the enumeration cap {cap}")
    key = (theory.id, m)
    if key not in _DIAGRAM_CACHE:
        _DIAGRAM_CACHE[key] = _diagrams(theory, m)
    return _DIAGRAM_CACHE[key]


def enumerate_types(theory, k: int, n: int, constraint: Formula = TRUE,
                    cap: int = DEFAULT_GRID_CAP) -> list[CompleteType]:
    """All complete types on a k-tapes-by-n-positions grid consistent with
    the theory and with `constraint`, in deterministic order."""
    theory = get_theory(theory)
    if k < 1 or n < 0:
        raise PreconditionError("need k >= 1 and n >= 0")
    m = k * n
    grid = {VarRef(t, p) for t in range(k) for p in range(n)}
    if not free_vars(constraint) <= grid:
        raise PreconditionError("constraint has variables outside the grid")
    qf = eliminate_quantifiers(constraint, theory)
    out = []
    for d in diagrams_over(theory, m, cap):
        t = CompleteType(theory.id, k, n, d.classes, d.rels)
        if t.satisfies_qf(qf):
            out.append(t)
    return out


def is_consistent(t: CompleteType, theory, extra: Formula = TRUE) -> bool:
    """True iff t's diagram conjoined with `extra` is satisfiable; since the
    diagram is complete, this is evaluation of QE(extra) in the diagram."""
    theory = get_theory(theory)
    grid = {VarRef(tp, p) for tp in range(t.k) for p in range(t.n)}
    if not free_vars(extra) <= grid:
        raise PreconditionError("extra has variables outside the type's grid")
    return t.satisfies_qf(eliminate_quantifiers(extra, theory))


# -- canonical forms ---------------------------------------------------------

CANONICAL_VAR_CAP = 6


def canonical_form(f: Formula, theory, var_cap: int = CANONICAL_VAR_CAP) -> Formula:
    """Semantic normal form: the disjunction of the complete diagrams of the
    formula's satisfying types over exactly the variables it depends on.
    Two formulas are T-equivalent iff their canonical forms are equal."""
    theory = get_theory(theory)
    qf = eliminate_quantifiers(f, theory)
    vs = sorted(free_vars(qf))
    if not vs:
        return qf
    if len(vs) > var_cap:
        raise ResourceCapError(f"canonical form over {len(vs)} variables "
                               f"exceeds the cap {var_cap}")
    to_grid = {v: VarRef(0, i) for i, v in enumerate(vs)}
    mapped = substitute_vars(qf, to_grid)
    sat = [d for d in diagrams_over(theory, len(vs)) if d.satisfies_qf(mapped)]
    vs, sat = _drop_dummies(theory, vs, sat)
    if not sat:
        return FALSE
    if len(sat) == len(diagrams_over(theory, len(vs))) or not vs:
        return TRUE
    back = {VarRef(0, i): v for i, v in enumerate(vs)}
    return disj(substitute_vars(d.diagram_formula(), back) for d in sat)


def depends_on_all_vars(theory, m: int, sat_keys: set) -> bool:
    """True iff the set of m-variable diagrams named by `sat_keys` is not a
    pullback along forgetting any single variable (and is neither empty nor
    everything)."""
    theory = get_theory(theory)
    pool = diagrams_over(theory, m)
    if not sat_keys or len(sat_keys) == len(pool):
        return False
    for drop in range(m):
        keep = [i for i in range(m) if i != drop]
        groups: dict = {}
        for d in pool:
            groups.setdefault(d.restrict_vars(keep).key(), []).append(d)
        if all(all(g.key() in sat_keys for g in members) or
               all(g.key() not in sat_keys for g in members)
               for members in groups.values()):
            return False
    return True


def _drop_dummies(theory: Theory, vs: list[VarRef], sat: list[CompleteType]):
    """Remove variables the satisfying set does not depend on."""
    changed = True
    while changed and vs:
        changed = False
        for drop in range(len(vs) - 1, -1, -1):
            keep = [i for i in range(len(vs)) if i != drop]
            groups: dict = {}
            for d in diagrams_over(theory, len(vs)):
                groups.setdefault(d.restrict_vars(keep).key(), []).append(d)
            satset = {d.key() for d in sat}
            pullback = all(
                all(m.key() in satset for m in members) or
                all(m.key() not in satset for m in members)
                for members in groups.values())
            if pullback:
                new_sat = []
                seen = set()
                for d in sat:
                    r = d.restrict_vars(keep)
                    if r.key() not in seen:
                        seen.add(r.key())
                        new_sat.append(r)
                vs = [vs[i] for i in keep]
                sat = sorted(new_sat, key=CompleteType.key)
                changed = True
                break
    return vs, sat
