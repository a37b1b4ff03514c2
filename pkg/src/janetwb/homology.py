"""Compatibility conditions, Janet sequences, resolutions, ext and torsion.

Every operator matrix here lives in the standard ring.  Completions may pick
another frame; their data is converted back with the inverse frame, which is
exact because frames are constant.

The workhorse is :func:`cc_of_operator`: complete the rows with provenance,
take the Janet CCs of the involutive form and pull them back.  Membership in
a submodule of D^p is decided by involutive normal form (:class:`Submodule`),
so "zero" verdicts for ext are exact, not order-bounded.
"""

from __future__ import annotations

from .errors import NotInvolutive
from .involution import (
    CompletionConfig,
    InvolutiveSystem,
    characters,
    complete_to_involution,
    hilbert_function,
)
from .jets import FrameMap, JetSystem, mat_inverse
from .ore import (
    OperatorMatrix,
    OreRing,
    Prolonger,
    _acc,
    compose,
    form_order,
    jet_key,
    prolong_form,
    unit_mi,
    zero_mi,
)


def _to_std(I: InvolutiveSystem):
    if I.is_identity_frame():
        return lambda f: f
    Fm = FrameMap(mat_inverse(I.frame))
    return Fm.form


def _from_std(I: InvolutiveSystem):
    if I.is_identity_frame():
        return lambda f: f
    Fm = FrameMap(I.frame)
    return Fm.form


def involutive_cc_rows(I: InvolutiveSystem):
    """One CC per (row, non-multiplicative j), as forms over row indices in I's ring.

    Returns (rows, classes) where classes[c] = j is the class of CC c.
    """
    R = I.ring
    out, cls = [], []
    for t in range(len(I.rows)):
        for j in I.nonmultiplicative(t):
            g = prolong_form(R, I.rows[t], j - 1)
            rem, quo = I.normal_form(g, with_quotient=True)
            if rem:
                raise NotInvolutive(f"d{j} of row {t + 1} does not reduce to zero")
            row = {(t, unit_mi(I.n, j - 1)): R.one}
            for key, c in quo.items():
                _acc(row, key, -c)
            out.append(row)
            cls.append(j)
    return out, cls


def compatibility_conditions(I: InvolutiveSystem) -> OperatorMatrix:
    """First-order CC operator of an involutive system, in the standard ring."""
    rows, _ = involutive_cc_rows(I)
    conv = _to_std(I)
    return OperatorMatrix(I.base_ring, [conv(r) for r in rows], len(I.rows))


class JanetSequence:
    """Successive involutive operators; ``stages[0]`` is the system itself.

    ``dims = [m, F0, F1, ...]`` and ``operators[t]`` maps stage t+1 unknowns.
    """

    def __init__(self, dims, operators, stages):
        self.dims = dims
        self.operators = operators
        self.stages = stages

    def euler(self):
        return sum((-1) ** i * d for i, d in enumerate(self.dims))

    def composites_vanish(self):
        for A, B in zip(self.operators, self.operators[1:]):
            if not B.compose(A).is_zero():
                return False
        return True


def janet_sequence(I: InvolutiveSystem) -> JanetSequence:
    if not I.check_criterion():
        raise NotInvolutive("system fails the involution criterion")
    conv = _to_std(I)
    ops = [OperatorMatrix(I.base_ring, [conv(r) for r in I.rows], I.m)]
    dims = [I.m, len(I.rows)]
    stages = [I]
    cur = I
    while any(cur.nonmultiplicative(t) for t in range(len(cur.rows))):
        rows, _ = involutive_cc_rows(cur)
        # rows keep their order so that they match the next stage's unknowns
        nxt = InvolutiveSystem(cur.ring, len(cur.rows), 1, rows, cur.frame, cur.base_ring,
                               sort_rows=False)
        if len(set(nxt.leads)) != len(nxt.leads) or not nxt.check_criterion():
            raise NotInvolutive("CC stage is not involutive")
        ops.append(OperatorMatrix(I.base_ring, [conv(r) for r in rows], len(cur.rows)))
        dims.append(len(rows))
        stages.append(nxt)
        cur = nxt
    return JanetSequence(dims, ops, stages)


# -- general operators ------------------------------------------------------

def _system_of(A: OperatorMatrix):
    return JetSystem(A.ring, A.m, A.rows)


def complete_operator(A: OperatorMatrix, cfg=None, track=True):
    return complete_to_involution(_system_of(A), cfg, track=track)


class Submodule:
    """D-submodule of D^p spanned by rows; membership via involutive normal form."""

    def __init__(self, ring: OreRing, p, generators, cfg=None):
        self.ring = ring
        self.p = p
        self.generators = [dict(g) for g in generators if g]
        self.cfg = cfg
        self._I = None
        self._T = None

    @property
    def involutive(self):
        if self._I is None and self.generators:
            self._I = complete_to_involution(JetSystem(self.ring, self.p, self.generators), self.cfg)
        return self._I

    def contains(self, f):
        if not f:
            return True
        if not self.generators:
            return False
        I = self.involutive
        return not I.normal_form(_from_std(I)(f))

    def contains_all(self, fs):
        return all(self.contains(f) for f in fs)

    def combination(self, f):
        """A D-combination ``{(generator, nu): c}`` equal to f, or None.

        The result is checked by recomposing it with the generators.
        """
        if not f:
            return {}
        if not self.generators:
            return None
        if self._T is None:
            self._T = complete_to_involution(JetSystem(self.ring, self.p, self.generators), self.cfg,
                                             track=True)
        I = self._T
        rem, quo = I.normal_form(_from_std(I)(f), with_quotient=True)
        if rem:
            return None
        combo = compose(self.ring, [_to_std(I)(quo)], I.prov)[0]
        if compose(self.ring, [combo], self.generators)[0] != {k: c for k, c in f.items() if c}:
            raise AssertionError("membership quotient does not recompose")
        return combo

    def equals(self, other: "Submodule"):
        return self.contains_all(other.generators) and other.contains_all(self.generators)


def cc_of_operator(A: OperatorMatrix, cfg=None, minimize=True) -> OperatorMatrix:
    """Generators of all left relations b with b∘A = 0 (rows over A's rows)."""
    R = A.ring
    p = A.p
    if p == 0:
        return OperatorMatrix(R, [], 0)
    nonzero = [t for t, r in enumerate(A.rows) if r]
    gens = [{(t, zero_mi(R.n)): R.one} for t, r in enumerate(A.rows) if not r]
    if not nonzero:
        return OperatorMatrix(R, gens, p)
    # provenance refers to positions among the nonzero rows
    I = complete_to_involution(JetSystem(R, A.m, [A.rows[t] for t in nonzero]), cfg, track=True)
    T = I.prov
    found = list(I.syzygies)
    to_std = _to_std(I)
    from_std = _from_std(I)
    Q, _ = involutive_cc_rows(I)
    PT = Prolonger(R, T)
    found.extend(compose(R, [to_std(q) for q in Q], T, PT))
    for s, t in enumerate(nonzero):
        rem, quo = I.normal_form(from_std(A.rows[t]), with_quotient=True)
        if rem:
            raise NotInvolutive("original row is not reduced by its involutive form")
        comb = compose(R, [to_std(quo)], T, PT)[0]
        row = {(s, zero_mi(R.n)): R.one}
        for key, c in comb.items():
            _acc(row, key, -c)
        found.append(row)
    gens.extend({(nonzero[s], mu): c for (s, mu), c in g.items()} for g in found)
    gens = [g for g in gens if g]
    for g in gens:
        if any(compose(R, [g], A.rows)[0].values()):
            raise AssertionError("relation does not annihilate the operator")
    if minimize:
        gens = minimize_generators(R, p, gens, cfg)
    return OperatorMatrix(R, gens, p)


def minimize_generators(R, p, gens, cfg=None):
    """Drop generators lying in the span of the others, lower orders first."""
    gens = sorted(
        (g for g in gens if g),
        key=lambda g: (form_order(g), len(g), jet_key(max(g, key=jet_key))),
    )
    kept = []
    dedup = []
    for g in gens:
        if g not in dedup:
            dedup.append(g)
    for g in dedup:
        if kept and Submodule(R, p, kept, cfg).contains(g):
            continue
        kept.append(g)
    # a second pass removes earlier generators made redundant by later ones
    changed = True
    while changed and len(kept) > 1:
        changed = False
        for i in range(len(kept) - 1, -1, -1):
            rest = kept[:i] + kept[i + 1:]
            if Submodule(R, p, rest, cfg).contains(kept[i]):
                kept = rest
                changed = True
                break
    return kept


# -- presentations and resolutions ------------------------------------------

class Presentation:
    """M = D^m / D^p·A with a cached involutive form."""

    def __init__(self, matrix: OperatorMatrix, cfg: CompletionConfig = None, names=None):
        self.matrix = matrix
        self.cfg = cfg
        self.names = names
        self._inv = None

    @property
    def ring(self):
        return self.matrix.ring

    @property
    def m(self):
        return self.matrix.m

    @property
    def involutive(self) -> InvolutiveSystem:
        if self._inv is None:
            self._inv = complete_operator(self.matrix, self.cfg, track=False)
            self._inv.names = self.names
        return self._inv

    def characters(self):
        return characters(self.involutive)

    def hilbert_values(self, upto=4):
        I = self.involutive
        return [hilbert_function(I, r) for r in range(upto + 1)], I.q

    def equivalent(self, other: "Presentation", upto=4):
        """Same characters and the same dim R_s over the next ``upto`` orders."""
        a, b = self.involutive, other.involutive
        lo = max(a.q, b.q)
        if _characters_at(a, lo) != _characters_at(b, lo):
            return False
        return all(
            hilbert_function(a, s - a.q) == hilbert_function(b, s - b.q)
            for s in range(lo, lo + upto + 1)
        )

    def submodule(self):
        if getattr(self, "_sub", None) is None:
            self._sub = Submodule(self.ring, self.m, self.matrix.rows, self.cfg)
        return self._sub


def _characters_at(I, q):
    """Characters of the prolonged (still involutive) system at order q >= I.q."""
    alpha = list(I.alpha)
    n = I.n
    for s in range(I.q, q):
        # prolongation of an involutive symbol: alpha^i_{s+1} = sum_{k>=i} alpha^k_s
        alpha = [sum(alpha[k] for k in range(i, n)) for i in range(n)]
    return tuple(alpha)


class FreeResolution:
    def __init__(self, ranks, maps):
        self.ranks = ranks
        self.maps = maps

    def composites_vanish(self):
        return all(B.compose(A).is_zero() for A, B in zip(self.maps, self.maps[1:]))


def free_resolution(P: Presentation) -> FreeResolution:
    """Janet route: the Janet sequence read as module maps."""
    J = janet_sequence(P.involutive)
    return FreeResolution(list(J.dims), list(J.operators))


# above this total rank the dualized Janet sequence is too costly to reduce
AUTO_JANET_LIMIT = 40
ROUTES = ("auto", "janet", "short")


def resolve(P: Presentation, route="auto", cfg=None) -> FreeResolution:
    """Free resolution by route; ``auto`` takes the Janet sequence unless its total rank is large."""
    if route == "auto":
        dims = janet_sequence(P.involutive).dims
        route = "janet" if sum(dims) <= AUTO_JANET_LIMIT else "short"
    if route == "janet":
        return free_resolution(P)
    if route == "short":
        return short_resolution(P, cfg)
    raise ValueError(f"unknown route {route!r}")


def short_resolution(P: Presentation, cfg=None) -> FreeResolution:
    """Resolution starting from the raw rows, each stage the minimized CC of the previous."""
    ranks = [P.m]
    maps = []
    A = OperatorMatrix(P.ring, [r for r in P.matrix.rows if r], P.m)
    while A.p:
        ranks.append(A.p)
        maps.append(A)
        A = cc_of_operator(A, cfg or P.cfg)
    return FreeResolution(ranks, maps)


# -- ext and torsion ---------------------------------------------------------

def adjoint(A: OperatorMatrix) -> OperatorMatrix:
    return A.adjoint()


class ExtEntry:
    def __init__(self, i, zero, generators=None, relations=None, presentation=None):
        self.i = i
        self.zero = zero
        self.generators = generators or []
        self.relations = relations
        self.presentation = presentation

    def to_json(self):
        if self.zero:
            return {"i": self.i, "zero": True}
        return {"i": self.i, "zero": False, "generators": len(self.generators),
                "relations": self.relations.p}


class ExtReport:
    def __init__(self, entries, cd, rank, resolution):
        self.entries = entries
        self.cd = cd
        self.rank = rank
        self.resolution = resolution

    def __getitem__(self, i):
        for e in self.entries:
            if e.i == i:
                return e
        return ExtEntry(i, True)

    def to_json(self):
        return {"ext": [e.to_json() for e in self.entries], "cd": self.cd, "rank": self.rank}


def quotient_presentation(R, r, Zgens, Bgens, cfg=None):
    """Z/B for B ⊂ Z ⊂ D^r: (chosen generators of Z, relation matrix or None if zero)."""
    B = Submodule(R, r, Bgens, cfg)
    outside = [z for z in Zgens if not B.contains(z)]
    if not outside:
        return [], None
    # generators of Z modulo B, greedily dropping those already covered
    chosen = []
    for z in outside:
        if chosen and Submodule(R, r, Bgens + chosen, cfg).contains(z):
            continue
        chosen.append(z)
    stack = OperatorMatrix(R, chosen + list(Bgens), r)
    syz = cc_of_operator(stack, cfg, minimize=False)
    a = len(chosen)
    rels = []
    for row in syz.rows:
        proj = {key: c for key, c in row.items() if key[0] < a}
        if proj:
            rels.append(proj)
    rels = minimize_generators(R, a, rels, cfg)
    return chosen, OperatorMatrix(R, rels, a)


def ext_modules(P: Presentation, resolution: FreeResolution = None, cfg=None) -> ExtReport:
    """Cohomology of the adjoint of a free resolution, spot by spot."""
    cfg = cfg or P.cfg
    res = resolution or free_resolution(P)
    R = P.ring
    ranks, maps = res.ranks, res.maps
    ads = [A.adjoint() for A in maps]
    entries = []
    for i, r in enumerate(ranks):
        if i < len(maps):
            Z = cc_of_operator(ads[i], cfg).rows
        else:
            Z = [{(k, zero_mi(R.n)): R.one} for k in range(r)]
        B = ads[i - 1].rows if i >= 1 else []
        gens, rels = quotient_presentation(R, r, list(Z), list(B), cfg)
        if rels is None:
            entries.append(ExtEntry(i, True))
        else:
            entries.append(ExtEntry(i, False, gens, rels, Presentation(rels, cfg)))
    alpha, beta, cd, rk = P.characters()
    return ExtReport(entries, cd, rk, res)


class TorsionElement:
    def __init__(self, element, annihilator):
        self.element = element
        self.annihilator = annihilator


class TorsionReport:
    def __init__(self, generators, ring, m):
        self.generators = generators
        self.ring = ring
        self.m = m

    @property
    def torsion_free(self):
        return not self.generators


def annihilator(R, m, z, rows, cfg=None):
    """A nonzero scalar P with P∘z in the span of ``rows``, or None."""
    stack = OperatorMatrix(R, [z] + list(rows), m)
    syz = cc_of_operator(stack, cfg, minimize=False)
    best = None
    for s in syz.rows:
        P = {(0, mu): c for (t, mu), c in s.items() if t == 0}
        if P and (best is None or (form_order(P), len(P)) < (form_order(best), len(best))):
            best = P
    return best


def certify_annihilator(R, m, z, P, sub: Submodule):
    Pz = compose(R, [P], [z])[0]
    return sub.contains(Pz)


def torsion_submodule(P: Presentation, cfg=None) -> TorsionReport:
    """t(M) via double duality: rows of CC(ad(CC(ad D))) modulo D."""
    cfg = cfg or P.cfg
    R, m = P.ring, P.m
    A = OperatorMatrix(R, [r for r in P.matrix.rows if r], m)
    if not A.p:
        return TorsionReport([], R, m)
    sub = Submodule(R, m, A.rows, cfg)
    W = cc_of_operator(A.adjoint(), cfg)
    if W.p:
        Dt = cc_of_operator(W.adjoint(), cfg).rows
    else:
        Dt = [{(k, zero_mi(R.n)): R.one} for k in range(m)]
    cands = [z for z in Dt if not sub.contains(z)]
    chosen = []
    for z in cands:
        if chosen and Submodule(R, m, A.rows + chosen, cfg).contains(z):
            continue
        chosen.append(z)
    gens = []
    for z in chosen:
        Pz = annihilator(R, m, z, A.rows, cfg)
        if Pz is None or not certify_annihilator(R, m, z, Pz, sub):
            raise AssertionError("torsion element without a certified annihilator")
        gens.append(TorsionElement(z, Pz))
    return TorsionReport(gens, R, m)


def is_torsion_element(P: Presentation, z, cfg=None):
    """Annihilator of the class of z in M, or None when z is not torsion."""
    R, m = P.ring, P.m
    sub = P.submodule()
    if sub.contains(z):
        return {(0, zero_mi(R.n)): R.one}
    Pz = annihilator(R, m, z, P.matrix.rows, cfg or P.cfg)
    if Pz is not None and certify_annihilator(R, m, z, Pz, sub):
        return Pz
    return None


def differential_rank(P: Presentation):
    return P.characters()[3]
