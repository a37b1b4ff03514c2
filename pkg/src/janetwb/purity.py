"""Codimension, purity filtration, relative localization and parametrization.

A first-order involutive form ``F`` of the module is the common starting
point.  Keeping only the rows of class <= i gives a module over
K[d1..di] whose torsion, pushed forward along z -> jet of y, generates the
level t_{n-i}(M) of the purity filtration.  For an r-pure module the rows of
class <= n-r are parametrized by the adjoint of their compatibility
conditions; the remaining rows turn into the constraints of a module L with
M ⊂ L.
"""

from __future__ import annotations

from itertools import permutations
from random import Random

from .arith import RatFun
from .errors import (
    WorkbenchError,
    EmbeddingNotCertified,
    NotFirstOrder,
    NotInvolutive,
    NotMonomial,
    NotPure,
    NotTorsionCase,
    WrongCodimension,
)
from .homology import (
    Presentation,
    Submodule,
    _from_std,
    cc_of_operator,
    ext_modules,
    free_resolution,
    minimize_generators,
    resolve,
    short_resolution,
    torsion_submodule,
)
from .involution import (
    InvolutiveSystem,
    characters,
    complete_to_involution,
    first_order_reduction,
)
from .jets import Echelon, FrameMap, JetSystem, identity_frame, mat_inverse
from .ore import (
    OperatorMatrix,
    OreRing,
    _acc,
    coef_text,
    compose,
    form_text,
    jet_key,
    mi_add,
    mi_divides,
    mi_sub,
    multi_indices_upto,
    zero_mi,
)


def default_names(m, stem="y"):
    return [stem] if m == 1 else [f"{stem}{k + 1}" for k in range(m)]


def codimension(P: Presentation):
    """Number of trailing zero characters of the completed system."""
    return characters(P.involutive)[2]


# -- first-order form and class restriction -----------------------------------

class FirstOrderData:
    """First-order involutive form of P with the maps between z and y.

    ``I`` is the completed system (frame ``I.frame``), ``F`` the first-order
    involutive system over the frame ring, ``jets[t]`` the y-jet behind z^t.
    """

    def __init__(self, P, I, F, jets):
        self.P = P
        self.I = I
        self.F = F
        self.jets = jets
        self.n = I.n
        self._to_std = (lambda f: f) if I.is_identity_frame() else FrameMap(mat_inverse(I.frame)).form
        self._from_std = (lambda f: f) if I.is_identity_frame() else FrameMap(I.frame).form

    def push(self, f):
        """Form over z (multi-indices of any length <= n) as a form over y, standard ring."""
        out = {}
        n = self.n
        for (t, nu), c in f.items():
            k, mu = self.jets[t]
            nu = tuple(nu) + (0,) * (n - len(nu))
            _acc(out, (k, mi_add(nu, mu)), c)
        return self._to_std(out)

    def pull(self, k):
        """y^k as a K-combination of the z, read off the normal form of the jet."""
        R = self.I.ring
        zero = zero_mi(self.n)
        zindex = {j: t for t, j in enumerate(self.jets)}
        out = {}
        for jet, c in self.I.normal_form({(k, zero): R.one}).items():
            _acc(out, (zindex[jet], zero), c)
        return out


def first_order_system(P: Presentation, cfg=None) -> FirstOrderData:
    I = P.involutive
    FO = first_order_reduction(I)
    S = FO.system
    E = Echelon()
    for f in S.equations:
        E.add(f)
    R = S.ring
    F = InvolutiveSystem(R, S.m, 1, E.sorted_rows(), identity_frame(R.n), R, names=S.names)
    if any(c == 0 for c in F.classes):
        raise NotFirstOrder("first-order form still has zero-order rows")
    if not F.check_criterion():
        raise NotInvolutive("first-order form fails the involution criterion")
    return FirstOrderData(P, I, F, list(FO.jets))


class RestrictedSystem:
    """Rows of class <= i of a first-order involutive system, over K[d1..di]."""

    def __init__(self, ring, m, rows, i, source):
        self.ring = ring
        self.m = m
        self.rows = rows
        self.i = i
        self.source = source

    def matrix(self):
        return OperatorMatrix(self.ring, self.rows, self.m)

    def presentation(self, cfg=None):
        return Presentation(self.matrix(), cfg)

    def involutive(self):
        return InvolutiveSystem(self.ring, self.m, 1, self.rows, identity_frame(self.i), self.ring)

    def is_involutive(self):
        return not self.rows or self.involutive().check_criterion()

    def text(self, names=None):
        return [form_text(self.ring, r, names, "op") for r in self.rows]


def _subring(R: OreRing, idx):
    return OreRing(R.field, len(idx), [R.dirs[j] for j in idx], [R.labels[j] for j in idx])


def restrict_to_classes(F: InvolutiveSystem, i) -> RestrictedSystem:
    if F.q != 1:
        raise NotFirstOrder("class restriction needs a first-order system")
    if any(c == 0 for c in F.classes):
        raise NotFirstOrder("class restriction needs a system without zero-order rows")
    if not 0 <= i <= F.n:
        raise ValueError(f"class bound {i} outside 0..{F.n}")
    S = _subring(F.ring, range(i))
    rows = []
    for r, c in zip(F.rows, F.classes):
        if c <= i:
            rows.append({(k, mu[:i]): a for (k, mu), a in r.items()})
    return RestrictedSystem(S, F.m, rows, i, F)


# -- purity filtration --------------------------------------------------------

class PurityReport:
    def __init__(self, cd, levels, gaps, pure, ring, m, names, first_order, chain_ok, note=""):
        self.cd = cd
        self.levels = levels
        self.gaps = gaps
        self.pure = pure
        self.ring = ring
        self.m = m
        self.names = names
        self.first_order = first_order
        self.chain_ok = chain_ok
        self.note = note

    def generators(self, s):
        return self.levels[s]

    def to_json(self):
        return {
            "cd": self.cd,
            "pure": self.pure,
            "filtration": [
                {"s": s, "generators": [form_text(self.ring, g, self.names) for g in gens],
                 "gap": self.gaps[s]}
                for s, gens in enumerate(self.levels)
            ],
            "note": self.note,
        }


def _independent(R, m, rows, gens, cfg):
    kept = []
    for g in gens:
        if Submodule(R, m, rows + kept, cfg).contains(g):
            continue
        kept.append(g)
    return kept


def purity_test(P: Presentation, cfg=None) -> PurityReport:
    cfg = cfg or P.cfg
    R, m, n = P.ring, P.m, P.ring.n
    names = P.names or default_names(m)
    rows = [r for r in P.matrix.rows if r]
    cd = codimension(P)
    fo = first_order_system(P, cfg)
    zero = zero_mi(n)
    units = _independent(R, m, rows, [{(k, zero): R.one} for k in range(m)], cfg)
    levels = []
    for s in range(n + 1):
        if s < cd:
            gens = list(units)
        elif s == n:
            gens = []
        else:
            RS = restrict_to_classes(fo.F, n - s)
            T = torsion_submodule(RS.presentation(cfg), cfg)
            gens = _independent(R, m, rows, [fo.push(g.element) for g in T.generators], cfg)
        levels.append(gens)
    subs = [Submodule(R, m, rows + g, cfg) for g in levels]
    gaps = [False] + [subs[s - 1].equals(subs[s]) for s in range(1, n + 1)]
    chain_ok = all(subs[s - 1].contains_all(levels[s]) for s in range(1, n + 1))
    whole = Submodule(R, m, rows + units, cfg)
    if cd == 0:
        pure = not levels[0]
    else:
        pure = not levels[cd] and subs[cd - 1].equals(whole)
    note = "" if pure else f"t_{cd}(M) is nonzero; M/t_{cd}(M) is the {cd}-pure part"
    return PurityReport(cd, levels, gaps, pure, R, m, names, fo, chain_ok, note)


def cyclic_codimension(P: Presentation, z, cfg=None):
    """cd of the cyclic submodule D·z ⊂ M, from the annihilating left ideal."""
    cfg = cfg or P.cfg
    R, m = P.ring, P.m
    rows = [r for r in P.matrix.rows if r]
    stack = OperatorMatrix(R, [z] + rows, m)
    syz = cc_of_operator(stack, cfg)
    ann = []
    for s in syz.rows:
        a = {(0, mu): c for (t, mu), c in s.items() if t == 0}
        if a:
            ann.append(a)
    if not ann:
        return 0
    return codimension(Presentation(OperatorMatrix(R, ann, 1), cfg))


# -- relative localization ----------------------------------------------------

def _chi_names(p):
    return tuple(f"chi{j + 1}" for j in range(p))


def _loc_field(field, p):
    return field.extend(_chi_names(p))


def localize_form(f, p, Fchi):
    """Substitute d_j -> chi_j for j <= p; the remaining indices stay derivations."""
    chis = [Fchi.gen(nm) for nm in _chi_names(p)]
    out = {}
    for (k, mu), c in f.items():
        a = Fchi(c)
        for j in range(p):
            if mu[j]:
                a = a * chis[j] ** mu[j]
        _acc(out, (k, tuple(mu[p:])), a)
    return out


def primitive_form(f, key=jet_key):
    """Clear denominators and polynomial content; lead coefficient gets a positive unit."""
    if not f:
        return f
    vals = [c for c in f.values() if isinstance(c, RatFun)]
    if not vals:
        L = max(f, key=key)
        c = f[L]
        return {j: a / c for j, a in f.items()}
    ring = vals[0].ring
    den = ring.one
    for c in vals:
        den = den.lcm(c.den)
    nums = {j: (c.num * den.exquo(c.den) if isinstance(c, RatFun) else ring(c) * den) for j, c in f.items()}
    g = None
    for v in nums.values():
        g = v if g is None else g.gcd(v)
    L = max(f, key=key)
    nums = {j: v.exquo(g) for j, v in nums.items()}
    lc = nums[L].LC
    return {j: RatFun(v.quo_ground(lc), ring.one) for j, v in nums.items()}


def delocalize_form(f, p, Fchi, R: OreRing):
    """Inverse of :func:`localize_form` on chi-polynomial coefficients, into ring R."""
    chis = set(_chi_names(p))
    names = Fchi.names
    out = {}
    for (k, mu_out), c in f.items():
        num = c.num if isinstance(c, RatFun) else None
        if num is None:
            _acc(out, (k, (0,) * p + tuple(mu_out)), R.field(c))
            continue
        if c.den != 1:
            raise ValueError("delocalization needs polynomial coefficients")
        for exp, a in num.terms():
            inner = [0] * p
            coef = R.field(a)
            for name, e in zip(names, exp):
                if not e:
                    continue
                if name in chis:
                    inner[int(name[3:]) - 1] += e
                else:
                    coef = coef * R.field.gen(name) ** e
            _acc(out, (k, tuple(inner) + tuple(mu_out)), coef)
    return out


class LocalizedSystem:
    """System over k(chi)[d_{n-r+1}..d_n] obtained from the rows of F."""

    def __init__(self, r, field, ring, relations, higher, equations, certified, m, leading):
        self.r = r
        self.params = tuple(nm for nm in field.names if nm.startswith("chi"))
        self.field = field
        self.ring = ring
        self.relations = relations
        self.higher = higher
        self.equations = equations
        self.certified = certified
        self.m = m
        self.leading = leading

    def text(self, names=None):
        return [form_text(self.ring, f, names, "op") for f in self.equations]

    def solve(self):
        """Express the unknowns leading in strict-class relations through the others.

        Returns ``{k: form over the free unknowns}`` (zero-order, over k(chi)).
        """
        lead = set(self.leading)
        E = Echelon(key=lambda j: (j[0] in lead, -j[0]))
        for f in self.relations:
            E.add(f)
        out = {}
        for L, row in E.rows.items():
            out[L[0]] = {j: -c for j, c in row.items() if j != L}
        return out


def relative_localization(F: InvolutiveSystem, r) -> LocalizedSystem:
    if F.q != 1 or any(c == 0 for c in F.classes):
        raise NotFirstOrder("relative localization needs a first-order system without zero-order rows")
    cd = characters(F)[2]
    if cd != r:
        raise WrongCodimension(f"system has codimension {cd}, not {r}", {"cd": cd})
    n = F.n
    p = n - r
    R = F.ring
    Fchi = _loc_field(R.field, p)
    outer = OreRing(Fchi, r, [R.dirs[j] for j in range(p, n)], R.labels[p:])
    strict, low, high, leading = [], [], [], []
    for row, c, L in zip(F.rows, F.classes, F.leads):
        loc = localize_form(row, p, Fchi)
        if c == p:
            strict.append(loc)
            leading.append(L[0])
        elif c < p:
            low.append(loc)
        else:
            high.append(loc)
    E = Echelon()
    for f in strict:
        E.add(f)
    certified = all(E.contains(f) for f in low)
    if not certified:
        raise WrongCodimension("low-class rows do not reduce to the strict-class rows")
    E2 = E.copy()
    for f in high:
        E2.add(f)
    equations = [primitive_form(f) for f in E2.sorted_rows()]
    return LocalizedSystem(r, Fchi, outer, strict, high, equations, certified, F.m, leading)


def localization_injective(RS: RestrictedSystem):
    """Constant-coefficient verdict: the primitive basis of the k(chi)-span stays inside."""
    R = RS.ring
    if R.field.nx:
        return None
    p = RS.i
    Fchi = _loc_field(R.field, p)
    E = Echelon()
    for f in RS.rows:
        E.add(localize_form(f, p, Fchi))
    sub = Submodule(R, RS.m, RS.rows)
    return all(sub.contains(delocalize_form(primitive_form(row), p, Fchi, R)) for row in E.sorted_rows())


def localized_parametric_jets(P: Presentation, cfg=None):
    """Parametric jets of the system localized in d1..d_{n-r} (finite for r-pure M).

    The jets are reported with the labels of the remaining derivations.
    """
    cfg = cfg or P.cfg
    I = P.involutive
    r = characters(I)[2]
    n = I.n
    p = n - r
    R = I.ring
    Fchi = _loc_field(R.field, p)
    outer = OreRing(Fchi, r, [R.dirs[j] for j in range(p, n)], R.labels[p:])
    rows = [localize_form(f, p, Fchi) for f in I.rows]
    J = complete_to_involution(JetSystem(outer, I.m, rows), cfg)
    if any(J.alpha) or not J.is_identity_frame():
        raise WrongCodimension("localized system is not of finite type", {"alpha": J.alpha})
    par = [(k, mu) for mu in multi_indices_upto(r, J.q) for k in range(I.m)
           if not J.is_principal((k, mu))]
    par.sort(key=jet_key)
    return par, outer, J


# -- relative parametrization -------------------------------------------------

class Parametrization:
    """y = P z with constraints C on z; ``certificate[t]`` writes Φ_t∘P over C."""

    def __init__(self, r, constraints, matrix, certificate, localized_map, resolution_ranks,
                 stages_ok, names, potentials, loc_ring):
        self.r = r
        self.constraints = constraints
        self.matrix = matrix
        self.certificate = certificate
        self.localized_map = localized_map
        self.resolution_ranks = resolution_ranks
        self.stages_ok = stages_ok
        self.names = names
        self.potentials = potentials
        self.loc_ring = loc_ring

    @property
    def alpha(self):
        return self.constraints.m

    def constraint_text(self):
        return self.constraints.text_rows(self.potentials)

    def map_text(self):
        return [f"{y} = {form_text(self.matrix.ring, row, self.potentials)}"
                for y, row in zip(self.names, self.matrix.rows)]

    def localized_text(self):
        return [f"{y} = {form_text(self.loc_ring, row, self.potentials)}"
                for y, row in zip(self.names, self.localized_map)]

    def verify(self, P: Presentation):
        """Recompute every certificate identity Φ∘P = Σ c·C exactly."""
        R = self.matrix.ring
        lhs = compose(R, [r for r in P.matrix.rows if r], self.matrix.rows)
        rhs = compose(R, self.certificate, self.constraints.rows)
        return lhs == rhs

    def to_json(self):
        return {"constraints": self.constraint_text(), "map": self.map_text()}


def _right_mul(R, col, c):
    """Column (form keyed by (k, mu)) composed on the right with the function c."""
    byk = {}
    for (k, mu), a in col.items():
        byk.setdefault(k, {})[(0, mu)] = a
    out = {}
    for k, entry in byk.items():
        for (_, mu), a in compose(R, [entry], [{(0, zero_mi(R.n)): c}])[0].items():
            _acc(out, (k, mu), a)
    return out


def _column_normalize(R, cols, pivot_keys):
    """Column reduction by right composition; pivots are chosen among ``pivot_keys``."""
    done = []
    for col in cols:
        col = dict(col)
        for piv, pc in done:
            c = col.get(piv)
            if c:
                col = _sub(col, _right_mul(R, pc, c))
        # a potential that no unknown sees keeps a pivot among its own entries
        cand = [j for j in col if pivot_keys(j)] or list(col)
        if not cand:
            raise AssertionError("parametrizing column vanishes")
        L = max(cand, key=_tagged_key)
        col = _right_mul(R, col, R.one / col[L])
        for t, (piv, pc) in enumerate(done):
            c = pc.get(L)
            if c:
                done[t] = (piv, _sub(pc, _right_mul(R, col, c)))
        done.append((L, col))
    done.sort(key=lambda d: (pivot_keys(d[0]), _tagged_key(d[0])), reverse=True)
    return [c for _, c in done]


def _tagged_key(j):
    (_, k), mu = j
    return jet_key((k, mu))


def _sub(f, g):
    out = dict(f)
    for j, a in g.items():
        _acc(out, j, -a)
    return out


def _comm_rank(R, p, cols):
    Fchi = _loc_field(R.field, p)
    E = Echelon()
    for col in cols:
        E.add(localize_form(col, p, Fchi))
    return len(E)


def left_divide(R: OreRing, Q0, Q):
    """H with Q0∘H = Q for scalar operators given as ``{mu: c}``, or None."""
    lam = max(Q0, key=lambda mu: jet_key((0, mu)))
    c0 = Q0[lam]
    A = [{(0, mu): c for mu, c in Q0.items()}]
    Q = dict(Q)
    H = {}
    while Q:
        L = max(Q, key=lambda mu: jet_key((0, mu)))
        if not mi_divides(lam, L):
            return None
        eta = mi_sub(L, lam)
        c = Q[L] / c0
        H[eta] = H.get(eta, R.zero) + c
        for (_, mu), a in compose(R, [{(0, eta): c}], A)[0].items():
            v = Q.get(mu, R.zero) - a
            if v:
                Q[mu] = v
            else:
                Q.pop(mu, None)
        if L in Q:
            raise AssertionError("leading term did not cancel")
    return {mu: c for mu, c in H.items() if c}


def _divide_constraint(R, g, p):
    """Left-divide g by the inner coefficient of its leading outer jet.

    g is a row over potentials; inner indices are the first p derivations.
    """
    groups = {}
    for (k, mu), a in g.items():
        outer = (k, tuple(mu[p:]))
        groups.setdefault(outer, {})[tuple(mu[:p]) + (0,) * (R.n - p)] = a
    lead = max(groups, key=jet_key)
    Q0 = groups[lead]
    h = {}
    for (k, mo), Q in groups.items():
        H = left_divide(R, Q0, Q)
        if H is None:
            return g
        for mu, c in H.items():
            _acc(h, (k, mi_add(mu, (0,) * p + mo)), c)
    return h


def relative_parametrization(P: Presentation, cfg=None, report: PurityReport = None) -> Parametrization:
    cfg = cfg or P.cfg
    rep = report or purity_test(P, cfg)
    r = rep.cd
    if r == 0:
        raise NotTorsionCase("codimension 0: use the absolute parametrization of the torsion-free part")
    if not rep.pure:
        raise NotPure(f"module is not {r}-pure", rep.to_json())
    fo = rep.first_order
    F = fo.F
    n = F.n
    p = n - r
    RF = F.ring
    RS = restrict_to_classes(F, p)
    S = RS.ring
    Dr = RS.matrix()
    if p == 0:
        # no inner derivations: every z is a potential
        alpha = Dr.m
        Pz = OperatorMatrix(S, [{(t, ()): S.one} for t in range(alpha)], alpha)
    else:
        alpha = F.alpha[p - 1]
        W = cc_of_operator(Dr.adjoint(), cfg).rows
        chosen = []
        for w in W:
            trial = chosen + [w]
            cols = _columns(OperatorMatrix(S, trial, Dr.m).adjoint())
            if _comm_rank(S, p, cols) == len(trial):
                chosen = trial
            if len(chosen) == alpha:
                break
        if len(chosen) != alpha:
            raise AssertionError("could not select the parametrizing conditions")
        Pz = OperatorMatrix(S, chosen, Dr.m).adjoint()
    if not Dr.compose(Pz).is_zero():
        raise AssertionError("restricted system does not vanish on the parametrization")
    pad = (0,) * (n - p)
    # stack z-rows and y-rows over the frame ring so column operations act on both
    zrows = [{(j, tuple(mu) + pad): c for (j, mu), c in row.items()} for row in Pz.rows]
    yrows = compose(RF, [fo.pull(k) for k in range(P.m)], zrows)
    cols = [dict() for _ in range(alpha)]
    for k, row in enumerate(yrows):
        for (j, mu), c in row.items():
            cols[j][(("y", k), mu)] = c
    for t, row in enumerate(zrows):
        for (j, mu), c in row.items():
            cols[j][(("z", t), mu)] = c
    cols = _column_normalize(RF, cols, lambda key: key[0][0] == "y")
    yrows = [dict() for _ in range(P.m)]
    zrows = [dict() for _ in range(Dr.m)]
    for j, col in enumerate(cols):
        for ((tag, k), mu), c in col.items():
            (yrows if tag == "y" else zrows)[k][(j, mu)] = c
    # constraints: rows of class > p composed with the parametrization
    upper = [row for row, c in zip(F.rows, F.classes) if c > p]
    G = [g for g in compose(RF, upper, zrows) if g]
    if RF.field.nx == 0:
        Fchi = _loc_field(RF.field, p)
        E = Echelon()
        for g in G:
            E.add(localize_form(g, p, Fchi))
        C = [delocalize_form(primitive_form(row), p, Fchi, RF) for row in E.sorted_rows()]
    else:
        C = minimize_generators(RF, alpha, [_divide_constraint(RF, g, p) for g in G], cfg)
        C = [_monic(RF, c) for c in C]
    sub = Submodule(RF, alpha, C, cfg)
    missing = [g for g in G if not sub.contains(g)]
    C = C + missing
    C.sort(key=lambda f: jet_key(max(f, key=jet_key)), reverse=True)
    C = [_positive_lead(RF, c) for c in C]
    # standard coordinates
    Fm = fo._to_std
    R = P.ring
    Cstd = OperatorMatrix(R, [Fm(c) for c in C], alpha)
    Pstd = OperatorMatrix(R, [Fm(y) for y in yrows], alpha)
    subC = Submodule(R, alpha, Cstd.rows, cfg)
    cert = []
    for row in P.matrix.rows:
        if not row:
            continue
        g = compose(R, [row], Pstd.rows)[0]
        combo = subC.combination(g)
        if combo is None:
            raise AssertionError("parametrization certificate failed")
        cert.append(combo)
    Fchi = _loc_field(R.field, p)
    loc_ring = OreRing(Fchi, r, [R.dirs[j] for j in range(p, n)], R.labels[p:])
    loc_map = [localize_form(y, p, Fchi) for y in Pstd.rows]
    res = free_resolution(Presentation(Cstd, cfg))
    stages = len(res.maps)
    ranks = res.ranks
    if stages != r:
        short = short_resolution(Presentation(Cstd, cfg), cfg)
        if len(short.maps) <= r:
            stages, ranks = len(short.maps), short.ranks
    potentials = default_names(alpha, "z")
    return Parametrization(r, Cstd, Pstd, cert, loc_map, ranks, stages == r, rep.names, potentials,
                           loc_ring)


def _columns(M: OperatorMatrix):
    cols = [dict() for _ in range(M.m)]
    for k, row in enumerate(M.rows):
        for (j, mu), c in row.items():
            cols[j][(k, mu)] = c
    return cols


def _monic(R, f):
    L = max(f, key=jet_key)
    c = f[L]
    if c == 1:
        return f
    ci = R.one / c
    return {j: ci * a for j, a in f.items()}


# -- embedding into a module of projective dimension <= r ----------------------

class Embedding:
    def __init__(self, L: Presentation, inclusion, N, resolution, names):
        self.L = L
        self.inclusion = inclusion
        self.N = N
        self.resolution = resolution
        self.names = names

    def inclusion_text(self, names=None):
        names = names or default_names(len(self.inclusion))
        zn = default_names(self.L.m, "z")
        return [f"{y} = {form_text(self.L.ring, row, zn)}" for y, row in zip(names, self.inclusion)]

    def to_json(self):
        return {
            "L": self.L.matrix.text_rows(default_names(self.L.m, "z")),
            "inclusion": self.inclusion_text(self.names),
            "resolution": self.resolution.ranks,
        }


def _positive_lead(R, row):
    if row and coef_text(R.field, row[max(row, key=jet_key)]).startswith("-"):
        return {key: -c for key, c in row.items()}
    return row


def _inclusion_certified(R, m, rows, iota, L: Presentation, cfg):
    Lsub = L.submodule()
    if not Lsub.contains_all(compose(R, rows, iota)):
        return False
    stack = OperatorMatrix(R, iota + L.matrix.rows, L.m)
    syz = cc_of_operator(stack, cfg, minimize=False)
    kernel = []
    for s in syz.rows:
        a = {key: c for key, c in s.items() if key[0] < len(iota)}
        if a:
            kernel.append(a)
    return Submodule(R, m, kernel, cfg).equals(Submodule(R, m, rows, cfg))


def embed_pure_module(P: Presentation, cfg=None, route="auto", n_route=None):
    """M ⊂ L with L the cokernel of the dualized r-th map of a resolution of ext^r(M).

    ``route`` resolves M and ``n_route`` (default: the same) resolves N = ext^r(M);
    L depends on the latter.
    """
    cfg = cfg or P.cfg
    R, m = P.ring, P.m
    r = codimension(P)
    rows = [row for row in P.matrix.rows if row]
    X = ext_modules(P, resolve(P, route, cfg), cfg=cfg)
    e = X[r]
    if e.zero:
        raise EmbeddingNotCertified(f"ext^{r} vanishes", {"cd": r})
    N = e.presentation
    res = resolve(N, n_route or route, cfg)
    if len(res.maps) < r:
        Lrows = []
        mL = res.ranks[r] if len(res.ranks) > r else 0
    else:
        A = res.maps[r - 1].adjoint()
        Lrows, mL = [_positive_lead(R, row) for row in A.rows], A.m
    L = Presentation(OperatorMatrix(R, Lrows, mL), cfg)
    zero = zero_mi(R.n)
    partial = {"L": L.matrix.text_rows(default_names(mL, "z")), "resolution": res.ranks}
    names = P.names or default_names(m)
    for choice in permutations(range(mL), m):
        iota = [{(j, zero): R.one} for j in choice]
        if _inclusion_certified(R, m, rows, iota, L, cfg):
            # renumber z so that the inclusion reads y^k = z^k
            order = list(choice) + [j for j in range(mL) if j not in choice]
            pos = {j: t for t, j in enumerate(order)}
            Lp = Presentation(OperatorMatrix(R, [{(pos[k], mu): c for (k, mu), c in row.items()}
                                                 for row in Lrows], mL), cfg)
            iota = [{(t, zero): R.one} for t in range(m)]
            return Embedding(Lp, iota, N, res, names)
    if R.field.is_constant_field and mL:
        for order in (1, 2):
            for iota in _linear_inclusions(R, m, rows, L, order, cfg):
                if _inclusion_certified(R, m, rows, iota, L, cfg):
                    return Embedding(L, iota, N, res, names)
    if r > 0:
        # the relative parametrization y = P z is an embedding into D^alpha / C when injective
        try:
            par = relative_parametrization(P, cfg)
        except WorkbenchError:
            par = None
        if par is not None:
            C = Presentation(par.constraints, cfg)
            if _inclusion_certified(R, m, rows, par.matrix.rows, C, cfg):
                return Embedding(C, par.matrix.rows, N, res, names)
    raise EmbeddingNotCertified("no inclusion into L up to order 2 could be certified", partial)


def _linear_inclusions(R, m, rows, L: Presentation, order, cfg, tries=4):
    """Candidate maps y -> L of the given order with D∘ι ≡ 0 mod L (constant coefficients).

    The condition is linear in the coefficients of ι, so the candidates are
    seeded random combinations of a kernel basis.
    """
    I = L.submodule().involutive
    to_frame = _from_std(I)
    cells = [(i, (j, mu)) for i in range(m) for mu in multi_indices_upto(R.n, order)
             for j in range(L.m)]
    E = Echelon(key=repr, track=True)
    for e, (i, jet) in enumerate(cells):
        iota = [{} for _ in range(m)]
        iota[i] = {jet: R.one}
        if I.normal_form(to_frame(iota[i])) != to_frame(iota[i]):
            continue
        vec = {}
        for t, g in enumerate(compose(R, rows, iota)):
            for key, c in I.normal_form(to_frame(g)).items():
                vec[(t, key)] = c
        E.add(vec, {e: R.one})
    kernel = E.syzygies
    if not kernel:
        return
    rng = Random(cfg.seed if cfg else 0)
    combos = [[int(a == b) for a in range(len(kernel))] for b in range(len(kernel))]
    combos.append([1] * len(kernel))
    combos += [[rng.randint(1, 7) for _ in kernel] for _ in range(tries)]
    for weights in combos:
        iota = [{} for _ in range(m)]
        for w, v in zip(weights, kernel):
            for e, c in v.items():
                i, jet = cells[e]
                _acc(iota[i], jet, R.field(w) * c)
        if all(iota):
            yield iota


# -- monomial ideals --------------------------------------------------------

class MonomialIdeal:
    """Monomial ideal in k[chi_1..chi_n] with a minimal generating set."""

    def __init__(self, n, generators):
        self.n = n
        gens = []
        for g in generators:
            g = tuple(int(e) for e in g)
            if len(g) != n or any(e < 0 for e in g):
                raise NotMonomial(f"bad exponent vector {g}")
            gens.append(g)
        self.generators = _minimalize(gens)

    @classmethod
    def from_polys(cls, n, polys):
        """From sympy polynomials/expressions in chi1..chin; each must be a monomial."""
        from sympy import Poly, symbols

        chi = symbols(" ".join(f"chi{i + 1}" for i in range(n)))
        chi = chi if isinstance(chi, tuple) else (chi,)
        gens = []
        for f in polys:
            P = Poly(f, *chi)
            if len(P.terms()) != 1:
                raise NotMonomial(f"{f} is not a monomial")
            gens.append(P.terms()[0][0])
        return cls(n, gens)

    def __eq__(self, other):
        return isinstance(other, MonomialIdeal) and set(self.generators) == set(other.generators)

    def __hash__(self):
        return hash(frozenset(self.generators))

    def contains_monomial(self, e):
        return any(mi_divides(g, e) for g in self.generators)

    def text(self):
        def mono(e):
            parts = [f"chi{i + 1}" if v == 1 else f"chi{i + 1}^{v}" for i, v in enumerate(e) if v]
            return "*".join(parts) or "1"
        return "(" + ", ".join(mono(g) for g in self.generators) + ")"

    def __repr__(self):
        return f"MonomialIdeal{self.text()}"


def _minimalize(gens):
    gens = sorted(set(gens), key=lambda e: (sum(e), tuple(-v for v in e)))
    out = []
    for g in gens:
        if not any(mi_divides(h, g) for h in out):
            out.append(g)
    return out


def intersect(a: MonomialIdeal, b: MonomialIdeal):
    return MonomialIdeal(a.n, [tuple(max(x, y) for x, y in zip(f, g)) for f in a.generators
                               for g in b.generators])


def radical(a: MonomialIdeal):
    return MonomialIdeal(a.n, [tuple(1 if e else 0 for e in g) for g in a.generators])


def equal(a: MonomialIdeal, b: MonomialIdeal):
    return (all(b.contains_monomial(g) for g in a.generators)
            and all(a.contains_monomial(g) for g in b.generators))


def irreducible_components(a: MonomialIdeal):
    """Decomposition into ideals generated by pure powers."""
    for g in a.generators:
        support = [i for i, e in enumerate(g) if e]
        if len(support) > 1:
            i = support[0]
            pure = tuple(g[i] if t == i else 0 for t in range(a.n))
            rest = tuple(0 if t == i else g[t] for t in range(a.n))
            left = irreducible_components(MonomialIdeal(a.n, a.generators + [pure]))
            right = irreducible_components(MonomialIdeal(a.n, a.generators + [rest]))
            comps = []
            for c in left + right:
                if c not in comps:
                    comps.append(c)
            # drop components containing another one
            return [c for c in comps if not any(d != c and _contains_ideal(c, d) for d in comps)]
    return [a]


def _contains_ideal(big, small):
    return all(big.contains_monomial(g) for g in small.generators)


def primary_decomposition(a: MonomialIdeal):
    """Primary components (grouped irreducible components) as (primary, prime) pairs."""
    groups = {}
    for c in irreducible_components(a):
        groups.setdefault(radical(c), []).append(c)
    out = []
    for prime, comps in groups.items():
        q = comps[0]
        for c in comps[1:]:
            q = intersect(q, c)
        out.append((q, prime))
    out.sort(key=lambda qp: (len(qp[1].generators), qp[1].generators))
    return out


def is_unmixed(a: MonomialIdeal):
    heights = {len(prime.generators) for _, prime in primary_decomposition(a)}
    return len(heights) == 1


def monomial_ideal_ops(a: MonomialIdeal, b: MonomialIdeal = None, operation="intersect"):
    if operation == "intersect":
        return intersect(a, b)
    if operation == "radical":
        return radical(a)
    if operation == "equal":
        return equal(a, b)
    raise ValueError(f"unknown operation {operation!r}")


def characteristic_ideal(I: InvolutiveSystem):
    """Ideal of the top-order symbol rows for one unknown.

    Returns ``(ideal or generator list, radical_known)``; non-monomial
    symbols come back as a list of exponent dictionaries.
    """
    if I.m != 1:
        raise NotMonomial("characteristic ideal is only formed for one unknown")
    gens = []
    monomial = True
    for row, c in zip(I.rows, I.classes):
        top = {mu: a for (k, mu), a in row.items() if sum(mu) == I.q}
        if c == 0 or not top:
            continue
        if len(top) != 1:
            monomial = False
        gens.append(top)
    if monomial:
        return MonomialIdeal(I.n, [next(iter(t)) for t in gens]), True
    return gens, False
