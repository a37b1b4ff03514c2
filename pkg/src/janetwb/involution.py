"""Completion to involution, boards, characters and Spencer-form reductions.

The completion loop works in the original coordinates: prolong and project
until the order-q projection is stable, then look for a constant frame in
which the symbol passes the Cartan test ``dim g_{q+1} = sum_i i*alpha^i``.
If no frame passes, prolong once more and repeat.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import permutations
from math import comb

from sympy.polys.domains import QQ
from sympy import Poly, Rational, binomial, expand, summation, symbols

from .errors import (
    DeltaRegularityNotFound,
    HasZeroOrderEquations,
    NotFirstOrder,
    NotInvolutive,
    OrderBoundExceeded,
)
from .jets import (
    Echelon,
    FrameMap,
    JetSystem,
    frame_ring,
    identity_frame,
    mat_inverse,
    num_jets,
    num_jets_upto,
    prolonged_symbol,
    top_part,
)
from .ore import (
    _acc,
    class_of,
    form_text,
    inc,
    jet_key,
    multi_indices,
    prolong_form,
    zero_mi,
)


@dataclass(frozen=True)
class CompletionConfig:
    max_rounds: int = 20
    max_frame_retries: int = 25
    seed: int = 0
    frame_bound: int = 3
    max_order: int = 12

    def __post_init__(self):
        for name in ("max_rounds", "max_frame_retries", "frame_bound", "max_order"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def _prolong_once(R, E):
    """E together with d_j of each of its rows, provenance carried along."""
    E2 = E.copy()
    for L in list(E.rows):
        f = E.rows[L]
        p = E.prov.get(L) if E.track else None
        for j in range(R.n):
            E2.add(prolong_form(R, f, j), prolong_form(R, p, j) if p is not None else None)
    return E2


def _restrict(E, q):
    """Sub-echelon of rows whose lead has order <= q."""
    out = Echelon(E.key, E.track)
    for L, row in E.rows.items():
        if sum(L[1]) <= q:
            out.rows[L] = row
            if E.track:
                out.prov[L] = E.prov[L]
            out._index(L, row)
    return out


def _frames(n, cfg):
    ident = identity_frame(n)
    yield ident
    if n <= 5:
        perms = [p for p in permutations(range(n)) if list(p) != list(range(n))]
        perms.sort(key=lambda p: (sum(1 for i, v in enumerate(p) if i != v), p))
        for p in perms:
            yield tuple(tuple(QQ(1) if p[i] == j else QQ(0) for j in range(n)) for i in range(n))
    rng = random.Random(cfg.seed)
    b = cfg.frame_bound
    tries = 0
    while tries < cfg.max_frame_retries:
        F = tuple(tuple(QQ(rng.randint(-b, b)) for _ in range(n)) for _ in range(n))
        try:
            mat_inverse(F)
        except Exception:
            continue
        tries += 1
        yield F


def characters_from_beta(n, m, q, beta):
    """alpha^i = m*C(q+n-i-1, q-1) - beta^i (beta indexed 1..n as beta[i-1])."""
    return tuple(m * comb(q + n - i - 1, q - 1) - beta[i - 1] for i in range(1, n + 1))


def _beta_of_leads(n, leads, q):
    beta = [0] * n
    for k, mu in leads:
        if sum(mu) == q:
            beta[class_of(mu) - 1] += 1
    return tuple(beta)


def cartan_test(n, m, q, tops, F):
    """(passes, beta, alpha) for the symbol rows ``tops`` in frame F."""
    Fm = FrameMap(F)
    E = Echelon()
    for t in tops:
        E.add(Fm.form(t))
    beta = _beta_of_leads(n, E.rows, q)
    alpha = characters_from_beta(n, m, q, beta)
    dim_next = num_jets(n, m, q + 1) - len(prolonged_symbol(tops, n, 1))
    weighted = sum(i * a for i, a in enumerate(alpha, start=1))
    return weighted == dim_next, beta, alpha


class InvolutiveSystem:
    """Echelonized involutive system in the frame ``frame`` (ring ``ring``).

    ``rows`` are sorted by descending lead.  ``classes[t]`` is the class of
    row t for order-q rows and 0 for lower-order rows (all variables
    non-multiplicative).  ``prov[t]``, when present, expresses row t as a
    D-combination ``{(original row, nu): c}`` in the standard coordinates.
    """

    def __init__(self, ring, m, q, rows, frame, base_ring, prov=None, syzygies=(), names=None,
                 rounds=0, sources=0, sort_rows=True):
        self.ring = ring
        self.base_ring = base_ring
        self.n = ring.n
        self.m = m
        self.q = q
        order = list(range(len(rows)))
        if sort_rows:
            order.sort(key=lambda t: jet_key(max(rows[t], key=jet_key)), reverse=True)
        self.rows = [rows[t] for t in order]
        self.prov = [prov[t] for t in order] if prov is not None else None
        self.leads = [max(r, key=jet_key) for r in self.rows]
        self.classes = [class_of(L[1]) if sum(L[1]) == q else 0 for L in self.leads]
        self.frame = frame
        self.syzygies = list(syzygies)
        self.names = names
        self.rounds = rounds
        self.sources = sources
        self.beta = _beta_of_leads(self.n, self.leads, q)
        self.alpha = characters_from_beta(self.n, m, q, self.beta)
        self._lead_index = {L: t for t, L in enumerate(self.leads)}
        self._cone = {}
        for t, L in enumerate(self.leads):
            c = self.classes[t]
            if c:
                self._cone[(L[0], L[1][c:], c)] = t
        self._pcache = {}

    # -- board ---------------------------------------------------------
    def multiplicative(self, t):
        return list(range(1, self.classes[t] + 1))

    def nonmultiplicative(self, t):
        return list(range(self.classes[t] + 1, self.n + 1))

    def board(self):
        return [
            {"class": self.classes[t], "mult": self.multiplicative(t), "nonmult": self.nonmultiplicative(t)}
            for t in range(len(self.rows))
        ]

    @property
    def system(self):
        return JetSystem(self.ring, self.m, self.rows, self.q, self.frame, self.names)

    def text(self, style="jet"):
        return [form_text(self.ring, r, self.names, style) for r in self.rows]

    def dim(self):
        return num_jets_upto(self.n, self.m, self.q) - len(self.rows)

    # -- involutive division ------------------------------------------
    def row_prolongation(self, t, nu):
        key = (t, nu)
        hit = self._pcache.get(key)
        if hit is not None:
            return hit
        if not any(nu):
            res = self.rows[t]
        else:
            j = max(i for i, e in enumerate(nu) if e)
            res = prolong_form(self.ring, self.row_prolongation(t, inc(nu, j, -1)), j)
        self._pcache[key] = res
        return res

    def reducer(self, jet):
        """(row, nu) with lead(row)+nu = jet inside the multiplicative cone, or None."""
        k, mu = jet
        if sum(mu) <= self.q:
            t = self._lead_index.get(jet)
            return None if t is None else (t, zero_mi(self.n))
        for c in range(1, self.n + 1):
            t = self._cone.get((k, mu[c:], c))
            if t is None:
                continue
            lam = self.leads[t][1]
            if mu[c - 1] >= lam[c - 1]:
                return t, tuple(a - b for a, b in zip(mu, lam))
        return None

    def is_principal(self, jet):
        return self.reducer(jet) is not None

    def normal_form(self, f, with_quotient=False):
        """Involutive normal form; the quotient is a form over (row, nu)."""
        f = dict(f)
        quo = {}
        done = set()
        while True:
            cands = [j for j in f if j not in done]
            if not cands:
                break
            J = max(cands, key=jet_key)
            red = self.reducer(J)
            if red is None:
                done.add(J)
                continue
            t, nu = red
            c = f[J]
            for key, a in self.row_prolongation(t, nu).items():
                _acc(f, key, -c * a)
            if with_quotient:
                _acc(quo, (t, nu), c)
        return (f, quo) if with_quotient else f

    def check_criterion(self):
        """Every non-multiplicative prolongation reduces to zero."""
        for t in range(len(self.rows)):
            for j in self.nonmultiplicative(t):
                if self.normal_form(prolong_form(self.ring, self.rows[t], j - 1)):
                    return False
        return True

    # -- frame conversions ---------------------------------------------
    def to_standard(self, f):
        """Express a jet form of the frame coordinates in the original ones."""
        return FrameMap(mat_inverse(self.frame)).form(f)

    def from_standard(self, f):
        return FrameMap(self.frame).form(f)

    def is_identity_frame(self):
        return self.frame == identity_frame(self.n)


def _prepare(S: JetSystem, track):
    R = S.ring
    E = Echelon(track=track)
    for t, f in enumerate(S.equations):
        E.add(f, {(t, zero_mi(S.n)): R.one} if track else None)
    q = max(S.q, 1)
    return E, q


def complete_to_involution(S: JetSystem, cfg: CompletionConfig = None, track=False) -> InvolutiveSystem:
    """Prolong/project until formally integrable with an involutive symbol."""
    cfg = cfg or CompletionConfig()
    R = S.ring
    n, m = S.n, S.m
    E, q = _prepare(S, track)
    syz = []
    rounds = 0
    while True:
        while True:
            E1 = _prolong_once(R, E)
            syz.extend(E1.syzygies[len(E.syzygies):])
            E1.syzygies = []
            low = _restrict(E1, q)
            if len(low) == len(E):
                break
            E = low
        tops = [top_part(E.rows[L], q) for L in E.rows if sum(L[1]) == q]
        for F in _frames(n, cfg):
            ok, beta, alpha = cartan_test(n, m, q, tops, F)
            if ok:
                return _finish(S, E, q, F, syz, rounds)
        rounds += 1
        partial = {"order": q, "rows": len(E), "rounds": rounds}
        if q + 1 > cfg.max_order:
            raise OrderBoundExceeded(f"completion needs order > {cfg.max_order}", partial)
        if rounds > cfg.max_rounds:
            raise DeltaRegularityNotFound(
                f"no delta-regular frame found within {cfg.max_rounds} prolongations", partial
            )
        E = E1
        q += 1


def _finish(S, E, q, F, syz, rounds):
    R = S.ring
    if F == identity_frame(S.n):
        ring, Fm = R, None
    else:
        ring, Fm = frame_ring(R, F), FrameMap(F)
    E2 = Echelon(track=E.track)
    for L in E.leads():
        row = E.rows[L]
        E2.add(Fm.form(row) if Fm else row, E.prov[L] if E.track else None)
    rows = [E2.rows[L] for L in E2.leads()]
    prov = [E2.prov[L] for L in E2.leads()] if E.track else None
    I = InvolutiveSystem(ring, S.m, q, rows, F, R, prov, syz + E2.syzygies, S.names, rounds,
                         len(S.equations))
    return I


def characters(I: InvolutiveSystem):
    """(alpha, beta, cd, rk): cd counts trailing zero characters, rk = alpha^n."""
    cd = 0
    for a in reversed(I.alpha):
        if a:
            break
        cd += 1
    return I.alpha, I.beta, cd, I.alpha[-1] if I.alpha else 0


def dim_next_symbol(I: InvolutiveSystem):
    tops = [top_part(r, I.q) for r, c in zip(I.rows, I.classes) if c]
    return num_jets(I.n, I.m, I.q + 1) - len(prolonged_symbol(tops, I.n, 1))


def hilbert_function(I: InvolutiveSystem, r):
    """dim R_{q+r} from the characters."""
    d = I.dim()
    for s in range(1, r + 1):
        d += sum(a * comb(s + i - 1, s) for i, a in enumerate(I.alpha, start=1))
    return d


def hilbert_polynomial(I: InvolutiveSystem):
    """Coefficients (in r, ascending powers) of dim R_{q+r} as exact rationals."""
    r, s = symbols("r s")
    expr = I.dim()
    for i, a in enumerate(I.alpha, start=1):
        if a:
            expr += a * summation(binomial(s + i - 1, i - 1), (s, 1, r))
    p = Poly(expand(expr), r)
    return [Rational(c) for c in reversed(p.all_coeffs())]


# -- first-order (Spencer) form -------------------------------------------

class FirstOrderForm:
    """First-order system in new unknowns z, each standing for a jet of y.

    ``jets[k]`` is the y-jet (in the frame coordinates of the source) that
    ``z^{k+1}`` stands for.
    """

    def __init__(self, system: JetSystem, jets, source: InvolutiveSystem):
        self.system = system
        self.jets = jets
        self.source = source

    def dictionary(self):
        return {f"z{k + 1}": jet for k, jet in enumerate(self.jets)}


def first_order_reduction(I: InvolutiveSystem) -> FirstOrderForm:
    """Parametric jets of order < q become unknowns; equations are first order."""
    n, q = I.n, I.q
    R = I.ring
    if q == 1 and all(I.classes):
        return FirstOrderForm(I.system, [(k, zero_mi(n)) for k in range(I.m)], I)
    zs = []
    for s in range(q):
        for k in range(I.m):
            for mu in multi_indices(n, s):
                if not I.is_principal((k, mu)):
                    zs.append((k, mu))
    zs.sort(key=lambda j: (sum(j[1]), j[0], tuple(-e for e in j[1])))
    zindex = {j: t for t, j in enumerate(zs)}
    zero = zero_mi(n)

    def in_z(f):
        out = {}
        for (k, mu), a in f.items():
            if (k, mu) in zindex:
                _acc(out, (zindex[(k, mu)], zero), a)
                continue
            # parametric jet of order q: d_c z for its class c
            c = class_of(mu)
            base = (k, inc(mu, c - 1, -1))
            if sum(mu) != q or base not in zindex:
                raise NotInvolutive(f"jet {(k, mu)} cannot be written in the new unknowns")
            _acc(out, (zindex[base], tuple(1 if i == c - 1 else 0 for i in range(n))), a)
        return out

    eqs = []
    for t, (k, mu) in enumerate(zs):
        for j in range(n):
            nu = inc(mu, j)
            lhs = {(t, tuple(1 if i == j else 0 for i in range(n))): R.one}
            if sum(nu) < q:
                nf = I.normal_form({(k, nu): R.one})
                eq = dict(lhs)
                for key, a in in_z(nf).items():
                    _acc(eq, key, -a)
            elif not I.is_principal((k, nu)):
                c = class_of(nu)
                if j == c - 1:
                    continue
                base = (k, inc(nu, c - 1, -1))
                eq = dict(lhs)
                _acc(eq, (zindex[base], tuple(1 if i == c - 1 else 0 for i in range(n))), -R.one)
            else:
                nf = I.normal_form({(k, nu): R.one})
                eq = dict(lhs)
                for key, a in in_z(nf).items():
                    _acc(eq, key, -a)
            if eq:
                eqs.append(eq)
    names = [f"z{t + 1}" for t in range(len(zs))]
    S = JetSystem(R, len(zs), eqs, 1, I.frame, names)
    return FirstOrderForm(S, zs, I)


# -- reduced Spencer form --------------------------------------------------

class ReducedSpencerForm:
    def __init__(self, system: InvolutiveSystem, substitution, beta):
        self.system = system
        self.substitution = substitution
        self.beta = beta


def reduced_spencer_form(I: InvolutiveSystem, cfg: CompletionConfig = None) -> ReducedSpencerForm:
    """Rename the class-n lead unknowns so class-n rows only meet the rest in low classes.

    ``substitution[k]`` is the form defining the new unknown ybar^{k+1} in
    terms of the old ones (identity for untouched unknowns).
    """
    n, m = I.n, I.m
    if I.q != 1:
        raise NotFirstOrder("reduced Spencer form needs a first-order system")
    if any(c == 0 for c in I.classes):
        raise HasZeroOrderEquations("reduced Spencer form needs a system without order-0 rows")
    R = I.ring
    en = tuple(1 if i == n - 1 else 0 for i in range(n))
    zero = zero_mi(n)
    top = [t for t in range(len(I.rows)) if I.classes[t] == n]
    leadk = [I.leads[t][0] for t in top]
    # ybar^k = y^k + sum_l a_kl y^l, read off the d_n-jets of the other unknowns
    subst = {}
    for t, k in zip(top, leadk):
        s = {(k, zero): R.one}
        for (l, mu), a in I.rows[t].items():
            if mu == en and l not in leadk:
                _acc(s, (l, zero), a)
        subst[k] = s
    if all(len(s) == 1 for s in subst.values()):
        return ReducedSpencerForm(I, {k: {(k, zero): R.one} for k in range(m)}, len(top))
    # y^k = ybar^k - sum a_kl y^l: substitute jets of the lead unknowns
    back = {}
    for k, s in subst.items():
        b = {(k, zero): R.one}
        for (l, _), a in s.items():
            if l != k:
                _acc(b, (l, zero), -a)
        back[k] = b

    def substitute(f):
        out = {}
        for (k, mu), a in f.items():
            if k not in back:
                _acc(out, (k, mu), a)
                continue
            # d_mu (sum b_l y^l)
            g = back[k]
            for j, e in enumerate(mu):
                for _ in range(e):
                    g = prolong_form(R, g, j)
            for key, b in g.items():
                _acc(out, key, a * b)
        return out

    new_rows = [substitute(r) for r in I.rows]
    E = Echelon()
    for r in new_rows:
        E.add(r)
    rows = E.sorted_rows()
    J = InvolutiveSystem(R, m, 1, rows, I.frame, I.base_ring, None, (), I.names)
    full = {k: subst.get(k, {(k, zero): R.one}) for k in range(m)}
    return ReducedSpencerForm(J, full, len(top))


def reduced_form_holds(I: InvolutiveSystem):
    """Class-n rows meet the other unknowns only through jets free of d_n;
    lower-class rows do not meet them at all."""
    n = I.n
    leadk = {I.leads[t][0] for t in range(len(I.rows)) if I.classes[t] == n}
    for t, r in enumerate(I.rows):
        for k, mu in r:
            if k in leadk:
                continue
            if I.classes[t] < n or mu[n - 1]:
                return False
    return True
