"""Linear algebra on jet coordinates.

A jet ``(k, mu)`` stands for y^{k+1}_mu.  Systems are echelonized over K with
the largest jet (see :func:`janetwb.ore.jet_key`) as pivot, so projection to
order q is just "keep the rows whose lead has order <= q".
"""

from __future__ import annotations

from itertools import combinations
from math import comb

from sympy.polys.domains import QQ

from .errors import DimensionMismatch, OrderTooLow
from .ore import (
    OreRing,
    _acc,
    class_of,
    form_text,
    inc,
    jet_key,
    multi_indices,
    multi_indices_upto,
    prolong_form,
)


def inv(c):
    return 1 / c


class Echelon:
    """Reduced row echelon form keyed by lead jet, lead coefficients 1.

    With ``track=True`` each row carries a provenance form (any hashable
    labels) and combinations that reduce to zero are kept as ``syzygies``.
    """

    def __init__(self, key=jet_key, track=False):
        self.key = key
        self.track = track
        self.rows = {}
        self.prov = {}
        self.occ = {}
        self.syzygies = []

    def __len__(self):
        return len(self.rows)

    def copy(self):
        e = Echelon(self.key, self.track)
        e.rows = {L: dict(r) for L, r in self.rows.items()}
        e.prov = {L: dict(p) for L, p in self.prov.items()}
        e.occ = {j: set(s) for j, s in self.occ.items()}
        e.syzygies = list(self.syzygies)
        return e

    def reduce(self, f, prov=None):
        """Remainder of f (and its provenance) modulo the rows."""
        f = dict(f)
        prov = dict(prov) if prov is not None else ({} if self.track else None)
        for L in [j for j in f if j in self.rows]:
            c = f.get(L)
            if not c:
                continue
            for j, a in self.rows[L].items():
                _acc(f, j, -c * a)
            if prov is not None:
                for lab, a in self.prov[L].items():
                    _acc(prov, lab, -c * a)
        return f, prov

    def _index(self, L, row):
        for j in row:
            if j != L:
                self.occ.setdefault(j, set()).add(L)

    def _unindex(self, L, row):
        for j in row:
            if j != L:
                s = self.occ.get(j)
                if s is not None:
                    s.discard(L)

    def add(self, f, prov=None):
        """Insert f; returns its new lead, or None when f was dependent."""
        f, prov = self.reduce(f, prov)
        if not f:
            if prov:
                self.syzygies.append(prov)
            return None
        L = max(f, key=self.key)
        c = f[L]
        if c != 1:
            ci = inv(c)
            f = {j: a * ci for j, a in f.items()}
            if prov is not None:
                prov = {lab: a * ci for lab, a in prov.items()}
        for L2 in list(self.occ.get(L, ())):
            row = self.rows[L2]
            c2 = row.get(L)
            if not c2:
                continue
            self._unindex(L2, row)
            for j, a in f.items():
                _acc(row, j, -c2 * a)
            self._index(L2, row)
            if prov is not None:
                p2 = self.prov[L2]
                for lab, a in prov.items():
                    _acc(p2, lab, -c2 * a)
        self.occ.pop(L, None)
        self.rows[L] = f
        self._index(L, f)
        if prov is not None:
            self.prov[L] = prov
        return L

    def contains(self, f):
        r, _ = self.reduce(f)
        return not r

    def leads(self):
        return sorted(self.rows, key=self.key, reverse=True)

    def sorted_rows(self):
        return [self.rows[L] for L in self.leads()]


def echelonize(forms, key=jet_key):
    E = Echelon(key)
    for f in forms:
        E.add(f)
    return E


def num_jets(n, m, q):
    """Number of jets of exact order q."""
    return m * comb(q + n - 1, n - 1) if n else (m if q == 0 else 0)


def num_jets_upto(n, m, q):
    return m * comb(q + n, n)


def identity_frame(n):
    return tuple(tuple(QQ(1) if i == j else QQ(0) for j in range(n)) for i in range(n))


def mat_inverse(F):
    """Inverse of a square rational matrix (Gauss-Jordan)."""
    n = len(F)
    A = [[QQ.convert(v) for v in row] + [QQ(1) if i == j else QQ(0) for j in range(n)]
         for i, row in enumerate(F)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col]), None)
        if piv is None:
            raise DimensionMismatch("singular frame matrix")
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [v / p for v in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                c = A[r][col]
                A[r] = [a - c * b for a, b in zip(A[r], A[col])]
    return tuple(tuple(row[n:]) for row in A)


def mat_mul(A, B):
    return tuple(
        tuple(sum((A[i][k] * B[k][j] for k in range(len(B))), QQ(0)) for j in range(len(B[0])))
        for i in range(len(A))
    )


class FrameMap:
    """Expansion of jets under the constant change ``d_i = sum_j F[i][j] d'_j``."""

    def __init__(self, F):
        self.F = tuple(tuple(QQ.convert(v) for v in row) for row in F)
        self.n = len(self.F)
        self._cache = {(0,) * self.n: {(0,) * self.n: QQ(1)}}

    def expand(self, mu):
        hit = self._cache.get(mu)
        if hit is not None:
            return hit
        i = max(t for t, e in enumerate(mu) if e)
        base = self.expand(inc(mu, i, -1))
        out = {}
        for nu, c in base.items():
            for j, f in enumerate(self.F[i]):
                if f:
                    _acc(out, inc(nu, j), c * f)
        self._cache[mu] = out
        return out

    def form(self, f):
        out = {}
        for (k, mu), a in f.items():
            for nu, c in self.expand(mu).items():
                _acc(out, (k, nu), a * c)
        return out


def frame_ring(R: OreRing, F):
    """Ring of the new derivations d'_j = sum_i Finv[j][i] d_i."""
    Finv = mat_inverse(F)
    dirs = []
    for j in range(R.n):
        d = {}
        for i in range(R.n):
            if Finv[j][i]:
                for x, c in R.dirs[i].items():
                    d[x] = d.get(x, QQ(0)) + Finv[j][i] * R.field.as_rational(c)
        dirs.append({x: c for x, c in d.items() if c})
    return OreRing(R.field, R.n, dirs)


class JetSystem:
    """Finite K-linear system on jets of order <= q (forms over unknowns 0..m-1)."""

    def __init__(self, ring: OreRing, m, equations, q=None, frame=None, names=None):
        self.ring = ring
        self.n = ring.n
        self.m = int(m)
        self.equations = [dict(e) for e in equations if e]
        for e in self.equations:
            for k, mu in e:
                if not 0 <= k < self.m or len(mu) != self.n:
                    raise DimensionMismatch(f"jet {(k, mu)} outside the system")
        top = max((sum(mu) for e in self.equations for _, mu in e), default=0)
        self.q = top if q is None else int(q)
        if top > self.q:
            raise DimensionMismatch(f"equation of order {top} in an order-{self.q} system")
        self.frame = frame if frame is not None else identity_frame(self.n)
        self.names = names

    def echelon(self):
        return echelonize(self.equations)

    def echelonized(self):
        E = self.echelon()
        return JetSystem(self.ring, self.m, E.sorted_rows(), self.q, self.frame, self.names)

    def rank(self):
        return len(self.echelon())

    def dim(self):
        """dim R_q = #jets up to order q minus rank."""
        return num_jets_upto(self.n, self.m, self.q) - self.rank()

    def text(self, style="jet"):
        return [form_text(self.ring, e, self.names, style) for e in self.equations]

    def __eq__(self, other):
        """Equality of echelonized forms in the fixed jet order."""
        if not isinstance(other, JetSystem):
            return NotImplemented
        if (self.n, self.m, self.q) != (other.n, other.m, other.q):
            return False
        return self.echelon().rows == other.echelon().rows

    def __repr__(self):
        return f"JetSystem(q={self.q}, {self.text()})"


def prolong_echelon(R, E, times=1, upto=None):
    """Echelon of all prolongations of E's rows by at most ``times`` derivations."""
    E = E.copy()
    # the echelon rewrites its rows in place, so keep private copies
    frontier = [dict(f) for f in E.rows.values()]
    for _ in range(times):
        new = []
        for f in frontier:
            for j in range(R.n):
                g = prolong_form(R, f, j)
                if E.add(dict(g)) is not None:
                    new.append(g)
        frontier = new
        if not frontier:
            break
    return E


def prolong(S: JetSystem, r: int) -> JetSystem:
    """R_{q+r}: every d_nu Phi with |nu| <= r, echelonized."""
    if r < 0:
        raise ValueError("prolongation order must be non-negative")
    E = prolong_echelon(S.ring, S.echelon(), r)
    return JetSystem(S.ring, S.m, E.sorted_rows(), S.q + r, S.frame, S.names)


def project(S: JetSystem, q: int) -> JetSystem:
    """Equations of S involving only jets of order <= q."""
    if q > S.q:
        raise ValueError(f"cannot project an order-{S.q} system to order {q}")
    E = S.echelon()
    rows = [E.rows[L] for L in E.leads() if sum(L[1]) <= q]
    return JetSystem(S.ring, S.m, rows, q, S.frame, S.names)


class SymbolTable:
    """Top-order parts of the equations of an order-q system."""

    def __init__(self, n, m, q, forms):
        self.n, self.m, self.q = n, m, q
        self.forms = forms

    def dim(self):
        return num_jets(self.n, self.m, self.q) - len(self.forms)


def top_part(f, q):
    return {j: a for j, a in f.items() if sum(j[1]) == q}


def symbol(S: JetSystem) -> SymbolTable:
    E = S.echelon()
    forms = [top_part(E.rows[L], S.q) for L in E.leads() if sum(L[1]) == S.q]
    return SymbolTable(S.n, S.m, S.q, forms)


def shift_form(f, nu):
    return {(k, tuple(a + b for a, b in zip(mu, nu))): c for (k, mu), c in f.items()}


def prolonged_symbol(tops, n, r):
    """Echelon of the r-th prolongation of symbol rows (pure shift of indices)."""
    E = Echelon()
    for f in tops:
        for nu in multi_indices(n, r):
            E.add(shift_form(f, nu))
    return E


def symbol_basis(n, m, t, E=None):
    """Basis of the kernel of the echelon E inside jets of exact order t."""
    jets = [(k, mu) for mu in multi_indices(n, t) for k in range(m)]
    if E is None:
        return [{j: QQ(1)} for j in jets], jets
    leads = set(E.rows)
    basis = []
    for fj in jets:
        if fj in leads:
            continue
        v = {fj: QQ(1)}
        for L, row in E.rows.items():
            c = row.get(fj)
            if c:
                v[L] = -c
        basis.append(v)
    return basis, jets


def _delta_image(vec, I, n):
    """delta of the cochain vec ⊗ dx^I: returns {(jet, J): coef}."""
    out = {}
    for (k, mu), c in vec.items():
        for i in range(n):
            if mu[i] == 0 or i in I:
                continue
            J = tuple(sorted(I + (i,)))
            sign = -1 if J.index(i) % 2 else 1
            _acc(out, ((k, inc(mu, i, -1)), J), c * sign)
    return out


def _rank(vectors):
    E = Echelon(key=repr)
    for v in vectors:
        E.add(v)
    return len(E)


def delta_spaces(S: JetSystem, r):
    """Bases of g_{t} for t = q+r-1, q+r, q+r+1 (g_{q-1} is the full space)."""
    sym = symbol(S)
    out = {}
    for t in (S.q + r - 1, S.q + r, S.q + r + 1):
        if t < 0:
            out[t] = []
        elif t < S.q:
            out[t] = symbol_basis(S.n, S.m, t)[0]
        else:
            out[t] = symbol_basis(S.n, S.m, t, prolonged_symbol(sym.forms, S.n, t - S.q))[0]
    return out


def delta_matrices(S: JetSystem, s, r):
    """The two delta maps around degree s at order q+r, as lists of image vectors.

    Returns (images of the basis of wedge^{s-1}⊗g_{q+r+1},
    images of the basis of wedge^s⊗g_{q+r}).
    """
    sp = delta_spaces(S, r)
    t = S.q + r
    first = [
        _delta_image(v, I, S.n)
        for I in (combinations(range(S.n), s - 1) if s >= 1 else [])
        for v in sp[t + 1]
    ]
    second = [_delta_image(v, I, S.n) for I in combinations(range(S.n), s) for v in sp[t]]
    return first, second, sp


def delta_cohomology(S: JetSystem, s, r=0):
    """dim H^s_{q+r}(g_q) = dim ker(delta on wedge^s⊗g_{q+r}) - dim im."""
    if not 0 <= s <= S.n:
        raise ValueError(f"cochain degree {s} outside 0..{S.n}")
    first, second, sp = delta_matrices(S, s, r)
    dom = comb(S.n, s) * len(sp[S.q + r])
    ker = dom - _rank(second)
    im = _rank(first)
    return ker - im


def delta_compose(S: JetSystem, s, r=0):
    """delta∘delta applied to every basis cochain of wedge^{s-1}⊗g_{q+r+1}; all must vanish."""
    first, _, _ = delta_matrices(S, s, r)
    out = []
    for img in first:
        acc = {}
        for (jet, J), c in img.items():
            for key, a in _delta_image({jet: c}, J, S.n).items():
                _acc(acc, key, a)
        out.append(acc)
    return out


class SectionTruncation:
    """Values f^k_mu in K for all jets of order <= q."""

    def __init__(self, ring, m, q, values):
        self.ring = ring
        self.m = m
        self.q = q
        self.values = {j: v for j, v in values.items() if v}

    def __getitem__(self, jet):
        return self.values.get(jet, self.ring.zero)

    def vector(self):
        """Values listed in ascending jet order."""
        jets = sorted(
            ((k, mu) for mu in multi_indices_upto(self.ring.n, self.q) for k in range(self.m)),
            key=jet_key,
        )
        return [self[j] for j in jets]

    def truncate(self, q):
        return SectionTruncation(
            self.ring, self.m, q, {j: v for j, v in self.values.items() if sum(j[1]) <= q}
        )

    def __add__(self, other):
        vals = dict(self.values)
        for j, v in other.values.items():
            _acc(vals, j, v)
        return SectionTruncation(self.ring, self.m, min(self.q, other.q), vals).truncate(
            min(self.q, other.q)
        )

    def __neg__(self):
        return SectionTruncation(self.ring, self.m, self.q, {j: -v for j, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, SectionTruncation) and self.q == other.q and self.values == other.values

    def __repr__(self):
        return f"Section(q={self.q}, {self.vector()})"


def sections_at_order(S: JetSystem, q=None):
    """K-basis of the solutions of S's equations at order q, one per parametric jet."""
    q = S.q if q is None else q
    T = prolong(S, q - S.q) if q > S.q else project(S, q) if q < S.q else S
    E = T.echelon()
    jets = sorted(
        ((k, mu) for mu in multi_indices_upto(S.n, q) for k in range(S.m)), key=jet_key
    )
    basis = []
    for pj in jets:
        if pj in E.rows:
            continue
        vals = {pj: S.ring.one}
        for L, row in E.rows.items():
            c = row.get(pj)
            if c:
                vals[L] = -c
        basis.append(SectionTruncation(S.ring, S.m, q, vals))
    return basis


def spencer_apply(R: OreRing, f: SectionTruncation, i):
    """(d_i f)^k_mu = ∂_i f^k_mu - f^k_{mu+1_i} for |mu| <= q-1 (i is 1-based)."""
    if f.q < 1:
        raise OrderTooLow("Spencer operator needs a section of order >= 1")
    j = i - 1
    vals = {}
    for mu in multi_indices_upto(R.n, f.q - 1):
        for k in range(f.m):
            v = R.dcoef(f[(k, mu)], j) - f[(k, inc(mu, j))]
            if v:
                vals[(k, mu)] = v
    return SectionTruncation(R, f.m, f.q - 1, vals)


def satisfies(S: JetSystem, f: SectionTruncation):
    """True when f solves every equation of S of order <= f.q."""
    for e in S.equations:
        if max(sum(mu) for _, mu in e) > f.q:
            continue
        tot = S.ring.zero
        for jet, a in e.items():
            tot = tot + a * f[jet]
        if tot:
            return False
    return True


def jet_class(jet):
    return class_of(jet[1])


def section_coordinates(f: SectionTruncation, basis):
    """c with f = sum c_t basis[t] (all at f's order), or None outside the span."""
    E = Echelon(track=True)
    for t, b in enumerate(basis):
        E.add(b.truncate(f.q).values, {t: f.ring.one})
    rest, prov = E.reduce(f.values, {})
    if rest:
        return None
    return [-prov.get(t, f.ring.zero) for t in range(len(basis))]
