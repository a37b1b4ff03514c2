"""The operator ring D = K[d1..dn], operator matrices and formal adjoints.

Everything linear is stored as a *form*: a dict ``{(k, mu): coefficient}``
where ``k`` is a 0-based unknown (or row) index and ``mu`` a multi-index.
A row of an operator matrix, the jet polynomial it induces and a D-combination
of rows all share this shape, so composition is just substitution of
prolongations.  Coefficients sit on the left of ``d_mu``.

An :class:`OreRing` may use derivations along constant directions
(``dirs[j] = {x index: coefficient}``), which covers linear frame changes
and subrings K[d1..di] without special cases.
"""

from __future__ import annotations

from math import comb

from .arith import Field
from .errors import DimensionMismatch, IndexOutOfRange


def zero_mi(n):
    return (0,) * n


def unit_mi(n, j):
    return tuple(1 if i == j else 0 for i in range(n))


def inc(mu, j, by=1):
    return mu[:j] + (mu[j] + by,) + mu[j + 1:]


def mi_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def mi_divides(a, b):
    return all(x <= y for x, y in zip(a, b))


def length(mu):
    return sum(mu)


def class_of(mu):
    """Smallest (1-based) index with a nonzero exponent; 0 for the empty index."""
    for i, e in enumerate(mu):
        if e:
            return i + 1
    return 0


def jet_key(jet):
    """Total order on jets ``(k, mu)``: larger key means larger jet.

    Order first, then the smallest index where exponents differ decides
    (smaller exponent wins), then the smaller unknown index wins.  Within an
    order this makes higher class larger.
    """
    k, mu = jet
    return (sum(mu), tuple(-e for e in mu), -k)


def multi_indices(n, q):
    """All multi-indices of length exactly ``q``."""
    if n == 0:
        return [()] if q == 0 else []
    if n == 1:
        return [(q,)]
    out = []
    for e in range(q, -1, -1):
        for rest in multi_indices(n - 1, q - e):
            out.append((e,) + rest)
    return out


def multi_indices_upto(n, q):
    out = []
    for s in range(q + 1):
        out.extend(multi_indices(n, s))
    return out


def sub_indices(mu):
    """All lambda with lambda <= mu componentwise."""
    out = [()]
    for e in mu:
        out = [t + (v,) for t in out for v in range(e + 1)]
    return out


def _acc(out, key, a):
    s = out.get(key)
    if s is None:
        if a:
            out[key] = a
        return
    v = s + a
    if v:
        out[key] = v
    else:
        del out[key]


def form_add(f, g, scale=None):
    out = dict(f)
    for key, a in g.items():
        _acc(out, key, a if scale is None else scale * a)
    return out


def form_scale(f, c):
    if not c:
        return {}
    return {key: c * a for key, a in f.items()}


def form_order(f):
    return max((sum(mu) for _, mu in f), default=-1)


def form_lead(f):
    return max(f, key=jet_key) if f else None


class OreRing:
    """D = K[d1..dn] over ``field``; derivation j acts along ``dirs[j]``.

    ``labels`` are the digits printed for each derivation.
    """

    def __init__(self, field: Field, n: int, dirs=None, labels=None):
        self.field = field
        self.n = int(n)
        if dirs is None:
            dirs = [{j + 1: 1} for j in range(self.n)]
            self._standard = True
        else:
            dirs = [dict(d) for d in dirs]
            self._standard = all(d == {j + 1: 1} for j, d in enumerate(dirs))
        if len(dirs) != self.n:
            raise DimensionMismatch("one direction per derivation required")
        self.dirs = [{i: field(c) if not field.trivial else c for i, c in d.items()} for d in dirs]
        self.labels = list(labels) if labels is not None else [str(j + 1) for j in range(self.n)]
        self.zero = field.zero
        self.one = field.one

    def __eq__(self, other):
        return (
            isinstance(other, OreRing)
            and self.field == other.field
            and self.n == other.n
            and self.dirs == other.dirs
        )

    def __hash__(self):
        return hash((self.field, self.n))

    def __repr__(self):
        return f"OreRing({self.field!r}, n={self.n})"

    @property
    def constant_coefficients(self):
        return self.field.nx == 0

    def dcoef(self, a, j):
        """Action of derivation j (0-based) on a coefficient."""
        if self.field.nx == 0:
            return self.zero
        if self._standard:
            return self.field.derive(a, j + 1) if j < self.field.nx else self.zero
        return self.field.derive_dir(a, self.dirs[j])

    def dcoef_mi(self, a, mu):
        for j, e in enumerate(mu):
            for _ in range(e):
                if not a:
                    return a
                a = self.dcoef(a, j)
        return a

    def mi_text(self, mu):
        return "".join(self.labels[j] * e for j, e in enumerate(mu))


def prolong_form(R: OreRing, f, j):
    """Formal derivative d_j applied to a form: shift every jet, add coefficient derivatives."""
    out = {}
    for (k, mu), a in f.items():
        _acc(out, (k, inc(mu, j)), a)
        if R.field.nx:
            da = R.dcoef(a, j)
            if da:
                _acc(out, (k, mu), da)
    return out


class Prolonger:
    """Cache of d_nu applied to rows of a fixed list of forms."""

    def __init__(self, R: OreRing, rows):
        self.R = R
        self.rows = rows
        self.cache = {}

    def get(self, t, nu):
        key = (t, nu)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if not any(nu):
            res = self.rows[t]
        else:
            j = max(i for i, e in enumerate(nu) if e)
            res = prolong_form(self.R, self.get(t, inc(nu, j, -1)), j)
        self.cache[key] = res
        return res


def apply_mi(R, mu, f):
    """d_mu applied to a form."""
    for j, e in enumerate(mu):
        for _ in range(e):
            f = prolong_form(R, f, j)
    return f


def compose(R: OreRing, C, A, prolonger=None):
    """Rows of C∘A, where C's forms are indexed by rows of A."""
    P = prolonger or Prolonger(R, A)
    out = []
    for row in C:
        acc = {}
        for (t, mu), c in row.items():
            if t >= len(A):
                raise DimensionMismatch(f"row index {t} outside a {len(A)}-row operator")
            for key, a in P.get(t, mu).items():
                _acc(acc, key, c * a)
        out.append(acc)
    return out


def combine(R, combo, prolonger):
    """Single D-combination ``combo`` of the rows held by ``prolonger``."""
    acc = {}
    for (t, mu), c in combo.items():
        for key, a in prolonger.get(t, mu).items():
            _acc(acc, key, c * a)
    return acc


def scalar_adjoint_terms(R: OreRing, a, mu):
    """ad(a d_mu) = (-1)^|mu| d_mu ∘ a, as ``{lambda: coefficient}``."""
    sign = -1 if sum(mu) % 2 else 1
    if R.field.nx == 0:
        return {mu: a if sign > 0 else -a}
    out = {}
    for lam in sub_indices(mu):
        diff = mi_sub(mu, lam)
        c = 1
        for x, y in zip(mu, lam):
            c *= comb(x, y)
        b = R.dcoef_mi(a, diff)
        if b:
            v = b * (c * sign)
            _acc(out, lam, v)
    return out


def adjoint_rows(R: OreRing, rows, m):
    """Adjoint of a p×m operator matrix given as p forms: m forms over p row indices."""
    out = [dict() for _ in range(m)]
    for t, row in enumerate(rows):
        for (k, mu), a in row.items():
            if k >= m:
                raise DimensionMismatch(f"unknown index {k + 1} outside 1..{m}")
            for lam, b in scalar_adjoint_terms(R, a, mu).items():
                _acc(out[k], (t, lam), b)
    return out


def coef_text(field, a):
    return field.text(a)


def _wrap_coef(s):
    """(negated, text) for a coefficient placed in front of a jet."""
    neg = s.startswith("-")
    body = s[1:] if neg else s
    depth = 0
    top_sum = False
    for ch in body:
        depth += ch == "("
        depth -= ch == ")"
        if ch == " " and depth == 0:
            top_sum = True
    if top_sum:
        return False, f"({s})"
    if any(ch in body for ch in "/+-"):
        body = f"({body})"
    return neg, body


def form_text(R: OreRing, f, names=None, style="op"):
    """Text of a form.  ``style='op'`` gives ``d13 y1``; ``'jet'`` gives ``y1_13``."""
    if not f:
        return "0"
    parts = []
    for key in sorted(f, key=jet_key, reverse=True):
        k, mu = key
        a = f[key]
        uname = names[k] if names else f"y{k + 1}"
        lab = R.mi_text(mu)
        if style == "jet":
            var = f"{uname}_{lab}" if lab else uname
        else:
            var = f"d{lab} {uname}" if lab else uname
        neg, cs = _wrap_coef(coef_text(R.field, a))
        body = var if cs == "1" else f"{cs}*{var}"
        parts.append(("-" if neg else "+", body))
    s = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
    for sg, b in parts[1:]:
        s += f" {sg} {b}"
    return s


class OreOperator:
    """Scalar operator ``sum a_mu d_mu`` with coefficients on the left."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: OreRing, terms=None):
        self.ring = ring
        self.terms = {mu: c for mu, c in (terms or {}).items() if c}
        for mu in self.terms:
            if len(mu) != ring.n:
                raise DimensionMismatch(f"multi-index {mu} for n={ring.n}")

    @classmethod
    def d(cls, ring, *indices):
        """Product of derivations, 1-based indices."""
        mu = [0] * ring.n
        for i in indices:
            if not 1 <= i <= ring.n:
                raise IndexOutOfRange(f"d{i} outside 1..{ring.n}")
            mu[i - 1] += 1
        return cls(ring, {tuple(mu): ring.one})

    @classmethod
    def coef(cls, ring, a):
        return cls(ring, {zero_mi(ring.n): ring.field(a)})

    def as_form(self, k=0):
        return {(k, mu): c for mu, c in self.terms.items()}

    @classmethod
    def from_form(cls, ring, f):
        return cls(ring, {mu: c for (_, mu), c in f.items()})

    def _check(self, other):
        if not isinstance(other, OreOperator):
            other = OreOperator.coef(self.ring, other)
        if other.ring != self.ring:
            raise DimensionMismatch("operators live in different rings")
        return other

    def __add__(self, other):
        other = self._check(other)
        return OreOperator.from_form(self.ring, form_add(self.as_form(), other.as_form()))

    __radd__ = __add__

    def __neg__(self):
        return OreOperator(self.ring, {mu: -c for mu, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        return op_mul(self, other)

    def __rmul__(self, other):
        return op_mul(self._check(other), self)

    def __eq__(self, other):
        if not isinstance(other, OreOperator):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms))

    def __bool__(self):
        return bool(self.terms)

    def order(self):
        return max((sum(mu) for mu in self.terms), default=-1)

    def adjoint(self):
        out = {}
        for mu, a in self.terms.items():
            for lam, b in scalar_adjoint_terms(self.ring, a, mu).items():
                _acc(out, lam, b)
        return OreOperator(self.ring, out)

    def text(self):
        if not self.terms:
            return "0"
        parts = []
        for mu in sorted(self.terms, key=lambda m: jet_key((0, m)), reverse=True):
            neg, cs = _wrap_coef(coef_text(self.ring.field, self.terms[mu]))
            lab = self.ring.mi_text(mu)
            if not lab:
                body = cs
            else:
                body = f"d{lab}" if cs == "1" else f"{cs}*d{lab}"
            parts.append(("-" if neg else "+", body))
        s = parts[0][1] if parts[0][0] == "+" else "-" + parts[0][1]
        for sg, b in parts[1:]:
            s += f" {sg} {b}"
        return s

    def __repr__(self):
        return f"OreOperator({self.text()})"


def op_mul(P: OreOperator, Q: OreOperator) -> OreOperator:
    """Composition P∘Q in canonical left-coefficient form."""
    if P.ring != Q.ring:
        raise DimensionMismatch("operators live in different rings")
    (row,) = compose(P.ring, [P.as_form()], [Q.as_form()])
    return OreOperator.from_form(P.ring, row)


class OperatorMatrix:
    """p×m matrix over D; row t is stored as the form sum_k,mu a y^k_mu."""

    def __init__(self, ring: OreRing, rows, m):
        self.ring = ring
        self.m = int(m)
        self.rows = [{key: c for key, c in r.items() if c} for r in rows]
        for r in self.rows:
            for k, mu in r:
                if not 0 <= k < self.m:
                    raise DimensionMismatch(f"unknown index {k + 1} outside 1..{self.m}")
                if len(mu) != ring.n:
                    raise DimensionMismatch(f"multi-index {mu} for n={ring.n}")

    @classmethod
    def from_entries(cls, ring, entries, m=None):
        """Build from a list of lists of :class:`OreOperator`."""
        m = m if m is not None else (len(entries[0]) if entries else 0)
        rows = []
        for line in entries:
            if len(line) != m:
                raise DimensionMismatch("ragged operator matrix")
            r = {}
            for k, P in enumerate(line):
                for mu, c in P.terms.items():
                    r[(k, mu)] = c
            rows.append(r)
        return cls(ring, rows, m)

    @property
    def p(self):
        return len(self.rows)

    def entry(self, t, k):
        return OreOperator(self.ring, {mu: c for (kk, mu), c in self.rows[t].items() if kk == k})

    def entries(self):
        return [[self.entry(t, k) for k in range(self.m)] for t in range(self.p)]

    def adjoint(self):
        return OperatorMatrix(self.ring, adjoint_rows(self.ring, self.rows, self.m), self.p)

    def compose(self, other: "OperatorMatrix"):
        """self∘other, with self's columns matching other's rows."""
        if self.m != other.p:
            raise DimensionMismatch(f"cannot compose {self.p}x{self.m} with {other.p}x{other.m}")
        return OperatorMatrix(self.ring, compose(self.ring, self.rows, other.rows), other.m)

    def is_zero(self):
        return not any(self.rows)

    def order(self):
        return max((form_order(r) for r in self.rows), default=-1)

    def __eq__(self, other):
        return (
            isinstance(other, OperatorMatrix)
            and self.ring == other.ring
            and self.m == other.m
            and self.rows == other.rows
        )

    def text_rows(self, names=None, style="op"):
        return [form_text(self.ring, r, names, style) for r in self.rows]

    def __repr__(self):
        return f"OperatorMatrix({self.p}x{self.m}: {self.text_rows()})"


def apply_to_jets(A: OperatorMatrix):
    """Row t becomes the K-linear jet form sum a y^k_mu (copies of the stored forms)."""
    return [dict(r) for r in A.rows]
