"""Exact arithmetic over Q and over the rational function field Q(params, x1..xn).

Rationals are the multiprecision rationals of sympy's ``QQ`` domain (gmpy2 when
available).  Polynomials are sympy ``PolyElement`` objects in a graded-lex
ring.  :class:`RatFun` keeps numerator and denominator coprime with a monic
denominator, so equality of values is structural equality.

Only the variables ``x1..xn`` carry derivations; named parameters (such as a
constant ``a`` in a system) are transcendental constants.
"""

from __future__ import annotations

from functools import lru_cache

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing

from .errors import DivisionByZero, IndexOutOfRange

Rational = type(QQ(1, 2))
Poly = PolyElement

_ZERO = QQ(0)
_ONE = QQ(1)


def rational(num, den=1):
    """Canonical rational num/den."""
    if den == 0:
        raise DivisionByZero("zero denominator")
    return QQ(num, den)


def _canon(num, den):
    """Cancel and normalize; returns a RatFun."""
    if not den:
        raise DivisionByZero("division by zero in Q(x)")
    if not num:
        return RatFun(num.ring.zero, num.ring.one)
    if den.is_ground:
        c = den.LC
        if c != 1:
            num = num.quo_ground(c)
        return RatFun(num, num.ring.one)
    g = num.gcd(den)
    if not g.is_ground:
        num = num.exquo(g)
        den = den.exquo(g)
    c = den.LC
    if c != 1:
        num = num.quo_ground(c)
        den = den.quo_ground(c)
    if den.is_ground:
        return RatFun(num, num.ring.one)
    return RatFun(num, den)


class RatFun:
    """Element of Q(params, x) in canonical reduced form (monic denominator)."""

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den

    @property
    def ring(self):
        return self.num.ring

    def _lift(self, other):
        if isinstance(other, RatFun):
            return other
        if isinstance(other, PolyElement):
            return RatFun(other, other.ring.one)
        r = self.num.ring
        return RatFun(r(other), r.one)

    def __bool__(self):
        return bool(self.num)

    def is_ground(self):
        return self.den == 1 and self.num.is_ground

    def __add__(self, other):
        o = self._lift(other)
        d1, d2 = self.den, o.den
        if d2 == 1:
            return RatFun(self.num + o.num * d1, d1) if (self.num or o.num) else o
        if d1 == 1:
            return RatFun(self.num * d2 + o.num, d2)
        if d1 == d2:
            return _canon(self.num + o.num, d1)
        return _canon(self.num * d2 + o.num * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, (RatFun, PolyElement)):
            if other == 0:
                return RatFun(self.num.ring.zero, self.num.ring.one)
            return RatFun(self.num * self.num.ring.domain.convert(other), self.den)
        o = self._lift(other)
        n1, d1, n2, d2 = self.num, self.den, o.num, o.den
        if not n1 or not n2:
            return RatFun(n1.ring.zero, n1.ring.one)
        if d1 == 1 and d2 == 1:
            return RatFun(n1 * n2, d1)
        if not d2.is_ground and not n1.is_ground:
            g = n1.gcd(d2)
            if not g.is_ground:
                n1, d2 = n1.exquo(g), d2.exquo(g)
        if not d1.is_ground and not n2.is_ground:
            g = n2.gcd(d1)
            if not g.is_ground:
                n2, d1 = n2.exquo(g), d1.exquo(g)
        num, den = n1 * n2, d1 * d2
        c = den.LC
        if c != 1:
            num, den = num.quo_ground(c), den.quo_ground(c)
        return RatFun(num, den)

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise DivisionByZero("inverse of zero")
        c = self.num.LC
        return RatFun(self.den.quo_ground(c), self.num.quo_ground(c))

    def __truediv__(self, other):
        if not isinstance(other, (RatFun, PolyElement)):
            if other == 0:
                raise DivisionByZero("division by zero")
            return RatFun(self.num.quo_ground(self.num.ring.domain.convert(other)), self.den)
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        return RatFun(self.num ** k, self.den ** k)

    def __eq__(self, other):
        if isinstance(other, RatFun):
            return self.num == other.num and self.den == other.den
        if isinstance(other, PolyElement):
            return self.den == 1 and self.num == other
        try:
            return self.den == 1 and self.num == other
        except Exception:
            return NotImplemented

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __hash__(self):
        if self.is_ground():
            return hash(self.num.LC if self.num else _ZERO)
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RatFun({ratfun_text(self)})"


def _poly_var_diff(p, i):
    return p.diff(p.ring.gens[i])


def format_rational(c):
    c = QQ.convert(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def poly_text(p, names=None):
    """Polynomial text with ``^`` powers and ``*`` products, terms in grlex order."""
    if not p:
        return "0"
    names = names or [str(g) for g in p.ring.symbols]
    out = []
    for exp, c in p.terms():
        mono = "*".join(
            names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exp) if e
        )
        neg = c < 0
        a = -c if neg else c
        if mono:
            body = mono if a == 1 else f"{format_rational(a)}*{mono}"
        else:
            body = format_rational(a)
        out.append(("-" if neg else "+", body))
    s = "".join(f" {sg} {b}" for sg, b in out).strip()
    if s.startswith("+ "):
        s = s[2:]
    elif s.startswith("- "):
        s = "-" + s[2:]
    return s


def ratfun_text(a):
    if isinstance(a, RatFun):
        n = poly_text(a.num)
        if a.den == 1:
            return n
        d = poly_text(a.den)
        if len(a.num.terms()) > 1:
            n = f"({n})"
        if len(a.den.terms()) > 1 or not a.den.is_monomial:
            d = f"({d})"
        return f"{n}/{d}"
    return format_rational(a)


@lru_cache(maxsize=None)
def _make_ring(names):
    return PolyRing(names, QQ, grlex)


class Field:
    """Coefficient field ``Q(params, x1..x_nx)`` with derivations along x1..x_nx.

    With no parameters and ``nx = 0`` the elements are plain rationals.
    """

    def __init__(self, nx=0, params=()):
        self.nx = int(nx)
        self.params = tuple(params)
        self.names = self.params + tuple(f"x{i}" for i in range(1, self.nx + 1))
        self.trivial = not self.names
        if self.trivial:
            self.ring = None
            self.zero = _ZERO
            self.one = _ONE
        else:
            self.ring = _make_ring(self.names)
            self.zero = RatFun(self.ring.zero, self.ring.one)
            self.one = RatFun(self.ring.one, self.ring.one)
        self._xoff = len(self.params)

    def __eq__(self, other):
        return isinstance(other, Field) and (self.nx, self.params) == (other.nx, other.params)

    def __hash__(self):
        return hash((self.nx, self.params))

    def __repr__(self):
        if self.trivial:
            return "Field(Q)"
        return f"Field(Q({', '.join(self.names)}))"

    @property
    def is_constant_field(self):
        """True when no derivation acts, i.e. there are no x variables."""
        return self.nx == 0

    def __call__(self, v):
        if self.trivial:
            if isinstance(v, RatFun):
                if not v.is_ground():
                    raise ValueError("non-constant value in Q")
                return QQ.convert(v.num.LC) if v.num else _ZERO
            return QQ.convert(v)
        if isinstance(v, RatFun):
            if v.ring is self.ring:
                return v
            return self.embed(v)
        if isinstance(v, PolyElement):
            return RatFun(v, self.ring.one)
        return RatFun(self.ring(QQ.convert(v)), self.ring.one)

    def gen(self, name):
        if self.trivial or name not in self.names:
            raise IndexOutOfRange(f"unknown field generator {name!r}")
        g = self.ring.gens[self.names.index(name)]
        return RatFun(g, self.ring.one)

    def x(self, i):
        if not 1 <= i <= self.nx:
            raise IndexOutOfRange(f"x{i} outside 1..{self.nx}")
        return self.gen(f"x{i}")

    def derive(self, a, i):
        """Partial derivative along x_i (i is 1-based); zero on constants."""
        if i < 1:
            raise IndexOutOfRange(f"derivation index {i}")
        if self.trivial or i > self.nx or not isinstance(a, RatFun):
            return self.zero
        k = self._xoff + i - 1
        n, d = a.num, a.den
        if d == 1:
            return RatFun(_poly_var_diff(n, k), d)
        dn = _poly_var_diff(n, k)
        dd = _poly_var_diff(d, k)
        return _canon(dn * d - n * dd, d * d)

    def derive_dir(self, a, direction):
        """Derivative along a constant vector ``{x index: coefficient}``."""
        out = self.zero
        for i, c in direction.items():
            t = self.derive(a, i)
            if t:
                out = out + t * c
        return out

    def is_const(self, a):
        if self.trivial or not isinstance(a, RatFun):
            return True
        if self.nx == 0:
            return True
        return not any(self.derive(a, i) for i in range(1, self.nx + 1))

    def is_rational(self, a):
        return not isinstance(a, RatFun) or a.is_ground()

    def as_rational(self, a):
        if isinstance(a, RatFun):
            return QQ.convert(a.num.LC) if a.num else _ZERO
        return QQ.convert(a)

    def text(self, a):
        return ratfun_text(a)

    def embed(self, a):
        """Map an element of another Field into this one by generator names."""
        if not isinstance(a, RatFun):
            return self(QQ.convert(a))
        src = a.ring.symbols
        names = [str(s) for s in src]
        pos = []
        for nm in names:
            if nm not in self.names:
                raise ValueError(f"generator {nm} not available in {self!r}")
            pos.append(self.names.index(nm))

        def conv(p):
            terms = {}
            for exp, c in p.terms():
                e = [0] * len(self.names)
                for j, v in enumerate(exp):
                    if v:
                        e[pos[j]] = v
                terms[tuple(e)] = c
            return self.ring.from_dict(terms) if terms else self.ring.zero

        if self.trivial:
            return self(a)
        return _canon(conv(a.num), conv(a.den))

    def extend(self, extra_params):
        """Field with additional constant parameters appended."""
        return Field(self.nx, self.params + tuple(p for p in extra_params if p not in self.params))


def field_arith(a, b, operation):
    """Field operation ``add|sub|mul|div`` on canonical elements."""
    if operation == "add":
        return a + b
    if operation == "sub":
        return a - b
    if operation == "mul":
        return a * b
    if operation == "div":
        if not b:
            raise DivisionByZero("division by zero")
        return a / b
    raise ValueError(f"unknown operation {operation!r}")


def derive(field, a, i):
    """Partial derivative of ``a`` along x_i; ``i`` must lie in 1..n."""
    if not 1 <= i <= field.nx:
        raise IndexOutOfRange(f"derivation index {i} outside 1..{field.nx}")
    return field.derive(a, i)
