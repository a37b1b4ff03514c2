"""Text format for linear systems.

::

    vars 3 unknowns 2 field Q(x) const a
    d3 y1 = 0
    d2 y1 - d1 y2 + a*x2*y2 = 0

``d13 y1`` is d1 d3 applied to y1 and ``y1_13`` is the same jet.  A constant
declared as ``const a=2`` is replaced by its value; a bare ``const a`` is a
transcendental parameter of the coefficient field.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field

from sympy.polys.domains import QQ

from .arith import Field, format_rational
from .errors import DivisionByZero, DSLSyntaxError, SemanticError
from .homology import Presentation
from .involution import CompletionConfig
from .ore import OperatorMatrix, OreRing, _acc, form_text

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")
_OPTIONS = ("max_rounds", "max_frame_retries", "seed", "frame_bound", "max_order")


@dataclass
class SystemSpec:
    n: int
    m: int
    field_kind: str = "Q"
    constants: tuple = ()
    equations: list = dc_field(default_factory=list)
    options: dict = dc_field(default_factory=dict)

    @property
    def field(self):
        params = tuple(name for name, value in self.constants if value is None)
        return Field(self.n if self.field_kind == "Q(x)" else 0, params)

    @property
    def ring(self):
        return OreRing(self.field, self.n)

    @property
    def names(self):
        return [f"y{k + 1}" for k in range(self.m)]

    def config(self, **overrides):
        opts = dict(self.options)
        opts.update({k: v for k, v in overrides.items() if v is not None})
        return CompletionConfig(**opts)

    def matrix(self):
        return OperatorMatrix(self.ring, self.equations, self.m)

    def presentation(self, cfg=None):
        return Presentation(self.matrix(), cfg or self.config(), self.names)

    def __eq__(self, other):
        return (
            isinstance(other, SystemSpec)
            and (self.n, self.m, self.field_kind) == (other.n, other.m, other.field_kind)
            and tuple(self.constants) == tuple(other.constants)
            and self.options == other.options
            and self.equations == other.equations
        )


class _Tokens:
    def __init__(self, text, line):
        self.toks = []
        pos = 0
        while pos < len(text):
            mt = _TOKEN.match(text, pos)
            if mt.group(0).strip() == "":
                break
            col = mt.start(mt.lastindex) + 1
            if mt.group(1) is not None:
                self.toks.append(("num", mt.group(1), col))
            elif mt.group(2) is not None:
                self.toks.append(("id", mt.group(2), col))
            else:
                self.toks.append(("op", mt.group(3), col))
            pos = mt.end()
        self.i = 0
        self.line = line
        self.end_col = len(text) + 1

    def peek(self, ahead=0):
        j = self.i + ahead
        return self.toks[j] if j < len(self.toks) else ("end", "", self.end_col)

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise DSLSyntaxError(msg, self.line, tok[2])

    def expect(self, kind, value=None):
        t = self.peek()
        if t[0] != kind or (value is not None and t[1] != value):
            want = value or kind
            self.error(f"expected {want!r}, found {t[1] or 'end of line'!r}")
        return self.next()


_DOP = re.compile(r"d(\d+)$")
_UNK = re.compile(r"y(\d*)(?:_(\d+))?$")
_XVAR = re.compile(r"x(\d+)$")


def _strip_comment(line):
    return line.split("#", 1)[0]


def _parse_header(toks: _Tokens):
    toks.expect("id", "vars")
    n = int(toks.expect("num")[1])
    toks.expect("id", "unknowns")
    m = int(toks.expect("num")[1])
    kind = None
    consts = []
    options = {}
    while toks.peek()[0] != "end":
        t = toks.next()
        if t[:2] == ("id", "field"):
            f = toks.expect("id")
            if f[1] != "Q":
                toks.error("field must be Q or Q(x)", f)
            if toks.peek()[1] == "(":
                toks.next()
                toks.expect("id", "x")
                toks.expect("op", ")")
                kind = "Q(x)"
            else:
                kind = "Q"
        elif t[:2] == ("id", "const"):
            name = toks.expect("id")
            if _DOP.match(name[1]) or _UNK.match(name[1]) or _XVAR.match(name[1]):
                toks.error(f"{name[1]!r} cannot name a constant", name)
            value = None
            if toks.peek()[1] == "=":
                toks.next()
                value = _parse_rational(toks)
            consts.append((name[1], value))
        elif t[:2] == ("id", "option"):
            key = toks.expect("id")
            if key[1] not in _OPTIONS:
                toks.error(f"unknown option {key[1]!r}", key)
            toks.expect("op", "=")
            options[key[1]] = int(toks.expect("num")[1])
        else:
            toks.error(f"unexpected {t[1]!r} in header", t)
    if n < 1 or m < 1:
        raise SemanticError("vars and unknowns must be positive")
    return n, m, kind, tuple(consts), options


def _parse_rational(toks):
    sign = 1
    if toks.peek()[1] == "-":
        toks.next()
        sign = -1
    num = int(toks.expect("num")[1])
    den = 1
    if toks.peek()[1] == "/":
        toks.next()
        den = int(toks.expect("num")[1])
        if den == 0:
            raise SemanticError("zero denominator in constant")
    return QQ(sign * num, den)


class _EqParser:
    def __init__(self, toks, n, m, F, consts, allow_x):
        self.t = toks
        self.n = n
        self.m = m
        self.F = F
        self.consts = dict(consts)
        self.allow_x = allow_x
        self.used_x = False

    # coefficient expressions ---------------------------------------------
    def atom(self):
        t = self.t.peek()
        if t[0] == "num":
            self.t.next()
            return self.F(QQ(int(t[1])))
        if t[1] == "(":
            self.t.next()
            v = self.cexpr()
            self.t.expect("op", ")")
            return v
        if t[0] == "id":
            mx = _XVAR.match(t[1])
            if mx:
                i = int(mx.group(1))
                if not 1 <= i <= self.n:
                    raise SemanticError(f"x{i} outside x1..x{self.n} (line {self.t.line})")
                if not self.allow_x:
                    raise SemanticError(f"x{i} used over the constant field Q (line {self.t.line})")
                self.used_x = True
                self.t.next()
                return self.F.x(i)
            if t[1] in self.consts:
                self.t.next()
                v = self.consts[t[1]]
                return self.F(v) if v is not None else self.F.gen(t[1])
            if not (_DOP.match(t[1]) or _UNK.match(t[1])):
                raise SemanticError(f"undeclared constant {t[1]!r} (line {self.t.line}, column {t[2]})")
        self.t.error(f"unexpected {t[1] or 'end of line'!r}")

    def power(self):
        v = self.atom()
        if self.t.peek()[1] == "^":
            self.t.next()
            v = v ** int(self.t.expect("num")[1])
        return v

    def unary(self):
        if self.t.peek()[1] == "-":
            self.t.next()
            return -self.unary()
        return self.power()

    def cterm(self):
        v = self.unary()
        while self.t.peek()[1] in ("*", "/"):
            op = self.t.next()
            w = self.unary()
            if op[1] == "*":
                v = v * w
            else:
                if not w:
                    raise DSLSyntaxError("division by zero", self.t.line, op[2])
                v = v / w
        return v

    def cexpr(self):
        v = self.cterm()
        while self.t.peek()[1] in ("+", "-"):
            op = self.t.next()[1]
            w = self.cterm()
            v = v + w if op == "+" else v - w
        return v

    # linear terms ----------------------------------------------------------
    def _starts_coef(self, t):
        if t[0] == "num" or t[1] == "(":
            return True
        return t[0] == "id" and not _DOP.match(t[1]) and not _UNK.match(t[1])

    def term(self, out, sign):
        coef = self.F.one
        mu = [0] * self.n
        saw_dop = False
        unknown = None
        # leading signs, as in "a + -2*y1"
        while self.t.peek()[1] in ("+", "-"):
            if self.t.next()[1] == "-":
                sign = -sign
        while True:
            t = self.t.peek()
            if t[0] == "id" and _DOP.match(t[1]):
                for ch in _DOP.match(t[1]).group(1):
                    j = int(ch)
                    if not 1 <= j <= self.n:
                        raise SemanticError(f"derivation d{j} outside d1..d{self.n} "
                                            f"(line {self.t.line}, column {t[2]})")
                    mu[j - 1] += 1
                saw_dop = True
                self.t.next()
                continue
            if t[0] == "id" and _UNK.match(t[1]):
                mu_ = _UNK.match(t[1])
                idx = mu_.group(1)
                if idx == "":
                    if self.m != 1:
                        self.t.error("bare 'y' needs an index when there are several unknowns", t)
                    k = 1
                else:
                    k = int(idx)
                if not 1 <= k <= self.m:
                    raise SemanticError(f"unknown y{k} outside y1..y{self.m} "
                                        f"(line {self.t.line}, column {t[2]})")
                for ch in mu_.group(2) or "":
                    j = int(ch)
                    if not 1 <= j <= self.n:
                        raise SemanticError(f"jet index {j} outside 1..{self.n} (line {self.t.line})")
                    mu[j - 1] += 1
                unknown = k - 1
                self.t.next()
                break
            if self._starts_coef(t):
                if saw_dop:
                    self.t.error("coefficient after a derivative; write it in front", t)
                coef = coef * self.power()
                while self.t.peek()[1] == "/":
                    op = self.t.next()
                    w = self.power()
                    if not w:
                        raise DSLSyntaxError("division by zero", self.t.line, op[2])
                    coef = coef / w
                if self.t.peek()[1] == "*":
                    self.t.next()
                    if not (self._starts_coef(self.t.peek()) or self.t.peek()[0] == "id"):
                        self.t.error("expected a factor after '*'")
                continue
            break
        if unknown is None:
            if saw_dop:
                self.t.error("derivative without an unknown")
            return coef * sign
        _acc(out, (unknown, tuple(mu)), coef * sign)
        return None

    def expr(self, out, sign):
        const = self.F.zero
        s = sign
        if self.t.peek()[1] in ("+", "-"):
            s = sign if self.t.next()[1] == "+" else -sign
        while True:
            start = self.t.peek()
            if start[0] == "end" or start[1] == "=":
                self.t.error("expected a term")
            c = self.term(out, s)
            if c is not None:
                const = const + c
            nxt = self.t.peek()
            if nxt[1] in ("+", "-"):
                self.t.next()
                s = sign if nxt[1] == "+" else -sign
                continue
            return const


def parse_system(text: str) -> SystemSpec:
    lines = text.splitlines()
    body = [(i + 1, _strip_comment(l)) for i, l in enumerate(lines)]
    body = [(i, l) for i, l in body if l.strip()]
    if not body:
        raise DSLSyntaxError("empty input", 1, 1)
    hline, htext = body[0]
    n, m, kind, consts, options = _parse_header(_Tokens(htext, hline))
    names = [c[0] for c in consts]
    if len(set(names)) != len(names):
        raise SemanticError("constant declared twice")
    uses_x = any(re.search(r"\bx\d", l) for _, l in body[1:])
    if kind is None:
        kind = "Q(x)" if uses_x else "Q"
    spec = SystemSpec(n, m, kind, consts, [], options)
    try:
        CompletionConfig(**options)
    except (TypeError, ValueError) as exc:
        raise SemanticError(f"bad option: {exc}")
    F = spec.field
    eqs = []
    for line, l in body[1:]:
        toks = _Tokens(l, line)
        p = _EqParser(toks, n, m, F, consts, kind == "Q(x)")
        row = {}
        try:
            c1 = p.expr(row, 1)
            toks.expect("op", "=")
            c2 = p.expr(row, -1)
        except DivisionByZero as exc:
            raise DSLSyntaxError(str(exc), line, 1)
        if toks.peek()[0] != "end":
            toks.error(f"unexpected {toks.peek()[1]!r} after the equation")
        if c1 - c2:
            raise SemanticError(f"inhomogeneous term on line {line}; only linear homogeneous systems")
        eqs.append({k: v for k, v in row.items() if v})
    spec.equations = eqs
    return spec


def print_system(spec: SystemSpec) -> str:
    head = f"vars {spec.n} unknowns {spec.m} field {spec.field_kind}"
    for name, value in spec.constants:
        head += f" const {name}" if value is None else f" const {name}={format_rational(value)}"
    for key in _OPTIONS:
        if key in spec.options:
            head += f" option {key}={spec.options[key]}"
    R = spec.ring
    out = [head]
    for eq in spec.equations:
        out.append(f"{form_text(R, eq, spec.names, 'op')} = 0")
    return "\n".join(out) + "\n"


def load_system(path) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())
