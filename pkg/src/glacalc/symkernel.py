"""Exact rational functions over named coordinates.

A :class:`ScalarExpr` is a quotient of two multivariate polynomials with
rational coefficients, kept in a canonical form (coprime, monic denominator)
so that equality and the zero test are plain structural comparisons.

The polynomial ring, its arithmetic and its GCD come from sympy's sparse
``PolyRing``; canonicalisation, the expression grammar, the printer and
substitution live here.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Iterator, Mapping, Sequence

from sympy import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

__all__ = [
    "CoordinateSet",
    "ScalarExpr",
    "ExprSyntaxError",
    "UnknownCoordinateError",
    "ZeroDenominatorError",
    "parse_expr",
    "arith",
    "partial",
    "substitute",
    "is_zero",
]

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class ExprSyntaxError(ValueError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownCoordinateError(ValueError):
    pass


class ZeroDenominatorError(ZeroDivisionError):
    pass


@lru_cache(maxsize=None)
def _ring(names: tuple[str, ...]) -> PolyRing:
    return PolyRing(names, QQ, grlex)


class CoordinateSet:
    """Ordered, duplicate-free list of coordinate names (possibly empty)."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str] = ()):
        names = tuple(names)
        for n in names:
            if not isinstance(n, str) or not _IDENT.match(n):
                raise ValueError(f"invalid coordinate identifier {n!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate coordinate names in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def numbered(cls, prefix: str, count: int) -> "CoordinateSet":
        return cls(f"{prefix}{i}" for i in range(1, count + 1))

    @property
    def ring(self) -> PolyRing:
        return _ring(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownCoordinateError(f"unknown coordinate {name!r}") from None

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CoordinateSet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"CoordinateSet({list(self.names)!r})"

    # convenience constructors
    def var(self, name: str) -> "ScalarExpr":
        return ScalarExpr._raw(self, self.ring.gens[self.index(name)], self.ring.one)

    def const(self, value) -> "ScalarExpr":
        return ScalarExpr.const(self, value)

    def zero(self) -> "ScalarExpr":
        return ScalarExpr._raw(self, self.ring.zero, self.ring.one)

    def one(self) -> "ScalarExpr":
        return ScalarExpr._raw(self, self.ring.one, self.ring.one)

    def parse(self, source: str) -> "ScalarExpr":
        return parse_expr(source, self)


def _gcd(p, q):
    """Polynomial gcd with cheap exits for ground operands."""
    ring = p.ring
    if not p:
        return q
    if not q:
        return p
    if p.is_ground or q.is_ground:
        return ring.one
    g = p.gcd(q)
    # sympy may hand back a non-unit constant over QQ
    if g.is_ground:
        return ring.one
    return g.monic() if g.LC != 1 else g


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


class ScalarExpr:
    """Immutable canonical rational function ``num/den`` over a CoordinateSet.

    Invariants: ``gcd(num, den) = 1``, ``den`` is monic under graded-lex
    order, and zero is ``0/1``.
    """

    __slots__ = ("coords", "num", "den", "_hash")

    def __init__(self, coords: CoordinateSet, num, den=None):
        ring = coords.ring
        num = ring(num)
        den = ring.one if den is None else ring(den)
        if not den:
            raise ZeroDenominatorError("division by the zero polynomial")
        n, d = _canonical(num, den)
        self.coords = coords
        self.num = n
        self.den = d
        self._hash = None

    @classmethod
    def _raw(cls, coords, num, den) -> "ScalarExpr":
        obj = object.__new__(cls)
        obj.coords = coords
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @classmethod
    def const(cls, coords: CoordinateSet, value) -> "ScalarExpr":
        ring = coords.ring
        return cls._raw(coords, ring(QQ.convert(Fraction(value))), ring.one)

    # -- predicates ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.num

    def is_polynomial(self) -> bool:
        return self.den.is_one

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_one

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return _to_fraction(self.num.LC) if self.num else Fraction(0)

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other) -> "ScalarExpr":
        if isinstance(other, ScalarExpr):
            if other.coords != self.coords:
                raise ValueError(
                    f"coordinate mismatch: {self.coords.names} vs {other.coords.names}"
                )
            return other
        if isinstance(other, (int, Rational)):
            return ScalarExpr.const(self.coords, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.num, self.den, other.num, other.den
        if not a:
            return other
        if not c:
            return self
        if b.is_one and d.is_one:
            return ScalarExpr._raw(self.coords, a + c, b)
        if d.is_one:
            # (a + c b)/b stays coprime to b
            return ScalarExpr._raw(self.coords, a + c * b, b)
        if b.is_one:
            return ScalarExpr._raw(self.coords, a * d + c, d)
        if b == d:
            return _make(self.coords, a + c, b)
        g = _gcd(b, d)
        if g.is_one:
            return ScalarExpr._raw(self.coords, a * d + c * b, b * d)
        b1 = b.exquo(g)
        d1 = d.exquo(g)
        return _make(self.coords, a * d1 + c * b1, b1 * d)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr._raw(self.coords, -self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b, c, d = self.num, self.den, other.num, other.den
        if not a or not c:
            return self.coords.zero()
        if b.is_one and d.is_one:
            return ScalarExpr._raw(self.coords, a * c, b)
        g1 = _gcd(a, d)
        g2 = _gcd(c, b)
        if not g1.is_one:
            a, d = a.exquo(g1), d.exquo(g1)
        if not g2.is_one:
            c, b = c.exquo(g2), b.exquo(g2)
        # products of monic polynomials are monic
        return ScalarExpr._raw(self.coords, a * c, b * d)

    __rmul__ = __mul__

    def inverse(self) -> "ScalarExpr":
        if not self.num:
            raise ZeroDenominatorError("division by zero expression")
        return _make(self.coords, self.den, self.num, coprime=True)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        return ScalarExpr._raw(self.coords, self.num**k, self.den**k)

    # -- comparison ----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Rational)):
            other = ScalarExpr.const(self.coords, other)
        if not isinstance(other, ScalarExpr):
            return NotImplemented
        return (
            self.coords == other.coords
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(
                (self.coords, frozenset(self.num.items()), frozenset(self.den.items()))
            )
        return self._hash

    def __bool__(self):
        return bool(self.num)

    # -- calculus ------------------------------------------------------
    def diff(self, name: str) -> "ScalarExpr":
        i = self.coords.index(name)
        ring = self.coords.ring
        x = ring.gens[i]
        a, b = self.num, self.den
        if b.is_one:
            return ScalarExpr._raw(self.coords, a.diff(x), b)
        da, db = a.diff(x), b.diff(x)
        if not db:
            return _make(self.coords, da, b)
        # (a'b - ab')/b^2; gcd(a'b - ab', b) divides gcd(b, b') only
        return _make(self.coords, da * b - a * db, b * b)

    def evaluate(self, point: Mapping[str, Fraction] | Sequence) -> Fraction:
        """Value at a rational point given by name or by coordinate order."""
        if not isinstance(point, Mapping):
            point = dict(zip(self.coords.names, point))
        vals = []
        for n in self.coords.names:
            if n not in point:
                raise UnknownCoordinateError(f"no value for coordinate {n!r}")
            vals.append(Fraction(point[n]))
        den = _eval_poly(self.den, vals)
        if den == 0:
            raise ZeroDenominatorError("denominator vanishes at the point")
        return _eval_poly(self.num, vals) / den

    # -- printing ------------------------------------------------------
    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"ScalarExpr({to_text(self)!r})"


def _canonical(num, den):
    if not num:
        return num.ring.zero, num.ring.one
    g = _gcd(num, den)
    if not g.is_one:
        num, den = num.exquo(g), den.exquo(g)
    lc = den.LC
    if lc != 1:
        num = num.quo_ground(lc)
        den = den.quo_ground(lc)
    return num, den


def _make(coords, num, den, coprime: bool = False) -> ScalarExpr:
    if not den:
        raise ZeroDenominatorError("division by the zero polynomial")
    if coprime:
        if not num:
            return coords.zero()
        lc = den.LC
        if lc != 1:
            num, den = num.quo_ground(lc), den.quo_ground(lc)
        return ScalarExpr._raw(coords, num, den)
    n, d = _canonical(num, den)
    return ScalarExpr._raw(coords, n, d)


def _eval_poly(p, vals: Sequence[Fraction]) -> Fraction:
    total = Fraction(0)
    for monom, c in p.items():
        term = _to_fraction(c)
        for v, e in zip(vals, monom):
            if e:
                term *= v**e
        total += term
    return total


# ---------------------------------------------------------------------------
# operations with the names used by the rest of the package


def arith(lhs: ScalarExpr, op: str, rhs: ScalarExpr) -> ScalarExpr:
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    if op == "div":
        return lhs / rhs
    raise ValueError(f"unknown operation {op!r}")


def partial(f: ScalarExpr, coord: str) -> ScalarExpr:
    return f.diff(coord)


def is_zero(f: ScalarExpr) -> bool:
    return f.is_zero()


def substitute(
    f: ScalarExpr,
    bindings: Mapping[str, ScalarExpr],
    target: CoordinateSet | None = None,
) -> ScalarExpr:
    """Replace every coordinate of ``f`` by an expression over ``target``."""
    missing = [n for n in f.coords.names if n not in bindings]
    if missing:
        raise UnknownCoordinateError(f"unbound coordinate(s) {missing}")
    images = [bindings[n] for n in f.coords.names]
    if target is None:
        if images:
            target = images[0].coords
        else:
            target = f.coords
    for img in images:
        if img.coords != target:
            raise ValueError("binding expressions must share the target coordinates")
    if not f.coords.names:
        return ScalarExpr.const(target, _to_fraction(f.num.LC) if f.num else 0)
    cache: dict = {}
    num = _compose(f.num, images, target, cache)
    den = _compose(f.den, images, target, cache)
    if isinstance(num, tuple):
        n_num, n_den = num
        d_num, d_den = den
        if not d_num:
            raise ZeroDenominatorError("denominator vanishes identically after substitution")
        return _make(target, n_num * d_den, n_den * d_num)
    if den.is_zero():
        raise ZeroDenominatorError("denominator vanishes identically after substitution")
    return num / den


def _compose(p, images: Sequence[ScalarExpr], target: CoordinateSet, cache: dict):
    ring = target.ring
    if all(img.den.is_one for img in images):
        # polynomial images: stay in the ring and cancel once at the end
        total = ring.zero
        for monom, c in p.items():
            term = ring(c)
            for i, e in enumerate(monom):
                if e:
                    key = (i, e)
                    pw = cache.get(key)
                    if pw is None:
                        pw = cache[key] = images[i].num ** e
                    term = term * pw
            total += term
        return (total, ring.one)
    total = target.zero()
    for monom, c in p.items():
        term = ScalarExpr._raw(target, ring(c), ring.one)
        for i, e in enumerate(monom):
            if e:
                key = (i, e)
                pw = cache.get(key)
                if pw is None:
                    pw = cache[key] = images[i] ** e
                term = term * pw
        total = total + term
    return total


# ---------------------------------------------------------------------------
# printer

def _coeff_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _poly_text(p, names: Sequence[str]) -> str:
    if not p:
        return "0"
    pieces = []
    for k, (monom, c) in enumerate(p.terms()):
        c = _to_fraction(c)
        neg = c < 0
        a = -c if neg else c
        factors = []
        for n, e in zip(names, monom):
            if e == 1:
                factors.append(n)
            elif e:
                factors.append(f"{n}^{e}")
        if not factors:
            body = _coeff_text(a)
        elif a == 1:
            body = "*".join(factors)
            # a leading '-' binds to the first base, before its exponent
            if neg and k == 0 and "^" in factors[0]:
                body = "1*" + body
        else:
            body = _coeff_text(a) + "*" + "*".join(factors)
        if k == 0:
            pieces.append("-" + body if neg else body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


def to_text(f: ScalarExpr) -> str:
    """Canonical text: deterministic term order, re-parseable."""
    names = f.coords.names
    num = _poly_text(f.num, names)
    if f.den.is_one:
        return num
    if len(f.num) > 1:
        num = f"({num})"
    return f"{num}/({_poly_text(f.den, names)})"


def join_terms(pairs) -> str:
    """Render sum c_k*basis_k for (coefficient, basis name) pairs."""
    parts = []
    for c, basis in pairs:
        if c.is_zero():
            continue
        neg = len(c.num) == 1 and c.num.LC < 0
        mag = -c if neg else c
        if mag == 1:
            body = basis
        else:
            s = to_text(mag)
            if len(mag.num) > 1 or not mag.den.is_one:
                s = f"({s})"
            body = f"{s}*{basis}"
        parts.append((neg, body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z][A-Za-z0-9_]*)|(.))")


def _tokenize(source: str):
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN.match(source, pos)
        if m is None:  # trailing whitespace
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), start))
        elif m.group(2) is not None:
            tokens.append(("ident", m.group(2), start))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch.isspace():
                pos = m.end()
                continue
            if ch not in "+-*/^()":
                raise ExprSyntaxError(f"unexpected character {ch!r}", start)
            tokens.append(("op", ch, start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, coords: CoordinateSet):
        self.tokens = _tokenize(source)
        self.i = 0
        self.coords = coords

    def peek(self, offset: int = 0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, ch: str):
        kind, val, pos = self.take()
        if kind != "op" or val != ch:
            raise ExprSyntaxError(f"expected {ch!r}", pos)

    def parse(self) -> ScalarExpr:
        if self.peek()[0] == "end":
            raise ExprSyntaxError("empty expression", self.peek()[2])
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos)
        return e

    def expr(self) -> ScalarExpr:
        acc = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                acc = acc + rhs if val == "+" else acc - rhs
            else:
                return acc

    def term(self) -> ScalarExpr:
        acc = self.factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.factor()
                if val == "*":
                    acc = acc * rhs
                else:
                    if rhs.is_zero():
                        raise ZeroDenominatorError(f"division by zero at position {pos}")
                    acc = acc / rhs
            else:
                return acc

    def factor(self) -> ScalarExpr:
        base = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            kind, val, pos = self.peek()
            if kind == "op" and val == "-":
                self.take()
                sign = -1
                kind, val, pos = self.peek()
            if kind != "int":
                raise ExprSyntaxError("expected integer exponent", pos)
            self.take()
            k = sign * int(val)
            if k < 0 and base.is_zero():
                raise ZeroDenominatorError(f"zero raised to a negative power at position {pos}")
            return base**k
        return base

    def base(self) -> ScalarExpr:
        kind, val, pos = self.take()
        if kind == "int":
            nxt, nxt2 = self.peek(), self.peek(1)
            if nxt[0] == "op" and nxt[1] == "/" and nxt2[0] == "int":
                self.take()
                self.take()
                q = int(nxt2[1])
                if q == 0:
                    raise ZeroDenominatorError(f"zero denominator at position {nxt2[2]}")
                return ScalarExpr.const(self.coords, Fraction(int(val), q))
            return ScalarExpr.const(self.coords, int(val))
        if kind == "ident":
            if val not in self.coords:
                raise UnknownCoordinateError(
                    f"unknown coordinate {val!r} at position {pos}"
                )
            return self.coords.var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "op" and val == "-":
            return -self.base()
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", pos)
        raise ExprSyntaxError(f"unexpected {val!r}", pos)


def parse_expr(source: str, coords: CoordinateSet) -> ScalarExpr:
    """Parse expression text into its canonical :class:`ScalarExpr`."""
    return _Parser(source, coords).parse()
