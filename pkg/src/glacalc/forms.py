"""Exterior algebra of an algebroid: q-forms in the dual coframe t^alpha.

Forms are sparse maps from strictly increasing 0-based index tuples to
nonzero coefficients.  Evaluation uses the determinant convention

    (t^1 /\\ ... /\\ t^q)(t_1, ..., t_q) = 1

with no 1/q! factor, which is the normalization under which the wedge
shuffle formula, the interior product and d satisfy their usual identities
simultaneously.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .algebroid import Algebroid, Morphism, Section, anchor_apply, bracket
from .ratlinalg import FieldMatrix, det
from .report import Report
from .symkernel import ScalarExpr, join_terms

__all__ = [
    "Form",
    "evaluate",
    "wedge",
    "interior",
    "lie_derivative",
    "exterior_derivative",
    "exterior_derivative_intrinsic",
    "maurer_cartan_check",
    "pullback_form",
    "is_closed",
]


def _sort_sign(idx: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the sorting permutation (0 if an index repeats) and sorted key."""
    if len(set(idx)) != len(idx):
        return 0, ()
    arr = list(idx)
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(arr)):
        j = i
        while j > 0 and arr[j - 1] > arr[j]:
            arr[j - 1], arr[j] = arr[j], arr[j - 1]
            sign = -sign
            j -= 1
    return sign, tuple(arr)


class Form:
    """Alternating q-form with sparse increasing-key coefficients."""

    __slots__ = ("algebroid", "degree", "coeffs")

    def __init__(self, algebroid: Algebroid, degree: int, coeffs: Mapping | None = None):
        if degree < 0:
            raise ValueError("form degree must be non-negative")
        p = algebroid.rank
        clean = {}
        for key, c in (coeffs or {}).items():
            key = tuple(key)
            if len(key) != degree:
                raise ValueError(f"key {key} does not have length {degree}")
            if any(not 0 <= k < p for k in key):
                raise ValueError(f"key {key} out of range for rank {p}")
            if any(key[i] >= key[i + 1] for i in range(degree - 1)):
                raise ValueError(f"key {key} is not strictly increasing")
            c = algebroid.expr(c)
            if not c.is_zero():
                clean[key] = c
        self.algebroid = algebroid
        self.degree = degree
        self.coeffs = dict(sorted(clean.items()))

    @classmethod
    def _raw(cls, algebroid, degree, coeffs: dict) -> "Form":
        obj = object.__new__(cls)
        obj.algebroid = algebroid
        obj.degree = degree
        obj.coeffs = dict(sorted((k, v) for k, v in coeffs.items() if not v.is_zero()))
        return obj

    @classmethod
    def from_terms(cls, algebroid: Algebroid, degree: int, terms: Iterable) -> "Form":
        """Accumulate (index tuple, coefficient) pairs with arbitrary index order."""
        acc: dict = {}
        for idx, c in terms:
            c = algebroid.expr(c)
            sign, key = _sort_sign(tuple(idx))
            if not sign or c.is_zero():
                continue
            c = c if sign > 0 else -c
            acc[key] = acc[key] + c if key in acc else c
        if any(len(k) != degree for k in acc):
            raise ValueError("term length does not match degree")
        return cls._raw(algebroid, degree, acc)

    @classmethod
    def zero(cls, A: Algebroid, degree: int) -> "Form":
        return cls._raw(A, degree, {})

    @classmethod
    def function(cls, A: Algebroid, f) -> "Form":
        return cls(A, 0, {(): f})

    @classmethod
    def basis(cls, A: Algebroid, *idx: int) -> "Form":
        return cls.from_terms(A, len(idx), [(idx, 1)])

    @classmethod
    def coframe(cls, A: Algebroid, a: int) -> "Form":
        return cls.basis(A, a)

    @classmethod
    def one_form(cls, A: Algebroid, coeffs: Sequence) -> "Form":
        return cls(A, 1, {(a,): c for a, c in enumerate(coeffs)})

    # -- accessors -----------------------------------------------------
    def coeff(self, key: Sequence[int]) -> ScalarExpr:
        """Coefficient for any index tuple, with alternating sign."""
        sign, k = _sort_sign(tuple(key))
        if not sign:
            return self.algebroid.coords.zero()
        c = self.coeffs.get(k)
        if c is None:
            return self.algebroid.coords.zero()
        return c if sign > 0 else -c

    def scalar(self) -> ScalarExpr:
        if self.degree != 0:
            raise ValueError("not a 0-form")
        return self.coeffs.get((), self.algebroid.coords.zero())

    def is_zero(self) -> bool:
        return not self.coeffs

    # -- vector space structure ----------------------------------------
    def _check(self, other: "Form"):
        if not self.algebroid.same_data(other.algebroid):
            raise ValueError("forms of different algebroids")
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch {self.degree} vs {other.degree}")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        acc = dict(self.coeffs)
        for k, c in other.coeffs.items():
            acc[k] = acc[k] + c if k in acc else c
        return Form._raw(self.algebroid, self.degree, acc)

    def __neg__(self) -> "Form":
        return Form._raw(self.algebroid, self.degree, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, f) -> "Form":
        f = self.algebroid.expr(f)
        return Form._raw(self.algebroid, self.degree, {k: f * c for k, c in self.coeffs.items()})

    def __rmul__(self, f) -> "Form":
        return self.scale(f)

    def __xor__(self, other: "Form") -> "Form":
        return wedge(self, other)

    def __eq__(self, other):
        return (
            isinstance(other, Form)
            and self.degree == other.degree
            and self.algebroid.same_data(other.algebroid)
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.degree, tuple(self.coeffs.items())))

    def text(self, frame: str = "T") -> str:
        if self.degree == 0:
            return str(self.scalar())
        return join_terms(
            (c, "/\\".join(f"{frame}^{k + 1}" for k in key)) for key, c in self.coeffs.items()
        )

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"Form[{self.degree}]({self.text()})"


# ---------------------------------------------------------------------------


def evaluate(w: Form, args: Sequence[Section]) -> ScalarExpr:
    """Multilinear alternating value, one determinant per stored key."""
    if len(args) != w.degree:
        raise ValueError(f"{w.degree}-form evaluated on {len(args)} sections")
    A = w.algebroid
    coords = A.coords
    if w.degree == 0:
        return w.scalar()
    acc = coords.zero()
    for key, c in w.coeffs.items():
        minor = FieldMatrix(coords, [[z.coeffs[k] for z in args] for k in key])
        d = det(minor)
        if d:
            acc = acc + c * d
    return acc


def wedge(w: Form, v: Form) -> Form:
    if not w.algebroid.same_data(v.algebroid):
        raise ValueError("forms of different algebroids")
    acc: dict = {}
    for k1, c1 in w.coeffs.items():
        for k2, c2 in v.coeffs.items():
            sign, key = _sort_sign(k1 + k2)
            if not sign:
                continue
            c = c1 * c2
            if sign < 0:
                c = -c
            acc[key] = acc[key] + c if key in acc else c
    return Form._raw(w.algebroid, w.degree + v.degree, acc)


def interior(z: Section, w: Form) -> Form:
    """Contract z into the first slot."""
    A = w.algebroid
    if w.degree == 0:
        return Form.zero(A, 0)
    acc: dict = {}
    for key, c in w.coeffs.items():
        for s, a in enumerate(key):
            za = z.coeffs[a]
            if not za:
                continue
            rest = key[:s] + key[s + 1:]
            term = za * c
            if s % 2:
                term = -term
            acc[rest] = acc[rest] + term if rest in acc else term
    return Form._raw(A, w.degree - 1, acc)


def lie_derivative(z: Section, w: Form) -> Form:
    """Covariant Lie derivative through its defining formula on frame tuples."""
    A = w.algebroid
    q, p = w.degree, A.rank
    if q == 0:
        return Form.function(A, anchor_apply(A, z, w.scalar()))
    brackets = [bracket(A, z, A.frame(b)).coeffs for b in range(p)]
    out = {}
    for key in combinations(range(p), q):
        val = anchor_apply(A, z, w.coeff(key))
        for i, b in enumerate(key):
            zb = brackets[b]
            for c in range(p):
                if zb[c]:
                    val = val - zb[c] * w.coeff(key[:i] + (c,) + key[i + 1:])
        out[key] = val
    return Form._raw(A, q, out)


def _rho_frame(A: Algebroid, a: int, f: ScalarExpr) -> ScalarExpr:
    # rho(t_a)(f) = theta^k_a df/dx^k straight from the anchor table
    acc = A.coords.zero()
    for k, n in enumerate(A.coords.names):
        r = A.anchor.entries[k][a]
        if r:
            df = f.diff(n)
            if df:
                acc = acc + r * df
    return acc


def exterior_derivative(w: Form) -> Form:
    """d through the local coefficient formula in anchor and structure tables."""
    A = w.algebroid
    q, p = w.degree, A.rank
    L = A.structure
    out = {}
    for key in combinations(range(p), q + 1):
        val = A.coords.zero()
        for i in range(q + 1):
            c = w.coeffs.get(key[:i] + key[i + 1:])
            if c is not None:
                t = _rho_frame(A, key[i], c)
                val = val - t if i % 2 else val + t
        for i in range(q + 1):
            for j in range(i + 1, q + 1):
                rest = key[:i] + key[i + 1:j] + key[j + 1:]
                plane_sum = A.coords.zero()
                for g in range(p):
                    l = L[g][key[i]][key[j]]
                    if l:
                        c = w.coeff((g,) + rest)
                        if c:
                            plane_sum = plane_sum + l * c
                val = val - plane_sum if (i + j) % 2 else val + plane_sum
        out[key] = val
    return Form._raw(A, q + 1, out)


def exterior_derivative_intrinsic(w: Form) -> Form:
    """d through the invariant alternating sum, evaluated on frame tuples."""
    A = w.algebroid
    q, p = w.degree, A.rank
    frames = [A.frame(a) for a in range(p)]
    brk = {}
    out = {}
    for key in combinations(range(p), q + 1):
        args = [frames[k] for k in key]
        val = A.coords.zero()
        for i in range(q + 1):
            t = anchor_apply(A, args[i], evaluate(w, args[:i] + args[i + 1:]))
            val = val - t if i % 2 else val + t
        for i in range(q + 1):
            for j in range(i + 1, q + 1):
                pair = (key[i], key[j])
                if pair not in brk:
                    brk[pair] = bracket(A, args[i], args[j])
                rest = args[:i] + args[i + 1:j] + args[j + 1:]
                t = evaluate(w, [brk[pair]] + rest)
                val = val - t if (i + j) % 2 else val + t
        out[key] = val
    return Form._raw(A, q + 1, out)


def is_closed(w: Form) -> bool:
    return exterior_derivative(w).is_zero()


def maurer_cartan_check(A: Algebroid) -> Report:
    """Structure equations for the coframe and for the coordinate functions."""
    rep = Report(f"maurer-cartan {A.name or 'algebroid'}")
    p = A.rank
    for a in range(p):
        lhs = exterior_derivative(Form.coframe(A, a))
        terms = []
        for b in range(p):
            for g in range(p):
                l = A.L(a, b, g)
                if l:
                    terms.append(((b, g), l * ScalarExpr.const(A.coords, -1) / 2))
        rhs = Form.from_terms(A, 2, terms)
        diff = lhs - rhs
        rep.add(f"C1 d T^{a + 1}", diff.is_zero(), None if diff.is_zero() else f"residual {diff.text()}")
    label = "C2'" if A.presentation == "pullback" else "C2"
    for i, n in enumerate(A.coords.names):
        lhs = exterior_derivative(Form.function(A, A.coords.var(n)))
        rhs = Form.one_form(A, A.anchor.row(i))
        diff = lhs - rhs
        rep.add(f"{label} d {n}", diff.is_zero(), None if diff.is_zero() else f"residual {diff.text()}")
    return rep


def pullback_form(mor: Morphism, w: Form) -> Form:
    """(phi, phi0)^* w: substitute the base map and contract with matrix minors."""
    if not w.algebroid.same_data(mor.target):
        raise ValueError("form does not live on the morphism's target")
    S = mor.source
    q = w.degree
    if q == 0:
        return Form.function(S, mor.base_map.pull(w.scalar()))
    pulled = {k: mor.base_map.pull(c) for k, c in w.coeffs.items()}
    M = mor.matrix
    out = {}
    for J in combinations(range(S.rank), q):
        val = S.coords.zero()
        for K, c in pulled.items():
            minor = det(FieldMatrix(S.coords, [[M[r, col] for col in J] for r in K]))
            if minor:
                val = val + c * minor
        out[J] = val
    return Form._raw(S, q, out)
