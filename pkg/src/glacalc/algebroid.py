"""Generalized Lie algebroids presented over a single coordinate patch.

An :class:`Algebroid` holds the anchor components (one row per base
coordinate, one column per frame section) and the full structure table
``L[gamma][alpha][beta]`` of the frame brackets
``[t_alpha, t_beta] = L^gamma_{alpha beta} t_gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

from .ratlinalg import FieldMatrix, SingularMatrixError, invert
from .report import Report
from .symkernel import CoordinateSet, ScalarExpr, join_terms, substitute

__all__ = [
    "SmoothMap",
    "Algebroid",
    "Section",
    "Morphism",
    "validate",
    "anchor_apply",
    "bracket",
    "pullback_algebroid",
    "lift_section",
    "gla_from_lie_algebroid",
    "tangent_gla",
    "change_frame",
    "push_section",
]


def _lift(coords: CoordinateSet, value) -> ScalarExpr:
    if isinstance(value, ScalarExpr):
        if value.coords != coords:
            raise ValueError(
                f"expression over {value.coords.names} used where {coords.names} expected"
            )
        return value
    if isinstance(value, str):
        return coords.parse(value)
    return ScalarExpr.const(coords, value)


class SmoothMap:
    """A map given by one component per target coordinate, over the source."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source: CoordinateSet, target: CoordinateSet, components: Sequence):
        comps = tuple(_lift(source, c) for c in components)
        if len(comps) != len(target):
            raise ValueError(
                f"map needs {len(target)} components, got {len(comps)}"
            )
        self.source = source
        self.target = target
        self.components = comps

    @classmethod
    def identity(cls, coords: CoordinateSet) -> "SmoothMap":
        return cls(coords, coords, [coords.var(n) for n in coords])

    def bindings(self) -> dict:
        return dict(zip(self.target.names, self.components))

    def pull(self, f: ScalarExpr) -> ScalarExpr:
        """f composed with this map (f over the target coordinates)."""
        return substitute(f, self.bindings(), self.source)

    def compose(self, inner: "SmoothMap") -> "SmoothMap":
        """self after inner."""
        if inner.target != self.source:
            raise ValueError("maps are not composable")
        return SmoothMap(inner.source, self.target, [inner.pull(c) for c in self.components])

    def is_identity(self) -> bool:
        return self.source == self.target and all(
            c == self.source.var(n) for n, c in zip(self.target.names, self.components)
        )

    def __eq__(self, other):
        return (
            isinstance(other, SmoothMap)
            and self.source == other.source
            and self.target == other.target
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.source, self.target, self.components))

    def __repr__(self):
        return f"SmoothMap({[str(c) for c in self.components]})"


@dataclass(frozen=True)
class Origin:
    """How a derived presentation was obtained (kept for export)."""

    kind: str  # "gla" (structure composed with h on N) or "pullback"
    base: "Algebroid"
    h: SmoothMap
    anchor: FieldMatrix | None = None


class Algebroid:
    """Anchor matrix plus full structure table over one coordinate patch."""

    __slots__ = ("coords", "rank", "anchor", "structure", "presentation", "origin", "name")

    def __init__(
        self,
        coords: CoordinateSet,
        rank: int,
        anchor: FieldMatrix | Sequence[Sequence],
        structure: Sequence[Sequence[Sequence]],
        presentation: str = "base",
        origin: Origin | None = None,
        name: str | None = None,
    ):
        if rank < 0:
            raise ValueError("rank must be non-negative")
        if not isinstance(anchor, FieldMatrix):
            anchor = FieldMatrix(coords, anchor, cols=rank)
        if anchor.coords != coords:
            raise ValueError("anchor is over a different coordinate set")
        if anchor.shape != (len(coords), rank):
            raise ValueError(
                f"anchor must be {len(coords)}x{rank}, got {anchor.shape[0]}x{anchor.shape[1]}"
            )
        table = tuple(
            tuple(tuple(_lift(coords, e) for e in row) for row in plane) for plane in structure
        )
        if len(table) != rank or any(
            len(pl) != rank or any(len(r) != rank for r in pl) for pl in table
        ):
            raise ValueError(f"structure table must be {rank}x{rank}x{rank}")
        if presentation not in ("base", "pullback"):
            raise ValueError(f"unknown presentation {presentation!r}")
        self.coords = coords
        self.rank = rank
        self.anchor = anchor
        self.structure = table
        self.presentation = presentation
        self.origin = origin
        self.name = name

    @classmethod
    def from_upper(
        cls,
        coords: CoordinateSet,
        rank: int,
        anchor,
        upper: Mapping[tuple[int, int, int], object],
        **kw,
    ) -> "Algebroid":
        """Build from entries (gamma, alpha, beta) with alpha < beta (0-based)."""
        zero = coords.zero()
        L = [[[zero] * rank for _ in range(rank)] for _ in range(rank)]
        for (g, a, b), e in upper.items():
            if not a < b:
                raise ValueError(f"structure key {(g, a, b)} needs alpha < beta")
            e = _lift(coords, e)
            L[g][a][b] = e
            L[g][b][a] = -e
        return cls(coords, rank, anchor, L, **kw)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def L(self, g: int, a: int, b: int) -> ScalarExpr:
        return self.structure[g][a][b]

    def rho(self, i: int, a: int) -> ScalarExpr:
        return self.anchor.entries[i][a]

    def expr(self, value) -> ScalarExpr:
        return _lift(self.coords, value)

    def section(self, coeffs: Sequence) -> "Section":
        return Section(self, coeffs)

    def frame(self, a: int) -> "Section":
        one, zero = self.coords.one(), self.coords.zero()
        return Section(self, [one if b == a else zero for b in range(self.rank)])

    def zero_section(self) -> "Section":
        return Section(self, [self.coords.zero()] * self.rank)

    def same_data(self, other: "Algebroid") -> bool:
        if self is other:
            return True
        return (
            self.coords == other.coords
            and self.rank == other.rank
            and self.anchor == other.anchor
            and self.structure == other.structure
        )

    def with_name(self, name: str) -> "Algebroid":
        return Algebroid(
            self.coords, self.rank, self.anchor, self.structure,
            presentation=self.presentation, origin=self.origin, name=name,
        )

    def __eq__(self, other):
        return isinstance(other, Algebroid) and self.same_data(other)

    def __hash__(self):
        return hash((self.coords, self.rank, self.anchor, self.structure))

    def __repr__(self):
        label = self.name or "Algebroid"
        return f"<{label} p={self.rank} coords={list(self.coords.names)}>"


class Section:
    """z^alpha t_alpha; coefficients over the algebroid's coordinates."""

    __slots__ = ("algebroid", "coeffs")

    def __init__(self, algebroid: Algebroid, coeffs: Sequence):
        coeffs = tuple(_lift(algebroid.coords, c) for c in coeffs)
        if len(coeffs) != algebroid.rank:
            raise ValueError(f"section needs {algebroid.rank} coefficients, got {len(coeffs)}")
        self.algebroid = algebroid
        self.coeffs = coeffs

    def _check(self, other: "Section"):
        if not self.algebroid.same_data(other.algebroid):
            raise ValueError("sections of different algebroids")

    def __add__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.algebroid, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "Section") -> "Section":
        self._check(other)
        return Section(self.algebroid, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "Section":
        return Section(self.algebroid, [-a for a in self.coeffs])

    def scale(self, f) -> "Section":
        f = _lift(self.algebroid.coords, f)
        return Section(self.algebroid, [f * a for a in self.coeffs])

    def __rmul__(self, f) -> "Section":
        return self.scale(f)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def __eq__(self, other):
        return (
            isinstance(other, Section)
            and self.algebroid.same_data(other.algebroid)
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash(self.coeffs)

    def text(self, frame: str = "T") -> str:
        return join_terms((c, f"{frame}{a + 1}") for a, c in enumerate(self.coeffs))

    def __str__(self):
        return self.text()

    def __repr__(self):
        return f"Section({self.text()})"


# ---------------------------------------------------------------------------
# core operations


def anchor_apply(A: Algebroid, u: Section, f: ScalarExpr) -> ScalarExpr:
    """rho(u)(f) = sum u^alpha rho^i_alpha df/dx^i."""
    acc = A.coords.zero()
    if f.is_constant():
        return acc
    names = A.coords.names
    for i, n in enumerate(names):
        row = A.anchor.entries[i]
        w = A.coords.zero()
        for a, ua in enumerate(u.coeffs):
            if ua and row[a]:
                w = w + ua * row[a]
        if w:
            df = f.diff(n)
            if df:
                acc = acc + w * df
    return acc


def bracket(A: Algebroid, u: Section, v: Section) -> Section:
    """The Leibniz bracket of two sections."""
    p = A.rank
    out = []
    for g in range(p):
        acc = anchor_apply(A, u, v.coeffs[g]) - anchor_apply(A, v, u.coeffs[g])
        plane = A.structure[g]
        for a in range(p):
            ua = u.coeffs[a]
            if not ua:
                continue
            row = plane[a]
            for b in range(p):
                vb = v.coeffs[b]
                if vb and row[b]:
                    acc = acc + ua * vb * row[b]
        out.append(acc)
    return Section(A, out)


def _idx(*ks: int) -> str:
    return ",".join(str(k + 1) for k in ks)


def validate(A: Algebroid) -> Report:
    """Antisymmetry of L, frame Jacobi identity and anchor compatibility."""
    rep = Report(f"validate {A.name or 'algebroid'}")
    p, m = A.rank, A.dim
    L = A.structure

    witness = None
    for g, a, b in product(range(p), repeat=3):
        if a <= b and not (L[g][a][b] + L[g][b][a]).is_zero():
            witness = f"L^{g + 1}_{{{_idx(a, b)}}} + L^{g + 1}_{{{_idx(b, a)}}} = {L[g][a][b] + L[g][b][a]}"
            break
    rep.add("antisymmetry", witness is None, witness)

    witness = None
    frames = [A.frame(a) for a in range(p)]
    inner = {}
    for b, c in product(range(p), repeat=2):
        inner[b, c] = bracket(A, frames[b], frames[c])
    for a, b, c in product(range(p), repeat=3):
        total = (
            bracket(A, frames[a], inner[b, c])
            + bracket(A, frames[b], inner[c, a])
            + bracket(A, frames[c], inner[a, b])
        )
        if not total.is_zero():
            witness = f"triple ({_idx(a, b, c)}): {total.text()}"
            break
    rep.add("jacobi", witness is None, witness)

    witness = None
    names = A.coords.names
    for a, b, k in product(range(p), range(p), range(m)):
        lhs = A.coords.zero()
        for g in range(p):
            if L[g][a][b] and A.rho(k, g):
                lhs = lhs + L[g][a][b] * A.rho(k, g)
        rhs = A.coords.zero()
        for i in range(m):
            if A.rho(i, a):
                rhs = rhs + A.rho(i, a) * A.rho(k, b).diff(names[i])
            if A.rho(i, b):
                rhs = rhs - A.rho(i, b) * A.rho(k, a).diff(names[i])
        if not (lhs - rhs).is_zero():
            witness = f"alpha={a + 1} beta={b + 1} k={k + 1}: residual {lhs - rhs}"
            break
    rep.add("anchor compatibility", witness is None, witness)
    rep.note("h surjectivity", "asserted")
    return rep


def is_valid(A: Algebroid) -> bool:
    return validate(A).passed


# ---------------------------------------------------------------------------
# constructors


def pullback_algebroid(
    A: Algebroid, h: SmoothMap, anchor: FieldMatrix | Sequence | None = None
) -> Algebroid:
    """Pull-back presentation over h's source coordinates.

    ``anchor`` gives the components rho^i_alpha (one row per source
    coordinate) as functions on the target; when omitted the algebroid's own
    anchor is used, which requires equal dimensions.
    """
    if h.target != A.coords:
        raise ValueError("h must map into the algebroid's base coordinates")
    M = h.source
    if anchor is None:
        if len(M) != A.dim:
            raise ValueError("anchor data over the source dimension is required")
        anchor = A.anchor
    elif not isinstance(anchor, FieldMatrix):
        anchor = FieldMatrix(A.coords, anchor, cols=A.rank)
    if anchor.shape != (len(M), A.rank):
        raise ValueError(f"pull-back anchor must be {len(M)}x{A.rank}")
    new_anchor = FieldMatrix(M, [[h.pull(e) for e in row] for row in anchor.entries], cols=A.rank)
    L = [[[h.pull(e) for e in row] for row in plane] for plane in A.structure]
    return Algebroid(
        M, A.rank, new_anchor, L, presentation="pullback",
        origin=Origin("pullback", A, h, anchor),
    )


def lift_section(A: Algebroid, h: SmoothMap, z: Section, target: Algebroid | None = None) -> Section:
    """Z = (z^alpha o h) T_alpha on the pull-back."""
    if target is None:
        if len(h.source) == A.dim:
            target = pullback_algebroid(A, h)
        else:
            # only the coefficients matter here; build a placeholder anchor
            target = pullback_algebroid(
                A, h, FieldMatrix.zeros(A.coords, len(h.source), A.rank)
            )
    return Section(target, [h.pull(c) for c in z.coeffs])


def gla_from_lie_algebroid(A: Algebroid, h: SmoothMap) -> Algebroid:
    """Compose structure functions and anchor with h: N -> N."""
    if h.source != A.coords or h.target != A.coords:
        raise ValueError("h must map the base coordinates to themselves")
    if h.is_identity():
        return A
    anchor = A.anchor.map(h.pull)
    L = [[[h.pull(e) for e in row] for row in plane] for plane in A.structure]
    return Algebroid(A.coords, A.rank, anchor, L, origin=Origin("gla", A, h), name=A.name)


def tangent_gla(theta: FieldMatrix, theta_tilde: FieldMatrix | None = None) -> Algebroid:
    """Frame t_alpha = theta^i_alpha d/dx^i with its structure functions."""
    coords = theta.coords
    m = theta.rows
    if theta.cols != m or m != len(coords):
        raise ValueError("theta must be square over its coordinates")
    if theta_tilde is None:
        theta_tilde = invert(theta)
    if theta_tilde.shape != (m, m) or not (theta @ theta_tilde).is_identity():
        raise ValueError("theta and theta_tilde are not mutually inverse")
    names = coords.names
    zero = coords.zero()
    # d theta^j_beta / dx^i, cached
    dth = [[[theta[j, b].diff(names[i]) for b in range(m)] for j in range(m)] for i in range(m)]
    L = [[[zero] * m for _ in range(m)] for _ in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            # components of [t_a, t_b] on d/dx^j
            comp = []
            for j in range(m):
                acc = zero
                for i in range(m):
                    if theta[i, a] and dth[i][j][b]:
                        acc = acc + theta[i, a] * dth[i][j][b]
                    if theta[i, b] and dth[i][j][a]:
                        acc = acc - theta[i, b] * dth[i][j][a]
                comp.append(acc)
            for g in range(m):
                acc = zero
                for j in range(m):
                    if comp[j] and theta_tilde[g, j]:
                        acc = acc + comp[j] * theta_tilde[g, j]
                L[g][a][b] = acc
                L[g][b][a] = -acc
    return Algebroid(coords, m, theta, L)


def change_frame(A: Algebroid, Lam: FieldMatrix) -> Algebroid:
    """New frame t'_alpha = sum_beta Lam[beta][alpha] t_beta."""
    p = A.rank
    if Lam.shape != (p, p):
        raise ValueError(f"frame change must be {p}x{p}")
    try:
        inv = invert(Lam)
    except SingularMatrixError:
        raise SingularMatrixError("frame change matrix is singular") from None
    new = [Section(A, Lam.column(a)) for a in range(p)]
    zero = A.coords.zero()
    L = [[[zero] * p for _ in range(p)] for _ in range(p)]
    for a in range(p):
        for b in range(a + 1, p):
            coeffs = inv.apply(bracket(A, new[a], new[b]).coeffs)
            for g in range(p):
                L[g][a][b] = coeffs[g]
                L[g][b][a] = -coeffs[g]
    return Algebroid(A.coords, p, A.anchor @ Lam, L, presentation=A.presentation)


# ---------------------------------------------------------------------------
# morphisms


class Morphism:
    """Bundle map with p' x p matrix over the source coordinates and base map."""

    __slots__ = ("source", "target", "matrix", "base_map", "base_inverse")

    def __init__(
        self,
        source: Algebroid,
        target: Algebroid,
        matrix: FieldMatrix | Sequence[Sequence],
        base_map: SmoothMap,
        base_inverse: SmoothMap,
    ):
        if not isinstance(matrix, FieldMatrix):
            matrix = FieldMatrix(source.coords, matrix, cols=source.rank)
        if matrix.coords != source.coords or matrix.shape != (target.rank, source.rank):
            raise ValueError(
                f"morphism matrix must be {target.rank}x{source.rank} over the source coordinates"
            )
        if base_map.source != source.coords or base_map.target != target.coords:
            raise ValueError("base map must go from source to target coordinates")
        if base_inverse.source != target.coords or base_inverse.target != source.coords:
            raise ValueError("base inverse must go from target to source coordinates")
        if not base_inverse.compose(base_map).is_identity():
            raise ValueError("base inverse does not undo the base map")
        if not base_map.compose(base_inverse).is_identity():
            raise ValueError("base map does not undo the base inverse")
        self.source = source
        self.target = target
        self.matrix = matrix
        self.base_map = base_map
        self.base_inverse = base_inverse

    @classmethod
    def identity(cls, A: Algebroid) -> "Morphism":
        ident = SmoothMap.identity(A.coords)
        return cls(A, A, FieldMatrix.identity(A.coords, A.rank), ident, ident)


def push_section(mor: Morphism, u: Section) -> Section:
    coeffs = mor.matrix.apply(u.coeffs)
    return Section(mor.target, [mor.base_inverse.pull(c) for c in coeffs])
