"""Builtin example algebroids and seeded random instances.

Random algebroids come from frame data (an anchor matrix that is
unitriangular with polynomial entries), optionally extended by a central
direction, then mixed by a constant unitriangular frame change.  They
satisfy the axioms by construction, so no rejection sampling is needed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Callable

from .algebroid import (
    Algebroid,
    Morphism,
    Section,
    SmoothMap,
    change_frame,
    gla_from_lie_algebroid,
    tangent_gla,
)
from .connection import Connection
from .forms import Form, exterior_derivative, lie_derivative
from .idseds import IDS, involutive_bracket, involutive_cartan
from .ratlinalg import FieldMatrix, rank
from .symkernel import CoordinateSet, ScalarExpr

__all__ = [
    "Fixture",
    "Expected",
    "BUILTIN_NAMES",
    "builtin",
    "random_instance",
    "random_section",
    "random_form",
    "random_function",
    "random_ids",
    "random_involutive_ids",
    "random_connection",
    "random_morphism",
    "frame_change_morphism",
]

BUILTIN_NAMES = ("TB1", "TB2", "TB3", "SO3", "HEIS", "SO3H")


@dataclass
class Expected:
    """A frozen outcome; ``kind`` is "direct" (read off the data) or "oracle"."""

    name: str
    value: str
    kind: str
    oracle: str | None
    compute: Callable[[], str]

    def reproduced(self) -> bool:
        return self.compute() == self.value


@dataclass
class Fixture:
    name: str
    algebroid: Algebroid
    sections: dict[str, Section] = field(default_factory=dict)
    forms: dict[str, Form] = field(default_factory=dict)
    ids: dict[str, IDS] = field(default_factory=dict)
    connections: dict[str, Connection] = field(default_factory=dict)
    expected: list[Expected] = field(default_factory=list)


def _tangent(m: int) -> Algebroid:
    coords = CoordinateSet.numbered("x", m)
    return tangent_gla(FieldMatrix.identity(coords, m))


def _so3_structure(coords: CoordinateSet, scale) -> dict:
    # [t1,t2]=t3, [t2,t3]=t1, [t3,t1]=t2
    return {(2, 0, 1): scale, (0, 1, 2): scale, (1, 0, 2): -scale}


def _so3() -> Algebroid:
    E = CoordinateSet(())
    return Algebroid.from_upper(E, 3, FieldMatrix.zeros(E, 0, 3), _so3_structure(E, 1), name="SO3")


def _so3_connections(A: Algebroid) -> dict[str, Connection]:
    p = A.rank
    half = {
        (c, b, a): A.L(c, a, b) / 2
        for c in range(p) for a in range(p) for b in range(p)
    }
    return {
        "torsion_free": Connection(A, p, half, name="torsion_free"),
        "zero": Connection(A, p, name="zero"),
    }


def builtin(name: str) -> Fixture:
    if name not in BUILTIN_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return _BUILDERS[name]()


def _tb1() -> Fixture:
    A = _tangent(1).with_name("TB1")
    fx = Fixture("TB1", A)
    fx.sections = {"u": A.frame(0)}
    fx.forms = {"f": Form.function(A, "x1^2"), "w": Form.one_form(A, ["x1"])}
    fx.connections = {"zero": Connection(A, 1, name="zero")}
    fx.expected = [
        Expected("d f", "2*x1*T^1", "direct", None,
                 lambda: exterior_derivative(fx.forms["f"]).text()),
        Expected("L_u w", "T^1", "oracle", "defining sum on the frame with L=0, rho=1",
                 lambda: lie_derivative(fx.sections["u"], fx.forms["w"]).text()),
    ]
    return fx


def _tb2() -> Fixture:
    A = _tangent(2).with_name("TB2")
    fx = Fixture("TB2", A)
    fx.sections = {"u": A.section(["x2", 0]), "v": A.section([0, "x1"]), "t1": A.frame(0)}
    fx.forms = {
        "g": Form.function(A, "x1*x2"),
        "w": Form.one_form(A, ["x2", 0]),
        "a": Form.coframe(A, 0),
        "b": Form.coframe(A, 1),
    }
    fx.connections = {"zero": Connection(A, 2, name="zero")}
    fx.expected = [
        Expected("d g", "x2*T^1 + x1*T^2", "direct", None,
                 lambda: exterior_derivative(fx.forms["g"]).text()),
        Expected("d w", "-T^1/\\T^2", "oracle", "coefficient formula expansion",
                 lambda: exterior_derivative(fx.forms["w"]).text()),
    ]
    return fx


def _tb3() -> Fixture:
    A = _tangent(3).with_name("TB3")
    fx = Fixture("TB3", A)
    fx.sections = {"u": A.frame(0), "v": A.section([0, 1, "x1"])}
    fx.forms = {"w": Form.one_form(A, [0, "-x1", 1])}
    fx.ids = {"xy": IDS(A, [A.frame(0), A.frame(1)], name="xy")}
    fx.connections = {"zero": Connection(A, 3, name="zero")}
    fx.expected = [
        Expected("xy involutive", "True", "direct", None,
                 lambda: str(involutive_bracket(fx.ids["xy"]).involutive)),
    ]
    return fx


def _so3_fixture() -> Fixture:
    A = _so3()
    fx = Fixture("SO3", A)
    fx.sections = {"u": A.frame(0), "v": A.frame(1), "w": A.frame(2)}
    fx.forms = {f"t{a + 1}": Form.coframe(A, a) for a in range(3)}
    fx.ids = {"t12": IDS(A, [A.frame(0), A.frame(1)], name="t12")}
    fx.connections = _so3_connections(A)
    fx.expected = [
        Expected("L^3_12", "1", "oracle", "frame Jacobi over all 27 triples",
                 lambda: str(A.L(2, 0, 1))),
        Expected("d t1", "-T^2/\\T^3", "oracle", "half-sum expansion and the invariant formula",
                 lambda: exterior_derivative(fx.forms["t1"]).text()),
        Expected("L_t1 t2", "T^3", "oracle", "defining sum over beta in 1..3",
                 lambda: lie_derivative(A.frame(0), fx.forms["t2"]).text()),
        Expected("t12 involutive", "False", "oracle", "structure table lookup [t1,t2]=t3",
                 lambda: str(involutive_bracket(fx.ids["t12"]).involutive)),
    ]
    return fx


def _heis() -> Fixture:
    A = _tangent(3).with_name("HEIS")
    fx = Fixture("HEIS", A)
    gens = [A.frame(0), A.section([0, 1, "x1"])]
    fx.sections = {"S1": gens[0], "S2": gens[1]}
    fx.ids = {"main": IDS(A, gens, name="main")}
    fx.forms = {"theta": Form.one_form(A, [0, "-x1", 1])}
    fx.expected = [
        Expected("main involutive", "False", "oracle", "Leibniz bracket expansion",
                 lambda: str(involutive_bracket(fx.ids["main"]).involutive)),
        Expected("main witness", "[S1,S2] = T3", "oracle", "Leibniz bracket expansion",
                 lambda: involutive_bracket(fx.ids["main"]).witness_text()),
        Expected("main A^3_12", "-1", "oracle", "d(-x1 T^2 + T^3) = -T^1/\\T^2 on (S1,S2)",
                 lambda: str(involutive_cartan(fx.ids["main"]).violation_value)),
    ]
    return fx


def _so3h() -> Fixture:
    N = CoordinateSet(["k1"])
    base = Algebroid.from_upper(
        N, 3, FieldMatrix.zeros(N, 1, 3), _so3_structure(N, N.var("k1")), name="SO3H"
    )
    h = SmoothMap(N, N, ["k1^3"])
    A = gla_from_lie_algebroid(base, h).with_name("SO3H")
    fx = Fixture("SO3H", A)
    fx.sections = {"u": A.frame(0), "v": A.section([0, "k1", 0])}
    fx.forms = {f"t{a + 1}": Form.coframe(A, a) for a in range(3)}
    fx.connections = {"zero": Connection(A, 3, name="zero")}
    fx.expected = [
        Expected("L^1_23", "k1^3", "direct", None, lambda: str(A.L(0, 1, 2))),
        Expected("d t1", "-k1^3*T^2/\\T^3", "oracle", "half-sum expansion with L composed with h",
                 lambda: exterior_derivative(fx.forms["t1"]).text()),
    ]
    return fx


_BUILDERS = {
    "TB1": _tb1,
    "TB2": _tb2,
    "TB3": _tb3,
    "SO3": _so3_fixture,
    "HEIS": _heis,
    "SO3H": _so3h,
}


# ---------------------------------------------------------------------------
# random generation


def _monomials(m: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(m), d):
            out.append(tuple(combo.count(i) for i in range(m)))
    return out


def random_function(coords: CoordinateSet, rng: random.Random, degree: int = 2,
                    terms: int = 3, rational: bool = False) -> ScalarExpr:
    """Sparse polynomial with small integer coefficients (optionally a quotient)."""
    ring = coords.ring
    monos = _monomials(len(coords), degree)
    poly = ring.zero
    for _ in range(rng.randint(1, terms)):
        mono = rng.choice(monos)
        c = rng.choice([-3, -2, -1, 1, 2, 3])
        poly += ring.from_dict({mono: c})
    f = ScalarExpr._raw(coords, poly, ring.one)
    if rational and len(coords):
        den = ScalarExpr._raw(coords, ring.one, ring.one)
        # denominators of the form 1 + x^2 never vanish identically
        x = coords.var(rng.choice(coords.names))
        den = den + x * x * rng.choice([1, 2])
        f = f / den
    return f


def random_instance(seed: int, max_rank: int = 4, max_dim: int = 3, max_degree: int = 2) -> Fixture:
    """Seeded valid algebroid with rank <= max_rank and dim <= max_dim."""
    rng = random.Random(seed)
    m = rng.randint(1, max_dim)
    coords = CoordinateSet.numbered("x", m)
    rows = []
    for i in range(m):
        row = []
        for j in range(m):
            if j < i:
                row.append(0)
            elif j == i:
                row.append(1)
            else:
                row.append(random_function(coords, rng, max_degree, terms=2))
        rows.append(row)
    theta = FieldMatrix(coords, rows)
    A = tangent_gla(theta)
    p = m
    if m + 1 <= max_rank and rng.random() < 0.5:
        p = m + 1
        zero = coords.zero()
        anchor = FieldMatrix(coords, [list(r) + [zero] for r in theta.entries])
        L = [[list(row) + [zero] for row in plane] + [[zero] * p] for plane in A.structure]
        L.append([[zero] * p for _ in range(p)])
        A = Algebroid(coords, p, anchor, L)
    lam = [[1 if i == j else (rng.randint(-2, 2) if j > i else 0) for j in range(p)] for i in range(p)]
    A = change_frame(A, FieldMatrix(coords, lam)).with_name(f"random{seed}")
    return Fixture(f"random{seed}", A)


def random_section(A: Algebroid, rng: random.Random, degree: int = 2) -> Section:
    return Section(
        A,
        [random_function(A.coords, rng, degree) if rng.random() < 0.8 else 0 for _ in range(A.rank)],
    )


def random_form(A: Algebroid, q: int, rng: random.Random, degree: int = 2) -> Form:
    from itertools import combinations

    keys = list(combinations(range(A.rank), q))
    coeffs = {}
    for k in keys:
        if rng.random() < 0.7:
            coeffs[k] = random_function(A.coords, rng, degree)
    return Form(A, q, coeffs)


def random_ids(A: Algebroid, rng: random.Random, degree: int = 1, attempts: int = 50) -> IDS:
    """r < p generators of generic rank r with degree <= 1 coefficients."""
    p = A.rank
    for _ in range(attempts):
        r = rng.randint(1, p - 1) if p > 1 else 0
        gens = [
            [random_function(A.coords, rng, degree, terms=2) if rng.random() < 0.75 else 0
             for _ in range(p)]
            for _ in range(r)
        ]
        if r == 0 or rank(FieldMatrix(A.coords, gens, cols=p)) == r:
            return IDS(A, gens)
    raise RuntimeError("failed to draw a full-rank generator set")


def random_involutive_ids(rng: random.Random, max_rank: int = 4, max_dim: int = 3) -> IDS:
    """Involutive by construction: rows of M(x) [I | 0] P on a flat algebroid.

    The algebroid is the trivial bundle with zero bracket and a constant
    anchor onto the leading coordinates, M is a random invertible r x r
    matrix of degree <= 1 functions and P a constant invertible p x p matrix.
    """
    p = rng.randint(2, max_rank)
    coords = CoordinateSet.numbered("x", rng.randint(1, max_dim))
    anchor = [[1 if i == a else 0 for a in range(p)] for i in range(len(coords))]
    A = Algebroid(coords, p, anchor, [[[0] * p for _ in range(p)] for _ in range(p)])
    r = rng.randint(1, p - 1)
    while True:
        M = FieldMatrix(coords, [[random_function(coords, rng, 1, terms=2) for _ in range(r)] for _ in range(r)])
        if rank(M) == r:
            break
    while True:
        P = FieldMatrix(coords, [[rng.randint(-2, 2) for _ in range(p)] for _ in range(p)])
        if rank(P) == p:
            break
    gens = (M @ FieldMatrix(coords, [P.row(b) for b in range(r)])).entries
    return IDS(A, [list(g) for g in gens])


def random_connection(A: Algebroid, rng: random.Random, bundle_rank: int | None = None,
                      degree: int = 1) -> Connection:
    n = A.rank if bundle_rank is None else bundle_rank
    gamma = {}
    for a in range(n):
        for b in range(n):
            for al in range(A.rank):
                if rng.random() < 0.6:
                    gamma[a, b, al] = random_function(A.coords, rng, degree, terms=2)
    return Connection(A, n, gamma)


def _triangular_map(coords: CoordinateSet, rng: random.Random) -> tuple[SmoothMap, SmoothMap]:
    """x_i -> x_i + c_i + q_i(x_1..x_{i-1}) and its exact inverse."""
    m = len(coords)
    shifts = []
    fwd = []
    for i in range(m):
        c = rng.randint(-2, 2)
        if i and rng.random() < 0.6:
            prev = CoordinateSet(coords.names[:i])
            q = random_function(prev, rng, 2, terms=2)
            q = ScalarExpr(coords, coords.ring.from_dict(
                {mono + (0,) * (m - i): c_ for mono, c_ in q.num.items()}
            ))
        else:
            q = coords.zero()
        shifts.append(q + c)
        fwd.append(coords.var(coords.names[i]) + q + c)
    phi = SmoothMap(coords, coords, fwd)
    inv: list[ScalarExpr] = []
    for i in range(m):
        # y_i - shift_i evaluated at the already inverted x_{<i}
        s = _pull_prefix(shifts[i], inv, coords) if i else shifts[i]
        inv.append(coords.var(coords.names[i]) - s)
    return phi, SmoothMap(coords, coords, inv)


def _pull_prefix(f: ScalarExpr, images: list[ScalarExpr], coords: CoordinateSet) -> ScalarExpr:
    from .symkernel import substitute

    bind = {n: images[k] if k < len(images) else coords.var(n) for k, n in enumerate(coords.names)}
    return substitute(f, bind, coords)


def random_morphism(source: Algebroid, target: Algebroid, rng: random.Random,
                    degree: int = 1) -> Morphism:
    """Random matrix with a random invertible triangular base map (equal dims)."""
    if source.coords != target.coords:
        raise ValueError("random morphisms need a shared coordinate set")
    phi, inv = _triangular_map(source.coords, rng)
    mat = [
        [random_function(source.coords, rng, degree, terms=2) if rng.random() < 0.8 else 0
         for _ in range(source.rank)]
        for _ in range(target.rank)
    ]
    return Morphism(source, target, FieldMatrix(source.coords, mat, cols=source.rank), phi, inv)


def frame_change_morphism(A: Algebroid, Lam: FieldMatrix) -> Morphism:
    """The frame change viewed as an algebroid isomorphism onto A."""
    src = change_frame(A, Lam)
    ident = SmoothMap.identity(A.coords)
    return Morphism(src, A, Lam, ident, ident)
