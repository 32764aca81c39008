"""Linear connections over an algebroid: torsion, curvature and their identities.

The table ``gamma[a][b][alpha]`` holds the components with
``nabla_{T_alpha} s_b = gamma[a][b][alpha] s_a``.  Bundle-valued forms are
stored as tables of scalar forms indexed by the bundle frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .algebroid import Algebroid
from .forms import Form, exterior_derivative, wedge
from .report import Report
from .symkernel import ScalarExpr

__all__ = [
    "Connection",
    "TorsionData",
    "CurvatureData",
    "connection_forms",
    "torsion",
    "curvature",
    "cartan_identities_check",
    "bianchi_identities_check",
]


class Connection:
    __slots__ = ("algebroid", "bundle_rank", "gamma", "name")

    def __init__(
        self,
        algebroid: Algebroid,
        bundle_rank: int,
        gamma: Sequence[Sequence[Sequence]] | Mapping[tuple[int, int, int], object] | None = None,
        name: str | None = None,
    ):
        n, p = bundle_rank, algebroid.rank
        zero = algebroid.coords.zero()
        table = [[[zero] * p for _ in range(n)] for _ in range(n)]
        if isinstance(gamma, Mapping):
            for (a, b, al), e in gamma.items():
                if not (0 <= a < n and 0 <= b < n and 0 <= al < p):
                    raise ValueError(f"connection index {(a, b, al)} out of range")
                table[a][b][al] = algebroid.expr(e)
        elif gamma is not None:
            if len(gamma) != n or any(
                len(r) != n or any(len(c) != p for c in r) for r in gamma
            ):
                raise ValueError(f"connection table must be {n}x{n}x{p}")
            table = [[[algebroid.expr(e) for e in c] for c in r] for r in gamma]
        self.algebroid = algebroid
        self.bundle_rank = n
        self.gamma = tuple(tuple(tuple(c) for c in r) for r in table)
        self.name = name

    @property
    def is_tangent(self) -> bool:
        return self.bundle_rank == self.algebroid.rank

    def G(self, a: int, b: int, al: int) -> ScalarExpr:
        return self.gamma[a][b][al]


@dataclass
class TorsionData:
    components: list  # T[c][a][b]
    forms: list[Form]

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self.forms)


@dataclass
class CurvatureData:
    components: list  # R[a][b][alpha][beta]
    curvature_forms: list[list[Form]]
    connection_forms: list[list[Form]]


def connection_forms(C: Connection) -> list[list[Form]]:
    """Omega^a_b = sum_alpha gamma^a_{b alpha} T^alpha."""
    A = C.algebroid
    n = C.bundle_rank
    return [[Form.one_form(A, C.gamma[a][b]) for b in range(n)] for a in range(n)]


def torsion(C: Connection) -> TorsionData:
    """T^c_{ab} = gamma^c_{b a} - gamma^c_{a b} - L^c_{ab}; form key (a,b) holds T^c_{ab}."""
    A = C.algebroid
    p = A.rank
    if not C.is_tangent:
        raise ValueError("torsion needs bundle rank equal to the algebroid rank")
    g = C.gamma
    T = [
        [[g[c][b][a] - g[c][a][b] - A.L(c, a, b) for b in range(p)] for a in range(p)]
        for c in range(p)
    ]
    forms = [
        Form(A, 2, {(a, b): T[c][a][b] for a, b in combinations(range(p), 2)})
        for c in range(p)
    ]
    return TorsionData(T, forms)


def curvature(C: Connection) -> CurvatureData:
    """Components R^a_{b alpha beta} and the curvature 2-forms.

    R^a_{b al be} is the s_a component of R(T_be, T_al) s_b, so the form
    coefficient on the increasing key (al, be) is R^a_{b be al}.
    """
    A = C.algebroid
    n, p = C.bundle_rank, A.rank
    names = A.coords.names
    g = C.gamma
    zero = A.coords.zero()

    def rho_d(al: int, f: ScalarExpr) -> ScalarExpr:
        acc = zero
        for i, nm in enumerate(names):
            r = A.rho(i, al)
            if r:
                df = f.diff(nm)
                if df:
                    acc = acc + r * df
        return acc

    R = [[[[zero] * p for _ in range(p)] for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for al in range(p):
                for be in range(al + 1, p):
                    val = rho_d(be, g[a][b][al]) - rho_d(al, g[a][b][be])
                    for e in range(n):
                        val = val + g[a][e][be] * g[e][b][al] - g[a][e][al] * g[e][b][be]
                    for gm in range(p):
                        l = A.L(gm, al, be)
                        if l:
                            val = val + g[a][b][gm] * l
                    R[a][b][al][be] = val
                    R[a][b][be][al] = -val
    forms = [
        [
            Form(A, 2, {(al, be): R[a][b][be][al] for al, be in combinations(range(p), 2)})
            for b in range(n)
        ]
        for a in range(n)
    ]
    return CurvatureData(R, forms, connection_forms(C))


def _entry(rep: Report, name: str, diff: Form):
    rep.add(name, diff.is_zero(), None if diff.is_zero() else f"residual {diff.text()}")


def _sum(A: Algebroid, degree: int, terms) -> Form:
    total = Form.zero(A, degree)
    for t in terms:
        total = total + t
    return total


def cartan_identities_check(C: Connection) -> Report:
    A = C.algebroid
    n, p = C.bundle_rank, A.rank
    rep = Report(f"cartan identities {C.name or 'connection'}")
    Om = connection_forms(C)
    if C.is_tangent:
        S = [Form.coframe(A, a) for a in range(p)]
        T = torsion(C).forms
        for a in range(p):
            rhs = exterior_derivative(S[a]) + _sum(A, 2, (wedge(Om[a][b], S[b]) for b in range(p)))
            _entry(rep, f"C1 a={a + 1}", T[a] - rhs)
    else:
        rep.note("C1", "not applicable (bundle rank differs from algebroid rank)")
    Rf = curvature(C).curvature_forms
    for a in range(n):
        for b in range(n):
            rhs = exterior_derivative(Om[a][b]) + _sum(
                A, 2, (wedge(Om[a][c], Om[c][b]) for c in range(n))
            )
            _entry(rep, f"C2 a={a + 1} b={b + 1}", Rf[a][b] - rhs)
    return rep


def bianchi_identities_check(C: Connection) -> Report:
    A = C.algebroid
    n, p = C.bundle_rank, A.rank
    rep = Report(f"bianchi identities {C.name or 'connection'}")
    Om = connection_forms(C)
    Rf = curvature(C).curvature_forms
    if C.is_tangent:
        S = [Form.coframe(A, a) for a in range(p)]
        tor = torsion(C)
        T = tor.forms
        for a in range(p):
            lhs = exterior_derivative(T[a])
            rhs = _sum(A, 3, (wedge(Rf[a][b], S[b]) for b in range(p))) - _sum(
                A, 3, (wedge(Om[a][c], T[c]) for c in range(p))
            )
            _entry(rep, f"B1 a={a + 1}", lhs - rhs)
        if tor.is_zero():
            for a in range(p):
                _entry(rep, f"B1~ a={a + 1}", _sum(A, 3, (wedge(Rf[a][b], S[b]) for b in range(p))))
    else:
        rep.note("B1", "not applicable (bundle rank differs from algebroid rank)")
    for a in range(n):
        for b in range(n):
            lhs = exterior_derivative(Rf[a][b])
            rhs = _sum(A, 3, (wedge(Rf[a][c], Om[c][b]) for c in range(n))) - _sum(
                A, 3, (wedge(Om[a][c], Rf[c][b]) for c in range(n))
            )
            _entry(rep, f"B2 a={a + 1} b={b + 1}", lhs - rhs)
    return rep
