"""Interior differential systems: annihilators and involutivity tests.

A distribution is given by r generating sections of generic rank r.  Its
involutivity is decided three ways: closure of the bracket, the Cartan
criterion on the annihilator coframe, and closure of the annihilator ideal
under d.  All three work over the function field, so loci where the
generators drop rank are outside the model; every verdict carries a caveat
naming the determinant whose zero set is excluded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .algebroid import Algebroid, Section, bracket
from .forms import Form, evaluate, exterior_derivative, wedge
from .ratlinalg import (
    FieldMatrix,
    InconsistentSystemError,
    det,
    invert,
    nullspace,
    pivot_columns,
    rank,
    solve,
)
from .symkernel import ScalarExpr

__all__ = [
    "IDS",
    "Annihilator",
    "BracketVerdict",
    "CartanWitness",
    "annihilator",
    "complete_frame",
    "involutive_bracket",
    "involutive_cartan",
    "ideal_membership",
    "eds_check",
]


class IDS:
    """r generating sections, optionally with a user-chosen completion."""

    __slots__ = ("algebroid", "generators", "completion", "name")

    def __init__(
        self,
        algebroid: Algebroid,
        generators: Sequence[Section],
        completion: Sequence[Section] | None = None,
        name: str | None = None,
    ):
        gens = [g if isinstance(g, Section) else Section(algebroid, g) for g in generators]
        if completion is not None:
            completion = [c if isinstance(c, Section) else Section(algebroid, c) for c in completion]
        self.algebroid = algebroid
        self.generators = gens
        self.completion = completion
        self.name = name
        if gens and rank(self.generator_matrix()) != len(gens):
            raise ValueError("generators are linearly dependent over the function field")
        if completion is not None:
            full = gens + completion
            if len(full) != algebroid.rank or rank(_columns(algebroid, full)) != algebroid.rank:
                raise ValueError("completion does not give a frame")

    @property
    def r(self) -> int:
        return len(self.generators)

    def generator_matrix(self) -> FieldMatrix:
        """r x p: row a = coefficients of S_a."""
        return FieldMatrix(
            self.algebroid.coords, [g.coeffs for g in self.generators], cols=self.algebroid.rank
        )


def _columns(A: Algebroid, sections: Sequence[Section]) -> FieldMatrix:
    """p x len: column b = coefficients of the b-th section."""
    return FieldMatrix(
        A.coords, [[s.coeffs[a] for s in sections] for a in range(A.rank)], cols=len(sections)
    )


@dataclass
class Annihilator:
    coforms: list[Form]


@dataclass
class Frame:
    sections: list[Section]
    coframe: list[Form]
    matrix: FieldMatrix
    determinant: ScalarExpr


@dataclass
class BracketVerdict:
    involutive: bool
    pair: tuple[int, int] | None = None
    value: Section | None = None
    residual: Section | None = None
    caveat: str = ""

    def witness_text(self) -> str | None:
        if self.pair is None:
            return None
        a, b = self.pair
        return f"[S{a + 1},S{b + 1}] = {self.value.text()}"


@dataclass
class CartanWitness:
    involutive: bool
    omega: list[list[Form]] | None = None
    violation: tuple[int, int, int] | None = None
    violation_value: ScalarExpr | None = None
    first_index: int = 0  # frame index of the first annihilator coform
    caveat: str = ""
    A: dict = field(default_factory=dict)
    B: dict = field(default_factory=dict)
    C: dict = field(default_factory=dict)


def _caveat(fr: Frame) -> str:
    if fr.determinant.is_constant():
        return f"generic rank over the function field; frame determinant {fr.determinant} never vanishes"
    return (
        f"generic rank over the function field; loci where {fr.determinant} "
        "vanishes are excluded"
    )


def caveat(D: IDS) -> str:
    return _caveat(complete_frame(D))


def annihilator(D: IDS) -> Annihilator:
    A = D.algebroid
    if D.r == 0:
        return Annihilator([Form.coframe(A, a) for a in range(A.rank)])
    vecs = nullspace(D.generator_matrix())
    return Annihilator([Form.one_form(A, v) for v in vecs])


def complete_frame(D: IDS) -> Frame:
    A = D.algebroid
    p = A.rank
    sections = list(D.generators)
    if D.completion is not None:
        sections += D.completion
    else:
        # standard sections at the non-pivot columns, left to right; the
        # pivot minor of the generators is nonzero so the frame is invertible
        pivots = pivot_columns(D.generator_matrix())
        sections += [A.frame(j) for j in range(p) if j not in pivots]
    F = _columns(A, sections)
    Finv = invert(F)
    coframe = [Form.one_form(A, Finv.row(a)) for a in range(p)]
    return Frame(sections, coframe, F, det(F))


def involutive_bracket(D: IDS) -> BracketVerdict:
    A = D.algebroid
    fr = complete_frame(D)
    G = D.generator_matrix().transpose()  # p x r
    for a, b in combinations(range(D.r), 2):
        v = bracket(A, D.generators[a], D.generators[b])
        try:
            solve(G, v.coeffs)
        except InconsistentSystemError:
            res = A.zero_section()
            for beta in range(D.r, A.rank):
                c = evaluate(fr.coframe[beta], [v])
                res = res + fr.sections[beta].scale(c)
            return BracketVerdict(False, (a, b), v, res, _caveat(fr))
    return BracketVerdict(True, caveat=_caveat(fr))


def involutive_cartan(D: IDS) -> CartanWitness:
    A = D.algebroid
    p, r = A.rank, D.r
    fr = complete_frame(D)
    S, Th = fr.sections, fr.coframe
    out = CartanWitness(True, first_index=r, caveat=_caveat(fr))
    dth = {al: exterior_derivative(Th[al]) for al in range(r, p)}
    for al in range(r, p):
        for i, j in combinations(range(p), 2):
            val = evaluate(dth[al], [S[i], S[j]])
            if j < r:
                out.A[al, i, j] = val
                if val and out.involutive:
                    out.involutive = False
                    out.violation = (i, j, al)
                    out.violation_value = val
            elif i < r:
                out.B[al, i, j] = val
            else:
                out.C[al, i, j] = val
    if not out.involutive:
        return out
    half = ScalarExpr.const(A.coords, 1) / 2
    omega = []
    for al in range(r, p):
        row = []
        for g in range(r, p):
            w = Form.zero(A, 1)
            for b in range(r):
                c = out.B[al, b, g]
                if c:
                    w = w + Th[b].scale(c)
            for be in range(r, p):
                if be == g:
                    continue
                c = out.C[al, be, g] if be < g else -out.C[al, g, be]
                if c:
                    w = w + Th[be].scale(c * half)
            row.append(w)
        omega.append(row)
    # the witness must reproduce d Theta^alpha before it is handed out
    for k, al in enumerate(range(r, p)):
        total = Form.zero(A, 2)
        for l, g in enumerate(range(r, p)):
            total = total + wedge(omega[k][l], Th[g])
        if total != dth[al]:
            raise ArithmeticError(
                f"Cartan witness failed to reproduce d Theta^{al + 1}: {(dth[al] - total).text()}"
            )
    out.omega = omega
    return out


def ideal_membership(w: Form, D: IDS) -> bool:
    """w vanishes on every tuple of generators."""
    k = w.degree
    if k == 0:
        return w.is_zero()
    if k > D.r:
        return True
    for idx in combinations(range(D.r), k):
        if evaluate(w, [D.generators[a] for a in idx]):
            return False
    return True


def eds_check(D: IDS) -> bool:
    return all(
        ideal_membership(exterior_derivative(th), D) for th in annihilator(D).coforms
    )
