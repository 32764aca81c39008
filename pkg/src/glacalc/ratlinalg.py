"""Dense linear algebra over a rational-function field.

Rank uses fraction-free (Bareiss) elimination on denominator-cleared rows;
inverse, solve and determinants run Gauss-Jordan over the field.  Pivot
choice is always the first row, scanning downward, whose entry is
symbolically nonzero, so results are reproducible.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .symkernel import CoordinateSet, ScalarExpr

__all__ = [
    "FieldMatrix",
    "SingularMatrixError",
    "InconsistentSystemError",
    "rank",
    "nullspace",
    "invert",
    "solve",
    "det",
    "pivot_columns",
]


class SingularMatrixError(ValueError):
    pass


class InconsistentSystemError(ValueError):
    pass


def _lift(coords, value) -> ScalarExpr:
    if isinstance(value, ScalarExpr):
        if value.coords != coords:
            raise ValueError("matrix entries must share one coordinate set")
        return value
    if isinstance(value, str):
        return coords.parse(value)
    return ScalarExpr.const(coords, value)


class FieldMatrix:
    """rows x cols grid of ScalarExpr over one CoordinateSet (immutable)."""

    __slots__ = ("coords", "rows", "cols", "entries")

    def __init__(self, coords: CoordinateSet, entries: Iterable[Iterable], cols: int | None = None):
        grid = tuple(tuple(_lift(coords, e) for e in row) for row in entries)
        if grid:
            widths = {len(r) for r in grid}
            if len(widths) != 1:
                raise ValueError("ragged matrix rows")
            ncols = widths.pop()
            if cols is not None and cols != ncols:
                raise ValueError("column count mismatch")
        else:
            ncols = cols or 0
        self.coords = coords
        self.rows = len(grid)
        self.cols = ncols
        self.entries = grid

    @classmethod
    def identity(cls, coords: CoordinateSet, n: int) -> "FieldMatrix":
        return cls(coords, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, coords: CoordinateSet, rows: int, cols: int) -> "FieldMatrix":
        return cls(coords, [[0] * cols for _ in range(rows)], cols=cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> tuple:
        return self.entries[i]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(
            self.coords, [self.column(j) for j in range(self.cols)], cols=self.rows
        )

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        zero = self.coords.zero()
        out = []
        for i in range(self.rows):
            r = self.entries[i]
            line = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = r[k]
                    if a:
                        b = other.entries[k][j]
                        if b:
                            acc = acc + a * b
                line.append(acc)
            out.append(line)
        return FieldMatrix(self.coords, out, cols=other.cols)

    def apply(self, vec: Sequence[ScalarExpr]) -> list[ScalarExpr]:
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        zero = self.coords.zero()
        out = []
        for r in self.entries:
            acc = zero
            for a, b in zip(r, vec):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return out

    def map(self, fn) -> "FieldMatrix":
        return FieldMatrix(self.coords, [[fn(e) for e in r] for r in self.entries], cols=self.cols)

    def is_identity(self) -> bool:
        return self.rows == self.cols and all(
            (e == 1) if i == j else e.is_zero()
            for i, r in enumerate(self.entries)
            for j, e in enumerate(r)
        )

    def __eq__(self, other):
        return (
            isinstance(other, FieldMatrix)
            and self.coords == other.coords
            and self.shape == other.shape
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.coords, self.entries))

    def __repr__(self):
        body = "; ".join(", ".join(str(e) for e in r) for r in self.entries)
        return f"FieldMatrix([{body}])"


# ---------------------------------------------------------------------------


def _poly_rows(A: FieldMatrix):
    """Each row scaled by the lcm of its denominators -> polynomial rows."""
    ring = A.coords.ring
    out = []
    for r in A.entries:
        l = ring.one
        for e in r:
            if not e.den.is_one:
                l = l.lcm(e.den) if not l.is_one else e.den
        out.append([e.num * l.exquo(e.den) if e.num else ring.zero for e in r])
    return out


def _bareiss(M: list[list]) -> tuple[list[list], list[int]]:
    """Fraction-free row echelon form; returns (matrix, pivot columns)."""
    M = [row[:] for row in M]
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    if not nrows:
        return M, []
    ring = M[0][0].ring if ncols else None
    prev = ring.one if ring else None
    pivots = []
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        piv = next((i for i in range(r, nrows) if M[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        for i in range(r + 1, nrows):
            a = M[i][c]
            for j in range(c + 1, ncols):
                val = p * M[i][j] - a * M[r][j]
                M[i][j] = val.exquo(prev) if not prev.is_one else val
            M[i][c] = ring.zero
        # rows above the pivot row are untouched, entries left of c are zero
        prev = p
        pivots.append(c)
        r += 1
    return M, pivots


def rank(A: FieldMatrix) -> int:
    if A.rows == 0 or A.cols == 0:
        return 0
    _, pivots = _bareiss(_poly_rows(A))
    return len(pivots)


def _rref(A: FieldMatrix, aug: Sequence[Sequence[ScalarExpr]] | None = None):
    """Gauss-Jordan over the field; returns (rows, pivot columns)."""
    coords = A.coords
    rows = [list(r) + (list(aug[i]) if aug is not None else []) for i, r in enumerate(A.entries)]
    nrows = A.rows
    pivots = []
    r = 0
    for c in range(A.cols):
        if r >= nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [e * inv if e else e for e in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b if b else a for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    return rows, pivots


def _primitive(vec: list[ScalarExpr], coords: CoordinateSet, anchor: int) -> list[ScalarExpr]:
    ring = coords.ring
    l = ring.one
    for e in vec:
        if e and not e.den.is_one:
            l = l.lcm(e.den)
    nums = [e.num * l.exquo(e.den) if e else ring.zero for e in vec]
    g = ring.zero
    for n in nums:
        if n:
            g = n if not g else g.gcd(n)
    nums = [n.exquo(g) if n else n for n in nums]
    # the free-variable slot keeps a positive leading coefficient
    if nums[anchor].LC < 0:
        nums = [-n for n in nums]
    return [ScalarExpr._raw(coords, n, ring.one) for n in nums]


def nullspace(A: FieldMatrix) -> list[list[ScalarExpr]]:
    """Basis of {v : A v = 0}, one vector per free column in increasing order.

    Each vector has the free variable set to 1 before clearing denominators
    and removing the polynomial content.
    """
    coords = A.coords
    if A.cols == 0:
        return []
    if A.rows == 0:
        rows, pivots = [], []
    else:
        rows, pivots = _rref(A)
    free = [j for j in range(A.cols) if j not in pivots]
    basis = []
    for f in free:
        v = [coords.zero() for _ in range(A.cols)]
        v[f] = coords.one()
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][f]
        basis.append(_primitive(v, coords, f))
    return basis


def pivot_columns(A: FieldMatrix) -> list[int]:
    """Columns holding the pivots of the reduced row echelon form."""
    if A.rows == 0 or A.cols == 0:
        return []
    return _rref(A)[1]


def invert(A: FieldMatrix) -> FieldMatrix:
    if A.rows != A.cols:
        raise SingularMatrixError(f"cannot invert non-square {A.shape} matrix")
    n = A.rows
    ident = FieldMatrix.identity(A.coords, n).entries
    rows, pivots = _rref(A, ident)
    if len(pivots) < n:
        raise SingularMatrixError("matrix is singular over the function field")
    return FieldMatrix(A.coords, [r[n:] for r in rows], cols=n)


def solve(A: FieldMatrix, b: Sequence[ScalarExpr]) -> list[ScalarExpr]:
    """One solution of A x = b; free variables are set to zero."""
    if len(b) != A.rows:
        raise ValueError("right-hand side length mismatch")
    coords = A.coords
    b = [_lift(coords, e) for e in b]
    rows, pivots = _rref(A, [[e] for e in b])
    for r in range(len(pivots), A.rows):
        if rows[r][A.cols]:
            raise InconsistentSystemError(
                f"inconsistent system: residual {rows[r][A.cols]} in row {r + 1}"
            )
    x = [coords.zero() for _ in range(A.cols)]
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][A.cols]
    return x


def det(A: FieldMatrix) -> ScalarExpr:
    if A.rows != A.cols:
        raise ValueError("determinant of a non-square matrix")
    coords = A.coords
    n = A.rows
    if n == 0:
        return coords.one()
    if n == 1:
        return A.entries[0][0]
    if n == 2:
        (a, b), (c, d) = A.entries
        return a * d - b * c
    rows = [list(r) for r in A.entries]
    sign = 1
    acc = coords.one()
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c]), None)
        if piv is None:
            return coords.zero()
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            sign = -sign
        p = rows[c][c]
        acc = acc * p
        inv = p.inverse()
        for i in range(c + 1, n):
            if rows[i][c]:
                f = rows[i][c] * inv
                rows[i] = [a - f * b if b else a for a, b in zip(rows[i], rows[c])]
    return acc if sign > 0 else -acc
