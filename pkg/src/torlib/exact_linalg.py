"""Exact integer and rational linear algebra.

Everything here is computed over Z or Q with arbitrary precision; no
floating point is used anywhere.  Distinctions such as "solvable over Q
but not over Z" or "rational vs irrational" are destroyed by rounding,
so exactness is a hard requirement, not an optimization.

Conventions
-----------
* Matrices act on column vectors.  A linear map written f(x) elsewhere
  is ``mat_apply(M, x)`` here.
* Rationals are :class:`fractions.Fraction` (always in lowest terms,
  positive denominator).  They serialize as ``"num/den"`` with the
  denominator omitted when it is 1.
* ``hnf`` returns a *row* Hermite normal form: pivots positive, entries
  below pivots zero, entries above pivots reduced into ``[0, pivot)``,
  zero rows at the bottom.  This makes serialized output bit-stable.
* All values are immutable after construction and all functions are
  pure, so everything is safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

Rat = Fraction

Scalar = int | Fraction
Vec = tuple[Scalar, ...]
IntVec = tuple[int, ...]


class LinalgError(ValueError):
    pass


class NotSaturatedError(LinalgError):
    """A lattice basis expected to be primitive is not."""


def _norm(x: Scalar) -> Scalar:
    """Collapse integral Fractions to int so equal values compare equal."""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return x
    return int(x)


def rat_to_str(x: Scalar) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rat_from_str(s: str | int) -> Scalar:
    if isinstance(s, int):
        return s
    return _norm(Fraction(s))


class Mat:
    """Immutable dense matrix with exact int/Fraction entries."""

    __slots__ = ("rows", "cols", "data", "_hash")

    def __init__(self, data: Iterable[Iterable[Scalar]], rows: int | None = None,
                 cols: int | None = None):
        rows_t = tuple(tuple(_norm(x) for x in row) for row in data)
        if rows_t:
            self.rows = len(rows_t)
            self.cols = len(rows_t[0])
            if any(len(r) != self.cols for r in rows_t):
                raise LinalgError("ragged rows")
        else:
            # empty matrix: dimensions must be supplied (one of them is 0)
            self.rows = rows if rows is not None else 0
            self.cols = cols if cols is not None else 0
            if self.rows and self.cols:
                raise LinalgError("no data for nonempty matrix")
            rows_t = tuple(() for _ in range(self.rows))
        self.data = rows_t
        self._hash = None

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def identity(n: int) -> "Mat":
        return Mat([[1 if i == j else 0 for j in range(n)] for i in range(n)],
                   rows=n, cols=n)

    @staticmethod
    def zeros(r: int, c: int) -> "Mat":
        return Mat([[0] * c for _ in range(r)], rows=r, cols=c)

    @staticmethod
    def from_cols(cols: Sequence[Vec], rows: int | None = None) -> "Mat":
        if cols:
            rows = len(cols[0])
            return Mat([[col[i] for col in cols] for i in range(rows)])
        return Mat([], rows=rows or 0, cols=0)

    # -- basic protocol ------------------------------------------------------

    def __getitem__(self, i: int) -> tuple[Scalar, ...]:
        return self.data[i]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Mat) and self.rows == other.rows \
            and self.cols == other.cols and self.data == other.data

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self.data))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(rat_to_str(x) for x in row) for row in self.data)
        return f"Mat[{self.rows}x{self.cols}]({body})"

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat([[a + b for a, b in zip(r1, r2)]
                    for r1, r2 in zip(self.data, other.data)],
                   rows=self.rows, cols=self.cols)

    def __sub__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat([[a - b for a, b in zip(r1, r2)]
                    for r1, r2 in zip(self.data, other.data)],
                   rows=self.rows, cols=self.cols)

    def __neg__(self) -> "Mat":
        return Mat([[-a for a in row] for row in self.data],
                   rows=self.rows, cols=self.cols)

    def __rmul__(self, c: Scalar) -> "Mat":
        return Mat([[c * a for a in row] for row in self.data],
                   rows=self.rows, cols=self.cols)

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise LinalgError(f"shape mismatch {self.rows}x{self.cols} @ "
                              f"{other.rows}x{other.cols}")
        ot = other.transpose().data
        return Mat([[sum(a * b for a, b in zip(row, col)) for col in ot]
                    for row in self.data], rows=self.rows, cols=other.cols)

    def transpose(self) -> "Mat":
        return Mat([[self.data[i][j] for i in range(self.rows)]
                    for j in range(self.cols)], rows=self.cols, cols=self.rows)

    def _same_shape(self, other: "Mat") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise LinalgError("shape mismatch")

    def __pow__(self, n: int) -> "Mat":
        if self.rows != self.cols:
            raise LinalgError("power of non-square matrix")
        if n < 0:
            return self.inverse() ** (-n)
        result = Mat.identity(self.rows)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def is_identity(self) -> bool:
        return self.rows == self.cols and all(
            x == (1 if i == j else 0)
            for i, row in enumerate(self.data) for j, x in enumerate(row))

    def is_integral(self) -> bool:
        return all(isinstance(x, int) for row in self.data for x in row)

    # -- exact dense algorithms ----------------------------------------------

    def det(self) -> Scalar:
        if self.rows != self.cols:
            raise LinalgError("determinant of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [[Fraction(x) for x in row] for row in self.data]
        det = Fraction(1)
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col] != 0), None)
            if piv is None:
                return 0
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det *= a[col][col]
            inv = 1 / a[col][col]
            for r in range(col + 1, n):
                if a[r][col]:
                    f = a[r][col] * inv
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return _norm(det)

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise LinalgError("inverse of non-square matrix")
        n = self.rows
        a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
             for i, row in enumerate(self.data)]
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col] != 0), None)
            if piv is None:
                raise LinalgError("singular matrix")
            a[col], a[piv] = a[piv], a[col]
            inv = 1 / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r != col and a[r][col]:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return Mat([row[n:] for row in a], rows=n, cols=n)

    def rank(self) -> int:
        a = [[Fraction(x) for x in row] for row in self.data]
        rank = 0
        for col in range(self.cols):
            piv = next((r for r in range(rank, self.rows) if a[r][col] != 0), None)
            if piv is None:
                continue
            a[rank], a[piv] = a[piv], a[rank]
            inv = 1 / a[rank][col]
            a[rank] = [x * inv for x in a[rank]]
            for r in range(self.rows):
                if r != rank and a[r][col]:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
            rank += 1
            if rank == self.rows:
                break
        return rank

    # -- block helpers -------------------------------------------------------

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "Mat":
        return Mat([row[c0:c1] for row in self.data[r0:r1]],
                   rows=r1 - r0, cols=c1 - c0)

    def col(self, j: int) -> Vec:
        return tuple(row[j] for row in self.data)


def mat_from_json(entries: list, rows: int | None = None, cols: int | None = None) -> Mat:
    return Mat([[rat_from_str(x) for x in row] for row in entries],
               rows=rows, cols=cols)


def mat_to_json(m: Mat) -> list:
    return [[x if isinstance(x, int) else rat_to_str(x) for x in row]
            for row in m.data]


def hstack(a: Mat, b: Mat) -> Mat:
    if a.rows != b.rows:
        raise LinalgError("hstack row mismatch")
    return Mat([ra + rb for ra, rb in zip(a.data, b.data)],
               rows=a.rows, cols=a.cols + b.cols)


def vstack(a: Mat, b: Mat) -> Mat:
    if a.cols != b.cols:
        raise LinalgError("vstack column mismatch")
    return Mat(a.data + b.data, rows=a.rows + b.rows, cols=a.cols)


def stack_all(mats: Sequence[Mat]) -> Mat:
    out = mats[0]
    for m in mats[1:]:
        out = vstack(out, m)
    return out


# -- vector helpers ----------------------------------------------------------

def vec_add(u: Vec, v: Vec) -> Vec:
    return tuple(_norm(a + b) for a, b in zip(u, v))

def vec_sub(u: Vec, v: Vec) -> Vec:
    return tuple(_norm(a - b) for a, b in zip(u, v))

def vec_scale(c: Scalar, v: Vec) -> Vec:
    return tuple(_norm(c * a) for a in v)

def vec_dot(u: Vec, v: Vec) -> Scalar:
    if len(u) != len(v):
        raise LinalgError("dot length mismatch")
    return _norm(sum(a * b for a, b in zip(u, v)))

def mat_apply(m: Mat, v: Vec) -> Vec:
    if m.cols != len(v):
        raise LinalgError("apply length mismatch")
    return tuple(_norm(sum(a * b for a, b in zip(row, v))) for row in m.data)

def is_zero_vec(v: Vec) -> bool:
    return all(x == 0 for x in v)

def primitive_part(v: IntVec) -> IntVec:
    """Divide an integer vector by the gcd of its entries (0 stays 0)."""
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    if g <= 1:
        return tuple(v)
    return tuple(x // g for x in v)


# -- lattices ----------------------------------------------------------------

@dataclass(frozen=True)
class Lattice:
    """A saturated (primitive) sublattice of Z^ambient.

    The basis spans a sublattice L with Z^ambient / L torsion-free,
    i.e. L = (L tensor Q) intersect Z^ambient.
    """

    ambient: int
    basis: tuple[IntVec, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> Mat:
        """Basis vectors as columns of an ambient x rank matrix."""
        return Mat.from_cols(self.basis, rows=self.ambient)

    def contains(self, v: IntVec) -> bool:
        if self.rank == 0:
            return is_zero_vec(v)
        sol = solve_rational(self.basis_matrix(), v)
        if sol is None:
            return False
        x0, _ = sol
        return all(isinstance(c, int) for c in x0)


# -- Hermite normal form -----------------------------------------------------

def hnf(m: Mat) -> tuple[Mat, Mat]:
    """Row Hermite normal form.

    Returns (H, U) with U unimodular, U @ m == H, pivots positive,
    entries below pivots zero and entries above pivots reduced into
    [0, pivot).  Zero rows sink to the bottom.
    """
    h = [list(row) for row in m.data]
    n, c = m.rows, m.cols
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    row = 0
    for col in range(c):
        if row == n:
            break
        # gcd-reduce entries at and below `row` in this column
        while True:
            nz = [r for r in range(row, n) if h[r][col] != 0]
            if not nz:
                break
            r0 = min(nz, key=lambda r: abs(h[r][col]))
            if r0 != row:
                h[row], h[r0] = h[r0], h[row]
                u[row], u[r0] = u[r0], u[row]
            done = True
            for r in range(row + 1, n):
                if h[r][col]:
                    q = h[r][col] // h[row][col]
                    h[r] = [a - q * b for a, b in zip(h[r], h[row])]
                    u[r] = [a - q * b for a, b in zip(u[r], u[row])]
                    if h[r][col]:
                        done = False
            if done:
                break
        if row < n and h[row][col] != 0:
            if h[row][col] < 0:
                h[row] = [-a for a in h[row]]
                u[row] = [-a for a in u[row]]
            # reduce entries above the pivot right away; eager reduction
            # keeps intermediate entries small on later columns
            piv = h[row][col]
            for r in range(row):
                q = h[r][col] // piv
                if q:
                    h[r] = [a - q * b for a, b in zip(h[r], h[row])]
                    u[r] = [a - q * b for a, b in zip(u[r], u[row])]
            row += 1
    return Mat(h, rows=n, cols=c), Mat(u, rows=n, cols=n)


# -- Smith normal form -------------------------------------------------------

def _is_diagonal(m: Mat) -> bool:
    return all(m[i][j] == 0 for i in range(m.rows) for j in range(m.cols) if i != j)


def snf(m: Mat) -> tuple[Mat, Mat, Mat]:
    """Smith normal form.

    Returns (S, U, V) with U, V unimodular, U @ m @ V == S, S diagonal
    with nonnegative invariant factors d1 | d2 | ... .

    Diagonalization alternates row and column Hermite passes (which keep
    entries reduced, avoiding the coefficient explosion of naive pivot
    chasing); the divisor chain is then repaired by local 2x2 gcd steps.
    """
    if not m.is_integral():
        raise LinalgError("snf requires an integer matrix")
    n, c = m.rows, m.cols
    s = m
    u = Mat.identity(n)
    v = Mat.identity(c)
    for _ in range(4 * (min(n, c) + 2)):
        if _is_diagonal(s):
            break
        h, u1 = hnf(s)
        s, u = h, u1 @ u
        if _is_diagonal(s):
            break
        ht, v1 = hnf(s.transpose())
        s, v = ht.transpose(), v @ v1.transpose()
    else:
        raise LinalgError("snf failed to converge")  # pragma: no cover

    sd = [list(row) for row in s.data]
    ud = [list(row) for row in u.data]
    vd = [list(row) for row in v.data]

    def add_row(dst, src, q):  # row dst -= q * row src
        sd[dst] = [a - q * b for a, b in zip(sd[dst], sd[src])]
        ud[dst] = [a - q * b for a, b in zip(ud[dst], ud[src])]

    def add_col(dst, src, q):  # col dst -= q * col src
        for row in sd:
            row[dst] -= q * row[src]
        for row in vd:
            row[dst] -= q * row[src]

    def swap_rows(i, j):
        sd[i], sd[j] = sd[j], sd[i]
        ud[i], ud[j] = ud[j], ud[i]

    # compact the diagonal: nonzero entries first, positive signs
    r = min(n, c)
    nonzero = [i for i in range(r) if sd[i][i] != 0]
    for pos, i in enumerate(nonzero):
        if i != pos:
            swap_rows(pos, i)
            for row in sd:
                row[pos], row[i] = row[i], row[pos]
            for row in vd:
                row[pos], row[i] = row[i], row[pos]
    rank = len(nonzero)
    for i in range(rank):
        if sd[i][i] < 0:
            sd[i] = [-a for a in sd[i]]
            ud[i] = [-a for a in ud[i]]

    # divisor chain: replace (d_i, d_j) by (gcd, lcm) via a local 2x2 step
    for i in range(rank - 1):
        for j in range(i + 1, rank):
            if sd[j][j] % sd[i][i] != 0:
                add_col(i, j, -1)  # col i += col j, puts d_j at (j, i)
                # Euclid between rows i and j inside column i
                while sd[j][i] != 0:
                    add_row(i, j, sd[i][i] // sd[j][i])
                    swap_rows(i, j)
                if sd[i][i] < 0:
                    sd[i] = [-a for a in sd[i]]
                    ud[i] = [-a for a in ud[i]]
                # every entry of the 2x2 block is a multiple of the new
                # pivot gcd, so one column op clears the fill-in exactly
                if sd[i][j] != 0:
                    add_col(j, i, sd[i][j] // sd[i][i])
                if sd[j][j] < 0:
                    sd[j] = [-a for a in sd[j]]
                    ud[j] = [-a for a in ud[j]]
    return (Mat(sd, rows=n, cols=c), Mat(ud, rows=n, cols=n),
            Mat(vd, rows=c, cols=c))


def invariant_factors(m: Mat) -> tuple[int, ...]:
    s, _, _ = snf(m)
    return tuple(s[i][i] for i in range(min(s.rows, s.cols)) if s[i][i] != 0)


# -- kernels, images, saturation ----------------------------------------------

def _clear_row_denominators(m: Mat) -> Mat:
    """Scale each row to integers; kernels are unchanged."""
    rows = []
    for row in m.data:
        den = 1
        for x in row:
            if isinstance(x, Fraction):
                den = den * x.denominator // gcd(den, x.denominator)
        rows.append([int(x * den) for x in row])
    return Mat(rows, rows=m.rows, cols=m.cols)


def _canonical_basis(vectors: Sequence[IntVec], ambient: int) -> tuple[IntVec, ...]:
    """Canonical (row-HNF) basis of the lattice the vectors span.

    The vectors must already be a basis; HNF only changes its
    presentation, so saturation is preserved.  Coordinate sublattices
    come out as unit vectors, which keeps downstream basis completions
    in block form.
    """
    if not vectors:
        return ()
    h, _ = hnf(Mat(list(vectors), rows=len(vectors), cols=ambient))
    return tuple(tuple(int(x) for x in row) for row in h.data
                 if any(x != 0 for x in row))


def kernel_saturated(m: Mat) -> Lattice:
    """Saturated basis of {v in Z^cols : m v = 0}.

    Equals the full rational kernel intersected with Z^cols.  Computed
    from the Smith form: if U m V = S, the columns of V at zero
    invariant factors form a basis, and a coordinate sublattice pushed
    through a unimodular matrix is automatically saturated.
    """
    mi = m if m.is_integral() else _clear_row_denominators(m)
    if mi.rows == 0:
        return Lattice(mi.cols, tuple(tuple(int(i == j) for i in range(mi.cols))
                                      for j in range(mi.cols)))
    s, _, v = snf(mi)
    zero_cols = [j for j in range(mi.cols)
                 if j >= min(s.rows, s.cols) or s[j][j] == 0]
    basis = tuple(tuple(int(x) for x in v.col(j)) for j in zero_cols)
    return Lattice(mi.cols, _canonical_basis(basis, mi.cols))


def left_kernel_saturated(m: Mat) -> Lattice:
    return kernel_saturated(m.transpose())


def image_saturated(m: Mat) -> Lattice:
    """Saturation of the lattice spanned by the columns of m."""
    if not m.is_integral():
        raise LinalgError("image_saturated requires an integer matrix")
    s, u, _ = snf(m)
    r = len([i for i in range(min(s.rows, s.cols)) if s[i][i] != 0])
    uinv = u.inverse()
    basis = tuple(tuple(int(x) for x in uinv.col(j)) for j in range(r))
    return Lattice(m.rows, _canonical_basis(basis, m.rows))


def saturate(vectors: Sequence[IntVec], ambient: int) -> Lattice:
    return image_saturated(Mat.from_cols(vectors, rows=ambient))


def is_saturated(vectors: Sequence[IntVec], ambient: int) -> bool:
    if not vectors:
        return True
    b = Mat.from_cols(vectors, rows=ambient)
    if b.rank() != len(vectors):
        return False
    return all(d == 1 for d in invariant_factors(b))


# -- solving -----------------------------------------------------------------

def solve_rational(m: Mat, b: Vec) -> tuple[Vec, list[Vec]] | None:
    """Exact solution of m x = b over Q.

    Returns (x0, nullspace_basis) when the system is consistent, where
    m @ x0 == b exactly and the nullspace vectors span ker m over Q.
    Returns None when inconsistent.
    """
    if m.rows != len(b):
        raise LinalgError("rhs length mismatch")
    n, c = m.rows, m.cols
    a = [[Fraction(x) for x in row] + [Fraction(bi)]
         for row, bi in zip(m.data, b)]
    if n == 0:
        a = []
    pivots: list[int] = []
    rank = 0
    for col in range(c):
        piv = next((r for r in range(rank, n) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = 1 / a[rank][col]
        a[rank] = [x * inv for x in a[rank]]
        for r in range(n):
            if r != rank and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        pivots.append(col)
        rank += 1
    for r in range(rank, n):
        if a[r][c] != 0:
            return None
    x0 = [Fraction(0)] * c
    for i, col in enumerate(pivots):
        x0[col] = a[i][c]
    free = [j for j in range(c) if j not in pivots]
    null = []
    for j in free:
        vec = [Fraction(0)] * c
        vec[j] = Fraction(1)
        for i, col in enumerate(pivots):
            vec[col] = -a[i][j]
        null.append(tuple(_norm(x) for x in vec))
    return tuple(_norm(x) for x in x0), null


def solve_diophantine(m: Mat, b: IntVec) -> IntVec | None:
    """Integer solution of m x = b via the Smith normal form, or None."""
    if not m.is_integral() or not all(isinstance(x, int) for x in b):
        raise LinalgError("solve_diophantine requires integer data")
    s, u, v = snf(m)
    ub = mat_apply(u, b)
    y = [0] * m.cols
    for i in range(m.rows):
        d = s[i][i] if i < min(m.rows, m.cols) else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d != 0:
                return None
            y[i] = ub[i] // d
    return tuple(int(x) for x in mat_apply(v, tuple(y)))


# -- basis completion ----------------------------------------------------------

def complete_to_unimodular(lattice: Lattice) -> Mat:
    """A matrix Q in GL(ambient, Z) whose last `rank` columns are the
    given saturated basis.

    Raises NotSaturatedError when the basis is not primitive.  When the
    basis consists of standard unit vectors the complement is the
    remaining unit vectors in ascending order, so block-form inputs stay
    in block form.
    """
    q, r = lattice.ambient, lattice.rank
    if r == 0:
        return Mat.identity(q)
    b = lattice.basis_matrix()
    if not is_saturated(lattice.basis, q):
        raise NotSaturatedError(f"basis of rank {r} in Z^{q} is not saturated")
    # fast path: standard unit vectors
    units = set()
    for vec in lattice.basis:
        nz = [i for i, x in enumerate(vec) if x != 0]
        if len(nz) == 1 and vec[nz[0]] == 1:
            units.add(nz[0])
        else:
            units = None
            break
    if units is not None and len(units) == r:
        comp = [tuple(int(i == j) for i in range(q))
                for j in range(q) if j not in units]
        qmat = hstack(Mat.from_cols(comp, rows=q), b)
    else:
        s, u, _ = snf(b)
        uinv = u.inverse()
        comp = [tuple(int(x) for x in uinv.col(j)) for j in range(r, q)]
        qmat = hstack(Mat.from_cols(comp, rows=q), b)
    d = qmat.det()
    if abs(d) != 1:
        raise NotSaturatedError("completion failed to be unimodular")
    if d == -1 and q > r:
        flipped = [tuple(-x for x in comp[0])] + list(comp[1:])
        qmat = hstack(Mat.from_cols(flipped, rows=q), b)
    return qmat
