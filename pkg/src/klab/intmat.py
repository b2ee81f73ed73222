"""Exact sparse matrices over the integers and the rationals.

Matrices are maps ``(row, col) -> value`` storing nonzero entries only;
positions in the control module make blocks naturally sparse.  Values are
``int`` unless an operation needs rationals, in which case ``Fraction``
entries are allowed (rank, inverse, symmetric diagonalization).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

Entry = Tuple[int, int]


def sign(n: int) -> int:
    """``(-1)^n`` as an exact integer for any integer ``n``."""
    return -1 if n % 2 else 1


class IntMatrix:
    """Sparse exact matrix with explicit shape."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Entry, int]] = None):
        if rows < 0 or cols < 0:
            raise ValueError(f"bad shape ({rows},{cols})")
        self.rows = rows
        self.cols = cols
        self.entries: Dict[Entry, int] = {}
        if entries:
            for (i, j), v in entries.items():
                if v == 0:
                    continue
                if not (0 <= i < rows and 0 <= j < cols):
                    raise ValueError(f"entry ({i},{j}) outside {rows}x{cols}")
                self.entries[(i, j)] = v

    # -- constructors -------------------------------------------------

    @staticmethod
    def zeros(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix(rows, cols)

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        return IntMatrix(n, n, {(i, i): 1 for i in range(n)})

    @staticmethod
    def from_rows(rows: Iterable[Iterable[int]]) -> "IntMatrix":
        data = [list(r) for r in rows]
        nrows = len(data)
        ncols = len(data[0]) if data else 0
        m = IntMatrix(nrows, ncols)
        for i, row in enumerate(data):
            if len(row) != ncols:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                if v != 0:
                    m.entries[(i, j)] = v
        return m

    @staticmethod
    def from_blocks(grid: List[List[Optional["IntMatrix"]]],
                    row_sizes: List[int], col_sizes: List[int]) -> "IntMatrix":
        """Assemble a block matrix; ``None`` blocks are zero."""
        m = IntMatrix(sum(row_sizes), sum(col_sizes))
        roff = [0]
        for r in row_sizes:
            roff.append(roff[-1] + r)
        coff = [0]
        for c in col_sizes:
            coff.append(coff[-1] + c)
        for bi, row in enumerate(grid):
            for bj, block in enumerate(row):
                if block is None:
                    continue
                if block.rows != row_sizes[bi] or block.cols != col_sizes[bj]:
                    raise ValueError("block shape mismatch")
                for (i, j), v in block.entries.items():
                    m.entries[(roff[bi] + i, coff[bj] + j)] = v
        return m

    # -- basic algebra -------------------------------------------------

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, dict(self.entries))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, IntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):  # pragma: no cover - matrices used as values, not keys
        return hash((self.rows, self.cols, tuple(sorted(self.entries.items()))))

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in add")
        out = dict(self.entries)
        for k, v in other.entries.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return IntMatrix(self.rows, self.cols, out)

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def scale(self, c: int) -> "IntMatrix":
        if c == 0:
            return IntMatrix.zeros(self.rows, self.cols)
        return IntMatrix(self.rows, self.cols, {k: c * v for k, v in self.entries.items()})

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch in mul: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        by_row: Dict[int, List[Tuple[int, int]]] = {}
        for (i, j), v in other.entries.items():
            by_row.setdefault(i, []).append((j, v))
        acc: Dict[Entry, int] = {}
        for (i, k), v in self.entries.items():
            for (j, w) in by_row.get(k, ()):
                key = (i, j)
                s = acc.get(key, 0) + v * w
                if s:
                    acc[key] = s
                else:
                    acc.pop(key, None)
        return IntMatrix(self.rows, other.cols, acc)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def kron(self, other: "IntMatrix") -> "IntMatrix":
        """Kronecker product; index order is (self index, other index)."""
        out = IntMatrix(self.rows * other.rows, self.cols * other.cols)
        for (i, j), v in self.entries.items():
            for (k, l), w in other.entries.items():
                out.entries[(i * other.rows + k, j * other.cols + l)] = v * w
        return out

    def direct_sum(self, other: "IntMatrix") -> "IntMatrix":
        return IntMatrix.from_blocks([[self, None], [None, other]],
                                     [self.rows, other.rows], [self.cols, other.cols])

    def get(self, i: int, j: int) -> int:
        return self.entries.get((i, j), 0)

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and self == self.transpose()

    def support(self) -> List[Entry]:
        return sorted(self.entries)

    def to_dense(self) -> List[List[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"IntMatrix({self.rows}x{self.cols}, {sorted(self.entries.items())})"

    # -- exact linear algebra ------------------------------------------

    def rank(self) -> int:
        """Rank over the rationals by fraction-free Gaussian elimination."""
        dense = [[Fraction(v) for v in row] for row in self.to_dense()]
        r = 0
        for col in range(self.cols):
            pivot = None
            for i in range(r, self.rows):
                if dense[i][col] != 0:
                    pivot = i
                    break
            if pivot is None:
                continue
            dense[r], dense[pivot] = dense[pivot], dense[r]
            pv = dense[r][col]
            for i in range(r + 1, self.rows):
                if dense[i][col] != 0:
                    factor = dense[i][col] / pv
                    dense[i] = [a - factor * b for a, b in zip(dense[i], dense[r])]
            r += 1
            if r == self.rows:
                break
        return r

    def det(self) -> int:
        """Determinant by fraction-free Bareiss elimination."""
        if self.rows != self.cols:
            raise ValueError("det of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [[v for v in row] for row in self.to_dense()]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def inverse_rational(self) -> List[List[Fraction]]:
        """Inverse over Q by Gauss-Jordan; raises if singular."""
        if self.rows != self.cols:
            raise ValueError("inverse of non-square matrix")
        n = self.rows
        aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
               for i, row in enumerate(self.to_dense())]
        for col in range(n):
            pivot = next((i for i in range(col, n) if aug[i][col] != 0), None)
            if pivot is None:
                raise ValueError("singular matrix")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            pv = aug[col][col]
            aug[col] = [x / pv for x in aug[col]]
            for i in range(n):
                if i != col and aug[i][col] != 0:
                    f = aug[i][col]
                    aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
        return [row[n:] for row in aug]

    def integer_inverse(self) -> Optional["IntMatrix"]:
        """Inverse if it exists over Z (determinant a unit), else None."""
        if self.rows != self.cols:
            return None
        try:
            inv = self.inverse_rational()
        except ValueError:
            return None
        out = IntMatrix(self.rows, self.cols)
        for i, row in enumerate(inv):
            for j, v in enumerate(row):
                if v.denominator != 1:
                    return None
                if v.numerator:
                    out.entries[(i, j)] = v.numerator
        return out


def column_lattice_basis(m: IntMatrix) -> IntMatrix:
    """Basis of the lattice spanned by the columns, as basis columns.

    Hermite-style gcd elimination over the columns; for an idempotent
    matrix the column lattice is its image, a free direct summand.
    """
    cols = [[m.get(i, j) for i in range(m.rows)] for j in range(m.cols)]
    cols = [c for c in cols if any(c)]
    basis: List[List[int]] = []
    for row in range(m.rows):
        active = [c for c in cols if c[row] != 0]
        rest = [c for c in cols if c[row] == 0]
        if not active:
            cols = rest
            continue
        pivot = active[0]
        for other in active[1:]:
            while other[row] != 0:
                if abs(pivot[row]) > abs(other[row]):
                    pivot, other = other, pivot
                q = other[row] // pivot[row]
                other = [o - q * p for o, p in zip(other, pivot)]
            rest.append(other)
        basis.append(pivot)
        cols = rest
    out = IntMatrix.zeros(m.rows, len(basis))
    for j, col in enumerate(basis):
        for i, v in enumerate(col):
            if v:
                out.entries[(i, j)] = v
    return out


def idempotent_splitting(p: IntMatrix) -> Tuple[IntMatrix, IntMatrix]:
    """Basis ``B`` of ``im(p)`` and retraction ``R`` with ``R B = I`` and
    ``B R = p``.

    Valid over Z because an integer idempotent splits the free module
    into the images of ``p`` and ``1 - p``; the concatenated bases form
    a unimodular matrix.
    """
    if (p @ p) != p:
        raise ValueError("idempotent_splitting needs p^2 = p")
    b_im = column_lattice_basis(p)
    b_ker = column_lattice_basis(IntMatrix.identity(p.rows) - p)
    full = IntMatrix.from_blocks([[b_im, b_ker]], [p.rows],
                                 [b_im.cols, b_ker.cols])
    inv = full.integer_inverse()
    if inv is None:
        raise ValueError("idempotent does not split unimodularly")
    retraction = IntMatrix(b_im.cols, p.rows,
                           {(i, j): inv.get(i, j) for i in range(b_im.cols)
                            for j in range(p.rows) if inv.get(i, j)})
    return b_im, retraction


def lattice_member(gens: List[List[int]], target: List[int]) -> bool:
    """Membership of an integer vector in the lattice spanned by ``gens``.

    Column-by-column gcd elimination (Hermite-style): reduce the basis to
    echelon pivots, then divide the target through them exactly.
    """
    basis = [list(g) for g in gens if any(g)]
    vec = list(target)
    n = len(vec)
    if any(len(g) != n for g in basis):
        raise ValueError("generator length mismatch")
    pivots: List[List[int]] = []
    for col in range(n):
        active = [b for b in basis if b[col] != 0]
        rest = [b for b in basis if b[col] == 0]
        if not active:
            basis = rest
            continue
        # gcd-combine the active vectors into a single pivot at this column
        pivot = active[0]
        for other in active[1:]:
            while other[col] != 0:
                if abs(pivot[col]) > abs(other[col]):
                    pivot, other = other, pivot
                q = other[col] // pivot[col]
                other = [o - q * p for o, p in zip(other, pivot)]
            rest.append(other)
        pivots.append(pivot)
        basis = rest
    for pivot in pivots:
        col = next(i for i, v in enumerate(pivot) if v != 0)
        if vec[col] % pivot[col] != 0:
            return False
        q = vec[col] // pivot[col]
        vec = [v - q * p for v, p in zip(vec, pivot)]
    return not any(vec)


def symmetric_diagonalize(gram: IntMatrix) -> List[Fraction]:
    """Diagonal of a congruent diagonal form of a symmetric matrix over Q.

    Lagrange's algorithm: pivot on a nonzero diagonal entry; when the
    remaining diagonal vanishes but some off-diagonal entry survives, mix
    the two rows first (x -> x+y trick).  Returns the list of diagonal
    entries (zeros included for a degenerate form).
    """
    if not gram.is_symmetric():
        raise ValueError("symmetric_diagonalize needs a symmetric matrix")
    n = gram.rows
    a = [[Fraction(v) for v in row] for row in gram.to_dense()]
    diag: List[Fraction] = []
    idx = list(range(n))
    while idx:
        pivot = next((i for i in idx if a[i][i] != 0), None)
        if pivot is None:
            pair = next(((i, j) for i in idx for j in idx if i != j and a[i][j] != 0), None)
            if pair is None:
                diag.extend(Fraction(0) for _ in idx)
                break
            i, j = pair
            # row/col replacement x_i -> x_i + x_j makes the (i,i) entry 2*a[i][j]
            for k in range(n):
                a[i][k] = a[i][k] + a[j][k]
            for k in range(n):
                a[k][i] = a[k][i] + a[k][j]
            pivot = i
        pv = a[pivot][pivot]
        diag.append(pv)
        idx.remove(pivot)
        for i in idx:
            if a[i][pivot] != 0:
                f = a[i][pivot] / pv
                for k in range(n):
                    a[i][k] = a[i][k] - f * a[pivot][k]
                for k in range(n):
                    a[k][i] = a[k][i] - f * a[k][pivot]
    return diag
