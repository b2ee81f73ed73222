"""Matrices over group rings, stored letterwise, with a division-free
determinant for commutative backends.

A matrix over ``Z[G]`` is a dict ``g -> IntMatrix`` of a fixed shape;
multiplication is convolution over the group.  The determinant (the K_1
reduction for commutative group rings) uses the Berkowitz algorithm,
which needs no division and so works over any commutative ring.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .errors import InputError, NotAnEquivalence
from .groups import GroupBackend
from .intmat import IntMatrix

GRElem = Dict[object, int]  # group element -> integer coefficient


def gr_add(a: GRElem, b: GRElem) -> GRElem:
    out = dict(a)
    for g, c in b.items():
        s = out.get(g, 0) + c
        if s:
            out[g] = s
        else:
            out.pop(g, None)
    return out


def gr_neg(a: GRElem) -> GRElem:
    return {g: -c for g, c in a.items()}


def gr_mul(backend: GroupBackend, a: GRElem, b: GRElem) -> GRElem:
    out: GRElem = {}
    for g, c in a.items():
        for h, d in b.items():
            k = backend.mul(g, h)
            s = out.get(k, 0) + c * d
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def gr_involution(backend: GroupBackend, a: GRElem) -> GRElem:
    """Standard involution ``sum c_g g -> sum c_g g^{-1}``."""
    return {backend.inv(g): c for g, c in a.items()}


class GRMatrix:
    """Letterwise matrix over the group ring of a backend."""

    def __init__(self, backend: GroupBackend, rows: int, cols: int,
                 letters: Optional[Dict[object, IntMatrix]] = None):
        self.backend = backend
        self.rows = rows
        self.cols = cols
        self.letters: Dict[object, IntMatrix] = {}
        if letters:
            for g, m in letters.items():
                cg = backend.canonical(g)
                if (m.rows, m.cols) != (rows, cols):
                    raise InputError("letter block shape mismatch")
                if not m.is_zero():
                    self.letters[cg] = m

    @staticmethod
    def zeros(backend: GroupBackend, rows: int, cols: int) -> "GRMatrix":
        return GRMatrix(backend, rows, cols)

    @staticmethod
    def identity(backend: GroupBackend, n: int) -> "GRMatrix":
        return GRMatrix(backend, n, n, {backend.identity(): IntMatrix.identity(n)})

    @staticmethod
    def constant(backend: GroupBackend, m: IntMatrix) -> "GRMatrix":
        return GRMatrix(backend, m.rows, m.cols, {backend.identity(): m})

    def is_zero(self) -> bool:
        return not self.letters

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, GRMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.letters == other.letters)

    def __add__(self, other: "GRMatrix") -> "GRMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InputError("shape mismatch")
        out = dict(self.letters)
        for g, m in other.letters.items():
            s = out.get(g)
            out[g] = m if s is None else s + m
        return GRMatrix(self.backend, self.rows, self.cols, out)

    def __neg__(self) -> "GRMatrix":
        return GRMatrix(self.backend, self.rows, self.cols,
                        {g: -m for g, m in self.letters.items()})

    def __sub__(self, other: "GRMatrix") -> "GRMatrix":
        return self + (-other)

    def __matmul__(self, other: "GRMatrix") -> "GRMatrix":
        if self.cols != other.rows:
            raise InputError("shape mismatch in mul")
        acc: Dict[object, IntMatrix] = {}
        for g, m in self.letters.items():
            for h, w in other.letters.items():
                k = self.backend.mul(g, h)
                prod = m @ w
                s = acc.get(k)
                acc[k] = prod if s is None else s + prod
        return GRMatrix(self.backend, self.rows, other.cols, acc)

    def scale(self, c: int) -> "GRMatrix":
        return GRMatrix(self.backend, self.rows, self.cols,
                        {g: m.scale(c) for g, m in self.letters.items()})

    def star(self) -> "GRMatrix":
        """Involution transpose: ``(A^*)_g = (A_{g^{-1}})^T``."""
        return GRMatrix(self.backend, self.cols, self.rows,
                        {self.backend.inv(g): m.transpose()
                         for g, m in self.letters.items()})

    def entry(self, i: int, j: int) -> GRElem:
        out: GRElem = {}
        for g, m in self.letters.items():
            v = m.get(i, j)
            if v:
                out[g] = v
        return out

    def det(self) -> GRElem:
        """Berkowitz determinant; requires a commutative group ring."""
        if self.rows != self.cols:
            raise InputError("det of non-square matrix")
        return _berkowitz_det(self.backend, [[self.entry(i, j) for j in range(self.cols)]
                                             for i in range(self.rows)])

    @staticmethod
    def from_blocks(backend: GroupBackend, grid: List[List[Optional["GRMatrix"]]],
                    row_sizes: List[int], col_sizes: List[int]) -> "GRMatrix":
        letter_set = set()
        for row in grid:
            for blk in row:
                if blk is not None:
                    letter_set |= set(blk.letters)
        out_letters: Dict[object, IntMatrix] = {}
        for g in letter_set:
            out_letters[g] = IntMatrix.from_blocks(
                [[blk.letters.get(g) if blk is not None else None for blk in row]
                 for row in grid], row_sizes, col_sizes)
        return GRMatrix(backend, sum(row_sizes), sum(col_sizes), out_letters)


def _berkowitz_det(backend: GroupBackend, a: List[List[GRElem]]) -> GRElem:
    n = len(a)
    one: GRElem = {backend.identity(): 1}
    if n == 0:
        return one
    coeffs: List[GRElem] = [one]
    for r in range(1, n + 1):
        diag = a[r - 1][r - 1]
        row = [a[r - 1][j] for j in range(r - 1)]
        col = [a[i][r - 1] for i in range(r - 1)]
        sub = [[a[i][j] for j in range(r - 1)] for i in range(r - 1)]
        t: List[GRElem] = [one, gr_neg(diag)]
        vec = col
        for _ in range(r - 1):
            dot: GRElem = {}
            for x, y in zip(row, vec):
                dot = gr_add(dot, gr_mul(backend, x, y))
            t.append(gr_neg(dot))
            vec = [_dot_row(backend, sub[i], vec) for i in range(r - 1)]
        new: List[GRElem] = [{} for _ in range(r + 1)]
        for i in range(r + 1):
            for j in range(min(i + 1, r)):
                new[i] = gr_add(new[i], gr_mul(backend, t[i - j], coeffs[j]))
        coeffs = new
    det = coeffs[n]
    if n % 2:
        det = gr_neg(det)
    return det


def _dot_row(backend: GroupBackend, row: List[GRElem], vec: List[GRElem]) -> GRElem:
    out: GRElem = {}
    for x, y in zip(row, vec):
        out = gr_add(out, gr_mul(backend, x, y))
    return out


# -- graded complexes over the group ring (for torsion of projections) -----


@dataclass
class GRComplex:
    """Finite complex of free ``Z[G]``-modules; diff[n]: rank n -> n-1."""

    backend: GroupBackend
    ranks: Dict[int, int]
    diff: Dict[int, GRMatrix]

    def rank(self, n: int) -> int:
        return self.ranks.get(n, 0)

    def d(self, n: int) -> GRMatrix:
        m = self.diff.get(n)
        if m is None:
            return GRMatrix.zeros(self.backend, self.rank(n - 1), self.rank(n))
        return m

    def validate(self) -> None:
        for n in self.ranks:
            if not (self.d(n) @ self.d(n + 1)).is_zero():
                raise InputError(f"d o d != 0 at degree {n + 1}")


@dataclass
class GRGradedMap:
    """Degree-``k`` graded map between GR complexes."""

    source: GRComplex
    target: GRComplex
    degree: int
    mats: Dict[int, GRMatrix]

    def mat(self, n: int) -> GRMatrix:
        m = self.mats.get(n)
        if m is None:
            return GRMatrix.zeros(self.source.backend,
                                  self.target.rank(n + self.degree), self.source.rank(n))
        return m

    def compose(self, other: "GRGradedMap") -> "GRGradedMap":
        k = other.degree
        degs = set(other.mats) | {n - k for n in self.mats}
        return GRGradedMap(other.source, self.target, self.degree + other.degree,
                           {n: self.mat(n + k) @ other.mat(n) for n in degs})

    def __add__(self, other: "GRGradedMap") -> "GRGradedMap":
        degs = set(self.mats) | set(other.mats)
        return GRGradedMap(self.source, self.target, self.degree,
                           {n: self.mat(n) + other.mat(n) for n in degs})

    def __neg__(self) -> "GRGradedMap":
        return GRGradedMap(self.source, self.target, self.degree,
                           {n: -m for n, m in self.mats.items()})

    def __sub__(self, other: "GRGradedMap") -> "GRGradedMap":
        return self + (-other)

    @staticmethod
    def identity(c: GRComplex) -> "GRGradedMap":
        return GRGradedMap(c, c, 0, {n: GRMatrix.identity(c.backend, c.rank(n))
                                     for n in c.ranks})

    def is_chain_map(self) -> bool:
        k = self.degree
        degs = set(self.source.ranks) | {n - k for n in self.target.ranks}
        for n in degs:
            lhs = self.target.d(n + k) @ self.mat(n)
            rhs = (self.mat(n - 1) @ self.source.d(n)).scale(-1 if k % 2 else 1)
            if lhs != rhs:
                return False
        return True

    def homotopy_holds(self, h_mats: Dict[int, GRMatrix], target_map: "GRGradedMap") -> bool:
        """``d h + h d = target - self`` for degree-0 maps."""
        C, D = self.source, self.target
        backend = C.backend

        def hmat(n: int) -> GRMatrix:
            m = h_mats.get(n)
            if m is None:
                return GRMatrix.zeros(backend, D.rank(n + 1), C.rank(n))
            return m

        degs = set(C.ranks) | set(D.ranks) | set(h_mats)
        for n in degs:
            lhs = D.d(n + 1) @ hmat(n) + hmat(n - 1) @ C.d(n)
            if lhs != target_map.mat(n) - self.mat(n):
                return False
        return True


def gr_self_torsion(f: GRGradedMap, g: GRGradedMap, h: Dict[int, GRMatrix],
                    k: Dict[int, GRMatrix]) -> GRMatrix:
    """``(d + Gamma)_odd`` on the cone of ``f``, over the group ring.

    Same contraction as the integral case: with ``theta = f h - k f``,
    ``Gamma = [[-h + g theta, g], [k theta, k]]``.
    """
    C, D = f.source, f.target
    backend = C.backend
    if not f.is_chain_map() or not g.is_chain_map():
        raise NotAnEquivalence("torsion inputs must be chain maps")
    if not g.compose(f).homotopy_holds(h, GRGradedMap.identity(C)):
        raise NotAnEquivalence("h must witness g o f ~ id")
    if not f.compose(g).homotopy_holds(k, GRGradedMap.identity(D)):
        raise NotAnEquivalence("k must witness f o g ~ id")
    hm = GRGradedMap(C, C, 1, dict(h))
    km = GRGradedMap(D, D, 1, dict(k))
    theta = f.compose(hm) - km.compose(f)
    top_left = g.compose(theta) - hm
    bottom_left = km.compose(theta)
    degs = set()
    for n in C.ranks:
        degs.add(n + 1)
    degs.update(D.ranks)
    cone_ranks = {n: C.rank(n - 1) + D.rank(n) for n in degs}
    cone_d: Dict[int, GRMatrix] = {}
    gamma: Dict[int, GRMatrix] = {}
    for n in degs:
        cone_d[n] = GRMatrix.from_blocks(
            backend,
            [[-C.d(n - 1), None], [f.mat(n - 1), D.d(n)]],
            [C.rank(n - 2), D.rank(n - 1)], [C.rank(n - 1), D.rank(n)])
        gamma[n] = GRMatrix.from_blocks(
            backend,
            [[top_left.mat(n - 1), g.mat(n)],
             [bottom_left.mat(n - 1), km.mat(n)]],
            [C.rank(n), D.rank(n + 1)], [C.rank(n - 1), D.rank(n)])
    odd = sorted(n for n in degs if n % 2)
    even = sorted(n for n in degs if not n % 2)
    blocks: Dict[Tuple[int, int], GRMatrix] = {}
    for n in degs:
        if n - 1 in cone_ranks:
            blocks[(n - 1, n)] = cone_d[n]
        if n + 1 in cone_ranks:
            blocks[(n + 1, n)] = gamma[n]
    grid = [[blocks.get((t, s)) for s in odd] for t in even]
    rep = GRMatrix.from_blocks(backend, grid,
                               [cone_ranks[t] for t in even],
                               [cone_ranks[s] for s in odd])
    if rep.rows != rep.cols:
        raise NotAnEquivalence("cone has unequal odd/even ranks")
    return rep
