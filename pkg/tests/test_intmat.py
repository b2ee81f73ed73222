import random
from fractions import Fraction

import pytest

from klab.fixtures import rand_matrix
from klab.intmat import (IntMatrix, column_lattice_basis, idempotent_splitting,
                         lattice_member, sign, symmetric_diagonalize)


def random_unimodular(rng, n, steps=12):
    m = IntMatrix.identity(n)
    for _ in range(steps):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        e = IntMatrix.identity(n)
        e.entries[(i, j)] = rng.randint(-2, 2)
        m = m @ e
    return m


def test_sign_exact_for_negative_exponents():
    assert sign(-1) == -1 and sign(-2) == 1 and sign(0) == 1 and sign(3) == -1
    assert all(isinstance(sign(n), int) for n in range(-5, 5))


def test_det_matches_cofactor_oracle():
    rng = random.Random(201)

    def cofactor_det(m):
        n = m.rows
        if n == 0:
            return 1
        if n == 1:
            return m.get(0, 0)
        total = 0
        for j in range(n):
            v = m.get(0, j)
            if v == 0:
                continue
            minor = IntMatrix(n - 1, n - 1)
            for (a, b), w in m.entries.items():
                if a == 0 or b == j:
                    continue
                minor.entries[(a - 1, b - 1 if b > j else b)] = w
            total += sign(j) * v * cofactor_det(minor)
        return total

    for _ in range(40):
        n = rng.randint(0, 4)
        m = rand_matrix(rng, n, n, 0.7, -3, 3)
        assert m.det() == cofactor_det(m)


def test_det_multiplicative():
    rng = random.Random(202)
    for _ in range(30):
        n = rng.randint(1, 4)
        a = rand_matrix(rng, n, n, 0.7, -2, 2)
        b = rand_matrix(rng, n, n, 0.7, -2, 2)
        assert (a @ b).det() == a.det() * b.det()


def test_rank_and_inverse():
    rng = random.Random(203)
    for _ in range(30):
        n = rng.randint(1, 4)
        u = random_unimodular(rng, n)
        assert abs(u.det()) == 1
        assert u.rank() == n
        inv = u.integer_inverse()
        assert inv is not None and u @ inv == IntMatrix.identity(n)
    singular = IntMatrix.from_rows([[1, 2], [2, 4]])
    assert singular.rank() == 1
    assert singular.integer_inverse() is None
    two = IntMatrix.from_rows([[2]])
    assert two.integer_inverse() is None  # invertible over Q only


def test_symmetric_diagonalize_sylvester_invariance():
    rng = random.Random(204)
    for _ in range(25):
        n = rng.randint(1, 4)
        g = rand_matrix(rng, n, n, 0.8, -2, 2)
        gram = g + g.transpose()
        diag = symmetric_diagonalize(gram)
        pos = sum(1 for v in diag if v > 0)
        neg = sum(1 for v in diag if v < 0)
        # congruence by a random base change preserves the counts
        b = random_unimodular(rng, n)
        diag2 = symmetric_diagonalize(b.transpose() @ gram @ b)
        assert (pos, neg) == (sum(1 for v in diag2 if v > 0),
                              sum(1 for v in diag2 if v < 0))


def test_lattice_member():
    assert lattice_member([[2, 0], [0, 3]], [4, -3])
    assert not lattice_member([[2, 0], [0, 3]], [1, 0])
    assert lattice_member([[2, 4]], [-6, -12])
    assert not lattice_member([[2, 4]], [2, 2])
    assert lattice_member([], [0, 0])
    assert not lattice_member([], [1, 0])
    # a non-diagonal lattice: span{(1,1),(0,2)} contains (3,1) but not (0,1)
    assert lattice_member([[1, 1], [0, 2]], [3, 1])
    assert not lattice_member([[1, 1], [0, 2]], [0, 1])


def test_idempotent_splitting_randomized():
    rng = random.Random(205)
    for _ in range(30):
        n = rng.randint(1, 5)
        r = rng.randint(0, n)
        e = IntMatrix.zeros(n, n)
        for i in range(r):
            e.entries[(i, i)] = 1
        u = random_unimodular(rng, n)
        p = u @ e @ u.integer_inverse()
        assert (p @ p) == p
        basis, retraction = idempotent_splitting(p)
        assert retraction @ basis == IntMatrix.identity(basis.cols)
        assert basis @ retraction == p
        assert basis.cols == r
    with pytest.raises(ValueError):
        idempotent_splitting(IntMatrix.from_rows([[2]]))


def test_column_lattice_basis_spans():
    rng = random.Random(206)
    for _ in range(25):
        m = rand_matrix(rng, 3, rng.randint(1, 4), 0.7, -2, 2)
        basis = column_lattice_basis(m)
        cols = [[m.get(i, j) for i in range(3)] for j in range(m.cols)]
        basis_cols = [[basis.get(i, j) for i in range(3)] for j in range(basis.cols)]
        # both lattices contain each other
        for c in cols:
            assert lattice_member(basis_cols, c)
        for c in basis_cols:
            assert lattice_member(cols, c)


def test_kron_and_blocks():
    a = IntMatrix.from_rows([[1, 2], [0, 1]])
    b = IntMatrix.from_rows([[3]])
    assert a.kron(b) == IntMatrix.from_rows([[3, 6], [0, 3]])
    blocks = IntMatrix.from_blocks([[a, None], [None, b]], [2, 1], [2, 1])
    assert blocks.get(2, 2) == 3 and blocks.get(0, 1) == 2
