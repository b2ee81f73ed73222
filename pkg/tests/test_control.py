import random
from fractions import Fraction

import pytest

from klab.control import (ControlSpace, ControlledMorphism, EquivariantMorphism,
                          GeometricModule, GPos, check_control, max_displacement,
                          pushforward)
from klab.errors import HorizonExceeded, InputError
from klab.fixtures import rand_matrix
from klab.groups import FiniteSubset, FiniteTableGroup, FreeGroup
from klab.intmat import IntMatrix


def three_point_space():
    return ControlSpace.from_matrix(["a", "b", "c"],
                                    [[0, 3, 4], [3, 0, 2], [4, 2, 0]])


def test_metric_validation():
    with pytest.raises(InputError):
        ControlSpace.from_matrix(["a", "b"], [[0, 1], [2, 0]])
    with pytest.raises(InputError):
        ControlSpace.from_matrix(["a", "b", "c"],
                                 [[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_identity_control():
    z2 = FiniteTableGroup.cyclic(2)
    space = three_point_space()
    module = GeometricModule((GPos(0, "a"), GPos(0, "b"), GPos(1, "c")))
    ident = ControlledMorphism.identity(module)
    assert check_control(ident, Fraction(0), FiniteSubset.of(z2, [0]), space, z2)


def test_block_displacement_bounds():
    z2 = FiniteTableGroup.cyclic(2)
    space = three_point_space()
    src = GeometricModule((GPos(0, "a"),))
    tgt = GeometricModule((GPos(1, "b"),))
    phi = ControlledMorphism(src, tgt, IntMatrix.from_rows([[1]]))
    assert max_displacement(phi, space) == 3
    assert not check_control(phi, Fraction(2), None, space)
    assert check_control(phi, Fraction(3), FiniteSubset.of(z2, [0, 1]), space, z2)
    assert not check_control(phi, Fraction(3), FiniteSubset.of(z2, [0]), space, z2)


def test_control_additive_under_composition():
    rng = random.Random(11)
    z4 = FiniteTableGroup.cyclic(4)
    space = three_point_space()
    pts = list(space.points)
    for _ in range(60):
        mids = GeometricModule(tuple(GPos(rng.randrange(4), rng.choice(pts))
                                     for _ in range(3)))
        srcs = GeometricModule(tuple(GPos(rng.randrange(4), rng.choice(pts))
                                     for _ in range(3)))
        tgts = GeometricModule(tuple(GPos(rng.randrange(4), rng.choice(pts))
                                     for _ in range(3)))
        f = ControlledMorphism(srcs, mids, rand_matrix(rng, 3, 3, 0.6))
        g = ControlledMorphism(mids, tgts, rand_matrix(rng, 3, 3, 0.6))
        eps_f = max_displacement(f, space)
        eps_g = max_displacement(g, space)
        letters_f = {z4.mul(z4.inv(t.g), s.g) for (t, s) in f.support()}
        letters_g = {z4.mul(z4.inv(t.g), s.g) for (t, s) in g.support()}
        comp = g.compose(f)
        prod = FiniteSubset.of(z4, [z4.mul(a, b) for a in letters_g
                                    for b in letters_f] or [0])
        assert check_control(comp, eps_f + eps_g, prod, space, z4)


def test_convolve_matches_expansion():
    rng = random.Random(12)
    z3 = FiniteTableGroup.cyclic(3)
    fiber = GeometricModule(("a", "b"))
    for _ in range(40):
        psi = EquivariantMorphism(z3, fiber, fiber,
                                  {g: rand_matrix(rng, 2, 2, 0.6) for g in range(3)})
        phi = EquivariantMorphism(z3, fiber, fiber,
                                  {g: rand_matrix(rng, 2, 2, 0.6) for g in range(3)})
        conv = phi.convolve(psi)
        ball = z3.elements()
        lhs = conv.expand(ball)
        rhs = phi.expand(ball).compose(psi.expand(ball))
        assert lhs.matrix == rhs.matrix


def test_single_letter_convolution():
    z4 = FiniteTableGroup.cyclic(4)
    fiber = GeometricModule(("a",))
    psi_a = EquivariantMorphism(z4, fiber, fiber, {1: IntMatrix.from_rows([[2]])})
    psi_b = EquivariantMorphism(z4, fiber, fiber, {2: IntMatrix.from_rows([[3]])})
    conv = psi_a.convolve(psi_b)
    assert conv.letter_support() == [3]
    assert conv.block(3) == IntMatrix.from_rows([[6]])


def test_convolution_identity_and_horizon():
    f = FreeGroup(1)
    fiber = GeometricModule(("a",))
    ident = EquivariantMorphism.identity(f, fiber)
    psi = EquivariantMorphism(f, fiber, fiber, {"a": IntMatrix.from_rows([[1]])})
    assert psi.convolve(ident).letters == psi.letters
    with pytest.raises(HorizonExceeded):
        psi.convolve(psi, allowed=FiniteSubset.of(f, ["", "a"]))


def test_pushforward_functorial_and_direct_sum():
    space = three_point_space()
    src = GeometricModule(("a", "b"))
    tgt = GeometricModule(("a", "c"))
    phi = ControlledMorphism(src, tgt, IntMatrix.from_rows([[1, 2], [0, 1]]))
    collapse = {"a": "z", "b": "z", "c": "w"}
    pushed = pushforward(phi, collapse)
    assert pushed.source.positions == ("z", "z")
    assert pushed.target.rank_at("z") == 1
    ident = {"a": "a", "b": "b", "c": "c"}
    assert pushforward(phi, ident).matrix == phi.matrix
    then = {"z": "top", "w": "top"}
    assert pushforward(pushed, then).target.positions == \
        pushforward(phi, {k: "top" for k in collapse}).target.positions


def test_dual_support_transpose():
    src = GeometricModule((GPos(0, "a"), GPos(0, "b")))
    tgt = GeometricModule((GPos(1, "c"),))
    phi = ControlledMorphism(src, tgt, IntMatrix.from_rows([[5, 0]]))
    dual = phi.dual()
    assert dual.support() == {(s, t) for (t, s) in phi.support()}


def test_equivariant_dual_letters():
    z4 = FiniteTableGroup.cyclic(4)
    fiber = GeometricModule(("a", "b"))
    psi = EquivariantMorphism(z4, fiber, fiber,
                              {1: IntMatrix.from_rows([[1, 2], [0, 0]])})
    dual = psi.dual()
    assert dual.letter_support() == [3]
    assert dual.block(3) == IntMatrix.from_rows([[1, 0], [2, 0]])


def test_equivariant_dual_matches_expanded_dual():
    # letterwise (f^-*)_a = (f_{a^-1})^-* against the explicit-position dual
    rng = random.Random(13)
    z3 = FiniteTableGroup.cyclic(3)
    fiber = GeometricModule(("a", "b"))
    for _ in range(25):
        psi = EquivariantMorphism(z3, fiber, fiber,
                                  {g: rand_matrix(rng, 2, 2, 0.6) for g in range(3)})
        ball = z3.elements()
        lhs = psi.dual().expand(ball)
        rhs = psi.expand(ball).dual()
        assert lhs.matrix == rhs.matrix
        assert lhs.support() == rhs.support()
