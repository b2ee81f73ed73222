import random
from fractions import Fraction

from klab.actions import DSLambdaMetric
from klab.control import ControlSpace
from klab.fixtures import dihedral_action, z2_swap_action
from klab.groups import FamilyPredicate, FiniteTableGroup
from klab.p2 import (lipschitz_transfer_audit, omega_audit, p2_action,
                     p2_metric, p2_point_map, p2_stabilizer_check,
                     unordered_pair)


def test_unordered_pair_canonical():
    assert unordered_pair("x", "y") == unordered_pair("y", "x")


def test_p2_metric_formula():
    # d(x,x')=1, d(y,y')=2, d(x,y')=5, d(y,x')=5 -> min matching is 3
    pts = ["x", "y", "x2", "y2"]
    rows = [[0, 3, 1, 5],
            [3, 0, 4, 2],
            [1, 4, 0, 4],
            [5, 2, 4, 0]]
    space = ControlSpace.from_matrix(pts, rows)
    pair = p2_metric(space)
    assert pair.d(unordered_pair("x", "y"), unordered_pair("x2", "y2")) == 3
    assert pair.d(unordered_pair("x", "y"), unordered_pair("x", "y")) == 0


def test_p2_metric_axioms_random():
    rng = random.Random(31)
    pts = [f"x{i}" for i in range(6)]
    raw = {}
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            if i < j:
                raw[(a, b)] = raw[(b, a)] = Fraction(rng.randint(1, 6))
    for k in pts:
        for a in pts:
            for b in pts:
                if a != b and a != k and b != k:
                    v = raw[(a, k)] + raw[(k, b)]
                    if v < raw[(a, b)]:
                        raw[(a, b)] = raw[(b, a)] = v
    dist = {(a, b): (Fraction(0) if a == b else raw[(a, b)])
            for a in pts for b in pts}
    space = ControlSpace(pts, dist)
    p2_metric(space).validate()  # exhaustive triangle check on all pair triples


def test_projection_one_lipschitz():
    act = z2_swap_action()
    space = act.space
    pair = p2_metric(space)
    for x0 in space.points:
        for y0 in space.points:
            for x1 in space.points:
                for y1 in space.points:
                    lhs = pair.d(unordered_pair(x0, y0), unordered_pair(x1, y1))
                    assert lhs <= space.d(x0, x1) + space.d(y0, y1)


def test_p2_functoriality():
    act = z2_swap_action()
    pair = p2_metric(act.space)
    index = {p: i for i, p in enumerate(pair.points)}
    swap = act.phi[1]
    ident = act.phi[0]
    # P2(swap o swap) = P2(swap) o P2(swap) on points
    lhs = p2_point_map(act.space, pair, act.compose_maps(swap, swap))
    p2_swap = p2_point_map(act.space, pair, swap)
    rhs = tuple(p2_swap[index[p2_swap[i]]] for i in range(len(pair.points)))
    assert lhs == rhs
    assert p2_point_map(act.space, pair, ident) == tuple(pair.points)


def test_p2_action_descends():
    act = z2_swap_action()
    induced = p2_action(act)
    induced.validate()
    # diagonal pairs map to diagonal pairs
    for g in induced.S:
        for x in act.space.points:
            diag = unordered_pair(x, x)
            image = induced.apply(induced.phi[g], diag)
            assert image[0] == image[1]


def test_p2_action_nongenuine_homotopies_descend():
    from klab.control import ControlSpace
    z2 = FiniteTableGroup.cyclic(2)
    line = ControlSpace.path(5)
    pts = tuple(line.points)
    flip = tuple(f"p{4 - i}" for i in range(5))
    double = tuple(f"p{min(2 * i, 4)}" for i in range(5))
    from klab.actions import HomotopySAction
    from klab.groups import FiniteSubset
    act = HomotopySAction(z2, line, FiniteSubset.of(z2, [0, 1]),
                          {0: pts, 1: flip},
                          {(0, 0): (pts,),
                           (0, 1): (flip, double, flip),
                           (1, 0): (flip,),
                           (1, 1): (pts,)})
    induced = p2_action(act)  # validates grid endpoints on the quotient
    assert len(induced.H[(0, 1)]) == 3


def test_stabilizer_trivial_action():
    triv = FiniteTableGroup.cyclic(3)
    action = {g: {"a": "a", "b": "b"} for g in triv.elements()}
    rep = p2_stabilizer_check(triv, action, ("a", "b"))
    assert rep.index == 1
    assert sorted(rep.stabilizer) == triv.elements()


def test_stabilizer_z2_swap():
    z2 = FiniteTableGroup.cyclic(2)
    action = {0: {"p": "p", "q": "q"}, 1: {"p": "q", "q": "p"}}
    fam = FamilyPredicate("trivial")
    rep = p2_stabilizer_check(z2, action, ("p", "q"), fam)
    assert rep.index == 2
    assert rep.intersection == [0]
    assert rep.in_family2 is True


def test_stabilizer_dihedral_diagonal():
    act = dihedral_action(4)
    dn = act.backend
    # build the full genuine action table for all elements
    full = {}
    for g in dn.elements():
        rot, ref = g // 2, g % 2
        full[g] = {f"x{t}": f"x{(rot + t) % 4 if ref == 0 else (rot - t) % 4}"
                   for t in range(4)}
    rep = p2_stabilizer_check(dn, full, ("x0", "x2"), FamilyPredicate("finite"))
    assert rep.index in (1, 2)
    assert rep.in_family2 is not False
    # the diagonal pair of the square is preserved by rotation by 2 and by
    # the reflections fixing it; index of the intersection is 2
    assert rep.index == 2


def test_stabilizer_index_always_one_or_two():
    rng = random.Random(5)
    for n in (3, 4, 6):
        act = dihedral_action(n)
        dn = act.backend
        full = {}
        for g in dn.elements():
            rot, ref = g // 2, g % 2
            full[g] = {f"x{t}": f"x{(rot + t) % n if ref == 0 else (rot - t) % n}"
                       for t in range(n)}
        pts = [f"x{t}" for t in range(n)]
        for x in pts:
            for y in pts:
                rep = p2_stabilizer_check(dn, full, (x, y))
                assert rep.index in (1, 2)


def test_lipschitz_transfer_audit():
    x = ControlSpace.path(3)
    y = ControlSpace.path(3)
    ident = {p: p for p in x.points}
    rep = lipschitz_transfer_audit(x, y, ident, Fraction(1), Fraction(2))
    assert rep.ok() and rep.checked > 0


def test_omega_audit_z2():
    act = z2_swap_action()
    pair_space = p2_metric(act.space)
    samples = []
    for g in [0, 1]:
        for a in pair_space.points:
            for h in [0, 1]:
                for b in pair_space.points:
                    samples.append(((g, a), (h, b)))
    rep = omega_audit(act, Fraction(1, 2), samples, n_max=4)
    assert rep.ok()
    assert rep.checked == len(samples)


def test_omega_audit_diagonal_factor_two():
    act = z2_swap_action()
    metric_x = DSLambdaMetric(act, Fraction(1, 2), 4)
    induced = p2_action(act)
    metric_p = DSLambdaMetric(induced, Fraction(1, 2), 4)
    # diagonal pairs: both sides reduce to doubled chain costs
    z = (0, unordered_pair("p", "p"))
    z2_ = (1, unordered_pair("q", "q"))
    rhs = metric_p.distance(z, z2_)
    leg = metric_x.distance((0, "p"), (1, "q"))
    assert rhs.value is not None and leg.value is not None
    assert 2 * leg.value <= 2 * rhs.value
