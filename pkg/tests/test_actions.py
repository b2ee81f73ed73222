import itertools
import random
from fractions import Fraction

import pytest

from klab.actions import (CoverSpec, DSLambdaMetric, DominationData,
                          HomotopySAction, audit_nerve_contraction,
                          check_f_cover, lebesgue_lambda_search,
                          lebesgue_number, moduli, nerve_map,
                          validate_domination)
from klab.control import ControlSpace
from klab.errors import EmptyCover
from klab.fixtures import (dihedral_cover, path_point_domination,
                           z2_swap_action)
from klab.groups import FamilyPredicate, FiniteSubset, FiniteTableGroup


def trivial_action_on_path(n=4):
    triv = FiniteTableGroup.cyclic(1)
    line = ControlSpace.path(n)
    s = FiniteSubset.of(triv, [0])
    return HomotopySAction.from_genuine(triv, line, s,
                                        {0: {p: p for p in line.points}})


# -- F-sets and orbits --------------------------------------------------------


def test_f_set_genuine_action():
    act = z2_swap_action()
    fs = act.f_set(1)
    assert fs == [("q", "p")]  # left translation by the swap
    fe = act.f_set(0)
    assert ("p", "q") in fe  # identity map present


def test_f_set_contains_identity_for_e():
    act = z2_swap_action()
    assert act.identity_map() in act.f_set(0)


def test_s_orbit_depth_zero_and_one():
    act = z2_swap_action()
    assert act.s_orbit(0, (0, "p")) == {(0, "p")}
    # genuine case: {(g a^{-1}, a x)} over products of two letters
    orbit = act.s_orbit(1, (0, "p"))
    assert orbit == {(0, "p"), (1, "q")}


def test_s_orbit_genuine_closed_form():
    # for an honest action restricted to symmetric S, the depth-n set is
    # {(g a^{-1}, a x)} with a ranging over products of 2n letters of S
    z4 = FiniteTableGroup.cyclic(4)
    pts = [f"x{i}" for i in range(4)]
    dist = {(a, b): (Fraction(0) if a == b else Fraction(1))
            for a in pts for b in pts}
    space = ControlSpace(pts, dist)
    action = {k: {pts[i]: pts[(i + k) % 4] for i in range(4)} for k in range(4)}
    s = FiniteSubset.of(z4, [0, 1, 3])  # symmetric: 1^{-1} = 3
    act = HomotopySAction.from_genuine(z4, space, s, action)
    for n in (1, 2):
        products = {0}
        for _ in range(2 * n):
            products = {z4.mul(a, l) for a in products for l in s}
        expected = {(z4.inv(a), pts[(0 + a) % 4]) for a in products}
        assert act.s_orbit(n, (0, "x0")) == expected


def test_s_orbit_nonconstant_homotopy():
    # 3-point space, one nonconstant homotopy on a 3-step grid
    triv = FiniteTableGroup.cyclic(1)
    pts = ["x", "y", "z"]
    space = ControlSpace.from_matrix(pts, [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    s = FiniteSubset.of(triv, [0])
    ident = ("x", "y", "z")
    wander = ("y", "y", "y")
    middle = ("y", "y", "z")
    act = HomotopySAction(triv, space, s,
                          {0: ident},
                          {(0, 0): (ident,)},
                          check=False)
    # hand-built action with a nontrivial H_{e,e} is not allowed; use a
    # second letter in a bigger group instead
    z2 = FiniteTableGroup.cyclic(2)
    s2 = FiniteSubset.of(z2, [0, 1])
    act = HomotopySAction(z2, space, s2,
                          {0: ident, 1: ident},
                          {(0, 0): (ident,),
                           (0, 1): (ident, middle, ident),
                           (1, 0): (ident,),
                           (1, 1): (ident,)})
    maps = act.f_set(1)
    assert len(maps) == 2  # ident and the wandering grid map
    oracle = set()
    for a in [0, 1]:
        for b in [0, 1]:
            step = z2.mul(z2.inv(a), b)
            for f in act.f_set(a):
                for ft in act.f_set(b):
                    for y in pts:
                        for x2 in pts:
                            if act.apply(f, y) == act.apply(ft, x2):
                                pass
    got = act.s_orbit(1, (0, "x"))
    brute = set()
    for a in [0, 1]:
        for b in [0, 1]:
            for f in act.f_set(a):
                for ft in act.f_set(b):
                    for x2 in pts:
                        if act.apply(f, "x") == act.apply(ft, x2):
                            brute.add((z2.mul(z2.inv(a), b), x2))
    assert got == brute


# -- the quasi-metric ---------------------------------------------------------


def brute_dslambda(act, lam, src, dst, nmax=2):
    best = None
    pts = act.space.points
    bk = act.backend
    letters = list(act.S)
    if src[0] == dst[0]:
        best = lam * act.space.d(src[1], dst[1])
    for n in range(1, nmax + 1):
        for xs in itertools.product(pts, repeat=n):
            for zs in itertools.product(pts, repeat=n):
                xfull = (src[1],) + xs
                zfull = zs + (dst[1],)
                for ab in itertools.product(letters, repeat=2 * n):
                    a, b = ab[:n], ab[n:]
                    g = src[0]
                    for t in range(n):
                        g = bk.mul(g, bk.mul(bk.inv(a[t]), b[t]))
                    if g != dst[0]:
                        continue
                    ok = True
                    for t in range(1, n + 1):
                        if not any(act.apply(f, zfull[t - 1]) == act.apply(ft, xfull[t])
                                   for f in act.f_set(a[t - 1])
                                   for ft in act.f_set(b[t - 1])):
                            ok = False
                            break
                    if not ok:
                        continue
                    cost = Fraction(n)
                    for t in range(n + 1):
                        zt = zfull[t] if t < n else dst[1]
                        cost += lam * act.space.d(xfull[t], zfull[t] if t < n else dst[1])
                    if best is None or cost < best:
                        best = cost
    return best


def test_dslambda_z2_worked_example():
    act = z2_swap_action()
    for lam in (Fraction(1, 2), Fraction(1, 3)):
        metric = DSLambdaMetric(act, lam, n_max=4)
        assert metric.distance((0, "p"), (0, "p")).value == 0
        assert metric.distance((0, "p"), (1, "q")).value == 1
        assert metric.distance((0, "p"), (1, "p")).value == 1 + lam
        assert metric.distance((0, "p"), (0, "q")).value == lam


def test_dslambda_matches_bruteforce():
    act = z2_swap_action()
    lam = Fraction(1, 2)
    metric = DSLambdaMetric(act, lam, n_max=2)
    for src in [(0, "p"), (1, "q")]:
        for dst in [(0, "p"), (0, "q"), (1, "p"), (1, "q")]:
            got = metric.distance(src, dst)
            assert got.value == brute_dslambda(act, lam, src, dst)


def random_invariant_action(rng, n_pts=3, order=3):
    g = FiniteTableGroup.cyclic(order)
    pts = [f"x{i}" for i in range(n_pts)]
    dist = {(a, b): (Fraction(0) if a == b else Fraction(2))
            for a in pts for b in pts}
    space = ControlSpace(pts, dist)
    action = {k: {pts[i]: pts[(i + k) % n_pts] for i in range(n_pts)}
              for k in range(order)}
    s = FiniteSubset.of(g, [0, 1])
    return HomotopySAction.from_genuine(g, space, s, action)


def test_dslambda_metric_axioms_randomized():
    rng = random.Random(21)
    for trial in range(12):
        act = random_invariant_action(rng)
        lam = Fraction(rng.randint(1, 3), rng.randint(1, 3))
        metric = DSLambdaMetric(act, lam, n_max=3)
        carrier = [(g, x) for g in range(3) for x in act.space.points]
        table = metric.table(carrier)
        n = len(carrier)
        for i in range(n):
            assert table.values[(i, i)] == 0
            for j in range(n):
                assert table.values[(i, j)] == table.values[(j, i)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    a, b, c = (table.values[(i, j)], table.values[(j, k)],
                               table.values[(i, k)])
                    if a is not None and b is not None:
                        assert c is not None and c <= a + b


def test_dslambda_g_invariance():
    act = z2_swap_action()
    metric = DSLambdaMetric(act, Fraction(1, 2), n_max=3)
    for k in [0, 1]:
        for (g, x) in [(0, "p"), (1, "q")]:
            for (h, y) in [(0, "q"), (1, "p")]:
                lhs = metric.distance((act.backend.mul(k, g), x),
                                      (act.backend.mul(k, h), y))
                rhs = metric.distance((g, x), (h, y))
                assert lhs.value == rhs.value


def test_dslambda_small_distance_equality():
    rng = random.Random(22)
    act = random_invariant_action(rng)
    lam = Fraction(1, 10)
    metric = DSLambdaMetric(act, lam, n_max=3)
    for x in act.space.points:
        for y in act.space.points:
            if lam * act.space.d(x, y) < 1:
                assert metric.distance((0, x), (0, y)).value == lam * act.space.d(x, y)


def test_dslambda_monotone_in_s():
    # enlarging S never increases the metric
    z4 = FiniteTableGroup.cyclic(4)
    pts = ["x0", "x1", "x2", "x3"]
    dist = {(a, b): (Fraction(0) if a == b else Fraction(1)) for a in pts for b in pts}
    space = ControlSpace(pts, dist)
    action = {k: {pts[i]: pts[(i + k) % 4] for i in range(4)} for k in range(4)}
    small = HomotopySAction.from_genuine(z4, space, FiniteSubset.of(z4, [0, 1]), action)
    large = HomotopySAction.from_genuine(z4, space,
                                         FiniteSubset.of(z4, [0, 1, 2, 3]), action)
    lam = Fraction(1)
    m_small = DSLambdaMetric(small, lam, n_max=4)
    m_large = DSLambdaMetric(large, lam, n_max=4)
    for g in range(4):
        for x in pts:
            a = m_small.distance((0, "x0"), (g, x))
            b = m_large.distance((0, "x0"), (g, x))
            if a.value is not None and b.value is not None:
                assert b.value <= a.value


def test_dslambda_orbit_membership_surrogate():
    # for large Lambda, distance <= m forces orbit membership at depth m
    act = z2_swap_action()
    lam = Fraction(50)
    metric = DSLambdaMetric(act, lam, n_max=3)
    for m in (1, 2):
        for (h, y) in [(0, "p"), (0, "q"), (1, "p"), (1, "q")]:
            d = metric.distance((0, "p"), (h, y))
            if d.value is not None and d.value <= m:
                assert (h, y) in act.s_orbit(m, (0, "p"))


def test_dslambda_unreachable_certified():
    from klab.groups import FreeAbelianGroup
    z = FreeAbelianGroup(1)
    space = ControlSpace.from_matrix(["a"], [[0]])
    s = FiniteSubset.of(z, [(0,)])
    act = HomotopySAction.from_genuine(z, space, s, {(0,): {"a": "a"}})
    metric = DSLambdaMetric(act, Fraction(1), n_max=3)
    res = metric.distance(((0,), "a"), ((5,), "a"))
    assert res.is_infinite() and not res.truncated


# -- moduli --------------------------------------------------------------------


def test_moduli_isometric_action():
    act = z2_swap_action()
    grid = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]
    alpha, beta = moduli(act, grid)
    for eps in grid:
        assert beta[eps] <= eps
    for eps in grid:
        if alpha[eps] is not None:
            assert beta[alpha[eps]] <= eps


def test_moduli_doubling_homotopy():
    # 5-point interval with a doubling map riding on a homotopy grid: beta
    # doubles small displacements, computed by exhaustive pairs
    z2 = FiniteTableGroup.cyclic(2)
    pts = tuple(f"p{i}" for i in range(5))
    line = ControlSpace.path(5)
    s = FiniteSubset.of(z2, [0, 1])
    ident = pts
    flip = tuple(f"p{4 - i}" for i in range(5))
    double = tuple(f"p{min(2 * i, 4)}" for i in range(5))
    act = HomotopySAction(z2, line, s,
                          {0: ident, 1: flip},
                          {(0, 0): (ident,),
                           (0, 1): (flip, double, flip),
                           (1, 0): (flip,),
                           (1, 1): (ident,)})
    grid = [Fraction(1), Fraction(2)]
    alpha, beta = moduli(act, grid)
    worst1 = max(line.d(act.apply(m, a), act.apply(m, b))
                 for m in [ident, flip, double]
                 for a in pts for b in pts if line.d(a, b) <= 1)
    assert beta[Fraction(1)] == worst1 == 2
    assert alpha[Fraction(2)] == Fraction(1)
    assert beta[Fraction(1)] <= beta[Fraction(2)]


# -- covers, Lebesgue numbers, nerves -------------------------------------------


def half_cover_fixture():
    act = trivial_action_on_path(4)
    carrier = tuple((0, p) for p in act.space.points)
    cover = CoverSpec(carrier,
                      {"L": frozenset({(0, "p0"), (0, "p1"), (0, "p2")}),
                       "R": frozenset({(0, "p1"), (0, "p2"), (0, "p3")})},
                      {0: {"L": "L", "R": "R"}})
    return act, cover


def test_lebesgue_single_set_is_infinite():
    act, _ = half_cover_fixture()
    carrier = tuple((0, p) for p in act.space.points)
    cover = CoverSpec(carrier, {"U": frozenset(carrier)}, {0: {"U": "U"}})
    table = DSLambdaMetric(act, Fraction(1), 2).table(list(carrier))
    assert lebesgue_number(cover, table) is None


def test_lebesgue_two_half_covers():
    act, cover = half_cover_fixture()
    table = DSLambdaMetric(act, Fraction(1), 2).table(list(cover.carrier))
    assert lebesgue_number(cover, table) == 2


def test_lebesgue_empty_cover():
    act, cover = half_cover_fixture()
    table = DSLambdaMetric(act, Fraction(1), 2).table(list(cover.carrier))
    with pytest.raises(EmptyCover):
        lebesgue_number(CoverSpec(cover.carrier, {}, {}), table)


def test_lebesgue_lambda_search_on_z2():
    act = z2_swap_action()
    carrier = tuple((g, x) for g in [0, 1] for x in act.space.points)
    cover = CoverSpec(carrier, {"U": frozenset(carrier)},
                      {0: {"U": "U"}, 1: {"U": "U"}})
    lam, results = lebesgue_lambda_search(act, cover, Fraction(2),
                                          [Fraction(1, 2), Fraction(1)], 3)
    assert lam == Fraction(1, 2)  # infinite Lebesgue number at once


def test_check_f_cover_passes_and_flags():
    act = z2_swap_action()
    carrier = tuple((g, x) for g in [0, 1] for x in act.space.points)
    good = CoverSpec(carrier, {"U": frozenset(carrier)},
                     {0: {"U": "U"}, 1: {"U": "U"}})
    fam = FamilyPredicate("virtually-cyclic")
    rep = check_f_cover(good, fam, act.backend, act, N=3, s_long_depth=1)
    assert rep.ok() and rep.dimension == 0
    # a cover violating equivariance: name action says U maps to U but the
    # translated set leaves it
    bad_sets = {"U": frozenset({(0, "p"), (0, "q")}),
                "V": frozenset({(1, "p"), (1, "q")})}
    bad = CoverSpec(carrier, bad_sets, {0: {"U": "U", "V": "V"},
                                        1: {"U": "U", "V": "V"}})
    rep = check_f_cover(bad, fam, act.backend, act, N=3, s_long_depth=0)
    assert not rep.ok()
    assert any("g(U) != named image" in v for v in rep.violations)


def test_check_f_cover_dihedral_enumeration():
    act, cover = dihedral_cover(4)
    fam = FamilyPredicate("virtually-cyclic")
    rep = check_f_cover(cover, fam, act.backend, act, N=1, s_long_depth=1)
    assert rep.ok()
    assert rep.dimension == 0
    rot_stab = rep.isotropy["Urot"]
    assert sorted(rot_stab) == [0, 2, 4, 6]  # the rotation subgroup


def test_nerve_map_coordinates():
    act, cover = half_cover_fixture()
    table = DSLambdaMetric(act, Fraction(1), 2).table(list(cover.carrier))
    nerve, images = nerve_map(cover, table)
    assert images[(0, "p0")].coords == {"L": Fraction(1)}
    assert images[(0, "p1")].coords == {"L": Fraction(2, 3), "R": Fraction(1, 3)}
    # equidistant-from-complements point gets (1/2, 1/2)
    act5 = trivial_action_on_path(5)
    carrier = tuple((0, p) for p in act5.space.points)
    cover5 = CoverSpec(carrier,
                       {"L": frozenset({(0, "p0"), (0, "p1"), (0, "p2"), (0, "p3")}),
                        "R": frozenset({(0, "p1"), (0, "p2"), (0, "p3"), (0, "p4")})},
                       {0: {"L": "L", "R": "R"}})
    table5 = DSLambdaMetric(act5, Fraction(1), 2).table(list(carrier))
    _, images5 = nerve_map(cover5, table5)
    assert images5[(0, "p2")].coords == {"L": Fraction(1, 2), "R": Fraction(1, 2)}


def test_nerve_contraction_audit():
    act, cover = half_cover_fixture()
    table = DSLambdaMetric(act, Fraction(1), 2).table(list(cover.carrier))
    pairs = [(a, b) for a in cover.carrier for b in cover.carrier]
    audit = audit_nerve_contraction(cover, table, N=1, D=Fraction(2), pairs=pairs)
    assert audit.ok()
    assert audit.checked > 0 and audit.shared_simplex == audit.checked


def test_nerve_equivariance_on_z2():
    act = z2_swap_action()
    carrier = tuple((g, x) for g in [0, 1] for x in act.space.points)
    sets = {"A": frozenset({(0, "p"), (1, "q"), (0, "q")}),
            "B": frozenset({(1, "p"), (0, "q"), (1, "q")})}
    cover = CoverSpec(carrier, sets, {0: {"A": "A", "B": "B"},
                                      1: {"A": "B", "B": "A"}})
    table = DSLambdaMetric(act, Fraction(1, 2), 3).table(list(carrier))
    _, images = nerve_map(cover, table)
    # G-equivariance: f(g p) = sigma_g(f(p)) on the vertex names
    for (g, x) in carrier:
        moved = (act.backend.mul(1, g), x)
        image = images[moved].coords
        expected = {({"A": "B", "B": "A"})[name]: c
                    for name, c in images[(g, x)].coords.items()}
        assert image == expected


# -- domination validation -------------------------------------------------------


def test_validate_domination_path_fixture():
    data = path_point_domination(9, 4)
    rep = validate_domination(data)
    assert rep.ok(), rep.violations
    assert rep.track_diameter == 2


def test_validate_domination_identity():
    from klab.simplicial import PointInComplex, SimplicialComplex
    line = ControlSpace.path(3)
    verts = ["v0", "v1", "v2"]
    K = SimplicialComplex.from_maximal(
        verts, [frozenset(("v0", "v1")), frozenset(("v1", "v2"))])
    i_map = {f"p{i}": PointInComplex(K, {f"v{i}": Fraction(1)}) for i in range(3)}
    p_map = {f"v{i}": f"p{i}" for i in range(3)}
    track = (tuple(line.points),)
    data = DominationData(line, K, 1, Fraction(0), i_map, p_map, track)
    rep = validate_domination(data)
    assert rep.ok() and rep.track_diameter == 0


def test_validate_domination_flags_violations():
    data = path_point_domination(9, 4)
    bad = DominationData(data.space, data.complex, data.N, Fraction(1),
                         data.i_map, data.p_map, data.track)
    rep = validate_domination(bad)
    assert not rep.ok()
    assert any("track diameter" in v for v in rep.violations)
