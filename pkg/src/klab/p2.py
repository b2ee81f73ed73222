"""Unordered pairs of points: metric, stabilizers, induced actions, and
the comparison audits feeding the L-theory transfer."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .actions import DSLambdaMetric, HomotopySAction, PointMap
from .control import ControlSpace
from .errors import InputError
from .groups import (FamilyPredicate, GroupBackend,
                     SubgroupDescription, family_member)


def unordered_pair(x, y) -> Tuple[object, object]:
    """Canonically sorted pair; ``(x:y) = (y:x)``."""
    return tuple(sorted((x, y), key=repr))


def p2_points(space: ControlSpace) -> List[Tuple[object, object]]:
    pts = list(space.points)
    out = []
    for i, x in enumerate(pts):
        for y in pts[i:]:
            out.append(unordered_pair(x, y))
    return out


def p2_metric(space: ControlSpace) -> ControlSpace:
    """min of the two matchings: ``min{d(x,x')+d(y,y'), d(x,y')+d(y,x')}``."""
    pairs = p2_points(space)
    dist: Dict[Tuple[object, object], Fraction] = {}
    for a in pairs:
        for b in pairs:
            (x, y), (xp, yp) = a, b
            dist[(a, b)] = min(space.d(x, xp) + space.d(y, yp),
                               space.d(x, yp) + space.d(y, xp))
    return ControlSpace(pairs, dist)


def p2_point_map(space: ControlSpace, pair_space: ControlSpace, m: PointMap) -> PointMap:
    """Induced map on unordered pairs of a point map on the space."""
    index = {p: i for i, p in enumerate(space.points)}
    out = []
    for (x, y) in pair_space.points:
        out.append(unordered_pair(m[index[x]], m[index[y]]))
    return tuple(out)


def p2_action(action: HomotopySAction) -> HomotopySAction:
    """Induced homotopy S-action on the pair space (componentwise maps,
    grid homotopies descend)."""
    pair_space = p2_metric(action.space)
    phi = {g: p2_point_map(action.space, pair_space, m) for g, m in action.phi.items()}
    homotopies = {key: tuple(p2_point_map(action.space, pair_space, m) for m in grid)
                  for key, grid in action.H.items()}
    return HomotopySAction(action.backend, pair_space, action.S, phi, homotopies)


@dataclass
class StabilizerReport:
    pair: Tuple[object, object]
    stabilizer: List[object]
    intersection: List[object]
    index: int
    in_family2: Optional[bool]

    def ok(self) -> bool:
        return self.index in (1, 2) and self.in_family2 is not False


def p2_stabilizer_check(backend: GroupBackend, action: Dict[object, Dict[object, object]],
                        pair: Tuple[object, object],
                        family: Optional[FamilyPredicate] = None) -> StabilizerReport:
    """Stabilizer of an unordered pair under a genuine finite action.

    Computes ``G_(x:y)`` and ``G_x n G_y``, asserts the index is 1 or 2,
    and checks F_2 membership when the point stabilizers lie in the
    family.
    """
    if backend.kind != "finite-table":
        raise InputError("stabilizer enumeration needs a finite-table backend")
    x, y = pair
    stab = []
    inter = []
    for g in backend.elements():
        gx, gy = action[g][x], action[g][y]
        if unordered_pair(gx, gy) == unordered_pair(x, y):
            stab.append(g)
        if gx == x and gy == y:
            inter.append(g)
    if len(stab) % len(inter) != 0:
        raise InputError("stabilizer sizes are inconsistent")
    index = len(stab) // len(inter)
    in_family2: Optional[bool] = None
    if family is not None:
        gx_stab = [g for g in backend.elements() if action[g][x] == x]
        gy_stab = [g for g in backend.elements() if action[g][y] == y]
        f_plain = FamilyPredicate(family.kind, False, family.custom)
        if (family_member(f_plain, SubgroupDescription.of(backend, gx_stab))
                and family_member(f_plain, SubgroupDescription.of(backend, gy_stab))):
            f2 = FamilyPredicate(family.kind, True, family.custom)
            in_family2 = family_member(f2, SubgroupDescription.of(backend, stab))
    return StabilizerReport(unordered_pair(x, y), stab, inter, index, in_family2)


@dataclass
class AuditReport:
    checked: int
    skipped: int
    counterexamples: List[str]

    def ok(self) -> bool:
        return not self.counterexamples


def lipschitz_transfer_audit(space_x: ControlSpace, space_y: ControlSpace,
                             f: Dict[object, object], delta: Fraction,
                             eps: Fraction) -> AuditReport:
    """If ``f`` moves delta-close points at most eps/2 apart, then the
    pair map moves delta-close pairs at most eps apart (checked on all
    pairs; a counterexample signals an implementation bug)."""
    delta, eps = Fraction(delta), Fraction(eps)
    for x in space_x.points:
        if x not in f or f[x] not in set(space_y.points):
            raise InputError(f"map undefined at {x!r}")
    # hypothesis
    for x in space_x.points:
        for xp in space_x.points:
            if space_x.d(x, xp) <= delta and space_y.d(f[x], f[xp]) > eps / 2:
                return AuditReport(0, 1, [])  # hypothesis not satisfied; nothing to audit
    px = p2_metric(space_x)
    py = p2_metric(space_y)
    checked = 0
    bad: List[str] = []
    for a in px.points:
        for b in px.points:
            if px.d(a, b) > delta:
                continue
            checked += 1
            fa = unordered_pair(f[a[0]], f[a[1]])
            fb = unordered_pair(f[b[0]], f[b[1]])
            if py.d(fa, fb) > eps:
                bad.append(f"P2(f) moves {a!r},{b!r} too far")
    return AuditReport(checked, 0, bad)


def omega_audit(action: HomotopySAction, lam: Fraction,
                samples: Sequence[Tuple[Tuple[object, object], Tuple[object, object]]],
                n_max: int = 6) -> AuditReport:
    """Factor-2 comparison along ``omega(g,(x:y)) = ((g,x):(g,y))``.

    For sampled pairs ``z, z'`` in ``G x P2(X)`` checks
    ``d_{S,Lambda,P2(G x X)}(omega z, omega z') <= 2 d_{S,Lambda,G x P2(X)}(z, z')``
    whenever both sides are exact at the horizon; truncated values are
    skipped and counted.
    """
    pair_action = p2_action(action)
    metric_x = DSLambdaMetric(action, lam, n_max)
    metric_p2 = DSLambdaMetric(pair_action, lam, n_max)
    checked = skipped = 0
    bad: List[str] = []
    for (z, zp) in samples:
        (g, pair), (h, pairp) = z, zp
        pair = unordered_pair(*pair)
        pairp = unordered_pair(*pairp)
        rhs = metric_p2.distance((g, pair), (h, pairp))
        if rhs.truncated:
            skipped += 1
            continue
        # omega images: unordered pair of (g,x) points measured in the
        # pair metric built from d_{S,Lambda} on G x X
        legs = {}
        exact = True
        for (a, b) in [(pair[0], pairp[0]), (pair[1], pairp[1]),
                       (pair[0], pairp[1]), (pair[1], pairp[0])]:
            r = metric_x.distance((g, a), (h, b))
            if r.truncated:
                exact = False
                break
            legs[(a, b)] = r.value
        if not exact:
            skipped += 1
            continue

        def add(u, v):
            if u is None or v is None:
                return None
            return u + v

        m1 = add(legs[(pair[0], pairp[0])], legs[(pair[1], pairp[1])])
        m2 = add(legs[(pair[0], pairp[1])], legs[(pair[1], pairp[0])])
        finite = [m for m in (m1, m2) if m is not None]
        lhs = min(finite) if finite else None
        checked += 1
        if rhs.is_infinite():
            continue  # rhs infinite bounds nothing
        if lhs is None or lhs > 2 * rhs.value:
            bad.append(f"omega inequality fails at {z!r}, {zp!r}: "
                       f"lhs={lhs}, rhs={rhs.value}")
    return AuditReport(checked, skipped, bad)
