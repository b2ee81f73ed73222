"""Homotopy S-actions on finite metric spaces and everything they induce:
the quasi-metric on ``G x X``, orbit sets, covers with Lebesgue numbers,
nerve maps with contraction audits, and discrete domination data.

Homotopies are discretized on finite time grids; all distances are exact
rationals.  Enumerations past a configured horizon raise or set a
truncation flag instead of claiming completeness.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .control import INF, ControlSpace
from .errors import (EmptyCover, HorizonExceeded, InputError, ZeroDenominator)
from .groups import (FamilyPredicate, FiniteSubset, GroupBackend,
                     SubgroupDescription, family_member)
from .intmat import lattice_member
from .simplicial import PointInComplex, SimplicialComplex

PointMap = Tuple[object, ...]  # images listed in space point order

DEFAULT_DSLAMBDA_HORIZON = 8
DEFAULT_STATE_CAP = 200_000


class HomotopySAction:
    """Finite metric space with maps ``phi_g`` and grid homotopies ``H_{g,h}``.

    ``H[(g,h)]`` is a tuple of point maps over the time grid, starting at
    ``phi_g o phi_h`` and ending at ``phi_{gh}``; ``H[(e,e)]`` must be
    constantly the identity.
    """

    def __init__(self, backend: GroupBackend, space: ControlSpace, S: FiniteSubset,
                 phi: Dict[object, PointMap],
                 homotopies: Dict[Tuple[object, object], Tuple[PointMap, ...]],
                 check: bool = True):
        self.backend = backend
        self.space = space
        self.S = S
        self.index = {p: i for i, p in enumerate(space.points)}
        self.phi = {backend.canonical(g): tuple(m) for g, m in phi.items()}
        self.H = {(backend.canonical(g), backend.canonical(h)): tuple(tuple(m) for m in grid)
                  for (g, h), grid in homotopies.items()}
        if check:
            self.validate()

    # -- point map helpers ---------------------------------------------

    def apply(self, point_map: PointMap, x) -> object:
        return point_map[self.index[x]]

    def identity_map(self) -> PointMap:
        return tuple(self.space.points)

    def compose_maps(self, outer: PointMap, inner: PointMap) -> PointMap:
        return tuple(outer[self.index[inner[i]]] for i in range(len(inner)))

    def validate(self) -> None:
        e = self.backend.identity()
        if not self.S.contains_identity():
            raise InputError("S must contain the identity")
        pts = set(self.space.points)
        for g in self.S:
            if g not in self.phi:
                raise InputError(f"phi missing for {g!r}")
            m = self.phi[g]
            if len(m) != len(self.space.points) or any(y not in pts for y in m):
                raise InputError(f"phi[{g!r}] is not a total point map")
        if self.phi[e] != self.identity_map():
            raise InputError("phi_e must be the identity")
        s_set = set(self.S.elements)
        for g in self.S:
            for h in self.S:
                gh = self.backend.mul(g, h)
                if gh not in s_set:
                    continue
                grid = self.H.get((g, h))
                if not grid:
                    raise InputError(f"homotopy missing for pair ({g!r},{h!r})")
                comp = self.compose_maps(self.phi[g], self.phi[h])
                if grid[0] != comp:
                    raise InputError(f"H[{g!r},{h!r}] does not start at phi_g o phi_h")
                if grid[-1] != self.phi[gh]:
                    raise InputError(f"H[{g!r},{h!r}] does not end at phi_gh")
                for m in grid:
                    if len(m) != len(self.space.points) or any(y not in pts for y in m):
                        raise InputError(f"H[{g!r},{h!r}] has a non-total grid map")
        ident = self.identity_map()
        for m in self.H[(e, e)]:
            if m != ident:
                raise InputError("H[e,e] must be constantly the identity")

    @staticmethod
    def from_genuine(backend: GroupBackend, space: ControlSpace, S: FiniteSubset,
                     action: Dict[object, Dict[object, object]]) -> "HomotopySAction":
        """Restrict an honest action to ``S`` with constant homotopies."""
        phi = {}
        for g in S:
            amap = action[backend.canonical(g)]
            phi[backend.canonical(g)] = tuple(amap[p] for p in space.points)
        homotopies = {}
        s_set = set(S.elements)
        for g in S:
            for h in S:
                gh = backend.mul(g, h)
                if gh in s_set:
                    homotopies[(g, h)] = (phi[gh],)
        return HomotopySAction(backend, space, S, phi, homotopies)

    # -- Definition-level sets -------------------------------------------

    def f_set(self, g) -> List[PointMap]:
        """All maps ``x -> H_{r,s}(x, t)`` over grid times with ``rs = g``."""
        g = self.backend.canonical(g)
        if g not in set(self.S.elements):
            raise InputError(f"{g!r} is not in S")
        out: Set[PointMap] = set()
        for r in self.S:
            for s in self.S:
                if self.backend.mul(r, s) == g:
                    for m in self.H.get((r, s), ()):
                        out.add(m)
        return sorted(out)

    def move_relation(self, a, b) -> Set[Tuple[object, object]]:
        """Pairs ``(z, x')`` with ``f(z) = f'(x')`` for some maps in
        ``F_a`` and ``F_b``."""
        fa = self.f_set(a)
        fb = self.f_set(b)
        out: Set[Tuple[object, object]] = set()
        targets: Dict[object, List[object]] = {}
        for fm in fb:
            for x in self.space.points:
                targets.setdefault(self.apply(fm, x), []).append(x)
        for fm in fa:
            for z in self.space.points:
                img = self.apply(fm, z)
                for x in targets.get(img, ()):
                    out.add((z, x))
        return out

    def s_orbit(self, n: int, gx: Tuple[object, object],
                horizon: int = 12, cap: int = 100_000) -> Set[Tuple[object, object]]:
        """Exact enumeration of ``S^n(g, x)`` by depth-``n`` search."""
        if n < 0:
            raise InputError("negative depth")
        if n > horizon:
            raise HorizonExceeded(f"orbit depth {n} exceeds horizon {horizon}")
        g, x = self.backend.canonical(gx[0]), gx[1]
        relations = {}
        for a in self.S:
            for b in self.S:
                relations[(a, b)] = self.move_relation(a, b)
        current: Set[Tuple[object, object]] = {(g, x)}
        for _ in range(n):
            nxt: Set[Tuple[object, object]] = set()
            for (h, y) in current:
                for (a, b), rel in relations.items():
                    step = self.backend.mul(self.backend.inv(a), b)
                    for (z, xp) in rel:
                        if z == y:
                            nxt.add((self.backend.mul(h, step), xp))
            current = nxt
            if len(current) > cap:
                raise HorizonExceeded("orbit enumeration exceeded cap")
        return current


@dataclass
class DSLambdaResult:
    """Value of the quasi-metric with its truncation certificate."""

    value: Optional[Fraction]  # None encodes the infinity marker
    truncated: bool
    lower_bound: Fraction

    def is_infinite(self) -> bool:
        return self.value is None


class DSLambdaMetric:
    """Shortest-path evaluator for ``d_{S,Lambda}`` on ``G x X``.

    Nodes are ``(group element, point, moves used)``; fiber edges cost
    ``Lambda * d_X``, move edges cost 1 and are available whenever some
    ``f in F_a``, ``f' in F_b`` satisfy ``f(z) = f'(x')``.  Values found
    at total cost at most ``n_max + 1`` are exact; otherwise the result
    is flagged as a truncated lower bound.
    """

    def __init__(self, action: HomotopySAction, lam: Fraction,
                 n_max: int = DEFAULT_DSLAMBDA_HORIZON,
                 state_cap: int = DEFAULT_STATE_CAP):
        if lam <= 0:
            raise InputError("Lambda must be positive")
        self.action = action
        self.lam = Fraction(lam)
        self.n_max = n_max
        self.state_cap = state_cap
        self.backend = action.backend
        # move steps: letter a^{-1} b with its point relation
        self.steps: List[Tuple[object, Set[Tuple[object, object]]]] = []
        merged: Dict[object, Set[Tuple[object, object]]] = {}
        for a in action.S:
            for b in action.S:
                step = self.backend.mul(self.backend.inv(a), b)
                merged.setdefault(step, set()).update(action.move_relation(a, b))
        self.steps = sorted(merged.items(), key=lambda kv: repr(kv[0]))

    def _dijkstra(self, x0) -> Dict[Tuple[object, object], Fraction]:
        """Best cost from ``(e, x0)`` to every ``(g, x)`` within the move
        horizon (min over layers)."""
        points = self.action.space.points
        dist: Dict[Tuple[object, object, int], Fraction] = {}
        best: Dict[Tuple[object, object], Fraction] = {}
        start = (self.backend.identity(), x0, 0)
        heap: List[Tuple[Fraction, int, Tuple[object, object, int]]] = []
        counter = 0
        dist[start] = Fraction(0)
        heapq.heappush(heap, (Fraction(0), counter, start))
        while heap:
            cost, _, state = heapq.heappop(heap)
            if dist.get(state) != cost:
                continue
            g, x, k = state
            key = (g, x)
            if key not in best or cost < best[key]:
                best[key] = cost
            relax = []
            for z in points:
                if z != x:
                    relax.append(((g, z, k), cost + self.lam * self.action.space.d(x, z)))
            if k < self.n_max:
                for step, rel in self.steps:
                    gs = self.backend.mul(g, step)
                    for (z, xp) in rel:
                        if z == x:
                            relax.append(((gs, xp, k + 1), cost + 1))
            for nstate, ncost in relax:
                if nstate not in dist or ncost < dist[nstate]:
                    dist[nstate] = ncost
                    counter += 1
                    heapq.heappush(heap, (ncost, counter, nstate))
            if len(dist) > self.state_cap:
                raise HorizonExceeded("d_{S,Lambda} state cap exceeded")
        return best

    def _certified_unreachable(self, displacement) -> bool:
        """True when no chain of move letters can realize the displacement."""
        letters = [step for step, _ in self.steps]
        if self.backend.kind == "finite-table":
            sub = SubgroupDescription.of(self.backend, letters or [self.backend.identity()])
            return displacement not in sub.closure()
        if self.backend.kind == "free-abelian":
            return not lattice_member([list(l) for l in letters], list(displacement))
        e = self.backend.identity()
        if all(l == e for l in letters):
            return displacement != e
        return False

    def distance(self, src: Tuple[object, object], dst: Tuple[object, object]) -> DSLambdaResult:
        g, x = self.backend.canonical(src[0]), src[1]
        h, y = self.backend.canonical(dst[0]), dst[1]
        # G-invariance: translate the source to the identity
        disp = self.backend.mul(self.backend.inv(g), h)
        best = self._dijkstra(x)
        found = best.get((disp, y))
        cutoff = Fraction(self.n_max + 1)
        if found is not None and found <= cutoff:
            return DSLambdaResult(found, False, found)
        if found is not None:
            return DSLambdaResult(found, True, cutoff)
        if self._certified_unreachable(disp):
            return DSLambdaResult(None, False, cutoff)
        return DSLambdaResult(None, True, cutoff)

    def table(self, carrier: Sequence[Tuple[object, object]]) -> "MetricTable":
        """Pairwise values on a finite carrier (one search per source)."""
        values: Dict[Tuple[int, int], Optional[Fraction]] = {}
        truncated = False
        cutoff = Fraction(self.n_max + 1)
        canon = [(self.backend.canonical(g), x) for (g, x) in carrier]
        for i, (g, x) in enumerate(canon):
            best = self._dijkstra(x)
            for j, (h, y) in enumerate(canon):
                disp = self.backend.mul(self.backend.inv(g), h)
                found = best.get((disp, y))
                if found is not None and found <= cutoff:
                    values[(i, j)] = found
                elif found is not None:
                    values[(i, j)] = found
                    truncated = True
                else:
                    values[(i, j)] = None
                    if not self._certified_unreachable(disp):
                        truncated = True
        return MetricTable(tuple(canon), values, truncated)


@dataclass
class MetricTable:
    """Evaluated quasi-metric on a finite carrier of ``(g, x)`` points."""

    carrier: Tuple[Tuple[object, object], ...]
    values: Dict[Tuple[int, int], Optional[Fraction]]
    truncated: bool

    def d(self, p, q) -> Optional[Fraction]:
        i = self.carrier.index(p)
        j = self.carrier.index(q)
        return self.values[(i, j)]

    def d_by_index(self, i: int, j: int) -> Optional[Fraction]:
        return self.values[(i, j)]


# -- moduli of the action ---------------------------------------------------


def moduli(action: HomotopySAction, eps_grid: Sequence[Fraction]
           ) -> Tuple[Dict[Fraction, Optional[Fraction]], Dict[Fraction, Fraction]]:
    """Displacement moduli ``beta`` and its partial inverse ``alpha``.

    ``beta(eps)`` is the maximal displacement of eps-close pairs under
    all maps of the action (the ``phi_g`` and every grid homotopy map);
    ``alpha(eps)`` is the largest grid value ``delta`` with
    ``beta(delta) <= eps`` (or None when no grid value qualifies).
    """
    grid = sorted(Fraction(e) for e in eps_grid)
    maps: List[PointMap] = [action.phi[g] for g in action.S]
    for gridmaps in action.H.values():
        maps.extend(gridmaps)
    pts = action.space.points
    beta: Dict[Fraction, Fraction] = {}
    for eps in grid:
        worst = Fraction(0)
        for x in pts:
            for y in pts:
                if action.space.d(x, y) <= eps:
                    for m in maps:
                        disp = action.space.d(action.apply(m, x), action.apply(m, y))
                        if disp > worst:
                            worst = disp
        beta[eps] = worst
    alpha: Dict[Fraction, Optional[Fraction]] = {}
    for eps in grid:
        qualifying = [d for d in grid if beta[d] <= eps]
        alpha[eps] = max(qualifying) if qualifying else None
    return alpha, beta


# -- covers -----------------------------------------------------------------


@dataclass
class CoverSpec:
    """Named subsets of a finite ``(ball in G) x X`` carrier.

    ``name_action[g]`` sends set names to set names and certifies the
    equivariance ``g(U) in cover``; group elements without action data
    are simply not checked.
    """

    carrier: Tuple[Tuple[object, object], ...]
    sets: Dict[str, FrozenSet[Tuple[object, object]]]
    name_action: Dict[object, Dict[str, str]] = field(default_factory=dict)

    def members(self, name: str) -> FrozenSet[Tuple[object, object]]:
        return self.sets[name]

    def covering_violations(self) -> List[str]:
        out = []
        union = set()
        for s in self.sets.values():
            union |= s
        for p in self.carrier:
            if p not in union:
                out.append(f"point {p!r} not covered")
        return out

    def multiplicity(self) -> int:
        worst = 0
        for p in self.carrier:
            worst = max(worst, sum(1 for s in self.sets.values() if p in s))
        return worst

    def dimension(self) -> int:
        """Cover dimension as (max multiplicity over points) - 1."""
        return self.multiplicity() - 1


@dataclass
class CoverReport:
    violations: List[str]
    skipped: List[str]
    dimension: int
    isotropy: Dict[str, List[object]]
    s_long_checked: int
    s_long_failures: List[str]

    def ok(self) -> bool:
        return not self.violations and not self.s_long_failures


def check_f_cover(cover: CoverSpec, family: FamilyPredicate,
                  backend: GroupBackend, action: Optional[HomotopySAction] = None,
                  N: Optional[int] = None, s_long_depth: Optional[int] = None) -> CoverReport:
    """Verify the open-F-cover axioms on finite data.

    Checks covering, equivariance via the name action, the F-subset
    dichotomy ``g(U) = U or U n g(U) = empty``, isotropy membership in
    the family, dimension against ``N``, and S-long-ness via orbit
    containment when an action is supplied.  Items that leave the finite
    carrier are reported as skipped, never silently passed.
    """
    violations: List[str] = []
    skipped: List[str] = []
    violations.extend(cover.covering_violations())
    carrier = set(cover.carrier)

    for g, perm in cover.name_action.items():
        g = backend.canonical(g)
        if sorted(perm) != sorted(cover.sets):
            violations.append(f"name action of {g!r} is not a permutation of the cover")
            continue
        for name, members in cover.sets.items():
            image_name = perm[name]
            translated = {(backend.mul(g, h), x) for (h, x) in members}
            inside = translated & carrier
            target = cover.sets[image_name]
            if not inside <= target:
                violations.append(f"g(U) != named image for g={g!r}, U={name}")
            if translated - carrier:
                skipped.append(f"g={g!r} moves part of {name} outside the carrier")
            # dichotomy: either the named image is U itself or meets U trivially
            if image_name != name and inside & members:
                violations.append(f"F-subset dichotomy fails for g={g!r}, U={name}")

    isotropy: Dict[str, List[object]] = {}
    for name in cover.sets:
        stab = [g for g, perm in cover.name_action.items() if perm[name] == name]
        isotropy[name] = stab
        if cover.name_action:
            sub = SubgroupDescription.of(backend, stab or [backend.identity()])
            try:
                if not family_member(family, sub):
                    violations.append(f"isotropy of {name} is not in the family")
            except Exception as exc:  # undecidable backends reported, not guessed
                skipped.append(f"isotropy membership for {name}: {exc}")

    dim = cover.dimension()
    if N is not None and dim > N:
        violations.append(f"cover dimension {dim} exceeds N={N}")

    s_long_checked = 0
    s_long_failures: List[str] = []
    if action is not None:
        depth = s_long_depth if s_long_depth is not None else len(action.S)
        for (g, x) in cover.carrier:
            orbit = action.s_orbit(depth, (g, x))
            if not orbit <= carrier:
                skipped.append(f"S^{depth}({g!r},{x!r}) leaves the carrier")
                continue
            s_long_checked += 1
            if not any(orbit <= members for members in cover.sets.values()):
                s_long_failures.append(f"no cover set contains S^{depth}({g!r},{x!r})")
    return CoverReport(violations, skipped, dim, isotropy, s_long_checked, s_long_failures)


def distance_to_complement(cover: CoverSpec, table: MetricTable, name: str,
                           p: Tuple[object, object]) -> Optional[Fraction]:
    """min distance from ``p`` to carrier points outside the named set."""
    members = cover.sets[name]
    best: Optional[Fraction] = None
    pi = table.carrier.index(p)
    for j, q in enumerate(table.carrier):
        if q in members:
            continue
        d = table.d_by_index(pi, j)
        if d is None:
            continue  # unreachable complement point imposes no constraint
        if best is None or d < best:
            best = d
    if not (set(table.carrier) - set(members)):
        return INF  # empty complement
    return best if best is not None else INF


def lebesgue_number(cover: CoverSpec, table: MetricTable) -> Optional[Fraction]:
    """min over points of max over cover sets of distance-to-complement.

    Returns the infinity marker (None) when some point lies in a set
    with unreachable complement.
    """
    if not cover.sets:
        raise EmptyCover("cover has no sets")
    overall: Optional[Fraction] = None
    overall_inf = True
    for p in cover.carrier:
        best: Optional[Fraction] = Fraction(0)
        best_inf = False
        for name in cover.sets:
            d = distance_to_complement(cover, table, name, p)
            if d is INF:
                best_inf = True
                break
            if d > best:
                best = d
        if best_inf:
            continue  # this point imposes no finite constraint
        overall_inf = False
        if overall is None or best < overall:
            overall = best
    return INF if overall_inf else overall


def lebesgue_lambda_search(action: HomotopySAction, cover: CoverSpec,
                           m: Fraction, lambda_grid: Sequence[Fraction],
                           n_max: int = DEFAULT_DSLAMBDA_HORIZON
                           ) -> Tuple[Optional[Fraction], Dict[Fraction, Optional[Fraction]]]:
    """Least grid Lambda whose Lebesgue number reaches ``m/2``."""
    results: Dict[Fraction, Optional[Fraction]] = {}
    for lam in sorted(Fraction(l) for l in lambda_grid):
        table = DSLambdaMetric(action, lam, n_max).table(list(cover.carrier))
        number = lebesgue_number(cover, table)
        results[lam] = number
        if number is INF or number >= Fraction(m) / 2:
            return lam, results
    return None, results


def nerve_complex(cover: CoverSpec) -> SimplicialComplex:
    """Nerve of the cover on the carrier: simplices are point-supported
    name sets."""
    maximal = []
    for p in cover.carrier:
        names = frozenset(name for name, members in cover.sets.items() if p in members)
        if names:
            maximal.append(names)
    return SimplicialComplex.from_maximal(sorted(cover.sets), maximal)


def nerve_map(cover: CoverSpec, table: MetricTable
              ) -> Tuple[SimplicialComplex, Dict[Tuple[object, object], PointInComplex]]:
    """Barycentric coordinates proportional to distance-to-complement."""
    if not cover.sets:
        raise EmptyCover("cover has no sets")
    nerve = nerve_complex(cover)
    out: Dict[Tuple[object, object], PointInComplex] = {}
    for p in cover.carrier:
        coords: Dict[object, Fraction] = {}
        for name in cover.sets:
            d = distance_to_complement(cover, table, name, p)
            if d is INF:
                raise InputError("nerve map needs a finite metric on the carrier")
            if d > 0:
                coords[name] = d
        total = sum(coords.values(), Fraction(0))
        if total == 0:
            raise ZeroDenominator(f"point {p!r} has zero distance to every complement")
        out[p] = PointInComplex(nerve, {k: v / total for k, v in coords.items()})
    return nerve, out


@dataclass
class ContractionAudit:
    checked: int
    shared_simplex: int
    disjoint_support: int
    violations: List[str]

    def ok(self) -> bool:
        return not self.violations


def audit_nerve_contraction(cover: CoverSpec, table: MetricTable, N: int,
                            D: Fraction, pairs: Sequence[Tuple[Tuple[object, object],
                                                               Tuple[object, object]]]
                            ) -> ContractionAudit:
    """On pairs with ``d <= D/(4N)`` check ``d^1(f p, f q) <= (16 N^2 / D) d``.

    The l^1 comparison is exact when the two image supports span a common
    nerve simplex; disjoint-support samples are counted, not asserted.
    """
    if N <= 0 or D <= 0:
        raise InputError("need positive N and D")
    nerve, images = nerve_map(cover, table)
    threshold = Fraction(D) / (4 * N)
    factor = Fraction(16 * N * N, 1) / Fraction(D)
    checked = shared = disjoint = 0
    violations: List[str] = []
    for (p, q) in pairs:
        d = table.d(p, q)
        if d is None or d > threshold:
            continue
        checked += 1
        fp, fq = images[p], images[q]
        union = frozenset(fp.coords) | frozenset(fq.coords)
        if not nerve.has_simplex(union):
            disjoint += 1
            continue
        shared += 1
        if fp.l1_to(fq) > factor * d:
            violations.append(f"contraction bound fails for {p!r}, {q!r}")
    return ContractionAudit(checked, shared, disjoint, violations)


# -- domination data ---------------------------------------------------------


@dataclass
class DominationData:
    """Discrete controlled-domination witness of a space by a complex.

    ``i_map`` places each point in the complex ``K`` by barycentric
    coordinates, ``p_map`` sends K-vertices back to the space, and
    ``track`` is the discretized homotopy from the composite to the
    identity.  The composite point map sends ``x`` to ``p_map`` of the
    max-coordinate vertex of ``i_map[x]`` (ties by smallest repr).
    """

    space: ControlSpace
    complex: SimplicialComplex
    N: int
    eps: Fraction
    i_map: Dict[object, PointInComplex]
    p_map: Dict[object, object]
    track: Tuple[PointMap, ...]

    def composite(self) -> PointMap:
        out = []
        for x in self.space.points:
            coords = self.i_map[x].coords
            best = max(coords.values())
            vertex = sorted((v for v, c in coords.items() if c == best), key=repr)[0]
            out.append(self.p_map[vertex])
        return tuple(out)


@dataclass
class DominationReport:
    violations: List[str]
    track_diameter: Fraction

    def ok(self) -> bool:
        return not self.violations


def validate_domination(data: DominationData) -> DominationReport:
    """Check dimension, endpoints, and the track diameter bound."""
    violations: List[str] = []
    if data.complex.dimension() > data.N:
        violations.append(f"complex dimension {data.complex.dimension()} exceeds N={data.N}")
    pts = data.space.points
    for x in pts:
        if x not in data.i_map:
            violations.append(f"i undefined at {x!r}")
    for v in data.complex.vertices:
        if v not in data.p_map or data.p_map[v] not in set(pts):
            violations.append(f"p undefined or out of space at vertex {v!r}")
    if violations:
        return DominationReport(violations, Fraction(0))
    if not data.track:
        violations.append("empty track")
        return DominationReport(violations, Fraction(0))
    if data.track[0] != data.composite():
        violations.append("track does not start at p o i")
    if data.track[-1] != tuple(pts):
        violations.append("track does not end at the identity")
    worst = Fraction(0)
    index = {p: i for i, p in enumerate(pts)}
    for x in pts:
        values = [m[index[x]] for m in data.track]
        for a in values:
            for b in values:
                d = data.space.d(a, b)
                if d > worst:
                    worst = d
    if worst > data.eps:
        violations.append(f"track diameter {worst} exceeds eps={data.eps}")
    return DominationReport(violations, worst)
