"""Geometric modules over labeled metric spaces and controlled morphisms.

Positions follow the support convention of block matrices: the first
entry of a support pair is the target position, the second the source.
Group-equivariant morphisms over ``G x Z`` (free action on the group
factor) are stored on a fundamental domain as letter-indexed blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from .errors import HorizonExceeded, InputError
from .groups import FiniteSubset, GroupBackend
from .intmat import IntMatrix

INF = None  # marker for unreachable / unbounded distances


class GPos(NamedTuple):
    """Position labeled by a group element and a space point.

    Space points may themselves be tuples, so group-labeled positions
    are a distinct type rather than a bare pair.
    """

    g: object
    z: object


class ControlSpace:
    """Finite metric space with exact rational distances."""

    def __init__(self, points: Sequence[object], dist: Dict[Tuple[object, object], Fraction],
                 check: bool = True):
        self.points = tuple(points)
        if len(set(self.points)) != len(self.points):
            raise InputError("duplicate points in control space")
        self.dist = {}
        for (a, b), v in dist.items():
            self.dist[(a, b)] = Fraction(v)
        for p in self.points:
            self.dist.setdefault((p, p), Fraction(0))
        if check:
            self.validate()

    def d(self, a, b) -> Fraction:
        if a == b:
            return Fraction(0)
        v = self.dist.get((a, b))
        if v is None:
            v = self.dist.get((b, a))
        if v is None:
            raise InputError(f"distance undefined for ({a!r},{b!r})")
        return v

    def validate(self) -> None:
        for a in self.points:
            if self.d(a, a) != 0:
                raise InputError(f"d({a},{a}) != 0")
        for a in self.points:
            for b in self.points:
                if self.d(a, b) != self.d(b, a):
                    raise InputError(f"asymmetric distance at ({a},{b})")
                if a != b and self.d(a, b) <= 0:
                    raise InputError(f"non-positive distance at ({a},{b})")
        for a in self.points:
            for b in self.points:
                for c in self.points:
                    if self.d(a, c) > self.d(a, b) + self.d(b, c):
                        raise InputError(f"triangle inequality fails at ({a},{b},{c})")

    @staticmethod
    def from_matrix(points: Sequence[object], rows: Sequence[Sequence[Fraction]],
                    check: bool = True) -> "ControlSpace":
        dist = {}
        pts = list(points)
        for i, p in enumerate(pts):
            for j, q in enumerate(pts):
                dist[(p, q)] = Fraction(rows[i][j])
        return ControlSpace(pts, dist, check=check)

    @staticmethod
    def path(n: int, step: Fraction = Fraction(1)) -> "ControlSpace":
        """n points on a line at the given spacing, ids ``p0..p{n-1}``."""
        pts = [f"p{i}" for i in range(n)]
        dist = {(pts[i], pts[j]): Fraction(step) * abs(i - j)
                for i in range(n) for j in range(n)}
        return ControlSpace(pts, dist, check=False)

    def __contains__(self, p) -> bool:
        return p in set(self.points)

    def __repr__(self):  # pragma: no cover
        return f"ControlSpace({len(self.points)} points)"


@dataclass(frozen=True)
class GeometricModule:
    """Finitely generated free module spread over positions.

    ``positions[i]`` is the label of the i-th basis vector; a label may
    be a space point or a ``(group element, point)`` pair.  Finite
    support and local finiteness are automatic for finite data.
    """

    positions: Tuple[object, ...]

    @property
    def rank(self) -> int:
        return len(self.positions)

    def rank_at(self, pos) -> int:
        return sum(1 for p in self.positions if p == pos)

    def support(self) -> List[object]:
        seen = []
        for p in self.positions:
            if p not in seen:
                seen.append(p)
        return seen


@dataclass
class ControlledMorphism:
    """Matrix between positioned modules, with derived support."""

    source: GeometricModule
    target: GeometricModule
    matrix: IntMatrix

    def __post_init__(self):
        if (self.matrix.rows, self.matrix.cols) != (self.target.rank, self.source.rank):
            raise InputError("controlled morphism shape mismatch")

    def support(self) -> Set[Tuple[object, object]]:
        return {(self.target.positions[i], self.source.positions[j])
                for (i, j) in self.matrix.entries}

    def compose(self, other: "ControlledMorphism") -> "ControlledMorphism":
        if other.target.positions != self.source.positions:
            raise InputError("composition endpoint mismatch")
        return ControlledMorphism(other.source, self.target, self.matrix @ other.matrix)

    def dual(self) -> "ControlledMorphism":
        return ControlledMorphism(self.target, self.source, self.matrix.transpose())

    @staticmethod
    def identity(module: GeometricModule) -> "ControlledMorphism":
        return ControlledMorphism(module, module, IntMatrix.identity(module.rank))


def _split_position(pos) -> Tuple[Optional[object], object]:
    """Split a position into (group part or None, space part)."""
    if isinstance(pos, GPos):
        return pos.g, pos.z
    return None, pos


def check_control(phi: ControlledMorphism, eps: Optional[Fraction],
                  S: Optional[FiniteSubset], space: ControlSpace,
                  backend: Optional[GroupBackend] = None) -> bool:
    """(eps, S)-control: every support pair moves at most ``eps`` in the
    space and by a letter of ``S`` in the group.

    ``eps=None`` checks S-control only; ``S=None`` checks eps-control
    only (the (eps,G) degeneration).
    """
    s_set = set(S.elements) if S is not None else None
    for (tp, sp) in phi.support():
        tg, tz = _split_position(tp)
        sg, sz = _split_position(sp)
        if eps is not None and space.d(tz, sz) > eps:
            return False
        if s_set is not None:
            if tg is None or sg is None or backend is None:
                raise InputError("group control needs group-labeled positions and a backend")
            if backend.mul(backend.inv(tg), sg) not in s_set:
                return False
    return True


def max_displacement(phi: ControlledMorphism, space: ControlSpace) -> Fraction:
    """Smallest eps such that the morphism is eps-controlled over the space."""
    out = Fraction(0)
    for (tp, sp) in phi.support():
        _, tz = _split_position(tp)
        _, sz = _split_position(sp)
        d = space.d(tz, sz)
        if d > out:
            out = d
    return out


def pushforward_module(module: GeometricModule, f: Dict[object, object]) -> GeometricModule:
    positions = []
    for p in module.positions:
        g, z = _split_position(p)
        if z not in f:
            raise InputError(f"pushforward map undefined at {z!r}")
        positions.append(f[z] if g is None else (g, f[z]))
    return GeometricModule(tuple(positions))


def pushforward(phi: ControlledMorphism, f: Dict[object, object]) -> ControlledMorphism:
    """Relabel positions along a map of control spaces.

    Blocks of positions with a common image become direct summands at
    that image; the matrix itself is unchanged.
    """
    return ControlledMorphism(pushforward_module(phi.source, f),
                              pushforward_module(phi.target, f),
                              phi.matrix.copy())


@dataclass
class EquivariantMorphism:
    """S-indexed convolution data for a ``G``-equivariant morphism.

    ``letters[a]`` is the block of the morphism from the source fiber at
    coset ``g*a`` to the target fiber at ``g`` (independent of ``g``);
    reconstruction of the full morphism at ``(g, g')`` depends only on
    ``g^{-1} g'``.
    """

    backend: GroupBackend
    source: GeometricModule  # fiber over the identity coset, Z-positions
    target: GeometricModule
    letters: Dict[object, IntMatrix]

    def __post_init__(self):
        clean = {}
        for a, m in self.letters.items():
            ca = self.backend.canonical(a)
            if (m.rows, m.cols) != (self.target.rank, self.source.rank):
                raise InputError(f"letter {a!r} block shape mismatch")
            if not m.is_zero():
                clean[ca] = m
        self.letters = clean

    def letter_support(self) -> List[object]:
        return sorted(self.letters, key=repr)

    def block(self, a) -> IntMatrix:
        return self.letters.get(self.backend.canonical(a),
                                IntMatrix.zeros(self.target.rank, self.source.rank))

    def convolve(self, other: "EquivariantMorphism",
                 allowed: Optional[FiniteSubset] = None) -> "EquivariantMorphism":
        """Composite ``self o other``: ``(psi' o psi)_c = sum over ab=c``."""
        if other.target.positions != self.source.positions:
            raise InputError("convolution endpoint mismatch")
        acc: Dict[object, IntMatrix] = {}
        for a, ma in self.letters.items():
            for b, mb in other.letters.items():
                c = self.backend.mul(a, b)
                if allowed is not None and c not in allowed:
                    raise HorizonExceeded(f"product letter {c!r} escapes the allowed ball")
                prod = ma @ mb
                if c in acc:
                    acc[c] = acc[c] + prod
                else:
                    acc[c] = prod
        return EquivariantMorphism(self.backend, other.source, self.target, acc)

    def __add__(self, other: "EquivariantMorphism") -> "EquivariantMorphism":
        acc = dict(self.letters)
        for a, m in other.letters.items():
            acc[a] = acc[a] + m if a in acc else m
        return EquivariantMorphism(self.backend, self.source, self.target, acc)

    def dual(self) -> "EquivariantMorphism":
        """Letterwise dual: ``(f^-*)_a = (f_{a^{-1}})^-*``."""
        return EquivariantMorphism(
            self.backend, self.target, self.source,
            {self.backend.inv(a): m.transpose() for a, m in self.letters.items()})

    def expand(self, cosets: Iterable[object]) -> ControlledMorphism:
        """Explicit morphism over positions ``(g, z)`` for ``g`` in cosets."""
        gs = [self.backend.canonical(g) for g in cosets]
        gset = set(gs)
        src_pos = tuple(GPos(g, z) for g in gs for z in self.source.positions)
        tgt_pos = tuple(GPos(g, z) for g in gs for z in self.target.positions)
        m = IntMatrix.zeros(len(tgt_pos), len(src_pos))
        sr, tr = self.source.rank, self.target.rank
        for ti, g in enumerate(gs):
            for a, blk in self.letters.items():
                ga = self.backend.mul(g, a)
                if ga not in gset:
                    continue
                si = gs.index(ga)
                for (i, j), v in blk.entries.items():
                    m.entries[(ti * tr + i, si * sr + j)] = v
        return ControlledMorphism(GeometricModule(src_pos), GeometricModule(tgt_pos), m)

    @staticmethod
    def identity(backend: GroupBackend, module: GeometricModule) -> "EquivariantMorphism":
        return EquivariantMorphism(backend, module, module,
                                   {backend.identity(): IntMatrix.identity(module.rank)})
