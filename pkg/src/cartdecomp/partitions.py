"""Partitions of a point set and Cartesian decompositions.

A Cartesian decomposition of a set is a family of partitions such that
picking one block from each always intersects in exactly one point; that
identifies the set with the product of the partitions.  The degenerate
index-1 family {partition into singletons} satisfies the axiom and is
accepted but flagged, so callers can keep reports honest.

All values are immutable and all operations pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .perms import Perm

_ID_DTYPE = np.int32


def _canonical_ids(arr: np.ndarray) -> np.ndarray:
    """Relabel class ids by order of first occurrence (0-based, dense)."""
    uniq, first_idx, inv = np.unique(arr, return_index=True, return_inverse=True)
    order = np.argsort(first_idx, kind="stable")
    rank = np.empty(len(uniq), dtype=_ID_DTYPE)
    rank[order] = np.arange(len(uniq), dtype=_ID_DTYPE)
    return rank[inv].astype(_ID_DTYPE)


class Partition:
    """A partition of {0..degree-1}; canonical form sorts blocks by minimum."""

    __slots__ = ("degree", "block_of", "_blocks", "_hash")

    def __init__(self, degree: int, block_of: np.ndarray):
        if block_of.shape != (degree,):
            raise InputError("partition label array has wrong length")
        self.degree = degree
        arr = _canonical_ids(np.asarray(block_of))
        arr.setflags(write=False)
        self.block_of = arr
        self._blocks: tuple[tuple[int, ...], ...] | None = None
        self._hash = None

    @staticmethod
    def from_blocks(degree: int, blocks: Iterable[Sequence[int]]) -> "Partition":
        arr = np.full(degree, -1, dtype=np.int64)
        for i, blk in enumerate(blocks):
            if len(blk) == 0:
                raise InputError("partition blocks must be non-empty")
            for p in blk:
                if not (0 <= p < degree):
                    raise InputError(f"point {p} out of range for degree {degree}")
                if arr[p] != -1:
                    raise InputError(f"point {p} appears in two blocks")
                arr[p] = i
        if (arr == -1).any():
            missing = int(np.nonzero(arr == -1)[0][0])
            raise InputError(f"point {missing} is not covered by any block")
        return Partition(degree, arr)

    @staticmethod
    def discrete(degree: int) -> "Partition":
        return Partition(degree, np.arange(degree, dtype=np.int64))

    @staticmethod
    def one_block(degree: int) -> "Partition":
        return Partition(degree, np.zeros(degree, dtype=np.int64))

    @property
    def num_blocks(self) -> int:
        return int(self.block_of.max()) + 1 if self.degree else 0

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        if self._blocks is None:
            out: list[list[int]] = [[] for _ in range(self.num_blocks)]
            for p, b in enumerate(self.block_of.tolist()):
                out[b].append(p)
            self._blocks = tuple(tuple(blk) for blk in out)
        return self._blocks

    def block_containing(self, point: int) -> tuple[int, ...]:
        return self.blocks()[int(self.block_of[point])]

    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks())

    def is_discrete(self) -> bool:
        return self.num_blocks == self.degree

    def is_one_block(self) -> bool:
        return self.num_blocks == 1

    def apply(self, g: Perm) -> "Partition":
        """Image partition: the block containing p^g is (block of p)^g."""
        if g.degree != self.degree:
            raise InputError("degree mismatch applying permutation to partition")
        arr = np.empty(self.degree, dtype=_ID_DTYPE)
        arr[g.img] = self.block_of
        return Partition(self.degree, arr)

    def is_invariant_under(self, g: Perm) -> bool:
        return self.apply(g) == self

    def refines(self, other: "Partition") -> bool:
        """True iff every block of self lies inside a block of other."""
        if other.degree != self.degree:
            raise InputError("degree mismatch")
        rep_other = np.full(self.num_blocks, -1, dtype=np.int64)
        mine = self.block_of
        theirs = other.block_of
        for p in range(self.degree):
            b = mine[p]
            if rep_other[b] == -1:
                rep_other[b] = theirs[p]
            elif rep_other[b] != theirs[p]:
                return False
        return True

    def join(self, other: "Partition") -> "Partition":
        """Finest partition coarser than both (union-find over blocks)."""
        if other.degree != self.degree:
            raise InputError("degree mismatch")
        parent = list(range(self.num_blocks))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        rep = {}
        for p in range(self.degree):
            b = find(int(self.block_of[p]))
            q = int(other.block_of[p])
            if q in rep:
                r = find(rep[q])
                if r != b:
                    parent[r] = b
            else:
                rep[q] = b
        arr = np.array([find(int(b)) for b in self.block_of], dtype=np.int64)
        return Partition(self.degree, arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return (self.degree == other.degree
                and self.block_of.tobytes() == other.block_of.tobytes())

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.block_of.tobytes())
        return self._hash

    def sort_key(self) -> tuple:
        return (self.num_blocks, self.block_of.tobytes())

    def __repr__(self) -> str:
        if self.degree > 40:
            return f"Partition(degree={self.degree}, blocks={self.num_blocks})"
        inner = "|".join(" ".join(map(str, b)) for b in self.blocks())
        return f"Partition[{inner}]"


def infimum(parts: Sequence[Partition]) -> Partition:
    """Meet of the given partitions: all non-empty intersections of blocks."""
    if not parts:
        raise InputError("infimum of an empty family is undefined")
    degree = parts[0].degree
    for p in parts:
        if p.degree != degree:
            raise InputError("infimum requires a shared degree")
    key = parts[0].block_of.astype(np.int64)
    for p in parts[1:]:
        key = key * (int(p.block_of.max()) + 1) + p.block_of
        key = _canonical_ids(key).astype(np.int64)
    return Partition(degree, key)


@dataclass(frozen=True)
class CartesianWitness:
    """Why a family of partitions fails the one-point-intersection axiom."""

    kind: str                      # "product_mismatch" | "collision" | "empty_selection"
    detail: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.detail}


class CartesianDecomposition:
    """A family of partitions whose block selections always meet in one point."""

    __slots__ = ("degree", "partitions", "_hash")

    def __init__(self, partitions: Sequence[Partition], check: bool = True):
        if not partitions:
            raise InputError("a Cartesian decomposition needs at least one partition")
        degree = partitions[0].degree
        parts = tuple(sorted(set(partitions), key=Partition.sort_key))
        if len(parts) != len(partitions):
            raise InputError("repeated partition in Cartesian decomposition")
        for p in parts:
            if p.degree != degree:
                raise InputError("partitions of a decomposition share the degree")
        if check:
            ok, witness = check_cartesian(parts)
            if not ok:
                raise InputError(
                    f"not a Cartesian decomposition: {witness.to_dict()}")
        self.degree = degree
        self.partitions = parts
        self._hash = None

    @property
    def index(self) -> int:
        return len(self.partitions)

    def is_degenerate(self) -> bool:
        """The flagged index-1 family {partition into singletons}."""
        return self.index == 1 and self.partitions[0].is_discrete()

    def sizes(self) -> tuple[int, ...]:
        return tuple(p.num_blocks for p in self.partitions)

    def is_homogeneous(self) -> bool:
        return len(set(self.sizes())) == 1

    def selection_at(self, point: int) -> tuple[int, ...]:
        """Block ids (one per partition) of the blocks containing ``point``."""
        return tuple(int(p.block_of[point]) for p in self.partitions)

    def apply(self, g: Perm) -> "CartesianDecomposition":
        return CartesianDecomposition([p.apply(g) for p in self.partitions],
                                      check=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CartesianDecomposition):
            return NotImplemented
        return self.degree == other.degree and self.partitions == other.partitions

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.partitions)
        return self._hash

    def __repr__(self) -> str:
        return (f"CartesianDecomposition(degree={self.degree}, "
                f"sizes={self.sizes()})")


def check_cartesian(parts: Sequence[Partition]) -> tuple[bool, CartesianWitness | None]:
    """Decide the axiom with a witness on failure.

    The family is Cartesian iff the map point -> (containing block per
    partition) is a bijection onto the product of the block sets; the cheap
    necessary product-of-sizes test runs first.
    """
    degree = parts[0].degree
    sizes = [p.num_blocks for p in parts]
    if prod(sizes) != degree:
        return False, CartesianWitness(
            "product_mismatch",
            {"block_counts": sizes, "product": prod(sizes), "degree": degree})
    key = parts[0].block_of.astype(np.int64)
    for p in parts[1:]:
        key = key * (int(p.block_of.max()) + 1) + p.block_of
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    dup = np.nonzero(sorted_key[1:] == sorted_key[:-1])[0]
    if dup.size:
        i = int(dup[0])
        p1, p2 = int(order[i]), int(order[i + 1])
        return False, CartesianWitness(
            "collision",
            {"selection": [int(p.block_of[p1]) for p in parts],
             "points": [p1, p2]})
    return True, None


def is_cartesian_decomposition(parts: Sequence[Partition]) -> tuple[bool, CartesianWitness | None]:
    """Witnessed axiom check on a raw family of partitions.

    Repeats are kept (a doubled partition fails with an honest witness: a
    block of size >= 2 yields a selection meeting twice, otherwise the size
    product cannot match the degree).
    """
    if not parts:
        raise InputError("empty family of partitions")
    degree = parts[0].degree
    for p in parts:
        if p.degree != degree:
            raise InputError("partitions must share the degree")
    return check_cartesian(list(parts))


@dataclass(frozen=True)
class DecompositionProperties:
    invariant: bool
    violating_generator: int | None      # index of a generator breaking invariance
    violated_partition: int | None
    transitive: bool
    orbits: tuple[tuple[int, ...], ...]  # orbits on partition indices
    homogeneous: bool
    m: int | None                        # common block count when homogeneous

    def to_dict(self) -> dict:
        return {
            "invariant": self.invariant,
            "violating_generator": self.violating_generator,
            "violated_partition": self.violated_partition,
            "transitive": self.transitive,
            "orbits": [list(o) for o in self.orbits],
            "homogeneous": self.homogeneous,
            "m": self.m,
        }


def decomposition_properties(E: CartesianDecomposition, G) -> DecompositionProperties:
    """Invariance, orbit and homogeneity data of G acting on the partitions."""
    if G.degree != E.degree:
        raise InputError("group and decomposition degrees differ")
    parts = E.partitions
    index_of = {p: i for i, p in enumerate(parts)}
    images: list[list[int]] = []
    for gi, g in enumerate(G.generators):
        row = []
        for pi, p in enumerate(parts):
            q = p.apply(g)
            if q not in index_of:
                return DecompositionProperties(
                    invariant=False, violating_generator=gi, violated_partition=pi,
                    transitive=False, orbits=(), homogeneous=E.is_homogeneous(),
                    m=parts[0].num_blocks if E.is_homogeneous() else None)
            row.append(index_of[q])
        images.append(row)
    # orbits on partition labels
    seen: set[int] = set()
    orbits: list[tuple[int, ...]] = []
    for start in range(len(parts)):
        if start in seen:
            continue
        orb = {start}
        frontier = [start]
        while frontier:
            x = frontier.pop()
            for row in images:
                y = row[x]
                if y not in orb:
                    orb.add(y)
                    frontier.append(y)
        seen |= orb
        orbits.append(tuple(sorted(orb)))
    homog = E.is_homogeneous()
    return DecompositionProperties(
        invariant=True, violating_generator=None, violated_partition=None,
        transitive=len(orbits) == 1, orbits=tuple(orbits),
        homogeneous=homog, m=parts[0].num_blocks if homog else None)
