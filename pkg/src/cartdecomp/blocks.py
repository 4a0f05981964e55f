"""Block systems (invariant partitions) of transitive groups.

Minimal block systems come from the classical seeded-pair congruence
closure: for each point p != 0, the finest G-congruence identifying 0 and
p.  Every G-invariant partition is a join of such seeded congruences (the
congruence generated by the pairs inside the block of 0), so closing the
seeded family under joins enumerates the full lattice exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .partitions import Partition
from .perms import PermGroup


def seeded_congruence(G: PermGroup, a: int, b: int) -> Partition:
    """Finest G-invariant partition whose blocks merge points a and b."""
    n = G.degree
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    stack: list[tuple[int, int]] = []

    def union(x: int, y: int) -> None:
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry
            stack.append((x, y))

    union(a, b)
    gens = G.generators
    while stack:
        x, y = stack.pop()
        for g in gens:
            union(g(x), g(y))
    return Partition(n, np.array([find(p) for p in range(n)], dtype=np.int64))


def minimal_block_systems(G: PermGroup) -> list[Partition]:
    """All minimal non-trivial block systems of a transitive group."""
    if not G.is_transitive():
        raise InputError("block systems are defined for transitive groups only")
    n = G.degree
    seeds: list[Partition] = []
    seen = set()
    for p in range(1, n):
        part = seeded_congruence(G, 0, p)
        if part.is_one_block():
            continue
        if part not in seen:
            seen.add(part)
            seeds.append(part)
    minimal = []
    for part in seeds:
        if not any(other != part and other.refines(part) for other in seeds):
            minimal.append(part)
    minimal.sort(key=Partition.sort_key)
    return minimal


def all_block_systems(G: PermGroup, include_trivial: bool = False) -> list[Partition]:
    """Every G-invariant partition of the point set (transitive G).

    Obtained as the join closure of the seeded-pair congruences; with
    ``include_trivial`` the singleton and one-block partitions are added.
    """
    if not G.is_transitive():
        raise InputError("block systems are defined for transitive groups only")
    n = G.degree
    seeds = []
    seen: set[Partition] = set()
    for p in range(1, n):
        part = seeded_congruence(G, 0, p)
        if part not in seen:
            seen.add(part)
            seeds.append(part)
    # close under binary joins
    worklist = list(seeds)
    while worklist:
        cur = worklist.pop()
        for other in list(seen):
            j = cur.join(other)
            if j not in seen:
                seen.add(j)
                worklist.append(j)
    out = [p for p in seen if not p.is_one_block() and not p.is_discrete()]
    if include_trivial:
        out.append(Partition.discrete(n))
        out.append(Partition.one_block(n))
    out.sort(key=Partition.sort_key)
    return out


def is_block_system(G: PermGroup, part: Partition) -> bool:
    """True iff the partition is invariant under every generator."""
    if part.degree != G.degree:
        raise InputError("degree mismatch")
    return all(part.apply(g) == part for g in G.generators)
