"""Subgroup algebra by backtrack search over stabilizer chains.

All searches run a depth-first scan over base images of the ambient group's
chain, with search-specific pruning:

* intersection tracks a parallel coset in the second group's chain (rebased
  to the same base) so both chains prune;
* normalizer and transporter searches prune by orbit-size fingerprints of
  the target subgroup and re-order the base so points in small (especially
  fixed) orbits are decided first;
* centralizer and conjugation-of-tuples searches propagate forced images:
  fixing one point of an orbit of the constraint group forces the whole
  orbit, which collapses the tree.

Subgroup-valued searches grow a known subgroup ``R`` of the result as
elements are found and only visit branches whose first base image is
minimal in its R-orbit, which keeps leaf counts near |G : result|.

Everything is deterministic: candidate images are visited in ascending
order and the resource guard refuses out-of-scale inputs loudly.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import InputError, LimitError, check_backtrack_guard
from .perms import Perm, PermGroup, StabChain


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------

def _prepared_chain(G: PermGroup, base_order: Sequence[int] | None) -> StabChain:
    """Chain of G, rebased to prefer ``base_order``, with idle levels dropped."""
    if base_order is None:
        chain = G.chain()
    else:
        chain = G.with_base(base_order).chain()
    chain.levels = [lvl for lvl in chain.levels
                    if len(lvl.orbit_list) > 1 or lvl.gens]
    return chain

def _orbit_size_key(S: PermGroup) -> list[int]:
    """Points ordered by the size of their S-orbit (fixed points first)."""
    sizes = np.zeros(S.degree, dtype=np.int64)
    for orb in S.orbits():
        sizes[list(orb)] = len(orb)
    return sorted(range(S.degree), key=lambda p: (int(sizes[p]), p))

def _orbit_sizes(S: PermGroup) -> np.ndarray:
    sizes = np.zeros(S.degree, dtype=np.int64)
    for orb in S.orbits():
        sizes[list(orb)] = len(orb)
    return sizes


class _Collector:
    """Accumulates found elements into a growing subgroup with its own chain."""

    def __init__(self, degree: int, seed_gens: Sequence[Perm] = ()):
        self.degree = degree
        self.chain = StabChain(degree)
        self.gens: list[Perm] = []
        for g in seed_gens:
            self.add(g)

    def add(self, g: Perm) -> bool:
        if self.chain.contains(g):
            return False
        self.gens.append(g)
        self.chain.add_generator(g)
        return True

    def orbit_min(self, p: int) -> int:
        if not self.gens:
            return p
        seen = {p}
        frontier = [p]
        m = p
        while frontier:
            q = frontier.pop()
            for g in self.gens:
                r = g(q)
                if r not in seen:
                    seen.add(r)
                    m = min(m, r)
                    frontier.append(r)
        return m

    def group(self, parent: PermGroup | None = None) -> PermGroup:
        return PermGroup(self.degree, self.gens, order_hint=self.chain.order(),
                         parent=parent)


# --------------------------------------------------------------------------
# intersection
# --------------------------------------------------------------------------

def intersection(G: PermGroup, H: PermGroup, override: bool = False) -> PermGroup:
    """The largest common subgroup of G and H (exact backtrack)."""
    if G.degree != H.degree:
        raise InputError("intersection requires equal degrees")
    if G.is_trivial() or H.is_trivial():
        return PermGroup.trivial(G.degree)
    if G.order() > H.order():
        G, H = H, G
    if G.is_subgroup_of(H):
        return PermGroup(G.degree, G.generators, order_hint=G.order(), parent=G)
    check_backtrack_guard(G.degree, G.order(), override, "intersection")
    chainG = _prepared_chain(G, None)
    base = chainG.base()
    chainH = H.with_base(base).chain()
    # align H's levels with G's base (extra H levels only matter for membership)
    h_levels = {lvl.base: lvl for lvl in chainH.levels}
    coll = _Collector(G.degree)
    n_levels = len(chainG.levels)

    def rec(i: int, sG: Perm | None, sHinv: Perm | None) -> None:
        if i == n_levels:
            g = sG if sG is not None else Perm.identity(G.degree)
            if not g.is_identity() and chainH.contains(g):
                coll.add(g)
            return
        lvl = chainG.levels[i]
        hlvl = h_levels.get(lvl.base)
        cands = []
        for q in lvl.orbit_list:
            m = q if sG is None else sG(q)
            if hlvl is not None:
                r = m if sHinv is None else sHinv(m)
                if r not in hlvl.tree:
                    continue
            cands.append((m, q))
        cands.sort()
        for m, q in cands:
            if i == 0 and coll.orbit_min(m) != m:
                continue
            u = lvl.rep(q)
            sG2 = sG if u is None else (u if sG is None else u * sG)
            if hlvl is not None:
                r = m if sHinv is None else sHinv(m)
                v = hlvl.rep(r)
                sHinv2 = sHinv if v is None else (
                    v.inverse() if sHinv is None else sHinv * v.inverse())
            else:
                sHinv2 = sHinv
            rec(i + 1, sG2, sHinv2)

    rec(0, None, None)
    return coll.group(parent=G)


# --------------------------------------------------------------------------
# normalizer / centralizer
# --------------------------------------------------------------------------

def normalizer(G: PermGroup, S: PermGroup, override: bool = False) -> PermGroup:
    """N_G(S) by backtrack with orbit-fingerprint pruning."""
    if G.degree != S.degree:
        raise InputError("normalizer requires equal degrees")
    if S.is_trivial():
        return PermGroup(G.degree, G.generators, order_hint=G.known_order(), parent=G)
    check_backtrack_guard(G.degree, G.order(), override, "normalizer search")
    sizes = _orbit_sizes(S)
    chain = _prepared_chain(G, _orbit_size_key(S))
    seed = [g for g in S.generators if G.contains(g)]
    coll = _Collector(G.degree, seed_gens=seed)
    n_levels = len(chain.levels)
    s_gens = list(S.generators)

    def leaf_ok(g: Perm) -> bool:
        return all(S.contains(x.conj(g)) for x in s_gens)

    def rec(i: int, s: Perm | None) -> None:
        if i == n_levels:
            g = s if s is not None else Perm.identity(G.degree)
            if not g.is_identity() and leaf_ok(g):
                coll.add(g)
            return
        lvl = chain.levels[i]
        want = sizes[lvl.base]
        cands = []
        for q in lvl.orbit_list:
            m = q if s is None else s(q)
            if sizes[m] != want:
                continue
            cands.append((m, q))
        cands.sort()
        for m, q in cands:
            if i == 0 and coll.orbit_min(m) != m:
                continue
            u = lvl.rep(q)
            s2 = s if u is None else (u if s is None else u * s)
            rec(i + 1, s2)

    rec(0, None)
    return coll.group(parent=G)


def _propagation_search(G: PermGroup, relations: list[tuple[Perm, Perm]],
                        first_only: bool, base_order: list[int] | None,
                        override: bool, what: str,
                        seed: Sequence[Perm] = ()) -> list[Perm] | PermGroup:
    """Search for g in G with x * g == g * y for every (x, y) in relations.

    Covers centralizers (y = x) and conjugation of generator tuples.  The
    defining relation forces images: if p -> b then p^x -> b^y, so whole
    orbits of <x's> collapse once one point is chosen.
    """
    check_backtrack_guard(G.degree, G.order(), override, what)
    chain = _prepared_chain(G, base_order)
    n = G.degree
    n_levels = len(chain.levels)
    pmap = np.full(n, -1, dtype=np.int64)
    imap = np.full(n, -1, dtype=np.int64)
    coll = _Collector(n, seed_gens=seed) if not first_only else None
    hits: list[Perm] = []

    def assign(p: int, b: int, trail: list[int]) -> bool:
        queue = deque([(p, b)])
        while queue:
            p, b = queue.popleft()
            cur = pmap[p]
            if cur != -1:
                if cur != b:
                    return False
                continue
            if imap[b] != -1:
                return False
            pmap[p] = b
            imap[b] = p
            trail.append(p)
            for x, y in relations:
                queue.append((x(p), y(b)))
        return True

    def undo(trail: list[int]) -> None:
        for p in trail:
            imap[pmap[p]] = -1
            pmap[p] = -1

    def rec(i: int, s: Perm | None) -> bool:
        if i == n_levels:
            g = s if s is not None else Perm.identity(n)
            ok = all((x * g) == (g * y) for x, y in relations)
            if ok:
                if first_only:
                    hits.append(g)
                    return True
                if not g.is_identity():
                    coll.add(g)
            return False
        lvl = chain.levels[i]
        b0 = lvl.base
        forced = pmap[b0]
        cands = []
        for q in lvl.orbit_list:
            m = q if s is None else s(q)
            if forced != -1 and m != forced:
                continue
            if forced == -1 and imap[m] != -1:
                continue
            cands.append((m, q))
        cands.sort()
        for m, q in cands:
            if not first_only and i == 0 and coll.orbit_min(m) != m:
                continue
            trail: list[int] = []
            if not assign(b0, m, trail):
                undo(trail)
                continue
            u = lvl.rep(q)
            s2 = s if u is None else (u if s is None else u * s)
            done = rec(i + 1, s2)
            undo(trail)
            if done:
                return True
        return False

    rec(0, None)
    if first_only:
        return hits
    return coll.group(parent=G)


def centralizer(G: PermGroup, S: PermGroup | Perm, override: bool = False) -> PermGroup:
    """C_G(S) for a subgroup or a single permutation."""
    if isinstance(S, Perm):
        S = PermGroup(G.degree, [S])
    if G.degree != S.degree:
        raise InputError("centralizer requires equal degrees")
    if S.is_trivial():
        return PermGroup(G.degree, G.generators, order_hint=G.known_order(), parent=G)
    relations = [(x, x) for x in S.generators]
    return _propagation_search(G, relations, first_only=False,
                               base_order=_orbit_size_key(S), override=override,
                               what="centralizer search")


def tuple_transporter(G: PermGroup, xs: Sequence[Perm], ys: Sequence[Perm],
                      override: bool = False) -> Perm | None:
    """Some g in G with xs[i]^g == ys[i] for all i, or None."""
    if len(xs) != len(ys):
        raise InputError("tuple transporter needs equally long tuples")
    relations = list(zip(xs, ys))
    hits = _propagation_search(G, relations, first_only=True,
                               base_order=None, override=override,
                               what="conjugacy search")
    return hits[0] if hits else None


def subgroup_transporter(G: PermGroup, A: PermGroup, B: PermGroup,
                         override: bool = False) -> Perm | None:
    """Some g in G with A^g == B, or None if the subgroups are not conjugate."""
    if not (G.degree == A.degree == B.degree):
        raise InputError("transporter requires equal degrees")
    if A.order() != B.order():
        return None
    sizes_a = _orbit_sizes(A)
    sizes_b = _orbit_sizes(B)
    if sorted(sizes_a.tolist()) != sorted(sizes_b.tolist()):
        return None
    check_backtrack_guard(G.degree, G.order(), override, "conjugacy search")
    chain = _prepared_chain(G, _orbit_size_key(A))
    n_levels = len(chain.levels)
    a_gens = list(A.generators)

    hit: list[Perm] = []

    def rec(i: int, s: Perm | None) -> bool:
        if i == n_levels:
            g = s if s is not None else Perm.identity(G.degree)
            if all(B.contains(x.conj(g)) for x in a_gens):
                hit.append(g)
                return True
            return False
        lvl = chain.levels[i]
        want = sizes_a[lvl.base]
        cands = []
        for q in lvl.orbit_list:
            m = q if s is None else s(q)
            if sizes_b[m] != want:
                continue
            cands.append((m, q))
        cands.sort()
        for m, q in cands:
            u = lvl.rep(q)
            s2 = s if u is None else (u if s is None else u * s)
            if rec(i + 1, s2):
                return True
        return False

    rec(0, None)
    return hit[0] if hit else None


# --------------------------------------------------------------------------
# stabilizers of labelled structures
# --------------------------------------------------------------------------

def stabilizer_of(G: PermGroup, value: Hashable,
                  act: Callable[[Hashable, Perm], Hashable],
                  orbit_cap: int = 1_000_000) -> tuple[PermGroup, dict, list]:
    """Stabilizer in G of ``value`` under the action ``act``.

    Returns (stabilizer, orbit index map, transversal words).  The orbit is
    enumerated breadth-first with representative words; Schreier generators
    are folded into the stabilizer until its order reaches |G| / |orbit|,
    which certifies completeness.

    ``act`` must satisfy act(act(v, g), h) == act(v, g * h).
    """
    gens = list(G.generators)
    index: dict = {value: 0}
    values: list = [value]
    words: list[tuple[int, ...]] = [()]
    edges: list[tuple[int, int]] = []   # (source index, generator index)
    frontier = deque([0])
    while frontier:
        i = frontier.popleft()
        for gi, g in enumerate(gens):
            w = act(values[i], g)
            if w not in index:
                if len(values) >= orbit_cap:
                    raise LimitError(
                        f"orbit of labelled structure exceeded cap {orbit_cap}")
                index[w] = len(values)
                values.append(w)
                words.append(words[i] + (gi,))
                frontier.append(index[w])
            else:
                edges.append((i, gi))
    orbit_len = len(values)
    total = G.order()
    if total % orbit_len:
        raise InputError("orbit length does not divide the group order")
    target = total // orbit_len

    def word_perm(word: tuple[int, ...]) -> Perm | None:
        u = None
        for gi in word:
            u = gens[gi] if u is None else u * gens[gi]
        return u

    coll = _Collector(G.degree)
    if target > 1:
        for i, gi in edges:
            u = word_perm(words[i])
            g = gens[gi]
            s = u * g if u is not None else g
            j = index[act(values[i], g)]
            v = word_perm(words[j])
            if v is not None:
                s = s * v.inverse()
            coll.add(s)
            if coll.chain.order() == target:
                break
        if coll.chain.order() != target:
            raise InputError("Schreier generators did not close the stabilizer")
    return coll.group(parent=G), index, words


def setwise_stabilizer(G: PermGroup, block: Sequence[int],
                       override: bool = False) -> PermGroup:
    """Setwise stabilizer of a point set (exact; orbit of the set is guarded)."""
    pts = frozenset(int(p) for p in block)
    if not pts or not all(0 <= p < G.degree for p in pts):
        raise InputError("block must be a non-empty set of valid points")
    check_backtrack_guard(G.degree, G.order(), override, "setwise stabilizer")

    def act(v: frozenset, g: Perm) -> frozenset:
        return frozenset(int(g.img[p]) for p in v)

    stab, _, _ = stabilizer_of(G, pts, act)
    return stab


def point_stabilizer(G: PermGroup, point: int) -> PermGroup:
    return G.point_stabilizer(point)


# --------------------------------------------------------------------------
# brute-force oracles (used by tests, kept here so they share conventions)
# --------------------------------------------------------------------------

def brute_filter(G: PermGroup, pred: Callable[[Perm], bool],
                 cap: int = 200_000) -> list[Perm]:
    """All elements of G satisfying ``pred`` by exhaustive enumeration."""
    return sorted((g for g in G.elements(cap) if pred(g)),
                  key=lambda g: g.key())
