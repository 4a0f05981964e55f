"""Permutations and permutation groups with stabilizer chains.

Permutations act on the right: the image of point ``p`` under ``g`` is
``g(p)``, and ``(g * h)(p) == h(g(p))``.  Points are 0-based throughout.

Groups carry a lazily built stabilizer chain (base, strong generators,
Schreier trees) providing order, membership and transversals.  The chain is
built by a deterministic Schreier-Sims pass; when the caller already knows
the order from an exact outside computation (for instance the order of a
faithful image), a seeded randomized build is used and the known order is
the deterministic completeness certificate: the product of the basic orbit
lengths can never exceed the group order, so equality proves the chain.
"""

from __future__ import annotations

from collections import deque
from math import gcd
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InputError

_PERM_DTYPE = np.int32


class Perm:
    """A permutation of {0..degree-1} stored as an image array."""

    __slots__ = ("img", "_hash")

    def __init__(self, images, check: bool = True):
        img = np.asarray(images, dtype=_PERM_DTYPE)
        if check:
            if img.ndim != 1:
                raise InputError("permutation images must be a flat sequence")
            n = img.shape[0]
            if n and (img.min() < 0 or img.max() >= n):
                raise InputError("permutation image out of range")
            seen = np.zeros(n, dtype=bool)
            seen[img] = True
            if not seen.all():
                raise InputError("images do not form a bijection")
        img.setflags(write=False)
        self.img = img
        self._hash = None

    @property
    def degree(self) -> int:
        return self.img.shape[0]

    @staticmethod
    def identity(degree: int) -> "Perm":
        return Perm(np.arange(degree, dtype=_PERM_DTYPE), check=False)

    @staticmethod
    def from_cycles(degree: int, cycles: Iterable[Sequence[int]]) -> "Perm":
        img = np.arange(degree, dtype=_PERM_DTYPE)
        for cyc in cycles:
            for a, b in zip(cyc, cyc[1:]):
                img[a] = b
            if cyc:
                img[cyc[-1]] = cyc[0]
        return Perm(img)

    def __mul__(self, other: "Perm") -> "Perm":
        # apply self first, then other
        return Perm(other.img[self.img], check=False)

    def inverse(self) -> "Perm":
        inv = np.empty_like(self.img)
        inv[self.img] = np.arange(self.degree, dtype=_PERM_DTYPE)
        return Perm(inv, check=False)

    def __pow__(self, k: int) -> "Perm":
        if k < 0:
            return self.inverse() ** (-k)
        result = Perm.identity(self.degree)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, point: int) -> int:
        return int(self.img[point])

    def conj(self, g: "Perm") -> "Perm":
        """Return g^-1 * self * g."""
        return Perm(g.img[self.img[g.inverse().img]], check=False)

    def commutes_with(self, other: "Perm") -> bool:
        return bool((self.img[other.img] == other.img[self.img]).all())

    def is_identity(self) -> bool:
        return bool((self.img == np.arange(self.degree, dtype=_PERM_DTYPE)).all())

    def moved_points(self) -> list[int]:
        return np.nonzero(self.img != np.arange(self.degree, dtype=_PERM_DTYPE))[0].tolist()

    def first_moved(self) -> int | None:
        diff = np.nonzero(self.img != np.arange(self.degree, dtype=_PERM_DTYPE))[0]
        return int(diff[0]) if diff.size else None

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        seen = np.zeros(self.degree, dtype=bool)
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            p = int(self.img[start])
            while p != start:
                cyc.append(p)
                seen[p] = True
                p = int(self.img[p])
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(cyc))
        return out

    def order(self) -> int:
        n = 1
        for cyc in self.cycles():
            n = n * len(cyc) // gcd(n, len(cyc))
        return n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Perm):
            return NotImplemented
        return self.degree == other.degree and bool((self.img == other.img).all())

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.img.tobytes())
        return self._hash

    def key(self) -> bytes:
        return self.img.tobytes()

    def __repr__(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc)


def _first_moved_preferring(g: Perm, preferred: Sequence[int]) -> int:
    for b in preferred:
        if g(b) != b:
            return b
    fm = g.first_moved()
    assert fm is not None
    return fm


class _Level:
    """One level of a stabilizer chain: base point, orbit and Schreier tree."""

    __slots__ = ("base", "gens", "tree", "orbit_list", "processed")

    def __init__(self, base: int):
        self.base = base
        self.gens: list[Perm] = []          # strong generators moving this level
        self.tree: dict[int, tuple[int, Perm] | None] = {base: None}
        self.orbit_list: list[int] = [base]
        self.processed: set[tuple[int, int]] = set()  # (point, id(gen)) pairs

    def rep(self, point: int) -> Perm | None:
        """Transversal element u with base^u == point (None means identity)."""
        path = []
        p = point
        while True:
            edge = self.tree[p]
            if edge is None:
                break
            parent, gen = edge
            path.append(gen)
            p = parent
        u = None
        for gen in reversed(path):
            u = gen if u is None else u * gen
        return u


class StabChain:
    """Stabilizer chain for a group given by generators.

    ``base_hint`` forces a prefix of the base (levels for hinted points are
    created eagerly, so for instance a point stabilizer is exactly the part
    of the chain below level 0).  Further base points are the smallest moved
    point of the triggering residue, so chains are reproducible.
    """

    def __init__(self, degree: int, base_hint: Sequence[int] = ()):
        self.degree = degree
        self.levels: list[_Level] = [_Level(b) for b in base_hint]
        self._n_hinted = len(self.levels)

    # -- queries -------------------------------------------------------------

    def order(self) -> int:
        n = 1
        for lvl in self.levels:
            n *= len(lvl.orbit_list)
        return n

    def base(self) -> list[int]:
        return [lvl.base for lvl in self.levels]

    def strong_generators(self, from_level: int = 0) -> list[Perm]:
        out = []
        for lvl in self.levels[from_level:]:
            out.extend(lvl.gens)
        return out

    def sift(self, g: Perm, from_level: int = 0) -> tuple[int, Perm]:
        """Reduce g through the chain.

        Returns (level, residue): the residue fixes the base points of all
        levels before ``level`` and either is the identity (member) or has a
        base image outside the basic orbit at ``level``.
        """
        h = g
        for i in range(from_level, len(self.levels)):
            lvl = self.levels[i]
            p = h(lvl.base)
            if p == lvl.base:
                continue
            if p not in lvl.tree:
                return i, h
            u = lvl.rep(p)
            h = h * u.inverse()
        return len(self.levels), h

    def contains(self, g: Perm) -> bool:
        _, residue = self.sift(g)
        return residue.is_identity()

    # -- mutation -------------------------------------------------------------

    def _insert_residue(self, g: Perm) -> int | None:
        """Sift g and file the residue at its level.  Returns the level or None."""
        level, residue = self.sift(g)
        if residue.is_identity():
            return None
        if level == len(self.levels):
            self.levels.append(_Level(residue.first_moved()))
        self.levels[level].gens.append(residue)
        return level

    def _regrow_orbit(self, i: int) -> None:
        lvl = self.levels[i]
        gens_here = self.strong_generators(from_level=i)
        frontier = deque(lvl.orbit_list)
        while frontier:
            p = frontier.popleft()
            for g in gens_here:
                q = g(p)
                if q not in lvl.tree:
                    lvl.tree[q] = (p, g)
                    lvl.orbit_list.append(q)
                    frontier.append(q)

    # deterministic Schreier-Sims ------------------------------------------------

    def add_generator(self, g: Perm) -> None:
        level = self._insert_residue(g)
        if level is None:
            return
        self._complete_from(level)

    def _complete_from(self, start: int) -> None:
        """Re-establish the chain invariant for levels start, start-1, ..., 0."""
        i = start
        while i >= 0:
            inserted_at = self._check_level(i)
            if inserted_at is None:
                i -= 1
            else:
                i = inserted_at

    def _check_level(self, i: int) -> int | None:
        """Regrow the orbit at level i and sift pending Schreier generators.

        Returns the level where a non-trivial residue was filed (work must
        resume there), or None if the level is complete.
        """
        self._regrow_orbit(i)
        lvl = self.levels[i]
        gens_here = self.strong_generators(from_level=i)
        for p in lvl.orbit_list:
            u_p = None
            for g in gens_here:
                key = (p, id(g))
                if key in lvl.processed:
                    continue
                lvl.processed.add(key)
                if u_p is None:
                    u_p = lvl.rep(p)
                s = u_p * g if u_p is not None else g
                q = g(p)
                u_q = lvl.rep(q)
                if u_q is not None:
                    s = s * u_q.inverse()
                if s.is_identity():
                    continue
                _, residue = self.sift(s, from_level=i + 1)
                if residue.is_identity():
                    continue
                level, residue = self.sift(residue)  # refile from the top
                assert level > i
                if level == len(self.levels):
                    self.levels.append(_Level(residue.first_moved()))
                self.levels[level].gens.append(residue)
                return level
        return None

    # randomized build against a known order --------------------------------------

    def add_sift_only(self, g: Perm) -> bool:
        """Insert a residue without Schreier processing (randomized build)."""
        level = self._insert_residue(g)
        if level is None:
            return False
        for j in range(level, -1, -1):
            self._regrow_orbit(j)
        return True


class _ProductReplacer:
    """Seeded product-replacement random element generator."""

    def __init__(self, gens: Sequence[Perm], seed: int, slots: int = 8,
                 scramble: int = 40):
        degree = gens[0].degree
        self.rng = np.random.default_rng(seed)
        pool = list(gens)
        while len(pool) < slots:
            pool.append(pool[int(self.rng.integers(len(pool)))])
        self.pool = pool
        self.accum = Perm.identity(degree)
        for _ in range(scramble):
            self.sample()

    def sample(self) -> Perm:
        i = int(self.rng.integers(len(self.pool)))
        j = int(self.rng.integers(len(self.pool)))
        while j == i:
            j = int(self.rng.integers(len(self.pool)))
        g = self.pool[j]
        if self.rng.integers(2):
            g = g.inverse()
        self.pool[i] = self.pool[i] * g
        self.accum = self.accum * self.pool[i]
        return self.accum


class PermGroup:
    """A finite permutation group given by generators.

    Immutable after construction; the stabilizer chain is built on first
    use and cached.  ``order_hint`` must be exact when given (it is the
    completeness certificate of a randomized chain build), so callers only
    pass orders obtained from other exact computations.
    """

    def __init__(self, degree: int, generators: Iterable[Perm],
                 name: str | None = None, order_hint: int | None = None,
                 base_hint: Sequence[int] = (), parent: "PermGroup | None" = None):
        gens = []
        seen = set()
        for g in generators:
            if g.degree != degree:
                raise InputError(
                    f"generator degree {g.degree} does not match group degree {degree}")
            if g.is_identity():
                continue
            k = g.key()
            if k not in seen:
                seen.add(k)
                gens.append(g)
        self.degree = degree
        self.generators: tuple[Perm, ...] = tuple(gens)
        self.name = name
        self.parent = parent
        self._order_hint = order_hint
        self._base_hint = tuple(base_hint)
        self._chain: StabChain | None = None
        self._orbit_cache: dict[int, tuple[int, ...]] = {}

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def trivial(degree: int) -> "PermGroup":
        return PermGroup(degree, [], name="1")

    def known_order(self) -> int | None:
        if self._chain is not None:
            return self._chain.order()
        return self._order_hint

    def with_base(self, base_hint: Sequence[int]) -> "PermGroup":
        """Same group, chain rebuilt with the given base prefix."""
        return PermGroup(self.degree, self.generators, name=self.name,
                         order_hint=self.known_order(), base_hint=base_hint,
                         parent=self.parent)

    # -- chain ----------------------------------------------------------------

    def chain(self) -> StabChain:
        if self._chain is None:
            self._chain = self._build_chain()
        return self._chain

    def _build_chain(self) -> StabChain:
        chain = StabChain(self.degree, base_hint=self._base_hint)
        if not self.generators:
            return chain
        if self._order_hint is not None and self._order_hint > 1:
            for g in self.generators:
                chain.add_sift_only(g)
            if chain.order() < self._order_hint:
                seed = hash(tuple(g.key() for g in self.generators)) & 0x7FFFFFFF
                sampler = _ProductReplacer(list(self.generators), seed)
                stale = 0
                while chain.order() < self._order_hint:
                    if chain.add_sift_only(sampler.sample()):
                        stale = 0
                    else:
                        stale += 1
                        if stale > 4000:  # pragma: no cover - safety valve
                            break
            if chain.order() != self._order_hint:
                raise InputError(
                    f"order hint {self._order_hint} inconsistent with chain "
                    f"order {chain.order()}")
            return chain
        for g in self.generators:
            chain.add_generator(g)
        return chain

    def order(self) -> int:
        return self.chain().order()

    def contains(self, g: Perm) -> bool:
        if g.degree != self.degree:
            raise InputError("degree mismatch in membership test")
        if not self.generators:
            return g.is_identity()
        return self.chain().contains(g)

    def __contains__(self, g: Perm) -> bool:
        return self.contains(g)

    def is_trivial(self) -> bool:
        return not self.generators

    # -- orbits ----------------------------------------------------------------

    def orbit(self, point: int) -> tuple[int, ...]:
        if not (0 <= point < self.degree):
            raise InputError(f"point {point} out of range for degree {self.degree}")
        if point in self._orbit_cache:
            return self._orbit_cache[point]
        seen = {point}
        frontier = [point]
        while frontier:
            p = frontier.pop()
            for g in self.generators:
                q = g(p)
                if q not in seen:
                    seen.add(q)
                    frontier.append(q)
        orb = tuple(sorted(seen))
        for p in orb:
            self._orbit_cache[p] = orb
        return orb

    def orbits(self) -> list[tuple[int, ...]]:
        out = []
        seen = set()
        for p in range(self.degree):
            if p not in seen:
                orb = self.orbit(p)
                seen.update(orb)
                out.append(orb)
        return out

    def is_transitive(self) -> bool:
        return self.degree == 1 or len(self.orbit(0)) == self.degree

    # -- element access ----------------------------------------------------------

    def elements(self, cap: int = 2_000_000) -> Iterator[Perm]:
        """Iterate over all elements via transversal products (guarded)."""
        if self.order() > cap:
            raise InputError(f"element enumeration refused: order {self.order()} > {cap}")
        chain = self.chain()

        def rec(i: int) -> Iterator[Perm]:
            if i == len(chain.levels):
                yield Perm.identity(self.degree)
                return
            lvl = chain.levels[i]
            for rest in rec(i + 1):
                for p in lvl.orbit_list:
                    u = lvl.rep(p)
                    yield rest if u is None else rest * u

        return rec(0)

    def random_element(self, rng: np.random.Generator) -> Perm:
        chain = self.chain()
        g = None
        for lvl in chain.levels:
            p = lvl.orbit_list[int(rng.integers(len(lvl.orbit_list)))]
            u = lvl.rep(p)
            if u is not None:
                g = u if g is None else g * u
        return g if g is not None else Perm.identity(self.degree)

    # -- common derived groups ---------------------------------------------------

    def point_stabilizer(self, point: int) -> "PermGroup":
        """Stabilizer of a point, as a subgroup handle (parent set to self)."""
        if not (0 <= point < self.degree):
            raise InputError(f"point {point} out of range")
        if (self._chain is not None and self._chain.levels
                and self._chain.levels[0].base == point):
            rebased = self
        else:
            rebased = self.with_base([point])
        chain = rebased.chain()
        gens = chain.strong_generators(from_level=1) if chain.levels else []
        expected = self.order() // len(self.orbit(point))
        return PermGroup(self.degree, gens, order_hint=expected, parent=self)

    def conjugate_group(self, g: Perm) -> "PermGroup":
        return PermGroup(self.degree, [h.conj(g) for h in self.generators],
                         order_hint=self.known_order(), parent=self.parent)

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return all(other.contains(g) for g in self.generators)

    def normalizes(self, s: "PermGroup") -> bool:
        """True iff every generator of self conjugates s onto itself."""
        for g in self.generators:
            for x in s.generators:
                if not s.contains(x.conj(g)):
                    return False
        return True

    def centralizes(self, s: "PermGroup") -> bool:
        for g in self.generators:
            for x in s.generators:
                if not g.commutes_with(x):
                    return False
        return True

    def equals(self, other: "PermGroup") -> bool:
        return (self.degree == other.degree
                and self.order() == other.order()
                and self.is_subgroup_of(other))

    def __repr__(self) -> str:
        label = self.name or f"{len(self.generators)} gens"
        return f"PermGroup(degree={self.degree}, {label})"


def closure_elements(gens: Sequence[Perm], cap: int = 200_000) -> set[Perm]:
    """Word-enumeration closure of a generating set (independent of chains).

    Brute-force oracle for tests; refuses above ``cap`` elements.
    """
    if not gens:
        return set()
    els = {Perm.identity(gens[0].degree)}
    frontier = list(els)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = a * g
                if b not in els:
                    els.add(b)
                    nxt.append(b)
                    if len(els) > cap:
                        raise InputError(f"closure enumeration exceeded cap {cap}")
        frontier = nxt
    return els


def generate_subgroup(parent: PermGroup, gens: Iterable[Perm],
                      order_hint: int | None = None) -> PermGroup:
    """Subgroup handle of ``parent`` generated by ``gens`` (membership checked)."""
    gens = list(gens)
    for g in gens:
        if not parent.contains(g):
            raise InputError("subgroup generator is not a member of the parent group")
    return PermGroup(parent.degree, gens, order_hint=order_hint, parent=parent)


def direct_product_disjoint(groups: Sequence[PermGroup]) -> tuple[PermGroup, list[tuple[int, int]]]:
    """Support-disjoint direct product acting on the concatenated point sets.

    Returns the product group and the (start, stop) support window of each
    factor.
    """
    degree = sum(g.degree for g in groups)
    gens: list[Perm] = []
    windows: list[tuple[int, int]] = []
    offset = 0
    order = 1
    for g in groups:
        windows.append((offset, offset + g.degree))
        for x in g.generators:
            gens.append(perm_on_window(x, degree, offset))
        order *= g.order()
        offset += g.degree
    return PermGroup(degree, gens, order_hint=order), windows


def perm_on_window(x: Perm, degree: int, offset: int) -> Perm:
    """Embed ``x`` acting on [offset, offset+x.degree) inside ``degree`` points."""
    img = np.arange(degree, dtype=_PERM_DTYPE)
    img[offset:offset + x.degree] = x.img + offset
    return Perm(img, check=False)
