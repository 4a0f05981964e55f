"""Group homomorphisms, coset actions and quotient actions.

A morphism is stored as generator images.  Validation is exact, never
sampled: the group generated by the coupled permutations (source generator
acting on one copy of the points, its claimed image on a disjoint copy)
has the same order as the source if and only if the images extend to a
homomorphism, and the coupled stabilizer chain decides that order exactly.
Applying a validated morphism factors an element through the coupled
chain, so arbitrary members of the source can be mapped, not only words
in the generators.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import InputError, InvalidMorphismError, LimitError
from .partitions import Partition
from .perms import Perm, PermGroup, _PERM_DTYPE
from .subgroups import intersection


class Morphism:
    """A homomorphism between permutation groups, given on generators."""

    def __init__(self, source: PermGroup, target_degree: int,
                 gen_images: list[Perm], name: str | None = None,
                 validate: bool = True):
        if len(gen_images) != len(source.generators):
            raise InputError("need exactly one image per source generator")
        for h in gen_images:
            if h.degree != target_degree:
                raise InputError("image degree mismatch")
        self.source = source
        self.target_degree = target_degree
        self.gen_images = tuple(gen_images)
        self.name = name
        self._coupled: PermGroup | None = None
        self._image_group: PermGroup | None = None
        if validate:
            self.validate()

    # -- validation ------------------------------------------------------------

    def _coupled_group(self) -> PermGroup:
        if self._coupled is None:
            ns, nt = self.source.degree, self.target_degree
            gens = []
            for g, h in zip(self.source.generators, self.gen_images):
                img = np.concatenate([g.img, h.img + ns])
                gens.append(Perm(img, check=False))
            self._coupled = PermGroup(ns + nt, gens,
                                      base_hint=list(range(ns)))
        return self._coupled

    def validate(self) -> None:
        """Exact homomorphism certificate via the coupled chain order."""
        coupled = self._coupled_group()
        if coupled.order() != self.source.order():
            raise InvalidMorphismError(
                "generator images do not extend to a homomorphism "
                f"(coupled order {coupled.order()} != source order "
                f"{self.source.order()})")

    # -- evaluation --------------------------------------------------------------

    def apply(self, g: Perm) -> Perm:
        """Image of an arbitrary element of the source group."""
        ns = self.source.degree
        chain = self._coupled_group().chain()
        src = g
        acc: Perm | None = None        # product of transversal target-part inverses
        for lvl in chain.levels:
            if lvl.base >= ns:
                continue
            p = src(lvl.base)
            if p == lvl.base:
                continue
            if p not in lvl.tree:
                raise InputError("element is not in the source group")
            u = lvl.rep(p)
            u_inv = u.inverse()
            src_part = Perm(u_inv.img[:ns], check=False)
            tgt_part = Perm(u_inv.img[ns:] - ns, check=False)
            src = src * src_part
            acc = tgt_part if acc is None else acc * tgt_part
        if not src.is_identity():
            raise InputError("element is not in the source group")
        if acc is None:
            return Perm.identity(self.target_degree)
        return acc.inverse()

    def __call__(self, g: Perm) -> Perm:
        return self.apply(g)

    # -- derived data ---------------------------------------------------------------

    def image_group(self, order_hint: int | None = None) -> PermGroup:
        if self._image_group is None:
            self._image_group = PermGroup(self.target_degree, list(self.gen_images),
                                          order_hint=order_hint,
                                          name=f"im({self.name})" if self.name else None)
        return self._image_group

    def kernel_order(self) -> int:
        return self.source.order() // self.image_group().order()

    def is_faithful(self) -> bool:
        return self.kernel_order() == 1

    def is_bijective(self) -> bool:
        return self.is_faithful() and self.image_group().order() == self.source.order()

    def push_subgroup(self, K: PermGroup, order_hint: int | None = None) -> PermGroup:
        """Image of a subgroup of the source (generator by generator)."""
        return PermGroup(self.target_degree, [self.apply(g) for g in K.generators],
                         order_hint=order_hint, parent=self.image_group())

    def fixes_subgroup(self, H: PermGroup) -> bool:
        """True for endomorphism data with H^phi == H (needs equal degrees)."""
        if self.target_degree != self.source.degree:
            raise InputError("subgroup invariance only makes sense for endomorphisms")
        imgs = [self.apply(h) for h in H.generators]
        return all(H.contains(x) for x in imgs) and H.order() == PermGroup(
            H.degree, imgs).order()


def morphism_from_images(source: PermGroup, target: PermGroup,
                         images: list[Perm], name: str | None = None) -> Morphism:
    """Validated morphism; raises InvalidMorphismError on relation violations."""
    phi = Morphism(source, target.degree, images, name=name, validate=True)
    for h in images:
        if not target.contains(h):
            raise InputError("an image lies outside the stated target group")
    return phi


# --------------------------------------------------------------------------
# coset actions
# --------------------------------------------------------------------------

class CosetSpace:
    """The right coset space [G : H] with canonical representatives.

    Cosets are identified by their lexicographically least element, found
    greedily along H's stabilizer chain, so the labelling is deterministic.
    """

    def __init__(self, G: PermGroup, H: PermGroup, index_cap: int = 100_000):
        if H.degree != G.degree:
            raise InputError("subgroup degree mismatch")
        if not H.is_subgroup_of(G):
            raise InputError("coset action needs H <= G")
        n_cosets = G.order() // H.order()
        if n_cosets > index_cap:
            raise LimitError(
                f"coset action refused: index {n_cosets} exceeds cap {index_cap}")
        self.G = G
        self.H = H
        self.n_cosets = n_cosets
        chain = H.with_base(range(G.degree)).chain()
        self._h_levels = [lvl for lvl in chain.levels if len(lvl.orbit_list) > 1]
        self.reps: list[Perm] = []
        self.index: dict[bytes, int] = {}
        self._enumerate()

    def canonical(self, x: Perm) -> Perm:
        """Lexicographically least element of the coset H*x."""
        cur = x
        for lvl in self._h_levels:
            best_q = None
            best_img = None
            for q in lvl.orbit_list:
                img = cur(q)
                if best_img is None or img < best_img:
                    best_img = img
                    best_q = q
            if best_q != lvl.base:
                u = lvl.rep(best_q)
                cur = u * cur
        return cur

    def coset_index(self, x: Perm) -> int:
        return self.index[self.canonical(x).key()]

    def _enumerate(self) -> None:
        start = self.canonical(Perm.identity(self.G.degree))
        self.reps.append(start)
        self.index[start.key()] = 0
        queue = deque([0])
        gens = self.G.generators
        while queue:
            i = queue.popleft()
            r = self.reps[i]
            for g in gens:
                c = self.canonical(r * g)
                k = c.key()
                if k not in self.index:
                    self.index[k] = len(self.reps)
                    self.reps.append(c)
                    queue.append(self.index[k])
        if len(self.reps) != self.n_cosets:
            raise InputError(
                f"coset enumeration found {len(self.reps)} cosets, "
                f"expected {self.n_cosets}")

    def action_of(self, g: Perm) -> Perm:
        """The permutation induced on cosets by right multiplication by g."""
        img = np.empty(self.n_cosets, dtype=_PERM_DTYPE)
        for i, r in enumerate(self.reps):
            img[i] = self.index[self.canonical(r * g).key()]
        return Perm(img, check=False)

    def automorphism_action(self, phi: Morphism) -> Perm:
        """Permutation H*x -> H*phi(x) for phi fixing H setwise."""
        if not phi.fixes_subgroup(self.H):
            raise InputError("the map does not fix the subgroup; "
                             "the coset action is undefined")
        img = np.empty(self.n_cosets, dtype=_PERM_DTYPE)
        for i, r in enumerate(self.reps):
            img[i] = self.index[self.canonical(phi.apply(r)).key()]
        return Perm(img, check=False)


class CosetActionMorphism(Morphism):
    """The homomorphism from G onto its action on [G : H]."""

    def __init__(self, G: PermGroup, H: PermGroup, index_cap: int = 100_000):
        space = CosetSpace(G, H, index_cap=index_cap)
        images = [space.action_of(g) for g in G.generators]
        self.space = space
        # a coset action is a homomorphism by construction
        super().__init__(G, space.n_cosets, images, validate=False,
                         name="coset action")
        self._kernel: PermGroup | None = None

    def kernel(self) -> PermGroup:
        """The largest normal subgroup of G inside H (the core of H)."""
        if self._kernel is None:
            self._kernel = core(self.G_source(), self.space.H)
        return self._kernel

    def G_source(self) -> PermGroup:
        return self.source


def coset_action(G: PermGroup, H: PermGroup,
                 index_cap: int = 100_000) -> CosetActionMorphism:
    """Action of G on the right cosets of H, with deterministic labelling."""
    return CosetActionMorphism(G, H, index_cap=index_cap)


def core(G: PermGroup, H: PermGroup, override: bool = False) -> PermGroup:
    """Largest normal subgroup of G contained in H."""
    K = PermGroup(G.degree, H.generators, order_hint=H.known_order(), parent=G)
    while True:
        changed = False
        for g in G.generators:
            Kg = K.conjugate_group(g)
            if not all(K.contains(x) for x in Kg.generators):
                K = intersection(K, Kg, override=override)
                changed = True
                if K.is_trivial():
                    return K
        if not changed:
            return K


def induced_coset_permutation(phi: Morphism, space: CosetSpace) -> Perm:
    """Permutation of [G : H] induced by a map fixing H (see the space)."""
    return space.automorphism_action(phi)


# --------------------------------------------------------------------------
# quotient (block) actions
# --------------------------------------------------------------------------

class BlockActionMorphism(Morphism):
    """Action of a group on the blocks of an invariant partition."""

    def __init__(self, G: PermGroup, part: Partition):
        if part.degree != G.degree:
            raise InputError("partition degree mismatch")
        self.partition = part
        nb = part.num_blocks
        arr = part.block_of
        images = []
        for g in G.generators:
            img = np.empty(nb, dtype=_PERM_DTYPE)
            img[arr] = arr[g.img]
            # consistency: re-applying must reproduce the scatter (invariance)
            if not (img[arr] == arr[g.img]).all() or len(np.unique(img)) != nb:
                raise InputError("partition is not invariant under the group")
            images.append(Perm(img))
        super().__init__(G, nb, images, validate=False, name="block action")

    def apply(self, g: Perm) -> Perm:
        arr = self.partition.block_of
        img = np.empty(self.target_degree, dtype=_PERM_DTYPE)
        img[arr] = arr[g.img]
        return Perm(img, check=False)


def block_action(G: PermGroup, part: Partition) -> BlockActionMorphism:
    return BlockActionMorphism(G, part)
