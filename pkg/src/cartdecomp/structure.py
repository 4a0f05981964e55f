"""Normal structure: closures, minimal normal subgroups, plinths.

A plinth is a transitive minimal normal subgroup; a group owning one is
innately transitive.  Minimal normal subgroups are found by shrinking
normal closures (prime-power parts and commutators dig into proper
normal subgroups) and then certified: exhaustively for orders up to the
brute-force cap, otherwise structurally -- a normal subgroup that is a
product of certified-simple groups permuted transitively by conjugation
is minimal normal.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError, LimitError
from .numbers import factorize
from .perms import Perm, PermGroup
from .subgroups import _Collector, centralizer, tuple_transporter

_EXHAUSTIVE_CAP = 5000


def normal_closure(G: PermGroup, seeds: list[Perm]) -> PermGroup:
    """Smallest subgroup containing the seeds and normalised by G."""
    coll = _Collector(G.degree)
    queue = []
    for s in seeds:
        if coll.add(s):
            queue.append(s)
    while queue:
        x = queue.pop()
        for g in G.generators:
            c = x.conj(g)
            if coll.add(c):
                queue.append(c)
    return coll.group(parent=G)


def is_normal_in(N: PermGroup, G: PermGroup) -> bool:
    return G.normalizes(N)


def derived_subgroup(G: PermGroup) -> PermGroup:
    comms = []
    gens = G.generators
    for i, a in enumerate(gens):
        for b in gens[i + 1:]:
            c = a.inverse() * b.inverse() * a * b
            if not c.is_identity():
                comms.append(c)
    if not comms:
        return PermGroup.trivial(G.degree)
    return normal_closure(G, comms)


def is_perfect(G: PermGroup) -> bool:
    return derived_subgroup(G).order() == G.order()


def is_abelian(G: PermGroup) -> bool:
    gens = G.generators
    return all(a.commutes_with(b) for i, a in enumerate(gens) for b in gens[i + 1:])


def certify_simple(G: PermGroup, seed: int = 7, samples: int = 24) -> tuple[bool, str]:
    """(is_simple, certificate level).

    Orders up to the brute cap are decided exhaustively (the closure of
    every non-trivial element must be the whole group); larger groups get
    a sampled certificate (prime-power parts of seeded random elements)
    plus a perfectness check.
    """
    order = G.order()
    if order == 1:
        return False, "exhaustive"
    if order <= _EXHAUSTIVE_CAP:
        for h in G.elements():
            if h.is_identity():
                continue
            if normal_closure(G, [h]).order() != order:
                return False, "exhaustive"
        return True, "exhaustive"
    if not is_perfect(G):
        return False, "sampled"
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        h = G.random_element(rng)
        if h.is_identity():
            continue
        for part in _prime_power_parts(h):
            if normal_closure(G, [part]).order() != order:
                return False, "sampled"
    return True, "sampled"


def _prime_power_parts(g: Perm) -> list[Perm]:
    """Non-trivial powers of g with prime order."""
    n = g.order()
    out = []
    for p in factorize(n):
        out.append(g ** (n // p))
    return out


def _shrink_normal(G: PermGroup, N: PermGroup, seed: int,
                   rounds: int) -> PermGroup:
    """Search for a proper non-trivial G-normal subgroup inside N, repeatedly."""
    rng = np.random.default_rng(seed)
    current = N
    stale = 0
    while stale < rounds:
        y = current.random_element(rng)
        if y.is_identity():
            stale += 1
            continue
        candidates = _prime_power_parts(y)
        g = G.random_element(rng)
        z = y.conj(g)
        c = y.inverse() * z.inverse() * y * z
        if not c.is_identity():
            candidates.extend(_prime_power_parts(c))
            candidates.append(c)
        improved = False
        for cand in candidates:
            M = normal_closure(G, [cand])
            if 1 < M.order() < current.order():
                current = M
                improved = True
                break
        if improved:
            stale = 0
        else:
            stale += 1
    return current


def simple_factors(N: PermGroup, seed: int = 11) -> list[PermGroup]:
    """The simple direct factors of a non-abelian N = T_1 x ... x T_k.

    The first factor is a minimal N-normal subgroup (shrunk closure); the
    complement is generated by g * sigma(g)^-1 where sigma(g) is the unique
    element of T_1 inducing the same conjugation on T_1 as g (factors are
    centerless, so sigma is well defined and found by exact search).
    """
    if is_abelian(N):
        raise InputError("simple factor splitting expects a non-abelian group")
    factors: list[PermGroup] = []
    remaining = N
    while remaining.order() > 1:
        T = _shrink_normal(remaining, remaining, seed + len(factors), rounds=40)
        ok, _ = certify_simple(T)
        if not ok:
            raise InputError(
                "could not certify a simple factor; the group does not look "
                "like a product of non-abelian simple groups")
        factors.append(T)
        xs = list(T.generators)
        rest_gens = []
        for g in remaining.generators:
            ys = [x.conj(g) for x in xs]
            t = tuple_transporter(T, xs, ys)
            if t is None:
                raise InputError("conjugation did not restrict to the factor; "
                                 "the subgroup is not normal")
            rest_gens.append(g * t.inverse())
        remaining = PermGroup(N.degree, rest_gens, parent=N)
    total = _product_order(factors)
    if total != N.order():
        raise InputError("factor orders do not multiply to the group order")
    return factors


def _product_order(groups: list[PermGroup]) -> int:
    n = 1
    for g in groups:
        n *= g.order()
    return n


def conjugation_orbit_on_factors(G: PermGroup, factors: list[PermGroup]) -> list[list[int]]:
    """Orbits of G (by conjugation) on a list of pairwise distinct subgroups."""
    def find_index(H: PermGroup) -> int:
        for i, T in enumerate(factors):
            if T.order() == H.order() and all(T.contains(x) for x in H.generators):
                return i
        raise InputError("conjugate of a factor is not among the factors")

    images = []
    for g in G.generators:
        row = [find_index(T.conjugate_group(g)) for T in factors]
        images.append(row)
    seen: set[int] = set()
    orbits: list[list[int]] = []
    for s in range(len(factors)):
        if s in seen:
            continue
        orb = {s}
        frontier = [s]
        while frontier:
            x = frontier.pop()
            for row in images:
                y = row[x]
                if y not in orb:
                    orb.add(y)
                    frontier.append(y)
        seen |= orb
        orbits.append(sorted(orb))
    return orbits


def certify_minimal_normal(G: PermGroup, N: PermGroup) -> str:
    """Certify that N is a minimal normal subgroup of G; returns the level.

    Raises InputError when the certificate fails.
    """
    if N.order() <= 1:
        raise InputError("minimal normal subgroups are non-trivial")
    if not is_normal_in(N, G):
        raise InputError("subgroup is not normal")
    if N.order() <= _EXHAUSTIVE_CAP:
        for h in N.elements():
            if h.is_identity():
                continue
            M = normal_closure(G, [h])
            if M.order() != N.order():
                raise InputError("a closure inside the subgroup is proper; "
                                 "not minimal normal")
        return "exhaustive"
    if is_abelian(N):
        raise LimitError("abelian minimal-normal certification beyond the "
                         "brute cap is out of scale")
    factors = simple_factors(N)
    orbits = conjugation_orbit_on_factors(G, factors)
    if len(orbits) != 1:
        raise InputError("conjugation is not transitive on the simple factors; "
                         "not minimal normal")
    return "structural"


def _exact_minimalize(G: PermGroup, N: PermGroup) -> PermGroup:
    """Below the brute cap, shrink N to a genuinely minimal normal subgroup."""
    changed = True
    while changed and N.order() <= _EXHAUSTIVE_CAP:
        changed = False
        for h in N.elements():
            if h.is_identity():
                continue
            M = normal_closure(G, [h])
            if 1 < M.order() < N.order():
                N = M
                changed = True
                break
    return N


def minimal_normal_subgroups(G: PermGroup, seed: int = 5) -> list[PermGroup]:
    """All minimal normal subgroups, each with a passing certificate."""
    if G.order() <= 1:
        raise InputError("the trivial group has no minimal normal subgroups")
    found: list[PermGroup] = []

    def record(N: PermGroup) -> None:
        for i, M in enumerate(found):
            if N.order() == M.order() and all(M.contains(x) for x in N.generators):
                return
            if N.order() < M.order() and all(M.contains(x) for x in N.generators):
                found[i] = N     # strictly smaller normal subgroup inside M
                return
            if M.order() < N.order() and all(N.contains(x) for x in M.generators):
                return
        found.append(N)

    seeds: list[Perm] = list(G.generators)
    rng = np.random.default_rng(seed)
    for _ in range(6):
        seeds.append(G.random_element(rng))
    for s in seeds:
        if s.is_identity():
            continue
        N = _shrink_normal(G, normal_closure(G, [s]), seed, rounds=40)
        record(_exact_minimalize(G, N))
    # minimal normals centralize each other; search the centralizer for more
    frontier = list(found)
    while frontier:
        M = frontier.pop()
        C = centralizer(G, M)
        for s in list(C.generators)[:8]:
            if s.is_identity():
                continue
            N = _shrink_normal(G, normal_closure(G, [s]), seed + 1, rounds=40)
            N = _exact_minimalize(G, N)
            before = len(found)
            record(N)
            if len(found) > before:
                frontier.append(N)
    for N in found:
        certify_minimal_normal(G, N)
    found.sort(key=lambda H: (H.order(), tuple(sorted(g.key() for g in H.generators))))
    return found


def innately_transitive_plinths(G: PermGroup) -> list[PermGroup]:
    """Transitive minimal normal subgroups; empty when G is not innately transitive."""
    return [N for N in minimal_normal_subgroups(G) if N.is_transitive()]


def certify_plinth(G: PermGroup, M: PermGroup,
                   factors: list[PermGroup] | None = None) -> dict:
    """Certify that M is a transitive minimal normal subgroup of G.

    Structural route used by the example builders at large degree, where
    the simple factors are already known from the construction: checks
    normality, transitivity, simplicity of the factors (transported
    certificates are the callers' responsibility when factors are images
    of small groups), order bookkeeping and conjugation transitivity.
    """
    if not M.is_transitive():
        raise InputError("plinth candidate is not transitive")
    if not is_normal_in(M, G):
        raise InputError("plinth candidate is not normal")
    if factors is None:
        level = certify_minimal_normal(G, M)
        return {"certificate": level, "k": None}
    total = 1
    for T in factors:
        if not M.normalizes(T):
            raise InputError("claimed factor is not normal in the plinth")
        total *= T.order()
    if total != M.order():
        raise InputError("claimed factor orders do not multiply to the plinth order")
    orbits = conjugation_orbit_on_factors(G, factors)
    if len(orbits) != 1:
        raise InputError("conjugation is not transitive on the claimed factors")
    return {"certificate": "structural", "k": len(factors)}
