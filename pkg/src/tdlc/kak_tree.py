"""Cartan-like KAK decompositions for tree groups and contraction witnesses.

K is the stabilizer of a vertex v inside a finite group ball; representatives
are indexed by K-orbits on the spheres around v.  Everything is certified at
an explicit radius: factorizations are verified pointwise on the ball, and
the contraction pipeline reports the exact agreement depths of the
conjugated witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import CertificationError
from .tree_core import HalfTreeRef, distance as tree_distance, half_tree_vertices
from .tree_aut import FiniteTreeAutomorphism, agreement_depth, compose, invert
from .universal_groups import (
    ColorBall,
    GroupBall,
    Portrait,
    Word,
    identity_aut,
    perm_identity,
    translation,
    word_append,
    word_distance,
)


def _image_word(g: FiniteTreeAutomorphism, world: ColorBall, v: int) -> Word | None:
    if g.exact is not None:
        return g.exact.image_word(world.word_of[v])
    img = g.mapping.get(v)
    return None if img is None else world.word_of[img]


def restriction_key(g: FiniteTreeAutomorphism, world: ColorBall, radius: int) -> tuple:
    """Images (as addresses, possibly outside the ball) of B(base, radius)."""
    words = [w for k in range(radius + 1) for w in world.word_sphere((), k)]
    if g.exact is not None:
        return tuple(g.exact.image_word(w) for w in words)
    return tuple(world.word_of[g.mapping[world.id_of[w]]] if world.id_of[w] in g.mapping else None
                 for w in words)


def stabilizer_subball(gb: GroupBall, v: int) -> GroupBall:
    kept = [g for g in gb if g.mapping.get(v) == v]
    return GroupBall(gb.world, kept, closed=gb.closed, local_group=gb.local_group)


@dataclass(frozen=True)
class OrbitPartition:
    vertex: int
    sphere_radius: int
    orbits: tuple[tuple[int, ...], ...]           # sorted vertex ids, one tuple per orbit
    transversal: dict[int, FiniteTreeAutomorphism]  # point -> k in K with k(rep) = point

    def orbit_of(self, point: int) -> tuple[int, ...]:
        for orbit in self.orbits:
            if point in orbit:
                return orbit
        raise KeyError(point)


def sphere_orbits(gb: GroupBall, v: int, n: int) -> OrbitPartition:
    """Partition of (orbit of v under gb) intersect S(v,n) under the stabilizer of v."""
    world = gb.world
    ball = gb.ball
    if ball.depth[v] + n > ball.radius:
        raise CertificationError(f"sphere S({v},{n}) exceeds the certified radius")
    sphere_pts = {u for u in ball.vertices() if tree_distance(ball, v, u) == n}
    reachable = {g.mapping[v] for g in gb if v in g.mapping} & sphere_pts
    stab = [g for g in gb if g.mapping.get(v) == v]
    ident = identity_aut(world).restrict()

    orbits: list[tuple[int, ...]] = []
    transversal: dict[int, FiniteTreeAutomorphism] = {}
    remaining = set(reachable)
    while remaining:
        rep = min(remaining)
        orbit = {rep}
        transversal[rep] = ident
        frontier = [rep]
        while frontier:
            p = frontier.pop()
            for k in stab:
                q = k.mapping.get(p)
                # K-images may reach sphere points no listed element moves v
                # to directly; they belong to the orbit of v all the same.
                if q is not None and q in sphere_pts and q not in orbit:
                    orbit.add(q)
                    transversal[q] = compose(k, transversal[p])
                    frontier.append(q)
        orbits.append(tuple(sorted(orbit)))
        remaining -= orbit
    return OrbitPartition(v, n, tuple(orbits), transversal)


@dataclass(frozen=True)
class Representative:
    sphere_radius: int
    vertex: int
    element: FiniteTreeAutomorphism


@dataclass(frozen=True)
class CartanDecomposition:
    """K plus one double-coset representative per K-orbit per sphere."""

    vertex: int
    stabilizer: GroupBall
    representatives: tuple[Representative, ...]
    partitions: tuple[OrbitPartition, ...]
    group: GroupBall

    def representative_for(self, point: int) -> Representative:
        for part in self.partitions:
            for orbit in part.orbits:
                if point in orbit:
                    rep_vertex = orbit[0]
                    for rec in self.representatives:
                        if rec.vertex == rep_vertex and rec.sphere_radius == part.sphere_radius:
                            return rec
        raise CertificationError(f"vertex {point} outside the enumerated spheres")


def enumerate_representatives(gb: GroupBall, v: int, max_sphere: int) -> CartanDecomposition:
    """One mover per K-orbit per sphere radius <= max_sphere, identity at 0.

    With a U1 context the mover to vertex w is the left translation by w's
    address (always a member); otherwise gb is scanned and a missing mover is
    reported as incompleteness.
    """
    world = gb.world
    stab = stabilizer_subball(gb, v)
    reps: list[Representative] = []
    partitions: list[OrbitPartition] = []
    for n in range(max_sphere + 1):
        part = sphere_orbits(gb, v, n)
        partitions.append(part)
        for orbit in part.orbits:
            w = orbit[0]
            if n == 0:
                reps.append(Representative(0, v, identity_aut(world).restrict()))
                continue
            if gb.local_group is not None and v == gb.ball.base:
                mover = translation(world, world.word_of[w]).restrict()
            else:
                mover = next((g for g in gb if g.mapping.get(v) == w), None)
                if mover is None:
                    raise CertificationError(
                        f"group ball has no element moving {v} to orbit representative {w}")
            reps.append(Representative(n, w, mover))
    return CartanDecomposition(v, stab, tuple(reps), tuple(partitions), gb)


@dataclass(frozen=True)
class Factorization:
    k: FiniteTreeAutomorphism
    a: Representative
    k_prime: FiniteTreeAutomorphism


def factorize(g: FiniteTreeAutomorphism, dec: CartanDecomposition) -> Factorization:
    """Write g = k a k' with k, k' fixing v, verified pointwise on the ball."""
    v = dec.vertex
    img = g.mapping.get(v)
    if img is None:
        raise CertificationError(f"g moves vertex {v} outside the certified ball")
    rec = dec.representative_for(img)
    part = next(p for p in dec.partitions if p.sphere_radius == rec.sphere_radius)
    k_t = invert(part.transversal[img])          # k_t(g(v)) = rep vertex
    k_prime = compose(invert(rec.element), compose(k_t, g))
    if k_prime.mapping.get(v) != v:
        raise CertificationError("residual factor does not fix the base vertex")
    k = invert(k_t)
    product = compose(k, compose(rec.element, k_prime))
    for u in dec.group.ball.vertices():
        pu, gu = product.mapping.get(u), g.mapping.get(u)
        if pu is not None and gu is not None and pu != gu:
            raise AssertionError("factorization product disagrees with g on the ball")
    return Factorization(k, rec, k_prime)


@dataclass(frozen=True)
class DisjointnessCertificate:
    radius: int
    disjoint: bool
    covers: bool
    coset_sizes: dict[int, int]


def certify_partition(dec: CartanDecomposition, radius: int) -> DisjointnessCertificate:
    """Exhaustively check that the double cosets K a K partition the group ball.

    Keys are restrictions to B(v, radius); every product k a k' is compared
    against the enumerated elements.
    """
    world = dec.group.world
    keys_by_rep: dict[int, set] = {}
    for idx, rec in enumerate(dec.representatives):
        keys = set()
        for k1 in dec.stabilizer:
            for k2 in dec.stabilizer:
                keys.add(restriction_key(compose(k1, compose(rec.element, k2)), world, radius))
        keys_by_rep[idx] = keys
    all_keys = [restriction_key(g, world, radius) for g in dec.group]
    union = set().union(*keys_by_rep.values()) if keys_by_rep else set()
    disjoint = all(
        not (keys_by_rep[i] & keys_by_rep[j])
        for i in keys_by_rep for j in keys_by_rep if i < j
    )
    covers = set(all_keys) == union
    return DisjointnessCertificate(radius, disjoint, covers,
                                   {i: len(ks) for i, ks in keys_by_rep.items()})


# ---------------------------------------------------------------------------
# transport of representatives to a smaller compact open subgroup

@dataclass(frozen=True)
class TransportResult:
    new_representatives: tuple[FiniteTreeAutomorphism, ...]
    coverage: bool
    failed_element: FiniteTreeAutomorphism | None


def transport_representatives(coset_reps: Sequence[FiniteTreeAutomorphism],
                              k_prime: GroupBall,
                              dec: CartanDecomposition,
                              radius: int) -> TransportResult:
    """A' = union of g_i^-1 A g_j after verifying K = disjoint union of g_i K'.

    Coverage is re-certified exhaustively: every group-ball element must
    factor as k' a' k'' with both factors in K'.
    """
    world = dec.group.world
    kp_keys = {restriction_key(g, world, radius) for g in k_prime}
    seen: set = set()
    for gi in coset_reps:
        coset = {restriction_key(compose(gi, h), world, radius) for h in k_prime}
        if coset & seen:
            raise ValueError("coset representatives do not give disjoint cosets")
        seen |= coset
    k_keys = {restriction_key(g, world, radius) for g in dec.stabilizer}
    if seen != k_keys:
        raise ValueError("cosets of K' do not cover K")

    new_reps: dict[tuple, FiniteTreeAutomorphism] = {}
    for gi in coset_reps:
        for rec in dec.representatives:
            for gj in coset_reps:
                a2 = compose(invert(gi), compose(rec.element, gj))
                new_reps.setdefault(restriction_key(a2, world, radius), a2)

    v = dec.vertex
    kp_by_move: dict[tuple[int, int], list[FiniteTreeAutomorphism]] = {}
    for h in k_prime:
        for u, iu in h.mapping.items():
            kp_by_move.setdefault((u, iu), []).append(h)
    for g in dec.group:
        target = g.mapping.get(v)
        covered = False
        for a2 in new_reps.values():
            av = a2.mapping.get(v)
            if av is None:
                continue
            for kp in kp_by_move.get((av, target), []):
                rest = compose(invert(a2), compose(invert(kp), g))
                if rest.mapping.get(v) == v and restriction_key(rest, world, radius) in kp_keys:
                    covered = True
                    break
            if covered:
                break
        if not covered:
            return TransportResult(tuple(new_reps.values()), False, g)
    return TransportResult(tuple(new_reps.values()), True, None)


def greedy_subrepresentatives(dec: CartanDecomposition, k_big: GroupBall,
                              radius: int) -> list[Representative]:
    """For K' containing K, pick A' as a subset of A by a greedy first-seen filter."""
    world = dec.group.world
    big_keys = {restriction_key(g, world, radius) for g in k_big}
    kept: list[Representative] = []
    for rec in dec.representatives:
        duplicate = False
        for prev in kept:
            # same double coset iff some k1 in K' maps prev's target to rec's target
            # and the residual lands back in K'.
            for k1 in k_big:
                if k1.mapping.get(prev.vertex) != rec.vertex:
                    continue
                rest = compose(invert(compose(k1, prev.element)), rec.element)
                if rest.mapping.get(dec.vertex) == dec.vertex and \
                        restriction_key(rest, world, radius) in big_keys:
                    duplicate = True
                    break
            if duplicate:
                break
        if not duplicate:
            kept.append(rec)
    return kept


# ---------------------------------------------------------------------------
# boundedness and contraction witnesses

def is_bounded(seq: Sequence[FiniteTreeAutomorphism], v: int, bound: int) -> bool:
    """Finite-depth proxy: every displacement d(v, g_i(v)) stays below `bound`.

    Boundedness of the underlying sequence cannot be certified at finite
    depth; this is the displacement proxy at the caller's radius.
    """
    for g in seq:
        if g.exact is not None:
            w = g.exact.world.word_of[v]
            d = word_distance(w, g.exact.image_word(w))
        else:
            img = g.mapping.get(v)
            if img is None:
                return False  # image already outside the ball
            d = tree_distance(g.ball, v, img)
        if d >= bound:
            return False
    return True


def half_tree_fixator_witness(gb: GroupBall, h: HalfTreeRef) -> FiniteTreeAutomorphism | None:
    """A nontrivial gb element fixing the chosen half pointwise, or None.

    With a U1 context the witness is built directly: plant a nontrivial color
    permutation fixing the parent color at a vertex whose moved branches stay
    off the fixed side.  None certifies exhaustion of that search at ball
    depth (for U1 this means every point stabilizer of F is trivial).
    """
    world = gb.world
    ball = gb.ball
    fixed_side = half_tree_vertices(ball, h)
    if gb.local_group is not None:
        group = sorted(gb.local_group.closure())
        ident = perm_identity(world.degree)
        if ball.base in fixed_side:
            s_star = None          # plant anywhere on the moving side
        else:
            s_star = h.side        # moving side contains the base; avoid s_star's cone
        moving = [u for u in sorted(ball.vertices()) if u not in fixed_side]
        for u in sorted(moving, key=lambda x: (ball.depth[x], x)):
            if ball.depth[u] + 1 > ball.radius:
                continue  # moved children must stay visible in the ball
            wu = world.word_of[u]
            if not wu:
                # Plant at the base: fixing the color toward the fixed side
                # fixes that entire branch pointwise.
                locked = world.word_of[s_star][0]
                for tau in group:
                    if tau != ident and tau[locked - 1] == locked:
                        return Portrait(world, (), {(): tau}).restrict()
                continue
            if s_star is not None:
                anc = world.word_of[s_star]
                if wu == anc[:len(wu)] or anc == wu[:len(anc)]:
                    continue  # ancestors/descendants of the fixed cone
            parent_color = wu[-1]
            for tau in group:
                if tau != ident and tau[parent_color - 1] == parent_color:
                    return Portrait(world, (), {wu: tau}).restrict()
        return None
    ident_key = identity_aut(world).restrict().key()
    for g in gb:
        if g.key() == ident_key:
            continue
        if all(g.mapping.get(x) == x for x in fixed_side):
            return g
    return None


@dataclass(frozen=True)
class ContractionCertificate:
    """A witness x with the exact depths to which each conjugate fixes B(v, .)."""

    witness: FiniteTreeAutomorphism
    depths: tuple[int, ...]
    side: HalfTreeRef
    displacements: tuple[int, ...]
    certified_radius: int


@dataclass(frozen=True)
class NoWitness:
    reason: str


def contraction_witness_search(seq: Sequence[FiniteTreeAutomorphism], gb: GroupBall,
                               v: int) -> ContractionCertificate | NoWitness:
    """Run the half-tree witness construction along an unbounded family.

    Deterministic version of the subsequence argument: group the family by
    the first-step neighbor w of the path v -> g(v) and keep the largest
    class (ties by vertex id); split that class into translations through v
    and the rest and keep the larger part (ties to translations).  For
    translations the witness fixes the half-tree at v; otherwise the
    half-tree at w.  Depths of agreement of g x g^-1 with the identity are
    reported exactly, capped by the ball radius.
    """
    world = gb.world
    ball = gb.ball
    radius = ball.radius - ball.depth[v]
    if is_bounded(seq, v, radius):
        return NoWitness("bounded")
    if not ball.is_interior(v):
        raise CertificationError("base vertex must be interior")

    word_v = world.word_of[v]
    moved = []
    for g in seq:
        if g.exact is None:
            raise CertificationError("contraction search needs exact evaluators")
        img = g.exact.image_word(word_v)
        d = word_distance(word_v, img)
        if d == 0:
            continue
        first = next(word_append(word_v, c) for c in range(1, world.degree + 1)
                     if word_distance(word_append(word_v, c), img) == d - 1)
        moved.append((g, d, first))
    if not moved:
        return NoWitness("no element moves the base vertex")

    classes: dict[Word, list] = {}
    for item in moved:
        classes.setdefault(item[2], []).append(item)
    first_word = max(classes, key=lambda w: (len(classes[w]), -world.id_of[w]))
    family = classes[first_word]
    w_vertex = world.id_of[first_word]

    translations, others = [], []
    for g, d, _ in family:
        img2 = g.exact.image_word(g.exact.image_word(word_v))
        (translations if word_distance(word_v, img2) == 2 * d else others).append((g, d))
    if len(translations) >= len(others):
        family2, side = translations, v          # witness fixes the half at v
    else:
        family2, side = others, w_vertex         # witness fixes the half at w
    if not family2:
        return NoWitness("no usable subfamily after the case split")

    href = HalfTreeRef((v, w_vertex), side)
    x = half_tree_fixator_witness(gb, href)
    if x is None:
        return NoWitness("no half-tree fixator witness at this depth")

    ident = identity_aut(world).restrict()
    depths, disps = [], []
    for g, d in family2:
        conj = g.exact.compose(x.exact).compose(g.exact.inverse()).restrict()
        depths.append(agreement_depth(conj, ident, v))
        disps.append(d)
    cert = ContractionCertificate(x, tuple(depths), href, tuple(disps), radius)
    for depth, d in zip(depths, disps):
        if depth < min(d, radius):
            raise AssertionError(
                f"conjugated witness fixes only B(v,{depth}) but the construction promises {min(d, radius)}")
    return cert
