"""Bruhat-style KAK decomposition for type-preserving building automorphisms.

Representatives are indexed by Coxeter elements: a_w is the composite of the
apartment reflections along the ShortLex word of w, so it stabilises the
standard apartment setwise and sends the base chamber to the apartment
chamber of w.  Factorisation aligns an arbitrary automorphism back to the
standard apartment with panel rotations along a minimal gallery; the
contraction pipeline chains the root-growth search with wing-fixator
witnesses and reports exact fixed-ball radii.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coxeter_ra import (
    CoxElement,
    is_irreducible,
    is_spherical,
    root_growth_search,
)
from .errors import CertificationError
from .rab import (
    ApartmentRef,
    BasePanelPermutation,
    BuildingAut,
    BuildingSpec,
    Chamber,
    ChamberBall,
    CompositeAut,
    FiniteBuildingAutomorphism,
    IdentityAut,
    PanelRotation,
    RootRef,
    apartment_chamber,
    chamber_inverse,
    chamber_product,
    dist_chamber_to_root,
    gallery_distance,
    identity_chamber,
    weyl_distance,
    wing_contains,
    _initial_syllable_position,
    _nontrivial_wing_sigmas,
)


def _reflection(spec: BuildingSpec, ap: ApartmentRef, s: int) -> BasePanelPermutation:
    q = spec.q(s)
    y = ap.color_choice[s]
    rho = list(range(q))
    rho[0], rho[y] = y, 0
    return BasePanelPermutation(spec, s, tuple(rho))


def representative_aut(spec: BuildingSpec, ap: ApartmentRef, w: CoxElement) -> BuildingAut:
    """a_w: the composite of apartment reflections along the ShortLex word of w."""
    if not w.word:
        return IdentityAut(spec)
    return CompositeAut(spec, tuple(_reflection(spec, ap, s) for s in w.word))


@dataclass(frozen=True)
class BuildingCartan:
    """Base chamber, apartment, and one representative a_w per Coxeter element."""

    spec: BuildingSpec
    apartment: ApartmentRef
    max_length: int
    reps: dict[tuple[int, ...], BuildingAut]

    def rep_for(self, w: CoxElement) -> BuildingAut:
        aut = self.reps.get(w.word)
        if aut is None:
            raise CertificationError(f"no representative enumerated for {w}")
        return aut


def representatives(spec: BuildingSpec, max_length: int,
                    guard: int | None = None) -> BuildingCartan:
    """a_w for every l(w) <= max_length, with delta(C, a_w C) = w certified."""
    from .coxeter_ra import enumerate_elements
    ap = ApartmentRef.default(spec)
    base = identity_chamber(spec)
    reps: dict[tuple[int, ...], BuildingAut] = {}
    for w in enumerate_elements(spec.system, max_length, guard=guard):
        aut = representative_aut(spec, ap, w)
        target = apartment_chamber(spec, ap, w)
        if aut.image(base) != target:
            raise AssertionError(f"representative for {w} misses its apartment chamber")
        if weyl_distance(base, aut.image(base)) != w:
            raise AssertionError(f"representative for {w} has wrong Weyl distance")
        reps[w.word] = aut
    return BuildingCartan(spec, ap, max_length, reps)


@dataclass(frozen=True)
class BuildingFactorization:
    k: FiniteBuildingAutomorphism
    w: CoxElement
    a: BuildingAut
    k_prime: FiniteBuildingAutomorphism


def _align_to_apartment(bc: BuildingCartan, target: Chamber) -> BuildingAut:
    """A base-fixing automorphism k with k(target) = the apartment chamber of delta(C, target).

    Built constructively: walk the ShortLex word of the Weyl distance and at
    each prefix chamber rotate the next panel color onto the apartment color.
    Each rotation is based at a chamber whose wing contains the base, so the
    composite fixes the base chamber.
    """
    spec = bc.spec
    ap = bc.apartment
    w = weyl_distance(identity_chamber(spec), target)
    parts = []
    prefix = identity_chamber(spec)
    cur = target
    for s in w.word:
        x = list(chamber_product(chamber_inverse(prefix), cur).syllables)
        pos = _initial_syllable_position(spec, x, {s})
        if pos is None:
            raise AssertionError("gallery alignment lost the expected panel direction")
        c = x[pos][1]
        y = ap.color_choice[s]
        if c != y:
            sigma = list(range(spec.q(s)))
            sigma[c], sigma[y] = y, c
            rot = PanelRotation(spec, prefix, s, tuple(sigma))
            parts.append(rot)
            cur = rot.image(cur)
        prefix = chamber_product(prefix, Chamber(spec, ((s, y),)))
    k = CompositeAut(spec, tuple(reversed(parts))) if parts else IdentityAut(spec)
    if k.image(target) != apartment_chamber(spec, ap, w):
        raise AssertionError("alignment did not reach the standard apartment")
    return k


def factorize(g: FiniteBuildingAutomorphism, bc: BuildingCartan,
              ball: ChamberBall) -> BuildingFactorization:
    """g = k a_w k' with k, k' fixing the base chamber, verified on the ball."""
    if g.exact is None:
        raise CertificationError("building factorization needs an exact evaluator")
    spec = bc.spec
    base = identity_chamber(spec)
    target = g.exact.image(base)
    w = weyl_distance(base, target)
    if len(w.word) > bc.max_length:
        raise CertificationError(
            f"delta(C, g(C)) has length {len(w.word)} > enumerated {bc.max_length}")
    k_align = _align_to_apartment(bc, target)
    a = bc.rep_for(w)
    k_prime_exact = a.inverse().compose(k_align).compose(g.exact)
    if k_prime_exact.image(base) != base:
        raise AssertionError("residual factor does not fix the base chamber")
    k = k_align.inverse().restrict(ball)
    k_prime = k_prime_exact.restrict(ball)
    product = k_align.inverse().compose(a).compose(k_prime_exact)
    for C in ball.chambers:
        if product.image(C) != g.exact.image(C):
            raise AssertionError("factorization product disagrees with g on the ball")
    return BuildingFactorization(k, w, a, k_prime)


@dataclass(frozen=True)
class DisjointnessReport:
    """Certificate that the double cosets K a_w K are pairwise disjoint.

    Type-preserving elements of K fix the base chamber, so
    delta(C, k1 a_w k2 C) = delta(C, a_w C) = w; distinct labels therefore
    give disjoint cosets once every representative is verified to realise
    its label.  No enumeration of K is involved.
    """

    checked: int
    labels_realized: bool
    labels_distinct: bool

    @property
    def disjoint(self) -> bool:
        return self.labels_realized and self.labels_distinct


def double_coset_disjointness_check(bc: BuildingCartan) -> DisjointnessReport:
    spec = bc.spec
    base = identity_chamber(spec)
    seen = set()
    realized = True
    for word, aut in bc.reps.items():
        w = weyl_distance(base, aut.image(base))
        realized = realized and (w.word == word)
        seen.add(w.word)
    return DisjointnessReport(len(bc.reps), realized, len(seen) == len(bc.reps))


@dataclass(frozen=True)
class BuildingContractionCertificate:
    """Witness x plus, per chain element, the translated-root data and radii.

    For each w_k in the chain: the conjugate a_{w_k} x a_{w_k}^-1 lies in the
    wing fixator of the translated opposite root (checked pointwise on the
    ball) and fixes B(C, d_k - 1) pointwise, where d_k = d(C, w_k(alpha)).
    """

    witness: FiniteBuildingAutomorphism
    generator: str
    chain_words: tuple[tuple[str, ...], ...]
    distances: tuple[int, ...]
    fixed_ball_radii: tuple[int, ...]
    certified_radius: int


@dataclass(frozen=True)
class NoBuildingWitness:
    reason: str


def building_contraction_witness(ws, spec: BuildingSpec, max_length: int,
                                 guard: int | None = None):
    """Chain the root-growth search with a wing-fixator witness and verify radii.

    Steps: (1) find a generator s and a subfamily w_k with
    d(C, w_k(alpha_s)) strictly increasing; (2) take a nontrivial panel
    rotation fixing the wing on the far side of the base s-panel; (3) for
    each k, certify on the ball that the conjugated witness lies in the
    translated root's wing fixator and fixes B(C, d_k - 1) pointwise.
    """
    if not is_irreducible(spec.system):
        raise ValueError("system must be irreducible")
    if is_spherical(spec.system, spec.system.generators):
        raise ValueError("system must be non-spherical")
    if not spec.is_thick():
        return NoBuildingWitness("trivial wing fixator: some panel has only two chambers")

    chain = root_growth_search(ws, guard=guard)
    s = spec.system.index_of(chain.generator)
    ap = ApartmentRef.default(spec)
    ball = ChamberBall(spec, max_length, guard=guard)
    base = identity_chamber(spec)

    # x fixes the wing of the opposite wall chamber of alpha_s and rotates the rest.
    opposite = apartment_chamber(spec, ap, CoxElement(spec.system, (s,)))
    sigma = _nontrivial_wing_sigmas(spec.q(s))[0]
    x_exact = PanelRotation(spec, opposite, s, sigma)
    x = x_exact.restrict(ball)
    if x.is_identity_on_ball():
        return NoBuildingWitness("wing fixator witness is trivial on the ball")

    distances = []
    radii = []
    for w_k, d_expected in zip(chain.chain, chain.distances):
        a = representative_aut(spec, ap, w_k)
        conj = a.compose(x_exact).compose(a.inverse())
        root_k = RootRef(ap, w_k, s)
        d_k = dist_chamber_to_root(base, root_k, ball)
        if d_k != d_expected:
            raise AssertionError(
                f"ball distance {d_k} to the translated root disagrees with the Coxeter oracle {d_expected}")
        _, opp_k = root_k.wall_chambers(spec)
        radius = d_k - 1
        for C in ball.chambers:
            img = conj.image(C)
            if wing_contains(opp_k, s, C) and img != C:
                raise AssertionError("conjugated witness moves the translated opposite wing")
            if gallery_distance(base, C) <= radius and img != C:
                raise AssertionError(
                    f"conjugated witness moves B(C,{radius}) at distance {gallery_distance(base, C)}")
        distances.append(d_k)
        radii.append(radius)
    return BuildingContractionCertificate(
        witness=x,
        generator=chain.generator,
        chain_words=tuple(w.names() for w in chain.chain),
        distances=tuple(distances),
        fixed_ball_radii=tuple(radii),
        certified_radius=max_length,
    )
