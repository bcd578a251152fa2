"""Semi-regular right-angled buildings as graph products of finite cyclic groups.

Chambers are normal-form words of colored syllables (s, c) with c in
Z/q_s - {0}; the type word (colors forgotten) is the ShortLex reduced word of
the underlying right-angled Coxeter system.  This is the standard model of
the unique semi-regular right-angled building with parameters (q_s): panels
are cosets of the cyclic factors, the Weyl distance is the type word of
C^-1 D, and apartments arise from fixing one color per generator.

Automorphisms are evaluated exactly on chambers (panel rotations, base-panel
permutations and their composites); ball objects only certify and serialize.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .coxeter_ra import (
    CoxElement,
    RACoxeterSystem,
    invert as cox_invert,
    multiply as cox_multiply,
    root_contains,
)
from .errors import CertificationError, check_guard

Syllable = tuple[int, int]  # (generator index, color in 1..q-1)


@dataclass(frozen=True)
class BuildingSpec:
    """A right-angled Coxeter system with one panel cardinality per generator."""

    system: RACoxeterSystem
    parameters: dict[str, int] = field(hash=False)

    def __post_init__(self):
        for s in self.system.generators:
            q = self.parameters.get(s)
            if q is None or q < 2:
                raise ValueError(f"panel size q_{s} must be >= 2")

    def q(self, gen_index: int) -> int:
        return self.parameters[self.system.generators[gen_index]]

    def is_thick(self) -> bool:
        return all(q >= 3 for q in self.parameters.values())

    def to_json(self) -> dict:
        return {"coxeter": self.system.to_json(), "parameters": dict(self.parameters)}

    @classmethod
    def from_json(cls, data: dict) -> "BuildingSpec":
        return cls(RACoxeterSystem.from_json(data["coxeter"]), dict(data["parameters"]))


def _insert_syllable(spec: BuildingSpec, syls: list[Syllable], s: int, c: int) -> None:
    """Multiply on the right by (s, c), merging with a visible same-type syllable.

    A zero merge deletes the syllable; letters that sat between the merged
    pair may then become mergeable themselves, so the tail is re-inserted.
    """
    c %= spec.q(s)
    if c == 0:
        return
    system = spec.system
    for i in range(len(syls) - 1, -1, -1):
        t, c2 = syls[i]
        if t == s:
            merged = (c2 + c) % spec.q(s)
            if merged:
                syls[i] = (s, merged)
            else:
                tail = syls[i + 1:]
                del syls[i:]
                for t2, c3 in tail:
                    _insert_syllable(spec, syls, t2, c3)
            return
        if not system.commutes(t, s):
            break
    syls.append((s, c))


def _lex_minimize_syllables(spec: BuildingSpec, syls: Sequence[Syllable]) -> tuple[Syllable, ...]:
    system = spec.system
    rem = list(syls)
    out: list[Syllable] = []
    while rem:
        best = 0
        for i in range(1, len(rem)):
            if rem[i][0] < rem[best][0] and all(system.commutes(rem[j][0], rem[i][0]) for j in range(i)):
                best = i
        out.append(rem.pop(best))
    return tuple(out)


@dataclass(frozen=True)
class Chamber:
    """A chamber in graph-product normal form (ShortLex type word, nonzero colors)."""

    spec: BuildingSpec = field(compare=False, hash=False)
    syllables: tuple[Syllable, ...] = ()

    def type_word(self) -> CoxElement:
        return CoxElement(self.spec.system, tuple(s for s, _ in self.syllables))

    def __str__(self) -> str:
        if not self.syllables:
            return "1"
        names = self.spec.system.generators
        return " ".join(f"{names[s]}^{c}" for s, c in self.syllables)

    def to_json(self) -> list:
        return [[self.spec.system.generators[s], c] for s, c in self.syllables]


def make_chamber(spec: BuildingSpec, syllables: Iterable[tuple[int | str, int]]) -> Chamber:
    syls: list[Syllable] = []
    for s, c in syllables:
        idx = spec.system.index_of(s) if isinstance(s, str) else s
        _insert_syllable(spec, syls, idx, c)
    return Chamber(spec, _lex_minimize_syllables(spec, syls))


def chamber_from_json(spec: BuildingSpec, data: list) -> Chamber:
    return make_chamber(spec, [(name, c) for name, c in data])


def identity_chamber(spec: BuildingSpec) -> Chamber:
    return Chamber(spec, ())


def chamber_product(C: Chamber, D: Chamber) -> Chamber:
    if C.spec is not D.spec and C.spec != D.spec:
        raise ValueError("chambers from different building specs")
    return make_chamber(C.spec, C.syllables + D.syllables)


def chamber_inverse(C: Chamber) -> Chamber:
    inv = [(s, -c) for s, c in reversed(C.syllables)]
    return make_chamber(C.spec, inv)


def weyl_distance(C: Chamber, D: Chamber) -> CoxElement:
    return chamber_product(chamber_inverse(C), D).type_word()


def gallery_distance(C: Chamber, D: Chamber) -> int:
    return len(weyl_distance(C, D).word)


def panel(C: Chamber, s: int | str) -> frozenset[Chamber]:
    spec = C.spec
    idx = spec.system.index_of(s) if isinstance(s, str) else s
    return frozenset(chamber_product(C, make_chamber(spec, [(idx, c)]))
                     for c in range(spec.q(idx)))


def _initial_syllable_position(spec: BuildingSpec, syls: Sequence[Syllable], types: set[int]) -> int | None:
    system = spec.system
    for i, (t, _) in enumerate(syls):
        if t in types and all(system.commutes(syls[j][0], t) for j in range(i)):
            return i
    return None


def project(C: Chamber, J: Iterable[int | str], D: Chamber) -> Chamber:
    """Gate of D onto the J-residue of C: C times the maximal J-prefix of C^-1 D."""
    spec = C.spec
    types = {spec.system.index_of(s) if isinstance(s, str) else s for s in J}
    x = list(chamber_product(chamber_inverse(C), D).syllables)
    prefix: list[Syllable] = []
    while True:
        pos = _initial_syllable_position(spec, x, types)
        if pos is None:
            break
        prefix.append(x.pop(pos))
    return chamber_product(C, Chamber(spec, tuple(prefix)))


def wing_contains(C: Chamber, s: int | str, D: Chamber) -> bool:
    """Whether D projects onto C on C's s-panel (D lies in the s-wing of C)."""
    return project(C, [s], D) == C


@dataclass(frozen=True)
class ApartmentRef:
    """One chamber per Coxeter element: fix a color y_s for every generator."""

    color_choice: tuple[int, ...]  # indexed by generator

    @classmethod
    def default(cls, spec: BuildingSpec) -> "ApartmentRef":
        return cls((1,) * spec.system.rank)


def apartment_chamber(spec: BuildingSpec, ap: ApartmentRef, w: CoxElement) -> Chamber:
    return make_chamber(spec, [(s, ap.color_choice[s]) for s in w.word])


def in_apartment(spec: BuildingSpec, ap: ApartmentRef, C: Chamber) -> bool:
    return all(c == ap.color_choice[s] for s, c in C.syllables)


@dataclass(frozen=True)
class RootRef:
    """The root u.alpha_s of the chosen apartment, with wall at u's s-panel."""

    apartment: ApartmentRef
    base_translate: CoxElement
    stype: int

    def wall_chambers(self, spec: BuildingSpec) -> tuple[Chamber, Chamber]:
        """(chamber inside the root, chamber on the opposite side)."""
        u = self.base_translate
        inside = apartment_chamber(spec, self.apartment, u)
        s_el = CoxElement(u.system, (self.stype,))
        outside = apartment_chamber(spec, self.apartment, cox_multiply(u, s_el))
        return inside, outside

    def contains(self, spec: BuildingSpec, C: Chamber) -> bool:
        if not in_apartment(spec, self.apartment, C):
            return False
        x = cox_multiply(cox_invert(self.base_translate), C.type_word())
        return root_contains(spec.system.generators[self.stype], x)


class ChamberBall:
    """All chambers at gallery distance <= radius from the identity chamber."""

    def __init__(self, spec: BuildingSpec, radius: int, guard: int | None = None):
        self.spec = spec
        self.radius = radius
        chambers = [identity_chamber(spec)]
        seen = {chambers[0].syllables}
        frontier = chambers[:]
        for _ in range(radius):
            nxt = []
            for C in frontier:
                for s in range(spec.system.rank):
                    for c in range(1, spec.q(s)):
                        D = chamber_product(C, make_chamber(spec, [(s, c)]))
                        if len(D.syllables) == len(C.syllables) + 1 and D.syllables not in seen:
                            seen.add(D.syllables)
                            nxt.append(D)
            check_guard(len(seen), guard, "chamber ball enumeration")
            chambers.extend(nxt)
            frontier = nxt
        self.chambers: tuple[Chamber, ...] = tuple(
            sorted(chambers, key=lambda C: (len(C.syllables), C.syllables)))
        self.index: dict[tuple[Syllable, ...], int] = {
            C.syllables: i for i, C in enumerate(self.chambers)}

    def __len__(self) -> int:
        return len(self.chambers)

    def __contains__(self, C: Chamber) -> bool:
        return C.syllables in self.index

    def base(self) -> Chamber:
        return self.chambers[0]

    def is_interior(self, C: Chamber) -> bool:
        return len(C.type_word().word) < self.radius

    def panel_members(self, C: Chamber, s: int | str) -> tuple[list[Chamber], bool]:
        """Panel chambers inside the ball, with a completeness flag."""
        full = panel(C, s)
        members = [D for D in full if D in self]
        return sorted(members, key=lambda D: D.syllables), len(members) == len(full)

    def sphere_sizes(self) -> list[int]:
        sizes = [0] * (self.radius + 1)
        for C in self.chambers:
            sizes[len(C.type_word().word)] += 1
        return sizes


def chamber_count_oracle(spec: BuildingSpec, radius: int) -> int:
    """Independent count: sum over reduced type words of prod (q_s - 1)."""
    from .coxeter_ra import enumerate_elements
    total = 0
    for w in enumerate_elements(spec.system, radius):
        prod = 1
        for s in w.word:
            prod *= spec.q(s) - 1
        total += prod
    return total


def dist_chamber_to_root(C: Chamber, r: RootRef, ball: ChamberBall) -> int:
    """BFS gallery distance within the ball from C to the root's apartment chambers."""
    spec = ball.spec
    if r.contains(spec, C):
        return 0
    frontier = {C.syllables}
    seen = {C.syllables}
    dist = 0
    while frontier:
        nxt = set()
        for key in frontier:
            Ch = Chamber(spec, key)
            for s in range(spec.system.rank):
                for c in range(1, spec.q(s)):
                    D = chamber_product(Ch, make_chamber(spec, [(s, c)]))
                    if D in ball and D.syllables not in seen:
                        seen.add(D.syllables)
                        nxt.add(D.syllables)
        dist += 1
        for key in nxt:
            if r.contains(spec, Chamber(spec, key)):
                return dist
        frontier = nxt
    raise CertificationError("root chambers not represented in the ball")


# ---------------------------------------------------------------------------
# exact building automorphisms

class BuildingAut:
    """Total, exact, type-preserving automorphism in the graph-product model."""

    spec: BuildingSpec

    def image(self, C: Chamber) -> Chamber:
        raise NotImplementedError

    def inverse(self) -> "BuildingAut":
        raise NotImplementedError

    def compose(self, other: "BuildingAut") -> "BuildingAut":
        mine = self.parts if isinstance(self, CompositeAut) else (self,)
        theirs = other.parts if isinstance(other, CompositeAut) else (other,)
        return CompositeAut(self.spec, mine + theirs)

    def restrict(self, ball: ChamberBall) -> "FiniteBuildingAutomorphism":
        mapping = {}
        for i, C in enumerate(ball.chambers):
            img = self.image(C)
            j = ball.index.get(img.syllables)
            if j is not None:
                mapping[i] = j
        return FiniteBuildingAutomorphism(ball, mapping, exact=self)

    def fixes(self, C: Chamber) -> bool:
        return self.image(C) == C


class IdentityAut(BuildingAut):
    def __init__(self, spec: BuildingSpec):
        self.spec = spec

    def image(self, C: Chamber) -> Chamber:
        return C

    def inverse(self) -> BuildingAut:
        return self


class PanelRotation(BuildingAut):
    """Rotate the colors of the s-prefix relative to a base chamber.

    sigma is a permutation of {0..q_s-1} with sigma(0) = 0: chambers whose
    Weyl word from C has no initial s-syllable (the s-wing of C) are fixed;
    a chamber C.(s,c).E goes to C.(s,sigma(c)).E.
    """

    def __init__(self, spec: BuildingSpec, base: Chamber, stype: int, sigma: tuple[int, ...]):
        q = spec.q(stype)
        if len(sigma) != q or sorted(sigma) != list(range(q)):
            raise ValueError(f"sigma must be a permutation of 0..{q - 1}")
        if sigma[0] != 0:
            raise ValueError("panel rotations must fix the color 0 (the wing of the base chamber)")
        self.spec = spec
        self.base = base
        self.stype = stype
        self.sigma = tuple(sigma)

    def image(self, C: Chamber) -> Chamber:
        spec = self.spec
        x = list(chamber_product(chamber_inverse(self.base), C).syllables)
        pos = _initial_syllable_position(spec, x, {self.stype})
        if pos is None:
            return C
        _, c = x.pop(pos)
        head = make_chamber(spec, [(self.stype, self.sigma[c])])
        return chamber_product(self.base, chamber_product(head, Chamber(spec, tuple(x))))

    def inverse(self) -> BuildingAut:
        inv = [0] * len(self.sigma)
        for i, v in enumerate(self.sigma):
            inv[v] = i
        return PanelRotation(self.spec, self.base, self.stype, tuple(inv))


class BasePanelPermutation(BuildingAut):
    """Permute all q_s wings at the base chamber's s-panel (rho(0) may be nonzero).

    With rho the transposition (0 y_s) this is the apartment reflection: it
    maps the apartment chamber of w to that of sw for every w.
    """

    def __init__(self, spec: BuildingSpec, stype: int, rho: tuple[int, ...]):
        q = spec.q(stype)
        if len(rho) != q or sorted(rho) != list(range(q)):
            raise ValueError(f"rho must be a permutation of 0..{q - 1}")
        self.spec = spec
        self.stype = stype
        self.rho = tuple(rho)

    def image(self, C: Chamber) -> Chamber:
        spec = self.spec
        x = list(C.syllables)
        pos = _initial_syllable_position(spec, x, {self.stype})
        c = 0
        if pos is not None:
            _, c = x.pop(pos)
        new_c = self.rho[c]
        head = make_chamber(spec, [(self.stype, new_c)] if new_c else [])
        return chamber_product(head, Chamber(spec, tuple(x)))

    def inverse(self) -> BuildingAut:
        inv = [0] * len(self.rho)
        for i, v in enumerate(self.rho):
            inv[v] = i
        return BasePanelPermutation(self.spec, self.stype, tuple(inv))


class CompositeAut(BuildingAut):
    def __init__(self, spec: BuildingSpec, parts: tuple[BuildingAut, ...]):
        self.spec = spec
        self.parts = parts

    def image(self, C: Chamber) -> Chamber:
        for part in reversed(self.parts):
            C = part.image(C)
        return C

    def inverse(self) -> BuildingAut:
        return CompositeAut(self.spec, tuple(p.inverse() for p in reversed(self.parts)))


@dataclass(frozen=True)
class FiniteBuildingAutomorphism:
    """Ball view of a type-preserving automorphism (partial, injective)."""

    ball: ChamberBall = field(compare=False, hash=False)
    mapping: dict[int, int] = field(hash=False)
    exact: BuildingAut | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        images = set(self.mapping.values())
        if len(images) != len(self.mapping):
            raise ValueError("mapping is not injective")
        ball = self.ball
        for i, j in self.mapping.items():
            Ci, Cj = ball.chambers[i], ball.chambers[j]
            for s in range(ball.spec.system.rank):
                for D in panel(Ci, s):
                    di = ball.index.get(D.syllables)
                    if di is not None and di in self.mapping:
                        w = weyl_distance(Cj, ball.chambers[self.mapping[di]])
                        if D != Ci and w.word != (s,):
                            raise ValueError("mapping does not preserve s-adjacency")

    def __call__(self, C: Chamber) -> Chamber | None:
        i = self.ball.index.get(C.syllables)
        if i is None or i not in self.mapping:
            return None
        return self.ball.chambers[self.mapping[i]]

    def key(self) -> tuple:
        return tuple(sorted(self.mapping.items()))

    def is_identity_on_ball(self) -> bool:
        return all(i == j for i, j in self.mapping.items())


def panel_rotation(ball: ChamberBall, C: Chamber, s: int | str,
                   sigma: Sequence[int]) -> FiniteBuildingAutomorphism:
    spec = ball.spec
    idx = spec.system.index_of(s) if isinstance(s, str) else s
    return PanelRotation(spec, C, idx, tuple(sigma)).restrict(ball)


def _nontrivial_wing_sigmas(q: int) -> list[tuple[int, ...]]:
    """All permutations of 0..q-1 fixing 0, except the identity."""
    import itertools
    out = []
    for perm in itertools.permutations(range(1, q)):
        sigma = (0,) + perm
        if sigma != tuple(range(q)):
            out.append(sigma)
    return out


def wing_fixator(ball: ChamberBall, C: Chamber, s: int | str,
                 guard: int | None = None) -> list[FiniteBuildingAutomorphism]:
    """Generators of the fixator of the s-wing of C, certified on the ball.

    Panel rotations at C of type s fix the wing by construction; rotations
    based at other chambers are kept when their support (checked chamber by
    chamber on the ball) stays off the wing.
    """
    spec = ball.spec
    idx = spec.system.index_of(s) if isinstance(s, str) else s
    wing_flags = {i: wing_contains(C, idx, D) for i, D in enumerate(ball.chambers)}
    gens: dict[tuple, FiniteBuildingAutomorphism] = {}
    for sigma in _nontrivial_wing_sigmas(spec.q(idx)):
        g = panel_rotation(ball, C, idx, sigma)
        gens[g.key()] = g
    for D in ball.chambers:
        for t in range(spec.system.rank):
            for sigma in _nontrivial_wing_sigmas(spec.q(t)):
                if D == C and t == idx:
                    continue
                aut = PanelRotation(spec, D, t, sigma)
                support_off_wing = all(
                    aut.image(E) == E
                    for j, E in enumerate(ball.chambers) if wing_flags[j]
                )
                if support_off_wing:
                    g = aut.restrict(ball)
                    gens.setdefault(g.key(), g)
        check_guard(len(gens), guard, "wing fixator generators")
    return list(gens.values())


def check_root_fixes_ball(ball: ChamberBall, r: RootRef, n: int) -> bool | str:
    """Whether every generator of the opposite root's wing fixator fixes B(base, n).

    Inapplicable (returned as the string "inapplicable") unless the root is
    at distance > n from the base chamber.
    """
    spec = ball.spec
    d = dist_chamber_to_root(ball.base(), r, ball)
    if d <= n:
        return "inapplicable"
    _, opposite = r.wall_chambers(spec)
    gens = wing_fixator(ball, opposite, r.stype)
    base = ball.base()
    for g in gens:
        for C in ball.chambers:
            if gallery_distance(base, C) <= n:
                img = g(C)
                if img is not None and img != C:
                    return False
                if img is None and g.exact is not None and not g.exact.fixes(C):
                    return False
    return True
