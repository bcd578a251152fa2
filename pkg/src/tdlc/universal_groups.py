"""Universal groups on regular trees via legal edge colorings.

Vertices of the degree-d tree are addressed by reduced color words: tuples
over {1..d} with no two consecutive letters equal, the empty word being the
base vertex.  The edge {u, u.c} carries color c at both ends, which is a
legal coloring (colors around every vertex are pairwise distinct).

An automorphism is determined by the image of the base vertex together with
its local action (a color permutation) at every vertex.  The Portrait class
stores finitely many local actions explicitly and extends canonically: at an
unstored vertex the local action is the identity when that is consistent,
and otherwise the unique transposition forced by the parent edge.  Portraits
with empty tables are exactly the left translations by reduced words.
Composites and inverses are evaluated lazily, so group arithmetic is exact
at any depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CertificationError, check_guard
from .tree_core import TreeBall, build_regular_ball, distance, half_tree_vertices, HalfTreeRef
from .tree_aut import FiniteTreeAutomorphism, compose, invert

Word = tuple[int, ...]
Perm = tuple[int, ...]  # perm[i] is the image of color i+1


# ---------------------------------------------------------------------------
# words and color permutations

def is_reduced_word(word: Word, degree: int) -> bool:
    return all(1 <= c <= degree for c in word) and \
        all(a != b for a, b in zip(word, word[1:]))


def word_append(word: Word, color: int) -> Word:
    """Step to the neighbor across the `color` edge (append with cancellation)."""
    if word and word[-1] == color:
        return word[:-1]
    return word + (color,)


def word_mul(u: Word, v: Word) -> Word:
    out = u
    for c in v:
        out = word_append(out, c)
    return out


def word_inv(u: Word) -> Word:
    return u[::-1]


def word_distance(u: Word, v: Word) -> int:
    k = 0
    for a, b in zip(u, v):
        if a != b:
            break
        k += 1
    return len(u) + len(v) - 2 * k


def perm_identity(d: int) -> Perm:
    return tuple(range(1, d + 1))


def perm_mul(a: Perm, b: Perm) -> Perm:
    """a after b."""
    return tuple(a[b[i] - 1] for i in range(len(a)))


def perm_inv(a: Perm) -> Perm:
    out = [0] * len(a)
    for i, v in enumerate(a):
        out[v - 1] = i + 1
    return tuple(out)


def perm_transposition(d: int, a: int, b: int) -> Perm:
    out = list(range(1, d + 1))
    out[a - 1], out[b - 1] = b, a
    return tuple(out)


def is_perm(t: tuple[int, ...], d: int) -> bool:
    return len(t) == d and sorted(t) == list(range(1, d + 1))


# ---------------------------------------------------------------------------
# colored balls: TreeBall plus the id <-> word dictionary

class ColorBall:
    """A regular TreeBall together with the canonical legal coloring.

    Root children get colors 1..d in child order; at any other vertex the
    parent edge keeps its color and the children receive the remaining
    colors in ascending order.  Vertex ids and color words are then in
    bijection, BFS order matching length-lexicographic order.
    """

    def __init__(self, degree: int, radius: int):
        self.degree = degree
        self.ball = build_regular_ball(degree, radius)
        word_of: list[Word] = [()] * self.ball.vertex_count
        for v in self.ball.vertices():
            parent = self.ball.parent[v]
            if parent < 0:
                word_of[v] = ()
                continue
            pw = word_of[parent]
            taken = pw[-1] if pw else None
            colors = [c for c in range(1, degree + 1) if c != taken]
            slot = self.ball.children[parent].index(v)
            word_of[v] = pw + (colors[slot],)
        self.word_of: tuple[Word, ...] = tuple(word_of)
        self.id_of: dict[Word, int] = {w: v for v, w in enumerate(self.word_of)}

    @property
    def radius(self) -> int:
        return self.ball.radius

    def contains_word(self, w: Word) -> bool:
        return w in self.id_of

    def edge_color(self, u: int, v: int) -> int:
        if self.ball.parent[v] == u:
            return self.word_of[v][-1]
        if self.ball.parent[u] == v:
            return self.word_of[u][-1]
        raise ValueError(f"not an edge: ({u},{v})")

    def neighbor_by_color(self, v: int, color: int) -> int | None:
        return self.id_of.get(word_append(self.word_of[v], color))

    def word_sphere(self, center: Word, radius: int) -> list[Word]:
        """Addresses at tree distance exactly `radius` from center (may leave the ball)."""
        sphere = [center]
        for k in range(radius):
            nxt = []
            for w in sphere:
                for c in range(1, self.degree + 1):
                    nw = word_append(w, c)
                    if word_distance(nw, center) == k + 1:
                        nxt.append(nw)
            sphere = nxt
        return sphere


@dataclass(frozen=True)
class LegalColoring:
    """The per-vertex bijective edge coloring of a ColorBall, in spec form."""

    world: ColorBall = field(compare=False)

    def color(self, v: int, neighbor: int) -> int:
        return self.world.edge_color(v, neighbor)

    def to_json(self) -> dict:
        edges = sorted(
            [min(u, v), max(u, v), self.world.edge_color(u, v)]
            for u, v in self.world.ball.edges()
        )
        return {"ball": self.world.ball.to_json(),
                "degree": self.world.degree, "colors": edges}


# ---------------------------------------------------------------------------
# exact automorphism evaluators

class ExactAut:
    """Shared behaviour for exact evaluators over a common ColorBall world."""

    world: ColorBall

    def image_word(self, u: Word) -> Word:
        raise NotImplementedError

    def local_action(self, prefix: Word) -> Perm:
        raise NotImplementedError

    def compose(self, other: "ExactAut") -> "ExactAut":
        parts = (self.parts if isinstance(self, Composite) else (self,)) + \
                (other.parts if isinstance(other, Composite) else (other,))
        return Composite(self.world, parts)

    def inverse(self) -> "ExactAut":
        return Inverse(self.world, self)

    def restrict(self, ball: TreeBall | None = None) -> FiniteTreeAutomorphism:
        """Ball portrait of this automorphism (images outside the ball dropped)."""
        world = self.world
        if ball is not None and ball != world.ball:
            raise ValueError("restriction ball must be the evaluator's world ball")
        mapping = {}
        for v in world.ball.vertices():
            img = self.image_word(world.word_of[v])
            iv = world.id_of.get(img)
            if iv is not None:
                mapping[v] = iv
        return FiniteTreeAutomorphism(world.ball, mapping, exact=self)

    def agreement_depth_at(self, other: "ExactAut", vertex_id: int, cap: int) -> int:
        center = self.world.word_of[vertex_id]
        depth = -1
        for k in range(cap + 1):
            for w in self.world.word_sphere(center, k):
                if self.image_word(w) != other.image_word(w):
                    return depth
            depth = k
        return depth

    def fixes_vertex(self, vertex_id: int) -> bool:
        w = self.world.word_of[vertex_id]
        return self.image_word(w) == w

    def is_identity_on(self, radius: int) -> bool:
        return all(self.image_word(w) == w
                   for k in range(radius + 1)
                   for w in self.world.word_sphere((), k))


class Portrait(ExactAut):
    """Exact automorphism from a base image plus finitely many local actions.

    acts maps vertex addresses to full color permutations; missing vertices
    take the canonical extension (identity when consistent, else the forced
    transposition).  An empty table is the left translation by base_word.
    """

    def __init__(self, world: ColorBall, base_word: Word = (), acts: dict[Word, Perm] | None = None):
        self.world = world
        self.base_word = tuple(base_word)
        d = world.degree
        if not is_reduced_word(self.base_word, d):
            raise ValueError(f"base image is not a reduced color word: {self.base_word}")
        raw = dict(acts or {})
        for w, p in raw.items():
            if not is_reduced_word(tuple(w), d):
                raise ValueError(f"support vertex is not a reduced color word: {w}")
            if not is_perm(p, d):
                raise ValueError(f"not a permutation of 1..{d}: {p}")
        self._acts = raw
        self._sigma_cache: dict[Word, Perm] = {}
        self._validate_and_strip()

    def _canonical(self, prefix: Word, incoming: int) -> Perm:
        last = prefix[-1]
        if incoming == last:
            return perm_identity(self.world.degree)
        return perm_transposition(self.world.degree, last, incoming)

    def local_action(self, prefix: Word) -> Perm:
        cached = self._sigma_cache.get(prefix)
        if cached is not None:
            return cached
        if not prefix:
            sigma = self._acts.get((), perm_identity(self.world.degree))
        else:
            parent_sigma = self.local_action(prefix[:-1])
            incoming = parent_sigma[prefix[-1] - 1]
            sigma = self._acts.get(prefix)
            if sigma is None:
                sigma = self._canonical(prefix, incoming)
            elif sigma[prefix[-1] - 1] != incoming:
                raise ValueError(
                    f"local action at {prefix} maps parent color {prefix[-1]} to "
                    f"{sigma[prefix[-1] - 1]}, but the parent edge forces {incoming}")
        self._sigma_cache[prefix] = sigma
        return sigma

    def _validate_and_strip(self) -> None:
        ident = perm_identity(self.world.degree)
        stripped = {}
        for w in sorted(self._acts, key=len):
            sigma = self.local_action(w)  # raises on inconsistency
            if not w:
                if sigma != ident:
                    stripped[w] = sigma
            else:
                incoming = self.local_action(w[:-1])[w[-1] - 1]
                if sigma != self._canonical(w, incoming):
                    stripped[w] = sigma
        self._acts = stripped
        self._sigma_cache = {}

    def image_word(self, u: Word) -> Word:
        img = self.base_word
        sigma = self.local_action(())
        prefix = ()
        for c in u:
            img = word_append(img, sigma[c - 1])
            prefix = prefix + (c,)
            sigma = self.local_action(prefix)
        return img

    @property
    def support(self) -> dict[Word, Perm]:
        return dict(self._acts)

    def canonical_key(self) -> tuple:
        return (self.base_word, tuple(sorted(self._acts.items())))

    def __eq__(self, other):
        return isinstance(other, Portrait) and self.world is other.world \
            and self.canonical_key() == other.canonical_key()

    def __hash__(self):
        return hash(self.canonical_key())


def translation(world: ColorBall, word: Word) -> Portrait:
    return Portrait(world, word, {})


def identity_aut(world: ColorBall) -> Portrait:
    return Portrait(world, (), {})


class Composite(ExactAut):
    """parts[0] o parts[1] o ... o parts[-1], evaluated right to left."""

    def __init__(self, world: ColorBall, parts: tuple[ExactAut, ...]):
        self.world = world
        self.parts = parts
        self._img_cache: dict[Word, Word] = {}

    def image_word(self, u: Word) -> Word:
        cached = self._img_cache.get(u)
        if cached is None:
            cached = u
            for part in reversed(self.parts):
                cached = part.image_word(cached)
            self._img_cache[u] = cached
        return cached

    def local_action(self, prefix: Word) -> Perm:
        sigma = perm_identity(self.world.degree)
        cur = prefix
        for part in reversed(self.parts):
            sigma = perm_mul(part.local_action(cur), sigma)
            cur = part.image_word(cur)
        return sigma

    def inverse(self) -> "ExactAut":
        inv_parts = tuple(p.inverse() for p in reversed(self.parts))
        return Composite(self.world, inv_parts)


class Inverse(ExactAut):
    """Lazy inverse: images found by pulling the path back through the inner map."""

    def __init__(self, world: ColorBall, inner: ExactAut):
        self.world = world
        self.inner = inner
        self._img_cache: dict[Word, Word] = {}

    def inverse(self) -> ExactAut:
        return self.inner

    def image_word(self, u: Word) -> Word:
        cached = self._img_cache.get(u)
        if cached is not None:
            return cached
        q: Word = ()
        img = self.inner.image_word(())
        while img != u:
            if img == u[:len(img)]:
                m = u[len(img)]       # descend toward u
            else:
                m = img[-1]           # ascend toward the common prefix
            c = perm_inv(self.inner.local_action(q))[m - 1]
            q = word_append(q, c)
            img = word_append(img, m)
        self._img_cache[u] = q
        return q

    def local_action(self, prefix: Word) -> Perm:
        return perm_inv(self.inner.local_action(self.image_word(prefix)))


# ---------------------------------------------------------------------------
# local groups (finite permutation groups on colors)

@dataclass(frozen=True)
class LocalGroup:
    """A subgroup of Sym(d) given by generators, acting on colors 1..d."""

    degree: int
    generators: tuple[Perm, ...]

    def __post_init__(self):
        for g in self.generators:
            if not is_perm(g, self.degree):
                raise ValueError(f"not a permutation of 1..{self.degree}: {g}")

    @classmethod
    def create(cls, degree: int, generators) -> "LocalGroup":
        return cls(degree, tuple(tuple(g) for g in generators))

    @classmethod
    def symmetric(cls, degree: int) -> "LocalGroup":
        gens = [perm_transposition(degree, 1, 2)] if degree >= 2 else []
        if degree >= 3:
            gens.append(tuple(range(2, degree + 1)) + (1,))
        return cls.create(degree, gens)

    @classmethod
    def trivial(cls, degree: int) -> "LocalGroup":
        return cls.create(degree, [])

    def closure(self) -> frozenset[Perm]:
        ident = perm_identity(self.degree)
        out = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for a in frontier:
                for g in self.generators:
                    b = perm_mul(g, a)
                    if b not in out:
                        out.add(b)
                        nxt.append(b)
            frontier = nxt
        return frozenset(out)

    def is_transitive(self) -> bool:
        group = self.closure()
        return {g[0] for g in group} == set(range(1, self.degree + 1))

    def point_stabilizer(self, point: int) -> frozenset[Perm]:
        return frozenset(g for g in self.closure() if g[point - 1] == point)

    def to_json(self) -> dict:
        return {"degree": self.degree, "generators": [list(g) for g in self.generators]}

    @classmethod
    def from_json(cls, data: dict) -> "LocalGroup":
        return cls.create(data["degree"], data["generators"])


def _normal_subgroups(group: frozenset[Perm], degree: int) -> list[frozenset[Perm]]:
    """All normal subgroups, as joins of normal closures of single elements."""
    elements = sorted(group)

    def normal_closure(seed: set[Perm]) -> frozenset[Perm]:
        gens = set(seed)
        for h in list(gens):
            for g in elements:
                gens.add(perm_mul(perm_mul(g, h), perm_inv(g)))
        # close under multiplication
        out = {perm_identity(degree)}
        frontier = list(out)
        while frontier:
            nxt = []
            for a in frontier:
                for b in gens:
                    c = perm_mul(b, a)
                    if c not in out:
                        out.add(c)
                        nxt.append(c)
            frontier = nxt
        return frozenset(out)

    basic = {normal_closure({g}) for g in elements}
    found = set(basic)
    frontier = list(basic)
    while frontier:
        n1 = frontier.pop()
        for n2 in list(found):
            joined = normal_closure(set(n1) | set(n2))
            if joined not in found:
                found.add(joined)
                frontier.append(joined)
    return sorted(found, key=lambda n: (len(n), sorted(n)))


def is_semiprimitive(F: LocalGroup, guard: int | None = None) -> bool:
    """Transitive, and every normal subgroup is transitive or free on points."""
    group = F.closure()
    check_guard(len(group), guard, "local group closure")
    if {g[0] for g in group} != set(range(1, F.degree + 1)):
        return False
    ident = perm_identity(F.degree)
    for n in _normal_subgroups(group, F.degree):
        transitive = {g[0] for g in n} == set(range(1, F.degree + 1))
        semiregular = all(g == ident or all(g[i] != i + 1 for i in range(F.degree)) for g in n)
        if not (transitive or semiregular):
            return False
    return True


def is_generated_by_point_stabilizers(F: LocalGroup, guard: int | None = None) -> bool:
    group = F.closure()
    check_guard(len(group), guard, "local group closure")
    gens: set[Perm] = set()
    for point in range(1, F.degree + 1):
        gens |= {g for g in group if g[point - 1] == point}
    sub = LocalGroup.create(F.degree, sorted(gens)).closure() if gens else frozenset({perm_identity(F.degree)})
    return sub == group


# ---------------------------------------------------------------------------
# local actions and U1 membership on balls

def local_action(g: FiniteTreeAutomorphism, v: int, coloring: LegalColoring) -> Perm:
    """The color permutation induced by g at v, read through the coloring."""
    if g.exact is not None:
        return g.exact.local_action(coloring.world.word_of[v])
    ball = g.ball
    if not ball.is_interior(v) or v not in g.mapping:
        raise CertificationError(f"local action at vertex {v} is not determined by the ball")
    world = coloring.world
    image = g.mapping[v]
    out = [0] * world.degree
    for nbr in ball.neighbors(v):
        img_nbr = g.mapping.get(nbr)
        if img_nbr is None:
            raise CertificationError(f"local action at vertex {v} is not determined by the ball")
        out[world.edge_color(v, nbr) - 1] = world.edge_color(image, img_nbr)
    if not is_perm(tuple(out), world.degree):
        raise ValueError(f"map at vertex {v} does not induce a color permutation")
    return tuple(out)


def membership_u1(g: FiniteTreeAutomorphism, F: LocalGroup, coloring: LegalColoring) -> bool:
    """Whether every certified local action of g lies in the group generated by F."""
    group = F.closure()
    world = coloring.world
    for v in g.ball.vertices():
        if g.exact is None:
            determined = g.ball.is_interior(v) and v in g.mapping \
                and all(n in g.mapping for n in g.ball.neighbors(v))
            if not determined:
                continue
        elif not g.ball.is_interior(v):
            continue
        if local_action(g, v, coloring) not in group:
            return False
    return True


# ---------------------------------------------------------------------------
# group balls

class GroupBall:
    """A finite chunk of a tree group: explicit elements on a common world ball.

    closed means closed under ball-level composition (restriction keys).
    When the ball came from a U1 construction it remembers the local group
    and coloring, which lets membership and witness searches work
    constructively instead of by scanning.
    """

    def __init__(self, world: ColorBall, elements, closed: bool = False,
                 local_group: LocalGroup | None = None):
        self.world = world
        self.ball = world.ball
        self.elements: tuple[FiniteTreeAutomorphism, ...] = tuple(elements)
        self.closed = closed
        self.local_group = local_group
        self._keys: frozenset | None = None
        for el in self.elements:
            if el.ball != self.ball:
                raise ValueError("element lives on a different ball")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def coloring(self) -> LegalColoring:
        return LegalColoring(self.world)

    def key_set(self) -> frozenset:
        if self._keys is None:
            self._keys = frozenset(el.key() for el in self.elements)
        return self._keys

    def contains_key(self, g: FiniteTreeAutomorphism) -> bool:
        return g.key() in self.key_set()


def enumerate_u1_stabilizer_ball(F: LocalGroup, world: ColorBall,
                                 guard: int | None = None) -> GroupBall:
    """All base-fixing portraits on the world ball with local actions in <F>.

    Assignments run over interior vertices; at a non-base vertex the local
    action must send the parent color to the color already chosen for the
    image of the parent edge, which is the prescribed-point count in the
    product formula |<F>| * prod |{tau : tau(c_in) = prescribed}|.
    """
    group = sorted(F.closure())
    ball = world.ball
    interior = [v for v in ball.vertices() if ball.is_interior(v)]
    elements: list[FiniteTreeAutomorphism] = []

    def extend(idx: int, acts: dict[Word, Perm]):
        if idx == len(interior):
            portrait = Portrait(world, (), dict(acts))
            elements.append(portrait.restrict())
            check_guard(len(elements), guard, "U1 stabilizer ball enumeration")
            return
        v = interior[idx]
        w = world.word_of[v]
        if v == ball.base:
            for sigma in group:
                acts[w] = sigma
                extend(idx + 1, acts)
            del acts[w]
        else:
            parent_sigma = acts[w[:-1]]
            incoming = parent_sigma[w[-1] - 1]
            for sigma in group:
                if sigma[w[-1] - 1] == incoming:
                    acts[w] = sigma
                    extend(idx + 1, acts)
                    del acts[w]

    extend(0, {})
    return GroupBall(world, elements, closed=True, local_group=F)


def enumerate_u1_ball(F: LocalGroup, world: ColorBall, move_radius: int,
                      support_radius: int, guard: int | None = None) -> GroupBall:
    """Distinct depth-`support_radius` portraits with base image within `move_radius`.

    One representative per restriction class: base image any address of length
    <= move_radius (left translations have identity local actions, so every
    address is reachable whatever F is), local actions chosen like the
    stabilizer enumeration on depths < support_radius.  Count is
    (#addresses) x (stabilizer count).  Membership claims downstream are
    certified at ball depth; the canonical extension beyond the support is a
    representative choice.
    """
    if move_radius + support_radius > world.radius:
        raise CertificationError(
            f"world radius {world.radius} too small for movers {move_radius} with support {support_radius}")
    stab = enumerate_u1_stabilizer_ball(F, ColorBall(world.degree, support_radius), guard=guard)
    bases = [w for k in range(move_radius + 1) for w in world.word_sphere((), k)]
    elements = []
    for w in bases:
        for g in stab:
            acts = g.exact.support if isinstance(g.exact, Portrait) else {}
            elements.append(Portrait(world, w, dict(acts)).restrict())
            check_guard(len(elements), guard, "U1 ball enumeration")
    return GroupBall(world, elements, closed=False, local_group=F)


def edge_fixator(gb: GroupBall, edge: tuple[int, int], k: int) -> GroupBall:
    """Elements of gb fixing B(v,k) \\cap B(w,k) = B(v,k-1) \\cup B(w,k-1) pointwise."""
    if k < 1:
        raise ValueError("k must be >= 1")
    u, v = edge
    ball = gb.ball
    if not ball.has_edge(u, v):
        raise ValueError(f"not an edge: {edge}")
    if ball.depth[u] + k - 1 > ball.radius or ball.depth[v] + k - 1 > ball.radius:
        raise CertificationError(f"ball too small to hold the {k - 1}-balls around edge {edge}")
    fixed = [x for x in ball.vertices()
             if distance(ball, x, u) <= k - 1 or distance(ball, x, v) <= k - 1]
    kept = [g for g in gb if all(g.mapping.get(x) == x for x in fixed)]
    return GroupBall(gb.world, kept, closed=gb.closed, local_group=gb.local_group)


def certified_edges(gb: GroupBall, k: int) -> list[tuple[int, int]]:
    ball = gb.ball
    return [(u, v) for u, v in ball.edges()
            if ball.depth[u] + k - 1 <= ball.radius and ball.depth[v] + k - 1 <= ball.radius]


def generate_plus_k(gb: GroupBall, k: int, guard: int | None = None) -> GroupBall:
    """Ball-level closure of all certified edge fixators under composition.

    Closure is taken on restriction keys: two products are identified when
    they agree on the whole ball.  Elements needing larger support than the
    ball are outside certification scope by construction.
    """
    if not gb.closed:
        raise ValueError("generate_plus_k needs a closed group ball")
    gens: dict[tuple, FiniteTreeAutomorphism] = {}
    for e in certified_edges(gb, k):
        for g in edge_fixator(gb, e, k):
            gens.setdefault(g.key(), g)
    ident = identity_aut(gb.world).restrict()
    out = {ident.key(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens.values():
                b = compose(g, a)
                kb = b.key()
                if kb not in out:
                    check_guard(len(out) + 1, guard, "plus-k closure")
                    out[kb] = b
                    nxt.append(b)
        frontier = nxt
    return GroupBall(gb.world, out.values(), closed=True, local_group=gb.local_group)


def k_closure_membership(g: FiniteTreeAutomorphism, gb: GroupBall, k: int) -> bool:
    """Whether g agrees with some gb element on B(v,k) for every certifiable v."""
    ball = gb.ball
    for v in ball.vertices():
        if ball.depth[v] + k > ball.radius:
            continue
        neighborhood = [u for u in ball.vertices() if distance(ball, u, v) <= k]
        if any(u not in g.mapping for u in neighborhood):
            raise CertificationError(f"g is not determined on B({v},{k})")
        target = {u: g.mapping[u] for u in neighborhood}
        if not any(all(g0.mapping.get(u) == img for u, img in target.items()) for g0 in gb):
            return False
    return True


@dataclass(frozen=True)
class PkResult:
    holds: bool
    edge: tuple[int, int]
    k: int
    checked: int
    offender: FiniteTreeAutomorphism | None = None
    factor_keys: tuple = ()


def half_tree_words(gb: GroupBall, edge: tuple[int, int], side: int) -> frozenset[Word]:
    ids = half_tree_vertices(gb.ball, HalfTreeRef(edge, side))
    return frozenset(gb.world.word_of[v] for v in ids)


def check_property_pk(gb: GroupBall, edge: tuple[int, int], k: int) -> PkResult:
    """Factor every fixator element through the two half-trees and check membership.

    For g in F_{k,e}, g1 acts like g on the half-tree at w and trivially
    elsewhere; the property holds iff g1 and g.g1^-1 both lie back in gb,
    for every g.
    """
    u, v = edge
    fixator = edge_fixator(gb, edge, k)
    w_side = half_tree_vertices(gb.ball, HalfTreeRef(edge, v))
    w_words = {gb.world.word_of[x] for x in w_side}
    factor_keys = []
    for g in fixator:
        if g.exact is not None and isinstance(g.exact, Portrait):
            acts = {wd: p for wd, p in g.exact.support.items() if wd in w_words}
            base = g.exact.image_word(()) if () in w_words else ()
            g1 = Portrait(gb.world, base, acts).restrict()
        else:
            mapping = {}
            for x in gb.ball.vertices():
                if x in w_side:
                    if x in g.mapping:
                        mapping[x] = g.mapping[x]
                else:
                    mapping[x] = x
            g1 = FiniteTreeAutomorphism(gb.ball, mapping)
        rest = compose(g, invert(g1))
        if not (gb.contains_key(g1) and gb.contains_key(rest)):
            return PkResult(False, edge, k, len(fixator), offender=g)
        factor_keys.append((g1.key(), rest.key()))
    return PkResult(True, edge, k, len(fixator), factor_keys=tuple(factor_keys))


# ---------------------------------------------------------------------------
# U_k(F) membership for k >= 2 (local groups on k-balls)

@dataclass(frozen=True)
class LocalGroupK:
    """A set of automorphisms of the standard k-ball, as address maps.

    Elements are given as tuples of (address, image address) pairs over all
    reduced words of length <= k; every element must fix the center.
    """

    degree: int
    k: int
    elements: frozenset[tuple[tuple[Word, Word], ...]]

    @staticmethod
    def address_space(degree: int, k: int) -> list[Word]:
        out: list[Word] = [()]
        frontier: list[Word] = [()]
        for _ in range(k):
            frontier = [w + (c,) for w in frontier for c in range(1, degree + 1) if not w or w[-1] != c]
            out.extend(frontier)
        return out

    @classmethod
    def from_maps(cls, degree: int, k: int, maps) -> "LocalGroupK":
        space = set(cls.address_space(degree, k))
        elems = set()
        for m in maps:
            md = dict(m)
            if set(md) != space or set(md.values()) != space or md[()] != ():
                raise ValueError("not a center-fixing bijection of the k-ball")
            elems.add(tuple(sorted(md.items())))
        return cls(degree, k, frozenset(elems))


def k_local_action(g: FiniteTreeAutomorphism, v: int, world: ColorBall, k: int) -> tuple:
    """The address map of g on B(v,k), re-rooted at v and its image."""
    if g.exact is None:
        raise CertificationError("k-local actions need an exact evaluator")
    base = world.word_of[v]
    img_base = g.exact.image_word(base)
    pairs = []
    for x in LocalGroupK.address_space(world.degree, k):
        img = g.exact.image_word(word_mul(base, x))
        pairs.append((x, word_mul(word_inv(img_base), img)))
    return tuple(sorted(pairs))


def membership_uk(g: FiniteTreeAutomorphism, Fk: LocalGroupK, world: ColorBall) -> bool:
    """U_k-style membership: every certifiable k-local action lies in Fk."""
    ball = world.ball
    for v in ball.vertices():
        if ball.depth[v] + Fk.k > ball.radius:
            continue
        if k_local_action(g, v, world, Fk.k) not in Fk.elements:
            return False
    return True
