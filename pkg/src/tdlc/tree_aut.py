"""Finite-depth tree automorphisms (portraits) on a TreeBall.

A portrait stores the restriction of a tree automorphism to a ball: an
injective, adjacency-preserving map whose domain is the set of ball vertices
whose image again lies in the ball.  Vertices moved outside the ball are
simply absent from the mapping, so movers (translations, inversions) are
representable.  A portrait may carry an exact evaluator (see
universal_groups) in which case composition and inversion are exact instead
of domain-shrinking.

Every claim made from a portrait is capped by the radius that certifies it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .tree_core import TreeBall, distance


@dataclass(frozen=True)
class FiniteTreeAutomorphism:
    """Partial injective adjacency-preserving self-map of a ball."""

    ball: TreeBall
    mapping: dict[int, int] = field(hash=False)
    exact: Optional[object] = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        n = self.ball.vertex_count
        images = set()
        for u, w in self.mapping.items():
            if not (0 <= u < n and 0 <= w < n):
                raise ValueError("mapping leaves the ball")
            if w in images:
                raise ValueError("mapping is not injective")
            images.add(w)
        for u, v in self.ball.edges():
            iu, iv = self.mapping.get(u), self.mapping.get(v)
            if iu is not None and iv is not None and not self.ball.has_edge(iu, iv):
                raise ValueError(f"edge ({u},{v}) maps to a non-edge ({iu},{iv})")
        if self.ball.label_of is not None:
            for u, w in self.mapping.items():
                if self.ball.label_of[u] != self.ball.label_of[w]:
                    raise ValueError("mapping does not preserve labels")

    def __call__(self, v: int) -> int | None:
        return self.mapping.get(v)

    def domain(self) -> frozenset[int]:
        return frozenset(self.mapping)

    def is_total(self) -> bool:
        return len(self.mapping) == self.ball.vertex_count

    def key(self) -> tuple:
        return tuple(sorted(self.mapping.items()))

    def to_json(self, include_ball: bool = True) -> dict:
        out = {"perm": sorted([u, w] for u, w in self.mapping.items())}
        if include_ball:
            out["ball"] = self.ball.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict, ball: TreeBall | None = None) -> "FiniteTreeAutomorphism":
        if ball is None:
            ball = TreeBall.from_json(data["ball"])
        return cls(ball, {u: w for u, w in data["perm"]})


def identity_automorphism(ball: TreeBall) -> FiniteTreeAutomorphism:
    return FiniteTreeAutomorphism(ball, {v: v for v in ball.vertices()})


def compose(g: FiniteTreeAutomorphism, h: FiniteTreeAutomorphism) -> FiniteTreeAutomorphism:
    """g after h.  Exact when both carry evaluators, else domains intersect."""
    if g.ball != h.ball:
        raise ValueError("portraits live on different balls")
    if g.exact is not None and h.exact is not None:
        composed = g.exact.compose(h.exact)
        return composed.restrict(g.ball)
    mapping = {}
    for u, mid in h.mapping.items():
        img = g.mapping.get(mid)
        if img is not None:
            mapping[u] = img
    return FiniteTreeAutomorphism(g.ball, mapping)


def invert(g: FiniteTreeAutomorphism) -> FiniteTreeAutomorphism:
    if g.exact is not None:
        return g.exact.inverse().restrict(g.ball)
    return FiniteTreeAutomorphism(g.ball, {w: u for u, w in g.mapping.items()})


@dataclass(frozen=True)
class IsometryClass:
    """Outcome of classification at the certifying radius.

    kind is one of "elliptic" (fixed_vertex set), "inversion" (edge set),
    "hyperbolic" (translation_length and axis set), or "undetermined" when
    the ball cannot certify a verdict.
    """

    kind: str
    fixed_vertex: int | None = None
    edge: tuple[int, int] | None = None
    translation_length: int | None = None
    axis: tuple[int, ...] | None = None
    reason: str | None = None


UNDETERMINED = "undetermined"


def _displacements(g: FiniteTreeAutomorphism) -> dict[int, int]:
    return {u: distance(g.ball, u, w) for u, w in g.mapping.items()}


def classify(g: FiniteTreeAutomorphism) -> IsometryClass:
    """Tits classification at ball depth, refusing rather than guessing.

    A fixed interior vertex certifies elliptic; a swapped edge certifies an
    inversion.  For hyperbolic we need an interior vertex u minimising the
    displacement m with d(u, g^2(u)) = 2m, which certifies that u lies on an
    axis translated by m.  If the minimum is attained only on the boundary,
    or no candidate passes, the true infimum may lie outside the ball and
    the verdict is undetermined.
    """
    ball = g.ball
    disp = _displacements(g)
    interior = {u: d for u, d in disp.items() if ball.is_interior(u)}
    if not interior:
        return IsometryClass(UNDETERMINED, reason="no interior vertex has a certified image")

    m = min(interior.values())
    if m == 0:
        fixed = min(u for u, d in interior.items() if d == 0)
        return IsometryClass("elliptic", fixed_vertex=fixed)

    for u, v in ball.edges():
        if g.mapping.get(u) == v and g.mapping.get(v) == u:
            return IsometryClass("inversion", edge=(min(u, v), max(u, v)))

    boundary_min = min((d for u, d in disp.items() if not ball.is_interior(u)), default=m)
    if boundary_min < m:
        return IsometryClass(UNDETERMINED, reason="displacement minimized only at the boundary")

    for u in sorted(u for u, d in interior.items() if d == m):
        gu = g.mapping[u]
        g2u = g.mapping.get(gu)
        if g2u is not None and distance(ball, u, g2u) == 2 * m:
            axis = [x for x, d in disp.items() if d == m]

            def signed_position(x: int) -> int:
                # Negative on the side of u away from g(u).
                t = distance(ball, u, x)
                behind = distance(ball, x, gu) == t + m
                return -t if behind else t

            axis.sort(key=lambda x: (signed_position(x), x))
            return IsometryClass("hyperbolic", translation_length=m, axis=tuple(axis))
    return IsometryClass(UNDETERMINED, reason="no interior axis vertex certified within the ball")


def certified_radius(g: FiniteTreeAutomorphism, v: int) -> int:
    """Largest k with B(v,k) inside the ball and inside g's domain."""
    ball = g.ball
    cap = ball.radius - ball.depth[v]
    if g.exact is not None or g.is_total():
        return cap
    for k in range(cap + 1):
        shell = [u for u in ball.vertices() if distance(ball, v, u) == k]
        if any(u not in g.mapping for u in shell):
            return k - 1
    return cap


def agreement_depth(g: FiniteTreeAutomorphism, h: FiniteTreeAutomorphism, v: int) -> int:
    """Largest k such that g and h certifiably agree on B(v,k); -1 if they split at v.

    Capped at min(certified_radius(g, v), certified_radius(h, v)); the cap is
    available separately via agreement_cap.  With exact evaluators on both
    sides the comparison runs on the infinite tree (images may leave the
    ball), still reported against the same cap.
    """
    if g.ball != h.ball:
        raise ValueError("portraits live on different balls")
    cap = min(certified_radius(g, v), certified_radius(h, v))
    if g.exact is not None and h.exact is not None:
        return g.exact.agreement_depth_at(h.exact, v, cap)
    return _agreement_scan(g, h, v, cap)


def _agreement_scan(g: FiniteTreeAutomorphism, h: FiniteTreeAutomorphism, v: int, cap: int) -> int:
    ball = g.ball
    by_depth: dict[int, list[int]] = {}
    for u in ball.vertices():
        d = distance(ball, v, u)
        if d <= cap:
            by_depth.setdefault(d, []).append(u)
    depth = -1
    for k in range(cap + 1):
        for u in by_depth.get(k, ()):
            gu, hu = g.mapping.get(u), h.mapping.get(u)
            if gu is None or hu is None or gu != hu:
                return depth
        depth = k
    return depth


def agreement_cap(g: FiniteTreeAutomorphism, h: FiniteTreeAutomorphism, v: int) -> int:
    return min(certified_radius(g, v), certified_radius(h, v))


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Agreement depths of a sequence against the identity, with a finite-depth verdict.

    divergent is True when the depths are sustained at their maximum and the
    maximum either hits the cap or is still strictly growing at the end; the
    verdict only ever speaks at depth `cap`.
    """

    depths: tuple[int, ...]
    cap: int
    divergent: bool
    reason: str


def converges_to_identity(seq: Sequence[FiniteTreeAutomorphism], v: int) -> ConvergenceCertificate:
    if not seq:
        raise ValueError("empty sequence")
    ident = identity_automorphism(seq[0].ball)
    depths = tuple(agreement_depth(g, ident, v) for g in seq)
    cap = min(agreement_cap(g, ident, v) for g in seq)
    peak = max(depths)
    sustained = depths[-1] == peak
    growing = len(depths) >= 2 and depths[-1] > depths[-2]
    if sustained and peak >= cap:
        verdict, reason = True, f"agreement saturates the certified radius {cap}"
    elif sustained and growing:
        verdict, reason = True, "agreement depths still strictly increasing at the end of the sequence"
    else:
        verdict, reason = False, "agreement depths plateau below the certified radius"
    return ConvergenceCertificate(depths, cap, verdict, reason)
