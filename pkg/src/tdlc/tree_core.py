"""Finite truncations of infinite locally finite trees.

A TreeBall is the radius-R ball around a base vertex of a regular or
label-regular tree, built by BFS with a deterministic child order.  Vertex
ids are BFS creation order, which is part of the serialised format: all
downstream enumeration relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class LabelVector:
    """Degrees and a child-labelling rule for a label-regular tree.

    Convention (one faithful reading of label-regularity, documented rather
    than imported): at a non-root vertex the parent occupies slot 0 and the
    children occupy slots 1..degree-1; the root uses all slots 0..degree-1.
    rule[(label, slot)] gives the child's label.  Consistency requires
    rule[(child_label, 0)] == parent_label wherever a child is created, so
    the ball embeds in a single unrooted label-regular tree.
    """

    labels: tuple[str, ...]
    degree_of: dict[str, int] = field(hash=False)
    adjacency_rule: dict[tuple[str, int], str] = field(hash=False)

    def __post_init__(self):
        for lab in self.labels:
            deg = self.degree_of.get(lab)
            if deg is None or deg < 2:
                raise ValueError(f"label {lab!r} needs degree >= 2 (no leaves)")
            for slot in range(deg):
                child = self.adjacency_rule.get((lab, slot))
                if child is None:
                    raise ValueError(f"adjacency_rule missing ({lab!r}, {slot})")
                if child not in self.labels:
                    raise ValueError(f"adjacency_rule maps to unknown label {child!r}")

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels),
            "degrees": dict(self.degree_of),
            "rule": sorted([lab, slot, child] for (lab, slot), child in self.adjacency_rule.items()),
        }

    @classmethod
    def from_json(cls, data: dict) -> "LabelVector":
        rule = {(lab, slot): child for lab, slot, child in data["rule"]}
        return cls(tuple(data["labels"]), dict(data["degrees"]), rule)


@dataclass(frozen=True)
class TreeBall:
    """Radius-R truncation with parent links and ordered child lists."""

    base: int
    radius: int
    parent: tuple[int, ...]          # parent[base] == -1
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]
    label_of: tuple[str, ...] | None = None

    def __post_init__(self):
        n = len(self.parent)
        if not (len(self.children) == len(self.depth) == n):
            raise ValueError("inconsistent vertex arrays")
        if self.parent[self.base] != -1 or self.depth[self.base] != 0:
            raise ValueError("base must be the BFS root")

    @property
    def vertex_count(self) -> int:
        return len(self.parent)

    def vertices(self) -> range:
        return range(len(self.parent))

    def neighbors(self, v: int) -> tuple[int, ...]:
        p = self.parent[v]
        return self.children[v] if p < 0 else (p,) + self.children[v]

    def has_edge(self, u: int, v: int) -> bool:
        return self.parent[u] == v or self.parent[v] == u

    def edges(self) -> list[tuple[int, int]]:
        return [(self.parent[v], v) for v in self.vertices() if self.parent[v] >= 0]

    def is_interior(self, v: int) -> bool:
        return self.depth[v] < self.radius

    def path_to_base(self, v: int) -> list[int]:
        out = [v]
        while self.parent[out[-1]] >= 0:
            out.append(self.parent[out[-1]])
        return out

    def to_json(self) -> dict:
        return {
            "base": self.base,
            "radius": self.radius,
            "vertices": [
                {"id": v, "parent": self.parent[v],
                 "label": None if self.label_of is None else self.label_of[v]}
                for v in self.vertices()
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TreeBall":
        verts = sorted(data["vertices"], key=lambda rec: rec["id"])
        if [rec["id"] for rec in verts] != list(range(len(verts))):
            raise ValueError("vertex ids must be 0..n-1")
        parent = tuple(rec["parent"] for rec in verts)
        labels = tuple(rec.get("label") for rec in verts)
        label_of = None if all(lab is None for lab in labels) else tuple(labels)
        kids: list[list[int]] = [[] for _ in verts]
        for rec in verts:
            if rec["parent"] >= 0:
                kids[rec["parent"]].append(rec["id"])  # id order == creation order
        base = next(rec["id"] for rec in verts if rec["parent"] < 0)
        depth = [0] * len(verts)
        for rec in verts:  # ids are BFS order, so parents precede children
            if rec["parent"] >= 0:
                depth[rec["id"]] = depth[rec["parent"]] + 1
        return cls(base, data["radius"], parent, tuple(tuple(k) for k in kids),
                   tuple(depth), label_of)


@dataclass(frozen=True)
class HalfTreeRef:
    """One side of the ball after deleting an edge: keep the component of `side`."""

    edge: tuple[int, int]
    side: int

    def __post_init__(self):
        if self.side not in self.edge:
            raise ValueError("side must be an endpoint of the edge")

    @property
    def other(self) -> int:
        a, b = self.edge
        return b if self.side == a else a


def build_regular_ball(degree: int, radius: int) -> TreeBall:
    """Ball of the degree-d regular tree: base has d children, others d-1."""
    if degree < 2:
        raise ValueError("degree must be >= 2 (trees without leaves)")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    parent = [-1]
    depth = [0]
    children: list[list[int]] = [[]]
    frontier = [0]
    for level in range(radius):
        nxt = []
        for v in frontier:
            count = degree if level == 0 else degree - 1
            for _ in range(count):
                u = len(parent)
                parent.append(v)
                depth.append(level + 1)
                children.append([])
                children[v].append(u)
                nxt.append(u)
        frontier = nxt
    return TreeBall(0, radius, tuple(parent), tuple(tuple(k) for k in children), tuple(depth))


def build_label_regular_ball(a: LabelVector, root_label: str, radius: int) -> TreeBall:
    """Labelled ball whose children follow the adjacency rule.

    Children are created in slot order after sorting slots by (child label
    position, slot); that order is the deterministic child order.
    """
    if root_label not in a.labels:
        raise ValueError(f"unknown root label {root_label!r}")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    label_pos = {lab: i for i, lab in enumerate(a.labels)}

    def child_slots(lab: str, is_root: bool) -> list[tuple[str, int]]:
        deg = a.degree_of[lab]
        slots = range(deg) if is_root else range(1, deg)
        pairs = [(a.adjacency_rule[(lab, slot)], slot) for slot in slots]
        return sorted(pairs, key=lambda pc: (label_pos[pc[0]], pc[1]))

    parent = [-1]
    depth = [0]
    children: list[list[int]] = [[]]
    labels = [root_label]
    frontier = [0]
    for level in range(radius):
        nxt = []
        for v in frontier:
            for child_label, _slot in child_slots(labels[v], v == 0):
                if a.adjacency_rule[(child_label, 0)] != labels[v]:
                    raise ValueError(
                        f"inconsistent adjacency_rule: child {child_label!r} of {labels[v]!r} "
                        f"expects parent {a.adjacency_rule[(child_label, 0)]!r}")
                u = len(parent)
                parent.append(v)
                depth.append(level + 1)
                children.append([])
                labels.append(child_label)
                children[v].append(u)
                nxt.append(u)
        frontier = nxt
    return TreeBall(0, radius, tuple(parent), tuple(tuple(k) for k in children),
                    tuple(depth), tuple(labels))


def distance(ball: TreeBall, u: int, v: int) -> int:
    """Tree-path length via the lowest common ancestor."""
    if not (0 <= u < ball.vertex_count and 0 <= v < ball.vertex_count):
        raise ValueError("vertex not in ball")
    du, dv = ball.depth[u], ball.depth[v]
    dist = 0
    while du > dv:
        u = ball.parent[u]
        du -= 1
        dist += 1
    while dv > du:
        v = ball.parent[v]
        dv -= 1
        dist += 1
    while u != v:
        u, v = ball.parent[u], ball.parent[v]
        dist += 2
    return dist


@dataclass(frozen=True)
class SphereResult:
    """Vertices at exact distance n, plus whether the infinite sphere is fully inside the ball."""

    vertices: frozenset[int]
    complete: bool

    def __len__(self) -> int:
        return len(self.vertices)


def sphere(ball: TreeBall, v: int, n: int) -> SphereResult:
    if n < 0:
        raise ValueError("radius must be nonnegative")
    verts = frozenset(u for u in ball.vertices() if distance(ball, v, u) == n)
    complete = n <= ball.radius - ball.depth[v]
    return SphereResult(verts, complete)


def half_tree_vertices(ball: TreeBall, h: HalfTreeRef) -> frozenset[int]:
    """Component of h.side after deleting the edge (all ball vertices whose path to side avoids the other endpoint)."""
    a, b = h.edge
    if not ball.has_edge(a, b):
        raise ValueError(f"not an edge of the ball: {h.edge}")
    blocked = h.other
    seen = {h.side}
    stack = [h.side]
    while stack:
        x = stack.pop()
        for y in ball.neighbors(x):
            if y != blocked and y not in seen:
                seen.add(y)
                stack.append(y)
    return frozenset(seen)
