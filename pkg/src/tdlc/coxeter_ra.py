"""Right-angled Coxeter systems: normal forms, length, roots, and walls.

A right-angled system has m(s,t) = 2 (commuting) or infinity for s != t.
Words are canonicalised to the ShortLex-least reduced word of their
commutation class, which solves the word problem: two words represent the
same group element iff their normal forms are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import check_guard


@dataclass(frozen=True)
class RACoxeterSystem:
    """Generators in a fixed order plus the set of commuting pairs.

    The generator order is part of the data: ShortLex normal forms and every
    deterministic tie-break downstream depend on it.
    """

    generators: tuple[str, ...]
    commuting_pairs: frozenset[frozenset[str]]

    def __post_init__(self):
        names = self.generators
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        for pair in self.commuting_pairs:
            if len(pair) != 2:
                raise ValueError(f"commuting pair must have two distinct generators: {set(pair)}")
            for s in pair:
                if s not in names:
                    raise ValueError(f"unknown generator in commuting pair: {s}")

    @classmethod
    def create(cls, generators: Sequence[str], commuting_pairs: Iterable[tuple[str, str]] = ()) -> "RACoxeterSystem":
        return cls(tuple(generators), frozenset(frozenset(p) for p in commuting_pairs))

    @property
    def rank(self) -> int:
        return len(self.generators)

    def index_of(self, s: str) -> int:
        try:
            return self.generators.index(s)
        except ValueError:
            raise ValueError(f"unknown generator: {s}") from None

    def commutes(self, i: int, j: int) -> bool:
        if i == j:
            return False
        return frozenset((self.generators[i], self.generators[j])) in self.commuting_pairs

    def to_json(self) -> dict:
        return {
            "generators": list(self.generators),
            "commuting_pairs": sorted(sorted(p) for p in self.commuting_pairs),
        }

    @classmethod
    def from_json(cls, data: dict) -> "RACoxeterSystem":
        return cls.create(data["generators"], [tuple(p) for p in data.get("commuting_pairs", [])])


@dataclass(frozen=True)
class CoxElement:
    """A group element held as its ShortLex-minimal reduced word (generator indices)."""

    system: RACoxeterSystem
    word: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.word)

    def names(self) -> tuple[str, ...]:
        return tuple(self.system.generators[i] for i in self.word)

    def __str__(self) -> str:
        return " ".join(self.names()) if self.word else "e"


def _insert_reduced(system: RACoxeterSystem, nf: list[int], x: int) -> None:
    """Append generator x to the reduced word nf, cancelling if x is visible.

    x is visible from the right end when some earlier occurrence of x is
    separated from the end only by letters commuting with x; then the two
    occurrences cancel.  Otherwise appending keeps the word reduced
    (deletion condition for right-angled systems).
    """
    for i in range(len(nf) - 1, -1, -1):
        if nf[i] == x:
            del nf[i]
            return
        if not system.commutes(nf[i], x):
            break
    nf.append(x)


def _lex_minimize(system: RACoxeterSystem, word: Sequence[int]) -> tuple[int, ...]:
    """ShortLex-least word of the commutation class of a reduced word.

    Greedy: repeatedly extract the smallest letter that can be moved to the
    front (all letters before it commute with it).  A reduced word never has
    two equal extractable letters, so the choice is unique.
    """
    rem = list(word)
    out: list[int] = []
    while rem:
        best_pos = 0
        for i in range(1, len(rem)):
            if rem[i] < rem[best_pos] and all(system.commutes(rem[j], rem[i]) for j in range(i)):
                best_pos = i
        out.append(rem.pop(best_pos))
    return tuple(out)


def normal_form(system: RACoxeterSystem, word: Iterable[int | str]) -> CoxElement:
    """Canonical form of an arbitrary word: reduce, then ShortLex-minimise."""
    nf: list[int] = []
    for letter in word:
        idx = system.index_of(letter) if isinstance(letter, str) else letter
        if not 0 <= idx < system.rank:
            raise ValueError(f"generator index out of range: {idx}")
        _insert_reduced(system, nf, idx)
    return CoxElement(system, _lex_minimize(system, nf))


def identity(system: RACoxeterSystem) -> CoxElement:
    return CoxElement(system, ())


def multiply(u: CoxElement, v: CoxElement) -> CoxElement:
    if u.system is not v.system and u.system != v.system:
        raise ValueError("elements from different systems")
    return normal_form(u.system, u.word + v.word)


def invert(u: CoxElement) -> CoxElement:
    # Generators are involutions, so the inverse word is the reversal.
    return normal_form(u.system, u.word[::-1])


def length(u: CoxElement) -> int:
    return len(u.word)


def enumerate_elements(system: RACoxeterSystem, max_length: int, guard: int | None = None) -> list[CoxElement]:
    """All elements of length <= max_length, each once, in ShortLex order."""
    seen: dict[tuple[int, ...], CoxElement] = {(): identity(system)}
    frontier = [identity(system)]
    for _ in range(max_length):
        nxt = []
        for u in frontier:
            for s in range(system.rank):
                w = multiply(u, CoxElement(system, (s,)))
                if len(w.word) == len(u.word) + 1 and w.word not in seen:
                    seen[w.word] = w
                    nxt.append(w)
        check_guard(len(seen), guard, "coxeter element enumeration")
        frontier = nxt
    return [seen[k] for k in sorted(seen, key=lambda w: (len(w), w))]


def is_spherical(system: RACoxeterSystem, subset: Iterable[str]) -> bool:
    """A subset J is spherical iff W_J is finite; right-angled: iff J pairwise commutes."""
    idx = [system.index_of(s) for s in subset]
    return all(system.commutes(i, j) for a, i in enumerate(idx) for j in idx[a + 1:])


def is_irreducible(system: RACoxeterSystem) -> bool:
    """Connectivity of the graph on S whose edges are the non-commuting pairs."""
    n = system.rank
    if n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if j != i and j not in seen and not system.commutes(i, j):
                seen.add(j)
                stack.append(j)
    return len(seen) == n


def wall_distance(w: CoxElement, s: str) -> int:
    """Distance from the chamber w to the wall of s, via (l(w^-1 s w) - 1)/2.

    The conjugate of a generator is a reflection and reflections have odd
    length; asserted because every caller relies on it.
    """
    system = w.system
    si = system.index_of(s)
    conj = normal_form(system, w.word[::-1] + (si,) + w.word)
    if len(conj.word) % 2 == 0:
        raise AssertionError(f"conjugate of a generator has even length: {conj}")
    return (len(conj.word) - 1) // 2


def profile_bounded_set(system: RACoxeterSystem, max_length: int, bound: int,
                        guard: int | None = None) -> list[CoxElement]:
    """Elements w with l(w) <= max_length whose conjugates w^-1 s w all have length <= bound."""
    out = []
    for w in enumerate_elements(system, max_length, guard=guard):
        if all(2 * wall_distance(w, s) + 1 <= bound for s in system.generators):
            out.append(w)
    return out


def root_contains(s: str, w: CoxElement) -> bool:
    """Whether w lies in the root alpha_s, i.e. on the identity side of the wall of s."""
    system = w.system
    si = system.index_of(s)
    return len(normal_form(system, (si,) + w.word).word) > len(w.word)


def cayley_distance(u: CoxElement, v: CoxElement, guard: int | None = None) -> int:
    """BFS distance in the Cayley graph (right multiplication by generators).

    Independent of the length function; used as an oracle against l(u^-1 v).
    """
    system = u.system
    target = v.word
    frontier = {u.word}
    seen = {u.word}
    dist = 0
    while target not in frontier:
        nxt = set()
        for word in frontier:
            for s in range(system.rank):
                nw = normal_form(system, word + (s,)).word
                if nw not in seen:
                    seen.add(nw)
                    nxt.add(nw)
        if not nxt:
            raise RuntimeError("BFS exhausted without reaching target")
        check_guard(len(seen), guard, "cayley BFS")
        frontier = nxt
        dist += 1
    return dist


def dist_to_root(w: CoxElement, s: str, guard: int | None = None) -> int:
    """Gallery distance from chamber w to the root alpha_s (BFS layers)."""
    system = w.system
    frontier = {w.word}
    seen = {w.word}
    dist = 0
    while True:
        if any(root_contains(s, CoxElement(system, word)) for word in frontier):
            return dist
        nxt = set()
        for word in frontier:
            for g in range(system.rank):
                nw = normal_form(system, word + (g,)).word
                if nw not in seen:
                    seen.add(nw)
                    nxt.add(nw)
        if not nxt:
            raise RuntimeError("BFS exhausted without reaching the root")
        check_guard(len(seen), guard, "root BFS")
        frontier = nxt
        dist += 1


@dataclass(frozen=True)
class GrowthChain:
    """Output of root_growth_search: a generator and elements whose translated roots recede."""

    generator: str
    chain: tuple[CoxElement, ...]
    distances: tuple[int, ...]  # d(C, w_k(alpha_s)) = dist_to_root(w_k^-1, s), strictly increasing


def root_growth_search(elements: Sequence[CoxElement], guard: int | None = None) -> GrowthChain:
    """Find a generator s and a subfamily along which d(C, w(alpha_s)) grows.

    For each s, candidates are the w whose inverse lies in -alpha_s; their
    distances d(C, w(alpha_s)) = dist_to_root(w^-1, s) are collected and the
    longest strictly-increasing chain (one element per distinct distance,
    ties broken ShortLex) is formed.  The s with the longest chain wins,
    ties broken by generator order.  Fails if no chain has length >= 2.
    """
    if not elements:
        raise ValueError("no elements supplied")
    system = elements[0].system
    if not is_irreducible(system):
        raise ValueError("system must be irreducible")
    if is_spherical(system, system.generators):
        raise ValueError("system must be non-spherical")
    if len({w.word for w in elements}) != len(elements):
        raise ValueError("elements must be distinct")

    best: GrowthChain | None = None
    for s in system.generators:
        by_dist: dict[int, CoxElement] = {}
        for w in elements:
            w_inv = invert(w)
            if root_contains(s, w_inv):
                continue  # need w^-1 in -alpha_s
            d = dist_to_root(w_inv, s, guard=guard)
            if d not in by_dist or w.word < by_dist[d].word:
                by_dist[d] = w
        if len(by_dist) < 2:
            continue
        dists = tuple(sorted(by_dist))
        chain = GrowthChain(s, tuple(by_dist[d] for d in dists), dists)
        if best is None or len(chain.chain) > len(best.chain):
            best = chain
    if best is None:
        raise ValueError("no growing chain found within the supplied elements")
    return best


def word_from_names(system: RACoxeterSystem, text: str | Sequence[str]) -> CoxElement:
    """Parse a word given as space-separated names or a sequence of names."""
    parts = text.split() if isinstance(text, str) else list(text)
    return normal_form(system, parts)
