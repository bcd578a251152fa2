import itertools

import pytest

from tdlc import coxeter_ra as cox


def dinf():
    return cox.RACoxeterSystem.create(["s", "t"])


def klein():
    return cox.RACoxeterSystem.create(["s", "t"], [("s", "t")])


def free3():
    return cox.RACoxeterSystem.create(["a", "b", "c"])


def nf_names(system, text):
    return cox.word_from_names(system, text).names()


def test_normal_form_cancellation():
    assert nf_names(dinf(), "t s s t") == ()


def test_normal_form_commutation_sort():
    assert nf_names(klein(), "t s") == ("s", "t")


def test_normal_form_no_rewrite():
    assert nf_names(dinf(), "s t s") == ("s", "t", "s")


def test_normal_form_hidden_cancellation():
    # b c a b with c, a both commuting with b but not with each other: the
    # two b's cancel through the middle even though they are never adjacent
    # under naive adjacent-swap sorting.
    sys3 = cox.RACoxeterSystem.create(["a", "b", "c"], [("b", "c"), ("a", "b")])
    assert nf_names(sys3, "b c a b") == ("c", "a")


def test_multiply_invert():
    system = dinf()
    u = cox.word_from_names(system, "s t s")
    assert cox.multiply(u, cox.invert(u)).word == ()
    v = cox.word_from_names(system, "s t")
    assert cox.invert(v).names() == ("t", "s")
    s = cox.word_from_names(system, "s")
    assert cox.multiply(s, s).word == ()


def test_length():
    system = dinf()
    assert cox.length(cox.identity(system)) == 0
    assert cox.length(cox.word_from_names(system, "t s t")) == 3
    assert cox.length(cox.word_from_names(klein(), "s t")) == 2


def test_enumerate_elements_counts():
    assert len(cox.enumerate_elements(dinf(), 2)) == 5
    assert len(cox.enumerate_elements(dinf(), 0)) == 1
    assert len(cox.enumerate_elements(klein(), 2)) == 4


def test_enumerate_elements_order_is_shortlex():
    words = [w.names() for w in cox.enumerate_elements(dinf(), 2)]
    assert words == [(), ("s",), ("t",), ("s", "t"), ("t", "s")]


def test_spherical():
    system = klein()
    assert cox.is_spherical(system, [])
    assert cox.is_spherical(system, ["s", "t"])
    assert not cox.is_spherical(dinf(), ["s", "t"])


def test_irreducible():
    assert cox.is_irreducible(dinf())
    assert cox.is_irreducible(free3())
    two_dinf = cox.RACoxeterSystem.create(
        ["s", "t", "u", "v"],
        [("s", "u"), ("s", "v"), ("t", "u"), ("t", "v")],
    )
    assert not cox.is_irreducible(two_dinf)


def test_wall_distance_examples():
    system = dinf()
    assert cox.wall_distance(cox.identity(system), "s") == 0
    ts = cox.word_from_names(system, "t s")
    assert cox.wall_distance(ts, "s") == 2  # l(st . s . ts) = l(ststs) = 5
    for k in range(1, 6):
        w = cox.word_from_names(system, "t s " * k)
        assert cox.wall_distance(w, "s") == 2 * k


def test_wall_distance_is_cayley_distance_to_sw():
    # BFS oracle: d(w, sw) in the Cayley graph equals l(w^-1 s w).
    for system in (dinf(), free3()):
        for w in cox.enumerate_elements(system, 4):
            for s in system.generators:
                sw = cox.multiply(cox.word_from_names(system, s), w)
                wait = cox.cayley_distance(w, sw)
                assert wait == 2 * cox.wall_distance(w, s) + 1
                assert wait % 2 == 1


def test_profile_bounded_set():
    system = dinf()
    profile = cox.profile_bounded_set(system, 10, 3)
    assert {w.names() for w in profile} == {(), ("s",), ("t",)}
    assert [w.names() for w in cox.profile_bounded_set(system, 0, 5)] == [()]
    # R=1 pins down the identity in irreducible systems with >= 2 generators.
    for sys_ in (dinf(), free3()):
        assert [w.word for w in cox.profile_bounded_set(sys_, 6, 1)] == [()]


def test_profile_set_stabilizes_in_length():
    for system in (dinf(), free3()):
        for bound in range(1, 5):
            sizes = [len(cox.profile_bounded_set(system, L, bound)) for L in range(bound, bound + 4)]
            assert len(set(sizes)) == 1


def test_root_contains():
    system = dinf()
    assert cox.root_contains("s", cox.identity(system))
    assert not cox.root_contains("s", cox.word_from_names(system, "s"))
    assert cox.root_contains("s", cox.word_from_names(system, "t s"))


def test_dist_to_root():
    system = dinf()
    e = cox.identity(system)
    assert cox.dist_to_root(e, "s") == 0
    assert cox.dist_to_root(cox.word_from_names(system, "s t"), "s") == 2
    assert cox.dist_to_root(cox.word_from_names(system, "s"), "s") == 1


def test_dist_to_root_closed_form():
    # For w outside alpha_s the BFS distance equals wall_distance(w, s) + 1.
    for system in (dinf(), free3()):
        for w in cox.enumerate_elements(system, 5):
            for s in system.generators:
                d = cox.dist_to_root(w, s)
                if cox.root_contains(s, w):
                    assert d == 0
                else:
                    assert d == cox.wall_distance(w, s) + 1


def test_root_growth_search_dinf():
    system = dinf()
    ws = [cox.word_from_names(system, "t s " * k) for k in range(1, 6)]
    result = cox.root_growth_search(ws)
    assert result.generator == "s"
    assert result.distances == (2, 4, 6, 8, 10)
    assert [w.names() for w in result.chain] == [("t", "s") * k for k in range(1, 6)]


def test_root_growth_search_no_chain():
    system = dinf()
    with pytest.raises(ValueError, match="no growing chain"):
        cox.root_growth_search([cox.identity(system)])
    with pytest.raises(ValueError, match="no growing chain"):
        cox.root_growth_search([cox.identity(system), cox.word_from_names(system, "s")])


def test_root_growth_search_three_generators():
    system = free3()
    ws = cox.enumerate_elements(system, 4)
    result = cox.root_growth_search(ws)
    assert len(result.chain) >= 3
    assert all(b > a for a, b in zip(result.distances, result.distances[1:]))


def test_deletion_property():
    # l(us) = l(u) +- 1 for every u and generator s.
    for system in (dinf(), klein(), free3()):
        for u in cox.enumerate_elements(system, 4):
            for s in system.generators:
                prod = cox.multiply(u, cox.word_from_names(system, s))
                assert abs(cox.length(prod) - cox.length(u)) == 1


def all_systems(n):
    names = ["a", "b", "c", "d"][:n]
    pairs = list(itertools.combinations(names, 2))
    for mask in range(2 ** len(pairs)):
        chosen = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        yield cox.RACoxeterSystem.create(names, chosen)


def move_closure_components(system, max_len):
    """Union-find over all words of length <= max_len with swap/cancel moves."""
    n = system.rank
    words = []
    for k in range(max_len + 1):
        words.extend(itertools.product(range(n), repeat=k))
    index = {w: i for i, w in enumerate(words)}
    parent = list(range(len(words)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    for w, i in index.items():
        for pos in range(len(w) - 1):
            a, b = w[pos], w[pos + 1]
            if a == b:
                union(i, index[w[:pos] + w[pos + 2:]])
            elif system.commutes(a, b):
                union(i, index[w[:pos] + (b, a) + w[pos + 2:]])
    return index, find


@pytest.mark.parametrize("n", [1, 2, 3])
def test_normal_form_matches_move_closure_small(n):
    max_len = 6
    for system in all_systems(n):
        index, find = move_closure_components(system, max_len)
        root_to_nf = {}
        for w, i in index.items():
            nf = cox.normal_form(system, w).word
            root = find(i)
            if root in root_to_nf:
                assert root_to_nf[root] == nf, (system, w)
            else:
                root_to_nf[root] = nf
        assert len(set(root_to_nf.values())) == len(root_to_nf)
