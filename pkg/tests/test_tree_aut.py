import pytest

from tdlc import tree_aut as ta
from tdlc import tree_core as tc
from tdlc import universal_groups as ug


def t3_world(radius=2):
    return ug.ColorBall(3, radius)


def rotation_at_base(world, perm):
    return ug.Portrait(world, (), {(): perm}).restrict()


def test_identity_and_compose_trivialities():
    world = t3_world()
    ident = ta.identity_automorphism(world.ball)
    g = rotation_at_base(world, (2, 3, 1))
    assert ta.compose(g, ta.invert(g)).key() == ident.key()
    assert ta.compose(ident, g).key() == g.key()


def test_compose_matches_direct_table():
    world = ug.ColorBall(3, 1)
    g = rotation_at_base(world, (2, 3, 1))
    h = rotation_at_base(world, (2, 1, 3))
    gh = ta.compose(g, h)
    expected = {0: 0}
    for c in (1, 2, 3):
        expected[world.id_of[(c,)]] = world.id_of[((2, 3, 1)[(2, 1, 3)[c - 1] - 1],)]
    assert gh.mapping == expected


def test_compose_partial_maps_without_exact():
    ball = tc.build_regular_ball(2, 2)
    # shift along the 5-vertex path: ids in path order
    order = sorted(ball.vertices(), key=lambda v: tc.distance(ball, v, 3))
    shift = {order[i]: order[i + 1] for i in range(4)}
    g = ta.FiniteTreeAutomorphism(ball, shift)
    g2 = ta.compose(g, g)
    assert g2.mapping == {order[i]: order[i + 2] for i in range(3)}


def test_validation_rejects_bad_maps():
    ball = tc.build_regular_ball(3, 1)
    with pytest.raises(ValueError, match="injective"):
        ta.FiniteTreeAutomorphism(ball, {1: 2, 3: 2})
    with pytest.raises(ValueError, match="non-edge"):
        ta.FiniteTreeAutomorphism(ball, {0: 1, 1: 2})


def test_classify_identity_elliptic():
    world = t3_world()
    res = ta.classify(ta.identity_automorphism(world.ball))
    assert res.kind == "elliptic"
    assert res.fixed_vertex == world.ball.base


def test_classify_shift_is_hyperbolic():
    ball = tc.build_regular_ball(2, 4)
    ends = [v for v in ball.vertices() if ball.depth[v] == 4]
    order = sorted(ball.vertices(), key=lambda v: tc.distance(ball, v, ends[0]))
    g = ta.FiniteTreeAutomorphism(ball, {order[i]: order[i + 1] for i in range(8)})
    res = ta.classify(g)
    assert res.kind == "hyperbolic"
    assert res.translation_length == 1
    assert len(res.axis) >= 5


def test_classify_inversion():
    world = t3_world()
    g = ug.translation(world, (1,)).restrict()
    res = ta.classify(g)
    assert res.kind == "inversion"
    assert res.edge == (0, world.id_of[(1,)])


def test_classify_translation_by_two():
    world = ug.ColorBall(3, 4)
    g = ug.translation(world, (1, 2)).restrict()
    res = ta.classify(g)
    assert res.kind == "hyperbolic"
    assert res.translation_length == 2


def test_classify_undetermined_far_rotation():
    # Rotation about a boundary vertex that swings the whole ball away: only
    # the rotation centre keeps an in-ball image and nothing is certifiable.
    world = ug.ColorBall(3, 2)
    p = (1, 2)
    t = ug.translation(world, p)
    rot = t.compose(ug.Portrait(world, (), {(): (1, 3, 2)})).compose(t.inverse())
    res = ta.classify(rot.restrict())
    assert res.kind == "undetermined"


def test_classify_conjugation_equivariant():
    world = ug.ColorBall(3, 2)
    gb = ug.enumerate_u1_stabilizer_ball(ug.LocalGroup.symmetric(3), world)
    sample = list(gb)[::7]
    ks = list(gb)[::11]
    probe = ug.translation(world, (1, 2)).restrict()
    for k in ks[:6]:
        for g in (sample[0], sample[1], probe):
            conj = ta.compose(k, ta.compose(g, ta.invert(k)))
            a, b = ta.classify(g), ta.classify(conj)
            assert a.kind == b.kind
            assert a.translation_length == b.translation_length
            if a.kind == "hyperbolic":
                # the axis is carried along by the conjugator
                assert sorted(k.mapping[x] for x in a.axis) == sorted(b.axis)


def test_agreement_depth_basics():
    world = t3_world()
    ident = ta.identity_automorphism(world.ball)
    g = rotation_at_base(world, (2, 3, 1))
    ident_exact = ug.identity_aut(world).restrict()
    assert ta.agreement_depth(ident_exact, ident_exact, 0) == 2  # the cap
    assert ta.agreement_depth(ident, g, 0) == 0
    trans = ug.translation(world, (1, 2)).restrict()
    assert ta.agreement_depth(ident, trans, 0) == -1


def test_agreement_depth_matches_composition_invariant():
    world = ug.ColorBall(3, 3)
    gb = ug.enumerate_u1_stabilizer_ball(ug.LocalGroup.symmetric(3), world)
    elems = list(gb)[:40:3]
    ident = ug.identity_aut(world).restrict()
    for g in elems[:5]:
        for h in elems[5:10]:
            lhs = ta.agreement_depth(g, h, 0)
            rhs = ta.agreement_depth(ta.compose(ta.invert(h), g), ident, 0)
            assert lhs == rhs


def test_agreement_depth_exact_exceeds_ball_images():
    # Conjugating a half-tree fixator by a big translation pushes images far
    # outside the ball; the exact evaluators still certify agreement depth.
    world = ug.ColorBall(3, 6)
    a = ug.translation(world, (1, 2))
    x = ug.Portrait(world, (), {(1,): (1, 3, 2)})
    conj = a.compose(a).compose(x).compose(a.inverse()).compose(a.inverse())
    ident = ug.identity_aut(world).restrict()
    depth = ta.agreement_depth(conj.restrict(), ident, 0)
    assert depth >= 4


def test_converges_to_identity_cases():
    world = ug.ColorBall(3, 4)
    ident = ug.identity_aut(world).restrict()
    const = ta.converges_to_identity([ident, ident, ident], 0)
    assert const.divergent and const.depths == (4, 4, 4)

    deeper = []
    for i in range(1, 4):
        w = tuple([1, 2] * 10)[:i]
        tau = (1, 3, 2) if w[-1] == 1 else (3, 2, 1)  # must fix the parent color
        deeper.append(ug.Portrait(world, (), {w: tau}).restrict())
    cert = ta.converges_to_identity(deeper, 0)
    assert cert.divergent
    assert cert.depths == (1, 2, 3)

    g = ug.Portrait(world, (), {(): (2, 1, 3)}).restrict()
    flat = ta.converges_to_identity([g, g, g], 0)
    assert not flat.divergent
    assert flat.depths == (0, 0, 0)


def test_portrait_json_round_trip():
    world = t3_world()
    g = rotation_at_base(world, (2, 3, 1))
    data = g.to_json()
    back = ta.FiniteTreeAutomorphism.from_json(data)
    assert back.mapping == g.mapping
    assert back.ball == g.ball
