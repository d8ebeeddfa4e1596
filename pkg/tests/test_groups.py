import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from contractlab import groups as G
from contractlab.errors import BudgetExceeded, SpecError
from contractlab.groups import RAAG, CyclicFactor, DirectProduct, FreeGroup, FreeProduct, build_model, element, fmt


def words(letters, max_size=12):
    return st.lists(st.sampled_from(letters), max_size=max_size).map(".".join)


# ---------------------------------------------------------------------------
# construction


def test_free_group_generators(f2):
    assert fmt(f2, f2.ids) == "a.A.b.B"
    assert all(f2.inv(f2.inv(s)) == s for s in f2.ids)


def test_z2z3_generators(z2z3):
    assert fmt(z2z3, z2z3.ids) == "a.b.B"
    a = element(z2z3, "a")
    assert z2z3.inverse(a) == a


@pytest.mark.parametrize("spec, message", [
    (FreeProduct(CyclicFactor(2), CyclicFactor(2)), "elementary free product"),
    (RAAG(("a", "b"), (("a", "a"),)), "self-loop"),
    (CyclicFactor(1), "order"),
])
def test_rejected_specs(spec, message):
    with pytest.raises(SpecError, match=message):
        build_model(spec)


def test_spec_json_roundtrip():
    for spec in (FreeProduct(CyclicFactor(2), CyclicFactor(3)), RAAG(("a", "b"), (("a", "b"),)),
                 DirectProduct(FreeGroup(2), FreeGroup(1))):
        assert G.spec_from_dict(G.spec_to_dict(spec)) == spec
    js = '{"kind":"free_product","left":{"kind":"cyclic","order":2},"right":{"kind":"cyclic","order":3}}'
    assert G.spec_from_json(js) == FreeProduct(CyclicFactor(2), CyclicFactor(3))


# ---------------------------------------------------------------------------
# normal forms


def test_normalize_examples(f2, z2z3, path3):
    assert fmt(f2, G.normalize(f2, G.parse(f2, "a.A.b"))) == "b"
    assert G.normalize(z2z3, G.parse(z2z3, "a.a")) == ()
    assert fmt(path3, G.normalize(path3, G.parse(path3, "a.c"))) == "a.c"
    assert fmt(path3, G.normalize(path3, G.parse(path3, "a.b.A"))) == "b"


def test_multiply_examples(f2, z2z3):
    assert fmt(f2, G.multiply(f2, element(f2, "a.b"), element(f2, "B.a"))) == "a.a"
    assert fmt(z2z3, G.multiply(z2z3, element(z2z3, "a.b"), G.normalize(z2z3, G.parse(z2z3, "b.b")))) == "a"


def test_word_length_examples(f2, z2z3, f2xf2):
    assert G.word_length(f2, element(f2, "a.b.a.b")) == 4
    assert G.word_length(z2z3, G.normalize(z2z3, G.parse(z2z3, "a.b.b"))) == 2
    assert G.word_length(f2xf2, element(f2xf2, "a.c")) == 2


@settings(max_examples=200, deadline=None)
@given(words(["a", "A", "b", "B"]), words(["a", "A", "b", "B"]))
def test_f2_normal_form_matches_sanov(u, v):
    f2 = build_model(FreeGroup(2))
    g = G.normalize(f2, G.parse(f2, u))
    assert (O.f2_matrix(fmt(f2, g)) == O.f2_matrix(u)).all()
    # equal elements iff equal images
    h = G.normalize(f2, G.parse(f2, v))
    assert (g == h) == bool((O.f2_matrix(u) == O.f2_matrix(v)).all())


@settings(max_examples=200, deadline=None)
@given(words(["a", "b", "B"]), words(["a", "b", "B"]))
def test_z2z3_normal_form_matches_psl(u, v):
    m = build_model(FreeProduct(CyclicFactor(2), CyclicFactor(3)))
    g = G.normalize(m, G.parse(m, u))
    h = G.normalize(m, G.parse(m, v))
    assert O.psl_matrix(fmt(m, g)) == O.psl_matrix(u)
    assert (g == h) == (O.psl_matrix(u) == O.psl_matrix(v))


@settings(max_examples=200, deadline=None)
@given(words(list("aAbBcCdD")), words(list("aAbBcCdD")))
def test_square_raag_matches_f2_times_f2(u, v):
    from conftest import SQUARE
    m = build_model(SQUARE)
    g = G.normalize(m, G.parse(m, u))
    h = G.normalize(m, G.parse(m, v))
    # square: a, c span one free factor and b, d the other
    ren = {"a": "a", "A": "A", "c": "b", "C": "B", "b": "c", "B": "C", "d": "d", "D": "D"}
    img = lambda w: O.f2xf2_matrix(".".join(ren[s] for s in w.split(".") if s))
    assert img(fmt(m, g)) == img(u)
    assert (g == h) == (img(u) == img(v))


SPECS = [FreeGroup(2), FreeProduct(CyclicFactor(2), CyclicFactor(3)), DirectProduct(FreeGroup(2), FreeGroup(2)),
         RAAG(("a", "b", "c"), (("a", "b"), ("b", "c"))), FreeProduct(FreeGroup(2), FreeGroup(2)),
         FreeProduct(CyclicFactor(4), FreeGroup(1)), DirectProduct(CyclicFactor(4), CyclicFactor(3))]


@pytest.mark.parametrize("spec", SPECS, ids=G.spec_label)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_group_laws(spec, data):
    m = build_model(spec)
    w = st.lists(st.sampled_from(m.ids), max_size=8).map(tuple)
    u, v, x = data.draw(w), data.draw(w), data.draw(w)
    g, h, k = m.normalize(u), m.normalize(v), m.normalize(x)
    assert m.normalize(g) == g
    assert m.normalize(u + v) == m.normalize(g + v) == m.mul(g, h)
    assert m.mul(m.mul(g, h), k) == m.mul(g, m.mul(h, k))
    assert m.mul(g, m.inverse(g)) == ()
    assert len(g) <= len(u)


def _bfs(model, n):
    seen = {(): 0}
    layer = [()]
    for d in range(1, n + 1):
        nxt = []
        for g in layer:
            for s in model.ids:
                h = model.mul(g, (s,))
                if h not in seen:
                    seen[h] = d
                    nxt.append(h)
        layer = nxt
    return seen


@pytest.mark.parametrize("spec", SPECS, ids=G.spec_label)
def test_length_is_bfs_distance(spec):
    m = build_model(spec)
    n = 4 if len(m.ids) <= 6 else 3
    d = _bfs(m, n)
    ball = G.ball(m, n)
    assert len(ball) == len(d)
    assert all(d[g] == len(g) for g in ball)
    assert all(min(m.geodesic_words(g)) == g for g in ball)  # ShortLex-least geodesic


def test_ball_sizes_against_growth_series():
    n = 6
    cases = [
        (FreeGroup(2), O.free_series(2, n)),
        (FreeProduct(CyclicFactor(2), CyclicFactor(3)), O.free_product_series(O.cyclic_series(2, n), O.cyclic_series(3, n), n)),
        (FreeProduct(FreeGroup(2), FreeGroup(2)), O.free_product_series(O.free_series(2, n), O.free_series(2, n), n)),
        (DirectProduct(FreeGroup(2), FreeGroup(1)), O.series_mul(O.free_series(2, n), O.free_series(1, n), n)),
        (RAAG(("a", "b", "c"), (("a", "b"), ("b", "c"))), O.raag_series("abc", [("a", "b"), ("b", "c")], n)),
        (RAAG(("a", "b", "c", "d"), (("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"))),
         O.raag_series("abcd", [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")], 5)),
    ]
    for spec, series in cases:
        m = build_model(spec)
        k = len(series) - 1
        assert G.sphere_counts(m, k) == series, G.spec_label(spec)


def test_matrix_bfs_oracle_ball_sizes(f2, z2z3):
    assert len(G.ball(f2, 4)) == len(O.bfs_by_matrix("aAbB", O.f2_matrix, 4))
    assert len(G.ball(z2z3, 6)) == len(O.bfs_by_matrix(["a", "b", "B"], O.psl_matrix, 6))


# ---------------------------------------------------------------------------
# enumeration


def test_enumerate_ball_examples(f2, z2z3):
    assert list(G.enumerate_ball(f2, 0)) == [()]
    assert len(G.ball(f2, 2)) == 17
    assert len(G.ball(z2z3, 2)) == 8


def test_enumeration_is_shortlex_and_partitioned(f2f2):
    b = G.ball(f2f2, 3)
    assert b == sorted(b, key=G.shortlex_key)
    parts = [list(G.enumerate_sphere(f2f2, 3, first_letter=s)) for s in f2f2.ids]
    union = list(itertools.chain.from_iterable(parts))
    assert sorted(union) == sorted(g for g in b if len(g) == 3)
    assert len(union) == len(set(union))


def test_enumerate_ball_cap_reports_partial(f2):
    with pytest.raises(BudgetExceeded) as info:
        list(G.enumerate_ball(f2, 6, cap=100))
    assert info.value.partial is not None


# ---------------------------------------------------------------------------
# geodesics


def test_geodesics_examples(f2, f2xf2):
    assert [fmt(f2, w) for w in G.geodesics_between(f2, (), element(f2, "a.b")).words] == ["a.b"]
    got = {fmt(f2xf2, w) for w in G.geodesics_between(f2xf2, (), element(f2xf2, "a.c")).words}
    assert got == {"a.c", "c.a"}
    g = element(f2xf2, "a.b.c")
    assert G.geodesics_between(f2xf2, g, g).words == [()]


def test_geodesic_stream_is_valid_and_truncates(f2xf2):
    g, h = element(f2xf2, "a.B"), element(f2xf2, "a.a.c.c.d")
    geo = G.geodesics_between(f2xf2, g, h)
    d = f2xf2.dist(g, h)
    assert not geo.truncated and len(geo.words) > 1
    for w in geo.words:
        assert len(w) == d and f2xf2.normalize(g + w) == h
    small = G.geodesics_between(f2xf2, g, h, cap=2)
    assert small.truncated and len(small.words) == 2


def test_geodesic_counts_match_path_counting(f2xf2):
    d = _bfs(f2xf2, 4)
    count = {(): 1}
    for g in sorted(d, key=G.shortlex_key)[1:]:
        count[g] = sum(count[f2xf2.mul(g, (s,))] for s in f2xf2.ids if d.get(f2xf2.mul(g, (s,)), 99) == len(g) - 1)
    for g in G.ball(f2xf2, 3):
        assert len(G.geodesics_between(f2xf2, (), g).words) == count[g]


# ---------------------------------------------------------------------------
# classifiers


def test_classify_free_product_examples(z2z3, f2):
    assert G.classify_free_product(z2z3, element(z2z3, "b.a.B"))[:2] == ("conjugate_into_factor", "left")
    assert G.classify_free_product(z2z3, element(z2z3, "a.b")).kind == "hyperbolic"
    assert G.classify_free_product(z2z3, ()).kind == "identity"
    assert G.classify_free_product(z2z3, element(z2z3, "b")).torsion
    with pytest.raises(SpecError):
        G.classify_free_product(f2, element(f2, "a"))


def test_torsion_flag_follows_syllable_order():
    m = build_model(FreeProduct(DirectProduct(CyclicFactor(2), FreeGroup(1)), FreeGroup(1)))
    a, b, c = (element(m, t) for t in ("a", "b", "c"))
    assert G.classify_free_product(m, a).torsion
    assert not G.classify_free_product(m, m.mul(a, b)).torsion
    assert not G.classify_free_product(m, c).torsion


def test_hyperbolic_has_no_short_conjugator_into_factor(z2z3):
    g = element(z2z3, "a.b")
    for x in G.ball(z2z3, 4):
        c = z2z3.normalize(x + g + z2z3.inverse(x))
        assert len({z2z3.left.owns(s) for s in c}) == 2


@pytest.mark.parametrize("model_name", ["z2z3", "f2f2"])
def test_classify_free_product_conjugation_invariant(model_name, request):
    m = request.getfixturevalue(model_name)
    for g in G.ball(m, 3):
        k = G.classify_free_product(m, g)
        for x in G.ball(m, 2):
            assert G.classify_free_product(m, m.normalize(x + g + m.inverse(x))).kind == k.kind


def test_classify_raag_examples(square, raag_f2):
    assert G.classify_raag(square, element(square, "a.c")) == "join_bound"
    assert G.classify_raag(raag_f2, element(raag_f2, "a.b")) == "rank1_candidate"
    assert G.classify_raag(square, ()) == "join_bound"
    assert G.classify_raag(raag_f2, ()) == "join_bound"


def test_classify_raag_uses_cyclic_reduction():
    m = build_model(RAAG(("a", "b", "c", "d"), (("a", "b"), ("b", "c"), ("c", "d"))))
    ad = element(m, "a.d")
    assert G.classify_raag(m, ad) == "rank1_candidate"
    assert G.classify_raag(m, m.normalize(G.parse(m, "b.c") + ad + G.parse(m, "C.B"))) == "rank1_candidate"
    assert G.classify_raag(m, m.normalize(G.parse(m, "d.a.D"))) == "join_bound"
    assert G.classify_raag(m, element(m, "a.c")) == "join_bound"  # {a, c} * {b}


def test_cyclic_reduce_conjugator(f2f2, square):
    for m in (f2f2, square):
        for g in G.ball(m, 3):
            rep, x = m.cyclic_reduce(g)
            assert m.normalize(x + g + m.inverse(x)) == rep
            assert len(rep) <= len(g)
