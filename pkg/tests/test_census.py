import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from contractlab import census as Cn
from contractlab import groups as G
from contractlab.errors import InvariantViolation, SpecError
from contractlab.groups import element


def _phi(n):
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


def free_classes(rank, n):
    """Conjugacy classes of length exactly n in F_rank (Burnside over rotations
    of cyclically reduced words)."""
    if n == 0:
        return 1
    cr = lambda d: (2 * rank - 1) ** d + 1 + (rank - 1) * (1 + (-1) ** d)
    return sum(_phi(n // d) * cr(d) for d in range(1, n + 1) if n % d == 0) // n


def test_census_examples(f2, z2z3):
    assert Cn.census(f2, 3).rows == [(0, 1), (1, 5), (2, 17), (3, 53)]
    t = Cn.census(z2z3, 1, Cn.CONJUGATE_INTO_FACTOR)
    assert t.filtered[1] == 4
    assert Cn.census(f2, 3, Cn.NONE).filtered == [0, 0, 0, 0]


@pytest.mark.parametrize("spec,series", [
    ("f2", lambda n: O.free_series(2, n)),
    ("z2z3", lambda n: O.free_product_series(O.cyclic_series(2, n), O.cyclic_series(3, n), n)),
    ("f2f2", lambda n: O.free_series(4, n)),
])
def test_census_matches_growth_series(spec, series, request):
    m = request.getfixturevalue(spec)
    n = 7
    assert Cn.census(m, n).total == O.cumulative(series(n))


def test_kernel_and_generic_census_agree(f2f2, z2z3):
    for m in (f2f2, z2z3):
        for p in (Cn.ALL, Cn.HYPERBOLIC, Cn.CONJUGATE_INTO_FACTOR):
            a = Cn.census(m, 5, p)
            b = Cn.census(m, 5, p, threads=1, use_kernel=False)
            assert (a.total, a.filtered) == (b.total, b.filtered)


def test_thread_determinism(f2f2):
    outs = {Cn.census(f2f2, 7, Cn.HYPERBOLIC, threads=t).to_csv() for t in (1, 2, 4)}
    assert len(outs) == 1
    outs = {Cn.conj_census(f2f2, 6, Cn.CONJUGATE_INTO_FACTOR, threads=t).to_csv() for t in (1, 3)}
    assert len(outs) == 1


def test_table_invariants():
    with pytest.raises(SpecError):
        Cn.CensusTable([0, 0], [1, 1], [1, 1])
    with pytest.raises(SpecError):
        Cn.CensusTable([0, 1], [1, 2], [1, 3])
    t = Cn.CensusTable.from_spheres([1, 4, 12], [1, 2, 2])
    assert t.total == [1, 5, 17] and t.spheres("filtered") == [1, 2, 2]
    assert t.to_csv().splitlines()[0] == "n,total,filtered,ratio"


def test_exponent_examples(f2, f2f2):
    e = Cn.exponent(Cn.census(f2, 10), column="total")
    assert abs(e.value - math.log(3)) <= 0.01 and e.converged
    e = Cn.exponent(Cn.census(f2f2, 8), column="total")
    assert abs(e.value - math.log(7)) <= 0.02
    flat = Cn.CensusTable(list(range(6)), list(range(1, 7)), list(range(1, 7)))
    assert Cn.exponent(flat).value == 0
    with pytest.raises(SpecError):
        Cn.exponent(Cn.census(f2, 2))


def test_exponent_matches_exact_formula():
    for rank in (2, 3):
        spec = G.FreeGroup(rank)
        m = G.build_model(spec)
        e = Cn.exponent(Cn.census(m, 10 if rank == 2 else 8), column="total")
        assert abs(e.value - Cn.exact_exponent(spec)) <= 0.02


def test_annulus_tiling(f2, square):
    for m in (f2, square):
        t = Cn.census(m, 6)
        ann = Cn.annuli(t, 0, "total")
        assert [c for _, c in ann] == t.spheres("total")
        assert sum(c for _, c in ann) == t.total[-1]
        wide = Cn.annuli(t, 1, "total")
        sph = t.spheres("total")
        assert all(c == sum(sph[max(0, n - 1):n + 2]) for n, c in wide)


def test_poincare_partial(f2):
    assert Cn.poincare_partial(f2, 1.0, 0) == 1
    s = math.log(3)
    conv = [Cn.poincare_partial(f2, s + 0.2, n) for n in range(4, 10)]
    diffs = np.diff(conv)
    assert np.allclose(diffs[1:] / diffs[:-1], math.exp(-0.2))
    div = [Cn.poincare_partial(f2, s - 0.2, n) for n in range(4, 10)]
    diffs = np.diff(div)
    assert np.allclose(diffs[1:] / diffs[:-1], math.exp(0.2))


def test_conj_length_examples(f2, z2z3):
    ell, rep = Cn.conj_length(f2, element(f2, "b.a.B"))
    assert (ell, rep) == (1, element(f2, "a"))
    ell, rep = Cn.conj_length(z2z3, element(z2z3, "b.a.B"), search_radius=3)
    assert ell == 1
    assert Cn.conj_length(f2, ())[0] == 0


@pytest.mark.parametrize("spec", ["f2", "z2z3", "f2f2", "f2xf2", "square", "path3"])
def test_conj_length_conjugation_invariant(spec, request):
    m = request.getfixturevalue(spec)
    conj = G.ball(m, 2)
    for g in G.ball(m, 4 if spec not in ("f2f2", "f2xf2", "square") else 3):
        ell = Cn.conj_length(m, g, 0)[0]
        for x in conj:
            assert Cn.conj_length(m, m.normalize(x + g + m.inverse(x)), 0)[0] == ell


def test_conj_length_flags_bad_reduction(f2, monkeypatch):
    monkeypatch.setattr(type(f2), "cyclic_reduce", lambda self, g: (g, ()))
    with pytest.raises(InvariantViolation):
        Cn.conj_length(f2, element(f2, "b.a.B"))


def test_conj_census_examples(f2, f2f2):
    t = Cn.conj_census(f2, 2)
    assert t.total == [1, 5, 13]
    assert Cn.conj_census(f2, 0).total == [1]
    assert t.to_csv().splitlines()[0] == "n,classes_total,classes_filtered"
    t = Cn.conj_census(f2f2, 6, Cn.CONJUGATE_INTO_FACTOR)
    f2_spheres = [free_classes(2, n) for n in range(7)]
    assert t.spheres("filtered") == [1] + [2 * c for c in f2_spheres[1:]]


@pytest.mark.parametrize("rank,n", [(2, 8), (4, 6)])
def test_conj_census_burnside(rank, n):
    spec = G.FreeGroup(2) if rank == 2 else G.FreeProduct(G.FreeGroup(2), G.FreeGroup(2))
    m = G.build_model(spec)
    want = [free_classes(rank, k) for k in range(n + 1)]
    assert Cn.conj_census(m, n).spheres("total") == want
    assert Cn.conj_census(m, n, threads=1, use_kernel=False).spheres("total") == want


def test_conj_keys_match_bounded_conjugator_search(f2, z2z3):
    for m, r in ((f2, 2), (z2z3, 3)):
        reps = {}
        for g in G.ball(m, r):
            rep, _ = m.cyclic_reduce(g)
            if len(rep) == len(g):
                reps[g] = Cn.conj_key(m, g)
        conj = G.ball(m, 2 * r)
        for g, h in itertools.combinations(reps, 2):
            if len(g) != len(h):
                continue
            found = any(m.normalize(x + g + m.inverse(x)) == h for x in conj)
            assert found == (reps[g] == reps[h])


def test_non_invariant_predicate_is_rejected(f2):
    starts_a = Cn.Predicate("starts_with_a", lambda m, g: bool(g) and g[0] == 0, None, False)
    with pytest.raises(InvariantViolation):
        Cn.conj_census(f2, 3, starts_a)


def test_predicate_agrees_on_inverse_and_rep(f2f2):
    for g in G.ball(f2f2, 4):
        v = Cn.HYPERBOLIC(f2f2, g)
        assert Cn.HYPERBOLIC(f2f2, f2f2.inverse(g)) == v
        assert Cn.HYPERBOLIC(f2f2, Cn.conj_length(f2f2, g, 0)[1]) == v


def test_genericity_examples(f2f2, z2z3, f2):
    c = Cn.genericity_curve(f2f2, 9, Cn.CONJUGATE_INTO_FACTOR)
    assert c.observed and c.decay > 0
    assert abs(c.decay - math.log(7 / 3)) < 0.15
    c = Cn.genericity_curve(f2, 6, Cn.ALL)
    assert all(r == 1 for _, r, _ in c.rows) and c.decay == 0 and not c.observed
    c = Cn.genericity_curve(z2z3, 14, Cn.CONJUGATE_INTO_FACTOR)
    assert c.decay > 0 and c.observed
    assert c.to_csv().splitlines()[0] == "n,total,filtered,ratio,fitted"


def test_length_period():
    assert Cn.length_period([1, 0, 4, 0, 8]) == 2
    assert Cn.length_period([1, 4, 12]) == 1
    assert Cn.length_period([1]) == 1


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(-3, 0))
def test_decay_fit_recovers_exact_exponentials(rate, icpt):
    ns = list(range(12))
    ratios = [math.exp(icpt - rate * n) for n in ns]
    decay, rms, _, _ = Cn.decay_fit(ns, ratios)
    assert abs(decay - rate) < 1e-9 and rms < 1e-9


def test_tightness_gap_examples(f2f2):
    g = Cn.tightness_gap(f2f2, 6, Cn.ALL)
    assert g.gap == 0
    g = Cn.tightness_gap(f2f2, 8, Cn.CONJUGATE_INTO_FACTOR, conjugacy=True)
    assert abs(g.gap - math.log(7 / 3)) < 0.15
