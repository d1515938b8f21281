import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import space, tuple_space
from kresultant.errors import BadDimension, DegenerateSet, RoundingOverflow, TooLarge
from kresultant.lattice import build_set
from kresultant import magnitude
from kresultant.magnitude import (_round_counts, convolution_power, delta_report, lemma_audit, nu0_formula,
                                  nu_profile, nu_profile_bruteforce, sign_sweep,
                                  theorem_exponents)

SMALL = [(3, 1, 2), (5, 1, 2), (7, 1, 2), (3, 2, 2), (3, 1, 3), (5, 1, 3), (3, 1, 4)]


def oracle_delta(T, E, signs):
    out = set()
    for combo in itertools.product(E, repeat=len(signs)):
        s = (0,) * T.d
        for x, sign in zip(combo, signs):
            if sign < 0:
                x = tuple(T.F.neg(c) for c in x)
            s = T.add(s, x)
        out.add(T.norm(s))
    return out


def tuples_of(T, E):
    return [v for v in T.points if T.index(v) in E]


# -- nu_k ------------------------------------------------------------------------------

@pytest.mark.parametrize("p,n,d", SMALL + [(5, 1, 4), (3, 1, 6)])
@pytest.mark.parametrize("k", [2, 3, 4])
def test_full_space_profile(p, n, d, k):
    S = space(p, n, d)
    E = build_set(S, "full()")
    if E.size**k >= 2**63:
        pytest.skip("count exceeds 64 bits")
    prof = nu_profile(S, E, k)
    assert prof.counts == tuple(S.size ** (k - 1) * int(s) for s in S.spheres.sizes)


def test_full_f3_squared_k2():
    S = space(3, 1, 2)
    assert nu_profile(S, build_set(S, "full()"), 2).counts == (9, 36, 36)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_origin_singleton_profile(k):
    S = space(5, 1, 3)
    assert nu_profile(S, build_set(S, "explicit([0])"), k).counts == (1, 0, 0, 0, 0)


@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (5, 1, 2), (3, 2, 2), (3, 1, 3)])
@pytest.mark.parametrize("k", [2, 3])
def test_profile_matches_tuple_enumeration(p, n, d, k):
    S, T = space(p, n, d), tuple_space(p, n, d)
    E = build_set(S, "random(7, seed=11)")
    pts = tuples_of(T, E)
    expect = T.nu(pts, k)
    for method in ("direct", "spectral", "both"):
        assert list(nu_profile(S, E, k, method).counts) == expect
    assert list(nu_profile_bruteforce(S, E, k)) == expect
    assert set(nu_profile(S, E, k).support) == oracle_delta(T, pts, (1,) * k)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SMALL + [(5, 1, 4), (3, 1, 6)]), st.floats(0.01, 1.0),
       st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_profile_properties(pnd, density, seed, k):
    S = space(*pnd)
    E = build_set(S, f"random_density({density}, seed={seed})")
    if E.size == 0 or E.size**k >= 2**63:
        return
    prof = nu_profile(S, E, k, "both")
    assert sum(prof.counts) == E.size**k
    assert prof.residual < 0.5
    if E.size**k <= 200_000:
        assert prof.counts == nu_profile_bruteforce(S, E, k)
    rep = delta_report(S, E, k)
    assert rep.cardinality >= rep.lower_bound_r41
    assert lemma_audit(S, E, k, profile=prof)["L2.4"].passed


def test_count_guard():
    S = space(3, 1, 8)
    with pytest.raises(TooLarge):
        nu_profile(S, build_set(S, "full()"), 5)


def test_rounding_canary():
    vals = np.array([1.0, 2.2, 3.5])
    with pytest.raises(RoundingOverflow):
        _round_counts(vals, "test")
    counts, res = _round_counts(np.array([1.1, 1.9 + 0.01j]), "test")
    assert counts.tolist() == [1, 2] and res < 0.15


@pytest.mark.parametrize("p,n,d", [(5, 1, 2), (3, 2, 2), (3, 1, 4), (5, 1, 3)])
def test_character_independence(p, n, d):
    S = space(p, n, d)
    E = build_set(S, "random_density(0.3, seed=9)")
    for k in (2, 3, 4):
        ref = nu_profile(S, E, k)
        for s in range(2, S.q):
            assert nu_profile(S, E, k, "both", twist=s).counts == ref.counts
            assert delta_report(S, E, k, twist=s).cardinality == len(ref.support)


@pytest.mark.parametrize("p,n,d", SMALL + [(3, 1, 6)])
def test_delta_nested_when_origin_in_set(p, n, d):
    # with 0 in E every k-sum is also a (k+1)-sum, so Delta_k grows with k
    S = space(p, n, d)
    for seed in range(5):
        E = build_set(S, f"random_density(0.05, seed={seed})")
        E = build_set(S, f"explicit({sorted(set(E.indices.tolist()) | {0})})")
        supports = [set(delta_report(S, E, k).delta_members) for k in (2, 3, 4)]
        assert supports[0] <= supports[1] <= supports[2]


def test_delta_not_monotone_without_origin():
    # three points of F_9^2 whose pair sums reach more norms than triple sums
    S = space(3, 2, 2)
    E = build_set(S, "explicit([37, 40, 61])")
    assert 0 not in E
    assert [delta_report(S, E, k).cardinality for k in (2, 3, 4)] == [5, 4, 7]
    T = tuple_space(3, 2, 2)
    pts = tuples_of(T, E)
    assert len(oracle_delta(T, pts, (1, 1))) == 5
    assert len(oracle_delta(T, pts, (1, 1, 1))) == 4


# -- Delta_k reports ---------------------------------------------------------------------

@pytest.mark.parametrize("k", [2, 3])
def test_subfield_example(k):
    S = space(3, 2, 2)
    rep = delta_report(S, build_set(S, "subfield(3, 2, 2)"), k)
    assert rep.cardinality == 3
    assert rep.delta_members == (0, 1, 2)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_singleton_delta(k):
    S, T = space(5, 1, 2), tuple_space(5, 1, 2)
    x0 = (2, 3)
    E = build_set(S, f"explicit([{T.index(x0)}])")
    rep = delta_report(S, E, k)
    kx = tuple(k * c % 5 for c in x0)
    assert rep.cardinality == 1 and rep.delta_members == (T.norm(kx),)


def test_r41_random_example():
    S = space(5, 1, 2)
    rep = delta_report(S, build_set(S, "random(8, seed=1)"), 3)
    counts = rep.profile.counts
    expect = Fraction((8**3 - counts[0]) ** 2, sum(c * c for c in counts[1:]))
    assert rep.lower_bound_r41 == expect
    assert rep.cardinality >= expect and rep.r41_holds


def test_degenerate_set():
    S = space(3, 1, 2)
    with pytest.raises(DegenerateSet):
        delta_report(S, build_set(S, "explicit([])"), 2)


def test_lemma41_is_tracked_with_min_q():
    S = space(3, 1, 4)
    rep = delta_report(S, build_set(S, "random_density(0.5, seed=0)"), 3)
    assert rep.lemma41_hypothesis
    assert 0 < rep.lemma41_bound <= S.q
    assert rep.ratio_actual_over_bound == rep.cardinality / rep.lemma41_bound


@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (5, 1, 2), (3, 1, 3)])
@pytest.mark.parametrize("k", [2, 3])
def test_sign_sweep_matches_every_sign_pattern(p, n, d, k):
    S, T = space(p, n, d), tuple_space(p, n, d)
    E = build_set(S, "random(5, seed=4)")
    pts = tuples_of(T, E)
    sweep = sign_sweep(S, E, k)
    for signs in itertools.product((1, -1), repeat=k):
        minus = signs.count(-1)
        key = minus if signs[0] == 1 else k - minus  # negate everything
        assert sweep[key] == len(oracle_delta(T, pts, signs))
    assert sweep[0] == delta_report(S, E, k).cardinality


# -- lemma audit ----------------------------------------------------------------------

def test_audit_full_f3_squared():
    S = space(3, 1, 2)
    rep = lemma_audit(S, build_set(S, "full()"), 2)
    l24 = rep["L2.4"]
    assert (l24.lhs, l24.rhs, l24.passed) == (2673, 2916.0, True)
    l25 = rep["L2.5"]
    assert l25.hypothesis_met and l25.lhs == 729 and l25.rhs == 5184 and l25.passed
    assert rep["L2.4-identity"].passed and rep["R2.3"].passed
    assert rep.ok


def test_audit_small_set_gates_lemmas():
    S = space(5, 1, 4)
    rep = lemma_audit(S, build_set(S, "random(10, seed=0)"), 3)
    assert not rep["L2.6"].hypothesis_met and rep["L2.6"].passed is None
    assert not rep["L2.5"].hypothesis_met
    assert rep["L2.4"].passed and rep["R2.1"].passed and rep["R2.3"].passed


def test_audit_odd_dimension_skips_even_lemmas():
    S = space(5, 1, 3)
    rep = lemma_audit(S, build_set(S, "full()"), 2)
    assert not rep["L2.5"].hypothesis_met and not rep["R2.3"].hypothesis_met
    assert rep.ok


@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (5, 1, 2), (3, 2, 2), (3, 1, 4), (5, 1, 4)])
def test_nu0_formula(p, n, d):
    S = space(p, n, d)
    for spec in ("random_density(0.2, seed=3)", "subfield()", "sphere_cap(1)"):
        E = build_set(S, spec)
        for k in (2, 3, 4):
            value, scale = nu0_formula(S, E, k)
            assert abs(value - nu_profile(S, E, k).counts[0]) <= 1e-8 * scale


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 1, 2), (5, 1, 2), (7, 1, 2), (3, 2, 2), (3, 1, 4), (5, 1, 4)]),
       st.floats(0.05, 1.0), st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_audit_never_fails_when_hypotheses_hold(pnd, density, seed, k):
    S = space(*pnd)
    E = build_set(S, f"random_density({density}, seed={seed})")
    if E.size == 0:
        return
    rep = lemma_audit(S, E, k)
    assert rep.ok, [r for r in rep.records if r.hypothesis_met and not r.passed]


# -- exponents ----------------------------------------------------------------------

def test_theorem_exponents():
    assert theorem_exponents(4, "T1.3") == Fraction(32, 13)
    assert theorem_exponents(6, "T1.3") == Fraction(66, 19)
    assert theorem_exponents(8, "T1.4") == Fraction(121, 27) == Fraction(9, 2) - Fraction(1, 54)
    for d in range(4, 101, 2):
        assert theorem_exponents(d, "T1.3") == Fraction(d + 1, 2) - Fraction(1, 6 * d + 2)
    for d in range(8, 101, 2):
        assert theorem_exponents(d, "T1.4") == Fraction(d + 1, 2) - Fraction(1, 9 * d - 18)


@pytest.mark.parametrize("d,which", [(3, "T1.3"), (2, "T1.3"), (6, "T1.4"), (9, "T1.4")])
def test_theorem_exponent_dimension_gate(d, which):
    with pytest.raises(BadDimension):
        theorem_exponents(d, which)


# -- counts beyond double precision --------------------------------------------------

@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (5, 1, 2), (3, 2, 2), (5, 1, 3)])
def test_limb_convolution_matches_single_transform(p, n, d, monkeypatch):
    S = space(p, n, d)
    E = build_set(S, "random_density(0.4, seed=1)")
    for k in (2, 3, 4):
        for minus in range(k + 1):
            ref, _ = convolution_power(S, E, k, minus)
            with monkeypatch.context() as m:
                m.setattr(magnitude, "FLOAT_SAFE", 2)
                limb, _ = convolution_power(S, E, k, minus)
            assert np.array_equal(ref, limb)


def test_counts_above_2_53_are_exact():
    S = space(3, 1, 8)
    E = build_set(S, "random_density(0.25, seed=0)")
    assert 2**53 < E.size**5 < 2**63
    c2, _ = convolution_power(S, E, 2)
    c3, _ = convolution_power(S, E, 3)
    c5, _ = convolution_power(S, E, 5)
    for y in (0, 1234, 6560):
        exact = sum(int(c2[a]) * int(c3[int(S.sub(y, a))]) for a in range(S.size))
        assert int(c5[y]) == exact
    prof = nu_profile(S, E, 5, "direct")
    assert sum(prof.counts) == E.size**5
    with pytest.raises(TooLarge, match="double precision"):
        nu_profile(S, E, 5, "spectral")
    # audits fall back to the exact route
    assert lemma_audit(S, E, 5).ok
