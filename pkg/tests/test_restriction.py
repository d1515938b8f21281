import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import space
from kresultant.errors import BadDimension, HypothesisFail, ZeroRadius
from kresultant.lattice import build_set
from kresultant.spectral import NormSpec, extension_fn, norm_eval, set_hat, set_tilde
from kresultant.restriction import (difference_counts, extension_constant, hc_identity,
                                    holder_chain, holder_theta, l2_sphere_energy,
                                    lemma32_exponents, lemma32_threshold, lemma33_exponents,
                                    restriction_ratio, sphere_moment)

TOL = 1e-8


# -- moments -------------------------------------------------------------------------

@pytest.mark.parametrize("k", [2, 3, 4])
def test_moment_of_origin(k):
    S = space(5, 1, 3)
    mt = sphere_moment(S, build_set(S, "explicit([0])"), k)
    expect = S.spheres.sizes * float(S.size) ** -k
    assert np.allclose(mt.per_t, expect, rtol=1e-12, atol=0)


def test_moment_of_full_space():
    S = space(5, 1, 2)
    mt = sphere_moment(S, build_set(S, "full()"), 3)
    assert abs(mt.per_t[0] - 1) < 1e-12
    assert np.all(np.abs(mt.per_t[1:]) < 1e-12)


def test_moment_column_sum():
    S = space(5, 1, 2)
    E = build_set(S, "random(9, seed=2)")
    mt = sphere_moment(S, E, 3)
    direct = math.fsum(np.abs(set_hat(S, E)) ** 3)
    assert abs(math.fsum(mt.per_t) - direct) <= TOL * direct
    assert mt.total == direct
    assert mt.max_nonzero_t == mt.per_t[mt.argmax_t] == max(mt.per_t[1:])
    assert np.all(mt.per_t >= 0)


# -- exponent arithmetic ----------------------------------------------------------------

def test_lemma32_exponents():
    assert lemma32_exponents(4, 3) == (Fraction(-9), Fraction(19, 8))
    assert lemma32_threshold(4) == Fraction(40, 16)
    with pytest.raises(HypothesisFail, match="k >"):
        lemma32_exponents(4, 2)
    with pytest.raises(HypothesisFail):
        lemma32_exponents(3, 5)
    for d in range(4, 60, 2):
        k = math.floor(lemma32_threshold(d)) + 1
        a, b = lemma32_exponents(d, k)
        assert a == d - d * k - 1
        assert b == Fraction((3 * k - 3) * d + 4 * k + 2, 3 * d + 4)


def test_lemma33_exponents():
    assert lemma33_exponents(8) == (Fraction(-279, 16), Fraction(37, 16))
    for d in range(8, 101, 2):
        a, b = lemma33_exponents(d)
        assert a == Fraction(-27 * d * d + 75 * d + 12, 12 * d - 32)
        assert b == Fraction(15 * d - 46, 6 * d - 16)


def test_holder_exponents():
    theta = holder_theta(8)
    assert theta == Fraction(11, 12)
    assert (1 - theta) / 2 == Fraction(1, 24)
    assert Fraction(28, 88) * theta == Fraction(7, 24)
    assert all(hc_identity(d) for d in range(8, 101, 2))
    for d in range(8, 101, 2):
        assert 0 < holder_theta(d) < 1
    for bad in (6, 9, 4):
        with pytest.raises(BadDimension):
            holder_theta(bad)


# -- constant reports ----------------------------------------------------------------------

def test_restriction_ratio_l32():
    S = space(5, 1, 4)
    E = build_set(S, "random(200, seed=1)")
    rep = restriction_ratio(S, E, 3, "L3.2")
    rhs = 5.0**-9 * 200 ** (19 / 8)
    assert abs(rep.bound_rhs - rhs) < 1e-12 * rhs
    assert rep.measured_lhs == sphere_moment(S, E, 3).max_nonzero_t
    assert math.isfinite(rep.implied_constant) and rep.implied_constant > 0
    assert rep.log_slack == rep.implied_constant / math.log(5)
    assert rep.passed is None
    with pytest.raises(HypothesisFail):
        restriction_ratio(S, E, 2, "L3.2")


def test_restriction_ratio_l33_gates():
    S8 = space(3, 1, 8)
    big = build_set(S8, "random(300, seed=0)")  # 300^2 >= 3^7
    rep = restriction_ratio(S8, big, 3, "L3.3")
    assert rep.exponents == {"q": Fraction(-279, 16), "E": Fraction(37, 16)}
    assert math.isfinite(rep.implied_constant)
    with pytest.raises(HypothesisFail, match="k=3"):
        restriction_ratio(S8, big, 4, "L3.3")
    with pytest.raises(HypothesisFail, match=r"\|E\|"):
        restriction_ratio(S8, build_set(S8, "random(40)"), 3, "L3.3")
    S4 = space(3, 1, 4)
    with pytest.raises(HypothesisFail, match="d >= 8"):
        restriction_ratio(S4, build_set(S4, "full()"), 3, "L3.3")


# -- L^2 sphere energy -----------------------------------------------------------------

@pytest.mark.parametrize("p,n,d", [(3, 1, 2), (5, 1, 2), (3, 2, 2), (5, 1, 3), (3, 1, 4)])
def test_difference_counts_brute(p, n, d):
    S = space(p, n, d)
    for spec in ("random_density(0.2, seed=1)", "random_density(0.8, seed=1)"):
        E = build_set(S, spec)
        pts = E.indices
        expect = np.bincount(S.sub(pts[:, None], pts[None, :]).ravel(), minlength=S.size)
        assert np.array_equal(difference_counts(S, E), expect)
        assert np.array_equal(difference_counts(S, E, block=7), expect)


def test_energy_examples():
    S = space(5, 1, 3)
    for t in range(1, 5):
        one = l2_sphere_energy(S, build_set(S, "explicit([17])"), t)
        assert abs(one.measured_lhs - S.spheres.sizes[t]) < 1e-9
        full = l2_sphere_energy(S, build_set(S, "full()"), t)
        assert abs(full.measured_lhs) < 1e-9 and full.extra["identity_ok"]
    with pytest.raises(ZeroRadius):
        l2_sphere_energy(S, build_set(S, "full()"), 0)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(5, 1, 3), (3, 1, 4), (3, 2, 2), (7, 1, 2), (5, 1, 4), (3, 1, 6)]),
       st.floats(0.01, 1.0), st.integers(0, 2**32 - 1), st.data())
def test_energy_expansion_identity(pnd, density, seed, data):
    S = space(*pnd)
    E = build_set(S, f"random_density({density}, seed={seed})")
    t = data.draw(st.integers(1, S.q - 1))
    rep = l2_sphere_energy(S, E, t)
    assert rep.extra["identity_ok"]
    assert abs(rep.extra["expansion_imag"]) < 1e-6 * max(1, rep.measured_lhs)
    assert rep.hypothesis_met == (E.size**2 >= S.q ** (S.d - 1))
    q, d = S.q, S.d
    assert abs(rep.bound_rhs - q ** ((d - 1) / 2) * E.size**2) < 1e-9 * max(1, rep.bound_rhs)
    members = S.spheres.members[t]
    l2 = norm_eval(S, set_tilde(S, E), NormSpec(2, "dsigma"), t)
    assert abs(rep.extra["l2_dsigma"] - l2) < 1e-9 * max(1, l2)
    assert len(members) == S.spheres.sizes[t]


# -- Hölder chain -------------------------------------------------------------------------

def test_holder_equality_for_constant_transform():
    S = space(3, 1, 8)
    rep = holder_chain(S, build_set(S, "explicit([0])"), 1)
    assert rep.passed
    assert abs(rep.measured_lhs - rep.bound_rhs) < 1e-9


@pytest.mark.parametrize("spec", ["random(300, seed=0)", "random_density(0.3, seed=1)",
                                  "sphere_cap(1, 50)", "subfield()", "full()"])
@pytest.mark.parametrize("t", [1, 2])
def test_holder_inequality_d8(spec, t):
    S = space(3, 1, 8)
    rep = holder_chain(S, build_set(S, spec), t)
    assert rep.passed
    assert rep.exponents["theta"] == Fraction(11, 12)


def test_holder_gates():
    S = space(3, 1, 4)
    with pytest.raises(BadDimension):
        holder_chain(S, build_set(S, "full()"), 1)
    S8 = space(3, 1, 8)
    with pytest.raises(ZeroRadius):
        holder_chain(S8, build_set(S8, "full()"), 0)


# -- extension constant -------------------------------------------------------------------

def _all(rng, n, density):
    return np.ones(n, dtype=bool)


def _first(rng, n, density):
    m = np.zeros(n, dtype=bool)
    m[0] = True
    return m


def test_extension_full_sphere():
    S = space(5, 1, 4)
    rep = extension_constant(S, 1, trials=3, sampler=_all)
    ext = extension_fn(S, np.ones(S.size), 1).values
    assert abs(rep.bound_rhs - 1) < 1e-12
    assert abs(rep.implied_constant - norm_eval(S, ext, NormSpec(4))) < 1e-12


def test_extension_single_point():
    S = space(5, 1, 4)
    d, n_t = 4, int(S.spheres.sizes[2])
    rep = extension_constant(S, 2, trials=1, sampler=_first)
    assert abs(rep.measured_lhs - S.size**0.25 / n_t) < 1e-12
    assert abs(rep.bound_rhs - n_t ** (-(9 * d - 12) / (12 * d - 8))) < 1e-12


def test_extension_random_caps_reproducible():
    S = space(5, 1, 4)
    a = extension_constant(S, 1, trials=50, seed=7)
    b = extension_constant(S, 1, trials=50, seed=7)
    assert a.implied_constant == b.implied_constant and math.isfinite(a.implied_constant)
    assert set(a.extra["per_density"]) == {"singleton", "0.1", "0.5", "1.0"}


def test_extension_gates():
    with pytest.raises(BadDimension):
        extension_constant(space(5, 1, 2), 1)
    with pytest.raises(BadDimension):
        extension_constant(space(5, 1, 3), 1)
    with pytest.raises(ZeroRadius):
        extension_constant(space(5, 1, 4), 0)
