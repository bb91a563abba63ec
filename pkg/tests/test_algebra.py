import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cocycle_lab.algebra import (AlgebraElement, Semigroup, conv, delta,
                                 element, fix_project, gamma, gamma2,
                                 generator_apply, lp_norm, operator_positivity,
                                 regular_rep, semigroup_apply, tau)
from cocycle_lab.cocycles import word_length_psi
from cocycle_lab.families import delta_psi, walsh_length
from cocycle_lab.groups import build_cyclic

from conftest import rand_coeffs


@pytest.fixture(scope="module")
def z4word():
    return Semigroup(word_length_psi(4))


def test_adjoint_and_tau():
    g = build_cyclic(3)
    f = element(g, [1.0, 2.0 + 1j, 0.5])
    fs = f.adjoint()
    assert fs.coeffs[0] == 1.0
    assert fs.coeffs[1] == 0.5            # conj(a_{-1}) = conj(a_2)
    assert fs.coeffs[2] == 2.0 - 1j
    assert tau(f) == 1.0
    assert tau(conv(fs, f)) == pytest.approx(1.0 + abs(2 + 1j) ** 2 + 0.25)


def test_regular_rep_circulant_oracle():
    g = build_cyclic(3)
    f = element(g, [0.0, 1.0, 1.0])
    M = regular_rep(f)
    assert np.array_equal(M[:, 0], [0, 1, 1])
    # f*f = 2 + lambda(1) + lambda(2)
    sq = conv(f, f)
    assert np.allclose(sq.coeffs, [2.0, 1.0, 1.0])
    assert np.allclose(M @ M, regular_rep(sq))


def test_regular_rep_star_homomorphism():
    g = build_cyclic(6)
    for i in range(10):
        f = element(g, rand_coeffs(6, 2 * i))
        h = element(g, rand_coeffs(6, 2 * i + 1))
        assert np.abs(regular_rep(conv(f, h)) - regular_rep(f) @ regular_rep(h)).max() < 1e-12
        assert np.abs(regular_rep(f.adjoint()) - regular_rep(f).conj().T).max() < 1e-12
        assert abs(tau(f) - np.trace(regular_rep(f)) / 6) < 1e-12


def test_lp_norms():
    g = build_cyclic(2)
    f = element(g, [1.0, 1.0])
    assert lp_norm(f, 2) == pytest.approx(np.sqrt(2.0))
    assert lp_norm(f, np.inf) == pytest.approx(2.0)
    lam = delta(build_cyclic(5), 3)
    for p in (1, 2, 4, np.inf):
        assert lp_norm(lam, p) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="p >= 1"):
        lp_norm(f, 0.5)


def test_semigroup_laws(z4word):
    g = z4word.group
    f = element(g, rand_coeffs(4, 0))
    assert np.allclose(semigroup_apply(z4word, f, 0.0).coeffs, f.coeffs)
    a = semigroup_apply(z4word, semigroup_apply(z4word, f, 0.3), 0.7)
    b = semigroup_apply(z4word, f, 1.0)
    assert np.abs(a.coeffs - b.coeffs).max() < 1e-14
    with pytest.raises(ValueError, match=">= 0"):
        semigroup_apply(z4word, f, -0.1)
    p = fix_project(z4word, f)
    assert np.allclose(fix_project(z4word, p).coeffs, p.coeffs)
    assert tau(p) == tau(f)
    # psi > 0 off e: projection keeps only the trace part
    assert np.allclose(p.coeffs, [f.coeffs[0], 0, 0, 0])


def test_semigroup_contraction(z4word):
    for i in range(5):
        f = element(z4word.group, rand_coeffs(4, 10 + i))
        for t in (0.1, 1.0):
            tf = semigroup_apply(z4word, f, t)
            for p in (1.0, 2.0, 4.0, np.inf):
                assert lp_norm(tf, p) <= lp_norm(f, p) + 1e-12


def test_gamma_unit_oracles(z4word):
    g = z4word.group
    for k in range(4):
        gm = gamma(z4word, delta(g, k), delta(g, k))
        expected = np.zeros(4)
        expected[0] = z4word.psi.values[k]
        assert np.allclose(gm.coeffs, expected)
        g2 = gamma2(z4word, delta(g, k), delta(g, k))
        expected[0] = z4word.psi.values[k] ** 2
        assert np.allclose(g2.coeffs, expected)


def test_gamma_trace_formula(z4word):
    f = element(z4word.group, rand_coeffs(4, 3))
    want = float(np.sum(z4word.psi.values * np.abs(f.coeffs) ** 2))
    assert tau(gamma(z4word, f, f)) == pytest.approx(want, abs=1e-12)


def test_gamma_identity_coefficient_oracle(z4word):
    # f = lambda(1)+lambda(2): coefficient at e is K(1,1)+K(2,2) = 1+2
    g = z4word.group
    f = element(g, [0.0, 1.0, 1.0, 0.0])
    gm = gamma(z4word, f, f)
    assert gm.coeffs[0] == pytest.approx(3.0)


def test_gamma_paths_agree(z4word):
    g = z4word.group
    for i in range(20):
        f = element(g, rand_coeffs(4, 20 + i))
        h = element(g, rand_coeffs(4, 60 + i))
        for fn in (gamma, gamma2):
            a = fn(z4word, f, h, path="kernel")
            b = fn(z4word, f, h, path="definitional")
            assert np.abs(a.coeffs - b.coeffs).max() < 1e-12
    with pytest.raises(ValueError, match="unknown gamma path"):
        gamma(z4word, f, f, path="spectral")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-2, max_value=2), min_size=12, max_size=12))
def test_gamma_paths_agree_hypothesis(vals):
    sg = Semigroup(word_length_psi(6))
    c = np.array(vals[:6]) + 1j * np.array(vals[6:])
    f = element(sg.group, c)
    a = gamma(sg, f, f, path="kernel")
    b = gamma(sg, f, f, path="definitional")
    assert np.abs(a.coeffs - b.coeffs).max() < 1e-12 * (1 + np.abs(c).max()) ** 2


def test_gamma_positivity(z4word):
    for i in range(10):
        f = element(z4word.group, rand_coeffs(4, 100 + i))
        rep = operator_positivity(gamma(z4word, f, f))
        assert rep.psd


def test_gamma_of_fix_element_vanishes():
    sg = Semigroup(walsh_length(2, 2))
    f = element(sg.group, [2.5, 0, 0, 0])
    assert np.abs(gamma2(sg, f, f).coeffs).max() == 0.0


def test_operator_positivity_oracles():
    g = build_cyclic(4)
    one = element(g, [1.0, 0, 0, 0])
    rep = operator_positivity(one)
    assert rep.psd and rep.min_eig == pytest.approx(1.0)
    # lambda(1)+lambda(3)-3 has eigenvalues 2cos(2 pi k/4) - 3 < 0
    f = element(g, [-3.0, 1.0, 0.0, 1.0])
    rep = operator_positivity(f)
    assert not rep.psd and rep.min_eig == pytest.approx(-5.0)
    with pytest.raises(ValueError, match="not Hermitian"):
        operator_positivity(element(g, [0.0, 1.0, 0.0, 0.0]))


def test_bakry_emery_decay_word_length(z4word):
    # alpha = 1 for the Z_4 word length: e^{-2t} T_t Gamma(f,f) - Gamma(T_tf,T_tf) >= 0
    g = z4word.group
    for i in range(5):
        f = element(g, rand_coeffs(4, 200 + i))
        for t in (0.1, 0.5):
            tf = semigroup_apply(z4word, f, t)
            lhs = np.exp(-2.0 * t) * semigroup_apply(z4word, gamma(z4word, f, f), t)
            diff = lhs - gamma(z4word, tf, tf)
            assert operator_positivity(diff, tol=1e-9).psd


def test_p_energy_gamma_regularity(z4word):
    # tau Gamma(f^{p/2}, f^{p/2}) <= p^2/(4(p-1)) tau Gamma(f, f^{p-1}), f >= 0
    g = z4word.group
    for i in range(5):
        a = element(g, rand_coeffs(4, 300 + i))
        f = conv(a.adjoint(), a)
        f2 = conv(f, f)
        f3 = conv(f2, f)
        # p = 2 is an identity
        lhs = tau(gamma(z4word, f, f)).real
        rhs = tau(gamma(z4word, f, f)).real
        assert lhs <= rhs + 1e-12
        # p = 4
        lhs = tau(gamma(z4word, f2, f2)).real
        rhs = (16.0 / 12.0) * tau(gamma(z4word, f, f3)).real
        assert lhs <= rhs + 1e-9


def test_mismatched_groups_rejected():
    f = element(build_cyclic(3), [1.0, 0, 0])
    h = element(build_cyclic(4), [1.0, 0, 0, 0])
    with pytest.raises(ValueError, match="different groups"):
        conv(f, h)


def test_element_shape_checked():
    with pytest.raises(ValueError, match="shape"):
        element(build_cyclic(3), [1.0, 0.0])
