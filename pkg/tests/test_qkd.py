import numpy as np
import pytest
from hypothesis import given, strategies as st

from mubcheck import diagrams as dg
from mubcheck import families as fm
from mubcheck import qkd
from mubcheck.corpus import zx_family, zz_family
from mubcheck.gf import mub_family
from conftest import random_family


def bb84_oracle(f):
    """Direct loop: <s_r|e_m><e_m|s_k>."""
    n, m = f.n_bases, f.dim
    out = np.zeros((n, n, m, m, m), dtype=complex)
    for s, e, k, mm, r in np.ndindex(n, n, m, m, m):
        sk, sr, em = f.vector(s, k), f.vector(s, r), f.vector(e, mm)
        out[s, e, k, mm, r] = np.vdot(sr, em) * np.vdot(em, sk)
    return out


@pytest.mark.parametrize("f", [zx_family(), mub_family(2), mub_family(3), random_family(2, 3, 5)])
def test_bb84_lhs_matches_oracle(f):
    lhs = qkd.build_bb84_lhs(f)
    assert lhs.names == qkd.INDEX_ORDER
    np.testing.assert_allclose(lhs.data[..., 0, 0], bb84_oracle(f), atol=1e-13)


def test_bb84_same_basis_is_delta():
    lhs = qkd.build_bb84_lhs(mub_family(3))
    for s in range(4):
        np.testing.assert_allclose(lhs.data[s, s, ..., 0, 0], np.einsum("km,mr->kmr", np.eye(3), np.eye(3)), atol=1e-13)


def test_bb84_zx_modulus_half():
    lhs = qkd.build_bb84_lhs(zx_family())
    np.testing.assert_allclose(np.abs(lhs.data[0, 1]), 0.5)


@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(0, 2**31))
def test_bb84_completeness(m, count, seed):
    lhs = qkd.build_bb84_lhs(random_family(m, count, seed))
    np.testing.assert_allclose(np.sum(np.abs(lhs.data[..., 0, 0]) ** 2, axis=(3, 4)), 1, atol=1e-12)


def test_rhs_projector_supports():
    f = mub_family(2)
    psi = dg.PhaseCell([(n, s) for n, s in qkd.build_bb84_lhs(f).index_spec], np.ones((3, 3, 2, 2, 2)))
    rhs = qkd.build_bb84_rhs(f, psi)
    for s in range(3):
        np.testing.assert_array_equal(rhs.data[s, s], qkd.correlated_pattern(f).data[s, s])
    np.testing.assert_allclose(rhs.data[0, 1], 0.5)


def test_rhs_rejects_wrong_psi():
    f = mub_family(2)
    bad = dg.PhaseCell([("a", 3)], np.ones(3))
    with pytest.raises(ValueError):
        qkd.build_bb84_rhs(f, bad)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_bb84_passes_on_mubs(n):
    r = qkd.check_bb84(mub_family(n))
    assert r.passed and r.ps_ok and r.psi_unit_modulus


def test_zz_ps_ok_pd_fails():
    r = qkd.check_bb84(zz_family())
    assert r.ps_ok and not r.passed and not r.psi_unit_modulus


@given(st.sampled_from([2, 3]), st.integers(1, 4), st.integers(0, 2**31))
def test_same_basis_pattern_holds_for_any_family(m, count, seed):
    r = qkd.check_bb84(random_family(m, count, seed))
    assert r.ps_ok and r.ps_deviation <= 1e-10


@given(st.sampled_from([2, 3]), st.integers(1, 4), st.integers(0, 2**31))
def test_bb84_e91_equal_for_any_family(m, count, seed):
    f = random_family(m, count, seed)
    assert dg.tensors_equal(qkd.build_bb84_lhs(f), qkd.build_e91_lhs(f), 1e-12).equal


def test_e91_unconjugated_alice_breaks_on_complex_basis():
    f = mub_family(2)
    plain = qkd.build_e91_lhs(f, alice_conjugated=False)
    assert not dg.tensors_equal(qkd.build_bb84_lhs(f), plain, 1e-6).equal
    # real families cannot tell the difference
    g = zx_family()
    assert dg.tensors_equal(qkd.build_bb84_lhs(g), qkd.build_e91_lhs(g, alice_conjugated=False), 1e-12).equal


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_e91_verdict_and_witness_match_bb84(seed):
    f = fm.perturb_family(mub_family(3), seed)
    b, e = qkd.check_bb84(f), qkd.check_e91(f)
    assert b.passed == e.passed == False  # noqa: E712
    assert b.witness == e.witness


def test_check_protocol_unknown():
    with pytest.raises(ValueError):
        qkd.check_protocol("b92", mub_family(2))


@pytest.mark.parametrize("n", [2, 3])
def test_psi_from_phi_reproduces_lhs(n):
    f = mub_family(n)
    phi = fm.check_doubled(f).extracted_phase
    psi = qkd.psi_from_phi(f, phi)
    rhs = qkd.build_bb84_rhs(f, psi)
    assert dg.tensors_equal(qkd.build_bb84_lhs(f), rhs, 1e-9).equal
    support = dg.different_value_mask(qkd.build_bb84_lhs(f), "s", "e")
    assert psi.modulus_deviation(support) < 1e-9


def test_psi_from_phi_matches_extracted_psi():
    f = mub_family(3)
    psi = qkd.psi_from_phi(f, fm.check_doubled(f).extracted_phase)
    ext = qkd.check_bb84(f).psi
    mask = ~np.eye(4, dtype=bool)
    np.testing.assert_allclose(psi.values[mask], ext.values[mask], atol=1e-12)


def test_psi_from_phi_rejects_wrong_spec():
    f = mub_family(2)
    with pytest.raises(ValueError):
        qkd.psi_from_phi(f, dg.PhaseCell([("a", 3)], np.ones(3)))


@pytest.mark.parametrize("n", [2, 3])
def test_alpha_identity_roundtrip(n):
    f = mub_family(n)
    psi = qkd.psi_from_phi(f, fm.check_doubled(f).extracted_phase)
    r = qkd.check_alpha_identity(f, psi)
    assert r.passed and r.worst_violation < 1e-9


def test_alpha_identity_fails_with_forced_psi():
    f = fm.perturb_family(mub_family(2), 0)
    forced = qkd.check_bb84(f).psi  # least-squares ratio, not unit modulus
    r = qkd.check_alpha_identity(f, forced)
    assert not r.passed
    assert r.alpha_matches_psi < 1e-9  # the middle equality still holds; the ends do not


def test_alpha_dagger_alpha_oracle():
    ada = qkd.alpha_dagger_alpha(zx_family())
    np.testing.assert_allclose(ada.data[0, 1, ..., 0, 0], np.ones((2, 2)))
    np.testing.assert_allclose(ada.data[0, 0, ..., 0, 0], 2 * np.eye(2))
