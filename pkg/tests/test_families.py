import numpy as np
import pytest
from hypothesis import given, strategies as st

from mubcheck import diagrams as dg
from mubcheck import families as fm
from mubcheck.gf import mub_family
from mubcheck.numerics import HADAMARD
from conftest import random_family, random_unitary

Y_BASIS = np.array([[1, 1], [1j, -1j]]) / np.sqrt(2)


@pytest.fixture
def zx():
    return fm.make_family(2, [np.eye(2), HADAMARD])


@pytest.fixture
def zz():
    return fm.make_family(2, [np.eye(2), np.eye(2)])


def test_make_family_rejects_bad_shape():
    with pytest.raises(fm.FamilyError, match="shape"):
        fm.make_family(2, [np.eye(3)])


def test_make_family_rejects_non_unitary():
    with pytest.raises(fm.FamilyError, match="not unitary"):
        fm.make_family(2, [np.array([[1, 1], [0, 1]])])


def test_make_family_rejects_empty():
    with pytest.raises(fm.FamilyError):
        fm.make_family(2, [])


def test_family_is_immutable(zx):
    with pytest.raises(ValueError):
        zx.bases[0][0, 0] = 5


def test_measurement_and_encoding_cells(zx):
    m = fm.measurement_cell(zx, basis="a", outcome="i")
    e = fm.encoding_cell(zx, basis="a", outcome="i")
    assert (m.quantum_out, m.quantum_in) == (1, 2)
    assert (e.quantum_out, e.quantum_in) == (2, 1)
    np.testing.assert_allclose(e[1, 1][:, 0], HADAMARD[:, 1])
    np.testing.assert_allclose(m[1, 1], e[1, 1].conj().T)


def test_conjugated_cell_on_complex_basis():
    f = fm.make_family(2, [Y_BASIS])
    np.testing.assert_allclose(fm.encoding_cell(f, True)[0, 0][:, 0], Y_BASIS[:, 0].conj())
    np.testing.assert_allclose(fm.measurement_cell(f, True)[0, 0][0], Y_BASIS[:, 0])


# direct


@pytest.mark.parametrize(
    "bases, expected",
    [
        ([np.eye(2), HADAMARD], True),
        ([np.eye(2), np.eye(2)], False),
        ([np.eye(2), HADAMARD, Y_BASIS], True),
        ([HADAMARD, Y_BASIS], True),
        ([np.eye(2)], True),
    ],
)
def test_direct(bases, expected):
    assert fm.is_complementary_direct(fm.make_family(2, bases)).passed is expected


def test_direct_witness(zz):
    r = fm.is_complementary_direct(zz)
    assert r.witness == {"a": 0, "b": 1}
    assert r.worst_violation == pytest.approx(0.5)


# doubled form


def test_doubled_lhs_oracle(zx):
    lhs, tmpl = fm.doubled_sides(zx)
    # <h_1|e_0><e_0| and <h_1|e_1><e_1|
    np.testing.assert_allclose(lhs[0, 1, 0, 1], [[1 / np.sqrt(2), 0]])
    np.testing.assert_allclose(lhs[0, 1, 1, 1], [[0, -1 / np.sqrt(2)]])
    np.testing.assert_allclose(tmpl[0, 1, 1, 1], [[0, 1 / np.sqrt(2)]])


def test_doubled_phase_values(zx):
    r = fm.check_doubled(zx)
    assert r.passed
    phi = r.extracted_phase
    assert phi.value((0, 1, 0, 1)) == pytest.approx(1)
    assert phi.value((0, 1, 1, 1)) == pytest.approx(-1)
    assert phi.value((1, 0, 1, 1)) == pytest.approx(-1)


def test_doubled_printed_one_over_m_does_not_balance(zx):
    # with 1/m the ratio has modulus sqrt(m); 1/sqrt(m) is the balancing scalar
    r = fm.check_doubled(zx, factor=1 / 2)
    assert not r.passed
    assert r.worst_violation == pytest.approx(np.sqrt(2) - 1)


def test_doubled_fails_on_repeated_basis(zz):
    assert not fm.check_doubled(zz).passed


def test_reflected_phase_is_dagger_of_doubled():
    f = mub_family(2)  # contains the complex Y basis
    phi = fm.check_doubled(f).extracted_phase
    ref = fm.check_reflected(f).extracted_phase
    np.testing.assert_allclose(ref.values, phi.values.conj(), atol=1e-12)
    assert fm.check_reflected_with_phase(f, phi).equal


def test_reflected_with_wrong_phase_fails():
    f = mub_family(2)
    phi = fm.check_doubled(f).extracted_phase
    # substituting phi itself instead of its dagger fails on the complex Y basis
    wrong = dg.PhaseCell(phi.index_spec, phi.values.conj())
    assert not fm.check_reflected_with_phase(f, wrong).equal


def test_alpha_oracle(zx):
    a = fm.build_alpha(zx)
    np.testing.assert_allclose(a.data[0, 1, :, :, 0, 0], HADAMARD.T.conj() / 1)
    r = fm.check_alpha_unitary(zx)
    assert r.passed and r.worst_violation < 1e-12


def test_alpha_witness_on_zz(zz):
    r = fm.check_alpha_unitary(zz)
    assert not r.passed
    assert r.witness["a"] != r.witness["b"]


def test_controlled4_oracle(zx):
    lhs, rhs = fm.controlled4_sides(zx)
    np.testing.assert_allclose(lhs.data[0, 1, ..., 0, 0], np.full((2, 2), 0.5))
    np.testing.assert_allclose(rhs.data[..., 0, 0], 0.5)


def test_controlled4_dual_wire_conjugated():
    # with the same-orientation second wire the Y/H pair gives complex squares, not moduli
    f = mub_family(2)
    lhs, _ = fm.controlled4_sides(f)
    assert np.allclose(lhs.data.imag, 0)
    assert fm.check_controlled4(f).passed


# agreement


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_all_methods_pass_on_mubs(n):
    results = fm.run_checks(mub_family(n))
    assert all(r.passed for r in results.values())


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_all_methods_fail_on_perturbed(seed):
    f = fm.perturb_family(mub_family(3), seed)
    assert not any(r.passed for r in fm.run_checks(f).values())


def test_single_basis_is_vacuously_complementary():
    f = fm.make_family(3, [np.eye(3)])
    assert all(r.passed for r in fm.run_checks(f).values())


@given(st.sampled_from([2, 3, 4]), st.integers(0, 2**31))
def test_agreement_on_rotated_mubs(n, seed):
    # a global unitary, column phases and column permutations keep complementarity
    rng = np.random.default_rng(seed)
    u = random_unitary(n, rng)
    bases = []
    for b in mub_family(n).bases:
        phases = np.exp(2j * np.pi * rng.uniform(size=n))
        bases.append((u @ b * phases)[:, rng.permutation(n)])
    results = fm.run_checks(fm.make_family(n, bases))
    assert all(r.passed for r in results.values())


@given(st.sampled_from([2, 3]), st.integers(2, 4), st.integers(0, 2**31))
def test_agreement_on_random_families(m, count, seed):
    f = random_family(m, count, seed)
    verdicts = {r.passed for r in fm.run_checks(f).values()}
    assert len(verdicts) == 1


def test_perturb_is_deterministic_and_unitary():
    f = mub_family(3)
    p1, p2 = fm.perturb_family(f, 7), fm.perturb_family(f, 7)
    for a, b in zip(p1.bases, p2.bases):
        np.testing.assert_array_equal(a, b)
    assert fm.perturb_family(f, 8).bases is not None


def test_conjugate_family():
    f = mub_family(2)
    np.testing.assert_array_equal(fm.conjugate_family(f).bases[2], Y_BASIS.conj())


def test_unbiased_pair_shape_check():
    with pytest.raises(Exception):
        fm.is_unbiased_pair(np.eye(2), np.eye(3), 2)


def test_conjugate_twice_and_real():
    f = mub_family(3)
    twice = fm.conjugate_family(fm.conjugate_family(f))
    for a, b in zip(f.bases, twice.bases):
        np.testing.assert_array_equal(a, b)
    g = fm.make_family(2, [np.eye(2), HADAMARD])
    for a, b in zip(g.bases, fm.conjugate_family(g).bases):
        np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("f", [mub_family(2), mub_family(4), fm.make_family(2, [HADAMARD])])
def test_measure_then_encode_over_closed_outcome_is_identity(f):
    m = fm.measurement_cell(f, basis="a", outcome="i")
    e = fm.encoding_cell(f, basis="a", outcome="i")
    closed = dg.contract(dg.compose_quantum(m, e), "i")
    for a in range(f.n_bases):
        np.testing.assert_allclose(closed[a], np.eye(f.dim), atol=1e-12)


def test_hadamard_cell_component():
    f = fm.make_family(2, [HADAMARD])
    np.testing.assert_allclose(fm.measurement_cell(f)[0, 0], [[1 / np.sqrt(2), 1 / np.sqrt(2)]])
