"""Controlled families of measurements and the characterizations of complementarity.

A controlled family is an ordered list of orthonormal bases of C^m.  Basis
``a`` is stored as an m x m unitary whose column ``i`` is the vector
``|a_i>``.  The five complementarity checks below all take a family and a
tolerance and return a :class:`ComplementarityReport`; on every family they
must agree (that agreement is itself tested).

Region names used throughout: ``a``/``b`` for the two basis-control regions,
``i``/``j`` (or ``k``/``l``) for measurement outcomes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import diagrams as dg
from .diagrams import ClassicalSystem, IndexedTensor, PhaseCell
from .numerics import DEFAULT_TOL, ShapeError, as_matrix, unitarity_deviation

METHODS = ("direct", "doubled", "alpha", "reflected", "controlled4")


class FamilyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ControlledFamily:
    dim: int
    bases: tuple = field(repr=False)

    @property
    def n_bases(self) -> int:
        return len(self.bases)

    def stack(self) -> np.ndarray:
        """Bases as one array of shape ``(n_bases, dim, dim)``."""
        return np.stack(self.bases)

    def vector(self, basis: int, outcome: int) -> np.ndarray:
        return self.bases[basis][:, outcome].copy()

    @property
    def basis_region(self) -> ClassicalSystem:
        return ClassicalSystem(self.n_bases, "basis")

    @property
    def outcome_region(self) -> ClassicalSystem:
        return ClassicalSystem(self.dim, "outcome")


def make_family(dim: int, bases: Sequence, tol: float = DEFAULT_TOL) -> ControlledFamily:
    """Validate a list of bases; each must be a ``dim x dim`` unitary."""
    if dim < 1:
        raise FamilyError(f"dimension must be positive, got {dim}")
    if len(bases) < 1:
        raise FamilyError("a controlled family needs at least one basis")
    mats = []
    for idx, b in enumerate(bases):
        m = as_matrix(b)
        if m.shape != (dim, dim):
            raise FamilyError(f"basis {idx} has shape {m.shape}, expected ({dim}, {dim})")
        dev = unitarity_deviation(m)
        if dev > tol:
            raise FamilyError(f"basis {idx} is not unitary (deviation {dev:.3g})")
        m = m.copy()
        m.setflags(write=False)
        mats.append(m)
    return ControlledFamily(dim, tuple(mats))


def conjugate_family(f: ControlledFamily) -> ControlledFamily:
    return ControlledFamily(f.dim, tuple(_frozen(b.conj()) for b in f.bases))


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m)
    m.setflags(write=False)
    return m


# cells


def measurement_cell(f: ControlledFamily, conjugated: bool = False, basis: str = "a", outcome: str = "i") -> IndexedTensor:
    """Controlled measurement: component at (basis, outcome) is the row ``<a_i|``.

    The conjugated cell (the mirror-image vertex) has component ``<a_i-bar|``.
    """
    vecs = np.transpose(f.stack(), (0, 2, 1))  # [a, i, x] = a_i[x]
    rows = vecs if conjugated else vecs.conj()
    spec = [(basis, f.basis_region), (outcome, f.outcome_region)]
    return IndexedTensor(spec, rows[:, :, None, :])


def encoding_cell(f: ControlledFamily, conjugated: bool = False, basis: str = "a", outcome: str = "i") -> IndexedTensor:
    """Controlled preparation, the dagger of :func:`measurement_cell`: column ``|a_i>``."""
    vecs = np.transpose(f.stack(), (0, 2, 1))
    cols = vecs.conj() if conjugated else vecs
    spec = [(basis, f.basis_region), (outcome, f.outcome_region)]
    return IndexedTensor(spec, cols[:, :, :, None])


def uniform_tensor(spec, quantum_out: int = 1, quantum_in: int = 1, value=1.0) -> IndexedTensor:
    """Disconnected spiders on every region, times ``value``."""
    t = IndexedTensor.zero(spec, quantum_out, quantum_in)
    return IndexedTensor(t.index_spec, np.full(t.data.shape, value, dtype=complex))


# pairwise unbiasedness


def overlap_squared(A, B) -> np.ndarray:
    """``|<a_i|b_j>|^2`` as an m x m array indexed ``[i, j]``."""
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != B.shape:
        raise ShapeError(f"bases of different shapes {A.shape} and {B.shape}")
    return np.abs(A.conj().T @ B) ** 2


def is_unbiased_pair(A, B, dim: int, tol: float = DEFAULT_TOL) -> bool:
    A, B = as_matrix(A), as_matrix(B)
    if A.shape != (dim, dim) or B.shape != (dim, dim):
        raise ShapeError(f"expected two {dim}x{dim} bases, got {A.shape} and {B.shape}")
    return float(np.max(np.abs(overlap_squared(A, B) - 1 / dim))) <= tol


# reports


@dataclass(frozen=True, eq=False)
class ComplementarityReport:
    passed: bool
    method: str
    worst_violation: float
    extracted_phase: PhaseCell | None = None
    witness: dict | None = None


def is_complementary_direct(f: ControlledFamily, tol: float = DEFAULT_TOL) -> ComplementarityReport:
    """Every pair of distinct bases is unbiased."""
    worst, witness = 0.0, None
    for a in range(f.n_bases):
        for b in range(a + 1, f.n_bases):
            dev = float(np.max(np.abs(overlap_squared(f.bases[a], f.bases[b]) - 1 / f.dim)))
            if dev > worst or witness is None:
                worst, witness = max(worst, dev), {"a": a, "b": b}
    return ComplementarityReport(worst <= tol, "direct", worst, witness=witness)


# Scalar factors on the right-hand sides.  The doubled form balances at
# amplitude level with 1/sqrt(m), not 1/m; the reflected form also takes
# 1/sqrt(m) and the four-vertex form 1/m.


def doubled_factor(dim: int) -> float:
    return 1 / np.sqrt(dim)


def reflected_factor(dim: int) -> float:
    return 1 / np.sqrt(dim)


def controlled4_factor(dim: int) -> float:
    return 1 / dim


def doubled_sides(f: ControlledFamily, factor: float | None = None):
    """Both sides of the doubled complementarity equation over (a, b, i, j).

    Left: measure in ``a`` (outcome ``i``), copy, re-encode in ``a``, measure
    in ``b`` (outcome ``j``).  Right template: measure in ``a`` with ``j``
    created uniformly, times ``factor``; the phase is what must be found.
    """
    factor = doubled_factor(f.dim) if factor is None else factor
    ma = measurement_cell(f, basis="a", outcome="i")
    ea = encoding_cell(f, basis="a", outcome="i")
    mb = measurement_cell(f, basis="b", outcome="j")
    lhs = dg.compose_quantum(dg.compose_quantum(ma, ea), mb)
    lhs = dg.reorder(lhs, ("a", "b", "i", "j"))
    tmpl = dg.create_index(dg.create_index(ma, "b", f.basis_region), "j", f.outcome_region)
    tmpl = dg.tensor_scale(dg.reorder(tmpl, ("a", "b", "i", "j")), factor)
    return lhs, tmpl


def _phase_report(method: str, lhs: IndexedTensor, tmpl: IndexedTensor, tol: float) -> ComplementarityReport:
    support = dg.different_value_mask(lhs, "a", "b")
    ex = dg.extract_phase(dg.apply_pd(lhs, "a", "b"), dg.apply_pd(tmpl, "a", "b"), support, tol)
    worst = max(ex.worst_residual, ex.worst_modulus_deviation)
    witness = ex.failures[0][0] if ex.failures else ex.modulus_witness
    return ComplementarityReport(ex.passed, method, worst, ex.phase, witness)


def check_doubled(f: ControlledFamily, tol: float = DEFAULT_TOL, factor: float | None = None) -> ComplementarityReport:
    lhs, tmpl = doubled_sides(f, factor)
    return _phase_report("doubled", lhs, tmpl, tol)


def reflected_sides(f: ControlledFamily, factor: float | None = None):
    """Horizontal mirror of :func:`doubled_sides`: encode in ``b``, measure and re-encode in ``a``."""
    factor = reflected_factor(f.dim) if factor is None else factor
    eb = encoding_cell(f, basis="b", outcome="j")
    ma = measurement_cell(f, basis="a", outcome="i")
    ea = encoding_cell(f, basis="a", outcome="i")
    lhs = dg.compose_quantum(dg.compose_quantum(eb, ma), ea)
    lhs = dg.reorder(lhs, ("a", "b", "i", "j"))
    tmpl = dg.create_index(dg.create_index(ea, "b", f.basis_region), "j", f.outcome_region)
    tmpl = dg.tensor_scale(dg.reorder(tmpl, ("a", "b", "i", "j")), factor)
    return lhs, tmpl


def check_reflected(f: ControlledFamily, tol: float = DEFAULT_TOL, factor: float | None = None) -> ComplementarityReport:
    lhs, tmpl = reflected_sides(f, factor)
    return _phase_report("reflected", lhs, tmpl, tol)


def check_reflected_with_phase(f: ControlledFamily, phi: PhaseCell, tol: float = DEFAULT_TOL) -> dg.Comparison:
    """Substitute the dagger of a doubled-form phase into the reflected equation."""
    lhs, tmpl = reflected_sides(f)
    rhs = dg.scale_by_phase(tmpl, phi.conj())
    return dg.tensors_equal(dg.apply_pd(lhs, "a", "b"), dg.apply_pd(rhs, "a", "b"), tol)


def build_alpha(f: ControlledFamily) -> IndexedTensor:
    """Encode outcome ``i`` in basis ``a``, measure in ``b``: scalar ``<b_j|a_i>``."""
    ea = encoding_cell(f, basis="a", outcome="i")
    mb = measurement_cell(f, basis="b", outcome="j")
    return dg.reorder(dg.compose_quantum(ea, mb), ("a", "b", "i", "j"))


def check_alpha_unitary(f: ControlledFamily, tol: float = DEFAULT_TOL) -> ComplementarityReport:
    """Each 1x1 component of ``sqrt(m) * alpha`` is unitary wherever ``a != b``."""
    alpha = build_alpha(f)
    u = np.sqrt(f.dim) * alpha.data[..., 0, 0]
    dev = np.abs(np.abs(u) ** 2 - 1)
    dev = np.where(dg.different_value_mask(alpha, "a", "b"), dev, 0.0)
    worst_idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
    worst = float(dev[worst_idx])
    witness = dict(zip(alpha.names, map(int, worst_idx)))
    return ComplementarityReport(worst <= tol, "alpha", worst, witness=witness)


def controlled4_sides(f: ControlledFamily, factor: float | None = None):
    """Four-vertex form over (a, b, k, l).

    Two wires each carry ``|a_k>`` measured against ``<b_l|``; the second wire
    runs the other way and so sees the conjugate cells.  The right side is
    ``factor`` times disconnected spiders.
    """
    factor = controlled4_factor(f.dim) if factor is None else factor
    left = dg.compose_quantum(
        encoding_cell(f, basis="a", outcome="k"), measurement_cell(f, basis="b", outcome="l")
    )
    right = dg.compose_quantum(
        encoding_cell(f, True, basis="a", outcome="k"),
        measurement_cell(f, True, basis="b", outcome="l"),
    )
    lhs = dg.reorder(dg.tensor_product(left, right), ("a", "b", "k", "l"))
    rhs = uniform_tensor(lhs.index_spec, value=factor)
    return lhs, rhs


def check_controlled4(f: ControlledFamily, tol: float = DEFAULT_TOL, factor: float | None = None) -> ComplementarityReport:
    lhs, rhs = controlled4_sides(f, factor)
    cmp = dg.tensors_equal(dg.apply_pd(lhs, "a", "b"), dg.apply_pd(rhs, "a", "b"), tol)
    return ComplementarityReport(cmp.equal, "controlled4", cmp.deviation, witness=cmp.witness)


CHECKS = {
    "direct": is_complementary_direct,
    "doubled": check_doubled,
    "alpha": check_alpha_unitary,
    "reflected": check_reflected,
    "controlled4": check_controlled4,
}


def run_checks(f: ControlledFamily, methods=METHODS, tol: float = DEFAULT_TOL) -> dict:
    return {m: CHECKS[m](f, tol) for m in methods}


def perturb_family(f: ControlledFamily, seed: int, angle: float = 0.1) -> ControlledFamily:
    """Rotate one basis vector towards a vector of another basis, then re-orthonormalize.

    Deterministic for a given seed.  The rotated vector is kept first in a
    Gram-Schmidt pass over the rest of its basis.
    """
    rng = np.random.default_rng(seed)
    t = int(rng.integers(f.n_bases))
    j = int(rng.integers(f.dim))
    others = [b for b in range(f.n_bases) if b != t]
    partner = f.bases[others[int(rng.integers(len(others)))]] if others else np.eye(f.dim)
    w = partner[:, int(rng.integers(f.dim))]
    basis = np.array(f.bases[t])
    v = basis[:, j]
    w_perp = w - (v.conj() @ w) * v
    norm = np.linalg.norm(w_perp)
    if norm < 1e-12:
        w_perp = basis[:, (j + 1) % f.dim]
        norm = 1.0
    basis[:, j] = np.cos(angle) * v + np.sin(angle) * w_perp / norm
    order = [j] + [c for c in range(f.dim) if c != j]
    q = _gram_schmidt(basis[:, order])
    new = np.empty_like(basis)
    new[:, order] = q
    bases = list(f.bases)
    bases[t] = new
    return make_family(f.dim, bases)


def _gram_schmidt(cols: np.ndarray) -> np.ndarray:
    out = np.zeros_like(cols, dtype=complex)
    for c in range(cols.shape[1]):
        v = cols[:, c].astype(complex)
        for d in range(c):
            v = v - (out[:, d].conj() @ v) * out[:, d]
        out[:, c] = v / np.linalg.norm(v)
    return out
