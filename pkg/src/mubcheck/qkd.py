"""BB84 and E91 key distribution equations for a controlled family.

Both left-hand sides live over five open regions in the canonical order
``(s, e, k, m, r)``:

- ``s``: the basis shared by Alice and Bob once bases are compared,
- ``e``: Eve's basis,
- ``k``: Alice's bit,
- ``m``: Eve's measurement result (kept open, it reaches the top of the diagram),
- ``r``: Bob's result.

Component ``(s, e, k, m, r)`` of the BB84 side is ``<s_r|e_m><e_m|s_k>``.
The target side is ``(1/m) psi`` on ``s != e`` plus the fully
correlated pattern ``[k = m = r]`` on ``s == e``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagrams as dg
from .diagrams import IndexedTensor, PhaseCell
from .families import ControlledFamily, build_alpha, encoding_cell, measurement_cell, uniform_tensor
from .numerics import DEFAULT_TOL

INDEX_ORDER = ("s", "e", "k", "m", "r")
PROTOCOLS = ("bb84", "e91")


@dataclass(frozen=True, eq=False)
class QkdReport:
    protocol: str
    ps_ok: bool
    pd_proportional: bool
    psi: PhaseCell | None
    psi_unit_modulus: bool
    passed: bool
    worst_violation: float
    witness: dict | None = None
    ps_deviation: float = 0.0
    pd_deviation: float = 0.0


def _eve_and_bob(f: ControlledFamily, alice: IndexedTensor) -> IndexedTensor:
    """Eve measures in ``e`` and resends, then Bob measures in Alice's basis ``s``."""
    eve_m = measurement_cell(f, basis="e", outcome="m")
    eve_p = encoding_cell(f, basis="e", outcome="m")
    bob = measurement_cell(f, basis="s", outcome="r")
    t = dg.compose_quantum(alice, eve_m)
    t = dg.compose_quantum(t, eve_p)
    return dg.compose_quantum(t, bob)


def build_bb84_lhs(f: ControlledFamily) -> IndexedTensor:
    """Alice prepares ``|s_k>``, Eve intercepts in basis ``e``, Bob measures in ``s``."""
    alice = encoding_cell(f, basis="s", outcome="k")
    return dg.reorder(_eve_and_bob(f, alice), INDEX_ORDER)


def cup(dim: int) -> IndexedTensor:
    """Unnormalized maximally entangled state ``sum_x |x>|x>``."""
    return IndexedTensor([], np.eye(dim, dtype=complex).reshape(dim * dim, 1))


def build_e91_lhs(f: ControlledFamily, alice_conjugated: bool = True) -> IndexedTensor:
    """Alice measures one half of a cup; the other half travels to Eve and Bob.

    Alice's vertex has its control on the far side of the bent wire, so it
    evaluates to the conjugate cell ``<s_k-bar|``; the surviving half is then
    ``|s_k>`` exactly as in BB84.  ``alice_conjugated=False`` uses the plain
    cell instead, leaving ``|s_k-bar>`` on the wire.
    """
    m = f.dim
    alice = measurement_cell(f, conjugated=alice_conjugated, basis="s", outcome="k")
    alice_on_first = dg.tensor_product(alice, IndexedTensor.identity([], m))
    half = dg.compose_quantum(cup(m), alice_on_first)
    return rewire(_eve_and_bob(f, half))


def rewire(t: IndexedTensor) -> IndexedTensor:
    """Put a QKD left side into the canonical region order."""
    return dg.reorder(t, INDEX_ORDER)


def correlated_pattern(f: ControlledFamily) -> IndexedTensor:
    """``[s = e][k = m = r]``: what any family gives when Eve guesses the basis."""
    n, m = f.n_bases, f.dim
    data = np.zeros((n, n, m, m, m, 1, 1), dtype=complex)
    for s in range(n):
        for k in range(m):
            data[s, s, k, k, k] = 1
    return IndexedTensor(_qkd_spec(f), data)


def _qkd_spec(f: ControlledFamily):
    B, O = f.basis_region, f.outcome_region
    return [("s", B), ("e", B), ("k", O), ("m", O), ("r", O)]


def pd_template(f: ControlledFamily) -> IndexedTensor:
    """``(1/m)`` times disconnected spiders on all five regions."""
    return uniform_tensor(_qkd_spec(f), value=1 / f.dim)


def build_bb84_rhs(f: ControlledFamily, psi: PhaseCell) -> IndexedTensor:
    if tuple(psi.names) != INDEX_ORDER:
        raise ValueError(f"psi must be indexed {INDEX_ORDER}, got {psi.names}")
    expect = tuple(s.size for _, s in _qkd_spec(f))
    if psi.values.shape != expect:
        raise ValueError(f"psi has shape {psi.values.shape}, family needs {expect}")
    pd = dg.apply_pd(dg.scale_by_phase(pd_template(f), psi), "s", "e")
    return dg.tensor_add(pd, correlated_pattern(f))


def _check_lhs(protocol: str, f: ControlledFamily, lhs: IndexedTensor, tol: float) -> QkdReport:
    ps = dg.tensors_equal(dg.apply_ps(lhs, "s", "e"), correlated_pattern(f), tol)
    support = dg.different_value_mask(lhs, "s", "e")
    tmpl = pd_template(f)
    ex = dg.extract_phase(dg.apply_pd(lhs, "s", "e"), dg.apply_pd(tmpl, "s", "e"), support, tol)
    worst = max(ps.deviation, ex.worst_residual, ex.worst_modulus_deviation)
    if not ps.equal:
        witness = ps.witness
    elif ex.failures:
        witness = ex.failures[0][0]
    else:
        witness = ex.modulus_witness
    passed = ps.equal and ex.proportional and ex.unit_modulus
    return QkdReport(
        protocol=protocol,
        ps_ok=ps.equal,
        pd_proportional=ex.proportional,
        psi=ex.phase,
        psi_unit_modulus=ex.unit_modulus,
        passed=passed,
        worst_violation=worst,
        witness=witness,
        ps_deviation=ps.deviation,
        pd_deviation=max(ex.worst_residual, ex.worst_modulus_deviation),
    )


def check_bb84(f: ControlledFamily, tol: float = DEFAULT_TOL) -> QkdReport:
    return _check_lhs("bb84", f, build_bb84_lhs(f), tol)


def check_e91(f: ControlledFamily, tol: float = DEFAULT_TOL) -> QkdReport:
    return _check_lhs("e91", f, build_e91_lhs(f), tol)


def check_protocol(protocol: str, f: ControlledFamily, tol: float = DEFAULT_TOL) -> QkdReport:
    if protocol == "bb84":
        return check_bb84(f, tol)
    if protocol == "e91":
        return check_e91(f, tol)
    raise ValueError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")


def psi_from_phi(f: ControlledFamily, phi: PhaseCell) -> PhaseCell:
    """``psi(s, e, k, m, r) = phi(s, e, k, m) * conj(phi(s, e, r, m))``.

    ``phi`` is the doubled-form phase over ``(a, b, i, j)``: Alice's basis
    and bit feed ``a`` and ``i``, Eve's basis and result feed ``b`` and ``j``.
    """
    if tuple(phi.names) != ("a", "b", "i", "j"):
        raise ValueError(f"phi must be indexed (a, b, i, j), got {phi.names}")
    n, m = f.n_bases, f.dim
    if phi.values.shape != (n, n, m, m):
        raise ValueError(f"phi has shape {phi.values.shape}, family needs {(n, n, m, m)}")
    p = phi.values
    vals = np.einsum("sekm,serm->sekmr", p, p.conj())
    return PhaseCell(_qkd_spec(f), vals)


@dataclass(frozen=True)
class AlphaIdentityReport:
    passed: bool
    worst_violation: float
    witness: dict | None
    alpha_matches_psi: float
    psi_unit: float
    alpha_unit: float


def alpha_dagger_alpha(f: ControlledFamily) -> IndexedTensor:
    """``m * alpha^dagger alpha`` over (a, b, i, j); one 1x1 block per assignment."""
    alpha = build_alpha(f)
    data = f.dim * alpha.data.conj().swapaxes(-1, -2) @ alpha.data
    return IndexedTensor(alpha.index_spec, data)


def check_alpha_identity(f: ControlledFamily, psi: PhaseCell, tol: float = DEFAULT_TOL) -> AlphaIdentityReport:
    """Three-way identity on ``a != b``: ``m alpha^dagger alpha = psi|_{r=k} = 1``.

    The middle term is the QKD phase with Bob's result fed back into Alice's
    bit; the right end is the disconnected identity.
    """
    if tuple(psi.names) != INDEX_ORDER:
        raise ValueError(f"psi must be indexed {INDEX_ORDER}, got {psi.names}")
    ada = alpha_dagger_alpha(f).data[..., 0, 0]
    # psi at r = k, relabelled (s, e, k, m) -> (a, b, i, j)
    middle = np.einsum("sekmk->sekm", psi.values)
    support = ~np.eye(f.n_bases, dtype=bool)[:, :, None, None]
    support = np.broadcast_to(support, ada.shape)

    def worst(dev):
        dev = np.where(support, dev, 0.0)
        idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
        return float(dev[idx]), dict(zip("abij", map(int, idx)))

    d1, w1 = worst(np.abs(ada - middle))
    d2, w2 = worst(np.abs(middle - 1))
    d3, w3 = worst(np.abs(ada - 1))
    dev, wit = max((d1, w1), (d2, w2), (d3, w3), key=lambda t: t[0])
    return AlphaIdentityReport(dev <= tol, dev, wit, d1, d2, d3)


def regions(f: ControlledFamily) -> dict:
    """Region sizes in canonical order, for serialization."""
    return {n: s.size for n, s in _qkd_spec(f)}

