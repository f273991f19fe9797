"""Regenerate the MUB data tables for dimensions 4 and 8.

Each basis is the joint eigenbasis of one class of q-1 commuting Pauli
operators on k qubits (q = 2^k).  The classes are the Z-only class and,
for every field element a, the class ``{(x, S_a x)}`` with the symmetric
matrix ``S_a[i, j] = tr(a e_i e_j)`` over the polynomial basis ``e_i = x^i``.
Entries are rounded to ``{+-1, +-i} / sqrt(q)`` after fixing each vector's
global phase so that its first nonzero entry is real and positive.

    python3 scripts/gen_mub_tables.py [outdir]
"""

import itertools
import sys
from pathlib import Path

import numpy as np

from mubcheck import gf
from mubcheck.families import is_unbiased_pair
from mubcheck.numerics import is_unitary

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)


def pauli(x, z):
    """Hermitian Pauli ``i^{x.z} X^x Z^z`` on len(x) qubits."""
    op = np.eye(1, dtype=complex)
    for xi, zi in zip(x, z):
        op = np.kron(op, np.linalg.matrix_power(X, xi) @ np.linalg.matrix_power(Z, zi))
    return (1j ** (int(np.dot(x, z)) % 4)) * op


def trace_matrix(F, a):
    basis = [F.element(F.p**i) for i in range(F.k)]
    return np.array([[gf.field_trace(a * ei * ej) for ej in basis] for ei in basis], dtype=int)


def joint_eigenbasis(ops):
    h = sum((2.0**j) * op for j, op in enumerate(ops))
    vals, vecs = np.linalg.eigh(h)
    vecs = vecs[:, np.argsort(vals)]
    q = vecs.shape[0]
    for c in range(q):
        v = vecs[:, c]
        first = v[np.flatnonzero(np.abs(v) > 1e-6)[0]]
        v = v * abs(first) / first
        scaled = np.sqrt(q) * v
        vecs[:, c] = (np.round(scaled.real) + 1j * np.round(scaled.imag)) / np.sqrt(q)
    return vecs


def mub_bases(q):
    F = gf.field_for_order(q)
    k = F.k
    nonzero = [np.array(v) for v in itertools.product((0, 1), repeat=k) if any(v)]
    bases = [np.eye(q, dtype=complex)]
    for a in F.elements():
        s = trace_matrix(F, a)
        ops = [pauli(x, (s @ x) % 2) for x in nonzero]
        bases.append(joint_eigenbasis(ops))
    for b in bases:
        assert is_unitary(b, 1e-12)
    for i in range(len(bases)):
        for j in range(i + 1, len(bases)):
            assert is_unbiased_pair(bases[i], bases[j], q, 1e-12)
    return bases


def main(argv):
    out = Path(argv[1]) if len(argv) > 1 else Path(__file__).resolve().parents[1] / "src" / "mubcheck" / "data"
    out.mkdir(parents=True, exist_ok=True)
    for q in (4, 8):
        text = gf.format_mub_table(mub_bases(q), "rows are basis vectors; Pauli stabilizer construction")
        (out / f"mub{q}.txt").write_text(text)
        print(f"wrote {out / f'mub{q}.txt'}")


if __name__ == "__main__":
    main(sys.argv)
