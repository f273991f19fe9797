"""The Mean King problem in prime-power dimension n.

Alice prepares a maximally entangled pair and hands one half to the King.
He measures it in one of the n+1 bases of a complementary family, sends it
back, and later announces only the basis.  Alice measures the joint system
in the orthonormal basis ``{|mu_f>}`` and reads the King's outcome off a
lookup table ``lookup[i, b] = f_i(b)``.

Tensor-factor convention: the first factor of every bipartite state is the
system the King touched, the second is the half Alice kept.  After the King
sees outcome ``k`` in basis ``b`` the joint state is ``|b_k> (x) |b_k-bar>``,
which is the order the conjugated second factor of ``mu_f`` expects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagrams as dg
from .diagrams import ClassicalSystem, IndexedTensor
from .families import ControlledFamily, encoding_cell, measurement_cell
from .gf import function_family, mub_family
from .numerics import DEFAULT_TOL


@dataclass(frozen=True, eq=False)
class BipartiteState:
    dim: int
    amplitudes: np.ndarray  # index j*dim + k for |j>|k>

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (self.dim * self.dim,):
            raise ValueError(f"expected {self.dim * self.dim} amplitudes, got {amp.shape[0]}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def inner(self, other: "BipartiteState") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def product(cls, u, v) -> "BipartiteState":
        u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
        return cls(len(u), np.kron(u, v))


def mu_state(f, family: ControlledFamily) -> BipartiteState:
    """``(1/sqrt n) (sum_a |a_{f(a)}> (x) |a_{f(a)}-bar>  -  sum_k |k>|k>)``."""
    n = family.dim
    f = np.asarray(f, dtype=int)
    if family.n_bases != n + 1:
        raise ValueError(f"need n+1 = {n + 1} bases of C^{n}, family has {family.n_bases}")
    if f.shape != (n + 1,):
        raise ValueError(f"function must have length {n + 1}, got {f.shape}")
    if f.min() < 0 or f.max() >= n:
        raise ValueError(f"function values must lie in [0, {n})")
    amp = np.zeros(n * n, dtype=complex)
    for a, out in enumerate(f):
        v = family.bases[a][:, out]
        amp += np.kron(v, v.conj())
    amp -= np.eye(n, dtype=complex).reshape(-1)
    return BipartiteState(n, amp / np.sqrt(n))


def mu_matrix(states) -> np.ndarray:
    """Stack states as columns."""
    return np.stack([s.amplitudes for s in states], axis=1)


def collision_matrix(functions) -> np.ndarray:
    funcs = np.asarray(functions)
    return (funcs[:, None, :] == funcs[None, :, :]).sum(axis=-1)


@dataclass(frozen=True)
class CollisionReport:
    passed: bool
    worst_violation: float
    worst_pair: tuple


def check_collision_lemma(family: ControlledFamily, functions, tol: float = 1e-10) -> CollisionReport:
    """``n <mu_f|mu_g> + 1 = f <> g`` for every ordered pair, ``f = g`` included."""
    n = family.dim
    funcs = np.asarray(functions.functions if hasattr(functions, "functions") else functions)
    M = mu_matrix([mu_state(f, family) for f in funcs])
    gram = M.conj().T @ M
    dev = np.abs(n * gram + 1 - collision_matrix(funcs))
    idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
    worst = float(dev[idx])
    return CollisionReport(worst <= tol, worst, (int(idx[0]), int(idx[1])))


@dataclass(frozen=True, eq=False)
class MeanKingScheme:
    family: ControlledFamily
    mu_basis: tuple
    lookup: np.ndarray  # [state index i, basis b] -> guessed outcome

    @property
    def n(self) -> int:
        return self.family.dim

    def mu_matrix(self) -> np.ndarray:
        return mu_matrix(self.mu_basis)


def scheme_from_functions(family: ControlledFamily, functions) -> MeanKingScheme:
    funcs = np.array(functions, dtype=int)
    states = tuple(mu_state(f, family) for f in funcs)
    funcs.setflags(write=False)
    return MeanKingScheme(family, states, funcs)


def build_scheme(n: int) -> MeanKingScheme:
    """MUB family, the collision-1 functions, and ``lookup[i, b] = f_i(b)``."""
    return scheme_from_functions(mub_family(n), function_family(n).functions)


def corrupt_lookup(scheme: MeanKingScheme, i: int = 0, b: int = 0) -> MeanKingScheme:
    """Same states, one lookup entry shifted by one (mod n)."""
    lookup = np.array(scheme.lookup)
    lookup[i, b] = (lookup[i, b] + 1) % scheme.n
    lookup.setflags(write=False)
    return MeanKingScheme(scheme.family, scheme.mu_basis, lookup)


@dataclass(frozen=True)
class GramReport:
    passed: bool
    deviation: float


def check_orthonormal(scheme: MeanKingScheme, tol: float = DEFAULT_TOL) -> GramReport:
    M = scheme.mu_matrix()
    gram = M.conj().T @ M
    dev = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    return GramReport(dev <= tol, dev)


def post_measurement_state(family: ControlledFamily, basis: int, outcome: int) -> np.ndarray:
    """Joint state after the King's measurement, returned system first."""
    v = family.bases[basis][:, outcome]
    return np.kron(v, v.conj())


def overlap_table(scheme: MeanKingScheme) -> np.ndarray:
    """``[i, b, k] = <mu_i| b_k (x) b_k-bar>``."""
    n = scheme.n
    M = scheme.mu_matrix()
    out = np.zeros((M.shape[1], scheme.family.n_bases, n), dtype=complex)
    for b in range(scheme.family.n_bases):
        for k in range(n):
            out[:, b, k] = M.conj().T @ post_measurement_state(scheme.family, b, k)
    return out


@dataclass(frozen=True)
class SupportReport:
    passed: bool
    worst_violation: float
    witness: dict | None


def verify_support(scheme: MeanKingScheme, tol: float = DEFAULT_TOL) -> SupportReport:
    """Alice never sees a state whose lookup disagrees with the King's outcome."""
    probs = np.abs(overlap_table(scheme)) ** 2
    k = np.arange(scheme.n)
    forbidden = scheme.lookup[:, :, None] != k[None, None, :]
    bad = np.where(forbidden, probs, 0.0)
    idx = np.unravel_index(int(np.argmax(bad)), bad.shape)
    worst = float(bad[idx])
    witness = dict(zip(("i", "b", "k"), map(int, idx))) if worst > tol else None
    return SupportReport(worst <= tol, worst, witness)


# the Mean King composite as an indexed tensor


def cup_state(n: int) -> IndexedTensor:
    """Normalized maximally entangled pair ``(1/sqrt n) sum_x |x>|x>``."""
    return IndexedTensor([], np.eye(n, dtype=complex).reshape(n * n, 1) / np.sqrt(n))


def mu_measurement_cell(scheme: MeanKingScheme, name: str = "i") -> IndexedTensor:
    """Component ``i`` is the row ``<mu_i|``."""
    M = scheme.mu_matrix()
    region = ClassicalSystem(M.shape[1], "state")
    return IndexedTensor([(name, region)], M.conj().T[:, None, :])


def lookup_cell(scheme: MeanKingScheme) -> IndexedTensor:
    """Classical function ``(i, b) -> g``: component 1 iff ``g = lookup[i, b]``."""
    n_states, n_bases = scheme.lookup.shape
    data = np.zeros((n_states, n_bases, scheme.n, 1, 1), dtype=complex)
    for i in range(n_states):
        for b in range(n_bases):
            data[i, b, scheme.lookup[i, b]] = 1
    spec = [
        ("i", ClassicalSystem(n_states, "state")),
        ("b", scheme.family.basis_region),
        ("g", scheme.family.outcome_region),
    ]
    return IndexedTensor(spec, data)


def build_mk_tensor(scheme: MeanKingScheme) -> IndexedTensor:
    """The composite over (King basis ``b``, King outcome ``k``, Alice guess ``g``).

    Cup, then the King's measure-and-resend on the first factor, then
    Alice's ``mu`` measurement, then the lookup.  Alice's outcome ``i`` is
    classical but is kept as the output space of each component, so
    ``component(b, k, g)[i]`` is the amplitude for her seeing ``i`` and
    guessing ``g``; different ``i`` never interfere.
    """
    n = scheme.n
    eye = IndexedTensor.identity([], n)
    king = dg.compose_quantum(
        measurement_cell(scheme.family, basis="b", outcome="k"),
        encoding_cell(scheme.family, basis="b", outcome="k"),
    )
    t = dg.compose_quantum(cup_state(n), dg.tensor_product(king, eye))
    t = dg.compose_quantum(t, mu_measurement_cell(scheme))
    t = dg.tensor_product(t, lookup_cell(scheme))  # shares i and b
    t = dg.reorder(t, ("b", "k", "g", "i"))
    # move i into the output space
    data = np.moveaxis(t.data[..., 0, 0], 3, -1)[..., None]
    return IndexedTensor(t.index_spec[:3], data)


def success_probability(t: IndexedTensor) -> float:
    """Uniform King basis; probability that Alice's guess equals his outcome."""
    probs = np.sum(np.abs(t.data) ** 2, axis=(-2, -1))  # [b, k, g]
    n_bases = probs.shape[0]
    hits = np.trace(probs, axis1=1, axis2=2)
    return float(np.sum(hits) / n_bases)


@dataclass(frozen=True)
class MkReport:
    support_ok: bool
    equation_ok: bool
    success_probability: float
    worst_violation: float
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.support_ok and self.equation_ok


def check_mk_equation(scheme: MeanKingScheme, tol: float = DEFAULT_TOL) -> MkReport:
    """The composite equals itself with ``k`` and ``g`` forced equal by a compare spider."""
    t = build_mk_tensor(scheme)
    cmp = dg.tensors_equal(t, dg.apply_ps(t, "k", "g"), tol)
    sup = verify_support(scheme, tol)
    p = success_probability(t)
    return MkReport(sup.passed, cmp.equal, p, cmp.deviation, cmp.witness if not cmp.equal else sup.witness)


@dataclass(frozen=True, eq=False)
class Simulation:
    basis: int
    outcome: int
    probabilities: np.ndarray  # over Alice's outcome i
    guesses: np.ndarray  # lookup[i, basis]

    @property
    def p_correct(self) -> float:
        return float(self.probabilities[self.guesses == self.outcome].sum())

    def guess_distribution(self, n: int) -> np.ndarray:
        return np.bincount(self.guesses, weights=self.probabilities, minlength=n)


def simulate(scheme: MeanKingScheme, king_basis: int, king_outcome: int) -> Simulation:
    """Exact distribution of Alice's outcome given the King's basis and result."""
    if not 0 <= king_basis < scheme.family.n_bases:
        raise ValueError(f"basis {king_basis} out of range [0, {scheme.family.n_bases})")
    if not 0 <= king_outcome < scheme.n:
        raise ValueError(f"outcome {king_outcome} out of range [0, {scheme.n})")
    state = post_measurement_state(scheme.family, king_basis, king_outcome)
    amps = scheme.mu_matrix().conj().T @ state
    probs = np.abs(amps) ** 2
    return Simulation(king_basis, king_outcome, probs, np.asarray(scheme.lookup[:, king_basis]))


def king_outcome_marginal(scheme: MeanKingScheme, king_basis: int) -> np.ndarray:
    """Probability of each King outcome on his half of the cup."""
    n = scheme.n
    rho = np.eye(n, dtype=complex) / n  # reduced state of a maximally entangled pair
    B = scheme.family.bases[king_basis]
    return np.real(np.einsum("xk,xy,yk->k", B.conj(), rho, B))


# collision sums over a complementary family


def collision_sum_lhs(family: ControlledFamily, g) -> IndexedTensor:
    """Over (a, b): ``sum_c |<c_{g(c)}|a_b>|^2``.

    Two wires carry ``|a_b>`` into a measurement in basis ``c`` with
    outcome ``o``, one of them conjugated; ``g`` ties ``o`` to ``c`` and both
    are then closed.
    """
    wire = dg.compose_quantum(
        encoding_cell(family, basis="a", outcome="b"),
        measurement_cell(family, basis="c", outcome="o"),
    )
    bar = dg.compose_quantum(
        encoding_cell(family, True, basis="a", outcome="b"),
        measurement_cell(family, True, basis="c", outcome="o"),
    )
    t = dg.tensor_product(wire, bar)
    gc = dg.classical_function(family.basis_region, family.outcome_region, lambda c: g[c], names=("c", "o"))
    t = dg.tensor_product(t, gc)
    return dg.reorder(dg.contract(t, ["c", "o"]), ("a", "b"))


def collision_sum_rhs(family: ControlledFamily, g) -> IndexedTensor:
    """``[g(a) = b] + 1``."""
    delta = dg.classical_function(family.basis_region, family.outcome_region, lambda a: g[a], names=("a", "b"))
    return dg.tensor_add(delta, IndexedTensor(delta.index_spec, np.ones_like(delta.data)))


def check_collision_sum(family: ControlledFamily, g, tol: float = DEFAULT_TOL) -> dg.Comparison:
    return dg.tensors_equal(collision_sum_lhs(family, g), collision_sum_rhs(family, g), tol)

