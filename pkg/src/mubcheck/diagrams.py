"""Concrete 2Hilb semantics for surface diagrams.

A diagram with open classical regions evaluates to an :class:`IndexedTensor`:
one complex matrix (``quantum_out x quantum_in``) for every assignment of
labels to the open regions.  Components are held in a single dense array of
shape ``(*index_sizes, quantum_out, quantum_in)``; assignments are enumerated
exhaustively, which is cheap at the dimensions this package targets.

Spider convention: copy, compare, create and delete all have weight 1, so a
connected network of them is the delta function on its legs.  Closing a
region with nothing attached to it (``spider(region, 0)``) gives
``region.size``; a bubble inside a region that stays attached to the
ambient labels gives 1.  Every explicit ``1/n`` factor therefore appears
exactly where the equations write it.

Black vertices ("control from the other side") evaluate to the same
components as white ones; the difference is only which side of the diagram
the control region is drawn on.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .numerics import DEFAULT_TOL, ShapeError

_LETTERS = string.ascii_lowercase


@dataclass(frozen=True)
class ClassicalSystem:
    size: int
    name: str = ""

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError(f"classical system needs at least one label, got size {self.size}")


IndexSpec = tuple  # tuple[tuple[str, ClassicalSystem], ...]


def _normalize_spec(index_spec) -> tuple:
    spec = []
    for name, system in index_spec:
        if not isinstance(system, ClassicalSystem):
            system = ClassicalSystem(int(system), name)
        spec.append((str(name), system))
    names = [n for n, _ in spec]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate index names in {names}")
    return tuple(spec)


class IndexedTensor:
    """Matrix-valued function of the labels on a diagram's open classical regions."""

    __slots__ = ("index_spec", "data")

    def __init__(self, index_spec, data):
        spec = _normalize_spec(index_spec)
        arr = np.array(data, dtype=complex)
        sizes = tuple(s.size for _, s in spec)
        if arr.ndim != len(spec) + 2 or arr.shape[: len(spec)] != sizes:
            raise ShapeError(
                f"component array of shape {arr.shape} does not match indices {sizes} + (out, in)"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "index_spec", spec)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, key, value):
        raise AttributeError("IndexedTensor is immutable")

    # construction helpers

    @classmethod
    def zero(cls, index_spec, quantum_out: int = 1, quantum_in: int = 1) -> "IndexedTensor":
        spec = _normalize_spec(index_spec)
        shape = tuple(s.size for _, s in spec) + (quantum_out, quantum_in)
        return cls(spec, np.zeros(shape, dtype=complex))

    @classmethod
    def identity(cls, index_spec=(), dim: int = 1) -> "IndexedTensor":
        spec = _normalize_spec(index_spec)
        sizes = tuple(s.size for _, s in spec)
        data = np.broadcast_to(np.eye(dim, dtype=complex), sizes + (dim, dim))
        return cls(spec, data)

    @classmethod
    def scalar(cls, value) -> "IndexedTensor":
        return cls((), np.full((1, 1), value, dtype=complex))

    @classmethod
    def from_function(cls, index_spec, quantum_out, quantum_in, fn) -> "IndexedTensor":
        spec = _normalize_spec(index_spec)
        sizes = tuple(s.size for _, s in spec)
        data = np.zeros(sizes + (quantum_out, quantum_in), dtype=complex)
        for idx in np.ndindex(*sizes):
            data[idx] = np.asarray(fn(*idx), dtype=complex).reshape(quantum_out, quantum_in)
        return cls(spec, data)

    # accessors

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.index_spec)

    @property
    def sizes(self) -> tuple:
        return tuple(s.size for _, s in self.index_spec)

    @property
    def quantum_out(self) -> int:
        return self.data.shape[-2]

    @property
    def quantum_in(self) -> int:
        return self.data.shape[-1]

    def system(self, name: str) -> ClassicalSystem:
        return self.index_spec[self.axis(name)][1]

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no index named {name!r}; have {self.names}") from None

    def assignments(self) -> Iterator[tuple]:
        return np.ndindex(*self.sizes)

    def _key(self, assignment) -> tuple:
        if isinstance(assignment, Mapping):
            return tuple(int(assignment[n]) for n in self.names)
        return tuple(int(x) for x in assignment)

    def component(self, assignment=()) -> np.ndarray:
        return self.data[self._key(assignment)].copy()

    def __getitem__(self, assignment) -> np.ndarray:
        if not isinstance(assignment, (tuple, Mapping)):
            assignment = (assignment,)
        return self.component(assignment)

    def same_shape(self, other: "IndexedTensor") -> bool:
        return (
            self.names == other.names
            and self.sizes == other.sizes
            and self.data.shape[-2:] == other.data.shape[-2:]
        )

    def __repr__(self):
        idx = ", ".join(f"{n}:{s.size}" for n, s in self.index_spec)
        return f"IndexedTensor([{idx}], {self.quantum_out}x{self.quantum_in})"

    def __add__(self, other):
        return tensor_add(self, other)

    def __sub__(self, other):
        return tensor_add(self, tensor_scale(other, -1))

    def __mul__(self, s):
        return tensor_scale(self, s)

    __rmul__ = __mul__


def _require_same_spec(a: IndexedTensor, b: IndexedTensor) -> IndexedTensor:
    """Return ``b`` reordered to ``a``'s index order, or raise on a genuine mismatch."""
    if set(a.names) == set(b.names) and a.names != b.names:
        b = reorder(b, a.names)
    if not a.same_shape(b):
        raise ShapeError(f"index spec mismatch: {a!r} vs {b!r}")
    return b


# linear structure


def tensor_add(a: IndexedTensor, b: IndexedTensor) -> IndexedTensor:
    b = _require_same_spec(a, b)
    return IndexedTensor(a.index_spec, a.data + b.data)


def tensor_scale(a: IndexedTensor, s) -> IndexedTensor:
    return IndexedTensor(a.index_spec, a.data * complex(s))


# index plumbing


def reorder(t: IndexedTensor, names: Sequence[str]) -> IndexedTensor:
    names = tuple(names)
    if sorted(names) != sorted(t.names):
        raise KeyError(f"cannot reorder {t.names} as {names}")
    perm = [t.axis(n) for n in names]
    k = len(perm)
    data = np.transpose(t.data, perm + [k, k + 1])
    return IndexedTensor([t.index_spec[p] for p in perm], data)


def relabel(t: IndexedTensor, mapping: Mapping[str, str]) -> IndexedTensor:
    for old in mapping:
        t.axis(old)
    spec = [(mapping.get(n, n), s) for n, s in t.index_spec]
    return IndexedTensor(spec, t.data)


def contract(t: IndexedTensor, names) -> IndexedTensor:
    """Close the named regions: sum their labels out (delete spider, weight 1)."""
    if isinstance(names, str):
        names = [names]
    axes = tuple(t.axis(n) for n in names)
    spec = [e for i, e in enumerate(t.index_spec) if i not in axes]
    return IndexedTensor(spec, t.data.sum(axis=axes))


def merge_indices(t: IndexedTensor, keep: str, drop: str) -> IndexedTensor:
    """Compare spider: identify two regions, keeping ``keep`` open."""
    i, j = t.axis(keep), t.axis(drop)
    if t.sizes[i] != t.sizes[j]:
        raise ShapeError(f"cannot merge {keep} (size {t.sizes[i]}) with {drop} (size {t.sizes[j]})")
    letters = list(_LETTERS[: len(t.names)])
    letters[j] = letters[i]
    out = [l for k, l in enumerate(letters) if k != j]
    expr = "".join(letters) + "YZ->" + "".join(out) + "YZ"
    spec = [e for k, e in enumerate(t.index_spec) if k != j]
    return IndexedTensor(spec, np.einsum(expr, t.data))


def copy_index(t: IndexedTensor, name: str, new: str) -> IndexedTensor:
    """Copy spider: a new region always holding the same label as ``name``."""
    i = t.axis(name)
    n = t.sizes[i]
    data = np.expand_dims(t.data, len(t.names)) * _delta_along(t, i, n)
    return IndexedTensor(list(t.index_spec) + [(new, t.index_spec[i][1])], data)


def _delta_along(t: IndexedTensor, axis: int, n: int) -> np.ndarray:
    shape = [1] * (len(t.names) + 3)
    shape[axis] = n
    shape[len(t.names)] = n
    return np.eye(n).reshape(shape)


def create_index(t: IndexedTensor, name: str, system) -> IndexedTensor:
    """Create uniform classical information: components do not depend on the new label."""
    if not isinstance(system, ClassicalSystem):
        system = ClassicalSystem(int(system), name)
    data = np.broadcast_to(
        np.expand_dims(t.data, len(t.names)),
        t.sizes + (system.size,) + t.data.shape[-2:],
    )
    return IndexedTensor(list(t.index_spec) + [(name, system)], data)


def _shared_pairs(a: IndexedTensor, b: IndexedTensor, shared) -> list:
    if shared is None:
        return [(n, n) for n in a.names if n in b.names]
    pairs = []
    for item in shared:
        pairs.append((item, item) if isinstance(item, str) else tuple(item))
    return pairs


def _einsum_layout(a: IndexedTensor, b: IndexedTensor, shared):
    pairs = _shared_pairs(a, b, shared)
    b_to_a = {}
    for na, nb in pairs:
        ia, ib = a.axis(na), b.axis(nb)
        if a.sizes[ia] != b.sizes[ib]:
            raise ShapeError(f"shared index {na}/{nb} has sizes {a.sizes[ia]} and {b.sizes[ib]}")
        b_to_a[nb] = na
    clash = [n for n in b.names if n not in b_to_a and n in a.names]
    if clash:
        raise ValueError(f"index names {clash} occur in both operands but are not declared shared")
    letters = iter(_LETTERS[: len(a.names) + len(b.names)])
    la = {n: next(letters) for n in a.names}
    lb = {}
    spec = list(a.index_spec)
    for n, s in b.index_spec:
        if n in b_to_a:
            lb[n] = la[b_to_a[n]]
        else:
            lb[n] = next(letters)
            spec.append((n, s))
    sa = "".join(la[n] for n in a.names)
    sb = "".join(lb[n] for n in b.names)
    out = sa + "".join(lb[n] for n in b.names if n not in b_to_a)
    return sa, sb, out, spec


def compose_quantum(a: IndexedTensor, b: IndexedTensor, shared=None) -> IndexedTensor:
    """Vertical composition ``b o a``: ``a`` happens first.

    ``shared`` lists the regions the two cells have in common, either as
    names or as ``(name_in_a, name_in_b)`` pairs; by default every name
    occurring in both is shared.  Shared regions are identified (the
    components are taken on the diagonal) and stay open.  Any region that
    should be closed afterwards is summed out with :func:`contract`.
    """
    if a.quantum_out != b.quantum_in:
        raise ShapeError(
            f"cannot compose: first cell outputs dimension {a.quantum_out}, "
            f"second expects {b.quantum_in}"
        )
    sa, sb, out, spec = _einsum_layout(a, b, shared)
    data = np.einsum(f"{sa}XW,{sb}VX->{out}VW", a.data, b.data)
    return IndexedTensor(spec, data)


def tensor_product(a: IndexedTensor, b: IndexedTensor, shared=None) -> IndexedTensor:
    """Place two cells side by side: Kronecker product of the quantum parts."""
    sa, sb, out, spec = _einsum_layout(a, b, shared)
    data = np.einsum(f"{sa}PQ,{sb}RS->{out}PRQS", a.data, b.data)
    lead = data.shape[:-4]
    data = data.reshape(lead + (a.quantum_out * b.quantum_out, a.quantum_in * b.quantum_in))
    return IndexedTensor(spec, data)


def spider(region: ClassicalSystem, legs: int, names: Sequence[str] | None = None) -> IndexedTensor:
    """Connected copy/compare/create/delete network with ``legs`` open legs.

    The component is 1 when every leg carries the same label and 0 otherwise.
    With no legs the network is a closed sphere of the region and evaluates
    to ``region.size``.
    """
    if legs == 0:
        return IndexedTensor.scalar(region.size)
    if names is None:
        names = [f"{region.name or 'x'}{k}" for k in range(legs)]
    if len(names) != legs:
        raise ValueError(f"{legs} legs but {len(names)} names")
    n = region.size
    data = np.zeros((n,) * legs + (1, 1), dtype=complex)
    for x in range(n):
        data[(x,) * legs] = 1
    return IndexedTensor([(nm, region) for nm in names], data)


def classical_function(domain: ClassicalSystem, codomain: ClassicalSystem, fn, names=("x", "y")) -> IndexedTensor:
    """Comonoid homomorphism between classical regions: component 1 iff ``y == fn(x)``."""
    data = np.zeros((domain.size, codomain.size, 1, 1), dtype=complex)
    for x in range(domain.size):
        y = int(fn(x))
        if not 0 <= y < codomain.size:
            raise ValueError(f"function value {y} outside codomain of size {codomain.size}")
        data[x, y] = 1
    return IndexedTensor([(names[0], domain), (names[1], codomain)], data)


# projectors


def _pair_mask(t: IndexedTensor, i: str, j: str) -> np.ndarray:
    ai, aj = t.axis(i), t.axis(j)
    if t.sizes[ai] != t.sizes[aj]:
        raise ShapeError(f"projector needs equal-size regions, {i}:{t.sizes[ai]} vs {j}:{t.sizes[aj]}")
    shape = [1] * len(t.names)
    shape[ai] = t.sizes[ai]
    shape[aj] = t.sizes[aj]
    eye = np.eye(t.sizes[ai], dtype=bool)
    if ai > aj:
        eye = eye.T
    return np.broadcast_to(eye.reshape(shape), t.sizes)


def same_value_mask(t: IndexedTensor, i: str, j: str) -> np.ndarray:
    return np.array(_pair_mask(t, i, j))


def different_value_mask(t: IndexedTensor, i: str, j: str) -> np.ndarray:
    return ~_pair_mask(t, i, j)


def apply_mask(t: IndexedTensor, mask: np.ndarray) -> IndexedTensor:
    mask = np.broadcast_to(mask, t.sizes)
    return IndexedTensor(t.index_spec, t.data * mask[..., None, None])


def apply_ps(t: IndexedTensor, i: str, j: str) -> IndexedTensor:
    """Same-value projector on regions ``i`` and ``j``."""
    return apply_mask(t, _pair_mask(t, i, j))


def apply_pd(t: IndexedTensor, i: str, j: str) -> IndexedTensor:
    """Different-value projector, ``id - Ps``."""
    return apply_mask(t, ~_pair_mask(t, i, j))


# comparison


@dataclass(frozen=True)
class Comparison:
    equal: bool
    deviation: float
    witness: dict | None = None

    def __bool__(self):
        return self.equal


def tensors_equal(a: IndexedTensor, b: IndexedTensor, tol: float = DEFAULT_TOL) -> Comparison:
    """Entrywise comparison over every assignment; reports the worst one."""
    b = _require_same_spec(a, b)
    diff = np.abs(a.data - b.data)
    if diff.size == 0:
        return Comparison(True, 0.0, None)
    per = diff.reshape(a.sizes + (-1,)).max(axis=-1)
    worst = np.unravel_index(int(np.argmax(per)), a.sizes) if a.sizes else ()
    dev = float(per[worst]) if a.sizes else float(per)
    witness = dict(zip(a.names, map(int, worst)))
    return Comparison(dev <= tol, dev, witness)


# controlled phases


@dataclass(frozen=True, eq=False)
class PhaseCell:
    """Family of scalars indexed by classical labels (a controlled phase when unit modulus)."""

    index_spec: tuple
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        spec = _normalize_spec(self.index_spec)
        vals = np.array(self.values, dtype=complex)
        if vals.shape != tuple(s.size for _, s in spec):
            raise ShapeError(f"phase values of shape {vals.shape} do not match {spec}")
        vals.setflags(write=False)
        object.__setattr__(self, "index_spec", spec)
        object.__setattr__(self, "values", vals)

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.index_spec)

    def value(self, assignment) -> complex:
        if isinstance(assignment, Mapping):
            assignment = tuple(assignment[n] for n in self.names)
        return complex(self.values[tuple(assignment)])

    def modulus_deviation(self, support: np.ndarray | None = None) -> float:
        dev = np.abs(np.abs(self.values) - 1)
        if support is not None:
            dev = dev[np.broadcast_to(support, dev.shape)]
        return float(dev.max()) if dev.size else 0.0

    def is_unit_modulus(self, tol: float = DEFAULT_TOL, support=None) -> bool:
        return self.modulus_deviation(support) <= tol

    def conj(self) -> "PhaseCell":
        return PhaseCell(self.index_spec, self.values.conj())

    def reorder(self, names) -> "PhaseCell":
        perm = [self.names.index(n) for n in names]
        return PhaseCell([self.index_spec[p] for p in perm], np.transpose(self.values, perm))


def scale_by_phase(t: IndexedTensor, phase: PhaseCell) -> IndexedTensor:
    """Multiply each component by the phase at the matching labels.

    The phase may depend on a subset of the tensor's regions.
    """
    missing = [n for n in phase.names if n not in t.names]
    if missing:
        raise KeyError(f"phase attaches to regions {missing} absent from {t!r}")
    for n, s in phase.index_spec:
        if t.system(n).size != s.size:
            raise ShapeError(f"phase region {n} has size {s.size}, tensor has {t.system(n).size}")
    order = [n for n in t.names if n in phase.names]
    vals = phase.reorder(order).values
    shape = [t.system(n).size if n in phase.names else 1 for n in t.names]
    return IndexedTensor(t.index_spec, t.data * vals.reshape(shape)[..., None, None])


@dataclass(frozen=True, eq=False)
class PhaseExtraction:
    phase: PhaseCell
    support: np.ndarray = field(repr=False)
    proportional: bool
    unit_modulus: bool
    worst_residual: float
    worst_modulus_deviation: float
    modulus_witness: dict | None
    failures: tuple = ()

    @property
    def passed(self) -> bool:
        return self.proportional and self.unit_modulus


def _support_mask(t: IndexedTensor, support) -> np.ndarray:
    if support is None:
        return np.ones(t.sizes, dtype=bool)
    if callable(support):
        mask = np.zeros(t.sizes, dtype=bool)
        for idx in t.assignments():
            mask[idx] = bool(support(dict(zip(t.names, idx))))
        return mask
    return np.array(np.broadcast_to(np.asarray(support, dtype=bool), t.sizes))


def extract_phase(lhs: IndexedTensor, template: IndexedTensor, support=None, tol: float = DEFAULT_TOL) -> PhaseExtraction:
    """Find scalars ``s(x)`` with ``lhs(x) = s(x) * template(x)`` on the support.

    Each ratio is the least-squares solution for its assignment.  An
    assignment where the residual exceeds ``tol`` is a proportionality
    failure; failures are collected, never raised.  Off the support the
    phase is set to 1.
    """
    template = _require_same_spec(lhs, template)
    mask = _support_mask(lhs, support)
    sizes = lhs.sizes
    l = lhs.data.reshape(sizes + (-1,))
    t = template.data.reshape(sizes + (-1,))
    tt = np.sum(np.abs(t) ** 2, axis=-1)
    tl = np.sum(t.conj() * l, axis=-1)
    safe = tt > 0
    ratio = np.where(safe, tl / np.where(safe, tt, 1), 1.0)
    residual = np.max(np.abs(l - ratio[..., None] * t), axis=-1) if l.shape[-1] else np.zeros(sizes)
    ratio = np.where(mask, ratio, 1.0)
    residual = np.where(mask, residual, 0.0)

    failures = []
    for idx in zip(*np.nonzero(residual > tol)):
        failures.append((dict(zip(lhs.names, map(int, idx))), float(residual[idx])))

    modulus_dev = np.where(mask, np.abs(np.abs(ratio) - 1), 0.0)
    if modulus_dev.size:
        worst = np.unravel_index(int(np.argmax(modulus_dev)), sizes) if sizes else ()
        worst_mod = float(modulus_dev[worst])
        witness = dict(zip(lhs.names, map(int, worst)))
        worst_res = float(residual.max())
    else:
        worst_mod, witness, worst_res = 0.0, None, 0.0
    phase = PhaseCell(lhs.index_spec, ratio)
    return PhaseExtraction(
        phase=phase,
        support=mask,
        proportional=not failures,
        unit_modulus=worst_mod <= tol,
        worst_residual=worst_res,
        worst_modulus_deviation=worst_mod,
        modulus_witness=witness,
        failures=tuple(failures),
    )


def iter_assignments(spec) -> Iterable[dict]:
    spec = _normalize_spec(spec)
    names = [n for n, _ in spec]
    for idx in itertools.product(*(range(s.size) for _, s in spec)):
        yield dict(zip(names, idx))


Predicate = Callable[[dict], bool]
