"""Finite fields GF(p^k) and the prime-power constructions built on them.

Field elements are coefficient tuples ``(c_0, ..., c_{k-1})`` of polynomials
in the generator ``x``, reduced modulo a monic irreducible polynomial.  The
element with coefficients ``c`` has index ``sum(c_i * p**i)``; this puts
0 and 1 first and orders the rest lexicographically by coefficient, highest
degree most significant.  Function families and the Mean King lookup
table are indexed in this order.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .families import ControlledFamily, is_unbiased_pair, make_family
from .numerics import DEFAULT_TOL, is_unitary

MAX_FIELD_ORDER = 16
MUB_DIMENSIONS = (2, 3, 4, 5, 7, 8, 9)


class UnsupportedDimension(ValueError):
    pass


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def prime_power(n: int):
    """Return ``(p, k)`` with ``n == p**k``, or ``None``."""
    if n < 2:
        return None
    for p in range(2, n + 1):
        if n % p == 0:
            k, m = 0, n
            while m % p == 0:
                m //= p
                k += 1
            return (p, k) if m == 1 else None
    return None


# polynomials over GF(p): coefficient lists, constant term first


def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _poly_mod(a, m, p):
    a = _trim(x % p for x in a)
    m = _trim(m)
    inv_lead = pow(m[-1], -1, p)
    while len(a) >= len(m):
        q = (a[-1] * inv_lead) % p
        shift = len(a) - len(m)
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - q * c) % p
        a = _trim(a)
    return a


def _monic_polys(p, degree):
    for low in itertools.product(range(p), repeat=degree):
        yield list(low) + [1]


def is_irreducible(poly, p: int) -> bool:
    """Exhaustive trial division by every monic polynomial of degree up to half."""
    poly = _trim(poly)
    deg = len(poly) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for q in _monic_polys(p, d):
            if not _poly_mod(poly, q, p):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    p: int
    k: int
    modulus: tuple  # coefficients, constant first; (0, 1) for a prime field

    @property
    def order(self) -> int:
        return self.p**self.k

    def element(self, index: int) -> "FieldElement":
        if not 0 <= index < self.order:
            raise ValueError(f"index {index} outside GF({self.order})")
        coeffs = []
        for _ in range(self.k):
            index, c = divmod(index, self.p)
            coeffs.append(c)
        return FieldElement(self, tuple(coeffs))

    def elements(self) -> list:
        return [self.element(i) for i in range(self.order)]

    @property
    def zero(self) -> "FieldElement":
        return self.element(0)

    @property
    def one(self) -> "FieldElement":
        return self.element(1)


@functools.lru_cache(maxsize=None)
def field_make(p: int, k: int = 1) -> FieldSpec:
    """GF(p^k) with the least irreducible monic modulus (least in element-index order)."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1:
        raise ValueError(f"extension degree must be positive, got {k}")
    if p**k > MAX_FIELD_ORDER:
        raise UnsupportedDimension(f"GF({p}^{k}) exceeds the supported order {MAX_FIELD_ORDER}")
    if k == 1:
        return FieldSpec(p, 1, (0, 1))
    for low in itertools.product(range(p), repeat=k):
        cand = list(reversed(low)) + [1]
        # reversed product order enumerates sum(c_i p^i) increasing
        if is_irreducible(cand, p):
            return FieldSpec(p, k, tuple(cand))
    raise AssertionError("an irreducible polynomial of every degree exists")


def field_for_order(n: int) -> FieldSpec:
    pk = prime_power(n)
    if pk is None:
        raise UnsupportedDimension(f"{n} is not a prime power")
    return field_make(*pk)


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    coeffs: tuple

    @property
    def index(self) -> int:
        return sum(c * self.spec.p**i for i, c in enumerate(self.coeffs))

    def __add__(self, other):
        return field_add(self, other)

    def __sub__(self, other):
        return field_add(self, field_neg(other))

    def __neg__(self):
        return field_neg(self)

    def __mul__(self, other):
        return field_mul(self, other)

    def __truediv__(self, other):
        return field_mul(self, field_inv(other))

    def __pow__(self, e: int):
        return field_pow(self, e)

    def __bool__(self):
        return any(self.coeffs)

    def __repr__(self):
        return f"GF({self.spec.order})[{self.index}]"


def _check_same(a: FieldElement, b: FieldElement):
    if a.spec != b.spec:
        raise ValueError(f"elements of different fields GF({a.spec.order}) and GF({b.spec.order})")


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    _check_same(a, b)
    p = a.spec.p
    return FieldElement(a.spec, tuple((x + y) % p for x, y in zip(a.coeffs, b.coeffs)))


def field_neg(a: FieldElement) -> FieldElement:
    return FieldElement(a.spec, tuple((-x) % a.spec.p for x in a.coeffs))


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _check_same(a, b)
    spec = a.spec
    prod = [0] * (2 * spec.k - 1)
    for i, x in enumerate(a.coeffs):
        for j, y in enumerate(b.coeffs):
            prod[i + j] += x * y
    if spec.k == 1:
        red = [prod[0] % spec.p]
    else:
        red = _poly_mod(prod, spec.modulus, spec.p)
    red = red + [0] * (spec.k - len(red))
    return FieldElement(spec, tuple(red))


def field_pow(a: FieldElement, e: int) -> FieldElement:
    result, base = a.spec.one, a
    if e < 0:
        base, e = field_inv(a), -e
    while e:
        if e & 1:
            result = field_mul(result, base)
        base = field_mul(base, base)
        e >>= 1
    return result


def field_inv(a: FieldElement) -> FieldElement:
    if not a:
        raise ZeroDivisionError("zero has no inverse")
    return field_pow(a, a.spec.order - 2)


def field_trace(a: FieldElement) -> int:
    """Absolute trace to GF(p), returned as an integer in [0, p)."""
    t, x = a.spec.zero, a
    for _ in range(a.spec.k):
        t = t + x
        x = field_pow(x, a.spec.p)
    if any(t.coeffs[1:]):
        raise AssertionError("trace left the prime field")
    return t.coeffs[0]


# collision-1 function families


def collisions(f, g) -> int:
    if len(f) != len(g):
        raise ValueError(f"functions of different lengths {len(f)} and {len(g)}")
    return sum(1 for x, y in zip(f, g) if x == y)


@dataclass(frozen=True, eq=False)
class FunctionFamily:
    n: int
    functions: np.ndarray  # shape (n*n, n+1)

    def __len__(self):
        return len(self.functions)

    def __getitem__(self, i):
        return self.functions[i]


def function_family(n: int) -> FunctionFamily:
    """The n^2 affine functions ``c -> s*x_c + t`` extended by ``f(n) = s``.

    Function ``i = s*n + t`` (field indices).  Two distinct functions agree
    at exactly one argument: distinct slopes meet once among the first n
    arguments, equal slopes meet only at the extra point.
    """
    F = field_for_order(n)
    els = F.elements()
    funcs = np.zeros((n * n, n + 1), dtype=int)
    for s in els:
        for t in els:
            row = funcs[s.index * n + t.index]
            for c, x in enumerate(els):
                row[c] = (s * x + t).index
            row[n] = s.index
    funcs.setflags(write=False)
    return FunctionFamily(n, funcs)


# mutually unbiased bases


def _qubit_mubs() -> list:
    z = np.eye(2, dtype=complex)
    x = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    y = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
    return [z, x, y]


def _odd_mubs(n: int) -> list:
    """Standard basis plus ``v_{a,b}[x] = w^{tr(a x^2 + b x)} / sqrt(n)``, ``w = e^{2 pi i/p}``."""
    F = field_for_order(n)
    els = F.elements()
    omega = np.exp(2j * np.pi / F.p)
    bases = [np.eye(n, dtype=complex)]
    for a in els:
        m = np.zeros((n, n), dtype=complex)
        for b in els:
            for x in els:
                m[x.index, b.index] = omega ** field_trace(a * x * x + b * x)
        bases.append(m / np.sqrt(n))
    return bases


TABLE_FORMAT = "mub-table v1"


def parse_mub_table(text: str) -> tuple:
    """Parse a MUB table: ``dim D count N`` header, then one ``re im`` entry per line.

    Lines starting with ``#`` are comments.  Entries run row-major per basis,
    each row being one basis vector.  Returns ``(dim, [unitaries])`` with
    the vectors as columns.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    head = lines[0].split()
    if len(head) != 4 or head[0] != "dim" or head[2] != "count":
        raise ValueError(f"bad table header {lines[0]!r}")
    dim, count = int(head[1]), int(head[3])
    body = lines[1:]
    if len(body) != count * dim * dim:
        raise ValueError(f"expected {count * dim * dim} entries, found {len(body)}")
    vals = np.array([complex(float(r), float(i)) for r, i in (ln.split() for ln in body)])
    rows = vals.reshape(count, dim, dim)
    return dim, [r.T.copy() for r in rows]


def format_mub_table(bases, comment: str = "") -> str:
    dim = bases[0].shape[0]
    out = [f"# {TABLE_FORMAT}"]
    if comment:
        out += [f"# {ln}" for ln in comment.splitlines()]
    out.append(f"dim {dim} count {len(bases)}")
    for b in bases:
        for vec in b.T:
            for z in vec:
                out.append(f"{z.real:.17g} {z.imag:.17g}")
    return "\n".join(out) + "\n"


def _table_mubs(n: int, tol: float) -> list:
    text = resources.files("mubcheck").joinpath("data", f"mub{n}.txt").read_text()
    dim, bases = parse_mub_table(text)
    if dim != n or len(bases) != n + 1:
        raise ValueError(f"table for n={n} holds {len(bases)} bases of dimension {dim}")
    for a in range(len(bases)):
        if not is_unitary(bases[a], tol):
            raise ValueError(f"table basis {a} for n={n} is not unitary")
        for b in range(a + 1, len(bases)):
            if not is_unbiased_pair(bases[a], bases[b], n, tol):
                raise ValueError(f"table bases {a}, {b} for n={n} are not unbiased")
    return bases


@functools.lru_cache(maxsize=None)
def mub_family(n: int, tol: float = DEFAULT_TOL) -> ControlledFamily:
    """n+1 pairwise unbiased bases of C^n for n in :data:`MUB_DIMENSIONS`."""
    if n not in MUB_DIMENSIONS:
        raise UnsupportedDimension(f"unsupported dimension {n}; supported: {MUB_DIMENSIONS}")
    if n == 2:
        bases = _qubit_mubs()
    elif n % 2:
        bases = _odd_mubs(n)
    else:
        bases = _table_mubs(n, tol)
    return make_family(n, bases)
