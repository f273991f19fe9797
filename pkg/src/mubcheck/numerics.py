"""Dense complex linear algebra on small matrices.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Every helper
here accepts anything ``np.asarray`` understands and returns a fresh array,
so callers never share mutable state with the library.
"""

import numpy as np

DEFAULT_TOL = 1e-9


class ShapeError(ValueError):
    """Raised when operands have incompatible shapes."""


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got array of shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T.copy()


def max_abs_diff(a, b) -> float:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def is_unitary(a, tol: float = DEFAULT_TOL) -> bool:
    """True iff both ``a a^dagger`` and ``a^dagger a`` are within ``tol`` of I (max-norm)."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"unitarity needs a square matrix, got {a.shape}")
    eye = np.eye(a.shape[0], dtype=complex)
    ad = dagger(a)
    return max_abs_diff(a @ ad, eye) <= tol and max_abs_diff(ad @ a, eye) <= tol


def unitarity_deviation(a) -> float:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"unitarity needs a square matrix, got {a.shape}")
    eye = np.eye(a.shape[0], dtype=complex)
    ad = dagger(a)
    return max(max_abs_diff(a @ ad, eye), max_abs_diff(ad @ a, eye))


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def fourier(m: int) -> np.ndarray:
    """The m x m discrete Fourier matrix, columns ``omega^(x*j)/sqrt(m)``."""
    x = np.arange(m)
    return np.exp(2j * np.pi * np.outer(x, x) / m) / np.sqrt(m)
