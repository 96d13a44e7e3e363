"""
Dense complex linear algebra and quantum-state primitives.

Operators and states are plain ``numpy`` arrays of dtype ``complex128``.
Walker states live on the joint position x coin space with the basis
ordering ``index = position_index * 2 + coin_index`` where coin index 0 is
``|H>`` and 1 is ``|V>``; positions are ordered ascending.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "DEFAULT_ATOL",
    "as_matrix",
    "matmul",
    "dagger",
    "outer",
    "partial_trace_position",
    "hs_distance_sq",
    "allclose",
    "is_unitary",
    "is_hermitian",
    "is_density_matrix",
    "maximally_mixed",
    "basis_state",
]

DEFAULT_ATOL = 1e-10

ComplexArray = NDArray[np.complex128]


def as_matrix(a: ArrayLike) -> ComplexArray:
    """Return ``a`` as a 2-D complex array, rejecting anything else."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def matmul(a: ArrayLike, b: ArrayLike) -> ComplexArray:
    """
    Matrix product ``a @ b``.

    Raises
    ------
    ValueError
        If the inner dimensions do not agree.
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def dagger(a: ArrayLike) -> ComplexArray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def outer(v: ArrayLike) -> ComplexArray:
    """Rank-one projector ``|v><v|`` of a pure state vector."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def partial_trace_position(rho: ArrayLike) -> ComplexArray:
    """
    Trace out the position register of a walker density matrix.

    Parameters
    ----------
    rho : array_like, shape (2V, 2V)
        Joint position x coin density matrix.

    Returns
    -------
    ndarray, shape (2, 2)
        Reduced coin state. The trace of ``rho`` is preserved.
    """
    rho = as_matrix(rho)
    dim = rho.shape[0]
    if rho.shape[1] != dim or dim % 2:
        raise ValueError(f"walker density matrix must be square of even size, got {rho.shape}")
    v = dim // 2
    return np.einsum("pcpd->cd", rho.reshape(v, 2, v, 2))


def hs_distance_sq(a: ArrayLike, b: ArrayLike) -> float:
    """
    Squared Hilbert-Schmidt distance ``Tr[(a - b)^2]``.

    For Hermitian inputs this is the squared Frobenius norm of the
    difference, which is how it is evaluated (symmetric and nonnegative by
    construction).
    """
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sum(d.real**2 + d.imag**2))


def allclose(a: ArrayLike, b: ArrayLike, atol: float = DEFAULT_ATOL) -> bool:
    """Entrywise comparison with an absolute tolerance only."""
    a, b = np.asarray(a), np.asarray(b)
    return a.shape == b.shape and bool(np.all(np.abs(a - b) <= atol))


def is_unitary(u: ArrayLike, atol: float = DEFAULT_ATOL) -> bool:
    u = as_matrix(u)
    return u.shape[0] == u.shape[1] and allclose(u.conj().T @ u, np.eye(u.shape[0]), atol)


def is_hermitian(a: ArrayLike, atol: float = DEFAULT_ATOL) -> bool:
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and allclose(a, a.conj().T, atol)


def is_density_matrix(
    rho: ArrayLike,
    atol: float = DEFAULT_ATOL,
    psd_atol: float = 1e-9,
    normalized: bool = True,
) -> bool:
    """
    Check Hermiticity, trace and positivity.

    With ``normalized=False`` the trace only has to lie in ``(0, 1]``,
    matching the subnormalized states produced by lossy evolution.
    """
    rho = as_matrix(rho)
    if not is_hermitian(rho, atol):
        return False
    tr = float(np.trace(rho).real)
    if normalized:
        if abs(tr - 1.0) > atol:
            return False
    elif not 0.0 < tr <= 1.0 + atol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -psd_atol)


def maximally_mixed(dim: int) -> ComplexArray:
    return np.eye(dim, dtype=np.complex128) / dim


def basis_state(dim: int, index: int) -> ComplexArray:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return v
