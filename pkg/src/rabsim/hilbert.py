"""Fixed 9-dimensional Hilbert space of two three-level atoms.

Each atom has two ground states |0>, |1> and one Rydberg state |r>, with
level indices 0, 1, 2.  The two-atom basis state |mn> (atom 1 in m, atom 2
in n) sits at linear index ``3*m + n``, so the ordering is

    |00> |01> |0r> |10> |11> |1r> |r0> |r1> |rr>
      0    1    2    3    4    5    6    7    8

This ordering is a module constant; every operator and serialized matrix in
the package depends on it.  All operators are dense complex128 9x9 arrays.
"""

from __future__ import annotations

import numpy as np

# Single-atom level indices.
G0, G1, RYD = 0, 1, 2

N_LEVELS = 3
DIM = N_LEVELS * N_LEVELS

BASIS_LABELS = ("00", "01", "0r", "10", "11", "1r", "r0", "r1", "rr")

# Linear indices of the qubit (computational) subspace |00>, |01>, |10>, |11>.
QUBIT_INDICES = (0, 1, 3, 4)

# Number of atoms in |r> for each basis state; fixes the total-decay diagonal.
RYDBERG_COUNT = np.array([0, 0, 1, 0, 0, 1, 1, 1, 2], dtype=float)


def index_of(m: int, n: int) -> int:
    """Linear index of the two-atom basis state |mn>."""
    if not (0 <= m < N_LEVELS and 0 <= n < N_LEVELS):
        raise ValueError(f"level indices must be in 0..2, got ({m}, {n})")
    return N_LEVELS * m + n


def ket(m: int, n: int) -> np.ndarray:
    """Unit basis vector |mn> as a length-9 complex array."""
    psi = np.zeros(DIM, dtype=complex)
    psi[index_of(m, n)] = 1.0
    return psi


def projector(m: int, n: int) -> np.ndarray:
    """Rank-1 projector |mn><mn|."""
    psi = ket(m, n)
    return np.outer(psi, psi.conj())


def transition(a: int, b: int) -> np.ndarray:
    """Single-atom operator |a><b| as a 3x3 matrix."""
    op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    op[a, b] = 1.0
    return op


def embed_single_atom(op: np.ndarray, atom: int) -> np.ndarray:
    """Embed a 3x3 single-atom operator into the two-atom space.

    Returns ``op (x) I`` for atom 1 and ``I (x) op`` for atom 2, in the
    fixed basis ordering.
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (N_LEVELS, N_LEVELS):
        raise ValueError(f"expected a 3x3 operator, got shape {op.shape}")
    eye = np.eye(N_LEVELS, dtype=complex)
    if atom == 1:
        return np.kron(op, eye)
    if atom == 2:
        return np.kron(eye, op)
    raise ValueError(f"atom must be 1 or 2, got {atom}")


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose (on the last two axes for stacked operators)."""
    return np.conjugate(np.swapaxes(a, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix commutator ``a @ b - b @ a``."""
    return a @ b - b @ a


def is_hermitian(a: np.ndarray, tol: float = 1e-12) -> bool:
    """True when the max entry of ``a - a^dagger`` is within tol."""
    return bool(np.max(np.abs(a - dagger(a))) <= tol)


def check_density_matrix(
    rho: np.ndarray,
    *,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-8,
    eig_tol: float = 1e-8,
) -> None:
    """Validate the density-matrix invariants, raising ValueError on failure.

    Checks Hermiticity (max entry of rho - rho^dagger within ``herm_tol``),
    unit trace within ``trace_tol`` and positive semidefiniteness (smallest
    eigenvalue >= -``eig_tol``).
    """
    rho = np.asarray(rho)
    if rho.shape != (DIM, DIM):
        raise ValueError(f"density matrix must be 9x9, got shape {rho.shape}")
    herm_err = float(np.max(np.abs(rho - dagger(rho))))
    if herm_err > herm_tol:
        raise ValueError(f"density matrix not Hermitian: max deviation {herm_err:.3e}")
    trace_err = abs(np.trace(rho) - 1.0)
    if trace_err > trace_tol:
        raise ValueError(f"density matrix trace off unity by {trace_err:.3e}")
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0])
    if min_eig < -eig_tol:
        raise ValueError(f"density matrix not positive semidefinite: min eigenvalue {min_eig:.3e}")
