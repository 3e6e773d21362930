"""Dense linear-algebra core: states, density matrices, entropies, fidelity.

States are plain numpy arrays. A state vector on ``n`` qubits is a complex
array of length ``2**n``; a density matrix is a ``2**n x 2**n`` complex array.
Qubit 0 is the most significant bit of the computational-basis index, so
``|q0 q1 ... q_{n-1}>`` has index ``sum(q_j << (n - 1 - j))``. Every module in
the package uses this convention.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import UnsupportedScaleError, ValidationError

MAX_STATE_QUBITS = 14
MAX_DENSITY_QUBITS = 12

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12
# eigenvalues in [-NEG_EIG_TOL, ZERO_EIG_TOL] count as zero in entropies
NEG_EIG_TOL = 1e-8
ZERO_EIG_TOL = 1e-12

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise ValidationError(f"dimension {dim} is not a power of two")
    return n


def as_state(psi, normalized: bool = True) -> np.ndarray:
    """Validate and return ``psi`` as a complex state vector."""
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValidationError(f"state vector must be 1-D, got shape {psi.shape}")
    n = num_qubits(psi.shape[0])
    if n > MAX_STATE_QUBITS:
        raise UnsupportedScaleError(f"{n} qubits exceeds the dense cap of {MAX_STATE_QUBITS}")
    if normalized and abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise ValidationError(f"state norm {np.linalg.norm(psi)!r} differs from 1")
    return psi


def as_density_matrix(rho, unit_trace: bool = True) -> np.ndarray:
    """Validate Hermiticity, trace and positivity of ``rho``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    n = num_qubits(rho.shape[0])
    if n > MAX_DENSITY_QUBITS:
        raise UnsupportedScaleError(f"{n} qubits exceeds the density-matrix cap of {MAX_DENSITY_QUBITS}")
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValidationError("matrix is not Hermitian")
    if unit_trace and abs(np.trace(rho) - 1.0) > TRACE_TOL:
        raise ValidationError(f"trace {np.trace(rho).real!r} differs from 1")
    return rho


def basis_state(bits: str | Sequence[int]) -> np.ndarray:
    """Computational basis state, e.g. ``basis_state("010")``."""
    bits = [int(b) for b in bits]
    psi = np.zeros(1 << len(bits), dtype=complex)
    psi[int("".join(map(str, bits)), 2) if bits else 0] = 1.0
    return psi


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def maximally_mixed(n: int) -> np.ndarray:
    return np.eye(1 << n, dtype=complex) / (1 << n)


def _check_keep(keep: Iterable[int], n: int) -> list[int]:
    keep = [int(k) for k in keep]
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate qubit index in {keep}")
    for k in keep:
        if not 0 <= k < n:
            raise ValueError(f"qubit index {k} out of range for {n} qubits")
    return keep


def partial_trace(x, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (in the given order).

    ``x`` may be a state vector or a density matrix; the vector path never
    forms the full ``2**n x 2**n`` operator.
    """
    x = np.asarray(x, dtype=complex)
    n = num_qubits(x.shape[0])
    keep = _check_keep(keep, n)
    rest = [q for q in range(n) if q not in keep]
    dk, dr = 1 << len(keep), 1 << len(rest)
    if x.ndim == 1:
        m = x.reshape([2] * n).transpose(keep + rest).reshape(dk, dr)
        return m @ m.conj().T
    t = x.reshape([2] * (2 * n))
    perm = keep + rest
    t = t.transpose(perm + [p + n for p in perm]).reshape(dk, dr, dk, dr)
    return np.einsum("ijkj->ik", t)


def _eigvals(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues with the entropy clip applied; rejects clearly negative ones."""
    if np.max(np.abs(rho - rho.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValidationError("matrix is not Hermitian")
    lam = np.linalg.eigvalsh(rho)
    if lam.size and lam.min() < -NEG_EIG_TOL:
        raise ValidationError(f"negative eigenvalue {lam.min()!r}")
    return np.where(lam <= ZERO_EIG_TOL, 0.0, lam)


def von_neumann_entropy(rho) -> float:
    """Entropy in bits, ``-sum(lam * log2(lam))``."""
    lam = _eigvals(np.asarray(rho, dtype=complex))
    lam = lam[lam > 0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def renyi_entropy(rho, order: float) -> float:
    """Renyi entropy of the given order in bits, normalized by ``tr(rho)**order``."""
    if order <= 0:
        raise ValueError(f"Renyi order must be positive, got {order}")
    if order == 1:
        raise ValueError("order 1 is the Von Neumann entropy; use von_neumann_entropy")
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho).real
    if float(order).is_integer():
        trn = np.trace(np.linalg.matrix_power(rho, int(order))).real
    else:
        lam = _eigvals(rho)
        trn = np.sum(lam[lam > 0] ** order)
    return float(np.log2(trn / tr**order) / (1.0 - order))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(a)
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.conj().T


def fidelity(a, b) -> float:
    """Uhlmann fidelity ``tr sqrt(sqrt(a) b sqrt(a))`` (not squared)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    sa = _psd_sqrt(a)
    m = sa @ b @ sa
    lam = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return float(min(1.0, np.sum(np.sqrt(np.clip(lam, 0.0, None)))))


def purity(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def project_psd(rho) -> np.ndarray:
    """Clip negative eigenvalues to zero and renormalize to unit trace."""
    rho = np.asarray(rho, dtype=complex)
    rho = (rho + rho.conj().T) / 2
    lam, vec = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    total = lam.sum()
    if total <= 0:
        raise ValidationError("matrix has no positive spectrum to renormalize")
    out = (vec * (lam / total)) @ vec.conj().T
    return (out + out.conj().T) / 2


@dataclass(frozen=True)
class PauliObservable:
    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        if any(c not in PAULI for c in self.letters):
            raise ValidationError(f"invalid Pauli string {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def matrix(self) -> np.ndarray:
        return self.coefficient * reduce(np.kron, (PAULI[c] for c in self.letters), np.eye(1, dtype=complex))

    def expectation(self, rho) -> float:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape[0] != 1 << self.n_qubits:
            raise ValueError("observable and state sizes differ")
        return float(np.real(np.trace(self.matrix() @ rho)))
