"""Pauli decomposition of a real symmetric matrix via the fast Walsh-Hadamard transform.

A Pauli string is labelled by an X-mask ``r`` and a Z-mask ``s`` over ``q``
qubits (bit ``j`` of each mask acts on qubit ``j``, which is bit ``j`` of the
basis-state index)::

    P(r, s) = i**popcount(r & s) * X**r Z**s,   P|n> = i**|r&s| (-1)**|n&s| |n ^ r>

and ``H = sum alpha[r, s] P(r, s)`` with

    alpha[r, s] = i**-|r&s| / 2**q * sum_n H[n ^ r, n] (-1)**|n&s|.

For each ``r`` the inner sum over ``n`` is an unnormalised Walsh-Hadamard
transform of the "diagonal" ``n -> H[n ^ r, n]``, so all coefficients cost
``2**q`` transforms of length ``2**q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from subq.errors import ResourceError, ValidationError
from subq.hamiltonian.cim import CIMatrix, save_matrix

MAX_QUBITS = 20
ORACLE_MAX_QUBITS = 12
_LETTERS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


def popcount(a):
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


def qubits_for(n: int) -> int:
    """Smallest q with 2**q >= n."""
    if n < 1:
        raise ValidationError(f"dimension must be positive, got {n}")
    return (n - 1).bit_length()


def pad_dimension(cim: CIMatrix, *, max_qubits: int = MAX_QUBITS) -> tuple[np.ndarray, int]:
    """Embed the CI matrix in the top-left block of a zero 2**q x 2**q array."""
    q = qubits_for(cim.n)
    if q > max_qubits:
        raise ResourceError(f"{cim.n} configurations need {q} qubits (limit {max_qubits})")
    dense = np.zeros((1 << q, 1 << q), dtype=np.float32)
    dense[cim.rows, cim.cols] = cim.values
    dense[cim.cols, cim.rows] = cim.values
    return dense, q


def fwht(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along ``axis`` (length a power of two).

    ``out[..., s] = sum_n a[..., n] * (-1)**popcount(n & s)``.
    """
    a = np.asarray(a)
    a = np.moveaxis(a, axis, -1).astype(np.result_type(a, np.float64), order="C", copy=True)
    n = a.shape[-1]
    if n & (n - 1):
        raise ValidationError(f"transform length {n} is not a power of two")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        v = a.reshape(*lead, n // (2 * h), 2, h)
        x, y = v[..., 0, :].copy(), v[..., 1, :]
        v[..., 0, :] += y
        v[..., 1, :] = x - y
        h *= 2
    return np.moveaxis(a, -1, axis)


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    """Real Pauli coefficients ``alpha[r, s]`` (single precision).

    ``max_imag`` records the largest imaginary part discarded while converting
    to reals and ``transforms`` the number of length-2**q transforms performed.
    """

    q: int
    alpha: np.ndarray
    max_imag: float = 0.0
    transforms: int = 0

    def __getitem__(self, rs) -> float:
        return float(self.alpha[rs])

    def term(self, r: int, s: int) -> PauliTerm:
        return pauli_term(r, s, self.alpha[r, s])

    def nonidentity(self):
        """Flat indices ``r * 2**q + s`` and values of every nonzero non-identity coefficient."""
        flat = self.alpha.ravel()
        idx = np.flatnonzero(flat)
        idx = idx[idx != 0]
        return idx, flat[idx].astype(np.float64)


def fwht_coefficients(padded: np.ndarray, *, imag_tol: float = 1e-6) -> CoefficientMatrix:
    h = np.asarray(padded)
    dim = h.shape[0]
    if h.ndim != 2 or h.shape[1] != dim or dim & (dim - 1) or dim == 0:
        raise ValidationError(f"expected a 2**q x 2**q matrix, got shape {h.shape}")
    q = dim.bit_length() - 1
    n = np.arange(dim)
    real = np.empty((dim, dim))
    imag = np.empty((dim, dim))
    block = max(1, min(dim, (1 << 22) // dim))
    for start in range(0, dim, block):
        r = n[start:start + block, None]
        # row r holds the "diagonal" n -> h[n ^ r, n]
        w = fwht(h[r ^ n[None, :], n[None, :]], axis=1) / dim
        k = popcount(r & n[None, :]) % 4
        # i**-k: k=0 -> 1, k=1 -> -i, k=2 -> -1, k=3 -> +i
        real[start:start + block] = np.where(k == 0, w, np.where(k == 2, -w, 0.0))
        imag[start:start + block] = np.where(k == 1, -w, np.where(k == 3, w, 0.0))
    scale = float(np.abs(real).max(initial=0.0))
    max_imag = float(np.abs(imag).max(initial=0.0))
    if max_imag > imag_tol * max(scale, np.finfo(np.float32).tiny):
        raise ValidationError(
            f"coefficients have imaginary parts up to {max_imag:.3g}; input is not real symmetric"
        )
    return CoefficientMatrix(q, real.astype(np.float32), max_imag=max_imag, transforms=dim)


@dataclass(frozen=True)
class PauliTerm:
    """``coefficient * i**phase_exp * X**r Z**s``; ``phase_exp = popcount(r & s) % 4``."""

    r: int
    s: int
    coefficient: float
    phase_exp: int = field(init=False)

    def __post_init__(self):
        if self.r < 0 or self.s < 0:
            raise ValidationError("Pauli masks must be non-negative")
        object.__setattr__(self, "phase_exp", (self.r & self.s).bit_count() % 4)

    @property
    def is_identity(self) -> bool:
        return self.r == 0 and self.s == 0

    def label(self, q: int) -> str:
        """Letters with qubit ``q-1`` first, e.g. ``(r=0b10, s=0b01)`` -> ``"XZ"``."""
        return "".join(
            _LETTERS[((self.r >> j) & 1, (self.s >> j) & 1)] for j in reversed(range(q))
        )

    def matrix(self, q: int) -> np.ndarray:
        """Dense ``i**phase X**r Z**s`` (no coefficient)."""
        dim = 1 << q
        n = np.arange(dim)
        out = np.zeros((dim, dim), dtype=complex)
        out[n ^ self.r, n] = (1j ** self.phase_exp) * (-1.0) ** popcount(n & self.s)
        return out


def pauli_term(r: int, s: int, coefficient: float = 1.0) -> PauliTerm:
    return PauliTerm(int(r), int(s), float(coefficient))


@dataclass(frozen=True, eq=False)
class QubitHamiltonian:
    q: int
    terms: tuple[PauliTerm, ...]

    @property
    def identity(self) -> PauliTerm | None:
        return next((t for t in self.terms if t.is_identity), None)

    def __len__(self):
        return len(self.terms)


def decompose(cim: CIMatrix, *, threshold: float = 1e-12) -> QubitHamiltonian:
    padded, _ = pad_dimension(cim)
    return hamiltonian_from_coefficients(fwht_coefficients(padded), threshold=threshold)


def hamiltonian_from_coefficients(coeffs: CoefficientMatrix, *, threshold: float = 1e-12) -> QubitHamiltonian:
    r, s = np.nonzero(np.abs(coeffs.alpha) > threshold)
    terms = tuple(pauli_term(a, b, coeffs.alpha[a, b]) for a, b in zip(r, s))
    return QubitHamiltonian(coeffs.q, terms)


def reconstruct(hamiltonian: QubitHamiltonian) -> np.ndarray:
    """Dense sum of ``coefficient * P(r, s)``; a check on the decomposition."""
    q = hamiltonian.q
    if q > ORACLE_MAX_QUBITS:
        raise ResourceError(f"reconstruction limited to {ORACLE_MAX_QUBITS} qubits, got {q}")
    dim = 1 << q
    n = np.arange(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for t in hamiltonian.terms:
        out[n ^ t.r, n] += t.coefficient * (1j ** t.phase_exp) * (-1.0) ** popcount(n & t.s)
    if np.abs(out.imag).max(initial=0.0) <= 1e-9 * max(1.0, np.abs(out.real).max(initial=0.0)):
        return out.real
    return out


def save_alpha(path, coeffs: CoefficientMatrix, *, threshold: float = 0.0) -> int:
    """Write the coefficients as a CIM1 column vector, row ``r * 2**q + s``, column 0.

    Returns the number of stored entries.  ``load_matrix`` reads it back.
    """
    flat = coeffs.alpha.ravel()
    idx = np.flatnonzero(np.abs(flat) > threshold)
    vec = CIMatrix(flat.size, idx, np.zeros_like(idx), flat[idx])
    save_matrix(path, vec)
    return int(idx.size)
