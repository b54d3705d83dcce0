"""Dense statevector simulation of Pauli-rotation circuits with shot sampling.

Bit ``j`` of a basis-state index is qubit ``j``.  Bitstrings are rendered most
significant bit first, so qubit 0 is the rightmost character.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

import numpy as np

from subq.errors import FormatError, ResourceError, ValidationError
from subq.pauli import PauliTerm
from subq.qdrift import EvolutionPlan

ORACLE_MAX_DIM = 1 << 12


@dataclass(eq=False)
class StateVector:
    q_total: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.q_total,):
            raise ValidationError(
                f"{self.amplitudes.size} amplitudes for {self.q_total} qubits"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> StateVector:
        return StateVector(self.q_total, self.amplitudes.copy())


def init_basis_state(index: int, q_total: int) -> StateVector:
    if not 0 <= index < (1 << q_total):
        raise ValidationError(f"basis index {index} does not fit in {q_total} qubits")
    amps = np.zeros(1 << q_total, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(q_total, amps)


class _RotationKernel:
    """Caches the index array so repeated rotations avoid reallocating it."""

    def __init__(self, q_total):
        self.q_total = q_total
        self.n = np.arange(1 << q_total, dtype=np.uint64)

    def pauli(self, amps, term: PauliTerm):
        if term.r >> self.q_total or term.s >> self.q_total:
            raise ValidationError(f"Pauli term does not fit in {self.q_total} qubits")
        src = self.n ^ np.uint64(term.r)
        # (P psi)[m] = i**k (-1)**|(m ^ r) & s| psi[m ^ r]
        signs = 1.0 - 2.0 * (np.bitwise_count(src & np.uint64(term.s)) & 1)
        return (1j ** term.phase_exp) * signs * amps[src]

    def apply(self, amps, term: PauliTerm, angle: float):
        return math.cos(angle) * amps - 1j * math.sin(angle) * self.pauli(amps, term)


def apply_pauli_rotation(state: StateVector, term: PauliTerm, angle: float) -> StateVector:
    """Return ``exp(-i angle P) |state>`` for the Pauli string ``P`` of ``term``."""
    kernel = _RotationKernel(state.q_total)
    return StateVector(state.q_total, kernel.apply(state.amplitudes, term, angle))


def evolve(state: StateVector, plan: EvolutionPlan) -> StateVector:
    if plan.q_total != state.q_total:
        raise ValidationError(f"plan acts on {plan.q_total} qubits, state has {state.q_total}")
    kernel = _RotationKernel(state.q_total)
    amps = state.amplitudes
    for term, angle in plan.rotations:
        amps = kernel.apply(amps, term, angle)
    return StateVector(state.q_total, amps)


def exact_evolve(hamiltonian: np.ndarray, t: float, initial_index: int) -> StateVector:
    """``exp(-i H t)|initial>`` by dense symmetric eigendecomposition."""
    h = np.asarray(hamiltonian)
    dim = h.shape[0]
    if dim > ORACLE_MAX_DIM:
        raise ResourceError(f"exact evolution limited to dimension {ORACLE_MAX_DIM}, got {dim}")
    if dim & (dim - 1):
        raise ValidationError("dimension must be a power of two")
    w, v = np.linalg.eigh(h)
    amps = v @ (np.exp(-1j * w * t) * v[initial_index].conj())
    return StateVector(dim.bit_length() - 1, amps)


@dataclass
class BitstringCounts:
    """Measured outcomes keyed by MSB-first bitstrings of width ``q_total``."""

    q_total: int
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def shots_total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_indices(cls, q_total: int, indices: Mapping[int, int] | Iterable[int]) -> BitstringCounts:
        if not isinstance(indices, Mapping):
            indices = Counter(int(i) for i in indices)
        return cls(q_total, {format(int(k), f"0{q_total}b"): int(v) for k, v in sorted(indices.items()) if v})

    def index_counts(self) -> dict[int, int]:
        return {int(b, 2): c for b, c in self.counts.items()}

    def merge(self, other: BitstringCounts) -> BitstringCounts:
        if other.q_total != self.q_total:
            raise ValidationError("cannot merge counts over different registers")
        total = Counter(self.counts)
        total.update(other.counts)
        return BitstringCounts(self.q_total, dict(sorted(total.items())))

    def probabilities(self) -> np.ndarray:
        p = np.zeros(1 << self.q_total)
        for k, c in self.index_counts().items():
            p[k] = c
        return p / max(1, p.sum())

    def to_text(self) -> str:
        return "".join(f"{b} {c}\n" for b, c in sorted(self.counts.items()))

    def write(self, stream: TextIO) -> None:
        stream.write(self.to_text())

    @classmethod
    def read(cls, stream: TextIO) -> BitstringCounts:
        counts, width = {}, None
        for lineno, line in enumerate(stream, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 2 or set(parts[0]) - {"0", "1"}:
                raise FormatError(f"counts line {lineno}: expected 'bitstring count'")
            if width is None:
                width = len(parts[0])
            elif len(parts[0]) != width:
                raise FormatError(f"counts line {lineno}: bitstring width changed")
            try:
                n = int(parts[1])
            except ValueError:
                raise FormatError(f"counts line {lineno}: count {parts[1]!r} is not an integer") from None
            if n < 0:
                raise FormatError(f"counts line {lineno}: negative count")
            counts[parts[0]] = counts.get(parts[0], 0) + n
        if width is None:
            raise FormatError("counts file is empty")
        return cls(width, counts)


def sample(state: StateVector, shots: int, rng: np.random.Generator) -> BitstringCounts:
    if shots < 1:
        raise ValidationError("shots must be positive")
    p = state.probabilities()
    draws = rng.multinomial(shots, p / p.sum())
    hit = np.flatnonzero(draws)
    return BitstringCounts.from_indices(state.q_total, dict(zip(hit.tolist(), draws[hit].tolist())))


@dataclass(frozen=True)
class NoiseSpec:
    readout_flip_prob: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.readout_flip_prob <= 1.0:
            raise ValidationError("readout_flip_prob must lie in [0, 1]")


def apply_readout_noise(counts: BitstringCounts, noise: NoiseSpec, rng: np.random.Generator) -> BitstringCounts:
    """Flip every bit of every recorded shot independently with the given probability."""
    p = noise.readout_flip_prob
    if p == 0.0:
        return BitstringCounts(counts.q_total, dict(counts.counts))
    items = sorted(counts.index_counts().items())
    shots = np.repeat(
        np.array([k for k, _ in items], dtype=np.int64), [c for _, c in items]
    )
    flips = rng.random((shots.size, counts.q_total)) < p
    masks = flips @ (1 << np.arange(counts.q_total, dtype=np.int64))
    return BitstringCounts.from_indices(counts.q_total, Counter((shots ^ masks).tolist()))


def expectation(state: StateVector, terms: Iterable[PauliTerm]) -> complex:
    """``<psi| sum_k c_k P_k |psi>`` accumulated term by term."""
    kernel = _RotationKernel(state.q_total)
    psi = state.amplitudes
    total = 0.0 + 0.0j
    for t in terms:
        total += t.coefficient * np.vdot(psi, kernel.pauli(psi, t))
    return total


__all__ = [
    "BitstringCounts",
    "NoiseSpec",
    "StateVector",
    "apply_pauli_rotation",
    "apply_readout_noise",
    "evolve",
    "exact_evolve",
    "expectation",
    "init_basis_state",
    "sample",
]
