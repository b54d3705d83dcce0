"""Modified qDRIFT: truncation budget and randomized Pauli-rotation plans.

With ``lam = sum |alpha| / max |alpha|`` over the non-identity coefficients,
each repetition applies ``n_a = ceil(2 lam t^2)`` sampled rotations and
``r = ceil(2 lam^2 t^2 / n_a)`` repetitions are run, so ``r * n_a >= 2 lam^2 t^2``.
A sampled term ``j`` becomes ``exp(-i sign(alpha_j) (Lambda t / n_a) P_j)`` with
``Lambda = sum |alpha|`` in Hartree, the usual qDRIFT gate.

Parity extension.  The encoded register stores configuration ``i`` as
``(i << 1) | parity(i)`` (parity bit = qubit 0).  A term ``(r, s)`` is lifted to
``((r << 1) | parity(r), s << 1)``: it flips the parity qubit exactly when it
flips an odd number of index bits, so encoded states map to encoded states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from subq.errors import ValidationError
from subq.pauli import CoefficientMatrix, PauliTerm, pauli_term


def drift_counts(lambda_norm: float, t: float = 1.0) -> tuple[int, int]:
    """``(n_a, r)`` for a normalised strength ``lambda_norm`` and time ``t``."""
    if lambda_norm <= 0 or t <= 0:
        raise ValidationError("lambda and t must be positive")
    n_a = math.ceil(2 * lambda_norm * t**2)
    r = math.ceil(2 * lambda_norm**2 * t**2 / n_a)
    return n_a, r


@dataclass(frozen=True)
class DriftBudget:
    lambda_norm: float
    lambda_abs: float
    t: float
    n_a: int
    r: int

    @property
    def angle(self) -> float:
        """Rotation magnitude per sampled term."""
        return self.lambda_abs * self.t / self.n_a

    def n_c(self, epsilon: float) -> int:
        """Term count of standard qDRIFT at accuracy ``epsilon``."""
        if epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        return math.ceil(2 * self.lambda_norm**2 * self.t**2 / epsilon)


def compute_budget(
    coeffs: CoefficientMatrix,
    t: float = 1.0,
    *,
    epsilon: float | None = None,
    n_a_override: int | None = None,
    r_override: int | None = None,
) -> DriftBudget:
    """Budget from the non-identity coefficients.

    With ``epsilon`` the reference single-shot qDRIFT is used instead:
    ``n_a = n_c(epsilon)`` and ``r = 1``.  Overrides win over both.
    """
    _, values = coeffs.nonidentity()
    mags = np.abs(values)
    if mags.size == 0 or mags.max() == 0:
        raise ValidationError("Hamiltonian has no non-identity terms to evolve under")
    lambda_abs = float(mags.sum())
    lambda_norm = lambda_abs / float(mags.max())
    n_a, r = drift_counts(lambda_norm, t)
    budget = DriftBudget(lambda_norm, lambda_abs, float(t), n_a, r)
    if epsilon is not None:
        budget = DriftBudget(lambda_norm, lambda_abs, float(t), budget.n_c(epsilon), 1)
    if n_a_override is not None or r_override is not None:
        n_a = int(n_a_override or budget.n_a)
        r = int(r_override or budget.r)
        if n_a < 1 or r < 1:
            raise ValidationError("n_a and r overrides must be positive")
        budget = DriftBudget(lambda_norm, lambda_abs, float(t), n_a, r)
    return budget


def sample_terms(coeffs: CoefficientMatrix, n_a: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """``n_a`` i.i.d. draws of ``(r, s)`` with probability ``|alpha| / sum |alpha|``."""
    if n_a < 1:
        raise ValidationError("n_a must be at least 1")
    idx, values = coeffs.nonidentity()
    weights = np.abs(values)
    picks = rng.choice(idx.size, size=n_a, p=weights / weights.sum())
    dim = 1 << coeffs.q
    return [(int(i) // dim, int(i) % dim) for i in idx[picks]]


def extend_with_parity(term: PauliTerm) -> PauliTerm:
    return pauli_term((term.r << 1) | (term.r.bit_count() & 1), term.s << 1, term.coefficient)


@dataclass(frozen=True)
class EvolutionPlan:
    q_total: int
    rotations: tuple[tuple[PauliTerm, float], ...]
    repetition_id: int = 0
    rng_seed: int | None = None

    def __len__(self):
        return len(self.rotations)

    def to_text(self) -> str:
        lines = [
            f"# repetition={self.repetition_id} seed={self.rng_seed} "
            f"q_total={self.q_total} rotations={len(self.rotations)}"
        ]
        for term, angle in self.rotations:
            lines.append(f"{term.label(self.q_total)} {angle!r}")
        return "\n".join(lines) + "\n"


def build_plan(
    indices,
    budget: DriftBudget,
    coeffs: CoefficientMatrix,
    parity_extension: bool = True,
    *,
    repetition_id: int = 0,
    rng_seed: int | None = None,
) -> EvolutionPlan:
    rotations = []
    for r, s in indices:
        alpha = float(coeffs.alpha[r, s])
        term = pauli_term(r, s, alpha)
        if parity_extension:
            term = extend_with_parity(term)
        rotations.append((term, math.copysign(budget.angle, alpha)))
    q_total = coeffs.q + (1 if parity_extension else 0)
    return EvolutionPlan(q_total, tuple(rotations), repetition_id, rng_seed)


def repetition_rng(seed: int, repetition_id: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for one repetition, stable under changes to ``r``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(repetition_id, stream)))


def plan_repetitions(
    coeffs: CoefficientMatrix,
    budget: DriftBudget,
    seed: int,
    parity_extension: bool = True,
) -> list[EvolutionPlan]:
    plans = []
    for rep in range(budget.r):
        rng = repetition_rng(seed, rep, 0)
        picks = sample_terms(coeffs, budget.n_a, rng)
        plans.append(
            build_plan(picks, budget, coeffs, parity_extension, repetition_id=rep, rng_seed=seed)
        )
    return plans
