"""Random compilation of exp(-iHt) and the parity-extended state vector.

Each repetition draws n_a terms with probability |alpha|/lambda and applies
them as equal-angle rotations.  Repetitions are independent circuits whose
samples are pooled.
"""

from importlib.resources import files

import numpy as np

from subq.pauli import fwht_coefficients, pad_dimension
from subq.pipeline import load_problem
from subq.qdrift import compute_budget, plan_repetitions, repetition_rng
from subq.statevector import evolve, exact_evolve, init_basis_state, sample
from subq.stats import total_variation

cim = load_problem(files("subq") / "data" / "h2_631g.fcidump")
padded, q = pad_dimension(cim)
coeffs = fwht_coefficients(padded)

budget = compute_budget(coeffs, t=1.0)
print(f"lambda={budget.lambda_norm:.2f}  n_a={budget.n_a}  r={budget.r}  angle={budget.angle:.4f}")

plans = plan_repetitions(coeffs, budget, seed=7)
print(plans[0].to_text().splitlines()[0])
print("first rotations:", [t.label(plans[0].q_total) for t, _ in plans[0].rotations[:5]])

# Every sampled term was lifted so it commutes with the total parity operator:
# an even-parity start state stays even through the whole circuit.
pooled = np.zeros(1 << (q + 1))
for rep, plan in enumerate(plans):
    state = evolve(init_basis_state(0, plan.q_total), plan)
    for i, c in sample(state, 2000, repetition_rng(7, rep, 1)).index_counts().items():
        pooled[i] += c
odd = sum(pooled[i] for i in range(pooled.size) if i.bit_count() % 2)
print("shots with odd parity:", int(odd))

# Compare the decoded distribution with exact evolution in the original space.
decoded = np.array([pooled[(i << 1) | (i.bit_count() & 1)] for i in range(1 << q)])
exact = exact_evolve(padded.astype(np.float64), 1.0, 0).probabilities()
print(f"TV distance to exact evolution: {total_variation(decoded / decoded.sum(), exact):.3f}")
