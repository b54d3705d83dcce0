"""Heat-bath CI grows the space by coupling strength; QSHCI adds a sampling filter.

HCI admits k when max_i |H_ki c_i| > epsilon.  QSHCI replaces epsilon with a
per-configuration threshold sqrt(v * P_k (1 - P_k)) from the measured
frequency P_k and only looks at configurations that were observed.
"""

from importlib.resources import files

from subq.pipeline import emulate, exact_ground_energy, load_problem
from subq.selected_ci import hci, probabilities_from_counts, qshci, qshci_accepts

cim = load_problem(files("subq") / "data" / "n2_cas6_6_sto3g.fcidump")
exact = exact_ground_energy(cim)
print(f"N={cim.n}, exact {exact + cim.core_energy:.8f} Ha")

for eps in (0.1, 0.03, 0.01, 0.003):
    res, sel, it = hci(cim, eps)
    print(f"HCI  eps={eps:<6} size {len(sel):3d} after {it} sweeps, error {res.energy - exact:.5f}")

# The threshold in one line: 0.1 * 0.5 = 0.05 beats sqrt(1 * 0.0016 * 0.9984) ~ 0.04.
print("\nacceptance example:", qshci_accepts(0.1, 0.5, 0.0016, 1.0))

probs = probabilities_from_counts(emulate(cim, seed=0).valid)
print(f"{len(probs)} configurations observed")
for v in (0.25, 1.0, 4.0, 16.0):
    res, sel, it = qshci(cim, probs, v)
    print(f"QSHCI v={v:<5} size {len(sel):3d} after {it} sweeps, error {res.energy - exact:.5f}")
