"""Write a CI matrix as a sum of Pauli strings with a Walsh-Hadamard transform.

Every 2**q x 2**q matrix is a combination of the 4**q Pauli strings
X^r Z^s (times a phase).  Each coefficient row is one fast transform, so the
whole decomposition costs O(4**q q) instead of O(8**q).
"""

from importlib.resources import files

import numpy as np

from subq.pauli import decompose, fwht_coefficients, pad_dimension, reconstruct
from subq.pipeline import load_problem

cim = load_problem(files("subq") / "data" / "h2_631g.fcidump")
padded, q = pad_dimension(cim)
print(f"N={cim.n} padded to {padded.shape[0]} ({q} qubits)")

coeffs = fwht_coefficients(padded)
# A real symmetric matrix only picks up strings with an even number of Y factors.
print("largest imaginary part:", coeffs.max_imag)

ham = decompose(cim)
print(f"{len(ham.terms)} terms with |alpha| > 1e-12 out of {4**q}")
for term in sorted(ham.terms, key=lambda t: -abs(t.coefficient))[:6]:
    print(f"  {term.label(q)}  {term.coefficient:+.6f}")

err = np.abs(reconstruct(ham) - padded).max()
print(f"reconstruction error: {err:.2e}")
