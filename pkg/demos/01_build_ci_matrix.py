"""Build a determinant CI matrix from an FCIDUMP and check it against FCI.

The bundled H4 chain (STO-3G, 4 orbitals, 2 alpha + 2 beta electrons) has
36 determinants, small enough to diagonalise densely.
"""

from importlib.resources import files
import tempfile
from pathlib import Path

import numpy as np

from subq.hamiltonian import build_cim, enumerate_determinants, load_matrix, read_fcidump, save_matrix

path = files("subq") / "data" / "h4_chain_sto3g.fcidump"
integrals = read_fcidump(path)
print(f"orbitals={integrals.n_orb} electrons={integrals.n_elec} core={integrals.core_energy:.6f}")

basis = enumerate_determinants(integrals.n_orb, integrals.n_alpha, integrals.n_beta)
print(f"{len(basis)} determinants; index 0 is the aufbau state {basis[0].label(integrals.n_orb)}")

cim = build_cim(basis, integrals)
print(f"stored nonzeros (lower triangle): {cim.nnz}")

# Lowest eigenvalue plus core energy is the FCI energy, up to the
# single-precision storage of the matrix elements (~1e-7 Ha here).
h = cim.to_dense()
print("FCI energy:", np.linalg.eigvalsh(h)[0] + cim.core_energy)

# Slater-Condon: determinants differing by more than a double excitation do not couple.
print("sparsity:", f"{np.count_nonzero(h) / h.size:.2%} of entries nonzero")

# Round-trip through the binary CIM1 format (single-precision values).
with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "h4.cim1"
    save_matrix(out, cim)
    back = load_matrix(out)
    print(f"CIM1 file: {out.stat().st_size} bytes, identical values: {np.array_equal(back.values, cim.values)}")
