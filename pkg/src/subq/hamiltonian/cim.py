"""Sparse single-precision CI matrix, its builder and the CIM1 binary format.

CIM1 layout (little-endian)::

    b"CIM1" | u64 N | u64 count | count x (u64 i, u64 j, f32 value),  j <= i
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from subq.errors import FormatError, ValidationError
from subq.hamiltonian.determinants import (
    ConfigurationBasis,
    connected_masks,
    element_table,
)
from subq.hamiltonian.integrals import IntegralTable

MAGIC = b"CIM1"
TRIPLET = np.dtype([("i", "<u8"), ("j", "<u8"), ("v", "<f4")])


@dataclass(frozen=True, eq=False)
class CIMatrix:
    """Lower-triangle triplets ``(rows[k], cols[k], values[k])`` with ``cols <= rows``.

    When built from integrals the basis and integral table ride along so that
    later stages can re-evaluate elements in double precision.  ``core_energy``
    is never folded into the matrix.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    core_energy: float = 0.0
    basis: ConfigurationBasis | None = None
    integrals: IntegralTable | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("a CI matrix needs at least one row")
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float32)
        if not (rows.shape == cols.shape == values.shape) or rows.ndim != 1:
            raise ValidationError("triplet arrays must be 1-D and equally long")
        if rows.size and (cols.min() < 0 or rows.max() >= self.n):
            raise ValidationError(f"triplet index outside 0..{self.n - 1}")
        if np.any(cols > rows):
            raise ValidationError("stored triplets must satisfy j <= i")
        keys = rows * self.n + cols
        if np.unique(keys).size != keys.size:
            raise ValidationError("duplicate triplets for the same (i, j)")
        order = np.argsort(keys, kind="stable")
        for name, arr in (("rows", rows), ("cols", cols), ("values", values)):
            arr = arr[order]
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_dense(cls, matrix, *, drop_tol: float = 0.0, core_energy: float = 0.0) -> CIMatrix:
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=0, atol=1e-6 * max(1.0, float(np.abs(m).max(initial=0)))):
            raise ValidationError("input matrix is not symmetric")
        i, j = np.tril_indices(m.shape[0])
        v = m[i, j].astype(np.float32)
        keep = (v != 0) & (np.abs(v) > drop_tol)
        return cls(m.shape[0], i[keep], j[keep], v[keep], core_energy=core_energy)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    @property
    def has_integrals(self) -> bool:
        return self.basis is not None and self.integrals is not None

    def to_sparse(self, dtype=np.float32) -> sp.csr_matrix:
        """Full symmetric CSR matrix (both triangles)."""
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.values, self.values[off]]).astype(dtype)
        return sp.csr_matrix((v, (r, c)), shape=(self.n, self.n))

    def to_dense(self, dtype=np.float64) -> np.ndarray:
        out = np.zeros((self.n, self.n), dtype=dtype)
        out[self.rows, self.cols] = self.values
        out[self.cols, self.rows] = self.values
        return out

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.float32)
        on = self.rows == self.cols
        d[self.rows[on]] = self.values[on]
        return d

    def exact_elements(self):
        """Double-precision element callable, or None for matrices loaded from file."""
        if not self.has_integrals:
            return None
        return element_table(self.basis, self.integrals)


def build_cim(basis: ConfigurationBasis, integrals: IntegralTable, drop_tol: float = 0.0) -> CIMatrix:
    """Evaluate every pair with excitation degree <= 2 and store it at single precision."""
    if len(basis) == 0:
        raise ValidationError("empty configuration basis")
    element = element_table(basis, integrals)
    rows, cols, vals = [], [], []
    for j in range(len(basis)):
        mj = basis.determinants[j].spin_mask(basis.n_orb)
        partners = {j}
        for mi in connected_masks(mj, basis.n_orb):
            i = basis.index_of_mask(mi)
            if i is not None and i > j:
                partners.add(i)
        for i in sorted(partners):
            v = element(i, j)
            if v != 0.0 and abs(v) > drop_tol:
                rows.append(i)
                cols.append(j)
                vals.append(v)
    return CIMatrix(
        len(basis),
        np.array(rows, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals, dtype=np.float64).astype(np.float32),
        core_energy=integrals.core_energy,
        basis=basis,
        integrals=integrals,
    )


def save_matrix(path: str | os.PathLike, cim: CIMatrix) -> None:
    payload = np.empty(cim.nnz, dtype=TRIPLET)
    payload["i"], payload["j"], payload["v"] = cim.rows, cim.cols, cim.values
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", cim.n, cim.nnz))
        fh.write(payload.tobytes())
    os.replace(tmp, path)


def load_matrix(path: str | os.PathLike) -> CIMatrix:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 20:
        raise FormatError(f"{path}: truncated header")
    n, count = struct.unpack_from("<QQ", blob, 4)
    if n == 0:
        raise ValidationError(f"{path}: matrix dimension is zero")
    expected = 20 + count * TRIPLET.itemsize
    if len(blob) != expected:
        raise FormatError(f"{path}: payload is {len(blob)} bytes, header implies {expected}")
    t = np.frombuffer(blob, dtype=TRIPLET, count=count, offset=20)
    if count and (t["i"].max() >= n or t["j"].max() >= n):
        raise ValidationError(f"{path}: triplet index exceeds N={n}")
    return CIMatrix(int(n), t["i"].astype(np.int64), t["j"].astype(np.int64), t["v"].copy())
