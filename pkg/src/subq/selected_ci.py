"""Iterative selected CI: deterministic heat-bath CI and its quantum-sampled variant.

Both grow a subspace from a single configuration.  Each sweep solves the
current subspace, then admits every outside configuration ``k`` for which some
``i`` in the subspace has ``|H_ki c_i|`` above a threshold: a fixed ``epsilon``
for HCI, ``sqrt(P_k) / v`` for QSHCI where ``P_k`` is the sampled probability
of ``k``.  QSHCI only considers configurations that were actually sampled.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from subq.errors import ValidationError
from subq.hamiltonian.cim import CIMatrix
from subq.subspace import EigenResult, SubspaceSelection, ground_state, project


def hci_accepts(h_ki, c_i, epsilon):
    return np.abs(np.multiply(h_ki, c_i)) > epsilon


def qshci_accepts(h_ki, c_i, p_k, v=1.0):
    return np.abs(np.multiply(h_ki, c_i)) > np.sqrt(p_k) / v


def probabilities_from_counts(valid_counts: Mapping[int, int]) -> dict[int, float]:
    total = sum(c for c in valid_counts.values() if c > 0)
    if total == 0:
        raise ValidationError("no valid shots to build probabilities from")
    return {int(k): c / total for k, c in sorted(valid_counts.items()) if c > 0}


def _coupling_scores(h_abs, subspace, coeffs):
    """``max_i |H_ki c_i|`` over ``i`` in the subspace, for every ``k``."""
    rows = h_abs[subspace]
    weighted = rows.multiply(np.abs(coeffs)[:, None]).tocsc()
    return np.asarray(weighted.max(axis=0).todense()).ravel()


def _grow(cim, initial_index, thresholds, source, max_iter, tol, history):
    n = cim.n
    if not 0 <= initial_index < n:
        raise ValidationError(f"initial index {initial_index} outside 0..{n - 1}")
    h_abs = abs(cim.to_sparse(np.float64)).tocsr()
    chosen = [initial_index]
    in_space = np.zeros(n, dtype=bool)
    in_space[initial_index] = True
    limit = n if max_iter is None else min(max_iter, n)
    previous = np.inf
    iteration = 0
    while True:
        iteration += 1
        sel = SubspaceSelection(tuple(chosen), source)
        result = ground_state(project(cim, sel), tol=tol)
        if result.energy > previous + 1e-9 * max(1.0, abs(previous)):
            raise RuntimeError(
                f"subspace energy rose from {previous} to {result.energy}; interlacing violated"
            )
        previous = result.energy
        scores = _coupling_scores(h_abs, np.asarray(chosen), result.eigenvector)
        added = np.flatnonzero((scores > thresholds) & ~in_space)
        if history is not None:
            history.append((iteration, len(chosen), result.energy, int(added.size)))
        if added.size == 0 or iteration >= limit:
            return result, sel, iteration
        chosen.extend(int(k) for k in added)
        in_space[added] = True


def hci(
    cim: CIMatrix,
    epsilon: float,
    initial_index: int = 0,
    *,
    max_iter: int | None = None,
    tol: float = 1e-10,
    history: list | None = None,
) -> tuple[EigenResult, SubspaceSelection, int]:
    """Heat-bath CI with tolerance ``epsilon``.

    ``history``, when given, receives one ``(iter, subspace_size, energy,
    added_count)`` tuple per sweep.
    """
    if epsilon < 0:
        raise ValidationError("epsilon must be non-negative")
    thresholds = np.full(cim.n, float(epsilon))
    return _grow(cim, initial_index, thresholds, "hci", max_iter, tol, history)


def qshci(
    cim: CIMatrix,
    probabilities: Mapping[int, float],
    v: float = 1.0,
    initial_index: int = 0,
    *,
    max_iter: int | None = None,
    tol: float = 1e-10,
    history: list | None = None,
) -> tuple[EigenResult, SubspaceSelection, int]:
    """Quantum-selected heat-bath CI with variance factor ``v``."""
    if v <= 0:
        raise ValidationError("variance factor must be positive")
    support = {int(k): float(p) for k, p in probabilities.items() if p > 0}
    if not support:
        raise ValidationError("sampled support is empty")
    if max(support) >= cim.n:
        raise ValidationError(f"sampled index {max(support)} outside matrix of size {cim.n}")
    thresholds = np.full(cim.n, np.inf)
    keys = np.fromiter(support, dtype=np.int64)
    thresholds[keys] = np.sqrt(np.fromiter(support.values(), dtype=float)) / v
    return _grow(cim, initial_index, thresholds, "qshci", max_iter, tol, history)
