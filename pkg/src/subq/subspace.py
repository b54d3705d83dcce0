"""Subspace selection from sampled configurations, projection and ground-state solves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np
import scipy.sparse as sp

from subq.errors import ConvergenceError, ValidationError
from subq.hamiltonian.cim import CIMatrix

DENSE_LIMIT = 64


@dataclass(frozen=True)
class SubspaceSelection:
    indices: tuple[int, ...]
    source: str = "manual"

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise ValidationError("subspace indices must be distinct")
        if any(i < 0 for i in idx):
            raise ValidationError("subspace indices must be non-negative")
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return len(self.indices)

    def to_text(self) -> str:
        return "".join(f"{i}\n" for i in self.indices)


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Lowest eigenpair of a projected matrix; ``energy`` excludes the core energy."""

    energy: float
    eigenvector: np.ndarray
    iterations: int
    residual_norm: float


def select_qsci(
    valid_counts: Mapping[int, int],
    fraction: float,
    n_batches: int,
    loop_seed: int,
    *,
    n: int,
) -> SubspaceSelection:
    """Fill a subspace of ``ceil(fraction * n)`` configurations from shuffled shot batches.

    The individual shots are shuffled under ``loop_seed`` and cut into
    ``n_batches`` near-equal batches.  Each batch contributes its distinct
    configurations, most frequent first (ties to the lower index), until the
    target size is met.  Fewer distinct configurations than the target gives a
    smaller selection.
    """
    if not 0 < fraction <= 1:
        raise ValidationError(f"fraction must lie in (0, 1], got {fraction}")
    if n_batches < 1:
        raise ValidationError("n_batches must be positive")
    items = sorted((int(k), int(v)) for k, v in valid_counts.items() if v > 0)
    if not items:
        raise ValidationError("no valid configurations were sampled")
    if items[-1][0] >= n:
        raise ValidationError(f"sampled index {items[-1][0]} exceeds matrix size {n}")
    target = math.ceil(fraction * n - 1e-9)
    shots = np.repeat([k for k, _ in items], [v for _, v in items])
    np.random.default_rng(loop_seed).shuffle(shots)
    chosen: list[int] = []
    seen: set[int] = set()
    for batch in np.array_split(shots, min(n_batches, shots.size)):
        keys, freq = np.unique(batch, return_counts=True)
        for k in keys[np.lexsort((keys, -freq))]:
            if len(chosen) >= target:
                break
            if k not in seen:
                seen.add(int(k))
                chosen.append(int(k))
        if len(chosen) >= target:
            break
    return SubspaceSelection(tuple(chosen), "qsci-batch")


def project(cim: CIMatrix, selection: SubspaceSelection, *, exact: bool = True) -> np.ndarray:
    """Dense double-precision ``H[S, S]``.

    Elements are recomputed from the integrals when the matrix carries them
    (and ``exact`` is set); otherwise the stored single-precision values are
    promoted.  The result is mirrored so it is bit-for-bit symmetric.
    """
    idx = np.asarray(selection.indices, dtype=np.int64)
    if idx.size == 0:
        raise ValidationError("empty subspace")
    if idx.max() >= cim.n:
        raise ValidationError(f"subspace index {idx.max()} outside matrix of size {cim.n}")
    element = cim.exact_elements() if exact else None
    k = idx.size
    out = np.zeros((k, k))
    if element is not None:
        # Pairs absent from the stored pattern are zero by the excitation rule.
        pattern = cim.to_sparse()[idx][:, idx].tocoo()
        for a, b in zip(pattern.row, pattern.col):
            if b <= a:
                out[a, b] = element(int(idx[a]), int(idx[b]))
    else:
        out = cim.to_sparse(np.float64)[idx][:, idx].toarray()
    lower = np.tril(out)
    return lower + np.tril(lower, -1).T


def _canonical_sign(v):
    k = int(np.argmax(np.abs(v)))
    return v if v[k] >= 0 else -v


def _matvec(matrix):
    if isinstance(matrix, np.ndarray) or sp.issparse(matrix):
        return lambda x: matrix @ x
    return matrix.matvec


def lanczos(matrix, *, tol: float = 1e-10, max_iter: int | None = None, seed: int = 0) -> EigenResult:
    """Lowest eigenpair by Lanczos with full reorthogonalisation.

    Convergence is judged on the true residual: ``||A v - E v|| <= tol * max(1, |E|)``.  An
    invariant subspace is escaped by continuing with a fresh random direction.
    """
    dim = matrix.shape[0]
    apply = _matvec(matrix)
    max_iter = min(dim, 300) if max_iter is None else min(max_iter, dim)
    rng = np.random.default_rng(seed)
    basis = np.zeros((max_iter + 1, dim))
    alphas, betas = [], []
    v = rng.standard_normal(dim)
    basis[0] = v / np.linalg.norm(v)
    best = (math.inf, None, None)
    beta = 0.0
    for k in range(max_iter):
        w = apply(basis[k])
        alphas.append(float(basis[k] @ w))
        # two passes of classical Gram-Schmidt against every previous vector
        for _ in range(2):
            w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
        beta = float(np.linalg.norm(w))
        t = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        theta, s = np.linalg.eigh(t)
        ritz_resid = abs(beta * s[-1, 0])
        if ritz_resid <= tol or k + 1 == max_iter or k + 1 == dim:
            x = basis[: k + 1].T @ s[:, 0]
            x /= np.linalg.norm(x)
            energy = float(x @ apply(x))
            resid = float(np.linalg.norm(apply(x) - energy * x))
            if resid < best[0]:
                best = (resid, energy, x)
            if resid <= tol * max(1.0, abs(energy)):
                return EigenResult(energy, _canonical_sign(x), k + 1, resid)
        if beta <= 1e-12 * max(1.0, abs(theta).max()):
            # invariant subspace: restart the recurrence from a new orthogonal direction
            w = rng.standard_normal(dim)
            for _ in range(2):
                w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
            beta_new = float(np.linalg.norm(w))
            if beta_new == 0.0:
                break
            betas.append(0.0)
            basis[k + 1] = w / beta_new
            continue
        betas.append(beta)
        basis[k + 1] = w / beta
    resid, energy, x = best
    if x is not None and resid <= tol * max(1.0, abs(energy)):
        return EigenResult(energy, _canonical_sign(x), max_iter, resid)
    raise ConvergenceError(
        f"Lanczos stopped after {max_iter} iterations with residual {resid:.3g} > {tol:.1e}",
        best_residual=resid,
    )


def ground_state(matrix, tol: float = 1e-10, max_iter: int | None = None) -> EigenResult:
    """Lowest eigenpair: dense ``eigh`` up to dimension 64, Lanczos beyond.

    The residual bound is ``tol * max(1, |E|)``.
    """
    dim = matrix.shape[0]
    if matrix.ndim != 2 or matrix.shape[1] != dim or dim == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {matrix.shape}")
    if dim > DENSE_LIMIT:
        return lanczos(matrix, tol=tol, max_iter=max_iter)
    a = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix, dtype=np.float64)
    w, v = np.linalg.eigh(a)
    x = _canonical_sign(v[:, 0])
    resid = float(np.linalg.norm(a @ x - w[0] * x))
    if resid > tol * max(1.0, abs(float(w[0]))):
        raise ConvergenceError(f"dense solve residual {resid:.3g} exceeds tolerance", resid)
    return EigenResult(float(w[0]), x, 1, resid)


@dataclass(frozen=True, eq=False)
class LoopResult:
    loop: int
    seed: int
    selection: SubspaceSelection
    result: EigenResult


def loop_seeds(seed: int, n_loops: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1)[0]) for c in ss.spawn(n_loops)]


def qsci_loops(
    valid_counts: Mapping[int, int],
    cim: CIMatrix,
    fraction: float,
    n_loops: int = 10,
    n_batches: int = 100,
    seed: int = 0,
    *,
    tol: float = 1e-10,
) -> Iterator[LoopResult]:
    if n_loops < 1:
        raise ValidationError("n_loops must be at least 1")
    for loop, loop_seed in enumerate(loop_seeds(seed, n_loops)):
        sel = select_qsci(valid_counts, fraction, n_batches, loop_seed, n=cim.n)
        res = ground_state(project(cim, sel), tol=tol)
        yield LoopResult(loop, loop_seed, sel, res)


def qsci_run(
    valid_counts: Mapping[int, int],
    cim: CIMatrix,
    fraction: float,
    n_loops: int = 10,
    n_batches: int = 100,
    seed: int = 0,
    *,
    tol: float = 1e-10,
) -> tuple[EigenResult, SubspaceSelection]:
    """Lowest energy over ``n_loops`` independent shuffles."""
    best = min(
        qsci_loops(valid_counts, cim, fraction, n_loops, n_batches, seed, tol=tol),
        key=lambda lr: (lr.result.energy, lr.loop),
    )
    return best.result, best.selection
