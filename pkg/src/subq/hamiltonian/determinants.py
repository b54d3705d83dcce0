"""Slater determinants, the fixed-(N_alpha, N_beta) basis and Slater-Condon rules.

Spin orbitals are numbered alpha first: spatial orbital ``p`` with alpha spin is
spin orbital ``p`` and with beta spin is ``n_orb + p``.  A determinant is the
ordered product ``a+_{k1} a+_{k2} ... |0>`` with ``k1 < k2 < ...``, so moving an
operator to position ``k`` picks up ``(-1)**(occupied spin orbitals below k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from subq.errors import ValidationError
from subq.hamiltonian.integrals import IntegralTable


@dataclass(frozen=True, order=True)
class Determinant:
    alpha_mask: int
    beta_mask: int

    def spin_mask(self, n_orb: int) -> int:
        return self.alpha_mask | (self.beta_mask << n_orb)

    @classmethod
    def from_spin_mask(cls, mask: int, n_orb: int) -> Determinant:
        return cls(mask & ((1 << n_orb) - 1), mask >> n_orb)

    def label(self, n_orb: int) -> str:
        return f"{self.alpha_mask:0{n_orb}b}|{self.beta_mask:0{n_orb}b}"


@dataclass(frozen=True, eq=False)
class ConfigurationBasis:
    """Ordered determinant list; the Hartree-Fock (aufbau) determinant sits at index 0."""

    n_orb: int
    n_alpha: int
    n_beta: int
    determinants: tuple[Determinant, ...]
    hf_index: int = 0
    _lookup: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._lookup:
            self._lookup.update(
                (d.spin_mask(self.n_orb), i) for i, d in enumerate(self.determinants)
            )
        if len(self._lookup) != len(self.determinants):
            raise ValidationError("determinants in a basis must be distinct")

    def __len__(self):
        return len(self.determinants)

    def __getitem__(self, i) -> Determinant:
        return self.determinants[i]

    def index(self, det: Determinant) -> int:
        return self._lookup[det.spin_mask(self.n_orb)]

    def index_of_mask(self, spin_mask: int) -> int | None:
        return self._lookup.get(spin_mask)


def _masks(n_orb, n_occ):
    return sorted(sum(1 << k for k in occ) for occ in combinations(range(n_orb), n_occ))


def enumerate_determinants(n_orb: int, n_alpha: int, n_beta: int) -> ConfigurationBasis:
    if n_orb < 1 or min(n_alpha, n_beta) < 0 or max(n_alpha, n_beta) > n_orb:
        raise ValidationError(
            f"cannot place ({n_alpha}, {n_beta}) electrons in {n_orb} orbitals"
        )
    alphas, betas = _masks(n_orb, n_alpha), _masks(n_orb, n_beta)
    aufbau = Determinant((1 << n_alpha) - 1, (1 << n_beta) - 1)
    dets = [aufbau]
    dets += [Determinant(a, b) for a in alphas for b in betas if Determinant(a, b) != aufbau]
    assert len(dets) == comb(n_orb, n_alpha) * comb(n_orb, n_beta)
    return ConfigurationBasis(n_orb, n_alpha, n_beta, tuple(dets))


def excitation_degree(det_i: Determinant, det_j: Determinant) -> int:
    """Number of spin orbitals that must be moved to turn one determinant into the other."""
    return ((det_i.alpha_mask ^ det_j.alpha_mask).bit_count()
            + (det_i.beta_mask ^ det_j.beta_mask).bit_count()) // 2


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _annihilate(mask, k):
    return mask ^ (1 << k), -1 if (mask & ((1 << k) - 1)).bit_count() & 1 else 1


def _create(mask, k):
    return mask | (1 << k), -1 if (mask & ((1 << k) - 1)).bit_count() & 1 else 1


class _SpinIntegrals:
    """Spin-orbital view of spatial integrals: (PQ|RS) vanishes unless spins pair up."""

    def __init__(self, integrals: IntegralTable):
        self.n = integrals.n_orb
        self.h1 = integrals.one_body
        self.h2 = integrals.two_body

    def one(self, p, q):
        n = self.n
        if (p < n) != (q < n):
            return 0.0
        return self.h1[p % n, q % n]

    def two(self, p, q, r, s):
        n = self.n
        if (p < n) != (q < n) or (r < n) != (s < n):
            return 0.0
        return self.h2[p % n, q % n, r % n, s % n]


def _element(mi: int, mj: int, ints: _SpinIntegrals) -> float:
    diff = mi ^ mj
    degree = diff.bit_count() // 2
    if degree > 2:
        return 0.0
    if degree == 0:
        occ = list(_bits(mi))
        value = 0.0
        for a, k in enumerate(occ):
            value += ints.one(k, k)
            for l in occ[:a]:
                value += ints.two(k, k, l, l) - ints.two(k, l, l, k)
        return value
    particles = list(_bits(diff & mi))  # occupied in i only
    holes = list(_bits(diff & mj))  # occupied in j only
    if degree == 1:
        (p,), (q,) = particles, holes
        m, s1 = _annihilate(mj, q)
        m, s2 = _create(m, p)
        value = ints.one(p, q)
        for l in _bits(mj & mi):
            value += ints.two(p, q, l, l) - ints.two(p, l, l, q)
        return s1 * s2 * value
    (p, r), (q, s) = particles, holes
    # a+_p a+_r a_s a_q |j> = sign |i>
    m, s1 = _annihilate(mj, q)
    m, s2 = _annihilate(m, s)
    m, s3 = _create(m, r)
    m, s4 = _create(m, p)
    return s1 * s2 * s3 * s4 * (ints.two(p, q, r, s) - ints.two(p, s, r, q))


def slater_condon_element(det_i: Determinant, det_j: Determinant, integrals: IntegralTable) -> float:
    """Matrix element <det_i|H|det_j> in Hartree, core energy excluded."""
    n = integrals.n_orb
    limit = 1 << n
    for d in (det_i, det_j):
        if d.alpha_mask >= limit or d.beta_mask >= limit or d.alpha_mask < 0 or d.beta_mask < 0:
            raise ValidationError(f"determinant {d} does not fit in {n} orbitals")
    if (det_i.alpha_mask.bit_count() != det_j.alpha_mask.bit_count()
            or det_i.beta_mask.bit_count() != det_j.beta_mask.bit_count()):
        raise ValidationError("determinants have different (N_alpha, N_beta)")
    return float(_element(det_i.spin_mask(n), det_j.spin_mask(n), _SpinIntegrals(integrals)))


def connected_masks(spin_mask: int, n_orb: int):
    """Yield every spin mask reachable by a spin-conserving single or double excitation."""
    n2 = 2 * n_orb
    full = (1 << n2) - 1
    occ = list(_bits(spin_mask))
    virt = list(_bits(full & ~spin_mask))
    for q in occ:
        for p in virt:
            if (p < n_orb) == (q < n_orb):
                yield spin_mask ^ (1 << q) ^ (1 << p)
    for q, s in combinations(occ, 2):
        n_alpha_holes = (q < n_orb) + (s < n_orb)
        base = spin_mask ^ (1 << q) ^ (1 << s)
        for p, r in combinations(virt, 2):
            if (p < n_orb) + (r < n_orb) == n_alpha_holes:
                yield base | (1 << p) | (1 << r)


def element_table(basis: ConfigurationBasis, integrals: IntegralTable):
    """Callable ``(i, j) -> H_ij`` over basis indices, evaluated in double precision."""
    if integrals.n_orb != basis.n_orb:
        raise ValidationError(
            f"basis has {basis.n_orb} orbitals but integrals have {integrals.n_orb}"
        )
    ints = _SpinIntegrals(integrals)
    masks = [d.spin_mask(basis.n_orb) for d in basis.determinants]

    def element(i, j):
        return _element(masks[i], masks[j], ints)

    return element


def spin_masks(basis: ConfigurationBasis) -> np.ndarray:
    return np.array([d.spin_mask(basis.n_orb) for d in basis.determinants], dtype=np.int64)
