import math

import numpy as np
import pytest
from scipy import stats

from conftest import random_symmetric
from subq.errors import ValidationError
from subq.hamiltonian import CIMatrix
from subq.pauli import CoefficientMatrix, fwht_coefficients, pad_dimension, pauli_term
from subq.qdrift import (
    build_plan,
    compute_budget,
    drift_counts,
    extend_with_parity,
    plan_repetitions,
    repetition_rng,
    sample_terms,
)
from subq.statevector import evolve, exact_evolve, init_basis_state


def coeffs_from(entries, q):
    alpha = np.zeros((1 << q, 1 << q), dtype=np.float32)
    for (r, s), v in entries.items():
        alpha[r, s] = v
    return CoefficientMatrix(q, alpha)


def random_coeffs(seed, n=16):
    h = random_symmetric(np.random.default_rng(seed), n)
    padded, _ = pad_dimension(CIMatrix.from_dense(h))
    return fwht_coefficients(padded), padded


def test_budget_worked_values():
    assert drift_counts(3, 1) == (6, 3)
    assert drift_counts(2, 1) == (4, 2)


def test_budget_ceiling_property():
    rng = np.random.default_rng(0)
    for lam, t in zip(rng.uniform(1e-3, 50, 1000), rng.uniform(0.1, 3, 1000)):
        n_a, r = drift_counts(lam, t)
        assert n_a == math.ceil(2 * lam * t * t)
        assert r == math.ceil(2 * lam**2 * t**2 / n_a)
        assert n_a * r >= 2 * lam**2 * t**2 * (1 - 1e-12)


def test_budget_excludes_identity():
    c = coeffs_from({(0, 0): 100.0, (1, 0): 2.0, (0, 1): -1.0}, 1)
    b = compute_budget(c)
    assert b.lambda_abs == pytest.approx(3.0)
    assert b.lambda_norm == pytest.approx(1.5)
    assert (b.n_a, b.r) == (3, 2)
    assert b.angle == pytest.approx(1.0)


def test_budget_reference_mode_and_overrides():
    c = coeffs_from({(1, 0): 2.0, (0, 1): -1.0}, 1)
    b = compute_budget(c, epsilon=0.1)
    assert (b.n_a, b.r) == (math.ceil(2 * 1.5**2 / 0.1), 1)
    o = compute_budget(c, n_a_override=20, r_override=10)
    assert (o.n_a, o.r) == (20, 10)
    with pytest.raises(ValidationError):
        compute_budget(c, n_a_override=-1)


def test_identity_only_hamiltonian_rejected():
    with pytest.raises(ValidationError):
        compute_budget(coeffs_from({(0, 0): 1.0}, 2))


def test_single_term_sampling():
    c = coeffs_from({(0, 0): 3.0, (2, 1): -0.5}, 2)
    assert sample_terms(c, 9, np.random.default_rng(0)) == [(2, 1)] * 9


def test_two_term_frequencies_within_three_sigma():
    c = coeffs_from({(1, 0): 3.0, (0, 1): -1.0}, 1)
    draws = sample_terms(c, 100_000, np.random.default_rng(5))
    k = sum(1 for d in draws if d == (1, 0))
    sigma = math.sqrt(100_000 * 0.75 * 0.25)
    assert abs(k - 75_000) <= 3 * sigma


def test_sampling_deterministic():
    c, _ = random_coeffs(1)
    a = sample_terms(c, 50, np.random.default_rng(42))
    b = sample_terms(c, 50, np.random.default_rng(42))
    assert a == b


@pytest.mark.parametrize("seed", range(3))
def test_chi_squared_on_random_hamiltonians(seed):
    c, _ = random_coeffs(seed)
    idx, values = c.nonidentity()
    weights = np.abs(values) / np.abs(values).sum()
    draws = sample_terms(c, 100_000, np.random.default_rng(100 + seed))
    flat = np.array([r * 16 + s for r, s in draws])
    observed = np.array([np.count_nonzero(flat == i) for i in idx])
    expected = weights * 100_000
    # merge sparse cells so every expected count is at least 5
    order = np.argsort(expected)
    obs_m, exp_m, acc_o, acc_e = [], [], 0, 0.0
    for k in order:
        acc_o += observed[k]
        acc_e += expected[k]
        if acc_e >= 5:
            obs_m.append(acc_o)
            exp_m.append(acc_e)
            acc_o, acc_e = 0, 0.0
    obs_m[-1] += acc_o
    exp_m[-1] += acc_e
    assert stats.chisquare(obs_m, exp_m).pvalue > 0.01


def test_plan_of_repeated_term_sums_to_full_angle():
    c = coeffs_from({(1, 1): -0.7, (2, 0): 0.3}, 2)
    b = compute_budget(c, n_a_override=4)
    plan = build_plan([(1, 1)] * 4, b, c, parity_extension=False)
    assert len(plan) == 4
    angles = [a for _, a in plan.rotations]
    assert all(a == angles[0] for a in angles)
    assert sum(angles) == pytest.approx(-b.lambda_abs * b.t)


def test_parity_extension_rules():
    z = extend_with_parity(pauli_term(0, 0b101, 1.0))
    assert z.r == 0 and z.s == 0b1010
    single = extend_with_parity(pauli_term(0b010, 0, 1.0))
    assert single.r == 0b0101
    double = extend_with_parity(pauli_term(0b011, 0b001, 1.0))
    assert double.r == 0b0110 and double.s == 0b0010


def test_extended_terms_commute_with_global_parity():
    c, _ = random_coeffs(2)
    idx, _ = c.nonidentity()
    parity = np.diag((-1.0) ** np.bitwise_count(np.arange(32)))
    for flat in idx[:200]:
        t = extend_with_parity(pauli_term(int(flat) // 16, int(flat) % 16, 1.0))
        m = t.matrix(5)
        np.testing.assert_allclose(m @ parity, parity @ m, atol=1e-12)


def test_plans_keep_encoded_states_even():
    c, _ = random_coeffs(3)
    b = compute_budget(c)
    for plan in plan_repetitions(c, b, seed=7)[:3]:
        out = evolve(init_basis_state(0, 5), plan)
        odd = np.bitwise_count(np.arange(32)) % 2 == 1
        assert np.abs(out.amplitudes[odd]).max() < 1e-12


def test_single_term_hamiltonian_is_exact():
    for (r, s), alpha in [((0b11, 0b01), 0.8), ((0, 0b10), -1.3), ((0b101, 0b101), 0.4)]:
        c = coeffs_from({(r, s): alpha}, 3)
        b = compute_budget(c, t=1.0)
        plans = plan_repetitions(c, b, seed=1, parity_extension=False)
        h = alpha * pauli_term(r, s).matrix(3)
        target = exact_evolve(h, 1.0, 0)
        for plan in plans:
            got = evolve(init_basis_state(0, 3), plan)
            assert abs(np.vdot(target.amplitudes, got.amplitudes)) ** 2 >= 1 - 1e-10


def test_repetition_streams_are_prefix_stable():
    c, _ = random_coeffs(4)
    small = compute_budget(c, r_override=3)
    large = compute_budget(c, r_override=6)
    a = plan_repetitions(c, small, seed=11)
    b = plan_repetitions(c, large, seed=11)
    assert [p.to_text() for p in a] == [p.to_text() for p in b[:3]]
    assert a[0].to_text() != a[1].to_text()
    x = repetition_rng(1, 0, 0).random()
    assert x == repetition_rng(1, 0, 0).random() != repetition_rng(1, 0, 1).random()


def test_plan_text_lists_every_rotation():
    c = coeffs_from({(1, 0): 1.0}, 1)
    b = compute_budget(c)
    text = build_plan([(1, 0)] * b.n_a, b, c, repetition_id=2, rng_seed=9).to_text()
    lines = text.splitlines()
    assert lines[0].startswith("# repetition=2 seed=9 q_total=2")
    assert len(lines) == 1 + b.n_a
    assert lines[1].split()[0] == "XX"
