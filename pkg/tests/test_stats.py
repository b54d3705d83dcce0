import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subq.errors import ValidationError
from subq.stats import as_probabilities, cosine_similarity, ks_statistic, total_variation


def test_cosine_examples():
    assert cosine_similarity([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-15)
    assert cosine_similarity([1, 0], [0, 1]) == 1.0
    assert cosine_similarity([0.5, 0.5], [1, 0]) == pytest.approx(1 - 1 / math.sqrt(2))
    with pytest.raises(ValidationError):
        cosine_similarity([0, 0], [1, 0])


def test_ks_examples():
    assert ks_statistic([0.5, 0.5], [0.5, 0.5])[0] == 0.0
    d, p = ks_statistic([1, 0, 0, 0], [0, 0, 0, 1], 1000, 1000)
    assert d == 1.0 and p < 1e-10
    d_small, p_small = ks_statistic([0.5, 0.5], [0.49, 0.51], 1000, 1000)
    assert p_small > p
    assert math.isnan(ks_statistic([1, 0], [0, 1])[1])


def test_tv_examples():
    assert total_variation([0.2, 0.8], [0.2, 0.8]) == 0
    assert total_variation([1, 0], [0, 1]) == 1
    assert total_variation([0.75, 0.25], [0.25, 0.75]) == 0.5


def test_dimension_mismatch():
    for f in (cosine_similarity, ks_statistic, total_variation):
        with pytest.raises(ValidationError):
            f([1, 0], [1, 0, 0])


def test_as_probabilities():
    np.testing.assert_allclose(as_probabilities({0: 1, 2: 3}, 4), [0.25, 0, 0.75, 0])
    with pytest.raises(ValidationError):
        as_probabilities({4: 1}, 4)
    with pytest.raises(ValidationError):
        as_probabilities({}, 4)


prob_vectors = st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3)


@given(prob_vectors, prob_vectors)
def test_symmetry_and_bounds(a, b):
    p = np.array(a) / sum(a)
    q = np.array(b) / sum(b)
    c1, c2 = cosine_similarity(p, q), cosine_similarity(q, p)
    assert c1 == pytest.approx(c2) and 0 <= c1 <= 1
    d1, d2 = ks_statistic(p, q)[0], ks_statistic(q, p)[0]
    assert d1 == d2 and 0 <= d1 <= 1
    t1, t2 = total_variation(p, q), total_variation(q, p)
    assert t1 == pytest.approx(t2) and 0 <= t1 <= 1 + 1e-12
