import itertools

import numpy as np
import pytest

import oracles
from regionrag.evalkit import cliffs_delta, paired_bootstrap


def test_identical_arrays_p_one():
    a = np.random.default_rng(0).random(50)
    assert paired_bootstrap(a, a, 2000) == 1.0


def test_complete_separation():
    assert paired_bootstrap(np.ones(160), np.zeros(160), 10_000) < 0.001


def test_n2_smoke_golden():
    # exact null probability of |mean| >= observed is 1/2 for two centred differences
    p = paired_bootstrap([1.0, 0.0], [0.0, 0.0], 10_000, seed=0)
    assert p == 0.4881511848815118
    assert abs(p - 0.5) < 0.02


def test_bootstrap_deterministic_and_validates():
    rng = np.random.default_rng(3)
    a, b = rng.random(40), rng.random(40)
    assert paired_bootstrap(a, b, 3000, seed=5) == paired_bootstrap(a, b, 3000, seed=5)
    with pytest.raises(ValueError):
        paired_bootstrap([1, 2], [1], 100)
    with pytest.raises(ValueError):
        paired_bootstrap([1], [1], 100)
    with pytest.raises(ValueError):
        paired_bootstrap([1, 2], [1, 2], 0)


def test_bootstrap_null_is_roughly_uniform():
    rng = np.random.default_rng(11)
    ps = [paired_bootstrap(rng.normal(size=30), rng.normal(size=30), 400, seed=i) for i in range(200)]
    # the percentile bootstrap is mildly liberal at small n; catch gross miscalibration only
    assert 0.01 < np.mean(np.array(ps) < 0.05) < 0.15


def test_cliffs_examples():
    assert cliffs_delta([0.5], [0.5]) == 0.0
    assert cliffs_delta([1, 1], [0, 0]) == 1.0
    assert cliffs_delta([1, 0], [1, 0]) == 0.0
    assert cliffs_delta([0, 0], [1, 1]) == -1.0


def test_cliffs_enumeration():
    # all 4 cross pairs of [1,0] x [1,0]: (1,1)=, (1,0)>, (0,1)<, (0,0)=
    pairs = list(itertools.product([1, 0], [1, 0]))
    manual = (sum(x > y for x, y in pairs) - sum(x < y for x, y in pairs)) / len(pairs)
    assert cliffs_delta([1, 0], [1, 0]) == manual == 0.0
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = list(rng.integers(0, 4, size=int(rng.integers(1, 9))))
        b = list(rng.integers(0, 4, size=int(rng.integers(1, 9))))
        assert cliffs_delta(a, b) == pytest.approx(oracles.cliffs(a, b), abs=1e-12)
    with pytest.raises(ValueError):
        cliffs_delta([], [1])
