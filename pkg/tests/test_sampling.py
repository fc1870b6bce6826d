import numpy as np
import pytest

from aelab import sampling
from aelab.errors import DomainError, EmptyInputError, IntegrityError


def test_mode_constructors_and_validation():
    assert sampling.TrainingMode.standard().variant == sampling.STANDARD
    assert sampling.TrainingMode.icrst(0.3).p == 0.3
    assert sampling.TrainingMode.trst().needs_labels is False
    assert sampling.TrainingMode.icrst().needs_labels is True
    with pytest.raises(DomainError):
        sampling.TrainingMode("bogus")
    with pytest.raises(DomainError):
        sampling.TrainingMode.icrst(1.5)


def test_build_class_index():
    index = sampling.build_class_index([1, 0, 1, 2, 0])
    assert set(index) == {0, 1, 2}
    assert list(index[0]) == [1, 4]
    assert list(index[1]) == [0, 2]
    assert list(index[2]) == [3]
    with pytest.raises(EmptyInputError):
        sampling.build_class_index([])
    with pytest.raises(IntegrityError):
        sampling.build_class_index([0, -1])


def test_draw_step_flag_degenerate():
    rng = np.random.default_rng(0)
    assert all(not sampling.draw_step_flag(0.0, rng) for _ in range(100))
    assert all(sampling.draw_step_flag(1.0, rng) for _ in range(100))
    with pytest.raises(DomainError):
        sampling.draw_step_flag(-0.1, rng)


def test_draw_step_flag_frequency():
    rng = np.random.default_rng(1)
    hits = sum(sampling.draw_step_flag(0.2, rng) for _ in range(100_000))
    # 3 standard errors of a Bernoulli(0.2) mean over 1e5 draws ~ 0.0038
    assert abs(hits / 100_000 - 0.2) < 0.01


def test_select_targets_standard_is_identity():
    rng = np.random.default_rng(2)
    rows = np.array([3, 7])
    got = sampling.select_targets(rows, None, sampling.TrainingMode.standard(),
                                  None, 10, rng)
    assert list(got) == [3, 7]
    got[0] = 99  # returned array must be a copy
    assert rows[0] == 3


def test_icrst_targets_stay_in_class():
    labels = np.array([0, 0, 0, 1, 1, 2, 2, 2, 2])
    index = sampling.build_class_index(labels)
    mode = sampling.TrainingMode.icrst(1.0)
    rng = np.random.default_rng(3)
    for _ in range(200):
        batch = rng.permutation(9)[:5]
        targets = sampling.select_targets(batch, labels, mode, index, 9, rng)
        assert np.array_equal(labels[targets], labels[batch])


def test_icrst_p1_uniform_within_two_row_class():
    labels = np.array([0, 0, 1, 1, 1])
    index = sampling.build_class_index(labels)
    mode = sampling.TrainingMode.icrst(1.0)
    rng = np.random.default_rng(4)
    batch = np.array([0])
    hits = 0
    for _ in range(10_000):
        hits += sampling.select_targets(batch, labels, mode, index, 5, rng)[0] == 1
    assert abs(hits / 10_000 - 0.5) < 0.02


def test_icrst_p0_degenerates_to_standard():
    labels = np.array([0, 1, 0, 1])
    index = sampling.build_class_index(labels)
    mode = sampling.TrainingMode.icrst(0.0)
    rng = np.random.default_rng(5)
    batch = np.array([2, 1, 0])
    for _ in range(50):
        assert np.array_equal(
            sampling.select_targets(batch, labels, mode, index, 4, rng), batch
        )


def test_icrst_requires_labels():
    with pytest.raises(IntegrityError):
        sampling.select_targets(np.array([0]), None,
                                sampling.TrainingMode.icrst(1.0), None, 4,
                                np.random.default_rng(0))


def test_trst_marginal_is_uniform():
    mode = sampling.TrainingMode.trst()
    rng = np.random.default_rng(6)
    n = 8
    draws = 200_000
    counts = np.zeros(n)
    batch = np.array([0, 1])
    for _ in range(draws // 2):
        t = sampling.select_targets(batch, None, mode, None, n, rng)
        counts[t[0]] += 1
        counts[t[1]] += 1
    freq = counts / draws
    # 1/n = 0.125; 3 standard errors over 2e5 draws ~ 0.0022
    assert np.all(np.abs(freq - 1.0 / n) < 0.003)


def test_per_sample_flag_mixes_within_one_step():
    labels = np.zeros(50, dtype=np.int64)
    index = sampling.build_class_index(labels)
    mode = sampling.TrainingMode.icrst(0.5)
    rng = np.random.default_rng(7)
    batch = np.arange(50)
    got = sampling.select_targets(batch, labels, mode, index, 50, rng,
                                  per_sample=True)
    kept = got == batch
    # per-row draws should yield a mixed batch; step-level never can
    assert kept.any() and (~kept).any()


def test_select_targets_reproducible():
    labels = np.array([0, 0, 1, 1, 1, 0])
    index = sampling.build_class_index(labels)
    mode = sampling.TrainingMode.icrst(0.7)
    batch = np.array([0, 2, 4, 5])
    a = sampling.select_targets(batch, labels, mode, index, 6,
                                np.random.default_rng(8))
    b = sampling.select_targets(batch, labels, mode, index, 6,
                                np.random.default_rng(8))
    assert np.array_equal(a, b)


def test_class_statistics_trivials():
    data = np.array([[1.0, 2.0], [3.0, 4.0], [10.0, 10.0]])
    labels = np.array([0, 0, 1])
    stats = sampling.class_statistics(data, labels)
    assert stats.counts == {0: 2, 1: 1}
    assert np.array_equal(stats.means[0], [2.0, 3.0])
    assert np.array_equal(stats.variances[0], [1.0, 1.0])
    assert np.array_equal(stats.variances[1], [0.0, 0.0])


def test_class_statistics_matches_filter_then_mean():
    rng = np.random.default_rng(9)
    data = rng.standard_normal((120, 4))
    labels = rng.integers(0, 3, size=120)
    stats = sampling.class_statistics(data, labels)
    for j in range(3):
        sub = data[labels == j]
        assert np.allclose(stats.means[j], sub.mean(axis=0), atol=1e-12)
        assert np.allclose(stats.variances[j], sub.var(axis=0), atol=1e-12)


def test_class_statistics_length_mismatch():
    with pytest.raises(IntegrityError):
        sampling.class_statistics(np.zeros((3, 2)), np.zeros(2, dtype=np.int64))
