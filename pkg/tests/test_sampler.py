from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from nolgat.diffcore import DiffNode, ops
from nolgat.errors import ConfigError, DataError
from nolgat.sampler import (
    NoiseKey,
    SupportMask,
    annealed_temperature,
    gumbel_noise,
    gumbel_softmax,
    open_uniform,
    sample_orders,
    st_sample,
)

ALL3 = np.ones((1, 3), dtype=bool)


def row(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64).reshape(1, -1)


def test_gumbel_noise_of_one_half() -> None:
    assert gumbel_noise(0.5) == pytest.approx(0.366512920581664, abs=1e-12)


def test_gumbel_noise_fixed_point_at_inverse_e() -> None:
    assert gumbel_noise(np.exp(-1.0)) == pytest.approx(0.0, abs=1e-15)


def test_gumbel_noise_is_monotone() -> None:
    u = np.linspace(1e-6, 1 - 1e-6, 1001)
    assert np.all(np.diff(gumbel_noise(u)) > 0)


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.5])
def test_gumbel_noise_rejects_closed_endpoints(u: float) -> None:
    with pytest.raises(DataError):
        gumbel_noise(u)


def test_open_uniform_stays_inside_unit_interval() -> None:
    values = open_uniform(np.random.default_rng(0), (1000, 5))
    assert values.min() > 0.0
    assert values.max() < 1.0


def test_gumbel_softmax_uniform_logits() -> None:
    out = gumbel_softmax(row(np.log([1 / 3] * 3)), np.zeros((1, 3)), 1.0, ALL3)
    assert np.allclose(out.data, 1 / 3)


def test_gumbel_softmax_low_temperature_approaches_argmax() -> None:
    out = gumbel_softmax(row(np.log([0.7, 0.2, 0.1])), np.zeros((1, 3)), 0.01, ALL3)
    assert np.allclose(out.data, [[1.0, 0.0, 0.0]], atol=1e-6)


def test_gumbel_softmax_masked_entry_is_zero() -> None:
    out = gumbel_softmax(row([0.0, 0.0, 0.0]), np.zeros((1, 3)), 1.0, np.array([[True, False, True]]))
    assert out.data.tolist() == [[0.5, 0.0, 0.5]]


@pytest.mark.parametrize("temperature", [0.0, -1.0])
def test_gumbel_softmax_rejects_non_positive_temperature(temperature: float) -> None:
    with pytest.raises(ConfigError):
        gumbel_softmax(row([0.0, 0.0]), np.zeros((1, 2)), temperature, np.ones((1, 2), dtype=bool))


def test_support_mask_needs_one_order_per_node() -> None:
    with pytest.raises(DataError):
        SupportMask(np.array([[True, False], [False, False]]))


def test_single_supported_order_is_always_chosen() -> None:
    mask = np.zeros((5000, 4), dtype=bool)
    mask[:, 2] = True
    sample = st_sample(np.zeros((5000, 4)), 1.0, mask, np.random.default_rng(3))
    assert (sample.chosen == 2).all()
    assert np.allclose(sample.relaxed.data[:, 2], 1.0)


def test_gumbel_max_frequencies_match_probabilities() -> None:
    probs = np.array([0.5, 0.3, 0.2])
    draws = 200_000
    log_probs = np.tile(np.log(probs), (draws, 1))
    sample = st_sample(log_probs, 1.0, np.ones((draws, 3), dtype=bool), np.random.default_rng(2024))
    freq = np.bincount(sample.chosen, minlength=3) / draws
    assert np.abs(freq - probs).sum() < 0.01


@pytest.mark.slow
def test_gumbel_max_passes_chi_square_on_random_distributions() -> None:
    rng = np.random.default_rng(17)
    draws = 200_000
    for _ in range(20):
        width = int(rng.integers(2, 10))
        probs = rng.dirichlet(np.full(width, 2.0))
        mask = np.ones((draws, width), dtype=bool)
        sample = st_sample(np.tile(np.log(probs), (draws, 1)), 1.0, mask, rng)
        counts = np.bincount(sample.chosen, minlength=width)
        assert np.abs(counts / draws - probs).sum() < 0.01
        assert stats.chisquare(counts, probs * draws).pvalue > 0.001


def test_masked_orders_are_never_chosen() -> None:
    rng = np.random.default_rng(5)
    mask = np.tile([True, False, True, False], (20_000, 1))
    sample = st_sample(np.log(np.full((20_000, 4), 0.25)), 1.0, mask, rng)
    counts = np.bincount(sample.chosen, minlength=4)
    assert counts[1] == 0 and counts[3] == 0
    assert (sample.relaxed.data[:, [1, 3]] == 0.0).all()


def test_lower_temperature_sharpens_relaxed_scores() -> None:
    rng = np.random.default_rng(9)
    draws = 1000
    log_probs = np.log(rng.dirichlet(np.ones(5), size=draws))
    noise = gumbel_noise(open_uniform(rng, (draws, 5)))
    mask = np.ones((draws, 5), dtype=bool)
    means = [
        float(sample_orders(log_probs, noise, temperature, mask).relaxed.data.max(axis=1).mean())
        for temperature in (1.0, 0.5, 0.1, 0.01)
    ]
    assert means == sorted(means)
    assert len(set(means)) == 4
    assert means[-1] > 0.95


def test_choice_is_invariant_to_shifting_logits() -> None:
    rng = np.random.default_rng(1)
    log_probs = rng.normal(size=(500, 6))
    noise = gumbel_noise(open_uniform(rng, (500, 6)))
    mask = rng.random((500, 6)) < 0.7
    mask[:, 0] = True
    base = sample_orders(log_probs, noise, 1.0, mask)
    shifted = sample_orders(log_probs + 3.25, noise, 1.0, mask)
    assert np.array_equal(base.chosen, shifted.chosen)


@settings(max_examples=200, deadline=None)
@given(
    arrays(np.float64, (8, 5), elements=st.floats(-10, 10)),
    st.integers(-8, 8),
    st.integers(0, 2**32 - 1),
)
def test_choice_ignores_a_constant_shift(log_probs: np.ndarray, shift: int, seed: int) -> None:
    noise = gumbel_noise(open_uniform(np.random.default_rng(seed), log_probs.shape))
    mask = np.ones(log_probs.shape, dtype=bool)
    base = sample_orders(log_probs, noise, 1.0, mask)
    shifted = sample_orders(log_probs + float(shift), noise, 1.0, mask)
    assert np.array_equal(base.chosen, shifted.chosen)


def test_hard_and_relaxed_share_the_perturbed_logits() -> None:
    rng = np.random.default_rng(4)
    sample = st_sample(rng.normal(size=(50, 4)), 0.5, np.ones((50, 4), dtype=bool), rng)
    assert np.array_equal(sample.chosen, np.argmax(sample.perturbed, axis=1))
    assert np.array_equal(sample.hard, np.eye(4)[sample.chosen])
    assert np.array_equal(np.argmax(sample.relaxed.data, axis=1), sample.chosen)


def test_straight_through_forwards_hard_and_backpropagates_relaxed() -> None:
    logits = DiffNode(np.array([[0.2, -0.4, 1.0], [0.0, 0.3, -0.1]]), requires_grad=True)
    noise = np.array([[0.1, 0.0, -0.3], [0.5, -0.2, 0.0]])
    weights = np.array([[1.0, 2.0, 3.0], [-1.0, 0.5, 2.0]])
    mask = np.array([[True, True, True], [True, True, False]])

    sample = sample_orders(logits, noise, 0.7, mask)
    st = sample.straight_through()
    assert np.array_equal(st.data, sample.hard)
    ops.total(ops.multiply(st, weights)).backward()
    through_st = logits.grad.copy()

    logits.grad = np.zeros_like(logits.data)
    ops.total(ops.multiply(gumbel_softmax(logits, noise, 0.7, mask), weights)).backward()
    assert np.allclose(through_st, logits.grad, atol=1e-15)
    assert through_st[1, 2] == 0.0


def test_masked_entries_get_zero_gradient() -> None:
    logits = DiffNode(np.array([[0.3, 0.1, -0.2, 0.4]]), requires_grad=True)
    relaxed = gumbel_softmax(logits, np.zeros((1, 4)), 1.0, np.array([[True, False, True, False]]))
    ops.total(ops.multiply(relaxed, np.array([[1.0, 5.0, -2.0, 7.0]]))).backward()
    assert logits.grad[0, 1] == 0.0
    assert logits.grad[0, 3] == 0.0
    assert logits.grad[0, 0] != 0.0


def test_identical_rng_gives_identical_sample() -> None:
    log_probs = np.log(np.full((30, 3), 1 / 3))
    mask = np.ones((30, 3), dtype=bool)
    first = st_sample(log_probs, 1.0, mask, np.random.default_rng(8))
    second = st_sample(log_probs, 1.0, mask, np.random.default_rng(8))
    assert np.array_equal(first.perturbed, second.perturbed)
    assert np.array_equal(first.relaxed.data, second.relaxed.data)
    assert np.array_equal(first.chosen, second.chosen)


def test_noise_key_streams_are_deterministic_and_distinct() -> None:
    key = NoiseKey(seed=3, epoch=2, layer=1)
    assert np.array_equal(key.gumbel_block(10, 4), NoiseKey(3, 2, 1).gumbel_block(10, 4))
    assert not np.array_equal(key.gumbel_block(10, 4), NoiseKey(3, 2, 0).gumbel_block(10, 4))
    assert not np.array_equal(key.gumbel_block(10, 4), NoiseKey(3, 3, 1).gumbel_block(10, 4))
    assert not np.array_equal(key.gumbel_block(10, 4), NoiseKey(4, 2, 1).gumbel_block(10, 4))


def test_noise_rows_belong_to_nodes() -> None:
    key = NoiseKey(seed=0, epoch=0, layer=0)
    assert np.array_equal(key.uniform_block(50, 3)[:20], key.uniform_block(20, 3))


def test_node_generators_are_independent_of_node_count() -> None:
    key = NoiseKey(seed=1, epoch=4, layer=0)
    first = key.node_generator(7).random(3)
    assert np.array_equal(first, NoiseKey(1, 4, 0).node_generator(7).random(3))
    assert not np.array_equal(first, key.node_generator(8).random(3))


@pytest.mark.parametrize(
    ("epoch", "expected"),
    [(0, 1.0), (5, 0.55), (10, 0.1), (20, 0.1)],
)
def test_annealed_temperature_is_linear(epoch: int, expected: float) -> None:
    assert annealed_temperature(epoch, 11, 1.0, 0.1, True) == pytest.approx(expected)


def test_annealing_disabled_keeps_start_temperature() -> None:
    assert annealed_temperature(7, 11, 1.0, 0.1, False) == 1.0
    assert annealed_temperature(0, 1, 0.8, 0.1, True) == 0.8
