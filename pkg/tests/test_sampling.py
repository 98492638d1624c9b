"""Metropolis sampling and exact full summation."""

import numpy as np
import pytest

from nnquench import (
    ResourceError,
    Rbm,
    acceptance_probability,
    build_model,
    configuration_index,
    full_summation,
    metropolis_sample,
    nnqs_to_dense,
)
from nnquench.sampling import SamplerConfig, draw_samples


def empirical_distribution(samples, L):
    counts = np.bincount(configuration_index(samples.configurations), minlength=2**L)
    return counts / samples.n


def test_uniform_state_every_move_accepted():
    rbm = Rbm.near_uniform(5, 10, noise_scale=0.0)
    ss = metropolis_sample(rbm, n_samples=4000, n_chains=4, seed=1)
    # acceptance is identically 1 for a flat distribution, so single-site
    # magnetization is a fair coin: 3 sigma binomial window
    mags = ss.configurations.mean(axis=0)
    assert np.all(np.abs(mags) <= 3.0 / np.sqrt(ss.n))
    assert ss.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_acceptance_probability_rule():
    np.testing.assert_allclose(acceptance_probability(0.3 + 2j), 1.0)
    np.testing.assert_allclose(acceptance_probability(-0.25), np.exp(-0.5))


def test_detailed_balance_two_site_chain(rng):
    rbm = Rbm.near_uniform(2, 4, noise_scale=0.4, seed=6)
    probs = np.abs(nnqs_to_dense(rbm)) ** 2
    configs = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=np.int8)
    logs = rbm.log_amplitude(configs)
    for i in range(4):
        for j in range(4):
            if np.sum(configs[i] != configs[j]) != 1:
                continue
            a_ij = acceptance_probability(logs[j] - logs[i])
            a_ji = acceptance_probability(logs[i] - logs[j])
            np.testing.assert_allclose(probs[i] * a_ij, probs[j] * a_ji, rtol=1e-12)


def test_metropolis_matches_enumeration():
    rbm = Rbm.near_uniform(6, 12, noise_scale=0.15, seed=11)
    ss = metropolis_sample(rbm, n_samples=20_000, n_chains=8, seed=2)
    exact = np.abs(nnqs_to_dense(rbm)) ** 2
    tvd = 0.5 * np.sum(np.abs(empirical_distribution(ss, 6) - exact))
    assert tvd <= 0.05


def test_metropolis_seeded_determinism():
    rbm = Rbm.near_uniform(4, 8, noise_scale=0.1, seed=5)
    a = metropolis_sample(rbm, n_samples=500, n_chains=3, seed=42)
    b = metropolis_sample(rbm, n_samples=500, n_chains=3, seed=42)
    np.testing.assert_array_equal(a.configurations, b.configurations)
    np.testing.assert_array_equal(a.log_amplitudes, b.log_amplitudes)
    c = metropolis_sample(rbm, n_samples=500, n_chains=3, seed=43)
    assert np.any(a.configurations != c.configurations)


def test_metropolis_sample_count_split():
    rbm = Rbm.near_uniform(4, 8, noise_scale=0.1, seed=5)
    ss = metropolis_sample(rbm, n_samples=101, n_chains=7, seed=1)
    assert ss.n == 101
    np.testing.assert_allclose(ss.weights, 1.0 / 101)
    # cached log-amplitudes actually match the configurations
    np.testing.assert_allclose(ss.log_amplitudes, rbm.log_amplitude(ss.configurations), atol=1e-12)


def test_full_summation_uniform():
    rbm = Rbm.near_uniform(3, 6, noise_scale=0.0)
    ss = full_summation(rbm)
    assert ss.mode == "full-summation"
    assert ss.n == 8
    np.testing.assert_allclose(ss.weights, 1.0 / 8, atol=1e-14)
    # all 2^L configurations, each exactly once
    assert len(set(map(tuple, ss.configurations.tolist()))) == 8


def test_full_summation_normalization_random():
    rbm = Rbm.near_uniform(10, 20, noise_scale=0.2, seed=3)
    ss = full_summation(rbm)
    assert abs(ss.weights.sum() - 1.0) <= 1e-12


def test_full_summation_matches_dense_probabilities():
    fnn = __import__("nnquench").Fnn.near_uniform([14, 14, 1], noise_scale=0.05, seed=9)
    ss = full_summation(fnn)
    assert ss.n == 2**14
    probs = np.abs(nnqs_to_dense(fnn)) ** 2
    np.testing.assert_allclose(ss.weights, probs, atol=1e-12)


def test_full_summation_resource_guard():
    rbm = Rbm.near_uniform(21, 2, noise_scale=0.0)
    with pytest.raises(ResourceError):
        full_summation(rbm)


def test_draw_samples_dispatch():
    rbm = Rbm.near_uniform(4, 8, noise_scale=0.1, seed=5)
    full = draw_samples(rbm, SamplerConfig(mode="full"))
    assert full.mode == "full-summation"
    mc = draw_samples(rbm, SamplerConfig(mode="metropolis", n_samples=64, n_chains=2, seed=5), (1, 2))
    assert mc.mode == "monte-carlo" and mc.n == 64
    mc2 = draw_samples(rbm, SamplerConfig(mode="metropolis", n_samples=64, n_chains=2, seed=5), (1, 2))
    np.testing.assert_array_equal(mc.configurations, mc2.configurations)
