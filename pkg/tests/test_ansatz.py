"""Wave-function ansatze: amplitudes, analytic derivatives, serialization."""

import mpmath
import numpy as np
import pytest

from nnquench import Fnn, Rbm, activation, load_params, log_two_cosh, save_params
from nnquench.ansatz import activation_derivative


def finite_difference_gradient(ansatz, spins, step=1e-5):
    """Holomorphic derivative by central differences along the real axis."""
    theta = ansatz.flat()
    grad = np.empty(theta.size, dtype=np.complex128)
    for m in range(theta.size):
        plus, minus = theta.copy(), theta.copy()
        plus[m] += step
        minus[m] -= step
        grad[m] = (ansatz.with_flat(plus).log_amplitude(spins) - ansatz.with_flat(minus).log_amplitude(spins)) / (
            2 * step
        )
    return grad


def finite_difference_gradient_imag(ansatz, spins, step=1e-5):
    """Same derivative probed along the imaginary axis; equal iff holomorphic."""
    theta = ansatz.flat()
    grad = np.empty(theta.size, dtype=np.complex128)
    for m in range(theta.size):
        plus, minus = theta.copy(), theta.copy()
        plus[m] += 1j * step
        minus[m] -= 1j * step
        grad[m] = (ansatz.with_flat(plus).log_amplitude(spins) - ansatz.with_flat(minus).log_amplitude(spins)) / (
            2j * step
        )
    return grad


def test_activation_values():
    assert activation(0.0) == 0.0
    np.testing.assert_allclose(activation(1.0), 0.8, atol=1e-15)


def test_activation_odd(rng):
    u = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    np.testing.assert_allclose(activation(-u), -activation(u), atol=1e-14)


def test_activation_derivative_matches_fd(rng):
    u = 0.5 * (rng.standard_normal(10) + 1j * rng.standard_normal(10))
    h = 1e-6
    fd = (activation(u + h) - activation(u - h)) / (2 * h)
    np.testing.assert_allclose(activation_derivative(u), fd, rtol=1e-8)


def test_rbm_zero_parameters_log_amplitude():
    rbm = Rbm.near_uniform(5, 10, noise_scale=0.0)
    configs = np.array([[1, -1, 1, 1, -1], [1, 1, 1, 1, 1]], dtype=np.int8)
    np.testing.assert_allclose(rbm.log_amplitude(configs), 10 * np.log(2.0), atol=1e-14)


def test_fnn_zero_parameters_log_amplitude():
    fnn = Fnn.near_uniform([5, 20, 15, 1], noise_scale=0.0)
    configs = np.array([[1, -1, 1, 1, -1], [-1, -1, -1, -1, -1]], dtype=np.int8)
    np.testing.assert_allclose(fnn.log_amplitude(configs), 0.0, atol=1e-14)


def _mpmath_rbm_log(rbm, spins):
    mpmath.mp.dps = 40
    total = mpmath.mpc(0)
    for l, s in enumerate(spins):
        total += mpmath.mpc(rbm.visible_bias[l]) * int(s)
    for h in range(rbm.n_hidden):
        theta = mpmath.mpc(rbm.hidden_bias[h])
        for l, s in enumerate(spins):
            theta += mpmath.mpc(rbm.weights[h, l]) * int(s)
        total += mpmath.log(2 * mpmath.cosh(theta))
    return complex(total)


def _mpmath_fnn_log(fnn, spins):
    mpmath.mp.dps = 40

    def act(u):
        return u - u**3 / 3 + mpmath.mpf(2) / 15 * u**5

    values = [act(mpmath.mpc(int(s))) for s in spins]
    for k, (w, b) in enumerate(zip(fnn.weights, fnn.biases)):
        nxt = []
        for i in range(w.shape[0]):
            z = mpmath.mpc(b[i])
            for j in range(w.shape[1]):
                z += mpmath.mpc(w[i, j]) * values[j]
            nxt.append(z)
        values = nxt if k == len(fnn.weights) - 1 else [act(z) for z in nxt]
    return complex(values[0])


def test_rbm_log_amplitude_high_precision(rng):
    rbm = Rbm.near_uniform(4, 6, noise_scale=0.3, seed=7)
    spins = (rng.integers(0, 2, size=4) * 2 - 1).astype(np.int8)
    np.testing.assert_allclose(rbm.log_amplitude(spins), _mpmath_rbm_log(rbm, spins), rtol=1e-12)


def test_fnn_log_amplitude_high_precision(rng):
    fnn = Fnn.near_uniform([4, 8, 6, 1], noise_scale=0.3, seed=8)
    spins = (rng.integers(0, 2, size=4) * 2 - 1).astype(np.int8)
    np.testing.assert_allclose(fnn.log_amplitude(spins), _mpmath_fnn_log(fnn, spins), rtol=1e-12)


def test_rbm_zero_parameter_derivatives():
    rbm = Rbm.near_uniform(4, 6, noise_scale=0.0)
    spins = np.array([1, -1, -1, 1], dtype=np.int8)
    grads = rbm.log_derivatives(spins)
    np.testing.assert_allclose(grads[:4], spins.astype(complex))
    np.testing.assert_allclose(grads[4:], 0.0)


@pytest.mark.parametrize("kind", ["rbm", "fnn"])
def test_log_derivatives_match_finite_differences(kind, rng):
    for trial in range(3):
        if kind == "rbm":
            ansatz = Rbm.near_uniform(4, 8, noise_scale=0.2, seed=100 + trial)
        else:
            ansatz = Fnn.near_uniform([4, 8, 6, 1], noise_scale=0.2, seed=200 + trial)
        spins = (rng.integers(0, 2, size=4) * 2 - 1).astype(np.int8)
        analytic = ansatz.log_derivatives(spins)
        fd_re = finite_difference_gradient(ansatz, spins)
        fd_im = finite_difference_gradient_imag(ansatz, spins)
        scale = np.maximum(np.abs(fd_re), 1e-8)
        assert np.max(np.abs(analytic - fd_re) / scale) <= 1e-6
        assert np.max(np.abs(analytic - fd_im) / scale) <= 1e-6


def test_near_uniform_noise_zero_is_uniform():
    rbm = Rbm.near_uniform(6, 12, noise_scale=0.0)
    fnn = Fnn.near_uniform([6, 24, 18, 1], noise_scale=0.0)
    from nnquench import enumerate_configurations

    configs = enumerate_configurations(6)
    assert np.ptp(rbm.log_amplitude(configs).real) == 0.0
    np.testing.assert_allclose(fnn.log_amplitude(configs), 0.0)


def test_near_uniform_seeded_determinism():
    a = Fnn.near_uniform([4, 8, 1], noise_scale=0.01, seed=5)
    b = Fnn.near_uniform([4, 8, 1], noise_scale=0.01, seed=5)
    np.testing.assert_array_equal(a.flat(), b.flat())
    c = Fnn.near_uniform([4, 8, 1], noise_scale=0.01, seed=6)
    assert np.any(a.flat() != c.flat())


def test_rbm_hidden_sign_flip_invariance(rng):
    rbm = Rbm.near_uniform(5, 7, noise_scale=0.3, seed=9)
    flipped = Rbm(rbm.visible_bias, rbm.hidden_bias.copy(), rbm.weights.copy())
    flipped.hidden_bias[3] *= -1
    flipped.weights[3, :] *= -1
    configs = (rng.integers(0, 2, size=(10, 5)) * 2 - 1).astype(np.int8)
    a = rbm.log_amplitude(configs)
    b = flipped.log_amplitude(configs)
    # cosh is even, so amplitudes agree; logs may differ by multiples of 2 pi i
    np.testing.assert_allclose(np.exp(a - b), 1.0, atol=1e-12)


def test_log_two_cosh_stable_for_huge_arguments():
    z = np.array([1e4 + 0.3j, -1e4 + 2.0j, 25.0 + 1.0j])
    out = log_two_cosh(z)
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out[0].real, 1e4, rtol=1e-12)
    rbm = Rbm(np.zeros(2), np.full(3, 1e4 + 0.0j), np.zeros((3, 2)))
    val = rbm.log_amplitude(np.array([1, -1], dtype=np.int8))
    assert np.isfinite(val)


def test_log_two_cosh_branch_continuity():
    # values just below and above the branch switch agree
    for base in (19.999999, 20.000001):
        z = np.array([base + 0.7j])
        direct = np.log(2 * np.cosh(z))
        np.testing.assert_allclose(log_two_cosh(z), direct, rtol=1e-12)


@pytest.mark.parametrize("kind", ["rbm", "fnn"])
def test_flatten_roundtrip(kind, rng):
    if kind == "rbm":
        ansatz = Rbm.near_uniform(5, 10, noise_scale=0.1, seed=1)
        assert ansatz.n_params == 5 + 10 + 50
    else:
        ansatz = Fnn.near_uniform([5, 20, 15, 1], noise_scale=0.1, seed=1)
        sizes = [5, 20, 15, 1]
        assert ansatz.n_params == sum(sizes[k] * sizes[k - 1] + sizes[k] for k in range(1, 4))
    theta = ansatz.flat()
    rebuilt = ansatz.with_flat(theta)
    np.testing.assert_array_equal(rebuilt.flat(), theta)
    other = rng.standard_normal(theta.size) + 1j * rng.standard_normal(theta.size)
    np.testing.assert_array_equal(ansatz.with_flat(other).flat(), other)


def test_fnn_requires_single_output():
    with pytest.raises(ValueError):
        Fnn.near_uniform([4, 8, 2], noise_scale=0.0)


def test_shape_mismatch_raises():
    rbm = Rbm.near_uniform(4, 8, noise_scale=0.0)
    with pytest.raises(ValueError):
        rbm.log_amplitude(np.ones(5, dtype=np.int8))
    fnn = Fnn.near_uniform([4, 8, 1], noise_scale=0.0)
    with pytest.raises(ValueError):
        fnn.log_derivatives(np.ones(3, dtype=np.int8))


@pytest.mark.parametrize("kind", ["rbm", "fnn"])
def test_checkpoint_roundtrip(tmp_path, kind):
    if kind == "rbm":
        ansatz = Rbm.near_uniform(5, 10, noise_scale=0.05, seed=3)
    else:
        ansatz = Fnn.near_uniform([5, 20, 15, 1], noise_scale=0.05, seed=3)
    path = tmp_path / "params.bin"
    save_params(path, ansatz)
    loaded = load_params(path)
    assert type(loaded) is type(ansatz)
    np.testing.assert_array_equal(loaded.flat(), ansatz.flat())


def test_checkpoint_header_layout(tmp_path):
    ansatz = Rbm.near_uniform(3, 2, noise_scale=0.05, seed=4)
    path = tmp_path / "params.bin"
    save_params(path, ansatz)
    blob = path.read_bytes()
    head, _, body = blob.partition(b"end\n")
    assert head.splitlines()[0] == b"nnquench-complex v1"
    assert b"kind rbm" in head and b"shape 3 2" in head
    raw = np.frombuffer(body, dtype="<f8")
    assert raw.size == 2 * ansatz.n_params
    np.testing.assert_array_equal(raw[0::2], ansatz.flat().real)
    np.testing.assert_array_equal(raw[1::2], ansatz.flat().imag)
