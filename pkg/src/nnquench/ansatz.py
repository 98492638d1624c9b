"""Complex-parameter neural wave functions: restricted Boltzmann machine and
feed-forward network.

Both classes expose the same surface: ``n_sites``, ``n_params``,
``log_amplitude`` and ``log_derivatives`` (batched over leading axes), and
``flat``/``with_flat`` for round-tripping the parameters through a single
complex vector.  Parameters are holomorphic: derivatives are complex-linear.
Instances are treated as immutable; updates build new instances.
"""

from __future__ import annotations

import numpy as np

from . import serialization

LOG_COSH_BRANCH = 20.0  # switch to the asymptotic ln(2cosh) form above this |Re z|


def activation(u):
    """Odd quintic ln-cosh surrogate: u - u^3/3 + 2u^5/15, elementwise."""
    u = np.asarray(u)
    u2 = u * u
    return u * (1.0 - u2 / 3.0 + (2.0 / 15.0) * u2 * u2)


def activation_derivative(u):
    u = np.asarray(u)
    u2 = u * u
    return 1.0 - u2 + (2.0 / 3.0) * u2 * u2


def log_two_cosh(z: np.ndarray) -> np.ndarray:
    """ln(2 cosh z), switching to |Re z| + ln(1 + e^{-2|Re z|}) to avoid overflow."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty(z.shape, dtype=np.complex128)
    big = np.abs(z.real) > LOG_COSH_BRANCH
    out[~big] = np.log(2.0 * np.cosh(z[~big]))
    zb = z[big]
    zb = np.where(zb.real >= 0, zb, -zb)  # cosh is even
    out[big] = zb + np.log(1.0 + np.exp(-2.0 * zb))
    return out


def _as_batch(spins: np.ndarray, n_sites: int) -> tuple[np.ndarray, tuple[int, ...]]:
    s = np.asarray(spins)
    if s.shape[-1] != n_sites:
        raise ValueError(f"configuration length {s.shape[-1]} != {n_sites} sites")
    lead = s.shape[:-1]
    return s.reshape(-1, n_sites).astype(np.float64), lead


class Rbm:
    """psi(x) = exp(sum_l a_l x_l) * prod_h 2 cosh(b_h + sum_l W_hl x_l)."""

    def __init__(self, visible_bias: np.ndarray, hidden_bias: np.ndarray, weights: np.ndarray):
        a = np.asarray(visible_bias, dtype=np.complex128)
        b = np.asarray(hidden_bias, dtype=np.complex128)
        w = np.asarray(weights, dtype=np.complex128)
        if w.shape != (b.shape[0], a.shape[0]):
            raise ValueError(f"weight shape {w.shape} != (hidden {b.shape[0]}, visible {a.shape[0]})")
        self.visible_bias = a
        self.hidden_bias = b
        self.weights = w

    @property
    def n_sites(self) -> int:
        return self.visible_bias.shape[0]

    @property
    def n_hidden(self) -> int:
        return self.hidden_bias.shape[0]

    @property
    def n_params(self) -> int:
        return self.n_sites + self.n_hidden + self.n_hidden * self.n_sites

    @classmethod
    def near_uniform(cls, n_sites: int, n_hidden: int, noise_scale: float = 0.01, seed=0) -> "Rbm":
        """All parameters ~ complex Gaussian noise; noise_scale=0 is the exact uniform state."""
        n_params = n_sites + n_hidden + n_hidden * n_sites
        theta = _complex_noise(n_params, noise_scale, seed)
        return cls(
            theta[:n_sites],
            theta[n_sites : n_sites + n_hidden],
            theta[n_sites + n_hidden :].reshape(n_hidden, n_sites),
        )

    def log_amplitude(self, spins: np.ndarray):
        s, lead = _as_batch(spins, self.n_sites)
        theta = self.hidden_bias + s @ self.weights.T
        val = s @ self.visible_bias + np.sum(log_two_cosh(theta), axis=1)
        return complex(val[0]) if lead == () else val.reshape(lead)

    def log_derivatives(self, spins: np.ndarray) -> np.ndarray:
        s, lead = _as_batch(spins, self.n_sites)
        theta = self.hidden_bias + s @ self.weights.T
        t = np.tanh(theta)
        grads = np.concatenate(
            [s.astype(np.complex128), t, (t[:, :, None] * s[:, None, :]).reshape(s.shape[0], -1)],
            axis=1,
        )
        return grads[0] if lead == () else grads.reshape(*lead, self.n_params)

    def flat(self) -> np.ndarray:
        return np.concatenate([self.visible_bias, self.hidden_bias, self.weights.ravel()])

    def with_flat(self, theta: np.ndarray) -> "Rbm":
        theta = np.asarray(theta, dtype=np.complex128)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape}")
        L, H = self.n_sites, self.n_hidden
        return Rbm(theta[:L], theta[L : L + H], theta[L + H :].reshape(H, L))


class Fnn:
    """Feed-forward log-amplitude: u_k = W_k f(u_{k-1}) + b_k, psi = exp(u_K).

    The activation also acts on the +-1 inputs (a fixed rescaling to +-0.8);
    the final affine output is used directly as log psi.
    """

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or not weights:
            raise ValueError("need one weight matrix and one bias vector per layer")
        self.weights = [np.asarray(w, dtype=np.complex128) for w in weights]
        self.biases = [np.asarray(b, dtype=np.complex128) for b in biases]
        sizes = [self.weights[0].shape[1]]
        for w, b in zip(self.weights, self.biases):
            if w.shape != (b.shape[0], sizes[-1]):
                raise ValueError(f"layer shape mismatch: {w.shape} after width {sizes[-1]}")
            sizes.append(w.shape[0])
        if sizes[-1] != 1:
            raise ValueError(f"output layer must have exactly 1 node, got {sizes[-1]}")
        self.layer_sizes = tuple(sizes)

    @property
    def n_sites(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    @classmethod
    def near_uniform(cls, layer_sizes, noise_scale: float = 0.01, seed=0) -> "Fnn":
        sizes = list(layer_sizes)
        n_params = sum(sizes[k] * sizes[k - 1] + sizes[k] for k in range(1, len(sizes)))
        theta = _complex_noise(n_params, noise_scale, seed)
        weights, biases, pos = [], [], 0
        for k in range(1, len(sizes)):
            n_w = sizes[k] * sizes[k - 1]
            weights.append(theta[pos : pos + n_w].reshape(sizes[k], sizes[k - 1]))
            pos += n_w
            biases.append(theta[pos : pos + sizes[k]])
            pos += sizes[k]
        return cls(weights, biases)

    def _forward(self, s: np.ndarray):
        """Returns (pre-activations z_k for k=1..K, activated inputs h_{k-1} they saw)."""
        h = activation(s.astype(np.complex128))
        pre, fed = [], []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            fed.append(h)
            z = h @ w.T + b
            pre.append(z)
            if k < len(self.weights) - 1:
                h = activation(z)
        return pre, fed

    def log_amplitude(self, spins: np.ndarray):
        s, lead = _as_batch(spins, self.n_sites)
        pre, _ = self._forward(s)
        val = pre[-1][:, 0]
        return complex(val[0]) if lead == () else val.reshape(lead)

    def log_derivatives(self, spins: np.ndarray) -> np.ndarray:
        s, lead = _as_batch(spins, self.n_sites)
        pre, fed = self._forward(s)
        n = s.shape[0]
        grad = np.ones((n, 1), dtype=np.complex128)  # d log psi / d z_K
        pieces = [None] * len(self.weights)
        for k in range(len(self.weights) - 1, -1, -1):
            dw = grad[:, :, None] * fed[k][:, None, :]
            pieces[k] = np.concatenate([dw.reshape(n, -1), grad], axis=1)
            if k > 0:
                grad = (grad @ self.weights[k]) * activation_derivative(pre[k - 1])
        out = np.concatenate(pieces, axis=1)
        return out[0] if lead == () else out.reshape(*lead, self.n_params)

    def flat(self) -> np.ndarray:
        return np.concatenate(
            [np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)]
        )

    def with_flat(self, theta: np.ndarray) -> "Fnn":
        theta = np.asarray(theta, dtype=np.complex128)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape}")
        weights, biases, pos = [], [], 0
        for w, b in zip(self.weights, self.biases):
            weights.append(theta[pos : pos + w.size].reshape(w.shape))
            pos += w.size
            biases.append(theta[pos : pos + b.size])
            pos += b.size
        return Fnn(weights, biases)


def _complex_noise(n: int, scale: float, seed) -> np.ndarray:
    if scale < 0:
        raise ValueError("noise_scale must be >= 0")
    if scale == 0:
        return np.zeros(n, dtype=np.complex128)
    rng = np.random.default_rng(seed)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def save_params(path, ansatz) -> None:
    """Checkpoint to the flat binary format (text shape header + re/im float64 pairs)."""
    if isinstance(ansatz, Rbm):
        serialization.write_complex_vector(path, "rbm", (ansatz.n_sites, ansatz.n_hidden), ansatz.flat())
    elif isinstance(ansatz, Fnn):
        serialization.write_complex_vector(path, "fnn", ansatz.layer_sizes, ansatz.flat())
    else:
        raise ValueError(f"cannot checkpoint ansatz of type {type(ansatz).__name__}")


def load_params(path):
    kind, shape, theta = serialization.read_complex_vector(path)
    if kind == "rbm":
        L, H = shape
        return Rbm(np.zeros(L), np.zeros(H), np.zeros((H, L))).with_flat(theta)
    if kind == "fnn":
        return Fnn.near_uniform(shape, noise_scale=0.0).with_flat(theta)
    raise ValueError(f"unknown checkpoint kind {kind!r}")
