"""Shared test helpers.

BLAS pools are capped at one thread: the suite works on small matrices where
OpenBLAS spin-waiting costs far more than it saves.
"""

from __future__ import annotations

import numpy as np
import pytest

try:
    from threadpoolctl import threadpool_limits

    threadpool_limits(limits=1)
except ImportError:
    pass

from nnquench.spin_model import configuration_index


class LogTableAnsatz:
    """One complex parameter per configuration: log psi(x) = theta[index(x)].

    A complete parametrization of the whole Hilbert space, handy as an exactly
    expressive reference ansatz. Same duck interface as the package ansatze.
    """

    def __init__(self, table: np.ndarray):
        self.table = np.asarray(table, dtype=np.complex128)
        self.n_sites = int(round(np.log2(self.table.size)))
        if 2**self.n_sites != self.table.size:
            raise ValueError("table size must be a power of two")

    @property
    def n_params(self) -> int:
        return self.table.size

    @classmethod
    def from_dense(cls, state: np.ndarray) -> "LogTableAnsatz":
        state = np.asarray(state, dtype=np.complex128)
        if np.any(np.abs(state) == 0):
            raise ValueError("table ansatz needs nonzero amplitudes everywhere")
        return cls(np.log(state))

    def log_amplitude(self, spins):
        idx = configuration_index(spins)
        return self.table[idx]

    def log_derivatives(self, spins):
        idx = np.atleast_1d(configuration_index(spins))
        out = np.zeros((idx.size, self.n_params), dtype=np.complex128)
        out[np.arange(idx.size), idx] = 1.0
        spins = np.asarray(spins)
        return out[0] if spins.ndim == 1 else out.reshape(*spins.shape[:-1], self.n_params)

    def flat(self) -> np.ndarray:
        return self.table.copy()

    def with_flat(self, theta: np.ndarray) -> "LogTableAnsatz":
        return LogTableAnsatz(theta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
