"""Dense state-vector reference for small chains: exact evolution by full
eigendecomposition and the figures of merit used to score a variational run
(exact infidelity, its running integral, amplitude ratios and phase distances
between ranked configurations).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import serialization
from .errors import ResourceError
from .spin_model import (
    TiltedIsingModel,
    TrotterSchedule,
    embed_operator,
    enumerate_configurations,
    configuration_index,
    _SX,
    _SZ,
)

DENSE_EVOLVE_MAX_SITES = 14
DENSE_STATE_MAX_SITES = 20
AMPLITUDE_LOG_OVERFLOW = 700.0


def dense_hamiltonian(model: TiltedIsingModel) -> np.ndarray:
    """Assemble the full 2^L x 2^L matrix directly from Pauli operators."""
    if model.L > DENSE_EVOLVE_MAX_SITES:
        raise ResourceError(f"dense Hamiltonian refused for L={model.L} > {DENSE_EVOLVE_MAX_SITES}")
    dim = 2**model.L
    h = np.zeros((dim, dim), dtype=np.complex128)
    for l in range(1, model.L):
        h += model.J * embed_operator(np.kron(_SZ, _SZ), model.L, l)
    for l in range(1, model.L + 1):
        h -= model.h_x * embed_operator(_SX, model.L, l)
        h -= model.h_z * embed_operator(_SZ, model.L, l)
    return h


def uniform_state(L: int) -> np.ndarray:
    """The normalized equal-amplitude product state (all spins along +x)."""
    return np.full(2**L, 2.0 ** (-L / 2.0), dtype=np.complex128)


def nnqs_to_dense(params) -> np.ndarray:
    """Normalized dense amplitudes of an ansatz, exponentiated after shifting
    by max Re(log psi) to avoid overflow."""
    L = params.n_sites
    if L > DENSE_STATE_MAX_SITES:
        raise ResourceError(f"dense state refused for L={L} > {DENSE_STATE_MAX_SITES}")
    log_amp = params.log_amplitude(enumerate_configurations(L))
    amp = np.exp(log_amp - np.max(log_amp.real))
    return amp / np.linalg.norm(amp)


class ExactEvolution:
    """Caches the eigendecomposition of H so many times t are cheap."""

    def __init__(self, model: TiltedIsingModel):
        self.model = model
        self.evals, self.evecs = np.linalg.eigh(dense_hamiltonian(model))

    def evolve(self, psi0: np.ndarray, t: float) -> np.ndarray:
        coeff = self.evecs.conj().T @ psi0
        return self.evecs @ (np.exp(-1j * self.evals * t) * coeff)


def exact_evolve(model: TiltedIsingModel, psi0: np.ndarray, t: float) -> np.ndarray:
    """e^{ -i H t } psi0 by full eigendecomposition (guarded at L <= 14)."""
    return ExactEvolution(model).evolve(np.asarray(psi0, dtype=np.complex128), t)


def evolve_with_schedule(psi0: np.ndarray, schedule: TrotterSchedule, L: int) -> np.ndarray:
    """Apply the embedded block unitaries of one schedule pass to a dense state."""
    psi = np.asarray(psi0, dtype=np.complex128)
    for blk in schedule.blocks:
        psi = embed_operator(blk.unitary, L, blk.start) @ psi
    return psi


def state_infidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|1 - |<a|b>|^2 / (<a|a><b|b>)|, invariant under scale and phase of either."""
    overlap = np.vdot(a, b)
    return float(abs(1.0 - (abs(overlap) ** 2) / (np.vdot(a, a).real * np.vdot(b, b).real)))


def exact_infidelity(params, reference: np.ndarray) -> float:
    """Infidelity of the ansatz state against a dense reference state."""
    return state_infidelity(nnqs_to_dense(params), reference)


def integrate_series(values, dt: float) -> np.ndarray:
    """Running trapezoidal integral on a uniform grid; first entry is 0."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return v.copy()
    steps = dt * 0.5 * (v[1:] + v[:-1])
    return np.concatenate([[0.0], np.cumsum(steps)])


def ranked_configurations(state: np.ndarray, n_max: int) -> np.ndarray:
    """Configurations sorted by probability, most probable first.

    Ties break toward the smaller basis index, so the ordering is
    deterministic even for degenerate states.
    """
    dim = state.shape[0]
    if n_max > dim:
        raise ValueError(f"requested {n_max} ranks from a {dim}-dimensional state")
    L = int(round(np.log2(dim)))
    prob = np.abs(state) ** 2
    order = np.lexsort((np.arange(dim), -prob))[:n_max]
    return enumerate_configurations(L)[order]


def amplitude_ratio_and_phase_distance(params, top_config: np.ndarray, other_config: np.ndarray) -> tuple[float, float]:
    """(A, D): magnitude ratio |psi(top)/psi(other)| and wrapped phase distance.

    A log-magnitude gap beyond exp overflow is reported as inf rather than
    raising.  D lies in [0, pi].
    """
    log_top = params.log_amplitude(top_config)
    log_other = params.log_amplitude(other_config)
    gap = (log_top - log_other).real
    ratio = np.inf if gap > AMPLITUDE_LOG_OVERFLOW else float(np.exp(gap))
    arg_top = np.angle(np.exp(1j * log_top.imag))
    arg_other = np.angle(np.exp(1j * log_other.imag))
    d = abs(arg_top - arg_other)
    return ratio, float(min(d, 2.0 * np.pi - d))


@dataclass
class MeritSeries:
    """Per-time figures of merit for one evolution run."""

    times: np.ndarray
    exact_infidelity: np.ndarray
    integrated_infidelity: np.ndarray
    accumulated_error: np.ndarray
    amplitude_ratio: dict[int, np.ndarray] = field(default_factory=dict)
    phase_distance: dict[int, np.ndarray] = field(default_factory=dict)


def save_dense_state(path, state: np.ndarray) -> None:
    """Export to the flat binary complex-vector format shared with checkpoints."""
    L = int(round(np.log2(state.shape[0])))
    serialization.write_complex_vector(path, "dense", (L,), state)


def load_dense_state(path) -> np.ndarray:
    kind, shape, values = serialization.read_complex_vector(path)
    if kind != "dense":
        raise ValueError(f"expected a dense-state file, found kind {kind!r}")
    return values
