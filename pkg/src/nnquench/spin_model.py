"""1D tilted Ising chain: sparse action on spin configurations, local bond terms,
dense block generators/unitaries, and symmetric second-order Trotter schedules.

Sites are numbered 1..L in documentation and public arguments; internally the
spin at site l is column l-1 of an int8 array with values in {-1, +1}.  Basis
index convention: site 1 is the most significant bit and spin +1 maps to bit 0,
so the all-up configuration is basis state 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ResourceError

HERMITICITY_TOL = 1e-12

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_ID = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class TiltedIsingModel:
    """Open chain H = J sum_l sz_l sz_{l+1} - sum_l (h_x sx_l + h_z sz_l)."""

    L: int
    J: float = 1.0
    h_x: float = 0.5
    h_z: float = 0.5

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"chain needs at least 2 sites, got L={self.L}")

    @property
    def n_bonds(self) -> int:
        return self.L - 1

    @property
    def boundary_weights(self) -> np.ndarray:
        """Per-site field weights: 1 at the two ends, 1/2 in the bulk."""
        n = np.full(self.L, 0.5)
        n[0] = n[-1] = 1.0
        return n


def build_model(L: int, J: float = 1.0, h_x: float = 0.5, h_z: float = 0.5) -> TiltedIsingModel:
    """Construct the chain model; raises ValueError for L < 2."""
    return TiltedIsingModel(L=L, J=J, h_x=h_x, h_z=h_z)


def enumerate_configurations(L: int) -> np.ndarray:
    """All 2^L spin configurations as an int8 array, ordered by basis index."""
    if L > 24:
        raise ResourceError(f"refusing to enumerate 2^{L} configurations")
    idx = np.arange(2**L, dtype=np.int64)
    bits = (idx[:, None] >> (L - 1 - np.arange(L))) & 1
    return (1 - 2 * bits).astype(np.int8)


def configuration_index(spins: np.ndarray) -> np.ndarray | int:
    """Basis index of one configuration or a batch (last axis = sites)."""
    spins = np.asarray(spins)
    L = spins.shape[-1]
    bits = ((1 - spins.astype(np.int64)) // 2)
    weights = 1 << (L - 1 - np.arange(L, dtype=np.int64))
    idx = bits @ weights
    return int(idx) if idx.ndim == 0 else idx


def diagonal_energy(model: TiltedIsingModel, spins: np.ndarray) -> np.ndarray | float:
    """<x|H|x> = J sum x_l x_{l+1} - h_z sum x_l, batched over leading axes."""
    s = np.asarray(spins, dtype=np.float64)
    zz = np.sum(s[..., :-1] * s[..., 1:], axis=-1)
    val = model.J * zz - model.h_z * np.sum(s, axis=-1)
    return float(val) if np.ndim(val) == 0 else val


def connected_elements(model: TiltedIsingModel, spins: np.ndarray) -> list[tuple[np.ndarray, complex]]:
    """Nonzero column of H through configuration x: [(y, <y|H|x>), ...].

    One diagonal entry, plus (when h_x != 0) one single-spin-flip entry per
    site with value -h_x.
    """
    x = np.asarray(spins, dtype=np.int8)
    if x.ndim != 1 or x.shape[0] != model.L:
        raise ValueError(f"expected a single length-{model.L} configuration")
    out = [(x.copy(), complex(diagonal_energy(model, x)))]
    if model.h_x != 0.0:
        for l in range(model.L):
            y = x.copy()
            y[l] = -y[l]
            out.append((y, complex(-model.h_x)))
    return out


def bond_term(model: TiltedIsingModel, l: int) -> np.ndarray:
    """Dense 4x4 bond Hamiltonian H_l on sites (l, l+1), 1-based l in 1..L-1."""
    if not 1 <= l <= model.L - 1:
        raise ValueError(f"bond index {l} outside 1..{model.L - 1}")
    n = model.boundary_weights
    h = model.J * np.kron(_SZ, _SZ)
    h -= model.h_x * (n[l - 1] * np.kron(_SX, _ID) + n[l] * np.kron(_ID, _SX))
    h -= model.h_z * (n[l - 1] * np.kron(_SZ, _ID) + n[l] * np.kron(_ID, _SZ))
    return h


def block_generator(model: TiltedIsingModel, start: int, span: int) -> np.ndarray:
    """Sum of the bond terms inside a block of `span` sites starting at `start`.

    Field weights are those of the full chain, so a block touching a chain end
    keeps weight 1 there while interior block edges keep their bulk 1/2.
    """
    if span < 2:
        raise ValueError(f"block span must be >= 2, got {span}")
    if start < 1 or start + span - 1 > model.L:
        raise ValueError(
            f"block [{start}, {start + span - 1}] exceeds chain of {model.L} sites"
        )
    dim = 2**span
    gen = np.zeros((dim, dim), dtype=np.complex128)
    for m in range(start, start + span - 1):
        gen += embed_operator(bond_term(model, m), span, m - start + 1)
    return gen


def block_unitary(generator: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i * generator * tau) via eigendecomposition of the Hermitian generator."""
    dev = np.max(np.abs(generator - generator.conj().T))
    if dev > HERMITICITY_TOL:
        raise NumericError(f"generator deviates from Hermitian by {dev:.2e}")
    evals, evecs = np.linalg.eigh(generator)
    phases = np.exp(-1j * evals * tau)
    return (evecs * phases) @ evecs.conj().T


@dataclass(frozen=True)
class TrotterBlock:
    """One local evolution factor acting on `span` sites starting at `start` (1-based)."""

    start: int
    span: int
    generator: np.ndarray
    unitary: np.ndarray
    duration: float


@dataclass(frozen=True)
class TrotterSchedule:
    """Blocks listed in application order (first entry acts on the state first)."""

    blocks: tuple[TrotterBlock, ...]
    dt: float


def trotter_schedule(model: TiltedIsingModel, span: int, dt: float) -> TrotterSchedule:
    """Symmetric second-order schedule: forward sweep at dt/2, then the reverse.

    Blocks tile the bonds left to right with stride span-1 so adjacent blocks
    share no bond; a final narrower block covers any remaining bonds.  Every
    bond accumulates a total duration of exactly dt.
    """
    if span > model.L:
        raise ValueError(f"block span {span} exceeds chain length {model.L}")
    forward = []
    start = 1
    while start <= model.L - 1:
        blk_span = min(span, model.L - start + 1)
        gen = block_generator(model, start, blk_span)
        forward.append(
            TrotterBlock(
                start=start,
                span=blk_span,
                generator=gen,
                unitary=block_unitary(gen, dt / 2.0),
                duration=dt / 2.0,
            )
        )
        start += blk_span - 1
    return TrotterSchedule(blocks=tuple(forward) + tuple(reversed(forward)), dt=dt)


def bond_durations(schedule: TrotterSchedule, L: int) -> np.ndarray:
    """Total evolution time accumulated by each of the L-1 bonds."""
    cover = np.zeros(L - 1)
    for blk in schedule.blocks:
        cover[blk.start - 1 : blk.start + blk.span - 2] += blk.duration
    return cover


def embed_operator(op: np.ndarray, L: int, start: int) -> np.ndarray:
    """Embed a 2^d x 2^d operator acting on sites start..start+d-1 into L sites."""
    d = int(round(np.log2(op.shape[0])))
    left = 2 ** (start - 1)
    right = 2 ** (L - start - d + 1)
    out = op
    if left > 1:
        out = np.kron(np.eye(left, dtype=np.complex128), out)
    if right > 1:
        out = np.kron(out, np.eye(right, dtype=np.complex128))
    return out
