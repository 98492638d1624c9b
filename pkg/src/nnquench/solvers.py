"""Regularized stochastic-reconfiguration solvers.

All three routes solve (X X^dag + shift) delta = X f for the parameter update:
``solve_direct`` in parameter space, ``solve_minsr`` through the algebraically
identical sample-space system X (X^dag X + shift)^-1 f, and ``solve_kfac`` on
one disjoint parameter block at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .ansatz import Fnn, Rbm
from .errors import ConfigError

LSTSQ_RCOND = 1e-12


@dataclass
class SolverDiagnostics:
    method: str
    condition: float
    residual: float
    fallback: bool


@dataclass
class SolverConfig:
    method: str = "direct"  # "direct" | "minsr" | "kfac"
    diag_shift: float = 1e-6
    kfac_partition: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if self.method not in ("direct", "minsr", "kfac"):
            raise ConfigError(f"unknown solver method {self.method!r}")
        if self.diag_shift < 0:
            raise ConfigError("diag_shift must be >= 0")
        if self.method == "kfac" and self.kfac_partition is None:
            raise ConfigError("kfac solver needs a parameter partition")


def _relative_residual(x: np.ndarray, shift: float, delta: np.ndarray, b: np.ndarray) -> float:
    lhs = x @ (x.conj().T @ delta) + shift * delta
    scale = np.linalg.norm(b)
    return float(np.linalg.norm(lhs - b) / scale) if scale > 0 else 0.0


def _refined_cho_solve(a: np.ndarray, lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cholesky solve plus one iterative-refinement step; recovers the digits
    lost to conditioning (error ~ (eps * cond)^2 instead of eps * cond)."""
    y = scipy.linalg.cho_solve((lower, True), b, check_finite=False)
    return y + scipy.linalg.cho_solve((lower, True), b - a @ y, check_finite=False)


def solve_direct(x: np.ndarray, f: np.ndarray, diag_shift: float) -> tuple[np.ndarray, SolverDiagnostics]:
    """delta = (X X^dag + shift)^-1 X f; shift = 0 falls back to least squares.

    The shift = 0 route solves X^dag delta = f by SVD with relative rank
    cutoff 1e-12, which equals pinv(X X^dag) X f on the retained subspace.
    For shift > 0 and fewer samples than parameters, the Cholesky solution is
    projected back onto range(X): the exact solution lives there, while the
    orthogonal complement only amplifies matrix-formation noise by 1/shift.
    """
    if diag_shift < 0:
        raise ConfigError("diag_shift must be >= 0")
    b = x @ f
    if diag_shift == 0.0:
        delta, _, rank, sing = np.linalg.lstsq(x.conj().T, f, rcond=LSTSQ_RCOND)
        cond = float(sing[0] / sing[rank - 1]) if rank > 0 else np.inf
        diag = SolverDiagnostics("direct", cond, _relative_residual(x, 0.0, delta, b), False)
        return delta, diag
    s = x @ x.conj().T
    idx = np.arange(s.shape[0])
    s[idx, idx] += diag_shift
    fallback = False
    try:
        lower = np.linalg.cholesky(s)
        delta = _refined_cho_solve(s, lower, b)
        d = s.diagonal().real
        cond = float(d.max() / d.min())  # cheap diagonal proxy, exact only in fallback
    except np.linalg.LinAlgError:
        fallback = True
        evals, evecs = np.linalg.eigh(s)
        keep = evals > evals[-1] * LSTSQ_RCOND
        delta = evecs[:, keep] @ ((evecs[:, keep].conj().T @ b) / evals[keep])
        cond = float(evals[-1] / evals[keep].min())
    if x.shape[1] < x.shape[0]:
        q, _ = scipy.linalg.qr(x, mode="economic", check_finite=False)
        delta = q @ (q.conj().T @ delta)
    return delta, SolverDiagnostics("direct", cond, _relative_residual(x, diag_shift, delta, b), fallback)


def solve_minsr(x: np.ndarray, f: np.ndarray, diag_shift: float) -> tuple[np.ndarray, SolverDiagnostics]:
    """Sample-space route delta = X (X^dag X + shift)^-1 f; needs shift > 0."""
    if diag_shift <= 0:
        raise ConfigError("minsr requires diag_shift > 0 for the sample-space identity")
    g = x.conj().T @ x
    idx = np.arange(g.shape[0])
    g[idx, idx] += diag_shift
    fallback = False
    try:
        lower = np.linalg.cholesky(g)
        y = _refined_cho_solve(g, lower, f)
        d = g.diagonal().real
        cond = float(d.max() / d.min())
    except np.linalg.LinAlgError:
        fallback = True
        evals, evecs = np.linalg.eigh(g)
        y = evecs @ ((evecs.conj().T @ f) / evals)
        cond = float(evals[-1] / evals[0])
    delta = x @ y
    return delta, SolverDiagnostics("minsr", cond, _relative_residual(x, diag_shift, delta, x @ f), fallback)


def kfac_partition(ansatz, blocks_per_layer) -> tuple[np.ndarray, ...]:
    """Disjoint parameter-index blocks aligned with the network layers.

    Fnn: one entry of blocks_per_layer per weight layer; each layer's output
    nodes are split into that many contiguous ranges, and a block holds the
    weight rows plus biases of its range.  Rbm: the three groups (visible
    biases | hidden biases | weights), each split into the requested count.
    """
    blocks_per_layer = tuple(int(b) for b in blocks_per_layer)
    if any(b < 1 for b in blocks_per_layer):
        raise ConfigError("every layer needs at least one block")
    if isinstance(ansatz, Fnn):
        if len(blocks_per_layer) != len(ansatz.weights):
            raise ConfigError(
                f"got {len(blocks_per_layer)} block counts for {len(ansatz.weights)} weight layers"
            )
        blocks, pos = [], 0
        for k, (w, b) in enumerate(zip(ansatz.weights, ansatz.biases)):
            n_out, n_in = w.shape
            w_off, b_off = pos, pos + w.size
            for rows in np.array_split(np.arange(n_out), blocks_per_layer[k]):
                if rows.size == 0:
                    raise ConfigError(f"layer {k + 1} has fewer output nodes than blocks")
                w_idx = (w_off + rows[:, None] * n_in + np.arange(n_in)[None, :]).ravel()
                blocks.append(np.concatenate([w_idx, b_off + rows]))
            pos += w.size + b.size
        return tuple(blocks)
    if isinstance(ansatz, Rbm):
        if len(blocks_per_layer) != 3:
            raise ConfigError("rbm partition takes 3 block counts: (visible, hidden, weights)")
        L, H = ansatz.n_sites, ansatz.n_hidden
        groups = [np.arange(L), L + np.arange(H), L + H + np.arange(H * L)]
        blocks = []
        for grp, count in zip(groups, blocks_per_layer):
            for part in np.array_split(grp, count):
                if part.size == 0:
                    raise ConfigError("a parameter group has fewer entries than blocks")
                blocks.append(part)
        return tuple(blocks)
    raise ConfigError(f"no partition rule for ansatz type {type(ansatz).__name__}")


def validate_partition(partition, n_params: int) -> None:
    """Reject overlapping or incomplete partitions."""
    seen = np.concatenate([np.asarray(b, dtype=np.int64) for b in partition]) if partition else np.array([], dtype=np.int64)
    if seen.size != n_params or np.unique(seen).size != n_params or seen.min(initial=0) < 0 or seen.max(initial=-1) >= n_params:
        raise ConfigError("partition must cover every parameter index exactly once")


def solve_kfac(
    x: np.ndarray, f: np.ndarray, diag_shift: float, partition, block_index: int
) -> tuple[np.ndarray, SolverDiagnostics]:
    """Solve the SR system restricted to one parameter block; zeros elsewhere."""
    if not 0 <= block_index < len(partition):
        raise ConfigError(f"block index {block_index} outside 0..{len(partition) - 1}")
    rows = np.asarray(partition[block_index], dtype=np.int64)
    delta_block, diag = solve_direct(x[rows, :], f, diag_shift)
    delta = np.zeros(x.shape[0], dtype=np.complex128)
    delta[rows] = delta_block
    return delta, SolverDiagnostics("kfac", diag.condition, diag.residual, diag.fallback)


def solve_kfac_sweep(
    x: np.ndarray, f: np.ndarray, diag_shift: float, partition
) -> tuple[np.ndarray, SolverDiagnostics]:
    """One pass over all blocks against the same (X, f); block updates are
    disjoint so the sweep is their sum."""
    validate_partition(partition, x.shape[0])
    delta = np.zeros(x.shape[0], dtype=np.complex128)
    cond, residual, fallback = 0.0, 0.0, False
    for i in range(len(partition)):
        d, diag = solve_kfac(x, f, diag_shift, partition, i)
        delta += d
        cond = max(cond, diag.condition)
        residual = max(residual, diag.residual)
        fallback = fallback or diag.fallback
    return delta, SolverDiagnostics("kfac", cond, residual, fallback)


def solve(config: SolverConfig, x: np.ndarray, f: np.ndarray) -> tuple[np.ndarray, SolverDiagnostics]:
    """Dispatch on the configured method."""
    if config.method == "direct":
        return solve_direct(x, f, config.diag_shift)
    if config.method == "minsr":
        return solve_minsr(x, f, config.diag_shift)
    return solve_kfac_sweep(x, f, config.diag_shift, config.kfac_partition)
