"""Configuration sampling from |psi|^2: Metropolis-Hastings chains and exact
full summation over all 2^L configurations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceError
from .spin_model import enumerate_configurations

FULL_SUMMATION_MAX_SITES = 20


@dataclass
class SampleSet:
    """Configurations with weights that sum to 1 and cached log-amplitudes.

    Monte Carlo mode: weights are 1/N_s each.  Full summation: the exact
    normalized probabilities of all 2^L distinct configurations.
    """

    configurations: np.ndarray
    weights: np.ndarray
    log_amplitudes: np.ndarray
    mode: str  # "monte-carlo" | "full-summation"

    @property
    def n(self) -> int:
        return self.configurations.shape[0]


@dataclass
class SamplerConfig:
    mode: str = "full"  # "full" | "metropolis"
    n_samples: int = 10_000
    n_chains: int = 16
    burn_in: int | None = None  # default: 10 L sweeps = 10 L^2 proposals
    thinning: int | None = None  # default: L proposals per kept sample
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("full", "metropolis"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        if self.mode == "metropolis" and (self.n_samples < 1 or self.n_chains < 1):
            raise ValueError("need n_samples >= 1 and n_chains >= 1")


def acceptance_probability(delta_log_amplitude) -> np.ndarray:
    """min(1, |psi'/psi|^2) from the log-amplitude difference."""
    return np.exp(np.minimum(0.0, 2.0 * np.real(delta_log_amplitude)))


def metropolis_sample(
    params,
    n_samples: int,
    n_chains: int = 16,
    burn_in: int | None = None,
    thinning: int | None = None,
    seed=0,
) -> SampleSet:
    """Single-spin-flip Metropolis sampling of |psi|^2, split across chains.

    Each chain owns an RNG stream derived from (seed, chain index), starts from
    a uniformly random configuration, discards `burn_in` proposals and then
    keeps one configuration every `thinning` proposals.  Results are merged in
    chain order, so output is bit-identical for fixed (seed, n_chains).
    """
    L = params.n_sites
    if burn_in is None:
        burn_in = 10 * L * L
    if thinning is None:
        thinning = L
    seed_key = list(seed) if isinstance(seed, (tuple, list)) else [seed]

    counts = [n_samples // n_chains + (1 if c < n_samples % n_chains else 0) for c in range(n_chains)]
    max_count = max(counts)
    total_steps = burn_in + max_count * thinning

    configs = np.empty((n_chains, L), dtype=np.int8)
    sites = np.empty((n_chains, total_steps), dtype=np.int64)
    unif = np.empty((n_chains, total_steps))
    for c in range(n_chains):
        rng = np.random.default_rng(seed_key + [c])
        configs[c] = (rng.integers(0, 2, size=L) * 2 - 1).astype(np.int8)
        sites[c] = rng.integers(0, L, size=total_steps)
        unif[c] = rng.random(total_steps)

    log_amp = np.atleast_1d(params.log_amplitude(configs))
    kept = [[] for _ in range(n_chains)]
    rows = np.arange(n_chains)
    for step in range(total_steps):
        flip = sites[:, step]
        proposed = configs.copy()
        proposed[rows, flip] = -proposed[rows, flip]
        new_log = np.atleast_1d(params.log_amplitude(proposed))
        accept = unif[:, step] < acceptance_probability(new_log - log_amp)
        configs[accept] = proposed[accept]
        log_amp = np.where(accept, new_log, log_amp)
        if step >= burn_in and (step - burn_in + 1) % thinning == 0:
            for c in range(n_chains):
                if len(kept[c]) < counts[c]:
                    kept[c].append((configs[c].copy(), log_amp[c]))

    all_configs = np.concatenate([np.stack([k[0] for k in kept[c]]) for c in range(n_chains) if kept[c]])
    all_logs = np.concatenate([np.array([k[1] for k in kept[c]]) for c in range(n_chains) if kept[c]])
    weights = np.full(n_samples, 1.0 / n_samples)
    return SampleSet(all_configs, weights, all_logs, mode="monte-carlo")


def full_summation(params) -> SampleSet:
    """All 2^L configurations with exact normalized probabilities."""
    L = params.n_sites
    if L > FULL_SUMMATION_MAX_SITES:
        raise ResourceError(f"full summation refused for L={L} > {FULL_SUMMATION_MAX_SITES}")
    configs = enumerate_configurations(L)
    log_amp = params.log_amplitude(configs)
    log_p = 2.0 * log_amp.real
    p = np.exp(log_p - np.max(log_p))  # overflow guard before normalization
    p /= p.sum()
    return SampleSet(configs, p, log_amp, mode="full-summation")


def draw_samples(params, config: SamplerConfig, seed_suffix=()) -> SampleSet:
    """Dispatch on the configured mode; seed_suffix extends the base seed stream."""
    if config.mode == "full":
        return full_summation(params)
    seed = [config.seed, *seed_suffix]
    return metropolis_sample(
        params,
        config.n_samples,
        n_chains=config.n_chains,
        burn_in=config.burn_in,
        thinning=config.thinning,
        seed=seed,
    )
