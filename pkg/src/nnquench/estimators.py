"""Monte Carlo / full-summation estimators: expectations, local energies, the
centered auxiliary matrix X (so S = X X^dag is the geometric tensor), gradient
forces, and the per-block temporal-overlap machinery.

All amplitude ratios are formed from log-amplitude differences, never raw
amplitudes, so large systems cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import SampleSet
from .spin_model import (
    TiltedIsingModel,
    TrotterBlock,
    configuration_index,
    connected_elements,
    diagonal_energy,
    enumerate_configurations,
)


def local_energy(params, model: TiltedIsingModel, spins: np.ndarray) -> complex:
    """E_loc(x) = sum_y <y|H|x> psi(y)/psi(x), via the sparse connected row."""
    log_x = params.log_amplitude(spins)
    total = 0.0 + 0.0j
    for y, element in connected_elements(model, spins):
        total += element * np.exp(params.log_amplitude(y) - log_x)
    return total


def local_energies(
    params, model: TiltedIsingModel, configs: np.ndarray, log_amps: np.ndarray | None = None
) -> np.ndarray:
    """Vectorized E_loc over a batch of configurations (one flip per site)."""
    configs = np.asarray(configs, dtype=np.int8)
    n, L = configs.shape
    if log_amps is None:
        log_amps = params.log_amplitude(configs)
    e = diagonal_energy(model, configs).astype(np.complex128)
    if model.h_x != 0.0:
        flipped = np.repeat(configs[:, None, :], L, axis=1)
        idx = np.arange(L)
        flipped[:, idx, idx] = -flipped[:, idx, idx]
        log_flip = params.log_amplitude(flipped.reshape(n * L, L)).reshape(n, L)
        with np.errstate(over="ignore", invalid="ignore"):
            e += -model.h_x * np.sum(np.exp(log_flip - log_amps[:, None]), axis=1)
    return e


def expectation_sigma_z(samples: SampleSet, site: int) -> float:
    """<sigma^z_site> (1-based site), a diagonal observable."""
    return float(samples.weights @ samples.configurations[:, site - 1])


def expectation_sigma_x(samples: SampleSet, params, site: int) -> complex:
    """<sigma^x_site> via the local estimator psi(flip_site x)/psi(x)."""
    flipped = samples.configurations.copy()
    flipped[:, site - 1] = -flipped[:, site - 1]
    ratios = np.exp(params.log_amplitude(flipped) - samples.log_amplitudes)
    return complex(samples.weights @ ratios)


def expectation_energy(samples: SampleSet, params, model: TiltedIsingModel) -> complex:
    return complex(samples.weights @ local_energies(params, model, samples.configurations, samples.log_amplitudes))


def expectation(kind: str, samples: SampleSet, params=None, model=None, site: int | None = None):
    """Weighted sample mean of a diagonal or sparse-local observable."""
    if samples.n == 0:
        raise ValueError("cannot estimate from an empty sample set")
    if kind == "sigma_z":
        return expectation_sigma_z(samples, site)
    if kind == "sigma_x":
        return expectation_sigma_x(samples, params, site)
    if kind == "energy":
        return expectation_energy(samples, params, model)
    raise ValueError(f"unknown observable kind {kind!r}")


def build_x_matrix(samples: SampleSet, params) -> np.ndarray:
    """Centered, conjugated, sqrt-weighted log-derivative matrix (N_p x N_s).

    Column k is sqrt(w_k) (O(x_k)^* - <O>^*) with the weighted mean, so that
    X X^dag reproduces the covariance form of the geometric tensor for both
    Monte Carlo (w = 1/N_s) and full-summation (w = P(x)) weights.
    """
    derivs = params.log_derivatives(samples.configurations)  # (N_s, N_p)
    mean = samples.weights @ derivs
    centered = (derivs - mean).conj()
    return (np.sqrt(samples.weights)[:, None] * centered).T


@dataclass
class ForceVector:
    """Gradient force F = X f together with its sample-space factor f."""

    f: np.ndarray
    force: np.ndarray
    x_matrix: np.ndarray
    mean_energy: complex


def tvmc_force(samples: SampleSet, params, model: TiltedIsingModel, x_matrix: np.ndarray | None = None) -> ForceVector:
    """Energy gradient force F_k = <E_loc O_k^*> - <E_loc><O_k^*> as X f."""
    if samples.n == 0:
        raise ValueError("cannot estimate from an empty sample set")
    e = local_energies(params, model, samples.configurations, samples.log_amplitudes)
    mean = complex(samples.weights @ e)
    f = np.sqrt(samples.weights) * (e - mean)
    x = build_x_matrix(samples, params) if x_matrix is None else x_matrix
    return ForceVector(f=f, force=x @ f, x_matrix=x, mean_energy=mean)


def local_overlap(
    block: TrotterBlock,
    numer_params,
    denom_params,
    configs: np.ndarray,
    dagger: bool = False,
    numer_log: np.ndarray | None = None,
    denom_log: np.ndarray | None = None,
) -> np.ndarray:
    """Local temporal overlap sum_x' U_{x,x'} psi_num(x')/psi_den(x) per config.

    x' runs over the 2^span configurations differing from x only inside the
    block; dagger=True uses U^dag instead.  `numer_log`, if given, must hold
    the numerator log-amplitudes on exactly that variant grid (n, 2^span).
    """
    configs = np.asarray(configs, dtype=np.int8)
    n, L = configs.shape
    lo = block.start - 1
    hi = lo + block.span
    sub_index = configuration_index(configs[:, lo:hi])
    if numer_log is None:
        numer_log = block_variant_log_amplitudes(block, numer_params, configs)
    if denom_log is None:
        denom_log = denom_params.log_amplitude(configs)
    u = block.unitary.conj().T if dagger else block.unitary
    rows = u[sub_index, :]
    # a wildly off candidate state can overflow the ratios; the resulting
    # inf/nan estimate is the caller's rejection signal, not an error here
    with np.errstate(over="ignore", invalid="ignore"):
        return np.sum(rows * np.exp(numer_log - denom_log[:, None]), axis=1)


def block_variant_log_amplitudes(block: TrotterBlock, params, configs: np.ndarray) -> np.ndarray:
    """log psi on the (n, 2^span) grid of block-interior variants of each config."""
    configs = np.asarray(configs, dtype=np.int8)
    n, L = configs.shape
    lo = block.start - 1
    patterns = enumerate_configurations(block.span)
    variants = np.repeat(configs[:, None, :], patterns.shape[0], axis=1)
    variants[:, :, lo : lo + block.span] = patterns[None, :, :]
    return params.log_amplitude(variants.reshape(-1, L)).reshape(n, patterns.shape[0])


@dataclass
class OverlapEstimate:
    """Squared-overlap estimate and the infidelity-descent force for psi_t'.

    ``overlap`` estimates |<psi_t'|U|psi_t>|^2 / (<psi_t'|psi_t'><psi_t|psi_t>)
    and is real up to sampling noise.  ``f`` is signed so that force = X f is
    the gradient of the infidelity 1 - overlap with respect to the conjugate
    parameters of psi_t'; a plain descent step is then theta - gamma * S^-1 F.
    """

    overlap: complex
    f: np.ndarray
    force: np.ndarray
    x_matrix: np.ndarray


def overlap_and_force(
    psi_t_samples: SampleSet,
    psi_tp_samples: SampleSet,
    psi_t_params,
    psi_tp_params,
    block: TrotterBlock,
    x_matrix: np.ndarray | None = None,
    forward_numer_log: np.ndarray | None = None,
) -> OverlapEstimate:
    """Estimate the block overlap C^U and its SR force from two sample sets.

    psi_t_samples must be drawn from |psi_t|^2 and psi_tp_samples from
    |psi_t'|^2.  `forward_numer_log` optionally caches psi_t's log-amplitudes
    on the block variants of psi_tp_samples (they are constant within a block
    under full summation).
    """
    if psi_t_samples.n == 0 or psi_tp_samples.n == 0:
        raise ValueError("cannot estimate from an empty sample set")
    back = local_overlap(
        block,
        psi_tp_params,
        psi_t_params,
        psi_t_samples.configurations,
        dagger=True,
        denom_log=psi_t_samples.log_amplitudes,
    )
    with np.errstate(over="ignore", invalid="ignore"):
        mean_back = complex(psi_t_samples.weights @ back)
        fwd = local_overlap(
            block,
            psi_t_params,
            psi_tp_params,
            psi_tp_samples.configurations,
            numer_log=forward_numer_log,
            denom_log=psi_tp_samples.log_amplitudes,
        )
        local = fwd * mean_back
        overlap = complex(psi_tp_samples.weights @ local)
        f = np.sqrt(psi_tp_samples.weights) * (overlap - local)
        x = build_x_matrix(psi_tp_samples, psi_tp_params) if x_matrix is None else x_matrix
        return OverlapEstimate(overlap=overlap, f=f, force=x @ f, x_matrix=x)
