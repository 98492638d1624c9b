"""Time-evolution drivers.

Two routes propagate the variational parameters by dt: ``tvmc_rk4_step``
integrates the equation of motion d theta/dt = -i S^-1 F with classical RK4,
and ``ptvmc_step`` sweeps a Trotter schedule, minimizing the infidelity of
psi_t' against U_block psi_t for each block with stochastic-reconfiguration
updates.  ``prepare_initial_state`` fits an ansatz to the uniform product
state (the paramagnetic ground state for a field-only chain along +x).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PreparationError
from .estimators import overlap_and_force, block_variant_log_amplitudes, tvmc_force
from .oracle import DENSE_STATE_MAX_SITES, uniform_state, nnqs_to_dense, state_infidelity
from .sampling import SamplerConfig, draw_samples
from .solvers import SolverConfig, SolverDiagnostics, solve, solve_direct
from .spin_model import TiltedIsingModel, TrotterBlock, TrotterSchedule


@dataclass
class PtvmcOptions:
    """Per-block optimization settings; defaults follow the quench protocol."""

    epsilon: float = 1e-5
    max_steps: int = 1000
    learning_rate: float = 0.2
    decay_factor: float = 0.8
    decay_interval: int = 400
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    block_span: int = 6
    dt: float = 0.1

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epsilon <= 0 or self.max_steps < 1:
            raise ValueError("need learning_rate > 0, epsilon > 0 and max_steps >= 1")


def learning_rate_at(options: PtvmcOptions, step: int) -> float:
    """gamma(m) = gamma0 * decay^floor(m / interval); the counter restarts per block."""
    return options.learning_rate * options.decay_factor ** (step // options.decay_interval)


@dataclass
class BlockResult:
    start: int
    span: int
    infidelity: float  # last estimate, clamped at 0
    steps_used: int
    hit_max: bool
    solver: SolverDiagnostics | None


@dataclass
class StepResult:
    blocks: list[BlockResult]
    error_sum: float  # sum of per-block final infidelities for this step


BACKTRACK_LIMIT = 10
BACKTRACK_SLACK = 0.05  # reject a step only when the infidelity jumps by more


def ptvmc_block_optimize(
    psi_t,
    block: TrotterBlock,
    options: PtvmcOptions,
    seed_ctx: tuple[int, ...] = (),
    initial=None,
    stop_metric=None,
) -> tuple[object, BlockResult]:
    """Fit psi_t' to U_block psi_t by SR descent on the estimated infidelity.

    psi_t' starts from psi_t's parameters (warm start) unless `initial` is
    given.  Samples of psi_t are drawn once and reused for the whole block;
    psi_t' is resampled every optimization step.  Stops once the infidelity
    estimate (or `stop_metric(psi, estimate)` if given) drops to epsilon, or
    flags the block after max_steps updates.

    A step whose infidelity comes back non-finite or worse by more than
    BACKTRACK_SLACK is retried with a halved learning rate: with a small
    diagonal shift the natural-gradient step can overshoot along nearly flat
    directions of the tangent space, which would otherwise overflow the
    amplitude ratios.
    """
    t_samples = draw_samples(psi_t, options.sampler, (*seed_ctx, 0))
    psi = psi_t if initial is None else initial
    full = options.sampler.mode == "full"
    fwd_cache = None
    if full:
        # fixed within the block: psi_t on the block variants of the enumerated configs
        fwd_cache = block_variant_log_amplitudes(block, psi_t, t_samples.configurations)

    def evaluate(candidate, seed):
        tp_samples = draw_samples(candidate, options.sampler, seed)
        est = overlap_and_force(
            t_samples, tp_samples, psi_t, candidate, block, forward_numer_log=fwd_cache if full else None
        )
        infidelity = 1.0 - est.overlap.real
        stop_value = stop_metric(candidate, infidelity) if stop_metric else infidelity
        return est, infidelity, stop_value

    est, infidelity, stop_value = evaluate(psi, (*seed_ctx, 1, 0))
    diag = None
    for m in range(options.max_steps + 1):
        if stop_value <= options.epsilon:
            return psi, BlockResult(block.start, block.span, max(stop_value, 0.0), m, False, diag)
        if m == options.max_steps:
            break
        delta, diag = solve(options.solver, est.x_matrix, est.f)
        gamma = learning_rate_at(options, m)
        for attempt in range(BACKTRACK_LIMIT):
            trial = psi.with_flat(psi.flat() - gamma * delta)
            trial_eval = evaluate(trial, (*seed_ctx, 1, m + 1, attempt))
            if np.isfinite(trial_eval[1]) and trial_eval[1] <= infidelity + BACKTRACK_SLACK:
                break
            gamma *= 0.5
        if np.isfinite(trial_eval[1]):
            psi = trial
            est, infidelity, stop_value = trial_eval
    return psi, BlockResult(block.start, block.span, max(stop_value, 0.0), options.max_steps, True, diag)


def ptvmc_step(
    params, schedule: TrotterSchedule, options: PtvmcOptions, seed_ctx: tuple[int, ...] = ()
) -> tuple[object, StepResult]:
    """Advance by dt: optimize against every block of the schedule in order."""
    results = []
    for j, block in enumerate(schedule.blocks):
        params, res = ptvmc_block_optimize(params, block, options, (*seed_ctx, j))
        results.append(res)
    return params, StepResult(blocks=results, error_sum=float(sum(r.infidelity for r in results)))


def tvmc_derivative(params, model: TiltedIsingModel, samples, diag_shift: float = 0.0):
    """d theta/dt = -i (S + shift)^-1 F; shift = 0 uses the pseudo-inverse.

    A non-finite force (overflowing amplitude ratios after a runaway step)
    yields a zero derivative with the fallback flag set, so an unstable
    trajectory freezes visibly instead of crashing the linear algebra.
    """
    fv = tvmc_force(samples, params, model)
    if not (np.all(np.isfinite(fv.f)) and np.all(np.isfinite(fv.x_matrix))):
        zero = np.zeros(params.n_params, dtype=np.complex128)
        return zero, SolverDiagnostics("direct", np.inf, np.inf, True)
    delta, diag = solve_direct(fv.x_matrix, fv.f, diag_shift)
    return -1j * delta, diag


def tvmc_rk4_step(
    params,
    model: TiltedIsingModel,
    dt: float,
    sampler: SamplerConfig,
    diag_shift: float = 0.0,
    seed_ctx: tuple[int, ...] = (),
):
    """Classical fourth-order Runge-Kutta step with fresh samples per stage."""
    theta = params.flat()
    stage_at = [0.0, 0.5, 0.5, 1.0]
    ks, point, diag = [], params, None
    for stage, frac in enumerate(stage_at):
        if stage > 0:
            point = params.with_flat(theta + dt * frac * ks[-1])
        samples = draw_samples(point, sampler, (*seed_ctx, stage))
        k, diag = tvmc_derivative(point, model, samples, diag_shift)
        ks.append(k)
    new_theta = theta + (dt / 6.0) * (ks[0] + 2.0 * ks[1] + 2.0 * ks[2] + ks[3])
    if not np.all(np.isfinite(new_theta)):
        # runaway step: freeze rather than poison the remaining trajectory
        return params, SolverDiagnostics("direct", np.inf, np.inf, True)
    return params.with_flat(new_theta), diag


@dataclass
class FitOptions:
    """Settings for fitting the uniform initial state."""

    tolerance: float = 1e-8
    max_steps: int = 2000
    learning_rate: float = 0.2
    decay_factor: float = 0.8
    decay_interval: int = 400
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)


def _identity_block(span: int = 2) -> TrotterBlock:
    dim = 2**span
    return TrotterBlock(
        start=1,
        span=span,
        generator=np.zeros((dim, dim), dtype=np.complex128),
        unitary=np.eye(dim, dtype=np.complex128),
        duration=0.0,
    )


def prepare_initial_state(ansatz, options: FitOptions, seed_ctx: tuple[int, ...] = ()):
    """Fit the ansatz to the equal-amplitude product state by identity-block
    infidelity minimization.

    The reference psi_t is the same architecture with all parameters zero,
    which is exactly uniform.  Convergence is checked against the exact
    infidelity whenever the chain is small enough to enumerate, otherwise
    against the sampled estimate.  Raises PreparationError on failure.
    """
    L = ansatz.n_sites
    reference = ansatz.with_flat(np.zeros(ansatz.n_params, dtype=np.complex128))
    exact_check = L <= DENSE_STATE_MAX_SITES
    target = uniform_state(L) if exact_check else None

    def measured_infidelity(psi, estimate: float) -> float:
        if exact_check:
            return state_infidelity(nnqs_to_dense(psi), target)
        return max(estimate, 0.0)

    loop = PtvmcOptions(
        epsilon=options.tolerance,
        max_steps=options.max_steps,
        learning_rate=options.learning_rate,
        decay_factor=options.decay_factor,
        decay_interval=options.decay_interval,
        sampler=options.sampler,
        solver=options.solver,
    )
    psi, result = ptvmc_block_optimize(
        reference, _identity_block(), loop, seed_ctx, initial=ansatz, stop_metric=measured_infidelity
    )
    if result.hit_max and result.infidelity > options.tolerance:
        raise PreparationError("initial-state fit did not converge", result.infidelity)
    return psi
