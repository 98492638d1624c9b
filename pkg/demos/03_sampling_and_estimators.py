"""Metropolis sampling versus exact enumeration, and the estimator stack.

Run with:  python demos/03_sampling_and_estimators.py
"""

import numpy as np

from nnquench import (
    Rbm,
    build_model,
    build_x_matrix,
    configuration_index,
    expectation_energy,
    expectation_sigma_x,
    full_summation,
    metropolis_sample,
    nnqs_to_dense,
    tvmc_force,
)

L = 6
rbm = Rbm.near_uniform(L, 12, noise_scale=0.15, seed=11)
model = build_model(L, 1.0, 0.5, 0.5)

exact = full_summation(rbm)
print(f"full summation: {exact.n} configurations, weights sum to {exact.weights.sum():.12f}")

mc = metropolis_sample(rbm, n_samples=50_000, n_chains=16, seed=3)
counts = np.bincount(configuration_index(mc.configurations), minlength=2**L)
tvd = 0.5 * np.sum(np.abs(counts / mc.n - np.abs(nnqs_to_dense(rbm)) ** 2))
print(f"Metropolis with {mc.n} samples: total-variation distance to |psi|^2 = {tvd:.4f}")

e_full = expectation_energy(exact, rbm, model)
e_mc = expectation_energy(mc, rbm, model)
print(f"energy: full summation {e_full.real:+.6f}, Monte Carlo {e_mc.real:+.6f}")
print("mid-chain <sigma^x>:", expectation_sigma_x(exact, rbm, L // 2).real)

# the geometric tensor comes from the centered auxiliary matrix: S = X X^dag
x = build_x_matrix(exact, rbm)
s = x @ x.conj().T
print(f"X is {x.shape}, S is {s.shape}, smallest eigenvalue {np.linalg.eigvalsh(s).min():.2e}")
fv = tvmc_force(exact, rbm, model)
print("force norm |F| =", np.linalg.norm(fv.force))
