"""The three stochastic-reconfiguration solver routes.

Run with:  python demos/04_solvers.py
"""

import time

import numpy as np

from nnquench import Fnn, kfac_partition, solve_direct, solve_kfac_sweep, solve_minsr

rng = np.random.default_rng(0)

# direct (parameter-space) and minSR (sample-space) solve the same system
n_p, n_s = 2000, 300
x = (rng.standard_normal((n_p, n_s)) + 1j * rng.standard_normal((n_p, n_s))) / np.sqrt(n_s)
f = rng.standard_normal(n_s) + 1j * rng.standard_normal(n_s)

t0 = time.time()
d_direct, diag = solve_direct(x, f, 1e-6)
t_direct = time.time() - t0
t0 = time.time()
d_minsr, _ = solve_minsr(x, f, 1e-6)
t_minsr = time.time() - t0
gap = np.linalg.norm(d_direct - d_minsr) / np.linalg.norm(d_direct)
print(f"N_p={n_p}, N_s={n_s}")
print(f"direct: {t_direct*1e3:7.1f} ms   minSR: {t_minsr*1e3:7.1f} ms   relative gap {gap:.2e}")
print(f"direct solve residual {diag.residual:.2e}")

# K-FAC splits the parameters into layer-aligned blocks and inverts each alone
fnn = Fnn.near_uniform([40, 160, 120, 1], noise_scale=0.0)
partition = kfac_partition(fnn, (1, 3, 1))
print(f"\n40-site network: {fnn.n_params} parameters in {len(partition)} blocks:")
print("  block sizes:", [p.size for p in partition])

x_small = (rng.standard_normal((50, 40)) + 1j * rng.standard_normal((50, 40))) / np.sqrt(40)
f_small = rng.standard_normal(40) + 1j * rng.standard_normal(40)
two_blocks = (np.arange(25), np.arange(25, 50))
d_kfac, _ = solve_kfac_sweep(x_small, f_small, 1e-6, two_blocks)
d_full, _ = solve_direct(x_small, f_small, 1e-6)
print(
    "\nblocked vs joint solve on a toy instance: relative difference "
    f"{np.linalg.norm(d_kfac - d_full) / np.linalg.norm(d_full):.3f} (the approximation)"
)
