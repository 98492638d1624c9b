"""The two variational wave functions and their analytic derivatives.

Run with:  python demos/02_wavefunctions.py
"""

import numpy as np

from nnquench import Fnn, Rbm, activation

L = 6
rbm = Rbm.near_uniform(L, n_hidden=5 * L, noise_scale=0.05, seed=1)
fnn = Fnn.near_uniform([L, 4 * L, 3 * L, 1], noise_scale=0.05, seed=2)
print(f"RBM: {rbm.n_params} parameters   FNN {fnn.layer_sizes}: {fnn.n_params} parameters")

x = np.array([1, -1, 1, 1, -1, 1], dtype=np.int8)
print("log psi RBM:", rbm.log_amplitude(x))
print("log psi FNN:", fnn.log_amplitude(x))
print("activation at +-1 rescales the inputs to", activation(1.0))

# analytic holomorphic derivatives vs a central finite difference
for name, net in (("RBM", rbm), ("FNN", fnn)):
    analytic = net.log_derivatives(x)
    theta = net.flat()
    h = 1e-6
    fd = np.empty(4, dtype=complex)
    for m in range(4):
        up, dn = theta.copy(), theta.copy()
        up[m] += h
        dn[m] -= h
        fd[m] = (net.with_flat(up).log_amplitude(x) - net.with_flat(dn).log_amplitude(x)) / (2 * h)
    print(f"{name}: max |analytic - fd| over first 4 parameters:", np.max(np.abs(analytic[:4] - fd)))

# parameters round-trip through a single flat complex vector
assert np.array_equal(fnn.with_flat(fnn.flat()).flat(), fnn.flat())
print("flatten/unflatten round-trips exactly")
