"""
Numerical helpers shared by the test modules.
"""

import numpy as np


def random_hermitian(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (g + g.conj().T) / 2


def random_density(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def pr_box(alpha=0, beta=0, gamma=0):
    """a ⊕ c = xz ⊕ αx ⊕ βz ⊕ γ, uniformly over the allowed pairs."""
    table = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for z in range(2):
            parity = (x * z + alpha * x + beta * z + gamma) % 2
            for a in range(2):
                table[x, z, a, (a + parity) % 2] = 0.5
    return table
