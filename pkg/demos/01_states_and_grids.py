"""A tour of the grid layer: build states, move between position and momentum,
and read off basic moments.

Run with ``python3 demos/01_states_and_grids.py``.
"""
import math

import numpy as np

from fisherq import GridSpec, density_of, gaussian, ho_eigenstate, moments, random_state, to_momentum

# A grid on [-L, L) with N points.  Its momentum lattice is fixed by the extent,
# so widening the box refines momentum while adding points widens it.
grid = GridSpec.centered(12.0, 1024)
dual = grid.conjugate()
print(f"position spacing {grid.spacing[0]:.4f}, momentum spacing {dual.spacing[0]:.4f}")

# Minimum-uncertainty packet: the variances multiply to hbar^2 / 4.
psi = gaussian(grid, x0=1.0, p0=-0.5, sigma=0.8)
(mx,), cov_x = moments(density_of(psi))
(mp,), cov_p = moments(density_of(to_momentum(psi)))
print(f"<x> = {mx:.6f}, <p> = {mp:.6f}")
print(f"Var X * Var P = {cov_x[0, 0] * cov_p[0, 0]:.12f}  (hbar^2/4 = 0.25)")

# Oscillator levels spread as (n + 1/2) in both quadratures.
for n in range(4):
    phi = ho_eigenstate(grid, n)
    vx = moments(density_of(phi))[1][0, 0]
    vp = moments(density_of(to_momentum(phi)))[1][0, 0]
    print(f"n={n}: Var X = {vx:.6f}, Var P = {vp:.6f}, expected {n + 0.5}")

# Seeded random states are reproducible bit for bit.
a = random_state(grid, seed=4, smoothness=0.5)
b = random_state(grid, seed=4, smoothness=0.5)
print("same seed, same amplitudes:", np.array_equal(a.amplitudes, b.amplitudes))
print("norm:", np.sum(np.abs(a.amplitudes) ** 2) * grid.cell)
print("self-dual half-width for N=1024:", math.sqrt(math.pi * 1024 / 2))
