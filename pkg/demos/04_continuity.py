"""Probability conservation along a split-step evolution.

The density should obey d rho/dt + d J/dx = 0 with J = (hbar/m) Im(conj(psi) psi').
The residual shrinks as the time step is refined.
"""
import math

from fisherq import EvolutionConfig, GridSpec, continuity_residual, gaussian
from fisherq.continuity import evolve

grid = GridSpec.centered(40.0, 1024)
psi = gaussian(grid, p0=1.0)

for dt in (4e-3, 2e-3, 1e-3, 5e-4):
    res = continuity_residual(psi, EvolutionConfig("free", dt=dt, steps=200))
    print(f"dt={dt:.0e}: residual {res.residual:.3e} (|d rho/dt| {res.rate_norm:.3e})")

# In a harmonic trap a coherent packet returns after one period.

period = 2 * math.pi
steps = 4000
moved = evolve(gaussian(grid, x0=2.0), EvolutionConfig("harmonic", dt=period / steps, steps=steps))
overlap = abs((moved.amplitudes.conj() @ gaussian(grid, x0=2.0).amplitudes) * grid.cell)
print(f"overlap with the start after one period: {overlap:.10f}")
