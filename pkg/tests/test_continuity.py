import math

import numpy as np
import pytest

from fisherq import (
    EvolutionConfig,
    GridSpec,
    coherent,
    continuity_residual,
    density_of,
    evolve,
    gaussian,
    ho_eigenstate,
    moments,
)
from fisherq.continuity import energy
from fisherq.errors import PreconditionError, TruncationError
from fisherq.reports import continuity_report, refine_state


@pytest.fixture
def free_grid():
    return GridSpec.centered(40.0, 1024)


def free_packet(x, t, sigma=1.0, x0=0.0, p0=0.0):
    """Exact free evolution of a Gaussian packet (hbar = m = 1)."""
    s = 1 + 1j * t / (2 * sigma ** 2)
    u = x - x0 - p0 * t
    return ((2 * math.pi * sigma ** 2) ** -0.25 / np.sqrt(s)
            * np.exp(-u ** 2 / (4 * sigma ** 2 * s) + 1j * p0 * (x - x0 - p0 * t / 2)))


class TestEvolve:
    def test_free_spreading(self, free_grid):
        out = evolve(gaussian(free_grid), EvolutionConfig("free", dt=1e-3, steps=1000))
        assert abs(moments(density_of(out))[1][0, 0] - 1.25) < 1e-10

    def test_matches_analytic_packet(self, free_grid):
        psi = gaussian(free_grid, p0=1.0)
        out = evolve(psi, EvolutionConfig("free", dt=1e-3, steps=1000))
        exact = free_packet(free_grid.coords()[0], 1.0, p0=1.0)
        assert np.abs(out.amplitudes - exact).max() < 1e-6

    def test_coherent_period(self):
        g = GridSpec.centered(20.0, 1024)
        psi = coherent(g, x0=2.0, p0=-1.0)
        steps = 2000
        out = evolve(psi, EvolutionConfig("harmonic", dt=2 * math.pi / steps, steps=steps))
        overlap = abs(np.vdot(psi.amplitudes, out.amplitudes) * g.cell)
        assert overlap > 1 - 1e-6

    def test_energy_conserved(self):
        g = GridSpec.centered(20.0, 1024)
        psi = coherent(g, x0=2.0, p0=1.0)
        config = EvolutionConfig("harmonic", dt=1e-4, steps=3000)
        assert abs(energy(evolve(psi, config), config) - energy(psi, config)) < 1e-8

    def test_norm_preserved(self, free_grid):
        out = evolve(gaussian(free_grid, p0=1.0), EvolutionConfig(dt=1e-3, steps=500))
        assert abs(np.sum(np.abs(out.amplitudes) ** 2) * free_grid.cell - 1) < 1e-10

    def test_zero_steps(self, free_grid):
        psi = gaussian(free_grid)
        assert evolve(psi, EvolutionConfig(steps=0)) is psi

    def test_leaving_the_grid(self):
        g = GridSpec.centered(10.0, 512)
        with pytest.raises(TruncationError):
            evolve(gaussian(g, p0=1.0), EvolutionConfig(dt=1e-2, steps=500))

    def test_unstable_step(self, free_grid):
        with pytest.raises(PreconditionError):
            evolve(gaussian(free_grid, sigma=0.3), EvolutionConfig(dt=1.0, steps=1))

    @pytest.mark.parametrize("kwargs", [dict(potential="quartic"), dict(dt=0.0), dict(steps=-1),
                                        dict(mass=0.0)])
    def test_config_rejected(self, kwargs):
        with pytest.raises(PreconditionError):
            EvolutionConfig(**kwargs)


class TestContinuity:
    def test_free_packet(self, free_grid):
        res = continuity_residual(gaussian(free_grid, p0=1.0), EvolutionConfig(dt=1e-3, steps=1000))
        assert res.residual < 1e-4

    def test_stationary_state(self, line):
        res = continuity_residual(ho_eigenstate(line, 0), EvolutionConfig("harmonic", dt=1e-3, steps=100))
        assert res.residual == 0.0

    def test_harmonic_coherent(self):
        g = GridSpec.centered(20.0, 1024)
        res = continuity_residual(coherent(g, x0=2.0), EvolutionConfig("harmonic", dt=1e-3, steps=500))
        assert res.residual < 1e-4

    def test_refinement_is_second_order(self, free_grid):
        report = continuity_report(gaussian(free_grid, p0=1.0), EvolutionConfig(dt=1e-3, steps=1000))
        # the split-step central difference has error ratio 4(1 - O(dt^2)) under halving
        assert abs(report["refinement_ratio"] - 4) < 1e-3
        assert report["refined_residual"] < report["residual"]

    def test_refined_state_is_same_function(self, free_grid):
        psi = gaussian(free_grid, x0=0.5, p0=1.0)
        fine = refine_state(psi)
        assert fine.grid.shape == (2048,)
        np.testing.assert_allclose(fine.amplitudes[::2], psi.amplitudes, atol=1e-12)
