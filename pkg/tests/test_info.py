import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fisherq import (
    Density,
    GridSpec,
    StateEnsemble,
    check_length_chain,
    cramer_rao_gap,
    density_of,
    ensemble_density,
    ensemble_information,
    entropy,
    fisher_information,
    fisher_matrix,
    gaussian,
    gaussian_nd,
    ho_eigenstate,
    random_state,
    to_momentum,
)
from fisherq.errors import SupportWarning
from fisherq.info import fisher_volume, signed_root

TWO_PI_E = 2 * math.pi * math.e


@pytest.fixture
def wide_plane():
    a = GridSpec.centered(20.0, 256).axes[0]
    return GridSpec((a, a))


class TestFisher:
    @pytest.mark.parametrize("sigma", [1.0, 2.0, 0.5])
    def test_gaussian(self, sigma):
        g = GridSpec.centered(20.0, 2048)
        assert abs(fisher_information(density_of(gaussian(g, sigma=sigma))) - sigma ** -2) < 1e-9

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_oscillator_levels(self, line, n):
        f = fisher_information(density_of(ho_eigenstate(line, n)))
        assert abs(f - (4 * n + 2)) < 1e-8

    def test_density_without_amplitude(self, line):
        # the signed root rebuilds the smooth amplitude across the node
        d = density_of(ho_eigenstate(line, 1))
        bare = Density(line, d.values)
        assert abs(fisher_information(bare) - 6) < 1e-6

    def test_signed_root_recovers_odd_state(self, line):
        psi = ho_eigenstate(line, 3).amplitudes.real
        root = signed_root(psi ** 2)
        assert min(np.abs(root - psi).max(), np.abs(root + psi).max()) < 1e-12

    def test_momentum_representation(self, line):
        d = density_of(to_momentum(gaussian(line, sigma=0.5)))
        assert abs(fisher_information(d) - 1) < 1e-8

    def test_product_matrix(self, wide_plane):
        f = fisher_matrix(density_of(gaussian_nd(wide_plane, cov=np.diag([1.0, 4.0]))))
        np.testing.assert_allclose(f, np.diag([1.0, 0.25]), atol=1e-9)

    def test_rotated_matrix(self, wide_plane):
        theta = 0.6
        r = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        cov0 = np.diag([1.0, 4.0])
        cov = r @ cov0 @ r.T
        f = fisher_matrix(density_of(gaussian_nd(wide_plane, cov=cov)))
        np.testing.assert_allclose(f, r @ np.linalg.inv(cov0) @ r.T, atol=1e-9)
        assert abs(fisher_volume(density_of(gaussian_nd(wide_plane, cov=cov))) - 2) < 1e-8

    @given(st.floats(-3, 3))
    def test_translation_invariant(self, a):
        g = GridSpec.centered(14.0, 1024)
        f0 = fisher_information(density_of(gaussian(g, sigma=0.7)))
        assert abs(fisher_information(density_of(gaussian(g, x0=a, sigma=0.7))) - f0) < 1e-9

    def test_disconnected_support_warns(self):
        g = GridSpec.centered(20.0, 2048)
        ens = StateEnsemble.uniform([gaussian(g, x0=-8, sigma=0.5), gaussian(g, x0=8, sigma=0.5)])
        with pytest.warns(SupportWarning):
            fisher_information(ensemble_density(ens))


class TestEntropy:
    def test_gaussian(self):
        g = GridSpec.centered(20.0, 2048)
        assert abs(entropy(density_of(gaussian(g))) - 0.5 * math.log(TWO_PI_E)) < 1e-10

    def test_uniform_box(self):
        g = GridSpec.centered(10.0, 2000)
        x = g.coords()[0]
        d = Density.from_values(g, ((x >= -1.5) & (x < 1.5)).astype(float))
        assert abs(math.exp(entropy(d)) - 3.0) < 1e-10

    @pytest.mark.parametrize("scale", [0.5, 2.0, 3.0])
    def test_scaling(self, scale):
        g = GridSpec.centered(30.0, 4096)
        s1 = entropy(density_of(gaussian(g, sigma=1.0)))
        s2 = entropy(density_of(gaussian(g, sigma=scale)))
        assert abs(s2 - s1 - math.log(scale)) < 1e-9


class TestLengthChain:
    def test_gaussian_saturates(self):
        g = GridSpec.centered(20.0, 2048)
        chain = check_length_chain(density_of(gaussian(g, sigma=1.3)))
        assert chain.holds
        assert abs(chain.rms_term - chain.ensemble) < 1e-8
        assert abs(chain.ensemble - chain.fisher_term) < 1e-8

    def test_plane_gaussian_saturates(self, wide_plane):
        chain = check_length_chain(density_of(gaussian_nd(wide_plane, cov=np.diag([1.0, 2.0]))))
        assert chain.holds and abs(chain.rms_term - chain.fisher_term) < 1e-7

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_oscillator_strict(self, line, n):
        chain = check_length_chain(density_of(ho_eigenstate(line, n)))
        assert chain.rms_term > chain.ensemble > chain.fisher_term

    def test_random_states(self, small_line):
        for seed in range(200):
            d = density_of(random_state(small_line, seed, 0.5))
            assert check_length_chain(d).holds, seed


class TestCramerRao:
    def test_gaussian_tight(self):
        g = GridSpec.centered(20.0, 2048)
        assert abs(cramer_rao_gap(density_of(gaussian(g, sigma=1.5))).gap) < 1e-9

    def test_first_excited(self, line):
        cr = cramer_rao_gap(density_of(ho_eigenstate(line, 1)))
        assert abs(cr.gap - 4 / 3) < 1e-8

    def test_plane(self, wide_plane):
        cr = cramer_rao_gap(density_of(gaussian_nd(wide_plane, cov=np.array([[1.0, 0.3], [0.3, 2.0]]))))
        assert abs(cr.gap) < 1e-8

    @given(st.integers(0, 10_000))
    def test_nonnegative(self, seed):
        g = GridSpec.centered(10.0, 512)
        assert cramer_rao_gap(density_of(random_state(g, seed, 0.5))).gap >= -1e-8


class TestEnsembleInformation:
    def test_two_separated_packets(self):
        g = GridSpec.centered(20.0, 2048)
        ens = StateEnsemble.uniform([gaussian(g, x0=-5), gaussian(g, x0=5)])
        res = ensemble_information(ens)
        assert abs(res.information - math.log(2)) < 1e-4
        assert abs(res.bound - math.log(math.sqrt(26))) < 1e-8
        assert res.slack > 0

    def test_identical_members(self, line):
        psi = gaussian(line, x0=1.0)
        res = ensemble_information(StateEnsemble.uniform([psi, psi]))
        assert abs(res.information) < 1e-12
