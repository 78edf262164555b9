import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fisherq import (
    MOMENTUM,
    POSITION,
    Density,
    GridSpec,
    StateEnsemble,
    WaveFunction,
    density_of,
    ensemble_density,
    gaussian,
    gaussian_nd,
    gradient,
    ho_eigenstate,
    laplacian,
    moments,
    random_state,
    superposition,
    to_momentum,
    to_position,
)
from fisherq.errors import (
    NormalizationError,
    RepresentationError,
    TruncationWarning,
    WraparoundWarning,
)
from fisherq.grid import boundary_mass, fourier_forward, fourier_inverse


class TestGridSpec:
    def test_spacing_and_points(self):
        g = GridSpec.line(-2.0, 2.0, 8)
        assert g.spacing == (0.5,)
        np.testing.assert_allclose(g.coords()[0], [-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5])

    @pytest.mark.parametrize("lo,hi,n", [(1.0, 1.0, 16), (2.0, -2.0, 16), (-1.0, 1.0, 4)])
    def test_rejects_bad_axes(self, lo, hi, n):
        with pytest.raises(ValueError):
            GridSpec.line(lo, hi, n)

    def test_conjugate_lattice(self):
        g = GridSpec.centered(5.0, 64, hbar=2.0)
        p = g.conjugate()
        assert p.shape == g.shape
        assert math.isclose(p.spacing[0], 2 * math.pi * 2.0 / (64 * g.spacing[0]))
        assert p.coords()[0][32] == 0.0  # centred on zero
        assert p.hbar == 2.0


class TestFourier:
    def test_gaussian_width_transform(self, line):
        psi = gaussian(line, sigma=1 / math.sqrt(2))
        _, cov = moments(density_of(to_momentum(psi)))
        assert abs(cov[0, 0] - 0.5) < 1e-10

    def test_shift_theorem(self, line):
        p0 = 8 * line.conjugate().spacing[0]  # commensurate with the momentum lattice
        plain = to_momentum(gaussian(line))
        boosted = to_momentum(gaussian(line, p0=p0))
        shifted = np.roll(np.abs(plain.amplitudes), 8)
        np.testing.assert_allclose(np.abs(boosted.amplitudes), shifted, atol=1e-12)

    @pytest.mark.parametrize("n", [0, 1, 2, 5])
    def test_hermite_functions_self_dual(self, n):
        g = GridSpec.centered(math.sqrt(math.pi * 1024 / 2), 1024)  # spacing equals momentum spacing
        psi = ho_eigenstate(g, n)
        phi = to_momentum(psi)
        np.testing.assert_allclose(np.abs(phi.amplitudes) ** 2, np.abs(psi.amplitudes) ** 2, atol=1e-12)

    def test_round_trip(self, small_line):
        psi = random_state(small_line, 7, 0.5)
        back = to_position(to_momentum(psi))
        assert np.abs(back.amplitudes - psi.amplitudes).max() < 1e-10

    def test_double_transform_is_parity(self):
        g = GridSpec.centered(math.sqrt(math.pi * 256 / 2), 256)  # self-dual lattice
        psi = gaussian(g, x0=1.5, p0=0.7, sigma=1.0)
        twice = fourier_forward(g, fourier_forward(g, psi.amplitudes))
        # on a symmetric lattice x -> -x maps index j to (N - j) mod N
        flipped = np.roll(psi.amplitudes[::-1], 1)
        assert np.abs(twice - flipped).max() < 1e-10

    def test_inverse_matches_forward(self, small_line):
        psi = random_state(small_line, 3, 0.5)
        phi = fourier_forward(small_line, psi.amplitudes)
        assert np.abs(fourier_inverse(small_line, phi) - psi.amplitudes).max() < 1e-12

    def test_momentum_requires_normalized(self, line):
        with pytest.raises(NormalizationError):
            WaveFunction(line, 2 * gaussian(line).amplitudes)

    def test_spectral_kinetic_matches_gradient(self, small_line):
        psi = random_state(small_line, 11, 0.5)
        phi = to_momentum(psi)
        p = small_line.conjugate().coords()[0]
        spectral = np.sum(np.abs(phi.amplitudes) ** 2 * p ** 2) * small_line.conjugate().cell
        (d,) = gradient(psi.amplitudes, small_line)
        direct = np.sum(np.abs(d) ** 2) * small_line.cell
        assert abs(spectral - direct) < 1e-8 * direct

    def test_nd_transform_of_product(self, plane):
        psi = gaussian_nd(plane, cov=np.diag([1.0, 0.25]))
        _, cov = moments(density_of(to_momentum(psi)))
        np.testing.assert_allclose(cov, np.diag([0.25, 1.0]), atol=1e-10)


@given(st.integers(0, 10_000))
def test_parseval(seed):
    g = GridSpec.centered(10.0, 512)
    psi = random_state(g, seed, 0.5)
    phi = to_momentum(psi)
    norm_p = np.sum(np.abs(phi.amplitudes) ** 2) * g.conjugate().cell
    assert abs(norm_p - 1.0) < 1e-10


class TestDensity:
    def test_phase_invariance(self, line):
        psi = gaussian(line, p0=0.3)
        rotated = WaveFunction(line, np.exp(0.7j) * psi.amplitudes)
        np.testing.assert_allclose(density_of(psi).values, density_of(rotated).values, rtol=1e-14)

    def test_gaussian_variance(self, line):
        mean, cov = moments(density_of(gaussian(line)))
        assert abs(mean[0]) < 1e-8 and abs(cov[0, 0] - 1) < 1e-8

    def test_bimodal_normalised(self):
        g = GridSpec.centered(16.0, 2048)
        cat = superposition([1, 1], [gaussian(g, x0=-3), gaussian(g, x0=3)])
        d = density_of(cat)
        assert abs(np.sum(d.values) * g.cell - 1) < 1e-12
        assert d.values[np.argmin(np.abs(g.coords()[0]))] < 0.1 * d.values.max()

    def test_rejects_negative(self, line):
        vals = np.full(line.shape, 1 / 24)
        vals[3] = -1e-3
        with pytest.raises(ValueError):
            Density(line, vals)

    def test_representation_tag_checked(self, line):
        with pytest.raises(RepresentationError):
            Density(line, np.full(line.shape, 1 / 24), "phase")


class TestEnsembleDensity:
    def test_single_member(self, line):
        psi = gaussian(line, x0=1)
        ens = StateEnsemble(((1.0, psi),))
        np.testing.assert_allclose(ensemble_density(ens).values, density_of(psi).values)

    def test_mixture_variance(self):
        g = GridSpec.centered(16.0, 2048)
        ens = StateEnsemble.uniform([gaussian(g, x0=-2), gaussian(g, x0=2)])
        _, cov = moments(ensemble_density(ens))
        assert abs(cov[0, 0] - 5) < 1e-8

    def test_idempotent(self, line):
        psi = gaussian(line, p0=1)
        ens = StateEnsemble.uniform([psi, psi])
        np.testing.assert_allclose(ensemble_density(ens).values, density_of(psi).values, atol=1e-15)

    def test_mixed_representations(self, line):
        psi = gaussian(line)
        ens = StateEnsemble.uniform([psi, to_momentum(psi)])
        with pytest.raises(RepresentationError):
            ensemble_density(ens)
        # an explicit representation converts every member
        assert ensemble_density(ens, MOMENTUM).representation == MOMENTUM

    def test_weights_validated(self, line):
        with pytest.raises(ValueError):
            StateEnsemble(((0.7, gaussian(line)), (0.7, gaussian(line))))


class TestMoments:
    def test_translation(self, line):
        a = 1.25
        m0, c0 = moments(density_of(gaussian(line)))
        m1, c1 = moments(density_of(gaussian(line, x0=a)))
        assert abs(m1[0] - m0[0] - a) < 1e-10
        assert abs(c1[0, 0] - c0[0, 0]) < 1e-10

    def test_product_covariance(self):
        a = GridSpec.centered(20.0, 256).axes[0]
        g = GridSpec((a, a))
        _, cov = moments(density_of(gaussian_nd(g, cov=np.diag([1.0, 4.0]))))
        np.testing.assert_allclose(cov, np.diag([1.0, 4.0]), atol=1e-8)

    def test_truncation_warning(self):
        g = GridSpec.centered(3.0, 256)
        x = g.coords()[0]
        d = Density.from_values(g, np.exp(-x ** 2 / 8))
        assert boundary_mass(d) > 1e-6
        with pytest.warns(TruncationWarning):
            moments(d)


class TestGradient:
    def test_plane_wave(self):
        g = GridSpec.line(0.0, 2 * math.pi, 64)
        x = g.coords()[0]
        (d,) = gradient(np.exp(3j * x), g)
        np.testing.assert_allclose(d, 3j * np.exp(3j * x), atol=1e-12)

    def test_gaussian(self, line):
        x = line.coords()[0]
        (d,) = gradient(np.exp(-x ** 2 / 2), line)
        np.testing.assert_allclose(d, -x * np.exp(-x ** 2 / 2), atol=1e-8)

    def test_constant(self, line):
        (d,) = gradient(np.full(line.shape, 3.0), line)
        assert np.abs(d).max() < 1e-12

    def test_real_stays_real(self, line):
        x = line.coords()[0]
        (d,) = gradient(np.exp(-x ** 2) * np.cos(x), line)
        assert not np.iscomplexobj(d)

    def test_wraparound_warning(self, line):
        with pytest.warns(WraparoundWarning):
            gradient(line.coords()[0], line)

    def test_fd4_cross_check(self, line):
        x = line.coords()[0]
        f = np.exp(-x ** 2 / 2)
        (spec,) = gradient(f, line)
        (fd,) = gradient(f, line, method="fd4")
        assert np.abs(spec - fd).max() < 1e-6

    def test_laplacian(self, line):
        x = line.coords()[0]
        f = np.exp(-x ** 2 / 2)
        np.testing.assert_allclose(laplacian(f, line), (x ** 2 - 1) * f, atol=1e-8)

    def test_partial_derivatives(self, plane):
        x, y = plane.mesh()
        f = np.exp(-(x ** 2 + 2 * y ** 2) / 2)
        dx, dy = gradient(f, plane)
        np.testing.assert_allclose(dx, -x * f, atol=1e-8)
        np.testing.assert_allclose(dy, -2 * y * f, atol=1e-8)

    def test_unknown_method(self, line):
        with pytest.raises(ValueError):
            gradient(np.zeros(line.shape), line, method="euler")


def test_momentum_representation_lattice(line):
    phi = to_momentum(gaussian(line))
    assert phi.representation == MOMENTUM
    assert phi.lattice == line.conjugate()
    assert to_position(phi).representation == POSITION
