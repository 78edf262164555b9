import math

import numpy as np
import pytest

from fisherq import (
    Density,
    DiffusionConfig,
    GridSpec,
    StateEnsemble,
    anisotropic_rate_check,
    coherent,
    debruijn_report,
    density_of,
    diffuse,
    entropy_trajectory,
    gaussian,
    gaussian_nd,
    ho_eigenstate,
    joint_robustness,
    marginals_of,
    moments,
    quantum_phase_space_diffuse,
    thermal_ho_densities,
)
from fisherq.diffusion import (
    default_times,
    has_interior_nodes,
    phase_space_entropies,
    richardson,
    trajectory_csv,
    trajectory_times,
)
from fisherq.errors import PreconditionError, TruncationError


@pytest.fixture
def wide():
    return GridSpec.centered(20.0, 2048)


@pytest.fixture
def wide_plane():
    a = GridSpec.centered(20.0, 256).axes[0]
    return GridSpec((a, a))


def _rotation(theta):
    return np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])


class TestDiffuse:
    def test_zero_time_is_identity(self, line):
        d = density_of(gaussian(line))
        np.testing.assert_array_equal(diffuse(d, 1.0, 0.0).values, d.values)

    @pytest.mark.parametrize("gamma,t", [(1.0, 0.5), (0.3, 2.0)])
    def test_variance_growth(self, wide, gamma, t):
        d = density_of(gaussian(wide, sigma=0.7))
        var = moments(diffuse(d, gamma, t))[1][0, 0]
        assert abs(var - (0.49 + 2 * gamma * t)) < 1e-10

    def test_semigroup(self, wide):
        d = density_of(ho_eigenstate(wide, 2))
        once = diffuse(d, 1.0, 0.7).values
        twice = diffuse(diffuse(d, 1.0, 0.3), 1.0, 0.4).values
        assert np.abs(once - twice).max() < 1e-10

    def test_matrix_rate(self, wide_plane):
        d = density_of(gaussian_nd(wide_plane))
        gamma = np.array([[1.0, 0.2], [0.2, 0.5]])
        cov = moments(diffuse(d, gamma, 0.5))[1]
        np.testing.assert_allclose(cov, np.eye(2) + gamma, atol=1e-8)

    def test_fills_nodes(self, line):
        d = density_of(ho_eigenstate(line, 1))
        centre = line.shape[0] // 2
        assert d.values[centre] < 1e-20
        assert diffuse(d, 1.0, 0.05).values[centre] > 1e-3

    def test_escape_raises(self):
        g = GridSpec.centered(10.0, 512)
        with pytest.raises(TruncationError):
            diffuse(density_of(gaussian(g)), 1.0, 5.0)

    def test_bad_inputs(self, line):
        d = density_of(gaussian(line))
        with pytest.raises(PreconditionError):
            diffuse(d, 1.0, -0.1)
        with pytest.raises(PreconditionError):
            diffuse(d, -1.0, 0.1)

    def test_phase_space_marginals(self, wide):
        psi = coherent(wide, x0=1.0, p0=-1.0)
        m = quantum_phase_space_diffuse(psi, DiffusionConfig(1.0, 1.0), 0.1)
        assert abs(moments(m.position)[1][0, 0] - 0.7) < 1e-10
        assert abs(moments(m.momentum)[1][0, 0] - 0.7) < 1e-10

    def test_momentum_untouched_by_position_rate(self, wide):
        psi = coherent(wide)
        m = quantum_phase_space_diffuse(psi, DiffusionConfig(1.0, 0.0), 0.3)
        np.testing.assert_array_equal(m.momentum.values, marginals_of(psi).momentum.values)


class TestConfig:
    @pytest.mark.parametrize("kwargs", [
        dict(gamma=0.0, sigma_rate=0.0),
        dict(gamma=math.nan),
        dict(gamma=np.array([[1.0, 2.0], [2.0, 1.0]])),
        dict(gamma=np.array([[1.0, 0.1], [0.0, 1.0]])),
        dict(times=(0.2, 0.1)),
        dict(times=()),
    ])
    def test_rejected(self, kwargs):
        with pytest.raises(PreconditionError):
            DiffusionConfig(**kwargs)

    def test_times_normalised(self):
        assert DiffusionConfig(times=[1e-3, 2e-3]).times == (1e-3, 2e-3)


class TestEntropyRate:
    def test_richardson_removes_powers(self):
        t = 1e-3 * 2.0 ** np.arange(6)
        values = 3.0 + 2 * t ** 0.5 - t + 5 * t ** 1.5
        assert abs(richardson(t, values)[-1] - 3.0) < 1e-10

    @pytest.mark.parametrize("rate", [1.0, 0.5])
    def test_gaussian(self, wide, rate):
        traj = entropy_trajectory(Density(wide, density_of(gaussian(wide)).values), rate)
        assert abs(traj.initial_rate - rate) < 1e-5 * rate

    def test_first_excited(self, line):
        d = Density(line, density_of(ho_eigenstate(line, 1)).values)
        assert has_interior_nodes(d)
        traj = entropy_trajectory(d, 1.0)
        assert abs(traj.initial_rate - 6) < 6e-3

    def test_ladder_respects_nodes(self, line):
        plain = default_times(density_of(gaussian(line)), 1.0)
        nodal = default_times(density_of(ho_eigenstate(line, 1)), 1.0)
        assert plain[0] == 1e-6 and nodal[0] > plain[0]

    def test_minimum_time(self, line):
        with pytest.raises(PreconditionError):
            entropy_trajectory(density_of(gaussian(line)), 1.0, times=[1e-8, 2e-8])

    def test_monotone(self, line):
        traj = entropy_trajectory(density_of(gaussian(line)), 1.0)
        assert np.all(np.diff(traj.entropies) > 0)


class TestDeBruijn:
    def test_coherent(self, wide):
        rep = debruijn_report(coherent(wide, x0=1.0, p0=0.5), DiffusionConfig(1.0, 1.0))
        assert rep.mismatch_x < 1e-5 and rep.mismatch_p < 1e-5
        assert abs(rep.j_r - 1) < 1e-9 and not rep.flagged

    def test_first_excited(self):
        # self-dual lattice: both marginals have a node and need equal resolution
        g = GridSpec.centered(math.sqrt(math.pi * 2048 / 2), 2048)
        rep = debruijn_report(ho_eigenstate(g, 1), DiffusionConfig(1.0, 1.0))
        assert abs(rep.f_x - 6) < 1e-8 and abs(rep.f_p - 6) < 1e-8
        assert rep.mismatch_x < 1e-2 and rep.mismatch_p < 1e-2
        assert abs(rep.j_r - 1 / 3) < 1e-8

    def test_thermal(self, wide):
        rep = debruijn_report(thermal_ho_densities(wide, 2.0), DiffusionConfig(0.5, 2.0))
        assert rep.mismatch_x < 1e-5 and rep.mismatch_p < 1e-5
        assert abs(rep.j_r - 1 / math.tanh(0.25)) < 1e-8

    def test_json_fields(self, wide):
        rep = debruijn_report(coherent(wide), DiffusionConfig(1.0, 1.0))
        assert tuple(rep.to_dict()) == ("f_x", "f_p", "rate_x", "rate_p", "mismatch_x",
                                        "mismatch_p", "j_r")
        assert "flagged" in rep.to_dict(extended=True)

    def test_needs_both_rates(self, wide):
        with pytest.raises(PreconditionError):
            debruijn_report(coherent(wide), DiffusionConfig(1.0, 0.0))


class TestAnisotropic:
    @pytest.mark.parametrize("gamma,expected", [
        (np.diag([1.0, 1.0]), 1.25),
        (np.diag([2.0, 1e-4]), 2.000025),
    ])
    def test_diagonal(self, wide_plane, gamma, expected):
        d = density_of(gaussian_nd(wide_plane, cov=np.diag([1.0, 4.0])))
        res = anisotropic_rate_check(d, gamma)
        assert abs(res.expected - expected) < 1e-8
        assert res.mismatch < 1e-4

    def test_rotation_covariance(self, wide_plane):
        r = _rotation(0.7)
        gamma = np.diag([1.5, 0.5])
        cov = np.diag([1.0, 2.0])
        base = anisotropic_rate_check(density_of(gaussian_nd(wide_plane, cov=cov)), gamma)
        turned = anisotropic_rate_check(density_of(gaussian_nd(wide_plane, cov=r @ cov @ r.T)),
                                        r @ gamma @ r.T)
        assert abs(base.expected - turned.expected) < 1e-8
        assert abs(base.rate - turned.rate) < 1e-4

    def test_singular_rejected(self, wide_plane):
        d = density_of(gaussian_nd(wide_plane))
        with pytest.raises(PreconditionError):
            anisotropic_rate_check(d, np.diag([1.0, 0.0]))


class TestRobustness:
    def test_coherent(self, wide):
        assert abs(joint_robustness(coherent(wide)) - 1) < 1e-9

    def test_first_excited(self, wide):
        assert abs(joint_robustness(ho_eigenstate(wide, 1)) - 1 / 3) < 1e-8

    def test_hot_thermal(self):
        g = GridSpec.centered(100.0, 8192)
        assert abs(joint_robustness(thermal_ho_densities(g, 100.0)) - 1 / math.tanh(1 / 200)) < 1e-6

    def test_mixture_more_robust(self, wide):
        ens = StateEnsemble.uniform([coherent(wide, x0=-1), coherent(wide, x0=1)])
        assert joint_robustness(ens) > 1


class TestTrajectoryExport:
    def test_rows_and_csv(self, wide):
        psi = coherent(wide)
        config = DiffusionConfig(1.0, 1.0)
        times = trajectory_times(psi, config)
        rows = phase_space_entropies(psi, config, times)
        assert rows.shape == (len(times), 3)
        text = trajectory_csv(rows, ["version: x"])
        lines = text.splitlines()
        assert lines[0] == "# version: x" and lines[1] == "t,S_x,S_p"
        assert float(lines[2].split(",")[0]) == times[0]

    def test_shared_ladder_start_not_repeated(self):
        # both marginals start at the 1e-6 floor; round-off must not double it
        g = GridSpec.centered(math.sqrt(math.pi * 2048 / 2), 2048)
        times = trajectory_times(gaussian(g), DiffusionConfig(1.0, 1.0))
        assert np.all(times[1:] / times[:-1] > 1 + 1e-9)
        assert times[0] == pytest.approx(1e-6)
