"""Split-step Schrodinger evolution and the continuity residual of the classical momentum flow."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InstabilityError, MaskDominatedError, PreconditionError, TruncationError
from .grid import WaveFunction, boundary_mass, density_of, laplacian, to_momentum, to_position
from .nonclassical import classical_momentum

POTENTIALS = ("free", "harmonic")
NORM_DRIFT_LIMIT = 1e-8
MASK_COVERAGE = 1e-3
STATIONARY_TOL = 1e-5


@dataclass(frozen=True)
class EvolutionConfig:
    potential: str = "free"
    mass: float = 1.0
    omega: float = 1.0
    dt: float = 1e-3
    steps: int = 1000

    def __post_init__(self):
        if self.potential not in POTENTIALS:
            raise PreconditionError(f"potential must be one of {POTENTIALS}")
        if not self.dt > 0:
            raise PreconditionError("dt must be positive")
        if self.steps < 0 or int(self.steps) != self.steps:
            raise PreconditionError("steps must be a nonnegative integer")
        if not self.mass > 0:
            raise PreconditionError("mass must be positive")

    @property
    def duration(self) -> float:
        return self.dt * self.steps


def _potential(psi: WaveFunction, config: EvolutionConfig) -> np.ndarray:
    x = psi.grid.coords()[0]
    if config.potential == "harmonic":
        return 0.5 * config.mass * config.omega ** 2 * x ** 2
    return np.zeros_like(x)


def _kinetic(psi: WaveFunction, config: EvolutionConfig) -> np.ndarray:
    """Kinetic energy per wavenumber in FFT order."""
    k = psi.grid.wavenumbers()[0]
    return (psi.grid.hbar * k) ** 2 / (2 * config.mass)


def _check_stability(psi: WaveFunction, config: EvolutionConfig) -> None:
    spectrum = np.abs(np.fft.fft(psi.amplitudes)) ** 2
    populated = spectrum > 1e-12 * spectrum.max()
    phase = config.dt * _kinetic(psi, config)[populated].max() / psi.grid.hbar
    if phase >= math.pi / 4:
        raise PreconditionError(f"kinetic phase per step {phase:.3f} exceeds pi/4; reduce dt")


class _Stepper:
    def __init__(self, psi: WaveFunction, config: EvolutionConfig):
        hbar = psi.grid.hbar
        self.config = config
        self.kick_angle = _potential(psi, config) * config.dt / (2 * hbar)
        self.drift_angle = _kinetic(psi, config) * config.dt / hbar

    def step(self, amps: np.ndarray, sign: float = 1.0) -> np.ndarray:
        kick = np.exp(-1j * sign * self.kick_angle)
        amps = kick * amps
        amps = np.fft.ifft(np.fft.fft(amps) * np.exp(-1j * sign * self.drift_angle))
        return kick * amps

    def central_pair(self, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``psi(t+dt) + psi(t-dt)`` and ``psi(t+dt) - psi(t-dt)``, the latter without cancellation."""
        c, s = np.cos(self.kick_angle), np.sin(self.kick_angle)
        cos_k, sin_k = np.cos(self.drift_angle), np.sin(self.drift_angle)
        big_c = lambda f: np.fft.ifft(np.fft.fft(f) * cos_k)  # noqa: E731
        big_s = lambda f: np.fft.ifft(np.fft.fft(f) * sin_k)  # noqa: E731
        ca, sa = c * amps, s * amps
        diff = -2j * (s * big_c(ca) + c * big_s(ca) + c * big_c(sa) - s * big_s(sa))
        return self.step(amps, 1.0) + self.step(amps, -1.0), diff


def evolve(psi: WaveFunction, config: EvolutionConfig) -> WaveFunction:
    """Strang split-step evolution (half kick, drift, half kick) for ``config.steps`` steps."""
    psi = to_position(psi)
    if psi.ndim != 1:
        raise ValueError("evolve() handles one-dimensional states")
    if config.steps == 0:
        return psi
    _check_stability(psi, config)
    stepper = _Stepper(psi, config)
    amps = psi.amplitudes
    for _ in range(config.steps):
        amps = stepper.step(amps)
    norm = float(np.sum(np.abs(amps) ** 2) * psi.grid.cell)
    if abs(norm - 1.0) > NORM_DRIFT_LIMIT:
        raise InstabilityError(f"norm drifted to {norm!r}")
    out = WaveFunction(psi.grid, amps)
    edge = boundary_mass(density_of(out))
    if edge > NORM_DRIFT_LIMIT:
        raise TruncationError(f"evolved state reaches the grid edge ({edge:.1e} of the mass)")
    return out


def energy(psi: WaveFunction, config: EvolutionConfig) -> float:
    """Expectation of ``P^2/2m + V``."""
    psi = to_position(psi)
    phi = to_momentum(psi)
    p = phi.lattice.coords()[0]
    kinetic = np.sum(np.abs(phi.amplitudes) ** 2 * p ** 2) * phi.lattice.cell / (2 * config.mass)
    potential = np.sum(np.abs(psi.amplitudes) ** 2 * _potential(psi, config)) * psi.grid.cell
    return float(kinetic + potential)


class ContinuityResidual(NamedTuple):
    residual: float
    rate_norm: float
    flux_norm: float


def continuity_residual(psi: WaveFunction, config: EvolutionConfig) -> ContinuityResidual:
    """Relative L2 residual of ``dp/dt + d/dx(p P_cl / m)`` after evolving for ``config.steps``.

    The time derivative is the central difference over one step either side.
    When both terms vanish to within a small multiple of the natural scale
    ``|p| hbar / (m Var X)``, as for a stationary state, the residual is 0.
    """
    state = evolve(psi, config)
    grid = state.grid
    pcl = classical_momentum(state)
    if pcl.masked_mass > MASK_COVERAGE:
        raise MaskDominatedError(f"{pcl.masked_mass:.2%} of the probability is masked; need <= 0.1%")
    density = np.abs(state.amplitudes) ** 2
    x = grid.coords()[0]
    mean = np.sum(density * x) * grid.cell
    var = np.sum(density * (x - mean) ** 2) * grid.cell
    # p P_cl / m = (hbar/m) Im(conj(psi) psi'), whose derivative is (hbar/m) Im(conj(psi) psi'')
    amps = state.amplitudes
    divergence = grid.hbar * (np.conj(amps) * laplacian(amps, grid)).imag / config.mass
    _check_stability(state, config)
    total, diff = _Stepper(state, config).central_pair(state.amplitudes)
    rate = (diff * np.conj(total)).real / (2 * config.dt)

    norm = lambda f: math.sqrt(float(np.sum(f ** 2) * grid.cell))  # noqa: E731
    rate_norm, flux_norm = norm(rate), norm(divergence)
    scale = norm(density) * grid.hbar / (config.mass * var)
    if max(rate_norm, flux_norm) < STATIONARY_TOL * scale:
        return ContinuityResidual(0.0, rate_norm, flux_norm)
    residual = norm(rate + divergence) / (flux_norm if flux_norm > 0 else rate_norm)
    return ContinuityResidual(residual, rate_norm, flux_norm)
