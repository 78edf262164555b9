"""Analytic test states: Gaussians, oscillator eigenstates, thermal marginals, random states."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DegenerateStateError, TruncationError
from .grid import (
    MOMENTUM,
    POSITION,
    Density,
    GridSpec,
    Marginals,
    WaveFunction,
)

# Widths of margin demanded between a state's bulk and the grid edge.
MARGIN_WIDTHS = 8.0


def _require_span(lower, upper, centre, width, what, lattice="position"):
    if centre - MARGIN_WIDTHS * width < lower or centre + MARGIN_WIDTHS * width > upper:
        raise TruncationError(
            f"{lattice} grid [{lower:g}, {upper:g}) is too narrow for {what} "
            f"(needs {MARGIN_WIDTHS:g} widths of {width:g} around {centre:g})"
        )


def gaussian(grid: GridSpec, x0: float = 0.0, p0: float = 0.0, sigma: float = 1.0,
             chirp: float = 0.0) -> WaveFunction:
    """Gaussian packet whose density has mean ``x0`` and standard deviation ``sigma``.

    ``chirp`` adds a quadratic phase ``chirp*(x-x0)**2/hbar``; the density is
    unchanged but the state is no longer minimum-uncertainty.
    """
    if grid.ndim != 1:
        raise ValueError("gaussian() builds 1-D states; use gaussian_nd for more axes")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    hbar = grid.hbar
    axis = grid.axes[0]
    _require_span(axis.lower, axis.upper, x0, sigma, f"a Gaussian of width {sigma:g}")
    paxis = grid.conjugate().axes[0]
    sigma_p = hbar / (2 * sigma) * math.sqrt(1 + (4 * chirp * sigma ** 2 / hbar) ** 2)
    _require_span(paxis.lower, paxis.upper, p0, sigma_p, "its momentum distribution", "momentum")
    x = axis.points
    u = x - x0
    amps = (2 * np.pi * sigma ** 2) ** -0.25 * np.exp(
        -u ** 2 / (4 * sigma ** 2) + 1j * (chirp * u ** 2 + p0 * x) / hbar
    )
    return WaveFunction.from_values(grid, amps)


def coherent(grid: GridSpec, x0: float = 0.0, p0: float = 0.0, mass: float = 1.0,
             omega: float = 1.0) -> WaveFunction:
    """Displaced oscillator ground state."""
    return gaussian(grid, x0, p0, math.sqrt(grid.hbar / (2 * mass * omega)))


def squeezed(grid: GridSpec, r: float, x0: float = 0.0, p0: float = 0.0, mass: float = 1.0,
             omega: float = 1.0) -> WaveFunction:
    """Position-squeezed vacuum: width ``exp(-r)`` times the ground-state width."""
    return gaussian(grid, x0, p0, math.sqrt(grid.hbar / (2 * mass * omega)) * math.exp(-r))


def gaussian_nd(grid: GridSpec, mean=None, cov=None, momentum=None) -> WaveFunction:
    """Gaussian wavefunction whose density is N(mean, cov), with mean momentum ``momentum``."""
    n = grid.ndim
    mean = np.zeros(n) if mean is None else np.asarray(mean, dtype=float)
    cov = np.eye(n) if cov is None else np.asarray(cov, dtype=float)
    momentum = np.zeros(n) if momentum is None else np.asarray(momentum, dtype=float)
    for i, a in enumerate(grid.axes):
        _require_span(a.lower, a.upper, mean[i], math.sqrt(cov[i, i]), f"axis {i} of the Gaussian")
    prec = np.linalg.inv(cov)
    xs = grid.mesh()
    u = [x - m for x, m in zip(xs, mean)]
    quad = sum(prec[i, j] * u[i] * u[j] for i in range(n) for j in range(n))
    phase = sum(p * x for p, x in zip(momentum, xs)) / grid.hbar
    return WaveFunction.from_values(grid, np.exp(-quad / 4 + 1j * phase))


def product_state(factors: Sequence[WaveFunction]) -> WaveFunction:
    """Tensor product of 1-D position-space states."""
    if any(f.ndim != 1 or f.representation != POSITION for f in factors):
        raise ValueError("product_state expects 1-D position-space factors")
    hbar = factors[0].grid.hbar
    grid = GridSpec(tuple(f.grid.axes[0] for f in factors), hbar)
    amps = factors[0].amplitudes
    for f in factors[1:]:
        amps = np.multiply.outer(amps, f.amplitudes)
    return WaveFunction.from_values(grid, amps)


def ho_eigenstate(grid: GridSpec, n: int, mass: float = 1.0, omega: float = 1.0) -> WaveFunction:
    """n-th harmonic-oscillator eigenfunction via the normalised Hermite-function recurrence."""
    if grid.ndim != 1:
        raise ValueError("ho_eigenstate() builds 1-D states")
    if n < 0 or int(n) != n:
        raise ValueError("n must be a nonnegative integer")
    n = int(n)
    hbar = grid.hbar
    length = math.sqrt(hbar / (mass * omega))
    turning = math.sqrt(2 * n + 1) * length
    axis = grid.axes[0]
    if axis.lower > -turning - MARGIN_WIDTHS * length or axis.upper < turning + MARGIN_WIDTHS * length:
        raise TruncationError(f"grid does not cover the turning points of level {n} plus margin")
    paxis = grid.conjugate().axes[0]
    p_turn = math.sqrt(2 * n + 1) * hbar / length
    if paxis.upper < p_turn + MARGIN_WIDTHS * hbar / length:
        raise TruncationError(f"momentum lattice cannot resolve level {n}; refine the grid")

    xi = axis.points / length
    prev = np.zeros_like(xi)
    cur = (mass * omega / (np.pi * hbar)) ** 0.25 * np.exp(-xi ** 2 / 2)
    for k in range(n):
        nxt = math.sqrt(2 / (k + 1)) * xi * cur - math.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
    return WaveFunction.from_values(grid, cur)


def superposition(coeffs: Sequence[complex], states: Sequence[WaveFunction]) -> WaveFunction:
    """Normalised linear combination of states on one grid."""
    if len(coeffs) != len(states) or not states:
        raise ValueError("need one coefficient per state")
    grid, rep = states[0].grid, states[0].representation
    if any(s.grid != grid or s.representation != rep for s in states):
        raise ValueError("superposed states must share a grid and representation")
    total = sum(complex(c) * s.amplitudes for c, s in zip(coeffs, states))
    norm = float(np.sum(np.abs(total) ** 2)) * states[0].lattice.cell
    if norm < 1e-24:
        raise DegenerateStateError("superposition has zero norm")
    return WaveFunction.from_values(grid, total, rep)


def thermal_variances(temperature: float, mass: float = 1.0, omega: float = 1.0,
                      hbar: float = 1.0) -> tuple[float, float]:
    """Position and momentum variances of the oscillator thermal state (k_B = 1)."""
    if temperature < 0:
        raise ValueError("temperature must be nonnegative")
    if temperature == 0:
        c = 1.0
    else:
        c = 1.0 / math.tanh(hbar * omega / (2 * temperature))
    return hbar / (2 * mass * omega) * c, hbar * mass * omega / 2 * c


def gaussian_density(grid: GridSpec, mean: float, var: float, representation: str = POSITION) -> Density:
    lat = grid.lattice(representation)
    a = lat.axes[0]
    _require_span(a.lower, a.upper, mean, math.sqrt(var), "a Gaussian density", representation)
    x = a.points
    return Density.from_values(grid, np.exp(-(x - mean) ** 2 / (2 * var)), representation)


def thermal_ho_densities(grid: GridSpec, temperature: float, mass: float = 1.0,
                         omega: float = 1.0) -> Marginals:
    """Gaussian position and momentum marginals of an oscillator thermal state."""
    var_x, var_p = thermal_variances(temperature, mass, omega, grid.hbar)
    return Marginals(gaussian_density(grid, 0.0, var_x, POSITION),
                     gaussian_density(grid, 0.0, var_p, MOMENTUM))


def random_state(grid: GridSpec, seed: int, smoothness: float) -> WaveFunction:
    """Seeded band-limited random state under a Gaussian envelope.

    Complex white noise is low-pass filtered with a Gaussian of correlation
    length ``smoothness`` and multiplied by an envelope whose width is 1/16 of
    each axis' extent, so the state and its spectrum both decay at the edges.
    """
    if smoothness < 4 * max(grid.spacing):
        raise ValueError("smoothness must be at least 4 grid spacings")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spectrum = np.fft.fftn(noise)
    ks = np.meshgrid(*grid.wavenumbers(), indexing="ij")
    k2 = sum(k ** 2 for k in ks)
    filtered = np.fft.ifftn(spectrum * np.exp(-k2 * smoothness ** 2 / 2))
    envelope = np.ones(grid.shape)
    for x, a in zip(grid.mesh(), grid.axes):
        centre = 0.5 * (a.lower + a.upper)
        width = (a.upper - a.lower) / 16
        envelope = envelope * np.exp(-(x - centre) ** 2 / (2 * width ** 2))
    return WaveFunction.from_values(grid, filtered * envelope)


def count_nodes(psi: WaveFunction, rel_tol: float = 1e-6) -> int:
    """Sign changes of a real-up-to-phase 1-D wavefunction, ignoring its tails."""
    amps = psi.amplitudes
    phase = amps[np.argmax(np.abs(amps))]
    real = (amps * np.conj(phase) / abs(phase)).real
    keep = np.abs(real) > rel_tol * np.abs(real).max()
    signs = np.sign(real[keep])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))
