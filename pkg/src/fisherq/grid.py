"""Uniform grids, wavefunctions, densities and the position/momentum Fourier pair.

Every state lives on a :class:`GridSpec`, a rectangular periodic lattice.  The
momentum lattice of a grid is obtained with :meth:`GridSpec.conjugate`; it has
the same number of points per axis, spacing ``2*pi*hbar/(N*h)`` and is
centred on zero.  The transform convention is

    phi(p) = (2 pi hbar)^(-n/2) * integral psi(x) exp(-i p.x / hbar) d^n x

discretised as a Riemann sum, which makes Hermite functions self-dual.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateStateError,
    NormalizationError,
    RepresentationError,
    TruncationWarning,
    WraparoundWarning,
)

POSITION = "position"
MOMENTUM = "momentum"
_REPRESENTATIONS = (POSITION, MOMENTUM)

NORM_TOL = 1e-10


@dataclass(frozen=True)
class Axis:
    lower: float
    upper: float
    n: int

    def __post_init__(self):
        if not self.upper > self.lower:
            raise ValueError(f"axis upper bound {self.upper} must exceed lower {self.lower}")
        if int(self.n) != self.n or self.n < 8:
            raise ValueError(f"axis needs an integer point count >= 8, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / self.n

    @property
    def points(self) -> np.ndarray:
        return self.lower + self.spacing * np.arange(self.n)


@dataclass(frozen=True)
class GridSpec:
    """A uniform n-dimensional lattice together with the value of hbar."""

    axes: tuple[Axis, ...]
    hbar: float = 1.0

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise ValueError("a grid needs at least one axis")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def line(cls, lower: float, upper: float, n: int, hbar: float = 1.0) -> "GridSpec":
        return cls((Axis(lower, upper, n),), hbar)

    @classmethod
    def centered(cls, half_width, n, hbar: float = 1.0) -> "GridSpec":
        """Grid spanning ``[-w, w)`` on every axis; scalars broadcast over ``n``."""
        widths = np.atleast_1d(half_width)
        counts = np.atleast_1d(n)
        dims = max(len(widths), len(counts))
        widths = np.broadcast_to(widths, (dims,))
        counts = np.broadcast_to(counts, (dims,))
        return cls(tuple(Axis(-float(w), float(w), int(c)) for w, c in zip(widths, counts)), hbar)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.n for a in self.axes)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(a.spacing for a in self.axes)

    @property
    def cell(self) -> float:
        """Volume element, the product of the spacings."""
        return float(np.prod(self.spacing))

    @property
    def lower(self) -> np.ndarray:
        return np.array([a.lower for a in self.axes])

    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(a.points for a in self.axes)

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.coords(), indexing="ij"))

    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Angular wavenumbers per axis in FFT ordering."""
        return tuple(2 * np.pi * np.fft.fftfreq(a.n, a.spacing) for a in self.axes)

    def conjugate(self) -> "GridSpec":
        """The momentum lattice dual to this grid, centred on zero."""
        axes = []
        for a in self.axes:
            dp = 2 * np.pi * self.hbar / (a.n * a.spacing)
            lo = -(a.n // 2) * dp
            axes.append(Axis(lo, lo + a.n * dp, a.n))
        return GridSpec(tuple(axes), self.hbar)

    def lattice(self, representation: str) -> "GridSpec":
        _check_rep(representation)
        return self if representation == POSITION else self.conjugate()


def _check_rep(representation: str) -> None:
    if representation not in _REPRESENTATIONS:
        raise RepresentationError(f"unknown representation {representation!r}")


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class WaveFunction:
    """Complex amplitudes of a pure state.

    ``grid`` is always the position grid; in the momentum representation the
    amplitudes are sampled on ``grid.conjugate()``.
    """

    grid: GridSpec
    amplitudes: np.ndarray
    representation: str = POSITION

    def __post_init__(self):
        _check_rep(self.representation)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != self.grid.shape:
            raise ValueError(f"amplitude shape {amps.shape} does not match grid {self.grid.shape}")
        norm = float(np.sum(np.abs(amps) ** 2) * self.lattice.cell)
        if not abs(norm - 1.0) <= NORM_TOL:
            raise NormalizationError(f"wavefunction norm is {norm!r}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def from_values(cls, grid: GridSpec, values, representation: str = POSITION) -> "WaveFunction":
        """Build a state from arbitrary values, normalising them on the grid."""
        values = np.asarray(values, dtype=complex)
        norm = math.sqrt(float(np.sum(np.abs(values) ** 2)) * grid.lattice(representation).cell)
        if norm == 0 or not np.isfinite(norm):
            raise DegenerateStateError("cannot normalise a zero or non-finite state")
        return cls(grid, values / norm, representation)

    @property
    def lattice(self) -> GridSpec:
        return self.grid.lattice(self.representation)

    @property
    def ndim(self) -> int:
        return self.grid.ndim


@dataclass(frozen=True)
class Density:
    """A normalised probability density on a position or momentum lattice.

    ``amplitude`` optionally keeps the wavefunction this density came from;
    Fisher information then uses the wavefunction's smooth derivative instead
    of differentiating ``sqrt(values)``, which has kinks at nodes.
    """

    grid: GridSpec
    values: np.ndarray
    representation: str = POSITION
    amplitude: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        _check_rep(self.representation)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"density shape {vals.shape} does not match grid {self.grid.shape}")
        if np.any(vals < 0):
            raise ValueError("density values must be nonnegative")
        mass = float(np.sum(vals) * self.lattice.cell)
        if not abs(mass - 1.0) <= NORM_TOL:
            raise NormalizationError(f"density integrates to {mass!r}, expected 1")
        object.__setattr__(self, "values", _frozen(vals))
        if self.amplitude is not None:
            object.__setattr__(self, "amplitude", _frozen(np.asarray(self.amplitude, dtype=complex)))

    @classmethod
    def from_values(cls, grid: GridSpec, values, representation: str = POSITION) -> "Density":
        values = np.clip(np.asarray(values, dtype=float), 0.0, None)
        mass = float(np.sum(values)) * grid.lattice(representation).cell
        if mass <= 0 or not np.isfinite(mass):
            raise NormalizationError("density has no mass")
        return cls(grid, values / mass, representation)

    @property
    def lattice(self) -> GridSpec:
        return self.grid.lattice(self.representation)

    @property
    def ndim(self) -> int:
        return self.grid.ndim


@dataclass(frozen=True)
class StateEnsemble:
    """A weighted collection of pure states sharing one grid."""

    members: tuple[tuple[float, WaveFunction], ...]

    def __post_init__(self):
        members = tuple((float(w), s) for w, s in self.members)
        if not members:
            raise ValueError("an ensemble needs at least one member")
        weights = np.array([w for w, _ in members])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("ensemble weights must be nonnegative and sum to 1")
        grid = members[0][1].grid
        if any(s.grid != grid for _, s in members):
            raise ValueError("ensemble members must share one grid")
        object.__setattr__(self, "members", members)

    @classmethod
    def uniform(cls, states: Sequence[WaveFunction]) -> "StateEnsemble":
        w = 1.0 / len(states)
        return cls(tuple((w, s) for s in states))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    @property
    def states(self) -> list[WaveFunction]:
        return [s for _, s in self.members]

    @property
    def grid(self) -> GridSpec:
        return self.members[0][1].grid


@dataclass(frozen=True)
class Marginals:
    """Position and momentum densities of one (possibly mixed) state."""

    position: Density
    momentum: Density

    def __post_init__(self):
        if self.position.representation != POSITION or self.momentum.representation != MOMENTUM:
            raise RepresentationError("marginals need a position and a momentum density")

    @property
    def grid(self) -> GridSpec:
        return self.position.grid


# --- Fourier pair -----------------------------------------------------------

def _momentum_phase(grid: GridSpec) -> np.ndarray:
    pgrid = grid.conjugate()
    phase = np.zeros(grid.shape)
    for axis, (p, lo) in enumerate(zip(pgrid.coords(), grid.lower)):
        shape = [1] * grid.ndim
        shape[axis] = -1
        phase = phase + (p * lo / grid.hbar).reshape(shape)
    return np.exp(-1j * phase)


def fourier_forward(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """Position samples to momentum samples (no normalisation check)."""
    n = grid.ndim
    scale = grid.cell / (2 * np.pi * grid.hbar) ** (n / 2)
    return scale * _momentum_phase(grid) * np.fft.fftshift(np.fft.fftn(values))


def fourier_inverse(grid: GridSpec, values: np.ndarray) -> np.ndarray:
    """Momentum samples back to position samples on ``grid``."""
    n = grid.ndim
    pgrid = grid.conjugate()
    scale = np.prod(grid.shape) * pgrid.cell / (2 * np.pi * grid.hbar) ** (n / 2)
    return scale * np.fft.ifftn(np.fft.ifftshift(values * np.conj(_momentum_phase(grid))))


def _require_normalized(psi: WaveFunction) -> None:
    norm = float(np.sum(np.abs(psi.amplitudes) ** 2) * psi.lattice.cell)
    if abs(norm - 1.0) > NORM_TOL:
        raise NormalizationError(f"wavefunction norm is {norm!r}, expected 1")


def to_momentum(psi: WaveFunction) -> WaveFunction:
    """Momentum wavefunction of a position-space state."""
    if psi.representation == MOMENTUM:
        return psi
    _require_normalized(psi)
    return WaveFunction(psi.grid, fourier_forward(psi.grid, psi.amplitudes), MOMENTUM)


def to_position(phi: WaveFunction) -> WaveFunction:
    if phi.representation == POSITION:
        return phi
    _require_normalized(phi)
    return WaveFunction(phi.grid, fourier_inverse(phi.grid, phi.amplitudes), POSITION)


def density_of(psi: WaveFunction) -> Density:
    """``|psi|^2`` in the state's own representation."""
    _require_normalized(psi)
    vals = np.abs(psi.amplitudes) ** 2
    vals = vals / (np.sum(vals) * psi.lattice.cell)
    return Density(psi.grid, vals, psi.representation, amplitude=psi.amplitudes)


def marginals_of(psi: WaveFunction) -> Marginals:
    return Marginals(density_of(to_position(psi)), density_of(to_momentum(psi)))


def ensemble_density(ens: StateEnsemble, representation: Optional[str] = None) -> Density:
    """Mixture density of an ensemble.

    Members must all be in one representation unless ``representation`` asks
    for an explicit conversion of every member.
    """
    if representation is None:
        reps = {s.representation for s in ens.states}
        if len(reps) != 1:
            raise RepresentationError("ensemble members are in mixed representations")
        representation = reps.pop()
    convert = to_position if representation == POSITION else to_momentum
    total = np.zeros(ens.grid.shape)
    for w, s in ens.members:
        total = total + w * np.abs(convert(s).amplitudes) ** 2
    return Density.from_values(ens.grid, total, representation)


def ensemble_marginals(ens: StateEnsemble) -> Marginals:
    return Marginals(ensemble_density(ens, POSITION), ensemble_density(ens, MOMENTUM))


# --- quadrature and moments -------------------------------------------------

def integrate(values: np.ndarray, grid: GridSpec) -> float:
    return float(np.sum(values) * grid.cell)


def boundary_mass(d: Density, width: int = 4) -> float:
    """Probability within ``width`` grid spacings of any face of the lattice."""
    mask = np.zeros(d.grid.shape, dtype=bool)
    for axis in range(d.ndim):
        index = [slice(None)] * d.ndim
        index[axis] = slice(0, width)
        mask[tuple(index)] = True
        index[axis] = slice(-width, None)
        mask[tuple(index)] = True
    return float(np.sum(d.values[mask]) * d.lattice.cell)


def moments(d: Density) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance matrix of a density."""
    edge = boundary_mass(d)
    if edge > 1e-6:
        warnings.warn(f"{edge:.2e} of the mass lies near the grid boundary; moments are unreliable",
                      TruncationWarning, stacklevel=2)
    lat = d.lattice
    cell = lat.cell
    xs = lat.mesh()
    mean = np.array([np.sum(d.values * x) * cell for x in xs])
    cov = np.empty((d.ndim, d.ndim))
    for i in range(d.ndim):
        for j in range(i, d.ndim):
            cov[i, j] = cov[j, i] = np.sum(d.values * (xs[i] - mean[i]) * (xs[j] - mean[j])) * cell
    return mean, cov


def variance(d: Density) -> float:
    """Variance of a 1-D density (trace of the covariance in n-D)."""
    return float(np.trace(moments(d)[1]))


# --- derivatives ------------------------------------------------------------

_RESOLUTION_TOL = 1e-16


def _check_resolved(spectrum: np.ndarray, axis: int, k: np.ndarray) -> None:
    power = np.abs(spectrum) ** 2
    total = power.sum()
    if total == 0:
        return
    high = np.abs(k) > 0.95 * np.abs(k).max()
    shape = [1] * spectrum.ndim
    shape[axis] = -1
    tail = float(np.sum(power * high.reshape(shape)))
    if tail > _RESOLUTION_TOL * total:
        warnings.warn("field is not band-limited on this grid (non-decaying boundary values "
                      "wrap around, or kinks are unresolved); spectral derivative is inaccurate",
                      WraparoundWarning,
                      stacklevel=3)


def _spectral_axis(field: np.ndarray, grid: GridSpec, axis: int, order: int = 1) -> np.ndarray:
    k = grid.wavenumbers()[axis]
    spectrum = np.fft.fft(field, axis=axis)
    _check_resolved(spectrum, axis, k)
    mult = (1j * k) ** order
    if order % 2 == 1 and grid.axes[axis].n % 2 == 0:
        mult[grid.axes[axis].n // 2] = 0.0
    shape = [1] * field.ndim
    shape[axis] = -1
    return np.fft.ifft(spectrum * mult.reshape(shape), axis=axis)


def _fd4_axis(field: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    h = grid.spacing[axis]
    r = lambda s: np.roll(field, s, axis=axis)  # noqa: E731
    return (-r(-2) + 8 * r(-1) - 8 * r(1) + r(2)) / (12 * h)


def gradient(field, grid: GridSpec, method: str = "spectral") -> tuple[np.ndarray, ...]:
    """Per-axis first derivatives of a sampled field.

    ``method="spectral"`` multiplies by ``i k`` in Fourier space and is exact
    for band-limited fields; ``"fd4"`` is a periodic fourth-order central
    difference for cross-checks.  Real input gives real output.
    """
    field = np.asarray(field)
    is_real = not np.iscomplexobj(field)
    out = []
    for axis in range(grid.ndim):
        if method == "spectral":
            d = _spectral_axis(field, grid, axis)
        elif method == "fd4":
            d = _fd4_axis(field, grid, axis)
        else:
            raise ValueError(f"unknown derivative method {method!r}")
        out.append(d.real if is_real else d)
    return tuple(out)


def laplacian(field, grid: GridSpec) -> np.ndarray:
    field = np.asarray(field)
    total = sum(_spectral_axis(field, grid, axis, order=2) for axis in range(grid.ndim))
    return total.real if not np.iscomplexobj(field) else total
