"""Gaussian diffusion of marginals, entropy-rate extrapolation and de Bruijn checks."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import DiscretizationError, PreconditionError, TruncationError
from .grid import (
    Density,
    Marginals,
    StateEnsemble,
    WaveFunction,
    boundary_mass,
    ensemble_marginals,
    marginals_of,
    moments,
)
from .info import entropy, fisher_matrix

BOUNDARY_LIMIT = 1e-8
MISMATCH_LIMIT = 1e-2
LADDER_RATIO = 2.0
LADDER_STEPS = 6
# Exponents of the small-t expansion of [S(t) - S(0)]/t; half-integer powers
# appear when the density has nodes.
RICHARDSON_POWERS = (0.5, 1.0, 1.5, 2.0, 2.5)

Rate = Union[float, np.ndarray]


def _as_rate(rate, ndim: int) -> np.ndarray:
    """Scalar or matrix rate as a validated ``ndim x ndim`` matrix."""
    arr = np.asarray(rate, dtype=float)
    if arr.ndim == 0:
        if arr < 0:
            raise PreconditionError("diffusion rate must be nonnegative")
        return float(arr) * np.eye(ndim)
    if arr.shape != (ndim, ndim):
        raise PreconditionError(f"diffusion matrix must be {ndim}x{ndim}")
    if np.abs(arr - arr.T).max() > 1e-12 * max(np.abs(arr).max(), 1.0):
        raise PreconditionError("diffusion matrix must be symmetric")
    if np.linalg.eigvalsh(arr).min() < -1e-12 * np.abs(arr).max():
        raise PreconditionError("diffusion matrix must be positive semidefinite")
    return arr


def _rate_scale(rate) -> float:
    arr = np.asarray(rate, dtype=float)
    return float(arr) if arr.ndim == 0 else float(np.trace(arr) / arr.shape[0])


@dataclass(frozen=True)
class DiffusionConfig:
    """Position rate ``gamma`` and momentum rate ``sigma_rate``; matrices allowed in n-D."""

    gamma: Rate = 1.0
    sigma_rate: Rate = 1.0
    times: Optional[tuple] = None

    def __post_init__(self):
        scales = []
        for name in ("gamma", "sigma_rate"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise PreconditionError(f"{name} must be finite")
            _as_rate(arr, 1 if arr.ndim == 0 else arr.shape[0])
            scales.append(float(np.abs(arr).max()))
        if max(scales) == 0:
            raise PreconditionError("at least one diffusion rate must be positive")
        if self.times is not None:
            t = np.asarray(self.times, dtype=float)
            if t.size == 0 or t[0] <= 0 or np.any(np.diff(t) <= 0):
                raise PreconditionError("times must be positive and strictly increasing")
            object.__setattr__(self, "times", tuple(float(v) for v in t))


def diffuse(d: Density, rate: Rate, t: float) -> Density:
    """Evolve ``d`` under ``dp/dt = div(Gamma grad p)`` for time ``t``.

    This is convolution with the heat kernel of covariance ``2 Gamma t``,
    applied as the Fourier multiplier ``exp(-k^T Gamma k t)``.
    """
    if t < 0:
        raise PreconditionError("diffusion time must be nonnegative")
    gamma = _as_rate(rate, d.ndim)
    if t == 0 or not gamma.any():
        return Density(d.grid, d.values, d.representation)
    lat = d.lattice
    ks = np.meshgrid(*lat.wavenumbers(), indexing="ij")
    quad = sum(gamma[i, j] * ks[i] * ks[j] for i in range(d.ndim) for j in range(d.ndim))
    values = np.fft.ifftn(np.fft.fftn(d.values) * np.exp(-quad * t)).real
    # clipping the FFT ringing below zero adds a sliver of mass; put it back
    out = Density.from_values(d.grid, values, d.representation)
    edge = boundary_mass(out)
    if edge > BOUNDARY_LIMIT:
        raise TruncationError(f"diffused density puts {edge:.1e} of its mass at the grid edge")
    return out


def _marginals(state) -> Marginals:
    if isinstance(state, Marginals):
        return state
    if isinstance(state, StateEnsemble):
        return ensemble_marginals(state)
    if isinstance(state, WaveFunction):
        return marginals_of(state)
    raise TypeError(f"expected a state, ensemble or marginal pair, got {type(state).__name__}")


def quantum_phase_space_diffuse(state, config: DiffusionConfig, t: float) -> Marginals:
    """Diffuse the position marginal with ``gamma`` and the momentum marginal with ``sigma_rate``.

    The two marginals evolve independently, so each is diffused on its own.
    """
    marg = _marginals(state)
    return Marginals(diffuse(marg.position, config.gamma, t),
                     diffuse(marg.momentum, config.sigma_rate, t))


# --- entropy rates ----------------------------------------------------------

def has_interior_nodes(d: Density, rel: float = 1e-6, side_mass: float = 1e-3) -> bool:
    """Whether a 1-D density has a near-zero interior minimum with mass on both sides.

    Ripples in a decaying tail also dip below ``rel`` of the peak, so a node
    only counts when at least ``side_mass`` lies beyond it on either side.
    """
    p = d.values
    if p.ndim != 1:
        return False
    pmax = p.max()
    cell = d.lattice.cell
    cum = np.cumsum(p) * cell
    j = np.arange(1, p.size - 1)
    s = np.sqrt(p)
    # a linear zero between grid points leaves sqrt(p) at most a quarter of its
    # neighbours' sum; a smooth dip sits well above that
    kink = s[j] <= 0.26 * (s[j - 1] + s[j + 1])
    minima = j[(p[j] <= p[j - 1]) & (p[j] <= p[j + 1]) & ((p[j] < rel * pmax) | kink)]
    return bool(np.any((cum[minima] > side_mass) & (cum[-1] - cum[minima] > side_mass)))


def default_times(d: Density, rate: Rate) -> np.ndarray:
    """Geometric time ladder for the entropy-rate extrapolation.

    The ladder starts at a millionth of the spreading time of the density.  If
    the density has interior nodes it starts later, at a few grid-spacing
    diffusion times, so the filling-in of each node is resolved by the grid.
    """
    scale = _rate_scale(rate)
    if scale <= 0:
        raise PreconditionError("entropy rate needs a positive diffusion rate")
    var = float(np.trace(moments(d)[1])) / d.ndim
    t0 = max(1e-6, 1e-6 * var / scale)
    if has_interior_nodes(d):
        t0 = max(t0, 4 * max(d.lattice.spacing) ** 2 / scale)
    return t0 * LADDER_RATIO ** np.arange(LADDER_STEPS)


def richardson(times: np.ndarray, values: np.ndarray, powers: Sequence[float] = RICHARDSON_POWERS):
    """Extrapolate ``values(t)`` to ``t = 0`` on a geometric ladder.

    Returns the sequence of leading extrapolants, one per eliminated power.
    """
    times = np.asarray(times, dtype=float)
    ratio = times[1] / times[0]
    if not np.allclose(times[1:] / times[:-1], ratio, rtol=1e-12):
        raise PreconditionError("Richardson extrapolation needs a geometric time ladder")
    row = np.asarray(values, dtype=float)
    leading = [row[0]]
    for power in powers[:len(row) - 1]:
        q = ratio ** power
        row = (q * row[:-1] - row[1:]) / (q - 1)
        leading.append(row[0])
    return np.array(leading)


@dataclass(frozen=True)
class EntropyTrajectory:
    times: np.ndarray
    entropies: np.ndarray
    initial_entropy: float
    initial_rate: float
    error: float

    def __post_init__(self):
        steps = np.diff(np.concatenate([[self.initial_entropy], self.entropies]))
        if np.any(steps <= 0):
            raise DiscretizationError("entropy failed to increase under diffusion; "
                                      "the time ladder is below round-off or the grid is too small")


def entropy_trajectory(d: Density, rate: Rate, times=None) -> EntropyTrajectory:
    """Entropies along a diffusion path and the extrapolated initial rate ``dS/dt(0)``."""
    times = default_times(d, rate) if times is None else np.asarray(times, dtype=float)
    if times[0] < 1e-6 * 0.999999:
        raise PreconditionError("smallest time must be at least 1e-6")
    s0 = entropy(d)
    ent = np.array([entropy(diffuse(d, rate, t)) for t in times])
    slopes = (ent - s0) / times
    if len(times) < 2:
        return EntropyTrajectory(times, ent, s0, float(slopes[0]), math.inf)
    leading = richardson(times, slopes)
    return EntropyTrajectory(times, ent, s0, float(leading[-1]), float(abs(leading[-1] - leading[-2])))


def _mismatch(rate: float, fisher: float) -> float:
    return abs(rate - fisher) / abs(fisher)


@dataclass(frozen=True)
class DeBruijnReport:
    """Fisher informations against measured entropy rates, position and momentum."""

    f_x: float
    rate_x: float
    f_p: float
    rate_p: float
    mismatch_x: float
    mismatch_p: float
    j_r: float
    j_r_rates: float
    error_x: float
    error_p: float
    flagged: bool

    JSON_FIELDS = ("f_x", "f_p", "rate_x", "rate_p", "mismatch_x", "mismatch_p", "j_r")

    def to_dict(self, extended: bool = False) -> dict:
        out = {k: float(getattr(self, k)) for k in self.JSON_FIELDS}
        if extended:
            out.update(j_r_rates=float(self.j_r_rates), error_x=float(self.error_x),
                       error_p=float(self.error_p), flagged=bool(self.flagged))
        return out


def _reference_marginals(state) -> Marginals:
    # A pure state keeps its amplitudes, which gives the node-exact Fisher route.
    if isinstance(state, WaveFunction):
        return marginals_of(state)
    return _marginals(state)


def debruijn_report(state, config: DiffusionConfig, hbar: Optional[float] = None) -> DeBruijnReport:
    """Compare ``F`` with ``dS/dt(0) / rate`` for both marginals.

    For matrix rates the comparison is ``tr(Gamma F)`` against ``dS/dt(0)``
    divided by the mean diagonal rate.  A mismatch above 1e-2 flags the report.
    """
    for name in ("gamma", "sigma_rate"):
        if not np.asarray(getattr(config, name)).any():
            raise PreconditionError(f"de Bruijn report needs a positive {name}")
    marg = _reference_marginals(state)
    hbar = marg.grid.hbar if hbar is None else hbar
    results = []
    for dens, rate in ((marg.position, config.gamma), (marg.momentum, config.sigma_rate)):
        gamma = _as_rate(rate, dens.ndim)
        scale = _rate_scale(rate)
        fisher = float(np.trace(gamma @ fisher_matrix(dens))) / scale
        plain = Density(dens.grid, dens.values, dens.representation)
        traj = entropy_trajectory(plain, rate, config.times)
        measured = traj.initial_rate / scale
        results.append((fisher, measured, _mismatch(measured, fisher), traj.error / scale))
    (fx, rx, mx, ex), (fp, rp, mp, ep) = results
    fx_tr = float(np.trace(fisher_matrix(marg.position)))
    fp_tr = float(np.trace(fisher_matrix(marg.momentum)))
    j_r = 1.0 / (hbar / 2 * math.sqrt(fx_tr * fp_tr))
    j_r_rates = 1.0 / (hbar / 2 * math.sqrt(rx * rp)) if rx > 0 and rp > 0 else math.inf
    flagged = bool(mx > MISMATCH_LIMIT or mp > MISMATCH_LIMIT)
    return DeBruijnReport(fx, rx, fp, rp, mx, mp, j_r, j_r_rates, ex, ep, flagged)


class AnisotropicRate(NamedTuple):
    rate: float
    expected: float
    mismatch: float


def anisotropic_rate_check(d: Density, gamma, times=None) -> AnisotropicRate:
    """Extrapolated ``dS/dt(0)`` under matrix diffusion against ``tr(Gamma F)``."""
    g = _as_rate(gamma, d.ndim)
    if np.linalg.eigvalsh(g).min() <= 0:
        raise PreconditionError("diffusion matrix must be positive definite")
    expected = float(np.trace(g @ fisher_matrix(d)))
    plain = Density(d.grid, d.values, d.representation)
    traj = entropy_trajectory(plain, g, times)
    return AnisotropicRate(traj.initial_rate, expected, _mismatch(traj.initial_rate, expected))


def joint_robustness(state) -> float:
    """``delta X delta P / (hbar/2)`` in 1-D, the trace form in n-D."""
    from .nonclassical import joint_nonclassicality

    return joint_nonclassicality(state).j_r


# --- export -----------------------------------------------------------------

def phase_space_entropies(state, config: DiffusionConfig, times) -> np.ndarray:
    """Rows ``(t, S_x, S_p)`` for each time, both marginals diffused to the same t."""
    marg = _marginals(state)
    rows = []
    for t in times:
        m = quantum_phase_space_diffuse(marg, config, t)
        rows.append((float(t), entropy(m.position), entropy(m.momentum)))
    return np.array(rows).reshape(-1, 3)


def trajectory_times(state, config: DiffusionConfig) -> np.ndarray:
    """Union of the position and momentum ladders, or the configured times."""
    if config.times is not None:
        return np.array(config.times)
    marg = _marginals(state)
    ladders = [default_times(dens, rate) for dens, rate in
               ((marg.position, config.gamma), (marg.momentum, config.sigma_rate))
               if np.asarray(rate).any()]
    times = np.unique(np.concatenate(ladders))
    # ladders built from equal starts can differ in the last bit
    keep = np.concatenate([[True], np.diff(times) > 1e-12 * times[1:]])
    return times[keep]


def trajectory_csv(rows: np.ndarray, header: Sequence[str] = ()) -> str:
    """CSV text with columns t, S_x, S_p; ``header`` lines are written as ``#`` comments."""
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "S_x", "S_p"])
    for t, sx, sp in rows:
        writer.writerow([repr(float(t)), repr(float(sx)), repr(float(sp))])
    return buf.getvalue()


__all__ = [
    "DiffusionConfig", "diffuse", "quantum_phase_space_diffuse", "default_times",
    "has_interior_nodes", "richardson", "EntropyTrajectory", "entropy_trajectory",
    "DeBruijnReport", "debruijn_report", "AnisotropicRate", "anisotropic_rate_check",
    "joint_robustness", "phase_space_entropies", "trajectory_times", "trajectory_csv",
]
