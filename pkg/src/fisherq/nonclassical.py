"""Classical/nonclassical splitting of momentum and position, and the measures built on it.

The classical momentum of a state is the phase-gradient field
``P_cl(x) = hbar * Im(psi'(x)/psi(x))``; the classical position is its mirror
``X_cl(p) = -hbar * Im(phi'(p)/phi(p))`` in the momentum representation.
Both are undefined at nodes, so points with ``p < 1e-12 * max(p)`` are masked
and left out of every quadrature; the masked probability is reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import DiscretizationError, MaskDominatedError, PreconditionError
from .grid import (
    Density,
    GridSpec,
    Marginals,
    StateEnsemble,
    WaveFunction,
    density_of,
    ensemble_marginals,
    fourier_forward,
    fourier_inverse,
    gradient,
    laplacian,
    moments,
    to_momentum,
    to_position,
)
from .info import fisher_information, fisher_matrix, node_mask, signed_root

MASK_LIMIT = 0.05
COMMUTATOR_COVERAGE = 1e-3

State = Union[WaveFunction, StateEnsemble, Marginals]


@dataclass(frozen=True)
class ClassicalField:
    """``P_cl`` on the position lattice or ``X_cl`` on the momentum lattice.

    ``values`` has shape ``grid.shape`` in 1-D and ``(ndim,) + grid.shape`` in
    n-D; masked points hold zero.
    """

    grid: GridSpec
    values: np.ndarray
    representation: str
    mask: np.ndarray = field(repr=False)
    masked_mass: float
    weights: np.ndarray = field(repr=False)

    def components(self) -> np.ndarray:
        return self.values.reshape((-1,) + self.grid.shape)

    def mean(self) -> np.ndarray:
        cell = self.grid.lattice(self.representation).cell
        return np.array([np.sum(self.weights * c) * cell for c in self.components()])

    def covariance(self) -> np.ndarray:
        cell = self.grid.lattice(self.representation).cell
        comps = self.components()
        mean = self.mean()
        n = len(comps)
        cov = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                cov[i, j] = cov[j, i] = np.sum(self.weights * (comps[i] - mean[i])
                                               * (comps[j] - mean[j])) * cell
        return cov


def _phase_gradient(psi: WaveFunction, sign: float) -> ClassicalField:
    amps = psi.amplitudes
    lat = psi.lattice
    p = np.abs(amps) ** 2
    mask = node_mask(p)
    masked_mass = float(np.sum(p[~mask]) * lat.cell)
    if masked_mass > MASK_LIMIT:
        raise MaskDominatedError(f"{masked_mass:.1%} of the probability lies on masked points")
    safe = np.where(mask, p, 1.0)
    comps = [np.where(mask, sign * lat.hbar * (np.conj(amps) * g).imag / safe, 0.0)
             for g in gradient(amps, lat)]
    values = comps[0] if psi.ndim == 1 else np.stack(comps)
    weights = np.where(mask, p, 0.0)
    return ClassicalField(psi.grid, values, psi.representation, mask, masked_mass, weights)


def classical_momentum(psi: WaveFunction) -> ClassicalField:
    """Classical momentum field ``P_cl(x)`` of a pure state."""
    return _phase_gradient(to_position(psi), 1.0)


def classical_position(phi: WaveFunction) -> ClassicalField:
    """Classical position field ``X_cl(p)`` of a pure state."""
    return _phase_gradient(to_momentum(phi), -1.0)


@dataclass(frozen=True)
class VarianceSplit:
    """``var_total = var_classical + var_nonclassical`` for one observable."""

    var_total: float
    var_classical: float
    var_nonclassical: float

    def __post_init__(self):
        scale = max(abs(self.var_total), 1e-300)
        for name in ("var_total", "var_classical", "var_nonclassical"):
            if getattr(self, name) < -1e-12 * scale:
                raise DiscretizationError(f"{name} is negative")

    @property
    def delta_nc(self) -> float:
        return math.sqrt(max(self.var_nonclassical, 0.0))

    @property
    def residual(self) -> float:
        """Relative failure of the additive split."""
        return abs(self.var_total - self.var_classical - self.var_nonclassical) / self.var_total


def _check_split(split: VarianceSplit, tol: float) -> VarianceSplit:
    if split.residual > tol:
        raise DiscretizationError(f"variance split residual {split.residual:.2e} exceeds {tol:g}")
    return split


def _require_1d(psi: WaveFunction, what: str) -> None:
    if psi.ndim != 1:
        raise ValueError(f"{what} is one-dimensional; use nonclassical_covariances")


def variance_split_momentum(psi: WaveFunction, tol: float = 1e-6) -> VarianceSplit:
    """Split Var P into the classical part and ``hbar^2 F_X / 4``."""
    _require_1d(psi, "variance_split_momentum")
    psi = to_position(psi)
    var_p = moments(density_of(to_momentum(psi)))[1][0, 0]
    pcl = classical_momentum(psi)
    var_cl = pcl.covariance()[0, 0]
    var_nc = psi.grid.hbar ** 2 / 4 * fisher_information(density_of(psi))
    return _check_split(VarianceSplit(float(var_p), float(var_cl), float(var_nc)), tol)


def variance_split_position(psi: WaveFunction, tol: float = 1e-6) -> VarianceSplit:
    """Split Var X into the classical part and ``hbar^2 F_P / 4``."""
    _require_1d(psi, "variance_split_position")
    phi = to_momentum(psi)
    var_x = moments(density_of(to_position(psi)))[1][0, 0]
    xcl = classical_position(phi)
    var_cl = xcl.covariance()[0, 0]
    var_nc = psi.grid.hbar ** 2 / 4 * fisher_information(density_of(phi))
    return _check_split(VarianceSplit(float(var_x), float(var_cl), float(var_nc)), tol)


class HeisenbergChain(NamedTuple):
    spread_product: float     # Delta X * Delta P
    fisher_spread: float      # delta X * Delta P
    fisher_nonclassical: float  # delta X * Delta P_nc, identically hbar/2


def fisher_heisenberg_chain(psi: WaveFunction, tol: float = 1e-6) -> HeisenbergChain:
    """``DX DP >= dX DP >= dX DP_nc = hbar/2`` with ``DP_nc^2 = Var P - Var P_cl``."""
    _require_1d(psi, "fisher_heisenberg_chain")
    psi = to_position(psi)
    hbar = psi.grid.hbar
    dens = density_of(psi)
    dx = math.sqrt(moments(dens)[1][0, 0])
    delta_x = fisher_information(dens) ** -0.5
    split = variance_split_momentum(psi, tol=math.inf)
    dp = math.sqrt(split.var_total)
    dp_nc = math.sqrt(split.var_total - split.var_classical)
    chain = HeisenbergChain(dx * dp, delta_x * dp, delta_x * dp_nc)
    if abs(chain.fisher_nonclassical - hbar / 2) > tol * hbar / 2:
        raise DiscretizationError(f"dX*DP_nc = {chain.fisher_nonclassical!r}, expected hbar/2")
    return chain


# --- joint nonclassicality --------------------------------------------------

INVERSE_TOL = 1e-12


@dataclass(frozen=True)
class NonclassicalityReport:
    """Joint nonclassicality and robustness of one state.

    In n dimensions ``delta_x``/``delta_p`` are Fisher volumes, ``j_nc`` is the
    trace form (the one inverse to the trace-form robustness) and ``j_nc1`` the
    determinant form.
    """

    j_nc: float
    j_r: float
    delta_x: float
    delta_p: float
    dx_nc: Optional[float] = None
    dp_nc: Optional[float] = None
    commutator_rhs: Optional[float] = None
    masked_mass_x: Optional[float] = None
    masked_mass_p: Optional[float] = None
    j_nc_variance: Optional[float] = None
    dx_nc_split: Optional[float] = None
    dp_nc_split: Optional[float] = None
    j_nc1: Optional[float] = None
    j_nc2: Optional[float] = None
    ndim: int = 1
    pure: bool = True

    JSON_FIELDS = ("j_nc", "j_r", "delta_x", "delta_p", "dx_nc", "dp_nc", "commutator_rhs",
                   "masked_mass_x", "masked_mass_p")

    def __post_init__(self):
        if not self.j_nc > 0:
            raise DiscretizationError("joint nonclassicality must be positive")
        if abs(self.j_nc * self.j_r - 1.0) > INVERSE_TOL:
            raise DiscretizationError("joint nonclassicality and robustness are not inverse")

    def to_dict(self, extended: bool = False) -> dict:
        out = {k: _plain(getattr(self, k)) for k in self.JSON_FIELDS}
        if extended or self.ndim > 1:
            out.update(j_nc1=_plain(self.j_nc1), j_nc2=_plain(self.j_nc2))
        if extended:
            out.update(j_nc_variance=_plain(self.j_nc_variance), dx_nc_split=_plain(self.dx_nc_split),
                       dp_nc_split=_plain(self.dp_nc_split), ndim=self.ndim, pure=self.pure)
        return out


def _plain(value):
    if value is None:
        return None
    return float(value)


def _marginals(state: State) -> Marginals:
    if isinstance(state, Marginals):
        return state
    if isinstance(state, StateEnsemble):
        return ensemble_marginals(state)
    raise TypeError(f"expected a state, ensemble or marginal pair, got {type(state).__name__}")


def fisher_products(marg: Marginals) -> tuple[np.ndarray, np.ndarray]:
    return fisher_matrix(marg.position), fisher_matrix(marg.momentum)


def _fisher_measures(fx: np.ndarray, fp: np.ndarray, hbar: float) -> dict:
    n = fx.shape[0]
    half = hbar / 2
    tr = math.sqrt(np.trace(fx) * np.trace(fp))
    det = math.sqrt(np.linalg.det(fx) * np.linalg.det(fp))
    j_nc = half * tr
    return dict(
        j_nc=j_nc,
        j_r=1.0 / (half * tr),
        delta_x=float(np.linalg.det(fx)) ** -0.5,
        delta_p=float(np.linalg.det(fp)) ** -0.5,
        j_nc1=half ** n * det if n > 1 else None,
        j_nc2=j_nc if n > 1 else None,
        ndim=n,
    )


def joint_nonclassicality(state: State, tol: float = 1e-6) -> NonclassicalityReport:
    """Joint nonclassicality report for a pure state, an ensemble or a marginal pair.

    Mixed states only get the Fisher-length measures.  For pure states
    ``dx_nc``/``dp_nc`` follow from the Fisher informations; the same spreads
    are recomputed as ``sqrt(Var - Var_cl)`` and in 1-D the product form
    ``DX_nc DP_nc / (hbar/2)`` built from them must match ``j_nc``.
    """
    if not isinstance(state, WaveFunction):
        marg = _marginals(state)
        measures = _fisher_measures(*fisher_products(marg), marg.grid.hbar)
        return NonclassicalityReport(pure=False, **measures)

    psi = to_position(state)
    hbar = psi.grid.hbar
    phi = to_momentum(psi)
    dens_x, dens_p = density_of(psi), density_of(phi)
    fx, fp = fisher_matrix(dens_x), fisher_matrix(dens_p)
    measures = _fisher_measures(fx, fp, hbar)
    pcl, xcl = classical_momentum(psi), classical_position(phi)
    cov_x, cov_p = moments(dens_x)[1], moments(dens_p)[1]
    # independent route: nonclassical spread as the variance left after the classical part
    dx_split = math.sqrt(max(np.trace(cov_x - xcl.covariance()), 0.0))
    dp_split = math.sqrt(max(np.trace(cov_p - pcl.covariance()), 0.0))
    extra = dict(dx_nc=hbar / 2 * math.sqrt(np.trace(fp)), dp_nc=hbar / 2 * math.sqrt(np.trace(fx)),
                 dx_nc_split=dx_split, dp_nc_split=dp_split,
                 masked_mass_x=pcl.masked_mass, masked_mass_p=xcl.masked_mass)
    if psi.ndim == 1:
        j_var = dx_split * dp_split / (hbar / 2)
        if abs(j_var - measures["j_nc"]) > tol * measures["j_nc"]:
            raise DiscretizationError(
                f"variance form {j_var!r} and Fisher form {measures['j_nc']!r} disagree")
        extra["j_nc_variance"] = j_var
        if max(pcl.masked_mass, xcl.masked_mass) <= COMMUTATOR_COVERAGE:
            extra["commutator_rhs"] = _commutator_rhs(psi, phi, pcl, xcl)
    return NonclassicalityReport(**measures, **extra)


class CommutatorBound(NamedTuple):
    j_nc: float
    rhs: float


def _commutator_rhs(psi, phi, pcl: ClassicalField, xcl: ClassicalField) -> float:
    grid = psi.grid
    hbar = grid.hbar
    pcl_psi = pcl.values * psi.amplitudes
    xcl_phi = xcl.values * phi.amplitudes
    # <P_cl psi | X_cl psi> in position space, <X_cl psi | P_cl psi> in momentum space
    forward = np.sum(np.conj(pcl_psi) * fourier_inverse(grid, xcl_phi)) * grid.cell
    backward = np.sum(np.conj(xcl_phi) * fourier_forward(grid, pcl_psi)) * grid.conjugate().cell
    return float(abs(1 + 1j / hbar * (forward - backward)))


def commutator_bound(psi: WaveFunction, tol: float = 1e-6) -> CommutatorBound:
    """Both sides of ``J_nc >= |1 + (i/hbar) <[P_cl, X_cl]>|``."""
    _require_1d(psi, "commutator_bound")
    psi = to_position(psi)
    phi = to_momentum(psi)
    pcl, xcl = classical_momentum(psi), classical_position(phi)
    worst = max(pcl.masked_mass, xcl.masked_mass)
    if worst > COMMUTATOR_COVERAGE:
        raise MaskDominatedError(f"{worst:.2%} of the probability is masked; need <= 0.1%")
    report = joint_nonclassicality(psi)
    rhs = _commutator_rhs(psi, phi, pcl, xcl)
    if report.j_nc < rhs - tol:
        raise DiscretizationError(f"J_nc = {report.j_nc!r} below commutator bound {rhs!r}")
    return CommutatorBound(report.j_nc, rhs)


# --- quantum potential ------------------------------------------------------

class QuantumPotential(NamedTuple):
    field: np.ndarray   # NaN on masked points
    mean: float
    fisher_energy: float  # hbar^2 F_X / (8 m)


def quantum_potential(psi: WaveFunction, mass: float = 1.0, tol: float = 1e-4) -> QuantumPotential:
    """Bohm quantum potential ``Q = -(hbar^2/2m) lap(R)/R`` and its mean.

    The pointwise form is evaluated from the wavefunction as
    ``Re(lap psi / psi) + |Im(grad psi / psi)|^2`` which equals
    ``(1/4)[(p'/p)^2 - 2 p''/p]`` but stays finite at nodes of real states.
    """
    psi = to_position(psi)
    grid = psi.grid
    hbar = grid.hbar
    amps = psi.amplitudes
    p = np.abs(amps) ** 2
    mask = node_mask(p)
    safe = np.where(mask, p, 1.0)
    flow = sum(np.where(mask, (np.conj(amps) * g).imag ** 2 / safe, 0.0) for g in gradient(amps, grid))
    weighted = -(hbar ** 2 / (2 * mass)) * ((np.conj(amps) * laplacian(amps, grid)).real + flow)
    q = np.where(mask, weighted / safe, np.nan)
    mean = float(np.sum(weighted) * grid.cell)
    expected = hbar ** 2 * fisher_information(density_of(psi)) / (8 * mass)
    if abs(mean - expected) > tol * abs(expected):
        raise DiscretizationError(f"<Q> = {mean!r} but hbar^2 F/8m = {expected!r}")
    return QuantumPotential(q, mean, expected)


def density_quantum_potential(d: Density, mass: float = 1.0) -> np.ndarray:
    """Quantum potential of a density, ``-(hbar^2/2m) R''/R`` with ``R`` the signed root."""
    hbar = d.grid.hbar
    root = signed_root(d.values)
    mask = node_mask(d.values)
    return np.where(mask, -(hbar ** 2 / (2 * mass)) * laplacian(root, d.lattice)
                    / np.where(mask, root, 1.0), np.nan)


class FisherVariation(NamedTuple):
    actual: float
    predicted: float


def fisher_variation_check(d: Density, perturbation, epsilon: float = 1e-5) -> FisherVariation:
    """Central-difference change of F against ``(8m/hbar^2) integral Q dp``.

    ``m`` is set to ``hbar^2/8`` so the prefactor is one; the identity itself
    does not depend on the mass.
    """
    dp = np.asarray(perturbation, dtype=float)
    lat = d.lattice
    scale = float(np.sum(np.abs(dp)) * lat.cell)
    if scale == 0.0:
        return FisherVariation(0.0, 0.0)
    if abs(np.sum(dp) * lat.cell) > 1e-10 * max(scale, 1.0):
        raise PreconditionError("perturbation must integrate to zero")
    up, down = d.values + epsilon * dp, d.values - epsilon * dp
    if min(up.min(), down.min()) < -1e-15 * d.values.max():
        raise PreconditionError("perturbed density is negative")
    base = Density(d.grid, d.values, d.representation)
    # central difference: the first-order term of F is quadratic in dp, so a
    # one-sided difference carries an O(epsilon) bias
    moved = [Density(d.grid, np.clip(v, 0.0, None), d.representation) for v in (up, down)]
    actual = (fisher_information(moved[0]) - fisher_information(moved[1])) / (2 * epsilon)
    mass = d.grid.hbar ** 2 / 8
    q = density_quantum_potential(base, mass)
    predicted = float(np.nansum(np.where(np.isnan(q), 0.0, q) * dp) * lat.cell)
    return FisherVariation(actual, predicted)


# --- n-D covariances --------------------------------------------------------

class NonclassicalCovariances(NamedTuple):
    cov_x: np.ndarray
    cov_p: np.ndarray
    cov_p_cl: np.ndarray
    cov_p_nc: np.ndarray
    residual: float
    heisenberg_margin: float      # min eigenvalue of Cov(X) - (hbar^2/4) Cov(P)^-1
    product_margin: float         # min eigenvalue of Cov(X) Cov(P), minus hbar^2/4
    trace_residual: float         # tr F_X against (4/hbar^2)(<P.P> - <P_cl.P_cl>)


def nonclassical_covariances(psi: WaveFunction, tol: float = 1e-6) -> NonclassicalCovariances:
    """``Cov(P) = Cov(P_cl) + (hbar^2/4) F_X`` and the matrix uncertainty check.

    The uncertainty relation is tested in its symmetric form
    ``Cov(X) - (hbar^2/4) Cov(P)^-1 >= 0``.  The product ``Cov(X) Cov(P)`` is
    not symmetric, but its eigenvalues are real and the equivalent condition
    on them is reported as well.
    """
    psi = to_position(psi)
    hbar = psi.grid.hbar
    dens_x = density_of(psi)
    cov_x = moments(dens_x)[1]
    cov_p = moments(density_of(to_momentum(psi)))[1]
    pcl = classical_momentum(psi)
    cov_cl = pcl.covariance()
    fx = fisher_matrix(dens_x)
    cov_nc = hbar ** 2 / 4 * fx
    scale = max(float(np.abs(cov_p).max()), 1e-300)
    residual = float(np.abs(cov_p - cov_cl - cov_nc).max()) / scale
    if residual > tol:
        raise DiscretizationError(f"covariance split residual {residual:.2e} exceeds {tol:g}")
    margin = float(np.linalg.eigvalsh(cov_x - hbar ** 2 / 4 * np.linalg.inv(cov_p)).min())
    if margin < -1e-8:
        raise DiscretizationError(f"matrix uncertainty relation violated by {margin:.2e}")
    product = float(np.linalg.eigvals(cov_x @ cov_p).real.min()) - hbar ** 2 / 4
    mean_p = moments(density_of(to_momentum(psi)))[0]
    second_p = np.trace(cov_p) + mean_p @ mean_p
    mean_cl = pcl.mean()
    second_cl = np.trace(cov_cl) + mean_cl @ mean_cl
    trace_residual = abs(np.trace(fx) - 4 / hbar ** 2 * (second_p - second_cl)) / np.trace(fx)
    return NonclassicalCovariances(cov_x, cov_p, cov_cl, cov_nc, residual, margin, product,
                                   float(trace_residual))
