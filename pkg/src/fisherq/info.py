"""Fisher information, entropy and the length/volume measures built from them."""
from __future__ import annotations

import math
import warnings
from typing import NamedTuple

import numpy as np

from .errors import DiscretizationError, SupportWarning
from .grid import (
    POSITION,
    Density,
    StateEnsemble,
    density_of,
    ensemble_density,
    gradient,
    moments,
    to_momentum,
    to_position,
)

NODE_THRESHOLD = 1e-12
ENTROPY_FLOOR = 1e-300
_TWO_PI_E = 2 * math.pi * math.e


def node_mask(values: np.ndarray, threshold: float = NODE_THRESHOLD) -> np.ndarray:
    """True where a density is large enough for quotients like psi'/psi."""
    return values > threshold * values.max()


def _warn_support(values: np.ndarray, side_mass: float = 1e-8) -> None:
    if values.ndim != 1:
        return
    # below 1e-20 of the peak is FFT noise floor or a genuine gap
    empty = values <= 1e-20 * values.max()
    # isolated nodes are single points; a gap is a run of several empty points
    runs = np.convolve(empty.astype(int), np.ones(3, dtype=int), mode="same") == 3
    if not runs.any():
        return
    frac = np.cumsum(values) / values.sum()
    # only a gap with real mass on both sides disconnects the support
    if np.any(runs & (frac > side_mass) & (frac < 1 - side_mass)):
        warnings.warn("density support is disconnected; the translation family is degenerate "
                      "across the gap", SupportWarning, stacklevel=3)


def signed_root(values: np.ndarray) -> np.ndarray:
    """Square root of a 1-D density with its sign flipped across isolated nodes.

    ``sqrt(p)`` has a kink wherever ``p`` has a double zero; choosing the sign
    that minimises the local second difference recovers the smooth real
    amplitude.  Smooth positive minima are left alone because flipping them
    would create a jump.
    """
    s = np.sqrt(np.asarray(values, dtype=float))
    if s.ndim != 1:
        return s
    smax = s.max()
    n = s.size
    sign = np.ones(n)
    interior = np.arange(2, n - 2)
    local_min = (s[interior] <= s[interior - 1]) & (s[interior] <= s[interior + 1])
    inside = np.minimum(s[interior - 1], s[interior + 1]) > 1e-6 * smax
    cand = interior[local_min & inside & (s[interior] < 0.1 * smax)]
    flip_at = []
    for j in cand:
        a, b, c, d = s[j - 1], s[j], s[j + 1], s[j + 2]
        keep = abs(a - 2 * b + c) + abs(b - 2 * c + d)
        after = abs(a - 2 * b - c) + abs(b + 2 * c - d)  # flip j+1 onward
        include = abs(a + 2 * b - c) + abs(-b + 2 * c - d)  # flip j onward
        best = min(keep, after, include)
        if best == keep or best > 0.5 * keep:
            continue
        flip_at.append(j + 1 if best == after else j)
    for j in sorted(set(flip_at)):
        sign[j:] *= -1
    return sign * s


def _root_gradients(d: Density) -> tuple[np.ndarray, ...]:
    lat = d.lattice
    if d.amplitude is not None:
        psi = d.amplitude
        grads = gradient(psi, lat)
        mask = node_mask(d.values)
        safe = np.where(mask, np.abs(psi), 1.0)
        # d|psi| = Re(conj(psi) dpsi)/|psi|; at masked nodes of a real-phase state |d psi| is the limit.
        out = []
        for g in grads:
            r = np.where(mask, (np.conj(psi) * g).real / safe, np.abs(g))
            out.append(r)
        return tuple(out)
    return gradient(signed_root(d.values), lat)


def fisher_matrix(d: Density) -> np.ndarray:
    """Translation Fisher matrix ``4 * integral (grad sqrt p)(grad sqrt p)^T``."""
    _warn_support(d.values)
    grads = _root_gradients(d)
    cell = d.lattice.cell
    n = d.ndim
    f = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            f[i, j] = f[j, i] = 4 * np.sum(grads[i] * grads[j]) * cell
    return f


def fisher_information(d: Density) -> float:
    """Fisher information of a 1-D density (trace of the Fisher matrix in n-D)."""
    return float(np.trace(fisher_matrix(d)))


def fisher_length(d: Density) -> float:
    return fisher_information(d) ** -0.5


def fisher_volume(d: Density) -> float:
    return float(np.linalg.det(fisher_matrix(d))) ** -0.5


def entropy(d: Density) -> float:
    """Differential entropy ``-integral p ln p``; points below the floor contribute zero."""
    p = d.values
    safe = np.where(p > ENTROPY_FLOOR, p, 1.0)
    return float(-np.sum(np.where(p > ENTROPY_FLOOR, p * np.log(safe), 0.0)) * d.lattice.cell)


def ensemble_length(d: Density) -> float:
    """``exp(S)``: ensemble length in 1-D, ensemble volume in n-D."""
    return math.exp(entropy(d))


ensemble_volume = ensemble_length


def rms_volume(d: Density) -> float:
    return math.sqrt(float(np.linalg.det(moments(d)[1])))


class LengthSet(NamedTuple):
    fisher: float
    ensemble: float
    rms: float


def length_set(d: Density) -> LengthSet:
    """Fisher, ensemble and rms lengths (volumes for n > 1)."""
    return LengthSet(fisher_volume(d), ensemble_length(d), rms_volume(d))


class LengthChain(NamedTuple):
    rms_term: float
    ensemble: float
    fisher_term: float
    holds: bool


def check_length_chain(d: Density, rel_tol: float = 1e-8) -> LengthChain:
    """Evaluate ``(2 pi e)^(n/2) dV >= V >= (2 pi e)^(n/2) deltaV``.

    A violation is returned rather than raised; Gaussians sit exactly on the
    boundary so the comparison carries a relative tolerance.
    """
    lengths = length_set(d)
    c = _TWO_PI_E ** (d.ndim / 2)
    upper, middle, lower = c * lengths.rms, lengths.ensemble, c * lengths.fisher
    tol = rel_tol * upper
    return LengthChain(upper, middle, lower, bool(upper >= middle - tol and middle >= lower - tol))


class CramerRao(NamedTuple):
    variance: object
    inverse_fisher: object
    gap: float


def cramer_rao_gap(d: Density, tol: float = 1e-8) -> CramerRao:
    """Cramer-Rao slack: ``Var - 1/F`` in 1-D, min eigenvalue of ``Cov - F^-1`` in n-D."""
    cov = moments(d)[1]
    inv_f = np.linalg.inv(fisher_matrix(d))
    if d.ndim == 1:
        var, inv = float(cov[0, 0]), float(inv_f[0, 0])
        gap = var - inv
        scale = var
    else:
        var, inv = cov, inv_f
        gap = float(np.linalg.eigvalsh(cov - inv_f).min())
        scale = float(np.abs(cov).max())
    if gap < -tol * max(scale, 1.0):
        raise DiscretizationError(f"Cramer-Rao gap {gap:.3e} is negative; grid too coarse")
    return CramerRao(var, inv, gap)


class InformationBound(NamedTuple):
    information: float
    bound: float
    slack: float


def ensemble_information(ens: StateEnsemble, representation: str = POSITION,
                         tol: float = 1e-8) -> InformationBound:
    """Average information gained by measuring X on the ensemble, with its length bound."""
    convert = to_position if representation == POSITION else to_momentum
    members = [density_of(convert(s)) for s in ens.states]
    mixture = ensemble_density(ens, representation)
    info = entropy(mixture) - sum(w * entropy(m) for w, m in zip(ens.weights, members))
    if info < -tol:
        raise DiscretizationError(f"negative ensemble information {info:.3e}")
    spread = rms_volume(mixture)
    min_fisher = min(fisher_volume(m) for m in members)
    bound = math.log(spread / min_fisher)
    return InformationBound(info, bound, bound - info)


__all__ = [
    "NODE_THRESHOLD", "node_mask", "signed_root",
    "fisher_matrix", "fisher_information", "fisher_length", "fisher_volume", "entropy",
    "ensemble_length", "ensemble_volume", "rms_volume", "LengthSet", "length_set",
    "LengthChain", "check_length_chain", "CramerRao", "cramer_rao_gap",
    "InformationBound", "ensemble_information",
]
