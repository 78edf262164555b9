"""Report assembly for the command line: identity checks, tables, sweeps and manifests."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from . import __version__
from .continuity import EvolutionConfig, continuity_residual, energy, evolve
from .errors import DiscretizationError, MaskDominatedError
from .grid import GridSpec, Marginals, WaveFunction, ensemble_marginals, marginals_of, moments
from .info import check_length_chain, cramer_rao_gap, length_set
from .nonclassical import (
    classical_momentum,
    classical_position,
    fisher_heisenberg_chain,
    joint_nonclassicality,
    nonclassical_covariances,
    quantum_potential,
    variance_split_momentum,
    variance_split_position,
)
from .states import ho_eigenstate

TOOL = "fisherq"


class Check(NamedTuple):
    name: str
    residual: float
    tol: float
    ok: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "residual": clean(self.residual), "tol": self.tol,
                "ok": self.ok, "note": self.note}


def _check(name: str, residual: float, tol: float, note: str = "") -> Check:
    return Check(name, float(residual), tol, bool(residual <= tol), note)


def _guarded(name: str, tol: float, fn) -> Check:
    """Run one identity; arithmetic failures become failed checks instead of exceptions."""
    try:
        return _check(name, fn(), tol)
    except (DiscretizationError, MaskDominatedError) as exc:
        return Check(name, math.nan, tol, False, str(exc))


def clean(value):
    """JSON-safe copy: arrays to lists, non-finite floats to None."""
    if isinstance(value, dict):
        return {k: clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


# --- measure ----------------------------------------------------------------

def _lengths(marg: Marginals) -> dict:
    out = {}
    for tag, dens in (("x", marg.position), ("p", marg.momentum)):
        lengths = length_set(dens)
        chain = check_length_chain(dens)
        out[tag] = {"fisher": lengths.fisher, "ensemble": lengths.ensemble, "rms": lengths.rms,
                    "chain": {"rms_term": chain.rms_term, "ensemble": chain.ensemble,
                              "fisher_term": chain.fisher_term, "holds": chain.holds}}
    return out


def _pure_1d_checks(psi: WaveFunction, report) -> list[Check]:
    hbar = psi.grid.hbar
    checks = []

    def mean_gap(field_fn, dens_fn):
        def run():
            field = field_fn()
            mean, cov = moments(dens_fn())
            return abs(mean[0] - field.mean()[0]) / math.sqrt(cov[0, 0])
        return run

    marg = marginals_of(psi)
    checks.append(_guarded("mean_p_classical", 1e-6,
                           mean_gap(lambda: classical_momentum(psi), lambda: marg.momentum)))
    checks.append(_guarded("mean_x_classical", 1e-6,
                           mean_gap(lambda: classical_position(psi), lambda: marg.position)))
    checks.append(_guarded("variance_split_p", 1e-6,
                           lambda: variance_split_momentum(psi, tol=math.inf).residual))
    checks.append(_guarded("variance_split_x", 1e-6,
                           lambda: variance_split_position(psi, tol=math.inf).residual))
    checks.append(_guarded("fisher_x_times_dp_nc", 1e-6,
                           lambda: abs(fisher_heisenberg_chain(psi, tol=math.inf).fisher_nonclassical
                                       - hbar / 2) / (hbar / 2)))
    checks.append(_check("fisher_p_times_dx_nc",
                         abs(report.delta_p * report.dx_nc_split - hbar / 2) / (hbar / 2), 1e-6))
    checks.append(_check("j_nc_variance_vs_fisher",
                         abs(report.j_nc_variance - report.j_nc) / report.j_nc, 1e-6))
    chain = fisher_heisenberg_chain(psi, tol=math.inf)
    order = max(chain.fisher_spread - chain.spread_product,
                chain.fisher_nonclassical - chain.fisher_spread, 0.0) / (hbar / 2)
    checks.append(_check("heisenberg_chain_order", order, 1e-8))
    if report.commutator_rhs is not None:
        checks.append(_check("commutator_bound",
                             max(report.commutator_rhs - report.j_nc, 0.0), 1e-6))
    checks.append(_guarded("quantum_potential_mean", 1e-4, lambda: _qp_residual(psi)))
    return checks


def _qp_residual(psi: WaveFunction) -> float:
    q = quantum_potential(psi, tol=math.inf)
    return abs(q.mean - q.fisher_energy) / abs(q.fisher_energy)


def _common_checks(marg: Marginals, report) -> list[Check]:
    checks = [_check("inverse_relation", abs(report.j_nc * report.j_r - 1.0), 1e-12)]
    for tag, dens in (("x", marg.position), ("p", marg.momentum)):
        chain = check_length_chain(dens)
        checks.append(Check(f"length_chain_{tag}", 0.0 if chain.holds else 1.0, 0.0, chain.holds))
        checks.append(_guarded(f"cramer_rao_{tag}", 1e-8,
                               lambda dens=dens: max(-cramer_rao_gap(dens, tol=math.inf).gap, 0.0)
                               / max(float(np.abs(moments(dens)[1]).max()), 1.0)))
    return checks


def measure_report(state) -> tuple[dict, list[Check]]:
    """Nonclassicality report, lengths, chain verdicts and identity checks of one state."""
    if isinstance(state, WaveFunction):
        report = joint_nonclassicality(state, tol=math.inf)
        marg = marginals_of(state)
    else:
        report = joint_nonclassicality(state)
        marg = state if isinstance(state, Marginals) else ensemble_marginals(state)
    checks = _common_checks(marg, report)
    if isinstance(state, WaveFunction):
        if state.ndim == 1:
            checks += _pure_1d_checks(state, report)
        else:
            checks.append(_guarded("covariance_split", 1e-6,
                                   lambda: nonclassical_covariances(state, tol=math.inf).residual))
    body = dict(report.to_dict())
    body.update({k: v for k, v in report.to_dict(extended=True).items() if k not in body})
    body["lengths"] = _lengths(marg)
    return body, checks


# --- oscillator table -------------------------------------------------------

OSCILLATOR_COLUMNS = ("n", "spread_product", "fisher_product", "exact", "j_nc", "j_r")


def oscillator_grid(n: int, points: int = 2048, hbar: float = 1.0, mass: float = 1.0,
                    omega: float = 1.0, width: Optional[float] = None) -> GridSpec:
    length = math.sqrt(hbar / (mass * omega))
    half = width / 2 if width is not None else (math.sqrt(2 * n + 1) + 10) * length
    return GridSpec.centered(half, points, hbar)


def oscillator_row(n: int, points: int = 2048, hbar: float = 1.0, mass: float = 1.0,
                   omega: float = 1.0, width: Optional[float] = None) -> dict:
    psi = ho_eigenstate(oscillator_grid(n, points, hbar, mass, omega, width), n, mass, omega)
    marg = marginals_of(psi)
    spread = math.sqrt(moments(marg.position)[1][0, 0] * moments(marg.momentum)[1][0, 0])
    report = joint_nonclassicality(psi)
    return {"n": n, "spread_product": spread, "fisher_product": report.delta_x * report.delta_p,
            "exact": hbar / (4 * n + 2), "j_nc": report.j_nc, "j_r": report.j_r}


def oscillator_checks(row: dict, hbar: float = 1.0) -> list[Check]:
    exact = row["exact"]
    return [
        _check(f"n{row['n']}_fisher_product", abs(row["fisher_product"] - exact) / exact, 1e-4),
        _check(f"n{row['n']}_product_identity",
               abs(row["fisher_product"] * row["spread_product"] - hbar ** 2 / 4) / (hbar ** 2 / 4), 1e-6),
    ]


# --- sweep ------------------------------------------------------------------

SWEEP_FIELDS = ("j_nc", "j_r", "delta_x", "delta_p", "dx_nc", "dp_nc", "commutator_rhs",
                "masked_mass_x", "masked_mass_p", "fisher_x", "ensemble_x", "rms_x",
                "fisher_p", "ensemble_p", "rms_p", "chain_x", "chain_p", "failed_checks")


def flatten_measure(body: dict, checks: Sequence[Check]) -> dict:
    flat = {k: body.get(k) for k in SWEEP_FIELDS[:9]}
    for tag in ("x", "p"):
        lengths = body["lengths"][tag]
        flat[f"fisher_{tag}"] = lengths["fisher"]
        flat[f"ensemble_{tag}"] = lengths["ensemble"]
        flat[f"rms_{tag}"] = lengths["rms"]
        flat[f"chain_{tag}"] = lengths["chain"]["holds"]
    flat["failed_checks"] = ";".join(c.name for c in checks if not c.ok)
    return flat


# --- continuity -------------------------------------------------------------

def continuity_report(psi: WaveFunction, config: EvolutionConfig, refine: bool = True) -> dict:
    """Residual at the requested resolution and, optionally, with dt and h halved."""
    base = continuity_residual(psi, config)
    final = evolve(psi, config)
    norm = float(np.sum(np.abs(final.amplitudes) ** 2) * final.grid.cell)
    out = {"residual": base.residual, "rate_norm": base.rate_norm, "flux_norm": base.flux_norm,
           "duration": config.duration, "norm": norm,
           "energy_drift": energy(final, config) - energy(psi, config)}
    if refine:
        fine_psi = refine_state(psi)
        fine_cfg = EvolutionConfig(config.potential, config.mass, config.omega,
                                   config.dt / 2, config.steps * 2)
        fine = continuity_residual(fine_psi, fine_cfg)
        ratio = base.residual / fine.residual if fine.residual > 0 else math.inf
        out.update(refined_residual=fine.residual, refinement_ratio=ratio,
                   refinement_at_least_4x=bool(ratio >= 4.0))
    return out


def refine_state(psi: WaveFunction) -> WaveFunction:
    """The same band-limited state on a grid with twice the points and half the spacing."""
    if psi.ndim != 1:
        raise ValueError("refine_state handles one-dimensional states")
    a = psi.grid.axes[0]
    fine = GridSpec.line(a.lower, a.upper, 2 * a.n, psi.grid.hbar)
    spectrum = np.fft.fft(psi.amplitudes)
    n = a.n
    padded = np.zeros(2 * n, dtype=complex)
    half = n // 2
    padded[:half] = spectrum[:half]
    padded[-half:] = spectrum[-half:]
    padded[half] = 0.5 * spectrum[half]
    padded[-half] = 0.5 * spectrum[half]
    return WaveFunction.from_values(fine, np.fft.ifft(padded) * 2)


# --- manifest and output ----------------------------------------------------

@dataclass(frozen=True)
class RunManifest:
    command: str
    spec: Optional[dict]
    grid: Optional[dict]
    config: dict
    outputs: tuple
    seed: Optional[int]
    version: str = __version__

    def as_dict(self) -> dict:
        return {"command": self.command, "spec": self.spec, "grid": self.grid,
                "config": self.config, "outputs": list(self.outputs), "seed": self.seed,
                "tool": TOOL, "version": self.version}

    @property
    def digest(self) -> str:
        text = json.dumps(clean(self.as_dict()), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def meta(self) -> dict:
        return {"tool": TOOL, "version": self.version, "manifest_hash": self.digest,
                "manifest": clean(self.as_dict())}

    def header_lines(self) -> list[str]:
        return [f"{TOOL} {self.version}", f"manifest sha256 {self.digest}"]


def grid_dict(grid: GridSpec) -> dict:
    return {"axes": [{"min": a.lower, "max": a.upper, "n": a.n} for a in grid.axes],
            "hbar": grid.hbar}


def json_text(meta: dict, body: dict) -> str:
    payload = {"meta": meta}
    payload.update(clean(body))
    return json.dumps(payload, indent=2, sort_keys=False, allow_nan=False) + "\n"


def csv_text(header: Iterable[str], columns: Sequence[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _cell(value) -> str:
    value = clean(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


__all__ = [
    "Check", "clean", "measure_report", "OSCILLATOR_COLUMNS", "oscillator_grid", "oscillator_row",
    "oscillator_checks", "SWEEP_FIELDS", "flatten_measure", "continuity_report", "refine_state",
    "RunManifest", "grid_dict", "json_text", "csv_text",
]
