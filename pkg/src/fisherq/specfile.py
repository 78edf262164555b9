"""Plain-text state specifications.

A spec file holds one ``key = value`` pair per line; ``#`` starts a comment.
Example::

    kind = ho_eigenstate
    n = 3
    grid.min = -14
    grid.max = 14
    grid.n = 2048
    hbar = 1
    mass = 1
    omega = 1

Recognised kinds and their parameters (all optional unless marked):

========================  =====================================================
``gaussian``              ``x0``, ``p0``, ``sigma`` (default 1), ``chirp``
``coherent``              ``x0``, ``p0``
``squeezed``              ``r`` (required), ``x0``, ``p0``
``ho_eigenstate``         ``n`` (required)
``superposition``         ``ns`` and ``coeffs`` (required, comma separated;
                          oscillator levels with complex weights like ``1j``)
``thermal_ho``            ``temperature`` (required)
``tabulated``             ``file`` (required): CSV with columns x, re, im on a
                          uniform grid; path relative to the spec file
``random``                ``seed`` (default 0), ``smoothness`` (default 0.5)
========================  =====================================================

Grid keys ``grid.min``, ``grid.max`` and ``grid.n`` may be omitted, in which case
the grid is sized automatically from the state's widths.  ``tabulated``
states take their grid from the file.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from . import states
from .errors import SpecError
from .grid import GridSpec, Marginals, WaveFunction

KINDS = {
    "gaussian": {"x0", "p0", "sigma", "chirp"},
    "coherent": {"x0", "p0"},
    "squeezed": {"r", "x0", "p0"},
    "ho_eigenstate": {"n"},
    "superposition": {"ns", "coeffs"},
    "thermal_ho": {"temperature"},
    "tabulated": {"file"},
    "random": {"seed", "smoothness"},
}
REQUIRED = {
    "squeezed": {"r"},
    "ho_eigenstate": {"n"},
    "superposition": {"ns", "coeffs"},
    "thermal_ho": {"temperature"},
    "tabulated": {"file"},
}
COMMON = ("hbar", "mass", "omega")
GRID_KEYS = ("grid.min", "grid.max", "grid.n")
DEFAULT_POINTS = 2048
TEXT_PARAMS = {"file", "ns", "coeffs"}


@dataclass(frozen=True)
class StateSpec:
    kind: str
    params: dict = field(default_factory=dict)
    grid_min: Optional[float] = None
    grid_max: Optional[float] = None
    grid_n: Optional[int] = None
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    base_dir: str = "."

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown state kind {self.kind!r}; expected one of {sorted(KINDS)}")
        unknown = set(self.params) - KINDS[self.kind]
        if unknown:
            raise SpecError(f"unknown parameter(s) for {self.kind}: {', '.join(sorted(unknown))}")
        missing = REQUIRED.get(self.kind, set()) - set(self.params)
        if missing:
            raise SpecError(f"{self.kind} needs parameter(s): {', '.join(sorted(missing))}")
        for name in COMMON:
            if not getattr(self, name) > 0:
                raise SpecError(f"{name} must be positive")
        given = [v is not None for v in (self.grid_min, self.grid_max)]
        if any(given) and not all(given):
            raise SpecError("grid.min and grid.max must be given together")
        if all(given) and not self.grid_max > self.grid_min:
            raise SpecError("grid.max must exceed grid.min")
        if self.grid_n is not None and self.grid_n < 8:
            raise SpecError("grid.n must be at least 8")

    # -- editing ----------------------------------------------------------
    def parameter(self, name: str):
        if name in COMMON:
            return getattr(self, name)
        return self.params[name]

    def with_parameter(self, name: str, value) -> "StateSpec":
        """Copy with one existing parameter replaced; used by sweeps."""
        if name in COMMON:
            return replace(self, **{name: _number(name, value)})
        if name not in self.params:
            raise SpecError(f"parameter {name!r} is not set in the template")
        params = dict(self.params)
        params[name] = value if name in TEXT_PARAMS else _number(name, value)
        return replace(self, params=params)

    def with_grid(self, n: Optional[int] = None, width: Optional[float] = None) -> "StateSpec":
        """Override the point count and/or set a grid of full ``width`` centred on zero."""
        out = self
        if n is not None:
            out = replace(out, grid_n=int(n))
        if width is not None:
            if not width > 0:
                raise SpecError("grid width must be positive")
            out = replace(out, grid_min=-width / 2, grid_max=width / 2)
        return out

    def with_seed(self, seed: Optional[int]) -> "StateSpec":
        if seed is None or self.kind != "random":
            return self
        return replace(self, params={**self.params, "seed": int(seed)})

    # -- building ---------------------------------------------------------
    def _float(self, name: str, default: float = 0.0) -> float:
        return float(self.params.get(name, default))

    def _half_width(self, n: int) -> float:
        """Automatic half-width: the state's extent plus ten widths.

        Oscillator eigenstates and their superpositions have nodes in both
        representations, so their grid is also widened to at least the
        self-dual size, where position and momentum spacings are equal in
        oscillator units.
        """
        length = math.sqrt(self.hbar / (self.mass * self.omega))
        kind = self.kind
        if kind in ("gaussian", "coherent", "squeezed"):
            return self._packet_half_width(n, length)
        if kind in ("ho_eigenstate", "superposition"):
            levels = [self._int("n")] if kind == "ho_eigenstate" else self._levels()
            extent = (math.sqrt(2 * max(levels) + 1) + 10) * length
            return max(extent, math.sqrt(math.pi * n / 2) * length)
        if kind == "thermal_ho":
            var_x, _ = states.thermal_variances(self._float("temperature"), self.mass, self.omega, self.hbar)
            return 10 * math.sqrt(var_x)
        return 10.0

    def _packet_half_width(self, n: int, length: float) -> float:
        """Half-width giving a Gaussian packet the same points per width in x and p.

        Never narrower than ten widths around the centre, and never so wide
        that the momentum lattice loses ten momentum widths around ``p0``.
        """
        x0, p0 = abs(self._float("x0")), abs(self._float("p0"))
        if self.kind == "gaussian":
            sx = self._float("sigma", 1.0)
            sp = self.hbar / (2 * sx) * math.sqrt(1 + (4 * self._float("chirp") * sx ** 2 / self.hbar) ** 2)
        else:
            r = self._float("r") if self.kind == "squeezed" else 0.0
            sx = length / math.sqrt(2) * math.exp(-r)
            sp = self.hbar / (2 * sx)
        extent = x0 + 10 * sx
        balanced = math.sqrt(math.pi * self.hbar * n * sx / (2 * sp))
        widest = math.pi * self.hbar * n / (2 * (p0 + 10 * sp))
        return max(extent, min(balanced, widest))

    def grid(self) -> GridSpec:
        if self.kind == "tabulated":
            return self._tabulated()[0]
        n = self.grid_n or DEFAULT_POINTS
        if self.grid_min is None:
            w = self._half_width(n)
            return GridSpec.line(-w, w, n, self.hbar)
        return GridSpec.line(self.grid_min, self.grid_max, n, self.hbar)

    def _int(self, name: str) -> int:
        value = self.params[name]
        if float(value) != int(float(value)):
            raise SpecError(f"{name} must be an integer")
        return int(float(value))

    def _levels(self) -> list[int]:
        try:
            levels = [int(v) for v in _split(self.params["ns"])]
        except ValueError as exc:
            raise SpecError(f"ns must list integers: {exc}") from None
        return levels

    def _coeffs(self) -> list[complex]:
        try:
            return [complex(v.replace(" ", "")) for v in _split(self.params["coeffs"])]
        except ValueError as exc:
            raise SpecError(f"coeffs must list numbers: {exc}") from None

    def _tabulated(self) -> tuple[GridSpec, np.ndarray]:
        path = self.params["file"]
        if not os.path.isabs(path):
            path = os.path.join(self.base_dir, path)
        return load_tabulated(path, self.hbar)

    def build(self) -> Union[WaveFunction, Marginals]:
        """The state this spec describes; thermal states come back as a marginal pair."""
        g = self.grid()
        p = self.params
        m, w = self.mass, self.omega
        kind = self.kind
        if kind == "gaussian":
            return states.gaussian(g, self._float("x0"), self._float("p0"), self._float("sigma", 1.0),
                                   self._float("chirp"))
        if kind == "coherent":
            return states.coherent(g, self._float("x0"), self._float("p0"), m, w)
        if kind == "squeezed":
            return states.squeezed(g, self._float("r"), self._float("x0"), self._float("p0"), m, w)
        if kind == "ho_eigenstate":
            return states.ho_eigenstate(g, self._int("n"), m, w)
        if kind == "superposition":
            levels, coeffs = self._levels(), self._coeffs()
            if len(levels) != len(coeffs):
                raise SpecError("ns and coeffs must have the same length")
            return states.superposition(coeffs, [states.ho_eigenstate(g, n, m, w) for n in levels])
        if kind == "thermal_ho":
            return states.thermal_ho_densities(g, self._float("temperature"), m, w)
        if kind == "tabulated":
            grid, amps = self._tabulated()
            return WaveFunction.from_values(grid, amps)
        return states.random_state(g, int(p.get("seed", 0)), self._float("smoothness", 0.5))

    def as_dict(self) -> dict:
        """Canonical description used in run manifests."""
        out = {"kind": self.kind, "params": {k: self.params[k] for k in sorted(self.params)}}
        out.update(grid={"min": self.grid_min, "max": self.grid_max, "n": self.grid_n},
                   hbar=self.hbar, mass=self.mass, omega=self.omega)
        return out


def _split(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(v) for v in text]
    return [v.strip() for v in str(text).split(",") if v.strip()]


def _number(key: str, text) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise SpecError(f"{key} must be a number, got {text!r}") from None
    if not math.isfinite(value):
        raise SpecError(f"{key} must be finite")
    return value


def parse_spec(text: str, base_dir: str = ".") -> StateSpec:
    """Parse spec-file text into a :class:`StateSpec`."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise SpecError(f"line {lineno}: empty key or value")
        if key in entries:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    if "kind" not in entries:
        raise SpecError("spec has no 'kind'")
    kind = entries.pop("kind")
    kw = {}
    for name in COMMON:
        if name in entries:
            kw[name] = _number(name, entries.pop(name))
    if "grid.min" in entries:
        kw["grid_min"] = _number("grid.min", entries.pop("grid.min"))
    if "grid.max" in entries:
        kw["grid_max"] = _number("grid.max", entries.pop("grid.max"))
    if "grid.n" in entries:
        n = _number("grid.n", entries.pop("grid.n"))
        if n != int(n):
            raise SpecError("grid.n must be an integer")
        kw["grid_n"] = int(n)
    params = {k: (v if k in TEXT_PARAMS else _number(k, v)) for k, v in entries.items()}
    return StateSpec(kind, params, base_dir=base_dir, **kw)


def load_spec(path: str) -> StateSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None
    return parse_spec(text, os.path.dirname(os.path.abspath(path)))


def load_tabulated(path: str, hbar: float = 1.0) -> tuple[GridSpec, np.ndarray]:
    """Read ``x, re, im`` rows; a header row and ``#`` comments are skipped."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise SpecError(f"cannot read tabulated state: {exc}") from None
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise SpecError(f"tabulated state has a non-numeric entry: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 8:
        raise SpecError("tabulated state needs at least 8 rows of x, re, im")
    x = data[:, 0]
    h = np.diff(x)
    if h[0] <= 0 or np.abs(h - h[0]).max() > 1e-9 * abs(h[0]) * len(x):
        raise SpecError("tabulated x values must be increasing and uniformly spaced")
    step = (x[-1] - x[0]) / (len(x) - 1)
    grid = GridSpec.line(float(x[0]), float(x[0] + len(x) * step), len(x), hbar)
    return grid, data[:, 1] + 1j * data[:, 2]


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True
