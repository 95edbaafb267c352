"""QFI surfaces, optimal fields and robustness to field noise."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from itertools import product

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from .analytic import critical_lines, global_critical_line
from .errors import DomainError, LMGError, NoMaximumError
from .estimation import magnetization_fisher, qfi_thermal
from .spin_model import ModelParams, Parameter
from .thermal import eigendecompose, spectral_gap
from .spin_model import build_hamiltonian
from . import thermodynamic

MAX_POINTS = 10_000_000
COARSE_STEP = 1e-3
REFINE_XTOL = 1e-8
TIE_RTOL = 1e-9
AT_TOL = 1e-3
FLAT_TOL = 1e-30
QUAD_NODES = 41
QUAD_WIDTH = 6.0

SURFACE_COLUMNS = ("n_sites", "gamma", "field", "beta", "g_gamma_total",
                   "g_gamma_classical", "g_gamma_quantum", "g_beta",
                   "fi_magnetization", "gap", "error")
THERMO_COLUMNS = ("gamma", "field", "beta", "g_gamma_total", "g_gamma_classical",
                  "g_gamma_quantum", "g_beta", "gap", "error")
OPTIMAL_COLUMNS = ("n_sites", "gamma", "beta", "h_star", "qfi_at_star",
                   "h_critical", "branch")
ALL_QUANTITIES = frozenset({"g_gamma", "g_beta", "fi_magnetization", "gap"})


def format_number(x) -> str:
    """17 significant digits, locale independent, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


@dataclass
class ScanTable:
    """Rows of named values; a row with a non-empty ``error`` carries no values."""

    columns: tuple
    rows: list = dc_field(default_factory=list)
    axes: dict = dc_field(default_factory=dict)

    def __len__(self):
        return len(self.rows)

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([np.nan if r[i] is None else r[i] for r in self.rows], dtype=float)

    @property
    def failed_rows(self):
        i = self.columns.index("error") if "error" in self.columns else None
        return [] if i is None else [r for r in self.rows if r[i]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_number(x) for x in row])
        return buf.getvalue()

    def to_json(self) -> str:
        # numbers go through the same 17-digit formatting so output is stable
        records = []
        for row in self.rows:
            rec = {}
            for name, x in zip(self.columns, row):
                if x is None or isinstance(x, str):
                    rec[name] = x
                elif isinstance(x, (int, np.integer)):
                    rec[name] = int(x)
                else:
                    rec[name] = float(format_number(x))
            records.append(rec)
        return json.dumps({"columns": list(self.columns), "rows": records}, indent=1) + "\n"

    def write(self, path, fmt="csv"):
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _map(fn, items, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    return [fn(x) for x in items]


def _surface_point(args):
    n_sites, gamma, field, beta, quantities = args
    values = dict.fromkeys(SURFACE_COLUMNS[4:-1])
    try:
        params = ModelParams(n_sites, gamma, field)
        if "g_gamma" in quantities:
            q = qfi_thermal(params, Parameter.ANISOTROPY, beta)
            values.update(g_gamma_total=q.total, g_gamma_classical=q.classical_term,
                          g_gamma_quantum=q.quantum_term)
        if "g_beta" in quantities:
            values["g_beta"] = qfi_thermal(params, Parameter.TEMPERATURE, beta).total
        if "fi_magnetization" in quantities:
            values["fi_magnetization"] = magnetization_fisher(params, Parameter.ANISOTROPY, beta)
        if "gap" in quantities:
            values["gap"] = spectral_gap(eigendecompose(build_hamiltonian(params)))
        error = ""
    except LMGError as exc:
        values = dict.fromkeys(values)
        error = f"{type(exc).__name__}: {exc}"
    return (n_sites, gamma, field, beta, *values.values(), error)


def _check_grid(gammas, fields, betas):
    gammas, fields, betas = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (gammas, fields, betas))
    if min(len(gammas), len(fields), len(betas)) == 0:
        raise DomainError("every scan axis needs at least one value")
    if len(gammas) * len(fields) * len(betas) > MAX_POINTS:
        raise DomainError(f"scan exceeds {MAX_POINTS} points")
    return gammas, fields, betas


def scan(n_sites, gammas, fields, betas, quantities=ALL_QUANTITIES, workers=1) -> ScanTable:
    """Evaluate the requested quantities on a gamma x field x beta grid.

    Rows are ordered gamma-major, then field, then beta.  Points that raise a
    package error become rows with an error message and empty values.
    """
    gammas, fields, betas = _check_grid(gammas, fields, betas)
    quantities = frozenset(quantities)
    unknown = quantities - ALL_QUANTITIES
    if unknown:
        raise DomainError(f"unknown quantities {sorted(unknown)}")
    items = [(n_sites, float(g), float(h), float(b), quantities)
             for g, h, b in product(gammas, fields, betas)]
    rows = _map(_surface_point, items, workers)
    return ScanTable(SURFACE_COLUMNS, rows, {"gamma": gammas, "field": fields, "beta": betas})


def _thermo_point(args):
    gamma, field, beta, cutoff = args
    try:
        q = thermodynamic.thermo_qfi(gamma, field, beta, Parameter.ANISOTROPY, cutoff)
        gb = thermodynamic.thermo_qfi(gamma, field, beta, Parameter.TEMPERATURE, cutoff)
        return (gamma, field, beta, q.total, q.classical_term, q.quantum_term, gb.total,
                thermodynamic.gap(gamma, field), "")
    except LMGError as exc:
        return (gamma, field, beta, None, None, None, None, None, f"{type(exc).__name__}: {exc}")


def thermo_scan(gammas, fields, betas, cutoff=None, workers=1) -> ScanTable:
    """Thermodynamic-limit QFIs on a grid, same ordering rules as ``scan``."""
    gammas, fields, betas = _check_grid(gammas, fields, betas)
    items = [(float(g), float(h), float(b), cutoff) for g, h, b in product(gammas, fields, betas)]
    rows = _map(_thermo_point, items, workers)
    return ScanTable(THERMO_COLUMNS, rows, {"gamma": gammas, "field": fields, "beta": betas})


# optimal fields -------------------------------------------------------------

@dataclass(frozen=True)
class OptimalFieldResult:
    field_star: float
    qfi_at_star: float
    nearest_critical: float
    branch: str  # "above", "below" or "at"


def _objective(n_sites, gamma, beta, target):
    def f(h):
        return qfi_thermal(ModelParams(n_sites, gamma, h), target, beta).total
    return f


def _refine(f, grid, values, i):
    """Golden-section refinement of the coarse maximum at grid index i."""
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    best_h, best_v = grid[i], values[i]
    neg = lambda h: -f(h)
    if 0 < i < len(grid) - 1 and values[i] > values[i - 1] and values[i] > values[i + 1]:
        res = minimize_scalar(neg, bracket=(lo, grid[i], hi), method="golden",
                              tol=REFINE_XTOL / max(abs(grid[i]), REFINE_XTOL))
        h = float(res.x)
    else:
        # boundary or plateau: fall back to a bounded search on the bracket
        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                              options={"xatol": REFINE_XTOL})
        h = float(res.x)
    v = f(h)
    if v > best_v and lo <= h <= hi:
        return h, v
    return float(best_h), float(best_v)


def _local_maxima(values):
    v = values
    idx = []
    for i in range(len(v)):
        left = v[i - 1] if i > 0 else -np.inf
        right = v[i + 1] if i < len(v) - 1 else -np.inf
        if v[i] > left and v[i] >= right:
            idx.append(i)
    return idx


def optimal_field(n_sites: int, gamma: float, beta: float, target="anisotropy",
                  h_max: float = 2.0, step: float = COARSE_STEP) -> list[OptimalFieldResult]:
    """Fields maximizing the anisotropy or temperature QFI.

    Anisotropy: all global maximizers (ties within 1e-9 relative), sorted.
    Temperature: for every critical line the nearest local maximum below and
    above it, when one exists.
    """
    target = Parameter(target)
    if target is Parameter.FIELD:
        raise DomainError("optimal_field targets anisotropy or temperature")
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma!r}")
    if beta <= 0:
        raise DomainError("beta must be positive")
    lines = critical_lines(n_sites, gamma)
    f = _objective(n_sites, gamma, beta, target)
    grid = np.linspace(0.0, h_max, int(round(h_max / step)) + 1)
    values = np.array([f(h) for h in grid])
    if values.max() - values.min() < FLAT_TOL:
        raise NoMaximumError("QFI is flat over the search interval")
    peaks = [_refine(f, grid, values, i) for i in _local_maxima(values)]

    def nearest(h):
        return min(lines, key=lambda c: abs(h - c))

    if target is Parameter.ANISOTROPY:
        best = max(v for _, v in peaks)
        out = []
        for h, v in sorted(peaks):
            if v >= best * (1 - TIE_RTOL):
                hc = nearest(h)
                branch = "at" if abs(h - hc) <= AT_TOL else ("above" if h > hc else "below")
                out.append(OptimalFieldResult(h, v, hc, branch))
        return out

    out = []
    for hc in lines:
        own = [(h, v) for h, v in peaks if nearest(h) == hc]
        below = [p for p in own if p[0] < hc]
        above = [p for p in own if p[0] > hc]
        if below:
            h, v = max(below)
            out.append(OptimalFieldResult(h, v, hc, "below"))
        if above:
            h, v = min(above)
            out.append(OptimalFieldResult(h, v, hc, "above"))
    return out


# robustness -------------------------------------------------------------------

def robustness_ratio(n_sites: int, gamma: float, beta: float, sigma: float,
                     nodes: int = QUAD_NODES) -> float:
    """Field-averaged anisotropy QFI over the QFI at the critical field.

    The field is Gaussian around the global-maximum critical line with width
    sigma, truncated to h >= 0 and renormalized.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    hc = global_critical_line(n_sites, gamma)
    lo, hi = max(0.0, hc - QUAD_WIDTH * sigma), hc + QUAD_WIDTH * sigma
    x, w = np.polynomial.legendre.leggauss(nodes)
    h = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * w * norm.pdf(h, loc=hc, scale=sigma)
    f = _objective(n_sites, gamma, beta, Parameter.ANISOTROPY)
    g = np.array([f(hk) for hk in h])
    return float((w @ g) / w.sum() / f(hc))
