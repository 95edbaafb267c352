"""Oracle suite run by ``lmg-metrology validate``.

Every check compares two independent routes to the same number and reports
the worst residual seen.  Random draws come from a seeded generator, so a
given seed always produces the same report.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sl

from . import analytic, thermodynamic
from .estimation import fidelity_qfi, qfi_thermal
from .spin_model import (ModelParams, Parameter, Symmetry, build_hamiltonian,
                         n4_block_basis, n4_block_matrices, symmetry_conjugation)
from .thermal import eigendecompose, gibbs_ensemble

REPORT_COLUMNS = ("check", "passed", "residual", "tolerance", "samples")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    samples: int

    def row(self):
        return (self.name, "pass" if self.passed else "FAIL", self.residual, self.tolerance, self.samples)


def _rel(a, b, floor=1e-30):
    return abs(a - b) / max(abs(b), floor)


def _check(name, residuals, tol):
    worst = float(max(residuals))
    return CheckResult(name, bool(worst < tol), worst, tol, len(residuals))


def _draw_points(rng, count, g_range=(0.05, 0.95), h_range=(0.05, 1.5)):
    g = rng.uniform(*g_range, size=count)
    h = rng.uniform(*h_range, size=count)
    return list(zip(g, h))


def run_suite(seed: int = 0, samples: int = 20, perturb: float = 0.0) -> list[CheckResult]:
    """Run every oracle check.

    ``perturb`` scales the spectral QFI by (1 + perturb) before it is compared
    with the closed forms; a nonzero value must make the suite fail.  It is a
    self-test hook and has no other effect.
    """
    rng = np.random.default_rng(seed)
    out = []
    pts = _draw_points(rng, samples)
    betas = rng.choice([1.0, 10.0, 100.0], size=samples)

    res_g, res_b = [], []
    for (g, h), b in zip(pts, betas):
        p = ModelParams(2, g, h)
        spectral = qfi_thermal(p, Parameter.ANISOTROPY, b).total * (1 + perturb)
        res_g.append(_rel(analytic.qfi_gamma_n2(g, h, b), spectral))
        spectral = qfi_thermal(p, Parameter.TEMPERATURE, b).total * (1 + perturb)
        res_b.append(_rel(analytic.qfi_beta_n2(g, h, b), spectral))
    out.append(_check("closed_form_gamma_n2", res_g, 1e-7))
    out.append(_check("closed_form_beta_n2", res_b, 1e-7))

    res = []
    for (g, h), b in zip(pts, betas):
        n = int(rng.integers(2, 7))
        p = ModelParams(n, g, h)
        var = gibbs_ensemble(eigendecompose(build_hamiltonian(p)), b).energy_variance
        gb = qfi_thermal(p, Parameter.TEMPERATURE, b).total
        res.append(abs(gb - var) / max(1.0, var))
    out.append(_check("energy_variance_identity", res, 1e-10))

    res = []
    for (g, h) in pts[:5]:
        b = float(rng.uniform(0.5, 5.0))
        p = ModelParams(int(rng.integers(2, 5)), g, h)
        which = Parameter.ANISOTROPY if rng.random() < 0.5 else Parameter.FIELD
        res.append(_rel(fidelity_qfi(p, which, b), qfi_thermal(p, which, b).total))
    out.append(_check("fidelity_oracle", res, 1e-3))

    res = []
    for (g, h) in pts[:5]:
        p = ModelParams(int(rng.integers(2, 6)), g, h)
        for sym in Symmetry:
            transformed, _ = symmetry_conjugation(p, sym, atol=np.inf)
            target = build_hamiltonian(p if sym is Symmetry.SPIN_FLIP else p.replace(gamma=1 / g))
            res.append(float(np.max(np.abs(transformed - target))))
    out.append(_check("symmetry_residuals", res, 1e-10))

    res = []
    for (g, h) in pts[:5]:
        gauge = analytic.N2_GAUGE
        res.append(np.max(np.abs(gauge @ analytic.appendix_h2(g, h) @ gauge
                                 - build_hamiltonian(ModelParams(2, g, h)))))
        res.append(np.max(np.abs(analytic.appendix_h3(g, h) - build_hamiltonian(ModelParams(3, g, h)))))
        blocks = n4_block_matrices(g, h)
        basis = n4_block_basis()
        rotated = basis.T @ build_hamiltonian(ModelParams(4, g, h)) @ basis
        res.append(np.max(np.abs(rotated - sl.block_diag(blocks["A"], blocks["B"], blocks["B"], blocks["C"]))))
        for n, spectrum in ((2, analytic.spectrum_n2), (3, analytic.spectrum_n3)):
            evals, vecs = spectrum(g, h)
            hm = build_hamiltonian(ModelParams(n, g, h))
            res.append(np.max(np.abs(hm @ vecs - vecs * evals)))
    out.append(_check("appendix_golden", res, 1e-10))

    y = analytic.Y_OPT
    out.append(_check("y_opt_constants", [abs((y - 2) * np.exp(y) - (y + 2)),
                                           abs(analytic.thermometry_profile(y) - analytic.F_OPT)], 1e-12))

    res = []
    for _ in range(samples):
        g = float(rng.uniform(-1, 0.99))
        h = float(rng.choice([rng.uniform(0, 0.99), rng.uniform(1.01, 3)]))
        c = thermodynamic.quadratic_coefficients(g, h)
        res.append(abs(np.sqrt(c["omega"] ** 2 - 4 * c["lam"] ** 2) - thermodynamic.gap(g, h)))
    out.append(_check("gap_match_contract", res, 1e-10))

    res = []
    for _ in range(5):
        g = float(rng.uniform(0.1, 0.9))
        h = float(rng.uniform(1.1, 2.0))
        b = float(rng.uniform(0.5, 5))
        gb = thermodynamic.thermo_qfi(g, h, b, Parameter.TEMPERATURE).total
        res.append(_rel(gb, thermodynamic.oscillator_energy_variance(thermodynamic.gap(g, h), b)))
    out.append(_check("fock_oscillator_variance", res, 1e-8))

    res = []
    for n in (2, 3, 4):
        for g in rng.uniform(0.1, 0.9, size=3):
            for hc in analytic.critical_lines(n, g):
                spec = eigendecompose(build_hamiltonian(ModelParams(n, g, hc)))
                res.append(spec.eigenvalues[1] - spec.eigenvalues[0])
    out.append(_check("critical_line_degeneracy", res, 1e-10))
    return out
