"""Closed-form results for small LMG chains and the two-level picture.

These serve as oracles for the spectral machinery in ``estimation``.  All
thermal expressions are written in terms of normalized Boltzmann weights of
the N = 2 levels {-v/2, v/2, -r/2, r/2}, which keeps them finite for
beta up to 1e4 and beyond.

Shorthand: u = gamma - 1, v = gamma + 1, r = sqrt(u^2 + 16 h^2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SingularPointError
from .thermal import boltzmann_weights


@dataclass(frozen=True)
class ReducedParams:
    u: float
    v: float
    r: float
    kappa: float | None = None


def reduced_params(gamma: float, field: float, beta: float | None = None) -> ReducedParams:
    u, v = gamma - 1.0, gamma + 1.0
    r = float(np.hypot(u, 4.0 * field))
    kappa = None if beta is None else beta * v
    return ReducedParams(u, v, r, kappa)


def _n2_weights(rp: ReducedParams, beta: float):
    # order: -v/2, v/2, -r/2, r/2
    energies = np.array([-rp.v / 2, rp.v / 2, -rp.r / 2, rp.r / 2])
    weights, _ = boltzmann_weights(energies, beta)
    return weights


def qfi_gamma_n2(gamma: float, field: float, beta: float) -> float:
    """Anisotropy QFI of the N = 2 Gibbs state.

    Regrouped form of the published expression: the beta^2 bracket becomes a
    sum of weight products B_i B_j and the second term is the weight contrast
    (B_+ - B_-)^2 / (B_+ + B_-) of the two r-levels.
    """
    rp = reduced_params(gamma, field)
    u, r = rp.u, rp.r
    if r == 0.0:
        raise SingularPointError("qfi_gamma_n2 is singular at gamma = 1, h = 0")
    bmv, bpv, bmr, bpr = _n2_weights(rp, beta)
    bracket = (0.5 * (u - r) ** 2 * (bpv * bpr + bmv * bmr)
               + 0.5 * (u + r) ** 2 * (bpv * bmr + bmv * bpr)
               + 4.0 * (8.0 * field ** 2 + u ** 2) * bmv * bpv)
    contrast = (bpr - bmr) ** 2 / (bpr + bmr) if bpr + bmr > 0 else 0.0
    return float((beta ** 2 * bracket / 2.0 + 16.0 * field ** 2 / r ** 2 * contrast) / r ** 2)


def _sech2(x):
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def qfi_gamma_n2_critical(gamma: float, beta: float) -> float:
    """Anisotropy QFI of N = 2 on its critical line h = sqrt(gamma)/2."""
    if gamma < 0:
        raise DomainError("the N = 2 critical line needs gamma >= 0")
    k = beta * (1.0 + gamma)
    num = 8 * gamma + k ** 2 + gamma * (gamma * k ** 2 - 8) * _sech2(k / 2)
    return float(num / (4 * (1 + gamma) ** 4))


def _crossing_sign(gamma, field):
    # +1 above the N = 2 critical line (r >= v), -1 below
    return 1.0 if field >= np.sqrt(max(gamma, 0.0)) / 2 else -1.0


def qfi_gamma_n2_asymptotic(gamma: float, field: float, beta: float) -> float:
    """Low-temperature form beta^2 (u - r)^2 / (4 r^2) exp(-beta |v - r| / 2).

    This is the two-level classical term.  The finite eigenvector
    contribution is not included, so the form tracks the diverging part only.
    """
    rp = reduced_params(gamma, field)
    u, v, r = rp.u, rp.v, rp.r
    s = _crossing_sign(gamma, field)
    return float(beta ** 2 * (u - r) ** 2 / (4 * r ** 2) * np.exp(s * beta * (v - r) / 2))


def qfi_beta_n2(gamma: float, field: float, beta: float) -> float:
    """Temperature QFI (energy variance) of the N = 2 Gibbs state."""
    if beta <= 0:
        raise DomainError("qfi_beta_n2 needs beta > 0")
    rp = reduced_params(gamma, field)
    v, r = rp.v, rp.r
    bmv, bpv, bmr, bpr = _n2_weights(rp, beta)
    bracket = (0.5 * (v - r) ** 2 * (bpv * bpr + bmv * bmr)
               + 0.5 * (v + r) ** 2 * (bpv * bmr + bmv * bpr)
               + 4.0 * (1.0 + 8.0 * field ** 2 + gamma ** 2) * bmv * bpv)
    return float(bracket / 2.0)


def qfi_beta_n2_asymptotic(gamma: float, field: float, beta: float) -> float:
    rp = reduced_params(gamma, field)
    v, r = rp.v, rp.r
    s = _crossing_sign(gamma, field)
    return float((v - r) ** 2 / 4 * np.exp(s * beta * (v - r) / 2))


def critical_lines(n_sites: int, gamma: float) -> list[float]:
    """Fields where the two lowest levels cross, ascending."""
    if gamma < 0:
        raise DomainError("critical lines are defined for gamma >= 0")
    s = np.sqrt(gamma)
    table = {2: [s / 2], 3: [2 * s / 3], 4: [s / 4, 3 * s / 4]}
    if n_sites not in table:
        raise DomainError(f"critical lines are tabulated for N = 2, 3, 4 only, got {n_sites}")
    return [float(h) for h in table[n_sites]]


def global_critical_line(n_sites: int, gamma: float) -> float:
    """The critical line carrying the absolute anisotropy-QFI maximum."""
    return critical_lines(n_sites, gamma)[-1]


# Appendix eigensystems ------------------------------------------------------

def _pick_form(*forms):
    # each form is a (coefficient_a, coefficient_b) pair proportional to the
    # same vector; use the best conditioned one
    norms = [np.hypot(a, b) for a, b in forms]
    best = int(np.argmax(norms))
    if norms[best] < 1e-14:
        return None
    a, b = forms[best]
    return a / norms[best], b / norms[best]


def _orthonormal_pair(a, b):
    q, _ = np.linalg.qr(np.column_stack([a, b]))
    # keep the orientation of the first displayed vector
    if q[:, 0] @ a < 0:
        q[:, 0] *= -1
    if q[:, 1] @ b < 0:
        q[:, 1] *= -1
    return q[:, 0], q[:, 1]


def spectrum_n2(gamma: float, field: float):
    """Closed-form eigenvalues and normalized eigenvectors of H_2.

    Order: -v/2, v/2, -r/2, r/2.  Vectors are expressed in this package's
    computational basis, which differs from the published matrix by the sign
    of the |down down> basis state; the |down down> component is flipped
    accordingly.  At u = 0 the r-pair is given by its continuous limit.
    """
    rp = reduced_params(gamma, field)
    u, v, r, h = rp.u, rp.v, rp.r, field
    evals = np.array([-v / 2, v / 2, -r / 2, r / 2])
    vecs = np.zeros((4, 4))
    vecs[[1, 2], 0] = [1, 1]
    vecs[[1, 2], 1] = [-1, 1]
    vecs[:, :2] /= np.sqrt(2)
    # eigvec (x, 0, 0, 1) with x = (4h +- r)/u, also x = -u / (4h -+ r)
    low = _pick_form((4 * h + r, u), (-u, 4 * h - r)) or (1.0, 0.0)
    high = _pick_form((4 * h - r, u), (-u, 4 * h + r)) or (0.0, 1.0)
    for col, (a, b) in ((2, low), (3, high)):
        vecs[0, col], vecs[3, col] = a, -b
    return evals, vecs


def spectrum_n3(gamma: float, field: float):
    """Closed-form eigenvalues mu_1..mu_8 and normalized eigenvectors of H_3.

    Degenerate pairs (mu_1 = mu_2, mu_3 = mu_4) are orthonormalized by
    Gram-Schmidt in the displayed order.  At u = 0 the parametrization of
    v_5..v_8 (which divides by u) is replaced by its limit.
    """
    u, v, h = gamma - 1.0, gamma + 1.0, field
    dm = 2 * np.sqrt(max(1 + 9 * h ** 2 - 3 * h * v + gamma * u, 0.0))
    dp = 2 * np.sqrt(max(1 + 9 * h ** 2 + 3 * h * v + gamma * u, 0.0))
    sp, sm = -6 * h + v, -6 * h - v
    evals = np.array([
        (v - 3 * h) / 3, (v - 3 * h) / 3, (v + 3 * h) / 3, (v + 3 * h) / 3,
        (-3 * h - v - dm) / 3, (-3 * h - v + dm) / 3,
        (3 * h - v - dp) / 3, (3 * h - v + dp) / 3,
    ])
    vecs = np.zeros((8, 8))
    e = np.eye(8)
    vecs[:, 0], vecs[:, 1] = _orthonormal_pair(e[4] - e[1], e[2] - e[1])
    vecs[:, 2], vecs[:, 3] = _orthonormal_pair(e[6] - e[3], e[5] - e[3])
    sym_a = (e[3] + e[5] + e[6]) / np.sqrt(3)   # partners of |up up up>
    sym_b = (e[1] + e[2] + e[4]) / np.sqrt(3)   # partners of |down down down>
    # v5, v6: (x, 0, 0, 1, 0, 1, 1, 0) with x5 x6 = -3
    forms = {
        4: ((sp - dm, u), (-3 * u, sp + dm), (1.0, 0.0)),
        5: ((sp + dm, u), (-3 * u, sp - dm), (0.0, 1.0)),
    }
    for col, (f1, f2, fallback) in forms.items():
        a, b = _pick_form(f1, f2) or fallback
        vec = a * e[0] + b * np.sqrt(3) * sym_a
        vecs[:, col] = vec / np.linalg.norm(vec)
    # v7, v8: (0, y, y, 0, y, 0, 0, 1) with y = (d- -+ D+)/(3u), y7 y8 = -1/3
    forms = {
        6: ((sm - dp, 3 * u), (-u, sm + dp), (0.0, 1.0)),
        7: ((sm + dp, 3 * u), (-u, sm - dp), (1.0, 0.0)),
    }
    for col, (f1, f2, fallback) in forms.items():
        a, b = _pick_form(f1, f2) or fallback
        vec = a * np.sqrt(3) * sym_b + b * e[7]
        vecs[:, col] = vec / np.linalg.norm(vec)
    return evals, vecs


# two-level picture ----------------------------------------------------------

@dataclass(frozen=True)
class TwoLevelModel:
    """Gap x(a, b) between the two lowest levels and its a-derivative."""

    gap_fn: Callable[[float, float], float]
    gap_gradient: Callable[[float, float], float]


def n2_gap_model() -> TwoLevelModel:
    """N = 2 gap |v - r|/2 as a function of (gamma, h), differentiated in gamma."""

    def gap(g, h):
        rp = reduced_params(g, h)
        return abs(rp.v - rp.r) / 2

    def grad(g, h):
        rp = reduced_params(g, h)
        d = (1.0 - rp.u / rp.r) / 2   # d/dgamma of (v - r)/2
        return d if rp.v >= rp.r else -d

    return TwoLevelModel(gap, grad)


def two_level_qfi(model: TwoLevelModel, a: float, b: float, beta: float) -> float:
    """beta^2 e^{beta x} / (1 + e^{beta x})^2 (dx/da)^2."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    x = model.gap_fn(a, b)
    return float(beta ** 2 * _sech2(beta * x / 2) / 4 * model.gap_gradient(a, b) ** 2)


def thermometry_profile(y):
    """F(y) = y^2 e^y / (1 + e^y)^2, even in y."""
    y = np.asarray(y, dtype=float)
    return y ** 2 * _sech2(y / 2) / 4


def _optimal_y():
    return brentq(lambda y: (y - 2) * np.exp(y) - (y + 2), 2.0, 3.0, xtol=1e-15)


Y_OPT = float(_optimal_y())
F_OPT = float((Y_OPT ** 2 - 4) / 4)


def two_level_thermometry(x: float, beta: float) -> float:
    """Temperature QFI F(beta x) / beta^2 of a two-level system with gap x."""
    if beta <= 0:
        raise DomainError("beta must be positive")
    return float(thermometry_profile(beta * x) / beta ** 2)


def two_outcome_fisher(p: float, q: float, dp: float, dq: float) -> float:
    """FI of a two-outcome measurement on p|0><0| + (1-p)|1><1|.

    ``q`` is |<0|x1>|^2 and the derivatives are with respect to the
    estimated parameter.  The denominator is P(x1) P(x2).
    """
    p1 = p * q + (1 - p) * (1 - q)
    p2 = 1 - p1
    if p1 <= 0 or p2 <= 0:
        raise DomainError("one outcome has zero probability")
    delta_q, delta_p = 2 * q - 1, 2 * p - 1
    return float((dp * delta_q + dq * delta_p) ** 2 / (p1 * p2))


def thermal_derivative_weight(eps: float, beta: float, deps: float) -> float:
    """Derivative of the ground-state population 1/(1 + e^{-beta eps}).

    Equals beta e^{beta eps} / (1 + e^{beta eps})^2 * d(eps).
    """
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    return float(beta * _sech2(beta * eps / 2) / 4 * deps)


# printed Hamiltonian matrices -------------------------------------------------

N2_GAUGE = np.diag([1.0, 1.0, 1.0, -1.0])


def appendix_h2(gamma: float, field: float) -> np.ndarray:
    """H_2 exactly as printed.  ``N2_GAUGE @ H @ N2_GAUGE`` is build_hamiltonian."""
    u, v, h = gamma - 1.0, gamma + 1.0, field
    return -0.5 * np.array([
        [4 * h, 0, 0, u],
        [0, 0, v, 0],
        [0, v, 0, 0],
        [u, 0, 0, -4 * h],
    ])


def appendix_h3(gamma: float, field: float) -> np.ndarray:
    """H_3 exactly as printed (same basis as build_hamiltonian)."""
    u, v, h = gamma - 1.0, gamma + 1.0, field
    return -np.array([
        [9 * h, 0, 0, -u, 0, -u, -u, 0],
        [0, 3 * h, v, 0, v, 0, 0, -u],
        [0, v, 3 * h, 0, v, 0, 0, -u],
        [-u, 0, 0, -3 * h, 0, v, v, 0],
        [0, v, v, 0, 3 * h, 0, 0, -u],
        [-u, 0, 0, v, 0, -3 * h, v, 0],
        [-u, 0, 0, v, 0, v, -3 * h, 0],
        [0, -u, -u, 0, -u, 0, 0, -9 * h],
    ]) / 3.0
