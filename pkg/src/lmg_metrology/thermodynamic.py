"""Thermodynamic limit of the LMG model in the Gaussian (Holstein-Primakoff) picture.

At order (1/N)^0 the fluctuations around the mean field are a single bosonic
mode with quadratic Hamiltonian

    H = omega a^dag a + lambda (a^2 + a^dag^2)

where, with the mean field along z (ordered phase, h >= 1)

    omega = 2h - 1 - gamma,         lambda = (gamma - 1) / 2

and, expanding around the tilted mean field (broken phase, 0 <= h < 1)

    omega = 2 - h^2 - gamma,        lambda = (gamma - h^2) / 2.

In both phases sqrt(omega^2 - 4 lambda^2) reproduces the published gaps.
The Bogoliubov mode is b = cosh(T) a + sinh(T) a^dag with tanh 2T =
-2 lambda / omega, so that H = Delta b^dag b + const.  The thermal state is
diagonal in the b-mode Fock basis; derivatives move both the level spacing
and the squeezing T.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularPointError, TruncationError, ConsistencyError
from .estimation import QfiBreakdown, spectral_qfi, temperature_qfi_from_energies
from .spin_model import Parameter
from .thermal import _check_beta, boltzmann_weights

MAX_CUTOFF = 4096
TAIL_TOL = 1e-13
CRITICAL_TOL = 1e-8
MIN_GAP = 1e-6
ANALYTIC_RTOL = 1e-8


def _check_point(gamma, field):
    if not -1.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [-1, 1], got {gamma!r}")
    if field < 0.0:
        raise DomainError(f"field must be nonnegative, got {field!r}")


def gap(gamma: float, field: float) -> float:
    """Single-mode gap Delta(gamma, h)."""
    _check_point(gamma, field)
    if field >= 1.0:
        return float(2.0 * np.sqrt((field - 1.0) * (field - gamma)))
    return float(2.0 * np.sqrt((1.0 - field ** 2) * (1.0 - gamma)))


def quadratic_coefficients(gamma: float, field: float):
    """(omega, lambda) of the quadratic boson Hamiltonian and their derivatives.

    Returns a dict with keys omega, lam and d_omega / d_lam, each a dict keyed
    by Parameter (anisotropy, field).
    """
    g, h = gamma, field
    if h >= 1.0:
        omega, lam = 2 * h - 1 - g, (g - 1) / 2
        d_omega = {Parameter.ANISOTROPY: -1.0, Parameter.FIELD: 2.0}
        d_lam = {Parameter.ANISOTROPY: 0.5, Parameter.FIELD: 0.0}
    else:
        omega, lam = 2 - h * h - g, (g - h * h) / 2
        d_omega = {Parameter.ANISOTROPY: -1.0, Parameter.FIELD: -2.0 * h}
        d_lam = {Parameter.ANISOTROPY: 0.5, Parameter.FIELD: -h}
    return {"omega": omega, "lam": lam, "d_omega": d_omega, "d_lam": d_lam}


def bogoliubov_angle(gamma: float, field: float) -> float:
    """Squeezing angle T with tanh 2T = -2 lambda / omega."""
    _check_point(gamma, field)
    c = quadratic_coefficients(gamma, field)
    if abs(field - 1.0) < CRITICAL_TOL or gap(gamma, field) < CRITICAL_TOL:
        raise SingularPointError(f"Bogoliubov angle diverges at gamma={gamma}, h={field}")
    return float(0.5 * np.arctanh(-2.0 * c["lam"] / c["omega"]))


def gap_and_angle_derivatives(gamma: float, field: float, which) -> tuple[float, float]:
    """Analytic (d Delta, d T) with respect to gamma or h."""
    which = Parameter(which)
    if which is Parameter.TEMPERATURE:
        raise DomainError("the mode parameters do not depend on temperature")
    c = quadratic_coefficients(gamma, field)
    w, l = c["omega"], c["lam"]
    dw, dl = c["d_omega"][which], c["d_lam"][which]
    delta = np.sqrt(w * w - 4 * l * l)
    if delta < CRITICAL_TOL:
        raise SingularPointError("gap derivative diverges at the critical point")
    d_delta = (w * dw - 4 * l * dl) / delta
    t = -2 * l / w
    dt = -2 * (dl * w - l * dw) / w ** 2
    return float(d_delta), float(0.5 * dt / (1 - t * t))


def required_cutoff(delta: float, beta: float) -> int:
    """Fock dimension with thermal tail exp(-beta Delta K) below TAIL_TOL."""
    x = beta * delta
    if x <= 0:
        raise TruncationError("zero thermal gap needs an infinite Fock space")
    k = int(np.ceil(-np.log(TAIL_TOL) / x)) + 4
    if k > MAX_CUTOFF:
        raise TruncationError(f"cutoff {k} exceeds the maximum {MAX_CUTOFF} (beta*Delta = {x:.3g})")
    return k


@dataclass(frozen=True)
class BosonicModel:
    gamma: float
    field: float
    gap: float
    bog_angle: float
    cutoff: int

    @classmethod
    def build(cls, gamma: float, field: float, beta: float, cutoff: int | None = None):
        _check_point(gamma, field)
        delta = gap(gamma, field)
        if delta <= MIN_GAP:
            raise SingularPointError(f"gap {delta:.3g} is inside the near-critical exclusion zone")
        theta = bogoliubov_angle(gamma, field)
        needed = required_cutoff(delta, beta)
        if cutoff is None:
            cutoff = needed
        elif cutoff < needed:
            raise TruncationError(f"cutoff {cutoff} below the required {needed}")
        elif cutoff > MAX_CUTOFF:
            raise TruncationError(f"cutoff {cutoff} exceeds the maximum {MAX_CUTOFF}")
        return cls(float(gamma), float(field), delta, theta, int(cutoff))

    @property
    def energies(self) -> np.ndarray:
        return self.gap * np.arange(self.cutoff)


def _derivative_matrix(model: BosonicModel, d_delta: float, d_theta: float) -> np.ndarray:
    # dH in the b-mode eigenbasis: n dDelta on the diagonal, and the squeeze
    # generator (a^2 - a^dag^2)/2 written as [G, H] on the n <-> n+2 band
    k = model.cutoff
    n = np.arange(k)
    energies = model.energies
    m = np.diag(n * d_delta)
    amp = np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) / 2
    band = (energies[:-2] - energies[2:]) * d_theta * amp
    idx = np.arange(k - 2)
    m[idx + 2, idx] = band
    m[idx, idx + 2] = band
    return m


def oscillator_energy_variance(delta: float, beta: float) -> float:
    """Delta^2 e^{beta Delta} / (e^{beta Delta} - 1)^2, written in e^{-beta Delta}."""
    q = np.exp(-beta * delta)
    return float(delta ** 2 * q / (1 - q) ** 2)


def thermo_qfi(gamma: float, field: float, beta: float, which,
               cutoff: int | None = None) -> QfiBreakdown:
    """QFI of the thermal Gaussian state for gamma, h or beta."""
    which = Parameter(which)
    beta = _check_beta(beta)
    model = BosonicModel.build(gamma, field, beta, cutoff)
    weights, _ = boltzmann_weights(model.energies, beta)
    if which is Parameter.TEMPERATURE:
        result = temperature_qfi_from_energies(model.energies, beta)
        exact = oscillator_energy_variance(model.gap, beta)
        if abs(result.total - exact) > ANALYTIC_RTOL * max(exact, 1e-300):
            raise ConsistencyError(f"Fock G_beta {result.total!r} != oscillator variance {exact!r}")
        return result
    d_delta, d_theta = gap_and_angle_derivatives(gamma, field, which)
    m = _derivative_matrix(model, d_delta, d_theta)
    return spectral_qfi(model.energies, weights, m, beta)


def thermo_scaling(gamma: float, field: float, beta: float, which) -> float:
    """Near-critical expansions of G_gamma and G_beta, as printed.

    The branch is chosen by the phase (h >= 1 ordered, h < 1 broken).
    """
    which = Parameter(which)
    g, h = gamma, field
    if which is Parameter.ANISOTROPY:
        if h >= 1.0:
            if h == 1.0:
                raise SingularPointError("the ordered-phase expansion diverges at h = 1")
            return 9 / (4 * (h - 1) ** 2) - 25 * beta ** 2 / 12
        if g == 1.0:
            raise SingularPointError("the broken-phase expansion diverges at gamma = 1")
        return 9 / (4 * (g - 1) ** 2) - 25 * beta ** 2 * (h - 1) / (6 * (g - 1))
    if which is Parameter.TEMPERATURE:
        if beta <= 0:
            raise DomainError("beta must be positive")
        coeff = 1 / 3 if h >= 1.0 else -2 / 3
        return 1 / beta ** 2 + coeff * (g - 1) * (h - 1)
    raise DomainError("thermo_scaling covers anisotropy and temperature only")
