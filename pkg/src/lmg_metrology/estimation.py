"""Quantum and classical Fisher information on thermal LMG states.

The QFI of rho = sum_n B_n |n><n| for a parameter lambda is evaluated from
the matrix of dH/dlambda in the energy eigenbasis:

* classical term  sum_n (d B_n)^2 / B_n = beta^2 sum_n B_n (dE_n - <dE>)^2
* quantum term    2 sum_{n != m} (B_n - B_m)^2 / (B_n + B_m) |<n|dm>|^2

with <n|dm> = <n|dH|m> / (E_m - E_n).  The quantum summand is evaluated as
2 [(B_n - B_m)/(E_n - E_m)]^2 |dH_nm|^2 / (B_n + B_m), where the divided
difference of the Boltzmann weights stays finite through level crossings.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import eigh, svdvals

from .errors import (ConsistencyError, DerivativeError, DomainError,
                     NumericalDegeneracyError)
from .spin_model import (ModelParams, Parameter, _check_sites, _spin_signs,
                         build_hamiltonian, hamiltonian_derivative,
                         project_to_sectors, symmetry_adapted_basis)
from .thermal import (SpectralDecomposition, _check_beta, boltzmann_weights,
                      eigendecompose)

DEGENERACY_RTOL = 1e-12
WEIGHT_FLOOR = 1e-290
SERIES_THRESHOLD = 1e-6
PROBABILITY_FLOOR = 1e-14
FD_STEP = 1e-5
FD_RTOL = 1e-4
VARIANCE_RTOL = 1e-10


@dataclass(frozen=True)
class QfiBreakdown:
    classical_term: float
    quantum_term: float
    total: float

    @classmethod
    def from_terms(cls, classical, quantum):
        classical, quantum = float(classical), float(quantum)
        return cls(classical, quantum, classical + quantum)


# spectral kernel -----------------------------------------------------------

def degenerate_clusters(energies: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group an ascending spectrum into runs whose consecutive gaps are < tol."""
    breaks = np.flatnonzero(np.diff(energies) >= tol) + 1
    return np.split(np.arange(len(energies)), breaks)


def resolve_degeneracies(spec: SpectralDecomposition, dh: np.ndarray):
    """Rotate each exactly degenerate cluster so that dH is diagonal in it.

    Returns the rotated eigenvectors, the matrix of dH in that basis and the
    cluster labels (one integer per level).
    """
    energies = spec.eigenvalues
    vecs = np.array(spec.eigenvectors, copy=True)
    tol = DEGENERACY_RTOL * max(1.0, float(np.max(np.abs(energies))))
    clusters = degenerate_clusters(energies, tol)
    labels = np.empty(len(energies), dtype=int)
    m = vecs.conj().T @ dh @ vecs
    for label, idx in enumerate(clusters):
        labels[idx] = label
        if len(idx) < 2:
            continue
        block = m[np.ix_(idx, idx)]
        try:
            _, rot = eigh(0.5 * (block + block.conj().T))
        except np.linalg.LinAlgError as exc:
            raise NumericalDegeneracyError(
                "could not diagonalize dH inside a degenerate cluster",
                cluster=energies[idx].copy()) from exc
        vecs[:, idx] = vecs[:, idx] @ rot
    m = vecs.conj().T @ dh @ vecs
    same = labels[:, None] == labels[None, :]
    np.fill_diagonal(same, False)
    m[same] = 0.0
    return vecs, m, labels


def weight_divided_difference(energies, weights, beta):
    """(B_n - B_m) / (E_n - E_m) for every pair, with the n = m limit -beta B_n."""
    e = np.asarray(energies, dtype=float)
    gap = np.abs(e[:, None] - e[None, :])
    lower = np.maximum(weights[:, None], weights[None, :])  # weight of the lower level
    x = beta * gap
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = lower * np.expm1(-x) / gap
    series = -beta * lower * (1.0 - x / 2.0 + x * x / 6.0)
    return np.where(x < SERIES_THRESHOLD, series, exact)


def drho_eigenbasis(energies, weights, m, beta):
    """Matrix of d(rho)/d(lambda) in the energy eigenbasis."""
    d = weight_divided_difference(energies, weights, beta) * m
    diag = np.real(np.diag(m))
    np.fill_diagonal(d, -beta * weights * (diag - weights @ diag))
    return d


def spectral_qfi(energies, weights, m, beta) -> QfiBreakdown:
    """QFI split from an eigenbasis representation of dH (already cluster-rotated)."""
    diag = np.real(np.diag(m))
    # centre on the most populated level first: <d> - d_ref is then a sum of
    # small exact differences instead of a cancellation
    rel = diag - diag[np.argmax(weights)]
    centred = rel - weights @ rel
    classical = beta ** 2 * float(weights @ centred ** 2)
    d = weight_divided_difference(energies, weights, beta) * m
    total_w = weights[:, None] + weights[None, :]
    keep = total_w > WEIGHT_FLOOR
    np.fill_diagonal(keep, False)
    quantum = 2.0 * float(np.sum(np.abs(d[keep]) ** 2 / total_w[keep]))
    return QfiBreakdown.from_terms(classical, quantum)


def qfi_from_operators(h: np.ndarray, dh: np.ndarray, beta: float) -> QfiBreakdown:
    """QFI of exp(-beta H)/Z for the parameter that H depends on through dH."""
    beta = _check_beta(beta)
    spec = eigendecompose(h)
    _, m, _ = resolve_degeneracies(spec, dh)
    weights, _ = boltzmann_weights(spec.eigenvalues, beta)
    return spectral_qfi(spec.eigenvalues, weights, m, beta)


def qfi_thermal(params: ModelParams, which, beta: float) -> QfiBreakdown:
    """QFI for gamma or h on the Gibbs state of H(gamma, h) at inverse temperature beta."""
    which = Parameter(which)
    if which is Parameter.TEMPERATURE:
        return qfi_temperature(params, beta)
    basis, labels = symmetry_adapted_basis(params.n_sites)
    return qfi_from_operators(project_to_sectors(build_hamiltonian(params), basis, labels),
                              project_to_sectors(hamiltonian_derivative(params, which), basis, labels),
                              beta)


def temperature_qfi_from_energies(energies, beta: float) -> QfiBreakdown:
    """QFI for beta: sum (dB/dbeta)^2 / B, checked against Var(H)."""
    energies = np.asarray(energies, dtype=float)
    weights, _ = boltzmann_weights(energies, beta)
    shifted = energies - energies.min()
    mean = weights @ shifted
    dweights = -weights * (shifted - mean)
    pos = weights > 0
    fisher = float(np.sum(dweights[pos] ** 2 / weights[pos]))
    variance = float(weights @ shifted ** 2 - mean ** 2)
    if abs(fisher - variance) > VARIANCE_RTOL * max(1.0, fisher):
        raise ConsistencyError(
            f"temperature QFI {fisher!r} disagrees with energy variance {variance!r}")
    return QfiBreakdown(fisher, 0.0, fisher)


def qfi_temperature(params: ModelParams, beta: float) -> QfiBreakdown:
    beta = _check_beta(beta)
    if beta <= 0.0:
        raise DomainError("temperature QFI needs beta > 0")
    spec = eigendecompose(build_hamiltonian(params))
    return temperature_qfi_from_energies(spec.eigenvalues, beta)


# SLD -----------------------------------------------------------------------

def sld_from_operators(h, dh, beta, which=Parameter.ANISOTROPY) -> np.ndarray:
    """Symmetric logarithmic derivative in the original basis.

    ``which='temperature'`` ignores ``dh`` and differentiates in beta.
    """
    beta = _check_beta(beta)
    which = Parameter(which)
    spec = eigendecompose(h)
    weights, _ = boltzmann_weights(spec.eigenvalues, beta)
    if which is Parameter.TEMPERATURE:
        vecs = spec.eigenvectors
        e = spec.eigenvalues
        drho = np.diag(-weights * (e - weights @ e))
    else:
        vecs, m, _ = resolve_degeneracies(spec, dh)
        drho = drho_eigenbasis(spec.eigenvalues, weights, m, beta)
    total_w = weights[:, None] + weights[None, :]
    keep = total_w > WEIGHT_FLOOR
    ell = np.zeros_like(drho)
    ell[keep] = 2.0 * drho[keep] / total_w[keep]
    return vecs @ ell @ vecs.conj().T


def sld(params: ModelParams, which, beta: float) -> np.ndarray:
    which = Parameter(which)
    basis, labels = symmetry_adapted_basis(params.n_sites)
    h = project_to_sectors(build_hamiltonian(params), basis, labels)
    dh = None
    if which is not Parameter.TEMPERATURE:
        dh = project_to_sectors(hamiltonian_derivative(params, which), basis, labels)
    return basis @ sld_from_operators(h, dh, beta, which) @ basis.T


# states, fidelity ----------------------------------------------------------

def thermal_state(h: np.ndarray, beta: float) -> np.ndarray:
    spec = eigendecompose(h)
    weights, _ = boltzmann_weights(spec.eigenvalues, _check_beta(beta))
    v = spec.eigenvectors
    return (v * weights) @ v.conj().T


def density_matrix(params: ModelParams, beta: float) -> np.ndarray:
    return thermal_state(build_hamiltonian(params), beta)


def _sqrtm_psd(rho):
    evals, evecs = eigh(rho)
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.conj().T


def root_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Tr |sqrt(rho) sqrt(sigma)|, equal to 1 for identical states."""
    return float(np.sum(svdvals(_sqrtm_psd(rho) @ _sqrtm_psd(sigma))))


def _shifted(params: ModelParams, which: Parameter, beta: float, delta: float):
    if which is Parameter.ANISOTROPY:
        return params.replace(gamma=params.gamma + delta), beta
    if which is Parameter.FIELD:
        return params.replace(field=params.field + delta), beta
    return params, beta + delta


def fidelity_qfi(params: ModelParams, which, beta: float, delta: float = 1e-4) -> float:
    """Bures-metric estimate 8 (1 - F(rho_l, rho_{l+delta})) / delta^2.

    Independent of the spectral formulas: it only needs the two density
    matrices and the matrix square root.
    """
    which = Parameter(which)
    rho = density_matrix(params, beta)
    p2, b2 = _shifted(params, which, beta, delta)
    sigma = density_matrix(p2, b2)
    return 8.0 * (1.0 - root_fidelity(rho, sigma)) / delta ** 2


# projective measurements ---------------------------------------------------

@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Orthogonal projectors with one real outcome label each.

    A 1-D projector is read as the diagonal of a projector that is diagonal in
    the computational basis; this keeps magnetization measurements cheap.
    """

    projectors: tuple
    outcome_labels: np.ndarray

    def __post_init__(self):
        projectors = tuple(np.asarray(p) for p in self.projectors)
        labels = np.asarray(self.outcome_labels, dtype=float)
        if len(projectors) == 0 or len(projectors) != len(labels):
            raise DomainError("need one outcome label per projector")
        dims = {p.shape[0] for p in projectors}
        if len(dims) != 1:
            raise DomainError("projectors have inconsistent dimensions")
        object.__setattr__(self, "projectors", projectors)
        object.__setattr__(self, "outcome_labels", labels)
        self.validate()

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def matrix(self, k: int) -> np.ndarray:
        p = self.projectors[k]
        return np.diag(p) if p.ndim == 1 else p

    def validate(self, atol: float = 1e-10):
        if all(p.ndim == 1 for p in self.projectors):
            stack = np.stack(self.projectors)
            if not np.allclose(stack * stack, stack, atol=atol, rtol=0):
                raise DomainError("diagonal projector entries must be 0 or 1")
            if not np.allclose(stack.sum(axis=0), 1.0, atol=atol, rtol=0):
                raise DomainError("projectors do not resolve the identity")
            return
        mats = [self.matrix(k) for k in range(len(self.projectors))]
        total = np.zeros_like(mats[0], dtype=complex)
        for i, p in enumerate(mats):
            if not np.allclose(p, p.conj().T, atol=atol, rtol=0):
                raise DomainError(f"projector {i} is not Hermitian")
            if not np.allclose(p @ p, p, atol=atol, rtol=0):
                raise DomainError(f"projector {i} is not idempotent")
            for j in range(i):
                if not np.allclose(p @ mats[j], 0.0, atol=atol, rtol=0):
                    raise DomainError(f"projectors {j} and {i} are not orthogonal")
            total = total + p
        if not np.allclose(total, np.eye(self.dim), atol=atol, rtol=0):
            raise DomainError("projectors do not resolve the identity")

    def probabilities(self, h: np.ndarray, beta: float) -> np.ndarray:
        spec = eigendecompose(h)
        weights, _ = boltzmann_weights(spec.eigenvalues, beta)
        v = spec.eigenvectors
        if all(p.ndim == 1 for p in self.projectors):
            diag = (np.abs(v) ** 2) @ weights
            return np.array([p @ diag for p in self.projectors])
        rho = (v * weights) @ v.conj().T
        return np.array([np.real(np.sum(self.matrix(k) * rho.T))
                         for k in range(len(self.projectors))])


def basis_measurement(unitary: np.ndarray, labels: Sequence[float] | None = None):
    """Rank-one projective measurement onto the columns of ``unitary``."""
    cols = np.asarray(unitary)
    projectors = [np.outer(c, c.conj()) for c in cols.T]
    if labels is None:
        labels = np.arange(len(projectors), dtype=float)
    return ProjectiveMeasurement(tuple(projectors), labels)


def magnetization_measurement(n_sites: int) -> ProjectiveMeasurement:
    """Projectors onto fixed numbers of up spins, labelled 2 N_up - N."""
    n_sites = _check_sites(n_sites)
    n_up = (_spin_signs(n_sites) > 0).sum(axis=1)
    masks = tuple((n_up == k).astype(float) for k in range(n_sites + 1))
    labels = 2.0 * np.arange(n_sites + 1) - n_sites
    return ProjectiveMeasurement(masks, labels)


def _probabilities_at(params, which, beta, measurement, delta):
    p2, b2 = _shifted(params, which, beta, delta)
    return measurement.probabilities(build_hamiltonian(p2), b2)


def _fisher_sum(p, dp):
    keep = p >= PROBABILITY_FLOOR
    return float(np.sum(dp[keep] ** 2 / p[keep]))


def fisher_information(params: ModelParams, measurement: ProjectiveMeasurement,
                       which, beta: float, step: float = FD_STEP) -> float:
    """Classical Fisher information of ``measurement`` for one parameter.

    Probability derivatives come from central differences with step ``step``
    and ``step/2``; the two must agree to FD_RTOL, otherwise the step is
    halved once more before giving up.  The returned value uses the
    Richardson-extrapolated derivative.
    """
    which = Parameter(which)
    beta = _check_beta(beta)
    if measurement.dim != params.dim:
        raise DomainError(f"measurement acts on dimension {measurement.dim}, model has {params.dim}")
    p0 = _probabilities_at(params, which, beta, measurement, 0.0)

    def derivative(s):
        if which is Parameter.TEMPERATURE and beta < 2 * s:
            # one-sided second-order stencil keeps beta nonnegative
            f1 = _probabilities_at(params, which, beta, measurement, s)
            f2 = _probabilities_at(params, which, beta, measurement, 2 * s)
            return (-3 * p0 + 4 * f1 - f2) / (2 * s)
        fp = _probabilities_at(params, which, beta, measurement, s)
        fm = _probabilities_at(params, which, beta, measurement, -s)
        return (fp - fm) / (2 * s)

    coarse = derivative(step)
    for _ in range(2):
        fine = derivative(step / 2)
        f_coarse, f_fine = _fisher_sum(p0, coarse), _fisher_sum(p0, fine)
        if abs(f_coarse - f_fine) <= FD_RTOL * f_fine + 1e-12:
            return _fisher_sum(p0, (4 * fine - coarse) / 3)
        step, coarse = step / 2, fine
    raise DerivativeError(
        f"finite-difference Fisher information did not converge ({f_coarse!r} vs {f_fine!r})")


def magnetization_fisher(params: ModelParams, which, beta: float) -> float:
    return fisher_information(params, magnetization_measurement(params.n_sites), which, beta)
