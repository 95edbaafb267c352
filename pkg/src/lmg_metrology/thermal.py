"""Spectral decompositions and Gibbs ensembles at inverse temperature beta."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.csgraph import connected_components

from .errors import DomainError
from .spin_model import is_hermitian

BETA_MAX = 1e6
DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # column n <-> eigenvalues[n]

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class GibbsEnsemble:
    """Boltzmann weights of a spectrum at inverse temperature ``beta``.

    ``log_partition`` is log sum_n exp(-beta (E_n - E_0)); the physical
    log Z is ``log_partition - beta * E_0``.
    """

    beta: float
    weights: np.ndarray
    log_partition: float
    spectrum: SpectralDecomposition

    @property
    def mean_energy(self) -> float:
        return float(self.weights @ self.spectrum.eigenvalues)

    @property
    def energy_variance(self) -> float:
        shifted = self.spectrum.eigenvalues - self.mean_energy
        return float(self.weights @ shifted ** 2)

    def density_matrix(self) -> np.ndarray:
        v = self.spectrum.eigenvectors
        return (v * self.weights) @ v.conj().T


def eigendecompose(op: np.ndarray) -> SpectralDecomposition:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Blocks that are decoupled by exact zeros (e.g. the parity sectors of the
    LMG model) are diagonalized separately, so eigenvectors carry no roundoff
    leakage between sectors.
    """
    op = np.asarray(op)
    if not is_hermitian(op):
        raise DomainError("eigendecompose needs a square Hermitian matrix")
    if np.isrealobj(op) or not np.any(op.imag):
        op = op.real
    n_blocks, labels = connected_components(op != 0, directed=False)
    if n_blocks == 1:
        evals, evecs = eigh(op)
        return SpectralDecomposition(evals, evecs)
    evals = np.empty(op.shape[0])
    evecs = np.zeros(op.shape, dtype=op.dtype)
    start = 0
    for b in range(n_blocks):
        idx = np.flatnonzero(labels == b)
        w, v = eigh(op[np.ix_(idx, idx)])
        cols = slice(start, start + len(idx))
        evals[cols] = w
        evecs[idx, cols] = v
        start += len(idx)
    order = np.argsort(evals, kind="stable")
    return SpectralDecomposition(evals[order], evecs[:, order])


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not np.isfinite(beta) or beta < 0.0:
        raise DomainError(f"beta must be a finite nonnegative number, got {beta!r}")
    if beta > BETA_MAX:
        raise DomainError(f"beta {beta:g} exceeds the supported maximum {BETA_MAX:g}")
    return beta


def boltzmann_weights(energies: np.ndarray, beta: float):
    """Return (weights, log_partition) with the ground energy shifted to zero."""
    energies = np.asarray(energies, dtype=float)
    shifted = energies - energies.min()
    # levels within tolerance of the ground energy share the ground weight
    shifted[shifted < DEGENERACY_RTOL * max(1.0, abs(energies.min()))] = 0.0
    unnorm = np.exp(-beta * shifted)
    total = unnorm.sum()
    return unnorm / total, float(np.log(total))


def gibbs_ensemble(spec: SpectralDecomposition, beta: float) -> GibbsEnsemble:
    beta = _check_beta(beta)
    weights, log_z = boltzmann_weights(spec.eigenvalues, beta)
    return GibbsEnsemble(beta, weights, log_z, spec)


def spectral_gap(spec: SpectralDecomposition) -> float:
    """E_1 - E_0 of an ascending spectrum."""
    if spec.dim < 2:
        raise DomainError("spectral gap needs at least two levels")
    return float(max(spec.eigenvalues[1] - spec.eigenvalues[0], 0.0))
