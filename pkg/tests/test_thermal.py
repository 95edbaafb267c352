import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmg_metrology.errors import DomainError
from lmg_metrology.spin_model import ModelParams, build_hamiltonian
from lmg_metrology.thermal import (BETA_MAX, boltzmann_weights, eigendecompose,
                                   gibbs_ensemble, spectral_gap)


def test_eigendecompose_reconstructs():
    H = build_hamiltonian(ModelParams(4, 0.3, 0.5))
    spec = eigendecompose(H)
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    np.testing.assert_allclose(spec.reconstruct(), H, atol=1e-12)


def test_eigendecompose_rejects_non_hermitian():
    with pytest.raises(DomainError):
        eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(0, 1e4), shift=st.floats(-1e3, 1e3))
def test_weights_normalized_and_shift_invariant(beta, shift):
    e = np.array([-1.3, -0.2, 0.4, 2.5])
    w, _ = boltzmann_weights(e, beta)
    w2, _ = boltzmann_weights(e + shift, beta)
    assert abs(w.sum() - 1) < 1e-12
    assert np.all(w >= 0)
    np.testing.assert_allclose(w, w2, atol=1e-9)


def test_infinite_temperature_is_uniform():
    w, logz = boltzmann_weights(np.array([0.0, 1.0, 5.0]), 0.0)
    np.testing.assert_allclose(w, 1 / 3)
    assert logz == pytest.approx(np.log(3))


def test_large_beta_ground_state():
    spec = eigendecompose(build_hamiltonian(ModelParams(3, 0.2, 0.9)))
    ens = gibbs_ensemble(spec, BETA_MAX)
    assert ens.weights[0] == pytest.approx(1.0)
    assert np.all(np.isfinite(ens.weights))


def test_degenerate_ground_shares_weight():
    w, _ = boltzmann_weights(np.array([0.0, 1e-13, 1.0]), 1e6)
    np.testing.assert_allclose(w[:2], 0.5)


@pytest.mark.parametrize("beta", [-1.0, np.inf, np.nan, 2 * BETA_MAX])
def test_beta_validation(beta):
    spec = eigendecompose(np.diag([0.0, 1.0]))
    with pytest.raises(DomainError):
        gibbs_ensemble(spec, beta)


def test_ensemble_moments():
    spec = eigendecompose(np.diag([0.0, 1.0]))
    ens = gibbs_ensemble(spec, np.log(3.0))
    np.testing.assert_allclose(ens.weights, [0.75, 0.25])
    assert ens.mean_energy == pytest.approx(0.25)
    assert ens.energy_variance == pytest.approx(0.1875)
    np.testing.assert_allclose(ens.density_matrix(), np.diag([0.75, 0.25]))


def test_spectral_gap():
    assert spectral_gap(eigendecompose(np.diag([3.0, 1.0, 2.0]))) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        spectral_gap(eigendecompose(np.array([[1.0]])))
