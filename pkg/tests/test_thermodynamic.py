import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmg_metrology import thermodynamic as T
from lmg_metrology.errors import DomainError, SingularPointError, TruncationError
from lmg_metrology.spin_model import Parameter


def test_gap_examples():
    for g in (-1.0, 0.0, 0.5, 1.0):
        assert T.gap(g, 1.0) == 0.0
    assert T.gap(0.5, 2.0) == pytest.approx(2.449489742783178, abs=1e-12)
    assert T.gap(0.5, 0.5) == pytest.approx(1.224744871391589, abs=1e-12)
    with pytest.raises(DomainError):
        T.gap(1.5, 0.5)
    with pytest.raises(DomainError):
        T.gap(0.5, -0.1)


def test_gap_zero_set():
    assert T.gap(1.0, 0.4) == 0.0
    for g in np.linspace(-1, 0.99, 7):
        for h in (0.0, 0.3, 0.99, 1.01, 2.0):
            assert T.gap(g, h) > 0


@settings(max_examples=40, deadline=None)
@given(g=st.floats(-1, 0.999), h=st.floats(0, 3).filter(lambda x: abs(x - 1) > 1e-6))
def test_gap_match_contract(g, h):
    c = T.quadratic_coefficients(g, h)
    assert np.sqrt(c["omega"] ** 2 - 4 * c["lam"] ** 2) == pytest.approx(T.gap(g, h), abs=1e-10)


def test_gap_continuous_at_one():
    for g in (-0.5, 0.3, 0.9):
        assert T.gap(g, 1 - 1e-9) < 1e-3 and T.gap(g, 1 + 1e-9) < 1e-3


def test_bogoliubov_angle_examples():
    assert abs(T.bogoliubov_angle(0.5, 50.0)) < 0.01
    assert T.bogoliubov_angle(1.0, 1.5) == 0.0
    with pytest.raises(SingularPointError):
        T.bogoliubov_angle(0.5, 1.0 + 1e-9)


@pytest.mark.parametrize("g,h", [(0.5, 1.3), (0.2, 0.6), (-0.4, 2.0), (0.9, 0.3)])
@pytest.mark.parametrize("which", [Parameter.ANISOTROPY, Parameter.FIELD])
def test_analytic_derivatives(g, h, which):
    d_delta, d_theta = T.gap_and_angle_derivatives(g, h, which)
    e = 1e-6
    if which is Parameter.ANISOTROPY:
        up, dn = (g + e, h), (g - e, h)
    else:
        up, dn = (g, h + e), (g, h - e)
    assert d_delta == pytest.approx((T.gap(*up) - T.gap(*dn)) / (2 * e), rel=1e-7)
    assert d_theta == pytest.approx((T.bogoliubov_angle(*up) - T.bogoliubov_angle(*dn)) / (2 * e), rel=1e-7)


def gaussian_qfi(g, h, b, eps=1e-6):
    # independent oracle: single-mode Gaussian QFI from the covariance matrix
    def cov(gg):
        c = T.quadratic_coefficients(gg, h)
        a_, b_ = c["omega"] / 2 + c["lam"], c["omega"] / 2 - c["lam"]
        coth = 1 / np.tanh(b * 2 * np.sqrt(a_ * b_) / 2)
        return np.diag([0.5 * np.sqrt(b_ / a_) * coth, 0.5 * np.sqrt(a_ / b_) * coth])

    def purity(v):
        return 1 / (2 * np.sqrt(np.linalg.det(v)))

    v0, vp, vm = cov(g), cov(g + eps), cov(g - eps)
    dv = (vp - vm) / (2 * eps)
    mu, dmu = purity(v0), (purity(vp) - purity(vm)) / (2 * eps)
    vi = np.linalg.inv(v0)
    return 0.5 / (1 + mu ** 2) * np.trace(vi @ dv @ vi @ dv) + 2 * dmu ** 2 / (1 - mu ** 4)


@pytest.mark.parametrize("g,h,b", [(0.5, 1.2, 1.0), (0.5, 0.5, 2.0), (0.3, 1.5, 0.7), (0.8, 0.2, 3.0)])
def test_fock_qfi_matches_gaussian_formula(g, h, b):
    assert T.thermo_qfi(g, h, b, "anisotropy").total == pytest.approx(gaussian_qfi(g, h, b), rel=1e-7)


def test_temperature_matches_oscillator():
    for g, h, b in ((0.5, 1.2, 1.0), (0.1, 0.4, 3.0), (-0.5, 2.5, 0.2)):
        d = T.gap(g, h)
        q = T.thermo_qfi(g, h, b, "temperature").total
        assert q == pytest.approx(d ** 2 * np.exp(b * d) / np.expm1(b * d) ** 2, rel=1e-8)


def test_tscaling_ordered_phase():
    g, h, b = 0.5, 1.01, 0.5
    corr = T.thermo_qfi(g, h, b, "temperature").total - 1 / b ** 2
    assert corr == pytest.approx((g - 1) * (h - 1) / 3, rel=0.10)


def test_truncation_stability():
    for g, h, b in ((0.5, 1.2, 1.0), (0.7, 0.5, 1.0), (0.3, 1.05, 2.0)):
        m = T.BosonicModel.build(g, h, b)
        a = T.thermo_qfi(g, h, b, "anisotropy").total
        c = T.thermo_qfi(g, h, b, "anisotropy", cutoff=2 * m.cutoff).total
        assert abs(a - c) < 1e-6 * a


def test_cutoff_errors():
    with pytest.raises(TruncationError):
        T.thermo_qfi(0.5, 1.2, 1e-4, "anisotropy")
    with pytest.raises(TruncationError):
        T.thermo_qfi(0.5, 1.2, 1.0, "anisotropy", cutoff=3)
    with pytest.raises(SingularPointError):
        T.thermo_qfi(0.5, 1.0, 1.0, "anisotropy")


def test_ordered_phase_cusp():
    vals = [T.thermo_qfi(0.5, h, 1.0, "anisotropy").total for h in (1.5, 1.2, 1.1, 1.05)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_broken_phase_growth_with_gamma():
    vals = [T.thermo_qfi(g, 0.5, 1.0, "anisotropy").total for g in (0.5, 0.7, 0.9, 0.95)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_beta_squared_law_near_critical_field():
    # G(beta) = c0 - c2 beta^2 + ... : second differences scale as beta^2
    g, h = 0.5, 1.01
    q = {b: T.thermo_qfi(g, h, b, "anisotropy").total for b in (0.1, 0.2, 0.4)}
    ratio = (q[0.4] - q[0.2]) / (q[0.2] - q[0.1])
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_thermo_scaling_literal():
    assert T.thermo_scaling(0.3, 1.1, 2.0, "anisotropy") == pytest.approx(225 - 100 / 12)
    assert T.thermo_scaling(0.5, 0.9, 2.0, "temperature") == pytest.approx(0.25 - 2 / 3 * 0.05)
    a = T.thermo_scaling(0.5, 1.1, 1.0, "temperature") - 1
    b = T.thermo_scaling(0.5, 0.9, 1.0, "temperature") - 1
    assert b / a == pytest.approx(2.0)  # (h - 1) changes sign between the branches
    with pytest.raises(SingularPointError):
        T.thermo_scaling(0.5, 1.0, 1.0, "anisotropy")
