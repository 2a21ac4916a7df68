import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import trimer_matrix
from tmsv_trimer.errors import DivergenceError, DomainError
from tmsv_trimer.optics import (
    CouplerConfig,
    build_unitary,
    intensity_ratio,
    output_intensities,
    solve_zf,
    unitary_from_theta,
)


def test_identity_at_zero_length():
    np.testing.assert_array_equal(build_unitary(CouplerConfig(kappa=2.0, z=0.0)).entries, np.eye(3))


def test_swap_at_theta_pi():
    u = build_unitary(CouplerConfig(kappa=1.0, z=math.pi / math.sqrt(2))).entries
    expected = np.array([[0, 0, -1], [0, -1, 0], [-1, 0, 0]])
    np.testing.assert_allclose(u, expected, atol=1e-15)


def test_entries_at_design_length():
    u = build_unitary(CouplerConfig(kappa=1.0, z=0.23))
    theta = math.sqrt(2) * 0.23
    assert theta == pytest.approx(0.325269, abs=1e-6)
    assert u[1, 1].real == pytest.approx(0.947565, abs=1e-6)
    assert abs(u[0, 1]) ** 2 == pytest.approx(0.051061, abs=1e-6)
    center, _ = output_intensities(CouplerConfig(kappa=1.0, z=0.23))
    assert center == pytest.approx(0.102121, abs=1e-6)
    assert center == pytest.approx(math.sin(theta) ** 2, abs=1e-14)


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, 2.2, 4.0])
def test_matches_exponentiated_coupling_matrix(theta):
    np.testing.assert_allclose(unitary_from_theta(theta).entries, trimer_matrix(theta), atol=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_unitary_and_symmetric(theta):
    u = unitary_from_theta(theta).entries
    assert np.abs(u @ u.conj().T - np.eye(3)).max() < 1e-12
    assert u[0, 0] == u[2, 2] and u[0, 1] == u[2, 1] and u[0, 2] == u[2, 0]
    assert u[1, 1] == pytest.approx(math.cos(theta), abs=1e-15)
    assert u[0, 1] == pytest.approx(-1j * math.sin(theta) / math.sqrt(2), abs=1e-15)
    np.testing.assert_allclose(unitary_from_theta(theta + 2 * math.pi).entries, u, atol=1e-12)


def test_beta_is_not_applied():
    a = build_unitary(CouplerConfig(kappa=1.0, z=0.4, beta=0.0)).entries
    b = build_unitary(CouplerConfig(kappa=1.0, z=0.4, beta=3.7)).entries
    np.testing.assert_array_equal(a, b)


def test_invalid_config():
    with pytest.raises(DomainError):
        CouplerConfig(kappa=0.0, z=1.0)
    with pytest.raises(DomainError):
        CouplerConfig(kappa=1.0, z=-0.1)


def test_zf_design_value():
    z = solve_zf(1.0, 1 / 9)
    assert z == pytest.approx(math.atan(1 / 3) / math.sqrt(2), abs=1e-15)
    assert z == pytest.approx(0.227512, abs=1e-6)
    assert solve_zf(2.0, 1 / 9) == pytest.approx(z / 2)


def test_zf_special_ratios():
    assert solve_zf(1.0, 0.0) == 0.0
    assert solve_zf(3.0, 1.0) == pytest.approx(math.pi / 4 / (math.sqrt(2) * 3.0), abs=1e-15)
    with pytest.raises(DomainError):
        solve_zf(1.0, -0.1)


def test_intensity_ratio_values():
    assert intensity_ratio(CouplerConfig(1.0, 0.0)) == 0.0
    assert intensity_ratio(CouplerConfig.from_theta(math.pi / 3)) == pytest.approx(3.0, abs=1e-12)
    assert intensity_ratio(CouplerConfig(1.0, solve_zf(1.0, 1 / 9))) == pytest.approx(1 / 9, abs=1e-12)
    with pytest.raises(DivergenceError):
        intensity_ratio(CouplerConfig.from_theta(math.pi / 2))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 10), st.floats(0.1, 5))
def test_ratio_round_trip(x, kappa):
    assert intensity_ratio(CouplerConfig(kappa, solve_zf(kappa, x))) == pytest.approx(x, abs=1e-10)
