import math

import numpy as np
import pytest

from _oracles import expand_pair_operators, tmsv_output
from tmsv_trimer.errors import ContractError, DomainError, ResourceError
from tmsv_trimer.evolution import (
    SqueezeSource,
    cancellation_bound,
    default_lmax,
    evolve_multinomial,
    evolve_oracle,
    output_slice,
    prepare_input,
    tail_mass,
)
from tmsv_trimer.fock import ThreeModeState, partial_trace_b
from tmsv_trimer.optics import CouplerConfig, build_unitary, solve_zf, unitary_from_theta


def max_diff(a: ThreeModeState, b: ThreeModeState) -> float:
    keys = set(a.to_dict()) | set(b.to_dict())
    return max((abs(a.amplitude(k) - b.amplitude(k)) for k in keys), default=0.0)


def test_vacuum_source():
    s = prepare_input(SqueezeSource(0.0))
    assert s.to_dict() == {(0, 0, 0): 1.0}


def test_geometric_input_amplitudes():
    s = prepare_input(SqueezeSource(0.6, l_max=2))
    d = s.to_dict()
    assert set(d) == {(0, 0, 0), (1, 0, 1), (2, 0, 2)}
    for key, expected in [((0, 0, 0), 0.8), ((1, 0, 1), 0.48), ((2, 0, 2), 0.288)]:
        assert d[key] == pytest.approx(expected, abs=1e-15)


def test_default_truncation():
    # smallest l with 0.36^(l+1) < 1e-10
    assert default_lmax(0.6) == 22
    assert tail_mass(0.6, 22) < 1e-10 <= tail_mass(0.6, 21)
    assert SqueezeSource(0.6).resolved_lmax == 22
    assert default_lmax(0.0) == 0
    assert default_lmax(0.9) == 109


def test_invalid_squeezing():
    with pytest.raises(DomainError):
        SqueezeSource(1.0)
    with pytest.raises(DomainError):
        SqueezeSource(0.5 + 0.9j)


@pytest.mark.parametrize("theta", [0.0, 0.3253, 1.0, math.pi])
@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_pair_expansion_matches_operator_algebra(l, theta, backend):
    from tmsv_trimer import kernels

    u = unitary_from_theta(theta)
    ref = expand_pair_operators(l, u.row_a, u.row_c)
    block = kernels.get_backend(backend).multinomial_block(l, u.row_a, u.row_c)
    s = ThreeModeState({2 * l: block}, cutoff=2 * l)
    for key in set(ref) | set(s.to_dict()):
        assert abs(s.amplitude(key) - ref.get(key, 0)) < 1e-13


def test_vacuum_evolves_to_vacuum():
    u = build_unitary(CouplerConfig(1.0, 0.7))
    out = evolve_multinomial(prepare_input(SqueezeSource(0.0)), u)
    assert out.to_dict() == {(0, 0, 0): 1.0}
    assert evolve_oracle(prepare_input(SqueezeSource(0.0)), CouplerConfig(1.0, 0.7)).to_dict() == {(0, 0, 0): 1.0}


def test_identity_evolution():
    s = prepare_input(SqueezeSource(0.6))
    assert max_diff(evolve_multinomial(s, unitary_from_theta(0.0)), s) == 0.0


def test_single_pair_hand_expansion():
    # l = 1: (U11 a+ + U12 b+ + U13 c+)(U13 a+ + U12 b+ + U11 c+)|0>; |1,1,0> picks U12 (U11 + U13)
    r = 0.6
    config = CouplerConfig(1.0, solve_zf(1.0))
    u = build_unitary(config)
    out = evolve_multinomial(prepare_input(SqueezeSource(r)), u)
    expected = (1 - r**2) * r**2 * abs(u[0, 1]) ** 2 * abs(u[0, 0] + u[0, 2]) ** 2
    assert abs(out.amplitude((1, 1, 0))) ** 2 == pytest.approx(expected, rel=1e-12)
    assert out.amplitude((1, 1, 0)) == pytest.approx(out.amplitude((0, 1, 1)), abs=1e-15)


def test_single_photon_swap_oracle():
    s = ThreeModeState.from_amplitudes({(1, 0, 0): 1.0}, cutoff=1)
    out = evolve_oracle(s, CouplerConfig.from_theta(math.pi))
    assert out.amplitude((0, 0, 1)) == pytest.approx(-1.0, abs=1e-13)
    assert abs(out.amplitude((1, 0, 0))) < 1e-13


def test_oracle_matches_trimer_matrix_single_photon(rng):
    theta = 0.77
    u = unitary_from_theta(theta).entries
    s = ThreeModeState.from_amplitudes({(1, 0, 0): 1.0}, cutoff=1)
    out = evolve_oracle(s, CouplerConfig.from_theta(theta))
    got = [out.amplitude(k) for k in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]]
    np.testing.assert_allclose(got, u[:, 0], atol=1e-13)


@pytest.mark.parametrize("r", [0.2, 0.6, 0.9])
@pytest.mark.parametrize("theta", [0.1, 0.3253, 1.0])
def test_oracle_equivalence(r, theta, backend):
    l_max = 10 if r < 0.9 else 8
    s = prepare_input(SqueezeSource(r, l_max=l_max))
    config = CouplerConfig.from_theta(theta)
    a = evolve_multinomial(s, build_unitary(config), backend=backend)
    b = evolve_oracle(s, config)
    assert max_diff(a, b) < 1e-9


def test_against_brute_force_expansion():
    r = 0.45 * np.exp(0.3j)
    u = unitary_from_theta(0.6)
    ref = tmsv_output(r, u.row_a, u.row_c, 4)
    out = evolve_multinomial(prepare_input(SqueezeSource(r, l_max=4)), u)
    for key in set(ref) | set(out.to_dict()):
        assert abs(out.amplitude(key) - ref.get(key, 0)) < 1e-14


def test_general_inputs_rejected():
    s = ThreeModeState.from_amplitudes({(1, 0, 0): 1.0}, cutoff=1)
    with pytest.raises(ContractError):
        evolve_multinomial(s, unitary_from_theta(0.3))


def test_oracle_block_limit():
    s = prepare_input(SqueezeSource(0.5, l_max=5))
    with pytest.raises(ResourceError):
        evolve_oracle(s, CouplerConfig(1.0, 0.2), max_block_dim=50)


@pytest.fixture(scope="module")
def zf_output():
    u = build_unitary(CouplerConfig(1.0, solve_zf(1.0)))
    return evolve_multinomial(prepare_input(SqueezeSource(0.6)), u)


def test_output_parity_and_norm(zf_output):
    assert all(t % 2 == 0 for t in zf_output.totals)
    for l in range(23):
        assert zf_output.block_weights()[2 * l] == pytest.approx(0.64 * 0.36**l, abs=1e-10)
    assert zf_output.norm_squared() == pytest.approx(1 - 0.36**23, abs=1e-10)


def test_exchange_symmetry(zf_output):
    for (a, b, c), amp in zf_output.to_dict().items():
        assert abs(amp - zf_output.amplitude((c, b, a))) < 1e-10


@pytest.mark.parametrize("n_b", [0, 1, 2, 5])
def test_slice_matches_full_state(n_b, backend):
    u = build_unitary(CouplerConfig(1.0, solve_zf(1.0)))
    s = prepare_input(SqueezeSource(0.6))
    full = partial_trace_b(evolve_multinomial(s, u, backend=backend), n_b)
    fast = output_slice(s, u, n_b, backend=backend)
    np.testing.assert_allclose(fast, full, atol=1e-14)


def test_cancellation_bound_small_at_design_point():
    u = build_unitary(CouplerConfig(1.0, solve_zf(1.0)))
    bound = cancellation_bound(prepare_input(SqueezeSource(0.9)), u)
    assert bound * np.finfo(float).eps < 1e-12
