import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ngmoe.fock import (ChannelParams, DensityMatrix, PureState, ValidationError, mean_energy, number_state,
                        phase_unitary, pure_to_density, random_density_matrix, validate)
from ngmoe.states import BinomialParams, binomial_state, kappa0


def test_vacuum_has_zero_energy():
    assert mean_energy(number_state(0, 3)) == 0.0


def test_kappa_energy():
    assert mean_energy(kappa0(0.6, 3)) == pytest.approx(0.6, abs=1e-12)


def test_binomial_energy():
    assert mean_energy(binomial_state(BinomialParams(2, 0.3), 3)) == pytest.approx(0.6, abs=1e-12)


def test_mean_energy_rejects_unnormalised():
    with pytest.raises(ValidationError):
        mean_energy(PureState([1.0, 1.0]))


def test_maximally_mixed_is_valid():
    assert validate(DensityMatrix(np.eye(4) / 4)) == []


def test_trace_violation_reports_residual():
    rho = DensityMatrix(np.diag([0.5, 0.4]))
    problems = validate(rho)
    assert [p.invariant for p in problems] == ["unit trace"]
    assert problems[0].residual == pytest.approx(0.1)


def test_hermiticity_violation():
    m = np.eye(3) / 3
    m = m.astype(complex)
    m[0, 1] += 1e-6
    assert [p.invariant for p in validate(DensityMatrix(m))] == ["hermiticity"]


def test_psd_violation():
    problems = validate(DensityMatrix(np.diag([1.2, -0.2])))
    assert [p.invariant for p in problems] == ["positive semidefinite"]


def test_truncation_at_least_one():
    assert any(p.invariant == "truncation K >= 1" for p in validate(PureState([1.0])))


def test_states_are_immutable():
    psi = kappa0(0.6, 3)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 0


def test_pure_to_density_vacuum():
    np.testing.assert_array_equal(pure_to_density(number_state(0, 2)).entries, np.diag([1, 0, 0]))


def test_pure_to_density_plus_state():
    rho = pure_to_density(PureState(np.array([1, 1, 0]) / np.sqrt(2))).entries
    np.testing.assert_allclose(rho[:2, :2], 0.5, atol=1e-15)
    np.testing.assert_allclose(rho[2], 0, atol=0)


def test_pure_to_density_kappa():
    rho = pure_to_density(kappa0(0.6, 3)).entries
    np.testing.assert_allclose(np.diag(rho).real, [0.8, 0, 0, 0.2], atol=1e-15)
    assert rho[0, 3].real == pytest.approx(np.sqrt(0.16), abs=1e-15)


def test_pure_to_density_rejects_bad_norm():
    with pytest.raises(ValidationError):
        pure_to_density(PureState([0.5, 0.5]))


def _random_pure(rng, K):
    v = rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1)
    return PureState(v / np.linalg.norm(v))


def test_projector_is_valid_idempotent_and_keeps_energy(rng):
    for _ in range(1000):
        K = int(rng.integers(1, 17))
        psi = _random_pure(rng, K)
        rho = pure_to_density(psi)
        assert validate(rho) == []
        np.testing.assert_allclose(rho.entries @ rho.entries, rho.entries, atol=1e-12)
        assert abs(mean_energy(rho) - mean_energy(psi)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(K=st.integers(1, 12), alpha=st.floats(0, 2 * np.pi), seed=st.integers(0, 2**32 - 1))
def test_energy_is_phase_invariant(K, alpha, seed):
    rho = random_density_matrix(K, np.random.default_rng(seed))
    u = phase_unitary(alpha, K)
    rotated = DensityMatrix.hermitized(u @ rho.entries @ u.conj().T)
    assert abs(mean_energy(rotated) - mean_energy(rho)) <= 1e-12


@pytest.mark.parametrize("kwargs", [dict(epsilon=-0.1, time=1), dict(epsilon=1.1, time=1),
                                    dict(epsilon=0.5, time=-1), dict(epsilon=0.5, time=1, truncation=0)])
def test_channel_params_ranges(kwargs):
    with pytest.raises(ValidationError):
        ChannelParams(**kwargs)
