import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density, random_local, random_pure, random_unitary
from schmidt_cert.errors import DimensionError, ValidationError
from schmidt_cert.noise import isotropic_state
from schmidt_cert.states import (
    conjugate_local,
    fidelity_ascent,
    fidelity_overlap,
    max_entangled_state,
    projector,
    schmidt_decompose,
    validate_density_matrix,
)


class TestMaxEntangled:
    def test_d2_amplitudes(self):
        r = 1 / math.sqrt(2)
        np.testing.assert_allclose(max_entangled_state(2), [r, 0, 0, r], atol=1e-15)

    def test_d3_normalized(self):
        phi = max_entangled_state(3)
        assert abs(np.vdot(phi, phi) - 1) < 1e-14

    @pytest.mark.parametrize("d", range(2, 9))
    def test_invariant_under_u_conj_u(self, d, rng):
        phi = max_entangled_state(d)
        for _ in range(3):
            u = random_unitary(d, rng)
            out = np.kron(u, u.conj()) @ phi
            assert abs(abs(np.vdot(phi, out)) - 1) < 1e-12

    @pytest.mark.parametrize("d", [0, 1, -3])
    def test_invalid_dimension(self, d):
        with pytest.raises(DimensionError):
            max_entangled_state(d)


class TestSchmidt:
    def test_product_state(self):
        psi = np.zeros(9, complex)
        psi[0] = 1
        dec = schmidt_decompose(psi)
        assert dec.rank == 1
        np.testing.assert_allclose(dec.coefficients[0], 1.0)

    @pytest.mark.parametrize("d", [2, 3, 7])
    def test_max_entangled_full_rank(self, d):
        dec = schmidt_decompose(max_entangled_state(d))
        assert dec.rank == d
        np.testing.assert_allclose(dec.coefficients, 1 / math.sqrt(d), atol=1e-12)

    @pytest.mark.parametrize("eps", [1e-6, 0.1, 0.5, 0.99])
    def test_near_product_state_has_maximal_rank(self, eps):
        d = 5
        psi = np.zeros(d * d, complex)
        psi[0] = math.sqrt(1 - eps)
        for i in range(1, d):
            psi[i * d + i] = math.sqrt(eps / (d - 1))
        assert schmidt_decompose(psi).rank == d

    @pytest.mark.parametrize("d", [2, 3, 5, 8, 16])
    def test_reconstruction(self, d, rng):
        psi = random_pure(d, rng)
        dec = schmidt_decompose(psi)
        assert abs(np.sum(dec.coefficients**2) - 1) < 1e-10
        assert np.abs(dec.reconstruct() - psi).max() < 1e-10
        assert np.all(np.diff(dec.coefficients) <= 1e-15)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            schmidt_decompose(np.ones(4))


class TestValidation:
    def test_rejects_negative_eigenvalue(self):
        rho = np.diag([0.5, 0.5, 0.5, -0.5]).astype(complex)
        with pytest.raises(ValidationError):
            validate_density_matrix(rho)

    def test_rejects_bad_trace(self):
        rho = np.eye(4) / 4 * (1 + 1e-9)
        with pytest.raises(ValidationError):
            validate_density_matrix(rho)

    def test_rejects_non_square_dimension(self):
        with pytest.raises(DimensionError):
            validate_density_matrix(np.eye(3) / 3)


class TestFidelityOverlap:
    def test_phi_plus(self):
        assert fidelity_overlap(projector(max_entangled_state(4))) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("d,v", [(2, 0.3), (3, 0.7), (6, 0.0), (5, 1.0)])
    def test_isotropic(self, d, v):
        assert fidelity_overlap(isotropic_state(d, v)) == pytest.approx(v + (1 - v) / d**2, abs=1e-14)

    def test_orthogonal_product(self):
        psi = np.zeros(9, complex)
        psi[1] = 1
        assert fidelity_overlap(projector(psi)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            fidelity_overlap(np.eye(9) / 9, d=2)


def _grid_fidelity_d2(psi, steps=61):
    """Brute-force max over SU(2) of |<phi+|(U x 1)|psi>|^2 on an Euler-angle grid."""
    phi = max_entangled_state(2)
    best = 0.0
    angles = np.linspace(0, 2 * np.pi, steps)
    for a, b, c in itertools.product(angles, np.linspace(0, np.pi, steps // 2), angles):
        u = np.array(
            [
                [np.exp(1j * (a + c) / 2) * np.cos(b / 2), np.exp(1j * (a - c) / 2) * np.sin(b / 2)],
                [-np.exp(-1j * (a - c) / 2) * np.sin(b / 2), np.exp(-1j * (a + c) / 2) * np.cos(b / 2)],
            ]
        )
        best = max(best, abs(np.vdot(phi, np.kron(u, np.eye(2)) @ psi)) ** 2)
    return best


class TestFidelityAscent:
    def test_pure_d2_matches_grid_oracle(self, rng):
        for _ in range(3):
            psi = random_pure(2, rng)
            grid = _grid_fidelity_d2(psi)
            ascent = fidelity_ascent(projector(psi), seed=1)
            lam = schmidt_decompose(psi).coefficients
            # grid is a lower bound on the true optimum, accurate to the grid spacing
            assert ascent >= grid - 1e-12
            assert ascent - grid < 5e-3
            assert ascent == pytest.approx(lam.sum() ** 2 / 2, abs=1e-9)

    @pytest.mark.parametrize("d", [3, 4])
    def test_pure_matches_schmidt_alignment(self, d, rng):
        for _ in range(3):
            psi = random_pure(d, rng)
            lam = schmidt_decompose(psi).coefficients
            value = fidelity_ascent(projector(psi), seed=2)
            assert value == pytest.approx(lam.sum() ** 2 / d, abs=1e-8)
            # no random unitary beats the alignment value
            phi = max_entangled_state(d)
            for _ in range(200):
                u = random_unitary(d, rng)
                assert abs(np.vdot(phi, np.kron(u, np.eye(d)) @ psi)) ** 2 <= value + 1e-10

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_recovers_rotated_phi_plus(self, d, rng):
        v = random_unitary(d, rng)
        w = random_unitary(d, rng)
        # (W x 1) phi+ is maximally entangled but has small overlap with phi+
        psi = np.kron(w, np.eye(d)) @ np.kron(v, v.conj()) @ max_entangled_state(d)
        assert fidelity_ascent(projector(psi), seed=0) >= 1 - 1e-8

    @pytest.mark.parametrize("d", [2, 4])
    def test_maximally_mixed(self, d):
        assert fidelity_ascent(np.eye(d * d) / d**2) == pytest.approx(1 / d**2, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_never_below_overlap(self, d, rng):
        for _ in range(5):
            rho = random_density(d, rng, rank=2)
            assert fidelity_ascent(rho, restarts=1) >= fidelity_overlap(rho) - 1e-12

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_schmidt_rank_bound(self, d, rng):
        for r in range(1, d + 1):
            a = np.linalg.qr(rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r)))[0]
            b = np.linalg.qr(rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r)))[0]
            lam = rng.random(r) + 0.1
            lam /= np.linalg.norm(lam)
            psi = ((a * lam) @ b.T).reshape(-1)
            assert fidelity_ascent(projector(psi), restarts=2) <= r / d + 1e-8

    def test_deterministic(self, rng):
        rho = random_density(3, rng)
        assert fidelity_ascent(rho, seed=5) == fidelity_ascent(rho, seed=5)


class TestConjugateLocal:
    def test_real_vector_fixed(self):
        v = np.array([0.6, 0.8])
        np.testing.assert_array_equal(conjugate_local(v), v)

    def test_definition(self):
        r = 1 / math.sqrt(2)
        np.testing.assert_allclose(conjugate_local([r, 1j * r]), [r, -1j * r])

    @settings(max_examples=50)
    @given(st.lists(st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6), min_size=1, max_size=8))
    def test_involution(self, values):
        v = np.array(values, dtype=complex)
        np.testing.assert_array_equal(conjugate_local(conjugate_local(v)), v)
