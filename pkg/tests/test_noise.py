import warnings

import numpy as np
import pytest

from schmidt_cert.errors import NoKernelError, NoThresholdError
from schmidt_cert.measurements import (
    eam_dephasing_tuned,
    eam_fourier_drop_row,
    mub_full_prime,
    mub_pair,
    sic_from_fiducial,
)
from schmidt_cert.noise import (
    NoiseSpec,
    accuracy_delta,
    delta_eam_iso,
    delta_mub_iso,
    dephased_state,
    isotropic_state,
    threshold_scan,
    unfaithful_state,
    v_crit_eam_dephase,
    v_crit_eam_iso,
    v_crit_mub_iso,
    v_crit_worst,
    v_opt_dephase,
    v_opt_iso,
    worst_case_state,
)
from schmidt_cert.states import fidelity_overlap, max_entangled_state, projector, validate_density_matrix
from schmidt_cert.witness import eam_witness_value, mub_witness_value


class TestStates:
    @pytest.mark.parametrize("d", [2, 5])
    def test_isotropic_endpoints(self, d):
        np.testing.assert_allclose(isotropic_state(d, 1.0), projector(max_entangled_state(d)), atol=1e-15)
        np.testing.assert_allclose(isotropic_state(d, 0.0), np.eye(d * d) / d**2, atol=1e-15)

    def test_isotropic_fidelity(self):
        assert fidelity_overlap(isotropic_state(4, 0.2)) == pytest.approx(0.2 + 0.8 / 16)

    def test_visibility_range(self):
        with pytest.raises(ValueError):
            isotropic_state(3, 1.2)
        with pytest.raises(ValueError):
            NoiseSpec("dephasing", -0.1, 3)

    @pytest.mark.parametrize("d", [2, 3, 8])
    def test_dephased_zero_visibility(self, d):
        assert mub_witness_value(dephased_state(d, 0.0), mub_pair(d)) == pytest.approx(1 + 1 / d, abs=1e-12)

    def test_dephased_full_visibility(self):
        np.testing.assert_allclose(dephased_state(3, 1.0), projector(max_entangled_state(3)), atol=1e-15)

    @pytest.mark.parametrize("d", [3, 5, 7])
    def test_dephased_pair_threshold(self, d):
        for k in range(1, d):
            assert threshold_scan("dephasing", mub_pair(d), k) == pytest.approx((k - 1) / (d - 1), abs=1e-12)

    def test_worst_case_d3_pair(self):
        fam = mub_pair(3)
        rho = worst_case_state(3, 0.0, fam)
        validate_density_matrix(rho)
        assert mub_witness_value(rho, fam) < 1e-10
        for v in (0.3, 0.8):
            assert mub_witness_value(worst_case_state(3, v, fam), fam) == pytest.approx(2 * v, abs=1e-10)

    def test_worst_case_selector(self):
        fam = mub_pair(3)
        rho = worst_case_state(3, 0.0, fam, selector=2)
        assert np.trace(rho @ rho).real == pytest.approx(1.0)
        assert mub_witness_value(rho, fam) < 1e-10

    def test_worst_case_sic_has_no_kernel(self):
        with pytest.raises(NoKernelError):
            worst_case_state(3, 0.5, sic_from_fiducial(3))

    def test_unfaithful(self):
        np.testing.assert_allclose(unfaithful_state(3, 1.0), projector(max_entangled_state(3)), atol=1e-15)
        rho0 = unfaithful_state(3, 0.0)
        # |01>: computational basis gives 0, Fourier basis gives d * (1/d^2)
        assert mub_witness_value(rho0, mub_pair(3)) == pytest.approx(1 / 3, abs=1e-12)


class TestClosedForms:
    def test_v_opt_iso_qubits(self):
        assert v_opt_iso(2, 1) == pytest.approx(1 / 3)

    @pytest.mark.parametrize("d", [3, 5, 9])
    def test_v_opt_iso_k_d_minus_1(self, d):
        assert v_opt_iso(d, d - 1) == pytest.approx((d * d - d - 1) / (d * d - 1))

    @pytest.mark.parametrize("d", [2, 3, 5, 7, 11])
    def test_complete_mub_optimal(self, d):
        for k in range(1, d):
            assert v_crit_mub_iso(d + 1, d, k) == pytest.approx(v_opt_iso(d, k), abs=1e-14)
            assert v_crit_eam_iso(d * d, d, k) == pytest.approx(v_opt_iso(d, k), abs=1e-14)

    @pytest.mark.parametrize("m", [2, 3, 7])
    def test_k1_is_one_over_m(self, m):
        assert v_crit_mub_iso(m, 11, 1) == pytest.approx(1 / m)

    def test_eam_dephase_d8(self):
        assert v_crit_eam_dephase(8, 1) == pytest.approx(2 / 3, abs=1e-15)
        assert v_crit_eam_dephase(8, 7) == pytest.approx(60 / 63, abs=1e-15)

    def test_eam_dephase_cross_check_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            for d in (2, 3, 5, 16):
                for k in range(1, d):
                    v_crit_eam_dephase(d, k)

    def test_worst_case_qubit_pair(self):
        assert v_crit_worst("mub", 2, 2, 1) == pytest.approx(3 / 4)
        assert threshold_scan("worst_case", mub_pair(2), 1) == pytest.approx(3 / 4, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3])
    def test_worst_case_maximal(self, d):
        for k in range(1, d):
            assert v_crit_worst("mub", d + 1, d, k) == pytest.approx(k / d)
            assert v_crit_worst("eam", d * d, d, k) == pytest.approx(k / d)
            assert threshold_scan("worst_case", mub_full_prime(d), k) == pytest.approx(k / d, abs=1e-12)
            assert threshold_scan("worst_case", sic_from_fiducial(d), k) == pytest.approx(k / d, abs=1e-12)

    @pytest.mark.parametrize("d", [3, 5, 7])
    def test_monotone_in_settings(self, d):
        for k in range(1, d):
            vals = [v_crit_mub_iso(m, d, k) for m in range(2, d + 2)]
            assert np.all(np.diff(vals) < 0)
            vals = [v_crit_eam_iso(n, d, k) for n in range(d + 1, d * d + 1)]
            assert np.all(np.diff(vals) < 0)

    def test_large_d_limit(self):
        for m in (2, 3, 5):
            for k in (1, 2, 5):
                assert abs(v_crit_mub_iso(m, 10**4, k) - 1 / m) < 1e-3

    @pytest.mark.parametrize("d", [2, 3, 5, 8, 13])
    def test_outputs_in_unit_interval(self, d):
        for k in range(1, d):
            vals = [v_opt_iso(d, k), v_opt_dephase(d, k), v_crit_eam_dephase(d, k, verify=False)]
            vals += [v_crit_mub_iso(m, d, k) for m in range(2, d + 2)]
            vals += [v_crit_eam_iso(n, d, k) for n in range(d + 1, d * d + 1)]
            vals += [v_crit_worst("mub", m, d, k) for m in range(2, d + 2)]
            vals += [v_crit_worst("eam", n, d, k) for n in range(d + 1, d * d + 1)]
            assert all(0 <= v <= 1 for v in vals)


class TestDelta:
    @pytest.mark.parametrize("d,m", [(3, 2), (7, 5), (13, 14)])
    def test_mub_closed_form_k_independent(self, d, m):
        for k in range(1, d):
            delta = accuracy_delta(v_crit_mub_iso(m, d, k), v_opt_iso(d, k))
            assert delta == pytest.approx(delta_mub_iso(m, d), abs=1e-12)

    def test_mub_limits(self):
        assert delta_mub_iso(5, 10**6) == pytest.approx(0.8, abs=1e-5)
        assert delta_mub_iso(20, 10**6) == pytest.approx(0.95, abs=1e-5)

    @pytest.mark.parametrize("d,n", [(3, 4), (5, 11), (8, 9)])
    def test_eam_closed_form(self, d, n):
        for k in range(1, d):
            delta = accuracy_delta(v_crit_eam_iso(n, d, k), v_opt_iso(d, k))
            assert delta == pytest.approx(delta_eam_iso(n, d), abs=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_unfaithful_quality_at_maximal_sets(self, d):
        v = threshold_scan("unfaithful", mub_full_prime(d), 1)
        assert v == pytest.approx(1 / d, abs=1e-12)
        assert accuracy_delta(v, 0.0) == pytest.approx(1 - 1 / d, abs=1e-12)
        if d <= 3:
            v = threshold_scan("unfaithful", sic_from_fiducial(d), 1)
            assert accuracy_delta(v, 0.0) == pytest.approx(1 - 1 / d, abs=1e-12)


class TestThresholdScan:
    def test_isotropic_mub_5_3(self):
        v = threshold_scan("isotropic", mub_full_prime(5, 3), 2)
        assert v == pytest.approx(v_crit_mub_iso(3, 5, 2), abs=1e-9)

    def test_bisection_callable(self):
        fam = mub_full_prime(5, 3)
        v = threshold_scan(lambda v: isotropic_state(5, v), fam, 2, tol=1e-11)
        assert v == pytest.approx(v_crit_mub_iso(3, 5, 2), abs=1e-9)

    def test_dephased_tuned_eam_d8(self):
        assert threshold_scan("dephasing", eam_dephasing_tuned(8), 1) == pytest.approx(2 / 3, abs=1e-12)

    def test_no_crossing(self):
        # the maximally mixed state never reaches the separable bound
        with pytest.raises(NoThresholdError):
            threshold_scan(lambda v: np.eye(9) / 9, mub_pair(3), 1)

    def test_linear_and_bisect_agree(self):
        frame = eam_fourier_drop_row(5)
        for k in range(1, 5):
            a = threshold_scan("isotropic", frame, k, method="linear")
            b = threshold_scan("isotropic", frame, k, method="bisect")
            assert a == pytest.approx(b, abs=1e-9)


def test_eam_witness_of_worst_case_is_linear():
    frame = eam_fourier_drop_row(3)
    rho = worst_case_state(3, 0.4, frame)
    assert eam_witness_value(rho, frame) == pytest.approx(0.4 * 3 / 2, abs=1e-10)
