import math

import numpy as np
import pytest

from prs_sensing import (
    CampConfig,
    CampDivergenceError,
    PrsConfig,
    camp_run,
    camp_to_map,
    full_allocation,
    generate_allocation,
    periodogram,
    soft_threshold,
    tau_from_pfa,
)
from prs_sensing.camp import SparseMap, lower_median
from prs_sensing.specest import from_range_doppler

from support import atom, estimate_from_values, exact_atom


class TestSoftThreshold:
    def test_shrinks_magnitude_keeps_phase(self):
        assert soft_threshold(3 + 4j, 1.0) == pytest.approx(2.4 + 3.2j, rel=1e-12)

    def test_below_threshold_is_exact_zero(self):
        assert soft_threshold(0.5 + 0j, 1.0) == 0.0

    def test_zero_threshold_is_identity(self):
        x = 0.7 - 1.3j
        assert soft_threshold(x, 0.0) == x

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold(1.0 + 0j, -0.1)

    def test_elementwise_on_arrays(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(100) + 1j * rng.standard_normal(100)
        out = soft_threshold(x, 0.8)
        mag = np.abs(x)
        assert np.all(out[mag <= 0.8] == 0)
        kept = mag > 0.8
        assert np.allclose(np.abs(out[kept]), mag[kept] - 0.8, rtol=1e-12)
        # radial shrinkage: phase preserved to the last ulp of the real scaling
        assert np.allclose(np.angle(out[kept]), np.angle(x[kept]), rtol=0, atol=1e-12)


class TestTauFromPfa:
    def test_exact_value(self):
        assert tau_from_pfa(math.exp(-16.0)) == pytest.approx(4.0, rel=1e-12)

    def test_paper_operating_point(self):
        assert tau_from_pfa(1e-7) == pytest.approx(4.0147, abs=1e-3)

    def test_limit_near_one(self):
        assert tau_from_pfa(1.0 - 1e-12) < 1.1e-6

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.5, 2.0])
    def test_domain_rejected(self, p):
        with pytest.raises(ValueError):
            tau_from_pfa(p)


class TestLowerMedian:
    def test_odd_count(self):
        assert lower_median(np.array([5.0, 1.0, 3.0])) == 3.0

    def test_even_count_takes_lower(self):
        assert lower_median(np.array([4.0, 1.0, 3.0, 2.0])) == 2.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            lower_median(np.array([]))


class TestCampConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            CampConfig(tau=0.0)
        with pytest.raises(ValueError):
            CampConfig(tau=3.4, n_iter=0)
        with pytest.raises(ValueError):
            CampConfig(tau=3.4, residual_variant="bogus")
        with pytest.raises(ValueError):
            CampConfig(tau=3.4, stop_tol=-1.0)


class TestCampRun:
    def test_all_zero_input_fixed_point(self):
        est = estimate_from_values(np.zeros((16, 8)))
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=10))
        assert np.all(sp.values == 0)
        assert sp.support_size == 0
        assert all(h.sigma == 0.0 for h in sp.history)

    def test_nonfinite_abort_names_iteration(self):
        values = np.zeros((8, 4), dtype=complex)
        values[2, 1] = np.inf
        est = estimate_from_values(values)
        with pytest.raises(CampDivergenceError, match="iteration 1") as info:
            camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=5))
        assert info.value.iteration == 1

    def test_diagnostics_history(self):
        est = estimate_from_values(exact_atom(16, 8, 4, 2, amp=1.0))
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=7))
        assert sp.iterations_run == 7
        assert [h.iteration for h in sp.history] == list(range(1, 8))
        assert all(h.residual_energy >= 0 for h in sp.history)
        assert sp.support_size == int(np.count_nonzero(sp.values))

    def test_early_stop(self):
        est = estimate_from_values(exact_atom(16, 8, 4, 2, amp=1.0))
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=100, stop_tol=1e-10))
        assert sp.iterations_run < 100

    def test_literal_previous_variant_runs(self):
        rng = np.random.default_rng(3)
        values = (rng.standard_normal((16, 8)) + 1j * rng.standard_normal((16, 8)))
        est = estimate_from_values(values)
        a = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=10))
        b = camp_run(est, est.alloc,
                     CampConfig(tau=3.4, n_iter=10, residual_variant="literal_previous"))
        assert not np.array_equal(a.values, b.values)

    def test_allocation_mismatch_rejected(self):
        est = estimate_from_values(np.zeros((16, 8)))
        other = full_allocation(8, 8)
        with pytest.raises(ValueError):
            camp_run(est, other, CampConfig(tau=3.4, n_iter=3))


def noise_estimate(n_sc, n_sy, alloc, seed):
    rng = np.random.default_rng(seed)
    values = (rng.standard_normal((n_sc, n_sy)) + 1j * rng.standard_normal((n_sc, n_sy)))
    values /= np.sqrt(2)
    return estimate_from_values(values, alloc=alloc)


class TestSparsity:
    def test_exact_zeros_or_positive(self):
        est = noise_estimate(64, 32, full_allocation(64, 32), 42)
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=30))
        mag = np.abs(sp.values)
        assert np.all((mag == 0) | (mag > 0))
        assert 0 < sp.support_size < 64 * 32
        assert sp.support_size == int((mag > 0).sum())

    def test_noise_only_tau4_mostly_zero(self):
        # tau = 4 leaves >= 99% of the grid exactly zero on pure noise
        est = noise_estimate(256, 128, full_allocation(256, 128), 42)
        sp = camp_run(est, est.alloc, CampConfig(tau=4.0, n_iter=50))
        assert 1.0 - sp.support_size / (256 * 128) >= 0.99

    @pytest.mark.xfail(
        strict=True,
        reason="With the published noise estimator sigma = median(|X~|)/sqrt(2), the "
               "survive fraction of Rayleigh noise is exp(-tau^2 ln2 / 2) = 1.8% at "
               "tau = 3.4, so ~98.2% of cells are zero, not >= 99%; that would need "
               "tau >= 3.65. Kept as a strict expected failure.",
    )
    def test_noise_only_tau34_99pct_zero(self):
        est = noise_estimate(256, 128, full_allocation(256, 128), 42)
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=50))
        assert 1.0 - sp.support_size / (256 * 128) >= 0.99

    def test_support_monotone_in_tau(self):
        est = noise_estimate(64, 32, full_allocation(64, 32), 7)
        sizes = []
        for tau in (2.0, 3.0, 3.4, 4.0, 5.0):
            sp = camp_run(est, est.alloc, CampConfig(tau=tau, n_iter=30))
            sizes.append(sp.support_size)
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))


class TestMaskedConsistency:
    def test_converged_estimate_reprojects_to_measurements(self):
        est = estimate_from_values(2.0 * atom(32, 16, 5, 3))
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=300, stop_tol=1e-12))
        reproj = from_range_doppler(sp.values)
        rel = np.abs(reproj - est.values).max() / np.abs(est.values).max()
        assert rel < 1e-6


class TestCampToMap:
    def test_all_zero(self):
        sp = SparseMap(values=np.zeros((8, 4), dtype=complex), iterations_run=1,
                       final_sigma=0.0, support_size=0,
                       delta_f_hz=120e3, t_sym_s=8.92e-6, f_c_hz=26e9)
        assert np.all(camp_to_map(sp).power == 0)

    def test_single_entry_squares(self):
        values = np.zeros((8, 4), dtype=complex)
        values[3, 1] = 2.0
        sp = SparseMap(values=values, iterations_run=1, final_sigma=0.0, support_size=1,
                       delta_f_hz=120e3, t_sym_s=8.92e-6, f_c_hz=26e9)
        rd = camp_to_map(sp)
        raw = np.fft.ifftshift(rd.power, axes=1)
        assert raw[3, 1] == 4.0
        assert (rd.power > 0).sum() == 1

    def test_support_size_equals_positive_cells(self):
        est = noise_estimate(32, 16, full_allocation(32, 16), 11)
        sp = camp_run(est, est.alloc, CampConfig(tau=3.0, n_iter=20))
        rd = camp_to_map(sp)
        assert (rd.power > 0).sum() == sp.support_size

    def test_same_calibration_as_periodogram(self):
        est = estimate_from_values(atom(16, 8, 4, 2))
        rd_per = periodogram(est)
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=5))
        rd_camp = camp_to_map(sp)
        assert rd_camp.range_bin_m == rd_per.range_bin_m
        assert rd_camp.velocity_bin_mps == rd_per.velocity_bin_mps
        assert rd_camp.power.shape == rd_per.power.shape

    def test_normalized_on_request(self):
        est = estimate_from_values(atom(16, 8, 4, 2))
        sp = camp_run(est, est.alloc, CampConfig(tau=3.4, n_iter=5))
        rd = camp_to_map(sp, normalized=True)
        assert rd.normalized and rd.power.max() == 1.0
