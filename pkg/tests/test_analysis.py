"""Fixed points, cumulants, Zeno curves, extremality and classicality."""

import math

import numpy as np
import pytest

from conftest import family_for

from boskraus.analysis import (
    classicality_check,
    cumulants,
    fixed_point,
    gram_rank,
    iterate,
    product_family,
    simultaneous_diagonality,
    thermal_estimate,
    thermal_step,
    zeno_kappa,
)
from boskraus.channels import ChannelSpec
from boskraus.errors import InvalidParameter, StencilFailure, UnsupportedFamily
from boskraus.fock import (
    coherent_state,
    fock_state,
    phase_averaged_state,
    random_mixed_state,
    thermal_state,
    trace_distance,
)
from boskraus.kraus import apply, build_continuous, build_discrete, dual, suggest_ell_max


class TestThermalRecursion:
    def test_conjugator_fixed_point_value(self):
        spec = ChannelSpec("D", 0.8)
        target = fixed_point(spec)
        assert target == pytest.approx(41.0 / 9.0)
        assert thermal_step(spec, target) == pytest.approx(target)

    def test_attenuator_vacuum_fixed(self):
        assert thermal_step(ChannelSpec("C1", 0.44), 1.0) == pytest.approx(1.0)
        assert fixed_point(ChannelSpec("C1", 0.3)) == 1.0
        assert fixed_point(ChannelSpec("A1")) == 1.0

    def test_amplifier_strictly_heats(self):
        assert thermal_step(ChannelSpec("C2", 1.5), 1.0) == pytest.approx(3.5)
        assert fixed_point(ChannelSpec("C2", 2.0)) is None

    def test_hot_conjugators_have_none(self):
        assert fixed_point(ChannelSpec("D", 1.0)) is None
        assert fixed_point(ChannelSpec("D", 1.7)) is None

    def test_guards(self):
        with pytest.raises(InvalidParameter):
            thermal_step(ChannelSpec("D", 0.8), 0.5)
        with pytest.raises(UnsupportedFamily):
            thermal_step(ChannelSpec("A2"), 2.0)


class TestIterate:
    def test_conjugator_attracts_everything(self):
        spec = ChannelSpec("D", 0.8)
        fam = family_for(spec, 64)
        for a0 in (1.0, 7.0):
            traj = iterate(fam, thermal_state(a0, 64), 40)
            assert traj.a0_estimates[-1] == pytest.approx(41.0 / 9.0, abs=1e-2)
        traj = iterate(fam, fock_state(3, 64), 40)
        assert traj.a0_estimates[-1] == pytest.approx(41.0 / 9.0, abs=1e-2)

    def test_contraction_rate_matches_recursion(self):
        # the per-step gap shrinks by kappa^2 after transients
        spec = ChannelSpec("D", 0.8)
        fam = family_for(spec, 64)
        traj = iterate(fam, thermal_state(7.0, 64), 12)
        target = fixed_point(spec)
        gaps = np.abs(np.array(traj.a0_estimates) - target)
        rates = gaps[5:10] / gaps[4:9]
        np.testing.assert_allclose(rates, 0.64, rtol=0.1)

    def test_attenuator_cools_to_vacuum(self):
        fam = build_discrete(ChannelSpec("C1", 0.7), 63, 64)
        traj = iterate(fam, thermal_state(5.0, 64), 60)
        assert traj.a0_estimates[-1] == pytest.approx(1.0, abs=1e-6)
        assert trace_distance(traj.states[-1], fock_state(0, 64)) < 1e-6

    def test_amplifier_monotone_heating(self):
        fam = family_for(ChannelSpec("C2", 1.2), 64)
        traj = iterate(fam, fock_state(0, 64), 10)
        diffs = np.diff(traj.a0_estimates)
        assert np.all(diffs > 0)
        # matches the affine recursion while truncation is negligible
        assert traj.a0_estimates[1] == pytest.approx(thermal_step(ChannelSpec("C2", 1.2), 1.0), abs=1e-8)

    def test_distances_decrease(self):
        fam = family_for(ChannelSpec("D", 0.6), 48)
        traj = iterate(fam, thermal_state(4.0, 48), 15)
        assert traj.step_distances[-1] < traj.step_distances[0]
        assert all(d >= 0 for d in traj.step_distances)


FOCK1_CUMULANTS = {
    # from log chi = log(1 - r^2) - r^2/2 = -(3/2) r^2 - r^4/2 - ...,
    # r^2 = xi1^2 + xi2^2
    (2, 0): 3.0, (0, 2): 3.0, (4, 0): -12.0, (0, 4): -12.0, (2, 2): -4.0,
    (1, 0): 0.0, (3, 0): 0.0, (2, 1): 0.0, (1, 1): 0.0,
}


class TestCumulants:
    def test_fock_one_against_analytic_series(self):
        g = cumulants(fock_state(1, 32), 4)
        for (m1, m2), want in FOCK1_CUMULANTS.items():
            assert g[m1, m2] == pytest.approx(want, abs=2e-5), (m1, m2)

    def test_gaussian_states_have_no_higher_cumulants(self):
        for rho in (fock_state(0, 32), thermal_state(2.0, 48)):
            g = cumulants(rho, 4)
            for m1 in range(5):
                for m2 in range(5 - m1):
                    if m1 + m2 >= 3:
                        assert abs(g[m1, m2]) < 1e-6

    def test_second_cumulant_is_thermal_parameter(self):
        g = cumulants(thermal_state(3.2, 64), 2)
        assert g[2, 0] == pytest.approx(3.2, abs=1e-7)
        assert g[0, 0] == 0.0

    def test_attenuator_law_on_fock_probe(self):
        # gamma' = kappa^(m1+m2) gamma at orders 3 and 4
        k, n_cut = 0.75, 48
        fam = build_discrete(ChannelSpec("C1", k), n_cut - 1, n_cut)
        rho = fock_state(1, n_cut)
        gi = cumulants(rho, 4)
        go = cumulants(apply(fam, rho), 4)
        for (m1, m2) in [(4, 0), (2, 2), (0, 4)]:
            want = k ** (m1 + m2) * gi[m1, m2]
            assert go[m1, m2] == pytest.approx(want, rel=1e-3)
        for (m1, m2) in [(3, 0), (2, 1)]:  # vanish on phase-symmetric probes
            assert abs(go[m1, m2]) < 1e-5

    def test_conjugator_law_alternates_sign(self):
        k, n_cut = 0.8, 48
        fam = family_for(ChannelSpec("D", k), n_cut)
        rho = random_mixed_state(5, 3, 12)
        big = np.zeros((n_cut, n_cut), dtype=complex)
        big[:12, :12] = rho.mat
        from boskraus.fock import DensityMatrix, TruncatedOperator

        rho = DensityMatrix(TruncatedOperator(big), 0.0)
        gi = cumulants(rho, 4)
        go = cumulants(apply(fam, rho), 4)
        for (m1, m2) in [(3, 0), (2, 1), (1, 2), (0, 3), (4, 0), (2, 2)]:
            want = (-1.0) ** m1 * k ** (m1 + m2) * gi[m1, m2]
            scale = max(abs(want), 1e-3)
            assert abs(go[m1, m2] - want) / scale < 1e-2, (m1, m2)

    def test_amplifier_law(self):
        k, n_cut = 1.3, 64
        fam = family_for(ChannelSpec("C2", k), n_cut)
        rho = fock_state(1, n_cut)
        gi = cumulants(rho, 4)
        go = cumulants(apply(fam, rho), 4)
        for (m1, m2) in [(4, 0), (2, 2)]:
            want = k ** (m1 + m2) * gi[m1, m2]
            assert go[m1, m2] == pytest.approx(want, rel=1e-3)

    def test_stencil_failure(self):
        # the Fock-one characteristic function vanishes on the unit circle
        with pytest.raises(StencilFailure):
            cumulants(fock_state(1, 32), 2, h=0.5)


class TestZeno:
    def test_total_attenuation_single_shot(self):
        assert zeno_kappa("attenuator", 1, 1) == pytest.approx(0.0, abs=1e-16)

    def test_closed_forms(self):
        # frozen oracle values from direct evaluation of the product formulas
        assert zeno_kappa("attenuator", 10, 10) == pytest.approx(0.8834851836794666, abs=1e-12)
        assert zeno_kappa("amplifier", 1, 1, total=2.0) == pytest.approx(np.cosh(2.0), abs=1e-12)
        assert zeno_kappa("amplifier", 10, 10, total=2.0) == pytest.approx(np.cosh(0.2) ** 10, abs=1e-12)

    def test_interruption_slows_both(self):
        atten = [zeno_kappa("attenuator", n, n) for n in (1, 2, 5, 10)]
        assert atten == sorted(atten)  # less attenuation with more interrupts
        amp = [zeno_kappa("amplifier", n, n, total=2.0) for n in (1, 2, 5, 10)]
        assert amp == sorted(amp, reverse=True)

    def test_channel_iteration_cross_check(self):
        # iterating the one-segment attenuator equals the closed-form gain
        n, n_cut = 5, 48
        seg = build_discrete(ChannelSpec("C1", np.cos(np.pi / (2 * n))), n_cut - 1, n_cut)
        rho = thermal_state(3.0, n_cut)
        traj = iterate(seg, rho, n)
        direct = apply(build_discrete(ChannelSpec("C1", zeno_kappa("attenuator", n, n)), n_cut - 1, n_cut), rho)
        assert trace_distance(traj.states[-1], direct) < 1e-8

    def test_amplifier_iteration_cross_check(self):
        n, n_cut = 6, 64
        kappa_step = float(np.cosh(1.2 / n))
        seg = family_for(ChannelSpec("C2", kappa_step), n_cut)
        traj = iterate(seg, fock_state(0, n_cut), n)
        total = family_for(ChannelSpec("C2", kappa_step**n), n_cut)
        assert trace_distance(traj.states[-1], apply(total, fock_state(0, n_cut))) < 1e-8


def conjugator_block(k, delta, ell, j):
    if j > ell:
        return 0.0
    return (
        math.sqrt(math.comb(ell, j) * math.comb(ell + delta, j + delta))
        * (1 + k**2) ** (-j - delta / 2 - 1)
        * (1 + k**-2) ** (-(ell - j))
    )


def attenuator_block(k, delta, ell, j):
    if j < ell:
        return 0.0
    return (
        math.sqrt(math.comb(j, ell) * math.comb(j + delta, ell + delta))
        * (1 - k**2) ** (ell + delta / 2)
        * k ** (2 * (j - ell))
    )


def amplifier_block(k, delta, ell, j):
    return (
        k**-2
        * math.sqrt(math.comb(ell + j + delta, ell + delta) * math.comb(ell + j + delta, j + delta))
        * (1 - k**-2) ** (ell + delta / 2)
        * k ** (-(2 * j + delta))
    )


class TestExtremality:
    @pytest.mark.parametrize("spec", [ChannelSpec("D", 0.5), ChannelSpec("C1", 0.7), ChannelSpec("C2", 1.3)])
    @pytest.mark.parametrize("k", [3, 5, 6])
    def test_full_rank(self, spec, k):
        fam = build_discrete(spec, max(suggest_ell_max(spec, 64, 1e-13), 8), 64)
        rep = gram_rank(fam, k)
        assert rep.numerical_rank == rep.block == (k + 1) ** 2
        assert rep.singular_values[-1] > 1e-8 * rep.singular_values[0]

    def test_quadrature_family_full_rank(self):
        fam = build_continuous(ChannelSpec("A2"), 96, 64)
        rep = gram_rank(fam, 6)
        assert rep.numerical_rank == 49

    def test_conjugator_products_match_band_coefficients(self):
        k, n_cut = 0.8, 48
        fam = build_discrete(ChannelSpec("D", k), 16, n_cut, defect_limit=2.0)
        for delta in (0, 1, 3):
            for ell in (0, 2, 5):
                prod = fam.ops[ell + delta].conj().T @ fam.ops[ell]
                for j in range(10):
                    assert prod[j + delta, j].real == pytest.approx(
                        conjugator_block(k, delta, ell, j), abs=1e-10)

    def test_attenuator_products_match_band_coefficients(self):
        k, n_cut = 0.7, 48
        fam = build_discrete(ChannelSpec("C1", k), 16, n_cut, defect_limit=2.0)
        for delta in (0, 2):
            for ell in (0, 1, 4):
                prod = fam.ops[ell + delta].conj().T @ fam.ops[ell]
                for j in range(12):
                    assert prod[j + delta, j].real == pytest.approx(
                        attenuator_block(k, delta, ell, j), abs=1e-10)

    def test_amplifier_products_match_band_coefficients(self):
        k, n_cut = 1.4, 48
        fam = build_discrete(ChannelSpec("C2", k), 16, n_cut, defect_limit=2.0)
        for delta in (0, 2):
            for ell in (0, 1, 4):
                prod = fam.ops[ell + delta].conj().T @ fam.ops[ell]
                for j in range(12):
                    assert prod[j, j + delta].real == pytest.approx(
                        amplifier_block(k, delta, ell, j), abs=1e-10)

    def test_unit_conjugator_doubly_stochastic_yet_extremal(self):
        spec = ChannelSpec("D", 1.0)
        fam = build_discrete(spec, suggest_ell_max(spec, 80, 1e-13), 64)
        from boskraus.kraus import completeness_defect

        assert completeness_defect(dual(fam)) < 1e-6  # unital within truncation
        rep = gram_rank(fam, 6)
        assert rep.numerical_rank == 49  # hence not a mixture of unitaries


class TestProductFamilies:
    def test_apply_matches_sequential(self):
        inner = family_for(ChannelSpec("C1", 0.7), 48)
        outer = family_for(ChannelSpec("C2", 1.3), 48)
        prod = product_family(outer, inner, 30)
        rho = thermal_state(2.0, 48)
        sequential = apply(outer, apply(inner, rho))
        assert trace_distance(apply(prod, rho), sequential) < 1e-9
        assert prod.spec is not None and prod.spec.family == "C1"

    def test_attenuated_conjugator_products_vanish(self):
        d = build_discrete(ChannelSpec("D", 1.2), 8, 48, defect_limit=2.0)
        c1 = build_discrete(ChannelSpec("C1", 0.7), 8, 48, defect_limit=2.0)
        for m in range(9):
            for n in range(9):
                prod = c1.ops[m] @ d.ops[n]
                if m > n:
                    assert np.max(np.abs(prod)) == 0.0
                if m == n:
                    # multiples of the vacuum projector
                    nz = np.nonzero(prod)
                    assert set(zip(*nz)) <= {(0, 0)}

    def test_deficient_family_detected(self):
        d = build_discrete(ChannelSpec("D", 1.2), 8, 64, defect_limit=2.0)
        c1 = build_discrete(ChannelSpec("C1", 0.7), 8, 64, defect_limit=2.0)
        rep = gram_rank(product_family(c1, d, 6), 6)
        assert rep.numerical_rank < 49

    def test_amplified_attenuator_independent(self):
        c2 = build_discrete(ChannelSpec("C2", 1.4), 8, 64, defect_limit=2.0)
        c1 = build_discrete(ChannelSpec("C1", 0.7), 8, 64, defect_limit=2.0)
        rep = gram_rank(product_family(c2, c1, 5), 5)
        assert rep.numerical_rank == 36


class TestClassicality:
    def test_amplifier_husimi_scaling(self):
        grid = np.array([x + 1j * y for x in np.linspace(-1.2, 1.2, 5) for y in np.linspace(-1.2, 1.2, 5)])
        reps = classicality_check(ChannelSpec("C2", 1.5), [fock_state(1, 64)], grid)
        assert reps[0].passed and reps[0].max_deviation < 1e-6

    def test_attenuator_coherent_scaling(self):
        grid = np.zeros(1, dtype=complex)
        reps = classicality_check(ChannelSpec("C1", 0.7), [coherent_state(0.9 + 0.4j, 64)], grid)
        assert reps[0].passed and reps[0].max_deviation < 1e-8

    def test_conjugator_outputs_classical(self):
        grid = np.array([0.2 + 0.1j, -0.5j, 0.8, -0.3 - 0.3j])
        reps = classicality_check(ChannelSpec("D", 0.8), [coherent_state(0.6, 48)], grid)
        assert reps[0].passed
        assert reps[0].details["min_weight"] >= -1e-12

    def test_singular_family_weight_nonnegative(self):
        grid = np.zeros(1, dtype=complex)
        reps = classicality_check(ChannelSpec("A2"), [fock_state(1, 64)], grid)
        assert reps[0].passed


class TestPhotonStatistics:
    def test_attenuator_preserves_poissonian(self):
        # phase-averaged Poissonian input stays Poissonian (rescaled mean)
        lam, k, n_cut = 2.0, 0.7, 64
        fam = build_discrete(ChannelSpec("C1", k), n_cut - 1, n_cut)
        out = apply(fam, phase_averaged_state(lam, n_cut))
        want = phase_averaged_state(lam * k**2, n_cut)
        assert trace_distance(out, want) < 1e-10

    @pytest.mark.parametrize("spec", [ChannelSpec("D", 0.8), ChannelSpec("C2", 1.3)])
    def test_conjugator_and_amplifier_super_poissonian(self, spec):
        n_cut = 64
        fam = family_for(spec, n_cut)
        out = apply(fam, phase_averaged_state(2.0, n_cut))
        n = np.arange(n_cut)
        p = np.diag(out.mat).real
        mean = float(np.sum(n * p))
        var = float(np.sum(n**2 * p)) - mean**2
        assert var / mean > 1.0 + 1e-6  # Fano factor above the Poisson point


class TestSimultaneousDiagonality:
    def test_fock_banded_families(self):
        for spec in (ChannelSpec("D", 0.8), ChannelSpec("C1", 0.6), ChannelSpec("C2", 1.5)):
            fam = build_discrete(spec, 10, 32, defect_limit=2.0)
            assert simultaneous_diagonality(fam) == (True, "fock")

    def test_product_families(self):
        c2 = build_discrete(ChannelSpec("C2", 1.4), 6, 32, defect_limit=2.0)
        c1 = build_discrete(ChannelSpec("C1", 0.7), 6, 32, defect_limit=2.0)
        assert simultaneous_diagonality(product_family(c2, c1, 4)) == (True, "fock")

    def test_position_family(self):
        fam = build_continuous(ChannelSpec("A2"), 64, 32)
        assert simultaneous_diagonality(fam) == (True, "position")

    def test_random_unitary_family(self):
        fam = build_continuous(ChannelSpec("B1", noise_a=0.5), 48, 48)
        assert simultaneous_diagonality(fam) == (True, "any")


def test_thermal_estimate_matches_parameter():
    assert thermal_estimate(thermal_state(3.7, 96)) == pytest.approx(3.7, abs=1e-6)
    assert thermal_estimate(fock_state(2, 16)) == pytest.approx(5.0)
