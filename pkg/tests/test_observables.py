import math

import numpy as np
import pytest

from bjjsim import (
    CatSpec,
    NoiseModel,
    QuenchSpec,
    apply_dephasing,
    cat_state,
    coherent_state,
    decompose,
    evolve,
    fisher_information,
    fock_state,
    husimi_scan,
    husimi_steady_approx,
    husimi_two_component_approx,
    offdiag_weight,
    spread_phase,
    steady_state,
    theta3,
    trace_distance,
    visibility,
    visibility_noiseless,
    visibility_noisy,
)


def filtered_cat(N, q, spread, chi=1.0):
    rho = cat_state(CatSpec(QuenchSpec(N, chi), q)).density_matrix()
    return spread_phase(rho, spread * spread)


class TestVisibility:
    def test_phase_state_has_full_visibility(self):
        assert visibility(coherent_state(20, math.pi / 2, 0.0)) == pytest.approx(1.0, abs=1e-12)

    def test_steady_state_has_none(self):
        assert visibility(steady_state(10)) == 0.0

    def test_published_operating_point(self):
        # N=400, chi = pi*0.25 rad/s, quasi-static noise with h(0) = (8 rad/s)^2,
        # t = 0.1 s: the matrix pipeline must land on the closed form
        N, chi, t = 400, math.pi * 0.25, 0.1
        spec = QuenchSpec(N, chi)
        model = NoiseModel.ornstein_uhlenbeck(h0=64.0, tau_c=1e7)
        rho = apply_dephasing(evolve(coherent_state(N, math.pi / 2, 0.0), spec, t).density_matrix(), model, t)
        nu = visibility(rho)
        assert abs(nu - visibility_noisy(spec, model, t)) < 1e-10
        assert nu == pytest.approx(math.exp(-0.32) * math.cos(chi * t) ** 399, rel=1e-6)

    def test_closed_form_reductions(self):
        spec = QuenchSpec(25, 1.1)
        assert visibility_noisy(spec, NoiseModel.white(0.0), 2.0) == visibility_noiseless(spec, 2.0)
        spec_detuned = QuenchSpec(25, 1.1, lambda_bar=math.pi / 4)
        assert abs(visibility_noisy(spec_detuned, NoiseModel.white(0.5), 2.0)) < 1e-15  # cos(pi/2)

    def test_gaussian_envelope_in_weak_interaction_limit(self):
        # chi -> 0 with h(0) = 64: nu(t) ~ exp(-32 t^2)
        spec = QuenchSpec(400, 1e-9)
        model = NoiseModel.ornstein_uhlenbeck(h0=64.0, tau_c=1e8)
        for t in (0.05, 0.1, 0.2):
            assert visibility_noisy(spec, model, t) == pytest.approx(math.exp(-32 * t * t), rel=1e-6)

    @pytest.mark.parametrize("N", [2, 10, 100, 400])
    def test_pipeline_equals_closed_form(self, N):
        rng = np.random.default_rng(N + 1)
        for placement in ("spec", "model"):
            for _ in range(3):
                chi = float(rng.uniform(0.2, 2.0))
                lam = float(rng.uniform(-1.0, 1.0))
                a2 = float(rng.uniform(0.0, 4.0))
                t = float(rng.uniform(0.1, 3.0))
                if placement == "spec":
                    spec = QuenchSpec(N, chi, lam)
                    model = NoiseModel.white(diffusion=a2 / (2 * t))
                else:
                    spec = QuenchSpec(N, chi)
                    model = NoiseModel.white(diffusion=a2 / (2 * t), lambda_bar=lam)
                rho = evolve(coherent_state(N, math.pi / 2, 0.0), spec, t).density_matrix()
                nu = visibility(apply_dephasing(rho, model, t))
                assert abs(nu - visibility_noisy(spec, model, t)) < 1e-10


class TestTraceDistance:
    def test_identical_states(self):
        rho = steady_state(8)
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal_projectors(self):
        assert trace_distance(fock_state(6, 0), fock_state(6, 3)) == pytest.approx(1.0, abs=1e-14)

    def test_monotone_relaxation_toward_steady_state(self):
        rho_inf = steady_state(10)
        spreads = np.arange(0.0, 3.01, 0.3)
        dists = []
        for a in spreads:
            rho_d, _ = decompose(filtered_cat(10, 2, a), 2)
            dists.append(trace_distance(rho_d, rho_inf))
        assert all(x > y for x, y in zip(dists, dists[1:]))


class TestOffdiagWeight:
    def test_noiseless_coherences_are_present(self):
        _, od = decompose(filtered_cat(10, 2, 0.0), 2)
        assert offdiag_weight(od) > 0.1

    def test_strong_filter_suppression(self):
        _, od0 = decompose(filtered_cat(10, 2, 0.0), 2)
        _, od = decompose(filtered_cat(10, 2, 2.9), 2)
        assert offdiag_weight(od) < 0.02 * offdiag_weight(od0)

    def test_infinite_filter_annihilates(self):
        _, od = decompose(filtered_cat(10, 2, 40.0), 2)
        assert offdiag_weight(od) < 1e-200


class TestTheta3:
    def test_zero_nome(self):
        for z in (0.0, 0.5, 2.0):
            assert theta3(z, 0.0) == 1.0

    def test_series_value_against_mpmath(self):
        import mpmath

        for z, nome in ((0.0, math.exp(-2)), (0.7, 0.3), (2.1, 0.9)):
            want = float(mpmath.jtheta(3, z, nome))
            assert theta3(z, nome) == pytest.approx(want, rel=1e-13)

    def test_reference_point(self):
        assert theta3(0.0, math.exp(-2)) == pytest.approx(1.271342, abs=5e-7)

    def test_periodicity(self):
        for z in (0.3, 1.9):
            assert abs(theta3(z + math.pi, 0.4) - theta3(z, 0.4)) < 1e-14

    def test_nome_out_of_range(self):
        with pytest.raises(ValueError):
            theta3(0.0, 1.0)
        with pytest.raises(ValueError):
            theta3(0.0, -0.1)


class TestHusimiApproximation:
    def test_strong_noise_approaches_flat_profile(self):
        q_inf = husimi_steady_approx(100, math.pi / 2)
        vals = husimi_two_component_approx(100, 3.0, 0.0, 1.0, math.pi / 2, np.linspace(0, 2 * math.pi, 64))
        assert np.abs(vals / q_inf - 1).max() < 1e-7

    def test_weak_noise_peaks_at_zero_and_pi(self):
        phis = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        vals = husimi_two_component_approx(100, 0.4, 0.0, 1.0, math.pi / 2, phis)
        peaks = {round(phis[k], 3) for k in np.argsort(vals)[-2:]}
        assert peaks == {0.0, round(math.pi, 3)}

    def test_detuning_shifts_peaks(self):
        lam, chi = 0.5, 1.0
        phis = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
        vals = husimi_two_component_approx(100, 0.5, lam, chi, math.pi / 2, phis)
        peak = phis[np.argmax(vals)]
        expected = (-math.pi * lam / (2 * chi)) % math.pi
        assert min(abs(peak - expected), abs(peak - expected - math.pi)) < 0.01

    def test_matches_exact_filtered_husimi(self):
        # oracle: exact Husimi of the filtered mod-2 part via the state machinery
        N, spread = 100, 1.0
        rho_d, _ = decompose(filtered_cat(N, 2, spread), 2)
        phis = np.linspace(0, 2 * math.pi, 128, endpoint=False)
        exact = husimi_scan(rho_d, [math.pi / 2], phis).values[0]
        approx = husimi_two_component_approx(N, spread, 0.0, 1.0, math.pi / 2, phis)
        assert np.abs(approx / exact - 1).max() < 0.05

    def test_pole_rejected(self):
        with pytest.raises(ValueError):
            husimi_two_component_approx(100, 1.0, 0.0, 1.0, 0.0, 0.0)

    def test_small_system_warns(self):
        with pytest.warns(UserWarning):
            husimi_two_component_approx(10, 1.0, 0.0, 1.0, math.pi / 2, 0.0)


class TestFisherInformation:
    def test_noiseless_two_cat_reaches_heisenberg(self):
        res = fisher_information(filtered_cat(10, 2, 0.0))
        assert res.value == pytest.approx(100.0, abs=1e-8)
        assert abs(res.direction @ np.array([1.0, 0.0, 0.0])) > 1 - 1e-8

    def test_filtered_cat_intermediate_noise(self):
        res = fisher_information(filtered_cat(10, 2, 0.9))
        assert res.value == pytest.approx(56.972434905, rel=1e-8)

    def test_steady_state_value(self):
        res = fisher_information(steady_state(10))
        assert res.value == pytest.approx(45 / 11, abs=1e-8)

    def test_phase_state_sits_at_separable_bound(self):
        res = fisher_information(coherent_state(10, math.pi / 2, 0.0).density_matrix())
        assert res.value == pytest.approx(10.0, abs=1e-8)

    def test_mixture_of_two_phase_states(self):
        rho_d, _ = decompose(filtered_cat(10, 2, 0.0), 2)
        res = fisher_information(rho_d)
        assert res.value == pytest.approx(10.0, abs=1e-8)

    def test_pure_state_covariance_oracle(self):
        # independent route: F of a pure state is 4x the largest eigenvalue of
        # the symmetrized covariance of (J_x, J_y, J_z)
        from bjjsim import spin_operator

        rng = np.random.default_rng(2)
        N = 12
        raw = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
        psi = raw / np.linalg.norm(raw)
        js = [spin_operator(N, ax).elements for ax in "xyz"]
        means = [np.vdot(psi, j @ psi).real for j in js]
        cov = np.empty((3, 3))
        for a in range(3):
            for b in range(3):
                cov[a, b] = np.real(np.vdot(psi, js[a] @ js[b] @ psi) + np.vdot(psi, js[b] @ js[a] @ psi)) / 2
                cov[a, b] -= means[a] * means[b]
        from bjjsim import DensityMatrix, FockBasis

        res = fisher_information(DensityMatrix(FockBasis(N), np.outer(psi, psi.conj()), check_positive=False))
        assert res.value == pytest.approx(4 * np.linalg.eigvalsh(cov)[-1], rel=1e-9)

    def test_fixed_direction_query(self):
        rho = filtered_cat(10, 2, 0.0)
        res = fisher_information(rho, direction=[0.0, 0.0, 1.0])
        assert res.value == pytest.approx(10.0, abs=1e-8)  # 4 Var(J_z) of the binomial
        full = fisher_information(rho)
        assert res.value == pytest.approx(res.direction @ full.form @ res.direction, rel=1e-12)

    def test_form_invariants(self):
        res = fisher_information(filtered_cat(10, 2, 0.7))
        assert np.abs(res.form - res.form.T).max() < 1e-12
        assert res.value == pytest.approx(np.linalg.eigvalsh(res.form)[-1], rel=1e-12)
        assert 0 <= res.value <= 100 * (1 + 1e-9)

    def test_monotone_under_filtering(self):
        values = [fisher_information(filtered_cat(10, 2, a)).value for a in np.arange(0.0, 3.01, 0.3)]
        assert all(x >= y for x, y in zip(values, values[1:]))

    def test_relaxation_vs_decoherence_scales(self):
        # matched Markov intensity: a_q scales as 1/sqrt(q), so the q=4
        # superposition forms earlier and its diagonal part relaxes further
        rho_inf = steady_state(8)
        for a2 in (0.6, 0.9, 1.5):
            d2, _ = decompose(filtered_cat(8, 2, a2), 2)
            d4, _ = decompose(filtered_cat(8, 4, a2 / math.sqrt(2)), 4)
            assert trace_distance(d4, rho_inf) < trace_distance(d2, rho_inf)


class TestHusimiScanType:
    def test_grid_shape_and_bounds(self):
        scan = husimi_scan(steady_state(10), np.linspace(0.1, math.pi - 0.1, 7), np.linspace(0, 2 * math.pi, 13))
        assert scan.values.shape == (7, 13)
        assert scan.values.min() >= -1e-12

    def test_flat_in_phi_for_diagonal_states(self):
        scan = husimi_scan(steady_state(10), [math.pi / 2], np.linspace(0, 2 * math.pi, 32))
        assert np.ptp(scan.values[0]) < 1e-15
