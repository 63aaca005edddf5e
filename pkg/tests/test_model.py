import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasisep import model
from quasisep.fock import distance, inner_product, phase_distance

from conftest import random_params, same_ray

SQ2 = math.sqrt(2)


def dense_sector_hamiltonian(N, p):
    """2x2 block of H on (|0,N>, |1,N-1>) written out by hand."""
    return np.array([
        [N * p.omega_b, p.kappa.conjugate() / 2 * math.sqrt(N)],
        [p.kappa / 2 * math.sqrt(N), p.omega_f + (N - 1) * p.omega_b],
    ])


params_strategy = st.builds(
    lambda wb, d, r, t: model.JCParams(wb + d, wb, r * cmath.exp(1j * t)),
    st.floats(0.2, 3.0), st.floats(-5, 5), st.floats(0.01, 5), st.floats(0, 2 * math.pi),
)


class TestDerivedParams:
    def test_three_four_five(self):
        p = model.JCParams(4.0, 1.0, 4.0)
        assert p.Omega == 5.0 and p.delta == 3.0
        assert math.isclose(p.Delta, 5.0)
        assert math.isclose(p.phi, math.sqrt(0.8), rel_tol=1e-15)
        assert math.isclose(p.beta, math.sqrt(0.2), rel_tol=1e-15)

    def test_resonance_balanced(self):
        p = model.JCParams.resonant(kappa=2.0)
        assert math.isclose(p.phi, 1 / SQ2) and math.isclose(p.beta, 1 / SQ2)

    def test_negative_detuning_swaps(self):
        p = model.JCParams(1.0, 4.0, 4.0)
        assert math.isclose(p.phi, math.sqrt(0.2)) and math.isclose(p.beta, math.sqrt(0.8))

    def test_coupling_phase(self):
        p = model.JCParams(1.0, 1.0, 2j)
        assert math.isclose(p.theta, math.pi / 2)

    def test_uncoupled(self):
        p = model.JCParams(2.0, 1.0, 0.0)
        assert p.theta == 0 and p.phi == 1 and p.beta == 0

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            model.JCParams(1.0, 1.0, 0.0)

    @given(params_strategy)
    @settings(max_examples=100, deadline=None)
    def test_unit_norm_and_product(self, p):
        assert math.isclose(p.phi**2 + p.beta**2, 1, rel_tol=1e-14)
        assert math.isclose(p.phi * p.beta, abs(p.kappa) / (2 * p.Delta), rel_tol=1e-13)
        assert math.isclose(p.phi**2 - p.beta**2, p.delta / p.Delta, abs_tol=1e-14)

    def test_small_coupling_no_cancellation(self):
        p = model.JCParams(1.0 + 1e9, 1.0, 1e-3)
        assert p.beta > 0
        assert math.isclose(p.beta, 1e-3 / 2e9, rel_tol=1e-12)

    def test_indexed(self):
        p = model.JCParams.resonant(kappa=1.0)
        ip = p.indexed(4)
        assert math.isclose(ip.Delta_N, 2.0)
        with pytest.raises(ValueError):
            p.indexed(0)


class TestSpectrum:
    def test_bands_resonant(self):
        b = model.energy_bands(model.JCParams(1.0, 1.0, 1.0))
        assert (b.e_plus, b.e_minus) == (1.5, 0.5)

    def test_quasiparticle_weights_unitary(self, rng):
        for _ in range(20):
            p = random_params(rng)
            U = np.array(model.quasiparticle_weights(p))
            np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-15)

    def test_eigenenergies_match_dense_diagonalization(self, rng):
        for _ in range(20):
            p = random_params(rng)
            for N in range(1, 7):
                lo, hi = np.linalg.eigvalsh(dense_sector_hamiltonian(N, p))
                assert math.isclose(model.eigenenergy(N, "+", p), hi, abs_tol=1e-12)
                assert math.isclose(model.eigenenergy(N, "-", p), lo, abs_tol=1e-12)

    def test_first_sector_matches_bands(self, rng):
        p = random_params(rng)
        b = model.energy_bands(p)
        assert math.isclose(model.eigenenergy(1, "+", p), b.e_plus)
        assert math.isclose(model.eigenenergy(1, "-", p), b.e_minus)

    def test_uncoupled_limit(self):
        p = model.JCParams(3.0, 1.0, 0.0)
        assert model.eigenenergy(4, "+", p) == 3.0 + 3 * 1.0
        assert model.eigenenergy(4, "-", p) == 4.0

    def test_resonant_second_sector(self):
        p = model.JCParams(2.0, 2.0, 0.5)
        assert math.isclose(model.eigenenergy(2, "+", p), (8 + SQ2 * 0.5) / 2)

    def test_eigenstates_are_eigenvectors(self, rng):
        for _ in range(10):
            p = random_params(rng)
            for N in range(1, 6):
                for br in model.BRANCHES:
                    e = model.eigenstate(N, br, p)
                    r = distance(model.hamiltonian_apply(e, p), model.eigenenergy(N, br, p) * e)
                    assert r <= 1e-12

    def test_branches_orthogonal(self, rng):
        p = random_params(rng)
        assert abs(inner_product(model.eigenstate(3, "+", p), model.eigenstate(3, "-", p))) < 1e-15

    def test_hamiltonian_hermitian(self, rng):
        from quasisep.fock import full_basis
        p = random_params(rng)
        modes = model.fb_modes(4)
        basis = full_basis(modes)
        H = np.array([model.hamiltonian_apply(model.fb_state(*k, cutoff=4), p).to_dense(basis)
                      for k in basis]).T
        np.testing.assert_allclose(H, H.conj().T, atol=1e-15)

    def test_bad_branch(self):
        with pytest.raises(ValueError):
            model.eigenstate(1, "x", model.JCParams.resonant())


class TestProductStates:
    def test_two_zero_resonant(self):
        s = model.product_state_pm(2, 0, model.JCParams.resonant())
        assert math.isclose(s[(1, 1)].real, math.sqrt(2 / 3))
        assert math.isclose(s[(0, 2)].real, 1 / math.sqrt(3))
        assert len(s.amplitudes) == 2

    def test_one_one_resonant(self):
        s = model.product_state_pm(1, 1, model.JCParams.resonant())
        assert s.amplitudes.keys() == {(0, 2)}

    def test_single_quasiparticle(self, rng):
        p = random_params(rng)
        plus, _ = model.quasiparticle_weights(p)
        s = model.product_state_pm(1, 0, p)
        want = model.fb_state(1, 0) * plus[0] + model.fb_state(0, 1) * plus[1]
        assert phase_distance(s, want) <= 1e-15

    def test_vacuum(self):
        s = model.product_state_pm(0, 0, model.JCParams.resonant())
        assert s.amplitudes == {(0, 0): 1}

    def test_closed_form_matches_operators(self, rng):
        for _ in range(5):
            p = random_params(rng)
            for N in range(1, 8):
                for m in range(N + 1):
                    a = model.product_state_pm(m, N - m, p)
                    b = model.pm_closed_form(m, N - m, p)
                    assert same_ray(a, b) <= 1e-12

    def test_zero_only_without_coupling(self):
        p = model.JCParams(2.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            model.product_state_pm(2, 0, p)
        s = model.product_state_pm(1, 3, p)
        assert s.amplitudes == {(1, 3): 1}

    def test_cutoff_too_small(self):
        with pytest.raises(ValueError):
            model.product_state_pm(3, 3, model.JCParams.resonant(), cutoff=5)

    def test_sector_is_two_dimensional(self, rng):
        p = random_params(rng)
        for m in range(5):
            assert set(model.product_state_pm(m, 4 - m, p).amplitudes) <= {(0, 4), (1, 3)}


class TestNoon:
    def test_resonant_one_one(self):
        c0, cN = model.noon_coefficients(1, 1, model.JCParams.resonant())
        assert math.isclose(c0, math.sqrt(3) / 2) and math.isclose(cN, math.sqrt(3) / 2)

    def test_decomposition_identity(self, rng):
        for _ in range(10):
            p = random_params(rng)
            for N in range(2, 9):
                for n in range(1, N):
                    c0, cN = model.noon_coefficients(N - n, n, p)
                    got = model.noon_state(c0, cN, N, p)
                    assert distance(got, model.product_state_pm(N - n, n, p)) <= 1e-12

    def test_rejects_boundary(self):
        with pytest.raises(ValueError):
            model.noon_coefficients(0, 3, model.JCParams.resonant())

    def test_coefficients_positive(self, rng):
        p = random_params(rng)
        for n in range(1, 6):
            c0, cN = model.noon_coefficients(6 - n, n, p)
            assert c0 > 0 and cN > 0


class TestSmallMixing:
    # phi ~ 4e-3: raw monomial amplitudes fall below the pruning threshold
    params = model.JCParams(-3.8, 1.0, 0.04273)

    def test_raw_monomial_underflows(self):
        assert model.pm_monomial(0, 9, self.params, 10).is_zero

    def test_rescaled_products_survive(self):
        for m in range(10):
            got = model.product_state_pm(m, 9 - m, self.params, 10)
            assert same_ray(got, model.pm_closed_form(m, 9 - m, self.params, 10)) <= 1e-12
