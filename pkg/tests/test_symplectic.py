import numpy as np
import pytest

from wnd import fock, gaussian, ladder, symplectic
from wnd.signals import Constant, Sinusoid


class TestHamiltonianMatrix:
    def test_free_term_reconstruction(self):
        # (1/2) X^T H X + shift reproduces a'a at lambda = 0, verified
        # through the Fock images.
        cutoff = 20
        h, shift = symplectic.hamiltonian_matrix(0.0, 0.0)
        assert shift == -0.5
        a = fock.destroy(cutoff)
        ops = [a, a.conj().T]
        built = sum(
            0.5 * h[j, k] * ops[j] @ ops[k] for j in range(2) for k in range(2)
        ) + shift * np.eye(cutoff + 1)
        keep = cutoff - 3
        np.testing.assert_allclose(
            built[:keep, :keep], fock.number_op(cutoff)[:keep, :keep], atol=1e-10
        )

    def test_quadratic_entries(self):
        lam_p = 0.37
        h, _ = symplectic.hamiltonian_matrix(lam_p, 0.0)
        # One diagonal entry carries 2 lam+, fixed by the same reconstruction.
        assert h[1, 1] == pytest.approx(2 * lam_p)
        assert h[0, 0] == 0.0
        cutoff = 20
        a = fock.destroy(cutoff)
        ops = [a, a.conj().T]
        built = sum(
            0.5 * h[j, k] * ops[j] @ ops[k] for j in range(2) for k in range(2)
        ) - 0.5 * np.eye(cutoff + 1)
        target = fock.number_op(cutoff) + lam_p * a.conj().T @ a.conj().T
        keep = cutoff - 3
        np.testing.assert_allclose(
            built[:keep, :keep], target[:keep, :keep], atol=1e-10
        )

    def test_zero_hamiltonian(self):
        h, shift = symplectic.hamiltonian_matrix(0.0, 0.0)
        h_zero = h - symplectic.hamiltonian_matrix(0.0, 0.0)[0]
        assert np.all(h_zero == 0.0)
        assert np.all(h == h.T)


class TestPropagation:
    def test_free_evolution_rotation(self):
        traj = symplectic.propagate_symplectic(Constant(0.0), Constant(0.0), 2.0,
                                               n_out=21)
        for t, s in zip(traj.times, traj.matrices):
            np.testing.assert_allclose(
                s, np.diag([np.exp(-1j * t), np.exp(1j * t)]), atol=1e-10
            )

    def test_free_evolution_matches_heisenberg_oracle(self):
        # S must reproduce U' a U for the free Hamiltonian at cutoff 40.
        cutoff = 40
        t_final = 1.3
        u = fock.propagate(fock.number_op(cutoff), t_final)
        u_conj, v_conj = symplectic.bogoliubov_from_propagator(u)
        traj = symplectic.propagate_symplectic(Constant(0.0), Constant(0.0),
                                               t_final, n_out=5)
        assert traj.final[0, 0] == pytest.approx(u_conj, abs=1e-9)
        assert traj.final[0, 1] == pytest.approx(v_conj, abs=1e-9)

    def test_constant_squeeze_matches_ansatz_image(self):
        lam = 0.2
        times = np.linspace(0.0, 2.0, 21)
        straj = symplectic.propagate_symplectic(Constant(lam), Constant(lam), 2.0,
                                                times=times)
        qtraj = gaussian.quadratic_coefficients(Constant(lam), Constant(lam), 2.0,
                                                times=times)
        for i in range(len(times)):
            s_ansatz = symplectic.ansatz_symplectic(
                qtraj.xi_plus[i], qtraj.xi_zero[i], qtraj.xi_minus[i]
            )
            assert np.max(np.abs(s_ansatz - straj.matrices[i])) <= 1e-7

    def test_bogoliubov_invariant_along_trajectory(self):
        lam = Sinusoid(0.15, 2.0)
        traj = symplectic.propagate_symplectic(lam, lam, 4.0, n_out=41)
        for s in traj.matrices:
            assert symplectic.bogoliubov_defect(s) <= 1e-8

    def test_conjugation_symmetry(self):
        lam = Sinusoid(0.2, 2.0, 0.3)
        traj = symplectic.propagate_symplectic(lam, lam, 3.0, n_out=31)
        for s in traj.matrices:
            assert symplectic.conjugation_defect(s) <= 1e-9


class TestFirstMoments:
    def test_identity(self):
        alpha = 0.7 - 0.2j
        a_mean, ad_mean = symplectic.first_moments(np.eye(2), alpha)
        assert a_mean == alpha
        assert ad_mean == np.conj(alpha)

    def test_quarter_period_rotation(self):
        traj = symplectic.propagate_symplectic(Constant(0.0), Constant(0.0),
                                               np.pi / 2, n_out=9)
        a_mean, _ = symplectic.first_moments(traj.final, 1.0)
        assert a_mean == pytest.approx(-1j, abs=1e-10)

    def test_squeezed_moments_match_fock_oracle(self):
        lam, t_final, cutoff = 0.2, 1.5, 60
        traj = symplectic.propagate_symplectic(Constant(lam), Constant(lam),
                                               t_final, n_out=9)
        a = fock.destroy(cutoff)
        h = fock.number_op(cutoff) + lam * (a.conj().T @ a.conj().T + a @ a)
        psi0 = fock.coherent_state(1.0, cutoff)
        psi = fock.propagate(h, t_final) @ psi0
        a_mean, _ = symplectic.first_moments(traj.final, 1.0)
        assert fock.expectation(a, psi) == pytest.approx(a_mean, abs=1e-6)


class TestFactorImages:
    def test_product_equals_closed_form(self):
        xi_p, xi_0, xi_m = 0.2 + 0.1j, 0.5 - 0.3j, -0.1 + 0.25j
        s = symplectic.ansatz_symplectic(xi_p, xi_0, xi_m)
        u = np.exp(-0.5j * xi_0) + xi_p * xi_m * np.exp(0.5j * xi_0)
        v = -1j * xi_p * np.exp(0.5j * xi_0)
        assert s[0, 0] == pytest.approx(u, abs=1e-14)
        assert s[0, 1] == pytest.approx(v, abs=1e-14)

    def test_simple_matrix_multiplication_equivalence(self):
        # The ordered product of per-factor images equals the integrated
        # phase-space trajectory for the constant-squeeze scenario.
        lam = 0.2
        times = np.linspace(0.0, 2.0, 9)
        straj = symplectic.propagate_symplectic(Constant(lam), Constant(lam), 2.0,
                                                times=times)
        qtraj = gaussian.quadratic_coefficients(Constant(lam), Constant(lam), 2.0,
                                                times=times)
        for i in range(len(times)):
            factors = symplectic.su11_factor_images(
                qtraj.xi_plus[i], qtraj.xi_zero[i], qtraj.xi_minus[i]
            )
            prod = factors[0] @ factors[1] @ factors[2]
            assert np.max(np.abs(prod - straj.matrices[i])) <= 1e-7

    def test_factor_images_match_fock_conjugation(self):
        # Each single factor's 2x2 image agrees with conjugating a in Fock
        # space by that factor alone.
        cutoff = 50
        xi = 0.3 - 0.2j
        basis = gaussian.su11_basis(include_identity=False)
        for idx in range(3):
            mat = fock.to_matrix(basis[idx], cutoff)
            u_f = fock.factor_exponential(xi, mat)
            images = symplectic.su11_factor_images(
                xi if idx == 0 else 0.0,
                xi if idx == 1 else 0.0,
                xi if idx == 2 else 0.0,
            )
            expected = images[idx]
            u_inv = fock.factor_exponential(-xi, mat)
            a = fock.destroy(cutoff)
            conj = u_inv @ a @ u_f
            assert conj[0, 1] == pytest.approx(expected[0, 0], abs=1e-9)
            assert conj[1, 0] == pytest.approx(expected[0, 1], abs=1e-9)
