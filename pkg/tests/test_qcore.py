import numpy as np
import pytest

from qtomo.qcore import (Dimensions, InvariantViolation, born_probabilities,
                         empirical_frequencies, outcome_from_string,
                         outcome_signs, outcome_to_string,
                         pauli_factor_projector, setting_axes,
                         setting_from_string, setting_projector,
                         setting_to_string, simulate_counts, true_state_mixed,
                         true_state_rank2, validate_density_matrix)
from conftest import random_density

SIGMA = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class TestEnumeration:
    def test_dimensions(self):
        dims = Dimensions.from_n(3)
        assert (dims.d, dims.num_settings, dims.num_outcomes) == (8, 27, 8)
        with pytest.raises(ValueError):
            Dimensions.from_n(0)

    def test_dimensions_from_shape(self):
        assert Dimensions.from_table_shape((27, 8)).n == 3
        with pytest.raises(InvariantViolation):
            Dimensions.from_table_shape((27, 9))

    def test_setting_order_lexicographic(self):
        strings = [setting_to_string(row) for row in setting_axes(2)]
        assert strings == ["xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz"]

    def test_outcome_order_lexicographic(self):
        strings = [outcome_to_string(row) for row in outcome_signs(2)]
        assert strings == ["++", "+-", "-+", "--"]

    def test_string_round_trip(self):
        for row in setting_axes(3):
            assert np.array_equal(setting_from_string(setting_to_string(row)), row)
        for row in outcome_signs(3):
            assert np.array_equal(outcome_from_string(outcome_to_string(row)), row)
        with pytest.raises(ValueError):
            setting_from_string("xq")
        with pytest.raises(ValueError):
            outcome_from_string("+0")


class TestProjectors:
    def test_z_projectors_exact(self):
        assert np.array_equal(pauli_factor_projector("z", +1),
                              np.array([[1, 0], [0, 0]], dtype=complex))
        assert np.array_equal(pauli_factor_projector("z", -1),
                              np.array([[0, 0], [0, 1]], dtype=complex))

    def test_x_plus_projector(self):
        np.testing.assert_allclose(pauli_factor_projector("x", +1),
                                   0.5 * np.ones((2, 2)), atol=1e-15)

    @pytest.mark.parametrize("axis", ["x", "y", "z"])
    @pytest.mark.parametrize("sign", [+1, -1])
    def test_projector_properties(self, axis, sign):
        p = pauli_factor_projector(axis, sign)
        np.testing.assert_allclose(p, p.conj().T, atol=1e-15)
        np.testing.assert_allclose(p @ p, p, atol=1e-15)
        # projects onto the sign eigenspace of the Pauli matrix
        np.testing.assert_allclose(SIGMA[axis] @ p, sign * p, atol=1e-15)

    @pytest.mark.parametrize("axis", ["x", "y", "z"])
    def test_projector_completeness_1q(self, axis):
        total = pauli_factor_projector(axis, +1) + pauli_factor_projector(axis, -1)
        np.testing.assert_allclose(total, np.eye(2), atol=1e-15)

    def test_setting_projector_reduces_to_factor(self):
        np.testing.assert_allclose(setting_projector("z", [+1]),
                                   [[1, 0], [0, 0]], atol=1e-15)

    def test_setting_projector_zz(self):
        proj = setting_projector([2, 2], [+1, +1])
        np.testing.assert_allclose(proj, np.diag([1, 0, 0, 0]), atol=1e-15)

    def test_setting_projector_xz_hand_value(self):
        # X(+1) (x) Z(-1) projects onto (e2 + e4) / sqrt(2)
        vec = np.zeros(4, dtype=complex)
        vec[1] = vec[3] = 1 / np.sqrt(2)
        np.testing.assert_allclose(setting_projector("xz", [+1, -1]),
                                   np.outer(vec, vec.conj()), atol=1e-15)

    def test_setting_projector_length_mismatch(self):
        with pytest.raises(ValueError):
            setting_projector("xz", [+1])

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_completeness(self, n):
        signs = outcome_signs(n)
        for a in setting_axes(n):
            total = sum(setting_projector(a, s) for s in signs)
            np.testing.assert_allclose(total, np.eye(2 ** n), atol=1e-12)


class TestBornProbabilities:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_maximally_mixed(self, n):
        probs = born_probabilities(np.eye(2 ** n) / 2 ** n)
        np.testing.assert_allclose(probs, 2.0 ** -n, atol=1e-12)

    def test_z_eigenstate_rows(self):
        probs = born_probabilities(np.diag([1.0, 0.0]).astype(complex))
        np.testing.assert_allclose(probs[0], [0.5, 0.5], atol=1e-12)  # x
        np.testing.assert_allclose(probs[1], [0.5, 0.5], atol=1e-12)  # y
        np.testing.assert_allclose(probs[2], [1.0, 0.0], atol=1e-12)  # z

    def test_rank2_zz_row(self):
        probs = born_probabilities(true_state_rank2(2))
        np.testing.assert_allclose(probs[-1], 0.25, atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_projector_oracle(self, n):
        signs = outcome_signs(n)
        axes = setting_axes(n)
        for seed in range(10):
            rho = random_density(n, seed)
            probs = born_probabilities(rho)
            brute = np.empty_like(probs)
            for si, a in enumerate(axes):
                for oi, s in enumerate(signs):
                    brute[si, oi] = np.trace(rho @ setting_projector(a, s)).real
            np.testing.assert_allclose(probs, brute, atol=1e-10)
            np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-10)

    def test_rejects_invalid_state(self):
        with pytest.raises(InvariantViolation):
            born_probabilities(np.diag([0.7, 0.7]).astype(complex))
        with pytest.raises(InvariantViolation):
            born_probabilities(np.array([[0.5, 0.5], [0.0, 0.5]], dtype=complex))


class TestSimulateCounts:
    def test_degenerate_distribution(self):
        counts = simulate_counts(np.diag([1.0, 0.0]).astype(complex), 250, seed=3)
        assert counts[2, 0] == 250 and counts[2, 1] == 0

    def test_row_sums_and_determinism(self):
        rho = true_state_rank2(2)
        a = simulate_counts(rho, 137, seed=99)
        b = simulate_counts(rho, 137, seed=99)
        assert np.array_equal(a, b)
        assert (a.sum(axis=1) == 137).all()
        assert not np.array_equal(a, simulate_counts(rho, 137, seed=100))

    def test_binomial_moments(self):
        # I/2 gives Binomial(m, 1/2) counts; check the replicate mean at 3 sigma
        rho = np.eye(2, dtype=complex) / 2
        m, reps = 1000, 200
        zs = [simulate_counts(rho, m, seed=s)[2, 0] for s in range(reps)]
        tol = 3 * np.sqrt(m * 0.25) / np.sqrt(reps)
        assert abs(np.mean(zs) - 500) < tol

    def test_invalid_m(self):
        with pytest.raises(ValueError):
            simulate_counts(true_state_rank2(1), 0, seed=1)


class TestEmpiricalFrequencies:
    def test_simple_division(self):
        counts = np.array([[700, 300], [1000, 0], [500, 500]])
        freqs = empirical_frequencies(counts)
        np.testing.assert_allclose(freqs[0], [0.7, 0.3], atol=1e-15)
        np.testing.assert_allclose(freqs.sum(axis=1), 1.0, atol=1e-15)

    def test_one_hot_rows(self):
        counts = np.array([[5, 0], [0, 5], [5, 0]])
        freqs = empirical_frequencies(counts)
        np.testing.assert_allclose(freqs, [[1, 0], [0, 1], [1, 0]], atol=1e-15)

    def test_law_of_large_numbers(self):
        rho = random_density(1, 7)
        counts = simulate_counts(rho, 10 ** 5, seed=11)
        np.testing.assert_allclose(empirical_frequencies(counts),
                                   born_probabilities(rho), atol=0.02)

    def test_rejects_ragged_rows(self):
        with pytest.raises(InvariantViolation):
            empirical_frequencies(np.array([[3, 1], [2, 1], [2, 2]]))


class TestTrueStates:
    def test_rank2_n2_explicit(self):
        rho = true_state_rank2(2)
        expect = np.zeros((4, 4))
        expect[:2, :2] = 0.25
        expect[2:, 2:] = 0.25
        np.testing.assert_allclose(rho, expect, atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_rank2_spectrum(self, n):
        rho = true_state_rank2(n)
        validate_density_matrix(rho)
        evals = np.sort(np.linalg.eigvalsh(rho))[::-1]
        np.testing.assert_allclose(evals[:2], 0.5, atol=1e-12)
        np.testing.assert_allclose(evals[2:], 0.0, atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_mixed_state(self, n):
        rho = true_state_mixed(n, seed=5)
        validate_density_matrix(rho)
        assert np.linalg.eigvalsh(rho)[0] > 0.0
        assert np.array_equal(rho, true_state_mixed(n, seed=5))
