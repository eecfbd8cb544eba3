import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wlckf.augmented import (
    AugmentedMatrix,
    AugmentedVector,
    augmented_to_real,
    augmented_to_real_matrix,
    build_transform,
    eigenvalues_scalar_augmented,
    psd_sqrt,
    real_matrix_to_augmented,
    real_to_augmented,
)
from wlckf.errors import ConsistencyError, DimensionError, NotPSDError

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def real_vectors(length):
    return arrays(np.float64, (length,), elements=finite)


def test_transform_n1_exact():
    t = build_transform(1)
    assert np.array_equal(t, np.array([[1, 1j], [1, -1j]]))


@pytest.mark.parametrize("n", range(1, 9))
def test_transform_unitary_within_factor_2(n):
    t = build_transform(n)
    eye2 = 2 * np.eye(2 * n)
    assert np.max(np.abs(t @ t.conj().T - eye2)) <= 1e-14
    assert np.max(np.abs(t.conj().T @ t - eye2)) <= 1e-14


def test_transform_inverse_is_half_hermitian():
    t = build_transform(3)
    assert np.max(np.abs(np.linalg.inv(t) - t.conj().T / 2)) <= 1e-14


def test_real_to_augmented_basic():
    v = real_to_augmented([1.0, 2.0])
    assert v.top == pytest.approx([1 + 2j])
    assert v.bottom == pytest.approx([1 - 2j])


def test_real_to_augmented_zero():
    v = real_to_augmented(np.zeros(4))
    assert np.all(v.top == 0) and np.all(v.bottom == 0)


def test_real_to_augmented_two_channels():
    v = real_to_augmented([3.0, -1.0, 0.0, 4.0])
    assert v.top == pytest.approx([3 + 0j, -1 + 4j])


def test_real_to_augmented_rejects_odd_length():
    with pytest.raises(DimensionError):
        real_to_augmented([1.0, 2.0, 3.0])


def test_augmented_to_real_basic():
    z = augmented_to_real(AugmentedVector.from_complex([1 + 2j]))
    assert z == pytest.approx([1.0, 2.0])


def test_augmented_to_real_rejects_conjugate_violation():
    bad = AugmentedVector(top=np.array([1 + 2j]), bottom=np.array([1 + 2j]))
    with pytest.raises(ConsistencyError):
        augmented_to_real(bad)


@given(real_vectors(8))
def test_vector_round_trip(z):
    back = augmented_to_real(real_to_augmented(z))
    assert np.max(np.abs(back - z)) < 1e-14


def test_system_mode_identity():
    m = real_matrix_to_augmented(np.eye(2), "system")
    assert m.m1 == pytest.approx(np.eye(1))
    assert m.m2 == pytest.approx(np.zeros((1, 1)))


def test_system_mode_rotation_generator_is_multiplication_by_j():
    m = real_matrix_to_augmented([[0.0, -1.0], [1.0, 0.0]], "system")
    assert np.allclose(m.m1, [[1j]], atol=1e-15)
    assert np.allclose(m.m2, [[0.0]], atol=1e-15)


def test_covariance_mode_single_channel_is_maximally_improper():
    m = real_matrix_to_augmented(np.diag([1.0, 0.0]), "covariance")
    assert np.allclose(m.m1, [[1.0]], atol=1e-15)
    assert np.allclose(m.m2, [[1.0]], atol=1e-15)


def test_covariance_mode_identity_drops_to_half_eye():
    back = augmented_to_real_matrix(AugmentedMatrix.eye(1), "covariance")
    assert back == pytest.approx(np.diag([0.5, 0.5]))


@pytest.mark.parametrize("rho", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_covariance_mode_scalar_impropriety_split(rho):
    aug = AugmentedMatrix([[1.0]], [[rho]])
    back = augmented_to_real_matrix(aug, "covariance")
    expected = np.diag([(1 + rho) / 2, (1 - rho) / 2])
    assert back == pytest.approx(expected, abs=1e-14)


@given(arrays(np.float64, (6, 6), elements=finite))
@settings(max_examples=50)
def test_matrix_round_trip_both_modes(m):
    m = m + m.T  # symmetric is the common case but any matrix round-trips
    for mode in ("system", "covariance"):
        aug = real_matrix_to_augmented(m, mode)
        back = augmented_to_real_matrix(aug, mode)
        assert np.max(np.abs(back - m)) <= 1e-12 * max(1.0, np.max(np.abs(m)))


@given(arrays(np.float64, (6, 6), elements=finite))
@settings(max_examples=50)
def test_lift_satisfies_block_pattern_exactly(m):
    aug = real_matrix_to_augmented(m, "covariance")
    full = aug.full()
    assert np.array_equal(full[3:, :3], np.conj(full[:3, 3:]))
    assert np.array_equal(full[3:, 3:], np.conj(full[:3, :3]))


def test_matrix_round_trip_psd():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((6, 6))
    m = a @ a.T
    aug = real_matrix_to_augmented(m, "covariance")
    back = augmented_to_real_matrix(aug, "covariance")
    assert np.max(np.abs(back - m)) <= 1e-12 * np.max(np.abs(m))


def test_real_matrix_to_augmented_rejects_odd():
    with pytest.raises(DimensionError):
        real_matrix_to_augmented(np.eye(3), "system")


def test_block_pattern_always_has_real_composite_form():
    # The block-conjugate pattern is exactly the condition for a real
    # composite image, so any stored matrix drops cleanly, phases included.
    rng = np.random.default_rng(9)
    for _ in range(10):
        m = AugmentedMatrix(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)),
                            rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
        out = augmented_to_real_matrix(m, "covariance")
        assert out.dtype == np.float64


def test_psd_sqrt_scaled_identity():
    b = psd_sqrt(4 * np.eye(2))
    assert b @ b.T == pytest.approx(4 * np.eye(2))


def test_psd_sqrt_rank_deficient():
    m = np.ones((2, 2))
    b = psd_sqrt(m)
    assert b @ b.T == pytest.approx(m, abs=1e-12)


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -0.5]))


def test_psd_sqrt_rejects_asymmetric():
    with pytest.raises(ConsistencyError):
        psd_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_psd_sqrt_residual_on_random_psd(k):
    rng = np.random.default_rng(k)
    a = rng.standard_normal((4, k))  # rank-deficient for k < 4
    m = a @ a.T
    b = psd_sqrt(m)
    res = np.linalg.norm(b @ b.T - m)
    assert res <= 1e-10 * max(1.0, np.linalg.norm(m))


def test_scalar_eigenvalues_proper():
    assert eigenvalues_scalar_augmented(1.0, 0.0) == (1.0, 1.0)


def test_scalar_eigenvalues_maximally_improper():
    assert eigenvalues_scalar_augmented(1.0, 1.0) == (2.0, 0.0)


def test_scalar_eigenvalues_complex_complementary():
    assert eigenvalues_scalar_augmented(1.0, 0.5j) == pytest.approx((1.5, 0.5))


def test_scalar_eigenvalues_rejects_indefinite():
    with pytest.raises(NotPSDError):
        eigenvalues_scalar_augmented(1.0, 1.5)


@given(st.floats(0.01, 10), st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
@settings(max_examples=200)
def test_scalar_eigenvalues_match_generic_solver(p, pt):
    if abs(pt) > p:
        pt = pt * (p / abs(pt))
    lam_hi, lam_lo = eigenvalues_scalar_augmented(p, pt)
    full = np.array([[p, pt], [np.conj(pt), p]])
    ref = np.linalg.eigvalsh(full)
    assert lam_lo == pytest.approx(ref[0], abs=1e-12 * max(1, p))
    assert lam_hi == pytest.approx(ref[1], abs=1e-12 * max(1, p))


def test_augmented_matrix_product_keeps_pattern():
    rng = np.random.default_rng(3)
    a = AugmentedMatrix(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)),
                        rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    b = AugmentedMatrix(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)),
                        rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    prod = a @ b
    assert np.max(np.abs(prod.full() - a.full() @ b.full())) < 1e-12
    herm = a.conj_t()
    assert np.max(np.abs(herm.full() - a.full().conj().T)) == 0.0


def test_augmented_matrix_vector_product_is_conjugate_symmetric():
    rng = np.random.default_rng(4)
    a = AugmentedMatrix(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)),
                        rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    v = AugmentedVector.from_complex(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    out = a @ v
    assert out.conjugate_defect() == 0.0
    assert np.max(np.abs(out.full() - a.full() @ v.full())) < 1e-12


def test_from_full_rejects_pattern_violation():
    full = np.array([[1.0, 2.0], [3.0, 1.0]], dtype=complex)
    with pytest.raises(ConsistencyError):
        AugmentedMatrix.from_full(full)


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_solve_right_solves_and_keeps_pattern(seed):
    from wlckf.augmented import solve_right

    rng = np.random.default_rng(seed)
    a = AugmentedMatrix(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)),
                        rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    a = a + 3.0 * AugmentedMatrix.eye(2)  # keep it well conditioned
    b = AugmentedMatrix(rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)),
                        rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2)))
    x, singular = solve_right(b, a)
    assert not singular
    residual = (x @ a - b).full()
    assert np.max(np.abs(residual)) <= 1e-9 * max(1.0, b.max_abs())
    full = x.full()
    assert np.array_equal(full[3:, 2:], np.conj(full[:3, :2]))
