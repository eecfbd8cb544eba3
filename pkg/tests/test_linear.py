import json

import numpy as np
import pytest

from wlckf.augmented import (
    AugmentedMatrix,
    AugmentedVector,
    augmented_to_real,
    augmented_to_real_matrix,
)
from wlckf.errors import UnsupportedModelError
from wlckf.linear import (
    FilterState,
    WidelyLinearModel,
    ckf_run,
    default_init,
    load_model,
    model_from_dict,
    model_from_real,
    model_to_dict,
    real_kf_run,
    save_model,
    simulate_linear,
    wlckf_predict,
    wlckf_run,
    wlckf_update,
)
from wlckf.mse import ScalarModelParams, variance_after, wl_mmse
from wlckf.stats import substream


def random_composite(seed, n=2, m=2, radius=0.9):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal((2 * n, 2 * n))
    e *= radius / max(abs(np.linalg.eigvals(e)))
    f = rng.standard_normal((2 * n, 2 * n))
    g = rng.standard_normal((2 * m, 2 * n))

    def cov(k):
        a = rng.standard_normal((2 * k, 2 * k))
        return a @ a.T / (2 * k) + 0.1 * np.eye(2 * k)

    return e, f, g, cov(n), cov(m), cov(n)


def scalar_model(a=1.0, b=1.0, c=1.0, q=1.0, r=1.0, p0=1.0, p0t=0.0):
    return WidelyLinearModel(
        A=AugmentedMatrix.diagonal(a),
        B=AugmentedMatrix.diagonal(b),
        C=AugmentedMatrix.diagonal(c),
        Q=AugmentedMatrix([[q]], [[0.0]]),
        R=AugmentedMatrix([[r]], [[0.0]]),
        Pi0=AugmentedMatrix([[p0]], [[p0t]]),
    )


def proper_model(seed, n=2, m=2):
    """Strictly-linear-compatible model: zero conjugate blocks, proper noises."""
    rng = np.random.default_rng(seed)

    def cmat(rows, cols):
        return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))

    a1 = cmat(n, n)
    a1 *= 0.9 / max(abs(np.linalg.eigvals(a1)))

    def pcov(k):
        z = cmat(k, k)
        return z @ z.conj().T / k + 0.1 * np.eye(k)

    zero = np.zeros((n, n), complex)
    return WidelyLinearModel(
        A=AugmentedMatrix(a1, zero),
        B=AugmentedMatrix(cmat(n, n), zero),
        C=AugmentedMatrix(cmat(m, n), np.zeros((m, n), complex)),
        Q=AugmentedMatrix(pcov(n), zero),
        R=AugmentedMatrix(pcov(m), np.zeros((m, m), complex)),
        Pi0=AugmentedMatrix(pcov(n), zero),
    )


def run_real_oracle(e, f, g, q, r, pi, measurements):
    meas_real = [np.concatenate([y.real, y.imag]) for y in measurements]
    return real_kf_run(e, f, g, q, r, pi, meas_real)


# --- model construction -------------------------------------------------------


def test_model_from_real_identity():
    model = model_from_real(np.eye(4), np.eye(4), np.eye(4), np.eye(4), np.eye(4), np.eye(4))
    assert np.allclose(model.A.m1, np.eye(2))
    assert np.max(np.abs(model.A.m2)) == 0.0


def test_model_from_real_block_symmetric_gives_zero_conjugate_blocks():
    rng = np.random.default_rng(0)
    e11 = rng.standard_normal((2, 2))
    e12 = rng.standard_normal((2, 2))
    e = np.block([[e11, e12], [-e12, e11]])
    model = model_from_real(e, np.eye(4), np.eye(4), np.eye(4), np.eye(4), np.eye(4))
    assert np.max(np.abs(model.A.m2)) < 1e-14
    assert model.is_strictly_linear(tol=1e-14)


def test_model_from_real_round_trip():
    e, f, g, q, r, pi = random_composite(1)
    model = model_from_real(e, f, g, q, r, pi)
    assert np.max(np.abs(augmented_to_real_matrix(model.A, "system") - e)) < 1e-13
    assert np.max(np.abs(augmented_to_real_matrix(model.Q, "covariance") - q)) < 1e-13


def test_model_rejects_nonzero_cross_covariance():
    with pytest.raises(UnsupportedModelError):
        WidelyLinearModel(
            A=AugmentedMatrix.eye(1),
            B=AugmentedMatrix.eye(1),
            C=AugmentedMatrix.eye(1),
            Q=AugmentedMatrix.eye(1),
            R=AugmentedMatrix.eye(1),
            Pi0=AugmentedMatrix.eye(1),
            S=AugmentedMatrix([[0.1]], [[0.0]]),
        )


# --- predict ------------------------------------------------------------------


def test_predict_identity_no_noise():
    model = scalar_model(a=1.0, q=0.0)
    state = FilterState(AugmentedVector.from_complex([1 + 1j]), AugmentedMatrix([[2.0]], [[0.5]]), 0)
    pred = wlckf_predict(state, model)
    assert np.allclose(pred.estimate.top, [1 + 1j])
    assert np.allclose(pred.cov.m1, [[2.0]])
    assert pred.t == 1


def test_predict_scalar_doubling():
    model = scalar_model()
    state = FilterState(AugmentedVector.from_complex([0j]), AugmentedMatrix.eye(1), 0)
    pred = wlckf_predict(state, model)
    assert np.allclose(pred.cov.m1, [[2.0]])


def test_predict_matches_real_oracle():
    e, f, g, q, r, pi = random_composite(2)
    model = model_from_real(e, f, g, q, r, pi)
    pred = wlckf_predict(default_init(model), model)
    ref = e @ pi @ e.T + f @ q @ f.T
    assert np.max(np.abs(augmented_to_real_matrix(pred.cov, "covariance") - ref)) < 1e-12


# --- update -------------------------------------------------------------------


def test_update_uninformative_measurement():
    model = scalar_model(r=1e12)
    pred = wlckf_predict(default_init(model), model)
    rep = wlckf_update(pred, np.array([3 + 1j]), model)
    assert np.max(np.abs(rep.gain.m1)) < 1e-10
    assert rep.state.cov.m1 == pytest.approx(pred.cov.m1, rel=1e-9)


def test_update_proper_gain_is_block_diagonal_usual_kf():
    model = proper_model(3)
    pred = wlckf_predict(default_init(model), model)
    y = np.array([0.3 - 0.2j, 1.0 + 0.5j])
    rep = wlckf_update(pred, y, model)
    assert np.max(np.abs(rep.gain.m2)) < 1e-12
    p, c1, r1 = pred.cov.m1, model.C.m1, model.R.m1
    usual = p @ c1.conj().T @ np.linalg.inv(c1 @ p @ c1.conj().T + r1)
    assert np.max(np.abs(rep.gain.m1 - usual)) < 1e-10


def test_update_matches_real_oracle():
    e, f, g, q, r, pi = random_composite(4)
    model = model_from_real(e, f, g, q, r, pi)
    _, meas = simulate_linear(model, 1, substream(4, 0))
    rep = wlckf_run(model, meas)[0]
    ref = run_real_oracle(e, f, g, q, r, pi, meas)[0]
    assert np.max(np.abs(augmented_to_real(rep.state.estimate) - ref.mean)) < 1e-10
    assert np.max(np.abs(augmented_to_real_matrix(rep.state.cov, "covariance") - ref.cov)) < 1e-10


# --- runs ---------------------------------------------------------------------


def test_run_zero_measurement_map_follows_lyapunov():
    model = WidelyLinearModel(
        A=AugmentedMatrix.diagonal(0.8),
        B=AugmentedMatrix.diagonal(1.0),
        C=AugmentedMatrix([[0.0]], [[0.0]]),
        Q=AugmentedMatrix([[0.5]], [[0.0]]),
        R=AugmentedMatrix([[1.0]], [[0.0]]),
        Pi0=AugmentedMatrix([[1.0]], [[0.0]]),
    )
    reports = wlckf_run(model, np.zeros((10, 1), complex))
    p = 1.0
    for rep in reports:
        p = 0.64 * p + 0.5
        assert rep.state.cov.m1[0, 0].real == pytest.approx(p, rel=1e-12)
        assert np.max(np.abs(rep.state.estimate.top)) == 0.0
        assert rep.singular_innovation is False


def test_run_matches_closed_form_mse():
    params = ScalarModelParams(init_var=1.0, init_cvar=0.6)
    model = scalar_model(p0=1.0, p0t=0.6)
    _, meas = simulate_linear(model, 60, substream(5, 0))
    reports = wlckf_run(model, meas)
    for t, rep in enumerate(reports, start=1):
        assert rep.state.cov.m1[0, 0].real == pytest.approx(wl_mmse(params, t), abs=1e-12)


def test_run_long_horizon_matches_real_oracle():
    e, f, g, q, r, pi = random_composite(6)
    model = model_from_real(e, f, g, q, r, pi)
    _, meas = simulate_linear(model, 100, substream(6, 0))
    reports = wlckf_run(model, meas)
    refs = run_real_oracle(e, f, g, q, r, pi, meas)
    worst = 0.0
    for rep, ref in zip(reports, refs):
        est = augmented_to_real(rep.state.estimate)
        cov = augmented_to_real_matrix(rep.state.cov, "covariance")
        worst = max(worst, np.max(np.abs(est - ref.mean)), np.max(np.abs(cov - ref.cov)))
    assert worst < 1e-9


def test_run_initial_update_consumes_time_zero_measurement():
    e, f, g, q, r, pi = random_composite(7)
    model = model_from_real(e, f, g, q, r, pi)
    _, meas = simulate_linear(model, 5, substream(7, 0))
    reports = wlckf_run(model, meas, initial_update=True)
    assert reports[0].state.t == 0
    assert reports[-1].state.t == 4
    meas_real = [np.concatenate([y.real, y.imag]) for y in meas]
    refs = real_kf_run(e, f, g, q, r, pi, meas_real, initial_update=True)
    for rep, ref in zip(reports, refs):
        assert np.max(np.abs(augmented_to_real(rep.state.estimate) - ref.mean)) < 1e-10


def test_gain_normal_equation_residual():
    e, f, g, q, r, pi = random_composite(8)
    model = model_from_real(e, f, g, q, r, pi)
    _, meas = simulate_linear(model, 20, substream(8, 0))
    for rep in wlckf_run(model, meas):
        lhs = (rep.gain @ rep.innovation_cov).full()
        rhs = (rep.predicted.cov @ model.C.conj_t()).full()
        scale = max(1.0, np.max(np.abs(rhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale


def test_monotone_information_and_psd_ordering():
    e, f, g, q, r, pi = random_composite(9)
    model = model_from_real(e, f, g, q, r, pi)
    _, meas = simulate_linear(model, 30, substream(9, 0))
    for rep in wlckf_run(model, meas):
        assert np.trace(rep.state.cov.m1).real <= np.trace(rep.predicted.cov.m1).real + 1e-12
        gap = rep.predicted.cov.full() - rep.state.cov.full()
        assert np.linalg.eigvalsh(gap)[0] > -1e-10


# --- propriety collapse and orthogonality -------------------------------------


def test_propriety_collapse_wlckf_equals_ckf():
    model = proper_model(10)
    _, meas = simulate_linear(model, 100, substream(10, 0))
    wl = wlckf_run(model, meas)
    sl = ckf_run(model, meas)
    for a, b in zip(wl, sl):
        for block in (a.state.cov.m2, a.innovation_cov.m2, a.gain.m2):
            assert np.max(np.abs(block)) <= 1e-12
        assert np.max(np.abs(a.state.estimate.top - b.state.estimate.top)) <= 1e-12
        assert np.max(np.abs(a.state.cov.m1 - b.state.cov.m1)) <= 1e-12


def test_strictly_linear_residual_orthogonality_under_propriety():
    # The strictly linear gain leaves no residual conjugate correlation when
    # prediction error and innovation are proper: both closed-form terms vanish.
    model = proper_model(11)
    _, meas = simulate_linear(model, 20, substream(11, 0))
    for rep in wlckf_run(model, meas):
        pt = rep.predicted.cov.m2
        p = rep.predicted.cov.m1
        c1 = model.C.m1
        s = rep.innovation_cov.m1
        st_ = rep.innovation_cov.m2
        residual = pt @ c1.T - p @ c1.conj().T @ np.linalg.solve(s, st_)
        assert np.max(np.abs(residual)) <= 1e-12


def test_ckf_rejects_widely_linear_model():
    e, f, g, q, r, pi = random_composite(12)
    model = model_from_real(e, f, g, q, r, pi)
    assert not model.is_strictly_linear(tol=1e-12)
    with pytest.raises(UnsupportedModelError):
        ckf_run(model, np.zeros((3, 2), complex))


def test_ckf_mse_is_composed_variance_map_with_improper_init():
    # Improper initial state, proper noises: the strictly linear filter's
    # covariance follows the composed scalar map from the Hermitian variance.
    model = scalar_model(p0=1.0, p0t=0.8)
    params = ScalarModelParams(init_var=1.0, init_cvar=0.8)
    _, meas = simulate_linear(model, 40, substream(13, 0))
    for t, rep in enumerate(ckf_run(model, meas), start=1):
        assert rep.state.cov.m1[0, 0].real == pytest.approx(
            float(variance_after(1.0, t, params)), rel=1e-12
        )


# --- real KF ------------------------------------------------------------------


def test_real_kf_single_update_hand_computed():
    # Scalar two-channel identity model, one measurement, hand arithmetic:
    # predict P = Pi + Q = 2I, gain = 2/3, posterior var = 2/3.
    e = f = g = np.eye(2)
    q = np.eye(2)
    r = np.eye(2)
    pi = np.eye(2)
    steps = real_kf_run(e, f, g, q, r, pi, [np.array([1.0, -1.0])])
    assert steps[0].gain == pytest.approx(np.eye(2) * 2 / 3)
    assert steps[0].mean == pytest.approx([2 / 3, -2 / 3])
    assert steps[0].cov == pytest.approx(np.eye(2) * 2 / 3)


def test_real_kf_near_exact_measurements_recover_state():
    e, f, g, q, r, pi = random_composite(14)
    q = q * 1e-12
    r = r * 1e-12
    model = model_from_real(e, f, g, q, r, pi)
    states, meas = simulate_linear(model, 30, substream(14, 0))
    refs = run_real_oracle(e, f, g, q, r, pi, meas)
    true_last = np.concatenate([states[-1].real, states[-1].imag])
    assert np.max(np.abs(refs[-1].mean - true_last)) < 1e-4


# --- simulation ---------------------------------------------------------------


def test_simulate_deterministic_when_noiseless():
    model = WidelyLinearModel(
        A=AugmentedMatrix.diagonal(0.5),
        B=AugmentedMatrix.diagonal(1.0),
        C=AugmentedMatrix.diagonal(2.0),
        Q=AugmentedMatrix([[0.0]], [[0.0]]),
        R=AugmentedMatrix([[0.0]], [[0.0]]),
        Pi0=AugmentedMatrix([[0.0]], [[0.0]]),
    )
    states, meas = simulate_linear(model, 5, substream(0, 0), x0=[1 + 1j])
    for t in range(6):
        assert states[t] == pytest.approx([(0.5**t) * (1 + 1j)])
    assert meas[:, 0] == pytest.approx(2 * states[1:, 0])


def test_simulate_long_run_matches_lyapunov_fixed_point():
    model = scalar_model(a=0.7, b=1.0, q=0.5, p0=0.3, p0t=0.1)
    states, _ = simulate_linear(model, 20_000, substream(15, 0))
    # fixed point by iteration (the oracle)
    pbar = model.Pi0
    for _ in range(200):
        pbar = model.A @ pbar @ model.A.conj_t() + model.B @ model.Q @ model.B.conj_t()
    x = states[1000:, 0]
    assert np.mean(np.abs(x) ** 2) == pytest.approx(pbar.m1[0, 0].real, rel=0.1)
    assert np.mean(x * x) == pytest.approx(pbar.m2[0, 0], abs=0.1 * abs(pbar.m1[0, 0]))


def test_simulate_maximally_improper_measurement_noise_is_real():
    model = WidelyLinearModel(
        A=AugmentedMatrix.diagonal(0.5),
        B=AugmentedMatrix.diagonal(1.0),
        C=AugmentedMatrix.diagonal(1.0),
        Q=AugmentedMatrix([[0.2]], [[0.0]]),
        R=AugmentedMatrix([[1.0]], [[1.0]]),
        Pi0=AugmentedMatrix([[1.0]], [[0.0]]),
    )
    states, meas = simulate_linear(model, 50, substream(16, 0))
    noise = meas[:, 0] - states[1:, 0]
    assert np.max(np.abs(noise.imag)) < 1e-12


# --- serialization ------------------------------------------------------------


def test_model_json_round_trip(tmp_path):
    e, f, g, q, r, pi = random_composite(17)
    model = model_from_real(e, f, g, q, r, pi)
    path = tmp_path / "model.json"
    save_model(model, path)
    again = load_model(path)
    for name in ("A", "B", "C", "Q", "R", "Pi0"):
        lhs, rhs = getattr(model, name), getattr(again, name)
        assert np.array_equal(lhs.m1, rhs.m1)
        assert np.array_equal(lhs.m2, rhs.m2)


def test_model_json_schema_keys(tmp_path):
    model = scalar_model()
    data = model_to_dict(model)
    assert set(data) == {
        "n", "m", "A1", "A2", "B1", "B2", "C1", "C2",
        "Q", "Qtilde", "R", "Rtilde", "Pi0", "Pi0tilde",
    }
    assert data["n"] == 1 and data["m"] == 1
    assert data["A1"] == [[[1.0, 0.0]]]
    path = tmp_path / "m.json"
    save_model(model, path)
    parsed = json.loads(path.read_text())
    assert parsed["Q"] == [[[1.0, 0.0]]]
    assert model_from_dict(parsed).n == 1


def test_singular_innovation_flagged_and_handled():
    # Maximally improper measurement noise with a maximally improper state
    # makes the augmented innovation covariance rank deficient.
    model = WidelyLinearModel(
        A=AugmentedMatrix.diagonal(0.9),
        B=AugmentedMatrix.diagonal(1.0),
        C=AugmentedMatrix.diagonal(1.0),
        Q=AugmentedMatrix([[0.3]], [[0.3]]),
        R=AugmentedMatrix([[0.5]], [[0.5]]),
        Pi0=AugmentedMatrix([[1.0]], [[1.0]]),
    )
    meas = np.real(simulate_linear(model, 10, substream(18, 0))[1])
    reports = wlckf_run(model, meas.astype(complex))
    assert all(rep.singular_innovation for rep in reports)
    for rep in reports:
        assert np.all(np.isfinite(rep.state.cov.m1))
        # estimates of a real state stay real
        assert np.max(np.abs(rep.state.estimate.top.imag)) < 1e-10


def test_nonzero_initial_mean_is_supported():
    e, f, g, q, r, pi = random_composite(19)
    model = model_from_real(e, f, g, q, r, pi)
    x0 = np.array([1 + 2j, -0.5j])
    init = FilterState(AugmentedVector.from_complex(x0), model.Pi0, 0)
    _, meas = simulate_linear(model, 20, substream(19, 0))
    reports = wlckf_run(model, meas, init=init)
    meas_real = [np.concatenate([y.real, y.imag]) for y in meas]
    refs = real_kf_run(e, f, g, q, r, pi, meas_real,
                       init_mean=np.concatenate([x0.real, x0.imag]))
    for rep, ref in zip(reports, refs):
        assert np.max(np.abs(augmented_to_real(rep.state.estimate) - ref.mean)) < 1e-10


def test_covariance_check_rejects_indefinite_model_blocks():
    from wlckf.errors import NotPSDError

    with pytest.raises(NotPSDError):
        WidelyLinearModel(
            A=AugmentedMatrix.eye(1),
            B=AugmentedMatrix.eye(1),
            C=AugmentedMatrix.eye(1),
            Q=AugmentedMatrix([[1.0]], [[1.5]]),  # |complementary| > Hermitian
            R=AugmentedMatrix.eye(1),
            Pi0=AugmentedMatrix.eye(1),
        )
