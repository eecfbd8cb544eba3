"""Unscented filtering for improper complex states and noises.

The key construction: sigma points for a complex random vector are built
in the real composite domain from the full augmented covariance and mapped
back to complex points. The resulting weighted point set carries the mean,
the Hermitian covariance and the complementary covariance, so propagating
it through a nonlinearity keeps the complete second-order description.
Sigma points built from the Hermitian covariance alone (the conventional
complex construction) drop the complementary part; that variant is kept as
a negative control and baseline.

The filter step stacks state, driving noise and measurement noise into one
joint complex vector, generates its sigma points, pushes the state parts
through the transition and measurement maps, and forms all predicted,
innovation and cross covariances in augmented form, so the gain is widely
linear.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .augmented import (
    AugmentedMatrix,
    AugmentedVector,
    psd_sqrt,
    solve_right,
)
from .errors import DimensionError
from .linear import FilterState, StepReport
from .stats import SecondOrderStats, validate


@dataclass
class UTParams:
    """Spread and weighting parameters of the unscented transform.

    ``kappa=None`` (the default) applies the classical Gaussian heuristic
    kappa = 3 - dim, which matches fourth moments and keeps the point
    radius at sqrt(3) standard deviations regardless of dimension. A fixed
    numeric kappa is honored as given.
    """

    alpha: float = 1.0
    beta: float = 2.0
    kappa: float | None = None

    def kappa_for(self, dim: int) -> float:
        return 3.0 - dim if self.kappa is None else self.kappa

    def lam(self, dim: int) -> float:
        return self.alpha**2 * (dim + self.kappa_for(dim)) - dim

    def weights(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        lam = self.lam(dim)
        scale = dim + lam
        if scale <= 0:
            raise DimensionError(f"dim + lambda must be positive, got {scale}")
        w_mean = np.full(2 * dim + 1, 1.0 / (2.0 * scale))
        w_cov = w_mean.copy()
        w_mean[0] = lam / scale
        w_cov[0] = lam / scale + (1.0 - self.alpha**2 + self.beta)
        return w_mean, w_cov


@dataclass
class SigmaPointSet:
    """Ordered points (count, dim) with mean and covariance weight sequences."""

    points: np.ndarray
    w_mean: np.ndarray
    w_cov: np.ndarray

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points))
        self.w_mean = np.asarray(self.w_mean, dtype=float)
        self.w_cov = np.asarray(self.w_cov, dtype=float)
        if self.points.shape[0] != self.w_mean.shape[0] or self.points.shape[0] != self.w_cov.shape[0]:
            raise DimensionError("weights must match the number of points")

    @property
    def count(self) -> int:
        return self.points.shape[0]


def real_sigma_points(mu, cov, params: UTParams = UTParams()) -> SigmaPointSet:
    """Standard 2L+1 sigma points of a real mean/covariance pair.

    Columns of the PSD square root provide the spread directions, scaled
    by sqrt(L + lambda). For the composite representation of N complex
    dimensions, L = 2N and the set has 4N + 1 points.
    """
    mu = np.asarray(mu, dtype=float)
    cov = np.asarray(cov, dtype=float)
    dim = mu.shape[0]
    if cov.shape != (dim, dim):
        raise DimensionError("covariance shape does not match the mean")
    w_mean, w_cov = params.weights(dim)
    spread = np.sqrt(dim + params.lam(dim))
    b = psd_sqrt(cov)
    points = np.empty((2 * dim + 1, dim))
    points[0] = mu
    points[1 : dim + 1] = mu + spread * b.T
    points[dim + 1 :] = mu - spread * b.T
    return SigmaPointSet(points, w_mean, w_cov)


def complex_sigma_points(
    stats: SecondOrderStats,
    params: UTParams = UTParams(),
    preserve_complementary: bool = True,
) -> SigmaPointSet:
    """Sigma points of a complex random vector as complex points.

    With ``preserve_complementary`` the points are built from the real
    composite form of the full augmented statistics, so their weighted
    moments match mean, Hermitian covariance and complementary covariance.
    Without it the complementary covariance is treated as zero before the
    construction, reproducing the conventional proper-assuming points that
    carry the mean and Hermitian covariance only.
    """
    validate(stats)
    if preserve_complementary:
        source = stats
    else:
        source = SecondOrderStats(stats.mean, stats.hermitian_cov, np.zeros_like(stats.hermitian_cov))
    mu_z, cov_z = source.composite()
    composite = real_sigma_points(mu_z, cov_z, params)
    n = stats.n
    complex_points = composite.points[:, :n] + 1j * composite.points[:, n:]
    return SigmaPointSet(complex_points, composite.w_mean, composite.w_cov)


def augmented_points(sps: SigmaPointSet) -> np.ndarray:
    """Augmented stacks [x; x*] of a complex point set, shape (count, 2n)."""
    return np.concatenate([sps.points, np.conj(sps.points)], axis=1)


def reconstruct_stats(sps: SigmaPointSet) -> SecondOrderStats:
    """Weighted mean and second moments of a complex sigma-point set."""
    if sps.count == 0:
        raise DimensionError("empty sigma point set")
    pts = np.asarray(sps.points, dtype=complex)
    mean = sps.w_mean @ pts
    d = pts - mean
    r = (sps.w_cov[:, None] * d).T @ np.conj(d)
    rt = (sps.w_cov[:, None] * d).T @ d
    return SecondOrderStats(mean, r, rt)


@dataclass
class NonlinearModel:
    """Complex nonlinear state-space model with arbitrary noise entry.

    ``f(state, drive_noise)`` advances the state; ``h(state, meas_noise)``
    produces the measurement. Both must accept arrays of points with the
    leading axis enumerating points. Noise and initial statistics carry
    the full (possibly improper) second-order description.
    """

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    h: Callable[[np.ndarray, np.ndarray], np.ndarray]
    drive_noise: SecondOrderStats
    meas_noise: SecondOrderStats
    init: SecondOrderStats

    @property
    def n(self) -> int:
        return self.init.n


def _block_diag(*mats: np.ndarray) -> np.ndarray:
    total = sum(m.shape[0] for m in mats)
    out = np.zeros((total, total), dtype=complex)
    pos = 0
    for m in mats:
        k = m.shape[0]
        out[pos : pos + k, pos : pos + k] = m
        pos += k
    return out


def uwlckf_step(
    state: FilterState,
    y,
    model: NonlinearModel,
    params: UTParams = UTParams(),
) -> StepReport:
    """One cycle of the unscented widely linear filter.

    Joint sigma points of [state; driving noise; measurement noise] are
    generated with the full augmented statistics, the state parts pass
    through the transition and then the measurement map, and predicted,
    innovation and cross second moments are assembled in augmented form.
    The gain solves against the augmented innovation covariance (least
    squares when singular, flagged), the covariance update is
    P - K S K^H with symmetrization.
    """
    y = np.asarray(y, dtype=complex)
    n = model.n
    nw = model.drive_noise.n
    joint_mean = np.concatenate([state.estimate.top, model.drive_noise.mean, model.meas_noise.mean])
    joint_r = _block_diag(state.cov.m1, model.drive_noise.hermitian_cov, model.meas_noise.hermitian_cov)
    joint_rt = _block_diag(state.cov.m2, model.drive_noise.complementary_cov, model.meas_noise.complementary_cov)
    joint = SecondOrderStats(joint_mean, joint_r, joint_rt)
    sps = complex_sigma_points(joint, params)
    xs = sps.points[:, :n]
    ws = sps.points[:, n : n + nw]
    ns = sps.points[:, n + nw :]

    xs_next = np.asarray(model.f(xs, ws), dtype=complex)
    ys = np.asarray(model.h(xs_next, ns), dtype=complex)
    if y.shape != (ys.shape[1],):
        raise DimensionError("measurement dimension does not match the measurement map")

    wm = sps.w_mean
    wc = sps.w_cov
    x_pred = wm @ xs_next
    y_pred = wm @ ys
    dx = xs_next - x_pred
    dy = ys - y_pred
    wdx = wc[:, None] * dx
    p_pred = wdx.T @ np.conj(dx)
    pt_pred = wdx.T @ dx
    s = (wc[:, None] * dy).T @ np.conj(dy)
    st = (wc[:, None] * dy).T @ dy
    p_xy = wdx.T @ np.conj(dy)
    pt_xy = wdx.T @ dy

    predicted = FilterState(
        AugmentedVector.from_complex(x_pred),
        AugmentedMatrix(p_pred, pt_pred).symmetrized(),
        state.t + 1,
    )
    s_cov = AugmentedMatrix(s, st).symmetrized()
    cross = AugmentedMatrix(p_xy, pt_xy)
    gain, singular = solve_right(cross, s_cov)
    innovation = AugmentedVector.from_complex(y - y_pred)
    estimate = predicted.estimate + gain @ innovation
    cov = (predicted.cov - gain @ s_cov @ gain.conj_t()).symmetrized()
    return StepReport(
        predicted=predicted,
        innovation=innovation,
        innovation_cov=s_cov,
        gain=gain,
        state=FilterState(estimate, cov, predicted.t),
        singular_innovation=singular,
    )


def uwlckf_run(
    model: NonlinearModel,
    measurements,
    params: UTParams = UTParams(),
    init: FilterState | None = None,
) -> list[StepReport]:
    """Run the unscented widely linear filter over a measurement sequence."""
    if init is None:
        init = FilterState(
            AugmentedVector.from_complex(model.init.mean),
            AugmentedMatrix(model.init.hermitian_cov, model.init.complementary_cov),
            t=0,
        )
    state = init
    reports: list[StepReport] = []
    for y in measurements:
        report = uwlckf_step(state, np.atleast_1d(np.asarray(y, complex)), model, params)
        reports.append(report)
        state = report.state
    return reports


@dataclass
class DualChannelUKFModel:
    """Scalar-state model for the proper-assuming baseline UKF.

    The state advances as state_coeff * x + noise_coeff * w with unit-
    variance real driving noise; the measurement is a real 2-vector
    ``measure(x) + [u, v]`` with independent channel noise variances
    ``ru`` and ``rv`` (the proper reading of complex noise of Hermitian
    variance R is ru = rv = R / 2).
    """

    state_coeff: float
    noise_coeff: float
    measure: Callable[[np.ndarray], np.ndarray]
    ru: float
    rv: float
    drive_var: float = 1.0


@dataclass
class RealUKFReport:
    """One cycle of the dual-channel baseline UKF."""

    predicted_mean: float
    predicted_var: float
    innovation: np.ndarray
    innovation_cov: np.ndarray
    gain: np.ndarray
    mean: float
    var: float


def ukf_step(
    mean: float,
    var: float,
    y: complex,
    model: DualChannelUKFModel,
    params: UTParams = UTParams(),
) -> RealUKFReport:
    """Proper-assuming UKF cycle on the dual real channels of a measurement.

    Sigma points come from the real 4-vector [x, w, u, v] with covariance
    diag(var, drive_var, ru, rv); the gain is a 1 x 2 row acting on
    [Re y, Im y].
    """
    mu = np.array([mean, 0.0, 0.0, 0.0])
    cov = np.diag([var, model.drive_var, model.ru, model.rv])
    sps = real_sigma_points(mu, cov, params)
    x_next = model.state_coeff * sps.points[:, 0] + model.noise_coeff * sps.points[:, 1]
    z = np.asarray(model.measure(x_next), dtype=float) + sps.points[:, 2:4]
    wm, wc = sps.w_mean, sps.w_cov
    x_pred = float(wm @ x_next)
    z_pred = wm @ z
    dx = x_next - x_pred
    dz = z - z_pred
    p_pred = float(wc @ dx**2)
    s = (wc[:, None] * dz).T @ dz
    p_xz = (wc * dx) @ dz
    gain = np.linalg.solve(s.T, p_xz).reshape(1, 2)
    nu = np.array([y.real, y.imag]) - z_pred
    mean_new = x_pred + float((gain @ nu)[0])
    var_new = p_pred - float((gain @ s @ gain.T)[0, 0])
    return RealUKFReport(
        predicted_mean=x_pred,
        predicted_var=p_pred,
        innovation=nu,
        innovation_cov=s,
        gain=gain,
        mean=mean_new,
        var=var_new,
    )
