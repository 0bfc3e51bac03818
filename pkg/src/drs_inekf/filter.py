"""Right-invariant EKF for legged locomotion on a moving rigid surface.

Continuous phases propagate the mean with RK4 and the 18x18 covariance with
a first-order transition of the Riccati equation; corrections use the right-invariant
observation form (surface-normal alignment and leg-odometry position); foot
landings apply a group-action jump with encoder-driven covariance inflation.

The ``SRS`` variant models the contact point as static (zero contact
velocity) and drops the orientation observation, reproducing the
static-surface baseline filter.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .liegroup import (GroupElement, compose, sek3_exp, skew,
                       project_rotation)
from .state import (BiasState, FilterState, NoiseConfig, symmetrize)
from . import liegroup

log = logging.getLogger(__name__)

GRAVITY = np.array([0.0, 0.0, -9.81])
E3 = np.array([0.0, 0.0, 1.0])

MAX_DT = 0.1
COND_LIMIT = 1e12
ORTHO_TOL = 1e-8


class FilterVariant(Enum):
    DRS = "drs"
    SRS = "srs"


@dataclass(frozen=True)
class ImuSample:
    omega_tilde: np.ndarray
    a_tilde: np.ndarray
    t: float


@dataclass(frozen=True)
class ProcessInput:
    imu: ImuSample
    v_c_tilde: np.ndarray
    dt: float

    def validate(self):
        if not (0.0 < self.dt <= MAX_DT):
            raise ValueError(f"dt must be in (0, {MAX_DT}], got {self.dt}")
        vals = np.concatenate([self.imu.omega_tilde, self.imu.a_tilde, self.v_c_tilde])
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite process input")


@dataclass(frozen=True)
class Observation:
    """Right-invariant observation; Y and d are 6-vectors, N is the 3x3
    effective noise covariance of the top rows."""

    kind: str          # "orientation" | "position"
    Y: np.ndarray
    d: np.ndarray
    N: np.ndarray


def process_derivative(X, theta, imu, v_c):
    """Time derivative of (rotation | v p pc) under the deterministic model."""
    omega = imu.omega_tilde - theta.b_omega
    acc = imu.a_tilde - theta.b_acc
    return _mean_derivative(np.hstack([X.rot, X.cols]), omega, acc, v_c)


def _mean_derivative(M, omega, acc, v_c):
    R = M[:, :3]
    dM = np.empty((3, 6))
    dM[:, :3] = R @ skew(omega)
    dM[:, 3] = R @ acc + GRAVITY
    dM[:, 4] = M[:, 3]
    dM[:, 5] = v_c
    return dM


def integrate_mean(X, theta, omega_tilde, a_tilde, v_c, dt):
    """One RK4 step of the deterministic process with constant inputs."""
    omega = omega_tilde - theta.b_omega
    acc = a_tilde - theta.b_acc
    M = np.hstack([X.rot, X.cols])
    k1 = _mean_derivative(M, omega, acc, v_c)
    k2 = _mean_derivative(M + 0.5 * dt * k1, omega, acc, v_c)
    k3 = _mean_derivative(M + 0.5 * dt * k2, omega, acc, v_c)
    k4 = _mean_derivative(M + dt * k3, omega, acc, v_c)
    M = M + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    R = M[:, :3]
    err = R @ R.T - np.eye(3)
    if np.abs(err).max() > ORTHO_TOL:
        R = project_rotation(R)
    return GroupElement(R, M[:, 3:].copy())


def dynamics_matrix(X, theta, imu, v_c):
    """The process vector field as a 6x6 matrix (group-affine form)."""
    omega = imu.omega_tilde - theta.b_omega
    acc = imu.a_tilde - theta.b_acc
    F = np.zeros((6, 6))
    F[:3, :3] = X.rot @ skew(omega)
    F[:3, 3] = X.rot @ acc + GRAVITY
    F[:3, 4] = X.v
    F[:3, 5] = v_c
    return F


def error_jacobian(state, v_c_tilde):
    """18x18 Jacobian of the linearized invariant-error dynamics."""
    A = np.zeros((18, 18))
    X = state.X
    R = X.rot
    A[3:6, 0:3] = skew(GRAVITY)
    A[6:9, 3:6] = np.eye(3)
    A[9:12, 0:3] = skew(v_c_tilde)
    A[0:3, 12:15] = -R
    A[3:6, 12:15] = -skew(X.v) @ R
    A[6:9, 12:15] = -skew(X.p) @ R
    A[9:12, 12:15] = -skew(X.pc) @ R
    A[3:6, 15:18] = -R
    return A


def process_noise_covariance(state, noise, dt):
    """Effective continuous-time noise density, rotated into the invariant
    error frame.

    White sensor noises are per-sample SDs at the step rate, so their
    densities scale with dt; bias walks are densities already.
    """
    cov_w = np.zeros(18)
    cov_w[0:3] = noise.sd_gyro**2 * dt
    cov_w[3:6] = noise.sd_accel**2 * dt
    cov_w[9:12] = noise.sd_contact_vel**2 * dt
    cov_w[12:15] = noise.sd_bias_gyro**2
    cov_w[15:18] = noise.sd_bias_accel**2
    Ad = liegroup.adjoint(state.X)
    Q = np.zeros((18, 18))
    Q[:12, :12] = Ad @ np.diag(cov_w[:12]) @ Ad.T
    Q[12:, 12:] = np.diag(cov_w[12:])
    return Q


def propagate(state, inp, noise, variant=FilterVariant.DRS):
    """One continuous-phase propagation step (mean RK4, Riccati Euler)."""
    inp.validate()
    v_c = np.zeros(3) if variant is FilterVariant.SRS else inp.v_c_tilde
    A = error_jacobian(state, v_c)
    Q = process_noise_covariance(state, noise, inp.dt)
    X_new = integrate_mean(state.X, state.theta, inp.imu.omega_tilde,
                           inp.imu.a_tilde, v_c, inp.dt)
    # first-order transition Phi P Phi^T + Q dt rather than the raw Euler
    # Riccati step: the quadratic term it retains keeps P positive
    # semidefinite when updates have collapsed some directions
    Phi = np.eye(18) + A * inp.dt
    P = Phi @ state.P @ Phi.T + Q * inp.dt
    return FilterState(X_new, state.theta, symmetrize(P), state.t + inp.dt)


def orientation_observation(q_tilde, R_drs_tilde, model, noise, R_est):
    """Surface-normal alignment observation (needs a flat support foot)."""
    y_top = model.h_R(q_tilde) @ E3
    d_top = R_drs_tilde @ E3
    Y = np.concatenate([y_top, np.zeros(3)])
    d = np.concatenate([d_top, np.zeros(3)])
    Sd = skew(d_top)
    J3 = model.J_hR3(q_tilde)
    # Sd Sd^T = I - d d^T for the unit normal d; the measurement carries no
    # information along d, so the noise model is completed to full rank there
    # to keep the innovation covariance invertible.
    N = (noise.sd_drs_orient**2 * (Sd @ Sd.T + np.outer(d_top, d_top))
         + noise.sd_encoder**2 * R_est @ J3 @ J3.T @ R_est.T)
    return Observation("orientation", Y, d, N)


def position_observation(q_tilde, model, noise, R_est):
    """Leg-odometry position observation."""
    Y = np.concatenate([model.h_p(q_tilde), [0.0, 1.0, -1.0]])
    d = np.array([0.0, 0.0, 0.0, 0.0, 1.0, -1.0])
    Jp = model.J_hp(q_tilde)
    N = noise.sd_encoder**2 * R_est @ Jp @ Jp.T @ R_est.T
    return Observation("position", Y, d, N)


def observation_row(obs):
    """Reduced 3x12 observation matrix for one observation."""
    if obs.kind == "orientation":
        H = np.zeros((3, 12))
        H[:, 0:3] = skew(obs.d[:3])
        return H
    if obs.kind == "position":
        H = np.zeros((3, 12))
        H[:, 6:9] = -np.eye(3)
        H[:, 9:12] = np.eye(3)
        return H
    raise ValueError(f"unknown observation kind: {obs.kind}")


def innovation(state, obs):
    """Top three rows of X*Y - d."""
    Xm = state.X
    y = obs.Y
    return Xm.rot @ y[:3] + Xm.cols @ y[3:] - obs.d[:3]


MAX_SUBSTEP_ROT = 0.1
MAX_SUBSTEPS = 32


def update(state, observations):
    """Joint right-invariant update with all supplied observations.

    Large attitude corrections are applied progressively: the measurement is
    split into m sub-updates with covariance m*N (exactly equivalent for a
    linear system), each relinearizing the innovation.  This keeps every
    exponential-map step small and prevents the linearized correction from
    overshooting during large-error transients.
    """
    if not observations:
        raise ValueError("update needs at least one observation")
    k = len(observations)
    H = np.zeros((3 * k, 18))
    z = np.zeros(3 * k)
    Nbar = np.zeros((3 * k, 3 * k))
    for i, obs in enumerate(observations):
        rows = slice(3 * i, 3 * i + 3)
        H[rows, :12] = observation_row(obs)
        z[rows] = innovation(state, obs)
        Nbar[rows, rows] = obs.N
    S = H @ state.P @ H.T + Nbar
    if np.linalg.cond(S) > COND_LIMIT:
        log.warning("update skipped at t=%.4f: innovation covariance "
                    "ill-conditioned", state.t)
        return state
    dx_full = state.P @ H.T @ np.linalg.solve(S, z)
    rot_step = np.linalg.norm(dx_full[:3])
    n_steps = int(min(MAX_SUBSTEPS, max(1, np.ceil(rot_step / MAX_SUBSTEP_ROT))))

    Nsub = Nbar * n_steps
    X, theta, P = state.X, state.theta, state.P
    eye = np.eye(18)
    for step in range(n_steps):
        S = H @ P @ H.T + Nsub
        if np.linalg.cond(S) > COND_LIMIT:
            log.warning("update skipped at t=%.4f: innovation covariance "
                        "ill-conditioned", state.t)
            return state
        L = P @ H.T @ np.linalg.inv(S)
        if step > 0:
            tmp = FilterState(X, theta, P, state.t)
            z = np.concatenate([innovation(tmp, obs) for obs in observations])
        dx = L @ z
        X = compose(sek3_exp(dx[:12]), X)
        theta = BiasState.from_vector(theta.as_vector() + dx[12:])
        # Joseph form keeps P positive semidefinite under large gains
        ILH = eye - L @ H
        P = symmetrize(ILH @ P @ ILH.T + L @ Nsub @ L.T)
    return FilterState(X, theta, P, state.t)


def jump_propagate(state, q_tilde_at_landing, model, noise):
    """Foot-landing jump: shift the tracked contact point and inflate P."""
    h_c = model.h_c(q_tilde_at_landing)
    delta = GroupElement(np.eye(3), np.column_stack(
        [np.zeros(3), np.zeros(3), h_c]))
    X_new = compose(state.X, delta)
    Jc = model.J_hc(q_tilde_at_landing)
    cov12 = np.zeros((12, 12))
    cov12[9:12, 9:12] = noise.sd_encoder**2 * Jc @ Jc.T
    Ad = liegroup.adjoint(state.X)
    P = state.P.copy()
    P[:12, :12] += Ad @ cov12 @ Ad.T
    return FilterState(X_new, state.theta, symmetrize(P), state.t)


def run_variant(state, dataset, variant, model, noise, record_all=False):
    """Run the filter over a scenario dataset.

    Returns the list of filter states at measurement times (or at every IMU
    sample when ``record_all``).  The dataset must carry time-ordered IMU,
    contact-velocity, measurement, and contact-switch streams as produced by
    the scenario generator.
    """
    t_imu = dataset.imu_t
    if np.any(np.diff(t_imu) <= 0.0):
        raise ValueError("IMU stream timestamps out of order")
    if dataset.meas_t.size and np.any(np.diff(dataset.meas_t) <= 0.0):
        raise ValueError("measurement stream timestamps out of order")
    tol = 0.25 * dataset.dt
    meas_by_step = {}
    for j, tm in enumerate(dataset.meas_t):
        meas_by_step[int(round(tm / dataset.dt))] = j
    switch_by_step = {}
    for j, ts in enumerate(dataset.switch_t):
        switch_by_step[int(round(ts / dataset.dt))] = j
    orient_by_step = {}
    for j, to in enumerate(dataset.drs_t):
        orient_by_step[int(round(to / dataset.dt))] = j

    trajectory = []
    n = t_imu.size
    for k in range(n):
        dt = t_imu[k + 1] - t_imu[k] if k + 1 < n else dataset.dt
        imu = ImuSample(dataset.imu_omega[k], dataset.imu_acc[k], t_imu[k])
        inp = ProcessInput(imu, dataset.contact_v[k], dt)
        state = propagate(state, inp, noise, variant)
        step_idx = k + 1
        j = switch_by_step.get(step_idx)
        if j is not None and abs(dataset.switch_t[j] - state.t) < tol:
            state = jump_propagate(state, dataset.switch_q[j], model, noise)
        j = meas_by_step.get(step_idx)
        if j is not None and abs(dataset.meas_t[j] - state.t) < tol:
            obs = [position_observation(dataset.enc_q[j], model, noise,
                                        state.X.rot)]
            jo = orient_by_step.get(step_idx)
            if variant is FilterVariant.DRS and jo is not None:
                obs.insert(0, orientation_observation(
                    dataset.enc_q[j], dataset.drs_rot[jo], model, noise,
                    state.X.rot))
            state = update(state, obs)
            trajectory.append(state)
        elif record_all:
            trajectory.append(state)
    return trajectory
