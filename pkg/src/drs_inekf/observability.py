"""Observability analysis of the bias-free error dynamics.

Stacks the reduced measurement rows against powers of the discrete
transition matrix and reports the numerical rank plus per-variable
observability flags as a function of the surface tilt.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
import scipy.linalg

from .filter import E3, GRAVITY
from .liegroup import skew

RANK_RTOL = 1e-8


def error_jacobian_nobias(v_c=None):
    """12x12 bias-free error Jacobian."""
    A = np.zeros((12, 12))
    A[3:6, 0:3] = skew(GRAVITY)
    A[6:9, 3:6] = np.eye(3)
    if v_c is not None:
        A[9:12, 0:3] = skew(v_c)
    return A


def transition_matrix(A_nobias, dt):
    """expm(A dt); the bias-free A is nilpotent so the series terminates."""
    return scipy.linalg.expm(np.asarray(A_nobias) * dt)


def measurement_rows(R_drs, include_orientation=True):
    rows = []
    if include_orientation:
        H1 = np.zeros((3, 12))
        H1[:, 0:3] = skew(R_drs @ E3)
        rows.append(H1)
    H2 = np.zeros((3, 12))
    H2[:, 6:9] = -np.eye(3)
    H2[:, 9:12] = np.eye(3)
    rows.append(H2)
    return np.vstack(rows)


def observability_matrix(R_drs, dt, n_blocks, v_c=None, include_orientation=True):
    if n_blocks < 2:
        raise ValueError("n_blocks must be >= 2")
    H = measurement_rows(R_drs, include_orientation)
    Phi = transition_matrix(error_jacobian_nobias(v_c), dt)
    blocks = []
    Pk = np.eye(12)
    for _ in range(n_blocks):
        blocks.append(H @ Pk)
        Pk = Pk @ Phi
    return np.vstack(blocks)


def numerical_rank(M, rtol=RANK_RTOL):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def _null_space(M, rtol=RANK_RTOL):
    _, s, Vt = np.linalg.svd(M)
    mask = np.zeros(Vt.shape[0], dtype=bool)
    mask[s.size:] = True
    mask[:s.size] = s <= rtol * (s[0] if s.size else 1.0)
    return Vt[mask].T


def _direction_observable(null_basis, direction, tol=1e-6):
    if null_basis.shape[1] == 0:
        return True
    d = direction / np.linalg.norm(direction)
    return float(np.linalg.norm(null_basis.T @ d)) < tol


@dataclass(frozen=True)
class ObservabilityReport:
    rank: int
    roll_pitch_observable: bool
    yaw_observable: bool
    velocity_observable: bool
    position_observable: bool
    contact_observable: bool
    dt: float
    n_blocks: int
    tilt_rad: float

    def to_dict(self):
        return asdict(self)


def observability_report(R_drs, dt=1e-2, n_blocks=3, include_orientation=True):
    O = observability_matrix(R_drs, dt, n_blocks,
                             include_orientation=include_orientation)
    rank = numerical_rank(O)
    ns = _null_space(O)

    def block_dir(block, axis):
        d = np.zeros(12)
        d[3 * block + axis] = 1.0
        return d

    # yaw is the gravity-axis component of the rotation error
    roll_pitch = all(_direction_observable(ns, block_dir(0, a)) for a in (0, 1))
    yaw = _direction_observable(ns, block_dir(0, 2))
    vel = all(_direction_observable(ns, block_dir(1, a)) for a in range(3))
    pos = all(_direction_observable(ns, block_dir(2, a)) for a in range(3))
    contact = all(_direction_observable(ns, block_dir(3, a)) for a in range(3))
    tilt = float(np.arccos(np.clip(np.dot(R_drs @ E3, E3), -1.0, 1.0)))
    return ObservabilityReport(rank, roll_pitch, yaw, vel, pos, contact,
                               dt, n_blocks, tilt)


def tilt_sweep(tilts_rad, dt=1e-2, n_blocks=3, include_orientation=True):
    """Observability reports for surface pitch angles about the y-axis."""
    from .liegroup import so3_exp
    reports = []
    for tilt in tilts_rad:
        R = so3_exp(np.array([0.0, float(tilt), 0.0]))
        reports.append(observability_report(R, dt, n_blocks, include_orientation))
    return reports
