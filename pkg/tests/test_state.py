"""State container, covariance, and noise configuration contracts."""

import math

import numpy as np
import pytest

from drs_inekf.liegroup import sek3_exp, compose
from drs_inekf.state import (IDX_BA, IDX_BG, IDX_CONTACT, IDX_POS, IDX_ROT,
                             IDX_VEL, BiasState, FilterState, NoiseConfig,
                             default_noise_config, initial_covariance,
                             load_noise_config, right_invariant_error,
                             run_covariance, symmetrize)


def test_index_slices_partition_18_dims():
    slices = [IDX_ROT, IDX_VEL, IDX_POS, IDX_CONTACT, IDX_BG, IDX_BA]
    covered = []
    for s in slices:
        covered.extend(range(s.start, s.stop))
    assert covered == list(range(18))


def test_bias_state_vector_roundtrip():
    rng = np.random.default_rng(0)
    vec = rng.standard_normal(6)
    b = BiasState.from_vector(vec)
    assert np.allclose(b.as_vector(), vec)
    assert np.allclose(BiasState().as_vector(), np.zeros(6))


def test_filter_state_with_time():
    st = FilterState(X=None, theta=BiasState(), P=np.eye(18), t=0.0)
    st2 = st.with_time(2.5)
    assert st2.t == 2.5 and st.t == 0.0


def test_noise_config_defaults_and_validation():
    n = default_noise_config()
    assert n.sd_gyro == 0.01
    assert n.sd_accel == 0.4
    assert n.sd_contact_vel == 0.01
    assert math.isclose(n.sd_encoder, math.radians(1.0))
    assert math.isclose(n.sd_drs_orient, math.radians(1.0))
    with pytest.raises(ValueError):
        NoiseConfig(sd_gyro=-1e-3)
    with pytest.raises(ValueError):
        NoiseConfig(sd_drs_orient=-0.1)


def test_load_noise_config(tmp_path):
    path = tmp_path / "noise.cfg"
    path.write_text("sd_gyro = 0.02  # comment\n\nsd_encoder_deg = 2.0\n")
    n = load_noise_config(path)
    assert n.sd_gyro == 0.02
    assert math.isclose(n.sd_encoder, math.radians(2.0))
    assert n.sd_accel == 0.4  # untouched default


def test_load_noise_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "noise.cfg"
    path.write_text("sd_bogus = 1.0\n")
    with pytest.raises(ValueError):
        load_noise_config(path)


def test_load_noise_config_rejects_malformed_line(tmp_path):
    path = tmp_path / "noise.cfg"
    path.write_text("sd_gyro 0.02\n")
    with pytest.raises(ValueError):
        load_noise_config(path)


def test_initial_covariance_is_identity():
    assert np.array_equal(initial_covariance(), np.eye(18))


def test_run_covariance_structure():
    P = run_covariance()
    assert P.shape == (18, 18)
    assert np.allclose(P, np.diag(np.diag(P)))
    assert np.allclose(np.diag(P)[:12], 1.0)
    assert np.allclose(np.diag(P)[12:15], 1e-6)
    assert np.allclose(np.diag(P)[15:18], 1e-4)
    P2 = run_covariance(var_pose=0.01)
    assert np.allclose(np.diag(P2)[:12], 0.01)


def test_symmetrize():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((18, 18))
    S = symmetrize(M)
    assert np.allclose(S, S.T)
    assert np.allclose(S, 0.5 * (M + M.T))


def test_right_invariant_error_recovers_perturbation():
    rng = np.random.default_rng(2)
    for _ in range(100):
        X_true = sek3_exp(rng.uniform(-1.0, 1.0, 12))
        xi = rng.uniform(-0.8, 0.8, 12)
        X_est = compose(sek3_exp(xi), X_true)
        assert np.allclose(right_invariant_error(X_est, X_true), xi, atol=1e-9)


def test_right_invariant_error_is_right_invariant():
    rng = np.random.default_rng(3)
    for _ in range(100):
        X_true = sek3_exp(rng.uniform(-1.0, 1.0, 12))
        X_est = compose(sek3_exp(rng.uniform(-0.5, 0.5, 12)), X_true)
        G = sek3_exp(rng.uniform(-1.0, 1.0, 12))
        e1 = right_invariant_error(X_est, X_true)
        e2 = right_invariant_error(compose(X_est, G), compose(X_true, G))
        assert np.allclose(e1, e2, atol=1e-9)
