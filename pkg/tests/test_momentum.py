import numpy as np
import pytest

from momo.errors import DataError, DegenerateSwing, NonOrthonormal
from momo.momentum import (
    MomentumProfile,
    angular_momentum,
    linear_momentum,
    momentum_profile,
    read_profile_csv,
    rotated_inertia,
    swing_twist,
    transfer_term,
    write_profile_csv,
)
from momo.motion import MotionSequence
from momo.rotations import axis_angle, geodesic_angle, matrix_to_rotvec, rotvec_to_matrix
from momo.synth import SynthConfig, generate

from conftest import make_point_body


def spin_about_z(body, w, T=10, fps=20.0):
    R = axis_angle(np.array([0.0, 0.0, 1.0]), w * np.arange(T) / fps)
    theta = np.repeat(R[:, None], body.P, axis=1)
    return MotionSequence(fps, R, np.zeros((T, 3)), theta)


def test_uniform_translation_linear_momentum(body):
    seq = generate(SynthConfig("uniform_translation", params={"velocity": [0.3, -1.0, 0.2]}), body)
    assert np.allclose(linear_momentum(seq, body), [0.3, -1.0, 0.2], atol=1e-12)
    assert np.allclose(angular_momentum(seq, body), 0, atol=1e-12)


def test_static_is_zero(body):
    prof = momentum_profile(generate(SynthConfig("static"), body), body)
    assert not np.any(prof.linear)
    assert np.abs(prof.angular).max() < 1e-15


def test_two_point_masses_orbit_oracle():
    # masses 1/4 at x=1 and 3/4 at x=-1/3 keep the CoM on the z axis; sum m r^2 = 1/3
    body = make_point_body([[1.0, 0, 0], [-1 / 3, 0, 0]], masses=[0.25, 0.75])
    w, fps = 2.0, 20.0
    seq = spin_about_z(body, w, fps=fps)
    L = angular_momentum(seq, body)
    sinc = np.sin(w / fps) / (w / fps)
    assert np.allclose(L[1:-1], [0, 0, sinc * w / 3], atol=1e-12)
    assert np.allclose(transfer_term(seq, body), L, atol=1e-15)


def test_rigid_spin_matches_rotated_inertia(body):
    # centroid velocities and omega both pick up the same sinc factor at interior frames
    w = np.array([0.7, -0.4, 1.2])
    fps = 30.0
    seq = generate(SynthConfig("rigid_spin", fps, 1.0, {"omega": w}), body)
    L = angular_momentum(seq, body)
    phi = np.linalg.norm(w) / fps
    assert np.allclose(L[1:-1], np.sin(phi) / phi * seq.metadata["angular"][1:-1], atol=1e-12)
    assert np.allclose(L, seq.metadata["angular"], rtol=2e-3, atol=1e-6)


def test_dumbbell_counter_rotation_cancels(dumbbell):
    seq = generate(SynthConfig("counter_rotating_pair", 30.0, 1.0, {"parts": [0, 1], "axis": [0, 0, 1], "rate": 3.0}), dumbbell)
    assert np.abs(seq.metadata["angular"]).max() < 1e-15
    assert np.abs(angular_momentum(seq, dumbbell)).max() < 1e-12
    assert np.abs(linear_momentum(seq, dumbbell)).max() < 1e-12


def test_mass_scaling(body):
    seq = generate(SynthConfig("rigid_spin", seed=4), body)
    a = momentum_profile(seq, body)
    b = momentum_profile(seq, body, mass=70.0)
    assert np.allclose(b.linear, 70 * a.linear)
    assert np.allclose(b.angular, 70 * a.angular)
    assert np.allclose(a.spin + a.transfer, a.angular)


def test_rotated_inertia(body):
    R = rotvec_to_matrix(np.array([0.2, 0.5, -0.3]))
    part = body.parts[3]
    I = rotated_inertia(part, R)
    assert np.allclose(I, R @ part.inertia @ R.T)
    assert np.allclose(np.linalg.eigvalsh(I), np.linalg.eigvalsh(part.inertia))
    with pytest.raises(NonOrthonormal):
        rotated_inertia(part, 1.1 * R)


def test_profile_rejects_non_finite():
    bad = np.zeros((3, 3))
    bad[1, 1] = np.nan
    with pytest.raises(DataError):
        MomentumProfile(bad, np.zeros((3, 3)), np.zeros((3, 3)), 30.0)


def test_profile_csv_round_trip(tmp_path, body):
    prof = momentum_profile(generate(SynthConfig("ballistic_tumble", seed=2), body), body)
    write_profile_csv(prof, tmp_path / "p.csv")
    back = read_profile_csv(tmp_path / "p.csv")
    assert np.array_equal(back.linear, prof.linear)
    assert np.array_equal(back.angular, prof.angular)
    assert np.array_equal(back.transfer, prof.transfer)
    assert back.fps == pytest.approx(prof.fps)


class TestSwingTwist:
    up = np.array([0.0, 0.0, 1.0])

    def test_recomposition(self, rng):
        R = rotvec_to_matrix(rng.normal(size=(50, 3)))
        st = swing_twist(R, self.up)
        assert np.allclose(st.swing @ st.twist, R, atol=1e-12)
        # the twist fixes the axis, the swing has no rotation about it
        assert np.allclose(st.twist @ self.up, self.up, atol=1e-12)
        assert np.allclose(matrix_to_rotvec(st.swing) @ self.up, 0, atol=1e-12)

    def test_pure_twist(self):
        R = axis_angle(self.up, 0.8)
        st = swing_twist(R, self.up)
        assert np.allclose(st.swing, np.eye(3), atol=1e-12)
        assert np.allclose(st.twist, R, atol=1e-12)

    def test_pure_swing(self):
        R = axis_angle(np.array([1.0, 0, 0]), 0.5)
        st = swing_twist(R, self.up)
        assert np.allclose(st.swing, R, atol=1e-12)
        assert geodesic_angle(st.twist, np.eye(3)) < 1e-12

    def test_degenerate_half_turn(self):
        R = axis_angle(np.array([1.0, 0, 0]), np.pi) @ axis_angle(self.up, 0.3)
        st = swing_twist(R, self.up)
        assert st.degenerate
        assert np.allclose(st.swing @ st.twist, R, atol=1e-12)
        assert np.allclose(st.twist @ self.up, self.up, atol=1e-12)
        with pytest.raises(DegenerateSwing):
            swing_twist(R, self.up, strict=True)

    def test_degenerate_exact_axis_flip(self):
        R = axis_angle(np.array([0.0, 1.0, 0]), np.pi)
        st = swing_twist(R, self.up)
        assert st.degenerate
        assert np.allclose(st.swing @ st.twist, R, atol=1e-12)
