import json

import numpy as np
import pytest

from momo.body_model import BodySpec, PartProperties
from momo.errors import DataError, NonOrthonormal, PartCountMismatch, TooShort
from momo.motion import (
    MotionSequence,
    angular_velocity,
    load_motion,
    motion_from_dict,
    motion_from_quaternions,
    motion_to_dict,
    part_centroids,
    pose_points,
    save_motion,
    time_derivative,
)
from momo.rotations import axis_angle, matrix_to_quat, rotvec_to_matrix


def still(T, P, fps=30.0):
    I = np.broadcast_to(np.eye(3), (T, 3, 3)).copy()
    return MotionSequence(fps, I, np.zeros((T, 3)), np.broadcast_to(np.eye(3), (T, P, 3, 3)).copy())


class TestTimeDerivative:
    def test_constant_is_exactly_zero(self):
        x = np.full((12, 2), 0.123456789)
        assert not np.any(time_derivative(x, 30.0))

    def test_quadratic_exact_everywhere(self):
        t = np.arange(9) / 25.0
        x = 0.3 - 1.7 * t + 2.2 * t**2
        assert np.allclose(time_derivative(x, 25.0), -1.7 + 4.4 * t, atol=1e-12)

    def test_cubic_error_is_uniform(self):
        # central differences of a t^3 term err by a h^2 at every frame; the ends match
        h = 1 / 20.0
        t = np.arange(10) * h
        x = 1.0 + 0.5 * t - t**2 + 2.0 * t**3
        err = time_derivative(x, 20.0) - (0.5 - 2 * t + 6.0 * t**2)
        assert np.allclose(err, 2.0 * h**2, atol=1e-12)

    def test_third_derivative_of_cubic_exact(self):
        t = np.arange(7) / 30.0
        x = 1.3 - 0.2 * t + 0.7 * t**2 + 2.0 * t**3
        d3 = time_derivative(time_derivative(time_derivative(x, 30.0), 30.0), 30.0)
        assert np.allclose(d3, 12.0, atol=1e-8)

    def test_second_order_convergence(self):
        errs = []
        for fps in (50.0, 100.0, 200.0):
            t = np.arange(int(fps) + 1) / fps
            errs.append(np.abs(time_derivative(np.sin(3 * t), fps) - 3 * np.cos(3 * t)).max())
        rates = np.log2(np.array(errs[:-1]) / errs[1:])
        assert np.all(np.abs(rates - 2) < 0.2)

    def test_short_tracks(self):
        assert np.allclose(time_derivative([1.0, 3.0], 2.0), [4.0, 4.0])
        t = np.arange(3) / 10.0
        assert np.allclose(time_derivative(t**2, 10.0), 2 * t, atol=1e-12)
        with pytest.raises(TooShort):
            time_derivative([1.0], 10.0)


def test_angular_velocity_constant_rate_oracle():
    # interior central differences of exp(t w^) give w sin(|w| h) / (|w| h) exactly
    fps = 10.0
    w = np.array([0.4, -1.1, 0.8])
    R = rotvec_to_matrix(np.arange(12)[:, None] / fps * w)
    phi = np.linalg.norm(w) / fps
    got = angular_velocity(R, fps)
    assert np.allclose(got[1:-1], w * np.sin(phi) / phi, atol=1e-12)
    assert np.allclose(got, w, rtol=0.05)


def test_two_part_chain_hand_computed():
    inertia = np.eye(3) * 1e-3
    a = PartProperties(0.5, (0, 0, 0.5), inertia, joint=(0, 0, 0))
    b = PartProperties(0.5, (0, 0, 1.5), inertia, joint=(0, 0, 1))
    body = BodySpec((a, b), (-1, 0))
    seq = still(2, 2)
    rot = axis_angle(np.array([1.0, 0, 0]), np.pi / 2)  # sends +z to -y
    theta = seq.part_rotations.copy()
    theta[1, 0] = rot
    seq = seq.replace(part_rotations=theta, root_translation=np.array([[0, 0, 0], [1.0, 0, 0]]))
    w = part_centroids(seq, body).world
    assert np.allclose(w[0], [[0, 0, 0.5], [0, 0, 1.5]])
    # frame 1: root moved by +x and rotated, child pivot carried to (1,-1,0),
    # child itself not rotated so its centroid sits 0.5 above that pivot
    assert np.allclose(w[1], [[1, -0.5, 0], [1, -1, 0.5]], atol=1e-12)
    tr = part_centroids(seq, body)
    assert np.allclose(tr.com[1], [1, -0.75, 0.25], atol=1e-12)
    assert np.allclose(tr.body.sum(axis=1), 0, atol=1e-12)


def test_pose_points_follow_parts(body):
    seq = still(3, body.P)
    pts = pose_points(seq, body)
    n = sum(len(p.points) for p in body.parts)
    assert pts.shape == (3, n, 3)
    assert abs(pts[..., 2].min()) < 1e-12


def test_part_count_mismatch(body):
    with pytest.raises(PartCountMismatch):
        part_centroids(still(3, 4), body)


def test_validation():
    with pytest.raises(TooShort):
        still(1, 2)
    bad = still(3, 2)
    theta = bad.part_rotations.copy()
    theta[1, 0] *= 1.01
    with pytest.raises(NonOrthonormal):
        bad.replace(part_rotations=theta)
    with pytest.raises(DataError):
        MotionSequence(-1.0, bad.root_rotation, bad.root_translation, bad.part_rotations)


def test_json_round_trip_is_exact(tmp_path, rng):
    T, P = 5, 3
    R = rotvec_to_matrix(rng.normal(size=(T, 3)))
    theta = rotvec_to_matrix(rng.normal(size=(T, P, 3)))
    seq = MotionSequence(60.0, R, rng.normal(size=(T, 3)), theta)
    save_motion(seq, tmp_path / "walk.json")
    back = load_motion(tmp_path / "walk.json")
    assert back.name == "walk"
    assert back.fps == 60.0
    assert np.array_equal(back.root_rotation, seq.root_rotation)
    assert np.array_equal(back.root_translation, seq.root_translation)
    assert np.array_equal(back.part_rotations, seq.part_rotations)


def test_quaternion_frames(rng):
    T, P = 4, 2
    R = rotvec_to_matrix(rng.normal(size=(T, 3)))
    theta = rotvec_to_matrix(rng.normal(size=(T, P, 3)))
    doc = {
        "fps": 30,
        "parts": P,
        "frames": [
            {"q": matrix_to_quat(R[t]).tolist(), "T": [0, 0, t], "theta": matrix_to_quat(theta[t]).tolist()}
            for t in range(T)
        ],
    }
    seq = motion_from_dict(doc)
    assert np.allclose(seq.root_rotation, R, atol=1e-12)
    assert np.allclose(seq.part_rotations, theta, atol=1e-12)
    direct = motion_from_quaternions(30, matrix_to_quat(R), np.zeros((T, 3)), matrix_to_quat(theta))
    assert np.allclose(direct.part_rotations, theta, atol=1e-12)


def test_flat_theta_accepted():
    seq = still(2, 2)
    doc = motion_to_dict(seq)
    for fr in doc["frames"]:
        fr["theta"] = [x for row in fr["theta"] for x in row]
    assert np.array_equal(motion_from_dict(doc).part_rotations, seq.part_rotations)


@pytest.mark.parametrize(
    "doc",
    [
        {"parts": 1, "frames": []},
        {"fps": 30, "parts": 2, "frames": [{"R": [1, 0, 0, 0, 1, 0, 0, 0, 1], "T": [0, 0, 0], "theta": [[1, 0, 0, 0, 1, 0, 0, 0, 1]]}] * 2},
        {"fps": 30, "parts": 1, "frames": [{"R": [1, 0, 0], "T": [0, 0, 0], "theta": [[1, 0, 0, 1]]}] * 2},
        {"fps": 30, "parts": 1, "frames": []},
    ],
)
def test_malformed_documents(doc):
    with pytest.raises(DataError):
        motion_from_dict(doc)


def test_invalid_json_file(tmp_path):
    (tmp_path / "x.json").write_text("{not json")
    with pytest.raises(DataError):
        load_motion(tmp_path / "x.json")
    (tmp_path / "y.json").write_text(json.dumps({"fps": 30}))
    with pytest.raises(DataError):
        load_motion(tmp_path / "y.json")
