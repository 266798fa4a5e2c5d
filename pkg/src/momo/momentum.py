"""Whole-body linear and angular momentum of rigid-part motion.

Angular momentum is taken about the instantaneous CoM in the non-rotating,
CoM-translating frame: the spin of each part about its own centroid plus the
orbital momentum of the part centroids. The orbital part alone is the
point-mass "transfer" term.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .body_model import BodySpec, PartProperties
from .errors import DataError, DegenerateSwing, LengthMismatch, NonOrthonormal
from .motion import CentroidTracks, MotionSequence, angular_velocity, part_centroids, time_derivative
from .rotations import axis_angle, matrix_to_quat, orthonormality_error, quat_conj, quat_mul, quat_to_matrix


@dataclass(eq=False)
class MomentumProfile:
    """Per-frame momentum tracks, each (T, 3)."""

    linear: np.ndarray
    angular: np.ndarray
    transfer: np.ndarray
    fps: float
    name: str = ""

    def __post_init__(self):
        self.linear = np.asarray(self.linear, dtype=float)
        self.angular = np.asarray(self.angular, dtype=float)
        self.transfer = np.asarray(self.transfer, dtype=float)
        T = len(self.linear)
        if self.linear.shape != (T, 3) or self.angular.shape != (T, 3) or self.transfer.shape != (T, 3):
            raise LengthMismatch("momentum tracks must share shape (T, 3)")
        for arr in (self.linear, self.angular, self.transfer):
            if not np.all(np.isfinite(arr)):
                raise DataError("momentum track contains non-finite values")

    @property
    def T(self) -> int:
        return len(self.linear)

    @property
    def spin(self) -> np.ndarray:
        return self.angular - self.transfer


def _tracks(seq: MotionSequence, body: BodySpec, tracks: CentroidTracks | None) -> CentroidTracks:
    return part_centroids(seq, body) if tracks is None else tracks


def linear_momentum(seq: MotionSequence, body: BodySpec, tracks: CentroidTracks | None = None) -> np.ndarray:
    """Sum of part masses times part centroid velocities, (T, 3)."""
    tr = _tracks(seq, body, tracks)
    vel = time_derivative(tr.world, seq.fps)
    return np.einsum("p,tpi->ti", body.masses, vel)


def rotated_inertia(part: PartProperties, theta) -> np.ndarray:
    """Canonical inertia carried into the world frame: ``theta I0 theta^T``."""
    theta = np.asarray(theta, dtype=float)
    if np.max(orthonormality_error(theta)) > 1e-4:
        raise NonOrthonormal("rotation is not orthonormal")
    return theta @ part.inertia @ np.swapaxes(theta, -1, -2)


def spin_momentum(seq: MotionSequence, body: BodySpec) -> np.ndarray:
    """Sum over parts of ``I_i(theta_i) omega_i`` with world-frame omega, (T, 3)."""
    theta = seq.part_rotations
    omega = angular_velocity(theta, seq.fps)
    # I(theta) omega = theta I0 theta^T omega
    local = np.einsum("tpji,tpj->tpi", theta, omega)
    local = np.einsum("pij,tpj->tpi", body.inertias, local)
    return np.einsum("tpij,tpj->ti", theta, local)


def transfer_term(seq: MotionSequence, body: BodySpec, tracks: CentroidTracks | None = None) -> np.ndarray:
    """Orbital angular momentum of part centroids about the CoM, (T, 3)."""
    tr = _tracks(seq, body, tracks)
    vel = time_derivative(tr.body, seq.fps)
    return np.einsum("p,tpi->ti", body.masses, np.cross(tr.body, vel))


def angular_momentum(seq: MotionSequence, body: BodySpec, tracks: CentroidTracks | None = None) -> np.ndarray:
    return spin_momentum(seq, body) + transfer_term(seq, body, tracks)


def momentum_profile(seq: MotionSequence, body: BodySpec, mass: float = 1.0) -> MomentumProfile:
    """All momentum tracks for one sequence.

    ``mass`` rescales from the normalized body (total mass 1) to a subject
    mass in kilograms.
    """
    tr = part_centroids(seq, body)
    transfer = transfer_term(seq, body, tr)
    angular = spin_momentum(seq, body) + transfer
    return MomentumProfile(
        linear=mass * linear_momentum(seq, body, tr),
        angular=mass * angular,
        transfer=mass * transfer,
        fps=seq.fps,
        name=seq.name,
    )


class SwingTwist(NamedTuple):
    swing: np.ndarray
    twist: np.ndarray
    degenerate: np.ndarray | bool


def swing_twist(R, axis, strict: bool = False, eps: float = 1e-12) -> SwingTwist:
    """Factor ``R = swing @ twist`` with ``twist`` a rotation about ``axis``.

    The twist is the normalized projection of the rotation quaternion onto
    ``axis``. When ``R`` sends ``axis`` to its antipode the projection
    vanishes; the result then takes twist = identity and swing = a half turn
    about the component of the rotation axis orthogonal to ``axis`` (falling
    back towards world x), and ``degenerate`` is set. With ``strict=True``
    that case raises :class:`DegenerateSwing` instead.

    Works on a single matrix or a (..., 3, 3) stack.
    """
    R = np.asarray(R, dtype=float)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    q = matrix_to_quat(R)
    w = q[..., 0]
    d = q[..., 1:] @ a
    n = np.hypot(w, d)
    degenerate = n < eps
    if strict and np.any(degenerate):
        raise DegenerateSwing("rotation maps the twist axis to its antipode")
    safe = np.where(degenerate, 1.0, n)
    tq = np.concatenate([(w / safe)[..., None], (d / safe)[..., None] * a], axis=-1)
    tq = np.where(degenerate[..., None], np.array([1.0, 0.0, 0.0, 0.0]), tq)
    sq = quat_mul(q, quat_conj(tq))
    swing = quat_to_matrix(sq)
    twist = quat_to_matrix(tq)
    if np.any(degenerate):
        u = q[..., 1:]
        u_perp = u - (u @ a)[..., None] * a
        fallback = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        fallback = fallback - (fallback @ a) * a
        norm = np.linalg.norm(u_perp, axis=-1, keepdims=True)
        u_perp = np.where(norm > 1e-12, u_perp / np.where(norm > 0, norm, 1.0), fallback / np.linalg.norm(fallback))
        half_turn = axis_angle(u_perp, np.full(u_perp.shape[:-1], np.pi))
        swing = np.where(degenerate[..., None, None], half_turn, swing)
        twist = np.where(degenerate[..., None, None], np.swapaxes(half_turn, -1, -2) @ R, twist)
    if R.ndim == 2:
        return SwingTwist(swing, twist, bool(degenerate))
    return SwingTwist(swing, twist, degenerate)


def write_profile_csv(profile: MomentumProfile, path) -> None:
    """One row per frame: t, LMo_x..z, AMo_x..z, TF_x..z."""
    cols = ["t"] + [f"{k}_{ax}" for k in ("LMo", "AMo", "TF") for ax in "xyz"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for t in range(profile.T):
            row = [t / profile.fps, *profile.linear[t], *profile.angular[t], *profile.transfer[t]]
            w.writerow([repr(float(v)) for v in row])


def read_profile_csv(path, fps: float | None = None) -> MomentumProfile:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if fps is None:
        fps = 1.0 / (data[1, 0] - data[0, 0]) if len(data) > 1 else 1.0
    return MomentumProfile(data[:, 1:4], data[:, 4:7], data[:, 7:10], fps)
