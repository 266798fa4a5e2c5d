"""Motion sequences, part-centroid kinematics and finite-difference derivatives."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .body_model import BodySpec
from .errors import DataError, PartCountMismatch, TooShort
from .rotations import check_rotations, quat_to_matrix, vee

ROTATION_TOL = 1e-6


@dataclass(eq=False)
class MotionSequence:
    """Time-indexed rigid-part motion.

    Attributes:
        fps: sampling rate in Hz.
        root_rotation: (T, 3, 3) global body rotation.
        root_translation: (T, 3) global translation in meters.
        part_rotations: (T, P, 3, 3) absolute world-frame part rotations.
        metadata: free-form extras (synthetic generators store analytic
            momentum tracks here); not written to motion files.
    """

    fps: float
    root_rotation: np.ndarray
    root_translation: np.ndarray
    part_rotations: np.ndarray
    metadata: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.fps = float(self.fps)
        self.root_rotation = np.asarray(self.root_rotation, dtype=float)
        self.root_translation = np.asarray(self.root_translation, dtype=float)
        self.part_rotations = np.asarray(self.part_rotations, dtype=float)
        if not self.fps > 0:
            raise DataError(f"fps must be positive, got {self.fps}")
        T = len(self.root_translation)
        if T < 2:
            raise TooShort(f"motion needs at least 2 frames, got {T}")
        if self.root_rotation.shape != (T, 3, 3) or self.root_translation.shape != (T, 3):
            raise DataError("root_rotation must be (T,3,3) and root_translation (T,3)")
        if self.part_rotations.ndim != 4 or self.part_rotations.shape[0] != T or self.part_rotations.shape[2:] != (3, 3):
            raise DataError("part_rotations must be (T,P,3,3)")
        if not np.all(np.isfinite(self.root_translation)):
            raise DataError("root_translation contains non-finite values")
        check_rotations(self.root_rotation, ROTATION_TOL, "root rotation")
        check_rotations(self.part_rotations, ROTATION_TOL, "part rotation")

    @property
    def T(self) -> int:
        return len(self.root_translation)

    @property
    def P(self) -> int:
        return self.part_rotations.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.T) / self.fps

    def replace(self, **changes) -> "MotionSequence":
        kw = dict(
            fps=self.fps,
            root_rotation=self.root_rotation,
            root_translation=self.root_translation,
            part_rotations=self.part_rotations,
            metadata=dict(self.metadata),
            name=self.name,
        )
        kw.update(changes)
        return MotionSequence(**kw)


@dataclass(eq=False)
class CentroidTracks:
    world: np.ndarray  # (T, P, 3)
    body: np.ndarray  # (T, P, 3), relative to the CoM, world-aligned axes
    com: np.ndarray  # (T, 3)


def time_derivative(track, fps: float) -> np.ndarray:
    """First time derivative along axis 0.

    Interior frames use central differences. Each end uses the central
    difference with a ghost sample extrapolated by the polynomial through
    the nearest samples (cubic when T >= 4, quadratic when T == 3, linear
    when T == 2). The resulting one-sided stencils are second-order
    accurate and reproduce the central-difference value exactly for cubic
    tracks, so repeated application differentiates polynomials of degree
    <= 3 consistently at every frame.
    """
    x = np.asarray(track, dtype=float)
    T = x.shape[0]
    if T < 2:
        raise TooShort(f"derivative needs at least 2 frames, got {T}")
    h2 = 2.0 / fps
    out = np.empty_like(x)
    if T == 2:
        d = (x[1] - x[0]) * fps
        out[0] = d
        out[1] = d
        return out
    out[1:-1] = (x[2:] - x[:-2]) / h2
    # end stencils written on first differences so constant tracks give exactly 0
    d = np.diff(x[:4], axis=0)
    e = np.diff(x[-4:][::-1], axis=0)  # x[-1] - x[-2], ...
    if T == 3:
        out[0] = (3.0 * d[0] - d[1]) / h2  # -3 x0 + 4 x1 - x2
        out[-1] = -(3.0 * e[0] - e[1]) / h2
    else:
        out[0] = (4.0 * d[0] - 3.0 * d[1] + d[2]) / h2  # -4 x0 + 7 x1 - 4 x2 + x3
        out[-1] = -(4.0 * e[0] - 3.0 * e[1] + e[2]) / h2
    return out


def angular_velocity(rotations, fps: float) -> np.ndarray:
    """World-frame angular velocity from a (T, ..., 3, 3) rotation track.

    Uses the axial vector of ``dR/dt R^T`` with ``dR/dt`` from
    :func:`time_derivative`.
    """
    R = np.asarray(rotations, dtype=float)
    dR = time_derivative(R, fps)
    return vee(dR @ np.swapaxes(R, -1, -2))


def _joint_positions(seq: MotionSequence, body: BodySpec) -> np.ndarray:
    J = body.joints
    theta = seq.part_rotations
    pos = np.empty((seq.T, body.P, 3))
    for i in body.order:
        p = body.parents[i]
        if p < 0:
            pos[:, i] = seq.root_translation + J[i]
        else:
            pos[:, i] = pos[:, p] + theta[:, p] @ (J[i] - J[p])
    return pos


def _check_parts(seq: MotionSequence, body: BodySpec) -> None:
    if seq.P != body.P:
        raise PartCountMismatch(f"motion has {seq.P} parts, body has {body.P}")


def part_centroids(seq: MotionSequence, body: BodySpec) -> CentroidTracks:
    """World and CoM-relative part centroids.

    Joint pivots are chained down the kinematic tree with the parents'
    world rotations; each centroid then hangs off its own pivot:
    ``c_i = p_i + theta_i (c_i0 - j_i)``, with ``p_root = T + j_root``.
    """
    _check_parts(seq, body)
    pos = _joint_positions(seq, body)
    offs = body.centroids - body.joints
    world = pos + np.einsum("tpij,pj->tpi", seq.part_rotations, offs)
    m = body.masses
    com = np.einsum("p,tpi->ti", m, world) / m.sum()
    return CentroidTracks(world=world, body=world - com[:, None, :], com=com)


def pose_points(seq: MotionSequence, body: BodySpec) -> np.ndarray:
    """Rigidly pose every part's canonical point set; (T, N, 3).

    Parts without a point set contribute their centroid.
    """
    _check_parts(seq, body)
    pos = _joint_positions(seq, body)
    chunks = []
    for i, part in enumerate(body.parts):
        pts = part.points if part.points is not None else part.centroid[None]
        chunks.append(pos[:, i, None, :] + np.einsum("tij,nj->tni", seq.part_rotations[:, i], pts - part.joint))
    return np.concatenate(chunks, axis=1)


# -- file format ----------------------------------------------------------------


def motion_to_dict(seq: MotionSequence) -> dict:
    frames = []
    for t in range(seq.T):
        frames.append(
            {
                "R": seq.root_rotation[t].reshape(9).tolist(),
                "T": seq.root_translation[t].tolist(),
                "theta": seq.part_rotations[t].reshape(seq.P, 9).tolist(),
            }
        )
    return {"fps": seq.fps, "parts": seq.P, "frames": frames}


def _frame_rotation(entry, what: str) -> np.ndarray:
    a = np.asarray(entry, dtype=float).reshape(-1)
    if a.size == 9:
        return a.reshape(3, 3)
    if a.size == 4:
        return quat_to_matrix(a)
    raise DataError(f"{what}: expected 9 matrix entries or a wxyz quaternion, got {a.size} values")


def motion_from_dict(d: dict, name: str = "") -> MotionSequence:
    """Parse the interchange format.

    Frames carry ``R`` (9 row-major entries) or ``q`` (wxyz) for the root,
    ``T`` (3) and ``theta`` with one entry per part, each either 9 matrix
    entries or a wxyz quaternion. A flat ``theta`` of length P*9 is accepted.
    """
    try:
        fps = float(d["fps"])
        P = int(d["parts"])
        root_R, root_T, parts = [], [], []
        for k, fr in enumerate(d["frames"]):
            if "R" in fr:
                root_R.append(_frame_rotation(fr["R"], f"frame {k} R"))
            else:
                root_R.append(_frame_rotation(fr["q"], f"frame {k} q"))
            root_T.append(np.asarray(fr["T"], dtype=float).reshape(3))
            theta = fr["theta"]
            if len(theta) == P * 9 and not isinstance(theta[0], (list, tuple)):
                parts.append(np.asarray(theta, dtype=float).reshape(P, 3, 3))
            else:
                if len(theta) != P:
                    raise DataError(f"frame {k}: {len(theta)} part rotations, expected {P}")
                parts.append(np.stack([_frame_rotation(e, f"frame {k} theta") for e in theta]))
    except (KeyError, TypeError, IndexError) as exc:
        raise DataError(f"malformed motion document: {exc!r}") from exc
    if not root_T:
        raise TooShort("motion has no frames")
    return MotionSequence(fps, np.stack(root_R), np.stack(root_T), np.stack(parts), name=name)


def motion_from_quaternions(fps, root_q, root_translation, part_q, name: str = "") -> MotionSequence:
    """Build a sequence from wxyz quaternions: root (T, 4), parts (T, P, 4)."""
    return MotionSequence(fps, quat_to_matrix(root_q), root_translation, quat_to_matrix(part_q), name=name)


def save_motion(seq: MotionSequence, path) -> None:
    Path(path).write_text(json.dumps(motion_to_dict(seq)))


def load_motion(path) -> MotionSequence:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    return motion_from_dict(doc, name=path.stem)
