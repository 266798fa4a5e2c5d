"""Small rotation helpers shared by the kinematics and synthesis code.

Quaternions are stored scalar-first (w, x, y, z). Matrix <-> quaternion
conversion is delegated to :mod:`scipy.spatial.transform`, which uses
scalar-last ordering internally.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import NonOrthonormal


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix ``[v]x`` for (..., 3) input."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def vee(m: np.ndarray) -> np.ndarray:
    """Axial vector of the skew-symmetric part of (..., 3, 3) input."""
    m = np.asarray(m, dtype=float)
    return 0.5 * np.stack(
        [m[..., 2, 1] - m[..., 1, 2], m[..., 0, 2] - m[..., 2, 0], m[..., 1, 0] - m[..., 0, 1]],
        axis=-1,
    )


def rotvec_to_matrix(rotvec: np.ndarray) -> np.ndarray:
    """Rodrigues formula, vectorized over leading axes."""
    rotvec = np.asarray(rotvec, dtype=float)
    theta = np.linalg.norm(rotvec, axis=-1)[..., None, None]
    K = skew(rotvec)
    K2 = K @ K
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    a = np.where(small, 1.0 - theta**2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - theta**2 / 24.0, (1.0 - np.cos(safe)) / safe**2)
    return np.eye(3) + a * K + b * K2


def matrix_to_rotvec(R: np.ndarray) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    flat = R.reshape(-1, 3, 3)
    out = Rotation.from_matrix(flat).as_rotvec()
    return out.reshape(R.shape[:-2] + (3,))


def axis_angle(axis, angle) -> np.ndarray:
    """Rotation matrix for ``angle`` radians about ``axis`` (need not be unit)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    return rotvec_to_matrix(axis * np.asarray(angle, dtype=float)[..., None])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """(..., 4) wxyz quaternions to (..., 3, 3) matrices. Input is normalized."""
    q = np.asarray(q, dtype=float)
    flat = q.reshape(-1, 4)
    xyzw = np.concatenate([flat[:, 1:], flat[:, :1]], axis=1)
    out = Rotation.from_quat(xyzw).as_matrix()
    return out.reshape(q.shape[:-1] + (3, 3))


def matrix_to_quat(R: np.ndarray) -> np.ndarray:
    """(..., 3, 3) matrices to wxyz quaternions with w >= 0."""
    R = np.asarray(R, dtype=float)
    xyzw = Rotation.from_matrix(R.reshape(-1, 3, 3)).as_quat()
    q = np.concatenate([xyzw[:, 3:], xyzw[:, :3]], axis=1)
    q = np.where(q[:, :1] < 0, -q, q)
    return q.reshape(R.shape[:-2] + (4,))


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def geodesic_angle(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Angle (radians) of the relative rotation ``A^T B``."""
    rel = np.swapaxes(A, -1, -2) @ B
    # the axial-vector norm keeps precision for small angles where acos does not
    s = np.linalg.norm(vee(rel), axis=-1)
    c = 0.5 * (np.trace(rel, axis1=-2, axis2=-1) - 1.0)
    return np.arctan2(s, c)


def orthonormality_error(R: np.ndarray) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    eye = np.eye(3)
    return np.linalg.norm(R @ np.swapaxes(R, -1, -2) - eye, axis=(-2, -1))


def check_rotations(R: np.ndarray, tol: float, what: str = "rotation") -> None:
    """Raise NonOrthonormal unless every matrix is a proper rotation within ``tol``."""
    R = np.asarray(R, dtype=float)
    if R.size == 0:
        return
    err = orthonormality_error(R)
    if not np.all(np.isfinite(err)) or err.max() > tol:
        raise NonOrthonormal(f"{what} not orthonormal (max |RR^T - I| = {np.nanmax(err):.3g})")
    det = np.linalg.det(R)
    if np.any(np.abs(det - 1.0) > tol):
        raise NonOrthonormal(f"{what} has det != +1")


def slerp_matrices(A: np.ndarray, B: np.ndarray, alpha: float) -> np.ndarray:
    """Geodesic interpolation ``A exp(alpha log(A^T B))`` elementwise over leading axes."""
    rel = np.swapaxes(A, -1, -2) @ B
    return A @ rotvec_to_matrix(alpha * matrix_to_rotvec(rel))
