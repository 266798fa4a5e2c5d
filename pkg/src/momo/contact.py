"""Ground-contact rule shared by the foot-sliding losses and metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .body_model import BodySpec
from .motion import time_derivative


@dataclass(frozen=True)
class ContactParams:
    """A foot part is in contact when its centroid is less than ``height_m``
    above the ground and its vertical speed is below ``vel_ms``."""

    height_m: float = 0.03
    vel_ms: float = 0.10
    ground_height: float = 0.0
    foot_parts: tuple[int, ...] | None = None


def ground_basis(up) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal in-plane axes for the ground plane normal to ``up``."""
    up = np.asarray(up, dtype=float)
    ref = np.array([1.0, 0.0, 0.0]) if abs(up[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = ref - (ref @ up) * up
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(up, e1)


def heights(points: np.ndarray, body: BodySpec, ground_height: float = 0.0) -> np.ndarray:
    return points @ body.up - ground_height


def horizontal(vectors: np.ndarray, body: BodySpec) -> np.ndarray:
    up = body.up
    return vectors - (vectors @ up)[..., None] * up


def foot_parts(body: BodySpec, world: np.ndarray, params: ContactParams | None = None) -> tuple[int, ...]:
    """Configured foot parts, else the two leaf parts lowest on average."""
    if params is not None and params.foot_parts is not None:
        return tuple(params.foot_parts)
    leaves = body.leaves()
    h = heights(world, body).mean(axis=0)
    ranked = sorted(leaves, key=lambda i: (h[i], i))
    return tuple(sorted(ranked[:2]))


def detect_contacts(world: np.ndarray, body: BodySpec, fps: float, feet, params: ContactParams) -> np.ndarray:
    """(T, F) boolean contact mask for the given foot parts."""
    feet = list(feet)
    h = heights(world[:, feet], body, params.ground_height)
    vz = time_derivative(world[:, feet] @ body.up, fps)
    return (h < params.height_m) & (np.abs(vz) < params.vel_ms)
