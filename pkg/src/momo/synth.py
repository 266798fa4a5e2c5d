"""Synthetic motions with analytically known momentum, and corruption injectors.

Every generated sequence carries exact momentum tracks in
``seq.metadata``: ``"linear"`` and ``"angular"`` (both (T, 3)) and ``"com"``.
They come from closed-form part angular velocities and centroid velocities,
not from finite differences, so they serve as an independent oracle for the
momentum module.

Random draws use numpy's PCG64 generator (``np.random.Generator(PCG64(seed))``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .body_model import BodySpec
from .errors import BadConfig, ShapeMismatch
from .motion import MotionSequence, save_motion
from .rotations import axis_angle, rotvec_to_matrix, slerp_matrices

KINDS = ("static", "uniform_translation", "rigid_spin", "ballistic_tumble", "polynomial_root", "counter_rotating_pair")
GRAVITY = 9.81
# ballistic substep; 30, 60 and 120 fps all sample the same integration grid
BALLISTIC_DT = 1.0 / 3840.0


@dataclass
class SynthConfig:
    """Synthetic motion request.

    ``params`` by kind (all optional):
        static: ``translation`` (3,)
        uniform_translation: ``velocity`` (3,)
        polynomial_root: ``coeffs`` (4, 3), root path ``c0 + c1 t + c2 t^2 + c3 t^3``
        rigid_spin: ``omega`` (3,) rad/s, ``com_coeffs`` (4, 3) CoM path offset
        ballistic_tumble: ``omega0`` (3,), ``v0`` (3,), ``gravity`` m/s^2
        counter_rotating_pair: ``parts`` (2,), ``axis`` (3,), ``rate`` rad/s
    Missing spin rates and polynomial coefficients are drawn from ``seed``.
    """

    kind: str
    fps: float = 30.0
    duration_s: float = 2.0
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadConfig(f"unknown kind {self.kind!r}; choose from {', '.join(KINDS)}")
        if not self.fps > 0 or not math.isfinite(self.fps):
            raise BadConfig(f"fps must be positive, got {self.fps}")
        if self.frames < 4:
            raise BadConfig(f"fps * duration_s gives {self.frames} frames; need at least 4")

    @property
    def frames(self) -> int:
        return int(round(self.fps * self.duration_s))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def composite_inertia(body: BodySpec) -> tuple[np.ndarray, np.ndarray]:
    """Whole-body inertia about the canonical CoM, and that CoM."""
    m = body.masses
    c = body.centroids
    com = m @ c / m.sum()
    r = c - com
    I = body.inertias.sum(axis=0)
    I = I + np.einsum("p,pij->ij", m, np.einsum("pk,pk->p", r, r)[:, None, None] * np.eye(3) - np.einsum("pi,pj->pij", r, r))
    return I, com


def analytic_momentum(body: BodySpec, theta, omega, translation, translation_vel) -> dict:
    """Exact momentum from part rotations, their angular velocities and root velocity.

    Velocities are propagated down the kinematic tree with ``v = v_parent +
    omega_parent x d``. Returns a dict of (T, 3) arrays: ``linear``,
    ``angular``, ``com``, ``com_vel``.
    """
    T = len(translation)
    J = body.joints
    pos = np.empty((T, body.P, 3))
    vel = np.empty((T, body.P, 3))
    for i in body.order:
        p = body.parents[i]
        if p < 0:
            pos[:, i] = translation + J[i]
            vel[:, i] = translation_vel
        else:
            d = theta[:, p] @ (J[i] - J[p])
            pos[:, i] = pos[:, p] + d
            vel[:, i] = vel[:, p] + np.cross(omega[:, p], d)
    e = np.einsum("tpij,pj->tpi", theta, body.centroids - J)
    c = pos + e
    v = vel + np.cross(omega, e)
    m = body.masses
    M = m.sum()
    com = np.einsum("p,tpi->ti", m, c) / M
    vcom = np.einsum("p,tpi->ti", m, v) / M
    spin = np.einsum("tpij,pjk,tplk,tpl->ti", theta, body.inertias, theta, omega)
    orbital = np.einsum("p,tpi->ti", m, np.cross(c - com[:, None], v - vcom[:, None]))
    return {"linear": M * vcom, "angular": spin + orbital, "com": com, "com_vel": vcom}


def _poly(coeffs, t):
    c = np.asarray(coeffs, dtype=float).reshape(-1, 3)
    x = sum(c[k] * t[:, None] ** k for k in range(len(c)))
    dx = sum(k * c[k] * t[:, None] ** (k - 1) for k in range(1, len(c)))
    if len(c) == 1:
        dx = np.zeros_like(x)
    return x, dx


def _random_unit(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _torque_free(I, L, t_end_frames: int, fps: float) -> tuple[np.ndarray, np.ndarray]:
    """Rotation and world angular velocity of a free rigid body with R(0) = I."""
    n_sub = max(1, math.ceil((1.0 / fps) / BALLISTIC_DT - 1e-9))
    dt = 1.0 / (fps * n_sub)
    I_inv = np.linalg.inv(I)

    def omega_of(R):
        return R @ (I_inv @ (R.T @ L))

    R = np.eye(3)
    Rs = np.empty((t_end_frames, 3, 3))
    Ws = np.empty((t_end_frames, 3))
    for k in range(t_end_frames):
        Rs[k] = R
        Ws[k] = omega_of(R)
        for _ in range(n_sub):
            # exponential midpoint step
            R_half = rotvec_to_matrix(omega_of(R) * (0.5 * dt)) @ R
            R = rotvec_to_matrix(omega_of(R_half) * dt) @ R
    return Rs, Ws


def generate(cfg: SynthConfig, body: BodySpec) -> MotionSequence:
    """Deterministic synthetic sequence for ``cfg`` on ``body``."""
    rng = make_rng(cfg.seed)
    T = cfg.frames
    t = np.arange(T) / cfg.fps
    P = body.P
    prm = cfg.params
    theta = np.broadcast_to(np.eye(3), (T, P, 3, 3)).copy()
    omega = np.zeros((T, P, 3))
    com_path = None  # (position, velocity) the CoM must follow
    trans = np.zeros((T, 3))
    trans_vel = np.zeros((T, 3))
    I_c, com0 = composite_inertia(body)
    try:
        if cfg.kind == "static":
            trans[:] = np.asarray(prm.get("translation", (0.0, 0.0, 0.0)), dtype=float)
        elif cfg.kind == "uniform_translation":
            v = np.asarray(prm.get("velocity", (1.0, 0.0, 0.0)), dtype=float)
            trans = t[:, None] * v
            trans_vel[:] = v
        elif cfg.kind == "polynomial_root":
            coeffs = prm.get("coeffs")
            if coeffs is None:
                coeffs = rng.uniform(-0.5, 0.5, size=(4, 3))
            trans, trans_vel = _poly(coeffs, t)
        elif cfg.kind == "rigid_spin":
            w = prm.get("omega")
            w = _random_unit(rng) * rng.uniform(0.5, 2.0) if w is None else np.asarray(w, dtype=float)
            R = rotvec_to_matrix(t[:, None] * w)
            theta[:] = R[:, None]
            omega[:] = w
            pos, vel = _poly(prm.get("com_coeffs", np.zeros((4, 3))), t)
            com_path = (com0 + pos, vel)
        elif cfg.kind == "ballistic_tumble":
            w0 = prm.get("omega0")
            w0 = _random_unit(rng) * rng.uniform(2.0, 4.0) if w0 is None else np.asarray(w0, dtype=float)
            g = float(prm.get("gravity", GRAVITY))
            v0 = np.asarray(prm.get("v0", (0.5, 0.0, 3.0)), dtype=float)
            R, W = _torque_free(I_c, I_c @ w0, T, cfg.fps)
            theta[:] = R[:, None]
            omega[:] = W[:, None]
            ga = body.gravity_axis
            com_path = (com0 + t[:, None] * v0 + 0.5 * g * t[:, None] ** 2 * ga, v0 + g * t[:, None] * ga)
        elif cfg.kind == "counter_rotating_pair":
            if P < 2:
                raise BadConfig("counter_rotating_pair needs at least two parts")
            a, b = (int(i) for i in prm.get("parts", (P - 2, P - 1)))
            axis = np.asarray(prm.get("axis", (0.0, 0.0, 1.0)), dtype=float)
            axis = axis / np.linalg.norm(axis)
            rate = float(prm.get("rate", 2.0))
            theta[:, a] = axis_angle(axis, rate * t)
            theta[:, b] = axis_angle(axis, -rate * t)
            omega[:, a] = rate * axis
            omega[:, b] = -rate * axis
            com_path = (np.broadcast_to(com0, (T, 3)).copy(), np.zeros((T, 3)))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, BadConfig):
            raise
        raise BadConfig(f"bad parameters for {cfg.kind}: {exc}") from exc

    if com_path is not None:
        free = analytic_momentum(body, theta, omega, np.zeros((T, 3)), np.zeros((T, 3)))
        trans = com_path[0] - free["com"]
        trans_vel = com_path[1] - free["com_vel"]
    exact = analytic_momentum(body, theta, omega, trans, trans_vel)
    return MotionSequence(
        fps=cfg.fps,
        root_rotation=theta[:, body.root].copy(),
        root_translation=trans,
        part_rotations=theta,
        metadata={"linear": exact["linear"], "angular": exact["angular"], "com": exact["com"], "kind": cfg.kind},
        name=f"{cfg.kind}_{cfg.seed}",
    )


def clean_corpus(n: int, body: BodySpec, seed: int = 0, fps: float = 30.0, duration_s: float = 2.0) -> list[MotionSequence]:
    """``n`` smooth rigid spins with random spin vectors and random cubic CoM paths."""
    rng = make_rng(seed)
    out = []
    for i in range(n):
        w = _random_unit(rng) * rng.uniform(0.5, 2.0)
        coeffs = np.zeros((4, 3))
        # scaled so the path stays within about a metre whatever the duration
        D = max(duration_s, 1.0)
        coeffs[1] = rng.uniform(-0.5, 0.5, size=3) / D
        coeffs[2] = rng.uniform(-0.3, 0.3, size=3) / D**2
        coeffs[3] = rng.uniform(-0.2, 0.2, size=3) / D**3
        cfg = SynthConfig("rigid_spin", fps, duration_s, {"omega": w, "com_coeffs": coeffs}, seed=seed)
        seq = generate(cfg, body)
        seq.name = f"clean_{i:04d}"
        out.append(seq)
    return out


def inject_noise(seq: MotionSequence, source: MotionSequence, alpha: float) -> MotionSequence:
    """Blend towards ``source``: SLERP on every rotation, linear on translations.

    ``alpha = 0`` returns ``seq``'s data, ``alpha = 1`` returns ``source``'s.
    """
    if seq.part_rotations.shape != source.part_rotations.shape:
        raise ShapeMismatch(f"shapes {seq.part_rotations.shape} and {source.part_rotations.shape} differ")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 0.0:
        return seq.replace(metadata={})
    if alpha == 1.0:
        return source.replace(metadata={}, name=seq.name)
    return seq.replace(
        root_rotation=slerp_matrices(seq.root_rotation, source.root_rotation, alpha),
        root_translation=(1.0 - alpha) * seq.root_translation + alpha * source.root_translation,
        part_rotations=slerp_matrices(seq.part_rotations, source.part_rotations, alpha),
        metadata={},
    )


def snap_frequency(frequency_hz: float, T: int, fps: float) -> float:
    """Nearest DCT bin frequency ``k fps / 2T``."""
    k = round(2.0 * T * frequency_hz / fps)
    return k * fps / (2.0 * T)


def inject_hf_corruption(seq: MotionSequence, amplitude: float, frequency_hz: float, direction=(1.0, 0.0, 0.0), snap: bool = True) -> MotionSequence:
    """Add ``amplitude cos(2 pi f (n + 1/2) / fps)`` metres to the root translation.

    With ``snap`` the frequency moves to the nearest DCT bin, so the
    perturbation is a single DCT basis vector of the translation track.
    """
    if amplitude == 0.0:
        return seq.replace(metadata={})
    f = snap_frequency(frequency_hz, seq.T, seq.fps) if snap else frequency_hz
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    n = np.arange(seq.T)
    wave = amplitude * np.cos(2.0 * np.pi * f * (n + 0.5) / seq.fps)
    return seq.replace(root_translation=seq.root_translation + wave[:, None] * d, metadata={})


def save_synthetic(seq: MotionSequence, path) -> Path:
    """Write the motion file and a ``<stem>.meta.json`` side-file with the exact momentum."""
    path = Path(path)
    save_motion(seq, path)
    meta = {
        k: (v.tolist() if isinstance(v, np.ndarray) else v)
        for k, v in seq.metadata.items()
    }
    side = path.with_name(path.stem + ".meta.json")
    side.write_text(json.dumps(meta))
    return side
