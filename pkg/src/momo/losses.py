"""Momentum-matching losses, ablation terms and the ZMP/CoP stability loss.

All losses are evaluated with numpy on complete sequences; nothing here is
differentiable code.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .body_model import BodySpec
from .contact import ContactParams, detect_contacts, foot_parts, ground_basis, heights, horizontal
from .errors import LengthMismatch, TooShort
from .momentum import MomentumProfile, angular_momentum, momentum_profile, swing_twist, transfer_term
from .motion import MotionSequence, part_centroids, time_derivative
from .rotations import geodesic_angle
from .spectrum import dct, dft

GRAVITY = 9.81
REDUCTIONS = ("stack", "frame_mean")


@dataclass(frozen=True)
class LossWeights:
    lambda_amo: float = 1.0
    lambda_lmo: float = 1.0
    lambda_s: float = 1.0

    def __post_init__(self):
        if min(self.lambda_amo, self.lambda_lmo, self.lambda_s) < 0:
            raise ValueError("loss weights must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "LossWeights":
        """``"a,b,c"`` or a preset name from :func:`weight_presets`."""
        presets = weight_presets()
        if text in presets:
            return presets[text]
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated weights, got {text!r}")
        return cls(*parts)


WEIGHT_SWEEP = (0.1, 1.0, 10.0)


def weight_presets() -> dict[str, LossWeights]:
    """Named presets: ``default`` plus one term at a time swept over 0.1/1/10.

    ``"amo@10"`` keeps only the AMo term, weighted 10.
    """
    out = {"default": LossWeights()}
    for v in WEIGHT_SWEEP:
        out[f"amo@{v:g}"] = LossWeights(v, 0.0, 0.0)
        out[f"lmo@{v:g}"] = LossWeights(0.0, v, 0.0)
        out[f"s@{v:g}"] = LossWeights(0.0, 0.0, v)
    return out


@dataclass
class LossReport:
    l_amo: float
    l_lmo: float
    l_s: float
    l_tmo: float
    l_sw: float
    l_tf: float
    l_jv: float
    l_jitter: float
    l_fs: float
    l_humos: float
    weights: LossWeights = field(default_factory=LossWeights)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LossReport":
        d = dict(d)
        w = LossWeights(**d.pop("weights", {}))
        return cls(**d, weights=w)


def _check_pair(pred: MomentumProfile, gt: MomentumProfile) -> None:
    if pred.T != gt.T:
        raise LengthMismatch(f"pred has {pred.T} frames, gt has {gt.T}")
    if pred.fps != gt.fps:
        raise LengthMismatch(f"pred fps {pred.fps} != gt fps {gt.fps}")


def _norm(track: np.ndarray, reduction: str = "stack") -> float:
    if reduction == "stack":
        return float(np.sqrt(np.sum(np.square(track))))
    if reduction == "frame_mean":
        return float(np.linalg.norm(track.reshape(len(track), -1), axis=1).mean())
    raise ValueError(f"unknown reduction {reduction!r}")


def momentum_deltas(pred: MomentumProfile, gt: MomentumProfile) -> tuple[np.ndarray, np.ndarray]:
    """(AMo delta, LMo delta), each (T, 3)."""
    _check_pair(pred, gt)
    return pred.angular - gt.angular, pred.linear - gt.linear


def _delta_loss(delta: np.ndarray, fps: float, reduction: str) -> float:
    return _norm(delta, reduction) + _norm(time_derivative(delta, fps), reduction)


def loss_amo(pred: MomentumProfile, gt: MomentumProfile, reduction: str = "stack") -> float:
    """Norm of the AMo difference track plus norm of its time derivative."""
    d_amo, _ = momentum_deltas(pred, gt)
    return _delta_loss(d_amo, pred.fps, reduction)


def loss_lmo(pred: MomentumProfile, gt: MomentumProfile, reduction: str = "stack") -> float:
    _, d_lmo = momentum_deltas(pred, gt)
    return _delta_loss(d_lmo, pred.fps, reduction)


def loss_spectrum(pred: MomentumProfile, gt: MomentumProfile, basis: str = "dct") -> float:
    """L2 distance between the AMo spectra (orthonormal transforms)."""
    _check_pair(pred, gt)
    if basis == "dct":
        diff = dct(pred.angular) - dct(gt.angular)
    elif basis == "dft":
        diff = dft(pred.angular) - dft(gt.angular)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return float(np.sqrt(np.sum(np.abs(diff) ** 2)))


def loss_tmo(
    pred: MomentumProfile,
    gt: MomentumProfile,
    weights: LossWeights = LossWeights(),
    reduction: str = "stack",
    basis: str = "dct",
) -> float:
    total = 0.0
    if weights.lambda_amo:
        total += weights.lambda_amo * loss_amo(pred, gt, reduction)
    if weights.lambda_lmo:
        total += weights.lambda_lmo * loss_lmo(pred, gt, reduction)
    if weights.lambda_s:
        total += weights.lambda_s * loss_spectrum(pred, gt, basis)
    return total


def _check_seqs(pred: MotionSequence, gt: MotionSequence) -> None:
    if pred.T != gt.T or pred.fps != gt.fps or pred.P != gt.P:
        raise LengthMismatch(
            f"pred (T={pred.T}, fps={pred.fps}, P={pred.P}) and gt (T={gt.T}, fps={gt.fps}, P={gt.P}) differ"
        )


def loss_transfer(pred_seq: MotionSequence, gt_seq: MotionSequence, body: BodySpec) -> float:
    """L2 distance between point-mass (orbital) angular momentum tracks."""
    _check_seqs(pred_seq, gt_seq)
    return _norm(transfer_term(pred_seq, body) - transfer_term(gt_seq, body))


def loss_swing(seq: MotionSequence, gravity_axis=(0.0, 0.0, -1.0)) -> float:
    """Total geodesic angle between swing parts of consecutive root rotations."""
    if seq.T < 2:
        raise TooShort("swing loss needs at least 2 frames")
    swing = swing_twist(seq.root_rotation, gravity_axis).swing
    return float(geodesic_angle(swing[:-1], swing[1:]).sum())


def loss_joint_velocity(pred_seq: MotionSequence, gt_seq: MotionSequence, body: BodySpec) -> float:
    """L2 distance between per-part centroid velocity tracks (parts unweighted)."""
    _check_seqs(pred_seq, gt_seq)
    vp = time_derivative(part_centroids(pred_seq, body).world, pred_seq.fps)
    vg = time_derivative(part_centroids(gt_seq, body).world, gt_seq.fps)
    return _norm(vp - vg)


def jerk(world: np.ndarray, fps: float) -> np.ndarray:
    return time_derivative(time_derivative(time_derivative(world, fps), fps), fps)


def loss_jitter(seq: MotionSequence, body: BodySpec) -> float:
    """Sum over frames of the part-averaged jerk magnitude (m/s^3)."""
    world = part_centroids(seq, body).world
    return float(np.linalg.norm(jerk(world, seq.fps), axis=-1).mean(axis=1).sum())


def loss_foot_sliding(
    seq: MotionSequence,
    body: BodySpec,
    contacts: np.ndarray | None = None,
    params: ContactParams = ContactParams(),
) -> float:
    """Summed horizontal foot displacement (m) over intervals with contact at both ends.

    ``contacts`` is a (T, F) mask over the foot parts; when omitted it is
    detected with :func:`momo.contact.detect_contacts`.
    """
    world = part_centroids(seq, body).world
    feet = foot_parts(body, world, params)
    if contacts is None:
        contacts = detect_contacts(world, body, seq.fps, feet, params)
    contacts = np.asarray(contacts, dtype=bool)
    step = np.linalg.norm(horizontal(np.diff(world[:, list(feet)], axis=0), body), axis=-1)
    both = contacts[1:] & contacts[:-1]
    return float(step[both].sum())


def geman_mcclure(x):
    """Robust penalty ``2 x^2 / (4 + x^2)``; bounded by 2."""
    x2 = np.square(np.asarray(x, dtype=float))
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(x2), 2.0, 2.0 * x2 / (4.0 + x2))
    return float(out) if out.ndim == 0 else out


def loss_humos(zmp, cop) -> float:
    """Mean Geman-McClure penalty of the planar ZMP-CoP distance.

    Frames where either point is undefined (NaN) are skipped; with no usable
    frame the loss is 0.
    """
    zmp = np.asarray(zmp, dtype=float)
    cop = np.asarray(cop, dtype=float)
    if zmp.shape != cop.shape:
        raise LengthMismatch(f"zmp {zmp.shape} and cop {cop.shape} differ")
    dist = np.linalg.norm(zmp - cop, axis=-1)
    ok = np.isfinite(dist)
    if not ok.any():
        return 0.0
    return float(np.mean(geman_mcclure(dist[ok])))


class ZmpCop(NamedTuple):
    zmp: np.ndarray  # (T, 2) ground-plane coordinates, NaN when undefined
    cop: np.ndarray  # (T, 2), NaN when no foot is in contact
    excluded: np.ndarray  # indices of frames lacking ZMP or CoP


def compute_zmp_cop(
    seq: MotionSequence,
    body: BodySpec,
    params: ContactParams = ContactParams(),
    g: float = GRAVITY,
) -> ZmpCop:
    """ZMP from CoM dynamics and CoP from grounded foot parts.

    ZMP = CoM ground projection - h a_h / (a_v + g) + (up x dL/dt) / (m (a_v + g)),
    with h the CoM height, a the CoM acceleration split into horizontal and
    vertical parts, and L the angular momentum about the CoM. Planar
    coordinates are taken on the basis from :func:`momo.contact.ground_basis`.
    """
    tracks = part_centroids(seq, body)
    up = body.up
    e1, e2 = ground_basis(up)
    m = float(body.masses.sum())
    com = tracks.com
    acc = time_derivative(time_derivative(com, seq.fps), seq.fps)
    dL = time_derivative(angular_momentum(seq, body, tracks), seq.fps)
    h = heights(com, body, params.ground_height)
    a_v = acc @ up
    denom = a_v + g
    ok = denom > 1e-9 * g
    safe = np.where(ok, denom, 1.0)
    a_h = acc - a_v[:, None] * up
    zmp3 = com - (h / safe)[:, None] * a_h + np.cross(up, dL) / (m * safe[:, None])
    zmp = np.stack([zmp3 @ e1, zmp3 @ e2], axis=1)
    zmp[~ok] = np.nan

    feet = list(foot_parts(body, tracks.world, params))
    contact = detect_contacts(tracks.world, body, seq.fps, feet, params)
    w = contact * body.masses[feet]
    wsum = w.sum(axis=1)
    foot_xy = np.stack([tracks.world[:, feet] @ e1, tracks.world[:, feet] @ e2], axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        cop = np.einsum("tf,tfi->ti", w, foot_xy) / wsum[:, None]
    cop[wsum == 0] = np.nan
    excluded = np.flatnonzero(~(np.isfinite(zmp).all(axis=1) & np.isfinite(cop).all(axis=1)))
    return ZmpCop(zmp, cop, excluded)


def build_loss_report(
    pred_seq: MotionSequence,
    gt_seq: MotionSequence,
    body: BodySpec,
    weights: LossWeights = LossWeights(),
    params: ContactParams = ContactParams(),
    reduction: str = "stack",
    mass: float = 1.0,
) -> LossReport:
    """Every loss term for one prediction / ground-truth pair.

    Pairwise terms compare the two sequences directly. Terms that score a
    single sequence (swing, jitter, foot sliding, HUMOS) are reported as the
    absolute difference between the prediction's and the ground truth's
    value, so an exact prediction scores zero on every field.
    """
    _check_seqs(pred_seq, gt_seq)
    pp = momentum_profile(pred_seq, body, mass)
    pg = momentum_profile(gt_seq, body, mass)
    l_amo = loss_amo(pp, pg, reduction)
    l_lmo = loss_lmo(pp, pg, reduction)
    l_s = loss_spectrum(pp, pg)
    l_tmo = weights.lambda_amo * l_amo + weights.lambda_lmo * l_lmo + weights.lambda_s * l_s
    axis = body.gravity_axis
    zc_p = compute_zmp_cop(pred_seq, body, params)
    zc_g = compute_zmp_cop(gt_seq, body, params)
    return LossReport(
        l_amo=l_amo,
        l_lmo=l_lmo,
        l_s=l_s,
        l_tmo=l_tmo,
        l_sw=abs(loss_swing(pred_seq, axis) - loss_swing(gt_seq, axis)),
        l_tf=_norm(pp.transfer - pg.transfer),
        l_jv=loss_joint_velocity(pred_seq, gt_seq, body),
        l_jitter=abs(loss_jitter(pred_seq, body) - loss_jitter(gt_seq, body)),
        l_fs=abs(loss_foot_sliding(pred_seq, body, params=params) - loss_foot_sliding(gt_seq, body, params=params)),
        l_humos=abs(loss_humos(zc_p.zmp, zc_p.cop) - loss_humos(zc_g.zmp, zc_g.cop)),
        weights=weights,
    )
