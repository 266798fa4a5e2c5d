"""Motion plausibility metrics: RTE, jitter, foot sliding, floating, floor penetration."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple

import numpy as np

from .body_model import BodySpec
from .contact import ContactParams, detect_contacts, foot_parts, heights, horizontal
from .errors import LengthMismatch, TooShort, UndefinedMeasure, ZeroDisplacement
from .losses import jerk
from .motion import MotionSequence, part_centroids, pose_points


@dataclass
class PlausibilityReport:
    rte_percent: float | None = None
    jitter: float = 0.0  # units of 10 m/s^3
    foot_sliding_mm: float = 0.0
    floating_cm: float = 0.0
    floor_penetration_cm: float = 0.0
    fs_percent: float = 0.0
    h_lm: float | None = None
    h_am: float | None = None
    hf_flag: bool = False
    no_contact: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PlausibilityReport":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    @staticmethod
    def columns() -> list[str]:
        return [f.name for f in fields(PlausibilityReport)]

    def row(self) -> list:
        return [getattr(self, c) for c in self.columns()]


def rigid_align(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Rotate and translate ``source`` (N, 3) onto ``target`` in the least-squares sense.

    Closed-form SVD solution without scaling; reflections are excluded.
    """
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    H = (source - mu_s).T @ (target - mu_t)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    D = np.diag([1.0, 1.0, d if d != 0 else 1.0])
    R = Vt.T @ D @ U.T
    return (source - mu_s) @ R.T + mu_t


def rte(pred_root, gt_root, normalizer: str = "path") -> float:
    """Root translation error in percent after rigid alignment of pred onto gt.

    Mean per-frame error over the ground-truth displacement: the travelled
    path length by default, or the start-to-end distance with
    ``normalizer="net"``.
    """
    pred = np.asarray(pred_root, dtype=float)
    gt = np.asarray(gt_root, dtype=float)
    if pred.shape != gt.shape:
        raise LengthMismatch(f"pred {pred.shape} and gt {gt.shape} differ")
    if normalizer == "path":
        disp = float(np.linalg.norm(np.diff(gt, axis=0), axis=1).sum())
    elif normalizer == "net":
        disp = float(np.linalg.norm(gt[-1] - gt[0]))
    else:
        raise ValueError(f"unknown normalizer {normalizer!r}")
    if disp < 1e-6:
        raise ZeroDisplacement(f"ground-truth displacement {disp:.3g} m is too small")
    if np.array_equal(pred, gt):
        return 0.0  # already aligned; skip SVD round-off
    aligned = rigid_align(pred, gt)
    return 100.0 * float(np.linalg.norm(aligned - gt, axis=1).mean()) / disp


def jitter(seq: MotionSequence, body: BodySpec, root_only: bool = False) -> float:
    """Mean jerk magnitude of part centroids (or of the root translation), in 10 m/s^3."""
    if seq.T < 4:
        raise TooShort("jitter needs at least 4 frames")
    if root_only:
        x = seq.root_translation[:, None, :]
    else:
        x = part_centroids(seq, body).world
    return float(np.linalg.norm(jerk(x, seq.fps), axis=-1).mean()) / 10.0


class FootSliding(NamedTuple):
    mm: float
    contact_frames: int

    @property
    def no_contact(self) -> bool:
        return self.contact_frames == 0


def foot_sliding(seq: MotionSequence, body: BodySpec, params: ContactParams = ContactParams()) -> FootSliding:
    """Mean horizontal displacement (mm) of a foot over frame intervals where it stays in contact."""
    world = part_centroids(seq, body).world
    feet = list(foot_parts(body, world, params))
    contact = detect_contacts(world, body, seq.fps, feet, params)
    both = contact[1:] & contact[:-1]
    n = int(both.sum())
    if n == 0:
        return FootSliding(0.0, 0)
    step = np.linalg.norm(horizontal(np.diff(world[:, feet], axis=0), body), axis=-1)
    return FootSliding(1000.0 * float(step[both].mean()), n)


def _lowest(vertices, up, ground_height) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    return (v @ np.asarray(up, dtype=float)).min(axis=1) - ground_height


def floating(vertices, ground_height: float = 0.0, up=(0.0, 0.0, 1.0)) -> float:
    """Mean height (cm) of the lowest vertex when it is above the ground."""
    low = _lowest(vertices, up, ground_height)
    return 100.0 * float(np.maximum(low, 0.0).mean())


def floor_penetration(vertices, ground_height: float = 0.0, up=(0.0, 0.0, 1.0)) -> float:
    """Mean depth (cm) of the lowest vertex when it is below the ground."""
    low = _lowest(vertices, up, ground_height)
    return 100.0 * float(np.maximum(-low, 0.0).mean())


def fs_percent(seq: MotionSequence, body: BodySpec, params: ContactParams = ContactParams(), vel_threshold: float = 0.10) -> float:
    """Percentage of adjacent-frame pairs whose grounded feet slide faster than ``vel_threshold`` m/s on average.

    A foot counts as grounded here by height alone, at both frames.
    """
    world = part_centroids(seq, body).world
    feet = list(foot_parts(body, world, params))
    low = heights(world[:, feet], body, params.ground_height) < params.height_m
    both = low[1:] & low[:-1]
    speed = np.linalg.norm(horizontal(np.diff(world[:, feet], axis=0), body), axis=-1) * seq.fps
    sliding = 0
    for t in range(seq.T - 1):
        if both[t].any() and speed[t][both[t]].mean() > vel_threshold:
            sliding += 1
    return 100.0 * sliding / (seq.T - 1)


def composite_measure(a: PlausibilityReport, b: PlausibilityReport) -> float:
    """Product of RTE, jitter and foot-sliding ratios of A over B."""
    for name in ("rte_percent", "jitter", "foot_sliding_mm"):
        for label, rep in (("A", a), ("B", b)):
            v = getattr(rep, name)
            if v is None or not math.isfinite(v):
                raise UndefinedMeasure(f"{name} of {label} is undefined")
        if not getattr(b, name) > 0:
            raise UndefinedMeasure(f"{name} of B is zero")
    return (a.rte_percent / b.rte_percent) * (a.jitter / b.jitter) * (a.foot_sliding_mm / b.foot_sliding_mm)


def plausibility_report(
    seq: MotionSequence,
    body: BodySpec,
    params: ContactParams = ContactParams(),
    gt: MotionSequence | None = None,
    root_only_jitter: bool = False,
) -> PlausibilityReport:
    """All single-sequence metrics, plus RTE when ground truth is given."""
    fs = foot_sliding(seq, body, params)
    verts = pose_points(seq, body)
    up = body.up
    return PlausibilityReport(
        rte_percent=None if gt is None else rte(seq.root_translation, gt.root_translation),
        jitter=jitter(seq, body, root_only_jitter),
        foot_sliding_mm=fs.mm,
        floating_cm=floating(verts, params.ground_height, up),
        floor_penetration_cm=floor_penetration(verts, params.ground_height, up),
        fs_percent=fs_percent(seq, body, params),
        no_contact=fs.no_contact,
    )


def aggregate(reports: list[PlausibilityReport]) -> dict[str, dict[str, float | None]]:
    """Corpus mean and median of each numeric field."""
    out: dict[str, dict[str, float | None]] = {"mean": {}, "median": {}}
    for name in PlausibilityReport.columns():
        vals = [getattr(r, name) for r in reports]
        vals = [float(v) for v in vals if v is not None]
        if not vals:
            out["mean"][name] = out["median"][name] = None
            continue
        out["mean"][name] = math.fsum(vals) / len(vals)
        out["median"][name] = float(np.median(vals))
    return out
