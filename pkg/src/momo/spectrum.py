"""Frequency-domain analysis of momentum tracks and the high-frequency detector."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
import scipy.fft

from .errors import BadCutoff, EmptyCorpus, HeterogeneousCorpus, LengthMismatch
from .momentum import MomentumProfile

DEFAULT_K = 20.0
DEFAULT_CUTOFF_HZ = 5.0


def dct(signal, axis: int = 0) -> np.ndarray:
    """Orthonormal DCT-II along ``axis``."""
    return scipy.fft.dct(np.asarray(signal, dtype=float), type=2, norm="ortho", axis=axis)


def idct(coeffs, axis: int = 0) -> np.ndarray:
    return scipy.fft.idct(np.asarray(coeffs, dtype=float), type=2, norm="ortho", axis=axis)


def dft(signal, axis: int = 0) -> np.ndarray:
    """Unitary DFT along ``axis``."""
    return np.fft.fft(np.asarray(signal, dtype=float), norm="ortho", axis=axis)


@dataclass(eq=False)
class Spectrum:
    coefficients: np.ndarray
    basis: str
    fps: float

    @property
    def frequencies(self) -> np.ndarray:
        T = len(self.coefficients)
        if self.basis == "dct":
            return np.arange(T) * self.fps / (2.0 * T)
        return np.fft.fftfreq(T, d=1.0 / self.fps)


def spectrum(signal, fps: float, basis: str = "dct") -> Spectrum:
    if basis == "dct":
        return Spectrum(dct(signal), "dct", fps)
    if basis == "dft":
        return Spectrum(dft(signal), "dft", fps)
    raise ValueError(f"unknown basis {basis!r}")


def default_k0(T: int, fps: float, cutoff_hz: float = DEFAULT_CUTOFF_HZ) -> int:
    """First 1-based DCT index whose bin frequency ``(k0 - 1) fps / 2T`` reaches ``cutoff_hz``."""
    k = math.ceil(2.0 * T * cutoff_hz / fps - 1e-9)
    return int(min(max(k, 0) + 1, T))


def high_freq_score(channel, k0: int) -> float:
    """Mean magnitude of DCT coefficients ``k0..T`` (1-based, inclusive).

    A (T, 3) vector track is reduced per bin by the Euclidean norm of the
    three coefficient channels.
    """
    x = np.asarray(channel, dtype=float)
    T = x.shape[0]
    if not 1 <= k0 <= T:
        raise BadCutoff(f"k0={k0} outside 1..{T}")
    c = dct(x)
    mags = np.abs(c) if c.ndim == 1 else np.linalg.norm(c.reshape(T, -1), axis=1)
    return float(mags[k0 - 1 :].mean())


@dataclass
class DetectorCalibration:
    mu_LM: float
    sigma_LM: float
    mu_AM: float
    sigma_AM: float
    K: float
    k0: int
    T: int
    fps: float

    def band(self, family: str) -> tuple[float, float]:
        mu, sigma = (self.mu_LM, self.sigma_LM) if family == "LM" else (self.mu_AM, self.sigma_AM)
        return mu - self.K * sigma, mu + self.K * sigma

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=1))

    @classmethod
    def load(cls, path) -> "DetectorCalibration":
        d = json.loads(Path(path).read_text())
        return cls(
            mu_LM=float(d["mu_LM"]), sigma_LM=float(d["sigma_LM"]),
            mu_AM=float(d["mu_AM"]), sigma_AM=float(d["sigma_AM"]),
            K=float(d["K"]), k0=int(d["k0"]), T=int(d["T"]), fps=float(d["fps"]),
        )


def scores(profile: MomentumProfile, k0: int) -> tuple[float, float]:
    return high_freq_score(profile.linear, k0), high_freq_score(profile.angular, k0)


def _mad(values: list[float]) -> float:
    med = statistics.median(values)
    return statistics.median(abs(v - med) for v in values)


def calibrate_detector(
    corpus: Iterable[MomentumProfile],
    K: float = DEFAULT_K,
    k0: int | None = None,
    cutoff_hz: float = DEFAULT_CUTOFF_HZ,
) -> DetectorCalibration:
    """Mean and median absolute deviation of H_LM and H_AM over a corpus.

    All profiles must share length and frame rate. ``k0`` defaults to
    :func:`default_k0` at ``cutoff_hz``. Sums use :func:`math.fsum`, so the
    result does not depend on corpus order.
    """
    corpus = list(corpus)
    if not corpus:
        raise EmptyCorpus("calibration corpus is empty")
    T, fps = corpus[0].T, corpus[0].fps
    for p in corpus:
        if p.T != T or p.fps != fps:
            raise HeterogeneousCorpus(f"profile {p.name!r} has T={p.T}, fps={p.fps}; expected T={T}, fps={fps}")
    if not K > 0:
        raise ValueError("K must be positive")
    if k0 is None:
        k0 = default_k0(T, fps, cutoff_hz)
    h = [scores(p, k0) for p in corpus]
    lm = [a for a, _ in h]
    am = [b for _, b in h]
    return DetectorCalibration(
        mu_LM=math.fsum(lm) / len(lm),
        sigma_LM=_mad(lm),
        mu_AM=math.fsum(am) / len(am),
        sigma_AM=_mad(am),
        K=float(K),
        k0=int(k0),
        T=T,
        fps=fps,
    )


class Detection(NamedTuple):
    flag: bool
    H_LM: float
    H_AM: float


def is_implausible(profile: MomentumProfile, cal: DetectorCalibration) -> Detection:
    """Flag a profile whose H_LM or H_AM leaves ``mu +- K sigma`` (bounds inclusive)."""
    if profile.T != cal.T:
        raise LengthMismatch(f"profile has {profile.T} frames, calibration expects {cal.T}")
    h_lm, h_am = scores(profile, cal.k0)
    lo, hi = cal.band("LM")
    out_lm = not (lo <= h_lm <= hi)
    lo, hi = cal.band("AM")
    out_am = not (lo <= h_am <= hi)
    return Detection(out_lm or out_am, h_lm, h_am)


class DampingCheck(NamedTuple):
    frequencies: np.ndarray  # Hz, bins 1..floor(T/2)
    ratios: np.ndarray  # NaN where the torque spectrum is empty


def spectral_damping_check(torque, momentum, fps: float, integrator: str = "trapezoid", detrend: bool = True) -> DampingCheck:
    """Per-bin ``|dL(w)| |w| / |tau(w)|`` for a momentum change and its torque.

    ``momentum`` is the change ``L(t) - L(0)`` (any constant offset is
    removed). With ``detrend`` the torque mean and the matching linear ramp
    in the momentum are removed so that the sampled pair is consistent with
    the DFT's periodic extension.

    ``integrator`` selects the frequency variable: ``"continuous"`` uses the
    physical angular frequency; ``"trapezoid"`` uses the frequency seen by
    the trapezoid rule, ``2 fps tan(w / 2 fps)``, under which a trapezoid
    integral gives ratio 1 in every bin. The Nyquist bin is reported as
    absent for the trapezoid variant.
    """
    tau = np.asarray(torque, dtype=float)
    L = np.asarray(momentum, dtype=float)
    if tau.shape != L.shape:
        raise LengthMismatch("torque and momentum shapes differ")
    if tau.ndim == 1:
        tau = tau[:, None]
        L = L[:, None]
    T = len(tau)
    L = L - L[0]
    if detrend:
        mean_tau = tau.mean(axis=0)
        tau = tau - mean_tau
        L = L - np.arange(T)[:, None] / fps * mean_tau
    tau_hat = np.linalg.norm(np.fft.fft(tau, axis=0), axis=1)
    L_hat = np.linalg.norm(np.fft.fft(L, axis=0), axis=1)
    k = np.arange(1, T // 2 + 1)
    omega = 2.0 * np.pi * k * fps / T
    if integrator == "trapezoid":
        with np.errstate(over="ignore"):
            w_eff = 2.0 * fps * np.tan(omega / (2.0 * fps))
        if T % 2 == 0:
            w_eff[-1] = np.nan
    elif integrator == "continuous":
        w_eff = omega
    else:
        raise ValueError(f"unknown integrator {integrator!r}")
    scale = tau_hat.max() if T else 0.0
    present = tau_hat[k] > 1e-12 * scale if scale > 0 else np.zeros(len(k), dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(present, L_hat[k] * np.abs(w_eff) / tau_hat[k], np.nan)
    return DampingCheck(k * fps / T, ratios)
