"""Acceptance gate: one test and one PASS/FAIL line per criterion."""

import time

import numpy as np

from momo.body_model import cuboid_mesh, icosphere, mesh_centroid, mesh_inertia, mesh_volume
from momo.cli import EXIT_OK, main
from momo.losses import build_loss_report, geman_mcclure, loss_spectrum
from momo.metrics import PlausibilityReport, composite_measure, rte
from momo.momentum import MomentumProfile, momentum_profile
from momo.motion import motion_from_dict, motion_to_dict
from momo.rotations import rotvec_to_matrix
from momo.spectrum import calibrate_detector, is_implausible, spectral_damping_check
from momo.synth import GRAVITY, KINDS, SynthConfig, clean_corpus, generate, inject_hf_corruption

from conftest import record


def test_1_mass_properties():
    t0 = time.perf_counter()
    cube = cuboid_mesh([-0.5] * 3, [0.5] * 3)
    vol_err = abs(mesh_volume(cube) - 1.0)
    c_err = np.abs(mesh_centroid(cube)).max()
    i_err = np.abs(mesh_inertia(cube, 1.0) - np.eye(3) / 6).max()
    sphere = icosphere(4, radius=1.0)
    I = mesh_inertia(sphere, 1.0)
    s_err = np.abs(np.diag(I) / 0.4 - 1).max()
    dt = time.perf_counter() - t0
    ok = vol_err <= 1e-12 and c_err <= 1e-12 and i_err <= 1e-12 and s_err < 0.01 and dt < 1.0
    record(1, "mass properties", ok, f"cube volume/centroid/inertia errors {vol_err:.1e}/{c_err:.1e}/{i_err:.1e} (tol 1e-12), sphere inertia off by {100 * s_err:.3f}% (tol 1%), {dt:.2f} s")
    assert ok


def test_2_conservation(body):
    t0 = time.perf_counter()
    rates = np.array([30.0, 60.0, 120.0])
    devs = []
    for fps in rates:
        seq = generate(SynthConfig("ballistic_tumble", fps, 2.0, seed=0), body)
        L = momentum_profile(seq, body).angular
        devs.append(np.linalg.norm(L - L[0], axis=1).max())
    slope = np.polyfit(np.log(rates), np.log(devs), 1)[0]
    seq = generate(SynthConfig("ballistic_tumble", 120.0, 2.0, seed=0), body)
    lm_up = momentum_profile(seq, body).linear @ body.up
    g_slope = np.polyfit(seq.times, lm_up, 1)[0]
    expected = -GRAVITY * body.masses.sum()
    g_err = abs(g_slope / expected - 1)
    dt = time.perf_counter() - t0
    ok = abs(slope + 2) <= 0.5 and g_err < 0.01 and dt < 5.0
    record(2, "conservation", ok, f"AMo drift {devs[0]:.2e}/{devs[1]:.2e}/{devs[2]:.2e} at 30/60/120 fps, log-log slope {slope:.3f} (want -2 +-0.5), LMo slope {g_slope:.5f} vs {expected:.5f} ({100 * g_err:.2e}% off, tol 1%), {dt:.2f} s")
    assert ok


def test_3_spectral_damping():
    fps, T = 60.0, 256
    h = 1 / fps
    worst = 0.0
    for seed in range(20):
        rng = np.random.Generator(np.random.PCG64(seed))
        tau = rng.normal(size=(T, 3))
        L = np.zeros_like(tau)
        L[1:] = np.cumsum(0.5 * h * (tau[1:] + tau[:-1]), axis=0)
        chk = spectral_damping_check(tau, L, fps)
        sel = np.isfinite(chk.ratios) & (chk.frequencies < fps / 4)
        r = chk.ratios[sel]
        worst = max(worst, np.abs(r / r.mean() - 1).max())
    # with the physical frequency the trapezoid rule droops as (wh/2) cot(wh/2)
    droop = 1 - (np.pi / 4) / np.tan(np.pi / 4)
    ok = worst <= 0.10
    record(3, "spectral damping", ok, f"max per-bin deviation from mean {100 * worst:.2e}% over 20 seeds (tol 10%); physical-frequency variant would droop {100 * droop:.1f}% at half-Nyquist")
    assert ok


def test_4_parseval():
    rng = np.random.Generator(np.random.PCG64(4))
    worst = 0.0
    for _ in range(100):
        T = int(rng.integers(8, 200))
        a, b = (MomentumProfile(rng.normal(size=(T, 3)), rng.normal(size=(T, 3)), np.zeros((T, 3)), 30.0) for _ in range(2))
        worst = max(worst, abs(loss_spectrum(a, b) - np.linalg.norm(a.angular - b.angular)))
    ok = worst <= 1e-10
    record(4, "Parseval", ok, f"max |L_S - time-domain L2| {worst:.1e} over 100 pairs (tol 1e-10)")
    assert ok


def test_5_detector(body):
    t0 = time.perf_counter()
    calib = clean_corpus(500, body, seed=50)
    held = clean_corpus(500, body, seed=51)
    cal = calibrate_detector([momentum_profile(s, body) for s in calib], K=20.0)
    false_flags = sum(is_implausible(momentum_profile(s, body), cal).flag for s in held)
    amp = 10 * cal.mu_LM
    hits = sum(is_implausible(momentum_profile(inject_hf_corruption(s, amp, 10.0), body), cal).flag for s in held)
    dt = time.perf_counter() - t0
    fpr, tpr = false_flags / len(held), hits / len(held)
    ok = fpr < 0.05 and tpr >= 0.95 and dt < 30.0
    record(5, "detector", ok, f"k0={cal.k0}, mu_LM={cal.mu_LM:.3e}, false flags {100 * fpr:.1f}% (tol <5%), detection {100 * tpr:.1f}% at 10x mu_LM, 10 Hz (tol >=95%), {dt:.1f} s")
    assert ok


def test_6_geman_mcclure():
    errs = [abs(geman_mcclure(0.0)), abs(geman_mcclure(2.0) - 1.0), abs(geman_mcclure(10.0) - 200 / 104)]
    ok = max(errs) <= 1e-12
    record(6, "Geman-McClure", ok, f"rho(0), rho(2), rho(10) errors {errs[0]:.1e}, {errs[1]:.1e}, {errs[2]:.1e} (tol 1e-12)")
    assert ok


def test_7_rte_invariance():
    rng = np.random.Generator(np.random.PCG64(7))
    gt = np.cumsum(rng.normal(scale=0.05, size=(120, 3)), axis=0)
    worst = 0.0
    for _ in range(1000):
        R = rotvec_to_matrix(rng.normal(size=3) * np.pi)
        pred = gt @ R.T + rng.uniform(-100, 100, size=3)
        worst = max(worst, rte(pred, gt))
    a = PlausibilityReport(rte_percent=3.7, jitter=0.81, foot_sliding_mm=4.2)
    m = composite_measure(a, a)
    ok = worst < 1e-9 and m == 1.0
    record(7, "RTE invariance", ok, f"max RTE {worst:.1e}% over 1000 rigid transforms (tol 1e-9), m_AB(a, a) = {m!r}")
    assert ok


def test_8_determinism(tmp_path):
    corpus = tmp_path / "corpus"
    assert main(["synth", "-n", "100", "--duration", "10", "--seed", "8", "--out", str(corpus)]) == EXIT_OK
    times = {}
    for jobs in (1, 8):
        t0 = time.perf_counter()
        assert main(["analyze", str(corpus), "--jobs", str(jobs), "--out", str(tmp_path / f"j{jobs}")]) == EXIT_OK
        times[jobs] = time.perf_counter() - t0
    a, b = tmp_path / "j1", tmp_path / "j8"
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    same = files == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    same = same and all((a / f).read_bytes() == (b / f).read_bytes() for f in files)
    ok = same and max(times.values()) < 10.0
    record(8, "determinism", ok, f"{len(files)} output files {'bit-identical' if same else 'DIFFER'} at --jobs 1 vs 8; analyze {times[1]:.2f} s / {times[8]:.2f} s (tol 10 s)")
    assert ok


def test_9_identity_losses(body):
    rng = np.random.Generator(np.random.PCG64(9))
    worst, fields = 0.0, None
    for i in range(50):
        kind = KINDS[i % len(KINDS)]
        seq = generate(SynthConfig(kind, 30.0, float(rng.uniform(1, 3)), seed=int(rng.integers(2**31))), body)
        copy = motion_from_dict(motion_to_dict(seq))
        rep = build_loss_report(copy, seq, body).to_dict()
        rep.pop("weights")
        fields = len(rep)
        worst = max(worst, max(abs(v) for v in rep.values()))
    ok = worst <= 1e-12
    record(9, "identity losses", ok, f"max |loss| {worst:.1e} over {fields} LossReport fields and 50 sequences (tol 1e-12)")
    assert ok

