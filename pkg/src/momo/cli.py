"""Command-line front end: ``momo analyze|compare|calibrate|detect|synth``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np

from .body_model import BodySpec, default_body, load_body_spec
from .contact import ContactParams
from .errors import DataError, MomoError, UndefinedMeasure, ZeroDisplacement
from .losses import REDUCTIONS, LossReport, LossWeights, build_loss_report
from .metrics import PlausibilityReport, aggregate, composite_measure, plausibility_report, rte
from .momentum import momentum_profile, write_profile_csv
from .motion import load_motion
from .spectrum import DEFAULT_CUTOFF_HZ, DEFAULT_K, DetectorCalibration, calibrate_detector, default_k0, is_implausible, scores
from .synth import KINDS, SynthConfig, clean_corpus, generate, inject_hf_corruption, save_synthetic

log = logging.getLogger("momo")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DEFAULTS = {
    "body": "default",
    "out": "momo_out",
    "weights": "1,1,1",
    "k0_hz": DEFAULT_CUTOFF_HZ,
    "K": DEFAULT_K,
    "contact_height_m": 0.03,
    "contact_vel_ms": 0.10,
    "jobs": 1,
    "seed": 0,
    "mass": 1.0,
    "reduction": "stack",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Keys use flag names."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so config-file values can fill in only what the flags left unset
    common.add_argument("--config", help="flat key=value file; command-line flags win")
    common.add_argument("--body", default=None, help="body spec JSON, or 'default'")
    common.add_argument("--out", default=None, help="output directory (or file for calibrate)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--k0-hz", dest="k0_hz", type=float, default=None, help="detector cutoff frequency")
    common.add_argument("--K", dest="K", type=float, default=None, help="detector band half-width in MADs")
    common.add_argument("--contact-height-m", dest="contact_height_m", type=float, default=None)
    common.add_argument("--contact-vel-ms", dest="contact_vel_ms", type=float, default=None)
    common.add_argument("--weights", default=None, help="lambda_AMo,lambda_LMo,lambda_S or a preset name")
    common.add_argument("--mass", type=float, default=None, help="subject mass in kg; 1 reports normalized momentum")
    common.add_argument("--reduction", choices=REDUCTIONS, default=None, help="loss norm convention")

    p = _Parser(prog="momo", description="Momentum-based motion analysis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common], help="momentum profiles and plausibility metrics")
    a.add_argument("inputs", nargs="+", help="motion files or directories")
    a.add_argument("--calibration", help="detector calibration JSON; enables the hf flag")

    c = sub.add_parser("compare", parents=[common], help="losses and RTE of predictions against ground truth")
    c.add_argument("pred_dir")
    c.add_argument("gt_dir")
    c.add_argument("--baseline", help="compare summary JSON of the baseline method B")

    k = sub.add_parser("calibrate", parents=[common], help="fit the high-frequency detector")
    k.add_argument("inputs", nargs="+")

    d = sub.add_parser("detect", parents=[common], help="flag implausible sequences")
    d.add_argument("inputs", nargs="+")
    d.add_argument("--calibration", required=True)

    s = sub.add_parser("synth", parents=[common], help="write synthetic motion files")
    s.add_argument("--kind", choices=KINDS + ("clean",), default="clean")
    s.add_argument("-n", "--count", type=int, default=1)
    s.add_argument("--fps", type=float, default=30.0)
    s.add_argument("--duration", type=float, default=2.0, help="seconds")
    s.add_argument("--params", default="{}", help="JSON object of kind parameters")
    s.add_argument("--corrupt-amplitude", type=float, default=0.0, help="metres of root oscillation")
    s.add_argument("--corrupt-hz", type=float, default=10.0)
    return p


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from ``--config`` then from built-in defaults."""
    cfg = read_config(args.config) if args.config else {}
    for key in cfg:
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {key!r}")
    for key, default in DEFAULTS.items():
        if getattr(args, key, None) is None:
            value = cfg.get(key, default)
            setattr(args, key, type(default)(value) if not isinstance(default, str) else value)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if not args.mass > 0:
        raise UsageError("--mass must be positive")
    if args.reduction not in REDUCTIONS:
        raise UsageError(f"--reduction must be one of {', '.join(REDUCTIONS)}")
    return args


def load_body(spec: str) -> BodySpec:
    return default_body() if spec == "default" else load_body_spec(spec)


def find_sequences(inputs) -> list[Path]:
    """Motion files under ``inputs``, sorted by sequence id (file stem)."""
    files = []
    for item in inputs:
        path = Path(item)
        if path.is_dir():
            files += [f for f in path.glob("*.json") if not f.name.endswith(".meta.json")]
        elif path.exists():
            files.append(path)
        else:
            raise DataError(f"{path}: no such file or directory")
    files = sorted(set(files), key=lambda f: (f.stem, str(f)))
    if not files:
        raise DataError("no sequences found")
    return files


def _pool_map(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _contact(args) -> ContactParams:
    return ContactParams(height_m=args.contact_height_m, vel_ms=args.contact_vel_ms)


def _fmt(v):
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


# -- analyze ----------------------------------------------------------------------


def _analyze_one(path: Path, body: BodySpec, params: ContactParams, k0_hz: float, cal, out: Path, mass: float):
    try:
        seq = load_motion(path)
        prof = momentum_profile(seq, body, mass)
        rep = plausibility_report(seq, body, params)
        if cal is not None:
            det = is_implausible(prof, cal)
            rep.h_lm, rep.h_am, rep.hf_flag = det.H_LM, det.H_AM, det.flag
        else:
            rep.h_lm, rep.h_am = scores(prof, default_k0(seq.T, seq.fps, k0_hz))
        write_profile_csv(prof, out / "momentum" / f"{path.stem}.csv")
        (out / "reports" / f"{path.stem}.json").write_text(json.dumps(rep.to_dict(), indent=1))
        norms = {
            "LMo": np.linalg.norm(prof.linear, axis=1),
            "AMo": np.linalg.norm(prof.angular, axis=1),
            "TF": np.linalg.norm(prof.transfer, axis=1),
        }
        tidy = [(path.stem, t, k, float(v[t])) for t in range(seq.T) for k, v in norms.items()]
        return path.stem, rep, tidy, None
    except MomoError as exc:
        return path.stem, None, None, f"{path}: {exc}"


def cmd_analyze(args) -> int:
    body = load_body(args.body)
    files = find_sequences(args.inputs)
    cal = DetectorCalibration.load(args.calibration) if args.calibration else None
    out = Path(args.out)
    (out / "reports").mkdir(parents=True, exist_ok=True)
    (out / "momentum").mkdir(parents=True, exist_ok=True)
    fn = partial(_analyze_one, body=body, params=_contact(args), k0_hz=args.k0_hz, cal=cal, out=out, mass=args.mass)
    results = sorted(_pool_map(fn, files, args.jobs), key=lambda r: r[0])
    errors = [r[3] for r in results if r[3]]
    ok = [r for r in results if not r[3]]
    cols = PlausibilityReport.columns()
    with open(out / "aggregate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sequence", *cols])
        for sid, rep, _, _ in ok:
            w.writerow([sid, *map(_fmt, rep.row())])
        if ok:
            mean = aggregate([r[1] for r in ok])["mean"]
            w.writerow(["mean", *(_fmt(mean[c]) for c in cols)])
    with open(out / "plot_data.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sequence", "frame", "quantity", "value"])
        for _, _, tidy, _ in ok:
            w.writerows((s, f, q, repr(v)) for s, f, q, v in tidy)
    summary = {"sequences": len(ok), "errors": errors, "aggregate": aggregate([r[1] for r in ok]) if ok else None}
    (out / "summary.json").write_text(json.dumps(summary, indent=1))
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    print(f"analyzed {len(ok)} sequence(s), {len(errors)} error(s); reports in {out}")
    return EXIT_OK if not errors else EXIT_DATA


# -- compare ----------------------------------------------------------------------


def _compare_one(pair, body, weights, params, reduction, mass):
    sid, pred_path, gt_path = pair
    try:
        pred = load_motion(pred_path)
        gt = load_motion(gt_path)
        loss = build_loss_report(pred, gt, body, weights, params, reduction, mass)
        rep = plausibility_report(pred, body, params)
        note = None
        try:
            rep.rte_percent = rte(pred.root_translation, gt.root_translation)
        except ZeroDisplacement as exc:
            note = str(exc)
        return sid, loss, rep, note, None
    except MomoError as exc:
        return sid, None, None, None, f"{pred_path}: {exc}"


def cmd_compare(args) -> int:
    body = load_body(args.body)
    try:
        weights = LossWeights.parse(args.weights)
    except ValueError as exc:
        raise UsageError(f"--weights: {exc}") from exc
    preds = find_sequences([args.pred_dir])
    gt_dir = Path(args.gt_dir)
    pairs, missing = [], []
    for p in preds:
        g = gt_dir / p.name
        if g.exists():
            pairs.append((p.stem, p, g))
        else:
            missing.append(p.stem)
    out = Path(args.out)
    (out / "losses").mkdir(parents=True, exist_ok=True)
    fn = partial(_compare_one, body=body, weights=weights, params=_contact(args), reduction=args.reduction, mass=args.mass)
    results = sorted(_pool_map(fn, pairs, args.jobs), key=lambda r: r[0])
    errors = [r[4] for r in results if r[4]]
    ok = [r for r in results if not r[4]]
    loss_cols = [c for c in LossReport.__dataclass_fields__ if c != "weights"]
    with open(out / "losses.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sequence", *loss_cols, "rte_percent"])
        for sid, loss, rep, note, _ in ok:
            (out / "losses" / f"{sid}.json").write_text(
                json.dumps({"loss": loss.to_dict(), "metrics": rep.to_dict(), "note": note}, indent=1)
            )
            w.writerow([sid, *(repr(getattr(loss, c)) for c in loss_cols), _fmt(rep.rte_percent)])
    agg = aggregate([r[2] for r in ok]) if ok else None
    summary = {"pairs": len(ok), "missing_gt": missing, "errors": errors, "aggregate": agg}
    if args.baseline and agg is not None:
        base = json.loads(Path(args.baseline).read_text())["aggregate"]["mean"]
        try:
            summary["m_AB"] = composite_measure(PlausibilityReport.from_dict(agg["mean"]), PlausibilityReport.from_dict(base))
        except UndefinedMeasure as exc:
            summary["m_AB"] = None
            summary["m_AB_reason"] = str(exc)
    (out / "summary.json").write_text(json.dumps(summary, indent=1))
    for m in missing:
        print(f"skipped {m}: no ground truth", file=sys.stderr)
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    msg = f"compared {len(ok)} pair(s), {len(missing)} without ground truth"
    if "m_AB" in summary:
        msg += f"; m_AB = {summary['m_AB'] if summary['m_AB'] is not None else 'undefined (' + summary['m_AB_reason'] + ')'}"
    print(msg)
    if not pairs:
        raise DataError("no sequence pairs found")
    return EXIT_OK if not errors else EXIT_DATA


# -- calibrate / detect -----------------------------------------------------------


def _profile_one(path: Path, body: BodySpec, mass: float):
    try:
        return path.stem, momentum_profile(load_motion(path), body, mass), None
    except MomoError as exc:
        return path.stem, None, f"{path}: {exc}"


def _profiles(args):
    body = load_body(args.body)
    files = find_sequences(args.inputs)
    results = sorted(_pool_map(partial(_profile_one, body=body, mass=args.mass), files, args.jobs), key=lambda r: r[0])
    errors = [r[2] for r in results if r[2]]
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    return [(r[0], r[1]) for r in results if not r[2]], errors


def cmd_calibrate(args) -> int:
    profiles, errors = _profiles(args)
    cal = calibrate_detector([p for _, p in profiles], K=args.K, cutoff_hz=args.k0_hz)
    out = Path(args.out)
    if out.suffix != ".json":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "calibration.json"
    cal.save(out)
    print(f"calibrated on {len(profiles)} sequence(s): k0={cal.k0}, band LM {cal.band('LM')}, AM {cal.band('AM')}; wrote {out}")
    return EXIT_OK if not errors else EXIT_DATA


def cmd_detect(args) -> int:
    path = Path(args.calibration)
    if not path.exists():
        raise DataError(f"{path}: calibration file not found")
    cal = DetectorCalibration.load(path)
    profiles, errors = _profiles(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flagged = 0
    with open(out / "detections.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sequence", "H_LM", "H_AM", "flag"])
        for sid, prof in profiles:
            try:
                det = is_implausible(prof, cal)
            except MomoError as exc:
                errors.append(f"{sid}: {exc}")
                continue
            flagged += det.flag
            w.writerow([sid, repr(det.H_LM), repr(det.H_AM), int(det.flag)])
    n = len(profiles)
    rate = 100.0 * flagged / n if n else 0.0
    print(f"flagged {flagged} of {n} sequence(s) ({rate:.1f}%)")
    return EXIT_OK if not errors else EXIT_DATA


# -- synth ------------------------------------------------------------------------


def cmd_synth(args) -> int:
    body = load_body(args.body)
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not valid JSON: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "clean":
        seqs = clean_corpus(args.count, body, args.seed, args.fps, args.duration)
    else:
        seqs = []
        for i in range(args.count):
            seq = generate(SynthConfig(args.kind, args.fps, args.duration, params, args.seed + i), body)
            seq.name = f"{args.kind}_{i:04d}"
            seqs.append(seq)
    for seq in seqs:
        if args.corrupt_amplitude:
            meta = seq.metadata
            seq = inject_hf_corruption(seq, args.corrupt_amplitude, args.corrupt_hz)
            seq.metadata = {"kind": meta.get("kind"), "corrupted": True}
        save_synthetic(seq, out / f"{seq.name}.json")
    print(f"wrote {len(seqs)} sequence(s) to {out}")
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "compare": cmd_compare,
    "calibrate": cmd_calibrate,
    "detect": cmd_detect,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    level = os.environ.get("MOMO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args)
        log.debug("running %s with %s", args.command, vars(args))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"momo: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"momo: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"momo: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
