"""Command-line front end: verify, identify, dump-scores, folds.

Configuration precedence: command-line flags override values from an
optional key=value config file; environment variables are never consulted.
All outputs are UTF-8, written via write-then-rename so an error never
leaves a partially-written report behind.  Identical config and inputs
produce byte-identical outputs, for any worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

from .evaluator import (
    IDENTIFICATION_SCORE_NOTE,
    report_asdict,
    summary_asdict,
    write_cmc_csv,
    write_roc_csv,
)
from .matcher import score_matrix, write_score_matrix_csv
from .metrics import METRIC_NAMES
from .pipeline import run_identification, run_verification
from .templates import l1_normalize_set, load_templates, split_folds


@dataclass
class RunConfig:
    probe_path: str | None = None
    gallery_path: str | None = None
    validation_path: str | None = None
    metric: str = "dice"
    layer: str = "fc"
    normalize: bool = False
    clamp: bool = False
    fusion: str = "min"
    far_targets: tuple[float, ...] = (0.01, 0.001)
    output_dir: str | None = None
    threshold_policy: str = "per-set"
    workers: int = 1


_BOOL_FIELDS = ("normalize", "clamp")
_INT_FIELDS = ("workers",)


def _parse_config_file(path: str) -> dict:
    values = {}
    known = {f.name for f in fields(RunConfig)}
    for line_no, line in enumerate(open(path, encoding="utf-8-sig"), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in known:
            raise ValueError(f"{path}:{line_no}: unknown config key {key!r}")
        values[key] = value.strip()
    return values


def _parse_far_targets(text: str) -> tuple[float, ...]:
    try:
        targets = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ValueError(f"far-targets must be comma-separated numbers, got {text!r}")
    if not targets:
        raise ValueError("far-targets must not be empty")
    for t in targets:
        if not 0.0 < t < 1.0:
            raise ValueError(f"far target {t} outside (0, 1)")
    return tuple(sorted(targets, reverse=True))


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    layered = {}
    if getattr(args, "config", None):
        layered.update(_parse_config_file(args.config))
    for f in fields(RunConfig):
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            layered[f.name] = flag_value
    for key, value in layered.items():
        if key == "far_targets" and isinstance(value, str):
            value = _parse_far_targets(value)
        elif key in _BOOL_FIELDS and isinstance(value, str):
            value = _parse_bool(value)
        elif key in _INT_FIELDS and isinstance(value, str):
            value = int(value)
        setattr(cfg, key, value)
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: RunConfig) -> None:
    if cfg.metric != "all" and cfg.metric not in METRIC_NAMES:
        raise ValueError(
            f"metric must be 'all' or one of {METRIC_NAMES}, got {cfg.metric!r}"
        )
    if cfg.layer not in ("fc", "score"):
        raise ValueError(f"layer must be 'fc' or 'score', got {cfg.layer!r}")
    if cfg.fusion not in ("min", "mean"):
        raise ValueError(f"fusion must be 'min' or 'mean', got {cfg.fusion!r}")
    if cfg.threshold_policy not in ("per-set", "transfer-from-validation"):
        raise ValueError(
            "threshold-policy must be 'per-set' or 'transfer-from-validation', "
            f"got {cfg.threshold_policy!r}"
        )
    if cfg.threshold_policy == "transfer-from-validation" and not cfg.validation_path:
        raise ValueError(
            "threshold-policy transfer-from-validation requires --validation-path"
        )
    if cfg.workers < 1:
        raise ValueError(f"workers must be >= 1, got {cfg.workers}")
    cfg.far_targets = tuple(sorted((float(t) for t in cfg.far_targets), reverse=True))
    for t in cfg.far_targets:
        if not 0.0 < t < 1.0:
            raise ValueError(f"far target {t} outside (0, 1)")


def _load(cfg: RunConfig, path: str):
    ts = load_templates(path, clamp=cfg.clamp).filter(layer=cfg.layer)
    if cfg.normalize:
        ts = l1_normalize_set(ts)
    return ts


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: Path, payload: dict) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=2) + "\n")


def _write_curve(path: Path, writer, curve) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        writer(curve, tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _out_dir(cfg: RunConfig) -> Path:
    if not cfg.output_dir:
        raise ValueError("output-dir is required")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _metric_list(cfg: RunConfig) -> list[str]:
    return list(METRIC_NAMES) if cfg.metric == "all" else [cfg.metric]


def cmd_verify(cfg: RunConfig) -> None:
    if not cfg.probe_path or not cfg.gallery_path:
        raise ValueError("verify requires --probe-path and --gallery-path")
    out = _out_dir(cfg)
    probes = _load(cfg, cfg.probe_path)
    gallery = _load(cfg, cfg.gallery_path)
    validation = _load(cfg, cfg.validation_path) if (
        cfg.threshold_policy == "transfer-from-validation"
    ) else None

    pending = []
    for metric in _metric_list(cfg):
        outcomes, summary = run_verification(
            probes, gallery, metric,
            far_targets=cfg.far_targets, workers=cfg.workers, validation=validation,
        )
        for o in outcomes:
            base = f"verify_{metric}_{o.fold.fold_id}"
            payload = {
                "command": "verify", "metric": metric, "layer": cfg.layer,
                "threshold_policy": cfg.threshold_policy,
                **report_asdict(o.report),
            }
            pending.append((out / f"{base}.json", payload))
            pending.append((out / f"{base}.csv", (write_roc_csv, o.roc)))
        pending.append((
            out / f"verify_{metric}_summary.json",
            {"command": "verify", "metric": metric, "layer": cfg.layer,
             "threshold_policy": cfg.threshold_policy, **summary_asdict(summary)},
        ))
    _flush(pending)


def cmd_identify(cfg: RunConfig) -> None:
    if not cfg.probe_path:
        raise ValueError("identify requires --probe-path")
    if cfg.layer == "fc" and not cfg.gallery_path:
        raise ValueError("identify with layer=fc requires --gallery-path")
    out = _out_dir(cfg)
    probes = _load(cfg, cfg.probe_path)
    gallery = _load(cfg, cfg.gallery_path) if cfg.gallery_path else None
    validation = _load(cfg, cfg.validation_path) if (
        cfg.threshold_policy == "transfer-from-validation"
    ) else None

    metrics = ["class_scores"] if cfg.layer == "score" else _metric_list(cfg)
    pending = []
    for metric in metrics:
        outcomes, summary = run_identification(
            probes, gallery,
            metric=metric, layer=cfg.layer, fusion=cfg.fusion,
            far_targets=cfg.far_targets, workers=cfg.workers, validation=validation,
        )
        for o in outcomes:
            base = f"identify_{metric}_{o.fold.fold_id}"
            payload = {
                "command": "identify", "metric": metric, "layer": cfg.layer,
                "threshold_policy": cfg.threshold_policy,
                "notes": [IDENTIFICATION_SCORE_NOTE],
                **report_asdict(o.report),
            }
            pending.append((out / f"{base}.json", payload))
            pending.append((out / f"{base}.csv", (write_cmc_csv, o.cmc)))
        pending.append((
            out / f"identify_{metric}_summary.json",
            {"command": "identify", "metric": metric, "layer": cfg.layer,
             "threshold_policy": cfg.threshold_policy,
             "notes": [IDENTIFICATION_SCORE_NOTE], **summary_asdict(summary)},
        ))
    _flush(pending)


def cmd_dump_scores(cfg: RunConfig) -> None:
    if not cfg.probe_path or not cfg.gallery_path:
        raise ValueError("dump-scores requires --probe-path and --gallery-path")
    if cfg.metric == "all":
        raise ValueError("dump-scores needs a single metric, not 'all'")
    out = _out_dir(cfg)
    probes = _load(cfg, cfg.probe_path)
    gallery = _load(cfg, cfg.gallery_path)
    sm = score_matrix(probes, gallery, cfg.metric, workers=cfg.workers)
    _write_curve(out / f"dump-scores_{cfg.metric}.csv", write_score_matrix_csv, sm)


def cmd_folds(cfg: RunConfig) -> None:
    if not cfg.probe_path:
        raise ValueError("folds requires --probe-path")
    ts = _load(cfg, cfg.probe_path)
    for fold in split_folds(ts):
        train = ",".join(sorted(fold.train_sessions))
        print(f"fold {fold.fold_id}: test={fold.test_session} train={train}")


def _flush(pending) -> None:
    # everything is computed before anything is written, so a late failure
    # cannot leave a partial report set behind
    for path, item in pending:
        if isinstance(item, dict):
            _write_json(path, item)
        else:
            writer, curve = item
            _write_curve(path, writer, curve)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="optional key=value config file")
    p.add_argument("--probe-path", help="probe template file (jsonl or csv)")
    p.add_argument("--gallery-path", help="gallery/enrollment template file")
    p.add_argument("--validation-path",
                   help="validation template file for threshold transfer")
    p.add_argument("--metric", help="distance metric name, or 'all'")
    p.add_argument("--layer", choices=["fc", "score"], help="template layer tag")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction,
                   help="L1-normalize templates after loading")
    p.add_argument("--clamp", action=argparse.BooleanOptionalAction,
                   help="clamp negative feature values to zero at load")
    p.add_argument("--fusion", choices=["min", "mean"],
                   help="per-subject gallery fusion rule")
    p.add_argument("--far-targets", help="comma-separated FAR targets in (0,1)")
    p.add_argument("--output-dir", help="directory for report and curve files")
    p.add_argument("--threshold-policy",
                   choices=["per-set", "transfer-from-validation"],
                   help="where TAR@FAR acceptance thresholds are selected")
    p.add_argument("--workers", type=int, help="concurrent scoring workers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biomatch",
        description="Biometric template matching and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify", "1:1 verification battery: ROC, TAR@FAR, EER, AUC per fold"),
        ("identify", "1:N identification battery: CMC, rank-1, TAR@FAR per fold"),
        ("dump-scores", "write the full probe x gallery distance matrix as CSV"),
        ("folds", "print the session-based cross-validation partition"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common_flags(p)
    return parser


_COMMANDS = {
    "verify": cmd_verify,
    "identify": cmd_identify,
    "dump-scores": cmd_dump_scores,
    "folds": cmd_folds,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        _COMMANDS[args.command](cfg)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
