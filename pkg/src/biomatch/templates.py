"""Feature-template data model, file ingestion, and session-fold splitting.

A template is one subject's fixed-length feature vector labeled with the
subject, the acquisition session it came from, a free-form source tag
(e.g. the network that produced it, or "real"/"synthesized"), and a layer
tag ("fc" for fully-connected features, "score" for per-class scores).

Two line-oriented file formats are supported, both BOM-tolerant UTF-8:

  jsonl   one object per line:
          {"subject": ..., "session": ..., "source": ..., "layer": ...,
           "features": [...]}
  csv     header  subject,session,source,layer,f0,...,f{d-1}

Ingestion validates that all templates of one layer tag share one
dimension (fc and score templates naturally differ, e.g. 512 vs roster
size, and may live in the same file), that every value is finite, and
that every value is non-negative (the distance kernels assume
non-negative inputs).  Negative values are rejected unless clamping is
requested, in which case they are zeroed and tallied.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

LAYER_TAGS = ("fc", "score")


class LoadError(ValueError):
    """A template file failed validation; the message names the record."""


@dataclass(frozen=True, eq=False)
class FeatureTemplate:
    subject_id: str
    session_id: str
    source_tag: str
    layer_tag: str
    features: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 1 or feats.shape[0] < 1:
            raise ValueError("features must be a one-dimensional vector, d >= 1")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite values")
        if np.any(feats < 0):
            raise ValueError("features contain negative values")
        if self.layer_tag not in LAYER_TAGS:
            raise ValueError(f"layer_tag must be one of {LAYER_TAGS}")
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.subject_id, self.session_id, self.source_tag, self.layer_tag)

    @property
    def dimension(self) -> int:
        return self.features.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FeatureTemplate):
            return NotImplemented
        return self.key == other.key and np.array_equal(self.features, other.features)


@dataclass(frozen=True, eq=False)
class TemplateSet:
    templates: tuple[FeatureTemplate, ...]
    subject_roster: frozenset[str]
    clamp_warnings: int = field(default=0, compare=False)

    @classmethod
    def from_templates(cls, templates, clamp_warnings=0) -> "TemplateSet":
        templates = tuple(templates)
        if not templates:
            raise ValueError("template set is empty")
        dims: dict[str, tuple[int, int]] = {}  # layer -> (dimension, first record)
        seen = set()
        for i, t in enumerate(templates, start=1):
            ref = dims.setdefault(t.layer_tag, (t.dimension, i))
            if t.dimension != ref[0]:
                raise ValueError(
                    f"record {i}: dimension {t.dimension} != {ref[0]} "
                    f"of record {ref[1]} (layer {t.layer_tag!r})"
                )
            if t.key in seen:
                raise ValueError(f"record {i}: duplicate key {t.key}")
            seen.add(t.key)
        roster = frozenset(t.subject_id for t in templates)
        return cls(templates, roster, clamp_warnings)

    def __len__(self):
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    def __eq__(self, other):
        if not isinstance(other, TemplateSet):
            return NotImplemented
        return self.templates == other.templates

    @property
    def dimension(self) -> int:
        """The set's single feature dimension.

        A set mixing layer tags of different dimensions has no single
        dimension; filter by layer before matching.
        """
        dims = {t.dimension for t in self.templates}
        if len(dims) != 1:
            raise ValueError(
                "template set mixes dimensions "
                f"{sorted(dims)}; filter by layer first"
            )
        return next(iter(dims))

    @property
    def sessions(self) -> tuple[str, ...]:
        return tuple(sorted({t.session_id for t in self.templates}))

    def filter(self, sessions=None, layer=None, source=None) -> "TemplateSet":
        """Subset by session membership, layer tag, and/or source tag."""
        kept = [
            t
            for t in self.templates
            if (sessions is None or t.session_id in sessions)
            and (layer is None or t.layer_tag == layer)
            and (source is None or t.source_tag == source)
        ]
        if not kept:
            raise ValueError(
                f"no templates left after filtering "
                f"(sessions={sessions!r}, layer={layer!r}, source={source!r})"
            )
        return TemplateSet.from_templates(kept)


@dataclass(frozen=True)
class FoldSpec:
    fold_id: int
    train_sessions: frozenset[str]
    test_session: str


def _check_record(values, record_no, clamp, path):
    feats = np.asarray(values, dtype=np.float64)
    if feats.ndim != 1 or feats.shape[0] < 1:
        raise LoadError(f"{path}: record {record_no}: features must be a non-empty vector")
    if not np.all(np.isfinite(feats)):
        raise LoadError(f"{path}: record {record_no}: non-finite feature value")
    clamped = 0
    if np.any(feats < 0):
        if not clamp:
            raise LoadError(
                f"{path}: record {record_no}: negative feature value "
                f"(pass clamp=True to zero negatives)"
            )
        clamped = int(np.count_nonzero(feats < 0))
        feats = np.maximum(feats, 0.0)
    return feats, clamped


def _iter_jsonl(path):
    with open(path, encoding="utf-8-sig") as fh:
        record_no = 0
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record_no += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise LoadError(f"{path}: record {record_no} (line {line_no}): {e}") from e
            missing = {"subject", "session", "source", "layer", "features"} - obj.keys()
            if missing:
                raise LoadError(
                    f"{path}: record {record_no}: missing fields {sorted(missing)}"
                )
            yield record_no, obj["subject"], obj["session"], obj["source"], obj[
                "layer"
            ], obj["features"]


def _iter_csv(path):
    with open(path, encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: empty file") from None
        if header[:4] != ["subject", "session", "source", "layer"]:
            raise LoadError(
                f"{path}: header must start with subject,session,source,layer"
            )
        for record_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) < 5:
                raise LoadError(f"{path}: record {record_no}: too few columns")
            try:
                values = [float(x) for x in row[4:]]
            except ValueError as e:
                raise LoadError(f"{path}: record {record_no}: {e}") from e
            yield record_no, row[0], row[1], row[2], row[3], values


def load_templates(path, fmt: str | None = None, clamp: bool = False) -> TemplateSet:
    """Load and validate a template file.

    fmt is "jsonl" or "csv"; when None it is inferred from the file
    extension (.csv means csv, anything else jsonl).  With clamp=True,
    negative feature values are zeroed instead of rejected and the count
    of clamped values is reported on the returned set.
    """
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if fmt not in ("jsonl", "csv"):
        raise ValueError(f"unknown template format {fmt!r}")
    reader = _iter_jsonl if fmt == "jsonl" else _iter_csv

    templates = []
    keys = set()
    dims: dict[str, tuple[int, int]] = {}  # layer -> (dimension, first record)
    total_clamped = 0
    for record_no, subject, session, source, layer, values in reader(path):
        if layer not in LAYER_TAGS:
            raise LoadError(
                f"{path}: record {record_no}: layer must be one of {LAYER_TAGS}, "
                f"got {layer!r}"
            )
        feats, clamped = _check_record(values, record_no, clamp, path)
        total_clamped += clamped
        ref = dims.setdefault(layer, (feats.shape[0], record_no))
        if feats.shape[0] != ref[0]:
            raise LoadError(
                f"{path}: record {record_no}: dimension {feats.shape[0]} != {ref[0]} "
                f"of record {ref[1]} (layer {layer!r})"
            )
        t = FeatureTemplate(str(subject), str(session), str(source), layer, feats)
        if t.key in keys:
            raise LoadError(f"{path}: record {record_no}: duplicate key {t.key}")
        keys.add(t.key)
        templates.append(t)
    if not templates:
        raise LoadError(f"{path}: no template records")
    if total_clamped:
        log.warning("%s: clamped %d negative feature values to 0", path, total_clamped)
    return TemplateSet(tuple(templates), frozenset(t.subject_id for t in templates),
                       total_clamped)


def save_templates(ts: TemplateSet, path, fmt: str | None = None) -> None:
    """Write a template set back out in jsonl or csv form.

    Floats are written with repr so that a save/load round trip is exact.
    """
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for t in ts:
                fh.write(
                    json.dumps(
                        {
                            "subject": t.subject_id,
                            "session": t.session_id,
                            "source": t.source_tag,
                            "layer": t.layer_tag,
                            "features": t.features.tolist(),
                        }
                    )
                    + "\n"
                )
    elif fmt == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            cols = ",".join(f"f{i}" for i in range(ts.dimension))
            fh.write(f"subject,session,source,layer,{cols}\n")
            for t in ts:
                values = ",".join(repr(float(x)) for x in t.features)
                fh.write(f"{t.subject_id},{t.session_id},{t.source_tag},{t.layer_tag},{values}\n")
    else:
        raise ValueError(f"unknown template format {fmt!r}")


def l1_normalize(t: FeatureTemplate) -> FeatureTemplate:
    """Rescale a template so its features sum to 1 (ordering preserved)."""
    total = float(np.sum(t.features))
    if total <= 0.0:
        raise ValueError(f"cannot normalize all-zero template {t.key}")
    return FeatureTemplate(
        t.subject_id, t.session_id, t.source_tag, t.layer_tag, t.features / total
    )


def l1_normalize_set(ts: TemplateSet) -> TemplateSet:
    return TemplateSet.from_templates(
        [l1_normalize(t) for t in ts], clamp_warnings=ts.clamp_warnings
    )


def split_folds(ts: TemplateSet) -> list[FoldSpec]:
    """One cross-validation fold per acquisition session.

    Fold k holds out the k-th session (sorted order) for testing and
    trains/enrolls on all the others.  Requires at least two sessions.
    """
    sessions = ts.sessions
    if len(sessions) < 2:
        raise ValueError(
            f"cross-validation needs >= 2 sessions, found {len(sessions)}: {sessions}"
        )
    folds = []
    for k, test_session in enumerate(sessions, start=1):
        train = frozenset(s for s in sessions if s != test_session)
        folds.append(FoldSpec(fold_id=k, train_sessions=train, test_session=test_session))
    return folds
