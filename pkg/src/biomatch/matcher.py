"""Turns template sets into labeled score structures.

Verification (1:1) works on a dense probe x gallery distance matrix whose
cells are partitioned into genuine pairs (same subject) and impostor pairs
(different subject).  Identification (1:N) ranks gallery subjects per
probe, either by fusing template distances (nearest-template by default)
or directly from per-class score templates.

Distances stay distances throughout: smaller is better, and "accept" means
distance <= threshold.  The one larger-is-better input, class scores, is
converted to distance polarity (1 - score) inside rank_from_class_scores
so everything downstream shares a single convention.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import INFINITE_DISTANCE, METRIC_NAMES, distance_rows
from .templates import TemplateSet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoreMatrix:
    probe_keys: tuple[tuple[str, str], ...]
    gallery_keys: tuple[tuple[str, str], ...]
    metric: str
    distances: np.ndarray  # shape (len(probe_keys), len(gallery_keys))


@dataclass(frozen=True)
class LabeledScores:
    genuine: np.ndarray
    impostor: np.ndarray
    self_pairs: int = 0


@dataclass(frozen=True)
class RankList:
    probe_key: tuple[str, str]
    entries: tuple[tuple[str, float], ...]  # (subject_id, distance) ascending


def _sorted_templates(ts: TemplateSet):
    return sorted(ts.templates, key=lambda t: t.key)


def score_matrix(
    probes: TemplateSet,
    gallery: TemplateSet,
    metric: str,
    workers: int = 1,
) -> ScoreMatrix:
    """All-pairs distances between probe and gallery templates.

    Rows and columns are ordered by sorted template key, so the output is
    deterministic.  Rows are independent; with workers > 1 they are
    computed concurrently and written into pre-assigned slots, which keeps
    the result identical for any worker count.
    """
    if metric not in METRIC_NAMES:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRIC_NAMES}")
    if len(gallery) == 0:
        raise ValueError("gallery is empty")
    if probes.dimension != gallery.dimension:
        raise ValueError(
            f"dimension mismatch: probes d={probes.dimension}, "
            f"gallery d={gallery.dimension}"
        )
    p_templates = _sorted_templates(probes)
    g_templates = _sorted_templates(gallery)
    G = np.stack([t.features for t in g_templates])
    out = np.empty((len(p_templates), len(G)), dtype=np.float64)

    def fill(i):
        out[i, :] = distance_rows(metric, p_templates[i].features, G)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(len(p_templates))))
    else:
        for i in range(len(p_templates)):
            fill(i)

    return ScoreMatrix(
        probe_keys=tuple((t.subject_id, t.session_id) for t in p_templates),
        gallery_keys=tuple((t.subject_id, t.session_id) for t in g_templates),
        metric=metric,
        distances=out,
    )


def label_scores(sm: ScoreMatrix) -> LabeledScores:
    """Partition matrix cells into genuine and impostor score lists.

    A cell is genuine iff probe and gallery subject ids match.  Cells
    whose full (subject, session) keys coincide are self-comparisons and
    are excluded from both lists.
    """
    p_subj = np.array([k[0] for k in sm.probe_keys])
    g_subj = np.array([k[0] for k in sm.gallery_keys])
    same_subject = p_subj[:, None] == g_subj[None, :]
    p_keys = np.array(["\x00".join(k) for k in sm.probe_keys])
    g_keys = np.array(["\x00".join(k) for k in sm.gallery_keys])
    self_pair = p_keys[:, None] == g_keys[None, :]

    genuine = sm.distances[same_subject & ~self_pair]
    impostor = sm.distances[~same_subject]
    if genuine.size == 0:
        log.warning("no genuine pairs: probe and gallery subjects are disjoint")
    return LabeledScores(genuine=genuine, impostor=impostor,
                         self_pairs=int(self_pair.sum()))


def rank_gallery(sm: ScoreMatrix, fusion: str = "min") -> list[RankList]:
    """Rank gallery subjects per probe by fused template distance.

    When a subject has several gallery templates their distances fuse by
    min (nearest template, the default) or mean.  Under min an infinite
    distance is absorbed by any finite one; a subject fuses to infinity
    only if all its templates are at infinite distance.  Ties are broken
    by subject id so output order is fully determined.
    """
    if fusion not in ("min", "mean"):
        raise ValueError(f"fusion must be 'min' or 'mean', got {fusion!r}")
    subjects = sorted({k[0] for k in sm.gallery_keys})
    g_subj = np.array([k[0] for k in sm.gallery_keys])
    cols = {s: np.flatnonzero(g_subj == s) for s in subjects}
    fuse = np.min if fusion == "min" else np.mean

    ranklists = []
    for i, probe_key in enumerate(sm.probe_keys):
        row = sm.distances[i]
        fused = [(float(fuse(row[cols[s]])), s) for s in subjects]
        fused.sort()
        ranklists.append(
            RankList(probe_key=probe_key, entries=tuple((s, d) for d, s in fused))
        )
    return ranklists


def rank_from_class_scores(ts: TemplateSet, roster) -> list[RankList]:
    """Rank roster subjects per probe from classification-layer scores.

    Each template must be a score-layer vector whose dimension equals the
    roster size; roster order defines the score-index -> subject mapping.
    Subjects are ordered by descending class score (higher score = better
    match), realized as ascending distance 1 - score so the downstream
    curve machinery is unchanged.  Ties break lexicographically.
    """
    roster = list(roster)
    if len(set(roster)) != len(roster):
        raise ValueError("roster contains duplicate subjects")
    ranklists = []
    for t in _sorted_templates(ts):
        if t.layer_tag != "score":
            raise ValueError(f"template {t.key} is not a score-layer template")
        if t.dimension != len(roster):
            raise ValueError(
                f"template {t.key} has dimension {t.dimension}, "
                f"roster has {len(roster)} subjects"
            )
        if np.any(t.features > 1.0):
            raise ValueError(
                f"template {t.key} has class scores > 1; expected probabilities"
            )
        fused = sorted((1.0 - float(s), subj) for s, subj in zip(t.features, roster))
        ranklists.append(
            RankList(
                probe_key=(t.subject_id, t.session_id),
                entries=tuple((subj, d) for d, subj in fused),
            )
        )
    return ranklists


def _fmt(x: float) -> str:
    return "inf" if x == INFINITE_DISTANCE else repr(float(x))


def write_score_matrix_csv(sm: ScoreMatrix, path) -> None:
    """Dump the full matrix as CSV: probe key column, one column per
    gallery key, keys rendered as subject:session, infinite distances as
    the literal string inf."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        header = ",".join(["probe"] + [f"{s}:{sess}" for s, sess in sm.gallery_keys])
        fh.write(header + "\n")
        for (subj, sess), row in zip(sm.probe_keys, sm.distances):
            fh.write(",".join([f"{subj}:{sess}"] + [_fmt(x) for x in row]) + "\n")
