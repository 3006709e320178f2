"""Session-fold protocol runs: load -> match -> evaluate, per fold.

The fold partition always derives from the probe set's sessions; for each
fold the enrolled gallery comes from the complementary (train) sessions of
the gallery set.  This mirrors the usual cross-validation layout where the
held-out acquisition session supplies the probes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .evaluator import (
    CmcCurve,
    EvalReport,
    RocCurve,
    aggregate_folds,
    auc,
    cmc_curve,
    eer,
    identification_scores,
    roc_curve,
    tar_at_far,
    tar_at_threshold,
    threshold_at_far,
)
from .matcher import label_scores, rank_from_class_scores, rank_gallery, score_matrix
from .templates import FoldSpec, TemplateSet, split_folds


@dataclass(frozen=True)
class FoldOutcome:
    fold: FoldSpec
    report: EvalReport
    roc: RocCurve | None = None
    cmc: CmcCurve | None = None


def _fold_context(fold: FoldSpec, metric: str, exc: Exception) -> ValueError:
    return ValueError(
        f"fold {fold.fold_id} (test session {fold.test_session}), "
        f"metric {metric}: {exc}"
    )


def run_verification(
    probes: TemplateSet,
    gallery: TemplateSet,
    metric: str,
    far_targets=(0.01, 0.001),
    workers: int = 1,
    validation: TemplateSet | None = None,
):
    """1:1 protocol: per fold, ROC / TAR@FAR / EER / AUC, then aggregation.

    When a validation set is given, the acceptance thresholds for the FAR
    targets are selected on the validation scores of the same fold and
    transferred to the probe scores; EER and AUC are threshold-free and
    always computed on the evaluated set itself.
    """
    outcomes = []
    for fold in split_folds(probes):
        try:
            probe_f = probes.filter(sessions={fold.test_session})
            gallery_f = gallery.filter(sessions=fold.train_sessions)
            ls = label_scores(score_matrix(probe_f, gallery_f, metric, workers))
            rc = roc_curve(ls)
            if validation is not None:
                val_f = validation.filter(sessions={fold.test_session})
                val_ls = label_scores(score_matrix(val_f, gallery_f, metric, workers))
                val_rc = roc_curve(val_ls)
                tars = {
                    t: tar_at_threshold(ls, threshold_at_far(val_rc, t))
                    for t in far_targets
                }
            else:
                tars = {t: tar_at_far(rc, t) for t in far_targets}
            report = EvalReport(
                fold_id=fold.fold_id, tar_at_far=tars, eer=eer(rc), auc=auc(rc)
            )
        except ValueError as e:
            raise _fold_context(fold, metric, e) from e
        outcomes.append(FoldOutcome(fold=fold, report=report, roc=rc))
    summary = aggregate_folds([o.report for o in outcomes])
    return outcomes, summary


def run_identification(
    probes: TemplateSet,
    gallery: TemplateSet | None = None,
    metric: str = "dice",
    layer: str = "fc",
    fusion: str = "min",
    far_targets=(0.01, 0.001),
    workers: int = 1,
    validation: TemplateSet | None = None,
):
    """1:N protocol: per fold, CMC / rank-1 / TAR@FAR, then aggregation.

    layer="fc": probes are matched against the train-session gallery and
    subjects ranked by fused distance under the chosen metric.
    layer="score": probes are classification-layer score templates and the
    ranking comes straight from the scores; the roster ordering is the
    sorted subject roster of the gallery set (or of the probe set when no
    gallery is given), and the metric argument is unused.
    """
    if layer == "score":
        roster = sorted((gallery or probes).subject_roster)
        metric_label = "class_scores"
    else:
        if gallery is None:
            raise ValueError("identification with layer=fc requires a gallery set")
        metric_label = metric

    outcomes = []
    for fold in split_folds(probes):
        try:
            probe_f = probes.filter(sessions={fold.test_session})
            if layer == "score":
                ranks = rank_from_class_scores(probe_f, roster)
            else:
                gallery_f = gallery.filter(sessions=fold.train_sessions)
                sm = score_matrix(probe_f, gallery_f, metric, workers)
                ranks = rank_gallery(sm, fusion)
            truth = {rl.probe_key: rl.probe_key[0] for rl in ranks}
            cmc = cmc_curve(ranks, truth)
            ls = identification_scores(ranks, truth)
            rc = roc_curve(ls)
            if validation is not None:
                val_f = validation.filter(sessions={fold.test_session})
                if layer == "score":
                    val_ranks = rank_from_class_scores(val_f, roster)
                else:
                    val_ranks = rank_gallery(
                        score_matrix(val_f, gallery_f, metric, workers), fusion
                    )
                val_truth = {rl.probe_key: rl.probe_key[0] for rl in val_ranks}
                val_rc = roc_curve(identification_scores(val_ranks, val_truth))
                tars = {
                    t: tar_at_threshold(ls, threshold_at_far(val_rc, t))
                    for t in far_targets
                }
            else:
                tars = {t: tar_at_far(rc, t) for t in far_targets}
            report = EvalReport(
                fold_id=fold.fold_id,
                tar_at_far=tars,
                rank_k={1: float(cmc.rates[0])},
            )
        except ValueError as e:
            raise _fold_context(fold, metric_label, e) from e
        outcomes.append(FoldOutcome(fold=fold, report=report, roc=rc, cmc=cmc))
    summary = aggregate_folds([o.report for o in outcomes])
    return outcomes, summary
