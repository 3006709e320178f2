"""ROC, CMC, EER, AUC, TAR@FAR, and cross-fold aggregation.

Conventions, fixed so numbers reproduce bit-for-bit:

* Distances, not similarities: a pair is accepted when its distance is
  <= the threshold.  FAR(t) is the fraction of impostor pairs accepted at
  t, TAR(t) the fraction of genuine pairs.
* The ROC is the empirical step curve over all observed scores, with
  sentinel thresholds at -inf (accept nothing) and +inf (accept all,
  including infinite-distance pairs).
* TAR at a targeted FAR uses the step-function convention: the acceptance
  threshold is the largest observed threshold at which FAR actually steps
  to a value still <= the target.  If even the smallest impostor score
  overshoots the target, the operating point falls back to the best
  zero-FAR threshold.  No interpolation.
* EER is found by linear interpolation between the two operating points
  bracketing the FAR = FRR sign change (exact crossings are returned
  as-is).
* AUC is the trapezoidal integral of TAR over FAR, endpoints included.
* Cross-fold summaries report arithmetic mean and sample (n-1) standard
  deviation, rendered as "mean +/- std" percent with two decimals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .matcher import LabeledScores, RankList, rank_from_class_scores
from .templates import TemplateSet

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

# How identification TAR@FAR is constructed from per-probe class scores;
# echoed into every identification report.
IDENTIFICATION_SCORE_NOTE = (
    "identification genuine/impostor construction: per probe, genuine = "
    "the score for its true subject, impostor = its scores for every other "
    "subject; class scores enter as distance 1 - score"
)


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray  # ascending, with -inf / +inf sentinels at the ends
    far: np.ndarray
    tar: np.ndarray
    n_genuine: int
    n_impostor: int


@dataclass(frozen=True)
class CmcCurve:
    rates: np.ndarray  # identification rate at rank 1..R


@dataclass(frozen=True)
class EvalReport:
    fold_id: int
    tar_at_far: dict[float, float] = field(default_factory=dict)
    eer: float | None = None
    auc: float | None = None
    rank_k: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class CrossValSummary:
    fold_count: int
    stats: dict[str, tuple[float, float]]  # quantity -> (mean, sample std)


def roc_curve(ls: LabeledScores) -> RocCurve:
    """Empirical ROC over every observed threshold.

    Thresholds are the sorted unique finite scores plus the two sentinel
    extremes.  Infinite-distance entries count toward the totals but are
    accepted by no finite threshold.
    """
    gen = np.asarray(ls.genuine, dtype=np.float64)
    imp = np.asarray(ls.impostor, dtype=np.float64)
    if gen.size == 0:
        raise ValueError("no genuine scores; cannot build a ROC curve")
    if imp.size == 0:
        raise ValueError("no impostor scores; cannot build a ROC curve")
    if np.any(np.isnan(gen)) or np.any(np.isnan(imp)):
        raise ValueError("scores must be finite or INFINITE_DISTANCE, got NaN")

    gen_fin = np.sort(gen[np.isfinite(gen)])
    imp_fin = np.sort(imp[np.isfinite(imp)])
    finite = np.unique(np.concatenate([gen_fin, imp_fin]))
    thresholds = np.concatenate([[-np.inf], finite, [np.inf]])

    tar = np.searchsorted(gen_fin, thresholds, side="right") / gen.size
    far = np.searchsorted(imp_fin, thresholds, side="right") / imp.size
    tar[-1] = 1.0  # the +inf sentinel accepts everything
    far[-1] = 1.0
    return RocCurve(thresholds=thresholds, far=far, tar=tar,
                    n_genuine=int(gen.size), n_impostor=int(imp.size))


def _operating_index(rc: RocCurve, target: float) -> int:
    """Index of the step-convention operating point for a FAR target."""
    if not 0.0 < target < 1.0:
        raise ValueError(f"FAR target must be in (0, 1), got {target}")
    # thresholds where FAR actually increases, i.e. impostor scores
    steps = np.flatnonzero(np.diff(rc.far) > 0) + 1
    ok = steps[rc.far[steps] <= target]
    if ok.size:
        return int(ok[-1])
    # nothing qualifies below the target: best zero-FAR operating point
    zero = np.flatnonzero(rc.far == 0.0)
    return int(zero[-1])


def tar_at_far(rc: RocCurve, target: float) -> float:
    """TAR at the largest empirical threshold whose FAR <= target."""
    return float(rc.tar[_operating_index(rc, target)])


def threshold_at_far(rc: RocCurve, target: float) -> float:
    """The acceptance threshold behind tar_at_far, for reuse on another set."""
    return float(rc.thresholds[_operating_index(rc, target)])


def tar_at_threshold(ls: LabeledScores, threshold: float) -> float:
    """Fraction of genuine pairs accepted at a fixed transferred threshold."""
    gen = np.asarray(ls.genuine, dtype=np.float64)
    return float(np.count_nonzero(gen <= threshold) / gen.size)


def eer(rc: RocCurve) -> float:
    """Equal error rate, interpolated where FAR - FRR changes sign."""
    diff = rc.far + rc.tar - 1.0  # == far - frr
    i = int(np.argmax(diff >= 0.0))  # first non-negative; diff[0] = -1
    if diff[i] == 0.0:
        return float(rc.far[i])
    t = -diff[i - 1] / (diff[i] - diff[i - 1])
    return float(rc.far[i - 1] + t * (rc.far[i] - rc.far[i - 1]))


def auc(rc: RocCurve) -> float:
    """Area under TAR as a function of FAR over [0, 1]."""
    return float(_trapezoid(rc.tar, rc.far))


def cmc_curve(ranks: list[RankList], truth: dict) -> CmcCurve:
    """Cumulative matching characteristic from per-probe rank lists.

    rate(k) is the fraction of probes whose true subject appears within
    the top k positions.  Every rank list must cover the same roster, and
    every probe needs a truth label.
    """
    if not ranks:
        raise ValueError("no rank lists")
    roster = frozenset(s for s, _ in ranks[0].entries)
    R = len(ranks[0].entries)
    hits = np.zeros(R, dtype=np.int64)
    for rl in ranks:
        if rl.probe_key not in truth:
            raise ValueError(f"probe {rl.probe_key} is missing a truth label")
        if len(rl.entries) != R or frozenset(s for s, _ in rl.entries) != roster:
            raise ValueError(f"probe {rl.probe_key} covers a different roster")
        true_subject = truth[rl.probe_key]
        for pos, (subject, _) in enumerate(rl.entries):
            if subject == true_subject:
                hits[pos] += 1
                break
    return CmcCurve(rates=np.cumsum(hits) / len(ranks))


def identification_scores(source, truth: dict, roster=None) -> LabeledScores:
    """Genuine/impostor scores for the identification ROC.

    Per probe, the genuine score is its distance for the true subject and
    the impostor scores are its distances for every other roster subject.
    Accepts either ready rank lists or a score-layer TemplateSet (then a
    roster ordering is required and scores enter as 1 - score).
    """
    if isinstance(source, TemplateSet):
        if roster is None:
            raise ValueError("roster ordering required for class-score templates")
        ranks = rank_from_class_scores(source, roster)
    else:
        ranks = list(source)
    genuine, impostor = [], []
    for rl in ranks:
        if rl.probe_key not in truth:
            raise ValueError(f"probe {rl.probe_key} is missing a truth label")
        true_subject = truth[rl.probe_key]
        subjects = {s for s, _ in rl.entries}
        if true_subject not in subjects:
            raise ValueError(
                f"probe {rl.probe_key}: true subject {true_subject!r} "
                f"is absent from the roster"
            )
        for subject, d in rl.entries:
            (genuine if subject == true_subject else impostor).append(d)
    return LabeledScores(genuine=np.array(genuine), impostor=np.array(impostor))


def report_quantities(report: EvalReport) -> dict[str, float]:
    """Flatten a report into named scalar quantities (fractions)."""
    out = {}
    for target in sorted(report.tar_at_far, reverse=True):
        out[f"tar_at_far_{target:g}"] = report.tar_at_far[target]
    if report.eer is not None:
        out["eer"] = report.eer
    if report.auc is not None:
        out["auc"] = report.auc
    for k in sorted(report.rank_k):
        out[f"rank_{k}"] = report.rank_k[k]
    return out


def aggregate_folds(reports: list[EvalReport]) -> CrossValSummary:
    """Mean and sample standard deviation of each quantity across folds."""
    if len(reports) < 2:
        raise ValueError("need at least 2 fold reports to aggregate")
    rows = [report_quantities(r) for r in reports]
    keys = list(rows[0])
    for r, row in zip(reports, rows):
        if list(row) != keys:
            raise ValueError(
                f"fold {r.fold_id} reports quantities {list(row)}, "
                f"expected {keys}"
            )
    stats = {}
    n = len(reports)
    for k in keys:
        values = [float(row[k]) for row in rows]
        # fsum is exactly rounded, so the result is fold-order invariant
        mean = math.fsum(values) / n
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
        stats[k] = (mean, std)
    return CrossValSummary(fold_count=n, stats=stats)


def format_percent(mean: float, std: float) -> str:
    return f"{100.0 * mean:.2f} ± {100.0 * std:.2f}"


def summary_table(summary: CrossValSummary) -> dict[str, str]:
    """The mean +/- std row (percent, two decimals) per quantity."""
    return {k: format_percent(m, s) for k, (m, s) in summary.stats.items()}


def _fmt(x: float) -> str:
    if x == np.inf:
        return "inf"
    if x == -np.inf:
        return "-inf"
    return repr(float(x))


def write_roc_csv(rc: RocCurve, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write("threshold,far,tar\n")
        for t, f, r in zip(rc.thresholds, rc.far, rc.tar):
            fh.write(f"{_fmt(t)},{_fmt(f)},{_fmt(r)}\n")


def write_cmc_csv(cmc: CmcCurve, path) -> None:
    with open(Path(path), "w", encoding="utf-8") as fh:
        fh.write("rank,rate\n")
        for k, rate in enumerate(cmc.rates, start=1):
            fh.write(f"{k},{repr(float(rate))}\n")


def report_asdict(report: EvalReport) -> dict:
    """JSON-ready view of a fold report; rates are fractions."""
    return {
        "fold_id": report.fold_id,
        "tar_at_far": {f"{t:g}": v for t, v in sorted(report.tar_at_far.items(),
                                                      reverse=True)},
        "eer": report.eer,
        "auc": report.auc,
        "rank_k": {str(k): v for k, v in sorted(report.rank_k.items())},
        "units": "fraction",
    }


def summary_asdict(summary: CrossValSummary) -> dict:
    return {
        "fold_count": summary.fold_count,
        "quantities": {
            k: {"mean": m, "std": s} for k, (m, s) in summary.stats.items()
        },
        "table_percent": summary_table(summary),
        "units": "fraction",
    }
