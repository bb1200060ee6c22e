"""Detection metrics and the seeded random-search tuning harness.

AUC-ROC follows the rank-based Mann-Whitney statistic with half credit for
ties; F1/precision/recall come from a flag set; the top-K% event metric counts
ground-truth events touched by the highest-scoring entries.  Random search
samples the sparsity weight uniformly in (0,1) (tying the nuclear weights to
its complement) and the smoothness weights log-uniformly in [1e-8, 10].
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .scoring import ScoreField, ScoringConfig, abs_scores, nll_scores
from .solver import SolverConfig, decompose

OBJECTIVES = ("auc_plus_f1", "topk_events")


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_roc(scores, labels) -> float:
    """Probability a random positive outscores a random negative (ties half)."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc_roc needs both classes present")
    ranks = _average_ranks(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class EvalReport:
    f1: float
    precision: float
    recall: float
    auc_roc: float | None = None
    threshold: float | None = None
    score_method: str | None = None
    best_f1: float | None = None

    def to_dict(self) -> dict:
        return {
            "auc_roc": self.auc_roc,
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "threshold": self.threshold,
            "score_method": self.score_method,
            "best_f1": self.best_f1,
        }


def f1_at(flags, labels) -> EvalReport:
    """Precision/recall/F1 of a flag set; zero denominators give 0."""
    flags = np.asarray(flags, dtype=bool).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    if flags.shape != labels.shape:
        raise ValueError("flags and labels must have the same length")
    tp = int(np.sum(flags & labels))
    fp = int(np.sum(flags & ~labels))
    fn = int(np.sum(~flags & labels))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(f1=f1, precision=precision, recall=recall)


def best_f1_over_thresholds(scores, labels) -> float:
    """Maximum F1 over every threshold of the form score >= cut."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    n_pos = int(labels.sum())
    if n_pos == 0:
        return 0.0
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    tp = np.cumsum(labels[order].astype(np.float64))
    k = np.arange(1, scores.size + 1, dtype=np.float64)
    # thresholds sit at the last index of each tied run
    boundary = np.ones(scores.size, dtype=bool)
    boundary[:-1] = sorted_scores[:-1] != sorted_scores[1:]
    f1 = 2 * tp / (k + n_pos)
    return float(f1[boundary].max())


def evaluate_scores(score_field: ScoreField, labels) -> EvalReport:
    """Full report for one scored tensor against ground-truth labels."""
    base = f1_at(score_field.flags, labels)
    return replace(
        base,
        auc_roc=auc_roc(score_field.scores, labels),
        threshold=score_field.gamma,
        score_method=score_field.method,
        best_f1=best_f1_over_thresholds(score_field.scores, labels),
    )


@dataclass(frozen=True)
class EventList:
    """Named ground-truth events, each a set of tensor coordinates."""

    events: tuple[tuple[str, frozenset[tuple[int, ...]]], ...]

    @classmethod
    def from_records(cls, records) -> "EventList":
        events = []
        for rec in records:
            indices = frozenset(tuple(int(i) for i in idx) for idx in rec["indices"])
            events.append((str(rec["name"]), indices))
        return cls(events=tuple(events))

    @classmethod
    def load_json(cls, path) -> "EventList":
        return cls.from_records(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_records(self) -> list[dict]:
        return [
            {"name": name, "indices": sorted(list(idx) for idx in indices)}
            for name, indices in self.events
        ]


def topk_detected(scores: np.ndarray | ScoreField, events: EventList, k_percent: float) -> int:
    """Number of events intersecting the top ceil(k% * T) scoring entries."""
    if not 0 < k_percent <= 100:
        raise ValueError("k_percent must lie in (0, 100]")
    if not events.events:
        raise ValueError("event list is empty")
    arr = scores.scores if isinstance(scores, ScoreField) else np.asarray(scores)
    total = arr.size
    keep = math.ceil(k_percent / 100.0 * total)
    flat_order = np.argsort(-arr.ravel(), kind="stable")[:keep]
    mask = np.zeros(total, dtype=bool)
    mask[flat_order] = True
    mask = mask.reshape(arr.shape)
    detected = 0
    for _, indices in events.events:
        if any(mask[idx] for idx in indices):
            detected += 1
    return detected


@dataclass(frozen=True)
class SearchSpec:
    """Random-search space: lambda1 ~ U(0,1) with psi = 1 - lambda1, and the
    smoothness weights log-uniform over ``log_range``."""

    n_trials: int
    seed: int = 0
    base: SolverConfig = field(default_factory=lambda: SolverConfig(lambda1=0.5))
    scoring: ScoringConfig | None = None
    objective: str = "auc_plus_f1"
    score_method: str = "nll"
    k_percent: float = 3.0
    log_range: tuple[float, float] = (1e-8, 10.0)

    def validate(self) -> None:
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        lo, hi = self.log_range
        if not 0 < lo < hi:
            raise ValueError("log_range must satisfy 0 < lo < hi")


@dataclass
class Trial:
    index: int
    lambda1: float
    lambda_l: float
    lambda_t: float
    objective: float | None
    auc: float | None
    f1: float | None
    runtime_s: float
    error: str | None = None

    def to_record(self) -> dict:
        return {
            "trial": self.index,
            "lambda1": self.lambda1,
            "lambda_l": self.lambda_l,
            "lambda_t": self.lambda_t,
            "objective": self.objective,
            "auc": self.auc,
            "f1": self.f1,
            "runtime_s": self.runtime_s,
            **({"error": self.error} if self.error else {}),
        }


@dataclass
class SearchResult:
    best: Trial | None
    best_config: SolverConfig | None
    trials: list[Trial]


def _score(s_hat: np.ndarray, spec: SearchSpec) -> ScoreField:
    if spec.score_method == "abs":
        alpha = spec.scoring.alpha if spec.scoring is not None else 0.05
        return abs_scores(s_hat, alpha=alpha)
    if spec.scoring is None:
        raise ValueError("NLL scoring requires a ScoringConfig in the search spec")
    return nll_scores(s_hat, spec.scoring)


def random_search(
    spec: SearchSpec,
    y: np.ndarray,
    labels: np.ndarray | None = None,
    events: EventList | None = None,
) -> SearchResult:
    """Sample hyperparameters, run decompose -> score -> metric per trial, and
    return the argmax trial (ties broken toward the sparser solution, i.e.
    smaller lambda1).  Failed trials are logged and skipped."""
    spec.validate()
    if spec.objective == "auc_plus_f1" and labels is None:
        raise ValueError("auc_plus_f1 objective needs ground-truth labels")
    if spec.objective == "topk_events" and events is None:
        raise ValueError("topk_events objective needs an event list")

    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.log_range
    draws = [
        (
            float(rng.uniform(0.0, 1.0)),
            float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
            float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
        )
        for _ in range(spec.n_trials)
    ]

    trials: list[Trial] = []
    for idx, (lam1, lam_l, lam_t) in enumerate(draws):
        cfg = replace(spec.base, lambda1=lam1, lambda_l=lam_l, lambda_t=lam_t, psi=None)
        start = time.perf_counter()
        try:
            result = decompose(y, cfg)
            scored = _score(result.s_hat, spec)
            if spec.objective == "topk_events":
                value = float(topk_detected(scored, events, spec.k_percent))
                auc = f1 = None
                if labels is not None:
                    report = evaluate_scores(scored, labels)
                    auc, f1 = report.auc_roc, report.f1
            else:
                report = evaluate_scores(scored, labels)
                auc, f1 = report.auc_roc, report.f1
                value = auc + f1
            trials.append(
                Trial(idx, lam1, lam_l, lam_t, value, auc, f1, time.perf_counter() - start)
            )
        except Exception as exc:  # noqa: BLE001 - a failed trial must not kill the sweep
            trials.append(
                Trial(idx, lam1, lam_l, lam_t, None, None, None,
                      time.perf_counter() - start, error=str(exc))
            )

    ok = [t for t in trials if t.objective is not None]
    if not ok:
        return SearchResult(best=None, best_config=None, trials=trials)
    best = max(ok, key=lambda t: (t.objective, -t.lambda1))
    best_config = replace(
        spec.base, lambda1=best.lambda1, lambda_l=best.lambda_l, lambda_t=best.lambda_t, psi=None
    )
    return SearchResult(best=best, best_config=best_config, trials=trials)
