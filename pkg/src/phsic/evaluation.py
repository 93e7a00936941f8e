"""Ranking and selection harness: pseudo-negatives, ROC-AUC, MRR, Recall@k,
Spearman's rho and top-K data selection.

Scores may carry the PMI markers: ``nan`` (undefined) sorts below ``-inf``,
which sorts below every finite score. Ties are resolved deterministically:
half credit in ROC-AUC, ascending candidate index in rankings, ascending
original index in selection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError

DEFAULT_CANDIDATES = 10


def _tiers(scores):
    s = np.asarray(scores, dtype=np.float64).ravel()
    tier = np.where(np.isnan(s), 0, np.where(s == -np.inf, 1, 2))
    val = np.where(tier == 2, s, 0.0)
    return tier, val


def average_ranks(scores) -> np.ndarray:
    """1-based ranks in ascending order with ties sharing their mean rank."""
    tier, val = _tiers(scores)
    n = tier.size
    order = np.lexsort((val, tier))
    t, v = tier[order], val[order]
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = (t[1:] != t[:-1]) | (v[1:] != v[:-1])
    starts = np.flatnonzero(new_group)
    ends = np.append(starts[1:], n)
    mean_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(n)
    ranks[order] = np.repeat(mean_rank, ends - starts)
    return ranks


@dataclass(frozen=True)
class RankingInstance:
    context: int
    candidates: tuple
    gold_position: int

    @property
    def gold(self) -> int:
        return self.candidates[self.gold_position]


def make_negatives(ds_or_n, m: int = DEFAULT_CANDIDATES, seed: int = 0) -> list[RankingInstance]:
    """One m-choice question per pair: its own y plus ``m - 1`` other y's.

    Distractors are drawn uniformly without replacement from the other pairs'
    responses and the gold response is placed at a random position.
    """
    n = ds_or_n if isinstance(ds_or_n, (int, np.integer)) else len(ds_or_n)
    if m < 2:
        raise ParameterError("need at least 2 candidates per instance")
    if m > n:
        raise ParameterError(f"{m} candidates requested but only {n} pairs available")
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        others = rng.choice(n - 1, size=m - 1, replace=False)
        others = others + (others >= i)
        pos = int(rng.integers(m))
        cands = [int(j) for j in others]
        cands.insert(pos, i)
        out.append(RankingInstance(i, tuple(cands), pos))
    return out


def roc_auc(pos_scores, neg_scores) -> float:
    """Mann-Whitney estimate of P(pos > neg) with ties counted as one half."""
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ParameterError("roc_auc needs nonempty positive and negative scores")
    ranks = average_ranks(np.concatenate([pos, neg]))
    n_pos, n_neg = pos.size, neg.size
    u_pos = ranks[:n_pos].sum() - n_pos * (n_pos + 1) / 2.0
    u_neg = n_pos * n_neg - u_pos
    # Written symmetrically so that auc(a, b) + auc(b, a) == 1.
    return 0.5 + (u_pos - u_neg) / (2.0 * n_pos * n_neg)


@dataclass(frozen=True)
class MetricsReport:
    roc_auc: float
    mrr: float
    recall_at: dict = field(default_factory=dict)
    n_instances: int = 0

    def to_kv(self) -> str:
        lines = [
            f"roc_auc={self.roc_auc:.17g}",
            f"mrr={self.mrr:.17g}",
        ]
        lines += [f"recall@{k}={v:.17g}" for k, v in sorted(self.recall_at.items())]
        lines.append(f"n_instances={self.n_instances}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        lines = [
            f"instances  {self.n_instances}",
            f"ROC-AUC    {self.roc_auc:.4f}",
            f"MRR        {self.mrr:.4f}",
        ]
        lines += [f"Recall@{k:<3d}{v:.4f}" for k, v in sorted(self.recall_at.items())]
        return "\n".join(lines) + "\n"


def gold_rank(scores, gold_position: int, candidate_ids=None) -> int:
    """1 + candidates scoring strictly higher + tied candidates with a smaller id."""
    tier, val = _tiers(scores)
    ids = np.arange(tier.size) if candidate_ids is None else np.asarray(candidate_ids)
    gt, gv, gid = tier[gold_position], val[gold_position], ids[gold_position]
    higher = (tier > gt) | ((tier == gt) & (val > gv))
    tied = (tier == gt) & (val == gv) & (ids < gid)
    return 1 + int(np.count_nonzero(higher)) + int(np.count_nonzero(tied))


def mrr_and_recall(instances: Sequence[RankingInstance], scores, ks=(1, 2)) -> MetricsReport:
    """Rank metrics over m-choice instances; ``scores[i][j]`` scores candidate j of instance i.

    ROC-AUC pools gold scores against all distractor scores.
    """
    if len(instances) != len(scores):
        raise ParameterError(f"{len(instances)} instances but {len(scores)} score lists")
    if not instances:
        raise ParameterError("no instances to evaluate")
    ranks = []
    pos, neg = [], []
    for inst, s in zip(instances, scores):
        s = np.asarray(s, dtype=np.float64)
        if s.shape != (len(inst.candidates),):
            raise ParameterError(
                f"instance {inst.context}: {s.size} scores for {len(inst.candidates)} candidates"
            )
        ranks.append(gold_rank(s, inst.gold_position, inst.candidates))
        pos.append(s[inst.gold_position])
        neg.extend(np.delete(s, inst.gold_position))
    ranks = np.asarray(ranks)
    recall = {int(k): float(np.mean(ranks <= k)) for k in ks}
    return MetricsReport(
        roc_auc=roc_auc(pos, neg),
        mrr=float(np.mean(1.0 / ranks)),
        recall_at=recall,
        n_instances=len(ranks),
    )


def spearman_rho(a, b) -> float:
    """Pearson correlation of average ranks; ``nan`` if either input is constant."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ParameterError("spearman_rho needs sequences of equal length")
    if a.size < 2:
        raise ParameterError("spearman_rho needs at least 2 observations")
    ra = average_ranks(a) - (a.size + 1) / 2.0
    rb = average_ranks(b) - (b.size + 1) / 2.0
    denom = np.sqrt(np.dot(ra, ra) * np.dot(rb, rb))
    if denom == 0:
        return float("nan")
    return float(np.dot(ra, rb) / denom)


@dataclass(frozen=True, eq=False)
class SelectionResult:
    order: np.ndarray
    scores: np.ndarray
    k: int

    @property
    def selected(self) -> np.ndarray:
        return self.order[: self.k]

    @property
    def rejected(self) -> np.ndarray:
        return self.order[self.k:]

    def kept_mask(self) -> np.ndarray:
        mask = np.zeros(self.order.size, dtype=bool)
        mask[self.selected] = True
        return mask


def select_top_k(scores, k: int) -> SelectionResult:
    """Descending stable sort by score; ties keep ascending original index."""
    tier, val = _tiers(scores)
    n = tier.size
    if not 1 <= k <= n:
        raise ParameterError(f"k must be in [1, {n}], got {k}")
    idx = np.arange(n)
    order = np.lexsort((idx, -val, -tier))
    s = np.asarray(scores, dtype=np.float64).ravel()
    return SelectionResult(order, s[order], int(k))
