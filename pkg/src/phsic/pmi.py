"""Maximum-likelihood PMI from exact pair counts, the counting baseline.

Scores use the natural log. A pair whose sides were both seen but never
together scores ``-inf``; a pair with an unseen side is undefined and scores
``nan`` (see :data:`UNDEFINED`). Ranking code orders ``nan < -inf < finite``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .dataset import PairedDataset
from .errors import ParameterError

SURFACE = "surface"
TOKEN_SET = "token-set"

UNDEFINED = math.nan
NEG_INF = -math.inf


def is_undefined(score) -> bool:
    return isinstance(score, float) and math.isnan(score)


def pair_key(text: str, tokens, key_mode: str = SURFACE):
    if key_mode == SURFACE:
        return text
    if key_mode == TOKEN_SET:
        return tuple(sorted(tokens))
    raise ParameterError(f"unknown key mode {key_mode!r}")


@dataclass(frozen=True, eq=False)
class PmiCountModel:
    pair_counts: Counter
    x_counts: Counter
    y_counts: Counter
    n: int
    key_mode: str = SURFACE
    smoothing: float = 0.0


def fit_pmi(ds: PairedDataset, key_mode: str = SURFACE, smoothing: float = 0.0) -> PmiCountModel:
    """Count pairs and marginals.

    ``smoothing`` adds ``k`` to every pair count of seen marginals at scoring
    time (add-k); the default 0 is the plain maximum-likelihood estimate.
    """
    if smoothing < 0:
        raise ParameterError("smoothing must be >= 0")
    pairs = Counter()
    for xt, yt, xtok, ytok in zip(ds.x_texts, ds.y_texts, ds.x_tokens, ds.y_tokens):
        pairs[(pair_key(xt, xtok, key_mode), pair_key(yt, ytok, key_mode))] += 1
    xc, yc = Counter(), Counter()
    for (x, y), c in pairs.items():
        xc[x] += c
        yc[y] += c
    return PmiCountModel(pairs, xc, yc, ds.n, key_mode, smoothing)


def score_pmi(model: PmiCountModel, x_key, y_key) -> float:
    """``log(n * c(x, y) / (c(x) * c(y)))`` with the marker conventions above."""
    cx = model.x_counts.get(x_key, 0)
    cy = model.y_counts.get(y_key, 0)
    if cx == 0 or cy == 0:
        return UNDEFINED
    cxy = model.pair_counts.get((x_key, y_key), 0)
    k = model.smoothing
    if k:
        nx, ny = len(model.x_counts), len(model.y_counts)
        return math.log((model.n + k * nx * ny) * (cxy + k) / ((cx + k * ny) * (cy + k * nx)))
    if cxy == 0:
        return NEG_INF
    return math.log(model.n * cxy / (cx * cy))


def score_pmi_batch(model: PmiCountModel, ds: PairedDataset) -> list[float]:
    mode = model.key_mode
    return [
        score_pmi(model, pair_key(xt, xtok, mode), pair_key(yt, ytok, mode))
        for xt, yt, xtok, ytok in zip(ds.x_texts, ds.y_texts, ds.x_tokens, ds.y_tokens)
    ]


def format_pmi(score: float) -> str:
    if is_undefined(score):
        return "undef"
    if score == NEG_INF:
        return "-inf"
    return f"{score:.17g}"
