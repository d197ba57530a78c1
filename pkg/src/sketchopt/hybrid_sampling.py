"""Hybrid deterministic/randomized row selection for Gram estimation.

Rows whose leverage score clears a threshold are pulled out deterministically
(over one or more rounds, with per-round score recomputation), and the
remaining rows are covered by a weighted random sample.  The resulting Gram
estimate adds the selected rows' exact contribution to the sampled part's
unbiased one, which strips the dominant variance term whenever a few rows
carry most of the spectral mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sketch_sampling import (
    SamplingSketch,
    apply_sketch,
    build_sampling_sketch,
    exact_leverage_scores,
)

_REMAINDER_MODES = ("uniform", "leverage")


@dataclass
class HybridPlan:
    """Deterministic row set plus a sampling sketch over the remainder.

    ``deterministic_rows`` and ``remainder`` partition a subset of
    ``range(source_rows)``; ``sampled.rows`` index into ``remainder`` (so the
    original indices of the picks are ``remainder[sampled.rows]``).
    ``saturated`` means the plan has no random picks at all — either every row
    went deterministic, or the budget left nothing for sampling.
    """

    source_rows: int
    deterministic_rows: np.ndarray
    remainder: np.ndarray
    sampled: SamplingSketch
    rounds: int
    threshold: float
    remainder_mode: str
    saturated: bool


def _empty_sketch(n_remaining: int) -> SamplingSketch:
    return SamplingSketch(
        source_rows=int(n_remaining),
        rows=np.zeros(0, dtype=np.int64),
        weights=np.zeros(0),
    )


def _sample_remainder(B, remainder: np.ndarray, h: int, remainder_mode: str,
                      seed) -> SamplingSketch:
    n_rem = remainder.size
    if h <= 0 or n_rem == 0:
        return _empty_sketch(n_rem)
    if remainder_mode == "uniform":
        probs = np.full(n_rem, 1.0 / n_rem)
    else:
        scores = exact_leverage_scores(np.asarray(B)[remainder])
        total = scores.sum()
        if total <= 0.0:
            probs = np.full(n_rem, 1.0 / n_rem)
        else:
            probs = scores / total
    return build_sampling_sketch(probs, h, seed=seed)


def ls_det_sample(B, rounds: int = 1, threshold: float = 0.5, *,
                  sample_count: int, remainder_mode: str = "uniform",
                  seed=0, cap: int | None = None) -> HybridPlan:
    """Select heavy-leverage rows deterministically, then sample the rest.

    Per round, leverage scores of the still-unselected rows are recomputed
    and every row scoring >= ``threshold`` moves to the deterministic set,
    capped at ``cap`` rows per round (default 2*cols), largest scores first.
    After ``rounds`` rounds, ``sample_count`` rows are drawn i.i.d. from the
    remainder — uniformly (weights sqrt(n_remaining/sample_count)) or by
    remainder leverage scores.  Deterministic rows always carry weight 1.

    A ``threshold`` above 1 selects nothing (no leverage score exceeds 1) and
    the plan degenerates to pure sampling.  An empty remainder yields a
    saturated plan whose Gram estimate is exact.
    """
    B = np.asarray(B)
    n, d = B.shape
    if rounds < 1:
        raise ValueError("ls_det_sample: rounds must be >= 1")
    if threshold <= 0.0:
        raise ValueError("ls_det_sample: threshold must be positive")
    if sample_count < 1:
        raise ValueError("ls_det_sample: sample_count must be >= 1")
    if remainder_mode not in _REMAINDER_MODES:
        raise ValueError(
            f"ls_det_sample: remainder_mode must be one of {_REMAINDER_MODES}"
        )
    cap = 2 * d if cap is None else int(cap)
    if cap < 1:
        raise ValueError("ls_det_sample: cap must be >= 1")

    remaining = np.arange(n)
    chosen: list[np.ndarray] = []
    for _ in range(rounds):
        if remaining.size == 0:
            break
        scores = exact_leverage_scores(B[remaining])
        eligible = np.flatnonzero(scores >= threshold)
        if eligible.size == 0:
            break
        order = eligible[np.argsort(-scores[eligible], kind="stable")]
        take = order[:cap]
        chosen.append(remaining[take])
        keep = np.ones(remaining.size, dtype=bool)
        keep[take] = False
        remaining = remaining[keep]

    deterministic = (
        np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=np.int64)
    )
    sampled = _sample_remainder(B, remaining, sample_count, remainder_mode, seed)
    return HybridPlan(
        source_rows=n,
        deterministic_rows=deterministic,
        remainder=remaining,
        sampled=sampled,
        rounds=rounds,
        threshold=float(threshold),
        remainder_mode=remainder_mode,
        saturated=len(sampled) == 0,
    )


def ls_det_fraction_plan(B, budget: int, fraction: float, *,
                         remainder_mode: str = "uniform", seed=0) -> HybridPlan:
    """Split a fixed row budget between top-leverage rows and random picks.

    ``round(fraction * budget)`` rows with the largest exact leverage scores
    go deterministic (weight 1); the rest of the budget samples the remaining
    rows per ``remainder_mode``.  ``fraction=0`` is pure sampling;
    ``fraction=1`` keeps only the top-``budget`` rows and drops the remainder
    entirely (a deliberately biased estimate, useful as a baseline).
    """
    B = np.asarray(B)
    n, _ = B.shape
    if budget < 1:
        raise ValueError("ls_det_fraction_plan: budget must be >= 1")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("ls_det_fraction_plan: fraction must be in [0, 1]")
    if remainder_mode not in _REMAINDER_MODES:
        raise ValueError(
            f"ls_det_fraction_plan: remainder_mode must be one of {_REMAINDER_MODES}"
        )
    k = int(round(fraction * budget))
    k = min(k, n)
    if k > 0:
        scores = exact_leverage_scores(B)
        deterministic = np.sort(np.argsort(-scores, kind="stable")[:k])
    else:
        deterministic = np.zeros(0, dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    mask[deterministic] = False
    remainder = np.flatnonzero(mask)
    sampled = _sample_remainder(B, remainder, budget - k, remainder_mode, seed)
    return HybridPlan(
        source_rows=n,
        deterministic_rows=deterministic,
        remainder=remainder,
        sampled=sampled,
        rounds=1,
        threshold=float("nan"),
        remainder_mode=remainder_mode,
        saturated=len(sampled) == 0,
    )


def hybrid_gram(plan: HybridPlan, B) -> np.ndarray:
    """Gram estimate: exact part over the deterministic rows + sampled part.

    Returns sum_{i in deterministic} B_i^T B_i + C^T C with
    C = apply_sketch(plan.sampled, B[plan.remainder]).  Transposes are plain
    (non-conjugated), matching the unbiasedness target E[C^T C] = B^T B.
    """
    B = np.asarray(B)
    if B.shape[0] != plan.source_rows:
        raise ValueError("hybrid_gram: plan built over a different row count")
    d = B.shape[1]
    out = np.zeros((d, d), dtype=B.dtype)
    if plan.deterministic_rows.size:
        BE = B[plan.deterministic_rows]
        out = out + BE.T @ BE
    C = apply_sketch(plan.sampled, B[plan.remainder])
    if C.shape[0]:
        out = out + C.T @ C
    return out
