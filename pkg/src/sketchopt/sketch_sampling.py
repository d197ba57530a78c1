"""Row leverage scores, weighted row-sampling sketches, and score schemes.

A sampling sketch selects t rows independently with replacement from a
probability vector p and rescales pick j of row i by 1/sqrt(t * p_i), making
the sampled Gram matrix an unbiased estimate: E[C^T C] = B^T B.  Scores can be
exact (thin SVD), approximated in o(n d^2) structure (Gaussian embedding + QR
+ JL projection), or derived from an optimization problem's local curvature
("schemes": uniform / leverage / row-norm / their mixed variants).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core_complex import qr, spectral_norm, svd


@dataclass
class SamplingSketch:
    """Weighted row selection: pick j takes row ``rows[j]`` scaled by ``weights[j]``."""

    source_rows: int
    rows: np.ndarray
    weights: np.ndarray

    @property
    def picks(self):
        """(row_index, weight) pairs, one per sampled row."""
        return list(zip(self.rows.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return int(self.rows.size)


@dataclass
class SchemeResult:
    """Normalized sampling probabilities plus a degenerate-input flag."""

    probs: np.ndarray
    scheme: str
    fell_back: bool = False


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def exact_leverage_scores(B) -> np.ndarray:
    """Row leverage scores l_i = ||U_i||^2 from the thin SVD of B.

    Equivalently diag(B (B*B)^+ B*); entries lie in [0, 1] and sum to rank(B).
    Rank deficiency is handled by dropping singular values below the standard
    cutoff max(sigma) * max(n, d) * eps.
    """
    B = np.asarray(B)
    U, sigma, _ = svd(B)
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.zeros(B.shape[0])
    cutoff = sigma[0] * max(B.shape) * np.finfo(np.float64).eps
    rank = int(np.count_nonzero(sigma > cutoff))
    return np.sum(np.abs(U[:, :rank]) ** 2, axis=1)


def approx_leverage_scores(B, embed_rows: int | None = None,
                           jl_cols: int | None = None, seed=0) -> np.ndarray:
    """Approximate leverage scores without forming any n x n intermediate.

    Pipeline: a dense Gaussian embedding S (``embed_rows`` x n, default 4d
    rows) compresses B; the R factor of QR(S B) whitens it; a JL projection G
    (d x ``jl_cols`` Gaussian, scaled 1/sqrt(jl_cols), default
    ceil(8 ln n) columns) reduces the row-norm computation.  Returns
    ||e_i^T B R^{-1} G||^2, a (1 +- O(eps)) estimate of the exact scores with
    high probability.

    Raises ValueError when the R factor is singular (rank-deficient B); use
    exact_leverage_scores in that case.
    """
    B = np.asarray(B)
    n, d = B.shape
    s = int(embed_rows) if embed_rows is not None else 4 * d
    r = int(jl_cols) if jl_cols is not None else int(np.ceil(8 * np.log(max(n, 2))))
    if s < d:
        raise ValueError("approx_leverage_scores: embed_rows must be >= cols")
    rng = _rng(seed)
    S = rng.standard_normal((s, n)) / np.sqrt(s)
    _, T = qr(S @ B)
    diag = np.abs(np.diag(T))
    if diag.min() <= max(s, d) * np.finfo(np.float64).eps * max(diag.max(), 1e-300):
        raise ValueError(
            "approx_leverage_scores: rank-deficient input (singular R factor); "
            "use exact_leverage_scores instead"
        )
    G = rng.standard_normal((d, r)) / np.sqrt(r)
    W = scipy.linalg.solve_triangular(T, G, lower=False)  # R^{-1} G, d x r
    proj = B @ W
    return np.sum(np.abs(proj) ** 2, axis=1)


def build_sampling_sketch(probs, t: int, seed=0) -> SamplingSketch:
    """Draw t rows i.i.d. with replacement from probs; weight = 1/sqrt(t p_i)."""
    probs = np.asarray(probs, dtype=float)
    if t < 1:
        raise ValueError("build_sampling_sketch: t must be >= 1")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise ValueError("build_sampling_sketch: probabilities must be finite and >= 0")
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(
            f"build_sampling_sketch: probabilities sum to {total!r}, expected 1"
        )
    rng = _rng(seed)
    rows = rng.choice(probs.size, size=t, replace=True, p=probs / total)
    weights = 1.0 / np.sqrt(t * probs[rows])
    return SamplingSketch(source_rows=int(probs.size), rows=rows, weights=weights)


def apply_sketch(S: SamplingSketch, B) -> np.ndarray:
    """Materialize the sketched matrix C: row j = weights[j] * B[rows[j]]."""
    B = np.asarray(B)
    if S.source_rows != B.shape[0]:
        raise ValueError("apply_sketch: sketch built over a different row count")
    if S.rows.size and (S.rows.min() < 0 or S.rows.max() >= B.shape[0]):
        raise ValueError("apply_sketch: row index out of range")
    return S.weights[:, None] * B[S.rows]


_SCHEME_ALIASES = {
    "uniform": "uniform",
    "ls": "ls",
    "rn": "rn",
    "ls-mx": "ls-mx",
    "ls_mx": "ls-mx",
    "rn-mx": "rn-mx",
    "rn_mx": "rn-mx",
}


def canonical_scheme(scheme: str) -> str:
    key = scheme.strip().lower()
    if key not in _SCHEME_ALIASES:
        raise ValueError(f"unknown sampling scheme {scheme!r}")
    return _SCHEME_ALIASES[key]


def scheme_probabilities(problem, x, scheme: str, meter=None,
                         cache: dict | None = None) -> SchemeResult:
    """Normalized row-sampling probabilities for one curvature-aware scheme.

    Schemes (D = diag of second derivatives at x, rows a_i of problem.A):

    - ``uniform``: 1/n.
    - ``ls``: leverage scores of D^{1/2} A, computed in real arithmetic on
      |D|^{1/2} A (identical scores since (D^{1/2}A)^* (D^{1/2}A) = A^T|D|A).
    - ``rn``: |f_i''| * ||a_i||^2.
    - ``ls-mx``: leverage(A) + leverage(D A), the split-product variant.
    - ``rn-mx``: ||a_i|| + ||(D A)_i||.

    All-zero scores fall back to uniform with a RuntimeWarning and a flag.
    The optional meter is charged per the documented unit policy (row norms of
    an n x d matrix = 1 unit; a leverage computation = d units; the d_diag
    evaluation charges itself).  ``cache`` persists the x-independent pieces
    (leverage/row norms of A) across outer iterations.
    """
    scheme = canonical_scheme(scheme)
    A = problem.A
    n, d = A.shape
    if scheme == "uniform":
        return SchemeResult(np.full(n, 1.0 / n), scheme)
    if cache is None:
        cache = {}
    dvec = problem.d_diag(x, meter=meter)
    absd = np.abs(dvec)
    if scheme == "ls":
        _charge(meter, d)
        scores = exact_leverage_scores(np.sqrt(absd)[:, None] * A)
    elif scheme == "rn":
        _charge(meter, 1)
        scores = absd * _cached_row_sqnorms(A, cache)
    elif scheme == "ls-mx":
        if "lev_A" not in cache:
            _charge(meter, d)
            cache["lev_A"] = exact_leverage_scores(A)
        _charge(meter, d)
        scores = cache["lev_A"] + exact_leverage_scores(absd[:, None] * A)
    else:  # rn-mx
        _charge(meter, 1)
        rn = np.sqrt(_cached_row_sqnorms(A, cache))
        scores = rn + absd * rn
    total = scores.sum()
    if total <= 0.0:
        warnings.warn(
            f"scheme {scheme!r}: all scores are zero; falling back to uniform",
            RuntimeWarning,
        )
        return SchemeResult(np.full(n, 1.0 / n), scheme, fell_back=True)
    return SchemeResult(scores / total, scheme)


def _charge(meter, units: int) -> None:
    if meter is not None:
        meter.add(units)


def _cached_row_sqnorms(A, cache: dict) -> np.ndarray:
    if "row_sqnorms_A" not in cache:
        cache["row_sqnorms_A"] = np.einsum("ij,ij->i", A, A)
    return cache["row_sqnorms_A"]


def gamma_factor(B, approx_scores) -> float:
    """Spectral norm of sum_i (||B_i||^2 / scores_i) B_i* B_i.

    The sampling-complexity inflation factor attached to approximate scores.
    Zero rows contribute nothing; a zero score on a nonzero row is invalid.
    """
    B = np.asarray(B)
    scores = np.asarray(approx_scores, dtype=float)
    sqnorms = np.sum(np.abs(B) ** 2, axis=1)
    nonzero = sqnorms > 0
    if np.any(nonzero & (scores <= 0)):
        raise ValueError("gamma_factor: zero/negative score on a nonzero row")
    w = np.zeros_like(sqnorms)
    w[nonzero] = sqnorms[nonzero] / scores[nonzero]
    M = (B.conj() * w[:, None]).T @ B
    return spectral_norm(M)


def embedding_distortion(S, M) -> float:
    """Worst squared-length distortion of S on the (complex) column span of M.

    Returns max_i |sigma_i(S Q)^2 - 1| where Q is an orthonormal basis of the
    real span of (Re M, Im M).  A return value eta certifies
    | ||S x||^2 - ||x||^2 | <= eta ||x||^2 for every complex x in range(M),
    which is the hypothesis of the sketched product bound
    ||A* S^T S B - A* B|| <= eta ||A|| ||B||.
    """
    M = np.asarray(M)
    X = np.hstack([M.real, M.imag]) if np.iscomplexobj(M) else M.real
    Q = scipy.linalg.orth(X)
    sig = np.linalg.svd(np.asarray(S) @ Q, compute_uv=False)
    return float(np.max(np.abs(sig**2 - 1.0)))
