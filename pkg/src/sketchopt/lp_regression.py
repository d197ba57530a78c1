"""Complex p-norm regression reduced to a small real p-norm regression.

The reduction lifts ``min_x ||A x - b||_p`` over complex unknowns to an
equivalent real problem whose residual pairs ``(2i, 2i+1)`` carry the real and
imaginary parts of residual ``i``.  Independent Gaussian blocks then compress
each pair: for finite ``p`` a pair contributes one row (or ``t`` rows when its
leverage marks it heavy), calibrated so the expected p-th moment of the
compressed coordinates reproduces the pair's Euclidean norm; for
``p = infinity`` a sign-enumeration matrix turns an l1 estimate of the pair
norm into a max, so the compressed problem is again a plain max-norm fit.
Small dense instances are solved by iteratively reweighted least squares
(finite ``p``) or a smoothed-max temperature schedule (``p = infinity``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core_complex import lift_matrix, phi, unphi
from .sketch_sampling import _rng

__all__ = [
    "BlockSketch",
    "LiftedRegression",
    "LpSolution",
    "SketchSolveResult",
    "build_sketch_finite_p",
    "build_sketch_inf",
    "classify_pairs",
    "complex_lp_solve",
    "gaussian_moment_scale",
    "grouped_lp_solve",
    "lift_instance",
    "lp_leverage_scores",
    "sign_enumeration_matrix",
    "sketch_and_solve",
    "small_lp_solve",
]

#: Hard cap on the sign-enumeration width: 2^20 rows is the largest block the
#: max-norm route is allowed to materialize.
MAX_ENUMERATION_BITS = 20

#: Smoothing floor added to group norms inside the reweighted solver so that
#: weights stay finite for p < 2.
IRLS_SMOOTHING = 1e-8


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass
class LiftedRegression:
    """Real lift of a complex regression instance.

    ``Ap`` is the 2n x 2d real representation of ``A``, ``bp`` the interleaved
    real image of ``b``, and ``pairs`` lists the row pairs ``(2i, 2i+1)`` that
    jointly carry complex residual ``i``.
    """

    Ap: np.ndarray
    bp: np.ndarray
    pairs: list


@dataclass
class BlockSketch:
    """Block-diagonal compression aligned with residual pairs.

    ``blocks[i]`` multiplies the two rows of ``pairs[i]``; results stack in
    pair order.  ``apply`` never materializes the assembled matrix; use
    ``assembled`` only at small sizes.
    """

    pairs: list
    blocks: list
    p: float

    @property
    def total_rows(self) -> int:
        return int(sum(b.shape[0] for b in self.blocks))

    def apply(self, M):
        """Multiply the block-diagonal sketch against rows of ``M``."""
        M = np.asarray(M, dtype=float)
        pieces = [blk @ M[list(pair)] for pair, blk in zip(self.pairs, self.blocks)]
        if not pieces:
            shape = (0,) if M.ndim == 1 else (0, M.shape[1])
            return np.zeros(shape)
        return np.concatenate(pieces, axis=0)

    def assembled(self) -> np.ndarray:
        """Dense block-diagonal matrix (small instances only)."""
        n_cols = 1 + max(max(pair) for pair in self.pairs) if self.pairs else 0
        G = np.zeros((self.total_rows, n_cols))
        pos = 0
        for (a, b), blk in zip(self.pairs, self.blocks):
            rows = blk.shape[0]
            G[pos:pos + rows, a] = blk[:, 0]
            G[pos:pos + rows, b] = blk[:, 1]
            pos += rows
        return G


@dataclass
class LpSolution:
    """Solver output: minimizer, certified objective, and convergence flag."""

    y: np.ndarray
    objective: float
    converged: bool
    iterations: int
    x: np.ndarray | None = None


@dataclass
class SketchSolveResult:
    """Sketch-and-solve output with the heavy/light pair partition used."""

    xhat: np.ndarray
    sketched_objective: float
    converged: bool
    heavy: np.ndarray
    light: np.ndarray


# ---------------------------------------------------------------------------
# lifting
# ---------------------------------------------------------------------------


def lift_instance(A, b) -> LiftedRegression:
    """Lift a complex regression instance to interleaved real form."""
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex).ravel()
    if A.ndim != 2:
        raise ValueError("lift_instance: A must be a matrix")
    if A.shape[0] != b.size:
        raise ValueError("lift_instance: A and b row counts differ")
    pairs = [(2 * i, 2 * i + 1) for i in range(A.shape[0])]
    return LiftedRegression(Ap=lift_matrix(A), bp=phi(b), pairs=pairs)


# ---------------------------------------------------------------------------
# moment calibration and sign enumeration
# ---------------------------------------------------------------------------


def gaussian_moment_scale(p) -> float:
    """Entry std making ``E|<g, y>|^p = ||y||_2^p`` for Gaussian ``g``.

    For a centred Gaussian with std ``sigma``, ``E|Z|^p`` equals
    ``sigma^p 2^{p/2} Gamma((p+1)/2) / sqrt(pi)``; solving for the std that
    cancels the constant gives ``(sqrt(pi) / (2^{p/2} Gamma((p+1)/2)))^{1/p}``.
    """
    p = float(p)
    if not (1.0 <= p < np.inf):
        raise ValueError("gaussian_moment_scale: p must be finite and >= 1")
    log_scale = (0.5 * math.log(math.pi) - 0.5 * p * math.log(2.0)
                 - math.lgamma(0.5 * (p + 1.0))) / p
    return math.exp(log_scale)


def sign_enumeration_matrix(s) -> np.ndarray:
    """All ``2^s`` sign rows in ``{-1,+1}^s``, so ``max |R z| = ||z||_1``."""
    s = int(s)
    if s < 1:
        raise ValueError("sign_enumeration_matrix: s must be >= 1")
    if s > MAX_ENUMERATION_BITS:
        raise ValueError(
            "sign_enumeration_matrix: s = %d exceeds the 2^%d-row budget"
            % (s, MAX_ENUMERATION_BITS))
    codes = (np.arange(2 ** s)[:, None] >> np.arange(s)[None, :]) & 1
    return codes.astype(float) * 2.0 - 1.0


# ---------------------------------------------------------------------------
# p-norm leverage scores and pair classification
# ---------------------------------------------------------------------------


def lp_leverage_scores(M, p, embed_rows=None, seed=0) -> np.ndarray:
    """Row p-norm masses of an l2 well-conditioned basis for span(M).

    The basis is ``U = M R^{-1}`` with ``R`` from a QR factorization of a
    Gaussian row-compression of ``M``; each row's score is ``||U_i||_p^p``.
    ``p = 2`` short-circuits to exact leverage scores.  Rank-deficient inputs
    fall back to an orthonormal span basis from the SVD (pseudoinverse path).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("lp_leverage_scores: M must be a matrix")
    p = float(p)
    if not (1.0 <= p < np.inf):
        raise ValueError("lp_leverage_scores: p must be finite and >= 1")
    n, k = M.shape

    def _span_basis():
        U, sv, _ = np.linalg.svd(M, full_matrices=False)
        if sv.size == 0 or sv[0] == 0.0:
            return U[:, :0]
        rank = int(np.sum(sv > max(n, k) * np.finfo(float).eps * sv[0]))
        return U[:, :rank]

    if p == 2.0:
        U = _span_basis()
        return np.sum(U * U, axis=1)

    if embed_rows is None:
        embed_rows = 4 * k
    rng = _rng(seed)
    S = rng.standard_normal((int(embed_rows), n)) / np.sqrt(float(embed_rows))
    R = np.linalg.qr(S @ M, mode="r")
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag.min() <= max(n, k) * np.finfo(float).eps * diag.max():
        U = _span_basis()
    else:
        U = np.linalg.solve(R.T, M.T).T
    return np.sum(np.abs(U) ** p, axis=1)


def classify_pairs(scores, d, p):
    """Split pairs into heavy/light at the threshold ``d^(-1/q - 1)``.

    ``q`` is the dual exponent of ``p`` (infinite at ``p = 1``); a pair is
    heavy when either of its two rows reaches the threshold.  Returns sorted
    arrays of heavy and light pair indices.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    if scores.size % 2:
        raise ValueError("classify_pairs: scores must cover whole row pairs")
    d = int(d)
    if d < 1:
        raise ValueError("classify_pairs: d must be >= 1")
    p = float(p)
    if not (p >= 1.0):
        raise ValueError("classify_pairs: p must satisfy p >= 1")
    inv_q = 1.0 - 1.0 / p  # 1/q with q = p/(p-1); zero at p = 1
    gamma = float(d) ** (-(inv_q + 1.0))
    pair_scores = np.maximum(scores[0::2], scores[1::2])
    heavy = np.flatnonzero(pair_scores >= gamma)
    light = np.flatnonzero(pair_scores < gamma)
    return heavy, light


# ---------------------------------------------------------------------------
# block sketch construction
# ---------------------------------------------------------------------------


def _check_pairs(pairs):
    out = []
    for pair in pairs:
        a, b = pair
        out.append((int(a), int(b)))
    return out


def build_sketch_finite_p(pairs, heavy, t, p, seed=0) -> BlockSketch:
    """Independent Gaussian blocks: ``t x 2`` for heavy pairs, ``1 x 2`` else.

    Entries have std ``gaussian_moment_scale(p)``; heavy blocks are scaled by
    ``t^(-1/p)`` so heavy and light contributions estimate the same pair norm.
    """
    pairs = _check_pairs(pairs)
    p = float(p)
    if not (1.0 <= p < np.inf):
        raise ValueError("build_sketch_finite_p: p must be finite and >= 1")
    t = int(t)
    if t < 1:
        raise ValueError("build_sketch_finite_p: t must be >= 1")
    heavy_set = {int(i) for i in heavy}
    sigma = gaussian_moment_scale(p)
    heavy_scale = sigma * t ** (-1.0 / p)
    blocks = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(len(pairs))):
        rng = _rng(child)
        if i in heavy_set:
            blocks.append(heavy_scale * rng.standard_normal((t, 2)))
        else:
            blocks.append(sigma * rng.standard_normal((1, 2)))
    return BlockSketch(pairs=pairs, blocks=blocks, p=p)


def build_sketch_inf(pairs, s, seed=0) -> BlockSketch:
    """Sign-enumeration blocks for the max-norm route.

    Every pair gets ``R @ G`` where ``G`` is ``s x 2`` Gaussian with entry std
    ``sqrt(pi/2)/s`` (so ``E||G y||_1 = ||y||_2``) and ``R`` enumerates all
    ``2^s`` sign rows, turning that l1 estimate into a max.
    """
    pairs = _check_pairs(pairs)
    s = int(s)
    if s < 1:
        raise ValueError("build_sketch_inf: s must be >= 1")
    if s > MAX_ENUMERATION_BITS:
        raise ValueError(
            "build_sketch_inf: s = %d exceeds the 2^%d-row budget"
            % (s, MAX_ENUMERATION_BITS))
    R = sign_enumeration_matrix(s)
    scale = math.sqrt(math.pi / 2.0) / s
    blocks = []
    for child in np.random.SeedSequence(seed).spawn(len(pairs)):
        rng = _rng(child)
        blocks.append(R @ (scale * rng.standard_normal((s, 2))))
    return BlockSketch(pairs=pairs, blocks=blocks, p=np.inf)


# ---------------------------------------------------------------------------
# dense solvers: grouped p-norm objectives
# ---------------------------------------------------------------------------


def _group_norms(r, group_of_row, n_groups):
    return np.sqrt(np.bincount(group_of_row, weights=r * r,
                               minlength=n_groups))


def _lp_of_norms(norms, p):
    """Overflow-safe ``(sum norms^p)^(1/p)`` (max norm at p = infinity)."""
    if norms.size == 0:
        return 0.0
    top = float(norms.max())
    if np.isinf(p):
        return top
    if top == 0.0:
        return 0.0
    return float(top * np.sum((norms / top) ** p) ** (1.0 / p))


def _weighted_lstsq(M, c, row_weights):
    # Normal equations with a Cholesky solve: one n*d^2 pass instead of a
    # fresh orthogonal factorization per reweighting.  The tall factorization
    # is kept as a fallback for Gram matrices too ill-conditioned to factor.
    Mw = row_weights[:, None] * M
    gram = M.T @ Mw
    rhs = Mw.T @ c
    try:
        chol = scipy.linalg.cho_factor(gram, check_finite=False)
        y = scipy.linalg.cho_solve(chol, rhs, check_finite=False)
        if np.all(np.isfinite(y)):
            return y
    except scipy.linalg.LinAlgError:
        pass
    w = np.sqrt(row_weights)
    return np.linalg.lstsq(w[:, None] * M, w * c, rcond=None)[0]


def _solve_grouped_finite(M, c, group_of_row, n_groups, p, tol, max_iter=300):
    """Damped reweighted least squares on the smoothed grouped p-norm."""
    y = np.linalg.lstsq(M, c, rcond=None)[0]
    r = M @ y - c
    norms = _group_norms(r, group_of_row, n_groups)
    obj = _lp_of_norms(norms, p)
    data_scale = max(float(np.linalg.norm(c)), 1.0)
    if p == 2.0:
        return LpSolution(y=y, objective=obj, converged=True, iterations=0)

    eps2 = IRLS_SMOOTHING ** 2

    def smoothed(nrm):
        return float(np.sum((nrm * nrm + eps2) ** (0.5 * p)))

    F = smoothed(norms)
    converged = obj <= 1e-14 * data_scale
    iterations = 0
    while not converged and iterations < max_iter:
        iterations += 1
        weights = (norms * norms + eps2) ** (0.25 * (p - 2.0))
        y_new = _weighted_lstsq(M, c, (weights * weights)[group_of_row])
        step = y_new - y
        theta, accepted = 1.0, False
        for _ in range(30):
            y_try = y + theta * step
            r_try = M @ y_try - c
            norms_try = _group_norms(r_try, group_of_row, n_groups)
            F_try = smoothed(norms_try)
            if F_try <= F:
                accepted = True
                break
            theta *= 0.5
        if not accepted:
            break  # stagnated: keep the best iterate found so far
        obj_try = _lp_of_norms(norms_try, p)
        moved = abs(obj - obj_try)
        y, r, norms, F, obj = y_try, r_try, norms_try, F_try, obj_try
        if moved <= tol * max(obj, 1e-30) or obj <= 1e-14 * data_scale:
            converged = True
    return LpSolution(y=y, objective=obj, converged=converged,
                      iterations=iterations)


def _solve_grouped_inf(M, c, group_of_row, n_groups, tol, max_halvings=64):
    """Smoothed max-norm fit: softmax-weighted least squares, temperature / 2.

    At temperature ``mu`` the weights reproduce the gradient of
    ``mu log sum exp(norm_g / mu)``, so each weighted solve is a descent step
    for the smoothed objective; halving ``mu`` until it is negligible against
    the incumbent drives the iterate to the max-norm minimizer, and the final
    lowest-temperature sweep polishes the active set.
    """
    y = np.linalg.lstsq(M, c, rcond=None)[0]
    r = M @ y - c
    norms = _group_norms(r, group_of_row, n_groups)
    data_scale = max(float(np.linalg.norm(c)), 1.0)
    best_y, best_obj = y.copy(), float(norms.max())
    if best_obj <= 1e-14 * data_scale:
        return LpSolution(y=best_y, objective=best_obj, converged=True,
                          iterations=0)

    iterations = 0
    converged = False
    mu = 0.5 * best_obj
    for _ in range(max_halvings):
        for _ in range(40):
            top = float(norms.max())
            soft = np.exp((norms - top) / mu)
            soft /= soft.sum()
            f_mu = top + mu * math.log(np.sum(np.exp((norms - top) / mu)))
            lawson = soft / np.maximum(norms, 1e-30 * data_scale)
            y_new = _weighted_lstsq(M, c, lawson[group_of_row])
            step = y_new - y
            theta, accepted = 1.0, False
            for _ in range(25):
                y_try = y + theta * step
                r_try = M @ y_try - c
                norms_try = _group_norms(r_try, group_of_row, n_groups)
                top_try = float(norms_try.max())
                f_try = top_try + mu * math.log(
                    np.sum(np.exp((norms_try - top_try) / mu)))
                if f_try <= f_mu:
                    accepted = True
                    break
                theta *= 0.5
            if not accepted:
                break
            iterations += 1
            y, r, norms = y_try, r_try, norms_try
            if top_try < best_obj:
                best_y, best_obj = y_try.copy(), top_try
            if f_mu - f_try <= 1e-6 * max(mu, 1e-30):
                break
        mu *= 0.5
        if mu <= max(tol * best_obj, 1e-15 * data_scale):
            converged = True
            break
    return LpSolution(y=best_y, objective=best_obj, converged=converged,
                      iterations=iterations)


def _solve_grouped(M, c, group_of_row, n_groups, p, tol):
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    c = np.asarray(c, dtype=float).ravel()
    if M.shape[0] != c.size:
        raise ValueError("lp solve: row counts of M and c differ")
    p = float(p)
    if not (p == np.inf or p >= 1.0):
        raise ValueError("lp solve: p must satisfy p >= 1 or p = inf")
    if np.isinf(p):
        return _solve_grouped_inf(M, c, group_of_row, n_groups, tol)
    return _solve_grouped_finite(M, c, group_of_row, n_groups, p, tol)


def small_lp_solve(M, c, p, tol=1e-10) -> LpSolution:
    """Minimize ``||M y - c||_p`` for a small dense instance."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    m = M.shape[0]
    return _solve_grouped(M, c, np.arange(m), m, p, tol)


def grouped_lp_solve(M, c, groups, p, tol=1e-10) -> LpSolution:
    """Minimize the p-norm of per-group Euclidean residual norms."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    group_of_row = np.full(M.shape[0], -1, dtype=int)
    for g, rows in enumerate(groups):
        for i in rows:
            group_of_row[int(i)] = g
    if np.any(group_of_row < 0):
        raise ValueError("grouped_lp_solve: groups must cover every row")
    return _solve_grouped(M, c, group_of_row, len(list(groups)), p, tol)


def complex_lp_solve(A, b, p, tol=1e-10) -> LpSolution:
    """Reference solver for ``min_x ||A x - b||_p`` over complex unknowns."""
    lifted = lift_instance(A, b)
    sol = grouped_lp_solve(lifted.Ap, lifted.bp, lifted.pairs, p, tol)
    sol.x = unphi(sol.y)
    return sol


# ---------------------------------------------------------------------------
# sketch-and-solve driver
# ---------------------------------------------------------------------------


def _default_heavy_rows(d_lifted, eps=0.5):
    return max(8, math.ceil(4.0 * d_lifted * math.log(2.0 / eps) / eps ** 2))


def sketch_and_solve(A, b, p, *, t=None, s=None, all_heavy=True, seed=0,
                     tol=1e-10) -> SketchSolveResult:
    """Compress a complex p-norm regression pair-by-pair, then solve it.

    Finite ``p`` uses Gaussian pair blocks (every pair heavy by default, the
    experimental setting; otherwise heavy pairs are detected from the p-norm
    leverage scores of the lifted ``[A b]``).  ``p = infinity`` uses the
    sign-enumeration route and requires ``s``.  Returns the complex solution
    of the compressed instance together with its certified objective.
    """
    A = np.asarray(A, dtype=complex)
    lifted = lift_instance(A, b)
    n = A.shape[0]
    p = float(p)
    if np.isinf(p):
        if s is None:
            raise ValueError("sketch_and_solve: p = inf requires s")
        heavy = np.arange(n)
        light = np.empty(0, dtype=int)
        sketch = build_sketch_inf(lifted.pairs, s, seed=seed)
    else:
        if t is None:
            t = _default_heavy_rows(lifted.Ap.shape[1])
        if all_heavy:
            heavy = np.arange(n)
            light = np.empty(0, dtype=int)
        else:
            scored = np.hstack([lifted.Ap, lifted.bp[:, None]])
            scores = lp_leverage_scores(scored, p, seed=seed)
            heavy, light = classify_pairs(scores, scored.shape[1], p)
        sketch = build_sketch_finite_p(lifted.pairs, heavy, t, p, seed=seed)
    sol = small_lp_solve(sketch.apply(lifted.Ap), sketch.apply(lifted.bp),
                         p, tol)
    return SketchSolveResult(xhat=unphi(sol.y),
                             sketched_objective=sol.objective,
                             converged=sol.converged,
                             heavy=np.asarray(heavy, dtype=int),
                             light=np.asarray(light, dtype=int))
