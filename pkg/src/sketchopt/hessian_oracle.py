"""Finite-sum objectives with curvature oracles and cost accounting.

The objective is F(x) = (1/n) sum_i f_i(a_i^T x) + (lambda/2) ||x||^2 over a
real n x d data matrix with rows a_i.  Its Hessian factors as
A^T D(x) A / n + lambda I with D(x) = diag(f_i''(a_i^T x)), which may be
indefinite for non-convex losses; sketched Hessian-vector products sample a
weighted subset of rows and fold the weights and curvature signs together so
the entire hot path stays in real arithmetic.

Costs are tracked in function-evaluation units on an OracleMeter:
value/gradient/curvature-diagonal cost 1 each, a full Hessian-vector product
costs 2, and a sketched product with t rows costs ceil(2 t / n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core_complex import spectral_norm

_SIGMOID_CLAMP = 36.0


def _sigmoid(t: np.ndarray) -> np.ndarray:
    # exp saturates in double precision near |t| = 36; clamp to avoid overflow
    return 1.0 / (1.0 + np.exp(-np.clip(t, -_SIGMOID_CLAMP, _SIGMOID_CLAMP)))


@dataclass(frozen=True)
class LossFamily:
    """Pointwise loss f(t; b) with first and second derivatives in t."""

    tag: str
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    f1: Callable[[np.ndarray, np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray, np.ndarray], np.ndarray]


def _nlls_f(t, b):
    return (_sigmoid(t) - b) ** 2


def _nlls_f1(t, b):
    s = _sigmoid(t)
    return 2.0 * (s - b) * s * (1.0 - s)


def _nlls_f2(t, b):
    s = _sigmoid(t)
    sp = s * (1.0 - s)
    spp = sp * (1.0 - 2.0 * s)
    return 2.0 * (sp * sp + (s - b) * spp)


def _tukey_f(t, b):
    r2 = (t - b) ** 2
    return r2 / (1.0 + r2)


def _tukey_f1(t, b):
    r = t - b
    return 2.0 * r / (1.0 + r * r) ** 2


def _tukey_f2(t, b):
    r2 = (t - b) ** 2
    return (2.0 - 6.0 * r2) / (1.0 + r2) ** 3


_FAMILIES = {
    "quadratic": LossFamily(
        "quadratic",
        f=lambda t, b: 0.5 * (t - b) ** 2,
        f1=lambda t, b: t - b,
        f2=lambda t, b: np.ones_like(np.asarray(t, dtype=float)),
    ),
    "nlls_classification": LossFamily("nlls_classification", _nlls_f, _nlls_f1, _nlls_f2),
    "tukey_biweight": LossFamily("tukey_biweight", _tukey_f, _tukey_f1, _tukey_f2),
}


def make_loss(tag: str) -> LossFamily:
    """Look up a loss family by tag."""
    try:
        return _FAMILIES[tag]
    except KeyError:
        raise ValueError(
            f"unknown loss family {tag!r}; expected one of {sorted(_FAMILIES)}"
        ) from None


_CURVATURE_BOUNDS: dict[str, float] = {"quadratic": 1.0, "tukey_biweight": 2.0}


def curvature_bound(loss: LossFamily) -> float:
    """An upper bound h >= sup_t |f''(t; b)| for the family.

    Exact for the quadratic (1) and bounded-influence (2) families; for the
    sigmoid-squared classification loss the bound is found numerically once by
    a dense scan over t in [-40, 40] for both labels followed by golden-section
    refinement around the best bracket, plus a tiny safety margin.
    """
    if loss.tag in _CURVATURE_BOUNDS:
        return _CURVATURE_BOUNDS[loss.tag]
    grid = np.linspace(-40.0, 40.0, 400_001)
    best = 0.0
    for bval in (0.0, 1.0):
        b = np.full_like(grid, bval)
        vals = np.abs(loss.f2(grid, b))
        j = int(np.argmax(vals))
        lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
        best = max(best, _golden_max(lambda t: abs(float(loss.f2(np.array([t]), np.array([bval]))[0])), lo, hi))
        best = max(best, float(vals.max()))
    best *= 1.0 + 1e-9
    _CURVATURE_BOUNDS[loss.tag] = best
    return best


def _golden_max(fn, lo: float, hi: float, iters: int = 200) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return max(fc, fd)


@dataclass
class OracleMeter:
    """Monotone counter of function-evaluation-equivalent work."""

    function_evals: int = 0

    def add(self, units: int) -> None:
        if units < 0:
            raise ValueError("OracleMeter.add: units must be >= 0")
        self.function_evals += int(units)


def _charge(meter: OracleMeter | None, units: int) -> None:
    if meter is not None:
        meter.add(units)


@dataclass
class FiniteSumProblem:
    """Data (A, labels), a loss family, and a ridge term lambda/2 ||x||^2."""

    A: np.ndarray
    labels: np.ndarray
    loss: LossFamily
    ridge_lambda: float = 0.0

    def __post_init__(self):
        self.A = np.ascontiguousarray(self.A, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.A.ndim != 2 or self.labels.shape != (self.A.shape[0],):
            raise ValueError("FiniteSumProblem: A must be n x d with n labels")
        if self.ridge_lambda < 0:
            raise ValueError("FiniteSumProblem: ridge_lambda must be >= 0")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    # thin method wrappers over the module-level oracles
    def value(self, x, meter=None):
        return value(self, x, meter=meter)

    def grad(self, x, meter=None):
        return grad(self, x, meter=meter)

    def d_diag(self, x, meter=None):
        return d_diag(self, x, meter=meter)

    def hessp_full(self, x, v, meter=None):
        return hessp_full(self, x, v, meter=meter)

    def hessp_sketched(self, x, v, sketch, meter=None, dvec=None):
        return hessp_sketched(self, x, v, sketch, meter=meter, dvec=dvec)


def value(problem: FiniteSumProblem, x, meter: OracleMeter | None = None) -> float:
    """F(x); charges 1 unit."""
    x = np.asarray(x, dtype=float)
    _charge(meter, 1)
    t = problem.A @ x
    reg = 0.5 * problem.ridge_lambda * float(x @ x)
    return float(np.mean(problem.loss.f(t, problem.labels))) + reg


def grad(problem: FiniteSumProblem, x, meter: OracleMeter | None = None) -> np.ndarray:
    """Gradient of F at x; charges 1 unit."""
    x = np.asarray(x, dtype=float)
    _charge(meter, 1)
    t = problem.A @ x
    return problem.A.T @ problem.loss.f1(t, problem.labels) / problem.n \
        + problem.ridge_lambda * x


def d_diag(problem: FiniteSumProblem, x, meter: OracleMeter | None = None) -> np.ndarray:
    """Per-row second derivatives f_i''(a_i^T x) (sign-indefinite); charges 1."""
    x = np.asarray(x, dtype=float)
    _charge(meter, 1)
    return problem.loss.f2(problem.A @ x, problem.labels)


def hessp_full(problem: FiniteSumProblem, x, v,
               meter: OracleMeter | None = None, dvec=None) -> np.ndarray:
    """Exact Hessian-vector product A^T D (A v) / n + lambda v; charges 2."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    _charge(meter, 2)
    if dvec is None:
        dvec = problem.loss.f2(problem.A @ x, problem.labels)
    return problem.A.T @ (dvec * (problem.A @ v)) / problem.n \
        + problem.ridge_lambda * v


def _plan_parts(sketch):
    """Extract (deterministic rows, sampled rows, weights) from a sketch/plan.

    Hybrid plans store picks relative to their remainder set; those indices
    are mapped back to original row numbers here.
    """
    det = getattr(sketch, "deterministic_rows", None)
    sampled = getattr(sketch, "sampled", sketch)
    remainder = getattr(sketch, "remainder", None)
    rows = sampled.rows if sampled is not None else np.empty(0, dtype=int)
    weights = sampled.weights if sampled is not None else np.empty(0)
    rows = np.asarray(rows, dtype=int)
    if remainder is not None and rows.size:
        rows = np.asarray(remainder, dtype=int)[rows]
    if det is None:
        det = np.empty(0, dtype=int)
    return np.asarray(det, dtype=int), rows, np.asarray(weights)


def hessp_sketched(problem: FiniteSumProblem, x, v, sketch,
                   meter: OracleMeter | None = None, dvec=None) -> np.ndarray:
    """Sketched Hessian-vector product; charges ceil(2 t / n) units.

    ``sketch`` may be a SamplingSketch or a hybrid plan carrying both
    deterministic rows (weight 1) and sampled picks.  The weighted rows fold
    as w_j^2 * f''_{p_j} regardless of the curvature sign, so the computation
    is real even where D^{1/2} would be imaginary.  If ``dvec`` (the d_diag
    vector at x) is given, only slices of it are used; otherwise the needed
    entries are evaluated locally without an extra meter charge (the sketched
    charge already covers the t rows touched).
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    det, rows, weights = _plan_parts(sketch)
    n = problem.n
    t_total = det.size + rows.size
    _charge(meter, math.ceil(2 * t_total / n) if t_total else 0)
    out = problem.ridge_lambda * v

    def _rows_term(idx, w2):
        Asub = problem.A[idx]
        if dvec is not None:
            dsub = dvec[idx]
        else:
            dsub = problem.loss.f2(Asub @ x, problem.labels[idx])
        coef = w2 * dsub * (Asub @ v)
        return Asub.T @ coef

    if det.size:
        out = out + _rows_term(det, 1.0) / n
    if rows.size:
        out = out + _rows_term(rows, weights**2) / n
    return out


def convex_ridge_lambda(problem: FiniteSumProblem, h: float | None = None) -> float:
    """The ridge weight 4 ||A||^2 h that convexifies the finite sum.

    h must bound sup_t |f''(t; b)|; when omitted it is taken from
    curvature_bound for the problem's loss family.
    """
    if h is None:
        h = curvature_bound(problem.loss)
    return 4.0 * spectral_norm(problem.A) ** 2 * h
