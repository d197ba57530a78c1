"""Experiment runners behind the ``bench`` subcommands.

Each runner takes an :class:`~sketchopt.bench.config.ExperimentConfig`, a
master seed, and an output directory, runs its grid of cells, and writes
CSV files (plus optional SVG plots rendered purely from those CSVs).  All
determinism flows from ``(config, master seed)``: every cell derives its own
seed from the master seed and its position in the grid, so reruns reproduce
the output files byte for byte and thread scheduling cannot change results.

CSV conventions: a header line is always present, floats are written with 17
significant digits (``%.17g``), the decimal separator is ``.``, and lines end
with ``\\n``.  A failed cell in a batch run is recorded (header-only trace,
error status in the summary) rather than aborting the remaining cells.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..hessian_oracle import FiniteSumProblem, convex_ridge_lambda, make_loss
from ..lp_regression import complex_lp_solve, sketch_and_solve
from ..optimizers import OptConfig, newton_cg, newton_mr, trust_region
from ..sketch_sampling import (approx_leverage_scores, exact_leverage_scores,
                               scheme_probabilities)
from ..vmv_sketch import estimate
from .config import BenchError
from .datasets import materialize_dataset
from .svg import polyline_svg

__all__ = ["run_optimize", "run_lpreg", "run_vmv", "run_scores"]

ALGORITHMS = {"newton_cg": newton_cg, "newton_mr": newton_mr,
              "trust_region": trust_region}
SAMPLING_SCHEMES = ("uniform", "ls", "rn", "ls-mx", "rn-mx")

# Named sub-streams of the master seed, so instances, solver cells, and
# reference computations never share randomness.
_STREAM_INSTANCE = 1
_STREAM_CELL = 2


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------


def _derived_seed(master_seed, stream, index=0):
    ss = np.random.SeedSequence([int(master_seed), int(stream), int(index)])
    return int(ss.generate_state(1)[0])


def _fmt_field(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float) or isinstance(value, np.floating):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt_field(v) for v in row) + "\n")
    return path


def _read_csv(path):
    """Header list plus rows of floats (empty fields become nan)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        rows.append([float(f) if f else math.nan for f in line.split(",")])
    return header, rows


def _run_cells(worker, cells, n_workers):
    """Evaluate ``worker(cell)`` over all cells, preserving cell order."""
    if n_workers <= 1 or len(cells) <= 1:
        return [worker(cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(worker, cells))


def _parse_p(config):
    raw = config.get_str("p", "2").lower()
    if raw in ("inf", "infinity"):
        return math.inf
    try:
        p = float(raw)
    except ValueError:
        raise BenchError("CONFIG_INVALID", f"key 'p': bad value {raw!r}")
    if p < 1:
        raise BenchError("CONFIG_INVALID", "key 'p': must be >= 1")
    return p


def _complex_rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _pnorm(residual, p):
    mags = np.abs(np.asarray(residual).ravel())
    if math.isinf(p):
        return float(mags.max(initial=0.0))
    return float(np.sum(mags ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------


def _parse_scheme_token(token):
    """Split ``ls-det@0.25`` style tokens into (scheme, fraction)."""
    token = token.strip().lower()
    if "@" in token:
        base, frac_s = token.split("@", 1)
        if base != "ls-det":
            raise BenchError("CONFIG_INVALID",
                             f"scheme {token!r}: only ls-det takes @fraction")
        try:
            fraction = float(frac_s)
        except ValueError:
            raise BenchError("CONFIG_INVALID",
                             f"scheme {token!r}: bad fraction {frac_s!r}")
        if not 0.0 <= fraction <= 1.0:
            raise BenchError("CONFIG_INVALID",
                             f"scheme {token!r}: fraction must be in [0, 1]")
        return base, fraction
    if token not in ("full",) + SAMPLING_SCHEMES + ("ls-det",):
        raise BenchError("CONFIG_INVALID", f"unknown scheme {token!r}")
    return token, None


def _sanitize(token):
    return token.replace("@", "-").replace("/", "-")


def _resolve_ridge(config, A, labels, loss):
    policy = config.lambda_policy
    if policy == "manual":
        lam = config.get_float("ridge_lambda", 0.0)
        if lam < 0:
            raise BenchError("CONFIG_INVALID",
                             "key 'ridge_lambda': must be >= 0")
        return lam
    trial = FiniteSumProblem(A, labels, loss, ridge_lambda=0.0)
    scale = config.get_float("lambda_scale", 1.0)
    return convex_ridge_lambda(trial) * scale


def run_optimize(config, master_seed, out_dir, svg=False):
    """Run optimizer traces over a scheme grid; write per-cell CSVs + summary.

    Config keys: ``dataset``, ``algorithm`` (newton_cg | newton_mr |
    trust_region), ``schemes`` (comma list; ``ls-det@F`` pins the
    deterministic fraction), ``sample_size`` or a swept ``sample_sizes``
    list, ``seeds``, ``loss``, ``lambda_policy`` (+ ``ridge_lambda`` /
    ``lambda_scale``), and optimizer knobs ``max_outer``,
    ``max_oracle_calls``, ``grad_tol``, ``inner_cap``, ``inner_tol``.
    """
    algorithm = config.get_str("algorithm", "newton_mr")
    if algorithm not in ALGORITHMS:
        raise BenchError(
            "CONFIG_INVALID",
            f"key 'algorithm': expected one of {', '.join(ALGORITHMS)}, "
            f"got {algorithm!r}")
    runner = ALGORITHMS[algorithm]

    A, labels = materialize_dataset(config, master_seed)
    loss = make_loss(config.loss)
    ridge_lambda = _resolve_ridge(config, A, labels, loss)
    problem = FiniteSumProblem(A, labels, loss, ridge_lambda=ridge_lambda)

    multi_size = "sample_sizes" in config.options
    sizes = (config.get_int_list("sample_sizes")
             if multi_size else [config.get_int("sample_size")])
    scheme_tokens = config.schemes
    parsed = [_parse_scheme_token(tok) for tok in scheme_tokens]
    size_key = "sample_sizes" if multi_size else "sample_size"
    if any(size is not None and size < 1 for size in sizes):
        raise BenchError("CONFIG_INVALID", f"key '{size_key}': must be >= 1")
    if (any(scheme != "full" for scheme, _ in parsed)
            and any(size is None for size in sizes)):
        raise BenchError("CONFIG_INVALID",
                         f"key '{size_key}': required by sampled schemes")
    n_seeds = config.seeds

    cells = []
    for token, (scheme, fraction) in zip(scheme_tokens, parsed):
        for size in sizes:
            for seed_idx in range(n_seeds):
                cells.append((token, scheme, fraction, size, seed_idx))

    opt_keys = dict(
        max_outer=config.get_int("max_outer", 100),
        max_oracle_calls=config.get_int("max_oracle_calls"),
        grad_tol=config.get_float("grad_tol", 1e-8),
        inner_cap=config.get_int("inner_cap", 100),
        inner_tol=config.get_float("inner_tol", 1e-8),
        tr_delta0=config.get_float("tr_delta0", 1.0),
        tr_eta=config.get_float("tr_eta", 0.8),
        tr_gamma=config.get_float("tr_gamma", 1.2),
    )

    def worker(indexed):
        index, (token, scheme, fraction, size, seed_idx) = indexed
        cell_seed = _derived_seed(master_seed, _STREAM_CELL, index)
        kwargs = dict(opt_keys)
        if fraction is not None:
            kwargs["ls_det_fraction"] = fraction
        try:
            oc = OptConfig(scheme=scheme, sample_size=size, seed=cell_seed,
                           **kwargs)
            trace = runner(problem, oc)
            if not all(np.isfinite(row).all() for row in trace.rows()):
                return ("error_NONFINITE", [])
            return (trace.status, trace.rows())
        except (BenchError, ValueError, np.linalg.LinAlgError) as exc:
            return (f"error_{type(exc).__name__}", [])

    results = _run_cells(worker, list(enumerate(cells)), config.workers)

    os.makedirs(out_dir, exist_ok=True)
    written = []
    trace_header = ["iter", "oracle_calls", "objective", "grad_norm",
                    "step_or_radius", "accepted"]
    summary_rows = []
    for (token, scheme, fraction, size, seed_idx), (status, rows) in zip(
            cells, results):
        name = f"trace_{_sanitize(token)}"
        if multi_size:
            name += f"_m{size}"
        name += f"_seed{seed_idx}.csv"
        path = os.path.join(out_dir, name)
        written.append(_write_csv(path, trace_header, rows))
        if rows:
            last = rows[-1]
            summary_rows.append([token, algorithm, seed_idx, status,
                                 last[1], last[2], last[3]])
        else:
            summary_rows.append([token, algorithm, seed_idx, status,
                                 0, "", ""])
    summary_path = os.path.join(out_dir, "summary.csv")
    written.append(_write_csv(
        summary_path,
        ["scheme", "algorithm", "seed", "status", "oracle_calls",
         "final_objective", "final_grad_norm"],
        summary_rows))

    if svg:
        series = []
        for (token, scheme, fraction, size, seed_idx), path in zip(
                cells, written):
            _, rows = _read_csv(path)
            if not rows:
                continue
            label = f"{token}" + (f" m={size}" if multi_size else "") + \
                f" seed{seed_idx}"
            series.append((label,
                           [r[1] for r in rows],   # oracle calls
                           [r[2] for r in rows]))  # objective
        svg_path = os.path.join(out_dir, "optimize.svg")
        with open(svg_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(polyline_svg(series, f"{algorithm}: objective vs cost",
                                  "oracle calls", "objective", log_y=False))
        written.append(svg_path)
    return written


# ---------------------------------------------------------------------------
# lpreg
# ---------------------------------------------------------------------------


def run_lpreg(config, master_seed, out_dir, svg=False):
    """Sweep sketch size for complex p-norm regression; write error curves.

    Config keys: ``n``, ``d``, ``p`` (number or ``inf``), ``t_values``
    (finite p) or ``s_values`` (p = inf), ``seeds``, ``zero_residual``
    (default true), ``noise_scale``, ``all_heavy``.  Errors are measured
    against the planted solution when the residual is zero, otherwise
    against an unsketched reference solve.
    """
    n = config.get_int("n", 100)
    d = config.get_int("d", 50)
    p = _parse_p(config)
    if math.isinf(p):
        sweep = config.get_int_list("s_values", required=True)
    else:
        sweep = config.get_int_list("t_values", required=True)
    if any(v < 1 for v in sweep):
        raise BenchError("CONFIG_INVALID", "sweep values must be >= 1")
    n_seeds = config.seeds
    zero_residual = config.get_bool("zero_residual", True)
    noise_scale = config.get_float("noise_scale", 0.1)
    all_heavy = config.get_bool("all_heavy", True)

    instances = []
    for seed_idx in range(n_seeds):
        rng = _complex_rng(_derived_seed(master_seed, _STREAM_INSTANCE,
                                         seed_idx))
        A = _complex_gaussian(rng, (n, d))
        x_planted = _complex_gaussian(rng, d)
        b = A @ x_planted
        if not zero_residual:
            b = b + noise_scale * _complex_gaussian(rng, n)
            reference = complex_lp_solve(A, b, p)
            x_star = reference.x
        else:
            x_star = x_planted
        instances.append((A, b, x_star, _pnorm(A @ x_star - b, p)))

    cells = [(value, seed_idx)
             for value in sweep for seed_idx in range(n_seeds)]

    def worker(indexed):
        index, (value, seed_idx) = indexed
        A, b, x_star, obj_star = instances[seed_idx]
        cell_seed = _derived_seed(master_seed, _STREAM_CELL, index)
        kwargs = {"s": value} if math.isinf(p) else {"t": value}
        result = sketch_and_solve(A, b, p, seed=cell_seed,
                                  all_heavy=all_heavy, **kwargs)
        err_x = float(np.linalg.norm(result.xhat - x_star))
        err_obj = _pnorm(A @ result.xhat - b, p) - obj_star
        return (value, seed_idx, err_x, err_obj)

    rows = _run_cells(worker, list(enumerate(cells)), config.workers)

    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "lpreg.csv")
    written = [_write_csv(path, ["t_or_s", "seed", "err_x", "err_obj"], rows)]

    if svg:
        _, data = _read_csv(path)
        medians = []
        for value in sweep:
            errs = [r[2] for r in data if r[0] == value]
            medians.append(float(np.median(errs)))
        svg_path = os.path.join(out_dir, "lpreg.svg")
        with open(svg_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(polyline_svg(
                [("median err_x", list(map(float, sweep)), medians)],
                "sketched regression error vs sketch size",
                "s" if math.isinf(p) else "t per pair",
                "median solution error", log_y=True))
        written.append(svg_path)
    return written


# ---------------------------------------------------------------------------
# vmv
# ---------------------------------------------------------------------------


def _vmv_instance(config, master_seed):
    rows = config.get_int("rows", 50)
    cols = config.get_int("cols", 5)
    kind = config.get_str("instance", "gaussian")
    rng = _complex_rng(_derived_seed(master_seed, _STREAM_INSTANCE))
    if kind == "gaussian":
        A = _complex_gaussian(rng, (rows, cols))
        B = _complex_gaussian(rng, (rows, cols))
    elif kind == "cancellation":
        half = max(1, rows // 2)
        scale = config.get_float("cancel_scale", 1e3)
        base_a = _complex_gaussian(rng, (half, cols)) * scale
        base_b = _complex_gaussian(rng, (half, cols)) * scale
        A = np.vstack([base_a, base_a])
        B = np.vstack([base_b, -base_b])
    else:
        raise BenchError("CONFIG_INVALID",
                         f"key 'instance': expected gaussian or "
                         f"cancellation, got {kind!r}")
    u = _complex_gaussian(rng, A.shape[1])
    v = _complex_gaussian(rng, B.shape[1])
    return A, B, u, v


def run_vmv(config, master_seed, out_dir, svg=False):
    """Sweep sketch width for bilinear product estimation on one instance.

    Config keys: ``rows``, ``cols``, ``instance`` (gaussian |
    cancellation, the latter with ``cancel_scale``), ``k_values``,
    ``reps``, ``seeds``.  The instance is fixed across all cells so error
    statistics at different widths are directly comparable.
    """
    k_values = config.get_int_list("k_values", required=True)
    if any(k < 1 for k in k_values):
        raise BenchError("CONFIG_INVALID", "k_values must be >= 1")
    reps = config.get_int("reps", 1)
    if reps < 1:
        raise BenchError("CONFIG_INVALID", "key 'reps': must be >= 1")
    n_seeds = config.seeds

    A, B, u, v = _vmv_instance(config, master_seed)
    exact = complex(u @ (A.T @ B) @ v)

    cells = [(k, seed_idx) for k in k_values for seed_idx in range(n_seeds)]

    def worker(indexed):
        index, (k, seed_idx) = indexed
        cell_seed = _derived_seed(master_seed, _STREAM_CELL, index)
        est = estimate(A, B, u, v, k, reps=reps, seed=cell_seed)
        return (k, seed_idx, abs(est - exact))

    rows = _run_cells(worker, list(enumerate(cells)), config.workers)

    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "vmv.csv")
    written = [_write_csv(path, ["k", "seed", "abs_err"], rows)]

    if svg:
        _, data = _read_csv(path)
        medians = []
        for k in k_values:
            errs = [r[2] for r in data if r[0] == k]
            medians.append(float(np.median(errs)))
        svg_path = os.path.join(out_dir, "vmv.svg")
        with open(svg_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(polyline_svg(
                [("median abs err", list(map(float, k_values)), medians)],
                "bilinear estimate error vs sketch width",
                "sketch width k", "median absolute error", log_y=True))
        written.append(svg_path)
    return written


# ---------------------------------------------------------------------------
# scores
# ---------------------------------------------------------------------------


def run_scores(config, master_seed, out_dir, svg=False):
    """Tabulate exact vs approximate row scores and scheme probabilities.

    Config keys: ``dataset``, ``loss``, ``lambda_policy`` knobs,
    ``embed_rows`` / ``jl_cols`` for the approximation.  Scores are taken at
    the zero iterate on the curvature-weighted rows; each sampling scheme's
    normalized probabilities are reported per row.
    """
    A, labels = materialize_dataset(config, master_seed)
    loss = make_loss(config.loss)
    ridge_lambda = _resolve_ridge(config, A, labels, loss)
    problem = FiniteSumProblem(A, labels, loss, ridge_lambda=ridge_lambda)
    x0 = np.zeros(problem.d)

    dvec = problem.d_diag(x0)
    weighted = np.sqrt(np.abs(dvec))[:, None] * problem.A
    exact = exact_leverage_scores(weighted)
    try:
        approx = approx_leverage_scores(
            weighted,
            embed_rows=config.get_int("embed_rows"),
            jl_cols=config.get_int("jl_cols"),
            seed=_derived_seed(master_seed, _STREAM_CELL))
    except ValueError as exc:
        raise BenchError("RUN_FAILED", f"approximate scores failed: {exc}")

    both_zero = (exact < 1e-15) & (approx < 1e-15)
    ratio = np.where(both_zero, 1.0,
                     approx / np.maximum(exact, 1e-300))

    probs = {}
    for scheme in SAMPLING_SCHEMES:
        probs[scheme] = scheme_probabilities(problem, x0, scheme).probs

    rows = []
    for i in range(problem.n):
        rows.append([i, exact[i], approx[i], ratio[i],
                     probs["uniform"][i], probs["ls"][i], probs["rn"][i],
                     probs["ls-mx"][i], probs["rn-mx"][i]])

    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "scores.csv")
    written = [_write_csv(
        path,
        ["row", "exact", "approx", "ratio", "p_uniform", "p_ls", "p_rn",
         "p_ls_mx", "p_rn_mx"],
        rows)]

    if svg:
        _, data = _read_csv(path)
        order = np.argsort([-r[1] for r in data])
        xs = list(range(1, len(data) + 1))
        svg_path = os.path.join(out_dir, "scores.svg")
        with open(svg_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(polyline_svg(
                [("exact", xs, [data[j][1] for j in order]),
                 ("approx", xs, [data[j][2] for j in order])],
                "row scores, sorted by exact value",
                "row rank", "score", log_y=False))
        written.append(svg_path)
    return written
