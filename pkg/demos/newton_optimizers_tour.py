"""Three Newton-type solvers, full versus sketched Hessians, one budget meter.

Every solver consumes the same problem oracles, and every oracle charges a
meter in per-row units (a full Hessian-vector product costs 2 units, a
sketched one costs ceil(2t/n), leverage probabilities cost d, ...).  The
table below runs Newton-CG, Newton-MR, and the trust-region method with the
full Hessian, uniform sampling, and leverage sampling on the same planted
instance, so the accuracy/effort trade-off is visible in one place.
"""

import numpy as np

from sketchopt.bench.datasets import synth_planted
from sketchopt.hessian_oracle import FiniteSumProblem, make_loss
from sketchopt.optimizers import OptConfig, newton_cg, newton_mr, trust_region

A, labels = synth_planted(2000, 10, 20, 1e3, seed=42)
problem = FiniteSumProblem(A=A, labels=labels,
                           loss=make_loss("nlls_classification"),
                           ridge_lambda=0.01)

algorithms = [("newton_cg", newton_cg), ("newton_mr", newton_mr),
              ("trust_region", trust_region)]
schemes = [("full", None), ("uniform", 200), ("ls", 200)]

print("instance: 2000 x 10, 20 rows scaled by 1e3, ridge 0.01")
print()
print(f"{'algorithm':>13} {'scheme':>8} {'status':>19} {'outer':>6} "
      f"{'oracle calls':>13} {'final |g|':>11}")
for alg_name, algorithm in algorithms:
    for scheme, size in schemes:
        cfg = OptConfig(scheme=scheme, sample_size=size,
                        max_outer=400, grad_tol=1e-5, seed=5, tr_gamma=2.0)
        trace = algorithm(problem, cfg)
        print(f"{alg_name:>13} {scheme:>8} {trace.status:>19} "
              f"{trace.iteration[-1]:>6} {trace.oracle_calls[-1]:>13} "
              f"{trace.grad_norm[-1]:>11.2e}")
    print()

print("full Hessians converge in the fewest iterations but pay 2 units per")
print("product; leverage sampling pays d units per iteration for its scores")
print("yet still converges everywhere.  Uniform sampling misses the heavy")
print("rows' curvature: the residual-norm line search stalls outright and")
print("the trust-region model never earns a larger radius, while the plain")
print("objective line search happens to survive at this tolerance.")
