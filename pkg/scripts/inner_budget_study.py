"""How the distance estimate depends on the inner fit's iteration budget.

The estimate is an upper bound that tightens as the inner fits get more
iterations; with warm starts it can only go down. Prints one line per budget.
"""

import argparse

import numpy as np

from behavtune import (InputEnsembleSpec, TimeGrid, barabasi_albert, estimate_d_rho,
                       inner_config, make_diffusive, random_initial_params, sample_inputs,
                       two_node_graph)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-samples", type=int, default=10)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--budgets", type=int, nargs="+", default=[0, 1, 3, 10, 30, 100])
    args = ap.parse_args()

    system = make_diffusive(barabasi_albert(10, 2, 0))
    spec = make_diffusive(two_node_graph())
    p = random_initial_params(system, 1)
    sample = sample_inputs(InputEnsembleSpec(seed=args.seed), args.n_samples)
    grid = TimeGrid()
    warm = [spec.default_params] * len(sample)
    for k in args.budgets:
        est = estimate_d_rho(system, p, spec, sample, warm, inner_config(k), grid=grid)
        n_conv = sum(f.converged for f in est.fits)
        print(f"budget {k:4d}  d_rho {est.value:.6g}  converged {n_conv}/{len(sample)}"
              f"  mean evals {np.mean([f.n_evals for f in est.fits]):.1f}")


if __name__ == "__main__":
    main()
