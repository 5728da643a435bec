"""Table of exact-pipeline agreement with the Talbot, Volterra and Monte Carlo oracles."""

import argparse

import numpy as np

from rtn_dephasing.dephasing_core import DephasingModel, assemble_laplace, solve
from rtn_dephasing.noise_kernels import DampedCosine, Delta, Exponential, NoiseParams
from rtn_dephasing.oracles import (
    McConfig,
    VolterraConfig,
    convergence_ratio,
    mc_dephasing_memoryless,
    numeric_inverse_laplace,
)

PANEL = [Delta(), Exponential(0.5), Exponential(3.0), DampedCosine(3.0, 1.0), DampedCosine(3.0, 3.0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nus", type=float, nargs="*", default=[0.6, 3.0])
    ap.add_argument("--h", type=float, default=1e-3)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()
    t = np.linspace(0, 20, 41)
    print(f"{'kernel':32s} {'nu':>4s} {'talbot':>10s} {'volterra':>10s} {'ratio':>7s} {'mc 3sig':>8s}")
    for k in PANEL:
        for nu in args.nus:
            m = DephasingModel(k, NoiseParams(1.0, nu))
            sol = solve(m)
            tb = np.max(np.abs(numeric_inverse_laplace(assemble_laplace(m)[0], t) - sol.F(t)))
            e1, _, ratio = convergence_ratio(m, VolterraConfig(args.h, 10.0), sol.F)
            mc = ""
            if isinstance(k, Delta):
                r = mc_dephasing_memoryless(m.params, McConfig(args.samples, args.seed, 0.05, 10.0))
                mc = f"{np.mean(np.abs(r.F - sol.F(r.t)) <= 3 * r.stderr):.3f}"
            print(f"{k!r:32s} {nu:4g} {tb:10.2e} {e1:10.2e} {ratio:7.3f} {mc:>8s}")


if __name__ == "__main__":
    main()
