"""Markovian/non-Markovian boundary of the exponential kernel, traced both ways.

Prints kappa_th(nu) for weak coupling and the coupling threshold nu_th(kappa)
above which N exceeds the zero tolerance.  The second curve is not monotone:
it rises above nu = lam for intermediate kappa and returns towards the
memoryless value (about 1.026 lam at zero_tol = 1e-6) as kappa grows.
"""

import argparse

import numpy as np

from rtn_dephasing.errors import BracketError
from rtn_dephasing.noise_kernels import Exponential
from rtn_dephasing.nonmarkovianity import ZERO_TOL, model_non_markovianity, threshold_kappa


def nu_threshold(kappa, lo=0.05, hi=3.0, tol=1e-4):
    nonzero = lambda nu: model_non_markovianity(Exponential(kappa), nu).n_value > ZERO_TOL
    if nonzero(lo):
        return float("nan")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if nonzero(mid) else (mid, hi)
    return 0.5 * (lo + hi)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nus", type=float, nargs="*", default=[0.3, 0.5, 0.8, 0.95, 1.1, 1.2, 1.3, 1.4, 1.5])
    ap.add_argument("--kappas", type=float, nargs="*", default=[0.5, 1, 2, 3, 6, 10, 30, 100, 1e4])
    args = ap.parse_args()
    print("nu,kappa_th")
    for nu in args.nus:
        try:
            print(f"{nu:g},{threshold_kappa('exp', nu=nu):.6g}")
        except BracketError:
            print(f"{nu:g},")
    print("\nkappa,nu_th")
    for kappa in args.kappas:
        print(f"{kappa:g},{nu_threshold(kappa):.6g}")


if __name__ == "__main__":
    main()
