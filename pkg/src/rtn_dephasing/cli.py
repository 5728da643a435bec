"""Command-line front end: curves, sweeps, oracle comparisons and figure data.

Rates and frequencies are plain numbers in the same units as ``--lambda``,
which defaults to 1, so with the defaults every value reads as a multiple of
the transition rate.  Curves and grids are written as CSV, scalar results as
JSON.  Exit codes: 0 success, 1 computational failure (JSON on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .dephasing_core import DephasingModel, assemble_laplace, solve
from .errors import DephasingError
from .noise_kernels import Delta, NoiseParams, make_kernel
from .nonmarkovianity import (
    bisect_sign_changes,
    sign_change_brackets,
    non_markovianity,
    phase_diagram,
    sweep_nu,
    threshold_kappa,
)
from .oracles import (
    McConfig,
    VolterraConfig,
    convergence_ratio,
    mc_dephasing_memoryless,
    numeric_inverse_laplace,
    volterra_solve,
)

FIGURES = ("fig1a", "fig1b", "fig2a", "fig2b", "fig3", "fig4", "fig5a", "fig5b")
FIG_KAPPAS = (0.5, 1.0, 3.0)
FIG_OMEGAS = (0.0, 2.0, 4.0, 6.0)
FIG1_NUS = (0.3, 0.6, 1.0, 1.5, 3.0)


class UsageError(Exception):
    pass


def parse_range(text: str) -> np.ndarray:
    """``start:stop:step`` with ``stop`` included when it lies on the grid."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"range {text!r} is not start:stop:step") from None
    if not step > 0 or stop < start:
        raise UsageError(f"range {text!r} needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(n + 1)


_INT_FIELDS = {"steps", "seed", "samples", "workers"}
_STR_FIELDS = {"kernel", "output", "kappa_range", "nu_range"}


def _coerce(name, value):
    try:
        if name in _INT_FIELDS:
            if float(value) != int(value):
                raise ValueError
            return int(value)
        if name in _STR_FIELDS:
            return str(value)
        return float(value)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value {value!r} for {name}") from None


@dataclass
class RunConfig:
    """All settings of one CLI run; see ``DEFAULTS`` in the README for values."""

    kernel: str = "delta"
    kappa: Optional[float] = None
    omega: float = 0.0
    lam: float = 1.0
    nu: float = 0.0
    omega0: float = 0.0
    t_max: float = 20.0
    steps: int = 2000
    zero_tol: float = 1e-6
    seed: int = 20240611
    samples: int = 100_000
    h: float = 1e-3
    output: Optional[str] = None
    kappa_range: Optional[str] = None
    nu_range: Optional[str] = None
    workers: Optional[int] = None

    @classmethod
    def from_sources(cls, file_values: dict, flag_values: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        merged = {}
        for source in (file_values, flag_values):
            for k, v in source.items():
                k = k.replace("-", "_")
                if k == "lambda":
                    k = "lam"
                if k not in names:
                    raise UsageError(f"unknown configuration key {k!r}")
                if v is not None:
                    merged[k] = _coerce(k, v)
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    def validate(self):
        if self.kernel not in ("delta", "exp", "damped_cosine", "cos"):
            raise UsageError(f"unknown kernel {self.kernel!r}")
        if self.steps < 1 or not self.t_max > 0:
            raise UsageError("--steps must be >= 1 and --t-max > 0")
        if not self.lam > 0 or self.nu < 0:
            raise UsageError("--lambda must be positive and --nu non-negative")

    def make_kernel(self, kappa=None, omega=None):
        kappa = self.kappa if kappa is None else kappa
        if self.kernel != "delta" and kappa is None:
            raise UsageError(f"kernel {self.kernel!r} needs --kappa")
        omega = self.omega if omega is None else omega
        return make_kernel(self.kernel, kappa, omega)

    def model(self, nu=None, **kw) -> DephasingModel:
        nu = self.nu if nu is None else nu
        return DephasingModel(self.make_kernel(**kw), NoiseParams(self.lam, nu), self.omega0)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_json(out, obj):
    json.dump(obj, out, indent=2, sort_keys=True)
    out.write("\n")


class Output:
    """Destination for the primary result plus an optional JSON sidecar."""

    def __init__(self, path: Optional[str]):
        self.path = path

    def csv(self, header, rows):
        self._emit(lambda f: write_csv(f, header, rows))

    def json(self, obj):
        self._emit(lambda f: write_json(f, obj))

    def meta(self, obj):
        if self.path:
            with open(self.path + ".meta.json", "w") as f:
                write_json(f, obj)
        else:
            write_json(sys.stderr, obj)

    def _emit(self, fn):
        if self.path:
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "w", newline="") as f:
                fn(f)
        else:
            fn(sys.stdout)


def cmd_factor(cfg: RunConfig, out: Output):
    sol = solve(cfg.model())
    t = cfg.grid
    F = np.asarray(sol.F(t))
    out.csv(["t", "F", "absF"], zip(t, F, np.abs(F)))


def rate_rows(sol, t):
    """``(t, gamma)`` rows with an empty gamma at every zero of F."""
    F = np.asarray(sol.F(t))
    Fd = np.asarray(sol.F_dot(t))
    rows = []
    zeros = np.zeros(0)
    if sol.decaying and t.size > 1:
        lo, hi = sign_change_brackets(sol.F, t)
        zeros = bisect_sign_changes(sol.F, lo, hi)
    for ti, fi, di in zip(t, F, Fd):
        rows.append((ti, None if abs(fi) < 1e-13 else -di / fi))
    rows += [(z, None) for z in zeros]
    rows.sort(key=lambda r: r[0])
    rows[0] = (0.0, 0.0)
    return rows


def cmd_rate(cfg: RunConfig, out: Output):
    sol = solve(cfg.model())
    out.csv(["t", "gamma"], rate_rows(sol, cfg.grid))


def cmd_nonmarkov(cfg: RunConfig, out: Output):
    r = non_markovianity(solve(cfg.model()))
    d = r.as_dict()
    out.json({k: d[k] for k in ("n", "n_scaled", "t_max", "error", "intervals")})


def _axes(cfg: RunConfig):
    kappa = parse_range(cfg.kappa_range) if cfg.kappa_range else None
    nu = parse_range(cfg.nu_range) if cfg.nu_range else None
    return kappa, nu


def cmd_phase_diagram(cfg: RunConfig, out: Output):
    kernel = "exp" if cfg.kernel == "delta" else cfg.kernel
    kappa, nu = _axes(cfg)
    pd = phase_diagram(kernel, cfg.lam, cfg.omega, kappa, nu, workers=cfg.workers)
    out.csv(["kappa", "nu", "n_scaled"], pd.rows())
    meta = dict(pd.metadata)
    meta.update(
        kappa_axis=pd.kappa_axis.tolist(),
        nu_axis=pd.nu_axis.tolist(),
        failed_cells=[{"i_nu": i, "j_kappa": j, "error": e} for (i, j), e in sorted(pd.errors.items())],
    )
    out.meta(meta)


def cmd_threshold(cfg: RunConfig, out: Output):
    kernel = "exp" if cfg.kernel == "delta" else cfg.kernel
    bracket = None
    if cfg.kappa_range:
        ks = parse_range(cfg.kappa_range)
        bracket = (float(ks[0]), float(ks[-1]))
    k = threshold_kappa(kernel, cfg.lam, cfg.omega, cfg.nu, bracket, cfg.zero_tol)
    out.json({"kappa_th": k, "nu": cfg.nu, "lambda": cfg.lam, "omega": cfg.omega, "kernel": kernel})


def cmd_oracle(cfg: RunConfig, which: str, out: Output):
    model = cfg.model()
    sol = solve(model)
    if which == "mc":
        if cfg.kernel != "delta":
            raise UsageError("the Monte Carlo oracle samples the memoryless kernel only")
        mc = McConfig(cfg.samples, cfg.seed, cfg.t_max / cfg.steps, cfg.t_max)
        r = mc_dephasing_memoryless(model.params, mc)
        exact = np.asarray(sol.F(r.t))
        diff = r.F - exact
        out.csv(["t", "F_exact", "F_oracle", "diff", "stderr"], zip(r.t, exact, r.F, diff, r.stderr))
        inside = np.abs(diff) <= 3 * r.stderr
        out.meta({"oracle": "mc", "fraction_within_3sigma": float(inside.mean()), "samples": cfg.samples, "seed": cfg.seed})
    elif which == "volterra":
        vc = VolterraConfig(cfg.h, cfg.t_max)
        v = volterra_solve(model, vc)
        exact = np.asarray(sol.F(v.t))
        stride = max(1, (v.t.size - 1) // cfg.steps)
        sel = slice(None, None, stride)
        out.csv(["t", "F_exact", "F_oracle", "diff"], zip(v.t[sel], exact[sel], v.F[sel], (v.F - exact)[sel]))
        e1, e2, ratio = convergence_ratio(model, vc, sol.F)
        out.meta({"oracle": "volterra", "h": cfg.h, "max_error": e1, "max_error_half_step": e2, "convergence_ratio": ratio})
    elif which == "talbot":
        f_tilde, _ = assemble_laplace(model)
        t = cfg.grid
        tb = numeric_inverse_laplace(f_tilde, t)
        exact = np.asarray(sol.F(t))
        out.csv(["t", "F_exact", "F_oracle", "diff"], zip(t, exact, tb, tb - exact))
        out.meta({"oracle": "talbot", "max_abs_diff": float(np.max(np.abs(tb - exact)))})
    else:
        raise UsageError(f"unknown oracle {which!r}")


def _curves(models: dict, t):
    cols = {}
    for name, m in models.items():
        cols[name] = np.abs(np.asarray(solve(m).F(t)))
    return ["t"] + [f"absF[{n}]" for n in cols], zip(t, *cols.values())


def _nm_sweep(kernels: dict, nus, lam, workers):
    cols = {}
    for name, k in kernels.items():
        pts = sweep_nu(k, nus, lam, workers)
        cols[name] = [p.n_scaled for p in pts]
    return ["nu"] + [f"n_scaled[{n}]" for n in cols], zip(nus, *cols.values())


def cmd_reproduce(cfg: RunConfig, fig: str, out: Output):
    lam = cfg.lam
    t = cfg.grid
    P = lambda nu: NoiseParams(lam, nu * lam)
    exp_kernels = {f"kappa={k:g}": make_kernel("exp", k * lam) for k in FIG_KAPPAS}
    if fig == "fig1a":
        models = {f"nu={nu:g}": DephasingModel(Delta(), P(nu)) for nu in FIG1_NUS}
        out.csv(*_curves(models, t))
    elif fig == "fig1b":
        nus = parse_range(cfg.nu_range) if cfg.nu_range else lam * np.round(np.arange(1, 61) * 0.05, 10)
        out.csv(*_nm_sweep({"delta": Delta()}, nus, lam, cfg.workers))
    elif fig in ("fig2a", "fig2b"):
        nu = 0.6 if fig == "fig2a" else 3.0
        models = {"delta": DephasingModel(Delta(), P(nu))}
        models.update({n: DephasingModel(k, P(nu)) for n, k in exp_kernels.items()})
        out.csv(*_curves(models, t))
    elif fig == "fig3":
        nus = parse_range(cfg.nu_range) if cfg.nu_range else lam * np.round(np.arange(1, 61) * 0.05, 10)
        out.csv(*_nm_sweep({"delta": Delta(), **exp_kernels}, nus, lam, cfg.workers))
    elif fig == "fig4":
        cmd_phase_diagram(dataclasses.replace(cfg, kernel="exp", omega=0.0), out)
    elif fig in ("fig5a", "fig5b"):
        nu = 0.8 if fig == "fig5a" else 3.0
        models = {f"Omega={om:g}": DephasingModel(make_kernel("damped_cosine", 3.0 * lam, om * lam), P(nu)) for om in FIG_OMEGAS}
        out.csv(*_curves(models, t))
    else:
        raise UsageError(f"unknown figure {fig!r}; choose from {', '.join(FIGURES)}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and run settings")
    g.add_argument("--config", help="JSON file with any of the settings below; flags take precedence")
    g.add_argument("--kernel", choices=["delta", "exp", "damped_cosine", "cos"])
    g.add_argument("--kappa", type=float)
    g.add_argument("--omega", type=float, help="kernel modulation frequency")
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--nu", type=float)
    g.add_argument("--omega0", type=float)
    g.add_argument("--t-max", dest="t_max", type=float)
    g.add_argument("--steps", type=int)
    g.add_argument("--zero-tol", dest="zero_tol", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--samples", type=int)
    g.add_argument("--h", type=float, help="Volterra step")
    g.add_argument("--kappa-range", dest="kappa_range", help="start:stop:step")
    g.add_argument("--nu-range", dest="nu_range", help="start:stop:step")
    g.add_argument("--workers", type=int)
    g.add_argument("-o", "--output")

    parser = argparse.ArgumentParser(prog="rtn-dephasing", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("factor", "dephasing factor F(t) as CSV"),
        ("rate", "dephasing rate gamma(t) as CSV"),
        ("nonmarkov", "non-Markovianity as JSON"),
        ("phase-diagram", "scaled non-Markovianity on a kappa x nu grid"),
        ("threshold", "threshold memory decay rate as JSON"),
    ]:
        sub.add_parser(name, parents=[common], help=help_)
    o = sub.add_parser("oracle", parents=[common], help="compare the exact pipeline with an oracle")
    o.add_argument("which", choices=["mc", "volterra", "talbot"])
    r = sub.add_parser("reproduce", parents=[common], help="data behind a named figure")
    r.add_argument("figure", choices=FIGURES)
    return parser


CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return data


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {k: v for k, v in vars(args).items() if k in CONFIG_KEYS}
    try:
        cfg = RunConfig.from_sources(load_config(args.config), flags)
        out = Output(cfg.output)
        cmd = args.command
        if cmd == "factor":
            cmd_factor(cfg, out)
        elif cmd == "rate":
            cmd_rate(cfg, out)
        elif cmd == "nonmarkov":
            cmd_nonmarkov(cfg, out)
        elif cmd == "phase-diagram":
            cmd_phase_diagram(cfg, out)
        elif cmd == "threshold":
            cmd_threshold(cfg, out)
        elif cmd == "oracle":
            cmd_oracle(cfg, args.which, out)
        elif cmd == "reproduce":
            cmd_reproduce(cfg, args.figure, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rtn-dephasing: error: {exc}", file=sys.stderr)
        return 2
    except DephasingError as exc:
        write_json(sys.stderr, {"error": type(exc).__name__, "message": str(exc)})
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
