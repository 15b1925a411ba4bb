"""Command-line entry point ``gevrey-evp``.

Subcommands: checks, solve-evp, gl-study, qmc-study, mc-study, trunc-study,
cbc.  Each reads an optional ``--config`` file (one [section] of
``key = value`` lines) and applies command-line flag overrides on top.
Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import itertools
import math
import struct
import sys
from fractions import Fraction

import numpy as np

from . import combinatorics as comb
from . import harness, qmc
from .coefficients import resolve_model
from .derivcheck import classify_decay, legendre_coeffs
from .eigensolver import EigenSolveError, second_eigenpair, smallest_eigenpair
from .fem import Assembler, build_mesh
from .harness import ConfigError, RunConfig, emit_csv, emit_svg, fit_rate, parse_config
from .quad1d import gl_study

_EIGVEC_MAGIC = b"GEVREVP\x00"  # 8 bytes; header is magic + little-endian u64 n_dof

_FLAG_TYPES = {
    "int": int,
    "float": float,
    "str": str,
    "intpair": str,
    "intlist": str,
    "floatlist": str,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gevrey-evp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for experiment, schema in harness._EXPERIMENTS.items():
        name = "checks" if experiment == "checks" else experiment
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="config file path")
        for key, spec in schema.items():
            if experiment == "checks" and key == "which":
                p.add_argument("which", choices=("combinatorics", "gevrey"))
                continue
            flag = "--" + key.replace("_", "-")
            if spec.typ == "bool":
                p.add_argument(flag, action="store_true", default=None)
            else:
                p.add_argument(flag, type=_FLAG_TYPES[spec.typ], default=None)
    return parser


def _config_from_args(args) -> RunConfig:
    experiment = args.command
    schema = harness._EXPERIMENTS[experiment]
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if cfg.experiment != experiment:
            raise ConfigError(
                [f"config is for [{cfg.experiment}], command is {experiment}"]
            )
    else:
        cfg = None
    fields = dict(cfg.fields) if cfg else {}
    overrides = vars(args)
    text_lines = []
    for key, spec in schema.items():
        val = overrides.get(key)
        if val is None:
            continue
        if isinstance(val, bool):
            fields[key] = val
        elif spec.typ in ("intpair", "intlist", "floatlist"):
            text_lines.append((key, str(val)))
        else:
            msg = spec.check(val) if spec.check else None
            if msg is not None:
                raise ConfigError([f"flag --{key.replace('_', '-')}: {msg}"])
            fields[key] = val
    for key, raw in text_lines:
        spec = schema[key]
        value = harness._parse_value(spec.typ, raw)
        msg = spec.check(value) if spec.check else None
        if msg is not None:
            raise ConfigError([f"flag --{key.replace('_', '-')}: {msg}"])
        fields[key] = value
    for key, spec in schema.items():
        if key not in fields:
            if spec.default is None:
                raise ConfigError([f"missing required option {key!r}"])
            fields[key] = spec.default
    out = RunConfig(experiment, fields)
    errs = harness._cross_checks(out)
    if errs:
        raise ConfigError(errs)
    return out


# -- subcommand bodies --------------------------------------------------------

def _run_checks_combinatorics(cfg: RunConfig) -> int:
    n_max = cfg["n_max"]
    nu_max = cfg["nu_max"]
    rows: list[tuple[str, bool]] = []

    ok = True
    for n in range(0, n_max + 1):
        ratio = comb.factorial_ratio(n)
        ok &= comb.ff_half(n) * ratio == Fraction(math.factorial(n))
        ok &= 1 <= ratio <= 2 * 2**n
    rows.append((f"n! = ratio * ff_half(n), bounds, n <= {n_max}", ok))

    ok = True
    for n in range(2, n_max + 1):
        ok &= comb.binomial_ff_sum(n, "inner") == 2 * comb.ff_half(n)
        ok &= comb.binomial_ff_sum(n, "mid") == 3 * comb.ff_half(n)
        ok &= comb.binomial_ff_sum(n, "full") == 4 * comb.ff_half(n)
    for n in (0, 1):
        ok &= comb.binomial_ff_sum(n, "inner") <= 2 * comb.ff_half(n)
        ok &= comb.binomial_ff_sum(n, "mid") <= 3 * comb.ff_half(n)
        ok &= comb.binomial_ff_sum(n, "full") <= 4 * comb.ff_half(n)
    rows.append((f"binomial ff sums equal {{2,3,4}} ff_half, n = 2..{n_max}", ok))

    ok = True
    eq_ok = True
    for dim in range(1, 5):
        for total in range(0, nu_max + 1):
            for parts in itertools.product(range(total + 1), repeat=dim):
                if sum(parts) != total:
                    continue
                nu = comb.Multiindex(parts)
                for r in range(total + 1):
                    comb.vandermonde_slice(nu, r)  # raises on mismatch
                lhs, rhs, equal = comb.ff_convolution_bound(nu)
                ok &= lhs <= rhs
                eq_ok &= equal == (total >= 2)
    rows.append((f"slice sums match binomials, |nu| <= {nu_max}, dim <= 4", ok))
    rows.append(("convolution bound equality iff |nu| >= 2", eq_ok))

    ok = True
    for dim in range(1, 4):
        for parts in itertools.product(range(4), repeat=dim):
            if sum(parts) == 0 or sum(parts) > 6:
                continue
            lhs, rhs = comb.ff_double_convolution_bound(comb.Multiindex(parts))
            ok &= lhs <= rhs
    rows.append(("double convolution bound <= 8 ff_half", ok))

    report = comb.square_domination_check(12, [-2.5, -1.0, 0.0, 0.5, 0.9])
    rows.append(("square of sqrt-series is derivative-dominated", report.ok))

    failed = False
    for label, passed in rows:
        print(f"{'PASS' if passed else 'FAIL'}  {label}")
        failed |= not passed
    return 2 if failed else 0


def _single_axis_eigenvalue_map(model, m: int, tol: float):
    """lambda1 along the first parameter, rescaled to t in [-1, 1]."""
    asm = Assembler(build_mesh(m), model)
    half = model.param_halfwidth

    def f(t: float) -> float:
        return smallest_eigenpair(asm.system([t * half]), tol=tol).value

    return f


def _run_checks_gevrey(cfg: RunConfig) -> int:
    model = resolve_model(cfg["model"])
    f = _single_axis_eigenvalue_map(model, cfg["m"], 1e-14)
    coeffs = legendre_coeffs(f, cfg["K"], cfg["quad_n"])
    fit = classify_decay(coeffs)
    if cfg["out"]:
        emit_csv(
            [(k, abs(c)) for k, c in enumerate(coeffs)],
            cfg["out"],
            ["k", "abs_coeff"],
            metadata={"model": cfg["model"], "m": cfg["m"], "K": cfg["K"]},
        )
    print(f"model {cfg['model']}: best delta = {fit.delta} "
          f"(rate {fit.rate:.4f}, goodness {fit.goodness:.5f})")
    for delta, (rate, r2) in sorted(fit.candidates.items()):
        print(f"  delta {delta:>4}: rate {rate:8.4f}  r2 {r2:.5f}")
    return 0


def _run_solve_evp(cfg: RunConfig) -> int:
    model = resolve_model(cfg["model"])
    system = Assembler(build_mesh(cfg["m"]), model).system(list(cfg["y"]))
    pair = smallest_eigenpair(system, tol=cfg["tol"])
    print(f"lambda1 = {pair.value!r}  iterations = {pair.iterations}  "
          f"residual = {pair.residual:.3e}")
    if cfg["second"]:
        pair2 = second_eigenpair(system, pair, tol=cfg["tol"])
        print(f"lambda2 = {pair2.value!r}  iterations = {pair2.iterations}  "
              f"residual = {pair2.residual:.3e}")
    if cfg["dump"]:
        with open(cfg["dump"], "wb") as fh:
            fh.write(_EIGVEC_MAGIC)
            fh.write(struct.pack("<Q", system.n_dof))
            fh.write(pair.vector.astype("<f8").tobytes())
    if cfg["dump_matrix"]:
        from scipy.io import mmwrite

        mmwrite(cfg["dump_matrix"] + ".A", system.A)
        mmwrite(cfg["dump_matrix"] + ".M", system.M)
    return 0


def _run_gl_study(cfg: RunConfig) -> int:
    model = resolve_model(cfg["model"])
    # models with a narrower parameter box are probed along the rescaled axis
    eigenvalue_map = None
    if model.param_halfwidth != 1.0:
        eigenvalue_map = _single_axis_eigenvalue_map(model, cfg["m"], cfg["tol"])
    records = gl_study(
        model,
        cfg["m"],
        list(range(cfg["n_min"], cfg["n_max"] + 1)),
        cfg["n_star"],
        tol=cfg["tol"],
        eigenvalue_map=eigenvalue_map,
    )
    meta = {
        "experiment": "gl-study",
        "model": cfg["model"],
        "m": cfg["m"],
        "n_star": cfg["n_star"],
        "tol": cfg["tol"],
    }
    emit_csv(records, cfg["out"], ["n", "error"], metadata=meta)
    if cfg["svg"]:
        transform = "log-vs-cuberoot-n" if model.gevrey_order >= 3 else "log-vs-n"
        fit = None
        if sum(1 for _, e in records if e > 0) >= 4:
            fit = fit_rate(records, transform)
        emit_svg(records, fit, cfg["svg"], transform,
                 title=f"{cfg['model']} quadrature error", ylabel="log rel. error")
    print(f"wrote {cfg['out']} ({len(records)} records)")
    return 0


def _weights_for(cfg: RunConfig, s: int, model) -> qmc.PODWeights:
    delta = cfg["delta"] if cfg["delta"] > 0 else model.gevrey_order
    beta = qmc.parse_beta_rule(cfg["beta"], s)
    return qmc.PODWeights(delta, cfg["theta"], beta)


def _run_qmc_study(cfg: RunConfig) -> int:
    model = resolve_model(cfg["model"])
    lo, hi = cfg["levels"]
    n_list = [2**level for level in range(lo, hi + 1)]
    weights = _weights_for(cfg, cfg["s"], model)
    z_by_level = None
    if cfg["vectors"]:
        z_by_level = {}
        for n in n_list:
            path = cfg["vectors"].replace("{n}", str(n))
            z, s_file, n_file = qmc.load_vector(path)
            if s_file < cfg["s"] or n_file != n:
                raise ConfigError([f"vector file {path} does not match s={cfg['s']}, n={n}"])
            z_by_level[n] = z[: cfg["s"]]
    result = qmc.rmse_study(
        model,
        cfg["m"],
        cfg["s"],
        n_list,
        R=cfg["shifts"],
        master_seed=cfg["seed"],
        mc_replicates=cfg["mc_shifts"],
        weights=weights,
        z_by_level=z_by_level,
        tol=cfg["tol"],
        with_mc=cfg["with_mc"],
    )
    mc_by_n = {rec.n: rec.rmse for rec in result.mc}
    records = [
        (rec.n, rec.rmse, mc_by_n.get(rec.n, float("nan"))) for rec in result.qmc
    ]
    meta = {
        "experiment": "qmc-study",
        "model": cfg["model"],
        "m": cfg["m"],
        "s": cfg["s"],
        "shifts": cfg["shifts"],
        "mc_shifts": cfg["mc_shifts"],
        "seed": cfg["seed"],
        "vectors": result.provenance,
    }
    emit_csv(records, cfg["out"], ["n", "rmse_qmc", "rmse_mc"], metadata=meta)
    if cfg["svg"]:
        plot = [(n, r) for n, r, _ in records if r > 0]
        fit = fit_rate(plot, "loglog") if len(plot) >= 4 else None
        emit_svg(plot, fit, cfg["svg"], "loglog",
                 title=f"{cfg['model']} QMC error", ylabel="log rel. RMSE")
    print(f"wrote {cfg['out']} ({len(records)} levels, reference {result.reference!r})")
    return 0


def _run_mc_study(cfg: RunConfig) -> int:
    model = resolve_model(cfg["model"])
    lo, hi = cfg["levels"]
    n_list = [2**level for level in range(lo, hi + 1)]
    records = qmc.mc_study(
        model, cfg["m"], cfg["s"], n_list, cfg["shifts"], cfg["seed"], tol=cfg["tol"]
    )
    meta = {
        "experiment": "mc-study",
        "model": cfg["model"],
        "m": cfg["m"],
        "s": cfg["s"],
        "shifts": cfg["shifts"],
        "seed": cfg["seed"],
    }
    emit_csv(
        [(r.n, r.rmse) for r in records], cfg["out"], ["n", "rmse_mc"], metadata=meta
    )
    print(f"wrote {cfg['out']} ({len(records)} levels)")
    return 0


def _run_trunc_study(cfg: RunConfig) -> int:
    model = resolve_model(cfg["model"])
    weights = _weights_for(cfg, cfg["ref_s"], model)
    rule = qmc.make_lattice_rule(
        cfg["ref_s"], 2 ** cfg["level"], R=cfg["shifts"],
        master_seed=cfg["seed"], weights=weights,
    )
    records = qmc.truncation_study(model, cfg["m"], list(cfg["s_list"]), rule,
                                   tol=cfg["tol"])
    meta = {
        "experiment": "trunc-study",
        "model": cfg["model"],
        "m": cfg["m"],
        "ref_s": cfg["ref_s"],
        "n": 2 ** cfg["level"],
        "seed": cfg["seed"],
    }
    emit_csv(records, cfg["out"], ["s", "error"], metadata=meta)
    print(f"wrote {cfg['out']} ({len(records)} truncation levels)")
    return 0


def _run_cbc(cfg: RunConfig) -> int:
    beta = qmc.parse_beta_rule(cfg["beta"], cfg["s"])
    weights = qmc.PODWeights(cfg["delta"], cfg["theta"], beta)
    z, errors = qmc.cbc_construct(cfg["s"], cfg["n"], weights, return_errors=True)
    qmc.save_vector(cfg["out"], z, cfg["s"], cfg["n"])
    print(f"wrote {cfg['out']}: z = {list(map(int, z))}")
    print(f"worst-case error = {float(np.sqrt(errors[-1])):.6e}")
    return 0


_RUNNERS = {
    "solve-evp": _run_solve_evp,
    "gl-study": _run_gl_study,
    "qmc-study": _run_qmc_study,
    "mc-study": _run_mc_study,
    "trunc-study": _run_trunc_study,
    "cbc": _run_cbc,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if cfg.experiment == "checks":
            if cfg["which"] == "combinatorics":
                return _run_checks_combinatorics(cfg)
            return _run_checks_gevrey(cfg)
        return _RUNNERS[cfg.experiment](cfg)
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return 1
    except EigenSolveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
