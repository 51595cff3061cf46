"""Command-line entry point.

Subcommands: sample, evolve, invariance, tails, lemmas, estimates. Every
run resolves a layered configuration, stamps its short hash into all
outputs, and reports failures as a single-line JSON object on stderr with
exit codes: 0 ok, 2 configuration, 3 I/O, 4 runtime.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, config_hash, load_config
from .estimates import SpaceTimeCoeffs, WeightParams, bilinear_ratio_sweep, \
    bracket_product_integral, quadratic_bracket_sum, resonance_residual_max, \
    resonance_set_integral, time_localization_check
from .flow import FDProbeError, FlowConfig, IntegratorBlowupError, conservation_report
from .invariance import Ensemble, ObservableSpec, generate, invariance_report, push_forward
from .noise import decay_median_curve, fit_log_tail, tail_sweep
from .snapshots import SnapshotError, load_ensemble, save_ensemble
from .spectral import FourierField, NormSpec

__all__ = ["main"]


def _stamp(h):
    return f"# tool=kdvnoise {__version__} config_hash={h}"


def _fail(code, message):
    payload = {"error": {"code": code, "message": str(message).replace("\n", "; ")}}
    print(json.dumps(payload), file=sys.stderr)
    return {"config": 2, "io": 3, "runtime": 4}[code]


def _flow_config(cfg_dt, cfg_T, **kw):
    # malformed step/horizon combinations are configuration mistakes
    try:
        return FlowConfig(dt=cfg_dt, T=cfg_T, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_csv(path, stamp, columns, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(stamp + "\n")
        fh.write(columns + "\n")
        for row in rows:
            fh.write(row + "\n")


def _headline_observables():
    return [
        ObservableSpec.mode_re(1),
        ObservableSpec.mode_im(2),
        ObservableSpec.mode_abs2(3),
        ObservableSpec.l2_mass(),
        ObservableSpec.norm(NormSpec(-0.49, 2.1, math.inf)),
    ]


def cmd_sample(cfg, h, out):
    ens = generate(cfg["N"], cfg["count"], seed=cfg["seed"])
    save_ensemble(ens, os.path.join(out, "ensemble.snap"))
    return 0


def _evolve_input(cfg):
    if cfg["input"]:
        return load_ensemble(cfg["input"])
    if cfg["N"] < 1 or cfg["count"] < 1:
        raise ConfigError("evolve needs either input= or N= and count=")
    return generate(cfg["N"], cfg["count"], seed=cfg["seed"])


def cmd_evolve(cfg, h, out):
    ens = _evolve_input(cfg)
    fc = _flow_config(cfg["dt"], cfg["T"])
    cps = []
    for part in cfg["checkpoints"].split(","):
        part = part.strip()
        if not part:
            continue
        try:
            c = float(part)
        except ValueError as exc:
            raise ConfigError(f"bad checkpoint {part!r}") from exc
        if not 0.0 < c < cfg["T"]:
            raise ConfigError(f"checkpoint {c} outside (0, T)")
        cps.append(c)
    cps = sorted(set(cps))
    for c in cps:
        _flow_config(cfg["dt"], c)  # must sit on the step lattice

    initial = ens
    t_done = 0.0
    for c in cps:
        ens = push_forward(ens, _flow_config(cfg["dt"], c - t_done), workers=cfg["workers"])
        save_ensemble(ens, os.path.join(out, f"checkpoint_{c:g}.snap"))
        t_done = c
    if cfg["T"] > t_done or not cps:
        ens = push_forward(
            ens, _flow_config(cfg["dt"], cfg["T"] - t_done), workers=cfg["workers"]
        )
    save_ensemble(ens, os.path.join(out, "ensemble_final.snap"))

    rows = []
    for i in range(initial.count):
        f0 = FourierField(initial.N, initial.coeffs[i])
        f1 = FourierField(ens.N, ens.coeffs[i])
        rep = conservation_report([(0.0, f0), (cfg["T"], f1)])
        rows.append(
            f"{i},{rep['l2_drift_abs']:.6e},{rep['l2_drift_rel']:.6e},"
            f"{rep['hamiltonian_drift_abs']:.6e},{rep['hamiltonian_drift_rel']:.6e}"
        )
    _write_csv(
        os.path.join(out, "conservation.csv"),
        _stamp(h),
        "member,l2_drift_abs,l2_drift_rel,hamiltonian_drift_abs,hamiltonian_drift_rel",
        rows,
    )
    return 0


def cmd_invariance(cfg, h, out):
    base = generate(cfg["N"], cfg["count"], seed=cfg["seed"])
    fc = _flow_config(cfg["dt"], cfg["T"])
    evolved = push_forward(base, fc, workers=cfg["workers"])
    report = invariance_report(base, evolved, _headline_observables(), cfg["alpha"])
    report["tool"] = f"kdvnoise {__version__}"
    report["config_hash"] = h
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    rows = [
        f"{r['name']},{r['D']:.10g},{r['threshold']:.10g},{int(r['passes'])},"
        f"{r['mean_a']:.10g},{r['mean_b']:.10g},{r['mean_se']:.10g},"
        f"{r['var_a']:.10g},{r['var_b']:.10g}"
        for r in report["observables"]
    ]
    _write_csv(
        os.path.join(out, "observables.csv"),
        _stamp(h),
        "name,D,threshold,passes,mean_a,mean_b,mean_se,var_a,var_b",
        rows,
    )
    return 0


def _parse_q(raw):
    low = str(raw).strip().lower()
    if low in ("inf", "infinity", ""):
        return math.inf
    return float(low)


def cmd_tails(cfg, h, out):
    spec = NormSpec(cfg["s"], cfg["p"], _parse_q(cfg["q"]))
    Ks = np.arange(cfg["k_min"], cfg["k_max"] + 0.5 * cfg["k_step"], cfg["k_step"])
    rows = tail_sweep(spec, cfg["N"], Ks, cfg["samples"], cfg["seed"])
    lines = [
        f"{r['K']:g},{r['count']},{r['samples']},{r['estimate']:.10g},"
        f"{r['stderr']:.10g},{r['wilson_low']:.10g},{r['wilson_high']:.10g},"
        f"{int(r['censored'])}"
        for r in rows
    ]
    _write_csv(
        os.path.join(out, "tails.csv"),
        _stamp(h),
        "K,count,samples,estimate,stderr,wilson_low,wilson_high,censored",
        lines,
    )
    fit = fit_log_tail(rows)
    fit["tool"] = f"kdvnoise {__version__}"
    fit["config_hash"] = h
    with open(os.path.join(out, "tail_fit.json"), "w", encoding="utf-8") as fh:
        json.dump(fit, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_lemmas(cfg, h, out):
    rows = []
    val = resonance_residual_max(cfg["resonance_bound"])
    rows.append(
        f"resonance_exhaustive,{val},max |cubic residual| over |n_i|<={cfg['resonance_bound']}"
    )
    value, ratio = bracket_product_integral(0.5, 0.5, 1000.0)
    rows.append(f"bracket_product,{ratio:.10g},decay ratio at alpha=beta=0.5 a=1000")
    total, tail = quadratic_bracket_sum(1, 0.0, 1.0, 1.0, cfg["psum_cutoff"])
    rows.append(f"quadratic_sum,{total:.10g},tail bound {tail:.3e}")
    omega = resonance_set_integral(10, 0.75, c0=1.0)
    rows.append(f"resonance_set,{omega:.10g},exponent 3/4 at n=10")
    med = decay_median_curve([cfg["decay_m_max"]], cfg["decay_delta"],
                             cfg["decay_seeds"], seed0=cfg["seed"])[0]
    rows.append(
        f"decay_ratio,{med:.10g},median at M={cfg['decay_m_max']} delta={cfg['decay_delta']:g}"
    )
    _write_csv(os.path.join(out, "lemmas.csv"), _stamp(h), "name,value,note", rows)
    return 0


def cmd_estimates(cfg, h, out):
    params = WeightParams(C=cfg["C"], c0=cfg["c0"], delta=cfg["delta"])
    try:
        n_list = [int(tok) for tok in cfg["n_list"].split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad n_list {cfg['n_list']!r}") from exc
    if not n_list or any(n < 2 for n in n_list):
        raise ConfigError(f"bad n_list {cfg['n_list']!r}")
    rows = bilinear_ratio_sweep(
        cfg["s"], cfg["p"], params, n_list, cfg["trials"], cfg["seed"], weighted=True
    )
    lines = [f"{r['N']},{r['trial']},{r['family']},{r['ratio']:.10g},{h}" for r in rows]
    _write_csv(
        os.path.join(out, "estimates.csv"),
        _stamp(h),
        "N,trial,family,ratio,config_hash",
        lines,
    )
    if cfg["time_loc"]:
        N = n_list[0]
        f = SpaceTimeCoeffs.zeros(N)
        for n in list(range(-N, 0)) + list(range(1, N + 1)):
            j = int(math.floor(math.log2(abs(n))))
            amp = 2.0 ** (-j / cfg["p"]) * f.dtau ** (-1.0 / cfg["p"])
            f.values[f.row(n), f.col(float(n**3))] = amp
        tl_lines = []
        for k in range(0, 7):
            T = 2.0**-k
            ratio = time_localization_check(f, T, cfg["s"], cfg["p"])
            tl_lines.append(f"{T:g},{ratio:.10g},{h}")
        _write_csv(
            os.path.join(out, "time_localization.csv"),
            _stamp(h),
            "T,ratio,config_hash",
            tl_lines,
        )
    return 0


_COMMANDS = {
    "sample": cmd_sample,
    "evolve": cmd_evolve,
    "invariance": cmd_invariance,
    "tails": cmd_tails,
    "lemmas": cmd_lemmas,
    "estimates": cmd_estimates,
}


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="INI file with a [subcommand] section")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the seed")
    common.add_argument("--workers", type=int, default=None, help="override worker count")
    common.add_argument("--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="kdvnoise")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    try:
        cfg = load_config(args.subcommand, args.config, overrides, os.environ)
    except ConfigError as exc:
        return _fail("config", exc)
    h = config_hash(cfg)
    if args.verbose:
        print(f"kdvnoise {__version__} {args.subcommand} config_hash={h}", file=sys.stdout)
    try:
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.subcommand](cfg, h, args.out)
    except ConfigError as exc:
        return _fail("config", exc)
    except SnapshotError as exc:
        return _fail("io", exc)
    except OSError as exc:
        return _fail("io", exc)
    except (IntegratorBlowupError, FDProbeError, ValueError) as exc:
        return _fail("runtime", exc)


if __name__ == "__main__":
    sys.exit(main())
