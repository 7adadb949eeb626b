"""Command-line front end.

    erconvert <subcommand> [--config PATH | --paper-defaults] [--out DIR] [--seed N] ...

JSON goes to stdout (and ``<out>/<subcommand>.json``); grids and spectra go to
CSV files in ``--out``. Exit codes: 0 ok, 2 input error, 3 numerical failure,
4 infeasible design (optimize only). ERCONVERT_THREADS caps BLAS threads.
"""

from __future__ import annotations

import os

if os.environ.get("ERCONVERT_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, os.environ["ERCONVERT_THREADS"])

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .adiabatic import adiabaticity_report, effective_coupling, sample_ensemble, vacuum_couplings
from .broadening import alpha as compute_alpha
from .config import DESIGN_POINT, dump_config, load_config, reference_device
from .design import design_from_config, impedance_ratio, optimize_drive, sweep_R
from .errors import ConfigError, NumericalError
from .geometry import filling_factor, overlap_integral
from .model import AtomSite
from .montecarlo import filling_factor_mc
from .oracle import compare, random_adiabatic_ensemble
from .scattering import bandwidth_fwhm, efficiency, scattering_matrix, spectrum

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 2, 3, 4


class UsageError(ConfigError):
    pass


@dataclass
class RunReport:
    config_digest: str
    subcommand: str
    seed: int
    outputs: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "provenance": {
                "config_digest": self.config_digest,
                "subcommand": self.subcommand,
                "seed": self.seed,
                "version": self.version,
            },
            "outputs": self.outputs,
            "files": self.files,
        }


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _load(args):
    if args.paper_defaults and args.config:
        raise UsageError("use either --config or --paper-defaults, not both")
    if args.paper_defaults:
        cfg = reference_device()
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise UsageError("no configuration: pass --config PATH or --paper-defaults")
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _csv_header(report: RunReport) -> str:
    return f"# erconvert {report.version} {report.subcommand} config_digest={report.config_digest} seed={report.seed}\n"


def _write_csv(report: RunReport, out: Path | None, name: str, writer) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with open(path, "w", newline="") as fh:
        fh.write(_csv_header(report))
        writer(fh)
    report.files.append(str(path))


def _coupling(cfg, args) -> complex:
    if getattr(args, "ensemble", False):
        return effective_coupling(sample_ensemble(cfg)).S_approx
    res = design_from_config(cfg)
    return complex(res.point.coupling(cfg.cavities))


def _omega_grid(cfg, args) -> np.ndarray:
    span = 5.0 * max(cfg.cavities.kappa_a, cfg.cavities.kappa_b)
    lo = -span if args.omega_min is None else args.omega_min
    hi = span if args.omega_max is None else args.omega_max
    if args.omega_points < 1 or not (hi > lo or (args.omega_points == 1 and hi == lo)):
        raise UsageError(f"empty omega range [{lo}, {hi}] with {args.omega_points} points")
    return np.linspace(lo, hi, args.omega_points)


# ---------------------------------------------------------------------------
# subcommands; each fills report.outputs and returns an exit code

def cmd_validate(cfg, args, report):
    # a single physical ion at the line centres and the drive peak
    g_o, g_mu = vacuum_couplings(cfg)
    ion = AtomSite((0.0, 0.0, 0.0), g_o, g_mu, cfg.drive.Omega_peak,
                   cfg.broadening.mean_o, cfg.broadening.mean_mu)
    rep = adiabaticity_report([ion])
    report.outputs.update({
        "valid": True,
        "kappa_a": cfg.cavities.kappa_a,
        "kappa_b": cfg.cavities.kappa_b,
        "omega_Omega": cfg.drive.omega_Omega,
        "V_mu": cfg.geometry.V_mu,
        "V_o": cfg.geometry.V_o,
        "single_ion_g_o": g_o,
        "single_ion_g_mu": g_mu,
        "single_ion_adiabaticity": rep.to_dict(),
        "canonical_config": dump_config(cfg),
    })
    return EXIT_OK


def cmd_eta(cfg, args, report):
    S = _coupling(cfg, args)
    omegas = _omega_grid(cfg, args)
    spec = spectrum(S, cfg.cavities, omegas)
    ka, kb = cfg.cavities.kappa_a, cfg.cavities.kappa_b
    eta0 = efficiency(S, cfg.cavities, 0.0)
    report.outputs.update({
        "S": complex(S),
        "R": 2 * abs(S) / math.sqrt(ka * kb),
        "eta0": eta0,
        "fwhm": bandwidth_fwhm(S, cfg.cavities) if eta0 > 0 else None,
        "geometric_mean_linewidth": math.sqrt(ka * kb),
        "matching_gap": 4 * abs(S) ** 2 - ka * kb,
        "unitarity_error": spec.unitarity_error,
        "points": len(omegas),
    })
    opt = optimize_drive(*_alpha_F(cfg), cfg.cavities.Q_a, cfg.cavities.Q_b,
                         cfg.broadening.mean_mu, cfg.broadening.mean_o, beta=cfg.beta)
    if opt.feasible:
        S_opt = 0.5 * opt.R * math.sqrt(ka * kb)
        report.outputs["eta0_after_optimize"] = efficiency(S_opt, cfg.cavities, 0.0)
        report.outputs["Omega_optimal"] = opt.Omega
    _write_csv(report, args.out, "spectrum.csv", spec.write_csv)
    return EXIT_OK


def cmd_smatrix(cfg, args, report):
    S = _coupling(cfg, args)
    w = 0.0 if args.omega is None else args.omega
    m = scattering_matrix(S, cfg.cavities, w)
    report.outputs.update({
        "omega": w,
        "S": complex(S),
        "matrix_order": "[a_out, b_out] x [a_in, b_in]",
        "matrix": [[complex(m[i, j]) for j in range(2)] for i in range(2)],
        "eta": abs(m[0, 1]) ** 2,
    })
    return EXIT_OK


def _alpha_F(cfg):
    res = design_from_config(cfg)
    return res.point.alpha, res.point.F


def cmd_alpha(cfg, args, report):
    res = compute_alpha(cfg.material, cfg.broadening)
    # alpha scales as 1/(frequency scale)^2, so the other reading of Hz-valued
    # linewidths differs by (2 pi)^2
    factor = (2 * math.pi) ** 2
    other = res.alpha * factor if cfg.broadening_convention == "linear" else res.alpha / factor
    report.outputs.update({
        **res.to_dict(),
        "convention": cfg.broadening_convention,
        "alpha_other_convention": other,
        "alpha_quoted": cfg.alpha_override,
    })
    return EXIT_OK


def cmd_filling(cfg, args, report):
    geom = cfg.geometry_spec()
    q = overlap_integral(geom)
    out = {
        "F": filling_factor(geom),
        "overlap_integral": q.value,
        "quadrature_error": q.error,
        "quadrature_order": q.order,
        "V_mu": geom.V_mu,
        "V_o": geom.V_o,
        "F_quoted": cfg.F_override,
    }
    if args.mc:
        f_mc, se = filling_factor_mc(geom, args.mc, cfg.seed)
        out.update({"F_mc": f_mc, "F_mc_stderr": se, "mc_samples": args.mc})
    report.outputs.update(out)
    return EXIT_OK


def cmd_ratio(cfg, args, report):
    a, F = _alpha_F(cfg)
    pt = impedance_ratio(
        cfg.drive.Omega_mag if args.Omega is None else args.Omega,
        a if args.alpha is None else args.alpha,
        F if args.F is None else args.F,
        cfg.cavities.Q_a if args.Qa is None else args.Qa,
        cfg.cavities.Q_b if args.Qb is None else args.Qb,
    )
    report.outputs.update(pt.to_dict())
    return EXIT_OK


def cmd_sweep(cfg, args, report):
    a, _ = _alpha_F(cfg)
    Omega = cfg.drive.Omega_mag
    sw = sweep_R((args.F_min, args.F_max), (args.QQ_min, args.QQ_max), Omega, a, args.n_F, args.n_QQ)
    anchor = impedance_ratio(Omega, a, DESIGN_POINT["F"], DESIGN_POINT["Q_a"], DESIGN_POINT["Q_b"])
    d = sw.to_dict(anchor)
    report.outputs.update({
        "Omega": Omega, "alpha": a, "n_F": args.n_F, "n_QQ": args.n_QQ,
        "anchor": d["anchor"], "contour_R1": d["contour_R1"],
        "R_min": float(sw.R.min()), "R_max": float(sw.R.max()),
    })
    _write_csv(report, args.out, "sweep.csv", sw.write_csv)
    return EXIT_OK


def cmd_optimize(cfg, args, report):
    a, F = _alpha_F(cfg)
    opt = optimize_drive(a, F, cfg.cavities.Q_a, cfg.cavities.Q_b, cfg.broadening.mean_mu,
                         cfg.broadening.mean_o, target_R=args.target, beta=cfg.beta)
    report.outputs.update(opt.to_dict())
    report.outputs["eta0"] = efficiency(0.5 * opt.R * math.sqrt(cfg.cavities.kappa_a * cfg.cavities.kappa_b),
                                        cfg.cavities, 0.0)
    return EXIT_OK if opt.feasible else EXIT_INFEASIBLE


def cmd_oracle(cfg, args, report):
    rng = np.random.default_rng(cfg.seed)
    results = [compare(random_adiabatic_ensemble(args.n_atoms, rng, args.max_ratio)) for _ in range(args.trials)]
    report.outputs.update({
        "trials": [r.to_dict() for r in results],
        "all_passed": all(r.passed for r in results),
    })
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


COMMANDS = {
    "validate": cmd_validate,
    "eta": cmd_eta,
    "smatrix": cmd_smatrix,
    "alpha": cmd_alpha,
    "filling": cmd_filling,
    "ratio": cmd_ratio,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="device config file")
    common.add_argument("--paper-defaults", action="store_true", help="use the built-in design point")
    common.add_argument("--seed", type=int, help="override ensemble.seed")
    common.add_argument("--out", type=Path, help="directory for JSON/CSV outputs")

    p = argparse.ArgumentParser(prog="erconvert", description="Erbium microwave-optical converter model")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="validate a config and print its canonical form")

    for name in ("eta", "smatrix"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--ensemble", action="store_true", help="S from a sampled ensemble instead of alpha*F")
        if name == "eta":
            sp.add_argument("--omega-min", type=float)
            sp.add_argument("--omega-max", type=float)
            sp.add_argument("--omega-points", type=int, default=401)
        else:
            sp.add_argument("--omega", type=float, help="offset frequency (rad/s)")

    sub.add_parser("alpha", parents=[common])
    sp = sub.add_parser("filling", parents=[common])
    sp.add_argument("--mc", type=int, default=0, help="also run an N-sample Monte-Carlo check")

    sp = sub.add_parser("ratio", parents=[common])
    for flag in ("--Omega", "--alpha", "--F", "--Qa", "--Qb"):
        sp.add_argument(flag, type=float)

    sp = sub.add_parser("sweep", parents=[common])
    sp.add_argument("--F-min", type=float, default=1e-4)
    sp.add_argument("--F-max", type=float, default=1e-1)
    sp.add_argument("--QQ-min", type=float, default=1e8)
    sp.add_argument("--QQ-max", type=float, default=1e13)
    sp.add_argument("--n-F", type=int, default=100)
    sp.add_argument("--n-QQ", type=int, default=100)

    sp = sub.add_parser("optimize", parents=[common])
    sp.add_argument("--target", type=float, default=1.0)

    sp = sub.add_parser("oracle", parents=[common])
    sp.add_argument("--n-atoms", type=int, default=20)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--max-ratio", type=float, default=0.05)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        report = RunReport(cfg.digest, args.command, cfg.seed)
        code = COMMANDS[args.command](cfg, args, report)
    except ConfigError as exc:
        print(f"erconvert {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"erconvert {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = _dumps(report.to_dict())
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / f"{args.command}.json").write_text(text)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
