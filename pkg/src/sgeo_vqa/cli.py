"""Command-line entry point: ``sgeo-vqa {burgers,nlse,landscape,validate}``.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import burgers, nlse, output
from .ansatz import ParamVector
from .config import ConfigError, ExperimentConfig, parse_config
from .qsim import Estimator
from .residual import estimate_alpha
from .validate import run_validate

log = logging.getLogger("sgeo_vqa")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed for all randomness")
    common.add_argument("--out", help="output directory")
    common.add_argument("--exact", action="store_true", help="noise-free estimator")
    common.add_argument("--shots", type=int, help="shots per circuit")
    common.add_argument("--config", type=Path, help="YAML config file")
    common.add_argument("--optimizer", choices=("sgeo", "baseline"))

    ap = argparse.ArgumentParser(prog="sgeo-vqa", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    b = sub.add_parser("burgers", parents=[common], help="Burgers time evolution")
    b.add_argument("--preset", choices=tuple(burgers.PRESETS))
    b.add_argument("--no-figures", action="store_true", help="skip the comparison runs for fig3/fig4")
    n = sub.add_parser("nlse", parents=[common], help="NLSE ground state")
    n.add_argument("--g", type=float, choices=(25.0, 250.0, 750.0))
    n.add_argument("--no-figures", action="store_true", help="skip the other optimizer for fig6")
    la = sub.add_parser("landscape", parents=[common], help="single-angle cost curves")
    la.add_argument("--index", type=int, help="parameter index")
    la.add_argument("--problem", choices=("residual", "nlse", "burgers"))
    sub.add_parser("validate", help="run the property suite")
    return ap


def _load(args) -> ExperimentConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    overrides = {
        "seed": args.seed,
        "out": args.out,
        "optimizer": args.optimizer,
        "estimator.shots": args.shots,
        "estimator.mode": "exact" if args.exact else None,
    }
    if args.command == "burgers":
        overrides["burgers.preset"] = args.preset
    elif args.command == "nlse":
        overrides["nlse.g"] = args.g
    elif args.command == "landscape":
        overrides["landscape.index"] = args.index
        overrides["landscape.problem"] = args.problem
    return parse_config(text, kind=args.command, overrides=overrides)


def _other(name: str) -> str:
    return "baseline" if name == "sgeo" else "sgeo"


def run_burgers(cfg: ExperimentConfig, figures: bool = True) -> Path:
    out = Path(cfg.out)
    bc = cfg.burgers()
    traj = burgers.evolve(bc)
    output.write_burgers(out, bc, traj)
    summary = {
        "optimizer": bc.optimizer,
        "steps": bc.n_steps,
        "fit_residual": traj.fit_residual,
        "max_infidelity": float(np.max(traj.infidelity)),
        "final_infidelity": float(traj.infidelity[-1]),
        "total_circuit_evals": int(np.sum(traj.circuit_evals)),
        "negative_brackets": traj.negative_brackets,
    }
    if figures:
        other = burgers.evolve(replace(bc, optimizer=_other(bc.optimizer)))
        output.write_fig3(out, bc, {bc.optimizer: traj, _other(bc.optimizer): other})
        snap = 1 if bc.initial == "square" else 2
        output.write_fig4(out, burgers.compare_step(bc, snap))
    output.write_summary(out / "summary.json", "burgers", cfg.seed, summary)
    return out


def run_nlse(cfg: ExperimentConfig, figures: bool = True) -> Path:
    out = Path(cfg.out)
    nc = cfg.nlse()
    res = nlse.solve_ground_state(nc)
    output.write_nlse(out, nc, res)
    if figures:
        alt = nlse.solve_ground_state(replace(nc, optimizer=_other(nc.optimizer)))
        output.write_fig6(out, {nc.optimizer: res, _other(nc.optimizer): alt})
    summary = {
        "optimizer": nc.optimizer,
        "E_GS": res.ground.energy,
        "final_dE": res.final_delta_e,
        "final_relative_dE": res.final_delta_e / abs(res.ground.energy),
        "final_infidelity": res.final_infidelity,
        "circuit_evals": res.trace.circuit_evals,
        "final_params": res.trace.params.values,
    }
    output.write_summary(out / "summary.json", "nlse", cfg.seed, summary)
    return out


def run_landscape(cfg: ExperimentConfig) -> Path:
    """Single-angle curve and the directly evaluated cost on the same angles."""
    out = Path(cfg.out)
    ls = cfg.data["landscape"]
    est = Estimator(cfg.data["estimator"]["mode"], cfg.data["estimator"]["shots"], cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    lam = -math.pi + 2 * math.pi * np.arange(ls["points"]) / ls["points"]
    j = ls["index"]
    if ls["problem"] == "nlse":
        nc = cfg.nlse()
        spec = nc.ansatz
        p = nlse.initial_params(nc)
        _check_index(j, spec.n_params)
        curve = nlse.estimate_gamma_terms(spec, p, j, nc, est)
        direct = [nlse.energy_of_state(spec.statevector(p.with_value(j, x).values), nc).E_total for x in lam]
    elif ls["problem"] == "burgers":
        bc = cfg.burgers()
        spec = bc.ansatz
        _check_index(j, spec.n_params)
        prev, _ = burgers.initial_state(bc)
        p = prev.params
        curve = burgers.estimate_g_terms(prev, spec, p, j, bc, est)
        direct = [burgers.exact_step_cost(prev, spec, p.with_value(j, x), bc) for x in lam]
    else:
        spec = cfg.nlse().ansatz
        _check_index(j, spec.n_params)
        target = spec.statevector(rng.uniform(-np.pi, np.pi, spec.n_params))
        p = ParamVector(rng.uniform(-np.pi, np.pi, spec.n_params))
        curve = estimate_alpha(target, spec, p, j, est)
        direct = [2 * (1 - float(np.dot(target, spec.statevector(p.with_value(j, x).values)))) for x in lam]
    values = np.asarray(curve(lam), dtype=float)
    output.write_csv(out / f"landscape_{ls['problem']}_j{j}.csv", ("lambda", "curve", "direct"),
                     zip(lam, values, direct))
    return out


def _check_index(j: int, m: int):
    if not 0 <= j < m:
        raise ConfigError(f"landscape.index {j} out of range for {m} parameters")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "validate":
        results = run_validate()
        for r in results:
            print(r.line())
        failed = sum(not r.passed for r in results)
        print(f"{len(results) - failed}/{len(results)} property families passed")
        return EXIT_FAIL if failed else EXIT_OK
    try:
        cfg = _load(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "resolved_config.yaml").write_text(cfg.dump())
        if args.command == "burgers":
            run_burgers(cfg, figures=not args.no_figures)
        elif args.command == "nlse":
            run_nlse(cfg, figures=not args.no_figures)
        else:
            run_landscape(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"wrote results to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
