"""
Rainbow Chain Laboratory
Command-line front end

Subcommands:
    spectrum  single-particle spectrum and gap of one chain
    entropy   block entropy profile, or half-chain entropies over L
    sdrg      strong-disorder RG valence bond state with an arc diagram
    fit       scaling-law fit of entropies read from CSV
    predict   continuum prediction against exact half-chain entropies
    sweep     bulk (L, h) or (L, z) dataset

Exit codes: 0 success, 1 usage or malformed input, 2 numerical failure,
3 underflow guard.
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from utils.chain_model import ChainSpec, classify_regime
from utils.config import load_config
from utils.continuum import (comparison_report, continuum_prediction, curvature_info,
                             uniform_chain_fit)
from utils.database import close_database, initialize_database, log_run_event, save_run
from utils.entanglement import entropy_profile, half_chain_entropy
from utils.errors import InvalidParameterError, RainbowError
from utils.io_formats import csv_text, emit, json_text
from utils.scaling_fit import MODEL_IDS, Z_FAMILY, fit_samples, load_samples_csv
from utils.sdrg import bond_naming, is_rainbow, render_arcs, run_sdrg_chain
from utils.spectral_engine import solve_chain, spectrum_table
from utils.sweep import UNITS as SWEEP_UNITS
from utils.sweep import SweepConfig, run_sweep

logger = logging.getLogger("rainbow_lab")

# values of the global flags when absent from the command line
GLOBAL_DEFAULTS = {"J0": None, "format": "csv", "output": None, "workers": None,
                   "config": None, "db": None, "verbose": False}


class LabArgumentParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _global_options() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--J0", type=float, default=argparse.SUPPRESS, help="coupling scale (default 1)")
    common.add_argument("--format", choices=["csv", "json"], default=argparse.SUPPRESS,
                        help="output format (default csv)")
    common.add_argument("--output", default=argparse.SUPPRESS, help="output file, stdout by default")
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="sweep worker processes")
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON configuration file")
    common.add_argument("--db", default=argparse.SUPPRESS, help="SQLAlchemy URL of the run ledger")
    common.add_argument("--verbose", "-v", action="store_true", default=argparse.SUPPRESS,
                        help="debug logging")
    return common


def _size_list(args) -> List[int]:
    if getattr(args, "L_range", None):
        start, stop, step = args.L_range
        if step < 1:
            raise InvalidParameterError("--L-range step must be positive")
        return list(range(start, stop + 1, step))
    return list(args.L or [])


def _calibration_sizes(L_values: List[int]) -> List[int]:
    """Mixed-parity sizes for the h=0 fit of c': every L and L+1, at least four of them."""
    sizes = sorted({L for L in L_values} | {L + 1 for L in L_values})
    while len(sizes) < 4:
        sizes.append(sizes[-1] + 1)
    return sizes


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = LabArgumentParser(prog="rainbow-lab", description="Rainbow free-fermion chain laboratory",
                               parents=[common])
    subparsers = parser.add_subparsers(dest="command", required=True)

    spectrum = subparsers.add_parser("spectrum", parents=[common], help="single-particle spectrum")
    spectrum.add_argument("--L", type=int, required=True, help="half the number of sites")
    spectrum.add_argument("--h", type=float, required=True, help="inhomogeneity")

    entropy = subparsers.add_parser("entropy", parents=[common], help="entanglement entropies")
    entropy.add_argument("--L", type=int, nargs="+", required=True,
                         help="half chain size; several values with --half-chain")
    entropy.add_argument("--h", type=float, help="inhomogeneity")
    entropy.add_argument("--z", type=float, help="effective size hL, h = z/L for every L")
    entropy.add_argument("--n", type=float, default=1.0, help="Renyi order, 1 for von Neumann")
    entropy.add_argument("--blocks", type=int, nargs="+", help="left block sizes (default all)")
    entropy.add_argument("--half-chain", action="store_true", help="half-chain entropy per L only")

    sdrg = subparsers.add_parser("sdrg", parents=[common], help="strong-disorder RG")
    sdrg.add_argument("--L", type=int, required=True)
    sdrg.add_argument("--h", type=float, required=True)

    fit = subparsers.add_parser("fit", parents=[common], help="scaling-law fit (JSON output)")
    fit.add_argument("--model", choices=MODEL_IDS, required=True)
    fit.add_argument("--input", required=True, help="CSV from entropy or sweep")
    fit.add_argument("--K", type=float, default=None, help="Luttinger parameter")
    fit.add_argument("--z", type=float, help="keep rows with this z")
    fit.add_argument("--n", type=float, help="keep rows with this Renyi order")
    fit.add_argument("--method", default="exact", help="keep rows computed with this method")

    predict = subparsers.add_parser("predict", parents=[common], help="continuum prediction")
    predict.add_argument("--h", type=float, required=True)
    predict.add_argument("--c", type=float, default=1.0, help="central charge")
    predict.add_argument("--c-prime", type=float, default=None,
                         help="non-universal constant; fitted at h=0 over the same sizes when omitted")
    sizes = predict.add_mutually_exclusive_group(required=True)
    sizes.add_argument("--L", type=int, nargs="+")
    sizes.add_argument("--L-range", type=int, nargs=3, metavar=("START", "STOP", "STEP"))

    sweep = subparsers.add_parser("sweep", parents=[common], help="bulk dataset")
    sweep.add_argument("--spec-file", help="JSON file with sweep fields; flags override it")
    sweep_sizes = sweep.add_mutually_exclusive_group()
    sweep_sizes.add_argument("--L", type=int, nargs="+")
    sweep_sizes.add_argument("--L-range", type=int, nargs=3, metavar=("START", "STOP", "STEP"))
    sweep.add_argument("--h", type=float, nargs="+")
    sweep.add_argument("--z", type=float, nargs="+")
    sweep.add_argument("--n", type=float, nargs="+", help="Renyi orders (default 1)")
    sweep.add_argument("--method", choices=["exact", "sdrg", "both"])

    return parser


def cmd_spectrum(args, config) -> Dict[str, Any]:
    spec = ChainSpec(args.L, args.h, config["J0"])
    ground_state = solve_chain(spec, config)
    table = spectrum_table(ground_state.spectrum, ground_state.occupied)
    if args.format == "json":
        emit(json_text({
            "chain": spec.to_dict(),
            "regime": classify_regime(spec).regime,
            "energies": ground_state.spectrum.energies.tolist(),
            "occupied": list(ground_state.occupied.indices),
            "gap": ground_state.gap,
        }), args.output)
    else:
        emit(csv_text(table, f"energy and gap in units of J0 (J0={spec.J0:g})",
                      config["float_digits"]), args.output)
    log_run_event("SPECTRUM", f"L={spec.L} h={spec.h:g}: gap {ground_state.gap:.6g}")
    return {"gap": ground_state.gap}


def _entropy_h(args, L: int) -> float:
    if (args.h is None) == (args.z is None):
        raise InvalidParameterError("Give exactly one of --h and --z")
    return args.h if args.h is not None else args.z / L


def cmd_entropy(args, config) -> Dict[str, Any]:
    if args.half_chain:
        rows = []
        for L in args.L:
            spec = ChainSpec(L, _entropy_h(args, L), config["J0"])
            rows.append({"L": L, "h": spec.h, "z": spec.z, "n": args.n,
                         "S": half_chain_entropy(spec, args.n, config)})
        frame = pd.DataFrame(rows, columns=["L", "h", "z", "n", "S"])
        if args.format == "json":
            emit(json_text({"units": "nats", "n": args.n, "samples": rows}), args.output)
        else:
            emit(csv_text(frame, "S in nats", config["float_digits"]), args.output)
        log_run_event("ENTROPY", f"Half-chain entropies for {len(rows)} sizes")
        return {"samples": len(rows)}

    if len(args.L) != 1:
        raise InvalidParameterError("A block profile needs a single --L; use --half-chain for several")
    L = args.L[0]
    spec = ChainSpec(L, _entropy_h(args, L), config["J0"])
    profile = entropy_profile(spec, args.n, ells=args.blocks, config=config)
    if args.format == "json":
        emit(json_text(profile.to_dict()), args.output)
    else:
        emit(csv_text(profile.to_frame(), "S in nats", config["float_digits"]), args.output)
    log_run_event("ENTROPY", f"L={spec.L} h={spec.h:g} n={args.n:g}: {len(profile.ells)} blocks")
    return {"half_chain": float(dict(profile.samples).get(L, np.nan))}


def cmd_sdrg(args, config) -> Dict[str, Any]:
    spec = ChainSpec(args.L, args.h, config["J0"])
    vbs = run_sdrg_chain(spec)
    diagram = render_arcs(vbs)
    rainbow = is_rainbow(vbs, spec.L)

    document = vbs.to_dict()
    document.update({
        "is_rainbow": rainbow,
        "bond_names": [bond_naming(bond) for bond in vbs.bonds],
        "diagram": diagram,
    })
    document.pop("schema_version")
    emit(json_text(document), args.output)
    print(diagram, file=sys.stdout if args.output not in (None, "-") else sys.stderr)

    for warning in vbs.warnings:
        log_run_event("SDRG", warning, metadata=spec.to_dict(), level=logging.WARNING)
    log_run_event("SDRG", f"L={spec.L} h={spec.h:g}: {len(vbs.bonds)} bonds, rainbow={rainbow}")
    return {"is_rainbow": rainbow, "warnings": vbs.warnings}


def cmd_fit(args, config) -> Dict[str, Any]:
    sample_set = load_samples_csv(args.input, args.model, z=args.z, n=args.n, method=args.method)
    K = args.K if args.K is not None else config["luttinger_K"]
    result = fit_samples(sample_set, K=K, condition_warning=config["condition_warning"])
    document = result.to_dict()
    document.pop("schema_version")
    if result.model_id == Z_FAMILY and sample_set.z:
        document["d_over_z"] = result.coefficients["d_z"] / sample_set.z
    emit(json_text(document), args.output)
    for warning in result.warnings:
        log_run_event("NUMERICAL_WARNING", f"{result.model_id} fit: {warning}", level=logging.WARNING)
    log_run_event("FIT", f"{result.model_id} on {result.n_samples} samples: "
                         f"residual rms {result.residual_rms:.3g}",
                  metadata={"coefficients": result.coefficients})
    return {"coefficients": result.coefficients, "ill_conditioned": result.ill_conditioned}


def cmd_predict(args, config) -> Dict[str, Any]:
    L_values = _size_list(args)
    if not L_values:
        raise InvalidParameterError("No chain sizes given")
    c_prime = args.c_prime
    if c_prime is None:
        fit = uniform_chain_fit(_calibration_sizes(L_values), config["J0"], config["luttinger_K"], config)
        c_prime = fit.coefficients["c_prime"]
        logger.info("c' = %.6g from the h=0 fit", c_prime)

    prediction = continuum_prediction(args.h, L_values, args.c, c_prime)
    report = comparison_report(prediction, J0=config["J0"], config=config)
    max_deviation = float(np.max(np.abs(report["deviation"])))
    if args.format == "json":
        document = prediction.to_dict()
        document.pop("schema_version")
        document["curvature_info"] = curvature_info(args.h)
        document["max_abs_deviation"] = max_deviation
        document["report"] = report.to_dict(orient="records")
        emit(json_text(document), args.output)
    else:
        emit(csv_text(report, "S_exact, S_predicted and deviation in nats",
                      config["float_digits"]), args.output)
    log_run_event("PREDICT", f"h={args.h:g}: max |deviation| {max_deviation:.4g} nats "
                             f"(T_eff={prediction.effective_temperature:.6g}, R={prediction.curvature:.6g})")
    return {"c_prime": c_prime, "max_abs_deviation": max_deviation}


def _sweep_config(args, config) -> SweepConfig:
    fields: Dict[str, Any] = {}
    if args.spec_file:
        try:
            with open(args.spec_file, "r", encoding="utf-8") as handle:
                fields = json.load(handle)
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidParameterError(f"Cannot read sweep file {args.spec_file}: {e}") from e
        if not isinstance(fields, dict):
            raise InvalidParameterError("Sweep file must hold a JSON object")

    L_values = _size_list(args)
    if L_values:
        fields["L_values"] = L_values
    # a flag replaces the axis of the file
    if args.h is not None:
        fields["h_values"] = args.h
        if args.z is None:
            fields.pop("z_values", None)
    if args.z is not None:
        fields["z_values"] = args.z
        if args.h is None:
            fields.pop("h_values", None)
    if args.n is not None:
        fields["renyi_orders"] = args.n
    if args.method is not None:
        fields["method"] = args.method
    # global flags override the file only when given
    for key, value in (("format", args.format), ("output", args.output), ("J0", config["J0"]),
                       ("workers", config["workers"])):
        if key in args.explicit_flags or key not in fields:
            fields[key] = value
    try:
        return SweepConfig(**fields)
    except TypeError as e:
        raise InvalidParameterError(f"Malformed sweep description: {e}") from e


def cmd_sweep(args, config) -> Dict[str, Any]:
    sweep = _sweep_config(args, config)
    result = run_sweep(sweep, config)
    if sweep.format == "json":
        emit(json_text(result.to_dict()), sweep.output)
    else:
        emit(csv_text(result.to_frame(), SWEEP_UNITS, config["float_digits"]), sweep.output)
    if result.failures:
        sys.stderr.write(json_text({"failed_points": result.failures}))
    return {"rows": len(result.rows), "failures": len(result.failures)}


COMMANDS = {
    "spectrum": cmd_spectrum,
    "entropy": cmd_entropy,
    "sdrg": cmd_sdrg,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 1

    args.explicit_flags = {name for name in GLOBAL_DEFAULTS if hasattr(args, name)}
    for name, default in GLOBAL_DEFAULTS.items():
        if not hasattr(args, name):
            setattr(args, name, default)

    try:
        config = load_config(args.config, {"J0": args.J0, "workers": args.workers,
                                           "database_url": args.db})
    except RainbowError as e:
        sys.stderr.write(f"error: {e.message}\n")
        return e.exit_code

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, str(config["log_level"]).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    if config["database_url"]:
        initialize_database(config["database_url"])
    parameters = {key: value for key, value in vars(args).items() if key not in ("db", "explicit_flags")}

    try:
        results = COMMANDS[args.command](args, config)
    except RainbowError as e:
        logger.error("%s: %s", type(e).__name__, e.message)
        sys.stderr.write(json_text(e.to_dict()))
        save_run(args.command, parameters, e.to_dict(), status="failed")
        close_database()
        return e.exit_code
    except OSError as e:
        logger.error("I/O failure: %s", e)
        close_database()
        return 1

    failed = bool(results.get("failures"))
    save_run(args.command, parameters, results, status="failed" if failed else "ok")
    close_database()
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
