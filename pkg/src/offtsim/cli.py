"""Command-line front end.

    offtsim verify     [--config PATH] [--seed INT] [--sigma RAD]
    offtsim convolve   IMAGE KERNEL [--out PATH] [--oracle] [--quantized]
    offtsim calibrate  [--config PATH] [--seed INT] [--sigma RAD] [--n N]
    offtsim fom        [--n-min N] [--n-max N] [--out CSV] [--report JSON]
    offtsim plan       [--n N] [--convention NAME] [--out PATH]

Exit status: 0 success, 1 a check or threshold failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import yaml

from . import conv, core, perf, photonics
from .config import ConfigError, load_config
from .core import OfftError
from .gridio import read_grid, write_grid

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

UNITARY_TOL = 1e-12
PARSEVAL_TOL = 1e-12
DFT_TOL = 1e-10


def _overrides(args) -> dict:
    out = {}
    for key in ("n", "seed", "sigma", "mode", "convention", "bits", "out"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    for item in args.set or []:
        key, sep, text = item.partition("=")
        if not sep:
            raise ConfigError(item, "--set expects KEY=VALUE")
        node = out
        *parents, leaf = key.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = yaml.safe_load(text)
    return out


def cmd_verify(cfg, args, out=None) -> int:
    out = out or sys.stdout
    ok = True
    rng = np.random.default_rng(cfg.seed)
    n = 2
    while n <= cfg.verify_max_n:
        for convention in core.CouplerConvention:
            plan = core.plan_network(n, convention)
            errors = photonics.inject_phase_errors(plan, cfg.sigma, cfg.seed)
            t = photonics.impaired_transfer_matrix(plan, errors)
            unitarity = float(np.max(np.abs(t.conj().T @ t - np.eye(n))))
            x = rng.normal(size=n) + 1j * rng.normal(size=n)
            parseval = abs(np.linalg.norm(t @ x) / np.linalg.norm(x) - 1)
            dft = core.match_to_dft(t, core.dft_oracle(n, "unitary")).residual
            passed = unitarity < UNITARY_TOL and parseval < PARSEVAL_TOL and dft < DFT_TOL
            ok &= passed
            print(f"n={n:<6d} convention={convention.value:<10s} unitarity={unitarity:.3e} "
                  f"parseval={parseval:.3e} dft_residual={dft:.3e} {'PASS' if passed else 'FAIL'}",
                  file=out)
        n *= 2
    print(f"verify: {'all checks passed' if ok else 'FAILED'} (sigma={cfg.sigma})", file=out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_convolve(cfg, args, out=None) -> int:
    out = out or sys.stdout
    image = read_grid(args.image)
    kernel = read_grid(args.kernel)
    for name, grid in (("image", image), ("kernel", kernel)):
        if grid.shape != (cfg.n, cfg.n):
            raise OfftError(f"{name} is {grid.shape[0]}x{grid.shape[1]}, config n={cfg.n}")
    plan = core.plan_network(cfg.n, cfg.convention)
    quant = conv.Quantization(cfg.bits, cfg.bits) if args.quantized else None
    result = conv.convolve(plan, image, kernel, quant=quant)
    target = cfg.out or "convolved.txt"
    write_grid(target, result)
    print(f"wrote {target}", file=out)
    if args.oracle:
        ref = circular_convolve_direct(image, kernel)
        err = float(np.linalg.norm(result - ref) / np.linalg.norm(ref)) if np.any(ref) \
            else float(np.linalg.norm(result))
        print(f"relative_error={err:.3e}", file=out)
    return EXIT_OK


def circular_convolve_direct(x, h) -> np.ndarray:
    """Spatial-domain circular convolution, O(n^4)."""
    x = np.asarray(x, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    n = x.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            # shifted copy of h lined up with x[i, j]
            out += x[i, j] * np.roll(np.roll(h, i, axis=0), j, axis=1)
    return out


def cmd_calibrate(cfg, args, out=None) -> int:
    out = out or sys.stdout
    plan = core.plan_network(cfg.n, cfg.convention)
    errors = photonics.inject_phase_errors(plan, cfg.sigma, cfg.seed)
    result = photonics.calibrate(plan, errors)
    print(f"n={cfg.n} convention={cfg.convention} arms={plan.n_arms} sigma={cfg.sigma} seed={cfg.seed}",
          file=out)
    print(f"pre_residual={result.initial_residual:.6e}", file=out)
    print(f"post_residual={result.residual:.6e}", file=out)
    print(f"iterations={result.iterations}", file=out)
    passed = result.residual < cfg.calibration_threshold
    print(f"calibrate: {'converged' if passed else 'did not reach threshold'} "
          f"(threshold {cfg.calibration_threshold:g})", file=out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_fom(cfg, args, out=None) -> int:
    out = out or sys.stdout
    lo, hi = args.n_min, args.n_max
    if not (core.is_power_of_two(lo) and core.is_power_of_two(hi)) or lo < 2 or hi < lo:
        raise ConfigError("--n-min/--n-max", f"need powers of two with 2 <= n_min <= n_max, got {lo}, {hi}")
    n_range = []
    n = lo
    while n <= hi:
        n_range.append(n)
        n *= 2
    result = perf.fom_sweep(n_range, cfg.sweep_config())
    csv_path = Path(cfg.out or "fom.csv")
    report_path = Path(args.report) if args.report else csv_path.with_suffix(".json")
    csv_path.write_text(result.to_csv())
    report_path.write_text(result.report_json() + "\n")
    print(f"wrote {csv_path} and {report_path}", file=out)
    for name, c in result.crossovers.items():
        if c is None:
            print(f"{name}: no crossover in range", file=out)
        else:
            print(f"{name}: below gpu from n={c.n_below} (interpolated crossing n={c.n_interp:.1f})",
                  file=out)
    return EXIT_OK


def cmd_plan(cfg, args, out=None) -> int:
    out = out or sys.stdout
    text = core.plan_network(cfg.n, cfg.convention).to_json() + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config document")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path")
    common.add_argument("--n", type=int, help="transform size (power of two)")
    common.add_argument("--sigma", type=float, help="arm phase error std, rad")
    common.add_argument("--mode", choices=[photonics.SERIAL, photonics.PARALLEL])
    common.add_argument("--convention", choices=[c.value for c in core.CouplerConvention])
    common.add_argument("--bits", type=int, help="DAC/ADC resolution for --quantized")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any config key, dotted for sections (repeatable)")

    p = argparse.ArgumentParser(prog="offtsim", description="Optical FFT convolution simulator")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="check unitarity and DFT equivalence")
    c = sub.add_parser("convolve", parents=[common], help="convolve two grid files")
    c.add_argument("image")
    c.add_argument("kernel")
    c.add_argument("--oracle", action="store_true", help="also report error against direct convolution")
    c.add_argument("--quantized", action="store_true", help="model DAC/ADC quantization")
    sub.add_parser("calibrate", parents=[common], help="heater calibration experiment")
    f = sub.add_parser("fom", parents=[common], help="figure-of-merit sweep to CSV and JSON")
    f.add_argument("--n-min", type=int, default=4)
    f.add_argument("--n-max", type=int, default=16384)
    f.add_argument("--report", help="JSON report path (default: CSV path with .json)")
    sub.add_parser("plan", parents=[common], help="export the network plan as JSON")
    return p


COMMANDS = {
    "verify": cmd_verify,
    "convolve": cmd_convolve,
    "calibrate": cmd_calibrate,
    "fom": cmd_fom,
    "plan": cmd_plan,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, OfftError, OSError, yaml.YAMLError) as exc:
        print(f"offtsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
