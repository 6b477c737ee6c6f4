"""Command-line front end for the Monte Carlo studies.

Subcommands: ``sweep`` (frequency sweep of raw vs corrected statistics),
``scaling`` (sup statistics across M with (N/B)^k rescalings), ``histogram``
(replicate distribution of the sups), and ``validate`` (numerical golden
values plus the covariance and localization checks, printed as a pass/fail
table).

Configuration comes from a flat JSON file (--config) overridden by flags;
unknown config keys are rejected.  Exit status: 0 success, 1 numerical
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import pathlib
import sys

from . import experiments, rmt
from ._version import __version__
from .errors import CoherlssError, ConfigError, InvalidArgumentError
from .experiments import ExperimentConfig
from .signal import ModelSpec

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

_PANEL_KEYS = frozenset({
    "N", "B", "M", "theta", "alpha", "L", "f", "correction_mode",
    "grid_stride", "replicates", "seed", "threads",
})
_SCALING_KEYS = frozenset({
    "M_list", "alpha", "c_target", "theta", "f", "L",
    "grid_stride", "replicates", "seed", "threads",
})
_VALIDATE_KEYS = frozenset({"N", "B", "M", "theta", "replicates", "seed", "threads"})

_SWEEP_DEFAULTS = {"N": 2048, "B": 256, "M": 128, "theta": 0.4, "replicates": 5, "seed": 0}
_SWEEP_QUICK = {"N": 512, "B": 96, "M": 48, "theta": 0.4, "replicates": 2, "seed": 0,
                "grid_stride": 4}
_HISTOGRAM_DEFAULTS = {"N": 1063, "B": 200, "M": 100, "theta": 0.4, "replicates": 200, "seed": 0}
_HISTOGRAM_QUICK = {"N": 512, "B": 96, "M": 48, "theta": 0.4, "replicates": 20, "seed": 0,
                    "grid_stride": 4}
_SCALING_DEFAULTS = {"M_list": [40, 80, 160], "alpha": 0.8, "c_target": 0.5, "theta": 0.4,
                     "f": "square_centered", "replicates": 10, "seed": 0}
_SCALING_QUICK = {"M_list": [20, 40], "alpha": 0.8, "c_target": 0.5, "theta": 0.4,
                  "f": "square_centered", "replicates": 3, "seed": 0}
_VALIDATE_DEFAULTS = {"N": 2048, "B": 256, "M": 128, "theta": 0.4, "replicates": 3, "seed": 0}
_VALIDATE_QUICK = {"N": 512, "B": 96, "M": 48, "theta": 0.4, "replicates": 1, "seed": 0}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coherlss",
        description="Corrected linear spectral statistics of smoothed-periodogram "
                    "coherency matrices: Monte Carlo studies and numerical validation.",
    )
    parser.add_argument("--version", action="version", version=f"coherlss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="{sweep,scaling,histogram,validate}")

    def add_common(sp):
        sp.add_argument("--config", metavar="PATH", help="flat JSON config; flags override file values")
        sp.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        sp.add_argument("--out-dir", default=".", metavar="DIR", help="output directory (default: .)")
        sp.add_argument("--threads", type=int,
                        help="worker threads; COHERLSS_THREADS is honored when absent")
        sp.add_argument("--replicates", type=int, help="Monte Carlo replicate count")
        sp.add_argument("--quick", action="store_true", help="small sizes for a fast smoke run")

    def add_panel_overrides(sp):
        sp.add_argument("--N", type=int, help="series length per row")
        sp.add_argument("--B", type=int, help="even smoothing span")
        sp.add_argument("--M", type=int, help="panel rows (matrix dimension)")
        sp.add_argument("--L", type=int, help="lag-window bandwidth")
        sp.add_argument("--theta", type=float, help="AR(1) coefficient; 0 means white noise")
        sp.add_argument("--alpha", type=float, help="growth exponent in (1/2,1); default log B/log N")
        sp.add_argument("--f", choices=("square_centered", "log"), help="spectral test function")
        sp.add_argument("--grid-stride", type=int, help="Fourier grid stride (default keeps <=512 points)")

    sp = sub.add_parser("sweep", help="per-frequency raw and corrected statistics")
    add_common(sp)
    add_panel_overrides(sp)

    sp = sub.add_parser("scaling", help="sup statistics across M, rescaled by (N/B)^2 and (N/B)^3")
    add_common(sp)
    sp.add_argument("--theta", type=float, help="AR(1) coefficient; 0 means white noise")
    sp.add_argument("--alpha", type=float, help="growth exponent used to derive N from B")
    sp.add_argument("--f", choices=("square_centered", "log"), help="spectral test function")
    sp.add_argument("--L", type=int, help="lag-window bandwidth")
    sp.add_argument("--grid-stride", type=int, help="Fourier grid stride")

    sp = sub.add_parser("histogram", help="replicate distribution of the sup statistics")
    add_common(sp)
    add_panel_overrides(sp)

    sp = sub.add_parser("validate", help="golden values, covariance decay, localization")
    add_common(sp)
    sp.add_argument("--N", type=int, help="series length for the localization check")
    sp.add_argument("--B", type=int, help="even smoothing span")
    sp.add_argument("--M", type=int, help="panel rows")
    sp.add_argument("--theta", type=float, help="AR(1) coefficient")

    return parser


def _load_config_file(path, allowed: frozenset, command: str) -> dict:
    if path is None:
        return {}
    p = pathlib.Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must contain a JSON object")
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(
            f"unknown config keys for {command}: {unknown}; allowed: {sorted(allowed)}"
        )
    return raw


def _resolve_threads(flag_value, file_value):
    if flag_value is not None:
        return flag_value
    env = os.environ.get("COHERLSS_THREADS")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"COHERLSS_THREADS must be an integer, got {env!r}") from None
    if file_value is not None:
        return file_value
    return 1


def _merge_values(args, defaults: dict, file_cfg: dict, flag_names) -> dict:
    values = dict(defaults)
    values.update(file_cfg)
    for name in flag_names:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    values["threads"] = _resolve_threads(getattr(args, "threads", None), file_cfg.get("threads"))
    return values


_PANEL_FLAGS = ("N", "B", "M", "L", "theta", "alpha", "f", "grid_stride", "replicates", "seed")


def _cmd_sweep(args) -> int:
    file_cfg = _load_config_file(args.config, _PANEL_KEYS, "sweep")
    values = _merge_values(args, _SWEEP_QUICK if args.quick else _SWEEP_DEFAULTS,
                           file_cfg, _PANEL_FLAGS)
    cfg = ExperimentConfig(**values)
    result = experiments.frequency_sweep(cfg)
    csv_path, json_path = experiments.write_sweep_outputs(result, args.out_dir)
    s = result.summary
    print(f"sweep: {cfg.replicates} replicate(s), grid {result.config['grid_size']} points")
    print(f"fraction of frequencies improved by the oracle correction: {s['fraction_improved']:.3f}")
    print(f"median sup |raw| = {s['median_sup_raw']:.4e}, sup |psi| = {s['median_sup_psi']:.4e}, "
          f"sup |psi_hat| = {s['median_sup_psi_hat']:.4e}")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return EXIT_OK


def _cmd_scaling(args) -> int:
    file_cfg = _load_config_file(args.config, _SCALING_KEYS, "scaling")
    values = _merge_values(args, _SCALING_QUICK if args.quick else _SCALING_DEFAULTS, file_cfg,
                           ("alpha", "theta", "f", "L", "grid_stride", "replicates", "seed"))
    M_list = values.pop("M_list")
    if not isinstance(M_list, (list, tuple)) or not M_list or not all(
            isinstance(m, int) and not isinstance(m, bool) and m >= 1 for m in M_list):
        raise ConfigError(f"M_list must be a nonempty list of positive integers, got {M_list!r}")
    result = experiments.scaling_study(
        M_list=M_list, alpha=values["alpha"], c_target=values["c_target"],
        theta=values["theta"], f=values["f"], L=values.get("L"),
        replicates=values["replicates"], seed=values["seed"], threads=values["threads"],
        grid_stride=values.get("grid_stride"),
    )
    csv_path, json_path = experiments.write_scaling_outputs(result, args.out_dir)
    print(f"scaling: M = {M_list}, {result.config['replicates']} replicate(s) each")
    for row in result.rows:
        print(f"  M={row['M']:>5} B={row['B']:>5} N={row['N']:>6}  "
              f"sup|raw|*(N/B)^2={row['sup_raw_x2']:.3f}  sup|psi|*(N/B)^3={row['sup_psi_x3']:.3f}")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return EXIT_OK


def _cmd_histogram(args) -> int:
    file_cfg = _load_config_file(args.config, _PANEL_KEYS, "histogram")
    values = _merge_values(args, _HISTOGRAM_QUICK if args.quick else _HISTOGRAM_DEFAULTS,
                           file_cfg, _PANEL_FLAGS)
    cfg = ExperimentConfig(**values)
    result = experiments.histogram_study(cfg)
    csv_path, json_path = experiments.write_histogram_outputs(result, args.out_dir)
    q = result.summary["quantiles"]
    print(f"histogram: {result.summary['replicates']} replicate(s)")
    for name in ("sup_raw", "sup_psi", "sup_psi_hat"):
        print(f"  {name:<12} median {q[name]['q50']:.4e}  (q05 {q[name]['q05']:.4e}, "
              f"q95 {q[name]['q95']:.4e})")
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return EXIT_OK


def _print_check(name: str, passed: bool, detail: str) -> None:
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def _cmd_validate(args) -> int:
    file_cfg = _load_config_file(args.config, _VALIDATE_KEYS, "validate")
    values = _merge_values(args, _VALIDATE_QUICK if args.quick else _VALIDATE_DEFAULTS,
                           file_cfg, ("N", "B", "M", "theta", "replicates", "seed"))
    checks = []
    tol = 1e-3

    f_sq = rmt.SpectralFunction.square_centered()
    c_list = (0.25, 0.5) if args.quick else (0.1, 0.3, 0.5, 0.7, 0.9)
    for c in c_list:
        for method in ("inversion", "contour"):
            val = rmt.distribution_action("p", rmt.MPModel(c), f_sq, method=method)
            checks.append((f"phi((lambda-1)^2) = c_N [{method}, c={c}]",
                           abs(val - c) <= tol, f"|error| = {abs(val - c):.2e} (tol {tol:g})"))
    for c in (0.25, 0.5):
        val = rmt.distribution_action("p_tilde", rmt.MPModel(c), rmt.SpectralFunction.log(),
                                      method="inversion")
        checks.append((f"phi_tilde(log) = -1 [c={c}]",
                       abs(val + 1.0) <= tol, f"|error| = {abs(val + 1.0):.2e} (tol {tol:g})"))

    theta = float(values["theta"])
    model = ModelSpec.white_noise() if theta == 0.0 else ModelSpec.ar1(theta)
    N_list = (128, 256) if args.quick else (256, 512, 1024)
    rows = experiments.dft_covariance_check(model, N_list, 0.25, 0.25)
    scaled = [row[2] for row in rows]
    if theta == 0.0:
        cov_ok = all(row[1] <= 1e-12 for row in rows)
        cov_detail = f"white noise deviations {[f'{row[1]:.1e}' for row in rows]}"
    else:
        cov_ok = max(scaled) <= 3.0 * min(scaled)
        cov_detail = "deviation*N = " + ", ".join(f"{v:.4f}" for v in scaled)
    checks.append(("DFT covariance deviation decays like 1/N", cov_ok, cov_detail))

    stride = max(1, math.ceil(values["N"] / 128))
    cfg = ExperimentConfig(N=values["N"], B=values["B"], M=values["M"], theta=theta,
                           grid_stride=stride, replicates=values["replicates"],
                           seed=values["seed"], threads=values["threads"])
    passed, worst = experiments.eigenvalue_localization_check(cfg, epsilon=0.5)
    checks.append(("coherency eigenvalues inside MP support + 0.5", passed,
                   f"worst excursion {worst:.3e}"))

    for name, ok, detail in checks:
        _print_check(name, ok, detail)
    n_fail = sum(1 for _, ok, _ in checks if not ok)
    all_ok = n_fail == 0
    print("all checks passed" if all_ok else f"{n_fail} of {len(checks)} checks FAILED")

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    experiments.write_summary_json(
        out / "validate_summary.json",
        {**{k: values[k] for k in ("N", "B", "M", "theta", "replicates", "seed")},
         "quick": bool(args.quick)},
        {"checks": {name: {"passed": bool(ok), "detail": detail} for name, ok, detail in checks},
         "all_passed": all_ok},
        artifact="validate_summary",
    )
    return EXIT_OK if all_ok else EXIT_NUMERICAL


_HANDLERS = {
    "sweep": _cmd_sweep,
    "scaling": _cmd_scaling,
    "histogram": _cmd_histogram,
    "validate": _cmd_validate,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        return _HANDLERS[args.command](args)
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CoherlssError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run(sys.argv[1:]))
