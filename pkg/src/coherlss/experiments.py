"""Monte Carlo studies of the corrected statistics, at configurable scale.

Four studies: a frequency sweep (raw statistic vs both corrected variants on
a grid), a scaling study (sup statistics across M at fixed alpha and aspect
ratio, rescaled by (N/B)^2 and (N/B)^3), a histogram study (replicate
distribution of the sups), and two validation checks (eigenvalue
localization inside the MP support, and the exact O(1/N) DFT covariance
deviation for AR(1) inputs).

Reproducibility contract: replicate seeds derive from the master seed via a
splitmix64-style mix, all reductions are order-deterministic, and output
files carry the resolved config but never wall-clock data, so identical
config + seed gives byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import math
import pathlib
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import lss, spectral
from ._version import __version__
from .errors import ConfigError, InvalidArgumentError
from .lss import LssConfig, assemble_psi, default_grid
from .rmt import MPModel
from .signal import ModelSpec, TimeSeriesPanel, autocovariance, simulate_panel, spectral_density

SWEEP_HEADER = ("nu", "lss_raw", "v_n", "r_oracle", "r_plugin", "phi", "psi", "psi_hat", "seed")
SCALING_HEADER = (
    "M", "B", "N", "c_n",
    "sup_raw", "sup_psi", "sup_psi_hat", "sup_psi_signed",
    "sup_raw_x2", "sup_raw_x3", "sup_psi_x2", "sup_psi_x3", "sup_psi_hat_x2", "sup_psi_hat_x3",
)
HISTOGRAM_HEADER = ("replicate", "seed", "sup_raw", "sup_psi", "sup_psi_hat")
QUANTILE_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95)

_U64 = 1 << 64


def split_seed(master: int, index: int) -> int:
    """Child seed for replicate ``index``: splitmix64 finalizer on the jump."""
    z = (int(master) + (int(index) + 1) * 0x9E3779B97F4A7C15) % _U64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) % _U64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) % _U64
    z ^= z >> 31
    return z


def _parallel_map(fn, items, threads: int) -> list:
    # ThreadPoolExecutor.map preserves order, so the reduction is
    # deterministic regardless of the worker count
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Flat, JSON-friendly study configuration; validated on construction."""

    N: int
    B: int
    M: int
    theta: float = 0.0
    alpha: float | None = None
    L: int | None = None
    f: str = "square_centered"
    correction_mode: str = "oracle"
    grid_stride: int | None = None
    replicates: int = 1
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        theta = self.theta
        if isinstance(theta, complex):
            raise ConfigError("theta must be real")
        object.__setattr__(self, "theta", float(theta))
        for name in ("replicates", "threads"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        seed = self.seed
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        seed = int(seed)
        if not 0 <= seed < _U64:
            raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
        object.__setattr__(self, "seed", seed)
        # fail fast: both the model and the statistic config must validate,
        # and any rejection is a configuration problem from here up
        try:
            self.model()
            self.lss_config()
        except InvalidArgumentError as err:
            raise ConfigError(str(err)) from err

    def model(self) -> ModelSpec:
        if self.theta == 0.0:
            return ModelSpec.white_noise()
        return ModelSpec.ar1(self.theta)

    def lss_config(self) -> LssConfig:
        N = self.N
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
            raise ConfigError(f"N must be a positive integer, got {N!r}")
        return LssConfig(
            N=int(N), B=self.B, M=self.M, alpha=self.alpha, L=self.L, f=self.f,
            correction_mode=self.correction_mode,
            grid=default_grid(int(N), self.grid_stride),
        )

    def snapshot(self) -> dict:
        """Resolved config echoed into output files (threads excluded: it
        must not affect any numeric payload)."""
        cfg = self.lss_config()
        return {
            "N": self.N, "B": self.B, "M": self.M,
            "theta": self.theta,
            "alpha": cfg.alpha,
            "L": cfg.L,
            "f": cfg.f.label,
            "correction_mode": self.correction_mode,
            "grid_stride": self.grid_stride if self.grid_stride is not None else max(1, math.ceil(self.N / 512)),
            "grid_size": len(cfg.grid),
            "c_n": cfg.c_N,
            "replicates": self.replicates,
            "seed": self.seed,
        }


@dataclasses.dataclass(frozen=True)
class RunRecord:
    """One replicate: its seed, SWEEP_HEADER-ordered rows, timing, warnings."""

    seed: int
    rows: tuple
    wall_time: float
    floored: int


@dataclasses.dataclass(frozen=True)
class SweepResult:
    config: dict
    records: tuple
    mean_rows: tuple
    summary: dict


def frequency_sweep(cfg: ExperimentConfig, seeds=None, threads: int | None = None) -> SweepResult:
    """Raw statistic and both corrections on the grid, per seed and averaged."""
    lcfg = cfg.lss_config()
    model = cfg.model()
    if seeds is None:
        seeds = [split_seed(cfg.seed, i) for i in range(cfg.replicates)]
    threads = cfg.threads if threads is None else threads
    vn = lss.v_n(cfg.B, cfg.N)
    phi = lss.phi_value(lcfg.c_N, lcfg.f)
    lss.mp_integral_value(lcfg.c_N, lcfg.f)
    active = lcfg.correction_active

    def one(seed: int) -> RunRecord:
        t0 = time.perf_counter()
        panel = simulate_panel(model, cfg.M, cfg.N, seed)
        points = lss.sweep_panel(panel, lcfg, want_oracle=True, want_plugin=True)
        rows = tuple(
            (pt.nu, pt.lss_raw, vn, pt.r_oracle, pt.r_plugin, phi,
             assemble_psi(pt.lss_raw, pt.r_oracle, phi, vn, active),
             assemble_psi(pt.lss_raw, pt.r_plugin, phi, vn, active),
             seed)
            for pt in points
        )
        return RunRecord(seed=seed, rows=rows, wall_time=time.perf_counter() - t0,
                         floored=sum(pt.floored for pt in points))

    records = tuple(_parallel_map(one, seeds, threads))

    n_grid = len(lcfg.grid)
    stack = np.array([[row[:8] for row in rec.rows] for rec in records], dtype=float)
    mean = stack.mean(axis=0)  # (n_grid, 8): means of nu..psi_hat columns
    mean_rows = tuple(
        (float(mean[j, 0]), float(mean[j, 1]), vn, float(mean[j, 3]), float(mean[j, 4]),
         phi, float(mean[j, 6]), float(mean[j, 7]), -1)
        for j in range(n_grid)
    )

    sup_raw = [max(abs(row[1]) for row in rec.rows) for rec in records]
    sup_psi = [max(abs(row[6]) for row in rec.rows) for rec in records]
    sup_psi_hat = [max(abs(row[7]) for row in rec.rows) for rec in records]
    improved_mean = [abs(mean[j, 6]) < abs(mean[j, 1]) for j in range(n_grid)]
    improved_pooled = [abs(row[6]) < abs(row[1]) for rec in records for row in rec.rows]
    fraction = float(np.mean(improved_mean))
    median_sup_psi = float(np.median(sup_psi))
    median_sup_psi_hat = float(np.median(sup_psi_hat))
    summary = {
        "fraction_improved": fraction,
        "fraction_improved_pooled": float(np.mean(improved_pooled)),
        "median_sup_raw": float(np.median(sup_raw)),
        "median_sup_psi": median_sup_psi,
        "median_sup_psi_hat": median_sup_psi_hat,
        "floored_total": int(sum(rec.floored for rec in records)),
        "flags": {
            "improved_fraction_ge_080": fraction >= 0.8,
            "plugin_sup_within_2x": median_sup_psi_hat <= 2.0 * median_sup_psi,
        },
    }
    return SweepResult(config=cfg.snapshot(), records=records, mean_rows=mean_rows, summary=summary)


@dataclasses.dataclass(frozen=True)
class ScalingResult:
    config: dict
    rows: tuple
    summary: dict


def scaling_geometry(M: int, alpha: float, c_target: float) -> tuple[int, int]:
    """Smallest even B with M/(B+1) <= c_target, and N = round(B^(1/alpha))."""
    if not 0.0 < c_target < 1.0:
        raise ConfigError(f"c_target must lie in (0, 1), got {c_target}")
    B = max(2, math.ceil(M / c_target) - 1)
    if B % 2:
        B += 1
    N = int(round(B ** (1.0 / alpha)))
    return B, N


def scaling_study(M_list, alpha: float = 0.8, c_target: float = 0.5, theta: float = 0.4,
                  f: str = "square_centered", L: int | None = None, replicates: int = 10,
                  seed: int = 0, threads: int = 1, grid_stride: int | None = None) -> ScalingResult:
    """Median sup statistics across M, with (N/B)^2 and (N/B)^3 rescalings."""
    M_list = [int(M) for M in M_list]
    if not M_list:
        raise ConfigError("M_list must be nonempty")
    model = ModelSpec.white_noise() if theta == 0.0 else ModelSpec.ar1(theta)
    seeds = [split_seed(seed, i) for i in range(replicates)]
    rows = []
    for M in M_list:
        B, N = scaling_geometry(M, alpha, c_target)
        lcfg = LssConfig(N=N, B=B, M=M, alpha=alpha, L=L, f=f,
                         correction_mode="oracle", grid=default_grid(N, grid_stride))
        vn = lss.v_n(B, N)
        phi = lss.phi_value(lcfg.c_N, lcfg.f)
        active = lcfg.correction_active

        def one(sd: int, M=M, N=N, lcfg=lcfg, vn=vn, phi=phi, active=active):
            panel = simulate_panel(model, M, N, sd)
            points = lss.sweep_panel(panel, lcfg, want_oracle=True, want_plugin=True)
            psi = [assemble_psi(pt.lss_raw, pt.r_oracle, phi, vn, active) for pt in points]
            psi_hat = [assemble_psi(pt.lss_raw, pt.r_plugin, phi, vn, active) for pt in points]
            return (
                max(abs(pt.lss_raw) for pt in points),
                max(abs(x) for x in psi),
                max(abs(x) for x in psi_hat),
                max(psi),
            )

        sups = np.array(_parallel_map(one, seeds, threads), dtype=float)
        med = np.median(sups, axis=0)
        ratio = N / B
        rows.append({
            "M": M, "B": B, "N": N, "c_n": M / (B + 1),
            "sup_raw": float(med[0]), "sup_psi": float(med[1]),
            "sup_psi_hat": float(med[2]), "sup_psi_signed": float(med[3]),
            "sup_raw_x2": float(med[0] * ratio ** 2), "sup_raw_x3": float(med[0] * ratio ** 3),
            "sup_psi_x2": float(med[1] * ratio ** 2), "sup_psi_x3": float(med[1] * ratio ** 3),
            "sup_psi_hat_x2": float(med[2] * ratio ** 2), "sup_psi_hat_x3": float(med[2] * ratio ** 3),
        })

    raw_x2 = [row["sup_raw_x2"] for row in rows]
    psi_x2 = [row["sup_psi_x2"] for row in rows]
    psi_x3 = [row["sup_psi_x3"] for row in rows]
    raw_x2_ratios = [raw_x2[i + 1] / raw_x2[i] for i in range(len(rows) - 1)]
    psi_x3_ratios = [psi_x3[i + 1] / psi_x3[i] for i in range(len(rows) - 1)]
    summary = {
        "raw_x2_ratios": raw_x2_ratios,
        "psi_x2_values": psi_x2,
        "psi_x3_ratios": psi_x3_ratios,
        "flags": {
            "raw_x2_bounded": all(1.0 / 3.0 <= r <= 3.0 for r in raw_x2_ratios),
            "psi_x2_decreasing": all(psi_x2[i + 1] < psi_x2[i] for i in range(len(rows) - 1)),
            "psi_x3_bounded": all(1.0 / 3.0 <= r <= 3.0 for r in psi_x3_ratios),
        },
    }
    config = {
        "M_list": M_list, "alpha": float(alpha), "c_target": float(c_target),
        "theta": float(theta), "f": f if isinstance(f, str) else f.label, "L": L,
        "grid_stride": grid_stride, "replicates": int(replicates), "seed": int(seed),
    }
    return ScalingResult(config=config, rows=tuple(rows), summary=summary)


@dataclasses.dataclass(frozen=True)
class HistogramResult:
    config: dict
    rows: tuple
    summary: dict


def histogram_study(cfg: ExperimentConfig, R: int | None = None) -> HistogramResult:
    """Empirical distribution of the three sup statistics over R replicates."""
    R = cfg.replicates if R is None else int(R)
    if R < 1:
        raise ConfigError(f"replicate count must be >= 1, got {R}")
    lcfg = cfg.lss_config()
    model = cfg.model()
    vn = lss.v_n(cfg.B, cfg.N)
    phi = lss.phi_value(lcfg.c_N, lcfg.f)
    lss.mp_integral_value(lcfg.c_N, lcfg.f)
    active = lcfg.correction_active
    seeds = [split_seed(cfg.seed, i) for i in range(R)]

    def one(sd: int):
        panel = simulate_panel(model, cfg.M, cfg.N, sd)
        points = lss.sweep_panel(panel, lcfg, want_oracle=True, want_plugin=True)
        psi = [assemble_psi(pt.lss_raw, pt.r_oracle, phi, vn, active) for pt in points]
        psi_hat = [assemble_psi(pt.lss_raw, pt.r_plugin, phi, vn, active) for pt in points]
        return (max(abs(pt.lss_raw) for pt in points),
                max(abs(x) for x in psi),
                max(abs(x) for x in psi_hat))

    sups = _parallel_map(one, seeds, cfg.threads)
    rows = tuple((i, seeds[i]) + tuple(float(x) for x in sups[i]) for i in range(R))
    arr = np.array(sups, dtype=float)
    quantiles = {}
    for j, name in enumerate(("sup_raw", "sup_psi", "sup_psi_hat")):
        qs = np.quantile(arr[:, j], QUANTILE_LEVELS)
        quantiles[name] = {f"q{int(100 * q):02d}": float(v) for q, v in zip(QUANTILE_LEVELS, qs)}
    med_raw = quantiles["sup_raw"]["q50"]
    med_psi = quantiles["sup_psi"]["q50"]
    med_psi_hat = quantiles["sup_psi_hat"]["q50"]
    summary = {
        "replicates": R,
        "quantiles": quantiles,
        "flags": {
            "psi_median_below_raw": med_psi < med_raw,
            "plugin_sup_within_2x": med_psi_hat <= 2.0 * med_psi,
        },
    }
    config = dict(cfg.snapshot(), replicates=R)
    return HistogramResult(config=config, rows=rows, summary=summary)


def eigenvalue_localization_check(cfg: ExperimentConfig, seeds=None, epsilon: float = 0.5):
    """Largest excursion of any coherency eigenvalue beyond the MP support.

    Returns (passed, worst_excursion); failure is an outcome, not an error.
    """
    if epsilon <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    lcfg = cfg.lss_config()
    model = cfg.model()
    if seeds is None:
        seeds = [split_seed(cfg.seed, i) for i in range(cfg.replicates)]
    mp = MPModel(lcfg.c_N)
    lm, lp = mp.lambda_minus, mp.lambda_plus

    def one(sd: int) -> float:
        panel = simulate_panel(model, cfg.M, cfg.N, sd)
        table = spectral.dft_grid(panel)
        worst = 0.0
        for nu in lcfg.grid:
            S = spectral.smoothed_periodogram(panel, nu, cfg.B, grid=table)
            C = spectral.coherency_matrix(S)
            eigs = lss.hermitian_eigenvalues(C)
            worst = max(worst, lm - float(eigs[0]), float(eigs[-1]) - lp)
        return worst

    worst = max(_parallel_map(one, list(seeds), cfg.threads), default=0.0)
    worst = max(worst, 0.0)
    return worst <= epsilon, worst


def _dirichlet_sum(K, delta: float):
    """g_K(delta) = sum_{j=0}^{K-1} exp(-2 i pi j delta), vectorized in K."""
    K = np.asarray(K, dtype=float)
    if abs(delta - round(delta)) < 1e-15:
        return K.astype(complex)
    q = np.exp(-2j * np.pi * delta)
    return (1.0 - q ** K) / (1.0 - q)


def dft_covariance_check(model: ModelSpec, N_list, nu1: float, nu2: float):
    """Exact |E[xi(nu1) conj(xi(nu2))] - s(nu1) delta_{nu1=nu2}| per N.

    Uses the O(N) split over the autocovariance lag u (truncated where
    |r_u| < 1e-16); rows are (N, deviation, deviation * N).
    """
    rows = []
    for N in N_list:
        N = int(N)
        for nu in (nu1, nu2):
            k = nu * N
            if abs(k - round(k)) > 1e-9 * max(1.0, abs(k)):
                raise InvalidArgumentError(
                    f"frequency {nu} is not on the length-{N} Fourier grid"
                )
        delta = nu1 - nu2
        U = 0
        while U + 1 < N and abs(autocovariance(model, U + 1)) >= 1e-16:
            U += 1
        u = np.arange(0, U + 1)
        r_u = np.array([autocovariance(model, int(x)) for x in u], dtype=complex)
        g_fwd = _dirichlet_sum(N - u, delta)
        fwd = np.sum(r_u * np.exp(-2j * np.pi * u * nu1) * g_fwd)
        v = u[1:]
        g_rev = _dirichlet_sum(N - v, delta)
        rev = np.sum(np.conj(r_u[1:]) * np.exp(2j * np.pi * v * nu2) * g_rev)
        expected = (fwd + rev) / N
        same = abs(delta * N - round(delta * N)) < 1e-9 and round(delta * N) % N == 0
        target = spectral_density(model, nu1) if same else 0.0
        deviation = abs(expected - target)
        rows.append((N, float(deviation), float(deviation * N)))
    return rows


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _metadata_lines(config: dict) -> list[str]:
    return [f"# coherlss {__version__}",
            "# config " + json.dumps(config, sort_keys=True)]


def write_table_csv(path, header, rows, config: dict, extra_comments=()) -> None:
    """CSV with a metadata comment block; floats use shortest round-trip repr."""
    lines = _metadata_lines(config)
    lines.extend(extra_comments)
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    pathlib.Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_json(path, config: dict, summary: dict,
                       artifact: str = "summary") -> None:
    payload = {"artifact": artifact, "version": __version__,
               "config": config, "summary": summary}
    pathlib.Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                                  encoding="utf-8")


def write_sweep_outputs(result: SweepResult, out_dir) -> tuple[pathlib.Path, pathlib.Path]:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "sweep.csv"
    rows = [row for rec in result.records for row in rec.rows]
    rows.extend(result.mean_rows)
    write_table_csv(csv_path, SWEEP_HEADER, rows, result.config,
                    extra_comments=("# rows with seed=-1 are cross-seed means",))
    json_path = out / "sweep_summary.json"
    write_summary_json(json_path, result.config, result.summary, artifact="sweep_summary")
    return csv_path, json_path


def write_scaling_outputs(result: ScalingResult, out_dir) -> tuple[pathlib.Path, pathlib.Path]:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "scaling.csv"
    rows = [[row[name] for name in SCALING_HEADER] for row in result.rows]
    write_table_csv(csv_path, SCALING_HEADER, rows, result.config)
    json_path = out / "scaling_summary.json"
    write_summary_json(json_path, result.config, result.summary, artifact="scaling_summary")
    return csv_path, json_path


def write_histogram_outputs(result: HistogramResult, out_dir) -> tuple[pathlib.Path, pathlib.Path]:
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "histogram.csv"
    write_table_csv(csv_path, HISTOGRAM_HEADER, result.rows, result.config)
    json_path = out / "histogram_summary.json"
    write_summary_json(json_path, result.config, result.summary, artifact="histogram_summary")
    return csv_path, json_path
