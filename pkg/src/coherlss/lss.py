"""Corrected linear spectral statistics of coherency matrices.

For a coherency matrix C(nu) built from an M x N panel with smoothing span B,
the raw statistic is

    lss_raw(nu) = (1/M) tr f(C(nu)) - int f dmu_MP^{c_N},   c_N = M/(B+1),

and the corrected statistic subtracts the deterministic O((B/N)^2) term

    psi(nu) = lss_raw(nu) - r(nu) * phi(f) * v_N * [alpha > 2/3],

where v_N = (1/(B+1)) sum_{|b|<=B/2} (b/N)^2, phi(f) = <D, f> is the
distribution action of the p-transform at c_N, and r(nu) is either the model
value ((1/M) sum_m s'_m/s_m)^2 (oracle) or its lag-window plug-in estimate
(plugin).  The correction is only active when the smoothing span grows fast
enough, B ~ N^alpha with alpha > 2/3; below that the term is asymptotically
negligible and is suppressed.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from . import rmt, spectral
from .errors import (
    ConfigError,
    DegenerateEstimateError,
    DomainError,
    InvalidArgumentError,
)
from .rmt import MPModel, SpectralFunction, spectral_function
from .signal import ModelSpec, TimeSeriesPanel, spectral_density, spectral_density_derivative

CORRECTION_MODES = ("none", "oracle", "plugin")

# r-hat floor: rows whose lag-window density estimate falls below this
# fraction of the best row are floored instead of dividing by ~0
_S_FLOOR_FRACTION = 1e-6
_LOG_EIG_FLOOR = 1e-12
_DEFAULT_GRID_SIZE = 512


def _check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    value = int(value)
    if value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value}")
    return value


def default_lag_window_size(N: int, gamma0: int = 3) -> int:
    """Bandwidth L = round(N^(1/(2*gamma0+1))) for a model of smoothness gamma0."""
    return max(1, int(round(N ** (1.0 / (2 * gamma0 + 1)))))


def default_grid(N: int, stride: int | None = None) -> tuple:
    """Fourier frequencies k*stride/N, stride keeping the grid at <= 512 points."""
    if stride is None:
        stride = max(1, math.ceil(N / _DEFAULT_GRID_SIZE))
    stride = _check_positive_int(stride, "grid stride")
    return tuple(float(k) / N for k in range(0, N, stride))


@dataclasses.dataclass(frozen=True)
class LssConfig:
    """Validated parameter set for one statistic run.

    alpha defaults to log B / log N (the observable stand-in for the growth
    exponent of B = N^alpha); L defaults to the lag-window bandwidth for an
    AR-type model; grid defaults to a <=512-point Fourier subgrid.
    """

    N: int
    B: int
    M: int
    alpha: float | None = None
    L: int | None = None
    f: SpectralFunction | str = "square_centered"
    correction_mode: str = "oracle"
    grid: tuple | None = None

    def __post_init__(self):
        N = _check_positive_int(self.N, "N")
        B = _check_positive_int(self.B, "B")
        M = _check_positive_int(self.M, "M")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "M", M)
        if B % 2 != 0:
            raise ConfigError(f"B must be even, got {B}")
        c = M / (B + 1)
        if not 0.0 < c < 1.0:
            raise ConfigError(f"c_N = M/(B+1) must lie in (0, 1), got {c:.6g}")
        if N < 2:
            raise ConfigError("N must be at least 2")

        alpha = self.alpha
        if alpha is None:
            alpha = math.log(B) / math.log(N)
        alpha = float(alpha)
        if not 0.5 < alpha < 1.0:
            raise ConfigError(f"alpha must lie in (1/2, 1), got {alpha:.6g}")
        object.__setattr__(self, "alpha", alpha)

        L = self.L
        if L is None:
            L = default_lag_window_size(N)
        L = _check_positive_int(L, "L")
        if L >= N:
            raise ConfigError(f"L must satisfy 1 <= L < N, got L={L}, N={N}")
        object.__setattr__(self, "L", L)

        try:
            f = spectral_function(self.f)
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "f", f)
        if f.positive_domain and B + 1 < M:
            raise ConfigError(
                f"f={f.label} needs B+1 >= M (rank-deficient coherency otherwise), got B+1={B + 1}, M={M}"
            )

        if self.correction_mode not in CORRECTION_MODES:
            raise ConfigError(
                f"correction_mode must be one of {CORRECTION_MODES}, got {self.correction_mode!r}"
            )

        grid = self.grid
        if grid is None:
            grid = default_grid(N)
        else:
            grid = tuple(float(nu) for nu in grid)
            if not grid:
                raise ConfigError("grid must be nonempty")
            if not all(np.isfinite(grid)):
                raise ConfigError("grid frequencies must be finite")
        object.__setattr__(self, "grid", grid)

    @property
    def c_N(self) -> float:
        return self.M / (self.B + 1)

    @property
    def correction_active(self) -> bool:
        return self.alpha > 2.0 / 3.0

    @property
    def grid_array(self) -> np.ndarray:
        return np.asarray(self.grid, dtype=float)


@dataclasses.dataclass(frozen=True)
class LssRecord:
    """One evaluated frequency: raw statistic, correction pieces, psi."""

    nu: float
    lss_raw: float
    v_n: float
    u_n: float
    r_term: float
    phi: float
    psi: float
    mode: str
    floored: int = 0


def hermitian_eigenvalues(A) -> np.ndarray:
    """Ascending eigenvalues; rejects inputs that are not Hermitian to 1e-10."""
    if isinstance(A, spectral.SpectralMatrix):
        A = A.values
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {A.shape}")
    defect = np.linalg.norm(A - A.conj().T)
    if defect > 1e-10 * max(1.0, np.linalg.norm(A)):
        raise InvalidArgumentError(f"matrix is not Hermitian (defect {defect:.3e})")
    return np.linalg.eigvalsh(A)


def trace_functional(C, f) -> float:
    """(1/M) sum_i f(lambda_i(C)).  log demands eigenvalues > 1e-12, loudly."""
    f = spectral_function(f)
    eigs = hermitian_eigenvalues(C)
    if f.positive_domain:
        low = float(eigs[0])
        if low <= _LOG_EIG_FLOOR:
            raise DomainError(
                f"{f.label} trace functional needs eigenvalues > {_LOG_EIG_FLOOR}, got {low:.3e}",
                value=low,
            )
    return float(np.mean(f(eigs)))


def v_n(B: int, N: int) -> float:
    """(1/(B+1)) sum_{b=-B/2}^{B/2} (b/N)^2, by direct summation."""
    if B % 2 != 0 or B < 0:
        raise InvalidArgumentError(f"B must be a nonnegative even integer, got {B}")
    if N < 1:
        raise InvalidArgumentError(f"N must be positive, got {N}")
    half = B // 2
    b = np.arange(-half, half + 1, dtype=float)
    return float(np.mean((b / N) ** 2))


def u_n(B: int, N: int) -> float:
    """Convergence rate 1/B + sqrt(B)/N + (B/N)^3 of the corrected statistic."""
    if B < 1 or N < 1:
        raise InvalidArgumentError("B and N must be positive")
    return 1.0 / B + math.sqrt(B) / N + (B / N) ** 3


def r_n_true(model: ModelSpec, M: int, nu):
    """Model value ((1/M) sum_m s'_m/s_m)^2; rows share one model here."""
    ratio = spectral_density_derivative(model, nu) / spectral_density(model, nu)
    out = ratio ** 2
    return float(out) if np.isscalar(nu) or np.asarray(nu).ndim == 0 else out


def _r_hat_from_columns(s_col: np.ndarray, sp_col: np.ndarray) -> tuple[float, int]:
    s_max = float(np.max(s_col))
    if s_max <= 0.0:
        raise DegenerateEstimateError("all lag-window density estimates are nonpositive")
    floor = _S_FLOOR_FRACTION * s_max
    floored = int(np.count_nonzero(s_col < floor))
    safe = np.maximum(s_col, floor)
    return float(np.mean(sp_col / safe)) ** 2, floored


def r_n_hat_detailed(panel: TimeSeriesPanel, L: int, nu: float) -> tuple[float, int]:
    """Plug-in estimate of r and the count of floored rows."""
    if not 1 <= L < panel.N:
        raise InvalidArgumentError(f"L must satisfy 1 <= L < N, got L={L}, N={panel.N}")
    lags = spectral.lag_covariances(panel.data, L)
    s_grid, sp_grid = spectral.lag_window_grid(lags, np.asarray([nu], dtype=float))
    return _r_hat_from_columns(s_grid[:, 0], sp_grid[:, 0])


def r_n_hat(panel: TimeSeriesPanel, L: int, nu: float) -> float:
    return r_n_hat_detailed(panel, L, nu)[0]


_MP_CACHE: dict = {}
_PHI_CACHE: dict = {}


def mp_integral_value(c: float, f) -> float:
    f = spectral_function(f)
    key = (float(c), f.cache_key)
    if key not in _MP_CACHE:
        _MP_CACHE[key] = rmt.mp_integral(MPModel(c), f)
    return _MP_CACHE[key]


def phi_value(c: float, f) -> float:
    """phi(f) = <D, f>, the frequency-independent correction factor."""
    f = spectral_function(f)
    key = (float(c), f.cache_key)
    if key not in _PHI_CACHE:
        _PHI_CACHE[key] = rmt.distribution_action("p", MPModel(c), f)
    return _PHI_CACHE[key]


def assemble_psi(lss_raw: float, r_term: float, phi: float, vn: float, active: bool) -> float:
    # single assembly point so the LssRecord identity holds bit-for-bit
    return lss_raw - r_term * phi * vn * (1.0 if active else 0.0)


def _coherency_at(panel: TimeSeriesPanel, nu: float, B: int, grid=None) -> spectral.SpectralMatrix:
    return spectral.coherency_matrix(spectral.smoothed_periodogram(panel, nu, B, grid=grid))


def _check_panel_matches(panel: TimeSeriesPanel, cfg: LssConfig):
    if panel.M != cfg.M or panel.N != cfg.N:
        raise InvalidArgumentError(
            f"panel is {panel.M} x {panel.N} but the config expects {cfg.M} x {cfg.N}"
        )


def psi_at(source, cfg: LssConfig, nu: float, model: ModelSpec | None = None) -> LssRecord:
    """Evaluate one frequency from a panel or a precomputed coherency matrix.

    Oracle mode needs a model (taken from the panel when available); plugin
    mode needs the panel itself, since r-hat is estimated from the data.
    """
    panel = None
    if isinstance(source, TimeSeriesPanel):
        panel = source
        _check_panel_matches(panel, cfg)
        if model is None:
            model = panel.model
        C = _coherency_at(panel, nu, cfg.B)
    elif isinstance(source, spectral.SpectralMatrix):
        C = source
        if C.kind != "coherency":
            raise InvalidArgumentError(f"need a coherency matrix, got kind={C.kind!r}")
        if C.B != cfg.B:
            raise InvalidArgumentError(f"matrix was smoothed with B={C.B}, config has B={cfg.B}")
        if abs(C.nu - nu) > 1e-12:
            raise InvalidArgumentError(f"matrix frequency {C.nu} does not match nu={nu}")
        if C.values.shape[0] != cfg.M:
            raise InvalidArgumentError(
                f"matrix is {C.values.shape[0]} x {C.values.shape[0]}, config expects M={cfg.M}"
            )
    else:
        raise InvalidArgumentError("source must be a TimeSeriesPanel or a coherency SpectralMatrix")

    raw = trace_functional(C, cfg.f) - mp_integral_value(cfg.c_N, cfg.f)
    floored = 0
    if cfg.correction_mode == "none":
        r_term = 0.0
    elif cfg.correction_mode == "oracle":
        if model is None:
            raise InvalidArgumentError("oracle correction needs a model")
        r_term = r_n_true(model, cfg.M, nu)
    else:
        if panel is None:
            raise InvalidArgumentError("plugin correction needs the panel, not just C(nu)")
        r_term, floored = r_n_hat_detailed(panel, cfg.L, nu)
    vn = v_n(cfg.B, cfg.N)
    return LssRecord(
        nu=float(nu),
        lss_raw=raw,
        v_n=vn,
        u_n=u_n(cfg.B, cfg.N),
        r_term=float(r_term),
        phi=phi_value(cfg.c_N, cfg.f),
        psi=assemble_psi(raw, float(r_term), phi_value(cfg.c_N, cfg.f), vn, cfg.correction_active),
        mode=cfg.correction_mode,
        floored=floored,
    )


@dataclasses.dataclass(frozen=True)
class SweepPoint:
    """Raw statistic plus both correction candidates at one grid frequency."""

    nu: float
    lss_raw: float
    r_oracle: float | None
    r_plugin: float | None
    floored: int


def sweep_panel(panel: TimeSeriesPanel, cfg: LssConfig,
                want_oracle: bool = True, want_plugin: bool = True) -> list[SweepPoint]:
    """Evaluate the whole grid with shared DFT and lag-window tables."""
    _check_panel_matches(panel, cfg)
    nus = cfg.grid_array
    table = spectral.dft_grid(panel)
    mp_val = mp_integral_value(cfg.c_N, cfg.f)
    r_or = None
    if want_oracle:
        r_or = np.atleast_1d(np.asarray(r_n_true(panel.model, cfg.M, nus), dtype=float))
    s_grid = sp_grid = None
    if want_plugin:
        lags = spectral.lag_covariances(panel.data, cfg.L)
        s_grid, sp_grid = spectral.lag_window_grid(lags, nus)
    points = []
    for k, nu in enumerate(nus):
        C = _coherency_at(panel, float(nu), cfg.B, grid=table)
        raw = trace_functional(C, cfg.f) - mp_val
        r_p, fl = (None, 0)
        if want_plugin:
            r_p, fl = _r_hat_from_columns(s_grid[:, k], sp_grid[:, k])
        points.append(SweepPoint(
            nu=float(nu),
            lss_raw=raw,
            r_oracle=float(r_or[k]) if want_oracle else None,
            r_plugin=r_p,
            floored=fl,
        ))
    return points


def sup_over_grid(panel: TimeSeriesPanel, cfg: LssConfig) -> tuple[float, float, list[LssRecord]]:
    """(max |psi| over the grid, its frequency, all records).

    Ties break to the smallest frequency so the result is independent of
    grid ordering.
    """
    mode = cfg.correction_mode
    points = sweep_panel(panel, cfg, want_oracle=(mode == "oracle"), want_plugin=(mode == "plugin"))
    vn = v_n(cfg.B, cfg.N)
    un = u_n(cfg.B, cfg.N)
    phi = phi_value(cfg.c_N, cfg.f)
    records = []
    for pt in points:
        if mode == "none":
            r_term = 0.0
        elif mode == "oracle":
            r_term = pt.r_oracle
        else:
            r_term = pt.r_plugin
        records.append(LssRecord(
            nu=pt.nu,
            lss_raw=pt.lss_raw,
            v_n=vn,
            u_n=un,
            r_term=r_term,
            phi=phi,
            psi=assemble_psi(pt.lss_raw, r_term, phi, vn, cfg.correction_active),
            mode=mode,
            floored=pt.floored,
        ))
    best_val = -1.0
    best_nu = None
    for rec in records:
        a = abs(rec.psi)
        if a > best_val or (a == best_val and rec.nu < best_nu):
            best_val = a
            best_nu = rec.nu
    return best_val, best_nu, records
