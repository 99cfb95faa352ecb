"""Experiment orchestration from vacuum-persistence curves to integrated decay rates.

Four curve modes per effective mass m':

``exact``
    |<Omega|exp(-i H t)|Omega>|^2 with the exact sector ground state of H0
    and dense evolution; no sampling.
``noiseless``
    VQE . Trotter . VQE^dagger on |10101>, sampled without noise.
``noisy``
    same circuit under the configured NoiseModel, raw vacuum frequency.
``corrected``
    the same noisy shots as ``noisy``, post-selected on the zero-charge sector.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .errors import FitError, NumericalError, OptimizationError
from .hamiltonian import (
    LatticeParams,
    analytic_rate_1p1,
    build_parity_hamiltonian,
    normalize_convention,
    split_trotter_terms,
    vacuum_bits,
)
from .noise import Counts, NoiseModel, post_select, pvac, sample_noisy
from .simulator import Circuit, evolve_exact, sample, trotter_circuit, apply_circuit
from .vqe import VQEOptions, VQEResult, ansatz_circuit, exact_ground_state, optimize, reference_state

MODES = ("exact", "noiseless", "noisy", "corrected")
_STREAM = {"exact": 0, "noiseless": 1, "noisy": 2, "corrected": 2}
WINDOW_TOL = 1e-9
C1_RANGE = (0.0, 1.5)
WORKERS_ENV = "SCHWINGER_WORKERS"


def default_windows(wide: bool = False) -> dict[float, tuple[float, float]]:
    """Open fit intervals per effective mass.

    ``wide=True`` swaps in the wider 0.10 < t < 0.45 interval for m' = 1.4.
    """
    windows = {
        1.0: (0.15, 0.35),
        1.2: (0.15, 0.40),
        1.4: (0.15, 0.40),
        1.6: (0.15, 0.42),
        1.8: (0.15, 0.40),
        2.0: (0.15, 0.35),
    }
    if wide:
        windows[1.4] = (0.10, 0.45)
    return windows


def _default_times() -> tuple[float, ...]:
    return tuple(round(0.05 * k, 10) for k in range(10))


def _default_masses() -> tuple[float, ...]:
    return tuple(round(1.0 + 0.2 * k, 10) for k in range(6))


def _env_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer") from None


@dataclass(frozen=True)
class ExperimentConfig:
    lattice: LatticeParams = field(default_factory=LatticeParams)
    mass_grid: tuple[float, ...] = field(default_factory=_default_masses)
    time_grid: tuple[float, ...] = field(default_factory=_default_times)
    n_t: int = 3
    n_shot: int = 8192
    noise: NoiseModel = field(default_factory=lambda: NoiseModel(0.01, 0.01))
    fit_windows: Mapping[float, tuple[float, float]] = field(default_factory=default_windows)
    wide_window: bool = False
    seed: int = 1
    convention: str = "paper"
    modes: tuple[str, ...] = MODES
    vqe: VQEOptions = field(default_factory=VQEOptions)
    workers: int = field(default_factory=_env_workers)

    def __post_init__(self):
        object.__setattr__(self, "mass_grid", tuple(float(m) for m in self.mass_grid))
        object.__setattr__(self, "time_grid", tuple(float(t) for t in self.time_grid))
        object.__setattr__(
            self, "fit_windows",
            {float(k): (float(v[0]), float(v[1])) for k, v in dict(self.fit_windows).items()},
        )
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "convention", normalize_convention(self.convention))
        self.validate()

    def validate(self):
        ts = np.asarray(self.time_grid)
        if ts.size < 1 or np.any(ts < 0) or np.any(np.diff(ts) <= 0):
            raise ValueError("time_grid must be nonnegative and strictly increasing")
        ms = np.asarray(self.mass_grid)
        if ms.size < 1 or np.any(ms <= 0) or np.any(np.diff(ms) <= 0):
            raise ValueError("mass_grid must be positive and strictly increasing")
        if self.n_t < 1:
            raise ValueError("n_t must be at least 1")
        if self.n_shot < 1:
            raise ValueError("n_shot must be at least 1")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        for m in self.mass_grid:
            lo, hi = self.window(m)
            if not (lo < hi and ts[0] - WINDOW_TOL <= lo and hi <= ts[-1] + WINDOW_TOL):
                raise ValueError(f"fit window {lo}:{hi} for m'={m} outside the time grid")

    def window(self, mprime: float) -> tuple[float, float]:
        if self.wide_window and math.isclose(mprime, 1.4):
            return default_windows(wide=True)[1.4]
        for m, w in self.fit_windows.items():
            if math.isclose(m, mprime, abs_tol=1e-9):
                return w
        raise ValueError(f"no fit window configured for m'={mprime}")

    def lattice_for(self, mprime: float) -> LatticeParams:
        return self.lattice.with_mass(mprime)

    def to_dict(self) -> dict:
        return {
            "lattice": asdict(self.lattice),
            "mass_grid": list(self.mass_grid),
            "time_grid": list(self.time_grid),
            "n_t": self.n_t,
            "n_shot": self.n_shot,
            "noise": asdict(self.noise),
            "fit_windows": {mass_tag(k): list(v) for k, v in sorted(self.fit_windows.items())},
            "wide_window": self.wide_window,
            "seed": self.seed,
            "convention": self.convention,
            "modes": list(self.modes),
            "vqe": {k: v for k, v in asdict(self.vqe).items() if k != "workers"},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ExperimentConfig":
        data = dict(data)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        if "lattice" in data:
            kwargs["lattice"] = _build(LatticeParams, data.pop("lattice"), "lattice")
        if "noise" in data:
            kwargs["noise"] = _build(NoiseModel, data.pop("noise"), "noise")
        if "vqe" in data:
            kwargs["vqe"] = _build(VQEOptions, data.pop("vqe"), "vqe")
        if "fit_windows" in data:
            kwargs["fit_windows"] = {float(k): tuple(v) for k, v in data.pop("fit_windows").items()}
        if isinstance(data.get("time_grid"), Mapping):
            grid = data.pop("time_grid")
            start, stop, step = float(grid["start"]), float(grid["stop"]), float(grid["step"])
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            kwargs["time_grid"] = tuple(round(start + step * k, 10) for k in range(n))
        kwargs.update(data)
        return cls(**kwargs)

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            return cls.from_dict(tomllib.load(fh))


def _build(cls, data, section):
    data = dict(data)
    unknown = set(data) - set(cls.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown keys in [{section}]: {sorted(unknown)}")
    return cls(**data)


def mass_tag(m: float) -> str:
    s = f"{m:.4f}".rstrip("0")
    return s + "0" if s.endswith(".") else s


def job_seed(master: int, mprime: float, t: float, mode: str) -> int:
    """Seed for one (m', t, mode) job; ``noisy`` and ``corrected`` share shots."""
    key = (round(mprime * 1e6), round(t * 1e6), _STREAM[mode])
    return int(np.random.SeedSequence(master, spawn_key=key).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class DecaySeries:
    mprime: float
    mode: str
    t: tuple[float, ...]
    pvac: tuple[float, ...]
    stderr: tuple[float, ...]
    degraded: bool = False
    vqe_fidelity: float | None = None
    seeds: tuple[int, ...] = ()

    def __post_init__(self):
        if not len(self.t) == len(self.pvac) == len(self.stderr):
            raise ValueError("t, pvac and stderr lengths differ")
        for p in self.pvac:
            if not -1e-12 <= p <= 1 + 1e-12:
                raise ValueError(f"P_vac {p} outside [0, 1]")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "pvac", "stderr"])
        for row in zip(self.t, self.pvac, self.stderr):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, mprime: float, mode: str) -> "DecaySeries":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or set(rows[0]) != {"t", "pvac", "stderr"}:
            raise ValueError("curve CSV must have header t,pvac,stderr")
        col = lambda k: tuple(float(r[k]) for r in rows)  # noqa: E731
        return cls(mprime, mode, col("t"), col("pvac"), col("stderr"))

    def windowed(self, window) -> "DecaySeries":
        lo, hi = window
        keep = [i for i, t in enumerate(self.t) if lo + WINDOW_TOL < t < hi - WINDOW_TOL]
        pick = lambda xs: tuple(xs[i] for i in keep)  # noqa: E731
        return replace(self, t=pick(self.t), pvac=pick(self.pvac), stderr=pick(self.stderr),
                       seeds=pick(self.seeds) if self.seeds else ())


@dataclass(frozen=True)
class FitResult:
    gamma: float
    c1: float
    covariance: tuple[tuple[float, float], tuple[float, float]]
    window: tuple[float, float] | None
    n_points: int
    weighted: bool
    iterations: int

    @property
    def gamma_stderr(self) -> float:
        return math.sqrt(max(self.covariance[1][1], 0.0))

    @property
    def c1_stderr(self) -> float:
        return math.sqrt(max(self.covariance[0][0], 0.0))


def fit_decay(series: DecaySeries, window=None, volume: float = 2.25,
              max_iter: int = 100) -> FitResult:
    """Fit c1 * exp(-Gamma * volume * t) on the points strictly inside ``window``.

    Gauss-Newton with step halving, started from a log-linear regression.
    Points are weighted by 1/stderr^2 when every windowed stderr is positive;
    otherwise the fit is unweighted and the covariance is scaled by the
    residual variance.
    """
    s = series.windowed(window) if window is not None else series
    t, y, sig = (np.asarray(v, dtype=float) for v in (s.t, s.pvac, s.stderr))
    if t.size < 3:
        raise FitError(f"need at least 3 points in window {window}, got {t.size}")
    if np.any(y <= 0):
        raise FitError("P_vac must be positive inside the fit window")
    weighted = bool(np.all(sig > 0))
    if not weighted:
        sig = np.ones_like(y)

    # log-linear seed: ln y = ln c1 - (Gamma V) t, weights (y / sigma)^2
    w = (y / sig) ** 2
    A = np.stack([np.ones_like(t), -volume * t], axis=1)
    lhs = A.T @ (A * w[:, None])
    rhs = A.T @ (w * np.log(y))
    try:
        ln_c1, gamma = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise FitError("singular log-linear seed") from exc
    theta = np.array([math.exp(ln_c1), gamma])

    def residual_and_jac(th):
        e = np.exp(-th[1] * volume * t)
        f = th[0] * e
        r = (y - f) / sig
        J = np.stack([e, -th[0] * volume * t * e], axis=1) / sig[:, None]
        return r, J

    r, J = residual_and_jac(theta)
    rss = float(r @ r)
    converged = False
    for it in range(1, max_iter + 1):
        JtJ = J.T @ J
        if np.linalg.cond(JtJ) > 1e14:
            raise FitError("singular normal equations")
        step = np.linalg.solve(JtJ, J.T @ r)
        lam = 1.0
        while True:
            trial = theta + lam * step
            r_new, J_new = residual_and_jac(trial)
            rss_new = float(r_new @ r_new)
            if rss_new <= rss or lam < 1e-8:
                break
            lam *= 0.5
        small = np.all(np.abs(lam * step) <= 1e-12 * (np.abs(theta) + 1e-12))
        theta, r, J, rss_prev, rss = trial, r_new, J_new, rss, rss_new
        if small or abs(rss_prev - rss) <= 1e-30 + 1e-15 * rss_prev:
            converged = True
            break
    if not converged:
        raise FitError(f"Gauss-Newton did not converge in {max_iter} iterations")

    JtJ = J.T @ J
    cov = np.linalg.inv(JtJ)
    if not weighted:
        dof = max(t.size - 2, 1)
        cov = cov * (rss / dof)
    return FitResult(
        gamma=float(theta[1]),
        c1=float(theta[0]),
        covariance=tuple(tuple(float(v) for v in row) for row in cov),
        window=None if window is None else (float(window[0]), float(window[1])),
        n_points=int(t.size),
        weighted=weighted,
        iterations=it,
    )


@dataclass(frozen=True)
class IntegratedRate:
    value: float
    stderr: float
    convention: str


def integrate_rates(table, m: float, convention: str = "literal", errors=None) -> IntegratedRate:
    """Trapezoid of m' Gamma(m') / pi over the m' grid (``paper``: divided by pi again).

    ``table`` is a mapping or an ordered sequence of (m', Gamma) pairs whose
    grid starts at the bare mass ``m``. ``errors`` optionally maps m' to the
    standard error of Gamma; fits are treated as independent.
    """
    convention = normalize_convention(convention)
    pairs = list(table.items()) if isinstance(table, Mapping) else [tuple(p) for p in table]
    if len(pairs) < 2:
        raise ValueError("need at least two grid points")
    grid = np.array([float(p[0]) for p in pairs])
    rates = np.array([float(p[1]) for p in pairs])
    if np.any(np.diff(grid) <= 0):
        raise ValueError("mass grid must be strictly increasing without duplicates")
    if not math.isclose(grid[0], m, rel_tol=1e-9, abs_tol=1e-9):
        raise ValueError(f"grid starts at {grid[0]}, expected the bare mass {m}")
    # trapezoid weights
    h = np.diff(grid)
    wts = np.zeros_like(grid)
    wts[:-1] += h / 2
    wts[1:] += h / 2
    coef = wts * grid / math.pi
    if convention == "paper":
        coef = coef / math.pi
    value = float(coef @ rates)
    var = 0.0
    if errors is not None:
        err_map = dict(errors.items()) if isinstance(errors, Mapping) else dict(errors)
        sig = np.array([float(err_map.get(g, 0.0)) for g in grid])
        var = float(np.sum((coef * sig) ** 2))
    return IntegratedRate(value, math.sqrt(var), convention)


# --- curve generation -------------------------------------------------------

def _vqe_for(config: ExperimentConfig, mprime: float) -> tuple[VQEResult, bool]:
    h0 = build_parity_hamiltonian("even", config.lattice_for(mprime).with_field(0.0))
    try:
        return optimize(h0, opts=config.vqe), False
    except OptimizationError as exc:
        warnings.warn(f"m'={mprime}: {exc}; curve marked degraded", stacklevel=2)
        return exc.best, True


class VacuumCache:
    """VQE results keyed by (m', a, n_sites); thread-safe enough for our use (idempotent fill)."""

    def __init__(self):
        self._store: dict = {}

    def get(self, config: ExperimentConfig, mprime: float) -> tuple[VQEResult, bool]:
        key = (round(mprime, 9), config.lattice.a, config.lattice.n_sites, config.vqe)
        if key not in self._store:
            self._store[key] = _vqe_for(config, mprime)
        return self._store[key]


_DEFAULT_CACHE = VacuumCache()


def experiment_circuit(config: ExperimentConfig, mprime: float, t: float, theta) -> Circuit:
    """U_VQE, n_t Trotter steps of H+(m', eE) up to time t, then U_VQE^dagger."""
    h_plus = build_parity_hamiltonian("even", config.lattice_for(mprime))
    split = split_trotter_terms(h_plus)
    prep = ansatz_circuit(theta)
    return prep + trotter_circuit(split, t, config.n_t) + prep.inverse()


def _exact_curve(config: ExperimentConfig, mprime: float) -> DecaySeries:
    params = config.lattice_for(mprime)
    omega = exact_ground_state(build_parity_hamiltonian("even", params.with_field(0.0)))
    h_plus = build_parity_hamiltonian("even", params)
    values = []
    for t in config.time_grid:
        amp = omega.inner(evolve_exact(h_plus, t, omega))
        values.append(min(1.0, abs(amp) ** 2))
    n = len(values)
    return DecaySeries(mprime, "exact", config.time_grid, tuple(values), (0.0,) * n)


def run_curves(config: ExperimentConfig, mprime: float, modes: Sequence[str],
               cache: VacuumCache | None = None) -> dict[str, DecaySeries]:
    """Curves for several modes at one m'; ``noisy``/``corrected`` reuse the same shots."""
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
    out: dict[str, DecaySeries] = {}
    if "exact" in modes:
        out["exact"] = _exact_curve(config, mprime)
    shot_modes = [m for m in modes if m != "exact"]
    if not shot_modes:
        return out

    vqe_result, degraded = (cache or _DEFAULT_CACHE).get(config, mprime)
    init = reference_state()
    vac = vacuum_bits(config.lattice.n_sites)
    rows: dict[str, list] = {m: [] for m in shot_modes}
    for t in config.time_grid:
        circuit = experiment_circuit(config, mprime, t, vqe_result.theta)
        if "noiseless" in shot_modes:
            seed = job_seed(config.seed, mprime, t, "noiseless")
            counts = Counts(sample(apply_circuit(init, circuit), config.n_shot, seed))
            rows["noiseless"].append((*pvac(counts, vac), seed))
        if "noisy" in shot_modes or "corrected" in shot_modes:
            seed = job_seed(config.seed, mprime, t, "noisy")
            counts = sample_noisy(circuit, init, config.n_shot, config.noise, seed)
            if "noisy" in shot_modes:
                rows["noisy"].append((*pvac(counts, vac), seed))
            if "corrected" in shot_modes:
                rows["corrected"].append((*pvac(post_select(counts), vac), seed))
    for mode, r in rows.items():
        p, se, seeds = zip(*r)
        out[mode] = DecaySeries(mprime, mode, config.time_grid, p, se, degraded=degraded,
                                vqe_fidelity=vqe_result.fidelity, seeds=seeds)
    return {m: out[m] for m in modes}


def run_curve(config: ExperimentConfig, mprime: float, mode: str,
              cache: VacuumCache | None = None) -> DecaySeries:
    return run_curves(config, mprime, (mode,), cache)[mode]


# --- rate tables ------------------------------------------------------------

@dataclass(frozen=True)
class RateEntry:
    mprime: float
    window: tuple[float, float]
    fit: FitResult | None
    flags: tuple[str, ...] = ()

    @property
    def gamma(self) -> float | None:
        return None if self.fit is None else self.fit.gamma

    def to_dict(self) -> dict:
        d = {"mprime": self.mprime, "window": list(self.window), "flags": list(self.flags)}
        if self.fit is not None:
            d.update(
                gamma=self.fit.gamma,
                gamma_stderr=self.fit.gamma_stderr,
                c1=self.fit.c1,
                covariance=[list(r) for r in self.fit.covariance],
                n_points=self.fit.n_points,
                weighted=self.fit.weighted,
            )
        return d


@dataclass(frozen=True)
class RateTable:
    mode: str
    entries: tuple[RateEntry, ...]
    gamma_3p1: Mapping[str, IntegratedRate | None]
    flags: tuple[str, ...] = ()

    def rates(self) -> dict[float, float]:
        return {e.mprime: e.gamma for e in self.entries if e.gamma is not None}

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "entries": [e.to_dict() for e in self.entries],
            "gamma_3p1": {
                k: (None if v is None else {"value": v.value, "stderr": v.stderr})
                for k, v in self.gamma_3p1.items()
            },
            "flags": list(self.flags),
        }


def build_rate_table(config: ExperimentConfig, curves: Mapping[float, DecaySeries], mode: str) -> RateTable:
    entries = []
    table_flags = []
    volume = config.lattice.volume
    for mprime in config.mass_grid:
        series = curves[mprime]
        window = config.window(mprime)
        flags = []
        if series.degraded:
            flags.append("vqe_fidelity_below_threshold")
        try:
            fit = fit_decay(series, window, volume)
        except FitError as exc:
            entries.append(RateEntry(mprime, window, None, (*flags, f"fit_failed: {exc}")))
            table_flags.append(f"m'={mass_tag(mprime)} excluded: {exc}")
            continue
        if fit.gamma < 0:
            flags.append("negative_rate")
        if not C1_RANGE[0] < fit.c1 <= C1_RANGE[1]:
            flags.append("c1_outside_(0,1.5]")
        entries.append(RateEntry(mprime, window, fit, tuple(flags)))

    good = [(e.mprime, e.fit) for e in entries if e.fit is not None]
    integrated: dict[str, IntegratedRate | None] = {}
    for conv in ("literal", "paper"):
        try:
            integrated[conv] = integrate_rates(
                [(m, f.gamma) for m, f in good], config.lattice.m, conv,
                errors={m: f.gamma_stderr for m, f in good},
            )
        except ValueError as exc:
            integrated[conv] = None
            table_flags.append(f"integration_failed[{conv}]: {exc}")
    return RateTable(mode, tuple(entries), integrated, tuple(dict.fromkeys(table_flags)))


def analytic_table(config: ExperimentConfig) -> dict:
    g = {mass_tag(m): analytic_rate_1p1(m, config.lattice.eE) for m in config.mass_grid}
    pairs = [(m, analytic_rate_1p1(m, config.lattice.eE)) for m in config.mass_grid]
    return {
        "gamma_1p1": g,
        "gamma_3p1": {c: integrate_rates(pairs, config.lattice.m, c).value for c in ("literal", "paper")},
    }


@dataclass
class BenchmarkResult:
    config: ExperimentConfig
    curves: dict[str, dict[float, DecaySeries]]
    tables: dict[str, RateTable]
    vqe: dict[float, tuple[VQEResult, bool]]
    failures: dict[str, str] = field(default_factory=dict)

    def rates_json(self) -> dict:
        return {
            "convention": self.config.convention,
            "modes": {mode: t.to_dict() for mode, t in self.tables.items()},
            "analytic": analytic_table(self.config),
            "failures": dict(sorted(self.failures.items())),
        }

    def meta_json(self) -> dict:
        import scipy

        seeds = {
            f"{mode}_{mass_tag(m)}": list(s.seeds)
            for mode, by_mass in self.curves.items() for m, s in by_mass.items() if s.seeds
        }
        return {
            "config": self.config.to_dict(),
            "master_seed": self.config.seed,
            "seed_rule": "SeedSequence(master, spawn_key=(round(m'*1e6), round(t*1e6), stream))",
            "job_seeds": dict(sorted(seeds.items())),
            "versions": {
                "schwinger": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
        }

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        (out / "curves").mkdir(parents=True, exist_ok=True)
        for mode, by_mass in self.curves.items():
            for m, series in sorted(by_mass.items()):
                (out / "curves" / f"{mode}_{mass_tag(m)}.csv").write_text(series.to_csv())
        _write_json(out / "rates.json", self.rates_json())
        _write_json(out / "meta.json", self.meta_json())
        _write_json(out / "vqe.json", [
            {**res.to_record(m, self.config.lattice.a), "degraded": deg}
            for m, (res, deg) in sorted(self.vqe.items())
        ])
        return out


def _write_json(path: Path, data):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def run_benchmark(config: ExperimentConfig | None = None, out_dir=None,
                  cache: VacuumCache | None = None) -> BenchmarkResult:
    """Every mass in every mode, fitted and integrated; optionally persisted.

    A failing mass is recorded in ``failures`` and left out; the others run on.
    """
    config = config or ExperimentConfig()
    cache = cache or VacuumCache()
    modes = config.modes

    def job(mprime):
        try:
            return mprime, run_curves(config, mprime, modes, cache), None
        except (NumericalError, ValueError) as exc:
            return mprime, None, f"{type(exc).__name__}: {exc}"

    # VQE first so parallel curve jobs only read the cache
    vqe = {}
    if any(m != "exact" for m in modes):
        for mprime in config.mass_grid:
            vqe[mprime] = cache.get(config, mprime)
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            results = list(pool.map(job, config.mass_grid))
    else:
        results = [job(m) for m in config.mass_grid]

    curves: dict[str, dict[float, DecaySeries]] = {mode: {} for mode in modes}
    failures = {}
    for mprime, by_mode, err in results:
        if err is not None:
            failures[mass_tag(mprime)] = err
            continue
        for mode, series in by_mode.items():
            curves[mode][mprime] = series

    tables = {}
    for mode in modes:
        if not curves[mode]:
            continue
        sub = replace(config, mass_grid=tuple(m for m in config.mass_grid if m in curves[mode]))
        tables[mode] = build_rate_table(sub, curves[mode], mode)
    result = BenchmarkResult(config, curves, tables, vqe, failures)
    if out_dir is not None:
        result.write(out_dir)
    return result
