"""Configuration-driven quench runner.

A run prepares the uniform initial state, quenches to the configured couplings,
evolves to t_final with the chosen driver, and writes per-replicate CSV tables
plus checkpoints into one directory per replicate.  Oracle-based merit tables
are added for chains small enough to diagonalize, and replicate statistics are
aggregated into fig*-named summary tables.

Configuration lives in a plain-text ``key = value`` file; every key matches an
``ExperimentConfig`` field and can be overridden from the command line.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .ansatz import Fnn, Rbm, load_params, save_params
from .errors import ConfigError, ResourceError
from .estimators import expectation_sigma_x, expectation_sigma_z
from .evolution import FitOptions, PtvmcOptions, prepare_initial_state, ptvmc_step, tvmc_rk4_step
from .oracle import (
    DENSE_EVOLVE_MAX_SITES,
    ExactEvolution,
    amplitude_ratio_and_phase_distance,
    integrate_series,
    nnqs_to_dense,
    ranked_configurations,
    state_infidelity,
    uniform_state,
)
from .sampling import SamplerConfig, draw_samples
from .solvers import SolverConfig, kfac_partition
from .spin_model import TiltedIsingModel, build_model, trotter_schedule


@dataclass
class ExperimentConfig:
    # model and quench target; the pre-quench chain has only the +x field,
    # whose ground state is the exact uniform product state
    L: int = 14
    J: float = 1.0
    h_x: float = 0.5
    h_z: float = 0.5
    pre_h_x: float = 1.0
    # ansatz
    ansatz: str = "fnn"  # "fnn" | "rbm"
    layers: tuple[int, ...] | None = None  # fnn widths; default (L, 4L, 3L, 1)
    alpha: int = 5  # rbm hidden-unit density
    noise_scale: float = 0.01
    # driver
    method: str = "ptvmc"  # "ptvmc" | "tvmc"
    dt: float | None = None  # default 0.1 for ptvmc, 1e-3 for tvmc
    t_final: float = 2.0
    block_span: int = 6
    epsilon: float = 1e-5
    max_steps: int = 1000
    learning_rate: float = 0.2
    decay_factor: float = 0.8
    decay_interval: int = 400
    # sampling
    sampler: str = "full"  # "full" | "metropolis"
    n_samples: int = 10_000
    n_chains: int = 16
    burn_in: int | None = None
    thinning: int | None = None
    # solver
    solver: str = "direct"  # "direct" | "minsr" | "kfac"
    diag_shift: float = 1e-6
    tvmc_diag_shift: float = 0.0
    kfac_blocks: tuple[int, ...] | None = None
    # initial-state fit
    prep_tolerance: float = 1e-8
    prep_max_steps: int = 2000
    # merits and output
    merits: str = "auto"  # "auto" | "on" | "off"
    ranks: tuple[int, ...] = (2, 50, 500)
    obs_site: int | None = None  # default: (L + 1) // 2
    replicates: int = 1
    seed: int = 7
    out: str = "runs/quench"

    def validate(self) -> None:
        checks = [
            (self.L >= 2, "L must be >= 2"),
            (self.ansatz in ("fnn", "rbm"), f"unknown ansatz {self.ansatz!r}"),
            (self.method in ("ptvmc", "tvmc"), f"unknown method {self.method!r}"),
            (self.sampler in ("full", "metropolis"), f"unknown sampler {self.sampler!r}"),
            (self.solver in ("direct", "minsr", "kfac"), f"unknown solver {self.solver!r}"),
            (self.t_final > 0, "t_final must be > 0"),
            (self.effective_dt > 0, "dt must be > 0"),
            (self.epsilon > 0 and self.max_steps >= 1, "need epsilon > 0 and max_steps >= 1"),
            (self.replicates >= 1, "replicates must be >= 1"),
            (self.pre_h_x > 0, "pre-quench field must be > 0 (paramagnetic side)"),
            (2 <= self.block_span <= self.L, "block_span must lie in [2, L]"),
            (all(n >= 1 for n in self.ranks), "ranks must be positive"),
            (self.merits in ("auto", "on", "off"), f"unknown merits mode {self.merits!r}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        if self.merits_enabled and any(n > 2**self.L for n in self.ranks):
            raise ConfigError(f"ranks {self.ranks} exceed the 2^{self.L} configurations")
        if self.merits == "on" and self.L > DENSE_EVOLVE_MAX_SITES:
            raise ResourceError(
                f"oracle merits need exact diagonalization, refused for L={self.L} > {DENSE_EVOLVE_MAX_SITES}"
            )

    @property
    def effective_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return 0.1 if self.method == "ptvmc" else 1e-3

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.effective_dt)))

    @property
    def merits_enabled(self) -> bool:
        if self.merits == "off":
            return False
        if self.merits == "on":
            return True
        return self.L <= DENSE_EVOLVE_MAX_SITES

    @property
    def observable_site(self) -> int:
        return self.obs_site if self.obs_site is not None else (self.L + 1) // 2

    @property
    def fnn_layers(self) -> tuple[int, ...]:
        return self.layers if self.layers is not None else (self.L, 4 * self.L, 3 * self.L, 1)


_TUPLE_FIELDS = {"layers", "kfac_blocks", "ranks"}
_OPTIONAL_INT = {"burn_in", "thinning", "obs_site"}
_OPTIONAL_FLOAT = {"dt"}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if name in _TUPLE_FIELDS:
        return tuple(int(v) for v in raw.replace(",", " ").split())
    types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    if name not in types:
        raise ConfigError(f"unknown configuration key {name!r}")
    if name in _OPTIONAL_INT:
        return int(raw)
    if name in _OPTIONAL_FLOAT:
        return float(raw)
    kind = types[name]
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_file(path) -> dict:
    """Read ``key = value`` lines; '#' starts a comment, blank lines ignored."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        values[key.strip()] = raw.strip()
    return values


def config_from_sources(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    merged = dict(file_values or {})
    merged.update(overrides or {})
    kwargs = {}
    for key, raw in merged.items():
        kwargs[key] = _coerce(key, raw) if isinstance(raw, str) else raw
    try:
        config = ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


def config_snapshot(config: ExperimentConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# run pipeline


def _make_ansatz(config: ExperimentConfig, seed):
    if config.ansatz == "fnn":
        return Fnn.near_uniform(config.fnn_layers, config.noise_scale, seed)
    return Rbm.near_uniform(config.L, config.alpha * config.L, config.noise_scale, seed)


def _sampler_config(config: ExperimentConfig) -> SamplerConfig:
    mode = "full" if config.sampler == "full" else "metropolis"
    return SamplerConfig(
        mode=mode,
        n_samples=config.n_samples,
        n_chains=config.n_chains,
        burn_in=config.burn_in,
        thinning=config.thinning,
        seed=config.seed,
    )


def _solver_config(config: ExperimentConfig, ansatz) -> SolverConfig:
    partition = None
    if config.solver == "kfac":
        blocks = config.kfac_blocks
        if blocks is None:
            if isinstance(ansatz, Fnn):
                n_layers = len(ansatz.weights)
                blocks = (1, 3, 1) if n_layers == 3 else (1,) * n_layers
            else:
                blocks = (1, 1, 1)
        partition = kfac_partition(ansatz, blocks)
    return SolverConfig(method=config.solver, diag_shift=config.diag_shift, kfac_partition=partition)


def _ptvmc_options(config: ExperimentConfig, ansatz) -> PtvmcOptions:
    return PtvmcOptions(
        epsilon=config.epsilon,
        max_steps=config.max_steps,
        learning_rate=config.learning_rate,
        decay_factor=config.decay_factor,
        decay_interval=config.decay_interval,
        sampler=_sampler_config(config),
        solver=_solver_config(config, ansatz),
        block_span=config.block_span,
        dt=config.effective_dt,
    )


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path: Path, header: list[str], columns: list) -> None:
    """Comma-separated table, one header row, floats at 17 significant digits."""
    n = len(columns[0]) if columns else 0
    lines = [",".join(header)]
    for i in range(n):
        cells = []
        for col in columns:
            v = col[i]
            if isinstance(v, (bool, np.bool_)):
                cells.append(str(int(v)))
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(format(float(v), ".17g"))
        lines.append(",".join(cells))
    _write_text(path, "\n".join(lines) + "\n")


def read_csv(path: Path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    data = [[] for _ in header]
    for line in lines[1:]:
        for slot, cell in zip(data, line.split(",")):
            slot.append(float(cell))
    return {name: np.array(col) for name, col in zip(header, data)}


def _replicate_dir(config: ExperimentConfig, rep: int) -> Path:
    return Path(config.out) / f"rep{rep:02d}"


def _checkpoint_path(repdir: Path, step: int) -> Path:
    return repdir / "checkpoints" / f"params_step{step:04d}.bin"


def _write_manifest(repdir: Path, payload: dict) -> None:
    _write_text(repdir / "manifest.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_manifest(repdir: Path) -> dict | None:
    path = repdir / "manifest.json"
    if not path.exists():
        return None
    return json.loads(path.read_text())


def prepare_replicate(config: ExperimentConfig, rep: int):
    """Fit the uniform initial state and write checkpoint 0; reuses an existing one."""
    repdir = _replicate_dir(config, rep)
    (repdir / "checkpoints").mkdir(parents=True, exist_ok=True)
    ck0 = _checkpoint_path(repdir, 0)
    if ck0.exists():
        return load_params(ck0)
    ansatz0 = _make_ansatz(config, seed=(config.seed, rep, 99))
    fit = FitOptions(
        tolerance=config.prep_tolerance,
        max_steps=config.prep_max_steps,
        learning_rate=config.learning_rate,
        decay_factor=config.decay_factor,
        decay_interval=config.decay_interval,
        sampler=_sampler_config(config),
        solver=_solver_config(config, ansatz0),
    )
    prepared = prepare_initial_state(ansatz0, fit, seed_ctx=(rep, 0))
    save_params(ck0, prepared)
    _write_manifest(
        repdir,
        {
            "version": __version__,
            "seed": config.seed,
            "replicate": rep,
            "n_steps": config.n_steps,
            "steps_completed": 0,
        },
    )
    return prepared


def _observables(config: ExperimentConfig, params, step: int, rep: int):
    samples = draw_samples(params, _sampler_config(config), (rep, 2, step))
    site = config.observable_site
    sx = expectation_sigma_x(samples, params, site).real
    sz = expectation_sigma_z(samples, site)
    return sx, sz


def evolve_replicate(config: ExperimentConfig, rep: int, resume: bool = False) -> None:
    """Advance one replicate to t_final, writing checkpoints and CSV tables."""
    repdir = _replicate_dir(config, rep)
    params = prepare_replicate(config, rep)
    manifest = _read_manifest(repdir) or {}
    start = manifest.get("steps_completed", 0) if resume else 0
    model = build_model(config.L, config.J, config.h_x, config.h_z)
    dt = config.effective_dt
    n_steps = config.n_steps

    obs_rows, block_rows, error_sums = [], [], [0.0]
    if resume and start > 0 and (repdir / "observables.csv").exists():
        params = load_params(_checkpoint_path(repdir, start))
        kept = read_csv(repdir / "observables.csv")
        for i in range(min(start + 1, len(kept["t"]))):
            obs_rows.append((kept["t"][i], kept["sigma_x_mid"][i], kept["sigma_z_mid"][i]))
        kept_inf = read_csv(repdir / "infidelity.csv")
        error_sums = list(kept_inf["error_sum"][: start + 1])
        if (repdir / "blocks.csv").exists():
            kept_blocks = read_csv(repdir / "blocks.csv")
            n_rows = int(np.sum(kept_blocks["step"] <= start)) if len(kept_blocks["step"]) else 0
            block_rows = [
                tuple(kept_blocks[name][i] for name in kept_blocks) for i in range(n_rows)
            ]
    else:
        start = 0
        sx, sz = _observables(config, params, 0, rep)
        obs_rows.append((0.0, sx, sz))

    if config.method == "ptvmc":
        options = _ptvmc_options(config, params)
        schedule = trotter_schedule(model, config.block_span, dt)
    else:
        options = None
        schedule = None

    for step in range(start, n_steps):
        t_next = (step + 1) * dt
        if config.method == "ptvmc":
            params, result = ptvmc_step(params, schedule, options, seed_ctx=(rep, 1, step))
            error_sums.append(result.error_sum)
            for j, blk in enumerate(result.blocks):
                diag = blk.solver
                block_rows.append(
                    (
                        step + 1,
                        t_next,
                        j,
                        blk.start,
                        blk.span,
                        blk.infidelity,
                        blk.steps_used,
                        int(blk.hit_max),
                        diag.residual if diag else 0.0,
                        diag.condition if diag else 0.0,
                        int(diag.fallback) if diag else 0,
                    )
                )
        else:
            params, _ = tvmc_rk4_step(
                params, model, dt, _sampler_config(config), config.tvmc_diag_shift, seed_ctx=(rep, 1, step)
            )
            error_sums.append(0.0)
        sx, sz = _observables(config, params, step + 1, rep)
        obs_rows.append((t_next, sx, sz))
        save_params(_checkpoint_path(repdir, step + 1), params)

        times = np.array([r[0] for r in obs_rows])
        write_csv(
            repdir / "observables.csv",
            ["t", "sigma_x_mid", "sigma_z_mid"],
            [times, [r[1] for r in obs_rows], [r[2] for r in obs_rows]],
        )
        accumulated = integrate_series(error_sums, dt)
        write_csv(
            repdir / "infidelity.csv",
            ["t", "error_sum", "accumulated_error"],
            [times, error_sums, accumulated],
        )
        if block_rows:
            write_csv(
                repdir / "blocks.csv",
                [
                    "step",
                    "t",
                    "block",
                    "start",
                    "span",
                    "infidelity",
                    "steps_used",
                    "hit_max",
                    "solver_residual",
                    "solver_condition",
                    "solver_fallback",
                ],
                [np.array([r[i] for r in block_rows]) for i in range(11)],
            )
        _write_manifest(
            repdir,
            {
                "version": __version__,
                "seed": config.seed,
                "replicate": rep,
                "n_steps": n_steps,
                "steps_completed": step + 1,
            },
        )


def merit_replicate(config: ExperimentConfig, rep: int) -> None:
    """Score checkpoints against the exactly evolved state; extends the CSVs."""
    if config.L > DENSE_EVOLVE_MAX_SITES:
        raise ResourceError(
            f"oracle merits need exact diagonalization, refused for L={config.L} > {DENSE_EVOLVE_MAX_SITES}"
        )
    repdir = _replicate_dir(config, rep)
    model = build_model(config.L, config.J, config.h_x, config.h_z)
    evo = ExactEvolution(model)
    psi0 = uniform_state(config.L)
    dt = config.effective_dt
    n_steps = config.n_steps
    times = np.arange(n_steps + 1) * dt

    ranked = ranked_configurations(evo.evolve(psi0, config.t_final), max(config.ranks))
    top = ranked[0]

    infid = np.empty(n_steps + 1)
    amp = {n: np.empty(n_steps + 1) for n in config.ranks}
    phase = {n: np.empty(n_steps + 1) for n in config.ranks}
    for k in range(n_steps + 1):
        params = load_params(_checkpoint_path(repdir, k))
        value = state_infidelity(nnqs_to_dense(params), evo.evolve(psi0, times[k]))
        # a checkpoint whose amplitudes overflowed scores as total mismatch
        infid[k] = value if np.isfinite(value) else 1.0
        for n in config.ranks:
            amp[n][k], phase[n][k] = amplitude_ratio_and_phase_distance(params, top, ranked[n - 1])

    base = read_csv(repdir / "infidelity.csv")
    write_csv(
        repdir / "infidelity.csv",
        ["t", "error_sum", "accumulated_error", "exact_infidelity", "integrated_infidelity"],
        [times, base["error_sum"], base["accumulated_error"], infid, integrate_series(infid, dt)],
    )
    header, cols = ["t"], [times]
    for n in config.ranks:
        header += [f"amplitude_ratio_{n}", f"phase_distance_{n}"]
        cols += [amp[n], phase[n]]
    write_csv(repdir / "amplitude_phase.csv", header, cols)


def replicate_statistics(values: np.ndarray) -> dict[str, np.ndarray]:
    """Trimmed mean and percentile bands across replicate runs, per time point.

    Drops the single largest and smallest value, averages the rest, and
    reports the 10th/90th percentiles of all runs using linear interpolation
    between order statistics.  Refuses fewer than 3 runs.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] < 3:
        raise ConfigError("replicate statistics need at least 3 runs")
    ordered = np.sort(values, axis=0)
    trimmed = ordered[1:-1].mean(axis=0)
    p10, p90 = np.percentile(values, [10.0, 90.0], axis=0, method="linear")
    return {"mean": trimmed, "p10": p10, "p90": p90}


_STATS_TABLES = (
    ("observables.csv", "fig2_observables.csv", ["sigma_x_mid", "sigma_z_mid"]),
    (
        "infidelity.csv",
        "fig2_infidelity.csv",
        ["error_sum", "accumulated_error", "exact_infidelity", "integrated_infidelity"],
    ),
    ("amplitude_phase.csv", "fig3_amplitude_phase.csv", None),  # all non-t columns
)


def write_statistics(config: ExperimentConfig) -> None:
    """Aggregate the per-replicate tables into fig*-named summary tables."""
    outdir = Path(config.out)
    for source, target, metrics in _STATS_TABLES:
        tables = []
        for rep in range(config.replicates):
            path = _replicate_dir(config, rep) / source
            if path.exists():
                tables.append(read_csv(path))
        if len(tables) < 3:
            continue
        names = metrics if metrics is not None else [k for k in tables[0] if k != "t"]
        names = [m for m in names if m in tables[0]]
        header, cols = ["t"], [tables[0]["t"]]
        for name in names:
            stats = replicate_statistics(np.stack([tb[name] for tb in tables]))
            for stat_name in ("mean", "p10", "p90"):
                header.append(f"{name}_{stat_name}")
                cols.append(stats[stat_name])
        write_csv(outdir / target, header, cols)


def run_experiment(config: ExperimentConfig, resume: bool = False) -> Path:
    """Full pipeline: prepare, evolve, score, and aggregate every replicate."""
    config.validate()
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_text(outdir / "config.txt", config_snapshot(config))
    for rep in range(config.replicates):
        evolve_replicate(config, rep, resume=resume)
        if config.merits_enabled:
            merit_replicate(config, rep)
    if config.replicates >= 3:
        write_statistics(config)
    return outdir
