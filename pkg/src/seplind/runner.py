"""Run configuration, experiment orchestration and output files.

Config files are YAML (JSON also parses).  Complex vectors and matrices are
written as nested lists whose innermost entries are ``[re, im]`` pairs; plain
real numbers are accepted as shorthand.  See README.md for the full schema.
"""
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .ensemble import AbortFractionError, run_ensemble
from .full import EvolutionConfig, integrate_master, substeps_per_step
from .kernels import BACKEND
from .model import ModelError, ProductState, SystemModel
from .observables import (
    TimeSeries,
    bootstrap_density_band,
    negativity,
    population,
    purity,
)
from .scenarios import (
    BELL_DEFAULT_RATES,
    BELL_RATE_NAMES,
    DEFAULT_T_MAX,
    STATES,
    bell_decay_density,
    bell_decay_oracle,
    build_bell_decay,
    build_swap,
    default_initial_state,
    swap_full_oracle,
)
from .separable import swap_restricted_closed_form

__all__ = [
    "ConfigError",
    "ScenarioSpec",
    "RunConfig",
    "RunResult",
    "parse_config",
    "load_config",
    "run",
    "compare",
    "write_outputs",
]

ALL_ENGINES = ("full_deterministic", "full_mcwf", "separable_mcwf", "oracles")
SCENARIOS = ("bell_decay", "swap_exchange", "custom")
BASIS_ORDERING = "computational basis |i>_A|k>_B at index i*d_B + k; two qubits: 00, 01, 10, 11"

DEFAULT_OBSERVABLES = {
    "bell_decay": ("negativity", "population:00", "population:phi+,phi-", "population:11"),
    "swap_exchange": ("negativity", "population:01", "population:10", "purity"),
    "custom": ("negativity", "purity"),
}

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ABORTS = 3


class ConfigError(ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    name: str
    model: SystemModel
    initial: ProductState
    parameters: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class RunConfig:
    scenario: ScenarioSpec
    evolution: EvolutionConfig
    engines: tuple
    observables: tuple
    batches: int
    bootstrap_resamples: int
    output: str
    raw: dict = field(default_factory=dict, repr=False)


# -- parsing -----------------------------------------------------------------

def _complex(x, path):
    if isinstance(x, bool):
        raise ConfigError(path, "expected a number or [re, im] pair")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in x
    ):
        return complex(x[0], x[1])
    raise ConfigError(path, "expected a number or [re, im] pair")


def _vector(x, path):
    if not isinstance(x, (list, tuple)) or not x:
        raise ConfigError(path, "expected a nonempty list of entries")
    return np.array([_complex(v, f"{path}[{i}]") for i, v in enumerate(x)])


def _matrix(x, path, dim):
    if not isinstance(x, (list, tuple)) or len(x) != dim:
        raise ConfigError(path, f"expected {dim} rows")
    rows = []
    for i, row in enumerate(x):
        if not isinstance(row, (list, tuple)) or len(row) != dim:
            raise ConfigError(f"{path}[{i}]", f"expected {dim} entries")
        rows.append([_complex(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows)


def _encode_complex(arr):
    arr = np.asarray(arr)
    if arr.ndim == 0:
        z = complex(arr)
        return [z.real, z.imag]
    return [_encode_complex(a) for a in arr]


def _check_keys(d, allowed, path):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected a mapping")
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(where, "unknown key")


def _number(d, key, path, default, kind=float, minimum=None):
    v = d.get(key, default)
    p = f"{path}.{key}" if path else key
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(p, f"expected a number, got {v!r}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(p, "expected an integer")
        v = int(v)
    else:
        v = float(v)
        if not math.isfinite(v):
            raise ConfigError(p, "must be finite")
    if minimum is not None and v < minimum:
        raise ConfigError(p, f"must be >= {minimum}")
    return v


def _parse_rates(raw, path):
    if raw is None:
        return BELL_DEFAULT_RATES
    if isinstance(raw, dict):
        _check_keys(raw, BELL_RATE_NAMES, path)
        return tuple(
            _number(raw, k, path, d, minimum=0.0) for k, d in zip(BELL_RATE_NAMES, BELL_DEFAULT_RATES)
        )
    if isinstance(raw, (list, tuple)) and len(raw) == 4:
        keyed = {f"{path}[{i}]": v for i, v in enumerate(raw)}
        return tuple(_number(keyed, k, "", None, minimum=0.0) for k in keyed)
    raise ConfigError(path, "expected four rates as a list or a mapping")


def _parse_scenario(raw):
    if isinstance(raw, str):
        raw = {"name": raw}
    _check_keys(raw, ("name", "rates", "gamma", "initial", "model"), "scenario")
    name = raw.get("name")
    if name not in SCENARIOS:
        raise ConfigError("scenario.name", f"must be one of {', '.join(SCENARIOS)}")

    params = {}
    if name == "bell_decay":
        for key in ("gamma", "model"):
            if key in raw:
                raise ConfigError(f"scenario.{key}", "not valid for bell_decay")
        rates = _parse_rates(raw.get("rates"), "scenario.rates")
        params["rates"] = list(rates)
        model = build_bell_decay(rates)
    elif name == "swap_exchange":
        for key in ("rates", "model"):
            if key in raw:
                raise ConfigError(f"scenario.{key}", "not valid for swap_exchange")
        gamma = _number(raw, "gamma", "scenario", 1.0, minimum=0.0)
        params["gamma"] = gamma
        model = build_swap(gamma)
    else:
        for key in ("rates", "gamma"):
            if key in raw:
                raise ConfigError(f"scenario.{key}", "not valid for custom")
        if "model" not in raw:
            raise ConfigError("scenario.model", "required for custom scenarios")
        m = raw["model"]
        _check_keys(m, ("dim_a", "dim_b", "hamiltonian", "lindblads", "label"), "scenario.model")
        d_a = _number(m, "dim_a", "scenario.model", None, kind=int, minimum=1)
        d_b = _number(m, "dim_b", "scenario.model", None, kind=int, minimum=1)
        dim = d_a * d_b
        h = (
            _matrix(m["hamiltonian"], "scenario.model.hamiltonian", dim)
            if "hamiltonian" in m
            else np.zeros((dim, dim))
        )
        lraw = m.get("lindblads", [])
        if not isinstance(lraw, list):
            raise ConfigError("scenario.model.lindblads", "expected a list of matrices")
        ls = tuple(_matrix(x, f"scenario.model.lindblads[{i}]", dim) for i, x in enumerate(lraw))
        try:
            model = SystemModel(d_a, d_b, h, ls, label=str(m.get("label", "custom")))
        except ModelError as exc:
            raise ConfigError("scenario.model", str(exc)) from None
        params["model"] = {
            "dim_a": d_a,
            "dim_b": d_b,
            "hamiltonian": _encode_complex(model.hamiltonian),
            "lindblads": [_encode_complex(x) for x in model.lindblads],
            "label": model.label,
        }

    if "initial" in raw:
        ini = raw["initial"]
        _check_keys(ini, ("psi_a", "psi_b"), "scenario.initial")
        for key in ("psi_a", "psi_b"):
            if key not in ini:
                raise ConfigError(f"scenario.initial.{key}", "required")
        a = _vector(ini["psi_a"], "scenario.initial.psi_a")
        b = _vector(ini["psi_b"], "scenario.initial.psi_b")
        if (a.size, b.size) != model.dims:
            raise ConfigError("scenario.initial", f"factor sizes must be {model.dims}")
        try:
            initial = ProductState.normalized(a, b)
        except ModelError as exc:
            raise ConfigError("scenario.initial", str(exc)) from None
    elif name == "custom":
        raise ConfigError("scenario.initial", "required for custom scenarios")
    else:
        initial = default_initial_state(name)
    params["initial"] = {
        "psi_a": _encode_complex(initial.psi_a),
        "psi_b": _encode_complex(initial.psi_b),
    }
    return ScenarioSpec(name, model, initial, params)


def _parse_observable(label, path, dims):
    if label in ("negativity", "purity"):
        return label
    if isinstance(label, str) and label.startswith("population:"):
        parts = label.split(":", 1)[1].split(",")
        for p in parts:
            if dims == (2, 2) and p in STATES:
                continue
            if p.isdigit() and int(p) < dims[0] * dims[1]:
                continue
            raise ConfigError(path, f"unknown population target {p!r}")
        return label
    raise ConfigError(path, f"unknown observable {label!r}")


def parse_config(text):
    """Parse and validate a run configuration; return a :class:`RunConfig`.

    A manifest written by a previous run is accepted as well; its ``config``
    section is used.
    """
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("", f"not valid YAML: {exc}") from None
    if isinstance(raw, dict) and raw.get("artifact") == "seplind" and "config" in raw:
        raw = raw["config"]
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a mapping")
    _check_keys(
        raw,
        ("scenario", "evolution", "engines", "observables", "batches", "bootstrap_resamples", "output"),
        "",
    )
    if "scenario" not in raw:
        raise ConfigError("scenario", "required")
    scenario = _parse_scenario(raw["scenario"])

    ev = raw.get("evolution", {}) or {}
    _check_keys(ev, ("t_max", "tau", "substep_threshold", "seed", "n_trajectories"), "evolution")
    defaults = EvolutionConfig(t_max=DEFAULT_T_MAX)
    kwargs = dict(
        t_max=_number(ev, "t_max", "evolution", defaults.t_max, minimum=0.0),
        tau=_number(ev, "tau", "evolution", defaults.tau),
        substep_threshold=_number(ev, "substep_threshold", "evolution", defaults.substep_threshold),
        seed=_number(ev, "seed", "evolution", defaults.seed, kind=int, minimum=0),
        n_trajectories=_number(ev, "n_trajectories", "evolution", defaults.n_trajectories, kind=int, minimum=1),
    )
    try:
        evolution = EvolutionConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError("evolution", str(exc)) from None

    engines = raw.get("engines", list(ALL_ENGINES))
    if isinstance(engines, str):
        engines = [engines]
    if not isinstance(engines, list) or not engines:
        raise ConfigError("engines", "select at least one engine")
    for i, e in enumerate(engines):
        if e not in ALL_ENGINES:
            raise ConfigError(f"engines[{i}]", f"unknown engine {e!r}")
    engines = tuple(e for e in ALL_ENGINES if e in engines)

    obs = raw.get("observables", list(DEFAULT_OBSERVABLES[scenario.name]))
    if not isinstance(obs, list) or not obs:
        raise ConfigError("observables", "expected a nonempty list")
    obs = tuple(_parse_observable(o, f"observables[{i}]", scenario.model.dims) for i, o in enumerate(obs))

    batches = _number(raw, "batches", "", 20, kind=int, minimum=2)
    if evolution.n_trajectories % batches:
        raise ConfigError(
            "batches",
            f"n_trajectories={evolution.n_trajectories} is not divisible by batches={batches}",
        )
    resamples = _number(raw, "bootstrap_resamples", "", 200, kind=int, minimum=1)
    output = raw.get("output", "results")
    if not isinstance(output, str):
        raise ConfigError("output", "expected a path string")

    resolved = {
        "scenario": {"name": scenario.name, **scenario.parameters},
        "evolution": {
            "t_max": evolution.t_max,
            "tau": evolution.tau,
            "substep_threshold": evolution.substep_threshold,
            "seed": evolution.seed,
            "n_trajectories": evolution.n_trajectories,
        },
        "engines": list(engines),
        "observables": list(obs),
        "batches": batches,
        "bootstrap_resamples": resamples,
        "output": output,
    }
    return RunConfig(scenario, evolution, engines, obs, batches, resamples, output, resolved)


def load_config(path):
    return parse_config(Path(path).read_text())


def with_overrides(config, seed=None, output=None):
    raw = json.loads(json.dumps(config.raw))
    if seed is not None:
        raw["evolution"]["seed"] = seed
    if output is not None:
        raw["output"] = str(output)
    return parse_config(json.dumps(raw))


# -- observables -------------------------------------------------------------

def observable_function(label, dims):
    if label == "negativity":
        return lambda rho: negativity(rho, dims)
    if label == "purity":
        return purity
    parts = label.split(":", 1)[1].split(",")
    dim = dims[0] * dims[1]
    targets = []
    for p in parts:
        if dims == (2, 2) and p in STATES:
            targets.append(STATES[p])
        else:
            v = np.zeros(dim, dtype=np.complex128)
            v[int(p)] = 1.0
            targets.append(v)

    def fn(rho):
        return min(1.0, sum(population(rho, t) for t in targets))

    return fn


def observable_slug(label):
    return (
        label.replace("population:", "population_")
        .replace(",", "_")
        .replace("+", "plus")
        .replace("-", "minus")
    )


# -- comparison --------------------------------------------------------------

def compare(series_a, series_b, n_sigma=3.0):
    """Per-time difference between two series and its significance.

    A time point is flagged when |a - b| exceeds n_sigma times the combined
    band sqrt(sd_a^2 + sd_b^2).  Each sd is floored at the series'
    ``resolution``: a bootstrap band collapses to zero when no sampled
    trajectory shows an event, and with the 1/N floor a 3-sigma band becomes
    the rule-of-three bound 3/N.
    """
    if len(series_a.times) != len(series_b.times) or not np.allclose(
        series_a.times, series_b.times, rtol=0, atol=1e-12
    ):
        raise ValueError("time grids differ")
    diff = series_a.mean - series_b.mean
    sd_a = np.maximum(series_a.stddev, series_a.resolution)
    sd_b = np.maximum(series_b.stddev, series_b.resolution)
    band = n_sigma * np.hypot(sd_a, sd_b)
    flags = np.abs(diff) > band + 1e-12
    return {
        "a": series_a.label,
        "b": series_b.label,
        "times": series_a.times.tolist(),
        "difference": diff.tolist(),
        "band": band.tolist(),
        "significant": flags.tolist(),
        "max_abs_difference": float(np.max(np.abs(diff))) if diff.size else 0.0,
        "any_significant": bool(flags.any()),
    }


def entanglement_detected(neg_series, n_sigma=3.0):
    """True when a negativity series leaves its zero band at some time."""
    sd = np.maximum(neg_series.stddev, neg_series.resolution)
    return bool(np.any(neg_series.mean > n_sigma * sd + 1e-9))


# -- orchestration -----------------------------------------------------------

@dataclass
class RunResult:
    series: dict
    manifest: dict
    report: dict
    exit_code: int = EXIT_OK
    ensembles: dict = field(default_factory=dict, repr=False)


def _deterministic_series(densities, observables, dims, engine, times):
    out = {}
    for label in observables:
        fn = observable_function(label, dims)
        vals = np.array([fn(r) for r in densities])
        out[(engine, label)] = TimeSeries(times, vals, np.zeros_like(vals), f"{engine}:{label}")
    return out


def _oracle_densities(config):
    sc = config.scenario
    ev = config.evolution
    times = ev.times
    if sc.name == "bell_decay":
        rates = sc.parameters["rates"]
        return {
            "oracle_full": [bell_decay_density(bell_decay_oracle(rates, t)[0]) for t in times]
        }
    if sc.name == "swap_exchange":
        gamma = sc.parameters["gamma"]
        n_sub = substeps_per_step(sc.model, ev)
        dt = ev.tau / n_sub
        return {
            "oracle_full": [swap_full_oracle(gamma, t, sc.initial) for t in times],
            "oracle_restricted": [
                swap_restricted_closed_form(gamma, dt, i * n_sub, sc.initial)
                for i in range(len(times))
            ],
        }
    return {}


def run(config, workers=1):
    """Execute every selected engine; return series, manifest and comparisons."""
    sc = config.scenario
    ev = config.evolution
    dims = sc.model.dims
    times = ev.times
    series, ensembles, engine_info = {}, {}, {}
    exit_code = EXIT_OK
    errors = []

    for engine in config.engines:
        t0 = time.perf_counter()
        info = {"trajectories": 0, "aborted": 0, "abort_fraction": 0.0}
        if engine == "full_deterministic":
            traj = integrate_master(sc.model, sc.initial.density(), ev)
            series.update(
                _deterministic_series([r for _, r in traj], config.observables, dims, engine, times)
            )
        elif engine == "oracles":
            dens = _oracle_densities(config)
            if not dens:
                info["note"] = "no closed-form oracle for this scenario"
            for name, rhos in dens.items():
                series.update(_deterministic_series(rhos, config.observables, dims, name, times))
        else:
            try:
                res = run_ensemble(engine, sc.model, sc.initial, ev, config.batches, workers)
            except AbortFractionError as exc:
                res = exc.result
                errors.append(str(exc))
                exit_code = EXIT_ABORTS
            ensembles[engine] = res
            info.update(
                trajectories=res.n_trajectories,
                aborted=len(res.aborted),
                abort_fraction=res.abort_fraction,
                substeps_per_step=res.substeps,
                jumps=res.n_jumps,
            )
            if res.accumulator.count and np.count_nonzero(res.accumulator.counts) >= 2:
                for k, label in enumerate(config.observables):
                    fn = observable_function(label, dims)
                    series[(engine, label)] = bootstrap_density_band(
                        res.accumulator,
                        fn,
                        resamples=config.bootstrap_resamples,
                        seed=(ev.seed + k) % 2**64,
                        times=times,
                        label=f"{engine}:{label}",
                    )
        info["wall_time_s"] = time.perf_counter() - t0
        engine_info[engine] = info

    report = build_report(series, config)
    manifest = {
        "artifact": "seplind",
        "version": __version__,
        "config": config.raw,
        "seed": ev.seed,
        "workers": workers,
        "kernel_backend": BACKEND,
        "basis_ordering": BASIS_ORDERING,
        "rng": "Philox4x64 keyed by (seed, trajectory index); counter = substep index; one uniform per substep",
        "time_units": "dimensionless; rates as given; default horizon t_max = 2",
        "bands": (
            "one standard deviation of the batch-pooled mean over bootstrap resamples of batches; "
            "comparisons floor each band at 1/N for an N-trajectory ensemble"
        ),
        "engines": engine_info,
        "errors": errors,
    }
    return RunResult(series, manifest, report, exit_code, ensembles)


def build_report(series, config):
    report = {"comparisons": []}
    pairs = [
        ("full_mcwf", "separable_mcwf"),
        ("full_mcwf", "oracle_full"),
        ("full_deterministic", "oracle_full"),
        ("separable_mcwf", "oracle_restricted"),
    ]
    for a, b in pairs:
        for label in config.observables:
            if (a, label) in series and (b, label) in series:
                entry = compare(series[(a, label)], series[(b, label)])
                entry["observable"] = label
                report["comparisons"].append(entry)
    for engine in ("full_mcwf", "full_deterministic", "oracle_full"):
        if (engine, "negativity") in series:
            report["dynamical_entanglement_detected"] = entanglement_detected(
                series[(engine, "negativity")]
            )
            report["entanglement_source"] = engine
            break
    return report


def write_outputs(result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for (engine, label), ts in sorted(result.series.items()):
        p = out / f"{engine}__{observable_slug(label)}.csv"
        p.write_text(ts.to_csv())
        written.append(p)
    (out / "manifest.json").write_text(json.dumps(result.manifest, indent=2, sort_keys=True) + "\n")
    (out / "comparison.json").write_text(json.dumps(result.report, indent=2) + "\n")
    return written
