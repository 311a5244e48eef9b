"""Experiment configurations, the generic dataset commands and figure presets.

Commands return :class:`Dataset` objects; :func:`write_dataset` serializes one
as a CSV file plus a JSON sidecar.  Sweep points are evaluated concurrently but
rows always come back in grid order.
"""

from __future__ import annotations

import configparser
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .estimator import select_backend
from .exceptions import CTQWError
from .lattice import DEFAULT_BUFFER, DefectLineParams, basis_state, make_params, window_for
from .observables import defect_site_decomposition, probability_distribution, std_dev
from .propagator import QuadratureSpec, evolve_oracle, evolve_spectral
from .spectral import bound_states
from .validation import oracle_out_of_band

SWEEP_VARIABLES = ("alpha", "beta", "jd", "t")
BACKEND_CHOICES = ("spectral", "oracle", "both")


class ConfigError(CTQWError, ValueError):
    """Malformed or inconsistent experiment configuration."""


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: tuple

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if not self.values:
            raise ConfigError("sweep grid is empty")


def parse_sweep(text: str) -> Sweep:
    """Parse ``var:start:stop:step`` (stop inclusive)."""
    try:
        var, start, stop, step = text.split(":")
        start, stop, step = float(start), float(stop), float(step)
    except ValueError as exc:
        raise ConfigError(f"sweep must look like var:start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError("sweep needs step > 0 and stop >= start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = np.round(start + step * np.arange(n), 10)
    values = [v + 0.0 for v in values]  # drop negative zeros
    if var == "jd":
        values = [int(round(v)) for v in values]
    return Sweep(var, tuple(values))


@dataclass
class ExperimentConfig:
    params: DefectLineParams
    j0: int = 0
    times: tuple = (30.0,)
    sweep: Sweep | None = None
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    window_buffer: int = DEFAULT_BUFFER
    backend: str = "spectral"
    jobs: int = 1

    def __post_init__(self):
        self.times = tuple(float(t) for t in self.times)
        if not self.times and not (self.sweep and self.sweep.variable == "t"):
            raise ConfigError("at least one time is required")
        if any(t < 0 for t in self.times):
            raise ConfigError("times must be non-negative")
        if self.backend not in BACKEND_CHOICES:
            raise ConfigError(f"backend must be one of {BACKEND_CHOICES}")

    def points(self) -> list[tuple[Any, DefectLineParams]]:
        """(sweep value, params) pairs; a single unlabeled point without a sweep."""
        if self.sweep is None or self.sweep.variable == "t":
            return [(None, self.params)]
        key = {"alpha": "alpha", "beta": "beta", "jd": "j_defect"}[self.sweep.variable]
        return [(v, self.params.replace(**{key: v})) for v in self.sweep.values]

    def time_grid(self) -> tuple:
        if self.sweep is not None and self.sweep.variable == "t":
            return tuple(float(v) for v in self.sweep.values)
        return self.times

    def describe(self) -> dict:
        return {
            "params": {
                "epsilon": self.params.epsilon,
                "gamma": self.params.gamma,
                "alpha": self.params.alpha,
                "beta": self.params.beta,
                "jd": self.params.j_defect,
            },
            "j0": self.j0,
            "times": list(self.times),
            "sweep": None if self.sweep is None else {
                "variable": self.sweep.variable, "values": list(self.sweep.values)},
            "quadrature": {"rule": self.quadrature.rule, "n_nodes": self.quadrature.n_nodes},
            "window_buffer": self.window_buffer,
            "backend": self.backend,
        }


# --- config file ------------------------------------------------------------------

CONFIG_KEYS = ("epsilon", "gamma", "alpha", "beta", "jd", "j0", "t", "sweep",
               "nodes", "buffer", "backend", "jobs")


def read_config_file(path: str | Path) -> dict:
    """Read flat ``key = value`` lines; ``#`` starts a comment, ``t`` is a
    comma-separated list."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text()
        parser.read_string("[experiment]\n" + text)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    raw = dict(parser["experiment"])
    unknown = set(raw) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out: dict[str, Any] = {}
    try:
        for key, value in raw.items():
            if key in ("epsilon", "gamma", "alpha", "beta"):
                out[key] = float(value)
            elif key in ("jd", "j0", "nodes", "buffer", "jobs"):
                out[key] = int(value)
            elif key == "t":
                out[key] = [float(v) for v in value.split(",") if v.strip()]
            else:
                out[key] = value.strip()
    except ValueError as exc:
        raise ConfigError(f"bad value in {path}: {exc}") from exc
    return out


def build_config(values: dict) -> ExperimentConfig:
    """Assemble a config from merged file/flag values, filling defaults."""
    try:
        params = make_params(values.get("epsilon", 2.0), values.get("gamma", 1.0),
                             values.get("alpha", 0.0), values.get("beta", 0.0),
                             values.get("jd", 0))
    except CTQWError as exc:
        raise ConfigError(str(exc)) from exc
    sweep = values.get("sweep")
    if isinstance(sweep, str):
        sweep = parse_sweep(sweep)
    try:
        quad = QuadratureSpec(values.get("nodes", 2048))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    buffer = values.get("buffer", DEFAULT_BUFFER)
    if buffer < 0:
        raise ConfigError("buffer must be non-negative")
    return ExperimentConfig(
        params=params,
        j0=values.get("j0", 0),
        times=tuple(values.get("t") or (30.0,)),
        sweep=sweep,
        quadrature=quad,
        window_buffer=buffer,
        backend=values.get("backend", "spectral"),
        jobs=max(1, values.get("jobs", 1)),
    )


# --- datasets ---------------------------------------------------------------------

@dataclass
class Dataset:
    name: str
    header: list[str]
    rows: list[list]
    metadata: dict


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.11e}"


def to_csv(ds: Dataset) -> str:
    lines = [",".join(ds.header)]
    lines += [",".join(format_cell(v) for v in row) for row in ds.rows]
    return "\n".join(lines) + "\n"


def write_dataset(ds: Dataset, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{ds.name}.csv"
    json_path = out / f"{ds.name}.json"
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(to_csv(ds))
    meta = dict(ds.metadata, dataset=ds.name, columns=ds.header, code_version=__version__)
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return csv_path, json_path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _label(value) -> str:
    return f"{value:g}" if isinstance(value, float) else str(value)


def _map(config: ExperimentConfig, func, items):
    if config.jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(func, items))


# --- single evaluations -------------------------------------------------------------

def evaluate(params: DefectLineParams, j0: int, t: float, config: ExperimentConfig) -> dict:
    """Probability distribution at time ``t`` plus run metadata."""
    start = time.perf_counter()
    backend = select_backend(params, config.backend)
    window = window_for(params, j0, t, config.window_buffer)
    psi0 = basis_state(j0, window)
    result: dict[str, Any] = {"backend": backend,
                              "window": {"center": window.center, "radius": window.radius}}
    try:
        bounds = bound_states(params)
    except CTQWError:
        bounds = []
    result["bound_states"] = [b.lambda_b for b in bounds]
    if backend in ("spectral", "both"):
        state, rep = evolve_spectral(psi0, t, params, config.quadrature, window, bounds)
        result["p"] = probability_distribution(state)
        result["norm_deviation"] = rep.norm_deviation
        result["bound_weight"] = rep.bound_weight
    if backend != "spectral":
        orac = probability_distribution(evolve_oracle(psi0, t, params, window))
        if backend == "both":
            result["p_oracle"] = orac
            result["max_backend_diff"] = float(np.max(np.abs(orac.p - result["p"].p)))
        else:
            result["p"] = orac
            result["norm_deviation"] = abs(orac.total() - 1.0)
    result["runtime"] = time.perf_counter() - start
    return result


def defect_probability(params: DefectLineParams, j0: int, t: float,
                       config: ExperimentConfig) -> tuple[float, str]:
    """P at the defect node; the spectral route only needs the single-node
    decomposition."""
    backend = select_backend(params, config.backend)
    if backend == "spectral":
        dec = defect_site_decomposition(params, j0, params.j_defect, t, config.quadrature)
        return dec.total_probability, backend
    res = evaluate(params, j0, t, ExperimentConfig(
        params, j0, (t,), None, config.quadrature, config.window_buffer, "oracle"))
    return res["p"].at(params.j_defect), backend


# --- commands -------------------------------------------------------------------

def cmd_bound_energy(config: ExperimentConfig) -> Dataset:
    if config.sweep is None or config.sweep.variable not in ("alpha", "beta"):
        raise ConfigError("bound-energy needs a sweep over alpha or beta")

    def one(point):
        value, params = point
        try:
            lams = [b.lambda_b for b in bound_states(params)]
            method = "spectral"
        except CTQWError:
            lams = [float(x) for x in oracle_out_of_band(params)]
            method = "oracle (forced)"
        return value, lams, method

    results = _map(config, one, config.points())
    rows = []
    for value, lams, _ in results:
        padded = (lams + [None, None])[:2]
        rows.append([value, len(lams)] + padded)
    meta = dict(config.describe(), command="bound-energy",
                methods=[m for _, _, m in results])
    return Dataset("bound_energy", [config.sweep.variable, "count", "lambda_1", "lambda_2"],
                   rows, meta)


def cmd_evolve(config: ExperimentConfig) -> list[Dataset]:
    jobs = [(value, params, t) for value, params in config.points() for t in config.time_grid()]

    def one(job):
        value, params, t = job
        return evaluate(params, config.j0, t, config)

    results = _map(config, one, jobs)
    out = []
    for (value, params, t), res in zip(jobs, results):
        nodes = res["p"].nodes
        if "p_oracle" in res:
            header = ["j", "P_spectral", "P_oracle"]
            rows = [[int(j), a, b] for j, a, b in zip(nodes, res["p"].p, res["p_oracle"].p)]
        else:
            header = ["j", "P_j"]
            rows = [[int(j), a] for j, a in zip(nodes, res["p"].p)]
        name = "evolve"
        if value is not None:
            name += f"_{config.sweep.variable}_{_label(value)}"
        name += f"_t_{t:g}"
        meta = dict(config.describe(), command="evolve", t=t,
                    point_params={"alpha": params.alpha, "beta": params.beta,
                                  "jd": params.j_defect},
                    **{k: v for k, v in res.items() if k not in ("p", "p_oracle")})
        out.append(Dataset(name, header, rows, meta))
    return out


def cmd_defect_prob(config: ExperimentConfig) -> Dataset:
    if config.sweep is None or config.sweep.variable not in ("alpha", "beta"):
        raise ConfigError("defect-prob needs a sweep over alpha or beta")
    if len(config.times) != 1:
        raise ConfigError("defect-prob needs exactly one time")
    t = config.times[0]

    def one(point):
        _, params = point
        return defect_probability(params, config.j0, t, config)

    results = _map(config, one, config.points())
    rows = [[value, p] for (value, _), (p, _) in zip(config.points(), results)]
    meta = dict(config.describe(), command="defect-prob", t=t,
                backends=[b for _, b in results])
    return Dataset("defect_prob", [config.sweep.variable, "P_jd"], rows, meta)


def cmd_sigma(config: ExperimentConfig) -> Dataset:
    times = config.time_grid()
    series = [("free", config.params.replace(alpha=0.0, beta=0.0))]
    for value, params in config.points():
        label = "defect" if value is None else f"{config.sweep.variable}={_label(value)}"
        series.append((label, params))
    jobs = [(params, t) for _, params in series for t in times]

    def one(job):
        params, t = job
        res = evaluate(params, config.j0, t, config)
        return std_dev(res["p"]), res["backend"]

    results = _map(config, one, jobs)
    n = len(times)
    columns = [[s for s, _ in results[i * n:(i + 1) * n]] for i in range(len(series))]
    rows = [[t] + [col[k] for col in columns] for k, t in enumerate(times)]
    meta = dict(config.describe(), command="sigma",
                series=[label for label, _ in series],
                backends=sorted({b for _, b in results}))
    return Dataset("sigma", ["t"] + [label for label, _ in series], rows, meta)


# --- figure presets ---------------------------------------------------------------

FIGURE_PRESETS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")


def _preset(base: ExperimentConfig, **kw) -> ExperimentConfig:
    params = make_params(2.0, 1.0, kw.pop("alpha", 0.0), kw.pop("beta", 0.0), kw.pop("jd", 0))
    values = dict(params=params, j0=0, times=(30.0,), sweep=None,
                  quadrature=base.quadrature, window_buffer=base.window_buffer,
                  backend=base.backend, jobs=base.jobs)
    values.update(kw)
    return ExperimentConfig(**values)


def _rename(ds: Dataset, name: str, figure: str) -> Dataset:
    ds.name = name
    ds.metadata["figure"] = figure
    return ds


def run_figure(name: str, base: ExperimentConfig | None = None) -> list[Dataset]:
    """Datasets behind one figure (eps=2, gamma=1, j0=0)."""
    base = base or ExperimentConfig(make_params(2.0, 1.0, 0.0, 0.0, 0))
    sigma_times = tuple(float(t) for t in range(0, 31))
    out: list[Dataset] = []
    if name == "fig1":
        cfg = _preset(base, sweep=parse_sweep("alpha:-6:6:0.1"))
        out.append(_rename(cmd_bound_energy(cfg), "fig1_bound_energy", name))
    elif name == "fig2":
        free = cmd_evolve(_preset(base))[0]
        out.append(_rename(free, "fig2_free_t_30", name))
        for ds in cmd_evolve(_preset(base, alpha=3.0, sweep=Sweep("jd", (0, 1, 2, 5)))):
            out.append(_rename(ds, "fig2_" + ds.name, name))
        for jd in (0, 1, 2, 5):
            cfg = _preset(base, jd=jd, sweep=parse_sweep("alpha:-6:6:0.1"))
            out.append(_rename(cmd_defect_prob(cfg), f"fig2_defect_prob_jd_{jd}", name))
    elif name == "fig3":
        cfg = _preset(base, alpha=3.0, times=sigma_times, sweep=Sweep("jd", (0, 1, 2, 5)))
        out.append(_rename(cmd_sigma(cfg), "fig3_sigma", name))
    elif name == "fig4":
        cfg = _preset(base, sweep=parse_sweep("beta:-4:4:0.1"))
        out.append(_rename(cmd_bound_energy(cfg), "fig4_bound_energy", name))
    elif name == "fig5":
        cfg = _preset(base, sweep=Sweep("beta", (-0.9, -0.5, 0.5, 2.0)))
        out += [_rename(ds, "fig5_" + ds.name, name) for ds in cmd_evolve(cfg)]
    elif name == "fig6":
        cfg = _preset(base, sweep=parse_sweep("beta:-4:4:0.1"))
        out.append(_rename(cmd_defect_prob(cfg), "fig6_defect_prob", name))
    elif name == "fig7":
        cfg = _preset(base, times=sigma_times, sweep=Sweep("beta", (-0.9, -0.5, 0.5, 2.0)))
        out.append(_rename(cmd_sigma(cfg), "fig7_sigma", name))
    elif name == "fig8":
        for beta in (-0.5, 0.5):
            cfg = _preset(base, beta=beta, sweep=Sweep("jd", (1, 2, 5)))
            out += [_rename(ds, f"fig8_beta_{beta:g}_" + ds.name, name)
                    for ds in cmd_evolve(cfg)]
    else:
        raise ConfigError(f"unknown figure preset {name!r}")
    return out
