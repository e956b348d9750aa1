"""
Monte-Carlo experiments: configuration, sweeps and CSV output.

A configuration is a flat YAML mapping. Every key is optional; missing keys
take the reference simulation values::

    M: 4                 # BS antennas
    wavelength: 1.0      # meters
    A_over_lambda: 4.0   # BS region side A / lambda; receiver regions are A/2 wide
    D_over_lambda: 0.5   # minimum BS antenna spacing / lambda
    tau: 0.5             # energy-harvesting efficiency
    pmax_db: 5.0         # P_max / sigma2_I in dB
    qbar_db: 0.0         # Q_bar / sigma2_E in dB
    sigma2_I: 1.0        # IR noise power, watts
    sigma2_E: 1.0        # ER noise power, watts
    q_tI: 3              # path counts (q_t must equal q_r per link)
    q_tE: 3
    q_rI: 3
    q_rE: 3
    nu: 1.0              # LoS / NLoS power ratio
    sweep_axis: none     # none | pmax_db | qbar_db | region_A_over_lambda | M
    sweep_values: []     # strictly increasing
    trials: 100
    base_seed: 0
    schemes: [PROPOSED, TFA, RFA, FPA]
    eps_outer: 1.0e-4
    max_outer: 50
    n_samples: 100       # Gaussian randomization draws
    out_dir: results

Trial ``i`` of every sweep point and scheme uses channel seed
``base_seed + i``, so all schemes and sweep points see the same channel
draws.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .ao import Scheme, run_ao
from .channel import Scenario, sample_scenario_paths
from .errors import ConfigurationError

__all__ = [
    "ExperimentConfig",
    "TrialResult",
    "SweepRow",
    "ExperimentResult",
    "SWEEP_AXES",
    "SWEEP_HEADER",
    "TRACE_HEADER",
    "load_config",
    "run_trial",
    "run_experiment",
    "aggregate",
    "emit_outputs",
    "write_sweep_csv",
    "write_trace_csv",
    "read_csv",
    "format_number",
]

log = logging.getLogger(__name__)

SWEEP_AXES = ("none", "pmax_db", "qbar_db", "region_A_over_lambda", "M")
SWEEP_HEADER = ["sweep_axis", "sweep_value", "scheme", "mean_rate", "std_rate", "mean_iters", "n_trials", "n_infeasible"]
TRACE_HEADER = ["iter", "rate", "harvested_power", "feasible"]


def db_to_linear(db, reference=1.0):
    return reference * 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    M: int = 4
    wavelength: float = 1.0
    A_over_lambda: float = 4.0
    D_over_lambda: float = 0.5
    tau: float = 0.5
    pmax_db: float = 5.0
    qbar_db: float = 0.0
    sigma2_I: float = 1.0
    sigma2_E: float = 1.0
    q_tI: int = 3
    q_tE: int = 3
    q_rI: int = 3
    q_rE: int = 3
    nu: float = 1.0
    sweep_axis: str = "none"
    sweep_values: tuple = ()
    trials: int = 100
    base_seed: int = 0
    schemes: tuple = ("PROPOSED", "TFA", "RFA", "FPA")
    eps_outer: float = 1e-4
    max_outer: int = 50
    n_samples: int = 100
    out_dir: str = "results"
    # (sweep value, Scenario) pairs in linear units, filled at construction
    points: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("sweep_values", tuple(float(v) for v in self.sweep_values))
        set_("schemes", tuple(_scheme_name(s) for s in self.schemes))
        if not self.schemes:
            _bad("schemes", "at least one scheme is required")
        if self.trials < 1:
            _bad("trials", f"must be >= 1, got {self.trials}")
        if self.sweep_axis not in SWEEP_AXES:
            _bad("sweep_axis", f"must be one of {', '.join(SWEEP_AXES)}, got {self.sweep_axis!r}")
        if self.sweep_axis == "none" and self.sweep_values:
            _bad("sweep_values", "must be empty when sweep_axis is none")
        if self.sweep_axis != "none" and not self.sweep_values:
            _bad("sweep_values", f"required for sweep_axis {self.sweep_axis}")
        if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            _bad("sweep_values", "must be strictly increasing")
        if self.max_outer < 0:
            _bad("max_outer", "must be >= 0")
        if self.n_samples < 1:
            _bad("n_samples", "must be >= 1")
        if self.eps_outer < 0:
            _bad("eps_outer", "must be >= 0")
        values = self.sweep_values if self.sweep_axis != "none" else (math.nan,)
        set_("points", tuple((v, self.scenario(v)) for v in values))

    def scenario(self, value=math.nan):
        """Scenario (linear units) at one sweep value."""
        params = {
            "M": self.M,
            "pmax_db": self.pmax_db,
            "qbar_db": self.qbar_db,
            "region_A_over_lambda": self.A_over_lambda,
        }
        if self.sweep_axis != "none":
            if self.sweep_axis == "M" and value != int(value):
                _bad("sweep_values", f"M sweep values must be integers, got {value}")
            params[self.sweep_axis] = value
        lam = self.wavelength
        A = params["region_A_over_lambda"] * lam
        try:
            return Scenario(
                M=int(params["M"]),
                wavelength=lam,
                tx_half=A / 2.0,
                rx_half_I=A / 4.0,
                rx_half_E=A / 4.0,
                min_distance=self.D_over_lambda * lam,
                tau=self.tau,
                p_max=db_to_linear(params["pmax_db"], self.sigma2_I),
                q_bar=db_to_linear(params["qbar_db"], self.sigma2_E),
                sigma2_I=self.sigma2_I,
                sigma2_E=self.sigma2_E,
                q_tI=self.q_tI,
                q_tE=self.q_tE,
                q_rI=self.q_rI,
                q_rE=self.q_rE,
                nu=self.nu,
            )
        except ConfigurationError as exc:
            where = f" at {self.sweep_axis}={value:g}" if self.sweep_axis != "none" else ""
            raise ConfigurationError(f"invalid scenario{where}: {exc}") from None

    def to_dict(self):
        out = {}
        for f in dataclasses.fields(self):
            if not f.init:
                continue
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def _bad(name, message):
    raise ConfigurationError(f"config field '{name}': {message}")


def _scheme_name(s):
    name = str(s).upper()
    if name not in Scheme.__members__:
        _bad("schemes", f"unknown scheme {s!r}")
    return name


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig) if f.init}
_INT_FIELDS = {"M", "q_tI", "q_tE", "q_rI", "q_rE", "trials", "base_seed", "max_outer", "n_samples"}
_LIST_FIELDS = {"sweep_values", "schemes"}
_STR_FIELDS = {"sweep_axis", "out_dir"}


def _coerce(key, value, line):
    where = f"config line {line}, key '{key}'"
    if key in _LIST_FIELDS:
        if isinstance(value, (str, int, float)) and key == "schemes":
            value = [value]
        if not isinstance(value, list):
            raise ConfigurationError(f"{where}: expected a list")
        if key == "sweep_values":
            for v in value:
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigurationError(f"{where}: sweep values must be numbers, got {v!r}")
        return tuple(value)
    if key in _STR_FIELDS:
        if value is None:
            return "none" if key == "sweep_axis" else value
        return str(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}")
    if key in _INT_FIELDS:
        if value != int(value):
            raise ConfigurationError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def load_config(source=None, **overrides):
    """Parse an experiment configuration.

    Args:
        source: a path (``os.PathLike``) to a YAML file, a string holding the
            YAML text itself, or None for all defaults.
        **overrides: field values applied after the document (e.g. from
            command-line flags).

    Raises:
        ConfigurationError: on YAML syntax errors, unknown keys, wrong
            types or invalid values; the message names the line or field.
    """
    if source is None:
        text = ""
    elif isinstance(source, os.PathLike):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {source}: {exc}") from None
    else:
        text = source
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigurationError(f"config parse error{loc}: {getattr(exc, 'problem', exc)}") from None

    values = {}
    if node is not None:
        if not isinstance(node, yaml.MappingNode):
            raise ConfigurationError(f"config line {node.start_mark.line + 1}: top level must be a key/value mapping")
        loader = yaml.SafeLoader("")
        for key_node, value_node in node.value:
            key = key_node.value
            line = key_node.start_mark.line + 1
            if key not in _FIELDS:
                raise ConfigurationError(f"config line {line}: unknown key '{key}'")
            if key in values:
                raise ConfigurationError(f"config line {line}: duplicate key '{key}'")
            values[key] = _coerce(key, loader.construct_object(value_node, deep=True), line)
        loader.dispose()
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ConfigurationError(f"unknown override '{key}'")
        values[key] = _coerce(key, list(value) if isinstance(value, tuple) else value, "<override>")
    return ExperimentConfig(**values)


@dataclass(frozen=True)
class TrialResult:
    sweep_value: float
    scheme: str
    seed: int
    final_rate: float
    iterations: int
    converged: bool
    infeasible: bool
    error: str = ""


@dataclass(frozen=True)
class SweepRow:
    sweep_axis: str
    sweep_value: float
    scheme: str
    mean_rate: float
    std_rate: float
    mean_iters: float
    n_trials: int
    n_infeasible: int

    def as_list(self):
        return [getattr(self, name) for name in SWEEP_HEADER]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    trials: list

    def rates(self, scheme, sweep_value=math.nan):
        """Per-seed final rates (NaN for infeasible trials), ordered by seed."""
        sel = [t for t in self.trials if t.scheme == scheme and _vkey(t.sweep_value) == _vkey(sweep_value)]
        return np.array([math.nan if t.infeasible else t.final_rate for t in sorted(sel, key=lambda t: t.seed)])


def run_trial(config, point_index, scheme, trial):
    """One channel draw, one scheme, one sweep point."""
    value, scenario = config.points[point_index]
    seed = config.base_seed + trial
    paths_I, paths_E = sample_scenario_paths(scenario, seed)
    try:
        tr = run_ao(
            scenario, paths_I, paths_E, scheme, seed,
            eps_outer=config.eps_outer, max_outer=config.max_outer, n_samples=config.n_samples,
        )
    except Exception as exc:  # recorded, not fatal
        log.warning("trial seed=%d scheme=%s failed: %s", seed, scheme, exc)
        return TrialResult(value, scheme, seed, math.nan, 0, False, True, repr(exc))
    return TrialResult(value, scheme, seed, tr.final_rate, tr.iterations, tr.converged, tr.infeasible, tr.diagnostic)


def _vkey(value):
    return None if math.isnan(value) else float(value)


def _run_task(args):
    return run_trial(*args)


def aggregate(config, trials):
    """Collapse trial results into one row per (sweep value, scheme).

    Means and standard deviations (sample, ddof=1; 0 for a single trial)
    exclude infeasible and failed trials, whose count is reported.
    """
    order = {s: i for i, s in enumerate(config.schemes)}
    groups = {}
    for t in trials:
        groups.setdefault((_vkey(t.sweep_value), t.scheme), []).append(t)
    rows = []
    for value, _ in config.points:
        for scheme in config.schemes:
            group = groups.get((_vkey(value), scheme), [])
            ok = [t for t in group if not t.infeasible]
            rates = np.array([t.final_rate for t in ok])
            iters = np.array([t.iterations for t in ok], dtype=float)
            rows.append(SweepRow(
                config.sweep_axis,
                value,
                scheme,
                float(np.mean(rates)) if ok else math.nan,
                float(np.std(rates, ddof=1)) if len(ok) > 1 else (0.0 if ok else math.nan),
                float(np.mean(iters)) if ok else math.nan,
                len(group),
                len(group) - len(ok),
            ))
    rows.sort(key=lambda r: (config.sweep_values.index(r.sweep_value) if config.sweep_values else 0, order[r.scheme]))
    return rows


def run_experiment(config, jobs=1):
    """Run every (sweep value, scheme, trial) combination and aggregate.

    Results do not depend on ``jobs``: trials are keyed and sorted by
    (sweep value, scheme, seed) before aggregation.
    """
    tasks = [
        (config, p, scheme, trial)
        for p in range(len(config.points))
        for scheme in config.schemes
        for trial in range(config.trials)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        trials = [_run_task(t) for t in tasks]
    order = {s: i for i, s in enumerate(config.schemes)}
    pos = {_vkey(v): i for i, (v, _) in enumerate(config.points)}
    trials.sort(key=lambda t: (pos[_vkey(t.sweep_value)], order[t.scheme], t.seed))
    return ExperimentResult(config, aggregate(config, trials), trials)


def format_number(x):
    """Plain decimal with 9 significant digits; integers and booleans as integers."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return np.format_float_positional(x, precision=9, unique=False, fractional=False, trim="-")


def _write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    return path


def write_sweep_csv(rows, path):
    return _write_rows(path, SWEEP_HEADER, [r.as_list() for r in rows])


def write_trace_csv(trace, path):
    rows = [[rec.iteration, rec.rate, rec.harvested_power, rec.feasible] for rec in trace.records]
    return _write_rows(path, TRACE_HEADER, rows)


def read_csv(path):
    """Read an emitted CSV back as (header, rows of strings)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def emit_outputs(rows=None, traces=(), out_dir=".", config=None):
    """Write ``sweep.csv`` (when ``rows`` is given), one
    ``trace_<scheme>_<seed>.csv`` per trace, and ``config.resolved.yaml``
    (when ``config`` is given). Returns the written paths.
    """
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if config is not None:
            path = out / "config.resolved.yaml"
            path.write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))
            written.append(path)
        if rows is not None:
            written.append(write_sweep_csv(rows, out / "sweep.csv"))
        for tr in traces:
            written.append(write_trace_csv(tr, out / f"trace_{Scheme(tr.scheme).value}_{tr.seed}.csv"))
    except OSError as exc:
        raise OSError(f"cannot write outputs to {out}: {exc}") from exc
    return written
