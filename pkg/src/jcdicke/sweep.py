"""Parameter sweeps: configuration, grid evaluation, CSV and plot-script output.

Config files are flat ``key = value`` text with ``#`` comments::

    # phase diagram at fixed omega_b, energies in units of omega_b
    mode = sweep2d
    omega_b = 1
    axis = Omega:-2:2:201
    axis = w:0.1:3:201
    out = phase_a.csv

``axis`` may be repeated; ``name:from:to:steps`` with an optional ``:log``
suffix. A fixed parameter may be given a comma-separated list, which expands
into one run (and one CSV, suffixed ``_<name>=<value>``) per value.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, JCDickeError
from .meanfield import MeanFieldProblem, solve_ground_state
from .params import ModelParams, compute_w
from .phases import classify

MODES = ("point", "sweep1d", "sweep2d", "ed", "validate")
PARAM_NAMES = ("omega_a", "omega_b", "eta", "lambda", "Omega", "w", "N")
AXIS_NAMES = ("omega_a", "omega_b", "eta", "lambda", "Omega", "w")
W_AGREEMENT_TOL = 1e-10

_ALIASES = {
    "omega-a": "omega_a", "omega_a": "omega_a",
    "omega-b": "omega_b", "omega_b": "omega_b",
    "eta": "eta",
    "lambda": "lambda", "lam": "lambda",
    "omega-mw-coupling": "Omega", "omega_mw_coupling": "Omega", "Omega": "Omega",
    "w": "w",
    "n-atoms": "N", "n_atoms": "N", "N": "N",
    "axis": "axis", "out": "out", "mode": "mode",
    "plot-script": "plot_script", "plot_script": "plot_script",
    "jobs": "jobs",
}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    steps: int
    linear: bool = True

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if self.steps < 2:
            raise ConfigError(f"axis {self.name}: steps must be at least 2")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError(f"axis {self.name}: endpoints must be finite")
        if self.start == self.stop:
            raise ConfigError(f"axis {self.name}: degenerate range {self.start}..{self.stop}")
        if not self.linear and (self.start <= 0 or self.stop <= 0):
            raise ConfigError(f"axis {self.name}: log spacing needs positive endpoints")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        parts = text.strip().split(":")
        if len(parts) not in (4, 5):
            raise ConfigError(f"axis must be name:from:to:steps[:log], got {text!r}")
        name = _ALIASES.get(parts[0].strip(), parts[0].strip())
        try:
            start, stop, steps = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"bad axis {text!r}: {exc}") from None
        linear = True
        if len(parts) == 5:
            spacing = parts[4].strip().lower()
            if spacing not in ("lin", "linear", "log"):
                raise ConfigError(f"axis spacing must be 'linear' or 'log', got {spacing!r}")
            linear = spacing != "log"
        return cls(name, start, stop, steps, linear)

    def values(self) -> np.ndarray:
        if self.linear:
            return np.linspace(self.start, self.stop, self.steps)
        return np.geomspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepSpec:
    mode: str = "point"
    fixed: dict = field(default_factory=dict)
    axes: tuple = ()
    out: str | None = None
    emit_plot_script: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"repeated axis names {names}")
        overlap = set(names) & set(self.fixed)
        if overlap:
            raise ConfigError(f"parameters {sorted(overlap)} are both fixed and swept")
        expected = {"sweep1d": 1, "sweep2d": 2}.get(self.mode)
        if expected is not None and len(self.axes) != expected:
            raise ConfigError(f"{self.mode} needs exactly {expected} axis, got {len(self.axes)}")
        if self.mode in ("point", "ed") and self.axes:
            raise ConfigError(f"{self.mode} takes no axes")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        for key in self.fixed:
            if key not in PARAM_NAMES:
                raise ConfigError(f"unknown parameter {key!r}")

    def grid(self) -> list[dict]:
        """Parameter dicts in row-major order over the axes."""
        if not self.axes:
            return [dict(self.fixed)]
        mesh = np.meshgrid(*(a.values() for a in self.axes), indexing="ij")
        flat = [m.ravel() for m in mesh]
        points = []
        for i in range(flat[0].size):
            point = dict(self.fixed)
            for axis, column in zip(self.axes, flat):
                point[axis.name] = float(column[i])
            points.append(point)
        return points


def _parse_scalar(key: str, value: str):
    value = value.strip()
    if key == "N":
        try:
            n = int(value)
        except ValueError:
            raise ConfigError(f"N must be an integer, got {value!r}") from None
        return n
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {value!r}") from None


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into a raw settings dict.

    ``axis`` accumulates into a list; fixed parameters may hold a list of
    values when written comma-separated.
    """
    settings: dict = {"axis": []}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        name = _ALIASES.get(key)
        if name is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if name == "axis":
            settings["axis"].append(Axis.parse(value))
        elif name in PARAM_NAMES:
            items = [v for v in value.split(",") if v.strip()]
            if not items:
                raise ConfigError(f"line {lineno}: empty value for {key}")
            vals = [_parse_scalar(name, v) for v in items]
            settings[name] = vals if len(vals) > 1 else vals[0]
        elif name == "plot_script":
            settings[name] = value.lower() in ("1", "true", "yes", "on")
        elif name == "jobs":
            settings[name] = int(_parse_scalar("N", value))
        else:
            settings[name] = value
    return settings


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def expand_series(settings: dict) -> list[tuple[str, dict]]:
    """Split list-valued fixed parameters into separate runs.

    Returns ``(suffix, settings)`` pairs; the suffix is empty when nothing
    was expanded.
    """
    runs = [("", dict(settings))]
    for key in PARAM_NAMES:
        value = settings.get(key)
        if not isinstance(value, list):
            continue
        expanded = []
        for suffix, s in runs:
            for v in value:
                s2 = dict(s)
                s2[key] = v
                expanded.append((f"{suffix}_{key}={v:g}", s2))
        runs = expanded
    return runs


def spec_from_settings(settings: dict) -> SweepSpec:
    fixed = {k: settings[k] for k in PARAM_NAMES if settings.get(k) is not None}
    for k, v in fixed.items():
        if isinstance(v, list):
            raise ConfigError(f"{k} has several values; expand the series first")
    return SweepSpec(
        mode=settings.get("mode", "point"),
        fixed=fixed,
        axes=tuple(settings.get("axis", ())),
        out=settings.get("out"),
        emit_plot_script=bool(settings.get("plot_script", False)),
        jobs=int(settings.get("jobs", 1)),
    )


def resolve_point(point: dict) -> tuple[MeanFieldProblem, ModelParams | None]:
    """Build the mean-field problem (and full model if available) for a point.

    ``w`` may stand in for ``(eta, lambda, omega_a)``. When both are present
    they must agree to ``W_AGREEMENT_TOL``.
    """
    if "omega_b" not in point or "Omega" not in point:
        raise ConfigError("omega_b and Omega (--omega-mw-coupling) are required")
    model = None
    full = all(k in point for k in ("omega_a", "eta", "lambda"))
    if full:
        model = ModelParams(
            omega_a=point["omega_a"], omega_b=point["omega_b"], eta=point["eta"],
            lam=point["lambda"], Omega=point["Omega"], N=int(point.get("N", 1)),
        )
        w = compute_w(model).w
        if "w" in point and abs(point["w"] - w) > W_AGREEMENT_TOL * max(1.0, abs(w)):
            raise ConfigError(
                f"w={point['w']!r} disagrees with eta + lambda^2/omega_a = {w!r}"
            )
    elif "w" in point:
        w = point["w"]
    else:
        missing = [k for k in ("omega_a", "eta", "lambda") if k not in point]
        raise ConfigError(f"need w, or all of omega_a, eta, lambda (missing {missing})")
    return MeanFieldProblem(point["omega_b"], point["Omega"], w), model


RECORD_FIELDS = ("beta", "beta_squared", "magnetization", "energy", "alpha",
                 "residual", "degenerate", "label", "error")


@dataclass(frozen=True)
class SweepRecord:
    coordinates: tuple
    beta: float
    beta_squared: float
    magnetization: float
    energy: float
    alpha: float
    residual: float
    degenerate: bool
    label: str
    error: str = ""

    def as_dict(self, names) -> dict:
        out = dict(zip(names, self.coordinates))
        for name in RECORD_FIELDS:
            out[name] = getattr(self, name)
        return out


def evaluate_point(point: dict, coord_names=()) -> SweepRecord:
    coords = tuple(point.get(n, math.nan) for n in coord_names)
    problem, model = resolve_point(point)
    sol = solve_ground_state(problem)
    alpha = sol.alpha
    if model is not None:
        alpha = model.lam / model.omega_a * sol.beta * math.sqrt(1.0 - sol.beta ** 2)
    return SweepRecord(
        coordinates=coords,
        beta=sol.beta,
        beta_squared=sol.beta_squared,
        magnetization=sol.magnetization,
        energy=sol.energy,
        alpha=alpha,
        residual=sol.residual,
        degenerate=sol.degenerate,
        label=str(classify(problem, sol)),
    )


def run_point(spec: SweepSpec) -> SweepRecord:
    """Evaluate the single point of a ``point`` spec; errors propagate."""
    if spec.mode != "point":
        raise ConfigError(f"run_point needs mode 'point', got {spec.mode!r}")
    return evaluate_point(spec.grid()[0])


def _failed(coords, exc: Exception) -> SweepRecord:
    nan = math.nan
    msg = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
    return SweepRecord(coords, nan, nan, nan, nan, nan, nan, False, "", msg)


def _evaluate_chunk(args) -> list[SweepRecord]:
    points, names = args
    out = []
    for point in points:
        try:
            out.append(evaluate_point(point, names))
        except (JCDickeError, ArithmeticError, ValueError) as exc:
            out.append(_failed(tuple(point.get(n, math.nan) for n in names), exc))
    return out


def run_grid(spec: SweepSpec) -> list[SweepRecord]:
    """Evaluate every grid point; order is row-major regardless of ``jobs``."""
    names = tuple(a.name for a in spec.axes)
    points = spec.grid()
    if spec.jobs == 1 or len(points) < 2:
        return _evaluate_chunk((points, names))
    size = max(1, math.ceil(len(points) / (spec.jobs * 8)))
    chunks = [(points[i:i + size], names) for i in range(0, len(points), size)]
    with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
        results = pool.map(_evaluate_chunk, chunks)
        return [rec for chunk in results for rec in chunk]


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def csv_text(records: list[SweepRecord], names) -> str:
    header = list(names) + list(RECORD_FIELDS)
    lines = [",".join(header)]
    for rec in records:
        row = list(rec.coordinates) + [getattr(rec, f) for f in RECORD_FIELDS]
        lines.append(",".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, records: list[SweepRecord], names) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(csv_text(records, names))


def plot_script_text(csv_name: str, spec: SweepSpec) -> str:
    """gnuplot script that reads only ``csv_name`` (relative path)."""
    names = [a.name for a in spec.axes]
    cols = {name: i + 1 for i, name in enumerate(names + list(RECORD_FIELDS))}
    fixed = ", ".join(f"{k}={v:g}" for k, v in sorted(spec.fixed.items()))
    stem = Path(csv_name).stem
    lines = [
        "# gnuplot script generated by jcdicke",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"data = '{csv_name}'",
        f"set title '{fixed}' noenhanced",
        "set terminal pngcairo size 900,600",
    ]
    if len(names) == 1:
        x = cols[names[0]]
        lines.append(f"set xlabel '{names[0]}' noenhanced")
        for quantity in ("beta", "beta_squared", "energy"):
            lines += [
                f"set output '{stem}_{quantity}.png'",
                f"set ylabel '{quantity}' noenhanced",
                f"plot data using {x}:{cols[quantity]} with lines lw 2",
            ]
    else:
        x, y = cols[names[0]], cols[names[1]]
        lines += [
            f"set xlabel '{names[0]}' noenhanced",
            f"set ylabel '{names[1]}' noenhanced",
            "set pm3d map",
        ]
        for quantity in ("beta", "magnetization", "energy"):
            lines += [
                f"set output '{stem}_{quantity}.png'",
                f"set cblabel '{quantity}' noenhanced",
                f"splot data using {x}:{y}:{cols[quantity]} with pm3d notitle",
            ]
    lines.append("unset output")
    return "\n".join(lines) + "\n"


@dataclass
class SweepOutcome:
    csv_path: Path
    plot_path: Path | None
    records: list
    failures: int


def run_sweep(spec: SweepSpec) -> SweepOutcome:
    """Evaluate the grid and write the CSV (plus plot script if requested)."""
    if spec.mode not in ("sweep1d", "sweep2d"):
        raise ConfigError(f"run_sweep needs a sweep mode, got {spec.mode!r}")
    if not spec.out:
        raise ConfigError("sweeps need an output path (--out)")
    records = run_grid(spec)
    names = tuple(a.name for a in spec.axes)
    csv_path = Path(spec.out)
    write_csv(csv_path, records, names)
    plot_path = None
    if spec.emit_plot_script:
        plot_path = csv_path.with_suffix(".gp")
        rel = os.path.relpath(csv_path, plot_path.parent)
        plot_path.write_text(plot_script_text(rel, spec))
    failures = sum(1 for r in records if r.error)
    return SweepOutcome(csv_path, plot_path, records, failures)


def series_output(out: str | None, suffix: str) -> str | None:
    if out is None or not suffix:
        return out
    p = Path(out)
    return str(p.with_name(p.stem + suffix + p.suffix))


def record_lines(rec: SweepRecord, problem: MeanFieldProblem) -> list[str]:
    lines = [f"omega_b={format_value(problem.omega_b)}",
             f"Omega={format_value(problem.Omega)}",
             f"w={format_value(problem.w)}"]
    for f in fields(rec):
        if f.name in ("coordinates", "error"):
            continue
        lines.append(f"{f.name}={format_value(getattr(rec, f.name))}")
    return lines
