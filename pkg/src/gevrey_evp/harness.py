"""Experiment configuration, rate fitting, and CSV/SVG emission.

Config files are line-oriented ``key = value`` text with a single
``[experiment]`` section.  Validation reports every violation (with line
numbers), not just the first.  CSV is the contract format: floats are
written as shortest round-trip decimals so emitted files are byte-stable
and re-parse exactly; SVG plots are dependency-free conveniences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coefficients import MODEL_NAMES

__all__ = [
    "RunConfig",
    "ConfigError",
    "parse_config",
    "serialize_config",
    "RateFit",
    "fit_rate",
    "TRANSFORMS",
    "emit_csv",
    "read_csv",
    "emit_svg",
]


class ConfigError(ValueError):
    """All config violations, each tagged with its line number."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class _Field:
    typ: str  # int, float, str, bool, intpair, intlist, floatlist
    default: object  # None marks a required key
    check: Callable[[object], str | None] | None = None


def _positive(name):
    return lambda v: None if v > 0 else f"{name} must be positive"


def _at_least(name, lo):
    return lambda v: None if v >= lo else f"{name} must be >= {lo}"


def _model_name(v):
    if v in MODEL_NAMES or v.startswith("custom:"):
        return None
    return f"unknown model {v!r}"


def _in_unit(name):
    return lambda v: None if 0.0 < v < 1.0 else f"{name} must lie in (0, 1)"


_EXPERIMENTS: dict[str, dict[str, _Field]] = {
    "gl-study": {
        "model": _Field("str", None, _model_name),
        "m": _Field("int", 64, _at_least("m", 2)),
        "n_min": _Field("int", 3, _at_least("n_min", 1)),
        "n_max": _Field("int", 16, _at_least("n_max", 1)),
        "n_star": _Field("int", 40, _at_least("n_star", 2)),
        "tol": _Field("float", 1e-14, _positive("tol")),
        "out": _Field("str", "gl_study.csv"),
        "svg": _Field("str", ""),
    },
    "qmc-study": {
        "model": _Field("str", None, _model_name),
        "m": _Field("int", 32, _at_least("m", 2)),
        "s": _Field("int", 20, _at_least("s", 1)),
        "levels": _Field("intpair", (4, 10)),
        "shifts": _Field("int", 8, _at_least("shifts", 1)),
        "mc_shifts": _Field("int", 32, _at_least("mc_shifts", 1)),
        "seed": _Field("int", 7193, _at_least("seed", 0)),
        "theta": _Field("float", 0.6),
        "delta": _Field("float", 0.0),  # 0 = use the model's Gevrey order
        "beta": _Field("str", "j^-5"),
        "tol": _Field("float", 1e-14, _positive("tol")),
        "with_mc": _Field("bool", True),
        "vectors": _Field("str", ""),
        "out": _Field("str", "qmc_study.csv"),
        "svg": _Field("str", ""),
    },
    "mc-study": {
        "model": _Field("str", None, _model_name),
        "m": _Field("int", 32, _at_least("m", 2)),
        "s": _Field("int", 20, _at_least("s", 1)),
        "levels": _Field("intpair", (4, 10)),
        "shifts": _Field("int", 32, _at_least("shifts", 1)),
        "seed": _Field("int", 7193, _at_least("seed", 0)),
        "tol": _Field("float", 1e-14, _positive("tol")),
        "out": _Field("str", "mc_study.csv"),
    },
    "trunc-study": {
        "model": _Field("str", None, _model_name),
        "m": _Field("int", 32, _at_least("m", 2)),
        "s_list": _Field("intlist", (1, 2, 4, 8)),
        "ref_s": _Field("int", 16, _at_least("ref_s", 2)),
        "level": _Field("int", 10, _at_least("level", 1)),
        "shifts": _Field("int", 8, _at_least("shifts", 1)),
        "seed": _Field("int", 7193, _at_least("seed", 0)),
        "theta": _Field("float", 0.6),
        "delta": _Field("float", 0.0),
        "beta": _Field("str", "j^-5"),
        "tol": _Field("float", 1e-14, _positive("tol")),
        "out": _Field("str", "trunc_study.csv"),
    },
    "checks": {
        "which": _Field("str", None, lambda v: None
                        if v in ("combinatorics", "gevrey")
                        else f"which must be combinatorics or gevrey, got {v!r}"),
        "n_max": _Field("int", 60, _at_least("n_max", 2)),
        "nu_max": _Field("int", 8, _at_least("nu_max", 1)),
        "model": _Field("str", "gl-analytic", _model_name),
        "m": _Field("int", 32, _at_least("m", 2)),
        "K": _Field("int", 20, _at_least("K", 8)),
        "quad_n": _Field("int", 64, _at_least("quad_n", 2)),
        "out": _Field("str", ""),
    },
    "solve-evp": {
        "model": _Field("str", None, _model_name),
        "m": _Field("int", 64, _at_least("m", 2)),
        "y": _Field("floatlist", (0.0,)),
        "tol": _Field("float", 1e-14, _positive("tol")),
        "second": _Field("bool", False),
        "dump": _Field("str", ""),
        "dump_matrix": _Field("str", ""),
    },
    "cbc": {
        "s": _Field("int", 16, _at_least("s", 1)),
        "n": _Field("int", 1024, _at_least("n", 2)),
        "delta": _Field("float", 1.0, _at_least("delta", 1.0)),
        "theta": _Field("float", 0.6, _in_unit("theta")),
        "beta": _Field("str", "j^-5"),
        "out": _Field("str", "vector.txt"),
    },
}


@dataclass
class RunConfig:
    """One validated experiment: its name plus the schema-typed fields."""

    experiment: str
    fields: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.fields[key]


def _parse_value(typ: str, raw: str):
    raw = raw.strip()
    if typ == "int":
        return int(raw)
    if typ == "float":
        return float(raw)
    if typ == "str":
        return raw.strip("\"'")
    if typ == "bool":
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValueError(f"expected true/false, got {raw!r}")
    if typ == "intpair":
        lo, _, hi = raw.partition("..")
        if not _:
            raise ValueError(f"expected 'lo..hi', got {raw!r}")
        return (int(lo), int(hi))
    if typ == "intlist":
        return tuple(int(p) for p in raw.split(",") if p.strip())
    if typ == "floatlist":
        return tuple(float(p) for p in raw.split(",") if p.strip())
    raise AssertionError(typ)


def _format_value(typ: str, value) -> str:
    if typ == "intpair":
        return f"{value[0]}..{value[1]}"
    if typ in ("intlist", "floatlist"):
        return ",".join(repr(v) if typ == "floatlist" else str(v) for v in value)
    if typ == "bool":
        return "true" if value else "false"
    if typ == "float":
        return repr(float(value))
    return str(value)


def _cross_checks(cfg: RunConfig) -> list[str]:
    errs = []
    f = cfg.fields
    if cfg.experiment == "gl-study":
        if f["n_min"] > f["n_max"]:
            errs.append("n_min must not exceed n_max")
        if f["n_max"] >= f["n_star"]:
            errs.append(f"n_star = {f['n_star']} must exceed n_max = {f['n_max']}")
    if cfg.experiment in ("qmc-study", "mc-study"):
        lo, hi = f["levels"]
        if not 1 <= lo <= hi:
            errs.append(f"levels {lo}..{hi} must satisfy 1 <= lo <= hi")
    if cfg.experiment == "trunc-study":
        slist = f["s_list"]
        if not slist or list(slist) != sorted(slist):
            errs.append("s_list must be nonempty ascending")
        elif max(slist) >= f["ref_s"]:
            errs.append(f"ref_s = {f['ref_s']} must exceed max(s_list) = {max(slist)}")
    if cfg.experiment == "qmc-study" and not 0.5 < f["theta"] <= 1.0:
        errs.append("theta must lie in (1/2, 1]")
    return errs


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate one experiment section.

    Raises ConfigError carrying every violation found, each prefixed with
    its line number.
    """
    errors: list[str] = []
    section: str | None = None
    seen: dict[str, int] = {}
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if section is not None:
                errors.append(f"line {lineno}: second section [{name}] (one per file)")
            elif name not in _EXPERIMENTS:
                errors.append(f"line {lineno}: unknown experiment [{name}]")
                section = name
            else:
                section = name
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        if section is None:
            errors.append(f"line {lineno}: key outside any [section]")
            continue
        schema = _EXPERIMENTS.get(section)
        if schema is None:
            continue  # section name already reported
        key, _, rawval = line.partition("=")
        key = key.strip()
        if key in seen:
            errors.append(
                f"line {lineno}: duplicate key {key!r} (first at line {seen[key]})"
            )
            continue
        seen[key] = lineno
        if key not in schema:
            errors.append(f"line {lineno}: unknown key {key!r} for [{section}]")
            continue
        spec = schema[key]
        try:
            value = _parse_value(spec.typ, rawval)
        except ValueError as exc:
            errors.append(f"line {lineno}: {key}: {exc}")
            continue
        if spec.check is not None:
            msg = spec.check(value)
            if msg is not None:
                errors.append(f"line {lineno}: {msg}")
                continue
        fields[key] = value
    if section is None:
        errors.append("line 1: no [experiment] section found")
    elif section in _EXPERIMENTS:
        schema = _EXPERIMENTS[section]
        for key, spec in schema.items():
            if key not in fields:
                if spec.default is None:
                    errors.append(f"line 1: missing required key {key!r}")
                else:
                    fields[key] = spec.default
        cfg = RunConfig(section, fields)
        if not errors:
            errors.extend(_cross_checks(cfg))
        if not errors:
            return cfg
    raise ConfigError(errors)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) equals cfg."""
    schema = _EXPERIMENTS[cfg.experiment]
    lines = [f"[{cfg.experiment}]"]
    for key, spec in schema.items():
        lines.append(f"{key} = {_format_value(spec.typ, cfg.fields[key])}")
    return "\n".join(lines) + "\n"


# -- rate fitting -------------------------------------------------------------

TRANSFORMS: dict[str, Callable[[float], float]] = {
    "log-vs-n": lambda t: float(t),
    "log-vs-cuberoot-n": lambda t: float(t) ** (1.0 / 3.0),
    "loglog": lambda t: math.log(t),
}


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    transform: str


def fit_rate(records: Sequence[tuple[float, float]], transform: str) -> RateFit:
    """Least-squares line through transformed (t, error) records.

    The ordinate is always log(error); the abscissa is t, t^(1/3) or log t
    according to ``transform``.  Records with nonpositive error are dropped;
    at least 4 must remain.
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"transform must be one of {sorted(TRANSFORMS)}")
    xf = TRANSFORMS[transform]
    pts = [(xf(t), math.log(e)) for t, e in records if e > 0.0]
    if len(pts) < 4:
        raise ValueError(f"need >= 4 records with positive error, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([slope, intercept])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), r2, transform)


# -- CSV / SVG emission -------------------------------------------------------

def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))  # shortest round-trip decimal
    return str(value)


def emit_csv(records, path, columns: Sequence[str], metadata: dict | None = None):
    """Write records as CSV with '#'-prefixed metadata lines and a header."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for key, value in (metadata or {}).items():
                fh.write(f"# {key} = {value}\n")
            fh.write(",".join(columns) + "\n")
            for rec in records:
                fh.write(",".join(_cell(v) for v in rec) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path):
    """Read back an emitted CSV: (metadata, columns, numeric rows)."""
    metadata: dict[str, str] = {}
    columns: list[str] = []
    rows: list[tuple] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                metadata[key.strip()] = val.strip()
                continue
            if not columns:
                columns = line.split(",")
                continue
            cells = []
            for cell in line.split(","):
                try:
                    cells.append(int(cell))
                except ValueError:
                    cells.append(float(cell))
            rows.append(tuple(cells))
    return metadata, columns, rows


def emit_svg(
    records,
    fit: RateFit | None,
    path,
    transform: str,
    title: str = "convergence",
    xlabel: str = "n",
    ylabel: str = "log error",
):
    """Plot transformed records as a polyline, with the fitted line if given.

    Refuses an empty record list; the fit overlay is skipped when absent.
    """
    pts = [(TRANSFORMS[transform](t), math.log(e)) for t, e in records if e > 0.0]
    if not pts:
        raise ValueError("no records to plot")
    width, height, margin = 640, 480, 60
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="24" text-anchor="middle">'
        f"{title} [{transform}]</text>",
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle">{xlabel}</text>',
        f'<text x="16" y="{height / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {height / 2:.0f})">{ylabel}</text>',
        f'<polyline points="{poly}" fill="none" stroke="steelblue" stroke-width="1.5"/>',
    ]
    for x, y in pts:
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="steelblue"/>')
    if fit is not None:
        y0 = fit.intercept + fit.slope * x_lo
        y1 = fit.intercept + fit.slope * x_hi
        parts.append(
            f'<line x1="{sx(x_lo):.2f}" y1="{sy(y0):.2f}" x2="{sx(x_hi):.2f}" '
            f'y2="{sy(y1):.2f}" stroke="firebrick" stroke-dasharray="6 3"/>'
        )
        parts.append(
            f'<text x="{width - margin}" y="40" text-anchor="end">'
            f"slope {fit.slope:.3f}, r2 {fit.r_squared:.4f}</text>"
        )
    parts.append("</svg>")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write SVG {path}: {exc}") from exc
