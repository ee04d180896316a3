"""Scenario configuration files and CSV/JSON rendering of results.

Config files are flat ``key = value`` text, one entry per line, ``#`` starting
a comment. CSV output opens with a schema comment line
(``# armalloc-<kind> v1``) followed by a header row; JSON output carries the
same schema name, version, column list and rows.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from decimal import Decimal
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO

from .errors import InvalidParameterError
from .optimizer import STAGES, RatioGrid, ReductionRow, Scenario, SweepTable
from .params import OperatingTargets, TrialParams
from .search import RATIO_MODES
from .two_stage import FORMS

SCHEMA_VERSION = 1

SWEEP_COLUMNS = ["R", "C", "n", "control_n", "N", "N_minus_baseline", "N_over_baseline",
                 "n_reduction", "n_over_baseline"]
DESIGN_COLUMNS = ["stage", "K", "R", "C", "n", "control_n", "N", "alpha", "power"]
PLOT_COLUMNS = ["R", "N"]
ROP_COLUMNS = ["K", "sqrt_K", "R_OP", "R_OP_low", "R_OP_high", "N_min", "N_baseline"]
RMAX_COLUMNS = ["K", "R_MAX", "budget", "N_baseline", "N_at_R_MAX", "N_over_baseline"]
REDUCTION_COLUMNS = ["R", "n", "N", "n_reduction", "n_over_baseline", "N_over_baseline",
                     "exceeds_budget", "total_reduction"]
SIMULATE_COLUMNS = ["quantity", "stage", "K", "R", "C", "n", "analytic", "estimate",
                    "std_error", "replicates", "seed", "within_3se"]

# columns shown to two decimals under --paper-format
_PROPORTIONS = {"N_over_baseline", "n_over_baseline"}


@dataclass
class ScenarioConfig:
    """Parsed run configuration; defaults are the standard design scenario."""

    stage: str = "single"
    k: list[int] = field(default_factory=lambda: [2])
    r: float = 1.0
    alpha: float = 0.05
    power: float = 0.9
    sigma: float = 1.0
    delta: float = 0.5
    delta0: float = 0.125
    grid: RatioGrid = field(default_factory=RatioGrid)
    budget: float = 0.03
    replicates: int = 100_000
    seed: int = 0
    ratio_mode: str = "nominal"
    form: str = "exact"
    c: float | None = None
    n: int | None = None

    def validate(self) -> "ScenarioConfig":
        if self.stage not in STAGES:
            raise InvalidParameterError("stage", f"must be one of {STAGES}")
        if self.ratio_mode not in RATIO_MODES:
            raise InvalidParameterError("ratio_mode", f"must be one of {RATIO_MODES}")
        if self.form not in FORMS:
            raise InvalidParameterError("form", f"must be one of {FORMS}")
        if self.budget < 0:
            raise InvalidParameterError("budget", "must be >= 0")
        if self.replicates < 1:
            raise InvalidParameterError("replicates", "must be >= 1")
        if self.n is not None and self.n < 1:
            raise InvalidParameterError("n", "must be >= 1")
        if not self.k:
            raise InvalidParameterError("k", "at least one value required")
        self.targets()
        for k in self.k:
            self.params(k)
        return self

    def params(self, k: int | None = None) -> TrialParams:
        return TrialParams(k=self.k[0] if k is None else k, ratio=self.r, sigma=self.sigma,
                           delta=self.delta, delta0=self.delta0)

    def targets(self) -> OperatingTargets:
        return OperatingTargets(alpha=self.alpha, power=self.power)

    def scenario(self, k: int | None = None) -> Scenario:
        return Scenario(params=self.params(k), targets=self.targets(), stage=self.stage,
                        ratio_mode=self.ratio_mode, form=self.form)


def _int_list(text: str) -> list[int]:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part.lstrip("-").isdigit():
            raise InvalidParameterError("k", f"not an integer: {part!r}")
        out.append(int(part))
    return out


def _int(name):
    def conv(text):
        try:
            return int(text)
        except ValueError:
            raise InvalidParameterError(name, f"not an integer: {text!r}") from None
    return conv


def _float(name):
    def conv(text):
        try:
            return float(text)
        except ValueError:
            raise InvalidParameterError(name, f"not a number: {text!r}") from None
    return conv


def _grid(text):
    return text if isinstance(text, RatioGrid) else RatioGrid.parse(str(text))


_CONVERTERS = {
    "stage": lambda s: str(s).strip().replace("-", "_"),
    "k": lambda s: s if isinstance(s, list) else _int_list(s),
    "r": _float("r"), "alpha": _float("alpha"), "power": _float("power"),
    "sigma": _float("sigma"), "delta": _float("delta"), "delta0": _float("delta0"),
    "grid": _grid, "budget": _float("budget"),
    "replicates": _int("replicates"), "seed": _int("seed"),
    "ratio_mode": lambda s: str(s).strip(), "form": lambda s: str(s).strip(),
    "c": _float("c"), "n": _int("n"),
}
_ALIASES = {"ratio": "r", "rmax_budget": "budget", "critical_value": "c", "two_stage": "stage"}


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines into converted config fields."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"line {lineno}", f"expected key = value, got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower().replace("-", "_")
        key = _ALIASES.get(key, key)
        if key not in _CONVERTERS:
            raise InvalidParameterError(key, "unknown config key")
        out[key] = _CONVERTERS[key](value)
    return out


def build_config(path: str | Path | None = None, **overrides) -> ScenarioConfig:
    """Config from an optional file, then non-None ``overrides`` on top."""
    values: dict[str, Any] = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for key, value in overrides.items():
        if value is not None:
            values[key] = _CONVERTERS[key](value)
    known = {f.name for f in fields(ScenarioConfig)}
    return ScenarioConfig(**{k: v for k, v in values.items() if k in known}).validate()


# ---------------------------------------------------------------- records

def design_record(design) -> dict[str, Any]:
    return {
        "stage": design.stage, "K": design.k, "R": Decimal(repr(design.ratio)),
        "C": design.critical_value, "n": design.per_arm_n, "control_n": design.control_n,
        "N": design.total_n, "alpha": design.achieved_alpha, "power": design.achieved_power,
    }


def sweep_records(table: SweepTable) -> list[dict[str, Any]]:
    return [{
        "R": row.ratio, "C": row.design.critical_value, "n": row.design.per_arm_n,
        "control_n": row.design.control_n, "N": row.design.total_n,
        "N_minus_baseline": row.n_vs_baseline, "N_over_baseline": row.proportion_vs_baseline,
        "n_reduction": row.per_arm_reduction, "n_over_baseline": row.per_arm_proportion,
    } for row in table.rows]


def plot_records(table: SweepTable) -> list[dict[str, Any]]:
    return [{"R": row.ratio, "N": row.design.total_n} for row in table.rows]


def reduction_records(rows: Iterable[ReductionRow], arms_of_interest: int | None = None):
    return [{
        "R": r.ratio, "n": r.per_arm_n, "N": r.total_n, "n_reduction": r.per_arm_reduction,
        "n_over_baseline": r.per_arm_proportion, "N_over_baseline": r.total_over_baseline,
        "exceeds_budget": r.exceeds_budget,
        "total_reduction": None if arms_of_interest is None else arms_of_interest * r.per_arm_reduction,
    } for r in rows]


# --------------------------------------------------------------- rendering

def _cell(column: str, value: Any, rounded: bool) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if rounded:
            return f"{value:.2f}" if column in _PROPORTIONS else f"{value:.4f}"
        return repr(value)
    return str(value)


def _json_value(column: str, value: Any, rounded: bool):
    if isinstance(value, Decimal):
        return float(value)
    if isinstance(value, float) and rounded:
        return round(value, 2 if column in _PROPORTIONS else 4)
    return value


def render(records: Sequence[dict], columns: Sequence[str], kind: str,
           fmt: str = "csv", rounded: bool = False) -> str:
    if fmt == "json":
        doc = {
            "schema": f"armalloc-{kind}", "version": SCHEMA_VERSION, "columns": list(columns),
            "rows": [{c: _json_value(c, rec.get(c), rounded) for c in columns} for rec in records],
        }
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "csv":
        raise InvalidParameterError("format", f"unknown format {fmt!r}")
    buf = io.StringIO()
    buf.write(f"# armalloc-{kind} v{SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_cell(c, rec.get(c), rounded) for c in columns])
    return buf.getvalue()


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_csv(fh: TextIO) -> tuple[str, int, list[dict[str, Any]]]:
    """Inverse of ``render(..., fmt="csv")``: returns ``(kind, version, rows)``.

    The ``R`` column comes back as ``Decimal`` so grid keys survive unchanged.
    """
    head = fh.readline().strip()
    if not head.startswith("# armalloc-"):
        raise ValueError(f"missing schema line, got {head!r}")
    kind, _, version = head[len("# armalloc-"):].partition(" v")
    rows = []
    for rec in csv.DictReader(fh):
        row = {k: _parse_cell(v) for k, v in rec.items()}
        if row.get("R") is not None:
            row["R"] = Decimal(rec["R"])
        rows.append(row)
    return kind, int(version), rows

