"""Parameter sweeps, self-contained run records and the reference reproduction table."""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, OptogravError
from .gravity import SCENARIOS, scenario_force_set
from .merit import theta_argmax, theta_at, theta_star
from .params import ParameterSet, preset, validate
from .spectrum import variance
from .steady import select_branch, solve_steady

OUTPUTS = ("steady", "forces", "variance", "theta", "theta_star")
OUTPUT_COLUMNS = {
    "steady": ("n_photons", "x2_bar", "Delta", "omega_0", "stable", "branch_count"),
    "forces": ("f_alpha", "f_beta", "f_cl"),
    "variance": ("var0", "widening_alpha", "widening_beta", "widening_cl", "quadrature_error"),
    "theta": ("theta_over_G_max", "argmax_omega", "theta_over_G_at_omega_2"),
    "theta_star": ("theta_star_full_over_G", "theta_star_simplified_over_G"),
}
MAX_AXES = 2
DEFAULT_OMEGA_RANGE = (1e5, 1e10)


@dataclass
class Axis:
    param: str
    values: list[float]


@dataclass
class SweepSpec:
    base: ParameterSet
    axes: list[Axis] = field(default_factory=list)
    outputs: tuple[str, ...] = ("steady", "theta_star")
    output: str | None = None
    base_name: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        unknown = set(data) - {"base", "axes", "outputs", "output"}
        if unknown:
            raise ConfigError(f"unknown sweep keys: {', '.join(sorted(unknown))}")
        base = data.get("base", "A")
        if isinstance(base, str):
            params, name = preset(base), base
        else:
            params, name = ParameterSet.from_dict(base), None
        axes = [_parse_axis(a) for a in data.get("axes", [])]
        outputs = tuple(data.get("outputs", ("steady", "theta_star")))
        spec = cls(params, axes, outputs, data.get("output"), name)
        spec.check()
        return spec

    def check(self):
        if len(self.axes) > MAX_AXES:
            raise ConfigError(f"at most {MAX_AXES} sweep axes are supported")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad or not self.outputs:
            raise ConfigError(f"outputs must be a non-empty subset of {OUTPUTS}")
        names = set(self.base.to_dict()) | {"Delta"}
        for ax in self.axes:
            if ax.param not in names or ax.param in ("detuning_mode",):
                raise ConfigError(f"cannot sweep {ax.param!r}")
            if not ax.values:
                raise ConfigError(f"axis {ax.param!r} has no values")

    def points(self):
        if not self.axes:
            yield {}
            return
        for combo in itertools.product(*(ax.values for ax in self.axes)):
            yield {ax.param: v for ax, v in zip(self.axes, combo)}


def _parse_axis(obj) -> Axis:
    if not isinstance(obj, dict) or "param" not in obj:
        raise ConfigError(f"axis must be an object with 'param': {obj!r}")
    kinds = [k for k in ("values", "log", "linear") if k in obj]
    if len(kinds) != 1 or set(obj) - {"param", *kinds}:
        raise ConfigError("axis needs exactly one of 'values', 'log', 'linear'")
    kind = kinds[0]
    if kind == "values":
        vals = [float(v) for v in obj["values"]]
    else:
        lo, hi, n = obj[kind]
        n = int(n)
        vals = list(np.geomspace(lo, hi, n) if kind == "log" else np.linspace(lo, hi, n))
        vals = [float(v) for v in vals]
    return Axis(str(obj["param"]), vals)


@dataclass
class RunRecord:
    index: int
    params: dict
    outputs_requested: tuple
    status: str = "ok"
    outputs: dict = field(default_factory=dict)
    steady: dict | None = None
    warnings: list = field(default_factory=list)
    error: str | None = None
    version: str = __version__
    config_hash: str = ""

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "params": self.params,
            "outputs_requested": list(self.outputs_requested),
            "status": self.status,
            "outputs": self.outputs,
            "steady": self.steady,
            "warnings": self.warnings,
            "error": self.error,
            "version": self.version,
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(d["index"], d["params"], tuple(d["outputs_requested"]), d["status"],
                   d["outputs"], d["steady"], d["warnings"], d["error"], d["version"],
                   d["config_hash"])


def config_hash(params: dict, outputs) -> str:
    blob = json.dumps({"params": params, "outputs": list(outputs)}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def evaluate_point(params: ParameterSet, outputs, index: int = 0) -> RunRecord:
    pdict = params.to_dict()
    rec = RunRecord(index, pdict, tuple(outputs), config_hash=config_hash(pdict, outputs))
    report = validate(params)
    rec.warnings = list(report.warnings)
    if not report.ok:
        rec.status = "invalid"
        rec.error = "; ".join(report.errors)
        return rec
    try:
        st = select_branch(params, solve_steady(params))
        rec.steady = st.to_dict()
        out = rec.outputs
        forces = scenario_force_set(params, st)
        if "steady" in outputs:
            out.update({k: rec.steady[k] for k in OUTPUT_COLUMNS["steady"]})
        if "forces" in outputs:
            out.update({f"f_{s.short}": forces[s].f for s in SCENARIOS})
        if "variance" in outputs:
            vr = variance(params, st, forces)
            out["var0"] = vr.var0
            out.update({f"widening_{s.short}": vr.widening[s] for s in SCENARIOS})
            out["quadrature_error"] = vr.quadrature_error
        if "theta" in outputs:
            am = theta_argmax(params, st, DEFAULT_OMEGA_RANGE)
            out["theta_over_G_max"] = am.theta / params.G
            out["argmax_omega"] = am.omega
            out["theta_over_G_at_omega_2"] = theta_at(params, st, params.omega_2) / params.G
            if am.multimodal:
                rec.warnings.append("Theta(omega) has several local maxima on the grid")
        if "theta_star" in outputs:
            ts = theta_star(params, st)
            out["theta_star_full_over_G"] = ts.full / params.G
            out["theta_star_simplified_over_G"] = ts.simplified / params.G
            if params.kappa < params.omega_2:
                rec.warnings.append("Theta* assumes kappa >> omega_2")
    except OptogravError as exc:
        rec.status = {2: "invalid", 3: "numerical"}.get(exc.exit_code, "error")
        rec.error = str(exc)
    return rec


def run_sweep(spec: SweepSpec) -> list[RunRecord]:
    """One record per cartesian point, in point order; failures are recorded, never raised."""
    spec.check()
    records = []
    for i, point in enumerate(spec.points()):
        try:
            params = spec.base.replace(**point)
        except (TypeError, ValueError) as exc:
            rec = RunRecord(i, spec.base.to_dict() | point, spec.outputs, "invalid", error=str(exc))
            records.append(rec)
            continue
        records.append(evaluate_point(params, spec.outputs, i))
    if spec.output:
        write_csv(records, spec, spec.output)
    return records


def rerun(record: RunRecord) -> RunRecord:
    params = ParameterSet.from_dict(record.params)
    return evaluate_point(params, record.outputs_requested, record.index)


def csv_columns(spec: SweepSpec) -> list[str]:
    cols = ["index", "status"] + [ax.param for ax in spec.axes]
    for o in OUTPUTS:
        if o in spec.outputs:
            cols.extend(OUTPUT_COLUMNS[o])
    return cols + ["error"]


def _fmt(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(records, spec: SweepSpec, path) -> None:
    path = Path(path)
    if path.parent and not path.parent.exists():
        raise ConfigError(f"output directory {path.parent} does not exist")
    cols = csv_columns(spec)
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None
    with fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for rec in records:
            row = []
            for c in cols:
                if c == "index":
                    row.append(rec.index)
                elif c == "status":
                    row.append(rec.status)
                elif c == "error":
                    row.append(rec.error or "")
                elif c in rec.outputs:
                    row.append(_fmt(rec.outputs[c]))
                elif c in rec.params or c == "Delta":
                    val = rec.params.get(c)
                    if c == "Delta":
                        mode = rec.params.get("detuning_mode")
                        val = mode.get("FixedDelta") if isinstance(mode, dict) else None
                    row.append(_fmt(val))
                else:
                    row.append("")
            w.writerow(row)


# --------------------------------------------------------------------------
# reproduction of the reference numbers


@dataclass
class Row:
    name: str
    computed: float
    target: float | None
    tolerance: str
    passed: bool
    note: str = ""


@dataclass
class ReproductionReport:
    rows: list[Row]
    files: list[str]
    elapsed: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def table(self) -> str:
        head = f"{'check':<34} {'computed':>14} {'target':>12} {'tolerance':>14}  result"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            tgt = "" if r.target is None else f"{r.target:.4g}"
            lines.append(f"{r.name:<34} {r.computed:>14.6g} {tgt:>12} {r.tolerance:>14}  "
                         f"{'PASS' if r.passed else 'FAIL'}")
            if r.note:
                lines.append(f"    note: {r.note}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rows": [r.__dict__ for r in self.rows],
            "files": self.files,
            "elapsed_s": self.elapsed,
        }


X2_TARGETS = {"A": 7.7e-10, "B": 2.6e-7}
THETA_STAR_TARGETS = {"A": 1.3e-9, "B": 1.3e-5}


def synthetic_sideband_set() -> ParameterSet:
    """Preset A with kappa = 1000 omega_2 (deep sideband-unresolved regime)."""
    p = preset("A")
    return p.replace(kappa=1e3 * p.omega_2)


def reproduce_reference(out_dir: str | os.PathLike | None = None, n_curve: int = 2001) -> ReproductionReport:
    t0 = time.perf_counter()
    rows: list[Row] = []
    files: list[str] = []
    grid = np.geomspace(*DEFAULT_OMEGA_RANGE, n_curve)
    curves = {}
    for name in ("A", "B"):
        p = preset(name)
        st = select_branch(p)
        ts = theta_star(p, st)
        val = ts.simplified / p.G
        tgt = THETA_STAR_TARGETS[name]
        rows.append(Row(f"Theta*/G preset {name}", val, tgt, "5%", abs(val / tgt - 1) <= 0.05,
                        f"full form sqrt(dx(dx+x2)): {ts.full / p.G:.4g}"))
        x2 = st.x2_bar
        ratio = X2_TARGETS[name] / x2
        rows.append(Row(f"x2_bar preset {name} [m]", x2, X2_TARGETS[name], "factor 3",
                        1 / 3 <= ratio <= 3,
                        f"reference/computed = {ratio:.3f}; the known ~2.8x gap comes from the "
                        "unit convention for the drive and decay rates"))
        am = theta_argmax(p, st, DEFAULT_OMEGA_RANGE)
        rel = abs(am.omega / p.omega_2 - 1)
        rows.append(Row(f"argmax omega / omega_2 - 1 ({name})", rel, 0.0, "1e-6", rel <= 1e-6))
        curves[name] = theta_at(p, st, grid) / p.G
        if name == "A":
            peak = am.theta / ts.full
            rows.append(Row("max Theta / Theta*_full (A)", peak, 1.0, "5%", abs(peak - 1) <= 0.05,
                            f"kappa/omega_2 = {p.kappa / p.omega_2:.3g}; limit value "
                            f"kappa^2/(kappa^2+omega_2^2) = {p.kappa**2 / (p.kappa**2 + p.omega_2**2):.4f}"))
    above = bool(np.all(curves["B"] > curves["A"]))
    rows.append(Row("curve B above curve A (all omega)", float(np.min(curves["B"] / curves["A"])),
                    None, "ratio > 1", above))
    ps = synthetic_sideband_set()
    st = select_branch(ps)
    am = theta_argmax(ps, st, DEFAULT_OMEGA_RANGE)
    peak = am.theta / theta_star(ps, st).full
    rows.append(Row("max Theta / Theta*_full (kappa=1e3 w2)", peak, 1.0, "1e-3", abs(peak - 1) <= 1e-3))

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, vals in curves.items():
            f = out / f"theta_curve_{name}.csv"
            write_curve(f, ("omega_rad_s", "theta_over_G"), np.column_stack([grid, vals]))
            files.append(str(f))
    return ReproductionReport(rows, files, time.perf_counter() - t0)


def write_curve(path, header, data) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in data:
            w.writerow([format(float(v), ".17g") for v in row])

