"""Command-line front end and record serialization.

Configuration is a flat ``key = value`` file; ``#`` starts a comment line::

    material.E = 30000
    material.nu = 0.15
    ...
    run.scenario = 2.3
    run.increments = 200

``run.scenario`` is a preset name (2.1, 2.2, 2.2-unload, 2.3, 2.4) or the
path of a JSON loading program. Presets supply every material key; keys
given in the file override them.
"""

from __future__ import annotations

import argparse
import collections
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .driver import (SCENARIOS, STRAIN, STRESS, Control, ControlStep,
                     LoadingProgram, OuterNonConvergenceError, first_index,
                     phase_fraction, run_program, scenario, yield_value)
from .return_mapping import IntegrationError, Mode, Tolerances
from .surface import DegenerateDirectionError, MaterialParams, check_material

MATERIAL_KEYS = {
    "material.E": "E", "material.nu": "nu", "material.fc": "fc",
    "material.ft": "ft", "material.e": "e", "material.t": "t",
    "material.k1d": "k1d", "material.qh0": "qh0", "material.gA": "gA",
    "material.gB": "gB",
}
RUN_KEYS = ("run.scenario", "run.increments", "run.toll", "run.tolf", "run.output")

COLUMNS = ("step", "eps11", "eps22", "eps33", "gam12", "gam13", "gam23",
           "sig11", "sig22", "sig33", "sig12", "sig13", "sig23",
           "xi", "rho", "theta", "kappa", "qh", "qs", "xia", "mode", "iters")
UNITS_NOTE = "units: stress MPa; strain dimensionless (engineering shear gam = 2 eps)"

STRAIN_NAMES = COLUMNS[1:7]
STRESS_NAMES = COLUMNS[7:13]


class ConfigError(Exception):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(ConfigError):
    pass


@dataclass
class RunConfig:
    params: MaterialParams
    scenario: str
    increments: int = 200
    toll: float | None = None
    tolf: float | None = None
    output: str | None = None
    material_overrides: dict = field(default_factory=dict)

    @property
    def is_preset(self) -> bool:
        return self.scenario in SCENARIOS

    def tolerances(self) -> Tolerances:
        return Tolerances.default(self.params, toll=self.toll, tol_f=self.tolf)


def _parse_pairs(text: str) -> dict[str, tuple[str, int]]:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ParseError(f"expected 'key = value', got {raw!r}", lineno)
        if key not in MATERIAL_KEYS and key not in RUN_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ParseError(f"missing value for {key!r}", lineno)
        pairs[key] = (value, lineno)
    if not pairs:
        raise ParseError("configuration is empty", 1)
    return pairs


def _number(pairs, key, kind=float):
    value, lineno = pairs[key]
    try:
        x = kind(value)
    except ValueError:
        raise ParseError(f"{key} expects a number, got {value!r}", lineno) from None
    if kind is float and not math.isfinite(x):
        raise ParseError(f"{key} must be finite", lineno)
    return x


def parse_config(text: str, scenario_override: str | None = None) -> RunConfig:
    pairs = _parse_pairs(text)
    overrides = {MATERIAL_KEYS[k]: _number(pairs, k) for k in MATERIAL_KEYS if k in pairs}
    name = scenario_override or (pairs["run.scenario"][0] if "run.scenario" in pairs else None)
    if not name:
        raise ValidationError("run.scenario is required (or pass --scenario)")

    increments = _number(pairs, "run.increments", int) if "run.increments" in pairs else 200
    if increments < 1:
        raise ValidationError("run.increments must be >= 1")
    toll = _number(pairs, "run.toll") if "run.toll" in pairs else None
    tolf = _number(pairs, "run.tolf") if "run.tolf" in pairs else None
    for key, v in (("run.toll", toll), ("run.tolf", tolf)):
        if v is not None and not v > 0:
            raise ValidationError(f"{key} must be > 0")

    if name in SCENARIOS:
        base = asdict(scenario(name).material)
    else:
        missing = [k for k, attr in MATERIAL_KEYS.items() if attr not in overrides]
        if missing:
            raise ValidationError(f"missing required key(s): {', '.join(missing)}")
        base = {}
    base.update(overrides)
    problems = check_material(**base)
    if problems:
        raise ValidationError("; ".join(problems))
    output = pairs["run.output"][0] if "run.output" in pairs else None
    return RunConfig(MaterialParams(**base), name, increments, toll, tolf, output, overrides)


def load_program(path, increments: int = 200) -> LoadingProgram:
    """Read a JSON loading program.

    ``{"label": ..., "phases": [{"increments": 100, "controls":
    {"eps11": 1e-3, "sig22": 0.0, ...}}]}`` with exactly one strain
    (``eps11..eps33``, ``gam12..gam23``) or stress (``sig11..sig23``)
    entry per component.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read program file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno) from None
    phases = data.get("phases") if isinstance(data, dict) else None
    if not phases:
        raise ValidationError(f"{path}: program needs a non-empty 'phases' list")
    steps = []
    for k, ph in enumerate(phases, start=1):
        try:
            steps.append(_phase(ph, k, increments))
        except (ValueError, TypeError, AttributeError) as exc:
            raise ValidationError(f"{path}: phase {k}: {exc}") from None
    return LoadingProgram(tuple(steps), data.get("label", path.stem))


def _phase(ph: dict, k: int, increments: int) -> ControlStep:
    ctrl = ph.get("controls", {})
    unknown = set(ctrl) - set(STRAIN_NAMES) - set(STRESS_NAMES)
    if unknown:
        raise ValueError(f"unknown controls {sorted(unknown)}")
    controls = []
    for sname, tname in zip(STRAIN_NAMES, STRESS_NAMES):
        if (sname in ctrl) == (tname in ctrl):
            raise ValueError(f"give exactly one of {sname}/{tname}")
        controls.append(Control(STRAIN, float(ctrl[sname])) if sname in ctrl
                        else Control(STRESS, float(ctrl[tname])))
    return ControlStep(tuple(controls), int(ph.get("increments", increments)),
                       str(ph.get("label", f"phase {k}")))


def build_program(config: RunConfig, base_dir=".") -> LoadingProgram:
    if config.is_preset:
        return scenario(config.scenario, increments=config.increments)
    path = Path(config.scenario)
    if not path.is_absolute():
        path = Path(base_dir) / path
    return load_program(path, config.increments)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _row(rec) -> list:
    return ([rec.step] + [float(v) for v in rec.eps] + [float(v) for v in rec.sigma]
            + [rec.xi, rec.rho, rec.theta, rec.kappa, rec.qh, rec.qs, rec.xia,
               rec.mode.value, rec.iterations])


def write_records(records, fmt: str = "csv", path=None) -> str:
    """Serialize records as CSV or JSON lines; also write to ``path`` if given."""
    if not records:
        raise ValueError("no records to write")
    buf = io.StringIO()
    if fmt == "csv":
        buf.write(f"# {UNITS_NOTE}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for rec in records:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in _row(rec)])
    elif fmt == "json-lines":
        buf.write(json.dumps({"units": UNITS_NOTE}) + "\n")
        for rec in records:
            vals = [float(_fmt(v)) if isinstance(v, float) else v for v in _row(rec)]
            buf.write(json.dumps(dict(zip(COLUMNS, vals))) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    text = buf.getvalue()
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write records to {path}: {exc.strerror}") from exc
    return text


def read_records(text: str) -> list[dict]:
    """Parse output of :func:`write_records` back into dicts."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    out = []
    if lines and lines[0].startswith("{"):
        for ln in lines[1:]:
            out.append(json.loads(ln))
        return out
    reader = csv.DictReader(ln for ln in lines if not ln.startswith("#"))
    for row in reader:
        rec = {}
        for k, v in row.items():
            if k == "mode":
                rec[k] = v
            elif k in ("step", "iters"):
                rec[k] = int(v)
            else:
                rec[k] = float(v)
        out.append(rec)
    return out


def summarize(records, params: MaterialParams, label: str = "") -> str:
    last = records[-1]
    modes = collections.Counter(r.mode.value for r in records)
    hist = ",".join(f"{m.value}:{modes[m.value]}" for m in Mode if modes[m.value])
    plastic = [abs(yield_value(r, params)) for r in records if r.mode is not Mode.ELASTIC]
    parts = [f"scenario={label}", f"steps={len(records)}",
             f"final_mean_stress={last.mean_stress:.4f}MPa",
             f"final_kappa={last.kappa:.6e}", f"modes={hist}",
             f"max_abs_f_plastic={max(plastic) if plastic else 0.0:.3e}"]
    k = first_index(records, Mode.APEX)
    if k is not None:
        parts.append(f"first_apex=step{records[k].step}"
                     f"(phase{records[k].phase},{100 * phase_fraction(records, k):.1f}%)")
    return " ".join(parts)


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mwapex",
        description="Material-point driver for the Menetrey-Willam model with return to apex.")
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--scenario", help="preset name or program file; overrides run.scenario")
    p.add_argument("--out", help="output path (default: run.output, else stdout)")
    p.add_argument("--format", choices=("csv", "json-lines"), default="csv")
    p.add_argument("--quiet", action="store_true", help="suppress the summary line")
    return p


def run_cli(argv=None) -> int:
    args = _arg_parser().parse_args(argv)
    cfg_path = Path(args.config)
    try:
        text = cfg_path.read_text()
    except OSError as exc:
        print(f"error: cannot read config {cfg_path}: {exc.strerror}", file=sys.stderr)
        return 1
    try:
        config = parse_config(text, args.scenario)
        program = build_program(config, cfg_path.parent)
    except ConfigError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    try:
        records = run_program(program, config.params, tol=config.tolerances())
    except (IntegrationError, OuterNonConvergenceError, DegenerateDirectionError) as exc:
        print(f"error: non-convergence: {exc}", file=sys.stderr)
        return 2

    out = args.out or config.output
    try:
        text = write_records(records, args.format, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    summary_stream = sys.stdout
    if out is None:
        sys.stdout.write(text)
        summary_stream = sys.stderr
    if not args.quiet:
        print(summarize(records, config.params, program.label), file=summary_stream)
    return 0


def main() -> None:
    sys.exit(run_cli())
