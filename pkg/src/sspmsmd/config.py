"""Run configurations: flat ``key = value`` files and the built-in presets."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .experiments import ConvergenceSpec, MethodSpec, SineIC, StepIC, SweepSpec, parse_ic
from .tableau import format_number, parse_key_values

__all__ = ["RunConfig", "ConfigError", "PRESETS", "preset", "preset_names"]

SQRT_HALF = math.sqrt(0.5)
COMMANDS = ("sweep", "converge")


class ConfigError(ValueError):
    """Carries every problem found, one per line."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, (SineIC, StepIC)):
        return value.to_text()
    if isinstance(value, tuple):
        return " ".join(v.to_text() if isinstance(v, MethodSpec) else _fmt(v) for v in value)
    return str(value)


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _opt(conv):
    return lambda text: None if text.lower() == "none" else conv(text)


_PARSERS = {
    "methods": lambda t: tuple(MethodSpec.from_text(m) for m in t.split()),
    "scheme": str,
    "flux": str,
    "mode": str,
    "reference": str,
    "n_points": int,
    "n_list": lambda t: tuple(int(v) for v in t.split()),
    "lambdas": lambda t: tuple(float(v) for v in t.split()),
    "x0": float,
    "length": float,
    "n_steps": _opt(int),
    "final_time": _opt(float),
    "ic": parse_ic,
    "threshold": float,
    "refine": _parse_bool,
    "refine_tol": float,
    "weno_eps": float,
    "endpoint_included": _parse_bool,
    "scale_by_speed": _parse_bool,
}


@dataclass(frozen=True)
class RunConfig:
    """A command name plus the fully resolved study specification."""

    command: str
    spec: SweepSpec | ConvergenceSpec

    def to_text(self) -> str:
        lines = [f"command = {self.command}"]
        for f in dataclasses.fields(self.spec):
            lines.append(f"{f.name} = {_fmt(getattr(self.spec, f.name))}")
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        try:
            pairs = parse_key_values(text)
        except ValueError as exc:
            raise ConfigError([str(exc)]) from exc
        command = pairs.pop("command", None)
        if command not in COMMANDS:
            raise ConfigError([f"command must be one of {COMMANDS}, got {command!r}"])
        return cls.from_pairs(command, pairs)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_text(Path(path).read_text())

    @classmethod
    def from_pairs(cls, command: str, pairs: dict[str, str], base=None) -> "RunConfig":
        """Build from string values; ``base`` (a spec) supplies anything missing."""
        target = SweepSpec if command == "sweep" else ConvergenceSpec
        names = {f.name for f in dataclasses.fields(target)}
        problems = [f"unknown key {k!r} for {command}" for k in pairs if k not in names]
        values = {}
        for key, text in pairs.items():
            if key not in names:
                continue
            try:
                values[key] = _PARSERS[key](text)
            except (ValueError, KeyError) as exc:
                problems.append(f"{key}: {exc}")
        if base is not None:
            merged = {f.name: getattr(base, f.name) for f in dataclasses.fields(base)}
            merged.update(values)
            values = merged
        required = [
            f.name
            for f in dataclasses.fields(target)
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
        ]
        missing = [k for k in required if k not in values and k not in pairs]
        problems += [f"missing key {k!r}" for k in missing]
        if problems:
            raise ConfigError(problems + _field_problems(target, values))
        try:
            spec = target(**values)
        except ValueError as exc:
            lines = [ln.strip() for ln in str(exc).splitlines()[1:]] or [str(exc)]
            raise ConfigError(lines) from exc
        return cls(command, spec)

    def override(self, **changes) -> "RunConfig":
        """Replace fields given as already-parsed values (``None`` = keep)."""
        changes = {k: v for k, v in changes.items() if v is not None}
        if not changes:
            return self
        text_pairs = {k: _fmt(v) for k, v in changes.items()}
        return RunConfig.from_pairs(self.command, text_pairs, base=self.spec)


def _placeholders(target) -> dict:
    base = {
        "methods": (MethodSpec("ssprk33"),),
        "scheme": "weno5",
        "flux": "advection-right",
        "n_points": 100,
        "lambdas": (0.5,),
        "n_list": (41,),
        "mode": "temporal",
        "final_time": 1.0,
        "ic": SineIC(0.5, 0.5, math.pi),
    }
    return {f.name: base[f.name] for f in dataclasses.fields(target) if f.name in base}


def _field_problems(target, values: dict) -> list[str]:
    """Problems among the values that did parse, with placeholders for the rest."""
    obj = object.__new__(target)
    merged = {f.name: f.default for f in dataclasses.fields(target)}
    merged.update(_placeholders(target))
    merged.update(values)
    for k, v in merged.items():
        object.__setattr__(obj, k, v)
    try:
        return obj.problems()
    except Exception:  # partially parsed values can fail in arbitrary ways
        return []


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step)) + 1
    return tuple(float(round(lo + i * step, 12)) for i in range(n))


def _ms(*names, K=SQRT_HALF):
    out = []
    for n in names:
        needs_k = n not in ("nonssp", "ssprk33")
        out.append(MethodSpec(n, K if needs_k else None))
    return tuple(out)


CONV_METHODS = ("ssprk33", "2s3p", "2s4p", "3s5p")
SMOOTH_ADV_2PI = SineIC(0.5, 0.5, 1.0)
SMOOTH_ADV = SineIC(0.5, 0.5, math.pi)
SMOOTH_BURGERS = SineIC(1.0, 0.2, math.pi)


def _build_presets() -> dict[str, RunConfig]:
    p = {}
    p["example1"] = RunConfig(
        "sweep",
        SweepSpec(
            methods=_ms("ts2", "2s2p", "2s3p", "2s4p", "3s4p", "3s5p", "nonssp"),
            scheme="first-order",
            flux="advection-left",
            n_points=1600,
            x0=0.0,
            length=1.0,
            lambdas=_grid(0.05, 2.0, 0.05),
            n_steps=50,
            ic=StepIC(0.25, 0.5),
        ),
    )
    for flux, name in (("advection-right", "example2-advection"), ("burgers", "example2-burgers")):
        p[name] = RunConfig(
            "sweep",
            SweepSpec(
                methods=_ms("2s3p", "nonssp", "2s4p", "3s4p", "3s5p"),
                scheme="weno5",
                flux=flux,
                n_points=200,
                x0=-1.0,
                length=2.0,
                lambdas=_grid(0.05, 1.6, 0.05),
                final_time=1.0,
                ic=StepIC(0.25, 0.5),
            ),
        )
    p["example3a"] = RunConfig(
        "converge",
        ConvergenceSpec(
            methods=_ms(*CONV_METHODS),
            scheme="spectral",
            flux="advection-right",
            mode="temporal",
            n_list=(41,),
            lambdas=(0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05),
            final_time=2.0,
            ic=SMOOTH_ADV_2PI,
            x0=0.0,
            length=2 * math.pi,
            endpoint_included=False,
        ),
    )
    p["example3b"] = RunConfig(
        "converge",
        ConvergenceSpec(
            methods=_ms(*CONV_METHODS),
            scheme="weno9",
            flux="advection-right",
            mode="temporal",
            n_list=(101,),
            lambdas=(0.9, 0.8, 0.7, 0.6, 0.5, 0.4),
            final_time=2.0,
            ic=SMOOTH_ADV_2PI,
            x0=0.0,
            length=2 * math.pi,
        ),
    )
    for scheme in ("weno5", "weno9"):
        p[f"example3b-fixed-{scheme}"] = RunConfig(
            "converge",
            ConvergenceSpec(
                methods=_ms("ssprk33", "2s3p"),
                scheme=scheme,
                flux="advection-right",
                mode="temporal",
                n_list=(301,),
                lambdas=(0.8, 0.6, 0.4, 0.2, 0.1, 0.05),
                final_time=2.0,
                ic=SMOOTH_ADV_2PI,
                x0=0.0,
                length=2 * math.pi,
            ),
        )
        p[f"example3b-corefine-{scheme}"] = RunConfig(
            "converge",
            ConvergenceSpec(
                methods=_ms("ssprk33", "2s3p"),
                scheme=scheme,
                flux="advection-right",
                mode="corefine",
                n_list=(41, 81, 161, 321),
                lambdas=(0.8,),
                final_time=2.0,
                ic=SMOOTH_ADV_2PI,
                x0=0.0,
                length=2 * math.pi,
            ),
        )
    p["example4a"] = RunConfig(
        "converge",
        ConvergenceSpec(
            methods=_ms(*CONV_METHODS),
            scheme="weno7",
            flux="advection-right",
            mode="corefine",
            n_list=(41, 81, 161, 321, 641, 1281),
            lambdas=(0.8,),
            final_time=2.0,
            ic=SMOOTH_ADV,
            x0=-1.0,
            length=2.0,
        ),
    )
    p["example4b"] = RunConfig(
        "converge",
        ConvergenceSpec(
            methods=_ms(*CONV_METHODS),
            scheme="weno7",
            flux="burgers",
            mode="corefine",
            n_list=(161, 321, 641, 1281, 2561, 5121),
            lambdas=(0.8,),
            final_time=1.4,
            ic=SMOOTH_BURGERS,
            x0=-1.0,
            length=2.0,
            scale_by_speed=True,
            reference="exact-burgers",
        ),
    )
    return p


PRESETS = _build_presets()


def preset_names() -> list[str]:
    return list(PRESETS)


def preset(name: str) -> RunConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
