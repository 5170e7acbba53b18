"""Flat ``section.key = value`` scenario files.

Values are numbers, arithmetic on numbers (``pi``, ``sqrt`` allowed),
comma-separated lists, ``true``/``false`` or bare words. Every key must be
known; a typo is an error rather than a silently ignored setting.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field

from .ansatz import CatSpec, JitterSpec, init_cat, init_vacuum
from .dynamics import IntegratorConfig
from .model import LinearDrive, ModelParams, ModeSpec, SinusoidalDrive

__all__ = ["ConfigError", "ScenarioConfig", "DEFAULTS", "parse_text", "load_config",
           "safe_eval", "format_value"]


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
        ast.UAdd: operator.pos}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "cos": math.cos, "sin": math.sin}


def safe_eval(text: str) -> float:
    """Evaluate an arithmetic expression without ``eval``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return node.value
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ConfigError(f"unsupported element in expression {text!r}")

    try:
        return ev(tree)
    except (ArithmeticError, ValueError) as exc:
        raise ConfigError(f"cannot evaluate {text!r}: {exc}") from exc


# key -> (kind, default); kinds: float, int, bool, word, floats, ints
DEFAULTS = {
    "model.drive": ("word", "linear"),
    "model.v": ("float", 0.01),
    "model.eps0": ("float", 0.0),
    "model.A": ("float", 0.7),
    "model.Omega": ("float", math.pi / 200),
    "model.phi0": ("float", math.pi / 2),
    "model.delta": ("float", 0.0),
    "model.omega": ("floats", (1.0,)),
    "model.gamma": ("floats", (0.05,)),
    "model.coupling_angle": ("floats", (math.pi / 2,)),
    "initial.kind": ("word", "vacuum"),
    "initial.alpha": ("float", 1.0),
    "initial.theta": ("float", math.pi / 2),
    "initial.M": ("int", 6),
    "initial.seed": ("int", 0),
    "initial.jitter_amplitude": ("float", 1e-4),
    "initial.jitter_displacement": ("float", 1e-2),
    "initial.jitter_complex": ("bool", True),
    "integrator.t0": ("float", -300.0),
    "integrator.t1": ("float", 300.0),
    "integrator.dt": ("float", 0.02),
    "integrator.reg_epsilon": ("float", 1e-10),
    "integrator.record_stride": ("int", 10),
    "integrator.n_report": ("int", 8),
    "integrator.cond_ceiling": ("float", 1e15),
    "ed.n_trunc": ("int", 40),
    "spectrum.t0": ("float", -300.0),
    "spectrum.t1": ("float", 300.0),
    "spectrum.n_points": ("int", 6001),
    "spectrum.n_trunc": ("int", 40),
    "spectrum.n_levels": ("int", 12),
    "sweep.n_theta": ("int", 16),
    "sweep.plateau_core": ("float", 0.7),
    "convergence.multiplicities": ("ints", (6, 8, 10)),
}

_WORDS = {"model.drive": ("linear", "sinusoidal"), "initial.kind": ("vacuum", "cat")}


def _convert(key, kind, raw):
    raw = raw.strip()
    if kind == "word":
        if raw not in _WORDS[key]:
            raise ConfigError(f"{key}: expected one of {_WORDS[key]}, got {raw!r}")
        return raw
    if kind == "bool":
        low = raw.lower()
        if low not in ("true", "false"):
            raise ConfigError(f"{key}: expected true or false, got {raw!r}")
        return low == "true"
    if kind in ("floats", "ints"):
        items = [p for p in raw.split(",") if p.strip()]
        if not items:
            raise ConfigError(f"{key}: empty list")
        return tuple(_convert(key, kind[:-1], p) for p in items)
    val = safe_eval(raw)
    if kind == "int":
        if float(val) != int(val):
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(val)
    val = float(val)
    if not math.isfinite(val):
        raise ConfigError(f"{key}: non-finite value {raw!r}")
    return val


def format_value(val) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return repr(val)
    if isinstance(val, tuple):
        return ", ".join(format_value(v) for v in val)
    return str(val)


@dataclass
class ScenarioConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in DEFAULTS.items()})
    explicit: set = field(default_factory=set)

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **updates) -> "ScenarioConfig":
        """Copy with ``section__key=value`` overrides (double underscore for the dot)."""
        new = ScenarioConfig(dict(self.values), set(self.explicit))
        for name, val in updates.items():
            key = name.replace("__", ".")
            if key not in DEFAULTS:
                raise ConfigError(f"unknown key {key!r}")
            new.values[key] = val
            new.explicit.add(key)
        new.validate()
        return new

    # builders

    def model(self) -> ModelParams:
        v = self.values
        if v["model.drive"] == "linear":
            drive = LinearDrive(v["model.v"])
        else:
            drive = SinusoidalDrive(v["model.eps0"], v["model.A"], v["model.Omega"], v["model.phi0"])
        om, ga, th = v["model.omega"], v["model.gamma"], v["model.coupling_angle"]
        n = max(len(om), len(ga), len(th))

        def stretch(seq, name):
            if len(seq) == n:
                return seq
            if len(seq) == 1:
                return seq * n
            raise ConfigError(f"{name} has {len(seq)} entries, expected 1 or {n}")

        modes = tuple(ModeSpec(o, g, a) for o, g, a in zip(stretch(om, "model.omega"),
                                                            stretch(ga, "model.gamma"),
                                                            stretch(th, "model.coupling_angle")))
        return ModelParams(drive, modes, v["model.delta"])

    def jitter(self) -> JitterSpec:
        v = self.values
        return JitterSpec(v["initial.jitter_amplitude"], v["initial.jitter_displacement"],
                          v["initial.jitter_complex"])

    def initial_state(self, M: int | None = None, seed: int | None = None):
        v = self.values
        M = v["initial.M"] if M is None else M
        seed = v["initial.seed"] if seed is None else seed
        n_modes = self.model().n_modes
        if v["initial.kind"] == "vacuum":
            return init_vacuum(M, self.jitter(), seed, n_modes)
        return init_cat(self.cat(), M, self.jitter(), seed, n_modes)

    def cat(self) -> CatSpec:
        return CatSpec(self.values["initial.alpha"], self.values["initial.theta"])

    def integrator(self, dt: float | None = None) -> IntegratorConfig:
        v = self.values
        return IntegratorConfig(v["integrator.t0"], v["integrator.t1"],
                                v["integrator.dt"] if dt is None else dt,
                                v["integrator.reg_epsilon"], v["integrator.record_stride"],
                                v["integrator.n_report"], v["integrator.cond_ceiling"])

    def validate(self) -> None:
        """Build every object once so range errors surface at parse time."""
        try:
            self.model()
            self.integrator()
            self.jitter()
            if self.values["initial.kind"] == "cat":
                CatSpec(self.values["initial.alpha"], self.values["initial.theta"])
                if self.values["initial.M"] < 2 or self.values["initial.M"] % 2:
                    raise ConfigError("initial.M must be even and >= 2 for a cat state")
            elif self.values["initial.M"] < 1:
                raise ConfigError("initial.M must be >= 1")
            for key in ("ed.n_trunc", "spectrum.n_trunc", "spectrum.n_levels", "sweep.n_theta"):
                if self.values[key] < 1:
                    raise ConfigError(f"{key} must be positive")
            if self.values["spectrum.n_points"] < 3:
                raise ConfigError("spectrum.n_points must be >= 3")
            if not self.values["spectrum.t1"] > self.values["spectrum.t0"]:
                raise ConfigError("spectrum.t1 must exceed spectrum.t0")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def resolved(self) -> dict:
        """Every key with the value in force, for the run manifest."""
        return {k: self.values[k] for k in DEFAULTS}


def parse_text(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    cfg = ScenarioConfig() if base is None else ScenarioConfig(dict(base.values), set(base.explicit))
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        kind, _ = DEFAULTS[key]
        try:
            cfg.values[key] = _convert(key, kind, raw)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
        cfg.explicit.add(key)
    cfg.validate()
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_text(text)
