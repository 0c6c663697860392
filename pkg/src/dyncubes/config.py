"""Experiment configuration files.

Flat INI text read with :mod:`configparser`::

    [experiment]
    kind = SATURATION
    name = skew-sat
    d = 2
    seed = 1

    [system]
    kind = AFFINE_SKEW
    alpha = 0.6180339887498949
    dim = 2

    [factor]
    kind = SKEW_TRUNCATE
    k = 1

    [schedule]
    1 = 25, 5
    2 = 50, 10, 1

Schedule lines are ``N, grid[, orbit_len]``.  Points are comma separated
floats for torus systems and ``L``/``R`` with an optional ``@steps`` suffix
for the Sturmian system (the critical point 0 in that coding).
"""
from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, replace
from typing import Optional

from .sampler import SamplingBudget, check_schedule
from .systems import (
    GOLDEN,
    Convention,
    FactorKind,
    FactorMapSpec,
    Kind,
    SymbolicPoint,
    SystemError_,
    SystemSpec,
)

EXPERIMENTS = ("CUBE_SAMPLE", "RP_ESTIMATE", "SATURATION", "FACE_SATURATION", "COMPLETION", "STURMIAN_CEX")
NEEDS_FACTOR = ("SATURATION", "FACE_SATURATION")
NEEDS_X = ("RP_ESTIMATE", "FACE_SATURATION")


class ConfigError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    name: str = "run"
    d: int = 2
    seed: int = 0
    tol: float = 0.05
    delta_match: float = 0.01
    factor_c: float = 3.0
    window: int = 30
    n_trials: int = 10
    system_kind: str = "ROTATION"
    alpha: float = GOLDEN
    dim: int = 1
    factor_kind: Optional[str] = None
    factor_k: int = 0
    schedule: tuple = ((10, 10, 1),)
    down: Optional[tuple] = None
    x: Optional[str] = None
    y: Optional[str] = None

    # -- derived objects -----------------------------------------------------
    def system(self) -> SystemSpec:
        kind = Kind(self.system_kind)
        dim = self.dim if kind is Kind.AFFINE_SKEW else 1
        return SystemSpec(kind, self.alpha, dim)

    def factor(self) -> FactorMapSpec:
        sys = self.system()
        kind = FactorKind(self.factor_kind or "IDENTITY")
        if kind is FactorKind.IDENTITY:
            return FactorMapSpec.identity(sys)
        if kind is FactorKind.SKEW_TRUNCATE:
            return FactorMapSpec.truncate(sys, self.factor_k)
        return FactorMapSpec.sturmian_to_rotation(sys)

    def budgets(self) -> list[SamplingBudget]:
        return [SamplingBudget(*b) for b in self.schedule]

    def down_budget(self) -> Optional[SamplingBudget]:
        return SamplingBudget(*self.down) if self.down else None

    def point(self, which: str):
        text = getattr(self, which)
        if text is None:
            return None
        return parse_point(text, self.system())

    def to_dict(self) -> dict:
        return asdict(self)


def parse_point(text: str, sys: SystemSpec):
    text = text.strip()
    if sys.kind is Kind.STURMIAN:
        conv, _, steps = text.partition("@")
        conv = conv.strip().upper()
        if conv not in ("L", "R"):
            raise SystemError_(f"Sturmian point must be L or R with optional @steps, got {text!r}")
        c = Convention.LEFT_CLOSED if conv == "L" else Convention.RIGHT_CLOSED
        return SymbolicPoint(0.0, c, int(steps) if steps else 0)
    vals = [float(v) for v in text.split(",")]
    if len(vals) != sys.dim:
        raise SystemError_(f"point {text!r} needs {sys.dim} coordinates")
    return vals


def _line_index(text: str) -> dict:
    """``(section, key) -> line number`` (1-based), sections map to ``(section, None)``."""
    idx = {}
    sec = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            sec = line[1:-1].strip()
            idx[(sec, None)] = no
        elif sec is not None:
            key = line.split("=", 1)[0].split(":", 1)[0].strip().lower()
            idx[(sec, key)] = no
    return idx


def parse_config(text: str, experiment: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate; ``experiment`` fills in or must match ``[experiment] kind``."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.ParsingError as e:
        line = e.errors[0][0] if e.errors else None
        raise ConfigError(f"cannot parse: {e.message.splitlines()[0]}", line) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as e:
        raise ConfigError(str(e).split(": ", 1)[-1], e.lineno) from None
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside of any section", e.lineno) from None
    lines = _line_index(text)
    known = {"experiment", "system", "factor", "schedule", "down", "query"}
    for sec in cp.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]", lines.get((sec, None)))

    kw: dict = {}

    def get(sec, key, conv, dest=None):
        if cp.has_option(sec, key):
            raw = cp.get(sec, key)
            try:
                kw[dest or key] = conv(raw.strip())
            except (ValueError, TypeError):
                raise ConfigError(f"bad value for {key}: {raw!r}", lines.get((sec, key))) from None

    allowed = {
        "experiment": {"kind", "name", "d", "seed", "tol", "delta_match", "factor_c", "window", "n_trials"},
        "system": {"kind", "alpha", "dim"},
        "factor": {"kind", "k", "truncate_k"},
        "query": {"x", "y"},
    }
    for sec, keys in allowed.items():
        if cp.has_section(sec):
            for key in cp.options(sec):
                if key not in keys:
                    raise ConfigError(f"unknown key {key!r} in [{sec}]", lines.get((sec, key)))

    get("experiment", "kind", lambda s: s.upper(), "experiment")
    get("experiment", "name", str)
    for key in ("d", "seed", "window", "n_trials"):
        get("experiment", key, int)
    for key in ("tol", "delta_match", "factor_c"):
        get("experiment", key, float)
    get("system", "kind", lambda s: Kind(s.upper()).value, "system_kind")
    get("system", "alpha", float)
    get("system", "dim", int)
    get("factor", "kind", lambda s: FactorKind(s.upper()).value, "factor_kind")
    get("factor", "k", int, "factor_k")
    if cp.has_option("factor", "truncate_k"):
        if cp.has_option("factor", "k"):
            raise ConfigError("give k or truncate_k, not both", lines.get(("factor", "truncate_k")))
        get("factor", "truncate_k", int, "factor_k")
    get("query", "x", str)
    get("query", "y", str)

    def triples(sec):
        out = []
        for key in sorted(cp.options(sec), key=lambda k: (lines.get((sec, k), 0))):
            raw = cp.get(sec, key)
            try:
                parts = [int(p) for p in raw.split(",")]
                if not 1 <= len(parts) <= 3:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"budget must be 'N, grid[, orbit_len]', got {raw!r}",
                                  lines.get((sec, key))) from None
            out.append(tuple(parts + [1] * (3 - len(parts))))
        return tuple(out)

    if cp.has_section("schedule"):
        kw["schedule"] = triples("schedule")
    if cp.has_section("down"):
        down = triples("down")
        if len(down) != 1:
            raise ConfigError("[down] holds exactly one budget", lines.get(("down", None)))
        kw["down"] = down[0]

    if experiment is not None:
        experiment = experiment.upper()
        if kw.setdefault("experiment", experiment) != experiment:
            raise ConfigError(f"config is for {kw['experiment']}, not {experiment}",
                              lines.get(("experiment", "kind")))
    if "experiment" not in kw:
        raise ConfigError("missing [experiment] kind", lines.get(("experiment", None)))
    cfg = ExperimentConfig(**kw)
    validate(cfg, lines)
    return cfg


def validate(cfg: ExperimentConfig, lines: Optional[dict] = None) -> None:
    lines = lines or {}

    def fail(msg, sec, key=None):
        raise ConfigError(msg, lines.get((sec, key)) or lines.get((sec, None)))

    if cfg.experiment not in EXPERIMENTS:
        fail(f"unknown experiment {cfg.experiment!r}", "experiment", "kind")
    if cfg.d < 1:
        fail("d must be >= 1", "experiment", "d")
    if cfg.tol <= 0 or cfg.delta_match <= 0 or cfg.factor_c <= 0:
        fail("tol, delta_match and factor_c must be positive", "experiment")
    if cfg.window < 1 or cfg.n_trials < 1:
        fail("window and n_trials must be >= 1", "experiment")
    try:
        sys = cfg.system()
    except (SystemError_, ValueError) as e:
        fail(str(e), "system")
    if cfg.experiment == "STURMIAN_CEX" and cfg.d not in (2, 3):
        fail("STURMIAN_CEX needs d in {2, 3}", "experiment", "d")
    if cfg.experiment in NEEDS_FACTOR:
        if cfg.factor_kind is None:
            fail(f"{cfg.experiment} needs a [factor] block", "factor")
        try:
            cfg.factor()
        except (SystemError_, ValueError) as e:
            fail(str(e), "factor")
    try:
        budgets = cfg.budgets()
        check_schedule(budgets)
        if cfg.down:
            cfg.down_budget()
    except SystemError_ as e:
        fail(str(e), "schedule")
    for which, needed in (("x", cfg.experiment in NEEDS_X), ("y", cfg.experiment == "RP_ESTIMATE")):
        if needed and getattr(cfg, which) is None:
            fail(f"{cfg.experiment} needs [query] {which}", "query")
        if getattr(cfg, which) is not None:
            try:
                parse_point(getattr(cfg, which), sys)
            except (SystemError_, ValueError) as e:
                fail(str(e), "query", which)


def emit_config(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp["experiment"] = {
        "kind": cfg.experiment, "name": cfg.name, "d": str(cfg.d), "seed": str(cfg.seed),
        "tol": repr(cfg.tol), "delta_match": repr(cfg.delta_match), "factor_c": repr(cfg.factor_c),
        "window": str(cfg.window), "n_trials": str(cfg.n_trials),
    }
    cp["system"] = {"kind": cfg.system_kind, "alpha": repr(cfg.alpha), "dim": str(cfg.dim)}
    if cfg.factor_kind is not None:
        cp["factor"] = {"kind": cfg.factor_kind, "k": str(cfg.factor_k)}
    cp["schedule"] = {str(i): ", ".join(str(v) for v in b) for i, b in enumerate(cfg.schedule, 1)}
    if cfg.down is not None:
        cp["down"] = {"1": ", ".join(str(v) for v in cfg.down)}
    q = {k: getattr(cfg, k) for k in ("x", "y") if getattr(cfg, k) is not None}
    if q:
        cp["query"] = q
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def load_config(path: str, experiment: Optional[str] = None) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), experiment)


def default_config(experiment: str, **overrides) -> ExperimentConfig:
    """A small runnable configuration for each experiment kind."""
    base = {
        "CUBE_SAMPLE": dict(name="cube", schedule=((10, 10, 1),)),
        "RP_ESTIMATE": dict(name="rp", d=1, system_kind="AFFINE_SKEW", dim=2,
                            schedule=((25, 10, 1), (50, 20, 1), (100, 40, 1)), x="0, 0", y="0, 0.5"),
        "SATURATION": dict(name="saturation", system_kind="AFFINE_SKEW", dim=2,
                           factor_kind="SKEW_TRUNCATE", factor_k=1,
                           schedule=((25, 5, 1), (50, 10, 1), (100, 20, 1), (200, 40, 1))),
        "FACE_SATURATION": dict(name="face-saturation", system_kind="AFFINE_SKEW", dim=2,
                                factor_kind="SKEW_TRUNCATE", factor_k=1, x="0, 0",
                                schedule=((200, 1, 1), (400, 1, 1), (800, 1, 1))),
        "COMPLETION": dict(name="completion", schedule=((50, 10, 1),)),
        "STURMIAN_CEX": dict(name="sturmian-cex", system_kind="STURMIAN",
                             schedule=((30, 1, 200), (100, 1, 600), (300, 1, 2000))),
    }[experiment.upper()]
    base.update(overrides)
    cfg = ExperimentConfig(experiment=experiment.upper(), **base)
    validate(cfg)
    return cfg


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    kw = {k: v for k, v in kw.items() if v is not None}
    if not kw:
        return cfg
    out = replace(cfg, **kw)
    validate(out)
    return out
