"""Run configuration: a flat dotted key-value format plus shipped presets.

Syntax: one ``section.key = value`` per line, ``#`` starts a comment.
Unknown keys are rejected so typos fail loudly.  Lists are comma-separated.
The full schema is documented in the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .model import ModelParams, SavParams
from .uniform import UniformSchemeParams
from .variable import VariableSchemeParams

UNIFORM_KINDS = ("UL", "UW")
VARIABLE_KINDS = ("VL", "VW")
SCHEME_KINDS = UNIFORM_KINDS + VARIABLE_KINDS
IC_KINDS = ("abs_sin", "random_uniform", "two_circles", "expression")

TWO_PI = 2.0 * math.pi

# circle centers/radii of the two-grain coarsening experiment
DEFAULT_CIRCLES = (
    (math.pi - 0.7, math.pi - 0.6, 1.5),
    (math.pi + 1.65, math.pi + 1.6, 0.7),
)

_SCHEMA: dict[str, tuple] = {
    # key: (type, default)   -- default None means required (by its mode)
    "run.name": (str, ""),
    "run.seed": (int, 0),
    "grid.dim": (int, None),
    "grid.n": ("intlist", None),
    "grid.length": ("floatlist", [TWO_PI]),
    "model.epsilon": (float, None),
    "model.alpha": (float, 0.0),
    "model.beta": (float, 6e-4),
    "model.mobility": (float, 1.0),
    "model.regularization": (str, "linear"),
    "model.eta": (float, 1e-6),
    "model.eta_flux": (float, 1e-2),
    "model.dealias": (bool, False),
    "model.willmore_pointwise": (bool, False),
    "scheme.kind": (str, None),
    "scheme.theta": (float, None),
    "scheme.s1": (float, 4.0),
    "scheme.s2": (float, 4.0),
    "scheme.s3": (float, 0.01),
    "scheme.bootstrap_substeps": (int, 8),
    "scheme.newton_tol": (float, 1e-12),
    "scheme.newton_max_iters": (int, 50),
    "sav.c0": (float, 1000.0),
    "sav.lambda1": (float, 0.0),
    "sav.lambda2": (float, 4.0),
    "sav.lambda3": (float, 0.01),
    "steps.T": (float, None),
    "steps.n": (int, None),
    "steps.kind": (str, "uniform"),
    "steps.delta": (float, 0.1),
    "steps.gamma_cap": (float, 5.0),
    "ic.kind": (str, None),
    "ic.mean": (float, 0.0),
    "ic.amplitude": (float, 0.001),
    "ic.circles": (str, ""),
    "ic.expression": (str, ""),
    "mms.enabled": (bool, False),
    "mms.tau_list": ("floatlist", []),
    "output.dir": (str, None),
    "output.snapshot_times": ("floatlist", []),
    "output.log_every": (int, 1),
}


def _convert(key: str, kind, raw: str):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw.strip()
        if kind == "intlist":
            return [int(v) for v in raw.split(",") if v.strip()]
        if kind == "floatlist":
            return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    raise ConfigError(f"unhandled type for {key}")


@dataclass
class RunConfig:
    """Validated run description; build_* helpers hand out solver objects."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def name(self) -> str:
        return self.values["run.name"]

    @property
    def seed(self) -> int:
        return self.values["run.seed"]

    @property
    def scheme_kind(self) -> str:
        return self.values["scheme.kind"]

    @property
    def is_uniform(self) -> bool:
        return self.scheme_kind in UNIFORM_KINDS

    @property
    def is_mms(self) -> bool:
        return self.values["mms.enabled"]

    def model_params(self) -> ModelParams:
        v = self.values
        return ModelParams(
            epsilon=v["model.epsilon"], alpha=v["model.alpha"], beta=v["model.beta"],
            mobility=v["model.mobility"], regularization=v["model.regularization"],
            eta=v["model.eta"], eta_flux=v["model.eta_flux"],
            dealias=v["model.dealias"],
            willmore_pointwise=v["model.willmore_pointwise"])

    def sav_params(self) -> SavParams:
        v = self.values
        return SavParams(c0=v["sav.c0"], lambda1=v["sav.lambda1"],
                         lambda2=v["sav.lambda2"], lambda3=v["sav.lambda3"])

    def uniform_scheme(self) -> UniformSchemeParams:
        v = self.values
        tau = v["steps.T"] / v["steps.n"]
        return UniformSchemeParams(
            theta=v["scheme.theta"], tau=tau, s1=v["scheme.s1"], s2=v["scheme.s2"],
            s3=v["scheme.s3"], sav=self.sav_params(),
            bootstrap_substeps=v["scheme.bootstrap_substeps"])

    def variable_scheme(self) -> VariableSchemeParams:
        v = self.values
        return VariableSchemeParams(
            theta=v["scheme.theta"], sav=self.sav_params(),
            newton_tol=v["scheme.newton_tol"],
            newton_max_iters=v["scheme.newton_max_iters"],
            gamma_cap=v["steps.gamma_cap"])

    def circles(self):
        raw = self.values["ic.circles"]
        if not raw:
            return DEFAULT_CIRCLES
        out = []
        for part in raw.split(";"):
            x, y, r = (float(v) for v in part.split(","))
            out.append((x, y, r))
        return tuple(out)


def parse_config(text: str, name: str = "") -> RunConfig:
    values = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, _SCHEMA[key][0], raw)

    for key, (_, default) in _SCHEMA.items():
        if key in values:
            continue
        values[key] = default

    cfg = RunConfig(values=values)
    if not cfg.values["run.name"]:
        cfg.values["run.name"] = name or "run"
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    required = ["grid.dim", "grid.n", "model.epsilon", "scheme.kind",
                "scheme.theta", "steps.T", "ic.kind", "output.dir"]
    if not v["mms.enabled"]:
        required.append("steps.n")
    missing = [k for k in required if v[k] is None]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    if v["scheme.kind"] not in SCHEME_KINDS:
        raise ConfigError(f"scheme.kind must be one of {SCHEME_KINDS}")
    if v["ic.kind"] not in IC_KINDS:
        raise ConfigError(f"ic.kind must be one of {IC_KINDS}")
    if v["ic.kind"] == "expression" and not v["ic.expression"]:
        raise ConfigError("ic.kind=expression needs ic.expression")
    if v["steps.kind"] not in ("uniform", "random_admissible"):
        raise ConfigError("steps.kind must be uniform or random_admissible")
    if v["mms.enabled"]:
        if v["grid.dim"] != 1:
            raise ConfigError("manufactured-solution runs are one-dimensional")
        if not v["mms.tau_list"]:
            raise ConfigError("mms.enabled needs mms.tau_list")
        if v["scheme.kind"] not in ("UL", "VL"):
            raise ConfigError("manufactured-solution runs support UL and VL")
    dim = v["grid.dim"]
    if dim not in (1, 2):
        raise ConfigError("grid.dim must be 1 or 2")
    if len(v["grid.n"]) not in (1, dim):
        raise ConfigError("grid.n must have one entry or one per dimension")
    if len(v["grid.length"]) not in (1, dim):
        raise ConfigError("grid.length must have one entry or one per dimension")
    kind = v["model.regularization"]
    if kind not in ("linear", "willmore"):
        raise ConfigError("model.regularization must be linear or willmore")
    want = "willmore" if v["scheme.kind"] in ("UW", "VW") else "linear"
    if kind != want:
        raise ConfigError(
            f"scheme.kind {v['scheme.kind']} needs model.regularization={want}")
    times = v["output.snapshot_times"]
    if any(t < 0 or t > v["steps.T"] + 1e-12 for t in times):
        raise ConfigError("output.snapshot_times must lie in [0, steps.T]")


def load_config(path) -> RunConfig:
    """Parse a config file; the run name defaults to the file stem."""
    from pathlib import Path

    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, name=p.stem)


# ---------------------------------------------------------------------------
# presets reproducing the four reference experiments

_EX1_COMMON = """
grid.dim = 1
grid.n = 128
model.epsilon = 0.2
model.alpha = 0.0
model.beta = 6e-4
scheme.s1 = 0.0
scheme.s2 = 4.0
steps.T = 0.15
ic.kind = abs_sin
mms.enabled = true
mms.tau_list = 1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4
"""

_EX2_COMMON = """
grid.dim = 1
grid.n = 128
model.epsilon = 0.2
model.beta = 6e-4
"""

_EX3_COMMON = """
grid.dim = 2
grid.n = 128
model.epsilon = 0.2
model.beta = 6e-4
scheme.theta = 0.75
ic.kind = two_circles
steps.T = 2.0
output.snapshot_times = 0.0, 6.5e-2, 1.99e-1, 2.0
"""

PRESETS: dict[str, str] = {
    "example1_UL_theta05": _EX1_COMMON + "scheme.kind = UL\nscheme.theta = 0.5\noutput.dir = runs/example1_UL_theta05\n",
    "example1_UL_theta075": _EX1_COMMON + "scheme.kind = UL\nscheme.theta = 0.75\noutput.dir = runs/example1_UL_theta075\n",
    "example1_UL_theta1": _EX1_COMMON + "scheme.kind = UL\nscheme.theta = 1.0\noutput.dir = runs/example1_UL_theta1\n",
    "example1_VL_theta075": _EX1_COMMON + "scheme.kind = VL\nscheme.theta = 0.75\noutput.dir = runs/example1_VL_theta075\n",
    "example2_UL_abssin": _EX2_COMMON + """
scheme.kind = UL
scheme.theta = 0.75
model.alpha = 0.05
steps.T = 1.0
steps.n = 1000
ic.kind = abs_sin
output.snapshot_times = 0.0, 0.5, 1.0
output.dir = runs/example2_UL_abssin
""",
    "example2_UL_random": _EX2_COMMON + """
scheme.kind = UL
scheme.theta = 0.75
model.alpha = 0.05
steps.T = 1.0
steps.n = 1000
ic.kind = random_uniform
ic.mean = -0.3
ic.amplitude = 0.001
run.seed = 2024
output.dir = runs/example2_UL_random
""",
    "example2_VL_abssin": _EX2_COMMON + """
scheme.kind = VL
scheme.theta = 0.75
model.alpha = 0.05
steps.T = 0.06
steps.n = 600
steps.kind = random_admissible
run.seed = 7
ic.kind = abs_sin
output.dir = runs/example2_VL_abssin
""",
    "example2_VL_random": _EX2_COMMON + """
scheme.kind = VL
scheme.theta = 0.75
model.alpha = 0.05
steps.T = 0.06
steps.n = 600
steps.kind = random_admissible
run.seed = 8
ic.kind = random_uniform
ic.mean = -0.3
ic.amplitude = 0.001
output.dir = runs/example2_VL_random
""",
    "example3_UL_twocircles": _EX3_COMMON + """
scheme.kind = UL
model.alpha = 0.0
steps.n = 2000
output.dir = runs/example3_UL_twocircles
""",
    "example3_UL_twocircles_aniso": _EX3_COMMON + """
scheme.kind = UL
model.alpha = 0.05
steps.n = 2000
output.dir = runs/example3_UL_twocircles_aniso
""",
    "example3_VL_twocircles": _EX3_COMMON + """
scheme.kind = VL
model.alpha = 0.0
steps.n = 2000
output.dir = runs/example3_VL_twocircles
""",
    "example4_UL_iso": """
grid.dim = 2
grid.n = 128
model.epsilon = 0.2
model.beta = 6e-4
model.alpha = 0.0
scheme.kind = UL
scheme.theta = 0.75
steps.T = 10.0
steps.n = 200
ic.kind = random_uniform
ic.mean = -0.5
ic.amplitude = 0.001
run.seed = 42
output.snapshot_times = 0.0, 1.115, 3.12, 3.52, 10.0
output.dir = runs/example4_UL_iso
""",
    "example4_UL_aniso": """
grid.dim = 2
grid.n = 128
model.epsilon = 0.2
model.beta = 6e-4
model.alpha = 0.2
scheme.kind = UL
scheme.theta = 0.75
steps.T = 10.0
steps.n = 200
ic.kind = random_uniform
ic.mean = -0.5
ic.amplitude = 0.001
run.seed = 42
output.snapshot_times = 0.0, 0.965, 2.31, 2.74, 10.0
output.dir = runs/example4_UL_aniso
""",
}


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return parse_config(PRESETS[name], name=name)


def resolve_config(spec: str) -> RunConfig:
    """Treat ``spec`` as a file path if it exists, else as a preset name."""
    from pathlib import Path

    if Path(spec).is_file():
        return load_config(spec)
    return load_preset(spec)
