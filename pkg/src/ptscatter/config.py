"""Strict JSON run configurations."""

import json
import math
from dataclasses import asdict, dataclass, fields

from .errors import GrammarError, InputError, SchemaError
from .scattering import PhysParams
from .spinflip import DeviceConfig
from .sweep import SweepSpec

_REQUIRED = ("v_r_ev", "v_i_ev", "l_um", "config", "e_min", "e_max")


@dataclass(frozen=True)
class RunConfig:
    v_r_ev: float
    v_i_ev: float
    l_um: float
    config: str
    e_min: float
    e_max: float
    mass_ratio: float = 1.0
    e0_ev: float = 1.0
    n_points: int = 4000
    out_dir: str = "ptscatter_out"

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.type in (float, "float"):
                if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                    raise SchemaError(f.name, f"expected a finite number, got {value!r}")
                object.__setattr__(self, f.name, float(value))
            elif f.type in (int, "int"):
                if isinstance(value, bool) or not isinstance(value, int):
                    raise SchemaError(f.name, f"expected an integer, got {value!r}")
            elif not isinstance(value, str):
                raise SchemaError(f.name, f"expected a string, got {value!r}")
        object.__setattr__(self, "config", DeviceConfig.parse(self.config).name)
        try:
            self.to_spec()
        except (SchemaError, GrammarError):
            raise
        except InputError as exc:
            raise SchemaError(_blame(str(exc)), str(exc)) from None

    def params(self):
        return PhysParams(self.v_r_ev, self.v_i_ev, self.l_um, self.mass_ratio, self.e0_ev)

    def device(self):
        return DeviceConfig.parse(self.config)

    def to_spec(self):
        return SweepSpec(self.params(), self.device(), self.e_min, self.e_max, self.n_points)

    def to_json(self):
        return json.dumps(asdict(self), indent=2)


def _blame(message):
    # map a validation message to the offending field for SchemaError.path
    for key, name in (("v_imag", "v_i_ev"), ("length", "l_um"), ("mass_ratio", "mass_ratio"),
                      ("e0", "e0_ev"), ("n_points", "n_points"), ("e_min", "e_min")):
        if key in message:
            return name
    return "$"


def parse_run_config(text):
    """Parse a JSON run configuration with a strict schema.

    Raises
    ------
    SchemaError
        Malformed JSON, unknown or missing fields, wrong types or invalid values;
        ``path`` names the field.
    GrammarError
        If ``config`` is not a valid device name.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("$", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("$", "top level must be an object")
    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise SchemaError(key, "unknown field")
    for key in _REQUIRED:
        if key not in data:
            raise SchemaError(key, "missing required field")
    return RunConfig(**data)
