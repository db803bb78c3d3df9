"""CSV reports with ``# key=value`` metadata, sweep grids and config documents."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .model import ModelError, PathLossModel, SystemConfig

SWEEP_VARIABLES = ("x", "lambda", "radius", "alpha", "epsilon")


def fmt(value) -> str:
    """Shortest round-trip text for a number; ``inf``/``nan`` spelled plainly."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def parse_grid(spec: str) -> list[float]:
    """``lin:start:stop:count``, ``log:start:stop:count`` or ``v1,v2,...``."""
    text = spec.strip()
    kind, _, rest = text.partition(":")
    if kind in ("lin", "log"):
        parts = rest.split(":")
        if len(parts) != 3:
            raise ModelError(f"grid {spec!r} must look like {kind}:start:stop:count")
        start, stop = float(parts[0]), float(parts[1])
        try:
            count = int(parts[2])
        except ValueError:
            raise ModelError(f"grid count must be an integer in {spec!r}") from None
        if count < 1:
            raise ModelError("grid count must be >= 1")
        if kind == "lin":
            values = np.linspace(start, stop, count)
        else:
            if not (start > 0 and stop > 0):
                raise ModelError("log grid bounds must be > 0")
            values = np.logspace(math.log10(start), math.log10(stop), count)
        values = [float(v) for v in values]
    else:
        try:
            values = [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise ModelError(f"cannot parse grid {spec!r}") from None
    if not values:
        raise ModelError("grid is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ModelError("grid must be strictly increasing")
    return values


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    grid: tuple
    config: SystemConfig
    model: PathLossModel
    epsilon: float | None = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ModelError(f"cannot sweep {self.variable!r}; choose from {', '.join(SWEEP_VARIABLES)}")
        grid = tuple(float(v) for v in self.grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ModelError("sweep grid must be non-empty and strictly increasing")
        object.__setattr__(self, "grid", grid)

    def point(self, value):
        """(config, model, epsilon) with the swept field set to ``value``."""
        config, model, eps = self.config, self.model, self.epsilon
        if self.variable == "lambda":
            config = config.replace(lam=value)
        elif self.variable == "radius":
            config = config.replace(radius=value)
        elif self.variable == "alpha":
            model = PathLossModel(model.kind, value, model.d0)
        elif self.variable == "epsilon":
            eps = value
        return config, model, eps


@dataclass
class CsvReport:
    header: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: list[tuple[str, object]] = field(default_factory=list)

    def add_row(self, row):
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} fields, header has {len(self.header)}")
        self.rows.append(list(row))

    def meta(self, key, value):
        self.metadata.append((key, value))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# tool=obfcap {__version__}\n")
        for key, value in self.metadata:
            buf.write(f"# {key}={fmt(value)}\n")
        buf.write(",".join(self.header) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, (np.floating, float)):
                v = float(v)
                return v if math.isfinite(v) else fmt(v)
            if isinstance(v, (np.integer, np.bool_)):
                return v.item()
            return v

        doc = {
            "tool": f"obfcap {__version__}",
            "metadata": {k: clean(v) for k, v in self.metadata},
            "rows": [dict(zip(self.header, map(clean, row))) for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"


CONFIG_KEYS = ("lambda", "radius", "beams", "power", "model", "alpha", "d0")


def read_config_document(path) -> dict:
    """Flat key-value document, JSON or ``key=value`` lines (``#`` comments)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
    else:
        doc = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ModelError(f"expected key=value, got {line!r}")
            doc[key.strip()] = value.strip()
    unknown = set(doc) - set(CONFIG_KEYS)
    if unknown:
        raise ModelError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return doc


def config_from_mapping(doc: dict) -> tuple[SystemConfig, PathLossModel]:
    """Build (SystemConfig, PathLossModel) from the flat keys in CONFIG_KEYS."""
    radius = doc.get("radius", 1.0)
    radius = math.inf if str(radius).strip().lower() in ("inf", "infinite") else float(radius)
    config = SystemConfig(
        lam=float(doc["lambda"]), radius=radius,
        beams=int(doc.get("beams", 2)), power=float(doc.get("power", 1.0)),
    )
    alpha = float(doc.get("alpha", 4.0))
    name = str(doc.get("model", "unbounded"))
    if "d0" in doc and name == "guard":
        name = f"guard:{doc['d0']}"
    return config, PathLossModel.parse(name, alpha)
