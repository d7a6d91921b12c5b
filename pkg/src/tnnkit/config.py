"""Run configuration: a JSON document validated before any compute.

Example::

    {
      "seed": 7,
      "dataset": {"path": "train.csv", "format": "csv-labeled", "header": false},
      "encoder": {"T": 8, "v_max": 255, "mode": "direct-latency", "normalization": "global"},
      "series": null,
      "network": {"layers": [{"columns": [{"q": 4, "theta": 12}]}]},
      "learning": {"mu_capture": 1, "mu_backoff": 1, "mu_search": 0.03125, "init": "uniform-random"},
      "epochs": 10,
      "hardware": {"node": "45nm", "mode": "std", "emit": "final", "cap": 4096, "spot_checks": 32}
    }

``dataset`` may instead be ``{"synthetic": {"kind": ..., "n_per_class": ...}}``.
``series`` switches to sliding-window time-series mode
(``{"window": 16, "stride": 4}``).  Column ``p`` and ``T`` and a layer's
``input_map`` are optional: by default each column reads the whole layer
input, and deeper layers take ``T`` from the upstream horizon.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .column import ColumnConfig
from .data import FORMATS, KINDS
from .hw.emit import DEFAULT_EMISSION_CAP
from .hw.ppa import tech_model
from .learn import StdpParams
from .network import LayerSpec, NetworkSpec
from .spikes import DomainError, EncoderConfig

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "apply_override"]


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "seed": 0,
    "dataset": None,
    "encoder": {"T": 8, "v_max": 255.0, "mode": "direct-latency", "normalization": "global"},
    "series": None,
    "network": {"layers": [{"columns": [{"q": 4, "theta": 12}]}]},
    "learning": {"mu_capture": 1.0, "mu_backoff": 1.0, "mu_search": 0.03125, "init": "uniform-random",
                 "init_value": None},
    "epochs": 10,
    "hardware": {"node": "45nm", "mode": "std", "emit": "final", "cap": DEFAULT_EMISSION_CAP, "spot_checks": 32},
}

_TOP_KEYS = set(DEFAULTS)
_COLUMN_KEYS = {"p", "q", "theta", "T", "model", "w_max", "horizon"}


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def apply_override(doc: dict, key: str, value) -> dict:
    """Set one sweep parameter on a raw config document (returns a copy).

    Short names: ``q``, ``theta``, ``model``, ``w_max`` apply to every
    column; ``T`` and ``v_max`` to the encoder; ``mu_*`` to learning;
    ``p``/``stride`` to the series window; ``epochs``/``seed`` top level.
    Anything else is a dotted path such as ``network.layers.0.columns.0.q``.
    """
    doc = copy.deepcopy(doc)
    if key in ("q", "theta", "model", "w_max"):
        for layer in doc["network"]["layers"]:
            for col in layer["columns"]:
                col[key] = value
    elif key in ("T", "v_max", "mode", "normalization"):
        doc["encoder"][key] = value
    elif key in ("mu_capture", "mu_backoff", "mu_search"):
        doc["learning"][key] = value
    elif key in ("p", "stride"):
        if not doc.get("series"):
            raise ConfigError(f"sweep parameter {key!r} needs series mode")
        doc["series"]["window" if key == "p" else "stride"] = value
    elif key in ("epochs", "seed"):
        doc[key] = value
    else:
        node = doc
        parts = key.split(".")
        try:
            for part in parts[:-1]:
                node = node[int(part)] if isinstance(node, list) else node[part]
            if isinstance(node, list):
                node[int(parts[-1])] = value
            else:
                node[parts[-1]] = value
        except (KeyError, IndexError, ValueError, TypeError):
            raise ConfigError(f"cannot apply sweep parameter {key!r}") from None
    return doc


@dataclass
class RunConfig:
    doc: dict
    base_dir: Path

    @classmethod
    def from_dict(cls, doc: dict, base_dir=".") -> "RunConfig":
        unknown = set(doc) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(_merge(DEFAULTS, doc), Path(base_dir))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be an object")
        return cls.from_dict(doc, path.parent)

    def with_override(self, key: str, value) -> "RunConfig":
        cfg = RunConfig(apply_override(self.doc, key, value), self.base_dir)
        cfg.validate()
        return cfg

    # --- typed views -----------------------------------------------------

    @property
    def seed(self) -> int:
        return int(self.doc["seed"])

    @property
    def epochs(self) -> int:
        return int(self.doc["epochs"])

    @property
    def encoder(self) -> EncoderConfig:
        return EncoderConfig(**self.doc["encoder"])

    @property
    def series(self):
        s = self.doc["series"]
        return None if not s else (int(s["window"]), int(s.get("stride", 1)))

    @property
    def learning(self) -> StdpParams:
        ln = self.doc["learning"]
        return StdpParams(ln["mu_capture"], ln["mu_backoff"], ln["mu_search"], self.seed)

    @property
    def hardware(self) -> dict:
        return self.doc["hardware"]

    @property
    def dataset_path(self):
        ds = self.doc["dataset"]
        if ds is None or "path" not in ds:
            return None
        return (self.base_dir / ds["path"]).resolve()

    @property
    def test_path(self):
        ds = self.doc["dataset"]
        if ds is None or not ds.get("test_path"):
            return None
        return (self.base_dir / ds["test_path"]).resolve()

    def config_hash(self) -> str:
        canon = json.dumps(self.doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def input_width(self, n_features: int) -> int:
        """Spike-vector width seen by layer 0 for raw samples of ``n_features`` values."""
        base = self.series[0] if self.series else n_features
        return base * (2 if self.encoder.mode == "on-off-center" else 1)

    def network_spec(self, input_width: int) -> NetworkSpec:
        try:
            layers = []
            width = input_width
            T = self.encoder.T
            for entry in self.doc["network"]["layers"]:
                cols = []
                slices = entry.get("input_map")
                for k, col in enumerate(entry["columns"]):
                    unknown = set(col) - _COLUMN_KEYS
                    if unknown:
                        raise ConfigError(f"unknown column keys: {sorted(unknown)}")
                    if slices is not None:
                        start, stop = slices[k]
                    else:
                        start, stop = 0, width
                    params = {"p": stop - start, "T": T, **col}
                    cols.append(ColumnConfig(**params))
                layer = LayerSpec(cols, slices if slices is not None else [(0, width)] * len(cols))
                layers.append(layer)
                width = layer.width
                T = layer.horizon
            return NetworkSpec(input_width, layers)
        except DomainError as exc:
            raise ConfigError(f"network: {exc}") from None
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"network: malformed network section ({exc})") from None

    # --- validation ------------------------------------------------------

    def validate(self) -> None:
        d = self.doc
        try:
            self.encoder
            self.learning
            if int(d["epochs"]) < 1:
                raise ConfigError("epochs must be >= 1")
            if not 0 <= int(d["seed"]) < 2**64:
                raise ConfigError("seed must be a 64-bit unsigned integer")
            hw = d["hardware"]
            tech_model(hw["node"], hw["mode"])
            if hw["emit"] not in ("final", "all"):
                raise ConfigError("hardware.emit must be 'final' or 'all'")
            if d["learning"]["init"] not in ("uniform-random", "constant"):
                raise ConfigError("learning.init must be 'uniform-random' or 'constant'")
            if d["learning"]["init"] == "constant" and d["learning"].get("init_value") is None:
                raise ConfigError("constant init needs learning.init_value")
            if self.series and (self.series[0] < 1 or self.series[1] < 1):
                raise ConfigError("series window and stride must be >= 1")
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed config: {exc}") from None

        ds = d["dataset"]
        if not isinstance(ds, dict):
            raise ConfigError("dataset section is required")
        if "synthetic" in ds:
            syn = ds["synthetic"]
            if syn.get("kind") not in KINDS:
                raise ConfigError(f"dataset.synthetic.kind must be one of {KINDS}")
        else:
            if "path" not in ds:
                raise ConfigError("dataset needs 'path' or 'synthetic'")
            if ds.get("format", "csv-labeled") not in FORMATS:
                raise ConfigError(f"dataset.format must be one of {FORMATS}")
            for p in (self.dataset_path, self.test_path):
                if p is not None and not p.is_file():
                    raise ConfigError(f"dataset file not found: {p}")
        for entry in d["network"]["layers"]:
            if not entry.get("columns"):
                raise ConfigError("every layer needs at least one column")
