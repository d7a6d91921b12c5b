"""train -> label -> evaluate -> emit -> spot-check -> PPA, and DSE sweeps."""

from __future__ import annotations

import itertools
import json
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .data import DataError, Dataset, gen_synthetic, load_dataset, stratified_split
from .hw.emit import emit_netlist
from .hw.netlist import cell_library
from .hw.ppa import estimate_gates, estimate_ppa, tech_model
from .hw.sim import simulate_netlist_batch
from .network import (
    Network,
    encode_series,
    final_winners,
    layer_outputs,
    majority_labels,
    score_winners,
    series_winners,
    train,
)
from .spikes import DomainError, encode_window

__all__ = [
    "PipelineError",
    "PipelineResult",
    "SweepSpec",
    "dump_json",
    "explore",
    "load_network",
    "pareto_front",
    "prepare_data",
    "run_pipeline",
    "save_network",
]


class PipelineError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


def dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# Data


def prepare_data(cfg: RunConfig) -> tuple:
    """(train, test) datasets per the config; raises DataError."""
    ds_cfg = cfg.doc["dataset"]
    if "synthetic" in ds_cfg:
        syn = dict(ds_cfg["synthetic"])
        syn.setdefault("seed", cfg.seed)
        full = gen_synthetic(**syn)
    else:
        fmt = ds_cfg.get("format", "csv-labeled")
        header = bool(ds_cfg.get("header", False))
        full = load_dataset(cfg.dataset_path, fmt, header)
        if cfg.test_path is not None:
            test = load_dataset(cfg.test_path, fmt, header)
            if test.width != full.width:
                raise DataError(f"test set width {test.width} differs from training width {full.width}")
            return full, test
    train_idx, test_idx = stratified_split(full.y, cfg.seed)
    if train_idx.size == 0 or test_idx.size == 0:
        raise DataError(f"dataset of {len(full)} samples too small for a train/test split")
    return full.subset(train_idx), full.subset(test_idx)


def _encode(cfg: RunConfig, ds: Dataset) -> np.ndarray:
    if cfg.series:
        return encode_series(ds.X, cfg.encoder, *cfg.series)[0]
    return encode_window(ds.X, cfg.encoder)


def _winners(cfg: RunConfig, net: Network, ds: Dataset) -> np.ndarray:
    if cfg.series:
        return series_winners(net, ds.X, cfg.encoder, *cfg.series)
    return final_winners(net, encode_window(ds.X, cfg.encoder))


# --------------------------------------------------------------------------
# Network persistence


def save_network(net: Network, cfg: RunConfig, label_map: dict) -> dict:
    return {
        "format": "tnnkit-network-v1",
        "input_width": net.spec.input_width,
        "encoder": cfg.doc["encoder"],
        "series": cfg.doc["series"],
        "label_map": {str(k): v for k, v in sorted(label_map.items())},
        "layers": [
            {
                "input_map": [list(s) for s in layer.input_map],
                "columns": [
                    {
                        "config": {
                            "p": st.config.p, "q": st.config.q, "theta": st.config.theta, "T": st.config.T,
                            "model": st.config.model, "w_max": st.config.w_max, "horizon": st.config.horizon,
                        },
                        "weights_raw": st.weights.tolist(),
                    }
                    for st in cols
                ],
            }
            for layer, cols in zip(net.spec.layers, net.states)
        ],
    }


def load_network(doc: dict):
    """Inverse of :func:`save_network`: returns (network, encoder doc, series doc, label map)."""
    from .column import ColumnConfig, ColumnState
    from .network import LayerSpec, NetworkSpec

    try:
        layers, states = [], []
        for entry in doc["layers"]:
            cfgs = [ColumnConfig(**c["config"]) for c in entry["columns"]]
            layers.append(LayerSpec(cfgs, entry["input_map"]))
            states.append([ColumnState(c, np.asarray(e["weights_raw"], dtype=np.int64))
                           for c, e in zip(cfgs, entry["columns"])])
        net = Network(NetworkSpec(doc["input_width"], layers), states)
        label_map = {int(k): v for k, v in doc.get("label_map", {}).items()}
    except (KeyError, TypeError, DomainError) as exc:
        raise ConfigError(f"malformed network file: {exc}") from None
    return net, doc["encoder"], doc.get("series"), label_map


# --------------------------------------------------------------------------
# Pipeline


@dataclass
class PipelineResult:
    out_dir: Path
    network: Network = None
    label_map: dict = None
    eval: dict = None
    ppa: object = None
    netlists: list = field(default_factory=list)
    spot_check: dict = None
    manifest: dict = None


def _versions() -> dict:
    return {
        "tnnkit": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
    }


def _emitted_columns(net: Network, which: str):
    layers = range(len(net.spec.layers)) if which == "all" else [len(net.spec.layers) - 1]
    for l in layers:
        for c, state in enumerate(net.states[l]):
            yield l, c, state


def run_pipeline(cfg: RunConfig, out_dir, skip_hw: bool = False, emit: bool = True) -> PipelineResult:
    """Run every stage and write artifacts into ``out_dir``.

    ``skip_hw`` stops after evaluation; ``emit=False`` keeps the PPA estimate
    but skips netlist emission and the equivalence spot-check.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = PipelineResult(out)
    stages = {name: "pending" for name in ("data", "train", "label", "evaluate", "emit", "spotcheck", "ppa")}
    artifacts = []
    manifest = {
        "config": cfg.doc,
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "versions": _versions(),
        "stages": stages,
        "artifacts": artifacts,
    }
    stage = "data"
    try:
        train_ds, test_ds = prepare_data(cfg)
        width = cfg.input_width(train_ds.width)
        spec = cfg.network_spec(width)
        X_train = _encode(cfg, train_ds)
        stages["data"] = "ok"

        stage = "train"
        ln = cfg.doc["learning"]
        net = Network.init(spec, ln["init"], cfg.learning, value=ln.get("init_value"))
        net, log = train(X_train, net, cfg.learning, cfg.epochs)
        result.network = net
        stages["train"] = "ok"

        stage = "label"
        n_out = spec.output_width
        train_w = _winners(cfg, net, train_ds)
        label_map = majority_labels(train_w, train_ds.y, n_out)
        result.label_map = label_map
        dump_json(save_network(net, cfg, label_map), out / "network.json")
        artifacts.append("network.json")
        stages["label"] = "ok"

        stage = "evaluate"
        test_w = _winners(cfg, net, test_ds)
        report = {
            "mode": "series" if cfg.series else "vector",
            "train": score_winners(train_w, train_ds.y, label_map, n_out).to_dict(),
            "test": score_winners(test_w, test_ds.y, label_map, n_out).to_dict(),
            "label_map": {str(k): v for k, v in sorted(label_map.items())},
            "training_log": log,
        }
        result.eval = report
        dump_json(report, out / "eval.json")
        artifacts.append("eval.json")
        stages["evaluate"] = "ok"

        if skip_hw:
            for s in ("emit", "spotcheck", "ppa"):
                stages[s] = "skipped"
        else:
            hw = cfg.hardware
            if emit:
                stage = "emit"
                netdir = out / "netlists"
                netdir.mkdir(exist_ok=True)
                (netdir / "cells.v").write_text(cell_library(), encoding="utf-8")
                artifacts.append("netlists/cells.v")
                emitted = []
                for l, c, state in _emitted_columns(net, hw["emit"]):
                    nl = emit_netlist(state, name=f"tnn_l{l}_c{c}", cap=int(hw["cap"]))
                    fname = f"netlists/L{l}_C{c}.v"
                    (out / fname).write_text(nl.to_text(), encoding="utf-8")
                    artifacts.append(fname)
                    emitted.append((l, c, state, nl))
                    result.netlists.append(out / fname)
                stages["emit"] = "ok"

                stage = "spotcheck"
                X_test = _encode(cfg, test_ds)
                rng = np.random.Generator(np.random.PCG64(cfg.seed))
                n_check = min(int(hw["spot_checks"]), X_test.shape[0])
                picks = np.sort(rng.choice(X_test.shape[0], size=n_check, replace=False))
                sample = X_test[picks]
                layer_in = [sample] + layer_outputs(net, sample)
                ok = np.ones(n_check, dtype=bool)
                for l, c, state, nl in emitted:
                    start, stop = net.spec.layers[l].input_map[c]
                    xs = layer_in[l][:, start:stop]
                    from .column import column_forward_batch

                    _, _, expected = column_forward_batch(xs, state)
                    got = simulate_netlist_batch(nl, xs, state.config.H)
                    ok &= (got == expected).all(axis=1)
                result.spot_check = {"checked": int(n_check), "matched": int(ok.sum()), "columns": len(emitted)}
                manifest["spot_check"] = result.spot_check
                if not ok.all():
                    raise PipelineError("spotcheck", f"netlist/simulator mismatch on {int((~ok).sum())} samples")
                stages["spotcheck"] = "ok"
            else:
                stages["emit"] = stages["spotcheck"] = "skipped"

            stage = "ppa"
            gates = sum(estimate_gates(st.config.p, st.config.q) for cols in net.states for st in cols)
            ppa = estimate_ppa(gates, tech_model(hw["node"], hw["mode"]), stages=len(net.spec.layers))
            result.ppa = ppa
            (out / "ppa.json").write_text(ppa.to_json(), encoding="utf-8")
            artifacts.append("ppa.json")
            stages["ppa"] = "ok"
    except PipelineError:
        stages[stage] = "failed"
        raise
    except (ConfigError, DataError):
        stages[stage] = "failed"
        raise
    except (DomainError, ValueError) as exc:
        stages[stage] = "failed"
        raise PipelineError(stage, str(exc)) from exc
    finally:
        manifest["partial"] = any(v in ("failed", "pending") for v in stages.values())
        dump_json(manifest, out / "manifest.json")
        result.manifest = manifest
    return result


# --------------------------------------------------------------------------
# Design-space exploration


@dataclass
class SweepSpec:
    params: dict
    cap: int = 256

    def __post_init__(self):
        if not self.params:
            raise ConfigError("sweep needs at least one parameter")
        for k, v in self.params.items():
            if not isinstance(v, list) or not v:
                raise ConfigError(f"sweep parameter {k!r} needs a nonempty list of values")
        if self.size > self.cap:
            raise ConfigError(f"sweep has {self.size} candidates, cap is {self.cap}")

    @property
    def size(self) -> int:
        n = 1
        for v in self.params.values():
            n *= len(v)
        return n

    def candidates(self) -> list:
        keys = list(self.params)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.params[k] for k in keys))]

    @classmethod
    def from_dict(cls, doc: dict) -> "SweepSpec":
        return cls(dict(doc.get("params", {})), int(doc.get("cap", 256)))


def pareto_front(points: list) -> list:
    """Indices of points not dominated under (maximize accuracy, minimize power_mw).

    Identical points do not dominate each other, so ties are all kept.
    """
    front = []
    for i, a in enumerate(points):
        dominated = any(
            b["accuracy"] >= a["accuracy"] and b["power_mw"] <= a["power_mw"]
            and (b["accuracy"] > a["accuracy"] or b["power_mw"] < a["power_mw"])
            for b in points
        )
        if not dominated:
            front.append(i)
    return front


def _run_candidate(job):
    k, doc, base_dir, overrides, out_dir = job
    try:
        cfg = RunConfig(doc, Path(base_dir))
        for key, value in overrides.items():
            cfg = cfg.with_override(key, value)
        res = run_pipeline(cfg, Path(out_dir) / f"candidate_{k:03d}", emit=False)
        test = res.eval["test"]
        return {
            "candidate": k,
            "params": overrides,
            "accuracy": test["accuracy"],
            "purity": test["purity"],
            "power_mw": res.ppa.power_mw,
            "area_mm2": res.ppa.area_mm2,
            "gates": res.ppa.gates,
        }, None
    except (ConfigError, DataError, PipelineError, DomainError) as exc:
        return None, {"candidate": k, "params": overrides, "error": str(exc)}


def _workers() -> int:
    env = os.environ.get("TNN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"TNN_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def explore(sweep: SweepSpec, base: RunConfig, out_dir, workers: int | None = None) -> dict:
    """Evaluate every candidate (no netlist emission) and report the Pareto front."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(k, base.doc, str(base.base_dir), c, str(out)) for k, c in enumerate(sweep.candidates())]
    workers = workers or _workers()
    if workers == 1 or len(jobs) == 1:
        results = [_run_candidate(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_candidate, jobs))
    points = [r for r, _ in results if r is not None]
    errors = [e for _, e in results if e is not None]
    front = [points[i] for i in pareto_front(points)]
    report = {
        "objectives": {"accuracy": "maximize", "power_mw": "minimize"},
        "points": points,
        "front": front,
        "errors": errors,
    }
    dump_json(report, out / "pareto.json")
    return report
