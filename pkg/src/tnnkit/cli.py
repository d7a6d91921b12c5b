"""``tnn`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 pipeline
stage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, RunConfig
from .data import FORMATS, KINDS, DataError, gen_synthetic, load_dataset, write_dataset
from .hw.emit import DEFAULT_EMISSION_CAP, emit_netlist
from .hw.netlist import cell_library
from .hw.ppa import estimate_gates, estimate_ppa, tech_model
from .network import final_winners, score_winners, series_winners
from .pipeline import PipelineError, SweepSpec, dump_json, explore, load_network, run_pipeline
from .spikes import DomainError, EncoderConfig, encode_window

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_STAGE = 0, 2, 3, 4


def _load_config(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config is required")
    cfg = RunConfig.load(args.config)
    if args.seed is not None:
        cfg = cfg.with_override("seed", args.seed)
    return cfg


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None


def cmd_train(args) -> int:
    cfg = _load_config(args)
    res = run_pipeline(cfg, args.out, skip_hw=args.skip_hw)
    test = res.eval["test"]
    print(f"test accuracy {test['accuracy']:.4f}  purity {test['purity']:.4f}  ({test['samples']} samples)")
    if res.spot_check:
        print(f"spot-check {res.spot_check['matched']}/{res.spot_check['checked']}")
    if res.ppa:
        print(res.ppa.to_json())
    print(f"artifacts in {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    net, enc_doc, series, label_map = load_network(_read_json(args.network))
    if not args.data:
        raise ConfigError("--data is required")
    ds = load_dataset(args.data, args.format, args.header)
    try:
        enc = EncoderConfig(**enc_doc)
        if series:
            winners = series_winners(net, ds.X, enc, int(series["window"]), int(series.get("stride", 1)))
        else:
            winners = final_winners(net, encode_window(ds.X, enc))
    except DomainError as exc:
        raise DataError(str(exc)) from None
    report = score_winners(winners, ds.y, label_map, net.spec.output_width).to_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "eval.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def cmd_genrtl(args) -> int:
    net, _, _, _ = load_network(_read_json(args.network))
    out = Path(args.out)
    (out / "netlists").mkdir(parents=True, exist_ok=True)
    (out / "netlists" / "cells.v").write_text(cell_library(), encoding="utf-8")
    last = len(net.spec.layers) - 1
    for l, cols in enumerate(net.states):
        if l != last and not args.all_layers:
            continue
        for c, state in enumerate(cols):
            nl = emit_netlist(state, name=f"tnn_l{l}_c{c}", cap=args.cap)
            path = out / "netlists" / f"L{l}_C{c}.v"
            path.write_text(nl.to_text(), encoding="utf-8")
            print(f"{path}: {sum(nl.count().values())} cells")
    return EXIT_OK


def cmd_ppa(args) -> int:
    if args.gates is not None:
        gates = args.gates
    elif args.p is not None and args.q is not None:
        gates = estimate_gates(args.p, args.q)
    else:
        raise ConfigError("give --p and --q, or --gates")
    report = estimate_ppa(gates, tech_model(args.node, args.mode), stages=args.stages)
    text = report.to_json()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ppa.json").write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def cmd_explore(args) -> int:
    cfg = _load_config(args)
    if not args.sweep:
        raise ConfigError("--sweep is required")
    sweep = SweepSpec.from_dict(_read_json(args.sweep))
    report = explore(sweep, cfg, args.out)
    for pt in report["front"]:
        print(f"candidate {pt['candidate']:3d}  accuracy {pt['accuracy']:.4f}  power {pt['power_mw']:.6g} mW  {pt['params']}")
    if report["errors"]:
        print(f"{len(report['errors'])} candidate(s) failed; see pareto.json", file=sys.stderr)
    return EXIT_OK


def cmd_datagen(args) -> int:
    ds = gen_synthetic(args.kind, args.n_per_class, args.length, args.noise, seed=args.seed or 0)
    out = Path(args.out)
    if out.suffix == "" or out.is_dir():
        out.mkdir(parents=True, exist_ok=True)
        out = out / ("data.csv" if args.format == "csv-labeled" else "data.tsv")
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
    write_dataset(ds, out, args.format)
    print(f"wrote {len(ds)} samples of width {ds.width} to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON)")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", default="tnn-out", help="output directory (default: %(default)s)")
    common.add_argument("--skip-hw", action="store_true", help="stop after evaluation")
    common.add_argument("--format", choices=FORMATS, default="csv-labeled", help="dataset file format")

    parser = argparse.ArgumentParser(prog="tnn", description="Temporal neural network design flow.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="run the full pipeline from a config")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate a trained network.json on a dataset")
    p.add_argument("--network", required=True)
    p.add_argument("--data", help="labeled dataset file")
    p.add_argument("--header", action="store_true", help="dataset has a header row")
    p.set_defaults(func=cmd_eval, out=None)

    p = sub.add_parser("genrtl", parents=[common], help="emit gate-level netlists from network.json")
    p.add_argument("--network", required=True)
    p.add_argument("--all-layers", action="store_true")
    p.add_argument("--cap", type=int, default=DEFAULT_EMISSION_CAP, help="max synapses per column")
    p.set_defaults(func=cmd_genrtl)

    p = sub.add_parser("ppa", parents=[common], help="estimate area, power and latency")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--gates", type=int)
    p.add_argument("--node", default="45nm", choices=["45nm", "7nm"])
    p.add_argument("--mode", default="std", choices=["std", "tnn7"])
    p.add_argument("--stages", type=int, default=1, help="columns on the critical path")
    p.set_defaults(func=cmd_ppa, out=None)

    p = sub.add_parser("explore", parents=[common], help="design-space sweep with Pareto report")
    p.add_argument("--sweep", help="sweep file (JSON): {\"params\": {name: [values]}, \"cap\": 256}")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("datagen", parents=[common], help="write a synthetic dataset")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--length", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.0)
    p.set_defaults(func=cmd_datagen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PipelineError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
