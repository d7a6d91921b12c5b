"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` or through pytest.
"""

import io
import itertools
import json
import os
import random
import sys
import time
from contextlib import redirect_stdout
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import INF, pareto_violations, stdp_walk, tick_fire_times_batch, wta
from tnnkit.cli import main as cli_main
from tnnkit.column import ColumnConfig, ColumnState, column_forward_batch
from tnnkit.config import RunConfig
from tnnkit.data import load_dataset, write_dataset, Dataset
from tnnkit.hw import emit_netlist, estimate_ppa, simulate_netlist_batch, tech_model
from tnnkit.learn import StdpParams, stdp_update_raw
from tnnkit.pipeline import SweepSpec, explore, pareto_front, run_pipeline

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def verdict(capsys):
    def report(name, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, f"{name}: {detail}"
    return report


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


def run_cli(argv):
    buf = io.StringIO()
    t0 = time.perf_counter()
    with redirect_stdout(buf):
        code = cli_main(argv)
    return code, json.loads(buf.getvalue()), time.perf_counter() - t0


def test_c1_ppa_45nm_closure(verdict):
    code, r, dt = run_cli(["ppa", "--p", "1024", "--q", "16", "--node", "45nm", "--mode", "std"])
    ok = (code == 0 and within(r["gates"], 1.7e6, 0.005) and within(r["area_mm2"], 1.65, 0.01)
          and within(r["power_mw"], 7.96, 0.01) and dt < 1.0)
    verdict("criterion 1 (45nm calibration)", ok,
            f"gates {r['gates']}, area {r['area_mm2']:.6f} mm2, power {r['power_mw']:.6f} mW, {dt * 1e3:.1f} ms")


def test_c2_ppa_7nm_closure(verdict):
    code, r, dt = run_cli(["ppa", "--p", "450", "--q", "15", "--node", "7nm", "--mode", "tnn7"])
    ok = (code == 0 and within(r["area_mm2"], 0.054, 0.02) and within(r["power_mw"] * 1e3, 39, 0.02)
          and r["latency_ns"] == 28.14 and dt < 1.0)
    verdict("criterion 2 (7nm TNN7 closure)", ok,
            f"6750 synapses, {r['gates']} gates, area {r['area_mm2']:.6f} mm2, "
            f"power {r['power_mw'] * 1e3:.4f} uW, latency {r['latency_ns']} ns, {dt * 1e3:.1f} ms")


def test_c3_tnn7_factors(verdict):
    rng = random.Random(3)
    counts = [1, 2, 7, 1000, 700380, 1700004, 10**9] + [rng.randint(1, 10**8) for _ in range(500)]
    std, tnn7 = tech_model("7nm", "std"), tech_model("7nm", "tnn7")
    bad = []
    for g in counts:
        for stages in (1, 2, 5):
            a, b = estimate_ppa(g, std, stages), estimate_ppa(g, tnn7, stages)
            if not (b.area_mm2 == a.area_mm2 * 0.73 and b.power_mw == a.power_mw * 0.83
                    and b.latency_ns == a.latency_ns * 0.84):
                bad.append((g, stages))
    verdict("criterion 3 (TNN7 factors)", not bad,
            f"{len(counts) * 3 - len(bad)}/{len(counts) * 3} gate/stage counts exact to the bit")


def test_c4_netlist_equivalence(verdict):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    matched = total = 0
    for k in range(100):
        p, q = (int(v) for v in rng.integers(1, 9, size=2))
        model = ("ramp-no-leak", "step-no-leak")[k % 2]
        cfg = ColumnConfig(p=p, q=q, theta=int(rng.integers(1, 4 * p + 2)), T=8, model=model)
        state = ColumnState(cfg, rng.integers(0, cfg.w_max * 256 + 1, size=(p, q)))
        X = rng.integers(0, cfg.T + 1, size=(20, p))
        X = np.where(X == cfg.T, INF, X)
        _, _, post = column_forward_batch(X, state)
        got = simulate_netlist_batch(emit_netlist(state), X, cfg.H)
        matched += int((got == post).all(axis=1).sum())
        total += len(X)
    dt = time.perf_counter() - t0
    verdict("criterion 4 (netlist equivalence)", matched == total == 2000 and dt < 60,
            f"{matched}/{total} vectors, {dt:.1f} s")


def test_c5_stdp_oracle(verdict):
    rng = random.Random(5)
    n, bad = 10_000, 0
    for _ in range(n):
        w_max = rng.randint(1, 8)
        mus = [Fraction(rng.randint(0, w_max * 256), 256) for _ in range(3)]
        params = StdpParams(*(float(m) for m in mus))
        x = rng.choice([INF, rng.randint(0, 15)])
        y = rng.choice([INF, rng.randint(0, 15)])
        w = rng.randint(0, w_max * 256)
        got = stdp_update_raw(np.array([x]), np.array([y]), np.array([[w]]), params, w_max)
        want = stdp_walk(x, y, Fraction(w, 256), *mus, w_max)
        bad += Fraction(int(got.ravel()[0]), 256) != want
    verdict("criterion 5 (STDP oracle)", bad == 0, f"{n - bad}/{n} tuples bit-exact")


def test_c6a_orthogonal_fixture(verdict, tmp_path):
    cfg = RunConfig.load(CONFIGS / "orthogonal.json")
    t0 = time.perf_counter()
    res = run_pipeline(cfg, tmp_path)
    dt = time.perf_counter() - t0
    acc = res.eval["test"]["accuracy"]
    ok = acc == 1.0 and cfg.epochs <= 20 and dt < 300
    verdict("criterion 6a (orthogonal patterns)", ok,
            f"test accuracy {acc}, train accuracy {res.eval['train']['accuracy']}, {cfg.epochs} epochs, "
            f"spot-check {res.spot_check['matched']}/{res.spot_check['checked']}, {dt:.1f} s")


def test_c6b_sine_vs_square(verdict, tmp_path):
    cfg = RunConfig.load(CONFIGS / "sine_vs_square.json")
    t0 = time.perf_counter()
    res = run_pipeline(cfg, tmp_path)
    dt = time.perf_counter() - t0
    purity = res.eval["test"]["purity"]
    noise = cfg.doc["dataset"]["synthetic"]["noise"]
    ok = purity >= 0.9 and noise == 0.1 * cfg.encoder.v_max and dt < 300
    verdict("criterion 6b (sine vs square, 10% noise)", ok,
            f"series purity {purity:.4f} on {res.eval['test']['samples']} held-out series "
            f"(train {res.eval['train']['purity']:.4f}), {dt:.1f} s")


def _pool_8x8(X):
    edges = np.linspace(0, 28, 9).round().astype(int)
    img = X.reshape(-1, 28, 28)
    rows = np.add.reduceat(img, edges[:-1], axis=1) / np.diff(edges)[None, :, None]
    return np.add.reduceat(rows, edges[:-1], axis=2) / np.diff(edges)[None, None, :]


def test_c6c_mnist(verdict, tmp_path, capsys):
    path = os.environ.get("TNN_MNIST_CSV")
    if not path or not Path(path).is_file():
        with capsys.disabled():
            print("\nSKIP criterion 6c (MNIST): set TNN_MNIST_CSV to a local label,784-pixel csv file")
        pytest.skip("TNN_MNIST_CSV not provided")
    ds = load_dataset(path, "csv-labeled", header=not Path(path).open().read(1).isdigit())
    pooled = _pool_8x8(ds.X).reshape(len(ds), 64)
    n_train = min(len(ds) - 500, 10_000)
    write_dataset(Dataset(pooled[:n_train], ds.y[:n_train]), tmp_path / "train.csv")
    write_dataset(Dataset(pooled[n_train:n_train + 500], ds.y[n_train:n_train + 500]), tmp_path / "test.csv")
    cfg = RunConfig.from_dict({
        "dataset": {"path": str(tmp_path / "train.csv"), "test_path": str(tmp_path / "test.csv")},
        "network": {"layers": [{"columns": [{"q": 32, "theta": 24}]}]},
        "epochs": 1,
    })
    t0 = time.perf_counter()
    res = run_pipeline(cfg, tmp_path / "out", skip_hw=True)
    dt = time.perf_counter() - t0
    acc = res.eval["test"]["accuracy"]
    verdict("criterion 6c (MNIST 8x8, q=32)", acc > 0.3 and dt < 300,
            f"accuracy {acc:.4f} on 500 test samples (chance 0.1), {dt:.1f} s")


def _tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file() and p.name != "manifest.json"}


def test_c7_determinism(verdict, tmp_path):
    checked = []
    for name in ("orthogonal.json", "sine_vs_square.json"):
        cfg = RunConfig.load(CONFIGS / name)
        run_pipeline(cfg, tmp_path / name / "a")
        run_pipeline(RunConfig.load(CONFIGS / name), tmp_path / name / "b")
        a, b = _tree_bytes(tmp_path / name / "a"), _tree_bytes(tmp_path / name / "b")
        required = {"eval.json", "ppa.json"} | {k for k in a if k.endswith(".v")}
        same = a == b and required <= set(a) and any(k.startswith("netlists/L") for k in a)
        checked.append((name, same, sorted(required)))
    ok = all(s for _, s, _ in checked)
    verdict("criterion 7 (determinism)", ok,
            "; ".join(f"{n}: {len(r)} artifacts {'identical' if s else 'DIFFER'}" for n, s, r in checked))


GRID = (0, 1, 3, 7)
THETAS = (1, 2, 5, 9, 16, 29)


def test_c8_neuron_model_oracle(verdict):
    t0 = time.perf_counter()
    neurons = columns = mismatches = 0
    for model, p, T in itertools.product(("ramp-no-leak", "step-no-leak"), range(1, 5), range(2, 9)):
        X = np.array(list(itertools.product(list(range(T)) + [INF], repeat=p)), dtype=np.int64)
        vecs = np.array(list(itertools.product(GRID, repeat=p)), dtype=np.int64).T  # (p, m)
        for theta in THETAS:
            # every weight vector in the grid, as one wide layer of independent neurons
            wide = ColumnConfig(p=p, q=vecs.shape[1], theta=theta, T=T, model=model)
            raw, _, _ = column_forward_batch(X, ColumnState.from_values(wide, vecs))
            oracle = tick_fire_times_batch(X, vecs, theta, model, wide.H)
            neurons += raw.size
            mismatches += int((raw != oracle).sum())
            # columns with q <= 4: every grid vector appears in every neuron slot
            for q in range(1, 5):
                m = vecs.shape[1]
                for k in range(0, m, max(1, m // 16)):
                    idx = [(k + j * (m // q + 1)) % m for j in range(q)]
                    cfg = ColumnConfig(p=p, q=q, theta=theta, T=T, model=model)
                    _, winner, post = column_forward_batch(X, ColumnState.from_values(cfg, vecs[:, idx]))
                    o_raw = oracle[:, idx]
                    for n in range(len(X)):
                        w, o_post = wta(o_raw[n].tolist())
                        if (-1 if w is None else w) != winner[n] or o_post != post[n].tolist():
                            mismatches += 1
                    columns += 1
    dt = time.perf_counter() - t0
    verdict("criterion 8 (neuron-model oracle)", mismatches == 0,
            f"{neurons} neuron fire times and {columns} columns (p,q<=4, T<=8, weights {GRID}, "
            f"theta {THETAS}), {mismatches} mismatches, {dt:.1f} s")


def test_c9_pareto(verdict, tmp_path):
    base = RunConfig.from_dict({**json.loads((CONFIGS / "orthogonal.json").read_text()), "epochs": 3})
    report = explore(SweepSpec({"q": [2, 4, 8], "theta": [4, 8, 12, 16]}), base, tmp_path, workers=1)
    pts = report["points"]
    front_idx = [pts.index(p) for p in report["front"]]
    on_disk = json.loads((tmp_path / "pareto.json").read_text())
    v_explore = pareto_violations(pts, front_idx) + (on_disk != report)

    rng = random.Random(9)
    v_random = trials = 0
    for _ in range(2000):
        n = rng.randint(1, 12)
        pts = [{"accuracy": rng.choice([0.5, 0.75, 1.0, rng.random()]),
                "power_mw": rng.choice([1.0, 2.0, rng.random()])} for _ in range(n)]
        v_random += pareto_violations(pts, pareto_front(pts))
        trials += 1
    verdict("criterion 9 (Pareto correctness)", v_explore == 0 and v_random == 0 and not report["errors"],
            f"explore: {len(report['points'])} points, front {len(report['front'])}, {v_explore} violations; "
            f"{trials} random point sets, {v_random} violations")


@settings(max_examples=300)
@given(st.lists(st.tuples(st.sampled_from([0.0, 0.5, 1.0]) | st.floats(0, 1),
                          st.sampled_from([1.0, 2.0]) | st.floats(0.001, 10)), min_size=1, max_size=15))
def test_pareto_front_property(raw_pts):
    pts = [{"accuracy": a, "power_mw": p} for a, p in raw_pts]
    assert pareto_violations(pts, pareto_front(pts)) == 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
