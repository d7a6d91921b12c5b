import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import INF, column as oracle_column
from tnnkit.column import ColumnConfig, ColumnState, column_forward, column_forward_batch
from tnnkit.hw import (
    TECH_MODELS,
    EmissionError,
    StructuralError,
    cell_library,
    emit_netlist,
    estimate_gates,
    estimate_ppa,
    lint,
    parse_netlist,
    simulate_netlist,
    simulate_netlist_batch,
    tech_model,
)
from tnnkit.hw.netlist import Gate, Netlist, NetlistBuilder
from tnnkit.spikes import ABSENT, DomainError


def random_state(rng, p_max=8, q_max=8, T=8, model=None):
    p, q = int(rng.integers(1, p_max + 1)), int(rng.integers(1, q_max + 1))
    model = model or ("ramp-no-leak", "step-no-leak")[int(rng.integers(2))]
    cfg = ColumnConfig(p=p, q=q, theta=int(rng.integers(1, 4 * p + 2)), T=T, model=model)
    return ColumnState(cfg, rng.integers(0, 7 * 256 + 1, size=(p, q)))


def random_inputs(rng, n, p, T=8):
    x = rng.integers(0, T + 2, size=(n, p))
    return np.where(x >= T, INF, x)


# --- netlist data model and text format ----------------------------------------

def tiny():
    b = NetlistBuilder()
    q = b.dff()
    b.connect(q, b.OR(q, "x_0"))
    b.gate("AND2", "x_0", b.NOT(q), out="y_0")
    return b.build("tiny", ["clk", "rst", "x_0"], ["y_0"], {"note": "hand built"})


def test_round_trip_text():
    nl = tiny()
    text = nl.to_text()
    assert text.startswith("// tnnkit structural netlist v1\n")
    assert text.endswith("endmodule\n") and "\r" not in text
    back = parse_netlist(text)
    assert back == nl and back.meta == nl.meta
    assert back.to_text() == text


def test_parse_errors():
    with pytest.raises(StructuralError):
        parse_netlist("module m (a);\n  input a;\n")
    with pytest.raises(StructuralError):
        parse_netlist("module m (a, y);\n  input a;\n  output y;\n  FOO g (.A(a), .Y(y));\nendmodule\n")
    with pytest.raises(StructuralError):
        parse_netlist("module m (a, y);\n  input a;\n  output y;\n  AND2 g (.A(a), .Y(y));\nendmodule\n")


def _manual(gates, wires=("n0",), outputs=("y_0",)):
    return Netlist("m", ("clk", "rst", "x_0"), tuple(outputs), tuple(wires), tuple(gates), {})


def test_lint_rejects_multiple_drivers():
    nl = _manual([Gate("NOT", "g0", "y_0", ("x_0",)), Gate("NOT", "g1", "y_0", ("x_0",))], wires=())
    with pytest.raises(StructuralError, match="multiple drivers"):
        lint(nl)


def test_lint_rejects_combinational_cycle():
    nl = _manual([Gate("AND2", "g0", "n0", ("x_0", "y_0")), Gate("NOT", "g1", "y_0", ("n0",))])
    with pytest.raises(StructuralError, match="cycle"):
        lint(nl)
    with pytest.raises(StructuralError, match="cycle"):
        simulate_netlist(nl, [0], 4)


def test_lint_rejects_bad_clocking_and_undriven():
    with pytest.raises(StructuralError):
        lint(_manual([Gate("DFF", "r0", "y_0", ("x_0", "x_0", "rst"))], wires=()))
    with pytest.raises(StructuralError):
        lint(_manual([Gate("AND2", "g0", "y_0", ("x_0", "n0"))]))


def test_builder_folds_constants_and_complements():
    b = NetlistBuilder()
    assert b.AND("a", False) is False and b.OR("a", True) is True
    assert b.AND("a", True) == "a" and b.XOR("a", False) == "a"
    na = b.NOT("a")
    assert b.NOT(na) == "a"
    assert b.AND("a", na) is False and b.OR("a", na) is True
    assert b.AND("a", "b") == b.AND("b", "a")  # structural hashing


def test_cell_library_covers_primitives():
    lib = cell_library()
    for kind in ("NOT", "AND2", "OR2", "XOR2", "MUX2", "DFF"):
        assert f"module {kind} (" in lib


# --- emission and equivalence ----------------------------------------------------

def test_one_by_one_column():
    cfg = ColumnConfig(p=1, q=1, theta=1)
    state = ColumnState.from_values(cfg, [[1]])
    nl = emit_netlist(state)
    lint(nl)
    assert simulate_netlist(nl, [0], cfg.H) == column_forward([0], state).post_wta_times == [1]
    assert simulate_netlist(nl, [ABSENT], cfg.H) == [ABSENT]


def test_emission_is_deterministic_and_carries_metadata():
    rng = np.random.default_rng(3)
    state = random_state(rng)
    a, b = emit_netlist(state).to_text(), emit_netlist(state).to_text()
    assert a == b
    meta = parse_netlist(a).meta
    assert meta["p"] == state.config.p and meta["weights_raw"] == state.weights.tolist()


def test_emission_cap():
    cfg = ColumnConfig(p=65, q=64, theta=1)
    with pytest.raises(EmissionError):
        emit_netlist(ColumnState(cfg, np.zeros((65, 64), dtype=np.int64)))
    small = ColumnConfig(p=4, q=2, theta=1)
    with pytest.raises(EmissionError):
        emit_netlist(ColumnState(small, np.zeros((4, 2), dtype=np.int64)), cap=7)


def test_unreachable_threshold_never_fires():
    cfg = ColumnConfig(p=2, q=2, theta=20)
    state = ColumnState.from_values(cfg, [[7, 1], [7, 1]])
    nl = emit_netlist(state)
    assert simulate_netlist(nl, [0, 0], cfg.H) == [ABSENT, ABSENT]


@pytest.mark.parametrize("model", ["ramp-no-leak", "step-no-leak"])
def test_random_columns_equivalent(model):
    rng = np.random.default_rng(11 if model == "ramp-no-leak" else 12)
    for _ in range(25):
        state = random_state(rng, model=model)
        cfg = state.config
        nl = emit_netlist(state)
        lint(nl)
        X = random_inputs(rng, 20, cfg.p)
        _, _, post = column_forward_batch(X, state)
        got = simulate_netlist_batch(nl, X, cfg.H)
        assert np.array_equal(got, post)
        # quiescence: running longer changes nothing
        assert np.array_equal(simulate_netlist_batch(nl, X, 2 * cfg.H), got)
        x0 = X[0].tolist()
        _, _, o_post = oracle_column(x0, state.ramps.tolist(), cfg.theta, cfg.model, cfg.H)
        assert [int(t) for t in simulate_netlist(nl, x0, cfg.H)] == o_post


def test_no_pulses_no_outputs():
    rng = np.random.default_rng(5)
    state = random_state(rng)
    out = simulate_netlist(emit_netlist(state), [ABSENT] * state.config.p, state.config.H)
    assert out == [ABSENT] * state.config.q


def test_parsed_netlist_simulates_identically():
    rng = np.random.default_rng(8)
    state = random_state(rng)
    nl = emit_netlist(state)
    X = random_inputs(rng, 10, state.config.p)
    assert np.array_equal(simulate_netlist_batch(parse_netlist(nl.to_text()), X, 15),
                          simulate_netlist_batch(nl, X, 15))


def test_simulator_argument_checks():
    nl = tiny()
    with pytest.raises(DomainError):
        simulate_netlist(nl, [0, 0], 4)
    with pytest.raises(DomainError):
        simulate_netlist(nl, [0], -1)


# --- PPA -----------------------------------------------------------------------

def test_gate_estimates():
    assert estimate_gates(1, 1) == 104
    assert estimate_gates(6750, 1) == 700380
    assert abs(estimate_gates(1024, 16) - 1.7e6) <= 0.005 * 1.7e6
    with pytest.raises(DomainError):
        estimate_gates(0, 3)


@given(st.integers(1, 5000), st.integers(1, 64))
def test_gate_estimate_linear(p, q):
    assert abs(estimate_gates(2 * p, q) - 2 * estimate_gates(p, q)) <= 1


def test_ppa_anchors():
    r45 = estimate_ppa(1_700_000, tech_model("45nm-std"))
    assert math.isclose(r45.area_mm2, 1.65, rel_tol=1e-12)
    assert math.isclose(r45.power_mw, 7.96, rel_tol=1e-12)
    assert r45.latency_ns is None
    r7 = estimate_ppa(700380, tech_model("7nm", "tnn7"))
    assert math.isclose(r7.area_mm2, 0.054, rel_tol=1e-12)
    assert math.isclose(r7.power_mw, 0.039, rel_tol=1e-12)
    assert r7.latency_ns == 28.14
    std = estimate_ppa(700380, tech_model("7nm-std"))
    assert round(std.power_mw * 1000, 1) == 47.0  # 39 uW / 0.83
    assert math.isclose(std.latency_ns, 28.14 / 0.84)


def test_per_gate_constants():
    m45, m7 = TECH_MODELS["45nm-std"], TECH_MODELS["7nm-tnn7"]
    assert round(m45.area_um2_per_gate, 4) == 0.9706
    assert round(m45.power_w_per_gate * 1e9, 3) == 4.682
    assert round(m7.effective_area_um2_per_gate, 4) == 0.0771
    assert round(m7.effective_power_w_per_gate * 1e12, 1) == 55.7


def test_ppa_report_schema_and_errors():
    report = estimate_ppa(10, tech_model("45nm-std"), stages=3)
    assert set(json.loads(report.to_json())) == {"gates", "area_mm2", "power_mw", "latency_ns", "node", "mode"}
    assert estimate_ppa(10, tech_model("7nm-tnn7"), stages=3).latency_ns == pytest.approx(3 * 28.14)
    with pytest.raises(DomainError):
        estimate_ppa(0, tech_model("45nm-std"))
    with pytest.raises(DomainError):
        tech_model("45nm-tnn7")
    for m in TECH_MODELS.values():
        assert m.area_um2_per_gate > 0 and m.power_w_per_gate > 0
        assert m.column_latency_ns is None or m.column_latency_ns > 0
