"""Compile a frozen column to a synchronous gate-level netlist.

One clock cycle is one encoding tick.  Input line ``x_i`` pulses high for
exactly the cycle of its spike; output line ``y_j`` pulses high for the
cycle in which neuron ``j`` wins.  Per neuron the design is:

* ramp-no-leak: one down-counter per synapse with a nonzero ramp, loaded
  with the ramp height on the input pulse and asserting ``active`` while
  nonzero.  ``active`` is high for cycles ``x+1 .. x+ramp``, so summing it
  into an accumulator reproduces ``min(max(t - x, 0), ramp)``.
* step-no-leak: the input pulse gates the ramp constant directly into the
  adder tree.

``potential = acc + sum(contributions)`` is formed combinationally, compared
against theta, and registered back into ``acc``.  A priority chain picks the
lowest-index neuron among those at threshold, and a column-level first-spike
latch blocks every output after the first winner.
"""

from __future__ import annotations

from ..column import ColumnState
from ..spikes import DomainError
from .netlist import Netlist, NetlistBuilder

__all__ = ["DEFAULT_EMISSION_CAP", "EmissionError", "emit_netlist"]

DEFAULT_EMISSION_CAP = 4096


class EmissionError(DomainError):
    pass


def _bits(value: int, width: int) -> list:
    return [bool((value >> k) & 1) for k in range(width)]


def _sum(b: NetlistBuilder, weighted: list, width: int) -> list:
    """Sum of ``(signal, bit_position)`` terms as ``width`` bits (carry-save, then ripple)."""
    columns = [[] for _ in range(width)]
    for sig, pos in weighted:
        if sig is not False and pos < width:
            columns[pos].append(sig)
    out = []
    for pos in range(width):
        col = columns[pos]
        while len(col) > 1:
            if len(col) >= 3:
                a, c, d = col.pop(0), col.pop(0), col.pop(0)
                axc = b.XOR(a, c)
                s = b.XOR(axc, d)
                carry = b.OR(b.AND(a, c), b.AND(d, axc))
            else:
                a, c = col.pop(0), col.pop(0)
                s, carry = b.XOR(a, c), b.AND(a, c)
            col.append(s)
            if pos + 1 < width:
                columns[pos + 1].append(carry)
        out.append(col[0] if col else False)
    return out


def _at_least(b: NetlistBuilder, value: list, threshold: int):
    """``value >= threshold`` for an unsigned bit vector and a constant."""
    borrow = False
    for a, t in zip(value, _bits(threshold, len(value))):
        borrow = b.OR(b.AND(b.NOT(a), t), b.AND(b.NOT(b.XOR(a, t)), borrow))
    return b.NOT(borrow)


def _ramp_counter(b: NetlistBuilder, pulse: str, ramp: int):
    """Down-counter loaded with ``ramp`` on ``pulse``; returns its nonzero flag."""
    width = ramp.bit_length()
    count = [b.dff() for _ in range(width)]
    active = b.any(count)
    borrow = True
    for q, load in zip(count, _bits(ramp, width)):
        dec = b.XOR(q, borrow)
        borrow = b.AND(b.NOT(q), borrow)
        b.connect(q, b.MUX(pulse, b.AND(dec, active), load))
    return active


def _neuron(b: NetlistBuilder, pulses: list, ramps: list, theta: int, model: str):
    total = sum(ramps)
    if total < theta:
        return False
    terms = []
    for pulse, r in zip(pulses, ramps):
        if r == 0:
            continue
        if model == "ramp-no-leak":
            terms.append((_ramp_counter(b, pulse, r), 0))
        else:
            terms += [(pulse, k) for k, bit in enumerate(_bits(r, r.bit_length())) if bit]
    width = max(total, theta).bit_length()
    acc = [b.dff() for _ in range(width)]
    potential = _sum(b, terms + [(q, k) for k, q in enumerate(acc)], width)
    for q, d in zip(acc, potential):
        b.connect(q, d)
    return _at_least(b, potential, theta)


def emit_netlist(state: ColumnState, name: str = "tnn_column", cap: int = DEFAULT_EMISSION_CAP) -> Netlist:
    """Emit an inference-only netlist for ``state`` (integer weight parts only)."""
    cfg = state.config
    if cfg.p * cfg.q > cap:
        raise EmissionError(f"column {cfg.p}x{cfg.q} exceeds the emission cap of {cap} synapses")
    b = NetlistBuilder()
    pulses = [f"x_{i}" for i in range(cfg.p)]
    ramps = state.ramps
    fire = [_neuron(b, pulses, [int(r) for r in ramps[:, j]], cfg.theta, cfg.model) for j in range(cfg.q)]

    done = b.dff()
    earlier = False
    select = []
    for f in fire:
        select.append(b.AND(f, b.NOT(earlier)))
        earlier = b.OR(earlier, f)
    b.connect(done, b.OR(done, earlier))
    idle = b.NOT(done)
    outputs = [f"y_{j}" for j in range(cfg.q)]
    for sel, y in zip(select, outputs):
        b.gate("AND2", sel, idle, out=y)

    meta = {
        "p": cfg.p,
        "q": cfg.q,
        "theta": cfg.theta,
        "T": cfg.T,
        "H": cfg.H,
        "w_max": cfg.w_max,
        "model": cfg.model,
        "weights_raw": state.weights.tolist(),
    }
    return b.build(name, [Netlist.clock, Netlist.reset] + pulses, outputs, meta)
