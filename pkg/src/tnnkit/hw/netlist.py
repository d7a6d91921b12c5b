"""Gate-level netlists: data model, text format, structural lint.

Text format
-----------
A netlist serializes to a small structural subset of Verilog-2001::

    // tnnkit structural netlist v1
    // @meta {"model": "ramp-no-leak", "p": 2, ...}
    module col (clk, rst, x_0, x_1, y_0);
      input clk;
      input rst;
      input x_0;
      input x_1;
      output y_0;
      wire n0;
      AND2 g0 (.A(x_0), .B(n3), .Y(n0));
      DFF r0 (.D(n0), .CK(clk), .R(rst), .Q(n3));
    endmodule

Only ``module``/``input``/``output``/``wire`` declarations and primitive
instances appear, one per line, LF line endings.  Pins are always named and
listed inputs-first in the order of :data:`PINS`, output last.  The
constants ``1'b0`` and ``1'b1`` may appear on input pins.  The ``@meta``
comment carries the source column (config and weight snapshot) as one line
of JSON.

Primitive semantics (``Y``/``Q`` outputs)::

    NOT   Y = ~A
    AND2  Y = A & B
    OR2   Y = A | B
    XOR2  Y = A ^ B
    MUX2  Y = S ? B : A
    DFF   Q <= R ? 0 : D   on the rising edge of CK (synchronous reset)
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Union

__all__ = [
    "CONST0",
    "CONST1",
    "Gate",
    "Netlist",
    "NetlistBuilder",
    "PINS",
    "StructuralError",
    "cell_library",
    "lint",
    "parse_netlist",
]

CONST0 = "1'b0"
CONST1 = "1'b1"
LITERALS = (CONST0, CONST1)

PINS = {
    "NOT": ("A",),
    "AND2": ("A", "B"),
    "OR2": ("A", "B"),
    "XOR2": ("A", "B"),
    "MUX2": ("A", "B", "S"),
    "DFF": ("D", "CK", "R"),
}
OUT_PIN = {kind: ("Q" if kind == "DFF" else "Y") for kind in PINS}

HEADER = "// tnnkit structural netlist v1"


class StructuralError(ValueError):
    """Malformed netlist: multiple drivers, undriven nets, combinational loops."""


@dataclass(frozen=True)
class Gate:
    kind: str
    name: str
    output: str
    inputs: tuple

    def __post_init__(self):
        if self.kind not in PINS:
            raise StructuralError(f"unknown primitive {self.kind!r}")
        if len(self.inputs) != len(PINS[self.kind]):
            raise StructuralError(f"{self.kind} {self.name}: expected {len(PINS[self.kind])} inputs")

    def to_text(self) -> str:
        pins = [f".{pin}({net})" for pin, net in zip(PINS[self.kind], self.inputs)]
        pins.append(f".{OUT_PIN[self.kind]}({self.output})")
        return f"  {self.kind} {self.name} ({', '.join(pins)});"


@dataclass(frozen=True)
class Netlist:
    name: str
    inputs: tuple
    outputs: tuple
    wires: tuple
    gates: tuple
    meta: dict = field(default_factory=dict, compare=False)

    clock = "clk"
    reset = "rst"

    @property
    def spike_inputs(self) -> tuple:
        return tuple(n for n in self.inputs if n not in (self.clock, self.reset))

    def count(self) -> dict:
        counts = {}
        for g in self.gates:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return dict(sorted(counts.items()))

    def to_text(self) -> str:
        lines = [HEADER, "// @meta " + json.dumps(self.meta, sort_keys=True, separators=(",", ":"))]
        ports = ", ".join(self.inputs + self.outputs)
        lines.append(f"module {self.name} ({ports});")
        lines += [f"  input {n};" for n in self.inputs]
        lines += [f"  output {n};" for n in self.outputs]
        lines += [f"  wire {n};" for n in self.wires]
        lines += [g.to_text() for g in self.gates]
        lines.append("endmodule")
        return "\n".join(lines) + "\n"


_CELL_EXPR = {
    "NOT": "~A",
    "AND2": "A & B",
    "OR2": "A | B",
    "XOR2": "A ^ B",
    "MUX2": "S ? B : A",
}


def cell_library() -> str:
    """Behavioral Verilog for the primitives, for use with external simulators."""
    out = [HEADER + " cell library"]
    for kind, expr in _CELL_EXPR.items():
        pins = PINS[kind]
        out.append(f"module {kind} ({', '.join(pins)}, Y);")
        out.append(f"  input {', '.join(pins)};")
        out.append("  output Y;")
        out.append(f"  assign Y = {expr};")
        out.append("endmodule")
    out += [
        "module DFF (D, CK, R, Q);",
        "  input D, CK, R;",
        "  output reg Q;",
        "  always @(posedge CK) Q <= R ? 1'b0 : D;",
        "endmodule",
    ]
    return "\n".join(out) + "\n"


_DECL = re.compile(r"^\s*(input|output|wire)\s+([A-Za-z_][A-Za-z0-9_]*)\s*;\s*$")
_MODULE = re.compile(r"^\s*module\s+([A-Za-z_][A-Za-z0-9_]*)\s*\(([^)]*)\)\s*;\s*$")
_INST = re.compile(r"^\s*([A-Z0-9]+)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\((.*)\)\s*;\s*$")
_PIN = re.compile(r"\.([A-Z]+)\(\s*([^()\s]+)\s*\)")


def parse_netlist(text: str) -> Netlist:
    """Read the text format back; raises :class:`StructuralError` on bad syntax."""
    name, ports = None, []
    inputs, outputs, wires, gates = [], [], [], []
    meta = {}
    ended = False
    for lineno, line in enumerate(text.split("\n"), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("//"):
            if stripped.startswith("// @meta "):
                meta = json.loads(stripped[len("// @meta "):])
            continue
        if ended:
            raise StructuralError(f"line {lineno}: content after endmodule")
        if stripped == "endmodule":
            ended = True
            continue
        m = _MODULE.match(line)
        if m:
            name = m.group(1)
            ports = [p.strip() for p in m.group(2).split(",") if p.strip()]
            continue
        m = _DECL.match(line)
        if m:
            {"input": inputs, "output": outputs, "wire": wires}[m.group(1)].append(m.group(2))
            continue
        m = _INST.match(line)
        if m and m.group(1) in PINS:
            kind = m.group(1)
            pins = dict(_PIN.findall(m.group(3)))
            expected = set(PINS[kind]) | {OUT_PIN[kind]}
            if set(pins) != expected:
                raise StructuralError(f"line {lineno}: {kind} needs pins {sorted(expected)}")
            gates.append(Gate(kind, m.group(2), pins[OUT_PIN[kind]], tuple(pins[p] for p in PINS[kind])))
            continue
        raise StructuralError(f"line {lineno}: cannot parse {stripped!r}")
    if name is None or not ended:
        raise StructuralError("missing module header or endmodule")
    if ports != inputs + outputs:
        raise StructuralError("module port list does not match input/output declarations")
    return Netlist(name, tuple(inputs), tuple(outputs), tuple(wires), tuple(gates), meta)


def topo_order(netlist: Netlist) -> list:
    """Combinational gates in dependency order; DFF outputs count as sources."""
    driver = {}
    for g in netlist.gates:
        if g.kind != "DFF":
            driver[g.output] = g
    indeg = {}
    users = {}
    for g in netlist.gates:
        if g.kind == "DFF":
            continue
        deps = {n for n in g.inputs if n in driver}
        indeg[g.name] = len(deps)
        for n in deps:
            users.setdefault(n, []).append(g)
    ready = [g for g in netlist.gates if g.kind != "DFF" and indeg[g.name] == 0]
    order = []
    while ready:
        g = ready.pop()
        order.append(g)
        for u in users.get(g.output, ()):
            indeg[u.name] -= 1
            if indeg[u.name] == 0:
                ready.append(u)
    if len(order) != len(indeg):
        stuck = sorted(name for name, d in indeg.items() if d > 0)
        raise StructuralError(f"combinational cycle through {stuck[:5]}")
    return order


def lint(netlist: Netlist) -> None:
    """Check single drivers, driven inputs, clocking and acyclicity."""
    drivers = {}
    for n in netlist.inputs:
        drivers[n] = drivers.get(n, 0) + 1
    for g in netlist.gates:
        if g.output in LITERALS:
            raise StructuralError(f"{g.name} drives a constant")
        drivers[g.output] = drivers.get(g.output, 0) + 1
    names = [g.name for g in netlist.gates]
    if len(set(names)) != len(names):
        raise StructuralError("duplicate instance names")
    multi = sorted(n for n, c in drivers.items() if c > 1)
    if multi:
        raise StructuralError(f"nets with multiple drivers: {multi[:5]}")
    declared = set(netlist.inputs) | set(netlist.outputs) | set(netlist.wires)
    for n in netlist.outputs + netlist.wires:
        if n not in drivers:
            raise StructuralError(f"net {n} has no driver")
    for g in netlist.gates:
        if g.output not in declared:
            raise StructuralError(f"{g.name} drives undeclared net {g.output}")
        for n in g.inputs:
            if n not in LITERALS and n not in drivers:
                raise StructuralError(f"{g.name} reads undriven net {n}")
        if g.kind == "DFF":
            if g.inputs[1] != netlist.clock:
                raise StructuralError(f"{g.name} is not clocked by {netlist.clock}")
            if g.inputs[2] != netlist.reset:
                raise StructuralError(f"{g.name} is not reset by {netlist.reset}")
        elif netlist.clock in g.inputs:
            raise StructuralError(f"{g.name} uses the clock as data")
    topo_order(netlist)


Signal = Union[str, bool]


def _lit(s: Signal) -> str:
    if s is True:
        return CONST1
    if s is False:
        return CONST0
    return s


class NetlistBuilder:
    """Builds gate lists with constant folding and structural hashing.

    Signals are net names or python booleans; boolean operands are folded
    away so compile-time constants (weights, threshold) cost no gates.
    """

    def __init__(self):
        self.gates = []
        self.wires = []
        self._dffs = {}
        self._cache = {}
        self._complement = {}
        self._count = 0

    def _new_net(self) -> str:
        name = f"n{self._count}"
        self._count += 1
        self.wires.append(name)
        return name

    def gate(self, kind: str, *inputs: Signal, out: str | None = None) -> str:
        """Instantiate a primitive without folding."""
        net = out or self._new_net()
        self.gates.append(Gate(kind, f"g{len(self.gates)}", net, tuple(_lit(s) for s in inputs)))
        return net

    def _hashed(self, kind: str, *inputs: Signal) -> str:
        key = (kind,) + inputs
        if key not in self._cache:
            self._cache[key] = self.gate(kind, *inputs)
        return self._cache[key]

    def NOT(self, a: Signal) -> Signal:
        if isinstance(a, bool):
            return not a
        if a in self._complement:
            return self._complement[a]
        n = self._hashed("NOT", a)
        self._complement[a] = n
        self._complement[n] = a
        return n

    def AND(self, a: Signal, b: Signal) -> Signal:
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True or a == b:
            return a
        if self._complement.get(a) == b:
            return False
        return self._hashed("AND2", *sorted((a, b)))

    def OR(self, a: Signal, b: Signal) -> Signal:
        if a is True or b is True:
            return True
        if a is False:
            return b
        if b is False or a == b:
            return a
        if self._complement.get(a) == b:
            return True
        return self._hashed("OR2", *sorted((a, b)))

    def XOR(self, a: Signal, b: Signal) -> Signal:
        if isinstance(a, bool) and isinstance(b, bool):
            return a != b
        if isinstance(a, bool):
            a, b = b, a
        if b is False:
            return a
        if b is True:
            return self.NOT(a)
        if a == b:
            return False
        if self._complement.get(a) == b:
            return True
        return self._hashed("XOR2", *sorted((a, b)))

    def MUX(self, s: Signal, a: Signal, b: Signal) -> Signal:
        """``s ? b : a``."""
        if isinstance(s, bool):
            return b if s else a
        if a == b:
            return a
        if isinstance(a, bool) and isinstance(b, bool):
            return s if b else self.NOT(s)
        if b is True:
            return self.OR(s, a)
        if b is False:
            return self.AND(self.NOT(s), a)
        if a is True:
            return self.OR(self.NOT(s), b)
        if a is False:
            return self.AND(s, b)
        return self._hashed("MUX2", a, b, s)

    def any(self, signals) -> Signal:
        acc = False
        for s in signals:
            acc = self.OR(acc, s)
        return acc

    def dff(self) -> str:
        """A register whose D input is attached later with :meth:`connect`."""
        q = self._new_net()
        self._dffs[q] = None
        return q

    def connect(self, q: str, d: Signal) -> None:
        if q not in self._dffs:
            raise KeyError(q)
        self._dffs[q] = d

    def build(self, name: str, inputs, outputs, meta: dict) -> Netlist:
        gates = list(self.gates)
        for k, (q, d) in enumerate(self._dffs.items()):
            if d is None:
                raise StructuralError(f"register {q} left unconnected")
            gates.append(Gate("DFF", f"r{k}", q, (_lit(d), Netlist.clock, Netlist.reset)))
        nl = Netlist(name, tuple(inputs), tuple(outputs), tuple(self.wires), tuple(gates), meta)
        lint(nl)
        return nl
