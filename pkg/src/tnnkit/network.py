"""Multi-column layers, multi-layer networks, training and evaluation.

Layer ``l+1`` consumes the concatenated post-WTA outputs of every column in
layer ``l``.  Each column reads a contiguous slice of its layer's input
vector; slices may overlap.  Training is greedy and layer-wise: layer 0 runs
all of its epochs first, then layer 1 trains on the (now frozen) outputs of
layer 0, and so on.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .column import ColumnConfig, ColumnState, check_inputs, column_forward, column_forward_batch, forward_ramps
from .learn import StdpParams, init_weights, stdp_update_raw
from .spikes import ABSENT_CODE, FRAC_BITS, ONE, DomainError, EncoderConfig, encode_window, spike_array

__all__ = [
    "EvalReport",
    "encode_series",
    "layer_outputs",
    "LayerSpec",
    "Network",
    "NetworkSpec",
    "REJECT",
    "evaluate",
    "final_winners",
    "label_neurons",
    "majority_labels",
    "network_forward",
    "score_winners",
    "series_winners",
    "sliding_windows",
    "train",
]

# Label assigned to output neurons that never win.
REJECT = None


@dataclass(frozen=True)
class LayerSpec:
    columns: tuple
    input_map: tuple

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "input_map", tuple(tuple(int(v) for v in s) for s in self.input_map))
        if not self.columns:
            raise DomainError("a layer needs at least one column")
        if len(self.columns) != len(self.input_map):
            raise DomainError("input_map needs exactly one slice per column")
        for cfg, (start, stop) in zip(self.columns, self.input_map):
            if stop - start != cfg.p:
                raise DomainError(f"slice [{start}, {stop}) does not match column p={cfg.p}")

    @property
    def width(self) -> int:
        """Output width: total neuron count over the layer's columns."""
        return sum(c.q for c in self.columns)

    @property
    def horizon(self) -> int:
        return max(c.H for c in self.columns)

    @classmethod
    def single(cls, cfg: ColumnConfig) -> "LayerSpec":
        return cls((cfg,), ((0, cfg.p),))


@dataclass(frozen=True)
class NetworkSpec:
    input_width: int
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise DomainError("a network needs at least one layer")
        width = self.input_width
        upstream_horizon = None
        for l, layer in enumerate(self.layers):
            for start, stop in layer.input_map:
                if start < 0 or stop > width:
                    raise DomainError(f"layer {l}: slice [{start}, {stop}) outside input width {width}")
            if upstream_horizon is not None:
                for cfg in layer.columns:
                    if cfg.T < upstream_horizon:
                        raise DomainError(
                            f"layer {l}: column window T={cfg.T} shorter than upstream horizon {upstream_horizon}")
            width = layer.width
            upstream_horizon = layer.horizon

    @property
    def output_width(self) -> int:
        return self.layers[-1].width


@dataclass(frozen=True)
class Network:
    spec: NetworkSpec
    states: tuple = field(repr=False)

    def __post_init__(self):
        states = tuple(tuple(layer) for layer in self.states)
        object.__setattr__(self, "states", states)
        if len(states) != len(self.spec.layers):
            raise DomainError("one state list per layer required")
        for layer, cols in zip(self.spec.layers, states):
            if tuple(s.config for s in cols) != layer.columns:
                raise DomainError("column states do not match the layer shapes")

    @classmethod
    def init(cls, spec: NetworkSpec, scheme: str = "uniform-random", params: StdpParams | None = None,
             value=None) -> "Network":
        """Fresh network; column k (in layer order) is seeded with ``params.seed + k``."""
        params = params or StdpParams()
        states, k = [], 0
        for layer in spec.layers:
            cols = []
            for cfg in layer.columns:
                col_params = dataclasses.replace(params, seed=(params.seed + k) % 2**64)
                w = init_weights(cfg.p, cfg.q, scheme, col_params, value=value, w_max=cfg.w_max)
                cols.append(ColumnState(cfg, w))
                k += 1
            states.append(cols)
        return cls(spec, states)

    def with_layer(self, l: int, cols) -> "Network":
        states = list(self.states)
        states[l] = tuple(cols)
        return Network(self.spec, states)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.spec == other.spec and all(
            a == b for la, lb in zip(self.states, other.states) for a, b in zip(la, lb))

    __hash__ = None


def _check_width(x: np.ndarray, width: int) -> None:
    if x.shape[-1] != width:
        raise DomainError(f"input width {x.shape[-1]} does not match network input width {width}")


def _layer_batch(x: np.ndarray, layer: LayerSpec, cols) -> np.ndarray:
    outs = []
    for (start, stop), state in zip(layer.input_map, cols):
        _, _, post = column_forward_batch(x[:, start:stop], state)
        outs.append(post)
    return np.concatenate(outs, axis=1)


def layer_outputs(net: Network, X, upto: Optional[int] = None) -> list:
    """Post-WTA outputs ``(N, width)`` of layers ``0..upto-1`` for a batch."""
    x = np.atleast_2d(np.asarray(X, dtype=np.int64))
    _check_width(x, net.spec.input_width)
    upto = len(net.spec.layers) if upto is None else upto
    outs = []
    for layer, cols in zip(net.spec.layers[:upto], net.states[:upto]):
        x = _layer_batch(x, layer, cols)
        outs.append(x)
    return outs


def network_forward(inputs: Sequence, net: Network) -> list:
    """Per-layer list of :class:`ColumnOutput` for a single spike vector."""
    x = spike_array(inputs)
    _check_width(x, net.spec.input_width)
    result = []
    for layer, cols in zip(net.spec.layers, net.states):
        outs = [column_forward(x[start:stop], state) for (start, stop), state in zip(layer.input_map, cols)]
        result.append(outs)
        x = np.concatenate([spike_array(o.post_wta_times) for o in outs])
    return result


def final_winners(net: Network, X) -> np.ndarray:
    """Winning final-layer output index per sample, -1 when nothing fires.

    With several final-layer columns the earliest output spike wins, ties
    going to the lowest concatenated index.
    """
    out = layer_outputs(net, X)[-1]
    winner = out.argmin(axis=1)
    return np.where(out[np.arange(out.shape[0]), winner] == ABSENT_CODE, -1, winner)


# --------------------------------------------------------------------------
# Training


def train(dataset, net: Network, params: StdpParams, epochs: int):
    """Greedy layer-wise STDP training.

    ``dataset`` is an ``(N, input_width)`` array of spike vectors presented
    in row order.  Returns the trained network and a log with one entry per
    (layer, epoch) holding the summed absolute weight change.
    """
    X = np.atleast_2d(np.asarray(dataset, dtype=np.int64))
    if X.shape[0] == 0 or X.size == 0:
        raise DomainError("cannot train on an empty dataset")
    if epochs < 1:
        raise DomainError("epochs must be >= 1")
    _check_width(X, net.spec.input_width)
    for layer in net.spec.layers:
        for cfg in layer.columns:
            params.check_range(cfg.w_max)

    log = []
    for l, layer in enumerate(net.spec.layers):
        if l == 0:
            for (start, stop), cfg in zip(layer.input_map, layer.columns):
                check_inputs(X[:, start:stop], cfg)
        inputs = X if l == 0 else layer_outputs(net, X, upto=l)[-1]
        weights = [s.weights.copy() for s in net.states[l]]
        configs = layer.columns
        for epoch in range(epochs):
            moved = 0
            for x in inputs:
                for k, ((start, stop), cfg) in enumerate(zip(layer.input_map, configs)):
                    xs = x[start:stop]
                    _, _, post = forward_ramps(xs[None, :], weights[k] >> FRAC_BITS, cfg)
                    new = stdp_update_raw(xs[:, None], post[0][None, :], weights[k], params, cfg.w_max)
                    moved += int(np.abs(new - weights[k]).sum())
                    weights[k] = new
            log.append({"layer": l, "epoch": epoch, "weight_change_l1": moved / ONE})
        net = net.with_layer(l, [ColumnState(cfg, w) for cfg, w in zip(configs, weights)])
    return net, log


# --------------------------------------------------------------------------
# Labeling and scoring


@dataclass
class EvalReport:
    """Classification and clustering scores.

    ``confusion[c][j]`` counts samples of ``classes[c]`` won by output ``j``;
    samples with no winner are tallied per class in ``no_winner``, so each
    confusion row plus its ``no_winner`` entry equals that class's count.
    """

    accuracy: float
    purity: float
    confusion: list
    classes: list
    no_winner: list
    samples: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def majority_labels(winners, labels, n_outputs: int) -> dict:
    winners = np.asarray(winners)
    labels = np.asarray(labels)
    label_map = {}
    for j in range(n_outputs):
        won = labels[winners == j]
        if won.size == 0:
            label_map[j] = REJECT
            continue
        classes, counts = np.unique(won, return_counts=True)
        label_map[j] = int(classes[np.argmax(counts)])  # np.unique sorts, argmax takes first max
    return label_map


def score_winners(winners, labels, label_map: dict, n_outputs: int) -> EvalReport:
    winners = np.asarray(winners)
    labels = np.asarray(labels)
    n = int(labels.shape[0])
    classes = sorted(set(int(c) for c in labels))
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), n_outputs), dtype=np.int64)
    no_winner = np.zeros(len(classes), dtype=np.int64)
    correct = 0
    for w, c in zip(winners, labels):
        c = int(c)
        if w < 0:
            no_winner[index[c]] += 1
            continue
        confusion[index[c], w] += 1
        if label_map.get(int(w), REJECT) == c:
            correct += 1
    purity = confusion.max(axis=0).sum() / n if n and confusion.size else 0.0
    return EvalReport(
        accuracy=correct / n if n else 0.0,
        purity=float(purity),
        confusion=confusion.tolist(),
        classes=classes,
        no_winner=no_winner.tolist(),
        samples=n,
    )


def label_neurons(net: Network, X, labels) -> dict:
    """Majority class per final-layer output; never-winning outputs map to REJECT."""
    return majority_labels(final_winners(net, X), labels, net.spec.output_width)


def evaluate(net: Network, X, labels, label_map: dict) -> EvalReport:
    return score_winners(final_winners(net, X), labels, label_map, net.spec.output_width)


# --------------------------------------------------------------------------
# Time-series windowing


def sliding_windows(series, length: int, stride: int = 1) -> np.ndarray:
    series = np.asarray(series, dtype=np.float64)
    if length < 1 or stride < 1:
        raise DomainError("window length and stride must be >= 1")
    if series.shape[-1] < length:
        raise DomainError(f"series of length {series.shape[-1]} shorter than window {length}")
    starts = range(0, series.shape[-1] - length + 1, stride)
    return np.stack([series[s:s + length] for s in starts])


def encode_series(series_list, enc: EncoderConfig, length: int, stride: int):
    """Encode every window of every series.

    Returns the stacked spike vectors and, per window, the index of the
    series it came from.
    """
    blocks, owner = [], []
    for i, s in enumerate(series_list):
        w = encode_window(sliding_windows(s, length, stride), enc)
        blocks.append(w)
        owner.extend([i] * w.shape[0])
    return np.concatenate(blocks), np.asarray(owner)


def series_winners(net: Network, series_list, enc: EncoderConfig, length: int, stride: int) -> np.ndarray:
    """Series-level winner: majority over per-window winners (ties to lowest index)."""
    X, owner = encode_series(series_list, enc, length, stride)
    wins = final_winners(net, X)
    out = np.full(len(series_list), -1, dtype=np.int64)
    for i in range(len(series_list)):
        w = wins[(owner == i) & (wins >= 0)]
        if w.size:
            out[i] = int(np.bincount(w).argmax())
    return out
