"""Single TNN column: p inputs, q neurons, p x q crossbar, 1-WTA output."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .spikes import ABSENT_CODE, FRAC_BITS, ONE, DomainError, Weight, spike_array, spike_list, to_raw

__all__ = [
    "ColumnConfig",
    "ColumnOutput",
    "ColumnState",
    "MODELS",
    "column_forward",
    "column_forward_batch",
    "neuron_fire_time",
    "potential_trace",
    "wta_select",
]

MODELS = ("ramp-no-leak", "step-no-leak")


@dataclass(frozen=True)
class ColumnConfig:
    p: int
    q: int
    theta: int
    T: int = 8
    model: str = "ramp-no-leak"
    w_max: int = 7
    horizon: Optional[int] = None

    def __post_init__(self):
        for name in ("p", "q", "theta"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.T < 1:
            raise DomainError(f"T must be >= 1, got {self.T}")
        if self.w_max < 1:
            raise DomainError(f"w_max must be >= 1, got {self.w_max}")
        if self.model not in MODELS:
            raise DomainError(f"unknown neuron model {self.model!r}")
        if self.horizon is None:
            object.__setattr__(self, "horizon", self.T + self.w_max)
        elif self.horizon < self.T:
            raise DomainError(f"horizon {self.horizon} shorter than window T={self.T}")

    @property
    def H(self) -> int:
        return self.horizon


@dataclass(frozen=True)
class ColumnState:
    """Column configuration plus its p x q raw fixed-point weight matrix."""

    config: ColumnConfig
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.int64)
        cfg = self.config
        if w.shape != (cfg.p, cfg.q):
            raise DomainError(f"weight matrix shape {w.shape} != ({cfg.p}, {cfg.q})")
        if w.min(initial=0) < 0 or w.max(initial=0) > cfg.w_max * ONE:
            raise DomainError("weights outside [0, w_max]")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_values(cls, config: ColumnConfig, values) -> "ColumnState":
        """Build from real-valued weights (rounded to the fixed-point grid)."""
        values = np.asarray(values, dtype=object)
        raw = np.vectorize(to_raw, otypes=[np.int64])(values) if values.size else values
        return cls(config, np.asarray(raw, dtype=np.int64))

    @property
    def ramps(self) -> np.ndarray:
        return self.weights >> FRAC_BITS

    def weight(self, i: int, j: int) -> Weight:
        return Weight(int(self.weights[i, j]))

    def values(self) -> np.ndarray:
        return self.weights / ONE

    def __eq__(self, other):
        if not isinstance(other, ColumnState):
            return NotImplemented
        return self.config == other.config and np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True)
class ColumnOutput:
    raw_fire_times: list
    winner: Optional[int]
    post_wta_times: list


def potential_trace(x: np.ndarray, ramps: np.ndarray, model: str, H: int) -> np.ndarray:
    """Body potential at every tick.

    ``x`` is ``(N, p)`` spike times, ``ramps`` is ``(p, q)`` integer ramp
    heights; returns ``(N, H, q)``.  Absent inputs contribute nothing because
    ``t - ABSENT`` is negative for every tick.
    """
    x = np.asarray(x, dtype=np.int64)
    ramps = np.asarray(ramps, dtype=np.int64)
    out = np.empty((x.shape[0], H, ramps.shape[1]), dtype=np.int64)
    for t in range(H):
        if model == "ramp-no-leak":
            elapsed = np.maximum(t - x, 0)[:, :, None]
            contrib = np.minimum(elapsed, ramps[None, :, :])
        else:
            contrib = (x <= t)[:, :, None] * ramps[None, :, :]
        out[:, t, :] = contrib.sum(axis=1)
    return out


def _first_crossing(pot: np.ndarray, theta: int) -> np.ndarray:
    crossed = pot >= theta
    hit = crossed.any(axis=1)
    first = crossed.argmax(axis=1)
    return np.where(hit, first, ABSENT_CODE).astype(np.int64)


def check_inputs(x: np.ndarray, cfg: ColumnConfig) -> None:
    if x.shape[-1] != cfg.p:
        raise DomainError(f"expected {cfg.p} inputs, got {x.shape[-1]}")
    finite = x[x != ABSENT_CODE]
    if finite.size and (finite.min() < 0 or finite.max() >= cfg.T):
        raise DomainError(f"finite input times must lie in [0, {cfg.T})")


def _as_raw_weights(weights) -> np.ndarray:
    return np.array([w.raw if isinstance(w, Weight) else to_raw(w) for w in weights], dtype=np.int64)


def neuron_fire_time(inputs: Sequence, weights: Sequence, cfg: ColumnConfig):
    """Earliest tick in [0, H) at which one neuron's potential reaches theta.

    ``weights`` may hold :class:`Weight` objects or plain numbers.
    """
    x = spike_array(inputs)
    raw = _as_raw_weights(weights)
    if raw.shape[0] != x.shape[0]:
        raise DomainError(f"{x.shape[0]} inputs but {raw.shape[0]} weights")
    check_inputs(x, cfg)
    pot = potential_trace(x[None, :], (raw >> FRAC_BITS)[:, None], cfg.model, cfg.H)
    return spike_list(_first_crossing(pot, cfg.theta))[0]


def _wta(raw: np.ndarray):
    """Row-wise 1-WTA on an ``(N, q)`` array; returns (winner, post) with -1 for no winner."""
    winner = raw.argmin(axis=1)
    best = raw[np.arange(raw.shape[0]), winner]
    winner = np.where(best == ABSENT_CODE, -1, winner)
    post = np.full_like(raw, ABSENT_CODE)
    rows = np.nonzero(winner >= 0)[0]
    post[rows, winner[rows]] = best[rows]
    return winner, post


def wta_select(raw_fire_times: Sequence):
    """Earliest neuron wins (lowest index on ties); the rest are suppressed."""
    raw = spike_array(raw_fire_times)
    if raw.size == 0:
        return None, []
    winner, post = _wta(raw[None, :])
    w = int(winner[0])
    return (None if w < 0 else w), spike_list(post[0])


def column_forward_batch(x: np.ndarray, state: ColumnState):
    """Vectorized forward over a batch of ``(N, p)`` spike vectors.

    Returns ``(raw, winner, post)``: raw and post-WTA fire times ``(N, q)``
    and the winner index per row (-1 when no neuron fires).
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.int64))
    check_inputs(x, state.config)
    return forward_ramps(x, state.ramps, state.config)


def forward_ramps(x: np.ndarray, ramps: np.ndarray, cfg: ColumnConfig):
    """Unchecked batch forward from integer ramps; see :func:`column_forward_batch`."""
    raw = _first_crossing(potential_trace(x, ramps, cfg.model, cfg.H), cfg.theta)
    winner, post = _wta(raw)
    return raw, winner, post


def column_forward(inputs: Sequence, state: ColumnState) -> ColumnOutput:
    x = spike_array(inputs)
    raw, winner, post = column_forward_batch(x[None, :], state)
    w = int(winner[0])
    return ColumnOutput(spike_list(raw[0]), None if w < 0 else w, spike_list(post[0]))
