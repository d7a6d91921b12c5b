"""STDP rule table and weight initialization.

Each synapse sees one input time ``x`` and its neuron's post-WTA output
time ``y``.  The update is one of five cases:

====================  ==========  ============================
x                     y           update
====================  ==========  ============================
finite, ``x <= y``    finite      ``+ mu_capture`` (capture)
finite, ``x > y``     finite      ``- mu_backoff`` (backoff)
finite                absent      ``+ mu_search`` (search)
absent                finite      ``- mu_backoff`` (backoff)
absent                absent      unchanged
====================  ==========  ============================

All arithmetic is on raw fixed-point integers and saturates at
``[0, w_max]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .column import ColumnOutput, ColumnState
from .spikes import ABSENT_CODE, ONE, DomainError, Weight, spike_array

__all__ = ["StdpParams", "init_weights", "stdp_delta", "stdp_update_column", "stdp_update_raw"]


def _exact_raw(name: str, value) -> int:
    scaled = Fraction(value) * ONE
    if scaled.denominator != 1:
        raise DomainError(f"{name}={value} is not representable with 8 fractional bits")
    return int(scaled)


@dataclass(frozen=True)
class StdpParams:
    mu_capture: float = 1.0
    mu_backoff: float = 1.0
    mu_search: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("mu_capture", "mu_backoff", "mu_search"):
            if _exact_raw(name, getattr(self, name)) < 0:
                raise DomainError(f"{name} must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def raw(self) -> tuple[int, int, int]:
        """(capture, backoff, search) as raw fixed-point increments."""
        return (
            _exact_raw("mu_capture", self.mu_capture),
            _exact_raw("mu_backoff", self.mu_backoff),
            _exact_raw("mu_search", self.mu_search),
        )

    def check_range(self, w_max: int) -> None:
        for name in ("mu_capture", "mu_backoff", "mu_search"):
            if getattr(self, name) > w_max:
                raise DomainError(f"{name} exceeds w_max={w_max}")


def stdp_update_raw(x: np.ndarray, y: np.ndarray, w: np.ndarray, params: StdpParams, w_max: int) -> np.ndarray:
    """Apply the rule table element-wise; x, y, w broadcast against each other."""
    cap, back, search = params.raw
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    xf = x != ABSENT_CODE
    yf = y != ABSENT_CODE
    delta = np.where(
        xf & yf,
        np.where(x <= y, cap, -back),
        np.where(xf, search, np.where(yf, -back, 0)),
    )
    return np.clip(np.asarray(w, dtype=np.int64) + delta, 0, w_max * ONE)


def stdp_delta(x, y, w, params: StdpParams, w_max: int) -> Weight:
    """Updated weight for a single synapse (``w`` is a Weight or a number)."""
    raw = w.raw if isinstance(w, Weight) else Weight.from_value(w).raw
    xs, ys = spike_array([x, y])
    return Weight(int(stdp_update_raw(xs, ys, raw, params, w_max)))


def stdp_update_column(state: ColumnState, inputs, output: ColumnOutput, params: StdpParams) -> ColumnState:
    cfg = state.config
    x = spike_array(inputs)
    y = spike_array(output.post_wta_times)
    if x.shape[0] != cfg.p or y.shape[0] != cfg.q:
        raise DomainError(f"update shapes ({x.shape[0]}, {y.shape[0]}) do not match column ({cfg.p}, {cfg.q})")
    new = stdp_update_raw(x[:, None], y[None, :], state.weights, params, cfg.w_max)
    return ColumnState(cfg, new)


def init_weights(p: int, q: int, scheme: str = "uniform-random", params: StdpParams | None = None,
                 *, value=None, w_max: int = 7) -> np.ndarray:
    """Initial raw weight matrix.

    ``scheme="constant"`` fills every entry with ``value``.
    ``scheme="uniform-random"`` draws integer parts uniformly from
    ``{0..w_max}`` with numpy's PCG64 generator seeded by ``params.seed``;
    fractional bits are zero.
    """
    if p < 1 or q < 1:
        raise DomainError("p and q must be >= 1")
    if scheme == "constant":
        if value is None:
            raise DomainError("constant initialization needs a value")
        raw = Weight.from_value(value).raw
        if raw > w_max * ONE:
            raise DomainError(f"constant {value} exceeds w_max={w_max}")
        return np.full((p, q), raw, dtype=np.int64)
    if scheme == "uniform-random":
        seed = params.seed if params is not None else 0
        rng = np.random.Generator(np.random.PCG64(seed))
        return rng.integers(0, w_max + 1, size=(p, q), dtype=np.int64) * ONE
    raise DomainError(f"unknown init scheme {scheme!r}")
