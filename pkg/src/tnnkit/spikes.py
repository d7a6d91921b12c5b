"""Spike-time and weight value domains, and the input-to-spike encoders.

A spike time is a nonnegative integer tick, or :data:`ABSENT` when the line
never spikes.  ``ABSENT`` is an ``int`` whose value exceeds every tick a
simulation can produce, so ordinary integer comparison already gives the
required total order (absent sorts after every finite time) and numpy arrays
of spike times need no masking for ``min``/``<=``.

Weights are fixed point with :data:`FRAC_BITS` fractional bits.  They are
carried around as raw integers (``value * 2**FRAC_BITS``); :class:`Weight` is
the scalar wrapper used at API boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ABSENT",
    "DomainError",
    "EncoderConfig",
    "FRAC_BITS",
    "ONE",
    "Weight",
    "encode_image",
    "encode_value",
    "encode_window",
    "is_absent",
    "spike_array",
    "spike_list",
    "to_raw",
]

ABSENT_CODE = 2**31 - 1


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


class _Absent(int):
    def __new__(cls):
        return super().__new__(cls, ABSENT_CODE)

    def __repr__(self):
        return "ABSENT"

    __str__ = __repr__

    def __reduce__(self):
        return (_Absent, ())


ABSENT = _Absent()


def is_absent(t) -> bool:
    return int(t) >= ABSENT_CODE


def spike_array(times: Iterable) -> np.ndarray:
    """Coerce spike times (ints, ``ABSENT`` or ``None``) to an int64 array."""
    return np.array([ABSENT_CODE if t is None else int(t) for t in times], dtype=np.int64)


def spike_list(arr) -> list:
    """Inverse of :func:`spike_array`: python ints with ``ABSENT`` restored."""
    return [ABSENT if int(t) >= ABSENT_CODE else int(t) for t in np.asarray(arr).ravel()]


# --------------------------------------------------------------------------
# Fixed-point weights

FRAC_BITS = 8
ONE = 1 << FRAC_BITS


def to_raw(value) -> int:
    """Nearest fixed-point raw integer to ``value`` (ties away from zero)."""
    scaled = abs(Fraction(value)) * ONE
    raw = math.floor(scaled + Fraction(1, 2))
    return raw if value >= 0 else -raw


@dataclass(frozen=True, order=True)
class Weight:
    """A nonnegative fixed-point synaptic weight."""

    raw: int

    def __post_init__(self):
        if self.raw < 0:
            raise DomainError(f"weight must be nonnegative, got raw={self.raw}")

    @classmethod
    def from_value(cls, value) -> "Weight":
        return cls(to_raw(value))

    @property
    def value(self) -> float:
        return self.raw / ONE

    @property
    def effective_ramp(self) -> int:
        return self.raw >> FRAC_BITS

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"Weight({self.value:g})"


# --------------------------------------------------------------------------
# Encoders

MODES = ("direct-latency", "on-off-center")
NORMALIZATIONS = ("global", "per-window")


@dataclass(frozen=True)
class EncoderConfig:
    T: int = 8
    v_max: float = 255.0
    mode: str = "direct-latency"
    normalization: str = "global"

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 2:
            raise DomainError(f"T must be an integer >= 2, got {self.T}")
        if not self.v_max > 0:
            raise DomainError(f"v_max must be positive, got {self.v_max}")
        if self.mode not in MODES:
            raise DomainError(f"unknown encoder mode {self.mode!r}")
        if self.normalization not in NORMALIZATIONS:
            raise DomainError(f"unknown normalization {self.normalization!r}")


def _latency(num: np.ndarray, den: np.ndarray, T: int) -> np.ndarray:
    """round_half_away((1 - num/den) * (T-1)) for 0 <= num <= den.

    Float arithmetic decides everything except values sitting on a .5
    boundary, which are recomputed exactly so rounding never depends on
    the last ulp.
    """
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    num, den = np.broadcast_arrays(num, den)
    y = (den - num) * (T - 1) / den
    out = np.floor(y + 0.5)
    near_tie = np.abs(y - np.floor(y) - 0.5) < 1e-9
    for idx in zip(*np.nonzero(near_tie)):
        exact = (Fraction(float(den[idx])) - Fraction(float(num[idx]))) * (T - 1) / Fraction(float(den[idx]))
        out[idx] = math.floor(exact + Fraction(1, 2))
    return out.astype(np.int64)


def _check_nonnegative(values: np.ndarray) -> None:
    if np.any(np.isnan(values)):
        raise DomainError("input contains NaN")
    if np.any(values < 0):
        raise DomainError(f"negative input value {values[values < 0].ravel()[0]!r}")


def encode_value(v, cfg: EncoderConfig) -> int:
    """Map an intensity to a spike tick; stronger inputs spike earlier.

    Values above ``cfg.v_max`` are clamped, negative values are rejected.
    """
    arr = np.asarray([v], dtype=np.float64)
    _check_nonnegative(arr)
    arr = np.minimum(arr, cfg.v_max)
    return int(_latency(arr, cfg.v_max, cfg.T)[0])


def _encode_global(values: np.ndarray, cfg: EncoderConfig) -> np.ndarray:
    _check_nonnegative(values)
    return _latency(np.minimum(values, cfg.v_max), cfg.v_max, cfg.T)


def encode_window(values: Sequence, cfg: EncoderConfig) -> np.ndarray:
    """Encode one window of samples to a spike vector.

    With per-window normalization the window's [min, max] is stretched to
    [0, v_max] first; a constant window is encoded as mid-scale.  In
    on-off-center mode the inverted channel is appended, as for images.
    Accepts a 2-D array as a batch of windows (one per row).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise DomainError("cannot encode an empty window")
    if cfg.normalization == "global":
        return encode_image(values, cfg)
    if np.any(np.isnan(values)):
        raise DomainError("input contains NaN")
    lo = values.min(axis=-1, keepdims=True)
    hi = values.max(axis=-1, keepdims=True)
    span = hi - lo
    flat = span == 0
    num = np.where(flat, 1.0, values - lo)
    den = np.where(flat, 2.0, span)
    on = _latency(num, den, cfg.T)
    if cfg.mode == "direct-latency":
        return on
    return np.concatenate([on, _latency(den - num, den, cfg.T)], axis=-1)


def encode_image(pixels: Sequence, cfg: EncoderConfig) -> np.ndarray:
    """Encode pixel intensities; on-off-center mode appends an inverted channel.

    Accepts a 2-D array as a batch of images (one per row).
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    on = _encode_global(pixels, cfg)
    if cfg.mode == "direct-latency":
        return on
    inverted = cfg.v_max - np.minimum(pixels, cfg.v_max)
    off = _latency(inverted, cfg.v_max, cfg.T)
    return np.concatenate([on, off], axis=-1)
