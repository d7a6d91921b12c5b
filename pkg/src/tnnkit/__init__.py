"""Temporal neural network columns: simulation, STDP training, netlist compilation and PPA estimation."""

from .column import (
    ColumnConfig,
    ColumnOutput,
    ColumnState,
    column_forward,
    column_forward_batch,
    neuron_fire_time,
    wta_select,
)
from .learn import StdpParams, init_weights, stdp_delta, stdp_update_column
from .network import (
    REJECT,
    EvalReport,
    LayerSpec,
    Network,
    NetworkSpec,
    evaluate,
    label_neurons,
    network_forward,
    train,
)
from .spikes import ABSENT, DomainError, EncoderConfig, Weight, encode_image, encode_value, encode_window

__version__ = "0.1.0"
