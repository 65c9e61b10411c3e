"""
convolutional LSTM whose hidden and cell states are deformably aligned to the
current input before each update, run forward and backward over a sequence
"""

import logging
from collections import namedtuple

import torch
from torch import nn

from .core_ops import DeformableSampler
from .temporal_interpolation import (
    OffsetPredictor,
    PCDAligner,
    predict_offsets,
    sample_features,
)

LSTMState = namedtuple("LSTMState", ["hidden", "cell"])


def zero_state(like, hidden_channels):
    """all-zero LSTMState matching batch, spatial dims, dtype and device of like"""
    batch, _, height, width = like.shape
    zeros = like.new_zeros((batch, hidden_channels, height, width))
    return LSTMState(zeros, zeros.clone())


class StateAligner(nn.Module):
    """offset predictor g^h or g^c with its sampler, or a PCDAligner"""

    def __init__(self, channels=64, groups=8, pcd_levels=1, kernel_size=3):
        super().__init__()
        self.pcd_levels = pcd_levels
        if pcd_levels > 1:
            self.pcd = PCDAligner(channels, groups, pcd_levels, kernel_size)
        else:
            self.sampler = DeformableSampler(channels, channels, kernel_size, groups)
            self.predictor = OffsetPredictor(channels, self.sampler.offset_channels)

    def forward(self, state_map, f_t):
        return align_state(state_map, f_t, self)


def align_state(state_map, f_t, aligner):
    """state_map deformably sampled with offsets predicted from [state_map, f_t]"""
    if state_map.shape[0] != f_t.shape[0] or state_map.shape[2:] != f_t.shape[2:]:
        msg = "state shape %s not aligned with input shape %s" % (
            tuple(state_map.shape),
            tuple(f_t.shape),
        )
        raise ValueError(msg)
    if aligner.pcd_levels > 1:
        return aligner.pcd(state_map, f_t)
    offsets = predict_offsets(state_map, f_t, aligner.predictor)
    return sample_features(state_map, offsets, aligner.sampler)


class ConvLSTMCell(nn.Module):
    """gate convolution over [x, h] giving input, forget, output gates and candidate"""

    def __init__(self, input_channels=64, hidden_channels=64, kernel_size=3):
        super().__init__()
        self.input_channels = input_channels
        self.hidden_channels = hidden_channels
        self.gates = nn.Conv2d(
            input_channels + hidden_channels,
            4 * hidden_channels,
            kernel_size,
            1,
            kernel_size // 2,
            bias=True,
        )

    def forward(self, state, x):
        return convlstm_cell(state, x, self)


def convlstm_cell(state, x, cell_weights):
    """one ConvLSTM update, returns new LSTMState"""
    hidden, cell = state
    if hidden.shape != cell.shape:
        msg = "hidden shape %s != cell shape %s" % (
            tuple(hidden.shape),
            tuple(cell.shape),
        )
        raise ValueError(msg)
    if hidden.shape[1] != cell_weights.hidden_channels:
        msg = "state has %d channels, cell expects %d" % (
            hidden.shape[1],
            cell_weights.hidden_channels,
        )
        raise ValueError(msg)
    if x.shape[1] != cell_weights.input_channels:
        msg = "input has %d channels, cell expects %d" % (
            x.shape[1],
            cell_weights.input_channels,
        )
        raise ValueError(msg)
    if x.shape[0] != hidden.shape[0] or x.shape[2:] != hidden.shape[2:]:
        msg = "input shape %s not aligned with state shape %s" % (
            tuple(x.shape),
            tuple(hidden.shape),
        )
        raise ValueError(msg)

    gates = cell_weights.gates(torch.cat([x, hidden], dim=1))
    in_gate, forget_gate, out_gate, candidate = torch.chunk(gates, 4, dim=1)
    cell = torch.sigmoid(forget_gate) * cell + torch.sigmoid(in_gate) * torch.tanh(
        candidate
    )
    hidden = torch.sigmoid(out_gate) * torch.tanh(cell)
    return LSTMState(hidden, cell)


class DeformableConvLSTM(nn.Module):
    """
    ConvLSTM with deformable state alignment

    aligned=False gives a vanilla ConvLSTM, bidirectional=False runs the forward
    direction only. The backward direction reuses every parameter of the forward one.
    """

    def __init__(
        self,
        channels=64,
        groups=8,
        pcd_levels=1,
        aligned=True,
        bidirectional=True,
        kernel_size=3,
    ):
        super().__init__()
        self.channels = channels
        self.aligned = aligned
        self.bidirectional = bidirectional
        if aligned:
            self.aligner_h = StateAligner(channels, groups, pcd_levels, kernel_size)
            self.aligner_c = StateAligner(channels, groups, pcd_levels, kernel_size)
        self.cell = ConvLSTMCell(channels, channels, 3)

    @property
    def out_channels(self):
        """channel count of each output map"""
        return 2 * self.channels if self.bidirectional else self.channels

    def step(self, state, x):
        """align state to x, if enabled, then apply the cell"""
        if self.aligned:
            state = LSTMState(
                align_state(state.hidden, x, self.aligner_h),
                align_state(state.cell, x, self.aligner_c),
            )
        return self.cell(state, x)

    def run_direction(self, features):
        """hidden states of a single pass over features, from zero initial state"""
        state = zero_state(features[0], self.channels)
        res = []
        for x in features:
            state = self.step(state, x)
            res.append(state.hidden)
        return res

    def forward(self, features):
        return bidirectional_pass(features, self)


def bidirectional_pass(features, params):
    """
    forward pass over features and, if params.bidirectional, a backward pass over
    the reversed list; outputs concatenate forward and backward hidden states
    """
    if len(features) == 0:
        msg = "bidirectional_pass needs a non-empty sequence"
        raise ValueError(msg)
    logger = logging.getLogger(__name__)
    logger.debug(
        "aggregating %d maps, bidirectional=%s", len(features), params.bidirectional
    )
    hidden_fwd = params.run_direction(features)
    if not params.bidirectional:
        return hidden_fwd
    hidden_bwd = params.run_direction(features[::-1])[::-1]
    return [torch.cat([h_f, h_b], dim=1) for h_f, h_b in zip(hidden_fwd, hidden_bwd)]
