"""Baseline features: Hamming-windowed one-sided magnitude spectrum."""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteSample
from .ingest import Segment


def hamming_window(l_seq: int) -> np.ndarray:
    """Symmetric Hamming window w[n] = 0.54 - 0.46*cos(2*pi*n/(l_seq-1))."""
    n = np.arange(l_seq)
    return 0.54 - 0.46 * np.cos(2 * np.pi * n / (l_seq - 1))


def fft_features(segment_channel: np.ndarray) -> np.ndarray:
    """Magnitude spectrum of the Hamming-windowed input, bins 0..l_seq/2.

    DC and Nyquist bins are both retained.
    """
    x = np.asarray(segment_channel, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteSample("<segment>", "<channel>", int(np.flatnonzero(~np.isfinite(x))[0]))
    return np.abs(np.fft.rfft(x * hamming_window(len(x))))


def fft_vector_length(n_ch: int, l_seq: int) -> int:
    return n_ch * (l_seq // 2 + 1)


def assemble_fft_vector(segment: Segment) -> np.ndarray:
    """Per-channel magnitude spectra concatenated in channel order."""
    return np.concatenate([fft_features(ch) for ch in segment.acc_data])


def fft_group_map(n_ch: int, l_seq: int) -> np.ndarray:
    """Standardization group per coefficient position: one group per channel."""
    n_bins = l_seq // 2 + 1
    return np.repeat(np.arange(n_ch), n_bins)
