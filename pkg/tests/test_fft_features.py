import numpy as np
import pytest

from fleetsense.errors import NonFiniteSample
from fleetsense.fft_features import (
    assemble_fft_vector,
    fft_features,
    fft_group_map,
    fft_vector_length,
    hamming_window,
)
from fleetsense.ingest import Segment


def test_hamming_window_endpoints_and_peak():
    w = hamming_window(64)
    assert w[0] == pytest.approx(0.08)
    assert w[-1] == pytest.approx(0.08)
    assert w.max() == pytest.approx(1.0, abs=1e-3)
    assert np.allclose(w, w[::-1])


def test_fft_features_length_and_nonneg():
    x = np.random.default_rng(0).standard_normal(128)
    feats = fft_features(x)
    assert feats.shape == (65,)
    assert np.all(feats >= 0)


def test_fft_features_dc():
    # constant input: all energy in bin 0, magnitude = c * sum(w)
    c = 3.0
    x = np.full(128, c)
    feats = fft_features(x)
    assert feats[0] == pytest.approx(c * hamming_window(128).sum())
    # the window spectrum itself has mass at bins +-1 (0.23 * l_seq)
    assert feats[1] == pytest.approx(c * 0.23 * 128, rel=1e-2)
    assert feats[2:].max() < feats[0] * 0.01


def test_fft_features_sinusoid_peak_bin():
    l_seq = 256
    k = 32  # exact bin
    n = np.arange(l_seq)
    x = np.sin(2 * np.pi * k * n / l_seq)
    feats = fft_features(x)
    assert np.argmax(feats) == k
    # windowed sinusoid magnitude is close to A*sum(w)/2 at the peak bin
    assert feats[k] == pytest.approx(hamming_window(l_seq).sum() / 2, rel=5e-2)


def test_fft_features_nonfinite():
    x = np.zeros(64)
    x[5] = np.nan
    with pytest.raises(NonFiniteSample):
        fft_features(x)


def test_assemble_fft_vector():
    rng = np.random.default_rng(1)
    seg = Segment(
        file_id="f",
        index=0,
        acc_data=rng.standard_normal((3, 64)),
        strain_data=np.empty((0, 64)),
        acc_names=["a0", "a1", "a2"],
        strain_names=[],
    )
    vec = assemble_fft_vector(seg)
    assert vec.shape == (fft_vector_length(3, 64),)
    per = 64 // 2 + 1
    assert np.allclose(vec[per : 2 * per], fft_features(seg.acc_data[1]))


def test_fft_group_map():
    gm = fft_group_map(3, 64)
    assert len(gm) == fft_vector_length(3, 64)
    assert gm.tolist() == sorted(gm.tolist())
    assert set(gm) == {0, 1, 2}
