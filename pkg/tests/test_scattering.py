import numpy as np
import pytest

from fleetsense.errors import InvalidConfig, InvalidScale, NonFiniteSample
from fleetsense.scattering import (
    XI_MAX,
    FilterBank,
    ScatteringConfig,
    _pad_reflect,
    build_filterbank,
    scatter,
    scattering_group_map,
)


def small_bank():
    return build_filterbank(ScatteringConfig(l_seq=256, J=3, Q1=2, Q2=2))


# ------------------------------------------------------------- direct oracle


def circular_conv(x, h_hat):
    """O(N^2) circular convolution with the time-domain kernel of h_hat."""
    h = np.fft.ifft(h_hat)
    n = len(x)
    out = np.empty(n, dtype=complex)
    idx = np.arange(n)
    for k in range(n):
        out[k] = np.sum(x * h[(k - idx) % n])
    return out


def oracle_scatter(x, bank, stride):
    """Scattering via direct time-domain circular convolutions."""
    cfg = bank.cfg
    n = bank.padded_length
    xp = _pad_reflect(np.asarray(x, dtype=float), n)
    pad_left = (n - cfg.l_seq) // 2
    window = slice(pad_left, pad_left + cfg.l_seq)

    def average(sig):
        return circular_conv(sig, bank.phi_hat).real[window][::stride]

    s0 = average(xp)
    s1 = []
    s2 = []
    for i in range(len(bank.xi1)):
        u1 = np.abs(circular_conv(xp, bank.psi1_hat[i]))
        s1.append(average(u1))
        for pi, j in bank.paths:
            if pi != i:
                continue
            u2 = np.abs(circular_conv(u1, bank.psi2_hat[j]))
            s2.append(average(u2))
    return s0, np.array(s1), np.array(s2)


def test_matches_direct_convolution_oracle():
    bank = small_bank()
    rng = np.random.default_rng(0)
    x = rng.standard_normal(256)
    got = scatter(x, bank)
    s0, s1, s2 = oracle_scatter(x, bank, bank.cfg.t_support)
    scale = np.abs(s0).max()
    assert np.allclose(got.s0, s0, rtol=1e-6, atol=1e-9 * scale)
    assert np.allclose(got.s1, s1, rtol=1e-6, atol=1e-9 * max(s1.max(), 1e-30))
    assert np.allclose(got.s2, s2, rtol=1e-6, atol=1e-9 * max(s2.max(), 1e-30))


def test_zero_input_zero_output():
    bank = small_bank()
    vec = scatter(np.zeros(256), bank).flatten()
    assert np.all(vec == 0.0)


def test_constant_input_only_order_zero():
    bank = small_bank()
    c = 7.3
    got = scatter(np.full(256, c), bank)
    # band-pass filters have exactly zero mean, so orders 1-2 vanish
    assert np.allclose(got.s0, c, rtol=1e-6)
    assert np.abs(got.s1).max() < 1e-6 * abs(c)
    assert np.abs(got.s2).max() < 1e-6 * abs(c)


# ------------------------------------------------------------- filter bank


def test_littlewood_paley_bound():
    for cfg in (
        ScatteringConfig(l_seq=256, J=3, Q1=2, Q2=2),
        ScatteringConfig(l_seq=512, J=5, Q1=6, Q2=1),
    ):
        bank = build_filterbank(cfg)
        lp = bank.phi_hat**2 + np.sum(bank.psi1_hat**2, axis=0)
        assert lp.max() <= 1.0 + 1e-12
        lp2 = bank.phi_hat**2 + np.sum(bank.psi2_hat**2, axis=0)
        assert lp2.max() <= 1.0 + 1e-12


def test_filters_have_zero_mean():
    bank = small_bank()
    # response at f = 0 is index 0 of the fftfreq grid
    assert np.abs(bank.psi1_hat[:, 0]).max() == 0.0
    assert np.abs(bank.psi2_hat[:, 0]).max() == 0.0
    assert bank.phi_hat[0] == pytest.approx(1.0)


def test_lattice_geometry():
    bank = build_filterbank(ScatteringConfig(l_seq=256, J=3, Q1=2, Q2=1))
    assert len(bank.xi1) == 3 * 2
    assert len(bank.xi2) == 3
    assert bank.xi1[0] == pytest.approx(XI_MAX)
    ratios = bank.xi1[1:] / bank.xi1[:-1]
    assert np.allclose(ratios, 2.0 ** (-1 / 2))
    assert np.all(np.diff(bank.xi1) < 0)


def test_path_pruning():
    bank = small_bank()
    for i, j in bank.paths:
        assert bank.xi2[j] < bank.xi1[i]
    # every admissible pair is present
    n_admissible = sum(
        1 for i in range(len(bank.xi1)) for j in range(len(bank.xi2))
        if bank.xi2[j] < bank.xi1[i]
    )
    assert len(bank.paths) == n_admissible


def test_layout_and_coefficient_count():
    bank = small_bank()
    rng = np.random.default_rng(1)
    vec = scatter(rng.standard_normal(256), bank).flatten()
    assert len(vec) == bank.n_coefficients
    layout = bank.layout()
    assert len(layout) == bank.n_coefficients
    assert [row["position"] for row in layout] == list(range(len(layout)))
    orders = [row["order"] for row in layout]
    assert orders == sorted(orders)


def test_stride_override():
    bank = small_bank()
    rng = np.random.default_rng(2)
    x = rng.standard_normal(256)
    full = scatter(x, bank, stride=1)
    sub = scatter(x, bank)
    t = bank.cfg.t_support
    assert np.allclose(full.s0[::t], sub.s0)
    assert np.allclose(full.s1[:, ::t], sub.s1)


def test_nonexpansive_in_energy():
    # LP bound <= 1 makes each filtering layer nonexpansive
    bank = small_bank()
    rng = np.random.default_rng(3)
    x = rng.standard_normal(256)
    y = rng.standard_normal(256)
    vx = scatter(x, bank, stride=1)
    vy = scatter(y, bank, stride=1)
    dist = np.sqrt(
        np.sum((vx.s0 - vy.s0) ** 2)
        + np.sum((vx.s1 - vy.s1) ** 2)
        + np.sum((vx.s2 - vy.s2) ** 2)
    )
    assert dist <= np.linalg.norm(x - y) * (1.0 + 1e-9)


# ------------------------------------------------------------- validation


def test_config_validation():
    with pytest.raises(InvalidScale):
        ScatteringConfig(l_seq=16, J=5)
    with pytest.raises(InvalidConfig):
        ScatteringConfig(l_seq=256, J=3, Q1=0)
    with pytest.raises(InvalidConfig):
        ScatteringConfig(l_seq=100, J=3, T=7)


def test_scatter_input_validation():
    bank = small_bank()
    with pytest.raises(InvalidConfig):
        scatter(np.zeros(100), bank)
    bad = np.zeros(256)
    bad[17] = np.inf
    with pytest.raises(NonFiniteSample):
        scatter(bad, bank)


def test_group_map_shape():
    bank = small_bank()
    gm = scattering_group_map(5, bank)
    assert len(gm) == 5 * bank.n_coefficients
    assert set(gm) == set(range(15))
