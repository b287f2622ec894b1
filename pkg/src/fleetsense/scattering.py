"""Two-layer 1-D wavelet scattering with Morlet filter banks.

Coefficients are computed as cascaded band-pass convolutions and modulus
nonlinearities, each path averaged by a low-pass filter and subsampled:

    s0      = x * phi
    s1[i]   = |x * psi1[i]| * phi
    s2[i,j] = ||x * psi1[i]| * psi2[j]| * phi      (only for xi2[j] < xi1[i])

All convolutions run in the frequency domain on a reflect-padded copy of
the input (length 2*l_seq) to suppress wrap-around.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, InvalidScale, NonFiniteSample
from .ingest import Segment

# highest center frequency of the dilation lattice, cycles/sample
XI_MAX = 0.35


@dataclass(frozen=True)
class ScatteringConfig:
    l_seq: int
    J: int = 5
    Q1: int = 6
    Q2: int = 1
    T: int | None = None  # low-pass support; defaults to 2**J

    def __post_init__(self):
        if self.J < 1 or self.Q1 < 1 or self.Q2 < 1:
            raise InvalidConfig("J, Q1, Q2 must be >= 1")
        if 2**self.J > self.l_seq:
            raise InvalidScale(f"2**J = {2**self.J} exceeds l_seq = {self.l_seq}")
        t = self.T if self.T is not None else 2**self.J
        if t < 1 or self.l_seq % t != 0:
            raise InvalidConfig(f"T = {t} must divide l_seq = {self.l_seq}")

    @property
    def t_support(self) -> int:
        return self.T if self.T is not None else 2**self.J


def _relative_bandwidth(q: int) -> float:
    # adjacent lattice filters intersect at -3 dB
    a = 2.0 ** (-1.0 / q)
    return (1 - a) / ((1 + a) * np.sqrt(np.log(2)))


def _morlet_hat(freqs: np.ndarray, xi: float, sigma: float) -> np.ndarray:
    # Gaussian band-pass with an analytic correction term enforcing an
    # exactly zero mean (zero response at f = 0)
    gauss = np.exp(-((freqs - xi) ** 2) / (2 * sigma**2))
    kappa = np.exp(-(xi**2) / (2 * sigma**2))
    return gauss - kappa * np.exp(-(freqs**2) / (2 * sigma**2))


def _lattice(xi_max: float, j: int, q: int) -> np.ndarray:
    return xi_max * 2.0 ** (-np.arange(j * q) / q)


@dataclass
class FilterBank:
    cfg: ScatteringConfig
    psi1_hat: np.ndarray  # n1 x N frequency responses
    psi2_hat: np.ndarray  # n2 x N
    phi_hat: np.ndarray  # N
    xi1: np.ndarray  # analytic center frequencies, cycles/sample
    xi2: np.ndarray
    paths: list[tuple[int, int]] = field(default_factory=list)

    @property
    def padded_length(self) -> int:
        return self.phi_hat.shape[0]

    @property
    def n_positions(self) -> int:
        return self.cfg.l_seq // self.cfg.t_support

    def layout(self) -> list[dict]:
        """Index table mapping flattened positions to (order, i1, i2)."""
        table = []
        pos = 0
        for order, i1, i2 in self.path_table():
            for _ in range(self.n_positions):
                table.append({"position": pos, "order": order, "i1": i1, "i2": i2})
                pos += 1
        return table

    def path_table(self) -> list[tuple[int, int | None, int | None]]:
        paths: list[tuple[int, int | None, int | None]] = [(0, None, None)]
        paths += [(1, i, None) for i in range(len(self.xi1))]
        paths += [(2, i, j) for i, j in self.paths]
        return paths

    @property
    def n_coefficients(self) -> int:
        return len(self.path_table()) * self.n_positions


def build_filterbank(cfg: ScatteringConfig) -> FilterBank:
    """Construct the Morlet filter banks and low-pass for a configuration.

    Band-pass sets are rescaled so the Littlewood-Paley sum
    |phi|^2 + sum |psi|^2 stays <= 1 at every frequency.
    """
    n = 2 * cfg.l_seq
    freqs = np.fft.fftfreq(n)
    t = cfg.t_support

    xi1 = _lattice(XI_MAX, cfg.J, cfg.Q1)
    xi2 = _lattice(XI_MAX, cfg.J, cfg.Q2)
    bw1 = _relative_bandwidth(cfg.Q1)
    bw2 = _relative_bandwidth(cfg.Q2)

    psi1 = np.array([_morlet_hat(freqs, xi, bw1 * xi) for xi in xi1])
    psi2 = np.array([_morlet_hat(freqs, xi, bw2 * xi) for xi in xi2])
    sigma_phi = 0.13 / t
    phi = np.exp(-(freqs**2) / (2 * sigma_phi**2))

    def rescale(bank: np.ndarray) -> np.ndarray:
        energy = np.sum(bank**2, axis=0)
        headroom = 1.0 - phi**2
        mask = headroom > 1e-12
        c2 = np.max(energy[mask] / headroom[mask])
        return bank / np.sqrt(c2)

    psi1 = rescale(psi1)
    psi2 = rescale(psi2)

    paths = [
        (i, j)
        for i in range(len(xi1))
        for j in range(len(xi2))
        if xi2[j] < xi1[i]
    ]
    return FilterBank(
        cfg=cfg, psi1_hat=psi1, psi2_hat=psi2, phi_hat=phi,
        xi1=xi1, xi2=xi2, paths=paths,
    )


@dataclass
class ScatteringVector:
    s0: np.ndarray  # n_pos
    s1: np.ndarray  # n1 x n_pos
    s2: np.ndarray  # n_paths x n_pos

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.s0, self.s1.ravel(), self.s2.ravel()])


def _pad_reflect(x: np.ndarray, n: int) -> np.ndarray:
    left = (n - len(x)) // 2
    return np.pad(x, (left, n - len(x) - left), mode="reflect")


def scatter(
    segment_channel: np.ndarray, bank: FilterBank, stride: int | None = None
) -> ScatteringVector:
    """Scattering coefficients of one channel of one segment.

    ``stride`` defaults to the low-pass support T; pass 1 to keep the
    full time resolution (used by invariance checks).
    """
    cfg = bank.cfg
    x = np.asarray(segment_channel, dtype=float)
    if len(x) != cfg.l_seq:
        raise InvalidConfig(f"expected length {cfg.l_seq}, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteSample(
            "<segment>", "<channel>", int(np.flatnonzero(~np.isfinite(x))[0])
        )
    stride = cfg.t_support if stride is None else stride

    n = bank.padded_length
    pad_left = (n - cfg.l_seq) // 2
    window = slice(pad_left, pad_left + cfg.l_seq)

    def average(spectrum: np.ndarray) -> np.ndarray:
        out = np.fft.ifft(spectrum * bank.phi_hat).real
        return out[..., window][..., ::stride]

    spec = np.fft.fft(_pad_reflect(x, n))
    s0 = average(spec)

    u1 = np.abs(np.fft.ifft(spec[None, :] * bank.psi1_hat, axis=-1))
    f1 = np.fft.fft(u1, axis=-1)
    s1 = average(f1)

    s2_rows = []
    for i in range(len(bank.xi1)):
        js = [j for (pi, j) in bank.paths if pi == i]
        if not js:
            continue
        u2 = np.abs(np.fft.ifft(f1[i][None, :] * bank.psi2_hat[js], axis=-1))
        s2_rows.append(average(np.fft.fft(u2, axis=-1)))
    s2 = (
        np.concatenate(s2_rows, axis=0)
        if s2_rows
        else np.empty((0, s0.shape[-1]))
    )
    return ScatteringVector(s0=s0, s1=s1, s2=s2)


def assemble_scattering_vector(segment: Segment, bank: FilterBank) -> np.ndarray:
    """Per-channel scattering vectors flattened in channel order."""
    return np.concatenate([scatter(ch, bank).flatten() for ch in segment.acc_data])


def scattering_group_map(n_ch: int, bank: FilterBank) -> np.ndarray:
    """Standardization group per position: one group per channel x order."""
    orders = np.concatenate(
        [np.full(bank.n_positions, order) for order, _, _ in bank.path_table()]
    )
    return np.concatenate([ch * 3 + orders for ch in range(n_ch)])
