"""Synthetic fleet-data generator for desk-scale validation.

Acceleration channels are band-limited Gaussian noise whose band depends
on the underground class and whose amplitude scales with riding speed and
rider weight. Strain channels are band-passed linear combinations of the
acceleration channels plus a noise floor, so fatigue damage is predictable
from acceleration features by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig
from .ingest import Labels, TimeSeriesFile


@dataclass(frozen=True)
class RiderSpec:
    rider_id: str
    weight_scale: float


@dataclass(frozen=True)
class UndergroundSpec:
    name: str
    band_hz: tuple[float, float]
    rel_power: float


@dataclass(frozen=True)
class StrainCouplingSpec:
    name: str
    gains: tuple[float, ...]  # one gain per acceleration channel
    band_hz: tuple[float, float]
    noise_std: float  # noise floor, um/m


# acceleration channels differ by a fixed gain so they are not duplicates
ACC_CHANNEL_GAINS = (1.0, 0.8, 1.2, 0.9, 1.1)


@dataclass
class SynthConfig:
    riders: list[RiderSpec] = field(
        default_factory=lambda: [
            RiderSpec("r1", 0.90),
            RiderSpec("r2", 1.00),
            RiderSpec("r3", 1.15),
        ]
    )
    undergrounds: list[UndergroundSpec] = field(
        default_factory=lambda: [
            UndergroundSpec("even", (15.0, 40.0), 0.6),
            UndergroundSpec("cobble", (60.0, 180.0), 1.6),
        ]
    )
    speeds_kmh: list[float] = field(default_factory=lambda: [5.0, 15.0, 25.0])
    couplings: list[StrainCouplingSpec] = field(
        default_factory=lambda: [
            StrainCouplingSpec("s1", (1500.0, 700.0, 0.0, 0.0, 500.0), (10.0, 250.0), 10.0),
            StrainCouplingSpec("s2", (0.0, 0.0, 1100.0, 600.0, 0.0), (10.0, 200.0), 15.0),
            StrainCouplingSpec("s3", (0.0, 0.0, 0.0, 0.0, 0.0), (10.0, 200.0), 20.0),
        ]
    )
    file_length_s: float = 120.0
    # unlabeled usage rides (random speed profile) per rider x underground
    unlabeled_per_combo: int = 3
    # labeled maneuver files per rider x underground x speed
    labeled_per_class: int = 1
    speed_block_s: float = 12.0
    sample_rate_hz: float = 1200.0
    n_acc: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (self.riders and self.undergrounds and self.speeds_kmh):
            raise InvalidConfig("riders, undergrounds and speeds must be non-empty")
        if not any(any(g != 0 for g in c.gains) for c in self.couplings):
            raise InvalidConfig("at least one strain channel must be coupled")
        for c in self.couplings:
            if len(c.gains) != self.n_acc:
                raise InvalidConfig(f"coupling {c.name!r} needs {self.n_acc} gains")


def _bandpass(x: np.ndarray, band_hz: tuple[float, float], fs: float) -> np.ndarray:
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(len(x), d=1.0 / fs)
    spec[(freqs < band_hz[0]) | (freqs > band_hz[1])] = 0
    return np.fft.irfft(spec, len(x))


def _speed_scale(speed_kmh: float) -> float:
    return speed_kmh / 15.0


def _speed_profile(cfg: SynthConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    """Per-sample speed for an unlabeled usage ride: piecewise constant."""
    block = max(int(cfg.speed_block_s * cfg.sample_rate_hz), 1)
    lo, hi = min(cfg.speeds_kmh), max(cfg.speeds_kmh)
    n_blocks = -(-n // block)
    return np.repeat(rng.uniform(lo, hi, n_blocks), block)[:n]


def _make_file(
    cfg: SynthConfig,
    rider: RiderSpec,
    underground: UndergroundSpec,
    speed: float | None,
    labeled: bool,
    rep: int,
    file_index: int,
) -> TimeSeriesFile:
    rng = np.random.default_rng([cfg.seed, file_index])
    n = int(cfg.file_length_s * cfg.sample_rate_hz)
    if labeled:
        envelope = np.full(n, _speed_scale(speed))
    else:
        envelope = _speed_scale(_speed_profile(cfg, rng, n))
    envelope = envelope * rider.weight_scale * underground.rel_power

    acc = {}
    for ch in range(cfg.n_acc):
        noise = _bandpass(rng.standard_normal(n), underground.band_hz, cfg.sample_rate_hz)
        noise /= noise.std()
        acc[f"a{ch + 1}"] = envelope * ACC_CHANNEL_GAINS[ch % len(ACC_CHANNEL_GAINS)] * noise

    strain = {}
    for coupling in cfg.couplings:
        signal = np.zeros(n)
        for ch, gain in enumerate(coupling.gains):
            if gain != 0:
                signal += gain * _bandpass(
                    acc[f"a{ch + 1}"], coupling.band_hz, cfg.sample_rate_hz
                )
        strain[coupling.name] = signal + coupling.noise_std * rng.standard_normal(n)

    if labeled:
        file_id = f"lab_{rider.rider_id}_{underground.name}_{int(speed):03d}_{rep}"
        labels = Labels(rider.rider_id, underground.name, speed)
    else:
        file_id = f"use_{rider.rider_id}_{underground.name}_{rep}"
        labels = None
    return TimeSeriesFile(
        file_id=file_id,
        sample_rate_hz=cfg.sample_rate_hz,
        acc_channels=acc,
        strain_channels=strain,
        labels=labels,
        rider_id=rider.rider_id,
    )


def generate_dataset(cfg: SynthConfig) -> list[TimeSeriesFile]:
    """Deterministic synthetic corpus: usage rides plus labeled maneuvers.

    Unlabeled usage rides carry a random speed profile; labeled maneuver
    files hold one (underground, speed) combination each, as in targeted
    measurement rides.
    """
    files = []
    index = 0
    for rider in cfg.riders:
        for underground in cfg.undergrounds:
            for rep in range(cfg.unlabeled_per_combo):
                files.append(
                    _make_file(cfg, rider, underground, None, False, rep, index)
                )
                index += 1
            for speed in cfg.speeds_kmh:
                for rep in range(cfg.labeled_per_class):
                    files.append(
                        _make_file(cfg, rider, underground, speed, True, rep, index)
                    )
                    index += 1
    return files
