"""Measurement file loading, validation, segmentation and train/test splitting.

A measurement ride is stored as a CSV file (header row of channel names,
one sample per row) next to a sidecar ``<name>.meta.json`` which declares
the sample rate, the role of every channel (``acc`` or ``strain``) and,
optionally, the maneuver labels of the ride.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    InsufficientFiles,
    InvalidConfig,
    MalformedFile,
    MissingMetadata,
    NonFiniteSample,
)


@dataclass(frozen=True)
class Labels:
    """Complete maneuver labels of one measurement file."""

    rider: str
    underground: str
    speed_kmh: float


@dataclass
class TimeSeriesFile:
    """One measurement ride with named acceleration and strain channels."""

    file_id: str
    sample_rate_hz: float
    acc_channels: dict[str, np.ndarray]
    strain_channels: dict[str, np.ndarray]
    labels: Labels | None = None
    # rider identity is known for regular usage rides even when the full
    # maneuver labels (underground, speed) are not
    rider_id: str | None = None

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise MalformedFile(f"{self.file_id}: sample_rate_hz must be positive")
        lengths = {
            name: len(arr)
            for name, arr in itertools.chain(
                self.acc_channels.items(), self.strain_channels.items()
            )
        }
        if not lengths:
            raise MalformedFile(f"{self.file_id}: no channels")
        if len(set(lengths.values())) > 1:
            raise MalformedFile(f"{self.file_id}: channel length mismatch {lengths}")
        if self.labels is not None and self.rider_id is None:
            self.rider_id = self.labels.rider

    @property
    def n_samples(self) -> int:
        for arr in self.acc_channels.values():
            return len(arr)
        for arr in self.strain_channels.values():
            return len(arr)
        return 0


@dataclass
class Segment:
    """One non-overlapping window of ``l_seq`` samples from a file."""

    file_id: str
    index: int
    acc_data: np.ndarray  # n_ch x l_seq
    strain_data: np.ndarray  # n_strain x l_seq
    acc_names: list[str]
    strain_names: list[str]
    labels: Labels | None = None
    rider_id: str | None = None


@dataclass
class SplitPlan:
    train_file_ids: set[str]
    test_file_ids: set[str]
    target_train_fraction: float

    def to_dict(self) -> dict:
        return {
            "train_file_ids": sorted(self.train_file_ids),
            "test_file_ids": sorted(self.test_file_ids),
            "target_train_fraction": self.target_train_fraction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplitPlan":
        return cls(
            train_file_ids=set(d["train_file_ids"]),
            test_file_ids=set(d["test_file_ids"]),
            target_train_fraction=d["target_train_fraction"],
        )


def sidecar_path(data_path: Path) -> Path:
    return data_path.with_suffix("").with_suffix(".meta.json")


def load_file(path: str | Path, metadata: dict | None = None) -> TimeSeriesFile:
    """Load one CSV measurement file with its sidecar metadata.

    ``metadata`` may be passed directly; otherwise the ``<name>.meta.json``
    sidecar next to the data file is read.
    """
    path = Path(path)
    if metadata is None:
        meta_path = sidecar_path(path)
        if not meta_path.exists():
            raise MissingMetadata(f"no sidecar {meta_path}")
        metadata = json.loads(meta_path.read_text())

    for key in ("sample_rate_hz", "channels"):
        if key not in metadata:
            raise MissingMetadata(f"{path}: sidecar missing {key!r}")

    try:
        frame = pd.read_csv(path)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    if frame.empty:
        raise MalformedFile(f"{path}: empty data section")

    file_id = path.stem
    roles: dict[str, str] = metadata["channels"]
    acc: dict[str, np.ndarray] = {}
    strain: dict[str, np.ndarray] = {}
    for name, role in roles.items():
        if name not in frame.columns:
            raise MalformedFile(f"{path}: declared channel {name!r} not in data")
        values = frame[name].to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise NonFiniteSample(file_id, name, int(bad[0]))
        if role == "acc":
            acc[name] = values
        elif role == "strain":
            strain[name] = values
        else:
            raise MissingMetadata(f"{path}: unknown channel role {role!r} for {name!r}")

    labels = None
    raw_labels = metadata.get("labels")
    if raw_labels is not None:
        missing = {"rider", "underground", "speed_kmh"} - set(raw_labels)
        if missing:
            raise MissingMetadata(f"{path}: partial labels, missing {sorted(missing)}")
        labels = Labels(
            rider=str(raw_labels["rider"]),
            underground=str(raw_labels["underground"]),
            speed_kmh=float(raw_labels["speed_kmh"]),
        )

    rider_id = metadata.get("rider")
    if rider_id is None and labels is not None:
        rider_id = labels.rider

    return TimeSeriesFile(
        file_id=file_id,
        sample_rate_hz=float(metadata["sample_rate_hz"]),
        acc_channels=acc,
        strain_channels=strain,
        labels=labels,
        rider_id=rider_id,
    )


def load_directory(data_dir: str | Path) -> list[TimeSeriesFile]:
    """Load every CSV in a directory, sorted by file id."""
    data_dir = Path(data_dir)
    files = [load_file(p) for p in sorted(data_dir.glob("*.csv"))]
    if not files:
        raise MalformedFile(f"no CSV files in {data_dir}")
    return files


def segment_file(f: TimeSeriesFile, l_seq: int) -> list[Segment]:
    """Split a file into non-overlapping windows; the tail is dropped."""
    if l_seq < 2:
        raise InvalidConfig(f"l_seq must be >= 2, got {l_seq}")
    n_seg = f.n_samples // l_seq
    acc_names = list(f.acc_channels)
    strain_names = list(f.strain_channels)
    acc_full = np.array([f.acc_channels[n] for n in acc_names])
    strain_full = (
        np.array([f.strain_channels[n] for n in strain_names])
        if strain_names
        else np.empty((0, f.n_samples))
    )
    segments = []
    for i in range(n_seg):
        sl = slice(i * l_seq, (i + 1) * l_seq)
        segments.append(
            Segment(
                file_id=f.file_id,
                index=i,
                acc_data=acc_full[:, sl].copy(),
                strain_data=strain_full[:, sl].copy(),
                acc_names=acc_names,
                strain_names=strain_names,
                labels=f.labels,
                rider_id=f.rider_id,
            )
        )
    return segments


def screen_strain_channels(reference: TimeSeriesFile, threshold: float) -> set[str]:
    """Retain strain channels whose mean absolute strain reaches the threshold.

    The reference ride is a single designated file; the retained set is
    applied globally for a run.
    """
    if not reference.strain_channels:
        raise MalformedFile(f"{reference.file_id}: no strain channels to screen")
    return {
        name
        for name, arr in reference.strain_channels.items()
        if np.mean(np.abs(arr)) >= threshold
    }


def _best_subset(weights: list[float], total: float, target: float) -> tuple[int, ...]:
    """Exhaustively find the subset whose weight fraction is closest to target.

    Ties resolved towards the lexicographically smallest index tuple so the
    split is deterministic.
    """
    n = len(weights)
    best = None
    best_dev = np.inf
    for mask in range(1 << n):
        idx = tuple(i for i in range(n) if mask >> i & 1)
        frac = sum(weights[i] for i in idx) / total
        dev = abs(frac - target)
        if dev < best_dev - 1e-12 or (abs(dev - best_dev) <= 1e-12 and idx < best):
            best, best_dev = idx, dev
    return best


def _greedy_subset(
    weights: list[float], total: float, target: float, order: np.ndarray
) -> tuple[int, ...]:
    chosen: list[int] = []
    acc = 0.0
    for i in order:
        if abs((acc + weights[i]) / total - target) <= abs(acc / total - target):
            chosen.append(int(i))
            acc += weights[i]
    # single-swap improvement
    improved = True
    while improved:
        improved = False
        for i in range(len(weights)):
            in_set = i in chosen
            trial = [c for c in chosen if c != i] if in_set else chosen + [i]
            if abs(sum(weights[c] for c in trial) / total - target) < abs(
                acc / total - target
            ):
                chosen = trial
                acc = sum(weights[c] for c in chosen)
                improved = True
    return tuple(sorted(chosen))


def split_files(
    files: list[TimeSeriesFile],
    target_fraction: float,
    stratify_by_rider: bool = True,
    rng_seed: int = 0,
) -> SplitPlan:
    """File-level train/test split, optionally stratified by rider.

    Weights are sample counts, so the achieved train fraction tracks the
    segment-count fraction up to per-file flooring. For small per-rider file
    counts the subset is found exhaustively, otherwise by a seeded greedy
    pass with single-swap refinement.
    """
    if len(files) < 2:
        raise InsufficientFiles(f"need >= 2 files, got {len(files)}")
    if not 0 < target_fraction < 1:
        raise InvalidConfig(f"target_fraction must be in (0,1), got {target_fraction}")

    rng = np.random.default_rng(rng_seed)
    groups: dict[str, list[TimeSeriesFile]] = {}
    if stratify_by_rider:
        for f in sorted(files, key=lambda f: f.file_id):
            groups.setdefault(f.rider_id or "", []).append(f)
    else:
        groups[""] = sorted(files, key=lambda f: f.file_id)

    train: set[str] = set()
    test: set[str] = set()
    for _, group in sorted(groups.items()):
        weights = [float(f.n_samples) for f in group]
        total = sum(weights)
        if len(group) == 1:
            # a lone file cannot be split; seeded coin flip decides the side
            side = train if rng.random() < target_fraction else test
            side.add(group[0].file_id)
            continue
        if len(group) <= 16:
            idx = _best_subset(weights, total, target_fraction)
        else:
            idx = _greedy_subset(
                weights, total, target_fraction, rng.permutation(len(group))
            )
        for i, f in enumerate(group):
            (train if i in idx else test).add(f.file_id)

    return SplitPlan(
        train_file_ids=train,
        test_file_ids=test,
        target_train_fraction=target_fraction,
    )


def write_file(f: TimeSeriesFile, out_dir: str | Path) -> Path:
    """Write a TimeSeriesFile as CSV + sidecar in the ingest format."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{f.file_id}.csv"
    columns = {**f.acc_channels, **f.strain_channels}
    pd.DataFrame(columns).to_csv(path, index=False, float_format="%.8g")
    meta = {
        "sample_rate_hz": f.sample_rate_hz,
        "channels": {
            **{n: "acc" for n in f.acc_channels},
            **{n: "strain" for n in f.strain_channels},
        },
    }
    if f.rider_id is not None:
        meta["rider"] = f.rider_id
    if f.labels is not None:
        meta["labels"] = {
            "rider": f.labels.rider,
            "underground": f.labels.underground,
            "speed_kmh": f.labels.speed_kmh,
        }
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True))
    return path
