"""Fictitious fatigue damage from strain sequences.

turning points -> 4-point rainflow counting (with a second pass over the
doubled residue) -> power-law life curve -> elementary linear damage
accumulation. Mean stress effects are deliberately ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, NonFiniteSample


@dataclass(frozen=True)
class Cycle:
    amplitude: float
    mean: float
    count: float = 1.0
    residue_closed: bool = False


@dataclass
class CycleList:
    cycles: list[Cycle] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cycles)

    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude for c in self.cycles])

    def counts(self) -> np.ndarray:
        return np.array([c.count for c in self.cycles])


@dataclass(frozen=True)
class WoehlerCurve:
    """Life curve N = K * amplitude**(-k)."""

    k: float = 5.0
    K: float = 1e7

    def __post_init__(self):
        if self.k <= 0 or self.K <= 0:
            raise InvalidConfig("Woehler curve needs k > 0 and K > 0")

    def cycles_to_failure(self, amplitude: float | np.ndarray) -> float | np.ndarray:
        # amplitudes near zero overflow to inf, i.e. zero damage
        with np.errstate(over="ignore"):
            return self.K * np.asarray(amplitude, dtype=float) ** (-self.k)


@dataclass(frozen=True)
class DamageRecord:
    file_id: str
    segment_index: int
    channel: str
    damage: float

    @property
    def lg_damage(self) -> float:
        if self.damage <= 0:
            raise ValueError("lg D undefined for D <= 0")
        return float(np.log10(self.damage))


def turning_points(series: np.ndarray) -> np.ndarray:
    """Strictly alternating local extrema, endpoints included.

    Equal consecutive samples are collapsed first.
    """
    x = np.asarray(series, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteSample(
            "<series>", "<series>", int(np.flatnonzero(~np.isfinite(x))[0])
        )
    if len(x) == 0:
        return x
    x = x[np.concatenate(([True], np.diff(x) != 0))]
    if len(x) < 3:
        return x
    d = np.sign(np.diff(x))
    keep = np.concatenate(([True], d[1:] != d[:-1], [True]))
    return x[keep]


def _four_point_pass(points: list[float]) -> tuple[list[tuple[float, float]], list[float]]:
    """One forward scan with the 4-point rule and step-back on extraction.

    Returns (closed cycles as (s2, s3) pairs, residue).
    """
    pts = list(points)
    closed = []
    i = 0
    while i + 3 < len(pts):
        s1, s2, s3, s4 = pts[i : i + 4]
        if abs(s2 - s3) <= abs(s1 - s2) and abs(s2 - s3) <= abs(s3 - s4):
            closed.append((s2, s3))
            del pts[i + 1 : i + 3]
            # windows starting up to two points earlier changed content
            i = max(i - 2, 0)
        else:
            i += 1
    return closed, pts


def rainflow_count(tp: np.ndarray) -> CycleList:
    """4-point rainflow count with residue closure.

    Pass 1 scans the turning points; pass 2 re-runs the 4-point rule on the
    residue concatenated with a copy of itself, so the residue closes into
    full cycles and contributes no half cycles.
    """
    cycles = CycleList()

    def emit(pairs, residue_closed):
        for s2, s3 in pairs:
            amplitude = abs(s2 - s3) / 2
            if amplitude > 0:
                cycles.cycles.append(
                    Cycle(
                        amplitude=amplitude,
                        mean=(s2 + s3) / 2,
                        residue_closed=residue_closed,
                    )
                )

    closed, residue = _four_point_pass(list(np.asarray(tp, dtype=float)))
    emit(closed, False)
    if len(residue) >= 2:
        doubled = turning_points(np.array(residue + residue))
        closed2, _ = _four_point_pass(list(doubled))
        emit(closed2, True)
    return cycles


def damage_sum(cycles: CycleList, curve: WoehlerCurve) -> float:
    """Elementary linear damage accumulation D = sum count_i / N(amp_i)."""
    if len(cycles) == 0:
        return 0.0
    amps = cycles.amplitudes()
    counts = cycles.counts()
    nonzero = amps > 0
    return float(np.sum(counts[nonzero] / curve.cycles_to_failure(amps[nonzero])))


def series_damage(series: np.ndarray, curve: WoehlerCurve) -> float:
    return damage_sum(rainflow_count(turning_points(series)), curve)


def rainflow_matrix(cycles: CycleList, bins: int = 64) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Binned amplitude/mean view of a cycle list; diagnostic only."""
    if len(cycles) == 0:
        edges = np.linspace(0, 1, bins + 1)
        return np.zeros((bins, bins)), edges, edges
    amps = cycles.amplitudes()
    means = np.array([c.mean for c in cycles.cycles])
    hist, amp_edges, mean_edges = np.histogram2d(
        amps, means, bins=bins, weights=cycles.counts()
    )
    return hist, amp_edges, mean_edges
