"""End-to-end orchestration: run configuration, model bundle fitting,
damage prediction and maneuver classification.

A fitted bundle carries everything needed for deployment on
acceleration-only vehicles: standardization statistics, the truncated PCA,
one quadratic damage regressor per retained strain channel and the kNN
classifiers, all tagged with a feature-layout fingerprint and the config
hash for reproducibility.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import fatigue, fft_features, models, reduction, scattering
from .errors import BundleMismatch, InsufficientFiles, InvalidConfig, MalformedFile
from .ingest import Segment, SplitPlan, TimeSeriesFile, segment_file, screen_strain_channels, split_files


@dataclass(frozen=True)
class RunConfig:
    transform: str = "scattering"  # or "fft"
    j: int = 5
    q1: int = 6
    q2: int = 1
    t_override: int | None = None
    l_seq: int = 4096
    theta: float = 0.002
    strain_threshold_um: float = 150.0
    woehler_k: float = 5.0
    woehler_capacity: float = 1e7
    train_fraction: float = 0.777
    stratify_by_rider: bool = True
    knn_k: int = 20
    seed: int = 0
    screen_reference: str | None = None  # file id; default: first file with strain

    def __post_init__(self):
        if self.transform not in ("scattering", "fft"):
            raise InvalidConfig(f"unknown transform {self.transform!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()

    def woehler_curve(self) -> fatigue.WoehlerCurve:
        return fatigue.WoehlerCurve(k=self.woehler_k, K=self.woehler_capacity)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class FeatureExtractor:
    """Transform-specific feature assembly with a stable layout fingerprint."""

    def __init__(self, cfg: RunConfig, acc_names: list[str]):
        self.cfg = cfg
        self.acc_names = list(acc_names)
        n_ch = len(acc_names)
        if cfg.transform == "scattering":
            scfg = scattering.ScatteringConfig(
                l_seq=cfg.l_seq, J=cfg.j, Q1=cfg.q1, Q2=cfg.q2, T=cfg.t_override
            )
            self.bank = scattering.build_filterbank(scfg)
            self.group_map = scattering.scattering_group_map(n_ch, self.bank)
            self.n_features = n_ch * self.bank.n_coefficients
        else:
            self.bank = None
            self.group_map = fft_features.fft_group_map(n_ch, cfg.l_seq)
            self.n_features = fft_features.fft_vector_length(n_ch, cfg.l_seq)

    def __call__(self, segment: Segment) -> np.ndarray:
        if segment.acc_names != self.acc_names:
            raise BundleMismatch(
                f"channel layout {segment.acc_names} != {self.acc_names}"
            )
        if self.bank is not None:
            return scattering.assemble_scattering_vector(segment, self.bank)
        return fft_features.assemble_fft_vector(segment)

    def fingerprint(self) -> str:
        desc = {
            "transform": self.cfg.transform,
            "l_seq": self.cfg.l_seq,
            "j": self.cfg.j,
            "q1": self.cfg.q1,
            "q2": self.cfg.q2,
            "t": self.cfg.t_override,
            "acc_names": self.acc_names,
            "n_features": self.n_features,
        }
        return hashlib.sha256(canonical_json(desc).encode()).hexdigest()

    def layout_table(self) -> list[dict]:
        if self.bank is None:
            n_bins = self.cfg.l_seq // 2 + 1
            return [
                {"position": ch * n_bins + b, "channel": name, "bin": b}
                for ch, name in enumerate(self.acc_names)
                for b in range(n_bins)
            ]
        table = []
        per_channel = self.bank.layout()
        for ch, name in enumerate(self.acc_names):
            for entry in per_channel:
                table.append(
                    {
                        "position": ch * self.bank.n_coefficients + entry["position"],
                        "channel": name,
                        "order": entry["order"],
                        "i1": entry["i1"],
                        "i2": entry["i2"],
                    }
                )
        return table


def ordered_segments(files: list[TimeSeriesFile], l_seq: int) -> list[Segment]:
    """Segments of many files in deterministic (file_id, index) order."""
    segments = []
    for f in sorted(files, key=lambda f: f.file_id):
        segments.extend(segment_file(f, l_seq))
    return segments


def feature_matrix(segments: list[Segment], extractor: FeatureExtractor) -> np.ndarray:
    if not segments:
        raise InsufficientFiles("no segments to featurize")
    return np.array([extractor(s) for s in segments])


def segment_damage_records(
    segments: list[Segment], channels: list[str], curve: fatigue.WoehlerCurve
) -> dict[str, np.ndarray]:
    """Per-channel observed damage sums aligned with the segment order."""
    out = {}
    for channel in channels:
        values = []
        for seg in segments:
            idx = seg.strain_names.index(channel)
            values.append(fatigue.series_damage(seg.strain_data[idx], curve))
        out[channel] = np.array(values)
    return out


@dataclass
class Bundle:
    config: RunConfig
    split: SplitPlan
    retained_strain: list[str]
    standardizer: reduction.Standardizer
    pca: reduction.PcaModel
    regressors: dict[str, models.QuadraticRegressor]
    knn: dict[str, models.KnnModel]
    acc_names: list[str]
    layout_fingerprint: str
    notes: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return canonical_json(
            {
                "config": self.config.to_dict(),
                "config_hash": self.config.hash(),
                "split": self.split.to_dict(),
                "retained_strain": self.retained_strain,
                "standardizer": self.standardizer.to_dict(),
                "pca": self.pca.to_dict(),
                "regressors": {c: r.to_dict() for c, r in self.regressors.items()},
                "knn": {t: m.to_dict() for t, m in self.knn.items()},
                "acc_names": self.acc_names,
                "layout_fingerprint": self.layout_fingerprint,
                "notes": self.notes,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Bundle":
        d = json.loads(text)
        return cls(
            config=RunConfig.from_dict(d["config"]),
            split=SplitPlan.from_dict(d["split"]),
            retained_strain=d["retained_strain"],
            standardizer=reduction.Standardizer.from_dict(d["standardizer"]),
            pca=reduction.PcaModel.from_dict(d["pca"]),
            regressors={
                c: models.QuadraticRegressor.from_dict(r)
                for c, r in d["regressors"].items()
            },
            knn={t: models.KnnModel.from_dict(m) for t, m in d["knn"].items()},
            acc_names=d["acc_names"],
            layout_fingerprint=d["layout_fingerprint"],
            notes=d.get("notes", {}),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "Bundle":
        return cls.from_json(Path(path).read_text())

    def extractor(self) -> FeatureExtractor:
        ext = FeatureExtractor(self.config, self.acc_names)
        if ext.fingerprint() != self.layout_fingerprint:
            raise BundleMismatch("feature layout fingerprint mismatch")
        return ext

    def scores_for(self, segments: list[Segment], extractor: FeatureExtractor) -> np.ndarray:
        x = feature_matrix(segments, extractor)
        return self.pca.transform(self.standardizer.transform(x))


def fit_bundle(files: list[TimeSeriesFile], cfg: RunConfig) -> Bundle:
    """Parameterize the full pipeline from a mixed labeled/unlabeled corpus.

    Only unlabeled files enter the train/test split, the PCA and the damage
    regression; labeled files parameterize the kNN classifiers only.
    """
    unlabeled = [f for f in files if f.labels is None]
    labeled = [f for f in files if f.labels is not None]
    if len(unlabeled) < 2:
        raise InsufficientFiles("need >= 2 unlabeled files to fit")

    if cfg.screen_reference is not None:
        candidates = [f for f in files if f.file_id == cfg.screen_reference]
        if not candidates:
            raise InvalidConfig(f"screen_reference {cfg.screen_reference!r} not found")
        reference = candidates[0]
    else:
        with_strain = sorted(
            (f for f in files if f.strain_channels), key=lambda f: f.file_id
        )
        if not with_strain:
            raise MalformedFile("no file with strain channels for screening")
        reference = with_strain[0]
    retained = sorted(screen_strain_channels(reference, cfg.strain_threshold_um))

    split = split_files(
        unlabeled, cfg.train_fraction, cfg.stratify_by_rider, cfg.seed
    )
    train_files = [f for f in unlabeled if f.file_id in split.train_file_ids]
    train_segments = ordered_segments(train_files, cfg.l_seq)
    if not train_segments:
        raise InsufficientFiles("training files yield no segments")

    extractor = FeatureExtractor(cfg, train_segments[0].acc_names)
    x_train = feature_matrix(train_segments, extractor)
    standardizer = reduction.fit_standardizer(x_train, extractor.group_map)
    z_train = standardizer.transform(x_train)
    pca = reduction.fit_pca(z_train, cfg.theta)
    scores = pca.transform(z_train)

    curve = cfg.woehler_curve()
    damage = segment_damage_records(train_segments, retained, curve)
    regressors = {}
    for channel in retained:
        d = damage[channel]
        mask = d > 0
        regressors[channel] = models.fit_quadratic(
            scores[mask], np.log10(d[mask]), target_channel=channel
        )

    knn: dict[str, models.KnnModel] = {}
    if labeled:
        lab_segments = ordered_segments(labeled, cfg.l_seq)
        lab_scores = pca.transform(
            standardizer.transform(feature_matrix(lab_segments, extractor))
        )
        tasks = {
            "underground": [s.labels.underground for s in lab_segments],
            "speed_kmh": [s.labels.speed_kmh for s in lab_segments],
            "rider": [s.labels.rider for s in lab_segments],
        }
        for task, labels in tasks.items():
            knn[task] = models.KnnModel(
                training_points=lab_scores,
                training_labels=labels,
                k=cfg.knn_k,
                task=task,
            )

    return Bundle(
        config=cfg,
        split=split,
        retained_strain=retained,
        standardizer=standardizer,
        pca=pca,
        regressors=regressors,
        knn=knn,
        acc_names=extractor.acc_names,
        layout_fingerprint=extractor.fingerprint(),
        notes={
            "n_train_segments": len(train_segments),
            "n_retained_axes": pca.n_axes,
            "retained_variance_share": float(
                pca.explained_variance.sum() / pca.total_variance
            ),
            "screen_reference": reference.file_id,
        },
    )


def predict_damage(bundle: Bundle, files: list[TimeSeriesFile]) -> dict:
    """Predict per-segment damage sums for held-out unlabeled files.

    Files that were part of the bundle's training split are excluded, so
    passing the fitting corpus evaluates its held-out test files.
    """
    eligible = [
        f
        for f in files
        if f.labels is None and f.file_id not in bundle.split.train_file_ids
    ]
    if not eligible:
        raise InsufficientFiles("no held-out unlabeled files to predict")
    extractor = bundle.extractor()
    segments = ordered_segments(eligible, bundle.config.l_seq)
    scores = bundle.scores_for(segments, extractor)
    curve = bundle.config.woehler_curve()
    observed = segment_damage_records(segments, bundle.retained_strain, curve)

    records = []
    channel_report = {}
    for channel, reg in sorted(bundle.regressors.items()):
        lg_pred = reg.predict(scores)
        d_pred = 10.0**lg_pred
        d_obs = observed[channel]
        for seg, do, dp, lp in zip(segments, d_obs, d_pred, lg_pred):
            records.append(
                {
                    "file_id": seg.file_id,
                    "segment": seg.index,
                    "channel": channel,
                    "damage": float(do),
                    "lg_damage": float(np.log10(do)) if do > 0 else None,
                    "damage_pred": float(dp),
                    "lg_damage_pred": float(lp),
                }
            )
        mask = d_obs > 0
        channel_report[channel] = {
            "r2": models.r2(np.log10(d_obs[mask]), lg_pred[mask]),
            "fds_ratio": models.fds_ratio(d_obs, d_pred),
            "n_segments": int(len(d_obs)),
        }

    report = {
        "config_hash": bundle.config.hash(),
        "transform": bundle.config.transform,
        "n_segments": len(segments),
        "n_files": len(eligible),
        "channels": channel_report,
        "mean_r2": float(np.mean([c["r2"] for c in channel_report.values()]))
        if channel_report
        else None,
    }
    return {"report": report, "records": records}


def classify_maneuvers(bundle: Bundle, files: list[TimeSeriesFile]) -> dict:
    """Predict maneuver labels for labeled files and score each task."""
    labeled = [f for f in files if f.labels is not None]
    if not labeled:
        raise InsufficientFiles("no labeled files to classify")
    if not bundle.knn:
        raise InvalidConfig("bundle holds no classifiers (fitted without labeled data)")
    extractor = bundle.extractor()
    segments = ordered_segments(labeled, bundle.config.l_seq)
    scores = bundle.scores_for(segments, extractor)

    truth = {
        "underground": [s.labels.underground for s in segments],
        "speed_kmh": [s.labels.speed_kmh for s in segments],
        "rider": [s.labels.rider for s in segments],
    }
    tasks = {}
    for task, model in sorted(bundle.knn.items()):
        predicted = model.predict_many(scores)
        label_set = sorted(set(model.training_labels) | set(truth[task]))
        result = models.confusion_and_accuracy(truth[task], predicted, label_set)
        tasks[task] = result.to_dict()

    return {
        "config_hash": bundle.config.hash(),
        "transform": bundle.config.transform,
        "n_segments": len(segments),
        "tasks": tasks,
    }
