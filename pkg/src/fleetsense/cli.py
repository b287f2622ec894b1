"""Command line interface.

Subcommands: synth, fit, predict, classify, report. Flags mirror the run
config keys; a JSON config file passed via --config overrides flags.
Exit codes: 0 ok, 2 data error, 3 config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import pandas as pd

from .errors import ConfigError, DataError
from .ingest import load_directory, write_file
from .pipeline import Bundle, RunConfig, classify_maneuvers, fit_bundle, predict_damage
from .synth import RiderSpec, StrainCouplingSpec, SynthConfig, UndergroundSpec, generate_dataset


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _run_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    for key in RunConfig.__dataclass_fields__:
        if hasattr(args, key) and getattr(args, key) is not None:
            values[key] = getattr(args, key)
    if getattr(args, "config", None):
        file_values = json.loads(Path(args.config).read_text())
        values.update(file_values)  # config file overrides flags
    return RunConfig.from_dict(values)


def synth_config_from_dict(d: dict) -> SynthConfig:
    kwargs = dict(d)
    if "riders" in kwargs:
        kwargs["riders"] = [RiderSpec(**r) for r in kwargs["riders"]]
    if "undergrounds" in kwargs:
        kwargs["undergrounds"] = [
            UndergroundSpec(u["name"], tuple(u["band_hz"]), u["rel_power"])
            for u in kwargs["undergrounds"]
        ]
    if "couplings" in kwargs:
        kwargs["couplings"] = [
            StrainCouplingSpec(
                c["name"], tuple(c["gains"]), tuple(c["band_hz"]), c["noise_std"]
            )
            for c in kwargs["couplings"]
        ]
    return SynthConfig(**kwargs)


def cmd_synth(args) -> int:
    values = {}
    for key in ("seed", "file_length_s", "unlabeled_per_combo", "labeled_per_class"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    if args.synth_config:
        values.update(json.loads(Path(args.synth_config).read_text()))
    cfg = synth_config_from_dict(values)
    files = generate_dataset(cfg)
    out = Path(args.out)
    for f in files:
        write_file(f, out)
    print(f"wrote {len(files)} files to {out}")
    return 0


def cmd_fit(args) -> int:
    cfg = _run_config(args)
    files = load_directory(args.data)
    bundle = fit_bundle(files, cfg)
    bundle.save(args.out)
    print(
        f"bundle: {bundle.pca.n_axes} axes, "
        f"{len(bundle.regressors)} regressors, "
        f"{len(bundle.knn)} classifiers -> {args.out}"
    )
    return 0


def cmd_predict(args) -> int:
    bundle = Bundle.load(args.bundle)
    files = load_directory(args.data)
    result = predict_damage(bundle, files)
    _write_json(Path(args.out), result["report"])
    if args.records:
        pd.DataFrame(result["records"]).to_csv(args.records, index=False)
    for channel, stats in result["report"]["channels"].items():
        print(
            f"{channel}: r2={stats['r2']:.3f} fds_ratio={stats['fds_ratio']:.3f}"
        )
    return 0


def cmd_classify(args) -> int:
    bundle = Bundle.load(args.bundle)
    files = load_directory(args.data)
    report = classify_maneuvers(bundle, files)
    _write_json(Path(args.out), report)
    for task, result in report["tasks"].items():
        print(f"{task}: accuracy={result['accuracy']:.3f}")
    return 0


def cmd_report(args) -> int:
    combined = {}
    if args.predict:
        combined["prediction"] = json.loads(Path(args.predict).read_text())
    if args.classify:
        combined["classification"] = json.loads(Path(args.classify).read_text())
    if not combined:
        raise ConfigError("report needs --predict and/or --classify inputs")
    _write_json(Path(args.out), combined)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fleetsense",
        description="Fatigue damage regression and maneuver identification "
        "from acceleration measurements",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--file-length-s", dest="file_length_s", type=float)
    p.add_argument("--unlabeled-per-combo", dest="unlabeled_per_combo", type=int)
    p.add_argument("--labeled-per-class", dest="labeled_per_class", type=int)
    p.add_argument("--synth-config", help="JSON file with full generator config")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit a model bundle from a data directory")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="JSON run config; overrides flags")
    p.add_argument("--transform", choices=["scattering", "fft"])
    p.add_argument("--l-seq", dest="l_seq", type=int)
    p.add_argument("-J", "--scale-exponent", dest="j", type=int)
    p.add_argument("-Q", "--wavelets-per-octave", dest="q1", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--strain-threshold", dest="strain_threshold_um", type=float)
    p.add_argument("--train-fraction", dest="train_fraction", type=float)
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--screen-reference", dest="screen_reference")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict damage sums for held-out files")
    p.add_argument("--bundle", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--records", help="optional CSV of per-segment records")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("classify", help="classify maneuvers of labeled files")
    p.add_argument("--bundle", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="merge prediction/classification reports")
    p.add_argument("--predict")
    p.add_argument("--classify")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
