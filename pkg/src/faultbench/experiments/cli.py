"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 missing data, 3 every repeat
of some cell diverged.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..datasets import SynthSpec, available_datasets, generate_synthetic, verify_dataset
from ..datasets.registry import DATA_ROOT_ENV
from ..errors import (
    ConfigurationError,
    DataError,
    EmptyDatasetError,
    ManifestError,
    PresetError,
    RegistryError,
    UnsupportedFormatError,
)
from ..evaluation.training import TrainConfig
from .config import DatasetSource, ExperimentConfig, load_config
from .presets import list_presets
from .runner import run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_FAILED = 0, 1, 2, 3


def build_parser():
    p = argparse.ArgumentParser(prog="faultbench",
                                description="Vibration fault-diagnosis benchmark harness")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment matrix")
    run.add_argument("--config", help="INI config file")
    run.add_argument("--preset", help="named preset (see list-presets)")
    run.add_argument("--synthetic", action="store_true", help="use the synthetic dataset")
    run.add_argument("--dataset", help="registry dataset id (overrides the config)")
    run.add_argument("--data-root", help=f"dataset root (default ${DATA_ROOT_ENV})")
    run.add_argument("--output", help="output directory")
    run.add_argument("--workers", type=int, help="processes per cell")
    run.add_argument("--seed", type=int, help="base seed")
    run.add_argument("--repeats", type=int)
    run.add_argument("--epochs", type=int)
    run.add_argument("--plot", action="store_true", help="write trace.png per cell")

    sub.add_parser("list-presets", help="list named presets")

    ver = sub.add_parser("verify-data", help="check dataset files against the manifests")
    ver.add_argument("--dataset", action="append",
                     help="dataset id (repeatable; default: all)")
    ver.add_argument("--data-root")

    gen = sub.add_parser("gen-synthetic", help="write synthetic records as CSV files")
    gen.add_argument("--output", required=True)
    gen.add_argument("--classes", type=int, default=5)
    gen.add_argument("--noise", type=float, default=0.3)
    gen.add_argument("--drift", type=float, default=0.0)
    gen.add_argument("--length", type=int, default=122_880)
    gen.add_argument("--records-per-class", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    return p


def _resolve_run_config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig(
        dataset=DatasetSource(synth=SynthSpec.default(5, noise_std=0.3)))
    changes = {}
    if args.preset:
        changes["preset"] = args.preset
    if args.synthetic:
        synth = cfg.dataset.synth or SynthSpec.default(5, noise_std=0.3)
        changes["dataset"] = DatasetSource(synth=synth)
    if args.dataset:
        changes["dataset"] = replace(cfg.dataset, dataset_id=args.dataset, synth=None)
    if args.data_root:
        changes["dataset"] = replace(changes.get("dataset", cfg.dataset), root=args.data_root)
    if args.output:
        changes["output_dir"] = args.output
    elif not args.config:
        changes["output_dir"] = str(Path("runs") / (args.preset or "experiment"))
    for key in ("workers", "seed", "repeats"):
        if getattr(args, key) is not None:
            changes[key] = getattr(args, key)
    if args.plot:
        changes["plot"] = True
    explicit = set(cfg.explicit)
    if args.epochs is not None:
        changes["train"] = replace(cfg.train, epochs=args.epochs)
        explicit.add("train")
    if args.repeats is not None:
        explicit.add("repeats")
    if args.dataset:
        explicit.add("dataset")
    changes["explicit"] = frozenset(explicit)
    return replace(cfg, **changes)


def cmd_run(args):
    cfg = _resolve_run_config(args)
    result = run_experiment(cfg)
    out = Path(cfg.output_dir)
    print(f"wrote {out / 'report.md'}")
    for cell in result.cells:
        if cell.summary:
            print(f"  {cell.variant or 'main'} {cell.arch} {cell.input_type} {cell.normalization}: "
                  f"last_mean {cell.summary['last_mean']:.4f}")
    if result.all_failed_cells:
        for cell in result.all_failed_cells:
            print(f"all repeats failed: {cell.arch} {cell.input_type} {cell.normalization}",
                  file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_list_presets(args):
    for name, desc in list_presets():
        print(f"{name:18s} {desc}")
    return EXIT_OK


def cmd_verify(args):
    ids = args.dataset or available_datasets()
    bad = False
    for dataset_id in ids:
        ok, problems = verify_dataset(dataset_id, args.data_root)
        print(f"{dataset_id}: {'ok' if ok else f'{len(problems)} problem(s)'}")
        for line in problems[:20]:
            print(f"  {line}")
        if len(problems) > 20:
            print(f"  ... and {len(problems) - 20} more")
        bad |= not ok
    return EXIT_DATA if bad else EXIT_OK


def cmd_gen_synthetic(args):
    spec = SynthSpec.default(args.classes, noise_std=args.noise, drift_slope=args.drift,
                             record_length=args.length,
                             records_per_class=args.records_per_class, seed=args.seed)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"# sampling_rate_hz: {spec.sampling_rate_hz:g}"]
    for rec in generate_synthetic(spec):
        name = Path(rec.file_path).name + ".csv"
        np.savetxt(out / name, rec.samples[:, None], fmt="%.17g")
        lines.append(f"{name}\tclass{rec.class_id:02d}\tcol=0")
    (out / "manifest.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(lines) - 1} records to {out}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "list-presets": cmd_list_presets, "verify-data": cmd_verify,
            "gen-synthetic": cmd_gen_synthetic}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, PresetError, RegistryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ManifestError, UnsupportedFormatError, EmptyDatasetError, DataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run_cli(args):
    """Programmatic entry: ``run_cli(["run", "--synthetic", "--preset", "smoke"])``."""
    return main(list(args))


if __name__ == "__main__":
    sys.exit(main())
