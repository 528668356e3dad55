"""Execute an experiment matrix and write its artifacts.

Layout under ``output_dir``::

    config.json                          resolved configs, one per variant
    report.md                            summary table of every cell
    <variant>/<arch>-<input>-<norm>/     one directory per cell
        trace.csv  summary.csv  [trace.png]
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from ..datasets import generate_synthetic, get_registry, load_dataset
from ..datasets.records import WindowedDataset, window_records
from ..datasets.synthetic import class_names as synth_class_names
from ..errors import ConfigurationError, EmptyReportError, PresetError
from ..evaluation import (
    RunTask,
    repeat_runs,
    split,
    summarize,
    take_per_class,
    write_summary_csv,
    write_trace_csv,
)
from ..evaluation.splits import SplitResult
from ..models import model_family
from ..preprocessing import PipelineSpec, PreparedData, transform_batch
from ..transforms import IMAGE_INPUTS, image_size_for
from .presets import expand_preset

log = logging.getLogger(__name__)

BOLD_THRESHOLD = 0.95
METRICS = ("last_mean", "last_max", "best_mean", "best_max", "average_accuracy")


@dataclass
class CellResult:
    variant: str
    arch: str
    input_type: str
    normalization: str
    directory: Path | None
    summary: dict | None = None
    skipped: str = ""          # reason when the cell could not run
    failed: bool = False       # every repeat diverged
    report: object = None


@dataclass
class ExperimentResult:
    cells: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def all_failed_cells(self):
        return [c for c in self.cells if c.failed]


# -- data ---------------------------------------------------------------------

def _remap(records, labels):
    """Restrict to ``labels`` (by class name) and renumber classes densely."""
    keep = {name: i for i, name in enumerate(labels)}
    out = []
    for r in records:
        name = r.condition.get("label")
        if name in keep:
            out.append(replace(r, class_id=keep[name]))
    return out


def load_records(cfg, condition=None):
    """Return ``(records, class_names)`` for the config's dataset."""
    src = cfg.dataset
    if src.is_synthetic:
        if src.synth is None:
            raise ConfigurationError("synthetic dataset selected without a synthetic spec")
        names = synth_class_names(src.synth)
        records = generate_synthetic(src.synth)
        for r in records:
            r.condition["label"] = names[r.class_id]
        if src.labels:
            unknown = [l for l in src.labels if l not in names]
            if unknown:
                raise PresetError(f"synthetic dataset has no classes {unknown}")
            return _remap(records, src.labels), tuple(src.labels)
        return records, names
    reg = get_registry(src.dataset_id)
    cond = src.condition if condition is None else condition
    if src.labels:
        missing = [l for l in src.labels if l not in reg.classes]
        if missing:
            raise PresetError(f"{src.dataset_id} has no bearing code / class {missing}")
        records = load_dataset(src.dataset_id, src.root, cond, src.labels)
        return _remap(records, src.labels), tuple(src.labels)
    return load_dataset(src.dataset_id, src.root, cond), reg.classes


def _ordering(ds, how, seed):
    """Sort key over all windows: record offset (earliest) or a seeded shuffle."""
    if how == "earliest":
        return ds.offsets
    return np.random.default_rng(seed).permutation(len(ds))


def build_split(cfg):
    """Load data and produce the train/test windows for one config variant."""
    s = cfg.sampling
    if s.train_condition or s.test_condition:
        if cfg.dataset.is_synthetic:
            raise PresetError("working-condition split needs condition metadata")
        records, names = load_records(cfg, condition={})
        train_recs = [r for r in records
                      if all(r.condition.get(k) == v for k, v in s.train_condition.items())]
        test_recs = [r for r in records
                     if all(r.condition.get(k) == v for k, v in s.test_condition.items())]
        if not train_recs or not test_recs:
            raise PresetError(f"condition {s.train_condition or s.test_condition} absent")
        n = len(names)
        tr = window_records(train_recs, class_count=n, class_names=names)
        te = window_records(test_recs, class_count=n, class_names=names,
                            record_ids=range(len(train_recs), len(records)))
        ds = WindowedDataset.concat([tr, te])
        result = SplitResult(ds, np.arange(len(tr)), np.arange(len(tr), len(ds)))
    else:
        records, names = load_records(cfg)
        result = split(records, replace(cfg.split, seed=cfg.seed), class_count=len(names),
                       class_names=names)
    ds = result.dataset
    train, test = result.train, result.test
    try:
        if s.test_counts:
            order = _ordering(ds, s.order, cfg.seed + 1)
            test = take_per_class(ds.labels, test, s.test_counts, order, "test")
        if s.train_counts:
            order = _ordering(ds, s.order, cfg.seed + 2)
            train = take_per_class(ds.labels, train, s.train_counts, order, "training")
    except Exception as exc:
        raise PresetError(str(exc)) from None
    return SplitResult(ds, train, test, result.warnings), names


# -- cells --------------------------------------------------------------------

def cell_incompatibility(arch, input_type):
    family = model_family(arch)
    if family == "mlp" and input_type in IMAGE_INPUTS:
        return "mlp takes 1-D inputs only"
    return ""


def pipeline_for(cfg, arch, input_type, normalization):
    size = cfg.image_size or image_size_for(input_type, model_family(arch))
    spec = PipelineSpec(input_type, normalization, (), size, cfg.fft_mode)
    if cfg.augment:
        spec = spec.with_default_augmentations(cfg.augment_probability)
    return spec


def cell_dir(cfg, arch, input_type, normalization):
    return Path(cfg.output_dir) / (cfg.variant or "main") / f"{arch}-{input_type}-{normalization}"


def run_cell(cfg, arch, input_type, normalization, split_result, names, features=None):
    ds = split_result.dataset
    spec = pipeline_for(cfg, arch, input_type, normalization)
    if features is None:
        features = transform_batch(ds.windows, spec, resize=False)
    train = PreparedData(features[split_result.train], ds.labels[split_result.train], spec)
    test = PreparedData(features[split_result.test], ds.labels[split_result.test], spec)
    task = RunTask(arch, train, test, len(names), cfg.train, dict(cfg.overrides))
    report = repeat_runs(task, cfg.repeats, cfg.seed, cfg.workers)
    report.warnings = list(split_result.warnings)
    out = cell_dir(cfg, arch, input_type, normalization)
    out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(report, out / "trace.csv")
    cell = CellResult(cfg.variant, arch, input_type, normalization, out, report=report)
    try:
        cell.summary = summarize(report)
        write_summary_csv(cell.summary, out / "summary.csv")
    except EmptyReportError:
        cell.failed = True
        (out / "summary.csv").write_text("metric,value\nrepeats_ok,0\n", encoding="utf-8")
    if cfg.plot:
        plot_trace(report, out / "trace.png", f"{arch} / {input_type} / {normalization}")
    return cell


def plot_trace(report, path, title=""):
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib not installed; skipping %s", path)
        return
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for rep in report.repeats:
        ax.plot(np.arange(1, len(rep.trace) + 1), rep.trace, label=f"seed {rep.seed}")
    ax.set_xlabel("epoch")
    ax.set_ylabel("test accuracy")
    ax.set_ylim(0, 1.02)
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def run_variant(cfg):
    split_result, names = build_split(cfg)
    cells = []
    for input_type in cfg.input_types:
        features = None  # native-size features are shared by every cell of this input
        for normalization, arch in product(cfg.normalizations, cfg.archs):
            reason = cell_incompatibility(arch, input_type)
            if reason:
                cells.append(CellResult(cfg.variant, arch, input_type, normalization, None,
                                        skipped=reason))
                continue
            if features is None:
                spec = pipeline_for(cfg, arch, input_type, normalization)
                features = transform_batch(split_result.dataset.windows, spec, resize=False)
            log.info("cell %s %s %s %s", cfg.variant or "main", arch, input_type, normalization)
            cells.append(run_cell(cfg, arch, input_type, normalization, split_result, names,
                                  features))
    return cells, split_result.warnings


def run_experiment(cfg):
    """Expand the preset, run every cell and write the report."""
    variants = expand_preset(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(
        json.dumps([v.to_dict() for v in variants], indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    result = ExperimentResult()
    for v in variants:
        cells, warnings = run_variant(v)
        result.cells.extend(cells)
        result.warnings.extend(f"{v.variant or 'main'}: {w}" for w in warnings)
    write_report(cfg, variants, result, out / "report.md")
    return result


def _fmt_metric(value):
    text = f"{100 * value:.2f}"
    return f"**{text}**" if value >= BOLD_THRESHOLD else text


def report_table(cells):
    head = "| variant | model | input | normalization | " + " | ".join(METRICS) + " |"
    rule = "|" + "---|" * (4 + len(METRICS))
    rows = [head, rule]
    for c in cells:
        lead = f"| {c.variant or 'main'} | {c.arch} | {c.input_type} | {c.normalization} |"
        if c.skipped:
            rows.append(lead + " n/a |" * len(METRICS))
        elif c.failed:
            rows.append(lead + " failed |" * len(METRICS))
        else:
            rows.append(lead + "".join(f" {_fmt_metric(c.summary[m])} |" for m in METRICS))
    return "\n".join(rows)


def write_report(cfg, variants, result, path):
    lines = [f"# {cfg.name}", ""]
    if cfg.preset:
        lines += [f"Preset: `{cfg.preset}`", ""]
    first = variants[0]
    lines += [f"Dataset: `{first.dataset.dataset_id}`; repeats: {first.repeats}; "
              f"epochs: {first.train.epochs}; split: {first.split.strategy}; "
              f"base seed: {first.seed}.", "",
              f"Accuracies in percent; values >= {100 * BOLD_THRESHOLD:.0f} are bold.", "",
              report_table(result.cells), ""]
    skipped = [c for c in result.cells if c.skipped]
    if skipped:
        lines += ["Skipped cells:", ""]
        lines += [f"- {c.arch} / {c.input_type}: {c.skipped}" for c in skipped]
        lines.append("")
    failures = [(c, r) for c in result.cells if c.report for r in c.report.failures]
    if failures:
        lines += ["Failed repeats:", ""]
        lines += [f"- {c.arch} / {c.input_type} / {c.normalization}: seed {r.seed} diverged "
                  f"at epoch {r.failed_epoch}" for c, r in failures]
        lines.append("")
    if result.warnings:
        lines += ["Warnings:", ""] + [f"- {w}" for w in result.warnings] + [""]
    Path(path).write_text("\n".join(lines), encoding="utf-8")
