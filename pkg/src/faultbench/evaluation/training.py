"""Training loop, repeated runs and per-epoch evaluation."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..autograd import functional as F
from ..autograd.optim import Adam
from ..autograd.tensor import Tensor, no_grad
from ..errors import ConfigurationError, EmptyDatasetError, NonFiniteError
from ..models import AutoEncoderModel, build_model
from .metrics import RepeatResult, RunReport, confusion_matrix, predict

log = logging.getLogger(__name__)

EVAL_BATCH = 256


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 64
    lr: float = 1e-3

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 2 or self.lr <= 0:
            raise ConfigurationError("epochs >= 1, batch_size >= 2 and lr > 0 are required")


def batch_indices(n, batch_size, rng):
    """Shuffled mini-batches; a trailing batch of one joins the previous one.

    Batch normalization needs at least two samples per training batch, so
    a size-1 remainder is merged rather than dropped.
    """
    if n < 2:
        raise EmptyDatasetError(f"training needs at least 2 samples, got {n}")
    perm = rng.permutation(n)
    batches = [perm[i : i + batch_size] for i in range(0, n, batch_size)]
    if len(batches) > 1 and len(batches[-1]) == 1:
        tail = batches.pop()
        batches[-1] = np.concatenate([batches[-1], tail])
    return batches


def evaluate(model, data, class_count):
    """Confusion matrix of ``model`` on ``data`` in eval mode."""
    was_training = model.training
    model.eval()
    preds = []
    with no_grad():
        for lo in range(0, len(data), EVAL_BATCH):
            idx = np.arange(lo, min(lo + EVAL_BATCH, len(data)))
            x, _ = data.batch(idx, "eval")
            preds.append(predict(model(Tensor(x)).data))
    model.train(was_training)
    return confusion_matrix(data.labels, np.concatenate(preds), class_count)


def train_run(model, train, test, seed, config=TrainConfig(), class_count=None):
    """Train ``model`` for ``config.epochs`` epochs, testing after each one.

    Auto-encoders spend their plan's first epochs on reconstruction and the
    rest on classification; the test trace covers both phases. A non-finite
    loss stops the run and marks it failed.
    """
    if len(train) == 0 or len(test) == 0:
        raise EmptyDatasetError("train and test sets must be non-empty")
    class_count = class_count or model.class_count
    shuffle_rng, augment_rng, noise_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )
    is_ae = isinstance(model, AutoEncoderModel)
    phase1 = model.plan.phase1_epochs if is_ae else 0
    if is_ae:
        opt1 = Adam(model.phase_parameters(1), config.lr)
        opt2 = Adam(model.phase_parameters(2), config.lr)
    else:
        opt2 = Adam(model.parameters(), config.lr)

    trace, train_trace = [], []
    cm = None
    model.train()
    for epoch in range(1, config.epochs + 1):
        reconstructing = epoch <= phase1
        opt = opt1 if reconstructing else opt2
        correct = 0
        try:
            for idx in batch_indices(len(train), config.batch_size, shuffle_rng):
                x, y = train.batch(idx, "train", augment_rng)
                model.zero_grad()
                if reconstructing:
                    loss = model.reconstruction_loss(x, noise_rng)
                else:
                    logits = model(Tensor(x))
                    loss = F.cross_entropy_loss(logits, y)
                    correct += int(np.sum(predict(logits.data) == y))
                if not np.isfinite(loss.item()):
                    raise NonFiniteError("loss is not finite")
                loss.backward()
                opt.step()
        except NonFiniteError as exc:
            log.warning("seed %d diverged at epoch %d: %s", seed, epoch, exc)
            return RepeatResult(seed, np.array(trace), cm, np.array(train_trace),
                                failed=True, failed_epoch=epoch, error=str(exc))
        cm = evaluate(model, test, class_count)
        trace.append(np.trace(cm) / cm.sum())
        train_trace.append(np.nan if reconstructing else correct / len(train))
        log.debug("seed %d epoch %d test %.4f", seed, epoch, trace[-1])
    return RepeatResult(seed, np.array(trace), cm, np.array(train_trace))


@dataclass
class RunTask:
    """Everything needed to run one repeat from a seed alone."""

    arch: str
    train: object            # PreparedData
    test: object             # PreparedData
    class_count: int
    config: TrainConfig = field(default_factory=TrainConfig)
    overrides: dict = field(default_factory=dict)

    def run(self, seed):
        model = build_model(self.arch, self.train.sample_shape, self.class_count, seed=seed,
                            epochs=self.config.epochs, **self.overrides)
        return train_run(model, self.train, self.test, seed, self.config, self.class_count)


def _run_one(args):
    task, seed = args
    return task.run(seed)


def repeat_runs(task, repeats=5, base_seed=0, workers=1):
    """Run seeds ``base_seed .. base_seed + repeats - 1``.

    With ``workers > 1`` repeats run in separate processes; results are
    collected in seed order, so the report does not depend on scheduling.
    """
    seeds = [base_seed + i for i in range(repeats)]
    if workers > 1 and repeats > 1:
        with ProcessPoolExecutor(max_workers=min(workers, repeats)) as pool:
            results = list(pool.map(_run_one, [(task, s) for s in seeds]))
    else:
        results = [task.run(s) for s in seeds]
    return RunReport(results, task.config.epochs)
