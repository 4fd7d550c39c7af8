"""Random hyperparameter search over learning rate and l2 penalty.

Parameters for all trials are drawn up front from a generator seeded with
the master seed (learning rate log-uniform, l2 uniform over the choice set),
so the sampled schedule is reproducible regardless of how trials are
executed. Each trial trains with its own splitmix64-derived sub-seed; the
best trial minimizes validation loss, ties broken by lowest index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from ..errors import PlatformError, SearchFailedError
from ..ingest import Table
from ..mlconfig import MLConfig, SearchSpace
from .model import TrainedModel
from .search_seed import trial_seed
from .training import train


def sample_trial_params(space: SearchSpace, master_seed: int) -> list[dict]:
    rng = np.random.default_rng(master_seed)
    low, high = space.learning_rate_range
    params = []
    for index in range(space.trials):
        lr = float(math.exp(rng.uniform(math.log(low), math.log(high))))
        l2 = float(space.l2_choices[int(rng.integers(0, len(space.l2_choices)))])
        params.append(
            {
                "trial": index,
                "learning_rate": lr,
                "l2_penalty": l2,
                "seed": trial_seed(master_seed, index),
            }
        )
    return params


def hyperparameter_search(
    table: Table, config: MLConfig, space: SearchSpace, max_workers: int | None = None
) -> tuple[TrainedModel, list[dict]]:
    """Run independent trials; returns (best model, full trial ledger)."""
    space.validate()
    params = sample_trial_params(space, config.trainer.seed)

    def run_trial(p: dict) -> TrainedModel:
        trial_config = replace(
            config,
            trainer=replace(
                config.trainer,
                learning_rate=p["learning_rate"],
                l2_penalty=p["l2_penalty"],
                seed=p["seed"],
            ),
        )
        return train(table, trial_config)

    results: list[TrainedModel | PlatformError] = [None] * space.trials  # type: ignore
    workers = max_workers or min(space.trials, 4)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(run_trial, p): p["trial"] for p in params}
        for future, index in futures.items():
            try:
                results[index] = future.result()
            except PlatformError as exc:
                results[index] = exc

    ledger = []
    best_index = None
    best_loss = math.inf
    for p, result in zip(params, results):
        entry = dict(p)
        if isinstance(result, TrainedModel):
            entry["val_loss"] = result.metrics.val.loss
            if entry["val_loss"] < best_loss:
                best_loss = entry["val_loss"]
                best_index = p["trial"]
        else:
            entry["error"] = f"{result.code}: {result.message}"
        ledger.append(entry)

    if best_index is None:
        raise SearchFailedError(
            "every trial failed",
            details=[e["error"] for e in ledger],
        )
    best = results[best_index]
    assert isinstance(best, TrainedModel)
    return best, ledger
