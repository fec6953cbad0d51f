"""Parameter sweeps over sequence sets and training-sample plumbing.

A sweep enumerates a seeded random parameter grid, executes one TDC run per
grid point (optionally in parallel), and records each run as a training
sample: the GA parameters, the set descriptor, and the run outcome.  Samples
persist to CSV and split 70:30 (or any fraction) for surrogate training.
"""

from __future__ import annotations

import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from itertools import product

import numpy as np

from .cluster import OUTCOME_COLUMNS, SENTINEL_MAX, RunOutcome, run_tdc
from .evotemplate import PARAM_COLUMNS, GAParams, StoppingConfig, params_from_columns
from .seqcore import (
    DESCRIPTOR_STAT_COLUMNS,
    SequenceSet,
    SetDescriptor,
    compute_descriptor,
)

log = logging.getLogger(__name__)

# Descriptor n-gram columns carry this prefix in CSV headers so they can
# never collide with the fixed columns, whatever the state tokens are.
NGRAM_COLUMN_PREFIX = "ng:"

FIXED_COLUMNS = ("set_name", "seed") + PARAM_COLUMNS + DESCRIPTOR_STAT_COLUMNS


class InvalidRangeError(ValueError):
    """Raised for grid ranges violating the GA parameter bounds."""


class TooFewSamplesError(ValueError):
    """Raised when a split cannot leave both partitions non-empty."""


class SchemaMismatchError(ValueError):
    """Raised on loading a CSV whose columns do not match the sample schema."""


def derive_seed(master_seed: int, index: int) -> int:
    """Per-run seed: the mixed first state word of SeedSequence([master, index]).

    Stable across platforms and independent of execution order, so sweeps
    are reproducible run by run.
    """
    seq = np.random.SeedSequence([int(master_seed), int(index)])
    return int(seq.generate_state(1)[0])


@dataclass(frozen=True)
class GridRanges:
    """Inclusive sampling ranges for the five GA parameter dimensions.

    mutation_probability bounds apply to each of the three components; a
    drawn triple is rescaled to sum 1 if it exceeds that.
    """

    increment: tuple[float, float] = (1.0, 8.0)
    mutation_probability: tuple[float, float] = (0.0, 0.4)
    mutation_number: tuple[int, int] = (0, 6)
    parent_fraction: tuple[float, float] = (0.05, 0.5)
    start_population_factor: tuple[float, float] = (1.0, 3.0)

    def validate(self):
        for name in (
            "increment",
            "mutation_probability",
            "mutation_number",
            "parent_fraction",
            "start_population_factor",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InvalidRangeError(f"{name}: empty range [{lo}, {hi}]")
        if self.increment[0] < 1:
            raise InvalidRangeError("increment range must start at >= 1")
        lo, hi = self.mutation_probability
        if lo < 0 or hi > 1:
            raise InvalidRangeError("mutation_probability range must lie in [0, 1]")
        if self.mutation_number[0] < 0:
            raise InvalidRangeError("mutation_number range must start at >= 0")
        lo, hi = self.parent_fraction
        if lo <= 0 or hi > 1:
            raise InvalidRangeError("parent_fraction range must lie in (0, 1]")
        if self.start_population_factor[0] <= 0:
            raise InvalidRangeError("start_population_factor range must be > 0")


@dataclass(frozen=True)
class ParamGrid:
    """Per-dimension value lists; the grid is their Cartesian product.

    The mutation probability dimension holds joint (p_sub, p_del, p_ins)
    triples.  Iteration is lazy, in lexicographic order of the dimensions as
    declared here.
    """

    increments: tuple[float, ...]
    mutation_probabilities: tuple[tuple[float, float, float], ...]
    mutation_numbers: tuple[int, ...]
    parent_fractions: tuple[float, ...]
    start_population_factors: tuple[float, ...]

    def __post_init__(self):
        for name in (
            "increments",
            "mutation_probabilities",
            "mutation_numbers",
            "parent_fractions",
            "start_population_factors",
        ):
            if not getattr(self, name):
                raise InvalidRangeError(f"{name} must be non-empty")

    def __len__(self) -> int:
        return (
            len(self.increments)
            * len(self.mutation_probabilities)
            * len(self.mutation_numbers)
            * len(self.parent_fractions)
            * len(self.start_population_factors)
        )

    def __iter__(self):
        for inc, probs, mn, pf, spf in product(
            self.increments,
            self.mutation_probabilities,
            self.mutation_numbers,
            self.parent_fractions,
            self.start_population_factors,
        ):
            yield GAParams(
                increment=inc,
                mutation_probability=probs,
                mutation_number=mn,
                parent_fraction=pf,
                start_population_factor=spf,
            )


def _draw_distinct(draw, count, limit=1000):
    """Draw until `count` distinct values accumulate; deterministic given rng."""
    values = []
    seen = set()
    for _ in range(limit):
        if len(values) == count:
            return values
        v = draw()
        if v not in seen:
            seen.add(v)
            values.append(v)
    raise InvalidRangeError(f"cannot draw {count} distinct values from the range")


def build_grid(values_per_param: int, ranges: GridRanges | None = None, seed: int = 0) -> ParamGrid:
    """Draw a seeded random grid: per dimension, uniform distinct sorted values."""
    if values_per_param < 1:
        raise InvalidRangeError("values_per_param must be >= 1")
    ranges = ranges or GridRanges()
    ranges.validate()
    mn_lo, mn_hi = ranges.mutation_number
    if values_per_param > mn_hi - mn_lo + 1:
        raise InvalidRangeError(
            f"cannot draw {values_per_param} distinct integers from "
            f"[{mn_lo}, {mn_hi}]"
        )
    rng = np.random.default_rng(seed)

    def uniform(lo, hi):
        return lambda: float(rng.uniform(lo, hi))

    def triple(lo, hi):
        def draw():
            p = rng.uniform(lo, hi, size=3)
            total = float(p.sum())
            if total > 1.0:
                p = p / total
            return (float(p[0]), float(p[1]), float(p[2]))

        return draw

    def integer(lo, hi):
        return lambda: int(rng.integers(lo, hi + 1))

    return ParamGrid(
        increments=tuple(sorted(_draw_distinct(uniform(*ranges.increment), values_per_param))),
        mutation_probabilities=tuple(
            sorted(_draw_distinct(triple(*ranges.mutation_probability), values_per_param))
        ),
        mutation_numbers=tuple(
            sorted(_draw_distinct(integer(*ranges.mutation_number), values_per_param))
        ),
        parent_fractions=tuple(
            sorted(_draw_distinct(uniform(*ranges.parent_fraction), values_per_param))
        ),
        start_population_factors=tuple(
            sorted(
                _draw_distinct(uniform(*ranges.start_population_factor), values_per_param)
            )
        ),
    )


@dataclass(frozen=True)
class TrainingSample:
    """One sweep run: parameters in, set descriptor, outcomes out."""

    set_name: str
    seed: int
    params: GAParams
    descriptor: SetDescriptor
    outcome: RunOutcome


@dataclass(frozen=True)
class SplitSpec:
    """Train fraction in (0, 1) plus the shuffle seed."""

    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise TooFewSamplesError("train_fraction must lie strictly in (0, 1)")


def _run_one(task):
    index, sset, params, ks, stop, seed = task
    try:
        result = run_tdc(sset, params, ks, stop, seed)
        return index, result.outcome
    except Exception:
        log.exception("grid point %d failed; recording degenerate sample", index)
        return index, RunOutcome(
            elapsed_seconds=0.0,
            num_clusters=0,
            chi=SENTINEL_MAX,
            dbi=SENTINEL_MAX,
            non_clustered=len(sset),
        )


def sweep(
    sset: SequenceSet,
    grid: ParamGrid,
    krange,
    stop: StoppingConfig,
    master_seed: int,
    jobs: int = 1,
) -> list[TrainingSample]:
    """One run_tdc per grid point; samples return in grid order.

    The run at grid index i uses derive_seed(master_seed, i), so results do
    not depend on worker scheduling.  Progress goes to standard error.
    """
    descriptor = compute_descriptor(sset)
    ks = tuple(sorted(set(int(k) for k in krange)))
    tasks = [
        (i, sset, params, ks, stop, derive_seed(master_seed, i))
        for i, params in enumerate(grid)
    ]
    total = len(tasks)
    outcomes: dict[int, RunOutcome] = {}

    def note(index, outcome):
        outcomes[index] = outcome
        print(
            f"[sweep] {len(outcomes)}/{total} done (grid point {index}, "
            f"ga {outcome.elapsed_seconds:.2f}s)",
            file=sys.stderr,
        )

    if jobs <= 1:
        for task in tasks:
            note(*_run_one(task))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, task) for task in tasks]
            for future in as_completed(futures):
                note(*future.result())

    return [
        TrainingSample(
            set_name=sset.name,
            seed=tasks[i][5],
            params=tasks[i][2],
            descriptor=descriptor,
            outcome=outcomes[i],
        )
        for i in range(total)
    ]


def split(samples, spec: SplitSpec):
    """Seeded shuffle, first ceil(fraction * n) to train; test stays non-empty."""
    n = len(samples)
    if n < 2:
        raise TooFewSamplesError("need at least 2 samples to split")
    order = np.random.default_rng(spec.seed).permutation(n)
    n_train = min(math.ceil(spec.train_fraction * n), n - 1)
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


def _ngram_vocab(samples) -> list[str]:
    vocab = set()
    for s in samples:
        vocab.update(s.descriptor.ngram_freqs)
    return sorted(vocab)


def _format(value) -> str:
    return repr(value)


def persist(samples, path) -> None:
    """Write samples as CSV; n-gram columns are the union over samples."""
    vocab = _ngram_vocab(samples)
    header = (
        list(FIXED_COLUMNS)
        + [NGRAM_COLUMN_PREFIX + g for g in vocab]
        + list(OUTCOME_COLUMNS)
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for s in samples:
            row = [s.set_name, s.seed]
            params = s.params.as_columns()
            row += [_format(params[c]) for c in PARAM_COLUMNS]
            stats = dict(zip(DESCRIPTOR_STAT_COLUMNS, s.descriptor.csv_values()))
            row += [_format(stats[c]) for c in DESCRIPTOR_STAT_COLUMNS]
            row += [_format(s.descriptor.ngram_freqs.get(g, 0.0)) for g in vocab]
            outcome = s.outcome.as_columns()
            row += [_format(outcome[c]) for c in OUTCOME_COLUMNS]
            writer.writerow(row)


def load(path) -> list[TrainingSample]:
    """Inverse of persist; zero n-gram frequencies drop out on load."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatchError("empty file: missing header") from None
        expected = set(FIXED_COLUMNS) | set(OUTCOME_COLUMNS)
        seen = set()
        for column in header:
            if column in expected:
                seen.add(column)
            elif not column.startswith(NGRAM_COLUMN_PREFIX):
                raise SchemaMismatchError(f"unknown column {column!r}")
        missing = expected - seen
        if missing:
            raise SchemaMismatchError(f"missing column {sorted(missing)[0]!r}")

        samples = []
        for row in reader:
            record = dict(zip(header, row))
            freqs = {
                column[len(NGRAM_COLUMN_PREFIX):]: float(record[column])
                for column in header
                if column.startswith(NGRAM_COLUMN_PREFIX)
                and float(record[column]) != 0.0
            }
            descriptor = SetDescriptor(
                min_len=int(record["min_len"]),
                max_len=int(record["max_len"]),
                median_len=float(record["median_len"]),
                stdev_len=float(record["stdev_len"]),
                outlier_count=int(record["outlier_count"]),
                unique_count=int(record["unique_count"]),
                ngram_freqs=freqs,
            )
            outcome = RunOutcome(
                elapsed_seconds=float(record["elapsed_seconds"]),
                num_clusters=int(record["num_clusters"]),
                chi=float(record["chi"]),
                dbi=float(record["dbi"]),
                non_clustered=int(record["non_clustered"]),
            )
            samples.append(
                TrainingSample(
                    set_name=record["set_name"],
                    seed=int(record["seed"]),
                    params=params_from_columns(record),
                    descriptor=descriptor,
                    outcome=outcome,
                )
            )
    return samples
