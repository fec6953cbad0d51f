import itertools

import numpy as np
import pytest

from tdcminer.cluster import SENTINEL_MAX, RunOutcome, run_tdc
from tdcminer.evotemplate import GAParams, StoppingConfig
from tdcminer.harness import (
    FIXED_COLUMNS,
    GridRanges,
    InvalidRangeError,
    ParamGrid,
    SchemaMismatchError,
    SplitSpec,
    TooFewSamplesError,
    TrainingSample,
    build_grid,
    derive_seed,
    load,
    persist,
    split,
    sweep,
)
from tdcminer.seqcore import GeneratorConfig, compute_descriptor, generate_set, make_set


def small_set(seed=0):
    cfg = GeneratorConfig(
        templates=[("A", "B", "C"), ("D", "E")],
        mutation_probability=0.2,
        set_size=10,
        seed=seed,
    )
    return generate_set(cfg)


def fast_stop():
    return StoppingConfig(epsilon=0.5, patience=1, max_generations=5)


def tiny_params(increment=2.0):
    return GAParams(
        increment=increment,
        mutation_probability=(0.2, 0.2, 0.2),
        mutation_number=1,
        parent_fraction=0.4,
        start_population_factor=1.0,
    )


def sample_of(sset, seed=7, outcome=None) -> TrainingSample:
    return TrainingSample(
        set_name=sset.name,
        seed=seed,
        params=tiny_params(),
        descriptor=compute_descriptor(sset),
        outcome=outcome
        or RunOutcome(
            elapsed_seconds=0.25,
            num_clusters=3,
            chi=12.5,
            dbi=0.75,
            non_clustered=2,
        ),
    )


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(42, 3) == derive_seed(42, 3)

    def test_varies_with_index_and_master(self):
        seeds = {derive_seed(42, i) for i in range(100)}
        assert len(seeds) == 100
        assert derive_seed(1, 0) != derive_seed(2, 0)


class TestBuildGrid:
    def test_five_values_per_param_grid_size(self):
        grid = build_grid(5, seed=0)
        assert len(grid) == 3125

    def test_single_value_grid(self):
        grid = build_grid(1, seed=0)
        assert len(grid) == 1
        assert isinstance(next(iter(grid)), GAParams)

    def test_same_seed_same_grid(self):
        assert build_grid(3, seed=9) == build_grid(3, seed=9)
        assert build_grid(3, seed=9) != build_grid(3, seed=10)

    def test_values_sorted_distinct_in_range(self):
        grid = build_grid(5, seed=1)
        for values, (lo, hi) in [
            (grid.increments, (1.0, 8.0)),
            (grid.parent_fractions, (0.05, 0.5)),
            (grid.start_population_factors, (1.0, 3.0)),
        ]:
            assert list(values) == sorted(set(values))
            assert all(lo <= v <= hi for v in values)
        assert list(grid.mutation_numbers) == sorted(set(grid.mutation_numbers))
        assert all(0 <= v <= 6 and isinstance(v, int) for v in grid.mutation_numbers)
        assert list(grid.mutation_probabilities) == sorted(
            set(grid.mutation_probabilities)
        )

    def test_probability_triples_renormalized(self):
        ranges = GridRanges(mutation_probability=(0.35, 0.4))
        grid = build_grid(4, ranges=ranges, seed=2)
        for triple in grid.mutation_probabilities:
            assert sum(triple) <= 1.0 + 1e-12

    def test_integer_dimension_exhaustion(self):
        with pytest.raises(InvalidRangeError):
            build_grid(8, seed=0)

    def test_rejects_bad_ranges(self):
        with pytest.raises(InvalidRangeError):
            build_grid(2, ranges=GridRanges(increment=(0.5, 8.0)), seed=0)
        with pytest.raises(InvalidRangeError):
            build_grid(2, ranges=GridRanges(parent_fraction=(0.0, 0.5)), seed=0)
        with pytest.raises(InvalidRangeError):
            build_grid(2, ranges=GridRanges(mutation_number=(5, 2)), seed=0)
        with pytest.raises(InvalidRangeError):
            build_grid(0, seed=0)

    def test_lexicographic_enumeration(self):
        grid = ParamGrid(
            increments=(1.0, 2.0),
            mutation_probabilities=((0.1, 0.1, 0.1), (0.2, 0.2, 0.2)),
            mutation_numbers=(1,),
            parent_fractions=(0.3, 0.4),
            start_population_factors=(1.0,),
        )
        expected = [
            (inc, probs, mn, pf, spf)
            for inc, probs, mn, pf, spf in itertools.product(
                grid.increments,
                grid.mutation_probabilities,
                grid.mutation_numbers,
                grid.parent_fractions,
                grid.start_population_factors,
            )
        ]
        got = [
            (
                p.increment,
                p.mutation_probability,
                p.mutation_number,
                p.parent_fraction,
                p.start_population_factor,
            )
            for p in grid
        ]
        assert got == expected
        assert len(got) == len(grid) == 8

    def test_empty_dimension_rejected(self):
        with pytest.raises(InvalidRangeError):
            ParamGrid((), ((0.1, 0.1, 0.1),), (1,), (0.3,), (1.0,))


class TestSweep:
    def one_point_grid(self):
        return ParamGrid(
            increments=(2.0,),
            mutation_probabilities=((0.2, 0.2, 0.2),),
            mutation_numbers=(1,),
            parent_fractions=(0.4,),
            start_population_factors=(1.0,),
        )

    def test_single_point_matches_direct_run(self):
        sset = small_set()
        grid = self.one_point_grid()
        samples = sweep(sset, grid, range(2, 5), fast_stop(), master_seed=11)
        assert len(samples) == 1
        direct = run_tdc(
            sset, next(iter(grid)), range(2, 5), fast_stop(), seed=derive_seed(11, 0)
        )
        got, want = samples[0].outcome.as_columns(), direct.outcome.as_columns()
        got.pop("elapsed_seconds")
        want.pop("elapsed_seconds")
        assert got == want
        assert samples[0].set_name == sset.name
        assert samples[0].descriptor == compute_descriptor(sset)

    def test_grid_order_and_cardinality(self):
        sset = small_set()
        grid = ParamGrid(
            increments=(1.5, 2.0, 3.0),
            mutation_probabilities=((0.2, 0.2, 0.2),),
            mutation_numbers=(1,),
            parent_fractions=(0.4,),
            start_population_factors=(1.0,),
        )
        samples = sweep(sset, grid, range(2, 4), fast_stop(), master_seed=0)
        assert [s.params for s in samples] == list(grid)
        assert [s.seed for s in samples] == [derive_seed(0, i) for i in range(3)]

    def test_parallel_matches_serial(self):
        sset = small_set(seed=3)
        grid = ParamGrid(
            increments=(1.5, 2.5),
            mutation_probabilities=((0.2, 0.2, 0.2),),
            mutation_numbers=(1,),
            parent_fractions=(0.4,),
            start_population_factors=(1.0, 2.0),
        )
        serial = sweep(sset, grid, range(2, 4), fast_stop(), master_seed=5, jobs=1)
        parallel = sweep(sset, grid, range(2, 4), fast_stop(), master_seed=5, jobs=2)
        for a, b in zip(serial, parallel):
            ca, cb = a.outcome.as_columns(), b.outcome.as_columns()
            ca.pop("elapsed_seconds")
            cb.pop("elapsed_seconds")
            assert ca == cb
            assert a.params == b.params and a.seed == b.seed

    def test_progress_on_stderr(self, capsys):
        sweep(small_set(), self.one_point_grid(), range(2, 4), fast_stop(), 0)
        assert "[sweep] 1/1" in capsys.readouterr().err

    def test_degenerate_run_yields_sentinel_sample(self):
        sset = make_set("flat", [("A",), ("A",)])
        samples = sweep(sset, self.one_point_grid(), range(2, 4), fast_stop(), 0)
        assert len(samples) == 1
        assert samples[0].outcome.num_clusters == 1
        assert samples[0].outcome.chi == SENTINEL_MAX
        assert samples[0].outcome.dbi == SENTINEL_MAX


class TestSplit:
    def make_samples(self, n):
        sset = small_set()
        return [sample_of(sset, seed=i) for i in range(n)]

    def test_seventy_thirty(self):
        train, test = split(self.make_samples(10), SplitSpec(0.7, seed=0))
        assert len(train) == 7 and len(test) == 3

    def test_disjoint_exhaustive(self):
        samples = self.make_samples(9)
        train, test = split(samples, SplitSpec(0.7, seed=4))
        assert sorted(s.seed for s in train + test) == [s.seed for s in samples]

    def test_test_partition_never_empty(self):
        train, test = split(self.make_samples(3), SplitSpec(0.9, seed=0))
        assert len(train) == 2 and len(test) == 1

    def test_same_seed_same_partition(self):
        samples = self.make_samples(8)
        a = split(samples, SplitSpec(0.7, seed=2))
        b = split(samples, SplitSpec(0.7, seed=2))
        assert [s.seed for s in a[0]] == [s.seed for s in b[0]]
        c = split(samples, SplitSpec(0.7, seed=3))
        assert [s.seed for s in a[0]] != [s.seed for s in c[0]]

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamplesError):
            split(self.make_samples(1), SplitSpec(0.7, seed=0))
        with pytest.raises(TooFewSamplesError):
            SplitSpec(1.0, seed=0)
        with pytest.raises(TooFewSamplesError):
            SplitSpec(0.0, seed=0)


class TestPersistLoad:
    def test_round_trip_identity(self, tmp_path):
        set_a = small_set()
        set_b = make_set("other", [("X", "Y"), ("Y", "X", "X")])
        samples = [
            sample_of(set_a, seed=1),
            sample_of(set_b, seed=2, outcome=RunOutcome(1.5, 2, SENTINEL_MAX, 0.5, 0)),
        ]
        path = tmp_path / "samples.csv"
        persist(samples, path)
        loaded = load(path)
        assert loaded == samples
        for got, want in zip(loaded, samples):
            assert got.descriptor.ngram_freqs == want.descriptor.ngram_freqs
            assert got.outcome == want.outcome
            assert got.params == want.params

    def test_union_vocabulary_zero_filled(self, tmp_path):
        set_a = make_set("a", [("A", "A")])
        set_b = make_set("b", [("B",)])
        path = tmp_path / "samples.csv"
        persist([sample_of(set_a), sample_of(set_b)], path)
        header = path.read_text().splitlines()[0]
        assert "ng:A" in header and "ng:B" in header and "ng:A|A" in header
        loaded = load(path)
        assert "B" not in loaded[0].descriptor.ngram_freqs
        assert "A" not in loaded[1].descriptor.ngram_freqs

    def test_empty_list_round_trip(self, tmp_path):
        path = tmp_path / "empty.csv"
        persist([], path)
        text = path.read_text()
        assert text.splitlines()[0].startswith(",".join(FIXED_COLUMNS[:2]))
        assert load(path) == []

    def test_unknown_column_named(self, tmp_path):
        path = tmp_path / "samples.csv"
        persist([sample_of(small_set())], path)
        lines = path.read_text().splitlines()
        lines[0] += ",bogus_column"
        lines[1] += ",1.0"
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaMismatchError, match="bogus_column"):
            load(bad)

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "samples.csv"
        persist([sample_of(small_set())], path)
        lines = path.read_text().splitlines()
        cells = lines[0].split(",")
        dropped = cells.index("chi")
        rows = []
        for line in lines:
            parts = line.split(",")
            del parts[dropped]
            rows.append(",".join(parts))
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(rows) + "\n")
        with pytest.raises(SchemaMismatchError, match="chi"):
            load(bad)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load(tmp_path / "nope.csv")
