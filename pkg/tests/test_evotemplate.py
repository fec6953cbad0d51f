import itertools
import math

import numpy as np
import pytest

from oracles import brute_force_front
from tdcminer.align import aligning_number
from tdcminer.evotemplate import (
    GAParams,
    InvalidParamsError,
    ObjectiveVector,
    StoppingConfig,
    dominates,
    front_change_metric,
    init_population,
    mutate,
    pareto_front,
    run_ga,
)
from tdcminer.seqcore import make_set


def params(**overrides) -> GAParams:
    base = dict(
        increment=2.0,
        mutation_probability=(0.2, 0.2, 0.2),
        mutation_number=2,
        parent_fraction=0.4,
        start_population_factor=2.0,
    )
    base.update(overrides)
    return GAParams(**base)


class TestDominates:
    def test_shorter_same_aligning(self):
        assert dominates(ObjectiveVector(3, 3), ObjectiveVector(4, 3))

    def test_reflexive_non_dominance(self):
        assert not dominates(ObjectiveVector(3, 3), ObjectiveVector(3, 3))

    def test_incomparable(self):
        assert not dominates(ObjectiveVector(2, 1), ObjectiveVector(3, 3))
        assert not dominates(ObjectiveVector(3, 3), ObjectiveVector(2, 1))


class TestParetoFront:
    def test_known_front(self):
        evaluated = [
            (("t1",), ObjectiveVector(3, 3)),
            (("t2",), ObjectiveVector(4, 3)),
            (("t3",), ObjectiveVector(2, 1)),
            (("t4",), ObjectiveVector(5, 4)),
        ]
        front = {obj for _, obj in pareto_front(evaluated)}
        assert front == {ObjectiveVector(2, 1), ObjectiveVector(3, 3), ObjectiveVector(5, 4)}

    def test_single_element(self):
        evaluated = [(("t",), ObjectiveVector(4, 2))]
        assert pareto_front(evaluated) == evaluated

    def test_duplicates_collapse_to_first(self):
        evaluated = [
            (("a",), ObjectiveVector(3, 3)),
            (("b",), ObjectiveVector(3, 3)),
            (("c",), ObjectiveVector(3, 3)),
        ]
        assert pareto_front(evaluated) == [(("a",), ObjectiveVector(3, 3))]

    def test_against_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            vectors = [
                ObjectiveVector(int(rng.integers(1, 10)), int(rng.integers(0, 10)))
                for _ in range(rng.integers(1, 25))
            ]
            evaluated = [((str(i),), v) for i, v in enumerate(vectors)]
            got = {obj for _, obj in pareto_front(evaluated)}
            distinct = list(dict.fromkeys(vectors))
            keep = brute_force_front(distinct, dominates)
            assert got == {distinct[i] for i in keep}


class TestFrontChangeMetric:
    def test_three_four_five(self):
        assert front_change_metric([ObjectiveVector(3, 4)]) == pytest.approx(5.0)

    def test_sum_of_terms(self):
        objs = [ObjectiveVector(3, 4), ObjectiveVector(0, 1)]
        assert front_change_metric(objs) == pytest.approx(6.0)

    def test_order_invariant(self):
        objs = [ObjectiveVector(2, 5), ObjectiveVector(7, 1), ObjectiveVector(3, 3)]
        assert front_change_metric(objs) == pytest.approx(front_change_metric(objs[::-1]))


class TestInitPopulation:
    def test_population_size_is_ceiling(self):
        sset = make_set("t", [("A",)] * 10)
        pop = init_population(sset, params(start_population_factor=1.2), seed=0)
        assert len(pop) == 12

    def test_increment_one_fixes_length(self):
        sset = make_set("t", [("A", "B", "C"), ("A", "B")])
        pop = init_population(sset, params(increment=1.0), seed=1)
        assert all(len(t) == 3 for t in pop)

    def test_deterministic(self):
        sset = make_set("t", [("A", "B"), ("B", "A")])
        p = params()
        assert init_population(sset, p, seed=9) == init_population(sset, p, seed=9)

    def test_lengths_within_bounds(self):
        sset = make_set("t", [("A", "B", "C", "D")])
        pop = init_population(sset, params(increment=2.5), seed=2)
        assert all(4 <= len(t) <= 10 for t in pop)

    def test_invalid_increment_rejected(self):
        with pytest.raises(InvalidParamsError):
            params(increment=0.5)


class TestMutate:
    def test_zero_mutation_number_is_identity(self):
        rng = np.random.default_rng(0)
        t = ("A", "B", "C")
        assert mutate(t, params(mutation_number=0), rng) == t

    def test_zero_probabilities_are_identity(self):
        rng = np.random.default_rng(0)
        t = ("A", "B", "C")
        p = params(mutation_probability=(0.0, 0.0, 0.0), mutation_number=5)
        for _ in range(20):
            assert mutate(t, p, rng) == t

    def test_substitution_on_unary_alphabet_is_fixed_point(self):
        rng = np.random.default_rng(0)
        t = ("A", "A")
        p = params(mutation_probability=(1.0, 0.0, 0.0), mutation_number=1)
        for _ in range(20):
            assert mutate(t, p, rng, alphabet=["A"]) == t

    def test_never_empty_and_respects_cap(self):
        rng = np.random.default_rng(4)
        p = params(mutation_probability=(0.2, 0.6, 0.2), mutation_number=6)
        t = ("A", "B")
        for _ in range(200):
            t = mutate(t, p, rng, alphabet=["A", "B"], cap=5)
            assert 1 <= len(t) <= 5


class TestRunGA:
    def test_single_state_instance(self):
        sset = make_set("t", [("A",)])
        result = run_ga(sset, params(), StoppingConfig(max_generations=50), seed=3)
        assert ObjectiveVector(1, 1) in {obj for _, obj in result.front}

    def test_deterministic_replay(self):
        sset = make_set("t", [("A", "B"), ("B", "C"), ("A", "C")])
        p = params()
        stop = StoppingConfig(max_generations=30)
        r1 = run_ga(sset, p, stop, seed=21)
        r2 = run_ga(sset, p, stop, seed=21)
        assert r1.front == r2.front
        assert r1.generations == r2.generations

    def test_front_is_mutually_nondominated(self):
        sset = make_set("t", [("A", "B", "A"), ("B", "B"), ("A",)])
        result = run_ga(sset, params(), StoppingConfig(max_generations=40), seed=5)
        objs = [obj for _, obj in result.front]
        for a, b in itertools.permutations(objs, 2):
            assert not dominates(a, b)

    def test_templates_respect_length_cap(self):
        sset = make_set("t", [("A", "B"), ("B", "A", "B")])
        p = params(increment=2.0, mutation_number=4)
        result = run_ga(sset, p, StoppingConfig(max_generations=40), seed=6)
        cap = int(p.increment * 3)
        assert all(len(t) <= cap for t, _ in result.front)

    def test_max_aligning_never_regresses(self):
        sset = make_set("t", [("A", "B", "C"), ("C", "B"), ("A", "C")])
        result = run_ga(sset, params(), StoppingConfig(max_generations=60), seed=7)
        aligning = [a for _, a in result.history]
        assert aligning == sorted(aligning)

    def test_recovers_true_front_on_micro_instances(self):
        # Exhaustively enumerable: alphabet {A, B}, input lengths <= 4.
        alphabet = ["A", "B"]
        sset = make_set("t", [("A", "B"), ("B", "B", "A"), ("A", "A")])
        p = params(
            increment=2.0,
            mutation_number=3,
            mutation_probability=(0.25, 0.25, 0.25),
            parent_fraction=0.5,
            start_population_factor=8.0,
        )
        cap = int(p.increment * 3)

        exhaustive = []
        for length in range(1, cap + 1):
            for combo in itertools.product(alphabet, repeat=length):
                exhaustive.append((combo, ObjectiveVector(length, aligning_number(sset, combo))))
        true_front = {obj for _, obj in pareto_front(exhaustive)}

        hits = 0
        for seed in range(20):
            result = run_ga(sset, p, StoppingConfig(patience=20, max_generations=300), seed=seed)
            got = [obj for _, obj in result.front]
            covered = all(
                any(g == t or dominates(g, t) for g in got) for t in true_front
            )
            hits += covered
        assert hits >= 19

    def test_stops_on_stagnation_before_max(self):
        sset = make_set("t", [("A",), ("A",)])
        stop = StoppingConfig(epsilon=1e-3, patience=3, max_generations=500)
        result = run_ga(sset, params(), stop, seed=1)
        assert result.generations < 500

    def test_front_metric_matches_history(self):
        sset = make_set("t", [("A", "B")])
        result = run_ga(sset, params(), StoppingConfig(max_generations=20), seed=2)
        final_metric = front_change_metric([obj for _, obj in result.front])
        assert math.isclose(result.history[-1][0], final_metric)
