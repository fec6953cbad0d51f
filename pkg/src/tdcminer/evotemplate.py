"""Multi-objective genetic algorithm producing Pareto-optimal templates.

Individuals are candidate templates (state strings); the objective vector is
(length, aligning number), minimizing the first and maximizing the second.
The loop is generational with rank-based truncation selection, one-point
crossover, three-kind mutation, and full-front elitism.  Termination watches
the relative change of the front metric: the summed distances of all front
points to the origin of the objective space.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .align import Template, aligning_number
from .seqcore import SequenceSet


class InvalidParamsError(ValueError):
    """Raised for GA parameters violating their bounds."""


@dataclass(frozen=True)
class GAParams:
    """The five tunable GA parameters.

    increment caps template length at floor(increment * longest input
    sequence); mutation_probability is (p_sub, p_del, p_ins) with sum <= 1,
    the remaining mass being a no-op; mutation_number is the maximum number
    of mutations applied per offspring; parent_fraction is the share of the
    population kept as parents; start_population_factor scales the initial
    population size relative to the input set size.
    """

    increment: float
    mutation_probability: tuple[float, float, float]
    mutation_number: int
    parent_fraction: float
    start_population_factor: float

    def __post_init__(self):
        if self.increment < 1:
            raise InvalidParamsError("increment must be >= 1")
        probs = self.mutation_probability
        if len(probs) != 3 or any(not 0 <= p <= 1 for p in probs):
            raise InvalidParamsError("mutation probabilities must each lie in [0, 1]")
        if sum(probs) > 1 + 1e-12:
            raise InvalidParamsError("mutation probabilities must sum to <= 1")
        if self.mutation_number < 0:
            raise InvalidParamsError("mutation_number must be >= 0")
        if not 0 < self.parent_fraction <= 1:
            raise InvalidParamsError("parent_fraction must be in (0, 1]")
        if self.start_population_factor <= 0:
            raise InvalidParamsError("start_population_factor must be > 0")

    def as_columns(self) -> dict[str, float]:
        """Flat column view with the probability triple split out."""
        p_sub, p_del, p_ins = self.mutation_probability
        return {
            "increment": self.increment,
            "p_sub": p_sub,
            "p_del": p_del,
            "p_ins": p_ins,
            "mutation_number": self.mutation_number,
            "parent_fraction": self.parent_fraction,
            "start_population_factor": self.start_population_factor,
        }


PARAM_COLUMNS = (
    "increment",
    "p_sub",
    "p_del",
    "p_ins",
    "mutation_number",
    "parent_fraction",
    "start_population_factor",
)


def params_from_columns(row: dict) -> GAParams:
    return GAParams(
        increment=float(row["increment"]),
        mutation_probability=(
            float(row["p_sub"]),
            float(row["p_del"]),
            float(row["p_ins"]),
        ),
        mutation_number=int(row["mutation_number"]),
        parent_fraction=float(row["parent_fraction"]),
        start_population_factor=float(row["start_population_factor"]),
    )


@dataclass(frozen=True)
class ObjectiveVector:
    """(template length to minimize, aligning number to maximize)."""

    length: int
    aligning: int


@dataclass(frozen=True)
class StoppingConfig:
    epsilon: float = 1e-3
    patience: int = 5
    max_generations: int = 200

    def __post_init__(self):
        if self.epsilon <= 0 or self.patience < 1 or self.max_generations < 1:
            raise InvalidParamsError("stopping thresholds must be positive")


@dataclass
class GAResult:
    front: list[tuple[Template, ObjectiveVector]]
    generations: int
    elapsed_seconds: float
    seed: int
    # (front metric, max aligning on the front) per generation, for diagnostics.
    history: list[tuple[float, int]] = field(default_factory=list)


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True iff a is at least as good on both objectives and strictly better on one."""
    return (
        a.length <= b.length
        and a.aligning >= b.aligning
        and (a.length < b.length or a.aligning > b.aligning)
    )


def _skyline(vectors: list[ObjectiveVector]) -> set[ObjectiveVector]:
    """Non-dominated subset of distinct vectors via a sorted sweep.

    Sorted by (length asc, aligning desc), a vector survives iff its aligning
    strictly exceeds everything seen at shorter length.
    """
    best = -1
    front = set()
    for obj in sorted(vectors, key=lambda o: (o.length, -o.aligning)):
        if obj.aligning > best:
            front.add(obj)
            best = obj.aligning
    return front


def pareto_front(evaluated) -> list:
    """Members not dominated by any other, one representative per objective vector.

    Input is a list of (template, ObjectiveVector); the first template seen
    for a duplicated vector is kept.
    """
    if not evaluated:
        raise ValueError("cannot take the Pareto front of an empty list")
    seen: dict[ObjectiveVector, Template] = {}
    for template, obj in evaluated:
        if obj not in seen:
            seen[obj] = template
    front = _skyline(list(seen))
    return [(seen[obj], obj) for obj in seen if obj in front]


def front_change_metric(front_objectives) -> float:
    """Sum of Euclidean distances of front points to the objective-space origin."""
    if not front_objectives:
        raise ValueError("front must be non-empty")
    return sum(math.hypot(o.length, o.aligning) for o in front_objectives)


def _length_bounds(sset: SequenceSet, params: GAParams) -> tuple[int, int]:
    max_input_len = max(len(s) for s in sset.sequences)
    cap = int(params.increment * max_input_len)
    if cap < max_input_len:
        raise InvalidParamsError("increment produces an empty initial length interval")
    return max_input_len, cap


def init_population(sset: SequenceSet, params: GAParams, seed: int) -> list[Template]:
    """Uniform random templates over the alphabet.

    Population size is ceil(start_population_factor * |set|); lengths are
    uniform in [longest input length, floor(increment * longest input length)].
    """
    rng = np.random.default_rng(seed)
    alphabet = sorted(sset.alphabet)
    lo, hi = _length_bounds(sset, params)
    size = math.ceil(params.start_population_factor * len(sset))
    population = []
    for _ in range(size):
        length = int(rng.integers(lo, hi + 1))
        population.append(tuple(alphabet[i] for i in rng.integers(0, len(alphabet), length)))
    return population


def mutate(template: Template, params: GAParams, rng, alphabet=None, cap=None) -> Template:
    """Apply up to mutation_number random edits.

    Each edit is a substitution / deletion / insertion with the configured
    probabilities (no-op with the remaining mass); positions and inserted or
    substituted states are uniform.  The result is clamped to length >= 1 and
    to the increment cap when one is given.
    """
    if not template:
        raise ValueError("template must be non-empty")
    if alphabet is None:
        alphabet = sorted(set(template))
    p_sub, p_del, p_ins = params.mutation_probability
    count = int(rng.integers(0, params.mutation_number + 1))
    states = list(template)
    for _ in range(count):
        r = rng.random()
        if r < p_sub:
            pos = int(rng.integers(len(states)))
            states[pos] = alphabet[rng.integers(len(alphabet))]
        elif r < p_sub + p_del:
            if len(states) > 1:  # clamp: never delete down to empty
                del states[int(rng.integers(len(states)))]
        elif r < p_sub + p_del + p_ins:
            if cap is None or len(states) < cap:  # clamp to the length cap
                pos = int(rng.integers(len(states) + 1))
                states.insert(pos, alphabet[rng.integers(len(alphabet))])
    return tuple(states)


def _rank_population(evaluated) -> list[int]:
    """Indices sorted by (non-domination rank, -aligning, length, insertion order).

    Ranks are computed once per distinct objective vector by repeatedly
    peeling the skyline, then broadcast to individuals.
    """
    objs = [obj for _, obj in evaluated]
    vector_rank: dict[ObjectiveVector, int] = {}
    remaining = set(objs)
    rank = 0
    while remaining:
        layer = _skyline(list(remaining))
        for obj in layer:
            vector_rank[obj] = rank
        remaining -= layer
        rank += 1
    return sorted(
        range(len(objs)),
        key=lambda i: (vector_rank[objs[i]], -objs[i].aligning, objs[i].length, i),
    )


def run_ga(
    sset: SequenceSet,
    params: GAParams,
    stop: StoppingConfig,
    seed: int,
) -> GAResult:
    """Evolve templates for a sequence set until the front stalls.

    The loop evaluates every individual, keeps the Pareto front verbatim
    (elitism), selects the top parent_fraction of the population by rank, and
    refills with mutated one-point crossover offspring.  Stops once the
    relative front-metric change stays below epsilon for `patience`
    consecutive generations, or at max_generations.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    alphabet = sorted(sset.alphabet)
    _, cap = _length_bounds(sset, params)

    cache: dict[Template, ObjectiveVector] = {}

    def evaluate(template: Template) -> ObjectiveVector:
        obj = cache.get(template)
        if obj is None:
            obj = ObjectiveVector(len(template), aligning_number(sset, template))
            cache[template] = obj
        return obj

    population = init_population(sset, params, seed)
    pop_size = len(population)

    history: list[tuple[float, int]] = []
    previous_metric = None
    stagnant = 0
    generation = 0
    front = None
    while True:
        generation += 1
        evaluated = [(t, evaluate(t)) for t in population]
        front = pareto_front(evaluated)
        metric = front_change_metric([obj for _, obj in front])
        history.append((metric, max(obj.aligning for _, obj in front)))

        if previous_metric is not None:
            if abs(metric - previous_metric) / max(metric, 1.0) < stop.epsilon:
                stagnant += 1
            else:
                stagnant = 0
        previous_metric = metric
        if stagnant >= stop.patience or generation >= stop.max_generations:
            break

        order = _rank_population(evaluated)
        n_parents = max(1, math.ceil(params.parent_fraction * pop_size))
        parents = [evaluated[i][0] for i in order[:n_parents]]

        next_population = [t for t, _ in front]
        while len(next_population) < pop_size:
            if len(parents) >= 2:
                i, j = rng.choice(len(parents), size=2, replace=False)
                child = _crossover(parents[int(i)], parents[int(j)], rng)
            else:
                child = parents[0]
            next_population.append(mutate(child, params, rng, alphabet, cap))
        population = next_population

    return GAResult(
        front=front,
        generations=generation,
        elapsed_seconds=time.perf_counter() - start,
        seed=seed,
        history=history,
    )


def _crossover(a: Template, b: Template, rng) -> Template:
    cut = int(rng.integers(0, min(len(a), len(b)) + 1))
    return a[:cut] + b[cut:]
