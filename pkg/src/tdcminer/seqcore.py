"""Sequence-set representation, descriptor extraction, and synthetic set generation.

A state is a short symbolic token (e.g. a hospital-department code), a
sequence is an ordered tuple of states, and a set bundles sequences with
their alphabet.  Descriptors summarize a set with length statistics and
n-gram frequencies; the generator produces synthetic sets by mutating
template sequences.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

# States are plain tokens; sequences are tuples so they hash and compare fast.
StateSeq = tuple[str, ...]

MAX_SEQUENCE_LEN = 64

# Reserved characters: separators for the file format plus the n-gram key
# delimiter used in descriptor exports.
_FORBIDDEN_CHARS = set(", \t\r\n|")

NGRAM_ORDERS = (1, 2)
NGRAM_KEY_SEP = "|"

DESCRIPTOR_STAT_COLUMNS = (
    "min_len",
    "max_len",
    "median_len",
    "stdev_len",
    "outlier_count",
    "unique_count",
)


class EmptyFileError(ValueError):
    """Raised when a sequence file contains no non-empty lines."""


class MalformedLineError(ValueError):
    """Raised for an unparseable line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DegenerateResultError(RuntimeError):
    """Raised when the generator repeatedly produces empty sequences."""


def validate_token(token: str) -> str:
    if not token:
        raise ValueError("state token must be non-empty")
    bad = _FORBIDDEN_CHARS.intersection(token)
    if bad:
        raise ValueError(f"state token {token!r} contains reserved character {sorted(bad)!r}")
    return token


@dataclass(frozen=True)
class SequenceSet:
    """A named list of state sequences over a shared alphabet."""

    name: str
    sequences: tuple[StateSeq, ...]
    alphabet: frozenset[str]

    def __post_init__(self):
        if not self.sequences:
            raise ValueError("sequence set must contain at least one sequence")
        for seq in self.sequences:
            if not 1 <= len(seq) <= MAX_SEQUENCE_LEN:
                raise ValueError(
                    f"sequence length {len(seq)} outside [1, {MAX_SEQUENCE_LEN}]"
                )
            for state in seq:
                if state not in self.alphabet:
                    raise ValueError(f"state {state!r} not in alphabet")

    def __len__(self) -> int:
        return len(self.sequences)


@dataclass(frozen=True)
class SetDescriptor:
    """Length statistics and n-gram frequencies of a sequence set."""

    min_len: int
    max_len: int
    median_len: float
    stdev_len: float
    outlier_count: int
    unique_count: int
    ngram_freqs: dict[str, float] = field(compare=False)

    def csv_columns(self) -> list[str]:
        """Stable column order: length stats, then n-gram keys sorted lexicographically."""
        return list(DESCRIPTOR_STAT_COLUMNS) + sorted(self.ngram_freqs)

    def csv_values(self) -> list[float]:
        return [
            self.min_len,
            self.max_len,
            self.median_len,
            self.stdev_len,
            self.outlier_count,
            self.unique_count,
        ] + [self.ngram_freqs[k] for k in sorted(self.ngram_freqs)]


@dataclass(frozen=True)
class GeneratorConfig:
    """Settings for synthetic set generation from mutated templates."""

    templates: tuple[StateSeq, ...]
    mutation_probability: float
    set_size: int
    seed: int
    name: str = "generated"

    def __post_init__(self):
        if not self.templates:
            raise ValueError("at least one template required")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ValueError("mutation_probability must be in [0, 1]")
        if self.set_size < 1:
            raise ValueError("set_size must be >= 1")


def make_sequence(tokens) -> StateSeq:
    """Validate tokens and freeze them into a sequence tuple."""
    seq = tuple(validate_token(t) for t in tokens)
    if not seq:
        raise ValueError("sequence must contain at least one state")
    return seq


def make_set(name: str, sequences, alphabet=None) -> SequenceSet:
    seqs = tuple(tuple(s) for s in sequences)
    if alphabet is None:
        alphabet = frozenset(state for seq in seqs for state in seq)
    return SequenceSet(name=name, sequences=seqs, alphabet=frozenset(alphabet))


def parse_sequence_file(text: str, name: str = "uploaded") -> SequenceSet:
    """Parse one sequence per non-empty line; tokens split on commas or whitespace.

    Raises EmptyFileError when nothing parses, MalformedLineError (with the
    1-based line number) when a line has an empty token between separators.
    """
    sequences = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if "," in line:
            tokens = [t.strip() for t in line.split(",")]
        else:
            tokens = line.split()
        if any(not t for t in tokens):
            raise MalformedLineError(lineno, "empty state token between separators")
        try:
            sequences.append(make_sequence(tokens))
        except ValueError as exc:
            raise MalformedLineError(lineno, str(exc)) from exc
    if not sequences:
        raise EmptyFileError("no non-empty lines in sequence file")
    return make_set(name, sequences)


def format_sequence_file(sset: SequenceSet) -> str:
    """Inverse of parse_sequence_file (comma-separated tokens, one line per sequence)."""
    return "\n".join(",".join(seq) for seq in sset.sequences) + "\n"


def ngram_key(gram: tuple[str, ...]) -> str:
    return NGRAM_KEY_SEP.join(gram)


def compute_descriptor(sset: SequenceSet) -> SetDescriptor:
    """Summarize a set: length stats, IQR outlier count, unique count, n-gram frequencies.

    Statistics run over all sequences (duplicates included).  Quartiles use
    linear interpolation on the sorted lengths; the standard deviation is the
    population one.  Frequencies are relative per n-gram order, so each
    order's group sums to 1 whenever that order occurs at all.
    """
    lengths = np.array([len(s) for s in sset.sequences], dtype=float)
    q1, q3 = np.quantile(lengths, [0.25, 0.75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outliers = int(np.sum((lengths < lo) | (lengths > hi)))

    counts: Counter[str] = Counter()
    totals = {n: 0 for n in NGRAM_ORDERS}
    for seq in sset.sequences:
        for n in NGRAM_ORDERS:
            for i in range(len(seq) - n + 1):
                counts[ngram_key(seq[i : i + n])] += 1
                totals[n] += 1
    freqs = {}
    for gram, cnt in counts.items():
        order = gram.count(NGRAM_KEY_SEP) + 1
        freqs[gram] = cnt / totals[order]

    return SetDescriptor(
        min_len=int(lengths.min()),
        max_len=int(lengths.max()),
        median_len=float(np.median(lengths)),
        stdev_len=float(np.std(lengths)),
        outlier_count=outliers,
        unique_count=len(set(sset.sequences)),
        ngram_freqs=freqs,
    )


def generate_set(cfg: GeneratorConfig) -> SequenceSet:
    """Generate ``set_size`` sequences by mutating uniformly drawn templates.

    Each template position independently mutates with the configured
    probability; the mutation is uniformly a substitution (always to a
    different state), a deletion, or an insertion of a random state after the
    position.  A sequence that mutates to empty is redrawn, up to 100 times.
    Deterministic for a fixed seed.
    """
    alphabet = sorted({state for t in cfg.templates for state in t})
    for state in alphabet:
        validate_token(state)
    rng = np.random.default_rng(cfg.seed)
    sequences = []
    for _ in range(cfg.set_size):
        for _attempt in range(100):
            template = cfg.templates[rng.integers(len(cfg.templates))]
            seq = _mutate_template(template, cfg.mutation_probability, alphabet, rng)
            if seq:
                sequences.append(tuple(seq))
                break
        else:
            raise DegenerateResultError(
                "generated sequence stayed empty after 100 redraws"
            )
    return make_set(cfg.name, sequences, alphabet)


def _mutate_template(template, p, alphabet, rng):
    out = []
    for state in template:
        if p > 0 and rng.random() < p:
            kind = rng.integers(3)
            if kind == 0:  # substitution never draws the current state
                others = [s for s in alphabet if s != state]
                out.append(others[rng.integers(len(others))] if others else state)
            elif kind == 1:  # deletion
                continue
            else:  # insertion after the position
                out.append(state)
                out.append(alphabet[rng.integers(len(alphabet))])
        else:
            out.append(state)
    return out


def random_set(
    name: str,
    alphabet,
    size: int,
    min_len: int,
    max_len: int,
    seed: int,
) -> SequenceSet:
    """Uniform random sequences: length uniform in [min_len, max_len], states uniform."""
    if not 1 <= min_len <= max_len:
        raise ValueError("need 1 <= min_len <= max_len")
    alphabet = sorted(alphabet)
    rng = np.random.default_rng(seed)
    sequences = []
    for _ in range(size):
        length = int(rng.integers(min_len, max_len + 1))
        sequences.append(tuple(alphabet[rng.integers(len(alphabet))] for _ in range(length)))
    return make_set(name, sequences, alphabet)


def descriptor_vector(descriptor: SetDescriptor, ngram_vocab) -> list[float]:
    """Descriptor as a flat vector over a frozen n-gram vocabulary (unseen grams read 0)."""
    stats = [
        float(descriptor.min_len),
        float(descriptor.max_len),
        descriptor.median_len,
        descriptor.stdev_len,
        float(descriptor.outlier_count),
        float(descriptor.unique_count),
    ]
    return stats + [descriptor.ngram_freqs.get(g, 0.0) for g in ngram_vocab]
