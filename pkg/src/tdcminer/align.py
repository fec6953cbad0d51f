"""Edit distance, template-fit testing, and transition-graph extraction.

A template is a candidate common supersequence for a group of sequences; a
sequence "fits" a template when it is a (not necessarily contiguous)
subsequence of it.  The number of fitting sequences is the GA's second
objective.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .seqcore import SequenceSet

# Templates share the sequence representation: an ordered tuple of states.
Template = tuple


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Minimum number of single-state insertions, deletions, and substitutions.

    Two-row dynamic program, O(min(|a|, |b|)) working memory.
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    cur = [0] * (len(b) + 1)
    for i, sa in enumerate(a, start=1):
        cur[0] = i
        for j, sb in enumerate(b, start=1):
            cost = prev[j - 1] if sa == sb else prev[j - 1] + 1
            dele = prev[j] + 1
            ins = cur[j - 1] + 1
            cur[j] = cost if cost <= dele and cost <= ins else (dele if dele <= ins else ins)
        prev, cur = cur, prev
    return prev[len(b)]


def fits(seq: Sequence, template: Template) -> bool:
    """True iff seq is a subsequence of template."""
    it = iter(template)
    return all(state in it for state in seq)


def aligning_number(sset: SequenceSet, template: Template) -> int:
    """Count of sequences in the set (with multiplicity) fitting the template."""
    return sum(1 for seq in sset.sequences if fits(seq, template))


def transition_graph(cluster: Sequence[Sequence]) -> list[tuple[str, str, int]]:
    """Weighted state-to-state edges over all adjacent pairs in a cluster.

    Sorted by descending count, then lexicographically.  Self-loops count.
    """
    if not cluster:
        raise ValueError("cluster must be non-empty")
    counts: Counter[tuple[str, str]] = Counter()
    for seq in cluster:
        for src, dst in zip(seq, seq[1:]):
            counts[(src, dst)] += 1
    return sorted(
        ((src, dst, n) for (src, dst), n in counts.items()),
        key=lambda e: (-e[2], e[0], e[1]),
    )
