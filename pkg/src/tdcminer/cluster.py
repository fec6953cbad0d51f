"""Template clustering, cluster-count selection, and the full TDC pipeline.

Templates live in edit-distance space, so the "k-means" step is realized as
k-medoids under the Levenshtein distance: medoids are actual templates and
play the role of cluster centers.  The Calinski-Harabasz and Davies-Bouldin
indices are adapted accordingly (medoids instead of centroids, edit distance
instead of Euclidean).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import evotemplate
from .align import Template, fits, levenshtein, transition_graph
from .evotemplate import GAParams, StoppingConfig
from .seqcore import SequenceSet, StateSeq

log = logging.getLogger(__name__)

# Stand-in for an infinite Calinski-Harabasz value (zero within-cluster
# dispersion) and for metrics of degenerate runs; kept finite so training
# tables stay numeric.
SENTINEL_MAX = 1e6


class InvalidKError(ValueError):
    pass


class InvalidKRangeError(ValueError):
    pass


class DegenerateClusteringError(ValueError):
    pass


class CoincidentMedoidsError(ValueError):
    pass


class FrontTooSmallError(RuntimeError):
    """GA front has fewer distinct templates than the smallest requested k."""


@dataclass
class Clustering:
    """k medoid templates plus an item-index to medoid-index assignment."""

    medoids: list[Template]
    assignment: dict[int, int]
    k: int


@dataclass(frozen=True)
class RunOutcome:
    """The five predicted targets of one TDC run."""

    elapsed_seconds: float
    num_clusters: int
    chi: float
    dbi: float
    non_clustered: int

    def as_columns(self) -> dict[str, float]:
        return {
            "elapsed_seconds": self.elapsed_seconds,
            "num_clusters": self.num_clusters,
            "chi": self.chi,
            "dbi": self.dbi,
            "non_clustered": self.non_clustered,
        }


OUTCOME_COLUMNS = ("elapsed_seconds", "num_clusters", "chi", "dbi", "non_clustered")


@dataclass
class TDCResult:
    outcome: RunOutcome
    clusters: list[list[StateSeq]]
    non_clustered: list[StateSeq]
    representatives: list[Template]
    per_k_table: list[tuple[int, float, float]] = field(default_factory=list)


def distance_matrix(items: list[Template]) -> np.ndarray:
    n = len(items)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = levenshtein(items[i], items[j])
    return d


def kmedoids(items: list[Template], k: int, seed: int) -> Clustering:
    """PAM-style k-medoids under Levenshtein distance.

    Items are assigned to the nearest medoid (ties to the lower medoid
    index); each medoid moves to the cluster member minimizing summed
    in-cluster distance; iteration stops at a fixed point or 100 rounds.
    Initial medoids come from distance-weighted (k-means++-style) sampling.
    """
    distinct = len(set(items))
    if not 1 <= k <= distinct:
        raise InvalidKError(f"k={k} outside [1, {distinct} distinct items]")
    return _kmedoids_impl(items, distance_matrix(items), k, np.random.default_rng(seed))


def _kmedoids_impl(items, dist, k, rng) -> Clustering:
    n = len(items)
    medoid_idx = _seed_medoids(dist, k, rng)
    assignment = None
    previous_total = np.inf
    for _ in range(100):
        new_assignment = np.argmin(dist[:, medoid_idx], axis=1)
        total = float(dist[np.arange(n), medoid_idx[new_assignment]].sum())
        # PAM never worsens the objective; guard the invariant.
        assert total <= previous_total + 1e-9, "within-cluster distance increased"
        previous_total = total
        if assignment is not None and np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        for c in range(k):
            members = np.flatnonzero(assignment == c)
            in_cluster = dist[np.ix_(members, members)].sum(axis=1)
            medoid_idx[c] = members[int(np.argmin(in_cluster))]
    return Clustering(
        medoids=[items[i] for i in medoid_idx],
        assignment={i: int(c) for i, c in enumerate(assignment)},
        k=k,
    )


def _seed_medoids(dist, k, rng) -> np.ndarray:
    n = dist.shape[0]
    chosen = [int(rng.integers(n))]
    while len(chosen) < k:
        nearest = dist[:, chosen].min(axis=1)
        weights = nearest**2
        total = weights.sum()
        if total == 0:  # all remaining items duplicate a chosen medoid
            raise InvalidKError("fewer distinct items than requested medoids")
        chosen.append(int(rng.choice(n, p=weights / total)))
    return np.array(chosen)


def _clusters_of(clustering: Clustering, n: int) -> list[list[int]]:
    groups: list[list[int]] = [[] for _ in range(clustering.k)]
    for i in range(n):
        groups[clustering.assignment[i]].append(i)
    return groups


def _global_medoid(items) -> Template:
    sums = [sum(levenshtein(x, y) for y in items) for x in items]
    return items[int(np.argmin(sums))]


def chi(items: list[Template], clustering: Clustering) -> float:
    """Medoid-adapted Calinski-Harabasz index (squared edit distances).

    Returns SENTINEL_MAX when the within-cluster dispersion is zero.
    """
    n, k = len(items), clustering.k
    if k < 2 or n <= k:
        raise DegenerateClusteringError(f"CHI needs 2 <= k < n (k={k}, n={n})")
    center = _global_medoid(items)
    groups = _clusters_of(clustering, n)
    between = 0.0
    within = 0.0
    for c, members in enumerate(groups):
        medoid = clustering.medoids[c]
        between += len(members) * levenshtein(medoid, center) ** 2
        within += sum(levenshtein(items[i], medoid) ** 2 for i in members)
    if within == 0:
        return SENTINEL_MAX
    return (between / (k - 1)) / (within / (n - k))


def dbi(items: list[Template], clustering: Clustering) -> float:
    """Medoid-adapted Davies-Bouldin index (plain edit distances)."""
    n, k = len(items), clustering.k
    if k < 2:
        raise DegenerateClusteringError(f"DBI needs k >= 2 (k={k})")
    groups = _clusters_of(clustering, n)
    scatter = [
        float(np.mean([levenshtein(items[i], clustering.medoids[c]) for i in members]))
        for c, members in enumerate(groups)
    ]
    worst_sum = 0.0
    for i in range(k):
        worst = 0.0
        for j in range(k):
            if i == j:
                continue
            sep = levenshtein(clustering.medoids[i], clustering.medoids[j])
            if sep == 0:
                raise CoincidentMedoidsError("distinct clusters share a medoid")
            worst = max(worst, (scatter[i] + scatter[j]) / sep)
        worst_sum += worst
    return worst_sum / k


def select_k(items: list[Template], krange, seed: int):
    """Pick the cluster count: first CHI local maximum, else DBI argmin.

    Returns (kbest, table) where table rows are (k, chi, dbi).  CHI at a
    saturated k (every distinct item its own medoid) is SENTINEL_MAX via the
    zero-within-dispersion rule.
    """
    ks = sorted(set(int(k) for k in krange))
    distinct = len(set(items))
    if not ks:
        raise InvalidKRangeError("krange is empty")
    if ks[0] < 2 or ks[-1] > distinct:
        raise InvalidKRangeError(
            f"krange {ks} outside [2, {distinct} distinct items]"
        )
    n = len(items)
    dist = distance_matrix(items)
    table = []
    for k in ks:
        clustering = _kmedoids_impl(items, dist, k, np.random.default_rng([seed, k]))
        chi_k = chi(items, clustering) if n > k else SENTINEL_MAX
        table.append((k, chi_k, dbi(items, clustering)))

    kbest = _first_chi_local_max(table)
    if kbest is None:
        kbest = min(table, key=lambda row: (row[2], row[0]))[0]
    return kbest, table


def _first_chi_local_max(table):
    chis = [row[1] for row in table]
    if len(chis) == 1:
        return table[0][0]
    for idx, value in enumerate(chis):
        left_ok = idx == 0 or value > chis[idx - 1]
        right_ok = idx == len(chis) - 1 or value > chis[idx + 1]
        if left_ok and right_ok:
            return table[idx][0]
    return None


def assign_sequences(sset: SequenceSet, representatives: list[Template]):
    """Assign each sequence to the nearest representative it fits.

    Among multiple fitting representatives the Levenshtein-nearest wins
    (ties to the lower index); sequences fitting none are non-clustered.
    """
    if not representatives:
        raise ValueError("representatives must be non-empty")
    clusters: list[list[StateSeq]] = [[] for _ in representatives]
    non_clustered: list[StateSeq] = []
    for seq in sset.sequences:
        best = None
        best_dist = None
        for idx, rep in enumerate(representatives):
            if fits(seq, rep):
                d = levenshtein(seq, rep)
                if best is None or d < best_dist:
                    best, best_dist = idx, d
        if best is None:
            non_clustered.append(seq)
        else:
            clusters[best].append(seq)
    return clusters, non_clustered


def run_tdc(
    sset: SequenceSet,
    params: GAParams,
    krange,
    stop: StoppingConfig,
    seed: int,
) -> TDCResult:
    """Full pipeline: GA -> cluster-count selection -> medoids -> assignment.

    A front with fewer distinct templates than min(krange) yields a
    degenerate outcome (kbest = 1, sentinel metrics) instead of aborting, so
    parameter sweeps always produce a row.
    """
    ga = evotemplate.run_ga(sset, params, stop, seed)
    front_templates = [t for t, _ in ga.front]
    distinct = len(set(front_templates))
    ks = sorted(set(int(k) for k in krange))
    if not ks or ks[0] < 2:
        raise InvalidKRangeError("krange must contain values >= 2")
    feasible = [k for k in ks if k <= distinct]

    if not feasible:
        log.warning(
            "front of %d distinct template(s) is smaller than min(krange)=%d; "
            "recording degenerate outcome",
            distinct,
            ks[0],
        )
        representative = max(ga.front, key=lambda e: (e[1].aligning, -e[1].length))[0]
        clusters, non_clustered = assign_sequences(sset, [representative])
        outcome = RunOutcome(
            elapsed_seconds=ga.elapsed_seconds,
            num_clusters=1,
            chi=SENTINEL_MAX,
            dbi=SENTINEL_MAX,
            non_clustered=len(non_clustered),
        )
        return TDCResult(outcome, clusters, non_clustered, [representative])

    kbest, table = select_k(front_templates, feasible, seed)
    # Same per-k seeding as inside select_k, so this reproduces its clustering.
    clustering = _kmedoids_impl(
        front_templates,
        distance_matrix(front_templates),
        kbest,
        np.random.default_rng([seed, kbest]),
    )
    representatives = clustering.medoids
    clusters, non_clustered = assign_sequences(sset, representatives)
    chi_best, dbi_best = next((c, d) for k, c, d in table if k == kbest)
    outcome = RunOutcome(
        elapsed_seconds=ga.elapsed_seconds,
        num_clusters=kbest,
        chi=chi_best,
        dbi=dbi_best,
        non_clustered=len(non_clustered),
    )
    return TDCResult(outcome, clusters, non_clustered, representatives, table)


def transition_graphs(result: TDCResult) -> list[dict]:
    """Per-cluster state-transition graphs for export.

    Each entry carries the representative template, the member count, the
    states seen in the cluster, and the directed transitions between
    consecutive states with their occurrence counts.
    """
    graphs = []
    for index, members in enumerate(result.clusters):
        nodes = {state for seq in members for state in seq}
        edges = (
            [
                {"source": src, "target": dst, "count": count}
                for src, dst, count in transition_graph(members)
            ]
            if members
            else []
        )
        graphs.append(
            {
                "cluster": index,
                "representative": list(result.representatives[index]),
                "size": len(members),
                "nodes": sorted(nodes),
                "edges": edges,
            }
        )
    return graphs


def graphs_to_dot(graphs) -> str:
    """Render the transition graphs as one DOT digraph of subgraph clusters."""

    def quote(text: str) -> str:
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = ["digraph tdc {"]
    for graph in graphs:
        i = graph["cluster"]
        lines.append(f"  subgraph cluster_{i} {{")
        label = f"cluster {i} ({graph['size']} sequences)"
        lines.append(f"    label={quote(label)};")
        for state in graph["nodes"]:
            lines.append(f"    {quote(f'{i}:{state}')} [label={quote(state)}];")
        for edge in graph["edges"]:
            src = quote(f"{i}:{edge['source']}")
            dst = quote(f"{i}:{edge['target']}")
            lines.append(f"    {src} -> {dst} [label={quote(str(edge['count']))}];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
