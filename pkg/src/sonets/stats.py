"""Two-edge motif censuses and degree statistics over sampled graphs.

A census counts, for every relation of the scheme, the ordered pairs of
*present* edges falling in that relation (so the counts over all relations
sum to the square of the present-edge count, and the identity relation
counts the present edges themselves).  For the directed scheme the census
also carries the edge-level reciprocal summary: how many potential edges
are absent, present with the reverse edge absent, or present together with
their reverse.  Those three numbers partition the potential edge set.

Everything here is pure aggregation: results are deterministic and safe to
reduce over samples in parallel.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConfigurationError
from .sampling import GraphSample
from .schemes import (
    DENSE_MATRIX_CAP,
    DistinguishedVertexScheme,
    JohnsonLineGraphScheme,
    JohnsonScheme,
    NykampZhaoScheme,
    Scheme,
)


@dataclass(frozen=True)
class ReciprocalSummary:
    """Edge-level reciprocal-motif partition of the potential edge set."""

    absent: float
    single: float
    reciprocal: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.absent, self.single, self.reciprocal)


@dataclass(frozen=True)
class MotifCensus:
    """Ordered-pair counts per relation for one realization.

    ``pair_counts[k]`` is the number of ordered pairs (x, y) of present
    edges with classify(x, y) = k; ``summary`` is the reciprocal edge-level
    partition (directed scheme only, None otherwise).
    """

    scheme_name: str
    n: int
    relation_names: tuple[str, ...]
    pair_counts: np.ndarray  # int64, length d+1
    present_edges: int
    summary: ReciprocalSummary | None


def _directed_census(sample: GraphSample) -> MotifCensus:
    scheme: NykampZhaoScheme = sample.scheme
    edges = scheme.edge_array
    bits = sample.bits
    present = int(bits.sum())
    tails = edges[bits, 0]
    heads = edges[bits, 1]
    out_deg = np.bincount(tails, minlength=scheme.n)
    in_deg = np.bincount(heads, minlength=scheme.n)
    reciprocal = int(np.sum(bits & bits[scheme.reciprocal_index]))
    divergent = int(np.sum(out_deg * (out_deg - 1)))
    convergent = int(np.sum(in_deg * (in_deg - 1)))
    chain = int(np.sum(in_deg * out_deg)) - reciprocal
    anti = chain
    counts = np.zeros(7, dtype=np.int64)
    counts[scheme.IDENTITY] = present
    counts[scheme.RECIPROCAL] = reciprocal
    counts[scheme.DIVERGENT] = divergent
    counts[scheme.CHAIN] = chain
    counts[scheme.ANTI_CHAIN] = anti
    counts[scheme.CONVERGENT] = convergent
    counts[scheme.DISJOINT] = present * present - int(counts.sum())
    summary = ReciprocalSummary(
        absent=scheme.edge_count - present,
        single=present - reciprocal,
        reciprocal=reciprocal,
    )
    return MotifCensus(
        scheme.name, scheme.n, scheme.relation_names, counts, present, summary
    )


def _johnson_census(sample: GraphSample) -> MotifCensus:
    scheme: JohnsonScheme = sample.scheme
    edges = scheme.edge_array
    bits = sample.bits
    present = int(bits.sum())
    deg = np.bincount(edges[bits, 0], minlength=scheme.n) + np.bincount(
        edges[bits, 1], minlength=scheme.n
    )
    adjacent = int(np.sum(deg * (deg - 1)))
    counts = np.array(
        [present, adjacent, present * present - present - adjacent],
        dtype=np.int64,
    )
    return MotifCensus(
        scheme.name, scheme.n, scheme.relation_names, counts, present, None
    )


def _dv_census(sample: GraphSample) -> MotifCensus:
    scheme: DistinguishedVertexScheme = sample.scheme
    n = scheme.n
    bits = sample.bits
    n_ordinary = n * (n - 1) // 2
    ordinary_bits = bits[:n_ordinary]
    dist_bits = bits[n_ordinary:]
    edges = scheme.edge_array[:n_ordinary]
    m1 = int(ordinary_bits.sum())
    m2 = int(dist_bits.sum())
    c = np.bincount(edges[ordinary_bits, 0], minlength=n) + np.bincount(
        edges[ordinary_bits, 1], minlength=n
    )
    a11 = int(np.sum(c * (c - 1)))
    a12 = int(np.sum(c * dist_bits))  # shared vertex must carry a present spoke
    counts = np.zeros(9, dtype=np.int64)
    counts[scheme.I11] = m1
    counts[scheme.A11] = a11
    counts[scheme.D11] = m1 * m1 - m1 - a11
    counts[scheme.A12] = a12
    counts[scheme.A21] = a12
    counts[scheme.D12] = m1 * m2 - a12
    counts[scheme.D21] = m1 * m2 - a12
    counts[scheme.I22] = m2
    counts[scheme.A22] = m2 * (m2 - 1)
    return MotifCensus(
        scheme.name, scheme.n, scheme.relation_names, counts, m1 + m2, None
    )


def _generic_census(sample: GraphSample) -> MotifCensus:
    scheme = sample.scheme
    d1 = scheme.num_relations
    present_idx = np.flatnonzero(sample.bits)
    if scheme.edge_count <= DENSE_MATRIX_CAP:
        table = scheme.relation_table()
        sub = table[np.ix_(present_idx, present_idx)]
        counts = np.bincount(sub.ravel(), minlength=d1).astype(np.int64)
    else:
        edges = scheme.edges
        chosen = [edges[i] for i in present_idx]
        counts = np.zeros(d1, dtype=np.int64)
        for x in chosen:
            for y in chosen:
                counts[scheme.classify(x, y)] += 1
    return MotifCensus(
        scheme.name,
        scheme.n,
        scheme.relation_names,
        counts,
        int(len(present_idx)),
        None,
    )


def motif_census(sample: GraphSample) -> MotifCensus:
    """Count ordered pairs of present edges per relation.

    O(E) for the directed, unordered-pair and distinguished-vertex schemes
    through per-vertex degree aggregates; quadratic in the present edges
    otherwise.
    """
    scheme = sample.scheme
    if isinstance(scheme, NykampZhaoScheme):
        return _directed_census(sample)
    if isinstance(scheme, JohnsonScheme):
        return _johnson_census(sample)
    if isinstance(scheme, DistinguishedVertexScheme):
        return _dv_census(sample)
    return _generic_census(sample)


def expected_counts_independent(n: int, p: float) -> ReciprocalSummary:
    """Reciprocal summary expectations for independent edges on the
    directed scheme: absent E(1-p), single E p(1-p), reciprocal E p^2."""
    e = n * (n - 1)
    return ReciprocalSummary(
        absent=e * (1.0 - p),
        single=e * p * (1.0 - p),
        reciprocal=e * p * p,
    )


def mean_census(censuses: Iterable[MotifCensus]) -> MotifCensus:
    """Entrywise mean of censuses from one ensemble (float counts)."""
    censuses = list(censuses)
    if not censuses:
        raise ConfigurationError("cannot aggregate an empty census list")
    first = censuses[0]
    counts = np.mean([c.pair_counts for c in censuses], axis=0)
    present = float(np.mean([c.present_edges for c in censuses]))
    summary = None
    if first.summary is not None:
        triples = np.array([c.summary.as_tuple() for c in censuses])
        summary = ReciprocalSummary(*np.mean(triples, axis=0))
    return MotifCensus(
        first.scheme_name,
        first.n,
        first.relation_names,
        counts,
        present,
        summary,
    )


# ---------------------------------------------------------------------------
# Degree histograms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DegreeHistogram:
    """Histogram of integer vertex degrees pooled over an ensemble."""

    direction: str
    vertex_class: str
    counts: np.ndarray  # counts[d] = observations of degree d
    mean: float

    @property
    def observations(self) -> int:
        return int(self.counts.sum())

    def variance(self) -> float:
        degrees = np.arange(len(self.counts))
        total = self.counts.sum()
        mean = float(degrees @ self.counts) / total
        return float((degrees - mean) ** 2 @ self.counts) / total


def _sample_degrees(sample: GraphSample, direction: str) -> dict[str, np.ndarray]:
    scheme = sample.scheme
    bits = sample.bits
    if isinstance(scheme, NykampZhaoScheme):
        if direction not in ("in", "out"):
            raise ConfigurationError(
                "directed scheme histograms need direction 'in' or 'out'"
            )
        edges = scheme.edge_array
        column = 1 if direction == "in" else 0
        deg = np.bincount(edges[bits, column], minlength=scheme.n)
        return {"all": deg}
    if direction != "undirected":
        raise ConfigurationError(
            f"scheme '{scheme.name}' is undirected; use direction 'undirected'"
        )
    if isinstance(scheme, JohnsonLineGraphScheme):
        rank = {pair: r for r, pair in enumerate(scheme.johnson_vertices)}
        deg = np.zeros(scheme.vertex_count, dtype=np.int64)
        for edge in sample.present_edges:
            a, b = scheme.endpoints(edge)
            deg[rank[a]] += 1
            deg[rank[b]] += 1
        return {"all": deg}
    edges = scheme.edge_array
    size = scheme.vertex_count
    deg = np.bincount(edges[bits, 0], minlength=size) + np.bincount(
        edges[bits, 1], minlength=size
    )
    if isinstance(scheme, DistinguishedVertexScheme):
        return {"undistinguished": deg[: scheme.n], "distinguished": deg[scheme.n :]}
    return {"all": deg}


def degree_histogram(
    samples: Iterable[GraphSample], direction: str
) -> dict[str, DegreeHistogram]:
    """Pooled degree histograms over an ensemble, one per vertex class.

    Homogeneous schemes report a single class  "all"; the
    distinguished-vertex scheme reports "undistinguished" and
    "distinguished" separately.
    """
    pooled: dict[str, list[np.ndarray]] = {}
    for sample in samples:
        for cls, deg in _sample_degrees(sample, direction).items():
            pooled.setdefault(cls, []).append(deg)
    if not pooled:
        raise ConfigurationError("cannot build a histogram from an empty ensemble")
    out = {}
    for cls, degree_lists in pooled.items():
        all_deg = np.concatenate(degree_lists)
        counts = np.bincount(all_deg).astype(np.int64)
        out[cls] = DegreeHistogram(
            direction=direction,
            vertex_class=cls,
            counts=counts,
            mean=float(all_deg.mean()),
        )
    return out


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def census_to_csv(census: MotifCensus) -> str:
    """Per-relation ordered-pair counts; identity row equals the present
    edge count."""
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["relation", "ordered_pairs"])
    for name, count in zip(census.relation_names, census.pair_counts):
        writer.writerow([name, _fmt(count)])
    return out.getvalue()


def summary_to_csv(summary: ReciprocalSummary) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["absent_edges", "single_edges", "reciprocal_edges"])
    writer.writerow([_fmt(summary.absent), _fmt(summary.single), _fmt(summary.reciprocal)])
    return out.getvalue()


def histogram_to_csv(histogram: DegreeHistogram) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["degree", "count"])
    for degree, count in enumerate(histogram.counts):
        writer.writerow([degree, int(count)])
    return out.getvalue()


def _fmt(value):
    number = float(value)
    return int(number) if number.is_integer() else number
