"""Random graph generation by thresholding a correlated Gaussian vector.

A realization draws an iid standard normal vector with one component per
edge, multiplies it by the square root of the covariance element (applied
matrix-free, never materializing the E x E matrix for the two schemes with
an O(E) path), and keeps each edge whose component exceeds the threshold.

The threshold is chosen so that a single edge is present with the requested
probability: since each component of the correlated vector has variance
equal to the identity coefficient of the covariance, the cutoff is the
upper ``p`` quantile of a centered normal with that variance.

Randomness is drawn from one independent, deterministically derived stream
per realization (``SeedSequence(seed, spawn_key=(index,))``), so ensembles
can be generated in any order or in parallel and still reproduce bit for
bit.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy import stats

from .algebra import AlgebraElement, lift_dense, require_admissible, sqrt_in_algebra
from .errors import CapExceededError, ConfigurationError
from .schemes import (
    DistinguishedVertexScheme,
    JohnsonLineGraphScheme,
    JohnsonScheme,
    NykampZhaoScheme,
    Scheme,
)

DENSE_MATVEC_CAP = 20_000  # dense-fallback guard; override with SONETS_DENSE_CAP


def _dense_cap() -> int:
    value = os.environ.get("SONETS_DENSE_CAP")
    return int(value) if value else DENSE_MATVEC_CAP


def threshold_for_probability(p: float, variance: float = 1.0) -> float:
    """Level x with P(N(0, variance) > x) = p."""
    if not 0.0 < p < 1.0:
        raise ConfigurationError(f"edge probability must be in (0, 1), got {p}")
    if variance <= 0:
        raise ConfigurationError(f"variance must be positive, got {variance}")
    return float(stats.norm.isf(p)) * float(np.sqrt(variance))


# ---------------------------------------------------------------------------
# Matrix-free application of an algebra element
# ---------------------------------------------------------------------------


class _DirectedPlan:
    """O(E) matvec for the directed scheme via per-vertex aggregates.

    With S_out(i) = sum of v over edges with tail i, S_in(j) the same over
    heads, and T the grand total, each relation acts as

        divergent   S_out(tail) - v          convergent  S_in(head) - v
        chain       S_out(head) - v_recip    anti-chain  S_in(tail) - v_recip
        reciprocal  v_recip                  disjoint    T - (all others)

    where v_recip is v on the reversed edge.  The disjoint action uses the
    rank-one all-ones matrix (the relation matrices sum to it) instead of
    enumerating the O(E * n^2) disjoint pairs.
    """

    def __init__(self, scheme: NykampZhaoScheme):
        edges = scheme.edge_array
        self.n = scheme.n
        self.tails = np.ascontiguousarray(edges[:, 0])
        self.heads = np.ascontiguousarray(edges[:, 1])
        self.recip = scheme.reciprocal_index

    def matvec(self, coeffs: np.ndarray, v: np.ndarray) -> np.ndarray:
        a_id, a_re, a_dv, a_ch, a_an, a_cv, a_dj = coeffs
        s_out = np.bincount(self.tails, weights=v, minlength=self.n)
        s_in = np.bincount(self.heads, weights=v, minlength=self.n)
        v_recip = v[self.recip]
        r_div = s_out[self.tails] - v
        r_conv = s_in[self.heads] - v
        r_chain = s_out[self.heads] - v_recip
        r_anti = s_in[self.tails] - v_recip
        total = v.sum()
        r_disj = total - (v + v_recip + r_div + r_conv + r_chain + r_anti)
        return (
            a_id * v
            + a_re * v_recip
            + a_dv * r_div
            + a_ch * r_chain
            + a_an * r_anti
            + a_cv * r_conv
            + a_dj * r_disj
        )


class _JohnsonPlan:
    """O(E) matvec for the unordered-pair scheme.

    With S(i) the sum of v over edges containing vertex i, the adjacent
    relation acts as S(a) + S(b) - 2 v on edge {a, b}; the disjoint relation
    is recovered from the rank-one total.
    """

    def __init__(self, scheme: JohnsonScheme):
        edges = scheme.edge_array
        self.n = scheme.n
        self.first = np.ascontiguousarray(edges[:, 0])
        self.second = np.ascontiguousarray(edges[:, 1])

    def matvec(self, coeffs: np.ndarray, v: np.ndarray) -> np.ndarray:
        a_id, a_adj, a_dis = coeffs
        s = np.bincount(self.first, weights=v, minlength=self.n)
        s += np.bincount(self.second, weights=v, minlength=self.n)
        r_adj = s[self.first] + s[self.second] - 2.0 * v
        r_dis = v.sum() - v - r_adj
        return a_id * v + a_adj * r_adj + a_dis * r_dis


class _DensePlan:
    """Fallback for schemes without a documented O(E) path.

    Materializes one dense E x E matrix per coefficient vector, so cost and
    memory are quadratic in the edge count; guarded by the dense cap
    (``SONETS_DENSE_CAP``).
    """

    def __init__(self, scheme: Scheme):
        cap = _dense_cap()
        if scheme.edge_count > cap:
            raise CapExceededError(
                f"scheme '{scheme.name}' has no O(E) matvec and "
                f"E={scheme.edge_count} exceeds the dense cap {cap}"
            )
        self.scheme = scheme
        self._matrix: np.ndarray | None = None
        self._key: bytes | None = None

    def matvec(self, coeffs: np.ndarray, v: np.ndarray) -> np.ndarray:
        key = coeffs.tobytes()
        if key != self._key:
            self._matrix = lift_dense(AlgebraElement(self.scheme, tuple(coeffs)))
            self._key = key
        return self._matrix @ v


def _plan_for(scheme: Scheme):
    plan = getattr(scheme, "_matvec_plan", None)
    if plan is None:
        if isinstance(scheme, NykampZhaoScheme):
            plan = _DirectedPlan(scheme)
        elif isinstance(scheme, JohnsonScheme):
            plan = _JohnsonPlan(scheme)
        else:
            plan = _DensePlan(scheme)
        scheme._matvec_plan = plan
    return plan


def structured_matvec(
    scheme: Scheme, element: AlgebraElement, v: np.ndarray
) -> np.ndarray:
    """Apply the lifted matrix of ``element`` to a length-E vector without
    forming it, in O(E) time and memory for the directed and unordered-pair
    schemes (dense fallback otherwise)."""
    if element.scheme != scheme:
        raise ConfigurationError("element does not belong to the given scheme")
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (scheme.edge_count,):
        raise ConfigurationError(
            f"expected a vector of length {scheme.edge_count}, got shape {v.shape}"
        )
    return _plan_for(scheme).matvec(element.vector, v)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplerConfig:
    """Everything needed to generate an ensemble deterministically."""

    scheme: Scheme
    cov: AlgebraElement
    edge_probability: float
    seed: int
    realizations: int = 1
    keep_pre_threshold: bool = False

    def __post_init__(self):
        if self.cov.scheme != self.scheme:
            raise ConfigurationError("covariance belongs to a different scheme")
        if not 0.0 < self.edge_probability < 1.0:
            raise ConfigurationError(
                f"edge probability must be in (0, 1), got {self.edge_probability}"
            )
        if self.realizations < 0:
            raise ConfigurationError("realization count must be nonnegative")

    @property
    def reference_variance(self) -> float:
        """Variance of a single pre-threshold component: the coefficient of
        the scheme's first identity relation."""
        return self.cov.coeffs[self.scheme.identity_relations[0]]

    @property
    def threshold(self) -> float:
        return threshold_for_probability(
            self.edge_probability, self.reference_variance
        )


@dataclass(frozen=True)
class GraphSample:
    """One thresholded realization: a presence bit per enumerated edge."""

    scheme: Scheme
    bits: np.ndarray  # bool, length E; treat as read-only
    realization_index: int
    seed: int
    pre_threshold: np.ndarray | None = field(default=None, repr=False)

    @property
    def present_edges(self) -> list[tuple]:
        edges = self.scheme.edges
        return [edges[i] for i in np.flatnonzero(self.bits)]


class GraphSampler:
    """Holds the one-time spectral work for a config: the square-root
    coefficients and the matvec plan."""

    def __init__(self, config: SamplerConfig):
        require_admissible(config.cov)
        self.config = config
        self.sqrt_element = sqrt_in_algebra(config.cov)
        self.plan = _plan_for(config.scheme)
        self.threshold = config.threshold

    def gaussian(self, index: int) -> np.ndarray:
        """The correlated pre-threshold vector for one realization."""
        rng = np.random.default_rng(
            np.random.SeedSequence(
                entropy=int(self.config.seed), spawn_key=(int(index),)
            )
        )
        omega = rng.standard_normal(self.config.scheme.edge_count)
        return self.plan.matvec(self.sqrt_element.vector, omega)

    def sample(self, index: int) -> GraphSample:
        u = self.gaussian(index)
        return GraphSample(
            scheme=self.config.scheme,
            bits=u > self.threshold,
            realization_index=index,
            seed=self.config.seed,
            pre_threshold=u if self.config.keep_pre_threshold else None,
        )

    def ensemble(self) -> Iterator[GraphSample]:
        for index in range(self.config.realizations):
            yield self.sample(index)


def sample_graph(config: SamplerConfig, realization_index: int) -> GraphSample:
    """One realization; deterministic in (seed, index)."""
    return GraphSampler(config).sample(realization_index)


def sample_ensemble(config: SamplerConfig) -> Iterator[GraphSample]:
    """Realizations 0 .. count-1; the sample at each index is independent of
    generation order."""
    return GraphSampler(config).ensemble()


# ---------------------------------------------------------------------------
# Sample I/O
# ---------------------------------------------------------------------------


def edge_list_header(scheme: Scheme) -> tuple[str, ...]:
    if isinstance(scheme, NykampZhaoScheme):
        return ("tail", "head")
    if isinstance(scheme, JohnsonLineGraphScheme):
        return ("i", "j", "k")
    return ("u", "v")


def write_edge_list(sample: GraphSample, path) -> None:
    """CSV with one row per present edge, in enumeration order."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(edge_list_header(sample.scheme))
        for edge in sample.present_edges:
            writer.writerow(edge)


def read_edge_list(path, scheme: Scheme) -> GraphSample:
    """Rebuild a sample's presence bits from an edge-list CSV."""
    bits = np.zeros(scheme.edge_count, dtype=bool)
    index = scheme.edge_index
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != edge_list_header(scheme):
            raise ConfigurationError(
                f"{path}: expected header {edge_list_header(scheme)}, got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                edge = tuple(int(x) for x in row)
                bits[index[edge]] = True
            except (ValueError, KeyError):
                raise ConfigurationError(
                    f"{path}:{lineno}: {row!r} is not an edge of {scheme!r}"
                ) from None
    return GraphSample(scheme=scheme, bits=bits, realization_index=-1, seed=-1)


def adjacency_matrix(sample: GraphSample) -> np.ndarray:
    """Vertex adjacency of the realization (0/1, vertex_count square)."""
    scheme = sample.scheme
    size = scheme.vertex_count
    adj = np.zeros((size, size), dtype=np.int8)
    if isinstance(scheme, NykampZhaoScheme):
        for tail, head in sample.present_edges:
            adj[tail, head] = 1
    elif isinstance(scheme, JohnsonLineGraphScheme):
        rank = {pair: r for r, pair in enumerate(scheme.johnson_vertices)}
        for edge in sample.present_edges:
            a, b = scheme.endpoints(edge)
            adj[rank[a], rank[b]] = 1
            adj[rank[b], rank[a]] = 1
    else:
        for u, v in sample.present_edges:
            adj[u, v] = 1
            adj[v, u] = 1
    return adj


def write_pbm(sample: GraphSample, path) -> None:
    """Plain PBM (P1) pixel dump of the adjacency matrix; present edges are
    black pixels."""
    adj = adjacency_matrix(sample)
    with open(path, "w") as handle:
        handle.write("P1\n")
        handle.write(f"{adj.shape[1]} {adj.shape[0]}\n")
        for row in adj:
            handle.write(" ".join("1" if x else "0" for x in row) + "\n")
