"""Edge sets and pair classifiers for the built-in coherent configurations.

A scheme is a finite set of "edges" together with a total classifier that
assigns every ordered pair of edges to one of d+1 relations.  Four families
are built in:

* ``NykampZhaoScheme`` -- ordered pairs (tail, head) of distinct vertices,
  seven relations (identity, reciprocal, divergent, chain, anti-chain,
  convergent, disjoint).
* ``JohnsonScheme`` -- unordered vertex pairs, three relations classified by
  intersection size (identity, adjacent, disjoint).
* ``DistinguishedVertexScheme`` -- unordered pairs on ``n`` ordinary vertices
  plus one distinguished vertex (id ``n``); nine relations indexed by the
  share count and by which of the two edges touch the distinguished vertex.
* ``JohnsonLineGraphScheme`` -- triples (i, j, k) with i < j and k distinct,
  standing for the line-graph edge that joins the vertex pairs {i,k} and
  {j,k}; twelve relations indexed by the overlap pattern (p, q, r, s).

Edges are plain tuples in a canonical form (unordered pairs stored with the
smaller id first), so each edge has exactly one representation.  All scheme
objects are immutable after construction and safe to share across threads;
lazily computed tables are cached idempotently.

``compute_structure_constants`` brute-forces the non-negative integer tensor
``rho[k][i][j]`` defined by counting, for a representative pair (x, y) in
relation i, the edges z with (x, z) in relation k and (z, y) in relation j.
Those counts satisfy  R(k) @ R(j) = sum_i rho[k][i][j] R(i)  for the 0/1
relation matrices, which ``verify_axioms`` checks exhaustively at small sizes.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    AxiomViolationError,
    CapExceededError,
    ConfigurationError,
)

AXIOM_CHECK_CAP = 500      # verify_axioms is O(E^3); refuse above this
DENSE_MATRIX_CAP = 2000    # E x E relation matrices
CONSTANTS_CAP = 200_000    # representative counting is O((d+1) * E)

Edge = tuple  # canonical edge tuples; shape depends on the scheme family


class Scheme:
    """Base class for a coherent-configuration scheme on an edge set.

    Subclasses fix the edge family, the relation list, the adjoint
    involution, and the pair classifier.  ``n`` is the vertex-count
    parameter of the family (see subclass docstrings for its exact meaning).
    """

    name: str = "abstract"
    min_vertices: int = 1
    relation_names: tuple[str, ...] = ()
    identity_relations: tuple[int, ...] = (0,)

    def __init__(self, n: int):
        if n < self.min_vertices:
            raise ConfigurationError(
                f"scheme '{self.name}' requires at least "
                f"{self.min_vertices} vertices, got {n}"
            )
        self.n = int(n)
        self._edges: list[Edge] | None = None
        self._edge_index: dict[Edge, int] | None = None
        self._constants: "StructureConstants | None" = None
        self._table: np.ndarray | None = None

    # -- identity ---------------------------------------------------------

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.n == other.n

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.n))

    # -- basic structure ----------------------------------------------------

    @property
    def num_relations(self) -> int:
        return len(self.relation_names)

    @property
    def vertex_count(self) -> int:
        """Number of vertices of the underlying graph."""
        return self.n

    @property
    def edges(self) -> list[Edge]:
        """Edges in the documented deterministic order."""
        if self._edges is None:
            self._edges = self._build_edges()
        return self._edges

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def edge_index(self) -> dict[Edge, int]:
        if self._edge_index is None:
            self._edge_index = {e: i for i, e in enumerate(self.edges)}
        return self._edge_index

    @property
    def edge_array(self) -> np.ndarray:
        """Edges as an (E, arity) int array, cached."""
        cached = getattr(self, "_edge_array", None)
        if cached is None:
            cached = np.asarray(self.edges, dtype=np.int64)
            cached.setflags(write=False)
            self._edge_array = cached
        return cached

    def adjoint(self, k: int) -> int:
        """Index of the transpose relation of relation ``k``."""
        raise NotImplementedError

    def classify(self, x: Edge, y: Edge) -> int:
        """Relation id of the ordered edge pair (x, y).

        Total on valid edges; callers pass canonical tuples (see
        ``validate_edge``)."""
        raise NotImplementedError

    def validate_edge(self, e: Edge) -> Edge:
        """Check that ``e`` is a canonical edge of this scheme, returning it."""
        if e not in self.edge_index:
            raise ConfigurationError(f"{e!r} is not an edge of {self!r}")
        return e

    def _build_edges(self) -> list[Edge]:
        raise NotImplementedError

    # -- pairwise relation table -------------------------------------------

    def relation_table(self, cap: int = DENSE_MATRIX_CAP) -> np.ndarray:
        """E x E int8 array with entry [a, b] = classify(edges[a], edges[b]).

        Subclasses override ``_build_table`` with a vectorized version; the
        generic fallback loops over all pairs.
        """
        E = self.edge_count
        if E > cap:
            raise CapExceededError(
                f"relation table needs {E}x{E} entries but cap is {cap} edges"
            )
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def _build_table(self) -> np.ndarray:
        edges = self.edges
        E = len(edges)
        table = np.empty((E, E), dtype=np.int8)
        for a, x in enumerate(edges):
            for b, y in enumerate(edges):
                table[a, b] = self.classify(x, y)
        return table

    def structure_constants(self, cross_validate: bool = False) -> "StructureConstants":
        """Brute-forced constants, cached on the instance."""
        if self._constants is None or cross_validate:
            constants = compute_structure_constants(self, cross_validate=cross_validate)
            self._constants = constants
        return self._constants


# ---------------------------------------------------------------------------
# Built-in schemes
# ---------------------------------------------------------------------------


class NykampZhaoScheme(Scheme):
    """Directed complete graph on ``n`` vertices; E = n(n-1) ordered edges.

    Edges are (tail, head) tuples, enumerated lexicographically:
    (0,1), (0,2), ..., (0,n-1), (1,0), (1,2), ...

    Relations, in order: identity, reciprocal, divergent (shared tail),
    chain (head of x = tail of y), anti-chain (tail of x = head of y),
    convergent (shared head), disjoint.  Chain and anti-chain are adjoints
    of one another; the other five relations are symmetric.
    """

    name = "nykamp-zhao"
    min_vertices = 5
    relation_names = (
        "identity",
        "reciprocal",
        "divergent",
        "chain",
        "anti-chain",
        "convergent",
        "disjoint",
    )

    IDENTITY, RECIPROCAL, DIVERGENT, CHAIN, ANTI_CHAIN, CONVERGENT, DISJOINT = range(7)

    _ADJOINT = (0, 1, 2, 4, 3, 5, 6)

    def adjoint(self, k: int) -> int:
        return self._ADJOINT[k]

    @property
    def reciprocal_index(self) -> np.ndarray:
        """Position of the reversed edge, per edge; cached."""
        cached = getattr(self, "_reciprocal_index", None)
        if cached is None:
            index = self.edge_index
            cached = np.asarray(
                [index[(j, i)] for (i, j) in self.edges], dtype=np.intp
            )
            cached.setflags(write=False)
            self._reciprocal_index = cached
        return cached

    def _build_edges(self) -> list[Edge]:
        n = self.n
        return [(i, j) for i in range(n) for j in range(n) if i != j]

    def classify(self, x: Edge, y: Edge) -> int:
        (a, b), (c, d) = x, y
        if a == c:
            if b == d:
                return self.IDENTITY
            return self.DIVERGENT
        if a == d and b == c:
            return self.RECIPROCAL
        if b == d:
            return self.CONVERGENT
        if b == c:
            return self.CHAIN
        if a == d:
            return self.ANTI_CHAIN
        return self.DISJOINT

    def _build_table(self) -> np.ndarray:
        edges = np.asarray(self.edges)
        t1, h1 = edges[:, 0:1], edges[:, 1:2]
        t2, h2 = edges[:, 0], edges[:, 1]
        table = np.full((len(edges), len(edges)), self.DISJOINT, dtype=np.int8)
        same_tail = t1 == t2
        same_head = h1 == h2
        ident = same_tail & same_head
        recip = (t1 == h2) & (h1 == t2)
        table[same_tail & ~ident] = self.DIVERGENT
        table[same_head & ~ident] = self.CONVERGENT
        table[(h1 == t2) & ~recip & ~same_head] = self.CHAIN
        table[(t1 == h2) & ~recip & ~same_tail] = self.ANTI_CHAIN
        table[recip] = self.RECIPROCAL
        table[ident] = self.IDENTITY
        return table


class JohnsonScheme(Scheme):
    """Unordered vertex pairs on ``n`` vertices; E = n(n-1)/2 edges.

    Edges are (i, j) tuples with i < j, enumerated lexicographically.
    Pair (x, y) is in relation 2 - |x & y|: identity, adjacent, disjoint.
    All relations are symmetric.
    """

    name = "johnson"
    min_vertices = 4
    relation_names = ("identity", "adjacent", "disjoint")

    IDENTITY, ADJACENT, DISJOINT = range(3)

    def adjoint(self, k: int) -> int:
        return k

    def _build_edges(self) -> list[Edge]:
        return list(itertools.combinations(range(self.n), 2))

    def classify(self, x: Edge, y: Edge) -> int:
        return 2 - len(set(x) & set(y))

    def _build_table(self) -> np.ndarray:
        edges = np.asarray(self.edges)
        a1, b1 = edges[:, 0:1], edges[:, 1:2]
        a2, b2 = edges[:, 0], edges[:, 1]
        shared = (
            (a1 == a2).astype(np.int8)
            + (a1 == b2)
            + (b1 == a2)
            + (b1 == b2)
        )
        return (2 - shared).astype(np.int8)


class DistinguishedVertexScheme(Scheme):
    """Undirected edges on ``n`` ordinary vertices plus one distinguished
    vertex with id ``n`` (so ``vertex_count`` is ``n + 1``).

    Ordinary edges {i, j} with i < j < n come first (lexicographic), then
    the distinguished edges {i, n} for i = 0..n-1.  Nine relations: the
    share count (identity/adjacent/disjoint) refined by whether each edge
    of the pair is ordinary (block 1) or distinguished (block 2).  There is
    no disjoint pair of distinguished edges, and the diagonal splits into
    the two identity relations, so the configuration is not homogeneous.
    """

    name = "distinguished-vertex"
    min_vertices = 5
    relation_names = (
        "i11", "a11", "d11",   # ordinary-ordinary
        "a12", "a21",          # adjacent, mixed blocks
        "d12", "d21",          # disjoint, mixed blocks
        "i22", "a22",          # distinguished-distinguished
    )
    identity_relations = (0, 7)

    I11, A11, D11, A12, A21, D12, D21, I22, A22 = range(9)

    _ADJOINT = (0, 1, 2, 4, 3, 6, 5, 7, 8)

    def adjoint(self, k: int) -> int:
        return self._ADJOINT[k]

    @property
    def vertex_count(self) -> int:
        return self.n + 1

    def _build_edges(self) -> list[Edge]:
        ordinary = list(itertools.combinations(range(self.n), 2))
        return ordinary + [(i, self.n) for i in range(self.n)]

    def is_distinguished(self, e: Edge) -> bool:
        return e[1] == self.n

    def classify(self, x: Edge, y: Edge) -> int:
        shared = len(set(x) & set(y))
        dx, dy = self.is_distinguished(x), self.is_distinguished(y)
        if not dx and not dy:
            return (self.I11, self.A11, self.D11)[2 - shared]
        if dx and dy:
            return self.I22 if shared == 2 else self.A22
        if not dx:
            return self.A12 if shared == 1 else self.D12
        return self.A21 if shared == 1 else self.D21

    def _build_table(self) -> np.ndarray:
        edges = np.asarray(self.edges)
        a1, b1 = edges[:, 0:1], edges[:, 1:2]
        a2, b2 = edges[:, 0], edges[:, 1]
        shared = (
            (a1 == a2).astype(np.int8)
            + (a1 == b2)
            + (b1 == a2)
            + (b1 == b2)
        )
        d1 = b1 == self.n
        d2 = b2 == self.n
        table = np.empty_like(shared)
        both_ordinary = ~d1 & ~d2
        both_dist = d1 & d2
        table[both_ordinary] = (2 - shared)[both_ordinary]  # 0,1,2 = i11,a11,d11
        table[~d1 & d2] = np.where(shared == 1, self.A12, self.D12)[~d1 & d2]
        table[d1 & ~d2] = np.where(shared == 1, self.A21, self.D21)[d1 & ~d2]
        table[both_dist] = np.where(shared == 2, self.I22, self.A22)[both_dist]
        return table


# admissible overlap patterns (p, q, r, s); identity first, rest lexicographic
_JLG_TUPLES = ((2, 1, 0, 0),) + tuple(
    t
    for t in sorted(
        itertools.product((0, 1, 2), (0, 1), (0, 1), (0, 1))
    )
    if not ((t[0] == 2 or t[1] == 1) and (t[2] or t[3])) and t != (2, 1, 0, 0)
)
_JLG_INDEX = {t: i for i, t in enumerate(_JLG_TUPLES)}


class JohnsonLineGraphScheme(Scheme):
    """Line-graph edges of the Johnson graph J(n, 2).

    The Johnson graph has the 2-subsets of {0..n-1} as vertices, adjacent
    when they intersect in one element.  Its edges are triples (i, j, k)
    with i < j and k not in {i, j}, joining the vertices {i, k} and {j, k};
    enumeration is lexicographic in (i, j, k).  E = n(n-1)(n-2)/2.

    An ordered pair of triples is classified by the tuple

        p = |{i,j} & {i',j'}|,  q = |{k} & {k'}|,
        r = |{k} & {i',j'}|,    s = |{k'} & {i,j}|,

    of which exactly twelve are admissible (r = s = 0 is forced when p = 2
    or q = 1).  The identity tuple (2,1,0,0) has id 0; the remaining tuples
    get ids 1..11 in lexicographic order.  The adjoint swaps r and s.
    """

    name = "johnson-line-graph"
    min_vertices = 6
    relation_names = tuple(f"p{p}q{q}r{r}s{s}" for (p, q, r, s) in _JLG_TUPLES)

    _ADJOINT = tuple(_JLG_INDEX[(p, q, s, r)] for (p, q, r, s) in _JLG_TUPLES)

    def adjoint(self, k: int) -> int:
        return self._ADJOINT[k]

    @property
    def johnson_vertices(self) -> list[tuple[int, int]]:
        """Vertices of the Johnson graph (2-subsets, lexicographic)."""
        return list(itertools.combinations(range(self.n), 2))

    @property
    def vertex_count(self) -> int:
        return self.n * (self.n - 1) // 2

    def _build_edges(self) -> list[Edge]:
        n = self.n
        return [
            (i, j, k)
            for i, j in itertools.combinations(range(n), 2)
            for k in range(n)
            if k != i and k != j
        ]

    def endpoints(self, e: Edge) -> tuple[tuple[int, int], tuple[int, int]]:
        """The two Johnson-graph vertices joined by edge (i, j, k)."""
        i, j, k = e
        return tuple(sorted((i, k))), tuple(sorted((j, k)))

    def classify(self, x: Edge, y: Edge) -> int:
        i, j, k = x
        i2, j2, k2 = y
        p = (i == i2) + (i == j2) + (j == i2) + (j == j2)
        q = int(k == k2)
        r = int(k == i2 or k == j2)
        s = int(k2 == i or k2 == j)
        return _JLG_INDEX[(p, q, r, s)]

    def _build_table(self) -> np.ndarray:
        edges = np.asarray(self.edges)
        i1, j1, k1 = edges[:, 0:1], edges[:, 1:2], edges[:, 2:3]
        i2, j2, k2 = edges[:, 0], edges[:, 1], edges[:, 2]
        p = (
            (i1 == i2).astype(np.int8)
            + (i1 == j2)
            + (j1 == i2)
            + (j1 == j2)
        )
        q = (k1 == k2).astype(np.int8)
        r = ((k1 == i2) | (k1 == j2)).astype(np.int8)
        s = ((k2 == i1) | (k2 == j1)).astype(np.int8)
        code = p * 8 + q * 4 + r * 2 + s
        lookup = np.full(24, -1, dtype=np.int8)
        for t, idx in _JLG_INDEX.items():
            lookup[t[0] * 8 + t[1] * 4 + t[2] * 2 + t[3]] = idx
        return lookup[code]


class CustomScheme(Scheme):
    """User-defined scheme from an explicit edge list and classifier.

    ``classifier`` may be a callable (x, y) -> relation id or a dict keyed
    by edge pairs.  The relation count, adjoint involution and identity
    relations are derived by scanning all pairs, and the coherence axioms
    are always verified on construction (``verify_axioms``), so invalid
    classifiers are rejected up front.
    """

    name = "custom"
    min_vertices = 1

    def __init__(
        self,
        edges: Sequence[Edge],
        classifier: Callable[[Edge, Edge], int] | dict,
        num_relations: int | None = None,
        name: str = "custom",
        relation_names: Sequence[str] | None = None,
    ):
        edge_list = [tuple(e) for e in edges]
        if len(set(edge_list)) != len(edge_list):
            raise ConfigurationError("duplicate edges in custom scheme")
        if len(edge_list) > AXIOM_CHECK_CAP:
            raise CapExceededError(
                f"custom schemes are verified exhaustively; "
                f"{len(edge_list)} edges exceeds the cap {AXIOM_CHECK_CAP}"
            )
        if isinstance(classifier, dict):
            table_dict = classifier
            classify = lambda x, y: table_dict[(x, y)]  # noqa: E731
        else:
            classify = classifier
        seen = sorted({classify(x, y) for x in edge_list for y in edge_list})
        d1 = num_relations if num_relations is not None else len(seen)
        if seen != list(range(d1)):
            raise ConfigurationError(
                f"classifier outputs must cover 0..{d1 - 1} exactly, got {seen}"
            )
        self.name = name
        self.relation_names = (
            tuple(relation_names)
            if relation_names is not None
            else tuple(f"r{k}" for k in range(d1))
        )
        if len(self.relation_names) != d1:
            raise ConfigurationError("relation_names length mismatch")

        vertices = {v for e in edge_list for v in e}
        super().__init__(len(vertices) if vertices else 1)
        self._edge_list = edge_list
        self._classify = classify

        # derive identity relations and the adjoint involution
        diag = {classify(x, x) for x in edge_list}
        off_diag = {
            classify(x, y) for x in edge_list for y in edge_list if x != y
        }
        if diag & off_diag:
            raise AxiomViolationError(
                f"relations {sorted(diag & off_diag)} contain both diagonal "
                f"and off-diagonal pairs"
            )
        self.identity_relations = tuple(sorted(diag))
        adjoint = [-1] * d1
        for x in edge_list:
            for y in edge_list:
                k = classify(x, y)
                kt = classify(y, x)
                if adjoint[k] == -1:
                    adjoint[k] = kt
        self._adjoint_map = tuple(adjoint)

        report = verify_axioms(self)
        if not report.is_coherent:
            raise AxiomViolationError(
                f"custom classifier is not a coherent configuration:\n{report}"
            )

    def adjoint(self, k: int) -> int:
        return self._adjoint_map[k]

    def _build_edges(self) -> list[Edge]:
        return self._edge_list

    def classify(self, x: Edge, y: Edge) -> int:
        return self._classify(x, y)

    def __eq__(self, other) -> bool:
        return self is other

    def __hash__(self) -> int:
        return id(self)


BUILTIN_SCHEMES: dict[str, type[Scheme]] = {
    cls.name: cls
    for cls in (
        JohnsonScheme,
        NykampZhaoScheme,
        DistinguishedVertexScheme,
        JohnsonLineGraphScheme,
    )
}

_SCHEME_ALIASES = {
    "nz": "nykamp-zhao",
    "nykampzhao": "nykamp-zhao",
    "jlg": "johnson-line-graph",
    "dv": "distinguished-vertex",
}


def make_scheme(name: str, n: int) -> Scheme:
    """Instantiate a built-in scheme by name (a few aliases accepted)."""
    key = name.strip().lower().replace("_", "-")
    key = _SCHEME_ALIASES.get(key, key)
    if key not in BUILTIN_SCHEMES:
        raise ConfigurationError(
            f"unknown scheme {name!r}; built-ins: {sorted(BUILTIN_SCHEMES)}"
        )
    return BUILTIN_SCHEMES[key](n)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def enumerate_edges(scheme: Scheme) -> list[Edge]:
    """Edges of the scheme in its documented deterministic order."""
    return list(scheme.edges)


def classify_pair(scheme: Scheme, x: Edge, y: Edge) -> int:
    """Relation id of the ordered pair (x, y); total on valid edges."""
    return scheme.classify(tuple(x), tuple(y))


def dense_relation_matrix(scheme: Scheme, k: int, cap: int = DENSE_MATRIX_CAP) -> np.ndarray:
    """E x E 0/1 matrix of relation ``k`` (int64)."""
    if not 0 <= k < scheme.num_relations:
        raise ConfigurationError(f"relation id {k} out of range")
    table = scheme.relation_table(cap=cap)
    return (table == k).astype(np.int64)


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of the exhaustive coherence checks for one scheme instance.

    ``partition_ok``   every ordered pair falls in exactly one relation and
                       no relation is empty;
    ``diagonal_ok``    the identity relations partition the diagonal and
                       contain nothing else;
    ``single_identity``the diagonal is a single relation (homogeneous case);
    ``adjoint_ok``     transposing a pair lands in the adjoint relation;
    ``regular_ok``     the pair counts through every intermediate edge are
                       constant on each relation.

    ``witnesses`` maps a failed check name to a human-readable example.
    """

    scheme_name: str
    n: int
    edge_count: int
    partition_ok: bool
    diagonal_ok: bool
    single_identity: bool
    adjoint_ok: bool
    regular_ok: bool
    witnesses: dict

    @property
    def is_coherent(self) -> bool:
        return (
            self.partition_ok
            and self.diagonal_ok
            and self.adjoint_ok
            and self.regular_ok
        )

    @property
    def is_homogeneous(self) -> bool:
        return self.is_coherent and self.single_identity

    def __str__(self) -> str:
        def mark(ok):
            return "pass" if ok else "FAIL"

        lines = [
            f"scheme {self.scheme_name} (n={self.n}, E={self.edge_count})",
            f"  partition        {mark(self.partition_ok)}",
            f"  diagonal         {mark(self.diagonal_ok)}"
            + ("" if self.single_identity else "  (multiple identity relations)"),
            f"  adjoint          {mark(self.adjoint_ok)}",
            f"  regularity       {mark(self.regular_ok)}",
        ]
        for key, witness in self.witnesses.items():
            lines.append(f"  witness[{key}]: {witness}")
        return "\n".join(lines)


def verify_axioms(scheme: Scheme, cap: int = AXIOM_CHECK_CAP) -> AxiomReport:
    """Exhaustively check the coherence axioms on a scheme instance.

    Cost is dominated by (d+1)^2 products of E x E matrices, so the edge
    count is capped (default 500).  Returns a report rather than raising, so
    deliberately broken classifiers can be inspected.
    """
    E = scheme.edge_count
    if E > cap:
        raise CapExceededError(
            f"axiom verification is cubic in the edge count; "
            f"E={E} exceeds cap={cap}"
        )
    edges = scheme.edges
    d1 = scheme.num_relations
    table = scheme.relation_table(cap=max(cap, DENSE_MATRIX_CAP))
    witnesses: dict = {}

    in_range = (table >= 0) & (table < d1)
    counts = np.bincount(table[in_range].ravel(), minlength=d1)
    partition_ok = bool(in_range.all() and (counts > 0).all())
    if not in_range.all():
        a, b = np.argwhere(~in_range)[0]
        witnesses["partition"] = f"pair ({edges[a]}, {edges[b]}) -> id {table[a, b]}"
    elif not (counts > 0).all():
        empty = np.flatnonzero(counts == 0)
        witnesses["partition"] = f"empty relations {empty.tolist()}"

    ident = np.asarray(scheme.identity_relations)
    diag = np.diagonal(table)
    diag_in_ident = np.isin(diag, ident)
    off = table.copy()
    np.fill_diagonal(off, ident[0])
    off_in_ident = np.isin(off, ident)
    np.fill_diagonal(off_in_ident, False)
    diagonal_ok = bool(diag_in_ident.all() and not off_in_ident.any())
    if not diag_in_ident.all():
        a = int(np.flatnonzero(~diag_in_ident)[0])
        witnesses["diagonal"] = f"({edges[a]}, {edges[a]}) -> non-identity id {diag[a]}"
    elif off_in_ident.any():
        a, b = np.argwhere(off_in_ident)[0]
        witnesses["diagonal"] = (
            f"distinct pair ({edges[a]}, {edges[b]}) -> identity id {table[a, b]}"
        )
    single_identity = len(ident) == 1 and diagonal_ok

    adjoint_map = np.asarray([scheme.adjoint(k) for k in range(d1)])
    transposed_ok = table.T == adjoint_map[table]
    adjoint_ok = bool(transposed_ok.all())
    if not adjoint_ok:
        a, b = np.argwhere(~transposed_ok)[0]
        witnesses["adjoint"] = (
            f"({edges[a]}, {edges[b]}) -> {table[a, b]} but "
            f"({edges[b]}, {edges[a]}) -> {table[b, a]} != adjoint"
        )

    # regularity: for each (k, j) the count of intermediates is constant on
    # the support of each relation i.  Float matmul is exact here (counts
    # are far below 2^53).
    regular_ok = True
    indicators = [(table == k).astype(np.float64) for k in range(d1)]
    supports = [np.nonzero(table == i) for i in range(d1)]
    for k in range(d1):
        if not regular_ok:
            break
        for j in range(d1):
            product = np.rint(indicators[k] @ indicators[j]).astype(np.int64)
            for i in range(d1):
                vals = product[supports[i]]
                if vals.size and (vals != vals[0]).any():
                    regular_ok = False
                    rows, cols = supports[i]
                    bad = int(np.flatnonzero(vals != vals[0])[0])
                    witnesses["regularity"] = (
                        f"relation {i}: pair ({edges[rows[0]]}, {edges[cols[0]]}) "
                        f"sees {int(vals[0])} intermediates of type (k={k}, j={j}) "
                        f"but ({edges[rows[bad]]}, {edges[cols[bad]]}) sees {int(vals[bad])}"
                    )
                    break
            if not regular_ok:
                break

    return AxiomReport(
        scheme_name=scheme.name,
        n=scheme.n,
        edge_count=E,
        partition_ok=partition_ok,
        diagonal_ok=diagonal_ok,
        single_identity=single_identity,
        adjoint_ok=adjoint_ok,
        regular_ok=regular_ok,
        witnesses=witnesses,
    )


@dataclass(frozen=True)
class StructureConstants:
    """Integer tensor ``rho[k][i][j]`` = coefficient of relation i in the
    matrix product R(k) @ R(j); equivalently the intermediate-edge count for
    a representative pair of relation i through legs (k, j)."""

    scheme_name: str
    n: int
    relation_names: tuple[str, ...]
    rho: np.ndarray  # shape (d+1, d+1, d+1), int64, read-only

    @property
    def num_relations(self) -> int:
        return len(self.relation_names)

    def intersection_matrix(self, k: int) -> np.ndarray:
        """The (d+1) x (d+1) image of basis relation ``k``; column j lists
        the expansion coefficients of R(k) @ R(j)."""
        return self.rho[k]

    def to_json(self) -> str:
        return json.dumps(
            {
                "scheme": self.scheme_name,
                "N": self.n,
                "d_plus_1": self.num_relations,
                "rho": self.rho.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "StructureConstants":
        data = json.loads(text)
        rho = np.asarray(data["rho"], dtype=np.int64)
        d1 = int(data["d_plus_1"])
        if rho.shape != (d1, d1, d1):
            raise ConfigurationError(
                f"rho tensor shape {rho.shape} does not match d_plus_1={d1}"
            )
        return cls(
            scheme_name=data["scheme"],
            n=int(data["N"]),
            relation_names=tuple(f"r{k}" for k in range(d1)),
            rho=rho,
        )


def _find_representatives(scheme: Scheme) -> dict[int, tuple[Edge, Edge]]:
    """One deterministic representative pair per relation.

    Scans a few edges from both ends of the enumeration first (relations
    confined to late edge classes, as in the distinguished-vertex scheme,
    are found without a full quadratic sweep), then falls back to the full
    scan.  Raises if some relation has no pairs at this size.
    """
    edges = scheme.edges
    d1 = scheme.num_relations
    found: dict[int, tuple[Edge, Edge]] = {}
    head = edges[:4]
    tail = edges[-4:] if len(edges) > 4 else []
    for xs in (head + tail, edges):
        for x in xs:
            for y in edges:
                r = scheme.classify(x, y)
                if r not in found:
                    found[r] = (x, y)
                    if len(found) == d1:
                        return found
    missing = sorted(set(range(d1)) - set(found))
    raise ConfigurationError(
        f"relations {missing} are empty for {scheme!r}; "
        f"increase the vertex count"
    )


def _count_from_representatives(
    scheme: Scheme, reps: dict[int, tuple[Edge, Edge]]
) -> np.ndarray:
    d1 = scheme.num_relations
    rho = np.zeros((d1, d1, d1), dtype=np.int64)
    classify = scheme.classify
    for i, (x, y) in reps.items():
        for z in scheme.edges:
            rho[classify(x, z), i, classify(z, y)] += 1
    return rho


def compute_structure_constants(
    scheme: Scheme,
    cross_validate: bool = False,
    cap: int = CONSTANTS_CAP,
) -> StructureConstants:
    """Brute-force the structure constants from representative pairs.

    With ``cross_validate`` the counts are recomputed from a second,
    disjoint set of representative pairs and compared; a mismatch means the
    classifier violates the regularity axiom and raises
    ``AxiomViolationError``.
    """
    E = scheme.edge_count
    if E > cap:
        raise CapExceededError(
            f"structure constants scan {E} edges per relation; cap is {cap}"
        )
    reps = _find_representatives(scheme)
    rho = _count_from_representatives(scheme, reps)
    if cross_validate:
        second = _second_representatives(scheme, reps)
        rho2 = _count_from_representatives(scheme, second)
        if not np.array_equal(rho, rho2):
            k, i, j = np.argwhere(rho != rho2)[0]
            raise AxiomViolationError(
                f"representative pairs disagree for relation {int(i)} with legs "
                f"({int(k)}, {int(j)}): {int(rho[k, i, j])} vs {int(rho2[k, i, j])} "
                f"(regularity axiom violated)"
            )
    rho.setflags(write=False)
    return StructureConstants(
        scheme_name=scheme.name,
        n=scheme.n,
        relation_names=scheme.relation_names,
        rho=rho,
    )


def _second_representatives(
    scheme: Scheme, first: dict[int, tuple[Edge, Edge]]
) -> dict[int, tuple[Edge, Edge]]:
    """A second representative per relation, differing from the first where
    the relation has more than one pair."""
    edges = scheme.edges
    found: dict[int, tuple[Edge, Edge]] = {}
    want = set(first)
    for x in reversed(edges):
        for y in reversed(edges):
            r = scheme.classify(x, y)
            if r not in found and (x, y) != first[r]:
                found[r] = (x, y)
                if len(found) == len(want):
                    return found
    for r in want - set(found):  # singleton relations: reuse the only pair
        found[r] = first[r]
    return found


def valencies(scheme: Scheme) -> np.ndarray:
    """Row sums of each relation matrix, per identity class.

    Entry [k][c] is the number of edges z in relation k with a fixed edge x
    whose diagonal pair lies in identity relation ``identity_relations[c]``.
    Derived from the structure constants: summing rho[k][i][:] over the
    right leg for i the identity class counts all such z.
    """
    rho = scheme.structure_constants().rho
    return np.stack(
        [rho[:, i, :].sum(axis=1) for i in scheme.identity_relations], axis=1
    )
