"""The fixed-size intersection algebra and its spectral operations.

Every covariance this package samples from is a linear combination
``sum_k alpha_k R(k)`` of the 0/1 relation matrices of a scheme.  Those
matrices form a closed algebra, and mapping each basis relation to its
(d+1) x (d+1) matrix of structure constants is an injective algebra
homomorphism.  Eigenvalues transfer both ways, so positive definiteness,
spectra and matrix square roots of the big E x E covariance are all
computed here on (d+1) x (d+1) matrices, in time independent of E.

For the Nykamp-Zhao and Johnson schemes the structure constants are known
in closed form as polynomials in the vertex count, so no edge enumeration
happens at all; other schemes fall back to the brute-forced constants from
:mod:`sonets.schemes`.

The square root of an admissible element is found by (1) forming the image
``varsigma`` of the element, (2) taking the spectral square root of that
small matrix, (3) projecting back onto the basis by solving a Gram system,
and (4) reading off the coefficient vector, which lifts to the E x E square
root through the same linear combination.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AdmissibilityError,
    ConfigurationError,
    NumericalError,
    OutOfSpanError,
    SchemeMismatchError,
)
from .schemes import (
    DistinguishedVertexScheme,
    JohnsonScheme,
    NykampZhaoScheme,
    Scheme,
    make_scheme,
    valencies,
)

EIGENVALUE_MERGE_RTOL = 1e-8   # distinct-eigenvalue clustering
PD_MARGIN = 1e-12              # relative strict-positivity margin
SPECTRUM_DENSE_CAP = 2000      # lift densely for multiplicities below this E
_CONDITION_LIMIT = 1e8         # eigenvector conditioning guard for the sqrt


# ---------------------------------------------------------------------------
# Closed-form intersection matrices
#
# The private *_product_table builders list, in row j, the expansion
# coefficients of R(k) @ R(j) over the basis.  The public tensor uses the
# transposed layout rho[k][i][j] = coefficient of R(i) in R(k) @ R(j), which
# is the orientation in which k -> rho[k] is an algebra homomorphism.
# ---------------------------------------------------------------------------


def _nz_product_tables(n: int) -> np.ndarray:
    """Product tables for the seven directed-scheme relations."""
    recip = [
        [0, 1, 0, 0, 0, 0, 0],
        [1, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0],
        [0, 0, 0, 0, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 1],
    ]
    div = [
        [0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 0],
        [n - 2, 0, n - 3, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 1],
        [0, n - 2, 0, 0, n - 3, 0, 0],
        [0, 0, 0, 1, 0, 0, 1],
        [0, 0, 0, n - 3, 0, n - 3, n - 4],
    ]
    chain = [
        [0, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0],
        [0, n - 2, 0, n - 3, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 1],
        [n - 2, 0, 0, 0, 0, n - 3, 0],
        [0, 0, 1, 0, 0, 0, 1],
        [0, 0, n - 3, 0, n - 3, 0, n - 4],
    ]
    anti = [
        [0, 0, 0, 0, 1, 0, 0],
        [0, 0, 1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 1],
        [n - 2, 0, n - 3, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 1],
        [0, n - 2, 0, 0, n - 3, 0, 0],
        [0, 0, 0, n - 3, 0, n - 3, n - 4],
    ]
    conv = [
        [0, 0, 0, 0, 0, 1, 0],
        [0, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 1],
        [0, n - 2, 0, n - 3, 0, 0, 0],
        [0, 0, 1, 0, 0, 0, 1],
        [n - 2, 0, 0, 0, 0, n - 3, 0],
        [0, 0, n - 3, 0, n - 3, 0, n - 4],
    ]
    disj = [
        [0, 0, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, 0, 0, 1],
        [0, 0, 0, 0, n - 3, n - 3, n - 4],
        [0, 0, 0, 0, n - 3, n - 3, n - 4],
        [0, 0, n - 3, n - 3, 0, 0, n - 4],
        [0, 0, n - 3, n - 3, 0, 0, n - 4],
        [
            (n - 3) * (n - 2),
            (n - 3) * (n - 2),
            (n - 4) * (n - 3),
            (n - 4) * (n - 3),
            (n - 4) * (n - 3),
            (n - 4) * (n - 3),
            (n - 5) * (n - 4),
        ],
    ]
    return np.array(
        [np.eye(7, dtype=np.int64), recip, div, chain, anti, conv, disj],
        dtype=np.int64,
    )


def _johnson_product_tables(n: int) -> np.ndarray:
    """Product tables for the three unordered-pair relations."""

    def c2(m: int) -> int:
        return m * (m - 1) // 2

    adj = [
        [0, 1, 0],
        [2 * (n - 2), n - 2, 4],
        [0, n - 3, 2 * (n - 4)],
    ]
    disj = [
        [0, 0, 1],
        [0, n - 3, 2 * (n - 4)],
        [c2(n - 2), c2(n - 3), c2(n - 4)],
    ]
    return np.array([np.eye(3, dtype=np.int64), adj, disj], dtype=np.int64)


def nz_intersection_tensor(n: int) -> np.ndarray:
    """Closed-form rho[k][i][j] for the directed scheme (int64)."""
    return _nz_product_tables(n).transpose(0, 2, 1).copy()


def johnson_intersection_tensor(n: int) -> np.ndarray:
    """Closed-form rho[k][i][j] for the unordered-pair scheme (int64)."""
    return _johnson_product_tables(n).transpose(0, 2, 1).copy()


def nz_gram_closed_form(n: int) -> np.ndarray:
    """Gram matrix of the seven directed-scheme intersection matrices,
    as polynomials in the vertex count (exact int64)."""
    p2 = n * n
    p3 = n * p2
    p4 = n * p3
    a = 3 * n - 10
    b = n - 4
    c = p2 - 9 * n + 20
    dgl = 7 * p2 - 40 * n + 66
    e = p2 - 8 * n + 18
    f = 3 * p2 - 20 * n + 34
    g = p2 - 8 * n + 16
    h = 3 * p3 - 33 * p2 + 126 * n - 166
    last = 7 * p4 - 94 * p3 + 499 * p2 - 1232 * n + 1186
    return np.array(
        [
            [7, 1, a, b, b, a, c],
            [1, 7, b, a, a, b, c],
            [a, b, dgl, e, f, g, h],
            [b, a, e, dgl, g, f, h],
            [b, a, f, g, dgl, e, h],
            [a, b, g, f, e, dgl, h],
            [c, c, h, h, h, h, last],
        ],
        dtype=np.int64,
    )


def intersection_tensor(scheme: Scheme) -> np.ndarray:
    """rho[k][i][j] for any scheme, cached on the instance.

    Closed form for the two schemes with known polynomial constants, brute
    force otherwise.
    """
    cached = getattr(scheme, "_intersection_tensor", None)
    if cached is not None:
        return cached
    if isinstance(scheme, NykampZhaoScheme):
        tensor = nz_intersection_tensor(scheme.n)
    elif isinstance(scheme, JohnsonScheme):
        tensor = johnson_intersection_tensor(scheme.n)
    else:
        tensor = scheme.structure_constants().rho
    tensor = np.ascontiguousarray(tensor, dtype=np.float64)
    tensor.setflags(write=False)
    scheme._intersection_tensor = tensor
    return tensor


# ---------------------------------------------------------------------------
# Algebra elements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraElement:
    """Coefficient vector over the relation basis of one scheme."""

    scheme: Scheme
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.scheme.num_relations:
            raise ConfigurationError(
                f"expected {self.scheme.num_relations} coefficients, "
                f"got {len(self.coeffs)}"
            )
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ConfigurationError("coefficients must be finite")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=np.float64)

    @property
    def is_symmetric(self) -> bool:
        """True when the lifted matrix is symmetric, i.e. the coefficient on
        every relation equals the one on its adjoint."""
        return all(
            self.coeffs[k] == self.coeffs[self.scheme.adjoint(k)]
            for k in range(len(self.coeffs))
        )

    def coefficient(self, name: str) -> float:
        return self.coeffs[_relation_id(self.scheme, name)]

    def replace(self, **by_name: float) -> "AlgebraElement":
        """New element with the named coefficients replaced."""
        coeffs = list(self.coeffs)
        for name, value in by_name.items():
            coeffs[_relation_id(self.scheme, name)] = float(value)
        return AlgebraElement(self.scheme, tuple(coeffs))

    def symmetrized(self) -> "AlgebraElement":
        """Average each coefficient with its adjoint partner's."""
        v = self.vector
        adj = np.asarray([self.scheme.adjoint(k) for k in range(len(v))])
        return AlgebraElement(self.scheme, tuple((v + v[adj]) / 2.0))

    def to_json(self) -> str:
        return json.dumps(
            {
                "scheme": self.scheme.name,
                "N": self.scheme.n,
                "coeffs": list(self.coeffs),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "AlgebraElement":
        data = json.loads(text)
        scheme = make_scheme(data["scheme"], int(data["N"]))
        return cls(scheme, tuple(float(c) for c in data["coeffs"]))


# accepted aliases for relation names, per scheme family
_RELATION_ALIASES = {
    "id": "identity",
    "recip": "reciprocal",
    "div": "divergent",
    "anti": "anti-chain",
    "antichain": "anti-chain",
    "conv": "convergent",
    "disj": "disjoint",
    "adj": "adjacent",
}


def _relation_id(scheme: Scheme, name: str) -> int:
    key = name.strip().lower().replace("_", "-")
    key = _RELATION_ALIASES.get(key, key)
    try:
        return scheme.relation_names.index(key)
    except ValueError:
        raise ConfigurationError(
            f"unknown relation {name!r} for scheme '{scheme.name}'; "
            f"valid names: {list(scheme.relation_names)}"
        ) from None


def element(scheme: Scheme, coeffs) -> AlgebraElement:
    """Element from a full coefficient vector (length d+1)."""
    return AlgebraElement(scheme, tuple(float(c) for c in coeffs))


def element_from_map(
    scheme: Scheme, coefficients: dict[str, float], identity_default: float = 1.0
) -> AlgebraElement:
    """Element from a name -> coefficient mapping.

    Unnamed relations default to zero, except identity relations which
    default to ``identity_default`` (the variance normalization).
    """
    coeffs = [0.0] * scheme.num_relations
    for k in scheme.identity_relations:
        coeffs[k] = float(identity_default)
    for name, value in coefficients.items():
        coeffs[_relation_id(scheme, name)] = float(value)
    return AlgebraElement(scheme, tuple(coeffs))


def identity_element(scheme: Scheme) -> AlgebraElement:
    coeffs = [0.0] * scheme.num_relations
    for k in scheme.identity_relations:
        coeffs[k] = 1.0
    return AlgebraElement(scheme, tuple(coeffs))


def _check_same_scheme(a: AlgebraElement, b: AlgebraElement) -> None:
    if a.scheme != b.scheme:
        raise SchemeMismatchError(
            f"elements belong to different schemes: {a.scheme!r} vs {b.scheme!r}"
        )


# ---------------------------------------------------------------------------
# Homomorphism, multiplication, coefficient recovery
# ---------------------------------------------------------------------------


def rho_map(m: AlgebraElement) -> np.ndarray:
    """(d+1) x (d+1) image of the element; linear in the coefficients and
    multiplicative on products, with the identity element mapping to the
    identity matrix."""
    tensor = intersection_tensor(m.scheme)
    return np.einsum("k,kij->ij", m.vector, tensor)


def multiply_elements(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Product in the relation algebra: c_i = sum_{k,j} a_k b_j rho[k][i][j]."""
    _check_same_scheme(a, b)
    tensor = intersection_tensor(a.scheme)
    c = np.einsum("k,kij,j->i", a.vector, tensor, b.vector)
    return AlgebraElement(a.scheme, tuple(c))


def gram_matrix(scheme: Scheme) -> np.ndarray:
    """Gram matrix G[i][j] = <rho_i, rho_j> of the intersection matrices
    under the Frobenius inner product; symmetric positive definite."""
    cached = getattr(scheme, "_gram", None)
    if cached is not None:
        return cached
    tensor = intersection_tensor(scheme)
    gram = np.einsum("iab,jab->ij", tensor, tensor)
    gram.setflags(write=False)
    scheme._gram = gram
    return gram


def _solve_gram(scheme: Scheme, rhs: np.ndarray) -> np.ndarray:
    """Solve the Gram system with one round of iterative refinement; the
    Gram entries grow like n^4, so plain LU loses a couple of digits at
    large vertex counts."""
    gram = gram_matrix(scheme)
    x = np.linalg.solve(gram, rhs)
    x += np.linalg.solve(gram, rhs - gram @ x)
    return x


def recover_coefficients(matrix: np.ndarray, scheme: Scheme) -> AlgebraElement:
    """Invert the homomorphism: coefficients of a matrix in the span of the
    intersection matrices, via the Gram system.

    Raises ``OutOfSpanError`` when the reprojection residual exceeds
    1e-9 relative to the matrix norm.
    """
    tensor = intersection_tensor(scheme)
    d1 = scheme.num_relations
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (d1, d1):
        raise ConfigurationError(
            f"expected a {d1}x{d1} matrix for scheme '{scheme.name}'"
        )
    rhs = np.einsum("ab,kab->k", matrix, tensor)
    alpha = _solve_gram(scheme, rhs)
    rebuilt = np.einsum("k,kij->ij", alpha, tensor)
    scale = max(np.linalg.norm(matrix), 1e-300)
    residual = np.linalg.norm(rebuilt - matrix) / scale
    if residual > 1e-9:
        raise OutOfSpanError(
            f"matrix is not in the intersection algebra "
            f"(relative residual {residual:.3e})",
            residual=residual,
        )
    return AlgebraElement(scheme, tuple(alpha))


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralSummary:
    """Distinct eigenvalues of a lifted element, with big-matrix
    multiplicities where known (None otherwise)."""

    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int | None, ...]
    positive_definite: bool
    admissible: bool
    min_eigenvalue: float

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["eigenvalue", "multiplicity"])
        for value, mult in zip(self.eigenvalues, self.multiplicities):
            writer.writerow([repr(value), "" if mult is None else mult])
        return out.getvalue()


def _admissibility_tolerance(coeffs: np.ndarray) -> float:
    return PD_MARGIN * max(1.0, float(np.max(np.abs(coeffs))))


def _summarize(values, multiplicities, coeffs) -> SpectralSummary:
    tol = _admissibility_tolerance(np.asarray(coeffs))
    values = tuple(float(v) for v in values)
    lo = min(values)
    return SpectralSummary(
        eigenvalues=values,
        multiplicities=tuple(multiplicities),
        positive_definite=lo > tol,
        admissible=lo >= -tol,
        min_eigenvalue=lo,
    )


def nz_eigenvalues(
    alpha0: float,
    recip: float,
    div: float,
    chain: float,
    conv: float,
    disj: float,
    n: int,
) -> tuple[float, float, float, float, float]:
    """The five eigenvalues of a symmetric directed-scheme element, valid
    for every vertex count.

    The first is the all-ones eigenvalue; the last two are the roots of a
    quadratic whose discriminant is a sum of squares, so they are always
    real.
    """
    lam1 = (
        alpha0
        + recip
        + (n - 2) * (conv + div + 2 * chain)
        + (n - 2) * (n - 3) * disj
    )
    lam2 = alpha0 - recip - conv + 2 * chain - div
    lam3 = alpha0 + recip - conv - 2 * chain - div + 2 * disj
    base = alpha0 + (n - 3) / 2.0 * (conv + div) - chain - (n - 3) * disj
    tau_sq = (
        n * (n - 2) * (conv - div) ** 2
        + (conv + div - 2 * (n - 3) * (chain - disj) - 2 * recip) ** 2
    )
    tau = math.sqrt(tau_sq)
    return (lam1, lam2, lam3, base + tau / 2.0, base - tau / 2.0)


def johnson_eigenvalues(
    alpha0: float, alpha1: float, alpha2: float, n: int
) -> tuple[float, float, float]:
    """Eigenvalues of alpha0*I + alpha1*R(adjacent) + alpha2*R(disjoint),
    with multiplicities 1, n-1 and n(n-3)/2 respectively."""
    lam0 = alpha0 + 2 * (n - 2) * alpha1 + (n - 2) * (n - 3) / 2.0 * alpha2
    lam1 = alpha0 + (n - 4) * alpha1 - (n - 3) * alpha2
    lam2 = alpha0 - 2 * alpha1 + alpha2
    return (lam0, lam1, lam2)


def eigenvalues_closed_form_nz(m: AlgebraElement) -> SpectralSummary:
    """Closed-form spectrum for a symmetric directed-scheme element."""
    scheme = m.scheme
    if not isinstance(scheme, NykampZhaoScheme):
        raise SchemeMismatchError("closed form applies to the directed scheme")
    if not m.is_symmetric:
        raise ConfigurationError(
            "closed-form eigenvalues require a symmetric element "
            "(equal chain and anti-chain coefficients)"
        )
    a = m.coeffs
    values = nz_eigenvalues(a[0], a[1], a[2], a[3], a[5], a[6], scheme.n)
    return _summarize(values, (None,) * 5, m.vector)


def eigenvalues_closed_form_johnson(m: AlgebraElement) -> SpectralSummary:
    """Closed-form spectrum with exact multiplicities for the unordered-pair
    scheme."""
    scheme = m.scheme
    if not isinstance(scheme, JohnsonScheme):
        raise SchemeMismatchError("closed form applies to the unordered-pair scheme")
    n = scheme.n
    values = johnson_eigenvalues(m.coeffs[0], m.coeffs[1], m.coeffs[2], n)
    mults = (1, n - 1, n * (n - 3) // 2)
    return _summarize(values, mults, m.vector)


def _merge_eigenvalues(values: np.ndarray, scale: float) -> list[float]:
    """Cluster near-coincident values (closed forms produce exact ties that
    floating point perturbs)."""
    tol = EIGENVALUE_MERGE_RTOL * max(1.0, scale, float(np.max(np.abs(values))))
    merged: list[list[float]] = []
    for v in np.sort(values):
        if merged and v - merged[-1][-1] <= tol:
            merged[-1].append(v)
        else:
            merged.append([v])
    return [float(np.mean(group)) for group in merged]


def spectrum_via_rho(
    m: AlgebraElement, dense_cap: int = SPECTRUM_DENSE_CAP
) -> SpectralSummary:
    """Distinct eigenvalues of the element via its small image.

    Works for any scheme with structure constants.  Multiplicities are
    filled in from a dense eigendecomposition of the lifted matrix when the
    edge count is at most ``dense_cap``, else reported as unknown.
    """
    small = rho_map(m)
    scale = max(1.0, float(np.max(np.abs(m.vector))))
    values, vectors = np.linalg.eig(small)
    if m.is_symmetric:
        if np.max(np.abs(values.imag)) > 1e-9 * scale:
            raise NumericalError(
                "complex eigenvalues from the image of a symmetric element"
            )
        cond = np.linalg.cond(vectors)
        if not np.isfinite(cond) or cond > 1e12:
            raise NumericalError(
                "image of a symmetric element appears non-diagonalizable "
                f"(eigenvector condition {cond:.2e})"
            )
    distinct = _merge_eigenvalues(values.real, scale)

    multiplicities: list[int | None]
    if m.scheme.edge_count <= dense_cap and m.is_symmetric:
        dense = lift_dense(m)
        dense_values = np.linalg.eigvalsh(dense)
        tol = 10 * EIGENVALUE_MERGE_RTOL * max(
            1.0, scale, float(np.max(np.abs(dense_values)))
        )
        multiplicities = []
        for v in distinct:
            multiplicities.append(int(np.sum(np.abs(dense_values - v) <= tol)))
        if sum(multiplicities) != m.scheme.edge_count:
            multiplicities = [None] * len(distinct)
    else:
        multiplicities = [None] * len(distinct)
    return _summarize(distinct, multiplicities, m.vector)


def lift_dense(m: AlgebraElement) -> np.ndarray:
    """E x E dense matrix sum_k alpha_k R(k); for tests, diagnostics and the
    dense sampling fallback."""
    table = m.scheme.relation_table()
    out = np.zeros(table.shape, dtype=np.float64)
    for k, alpha in enumerate(m.coeffs):
        if alpha != 0.0:
            out += alpha * (table == k)
    return out


def spectral_summary(m: AlgebraElement) -> SpectralSummary:
    """Best available spectrum: closed form where known, image otherwise."""
    if isinstance(m.scheme, NykampZhaoScheme) and m.is_symmetric:
        return eigenvalues_closed_form_nz(m)
    if isinstance(m.scheme, JohnsonScheme):
        return eigenvalues_closed_form_johnson(m)
    return spectrum_via_rho(m)


def require_admissible(m: AlgebraElement) -> SpectralSummary:
    """Raise ``AdmissibilityError`` unless the element is a valid covariance
    (symmetric, eigenvalues nonnegative up to the noise margin)."""
    if not m.is_symmetric:
        raise AdmissibilityError("covariance element must be symmetric")
    summary = spectral_summary(m)
    if not summary.admissible:
        offending = [v for v in summary.eigenvalues if v < 0]
        raise AdmissibilityError(
            f"covariance is not positive semidefinite; "
            f"negative eigenvalue(s) {offending}",
            eigenvalues=offending,
        )
    return summary


# ---------------------------------------------------------------------------
# Square roots
# ---------------------------------------------------------------------------


def sqrt_in_algebra(cov: AlgebraElement) -> AlgebraElement:
    """Coefficients of the positive-semidefinite square root of an
    admissible element, computed entirely at (d+1) x (d+1) size.

    The returned element beta satisfies multiply_elements(beta, beta) == cov
    to high accuracy and lifts to the PSD square root of the dense
    covariance.  Eigenvalues within the admissibility margin of zero take
    square root zero, so boundary covariances (an all-ones eigenvalue
    balanced to zero, say) are accepted.
    """
    require_admissible(cov)
    scheme = cov.scheme
    tensor = intersection_tensor(scheme)
    varsigma = rho_map(cov)

    values, vectors = np.linalg.eig(varsigma)
    cond = np.linalg.cond(vectors)
    if np.isfinite(cond) and cond < _CONDITION_LIMIT:
        roots = np.sqrt(np.clip(values.real, 0.0, None)).astype(complex)
        small_sqrt = (vectors * roots) @ np.linalg.inv(vectors)
        if np.max(np.abs(small_sqrt.imag)) > 1e-8 * max(
            1.0, np.max(np.abs(small_sqrt.real))
        ):
            beta = _sqrt_by_newton(cov, tensor)
        else:
            rhs = np.einsum("ab,kab->k", small_sqrt.real, tensor)
            beta = _solve_gram(scheme, rhs)
    else:
        beta = _sqrt_by_newton(cov, tensor)

    result = AlgebraElement(scheme, tuple(beta)).symmetrized()
    residual = np.max(
        np.abs(multiply_elements(result, result).vector - cov.vector)
    )
    scale = max(1.0, float(np.max(np.abs(cov.vector))))
    if residual > 1e-6 * scale:
        raise NumericalError(
            f"square-root residual {residual:.3e} is out of tolerance"
        )
    return result


def _sqrt_by_newton(cov: AlgebraElement, tensor: np.ndarray) -> np.ndarray:
    """Solve beta * beta = alpha by Newton iteration in coefficient space.

    Start from the first-order expansion around a multiple of the identity:
    the identity coefficients start at sqrt(alpha_id) and every other
    coefficient at alpha_k / (2 sqrt(alpha_id)).
    """
    scheme = cov.scheme
    alpha = cov.vector
    idents = list(scheme.identity_relations)
    a0 = float(np.mean([alpha[k] for k in idents]))
    if a0 <= 0:
        raise AdmissibilityError(
            "identity coefficient must be positive for the square root"
        )
    beta = alpha / (2.0 * math.sqrt(a0))
    for k in idents:
        beta[k] = math.sqrt(max(alpha[k], 0.0))

    scale = max(1.0, float(np.max(np.abs(alpha))))
    for _ in range(100):
        square = np.einsum("k,kij,j->i", beta, tensor, beta)
        f = square - alpha
        if np.max(np.abs(f)) <= 1e-14 * scale:
            return beta
        # d(square)_i / d(beta_m) = sum_j beta_j (rho[m][i][j] + rho[j][i][m])
        jac = np.einsum("mij,j->im", tensor, beta) + np.einsum(
            "jim,j->im", tensor, beta
        )
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular Jacobian in square-root iteration: {exc}")
        beta = beta - step
    raise NumericalError("square-root iteration did not converge")


def johnson_sqrt_closed_form(
    alpha0: float,
    alpha1: float,
    alpha2: float,
    n: int,
    signs: tuple[int, int, int] = (1, 1, 1),
) -> AlgebraElement:
    """Explicit square-root branch for the unordered-pair scheme.

    The three eigenvalues depend linearly on the coefficients, so equating
    eigenvalues of beta-squared with independently signed square roots of
    the target eigenvalues gives a 3x3 linear system (invertible for
    n > 2).  All-plus signs reproduce the PSD branch of
    ``sqrt_in_algebra``; the eight sign vectors enumerate every square root
    inside the algebra.
    """
    lams = johnson_eigenvalues(alpha0, alpha1, alpha2, n)
    if any(lam < 0 for lam in lams):
        raise AdmissibilityError(
            f"negative eigenvalue(s) {[l for l in lams if l < 0]} "
            "have no real square root",
            eigenvalues=[l for l in lams if l < 0],
        )
    system = np.array(
        [
            [1.0, 2.0 * (n - 2), (n - 2) * (n - 3) / 2.0],
            [1.0, float(n - 4), -float(n - 3)],
            [1.0, -2.0, 1.0],
        ]
    )
    rhs = np.array([s * math.sqrt(lam) for s, lam in zip(signs, lams)])
    beta = np.linalg.solve(system, rhs)
    return AlgebraElement(JohnsonScheme(n), tuple(beta))


# ---------------------------------------------------------------------------
# All-ones eigenvalue balancing
# ---------------------------------------------------------------------------


def all_ones_eigenvalues(m: AlgebraElement) -> np.ndarray:
    """Row sums of the lifted matrix, one per identity class.

    When all entries coincide, the all-ones vector is an eigenvector with
    that eigenvalue."""
    vals = valencies(m.scheme)  # (d+1, #identity classes)
    return m.vector @ vals


def balance_disjoint(cov: AlgebraElement, target: float) -> AlgebraElement:
    """Retune the disjoint coefficient(s) so the all-ones vector is an
    eigenvector with the given eigenvalue.

    Without this, the lifted row sums grow with the vertex count and single
    realizations drift to very sparse or very dense graphs.  Supported for
    the three schemes with a dedicated disjoint-like coefficient per
    identity class.
    """
    scheme = cov.scheme
    if isinstance(scheme, (NykampZhaoScheme, JohnsonScheme)):
        solved = _solve_row_sum(cov, target, "disjoint", class_index=0)
        return cov.replace(disjoint=solved)
    if isinstance(scheme, DistinguishedVertexScheme):
        # distinguished rows see d21; solve it first, mirror onto d12 (the
        # covariance stays symmetric), then fix the ordinary rows via d11.
        work = cov
        d21 = _solve_row_sum(work, target, "d21", class_index=1)
        work = work.replace(d21=d21, d12=d21)
        d11 = _solve_row_sum(work, target, "d11", class_index=0)
        return work.replace(d11=d11)
    raise ConfigurationError(
        f"balancing is not defined for scheme '{scheme.name}'"
    )


def _solve_row_sum(
    cov: AlgebraElement, target: float, name: str, class_index: int
) -> float:
    vals = valencies(cov.scheme)[:, class_index].astype(np.float64)
    k = _relation_id(cov.scheme, name)
    vector = cov.vector
    rest = float(vector @ vals - vector[k] * vals[k])
    if vals[k] == 0:
        raise ConfigurationError(
            f"relation {name!r} has zero valency; cannot balance"
        )
    return (target - rest) / float(vals[k])
