"""Intersection-algebra tests: the homomorphism, closed-form spectra, the
Gram pull-back, square roots, and eigenvalue balancing."""

import numpy as np
import pytest

from sonets import (
    AdmissibilityError,
    AlgebraElement,
    OutOfSpanError,
    SchemeMismatchError,
    balance_disjoint,
    eigenvalues_closed_form_johnson,
    eigenvalues_closed_form_nz,
    element,
    element_from_map,
    gram_matrix,
    identity_element,
    johnson_sqrt_closed_form,
    make_scheme,
    multiply_elements,
    recover_coefficients,
    rho_map,
    spectrum_via_rho,
    sqrt_in_algebra,
    structured_matvec,
)
from sonets.algebra import (
    intersection_tensor,
    johnson_eigenvalues,
    lift_dense,
    nz_eigenvalues,
    nz_gram_closed_form,
)

ALL_SCHEMES_MIN_N = [
    ("johnson", 4),
    ("nykamp-zhao", 5),
    ("distinguished-vertex", 5),
    ("johnson-line-graph", 6),
]


def random_symmetric(scheme, rng, spread=0.1, identity=1.0):
    """A random symmetric element with unit-ish identity coefficients."""
    coeffs = np.zeros(scheme.num_relations)
    for k in scheme.identity_relations:
        coeffs[k] = identity
    for k in range(scheme.num_relations):
        if k in scheme.identity_relations:
            continue
        kt = scheme.adjoint(k)
        if coeffs[k] == 0 and coeffs[kt] == 0:
            value = rng.normal() * spread
            coeffs[k] = coeffs[kt] = value
    return element(scheme, coeffs)


def random_admissible(scheme, rng, spread=0.1):
    """Rejection-sample a strictly positive-definite symmetric element."""
    from sonets.algebra import spectral_summary

    while True:
        candidate = random_symmetric(scheme, rng, spread=spread)
        if spectral_summary(candidate).positive_definite:
            return candidate


# ---------------------------------------------------------------------------
# the homomorphism
# ---------------------------------------------------------------------------


def test_rho_of_identity_element_is_identity_matrix():
    for name, n in ALL_SCHEMES_MIN_N:
        scheme = make_scheme(name, n)
        image = rho_map(identity_element(scheme))
        assert np.array_equal(image, np.eye(scheme.num_relations))


def test_rho_of_nz_disjoint_basis_element():
    n = 9
    scheme = make_scheme("nykamp-zhao", n)
    coeffs = np.zeros(7)
    coeffs[scheme.DISJOINT] = 1.0
    image = rho_map(element(scheme, coeffs))
    # the expansion of disjoint * disjoint sits in the last column
    expected_last_column = [
        (n - 3) * (n - 2),
        (n - 3) * (n - 2),
        (n - 4) * (n - 3),
        (n - 4) * (n - 3),
        (n - 4) * (n - 3),
        (n - 4) * (n - 3),
        (n - 5) * (n - 4),
    ]
    assert np.array_equal(image[:, 6], expected_last_column)
    # acting on the identity leaves the basis element itself
    assert np.array_equal(image[:, 0], np.eye(7)[6])


def test_rho_of_johnson_adjacent_basis_element():
    n = 7
    scheme = make_scheme("johnson", n)
    image = rho_map(element(scheme, (0.0, 1.0, 0.0)))
    expected_products = np.array(  # row j: coefficients of adjacent * R(j)
        [
            [0, 1, 0],
            [2 * (n - 2), n - 2, 4],
            [0, n - 3, 2 * (n - 4)],
        ]
    )
    assert np.array_equal(image, expected_products.T)


@pytest.mark.parametrize("name,n", ALL_SCHEMES_MIN_N)
def test_rho_is_an_algebra_homomorphism(name, n):
    scheme = make_scheme(name, n)
    tensor = intersection_tensor(scheme)
    d1 = scheme.num_relations
    for i in range(d1):
        for j in range(d1):
            product = tensor[i] @ tensor[j]
            expansion = np.einsum("k,kab->ab", tensor[i, :, j], tensor)
            assert np.array_equal(product, expansion), (name, i, j)


def test_rho_injective_via_round_trip():
    rng = np.random.default_rng(11)
    scheme = make_scheme("nykamp-zhao", 8)
    for _ in range(20):
        coeffs = rng.normal(size=7)
        recovered = recover_coefficients(rho_map(element(scheme, coeffs)), scheme)
        assert np.max(np.abs(recovered.vector - coeffs)) < 1e-12


# ---------------------------------------------------------------------------
# multiplication
# ---------------------------------------------------------------------------


def test_identity_is_neutral():
    rng = np.random.default_rng(0)
    for name, n in ALL_SCHEMES_MIN_N:
        scheme = make_scheme(name, n)
        a = element(scheme, rng.normal(size=scheme.num_relations))
        e = identity_element(scheme)
        assert np.allclose(multiply_elements(e, a).vector, a.vector)
        assert np.allclose(multiply_elements(a, e).vector, a.vector)


def test_chain_times_anti_chain_law():
    n = 9
    scheme = make_scheme("nykamp-zhao", n)
    chain = identity_element(scheme).replace(identity=0.0, chain=1.0)
    anti = identity_element(scheme).replace(identity=0.0, **{"anti-chain": 1.0})
    product = multiply_elements(chain, anti)
    expected = np.zeros(7)
    expected[scheme.IDENTITY] = n - 2
    expected[scheme.CONVERGENT] = n - 3
    assert np.allclose(product.vector, expected)
    # the algebra is not commutative: the reversed product converges to a
    # divergent term instead
    reverse = multiply_elements(anti, chain)
    expected_rev = np.zeros(7)
    expected_rev[scheme.IDENTITY] = n - 2
    expected_rev[scheme.DIVERGENT] = n - 3
    assert np.allclose(reverse.vector, expected_rev)


def test_multiplication_is_associative():
    rng = np.random.default_rng(1)
    for name, n in ALL_SCHEMES_MIN_N:
        scheme = make_scheme(name, n)
        for _ in range(5):
            a, b, c = (
                element(scheme, rng.normal(size=scheme.num_relations))
                for _ in range(3)
            )
            left = multiply_elements(multiply_elements(a, b), c).vector
            right = multiply_elements(a, multiply_elements(b, c)).vector
            assert np.max(np.abs(left - right)) < 1e-9 * max(1, np.max(np.abs(left)))


def test_multiplication_matches_dense_squaring():
    rng = np.random.default_rng(2)
    scheme = make_scheme("nykamp-zhao", 6)
    beta = random_symmetric(scheme, rng)
    via_algebra = multiply_elements(beta, beta)
    dense_square = lift_dense(beta) @ lift_dense(beta)
    assert np.max(np.abs(lift_dense(via_algebra) - dense_square)) < 1e-10


def test_symmetric_square_satisfies_coefficient_system():
    # the six coupled quadratics relating a symmetric element to its square
    rng = np.random.default_rng(3)
    for n in (6, 9):
        scheme = make_scheme("nykamp-zhao", n)
        b0, b1, b2, b3, b4, b5 = rng.normal(size=6)
        beta = element(scheme, (b0, b1, b2, b3, b3, b4, b5))
        alpha = multiply_elements(beta, beta).vector
        assert np.isclose(
            alpha[0],
            b0**2 + b1**2 + (n - 2) * (b2**2 + 2 * b3**2 + b4**2)
            + (n - 3) * (n - 2) * b5**2,
        )
        assert np.isclose(
            alpha[1],
            2 * b0 * b1 + (n - 2) * (2 * b2 * b3 + 2 * b3 * b4)
            + (n - 2) * (n - 3) * b5**2,
        )
        assert np.isclose(
            alpha[2],
            2 * b0 * b2 + 2 * b1 * b3 + (n - 3) * b3**2 + 2 * b3 * b4
            + 2 * (n - 3) * b3 * b5 + 2 * (n - 3) * b4 * b5
            + (n - 3) * (n - 4) * b5**2 + (n - 3) * b2**2,
        )
        assert np.isclose(
            alpha[3],
            b1 * b2 + 2 * b0 * b3 + (n - 3) * b2 * b3 + b3**2 + b1 * b4
            + b2 * b4 + (n - 3) * b3 * b4 + (n - 3) * b2 * b5
            + 2 * (n - 3) * b3 * b5 + (n - 3) * b4 * b5
            + (n - 3) * (n - 4) * b5**2,
        )
        assert np.isclose(alpha[3], alpha[4])
        assert np.isclose(
            alpha[5],
            2 * b1 * b3 + 2 * b2 * b3 + (n - 3) * b3**2 + 2 * b0 * b4
            + (n - 3) * b4**2 + 2 * (n - 3) * b2 * b5
            + 2 * (n - 3) * b3 * b5 + (n - 3) * (n - 4) * b5**2,
        )
        assert np.isclose(
            alpha[6],
            2 * b2 * b3 + 2 * b3**2 + 2 * b2 * b4 + 2 * b3 * b4
            + 2 * b0 * b5 + 2 * b1 * b5 + 2 * (n - 4) * b2 * b5
            + 4 * (n - 4) * b3 * b5 + 2 * (n - 4) * b4 * b5
            + (n - 4) * (n - 5) * b5**2,
        )


def test_multiply_rejects_scheme_mismatch():
    a = identity_element(make_scheme("nykamp-zhao", 6))
    b = identity_element(make_scheme("nykamp-zhao", 7))
    with pytest.raises(SchemeMismatchError):
        multiply_elements(a, b)


# ---------------------------------------------------------------------------
# closed-form spectra
# ---------------------------------------------------------------------------


def test_nz_identity_spectrum():
    scheme = make_scheme("nykamp-zhao", 100)
    summary = eigenvalues_closed_form_nz(identity_element(scheme))
    assert np.allclose(summary.eigenvalues, 1.0)
    assert summary.positive_definite


def test_nz_reciprocal_spectrum_values():
    scheme = make_scheme("nykamp-zhao", 100)
    cov = element_from_map(scheme, {"recip": 0.75})
    values = eigenvalues_closed_form_nz(cov).eigenvalues
    assert np.isclose(values[1], 0.25)  # 1 - 0.75
    assert np.isclose(values[2], 1.75)  # 1 + 0.75


def test_nz_inadmissible_reciprocal():
    scheme = make_scheme("nykamp-zhao", 100)
    cov = element_from_map(scheme, {"recip": 1.5})
    summary = eigenvalues_closed_form_nz(cov)
    assert np.isclose(min(summary.eigenvalues), -0.5)
    assert not summary.admissible


def test_nz_closed_form_matches_dense_with_five_distinct_values():
    rng = np.random.default_rng(7)
    scheme = make_scheme("nykamp-zhao", 6)
    for _ in range(20):
        cov = random_symmetric(scheme, rng, identity=1.0 + rng.normal() * 0.1)
        values = np.sort(eigenvalues_closed_form_nz(cov).eigenvalues)
        dense_values = np.linalg.eigvalsh(lift_dense(cov))
        distinct = np.unique(np.round(dense_values, 9))
        assert len(distinct) == 5
        for v in values:
            assert np.min(np.abs(dense_values - v)) < 1e-10


def test_nz_closed_form_rejects_asymmetric():
    scheme = make_scheme("nykamp-zhao", 6)
    lopsided = identity_element(scheme).replace(chain=0.3)
    from sonets import ConfigurationError

    with pytest.raises(ConfigurationError, match="symmetric"):
        eigenvalues_closed_form_nz(lopsided)


def test_nz_quadratic_pair_is_always_real():
    rng = np.random.default_rng(8)
    for _ in range(200):
        a0, ar, adv, ach, acv, adj = rng.normal(size=6) * 2
        values = nz_eigenvalues(a0, ar, adv, ach, acv, adj, n=int(rng.integers(5, 40)))
        assert all(np.isfinite(values))  # tau^2 is a sum of squares


def test_johnson_small_case_formulas():
    # four-vertex case: 1 + 4a1 + a2 (simple), 1 + 0a1 - 1a2, 1 - 2a1 + a2
    a1, a2 = 0.37, -0.21
    lam = johnson_eigenvalues(1.0, a1, a2, 4)
    assert np.isclose(lam[0], 1 + 4 * a1 + a2)
    assert np.isclose(lam[1], 1 - a2)
    assert np.isclose(lam[2], 1 - 2 * a1 + a2)
    scheme = make_scheme("johnson", 4)
    dense_values = np.linalg.eigvalsh(lift_dense(element(scheme, (1.0, a1, a2))))
    mult = {v: int(np.sum(np.abs(dense_values - v) < 1e-9)) for v in lam}
    assert mult[lam[0]] == 1 and mult[lam[1]] == 3 and mult[lam[2]] == 2


def test_johnson_constant_element_spectrum():
    scheme = make_scheme("johnson", 9)
    summary = eigenvalues_closed_form_johnson(element(scheme, (0.7, 0.0, 0.0)))
    assert np.allclose(summary.eigenvalues, 0.7)


def test_johnson_multiplicities_against_dense_oracle():
    n = 6
    scheme = make_scheme("johnson", n)
    cov = balance_disjoint(element_from_map(scheme, {"adjacent": 0.2}), 1.0)
    summary = eigenvalues_closed_form_johnson(cov)
    assert summary.multiplicities == (1, n - 1, n * (n - 3) // 2)
    assert np.isclose(summary.eigenvalues[0], 1.0)  # balanced target
    dense_values = np.linalg.eigvalsh(lift_dense(cov))
    for value, mult in zip(summary.eigenvalues, summary.multiplicities):
        assert int(np.sum(np.abs(dense_values - value) < 1e-9)) == mult


# ---------------------------------------------------------------------------
# spectra through the image
# ---------------------------------------------------------------------------


def test_spectrum_via_rho_matches_closed_form_at_large_n():
    rng = np.random.default_rng(9)
    scheme = make_scheme("nykamp-zhao", 100)
    for _ in range(10):
        cov = random_symmetric(scheme, rng, spread=0.03)
        closed = np.sort(eigenvalues_closed_form_nz(cov).eigenvalues)
        via_rho = spectrum_via_rho(cov).eigenvalues
        for v in closed:
            assert np.min(np.abs(np.asarray(via_rho) - v)) < 1e-9


def test_spectrum_via_rho_identity():
    scheme = make_scheme("johnson-line-graph", 6)
    summary = spectrum_via_rho(element(scheme, [0.4] + [0.0] * 11))
    assert len(summary.eigenvalues) == 1
    assert np.isclose(summary.eigenvalues[0], 0.4, rtol=0, atol=1e-12)
    assert summary.multiplicities == (60,)


def test_distinguished_vertex_has_five_distinct_eigenvalues():
    rng = np.random.default_rng(10)
    scheme = make_scheme("distinguished-vertex", 100)
    for _ in range(5):
        cov = random_symmetric(scheme, rng, spread=0.05)
        summary = spectrum_via_rho(cov)
        assert len(summary.eigenvalues) <= 9
        assert len(summary.eigenvalues) == 5


def test_spectrum_multiplicities_sum_to_edge_count():
    rng = np.random.default_rng(12)
    for name, n in ALL_SCHEMES_MIN_N:
        scheme = make_scheme(name, n)
        cov = random_symmetric(scheme, rng)
        summary = spectrum_via_rho(cov)
        assert sum(summary.multiplicities) == scheme.edge_count


# ---------------------------------------------------------------------------
# square roots
# ---------------------------------------------------------------------------


def test_sqrt_of_identity_is_identity():
    for name, n in ALL_SCHEMES_MIN_N:
        scheme = make_scheme(name, n)
        beta = sqrt_in_algebra(identity_element(scheme))
        assert np.allclose(beta.vector, identity_element(scheme).vector, atol=1e-12)


@pytest.mark.parametrize("name,n", ALL_SCHEMES_MIN_N)
def test_sqrt_square_round_trip(name, n):
    rng = np.random.default_rng(13)
    scheme = make_scheme(name, n)
    for _ in range(10):
        cov = random_admissible(scheme, rng)
        beta = sqrt_in_algebra(cov)
        assert beta.is_symmetric
        residual = np.max(np.abs(multiply_elements(beta, beta).vector - cov.vector))
        assert residual < 1e-10


def test_sqrt_lift_matches_dense_psd_root():
    rng = np.random.default_rng(14)
    scheme = make_scheme("nykamp-zhao", 6)
    for _ in range(10):
        cov = random_admissible(scheme, rng)
        beta = sqrt_in_algebra(cov)
        dense = lift_dense(cov)
        values, vectors = np.linalg.eigh(dense)
        dense_root = (vectors * np.sqrt(np.clip(values, 0, None))) @ vectors.T
        assert np.max(np.abs(lift_dense(beta) - dense_root)) < 1e-8


def test_sqrt_accepts_balanced_boundary_covariance():
    # balancing the all-ones eigenvalue to zero puts the covariance on the
    # PSD boundary; the square root must still exist (root zero on that line)
    scheme = make_scheme("nykamp-zhao", 100)
    cov = balance_disjoint(element_from_map(scheme, {"recip": 0.75}), 0.0)
    beta = sqrt_in_algebra(cov)
    residual = np.max(np.abs(multiply_elements(beta, beta).vector - cov.vector))
    assert residual < 1e-10


def test_sqrt_rejects_indefinite_covariance():
    scheme = make_scheme("nykamp-zhao", 100)
    cov = element_from_map(scheme, {"recip": 1.5})
    with pytest.raises(AdmissibilityError) as exc_info:
        sqrt_in_algebra(cov)
    assert any(v < 0 for v in exc_info.value.eigenvalues)


def test_johnson_sqrt_closed_form_trivial_and_signs():
    beta = johnson_sqrt_closed_form(1.0, 0.0, 0.0, 6)
    assert np.allclose(beta.vector, (1.0, 0.0, 0.0), atol=1e-14)
    plus = johnson_sqrt_closed_form(1.0, 0.2, -0.05, 6)
    minus = johnson_sqrt_closed_form(1.0, 0.2, -0.05, 6, signs=(-1, -1, -1))
    assert np.allclose(minus.vector, -plus.vector)


def test_johnson_sqrt_closed_form_solves_quadratic_system():
    n = 6
    a0, a1 = 1.0, 0.2
    a2 = -2 * (n - 2) * a1 / ((n - 2) * (n - 3) / 2)  # top eigenvalue pinned at a0
    c2 = lambda m: m * (m - 1) / 2  # noqa: E731
    count = 0
    for s0 in (1, -1):
        for s1 in (1, -1):
            for s2 in (1, -1):
                b0, b1, b2 = johnson_sqrt_closed_form(
                    a0, a1, a2, n, signs=(s0, s1, s2)
                ).coeffs
                eq1 = b0**2 + 2 * (n - 2) * b1**2 + c2(n - 2) * b2**2
                eq2 = (
                    (n - 2) * b1**2
                    + 2 * b0 * b1
                    + 2 * (n - 3) * b1 * b2
                    + c2(n - 3) * b2**2
                )
                eq3 = (
                    4 * b1**2
                    + 2 * b0 * b2
                    + 4 * (n - 4) * b1 * b2
                    + c2(n - 4) * b2**2
                )
                assert abs(eq1 - a0) < 1e-12
                assert abs(eq2 - a1) < 1e-12
                assert abs(eq3 - a2) < 1e-12
                count += 1
    assert count == 8  # eight real square roots inside the algebra


def test_johnson_sqrt_closed_form_matches_general_path():
    scheme = make_scheme("johnson", 100)
    cov = balance_disjoint(element_from_map(scheme, {"adjacent": 0.2}), 1.0)
    via_gram = sqrt_in_algebra(cov)
    via_linear = johnson_sqrt_closed_form(*cov.coeffs, scheme.n)
    assert np.max(np.abs(via_gram.vector - via_linear.vector)) < 1e-12


def test_johnson_sqrt_closed_form_rejects_negative_eigenvalue():
    with pytest.raises(AdmissibilityError):
        johnson_sqrt_closed_form(1.0, 0.9, 0.0, 6)


# ---------------------------------------------------------------------------
# Gram matrix and coefficient recovery
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(5, 13))
def test_nz_gram_matrix_closed_form(n):
    computed = gram_matrix(make_scheme("nykamp-zhao", n))
    assert np.array_equal(computed.astype(np.int64), nz_gram_closed_form(n))


def test_nz_gram_first_row_values():
    gram = nz_gram_closed_form(10)
    assert gram[0, 0] == 7
    assert gram[0, 1] == 1
    assert gram[0, 2] == 3 * 10 - 10
    assert gram[6, 6] == 7 * 10**4 - 94 * 10**3 + 499 * 10**2 - 1232 * 10 + 1186


def test_johnson_gram_is_spd():
    gram = gram_matrix(make_scheme("johnson", 5))
    assert np.array_equal(gram, gram.T)
    assert np.all(np.linalg.eigvalsh(gram.astype(float)) > 0)


def test_recover_basis_element():
    scheme = make_scheme("nykamp-zhao", 8)
    target = rho_map(element(scheme, np.eye(7)[scheme.CHAIN]))
    recovered = recover_coefficients(target, scheme)
    assert np.max(np.abs(recovered.vector - np.eye(7)[scheme.CHAIN])) < 1e-13


def test_recover_random_round_trip():
    rng = np.random.default_rng(15)
    scheme = make_scheme("nykamp-zhao", 50)
    coeffs = rng.normal(size=7)
    recovered = recover_coefficients(rho_map(element(scheme, coeffs)), scheme)
    assert np.max(np.abs(recovered.vector - coeffs)) < 1e-12


def test_recover_rejects_out_of_span_matrix():
    scheme = make_scheme("nykamp-zhao", 8)
    with pytest.raises(OutOfSpanError):
        recover_coefficients(np.ones((7, 7)), scheme)


# ---------------------------------------------------------------------------
# balancing the all-ones eigenvalue
# ---------------------------------------------------------------------------


def test_balance_nz_example_value():
    scheme = make_scheme("nykamp-zhao", 100)
    cov = balance_disjoint(element_from_map(scheme, {"recip": 0.75}), 0.0)
    assert np.isclose(cov.coefficient("disjoint"), -1.75 / (98 * 97), rtol=0, atol=1e-18)
    # the all-ones vector is an eigenvector of the lifted matrix with
    # eigenvalue zero
    ones = np.ones(scheme.edge_count)
    image = structured_matvec(scheme, cov, ones)
    assert np.max(np.abs(image)) < 1e-12


def test_balance_johnson_trivial_and_example():
    scheme = make_scheme("johnson", 100)
    plain = balance_disjoint(element_from_map(scheme, {"adjacent": 0.0}), 1.0)
    assert plain.coefficient("disjoint") == 0.0
    cov = balance_disjoint(element_from_map(scheme, {"adjacent": 0.2}), 0.0)
    assert np.isclose(cov.coefficient("disjoint"), -(1 + 39.2) / 4753)
    assert np.isclose(eigenvalues_closed_form_johnson(cov).eigenvalues[0], 0.0)


def test_balance_distinguished_vertex_row_sums():
    scheme = make_scheme("distinguished-vertex", 6)
    cov = element_from_map(scheme, {"a11": 0.2, "i11": 1.0, "i22": 1.0})
    balanced = balance_disjoint(cov, 0.0)
    row_sums = lift_dense(balanced) @ np.ones(scheme.edge_count)
    assert np.max(np.abs(row_sums)) < 1e-12
    balanced_to_two = balance_disjoint(cov, 2.0)
    row_sums = lift_dense(balanced_to_two) @ np.ones(scheme.edge_count)
    assert np.allclose(row_sums, 2.0)


def test_balance_unsupported_scheme():
    from sonets import ConfigurationError

    scheme = make_scheme("johnson-line-graph", 6)
    with pytest.raises(ConfigurationError):
        balance_disjoint(identity_element(scheme), 0.0)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def test_element_json_round_trip():
    scheme = make_scheme("nykamp-zhao", 12)
    cov = element_from_map(scheme, {"recip": 0.3, "conv": -0.05})
    rebuilt = AlgebraElement.from_json(cov.to_json())
    assert rebuilt.scheme == scheme
    assert rebuilt.coeffs == cov.coeffs


def test_spectrum_csv_export():
    scheme = make_scheme("johnson", 6)
    summary = eigenvalues_closed_form_johnson(identity_element(scheme))
    text = summary.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "eigenvalue,multiplicity"
    assert len(lines) == 4
