"""Second-order random networks through coherent-configuration algebra.

Library layout:

* :mod:`sonets.schemes`  -- edge sets, pair classifiers, axiom checks and
  brute-forced structure constants for the built-in schemes.
* :mod:`sonets.algebra`  -- the fixed-size intersection algebra: spectra,
  positive-definiteness, and exact matrix square roots independent of the
  network size.
* :mod:`sonets.sampling` -- matrix-free Gaussian sampling and thresholding.
* :mod:`sonets.stats`    -- motif censuses and degree histograms.
* :mod:`sonets.cli`      -- the ``sonets`` command-line tool.
"""

__version__ = "0.1.0"

from .algebra import (
    AlgebraElement,
    SpectralSummary,
    balance_disjoint,
    eigenvalues_closed_form_johnson,
    eigenvalues_closed_form_nz,
    element,
    element_from_map,
    gram_matrix,
    identity_element,
    johnson_sqrt_closed_form,
    multiply_elements,
    recover_coefficients,
    rho_map,
    spectrum_via_rho,
    sqrt_in_algebra,
)
from .errors import (
    AdmissibilityError,
    AxiomViolationError,
    CapExceededError,
    ConfigurationError,
    NumericalError,
    OutOfSpanError,
    SchemeMismatchError,
    SonetsError,
)
from .sampling import (
    GraphSample,
    GraphSampler,
    SamplerConfig,
    sample_ensemble,
    sample_graph,
    structured_matvec,
    threshold_for_probability,
)
from .schemes import (
    AxiomReport,
    CustomScheme,
    DistinguishedVertexScheme,
    JohnsonLineGraphScheme,
    JohnsonScheme,
    NykampZhaoScheme,
    Scheme,
    StructureConstants,
    classify_pair,
    compute_structure_constants,
    dense_relation_matrix,
    enumerate_edges,
    make_scheme,
    verify_axioms,
)
from .stats import (
    DegreeHistogram,
    MotifCensus,
    ReciprocalSummary,
    degree_histogram,
    expected_counts_independent,
    motif_census,
)

__all__ = [name for name in dir() if not name.startswith("_")]
