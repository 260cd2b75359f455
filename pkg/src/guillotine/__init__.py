"""Guillotine-product calculus for two-dimensional lattice Markov processes.

Submodules
----------
tensor
    Boundary-indexed tensors of rectangles and the two gluing products.
lattice
    Face weights, partition functions, exact laws, marginals, observables.
rope
    Matrix-product boundary weights and their restriction to sub-rectangles.
eigen
    Perron-Frobenius data and eigen-equation verifiers; solved models.
gibbs
    Consistent boundary families, free energy and line correlations.
io, cli
    JSON model documents and the command-line driver.
"""
from .errors import (
    ConvergenceError,
    EnumerationBoundError,
    GuillotineError,
    MemoryCapError,
    ModelFormatError,
    ReducibleMatrixError,
    ShapeMismatchError,
    ZeroPartitionError,
)
from .tensor import (
    GuillotineTensor,
    Shape,
    StateSpaces,
    dihedral,
    m_sn,
    m_we,
    pair_boundary,
    surface_power,
    tensor_from_fn,
)
from .lattice import (
    FaceWeight,
    RectLaw,
    exact_law,
    expectation_with_observables,
    gauge_transform,
    hv_face_weight,
    marginal_boundary_weight,
    oblique_face_weight,
    partition_tensor,
    partition_tensor_bruteforce,
    random_face_weight,
)
from .rope import (
    RopeRep,
    direct_sum,
    eval_tensor,
    evaluate,
    from_factorized,
    from_hidden_markov,
    restrict,
    tensor_product,
)
from .eigen import (
    EigenStructure,
    build_hv_eigenstructure,
    build_oblique_eigenstructure,
    oblique_pf_data,
    pf_eigen,
    verify_corner_eigen,
    verify_eigenstructure,
    verify_fullplane_eigen,
    verify_halfstrip_eigen,
)
from .gibbs import (
    BoundaryFamily,
    check_consistency,
    correlation_kernel,
    correlation_length,
    free_energy,
    marginal_segment_law,
    one_point,
    partition_closed_form,
    two_point,
)

__version__ = "0.1.0"
