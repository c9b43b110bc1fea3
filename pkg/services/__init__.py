"""Services module."""
from services.combinatorics_service import (
    EulerianTable, AlphaCoefficients, eulerian_number, eulerian_by_descents, build_eulerian_table,
    eulerian_poly, stirling_second, polylog_neg, polylog_neg_series, polylog_neg_stirling,
    alpha_coefficients, alpha_from_newton, b_coefficient, b_coefficient_exact, b_coefficient_partition,
    verify_worpitzky, verify_delta_identity
)
from services.matrix_service import (
    HermitianMatrix, AssociatedGraphs, GershgorinData, EdgePhases, load_matrix, load_matrix_file,
    dump_matrix, hermitian_from_array, diagonal_matrix, random_hermitian, eig_hermitian, eigensystem,
    RescaledMatrix, gap, rescale_to_window, trace_powers, counting_exact, build_graphs
)
from services.trace_one_service import (
    CutoffPolicy, CountingResult, FourierTestFunction, make_cutoff_policy, smooth_count_I,
    smooth_density_I, osc_count_I_doublesum, osc_count_I_polylog, counting_I, SpectralAverage, spectral_average,
    semicircle_counting, semicircle_exact
)
from services.scattering_service import (
    VertexScattering, EvolutionOperatorII, vertex_scattering, assemble_S_II, spectral_det, zeta_H,
    factorization_residual, smooth_count_II, osc_count_II, osc_density_II, counting_II, markov_matrix,
    closed_form_interval, closed_form_two_star, two_star_roots, functional_equation_residual
)
from services.orbit_service import (
    Orbit, OrbitCatalog, enumerate_primitive_orbits, orbit_weight_I, trace_from_orbits, osc_I_orbits,
    orbit_weight_II, osc_II_orbits
)
from services.walk_service import (
    WalkState, JacobiChain, quantum_walk, classical_walk, diagonal_decomposition, jacobi_vertex_scattering,
    endpoint_phase, transfer_matrix, anderson_secular, anderson_roots, cauchy_phase_sampler
)
from services.identity_service import run_identity_suite
from services.export_service import export_to_csv, export_to_json, export_eigenvalues
from services.archive_service import record_run, record_identity_checks, get_run_history
