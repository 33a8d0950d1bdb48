#pragma once

#include <span>
#include <utility>
#include <vector>

#include "obstacle/fields.hpp"
#include "obstacle/mesh.hpp"
#include "obstacle/sparse.hpp"

namespace obstacle {

/// Bound-constrained quadratic program
///   min 1/2 w^T K w - b^T w,  w_i >= lower_i at free nodes,
/// with fixed values at the remaining nodes (Dirichlet data, and zero at
/// nodes outside the active rectangulation).
struct QpProblem {
    SparseSymMatrix K;          // assembled over active elements, full size
    std::vector<double> b;      // full length
    std::vector<char> free_mask;
    std::vector<double> lower;  // obstacle values, used at free nodes
    std::vector<double> fixed;  // values at non-free nodes
};

struct QpOptions {
    double omega = 1.5;         // SOR relaxation, in (0,2)
    double tol = 1e-10;         // projected-residual measure
    long max_sweeps = 1000000;
    double cg_tol = 1e-12;      // warm-start solve
    int trace_every = 0;        // 0 disables the energy trace
};

struct QpTraceRow {
    long sweep;
    double energy;
    double measure;
};

struct QpSolution {
    NodalField v;                      // full length, fixed values included
    std::vector<char> active_set;      // free nodes with v_i = lower_i
    std::vector<double> lambda_nodal;  // (Kv-b)_i at free nodes, else 0
    long sweeps = 0;
    double residual_measure = 0.0;
    bool converged = false;
    std::vector<QpTraceRow> trace;
};

/// Projected SOR on the reduced system, warm-started from the unconstrained
/// CG solution clipped to the bounds. Stops when
///   max_i |v_i - max(lower_i, v_i - (Kv-b)_i/K_ii)| <= tol
/// over the free nodes (sweep order = node numbering).
QpSolution solve_obstacle_qp(const QpProblem& p, const QpOptions& opts = {});

/// Initial multiplier for the majorant minimization: nodal multipliers are
/// scaled by the inverse lumped mass (sum of hx*hy/4 over incident active
/// elements), zeroed at inactive nodes, averaged per element and clipped to
/// be nonnegative.
ElementField recover_mu0(const QpSolution& sol, const RectMesh& mesh);

/// J(v) = 1/2 v^T K v - b^T v.
double discrete_energy(const SparseSymMatrix& K, std::span<const double> b,
                       std::span<const double> v);

} // namespace obstacle
