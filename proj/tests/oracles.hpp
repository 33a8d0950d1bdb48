#pragma once

// Test-only reference implementations: dense storage and LU, quadrature-based
// local/global assembly, a dense active-set solver for bound-constrained QPs
// and brute-force energy quadrature. Independent of the production paths they
// check.

#include <functional>
#include <vector>

#include "obstacle/benchmarks.hpp"
#include "obstacle/fem.hpp"
#include "obstacle/mesh.hpp"
#include "obstacle/sparse.hpp"

namespace obstacle::testing {

struct DenseMatrix {
    int n = 0;
    std::vector<double> a; // row-major n x n

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

DenseMatrix dense_from_sparse(const SparseSymMatrix& A);

/// LU with partial pivoting.
std::vector<double> lu_solve(DenseMatrix A, std::vector<double> b);

/// Local matrices by Gauss quadrature of the reference basis functions.
Mat4 local_kbil_quadrature(double hx, double hy);
Rt0Local local_rt0_quadrature(double hx, double hy);

/// Gauss-quadrature global assembly over active elements (dense).
DenseMatrix assemble_kbil_quadrature(const RectMesh& mesh);

/// Flux right-hand sides by 2x2 Gauss quadrature of grad v . eta_i and
/// (f+mu) div eta_i.
FluxRhs flux_rhs_quadrature(const RectMesh& mesh, const NodalField& v,
                            const ElementField& fbar_plus_mu);

/// Primal-dual active-set solver for min 1/2 x^T K x - b^T x, x >= lo.
std::vector<double> active_set_qp(const DenseMatrix& K, const std::vector<double>& b,
                                  const std::vector<double>& lo, int max_iter = 200);

/// Midpoint quadrature of 1/2 |grad u|^2 - f u on an n x n grid over
/// [-1,1]^2; disk_only restricts to cells whose center is inside the unit
/// disk (Benchmarks II/III).
double energy_quadrature(const ExactSolution& exact, int n, bool disk_only);

} // namespace obstacle::testing
