#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace obstacle {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Symmetric sparse matrix in compressed row storage. Built once from
/// triplets (duplicates summed) and immutable afterwards.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;

    static SparseSymMatrix assemble(int n, std::span<const Triplet> triplets);

    int rows() const { return n_; }

    double coeff(int i, int j) const;
    std::vector<double> diagonal() const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;

    /// x^T A y
    double quad_form(std::span<const double> x, std::span<const double> y) const;

    /// Row/column extraction onto an index subset (Dirichlet elimination).
    /// keep[i] is a full-space index; the result is |keep| x |keep|.
    SparseSymMatrix restricted(std::span<const int> keep) const;

    std::span<const int> row_ptr() const { return row_ptr_; }
    std::span<const int> cols() const { return cols_; }
    std::span<const double> values() const { return values_; }

private:
    int n_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

struct CgOptions {
    double tol = 1e-12;   // relative residual
    long max_iter = 0;    // 0 -> 20*n
};

struct CgResult {
    std::vector<double> x;
    long iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

/// Conjugate gradients with Jacobi preconditioning for SPD systems.
/// Guarantees ||Ax-b|| <= tol*||b|| on success; a zero right-hand side
/// returns the zero vector immediately.
CgResult cg_solve(const SparseSymMatrix& A, std::span<const double> rhs,
                  const CgOptions& opts = {},
                  std::span<const double> x0 = {});

} // namespace obstacle
