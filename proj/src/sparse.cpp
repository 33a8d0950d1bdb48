#include "obstacle/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace obstacle {

SparseSymMatrix SparseSymMatrix::assemble(int n, std::span<const Triplet> triplets) {
    if (n < 0) throw std::invalid_argument("assemble: negative dimension");
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
            throw std::out_of_range("assemble: triplet index (" + std::to_string(t.row) +
                                    "," + std::to_string(t.col) + ") outside dimension " +
                                    std::to_string(n));
    }

    SparseSymMatrix A;
    A.n_ = n;
    A.row_ptr_.assign(n + 1, 0);
    if (triplets.empty()) return A;

    std::vector<int> count(n, 0);
    for (const auto& t : triplets) ++count[t.row];
    std::vector<int> start(n + 1, 0);
    std::partial_sum(count.begin(), count.end(), start.begin() + 1);

    std::vector<int> order(triplets.size());
    std::vector<int> fill = start;
    for (std::size_t k = 0; k < triplets.size(); ++k)
        order[fill[triplets[k].row]++] = static_cast<int>(k);

    A.row_ptr_.assign(n + 1, 0);
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < n; ++i) {
        row.clear();
        for (int p = start[i]; p < start[i + 1]; ++p) {
            const auto& t = triplets[order[p]];
            row.emplace_back(t.col, t.value);
        }
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        // merge duplicates
        for (std::size_t k = 0; k < row.size();) {
            int col = row[k].first;
            double sum = 0.0;
            std::size_t k2 = k;
            while (k2 < row.size() && row[k2].first == col) sum += row[k2++].second;
            A.cols_.push_back(col);
            A.values_.push_back(sum);
            k = k2;
        }
        A.row_ptr_[i + 1] = static_cast<int>(A.cols_.size());
    }
    return A;
}

double SparseSymMatrix::coeff(int i, int j) const {
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
        if (cols_[p] == j) return values_[p];
    return 0.0;
}

std::vector<double> SparseSymMatrix::diagonal() const {
    std::vector<double> d(n_, 0.0);
    for (int i = 0; i < n_; ++i) d[i] = coeff(i, i);
    return d;
}

void SparseSymMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("multiply: size mismatch");
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[cols_[p]];
        y[i] = s;
    }
}

std::vector<double> SparseSymMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    multiply(x, y);
    return y;
}

double SparseSymMatrix::quad_form(std::span<const double> x, std::span<const double> y) const {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("quad_form: size mismatch");
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
        double row = 0.0;
        for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) row += values_[p] * y[cols_[p]];
        s += x[i] * row;
    }
    return s;
}

SparseSymMatrix SparseSymMatrix::restricted(std::span<const int> keep) const {
    std::vector<int> where(n_, -1);
    for (std::size_t k = 0; k < keep.size(); ++k) {
        if (keep[k] < 0 || keep[k] >= n_)
            throw std::out_of_range("restricted: index outside matrix");
        where[keep[k]] = static_cast<int>(k);
    }
    SparseSymMatrix R;
    R.n_ = static_cast<int>(keep.size());
    R.row_ptr_.assign(R.n_ + 1, 0);
    for (int k = 0; k < R.n_; ++k) {
        int i = keep[k];
        for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            int j = where[cols_[p]];
            if (j >= 0) {
                R.cols_.push_back(j);
                R.values_.push_back(values_[p]);
            }
        }
        R.row_ptr_[k + 1] = static_cast<int>(R.cols_.size());
    }
    return R;
}

CgResult cg_solve(const SparseSymMatrix& A, std::span<const double> rhs,
                  const CgOptions& opts, std::span<const double> x0) {
    const int n = A.rows();
    if (static_cast<int>(rhs.size()) != n)
        throw std::invalid_argument("cg_solve: rhs size mismatch");

    CgResult out;
    out.x.assign(n, 0.0);
    double bnorm = 0.0;
    for (double v : rhs) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }

    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != n)
            throw std::invalid_argument("cg_solve: x0 size mismatch");
        std::copy(x0.begin(), x0.end(), out.x.begin());
    }

    std::vector<double> inv_diag = A.diagonal();
    for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;

    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.multiply(out.x, Ap);
    for (int i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = 0.0;
    for (int i = 0; i < n; ++i) rz += r[i] * z[i];

    const long max_iter = opts.max_iter > 0 ? opts.max_iter : 20L * n;
    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rnorm = std::sqrt(rnorm);

    long it = 0;
    while (rnorm > opts.tol * bnorm && it < max_iter) {
        A.multiply(p, Ap);
        double pAp = 0.0;
        for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (pAp <= 0.0) break; // not SPD on this subspace
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) out.x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * Ap[i];
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        double rz_new = 0.0;
        for (int i = 0; i < n; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rnorm = 0.0;
        for (double v : r) rnorm += v * v;
        rnorm = std::sqrt(rnorm);
        ++it;
    }
    out.iterations = it;
    out.rel_residual = rnorm / bnorm;
    out.converged = rnorm <= opts.tol * bnorm;
    return out;
}

} // namespace obstacle
