#include "obstacle/qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace obstacle {

namespace {

struct Reduced {
    std::vector<int> free_ids;          // free node -> full node
    SparseSymMatrix K;                  // free x free
    std::vector<double> b;              // b_free - K_fd * fixed
    std::vector<double> lo;
    std::vector<double> diag;
};

Reduced reduce(const QpProblem& p) {
    const int n = p.K.rows();
    if (static_cast<int>(p.b.size()) != n || static_cast<int>(p.free_mask.size()) != n ||
        static_cast<int>(p.lower.size()) != n || static_cast<int>(p.fixed.size()) != n)
        throw std::invalid_argument("solve_obstacle_qp: inconsistent problem sizes");

    Reduced r;
    for (int i = 0; i < n; ++i)
        if (p.free_mask[i]) r.free_ids.push_back(i);
    r.K = p.K.restricted(r.free_ids);

    // right-hand side with the fixed values folded in
    r.b.resize(r.free_ids.size());
    const auto rp = p.K.row_ptr();
    const auto cols = p.K.cols();
    const auto vals = p.K.values();
    for (std::size_t k = 0; k < r.free_ids.size(); ++k) {
        const int i = r.free_ids[k];
        double s = p.b[i];
        for (int q = rp[i]; q < rp[i + 1]; ++q)
            if (!p.free_mask[cols[q]]) s -= vals[q] * p.fixed[cols[q]];
        r.b[k] = s;
    }
    r.lo.resize(r.free_ids.size());
    for (std::size_t k = 0; k < r.free_ids.size(); ++k) r.lo[k] = p.lower[r.free_ids[k]];
    r.diag = r.K.diagonal();
    for (std::size_t k = 0; k < r.diag.size(); ++k)
        if (r.diag[k] <= 0.0)
            throw std::invalid_argument("solve_obstacle_qp: nonpositive diagonal at a free node");
    return r;
}

// max_i | x_i - max(lo_i, x_i - r_i / K_ii) | with r = Kx - b
double projected_measure(const Reduced& r, const std::vector<double>& x,
                         std::vector<double>& scratch) {
    r.K.multiply(x, scratch);
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double step = x[i] - (scratch[i] - r.b[i]) / r.diag[i];
        m = std::max(m, std::abs(x[i] - std::max(r.lo[i], step)));
    }
    return m;
}

} // namespace

QpSolution solve_obstacle_qp(const QpProblem& p, const QpOptions& opts) {
    if (opts.omega <= 0.0 || opts.omega >= 2.0)
        throw std::invalid_argument("solve_obstacle_qp: omega must lie in (0,2)");
    Reduced r = reduce(p);
    const std::size_t m = r.free_ids.size();

    // warm start: unconstrained solve clipped to the bounds
    CgOptions cg;
    cg.tol = opts.cg_tol;
    std::vector<double> x = cg_solve(r.K, r.b, cg).x;
    for (std::size_t i = 0; i < m; ++i) x[i] = std::max(x[i], r.lo[i]);

    const auto rp = r.K.row_ptr();
    const auto cols = r.K.cols();
    const auto vals = r.K.values();

    QpSolution sol;
    std::vector<double> scratch(m);
    double measure = m ? projected_measure(r, x, scratch) : 0.0;
    long sweep = 0;
    const long check_every = 16;
    while (measure > opts.tol && sweep < opts.max_sweeps) {
        double max_delta = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (int q = rp[i]; q < rp[i + 1]; ++q) s += vals[q] * x[cols[q]];
            const double xn = std::max(r.lo[i], x[i] + opts.omega * (r.b[i] - s) / r.diag[i]);
            max_delta = std::max(max_delta, std::abs(xn - x[i]));
            x[i] = xn;
        }
        ++sweep;
        // the stopping measure is refreshed on a fixed cadence so tracing
        // never changes the iteration trajectory
        const bool check = (sweep % check_every == 0) || max_delta <= 0.25 * opts.tol;
        if (check) measure = projected_measure(r, x, scratch);
        if (opts.trace_every > 0 && sweep % opts.trace_every == 0) {
            double e = 0.5 * r.K.quad_form(x, x);
            for (std::size_t i = 0; i < m; ++i) e -= r.b[i] * x[i];
            sol.trace.push_back({sweep, e,
                                 check ? measure : projected_measure(r, x, scratch)});
        }
    }
    if (m) measure = projected_measure(r, x, scratch);

    sol.v = NodalField(p.K.rows());
    for (int i = 0; i < p.K.rows(); ++i) sol.v[i] = p.free_mask[i] ? 0.0 : p.fixed[i];
    for (std::size_t i = 0; i < m; ++i) sol.v[r.free_ids[i]] = x[i];

    sol.active_set.assign(p.K.rows(), 0);
    for (std::size_t i = 0; i < m; ++i)
        if (x[i] <= r.lo[i] + 1e-14 * (1.0 + std::abs(r.lo[i])))
            sol.active_set[r.free_ids[i]] = 1;

    sol.lambda_nodal.assign(p.K.rows(), 0.0);
    r.K.multiply(x, scratch);
    for (std::size_t i = 0; i < m; ++i)
        sol.lambda_nodal[r.free_ids[i]] = scratch[i] - r.b[i];

    sol.sweeps = sweep;
    sol.residual_measure = measure;
    sol.converged = measure <= opts.tol;
    return sol;
}

ElementField recover_mu0(const QpSolution& sol, const RectMesh& mesh) {
    if (static_cast<int>(sol.v.size()) != mesh.n_nodes())
        throw std::invalid_argument("recover_mu0: solution sized for a different mesh");
    std::vector<double> lumped(mesh.n_nodes(), 0.0);
    const double quarter = mesh.element_area() / 4.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        for (int v : mesh.elements[e]) lumped[v] += quarter;
    }
    // pointwise multiplier estimate; complementarity zeroes inactive nodes
    std::vector<double> lam_hat(mesh.n_nodes(), 0.0);
    for (int v = 0; v < mesh.n_nodes(); ++v)
        if (sol.active_set[v] && lumped[v] > 0.0)
            lam_hat[v] = sol.lambda_nodal[v] / lumped[v];

    ElementField mu0(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& nd = mesh.elements[e];
        const double avg = 0.25 * (lam_hat[nd[0]] + lam_hat[nd[1]] + lam_hat[nd[2]] + lam_hat[nd[3]]);
        mu0[e] = std::max(0.0, avg);
    }
    return mu0;
}

double discrete_energy(const SparseSymMatrix& K, std::span<const double> b,
                       std::span<const double> v) {
    if (b.size() != v.size() || static_cast<int>(v.size()) != K.rows())
        throw std::invalid_argument("discrete_energy: size mismatch");
    double e = 0.5 * K.quad_form(v, v);
    for (std::size_t i = 0; i < v.size(); ++i) e -= b[i] * v[i];
    return e;
}

} // namespace obstacle
