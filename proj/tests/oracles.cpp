#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace obstacle::testing {

namespace {

constexpr double kG2[2] = {0.5 - 0.28867513459481287, 0.5 + 0.28867513459481287};
constexpr double kG3x[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kG3w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// reference bilinear gradients at (xi, eta) in [0,1]^2
void grad_psi(double hx, double hy, double xi, double eta, double g[4][2]) {
    g[0][0] = (-1 + eta) / hx;
    g[0][1] = (-1 + xi) / hy;
    g[1][0] = (1 - eta) / hx;
    g[1][1] = -xi / hy;
    g[2][0] = eta / hx;
    g[2][1] = xi / hy;
    g[3][0] = -eta / hx;
    g[3][1] = (1 - xi) / hy;
}

// reference RT0 basis at (xi, eta); edge order bottom, right, top, left
void eta_basis(double xi, double eta, double v[4][2]) {
    v[0][0] = 0.0;
    v[0][1] = 1 - eta;
    v[1][0] = xi;
    v[1][1] = 0.0;
    v[2][0] = 0.0;
    v[2][1] = eta;
    v[3][0] = 1 - xi;
    v[3][1] = 0.0;
}

} // namespace

DenseMatrix dense_from_sparse(const SparseSymMatrix& A) {
    DenseMatrix d;
    d.n = A.rows();
    d.a.assign(static_cast<std::size_t>(d.n) * d.n, 0.0);
    const auto rp = A.row_ptr();
    const auto cols = A.cols();
    const auto vals = A.values();
    for (int i = 0; i < d.n; ++i)
        for (int q = rp[i]; q < rp[i + 1]; ++q) d.at(i, cols[q]) += vals[q];
    return d;
}

std::vector<double> lu_solve(DenseMatrix A, std::vector<double> b) {
    const int n = A.n;
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("lu_solve: size");
    std::vector<int> piv(n);
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A.at(i, k)) > std::abs(A.at(p, k))) p = i;
        piv[k] = p;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(A.at(k, j), A.at(p, j));
            std::swap(b[k], b[p]);
        }
        if (A.at(k, k) == 0.0) throw std::runtime_error("lu_solve: singular matrix");
        for (int i = k + 1; i < n; ++i) {
            const double m = A.at(i, k) / A.at(k, k);
            A.at(i, k) = m;
            for (int j = k + 1; j < n; ++j) A.at(i, j) -= m * A.at(k, j);
            b[i] -= m * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A.at(i, j) * b[j];
        b[i] = s / A.at(i, i);
    }
    return b;
}

Mat4 local_kbil_quadrature(double hx, double hy) {
    Mat4 out{};
    for (double gx : kG2)
        for (double gy : kG2) {
            double g[4][2];
            grad_psi(hx, hy, gx, gy, g);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    out[a][b] += 0.25 * hx * hy *
                                 (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
    return out;
}

Rt0Local local_rt0_quadrature(double hx, double hy) {
    Rt0Local out{};
    const double div[4] = {-1 / hy, 1 / hx, 1 / hy, -1 / hx};
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) out.stiffness[a][b] = div[a] * div[b] * hx * hy;
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            double v[4][2];
            eta_basis(kG3x[p], kG3x[q], v);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    out.mass[a][b] += kG3w[p] * kG3w[q] * hx * hy *
                                      (v[a][0] * v[b][0] + v[a][1] * v[b][1]);
        }
    return out;
}

DenseMatrix assemble_kbil_quadrature(const RectMesh& mesh) {
    DenseMatrix d;
    d.n = mesh.n_nodes();
    d.a.assign(static_cast<std::size_t>(d.n) * d.n, 0.0);
    const Mat4 local = local_kbil_quadrature(mesh.hx, mesh.hy);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& nd = mesh.elements[e];
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) d.at(nd[a], nd[b]) += local[a][b];
    }
    return d;
}

FluxRhs flux_rhs_quadrature(const RectMesh& mesh, const NodalField& v,
                            const ElementField& fbar_plus_mu) {
    FluxRhs out;
    out.c.assign(mesh.n_edges(), 0.0);
    out.d.assign(mesh.n_edges(), 0.0);
    const double div[4] = {-1 / mesh.hy, 1 / mesh.hx, 1 / mesh.hy, -1 / mesh.hx};
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& nd = mesh.elements[e];
        const auto& ed = mesh.elem_edges[e];
        for (double gx : kG2)
            for (double gy : kG2) {
                double g[4][2], rt[4][2];
                grad_psi(mesh.hx, mesh.hy, gx, gy, g);
                eta_basis(gx, gy, rt);
                double dvx = 0, dvy = 0;
                for (int a = 0; a < 4; ++a) {
                    dvx += v[nd[a]] * g[a][0];
                    dvy += v[nd[a]] * g[a][1];
                }
                for (int a = 0; a < 4; ++a)
                    out.c[ed[a]] += 0.25 * mesh.hx * mesh.hy *
                                    (dvx * rt[a][0] + dvy * rt[a][1]);
            }
        for (int a = 0; a < 4; ++a)
            out.d[ed[a]] += fbar_plus_mu[e] * div[a] * mesh.hx * mesh.hy;
    }
    return out;
}

std::vector<double> active_set_qp(const DenseMatrix& K, const std::vector<double>& b,
                                  const std::vector<double>& lo, int max_iter) {
    const int n = K.n;
    std::vector<char> active(n, 0);
    std::vector<double> x(lo);
    for (int it = 0; it < max_iter; ++it) {
        // solve with the active coordinates pinned at their bounds
        std::vector<int> free_ids;
        for (int i = 0; i < n; ++i)
            if (!active[i]) free_ids.push_back(i);
        DenseMatrix Kf;
        Kf.n = static_cast<int>(free_ids.size());
        Kf.a.assign(static_cast<std::size_t>(Kf.n) * Kf.n, 0.0);
        std::vector<double> bf(Kf.n);
        for (int a = 0; a < Kf.n; ++a) {
            double s = b[free_ids[a]];
            for (int i = 0; i < n; ++i)
                if (active[i]) s -= K.at(free_ids[a], i) * lo[i];
            bf[a] = s;
            for (int c = 0; c < Kf.n; ++c) Kf.at(a, c) = K.at(free_ids[a], free_ids[c]);
        }
        std::vector<double> xf = Kf.n ? lu_solve(Kf, bf) : std::vector<double>{};
        for (int i = 0; i < n; ++i) x[i] = active[i] ? lo[i] : 0.0;
        for (int a = 0; a < Kf.n; ++a) x[free_ids[a]] = xf[a];

        // multiplier on the active set, violations on the free set
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            double lam = -b[i];
            for (int j = 0; j < n; ++j) lam += K.at(i, j) * x[j];
            if (active[i] && lam < -1e-13) {
                active[i] = 0;
                changed = true;
            } else if (!active[i] && x[i] < lo[i] - 1e-13) {
                active[i] = 1;
                changed = true;
            }
        }
        if (!changed) return x;
    }
    throw std::runtime_error("active_set_qp: did not settle");
}

double energy_quadrature(const ExactSolution& exact, int n, bool disk_only) {
    const double h = 2.0 / n;
    double sum = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = -1 + h * (i + 0.5);
            const double y = -1 + h * (j + 0.5);
            if (disk_only && x * x + y * y >= 1.0) continue;
            const auto g = exact.grad_u(x, y);
            sum += 0.5 * (g[0] * g[0] + g[1] * g[1]) - exact.f(x, y) * exact.u(x, y);
        }
    return sum * h * h;
}

} // namespace obstacle::testing
