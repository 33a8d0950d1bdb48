#include "obstacle/fem.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace obstacle {

namespace {

void check_lengths(double hx, double hy) {
    if (hx <= 0.0 || hy <= 0.0)
        throw std::invalid_argument("local matrix: element lengths must be positive");
}

// 3-point Gauss on [0,1]
constexpr double kG3x[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr double kG3w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

inline std::array<double, 4> bilinear_basis(double xi, double eta) {
    return {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
}

// Six load moments on one sub-rectangle of the reference square:
// {f, f^2, f*psi_1..psi_4}, mapped to the element at (ex,ey) with size h.
std::array<double, 6> gauss_moments(const ScalarFn& f, double ex, double ey,
                                    double hx, double hy, double a, double b,
                                    double w) {
    std::array<double, 6> q{};
    for (int p = 0; p < 3; ++p)
        for (int r = 0; r < 3; ++r) {
            const double xi = a + w * kG3x[p];
            const double eta = b + w * kG3x[r];
            const double fv = f(ex + hx * xi, ey + hy * eta);
            const double wt = kG3w[p] * kG3w[r] * w * w * hx * hy;
            const auto psi = bilinear_basis(xi, eta);
            q[0] += wt * fv;
            q[1] += wt * fv * fv;
            for (int k = 0; k < 4; ++k) q[2 + k] += wt * fv * psi[k];
        }
    return q;
}

void adaptive_moments(const ScalarFn& f, double ex, double ey, double hx,
                      double hy, double a, double b, double w, int depth,
                      int max_depth, std::array<double, 6>& out) {
    const auto parent = gauss_moments(f, ex, ey, hx, hy, a, b, w);
    std::array<std::array<double, 6>, 4> child;
    const double w2 = w / 2;
    child[0] = gauss_moments(f, ex, ey, hx, hy, a, b, w2);
    child[1] = gauss_moments(f, ex, ey, hx, hy, a + w2, b, w2);
    child[2] = gauss_moments(f, ex, ey, hx, hy, a, b + w2, w2);
    child[3] = gauss_moments(f, ex, ey, hx, hy, a + w2, b + w2, w2);
    std::array<double, 6> sum{};
    for (const auto& c : child)
        for (int k = 0; k < 6; ++k) sum[k] += c[k];

    bool converged = true;
    for (int k = 0; k < 6; ++k)
        if (std::abs(parent[k] - sum[k]) > 1e-13 * (1.0 + std::abs(sum[k])))
            converged = false;

    if (converged || depth >= max_depth) {
        for (int k = 0; k < 6; ++k) out[k] += sum[k];
        return;
    }
    adaptive_moments(f, ex, ey, hx, hy, a, b, w2, depth + 1, max_depth, out);
    adaptive_moments(f, ex, ey, hx, hy, a + w2, b, w2, depth + 1, max_depth, out);
    adaptive_moments(f, ex, ey, hx, hy, a, b + w2, w2, depth + 1, max_depth, out);
    adaptive_moments(f, ex, ey, hx, hy, a + w2, b + w2, w2, depth + 1, max_depth, out);
}

} // namespace

Mat4 local_kbil(double hx, double hy) {
    check_lengths(hx, hy);
    const double a = hx * hx, b = hy * hy, s = 1.0 / (6.0 * hx * hy);
    return {{{s * (2 * a + 2 * b), s * (a - 2 * b), s * (-a - b), s * (-2 * a + b)},
             {s * (a - 2 * b), s * (2 * a + 2 * b), s * (-2 * a + b), s * (-a - b)},
             {s * (-a - b), s * (-2 * a + b), s * (2 * a + 2 * b), s * (a - 2 * b)},
             {s * (-2 * a + b), s * (-a - b), s * (a - 2 * b), s * (2 * a + 2 * b)}}};
}

Mat4 local_mbil(double hx, double hy) {
    check_lengths(hx, hy);
    const double s = hx * hy / 36.0;
    return {{{4 * s, 2 * s, 1 * s, 2 * s},
             {2 * s, 4 * s, 2 * s, 1 * s},
             {1 * s, 2 * s, 4 * s, 2 * s},
             {2 * s, 1 * s, 2 * s, 4 * s}}};
}

Rt0Local local_rt0(double hx, double hy) {
    check_lengths(hx, hy);
    const double r = hx / hy, s = hy / hx, m = hx * hy;
    Rt0Local out;
    out.stiffness = {{{r, -1, -r, 1}, {-1, s, 1, -s}, {-r, 1, r, -1}, {1, -s, -1, s}}};
    out.mass = {{{m / 3, 0, m / 6, 0},
                 {0, m / 3, 0, m / 6},
                 {m / 6, 0, m / 3, 0},
                 {0, m / 6, 0, m / 3}}};
    return out;
}

SparseSymMatrix assemble_global(const RectMesh& mesh, GlobalMatrix which) {
    const bool edge_indexed = which == GlobalMatrix::krt0 || which == GlobalMatrix::mrt0;
    Mat4 local;
    switch (which) {
        case GlobalMatrix::kbil: local = local_kbil(mesh.hx, mesh.hy); break;
        case GlobalMatrix::mbil: local = local_mbil(mesh.hx, mesh.hy); break;
        case GlobalMatrix::krt0: local = local_rt0(mesh.hx, mesh.hy).stiffness; break;
        case GlobalMatrix::mrt0: local = local_rt0(mesh.hx, mesh.hy).mass; break;
    }
    std::vector<Triplet> trip;
    trip.reserve(mesh.n_active() * 16);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& dof = edge_indexed ? mesh.elem_edges[e] : mesh.elements[e];
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                if (local[a][b] != 0.0)
                    trip.push_back({dof[a], dof[b], local[a][b]});
    }
    const int n = edge_indexed ? mesh.n_edges() : mesh.n_nodes();
    return SparseSymMatrix::assemble(n, trip);
}

ElementField element_average(const RectMesh& mesh, const NodalField& g) {
    if (static_cast<int>(g.size()) != mesh.n_nodes())
        throw std::invalid_argument("element_average: field size mismatch");
    ElementField out(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& nd = mesh.elements[e];
        out[e] = 0.25 * (g[nd[0]] + g[nd[1]] + g[nd[2]] + g[nd[3]]);
    }
    return out;
}

ElementField element_average(const RectMesh& mesh, const ScalarFn& g) {
    ElementField out(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        double s = 0.0;
        for (int v : mesh.elements[e]) s += g(mesh.nodes[v][0], mesh.nodes[v][1]);
        out[e] = 0.25 * s;
    }
    return out;
}

std::vector<double> load_vector(const RectMesh& mesh, const ElementField& fbar) {
    if (fbar.size() != static_cast<std::size_t>(mesh.n_elements()))
        throw std::invalid_argument("load_vector: field size mismatch");
    std::vector<double> b(mesh.n_nodes(), 0.0);
    const double quarter = mesh.element_area() / 4.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        for (int v : mesh.elements[e]) b[v] += fbar[e] * quarter;
    }
    return b;
}

LoadMoments load_moments(const RectMesh& mesh, const ScalarFn& f, int max_depth) {
    LoadMoments m;
    const int ne = mesh.n_elements();
    m.f1.assign(ne, 0.0);
    m.f2.assign(ne, 0.0);
    m.fpsi.assign(ne, {0.0, 0.0, 0.0, 0.0});
    for (int e = 0; e < ne; ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& p = mesh.nodes[mesh.elements[e][0]];
        std::array<double, 6> q{};
        adaptive_moments(f, p[0], p[1], mesh.hx, mesh.hy, 0.0, 0.0, 1.0, 0, max_depth, q);
        m.f1[e] = q[0];
        m.f2[e] = q[1];
        for (int k = 0; k < 4; ++k) m.fpsi[e][k] = q[2 + k];
    }
    return m;
}

LoadMoments load_moments(const RectMesh& mesh, const ElementField& fbar) {
    if (fbar.size() != static_cast<std::size_t>(mesh.n_elements()))
        throw std::invalid_argument("load_moments: field size mismatch");
    LoadMoments m;
    const int ne = mesh.n_elements();
    const double area = mesh.element_area();
    m.f1.assign(ne, 0.0);
    m.f2.assign(ne, 0.0);
    m.fpsi.assign(ne, {0.0, 0.0, 0.0, 0.0});
    for (int e = 0; e < ne; ++e) {
        if (!mesh.active_elements[e]) continue;
        m.f1[e] = fbar[e] * area;
        m.f2[e] = fbar[e] * fbar[e] * area;
        for (int k = 0; k < 4; ++k) m.fpsi[e][k] = fbar[e] * area / 4.0;
    }
    return m;
}

std::vector<double> load_vector(const RectMesh& mesh, const LoadMoments& m) {
    std::vector<double> b(mesh.n_nodes(), 0.0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& nd = mesh.elements[e];
        for (int k = 0; k < 4; ++k) b[nd[k]] += m.fpsi[e][k];
    }
    return b;
}

FluxRhs flux_rhs(const RectMesh& mesh, const NodalField& v,
                 const ElementField& fbar_plus_mu) {
    if (static_cast<int>(v.size()) != mesh.n_nodes() ||
        fbar_plus_mu.size() != static_cast<std::size_t>(mesh.n_elements()))
        throw std::invalid_argument("flux_rhs: field size mismatch");
    FluxRhs out;
    out.c.assign(mesh.n_edges(), 0.0);
    out.d.assign(mesh.n_edges(), 0.0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& nd = mesh.elements[e];
        const auto& ed = mesh.elem_edges[e];
        const double v1 = v[nd[0]], v2 = v[nd[1]], v3 = v[nd[2]], v4 = v[nd[3]];
        // grad v integrated against the four edge functions (exact)
        const double cx = mesh.hy * ((v2 - v1) + (v3 - v4)) / 4.0;
        const double cy = mesh.hx * ((v4 - v1) + (v3 - v2)) / 4.0;
        out.c[ed[0]] += cy;
        out.c[ed[2]] += cy;
        out.c[ed[1]] += cx;
        out.c[ed[3]] += cx;
        const double g = fbar_plus_mu[e];
        out.d[ed[0]] += -g * mesh.hx;
        out.d[ed[1]] += g * mesh.hy;
        out.d[ed[2]] += g * mesh.hx;
        out.d[ed[3]] += -g * mesh.hy;
    }
    return out;
}

ElementField rt0_divergence(const RectMesh& mesh, const EdgeFluxField& tau) {
    if (static_cast<int>(tau.size()) != mesh.n_edges())
        throw std::invalid_argument("rt0_divergence: field size mismatch");
    ElementField div(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& ed = mesh.elem_edges[e];
        div[e] = (tau[ed[2]] - tau[ed[0]]) / mesh.hy + (tau[ed[1]] - tau[ed[3]]) / mesh.hx;
    }
    return div;
}

std::vector<std::array<double, 2>> rt0_at_centers(const RectMesh& mesh,
                                                  const EdgeFluxField& tau) {
    if (static_cast<int>(tau.size()) != mesh.n_edges())
        throw std::invalid_argument("rt0_at_centers: field size mismatch");
    std::vector<std::array<double, 2>> out(mesh.n_elements(), {0.0, 0.0});
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& ed = mesh.elem_edges[e];
        out[e] = {0.5 * (tau[ed[3]] + tau[ed[1]]), 0.5 * (tau[ed[0]] + tau[ed[2]])};
    }
    return out;
}

double integrate_adaptive(const std::function<double(double, double)>& fn,
                          double x0, double y0, double wx, double wy,
                          int max_depth, double rel_tol) {
    struct Impl {
        const std::function<double(double, double)>& f;
        int max_depth;
        double rel_tol;

        double gauss(double a, double b, double wa, double wb) const {
            double s = 0.0;
            for (int p = 0; p < 3; ++p)
                for (int r = 0; r < 3; ++r)
                    s += kG3w[p] * kG3w[r] * f(a + wa * kG3x[p], b + wb * kG3x[r]);
            return s * wa * wb;
        }
        double run(double a, double b, double wa, double wb, int depth) const {
            const double parent = gauss(a, b, wa, wb);
            const double wa2 = wa / 2, wb2 = wb / 2;
            const double c = gauss(a, b, wa2, wb2) + gauss(a + wa2, b, wa2, wb2) +
                             gauss(a, b + wb2, wa2, wb2) + gauss(a + wa2, b + wb2, wa2, wb2);
            if (std::abs(parent - c) <= rel_tol * (1.0 + std::abs(c)) || depth >= max_depth)
                return c;
            return run(a, b, wa2, wb2, depth + 1) + run(a + wa2, b, wa2, wb2, depth + 1) +
                   run(a, b + wb2, wa2, wb2, depth + 1) +
                   run(a + wa2, b + wb2, wa2, wb2, depth + 1);
        }
    };
    return Impl{fn, max_depth, rel_tol}.run(x0, y0, wx, wy, 0);
}

} // namespace obstacle
