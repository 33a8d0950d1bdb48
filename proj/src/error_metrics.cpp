#include "obstacle/error_metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace obstacle {

MeshChain build_chain(const RectMesh& base) {
    MeshChain chain;
    chain.level[0] = base;
    auto [m1, p1] = refine_uniform(chain.level[0]);
    chain.level[1] = std::move(m1);
    chain.map[0] = p1;
    auto [m2, p2] = refine_uniform(chain.level[1]);
    chain.level[2] = std::move(m2);
    chain.map[1] = p2;
    return chain;
}

double energy_error_sq(const MeshChain& chain, const NodalField& v,
                       const ScalarFn& exact_u, int level) {
    if (level < 0 || level > 2)
        throw std::invalid_argument("energy_error_sq: level must be 0, 1 or 2");
    if (static_cast<int>(v.size()) != chain.level[0].n_nodes())
        throw std::invalid_argument("energy_error_sq: field sized for a different mesh");

    NodalField w = v;
    for (int l = 0; l < level; ++l) w = chain.map[l].apply(w);

    const RectMesh& mesh = chain.level[level];
    // interpolate the exact solution at nodes of active elements only
    std::vector<double> uh(mesh.n_nodes(), 0.0);
    const auto needed = mesh.active_node_mask();
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (needed[i]) uh[i] = exact_u(mesh.nodes[i][0], mesh.nodes[i][1]);

    const Mat4 kl = local_kbil(mesh.hx, mesh.hy);
    double err2 = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        const auto& nd = mesh.elements[e];
        double d[4];
        for (int k = 0; k < 4; ++k) d[k] = w[nd[k]] - uh[nd[k]];
        for (int a = 0; a < 4; ++a) {
            double row = 0.0;
            for (int b = 0; b < 4; ++b) row += kl[a][b] * d[b];
            err2 += d[a] * row;
        }
    }
    return err2;
}

MajorantReport estimate_chain(const std::string& benchmark, double h,
                              int n_nodes, int n_edges,
                              const std::array<double, 3>& err2,
                              double j_v, double j_u, const MajorantState& state) {
    MajorantReport r;
    r.benchmark = benchmark;
    r.h = h;
    r.n_nodes = n_nodes;
    r.n_edges = n_edges;
    r.err2_l0 = err2[0];
    r.err2_l1 = err2[1];
    r.err2_l2 = err2[2];
    r.energy_gap = j_v - j_u;
    r.majorant = state.parts.total;
    r.p1 = state.parts.p1;
    r.p2 = state.parts.p2;
    r.p3 = state.parts.p3;
    r.beta = state.beta;
    r.iterations = state.iterations;
    r.efficiency = r.energy_gap != 0.0 ? r.majorant / r.energy_gap
                                       : std::numeric_limits<double>::infinity();
    const double scale = std::max(std::abs(r.majorant), 1e-300);
    r.lower_slack = (r.energy_gap - 0.5 * r.err2_l2) / scale;
    r.upper_slack = (r.majorant - r.energy_gap) / scale;
    r.lower_ok = r.lower_slack >= -1e-10;
    r.upper_ok = r.upper_slack >= -1e-10;
    r.chain_ok = r.lower_ok && r.upper_ok;
    return r;
}

MajorantReport ring_estimate_chain(const RingMeshPair& pair,
                                   const MeshChain& inscribed_chain,
                                   const NodalField& v_inscribed,
                                   const ScalarFn& exact_u,
                                   double j_v_inscribed, double j_v_extended,
                                   double j_u, const MajorantState& state) {
    const RectMesh& full = pair.full;
    if (static_cast<int>(v_inscribed.size()) != full.n_nodes())
        throw std::invalid_argument("ring_estimate_chain: field sized for a different mesh");

    if (pair.degenerate) {
        MajorantReport r;
        r.benchmark = "ring";
        r.h = full.hx;
        r.n_nodes = full.n_nodes();
        r.n_edges = full.n_edges();
        r.degenerate = true;
        return r;
    }

    // zero trace on the inscribed boundary and outside the inscribed set
    std::vector<char> inscribed_node(full.n_nodes(), 0);
    for (int e = 0; e < full.n_elements(); ++e)
        if (pair.inscribed[e])
            for (int v : full.elements[e]) inscribed_node[v] = 1;
    for (int i = 0; i < full.n_nodes(); ++i) {
        const bool must_vanish = !inscribed_node[i] || pair.dirichlet_nodes_inscribed[i];
        if (must_vanish && v_inscribed[i] != 0.0)
            throw std::invalid_argument(
                "ring_estimate_chain: nonzero trace on the inscribed boundary");
    }

    std::array<double, 3> err2{};
    for (int l = 0; l < 3; ++l)
        err2[l] = energy_error_sq(inscribed_chain, v_inscribed, exact_u, l);

    MajorantReport r = estimate_chain("ring", full.hx, full.n_nodes(), full.n_edges(),
                                      err2, j_v_extended, j_u, state);
    r.zero_extension_gap = std::abs(j_v_inscribed - j_v_extended);
    return r;
}

} // namespace obstacle
