#include "obstacle/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace obstacle {

namespace {
constexpr double kInsideTol = 1e-12;

long side_divisions(double length, double h) {
    const double q = length / h;
    const long n = std::lround(q);
    if (n < 1 || std::abs(q - static_cast<double>(n)) > 1e-9 * q)
        return -1;
    return n;
}
} // namespace

std::size_t RectMesh::n_active() const {
    std::size_t c = 0;
    for (char a : active_elements) c += (a != 0);
    return c;
}

RectMesh RectMesh::with_active(std::vector<char> mask) const {
    if (mask.size() != elements.size())
        throw std::invalid_argument("with_active: mask size mismatch");
    RectMesh m = *this;
    m.active_elements = std::move(mask);
    return m;
}

std::vector<char> RectMesh::boundary_node_mask() const {
    std::vector<char> mask(nodes.size(), 0);
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            if (i == 0 || i == nx || j == 0 || j == ny) mask[node_id(i, j)] = 1;
    return mask;
}

std::vector<char> RectMesh::active_node_mask() const {
    std::vector<char> mask(nodes.size(), 0);
    for (int e = 0; e < n_elements(); ++e)
        if (active_elements[e])
            for (int v : elements[e]) mask[v] = 1;
    return mask;
}

std::vector<char> RectMesh::active_edge_mask() const {
    std::vector<char> mask(edges.size(), 0);
    for (int e = 0; e < n_elements(); ++e)
        if (active_elements[e])
            for (int s : elem_edges[e]) mask[s] = 1;
    return mask;
}

RectMesh build_uniform_mesh(const Box& box, double h) {
    if (h <= 0.0) throw std::invalid_argument("build_uniform_mesh: h must be positive");
    const long nx = side_divisions(box.x1 - box.x0, h);
    const long ny = side_divisions(box.y1 - box.y0, h);
    if (nx < 0 || ny < 0)
        throw std::invalid_argument("build_uniform_mesh: h = " + std::to_string(h) +
                                    " does not divide the box side lengths");

    RectMesh m;
    m.nx = static_cast<int>(nx);
    m.ny = static_cast<int>(ny);
    m.hx = m.hy = h;
    m.x0 = box.x0;
    m.y0 = box.y0;

    m.nodes.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= m.ny; ++j)
        for (int i = 0; i <= m.nx; ++i)
            m.nodes.push_back({box.x0 + h * i, box.y0 + h * j});

    m.elements.reserve(nx * ny);
    m.elem_edges.reserve(nx * ny);
    // horizontal edges first: H(i,j) = j*nx + i for j = 0..ny
    // vertical edges after:  V(i,j) = nx*(ny+1) + j*(nx+1) + i for j = 0..ny-1
    const int nh = m.nx * (m.ny + 1);
    auto hedge = [&](int i, int j) { return j * m.nx + i; };
    auto vedge = [&](int i, int j) { return nh + j * (m.nx + 1) + i; };

    m.edges.resize(nh + m.ny * (m.nx + 1));
    for (int j = 0; j <= m.ny; ++j)
        for (int i = 0; i < m.nx; ++i)
            m.edges[hedge(i, j)] = {m.node_id(i, j), m.node_id(i + 1, j)};
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i <= m.nx; ++i)
            m.edges[vedge(i, j)] = {m.node_id(i, j), m.node_id(i, j + 1)};

    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            m.elements.push_back({m.node_id(i, j), m.node_id(i + 1, j),
                                  m.node_id(i + 1, j + 1), m.node_id(i, j + 1)});
            m.elem_edges.push_back({hedge(i, j), vedge(i + 1, j), hedge(i, j + 1), vedge(i, j)});
        }
    m.active_elements.assign(m.elements.size(), 1);
    return m;
}

RingMeshPair classify_ring(const RectMesh& mesh) {
    RingMeshPair pair;
    pair.full = mesh;
    const int ne = mesh.n_elements();
    pair.inscribed.assign(ne, 0);
    pair.circumscribed.assign(ne, 0);

    auto r2 = [&](int v) {
        const auto& p = mesh.nodes[v];
        return p[0] * p[0] + p[1] * p[1];
    };
    for (int e = 0; e < ne; ++e) {
        bool all_in = true, any_strict = false;
        for (int v : mesh.elements[e]) {
            const double rr = r2(v);
            all_in = all_in && rr <= 1.0 + kInsideTol;
            any_strict = any_strict || rr < 1.0 - kInsideTol;
        }
        pair.inscribed[e] = all_in ? 1 : 0;
        pair.circumscribed[e] = any_strict ? 1 : 0;
    }

    pair.dirichlet_nodes_inscribed.assign(mesh.n_nodes(), 0);
    std::vector<char> in_node(mesh.n_nodes(), 0), out_node(mesh.n_nodes(), 0);
    for (int e = 0; e < ne; ++e)
        for (int v : mesh.elements[e])
            (pair.inscribed[e] ? in_node : out_node)[v] = 1;
    const auto box_bd = mesh.boundary_node_mask();
    for (int v = 0; v < mesh.n_nodes(); ++v)
        if (in_node[v] && (out_node[v] || box_bd[v]))
            pair.dirichlet_nodes_inscribed[v] = 1;

    pair.degenerate = true;
    for (char c : pair.inscribed)
        if (c) { pair.degenerate = false; break; }
    return pair;
}

NodalField ProlongationMap::apply(const NodalField& coarse) const {
    const int cn = coarse_nx, cm = coarse_ny;
    if (static_cast<int>(coarse.size()) != (cn + 1) * (cm + 1))
        throw std::invalid_argument("prolongate: field sized for a different mesh");
    const int fn = 2 * cn;
    NodalField fine((fn + 1) * (2 * cm + 1));
    auto cid = [&](int i, int j) { return j * (cn + 1) + i; };
    auto fid = [&](int i, int j) { return j * (fn + 1) + i; };
    for (int j = 0; j <= 2 * cm; ++j)
        for (int i = 0; i <= fn; ++i) {
            const int ci = i / 2, cj = j / 2;
            double val;
            if (i % 2 == 0 && j % 2 == 0) {
                val = coarse[cid(ci, cj)];
            } else if (i % 2 == 1 && j % 2 == 0) {
                val = 0.5 * (coarse[cid(ci, cj)] + coarse[cid(ci + 1, cj)]);
            } else if (i % 2 == 0 && j % 2 == 1) {
                val = 0.5 * (coarse[cid(ci, cj)] + coarse[cid(ci, cj + 1)]);
            } else {
                val = 0.25 * (coarse[cid(ci, cj)] + coarse[cid(ci + 1, cj)] +
                              coarse[cid(ci, cj + 1)] + coarse[cid(ci + 1, cj + 1)]);
            }
            fine[fid(i, j)] = val;
        }
    return fine;
}

std::pair<RectMesh, ProlongationMap> refine_uniform(const RectMesh& mesh) {
    RectMesh fine = build_uniform_mesh(
        Box{mesh.x0, mesh.y0, mesh.x0 + mesh.nx * mesh.hx, mesh.y0 + mesh.ny * mesh.hy},
        mesh.hx / 2.0);
    // children inherit the parent's activity
    for (int j = 0; j < fine.ny; ++j)
        for (int i = 0; i < fine.nx; ++i)
            fine.active_elements[fine.elem_id(i, j)] =
                mesh.active_elements[mesh.elem_id(i / 2, j / 2)];
    return {std::move(fine), ProlongationMap{mesh.nx, mesh.ny}};
}

NodalField prolongate(const ProlongationMap& map, const NodalField& v) {
    return map.apply(v);
}

} // namespace obstacle
