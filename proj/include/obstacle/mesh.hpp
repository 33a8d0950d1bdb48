#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "obstacle/fields.hpp"

namespace obstacle {

struct Box {
    double x0, y0, x1, y1;
};

/// Uniform rectangulation of an axis-aligned box.
///
/// Numbering is lexicographic by (row, column): node (i,j) has index
/// j*(nx+1)+i, element (i,j) has index j*nx+i. Element vertices follow the
/// reference order v1=(0,0), v2=(hx,0), v3=(hx,hy), v4=(0,hy); element edges
/// the order e1 bottom, e2 right, e3 top, e4 left. Horizontal edges
/// (normal +y) are numbered first, vertical edges (normal +x) after, so all
/// edge normals are globally axis-oriented and assembly needs no sign flips.
struct RectMesh {
    int nx = 0, ny = 0;
    double hx = 0.0, hy = 0.0;
    double x0 = 0.0, y0 = 0.0;

    std::vector<std::array<double, 2>> nodes;
    std::vector<std::array<int, 4>> elements;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 4>> elem_edges;
    std::vector<char> active_elements; // mask, all-true unless restricted

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_elements() const { return static_cast<int>(elements.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }

    int node_id(int i, int j) const { return j * (nx + 1) + i; }
    int elem_id(int i, int j) const { return j * nx + i; }

    double element_area() const { return hx * hy; }
    std::size_t n_active() const;

    /// Copy of the mesh with a different active-element mask.
    RectMesh with_active(std::vector<char> mask) const;

    /// Nodes on the bounding-box boundary.
    std::vector<char> boundary_node_mask() const;
    /// Nodes incident to at least one active element.
    std::vector<char> active_node_mask() const;
    /// Edges incident to at least one active element.
    std::vector<char> active_edge_mask() const;
};

/// Builds the uniform mesh with hx = hy = h. Throws std::invalid_argument
/// when h does not divide both side lengths.
RectMesh build_uniform_mesh(const Box& box, double h);

/// Inscribed/circumscribed rectangulations of the unit disk inside [-1,1]^2.
struct RingMeshPair {
    RectMesh full;
    std::vector<char> inscribed;     // all four vertices in the closed disk
    std::vector<char> circumscribed; // at least one vertex strictly inside
    std::vector<char> dirichlet_nodes_inscribed;
    bool degenerate = false; // inscribed set empty (h = 2)
};

RingMeshPair classify_ring(const RectMesh& mesh);

/// Coarse-to-fine nodal interpolation for one uniform refinement step:
/// copy at coincident nodes, 2-point averages on coarse edges, 4-point
/// averages at coarse element centers.
struct ProlongationMap {
    int coarse_nx = 0, coarse_ny = 0;

    NodalField apply(const NodalField& coarse) const;
};

std::pair<RectMesh, ProlongationMap> refine_uniform(const RectMesh& mesh);

NodalField prolongate(const ProlongationMap& map, const NodalField& v);

} // namespace obstacle
