#pragma once

#include <array>
#include <string>
#include <vector>

#include "obstacle/fem.hpp"
#include "obstacle/majorant.hpp"
#include "obstacle/mesh.hpp"

namespace obstacle {

/// Base mesh plus two uniform refinements with their prolongations; the
/// active mask propagates to the children of active elements.
struct MeshChain {
    std::array<RectMesh, 3> level;
    std::array<ProlongationMap, 2> map;
};

MeshChain build_chain(const RectMesh& base);

/// ||v - u||_E^2 evaluated as a stiffness quadratic form on the chain level:
/// v is prolongated, u nodally interpolated, the form summed over active
/// elements of that level.
double energy_error_sq(const MeshChain& chain, const NodalField& v,
                       const ScalarFn& exact_u, int level);

/// One row of the convergence report.
struct MajorantReport {
    std::string benchmark;
    double h = 0.0;
    int n_nodes = 0;
    int n_edges = 0;
    double err2_l0 = 0.0, err2_l1 = 0.0, err2_l2 = 0.0;
    double energy_gap = 0.0; // J(v) - J(u)
    double majorant = 0.0;
    double p1 = 0.0, p2 = 0.0, p3 = 0.0;
    double beta = 0.0;
    int iterations = 0;
    double efficiency = 0.0; // majorant / gap
    bool lower_ok = false;   // err2_l2/2 <= gap
    bool upper_ok = false;   // gap <= majorant
    bool chain_ok = false;
    double lower_slack = 0.0; // (gap - err2_l2/2) / max(|majorant|, eps)
    double upper_slack = 0.0; // (majorant - gap) / max(|majorant|, eps)
    bool degenerate = false;  // empty inscribed rectangulation
    double zero_extension_gap = 0.0; // |J(v_inscribed) - J(v_extended)|
};

/// Assembles the two-sided estimate 1/2 err^2 <= J(v)-J(u) <= M from the
/// computed pieces; violated inequalities are recorded, never raised.
MajorantReport estimate_chain(const std::string& benchmark, double h,
                              int n_nodes, int n_edges,
                              const std::array<double, 3>& err2,
                              double j_v, double j_u,
                              const MajorantState& state);

/// Ring variant: checks the zero trace of v on the inscribed boundary,
/// records the zero-extension energy identity J(v_inscribed) = J(v_extended)
/// and restricts the error evaluation to inscribed elements (the chain must
/// be built on the inscribed view).
MajorantReport ring_estimate_chain(const RingMeshPair& pair,
                                   const MeshChain& inscribed_chain,
                                   const NodalField& v_inscribed,
                                   const ScalarFn& exact_u,
                                   double j_v_inscribed, double j_v_extended,
                                   double j_u, const MajorantState& state);

} // namespace obstacle
