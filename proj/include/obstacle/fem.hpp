#pragma once

#include <array>
#include <functional>
#include <utility>

#include "obstacle/fields.hpp"
#include "obstacle/mesh.hpp"
#include "obstacle/sparse.hpp"

namespace obstacle {

using Mat4 = std::array<std::array<double, 4>, 4>;
using ScalarFn = std::function<double(double, double)>;

/// Local bilinear stiffness matrix, closed form 1/(6 hx hy) * [...].
Mat4 local_kbil(double hx, double hy);

/// Local bilinear mass matrix, hx*hy/36 * [[4,2,1,2],...].
Mat4 local_mbil(double hx, double hy);

struct Rt0Local {
    Mat4 stiffness; // div-div
    Mat4 mass;
};

/// Local lowest-order Raviart-Thomas matrices in the e1..e4 edge order.
Rt0Local local_rt0(double hx, double hy);

enum class GlobalMatrix { kbil, mbil, krt0, mrt0 };

/// Sums local matrices over active elements; node-indexed for kbil/mbil,
/// edge-indexed for krt0/mrt0. No boundary conditions are applied.
SparseSymMatrix assemble_global(const RectMesh& mesh, GlobalMatrix which);

/// Per-element mean of the four vertex values (yields fbar, vbar, phibar).
ElementField element_average(const RectMesh& mesh, const NodalField& g);
ElementField element_average(const RectMesh& mesh, const ScalarFn& g);

/// b_i = sum over active elements of fbar * hx*hy/4 (each bilinear basis
/// function integrates to a quarter of the element area).
std::vector<double> load_vector(const RectMesh& mesh, const ElementField& fbar);

/// Per-element moments of the loading used by the exact-quadrature path:
/// f1 = integral of f, f2 = integral of f^2, fpsi_k = integral of f*psi_k.
struct LoadMoments {
    std::vector<double> f1;
    std::vector<double> f2;
    std::vector<std::array<double, 4>> fpsi;
};

/// Adaptive per-element Gauss quadrature of the moments; exact for
/// polynomial f, refines toward interior kinks (piecewise loadings).
LoadMoments load_moments(const RectMesh& mesh, const ScalarFn& f,
                         int max_depth = 12);

LoadMoments load_moments(const RectMesh& mesh, const ElementField& fbar);

std::vector<double> load_vector(const RectMesh& mesh, const LoadMoments& m);

/// Flux right-hand sides of the majorant minimization:
/// c_i = integral of grad v . eta_i, d_i = integral of (f+mu) div eta_i,
/// with (f+mu) given as a per-element value.
struct FluxRhs {
    std::vector<double> c;
    std::vector<double> d;
};

FluxRhs flux_rhs(const RectMesh& mesh, const NodalField& v,
                 const ElementField& fbar_plus_mu);

/// Constant per-element divergence of an RT0 field.
ElementField rt0_divergence(const RectMesh& mesh, const EdgeFluxField& tau);

/// RT0 field evaluated at element centers (for dumps).
std::vector<std::array<double, 2>> rt0_at_centers(const RectMesh& mesh,
                                                  const EdgeFluxField& tau);

/// Quadrature of fn over [x0,x0+wx] x [y0,y0+wy], subdividing until two
/// Gauss levels agree; deterministic, handles continuous kinked integrands.
double integrate_adaptive(const std::function<double(double, double)>& fn,
                          double x0, double y0, double wx, double wy,
                          int max_depth = 12, double rel_tol = 1e-13);

} // namespace obstacle
