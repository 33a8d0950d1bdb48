#pragma once

#include <optional>
#include <vector>

#include "obstacle/fem.hpp"
#include "obstacle/fields.hpp"
#include "obstacle/mesh.hpp"
#include "obstacle/sparse.hpp"

namespace obstacle {

enum class FriedrichsDomain { square_side2, unit_disk_in_square };

/// Smallest C with ||v|| <= C ||grad v|| on V0. The side-2 square gives
/// sqrt(2)/pi; the ring meshes embed into the square by zero extension, so
/// the same constant is a valid upper bound there.
double friedrichs_constant(FriedrichsDomain domain);

/// Weighting of the div term in the flux system. majorant_consistent adds
/// the C^2 factor so step (i) is the exact block minimizer of the majorant
/// (keeps the minimization trace monotone); paper_literal omits it.
enum class FluxWeighting { majorant_consistent, paper_literal };

/// friedrichs_balanced: beta = C sqrt(P2) / sqrt(P1), the exact minimizer of
/// (1+b)/2 P1 + (1+1/b)/2 C^2 P2. paper_literal drops the C factor.
enum class BetaRule { friedrichs_balanced, paper_literal };

struct MajorantParts {
    double p1 = 0.0;    // || grad v - tau ||^2
    double p2 = 0.0;    // || div tau + f + mu ||^2
    double p3 = 0.0;    // integral of mu (v - phi)
    double total = 0.0; // (1+beta)/2 P1 + (1+1/beta)/2 C^2 P2 + P3
};

struct MajorantState {
    double beta = 1.0;
    ElementField mu;
    EdgeFluxField tau;
    MajorantParts parts;
    double c_omega = 0.0;
    int iterations = 0;
};

/// Loading as Algorithm 1 sees it: fvalue is the per-element constant used
/// in the step formulas (true cell mean in exact mode, four-node average in
/// paper mode); f2int is the per-element integral of f^2 entering P2.
/// With f2int_e = fvalue_e^2 * |T| the evaluation reduces to the paper's
/// piecewise-constant convention.
struct ElementLoad {
    ElementField fvalue;
    ElementField f2int;

    static ElementLoad from_fbar(const RectMesh& mesh, const ElementField& fbar);
    static ElementLoad from_moments(const RectMesh& mesh, const LoadMoments& m);
};

struct FluxStepOptions {
    FluxWeighting weighting = FluxWeighting::majorant_consistent;
    double c_omega = 0.0; // required for majorant_consistent
    CgOptions cg;
};

/// Step (i): solves the RT0 system on the edges of active elements; no
/// boundary conditions are imposed on the flux.
EdgeFluxField flux_step(const RectMesh& mesh, double beta, const NodalField& v,
                        const ElementField& fbar_plus_mu,
                        const FluxStepOptions& opts);

/// Step (ii): per active element
///   mu = [ -div tau - fvalue - (vbar - phibar)/(C^2 (1+1/beta)) ]^+ .
ElementField multiplier_step(const RectMesh& mesh, double beta,
                             const EdgeFluxField& tau, const ElementField& fvalue,
                             const ElementField& vbar, const ElementField& phibar,
                             double c_omega);

/// Step (iii). P1 = 0 with P2 > 0 keeps the previous beta (flux equals the
/// gradient); the result is clamped to [beta_min, beta_max].
double beta_step(double p1, double p2, double c_omega, BetaRule rule,
                 double previous_beta, double beta_min = 1e-8,
                 double beta_max = 1e8);

/// Exact evaluation of the three majorant parts over active elements.
/// P1 by 2x2 Gauss (exact: the integrand is biquadratic), P2 from the
/// per-element load moments, P3 from four-node averages of v and phi.
MajorantParts evaluate_majorant(const RectMesh& mesh, double beta,
                                const ElementField& mu, const EdgeFluxField& tau,
                                const NodalField& v, const ElementLoad& load,
                                const NodalField& phi, double c_omega);

/// Per-element contributions of the three parts (data behind the local
/// distribution figures).
struct LocalMajorant {
    ElementField p1, p2, p3;
};
LocalMajorant local_majorant(const RectMesh& mesh, double beta,
                             const ElementField& mu, const EdgeFluxField& tau,
                             const NodalField& v, const ElementLoad& load,
                             const NodalField& phi, double c_omega);

struct AlgorithmOptions {
    double beta0 = 1.0;
    int n_iter = 2;
    FluxWeighting flux_weighting = FluxWeighting::majorant_consistent;
    BetaRule beta_rule = BetaRule::friedrichs_balanced;
    double beta_min = 1e-8;
    double beta_max = 1e8;
    double stop_rel = 0.0; // >0: stop when the total decreases less than this
    CgOptions cg;
};

struct MajorantTraceRow {
    int iteration;   // 0 = initial evaluation
    char step;       // '0' initial, 'f' flux, 'm' multiplier, 'b' beta
    double beta;
    MajorantParts parts;
};

/// Algorithm 1: n_iter rounds of steps (i)-(iii) from (beta0, mu0, tau=0).
/// n_iter = 0 evaluates the majorant at the initial state.
MajorantState run_algorithm1(const RectMesh& mesh, const NodalField& v,
                             const ElementLoad& load, const NodalField& phi,
                             const ElementField& mu0, double c_omega,
                             const AlgorithmOptions& opts = {},
                             std::vector<MajorantTraceRow>* trace = nullptr);

} // namespace obstacle
