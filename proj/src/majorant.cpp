#include "obstacle/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obstacle {

namespace {

constexpr double kGaussLo = 0.5 - 0.28867513459481287; // (1 - 1/sqrt(3))/2
constexpr double kGaussHi = 0.5 + 0.28867513459481287;

struct ElementGeometry {
    double hx, hy, area;
};

double p1_element(const RectMesh& mesh, int e, const NodalField& v,
                  const EdgeFluxField& tau) {
    const auto& nd = mesh.elements[e];
    const auto& ed = mesh.elem_edges[e];
    const double v1 = v[nd[0]], v2 = v[nd[1]], v3 = v[nd[2]], v4 = v[nd[3]];
    const double y1 = tau[ed[0]], y2 = tau[ed[1]], y3 = tau[ed[2]], y4 = tau[ed[3]];
    const double gp[2] = {kGaussLo, kGaussHi};
    double s = 0.0;
    for (double gx : gp)
        for (double gy : gp) {
            const double dvx = ((v2 - v1) * (1 - gy) + (v3 - v4) * gy) / mesh.hx;
            const double dvy = ((v4 - v1) * (1 - gx) + (v3 - v2) * gx) / mesh.hy;
            const double tx = y4 * (1 - gx) + y2 * gx;
            const double ty = y1 * (1 - gy) + y3 * gy;
            s += (dvx - tx) * (dvx - tx) + (dvy - ty) * (dvy - ty);
        }
    return s * mesh.element_area() / 4.0;
}

} // namespace

double friedrichs_constant(FriedrichsDomain domain) {
    switch (domain) {
        case FriedrichsDomain::square_side2:
        case FriedrichsDomain::unit_disk_in_square:
            // 1/sqrt(lambda_1) on the side-2 square; the ring meshes embed
            // into the square by zero extension.
            return std::numbers::sqrt2 / std::numbers::pi;
    }
    throw std::invalid_argument("friedrichs_constant: unknown domain");
}

ElementLoad ElementLoad::from_fbar(const RectMesh& mesh, const ElementField& fbar) {
    if (fbar.size() != static_cast<std::size_t>(mesh.n_elements()))
        throw std::invalid_argument("ElementLoad: field size mismatch");
    ElementLoad load;
    load.fvalue = fbar;
    load.f2int = ElementField(mesh.n_elements());
    const double area = mesh.element_area();
    for (int e = 0; e < mesh.n_elements(); ++e)
        if (mesh.active_elements[e]) load.f2int[e] = fbar[e] * fbar[e] * area;
    return load;
}

ElementLoad ElementLoad::from_moments(const RectMesh& mesh, const LoadMoments& m) {
    ElementLoad load;
    load.fvalue = ElementField(mesh.n_elements());
    load.f2int = ElementField(mesh.n_elements());
    const double area = mesh.element_area();
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        load.fvalue[e] = m.f1[e] / area;
        load.f2int[e] = m.f2[e];
    }
    return load;
}

EdgeFluxField flux_step(const RectMesh& mesh, double beta, const NodalField& v,
                        const ElementField& fbar_plus_mu, const FluxStepOptions& opts) {
    if (beta <= 0.0) throw std::invalid_argument("flux_step: beta must be positive");
    const double w = opts.weighting == FluxWeighting::majorant_consistent
                         ? opts.c_omega * opts.c_omega
                         : 1.0;
    if (opts.weighting == FluxWeighting::majorant_consistent && opts.c_omega <= 0.0)
        throw std::invalid_argument("flux_step: c_omega required for the weighted system");

    const auto rhs_parts = flux_rhs(mesh, v, fbar_plus_mu);
    const auto mass = assemble_global(mesh, GlobalMatrix::mrt0);
    const auto stiff = assemble_global(mesh, GlobalMatrix::krt0);

    const auto edge_mask = mesh.active_edge_mask();
    std::vector<int> ids;
    for (int s = 0; s < mesh.n_edges(); ++s)
        if (edge_mask[s]) ids.push_back(s);

    const double am = 1.0 + beta;
    const double ak = (1.0 + 1.0 / beta) * w;
    std::vector<Triplet> trip;
    {
        const auto add = [&](const SparseSymMatrix& A, double scale) {
            const auto rp = A.row_ptr();
            const auto cols = A.cols();
            const auto vals = A.values();
            for (int i = 0; i < A.rows(); ++i)
                for (int q = rp[i]; q < rp[i + 1]; ++q)
                    trip.push_back({i, cols[q], scale * vals[q]});
        };
        add(mass, am);
        add(stiff, ak);
    }
    const auto full = SparseSymMatrix::assemble(mesh.n_edges(), trip);
    const auto A = full.restricted(ids);

    std::vector<double> rhs(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k)
        rhs[k] = am * rhs_parts.c[ids[k]] - ak * rhs_parts.d[ids[k]];

    const auto sol = cg_solve(A, rhs, opts.cg);
    if (!sol.converged)
        throw std::runtime_error("flux_step: CG did not reach the requested residual (achieved " +
                                 std::to_string(sol.rel_residual) + ")");

    EdgeFluxField tau(mesh.n_edges());
    for (std::size_t k = 0; k < ids.size(); ++k) tau[ids[k]] = sol.x[k];
    return tau;
}

ElementField multiplier_step(const RectMesh& mesh, double beta,
                             const EdgeFluxField& tau, const ElementField& fvalue,
                             const ElementField& vbar, const ElementField& phibar,
                             double c_omega) {
    if (beta <= 0.0 || c_omega <= 0.0)
        throw std::invalid_argument("multiplier_step: beta and c_omega must be positive");
    const auto div = rt0_divergence(mesh, tau);
    const double scale = c_omega * c_omega * (1.0 + 1.0 / beta);
    ElementField mu(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        mu[e] = std::max(0.0, -div[e] - fvalue[e] - (vbar[e] - phibar[e]) / scale);
    }
    return mu;
}

double beta_step(double p1, double p2, double c_omega, BetaRule rule,
                 double previous_beta, double beta_min, double beta_max) {
    if (p1 < 0.0 || p2 < 0.0) throw std::invalid_argument("beta_step: negative norm");
    double beta;
    if (p1 == 0.0) {
        // flux equals the gradient; keep the caller's beta
        beta = previous_beta;
    } else {
        const double factor = rule == BetaRule::friedrichs_balanced ? c_omega : 1.0;
        beta = factor * std::sqrt(p2) / std::sqrt(p1);
    }
    return std::clamp(beta, beta_min, beta_max);
}

MajorantParts evaluate_majorant(const RectMesh& mesh, double beta,
                                const ElementField& mu, const EdgeFluxField& tau,
                                const NodalField& v, const ElementLoad& load,
                                const NodalField& phi, double c_omega) {
    const auto local = local_majorant(mesh, beta, mu, tau, v, load, phi, c_omega);
    MajorantParts parts;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        parts.p1 += local.p1[e];
        parts.p2 += local.p2[e];
        parts.p3 += local.p3[e];
    }
    parts.total = 0.5 * (1.0 + beta) * parts.p1 +
                  0.5 * (1.0 + 1.0 / beta) * c_omega * c_omega * parts.p2 + parts.p3;
    return parts;
}

LocalMajorant local_majorant(const RectMesh& mesh, double beta,
                             const ElementField& mu, const EdgeFluxField& tau,
                             const NodalField& v, const ElementLoad& load,
                             const NodalField& phi, double c_omega) {
    if (beta <= 0.0 || c_omega <= 0.0)
        throw std::invalid_argument("evaluate_majorant: beta and c_omega must be positive");
    for (int e = 0; e < mesh.n_elements(); ++e)
        if (mesh.active_elements[e] && mu[e] < 0.0)
            throw std::invalid_argument("evaluate_majorant: mu must be nonnegative");

    const auto div = rt0_divergence(mesh, tau);
    const auto vbar = element_average(mesh, v);
    const auto phibar = element_average(mesh, phi);
    const double area = mesh.element_area();

    LocalMajorant out;
    out.p1 = ElementField(mesh.n_elements());
    out.p2 = ElementField(mesh.n_elements());
    out.p3 = ElementField(mesh.n_elements());
    for (int e = 0; e < mesh.n_elements(); ++e) {
        if (!mesh.active_elements[e]) continue;
        out.p1[e] = p1_element(mesh, e, v, tau);
        // integral of (div tau + mu + f)^2 from the stored moments of f
        const double a = div[e] + mu[e];
        out.p2[e] = a * a * area + 2.0 * a * load.fvalue[e] * area + load.f2int[e];
        out.p3[e] = mu[e] * (vbar[e] - phibar[e]) * area;
    }
    return out;
}

MajorantState run_algorithm1(const RectMesh& mesh, const NodalField& v,
                             const ElementLoad& load, const NodalField& phi,
                             const ElementField& mu0, double c_omega,
                             const AlgorithmOptions& opts,
                             std::vector<MajorantTraceRow>* trace) {
    if (opts.beta0 <= 0.0) throw std::invalid_argument("run_algorithm1: beta0 must be positive");
    for (int e = 0; e < mesh.n_elements(); ++e)
        if (mesh.active_elements[e] && mu0[e] < 0.0)
            throw std::invalid_argument("run_algorithm1: mu0 must be nonnegative");

    MajorantState state;
    state.beta = opts.beta0;
    state.mu = mu0;
    state.tau = EdgeFluxField(mesh.n_edges());
    state.c_omega = c_omega;

    const auto vbar = element_average(mesh, v);
    const auto phibar = element_average(mesh, phi);

    auto record = [&](int iter, char step) {
        state.parts = evaluate_majorant(mesh, state.beta, state.mu, state.tau, v,
                                        load, phi, c_omega);
        if (trace) trace->push_back({iter, step, state.beta, state.parts});
    };
    record(0, '0');

    FluxStepOptions flux_opts;
    flux_opts.weighting = opts.flux_weighting;
    flux_opts.c_omega = c_omega;
    flux_opts.cg = opts.cg;

    for (int it = 1; it <= opts.n_iter; ++it) {
        const double prev_total = state.parts.total;

        ElementField fpm(mesh.n_elements());
        for (int e = 0; e < mesh.n_elements(); ++e)
            if (mesh.active_elements[e]) fpm[e] = load.fvalue[e] + state.mu[e];
        state.tau = flux_step(mesh, state.beta, v, fpm, flux_opts);
        record(it, 'f');

        state.mu = multiplier_step(mesh, state.beta, state.tau, load.fvalue, vbar,
                                   phibar, c_omega);
        record(it, 'm');

        state.beta = beta_step(state.parts.p1, state.parts.p2, c_omega, opts.beta_rule,
                               state.beta, opts.beta_min, opts.beta_max);
        record(it, 'b');
        state.iterations = it;

        if (opts.stop_rel > 0.0 && prev_total > 0.0 &&
            prev_total - state.parts.total <= opts.stop_rel * prev_total)
            break;
    }
    return state;
}

} // namespace obstacle
