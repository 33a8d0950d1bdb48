#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>
#include <random>

#include "obstacle/benchmarks.hpp"
#include "obstacle/driver.hpp"
#include "obstacle/majorant.hpp"
#include "obstacle/qp.hpp"

using namespace obstacle;

namespace {
constexpr double kPi = std::numbers::pi;
const double kC = friedrichs_constant(FriedrichsDomain::square_side2);

// Benchmark II pipeline up to mu0; used by several majorant tests.
struct Pipeline {
    RectMesh inscribed, circumscribed;
    NodalField v;
    NodalField phi;
    ElementLoad load_circ;
    ElementField mu0;
};

Pipeline benchmark2_pipeline(double h, double f = -10.0, double phi_val = -1.0) {
    const auto full = build_uniform_mesh(Box{-1, -1, 1, 1}, h);
    const auto pair = classify_ring(full);
    Pipeline p;
    p.inscribed = full.with_active(pair.inscribed);
    p.circumscribed = full.with_active(pair.circumscribed);

    QpProblem qp;
    qp.K = assemble_global(p.inscribed, GlobalMatrix::kbil);
    qp.b = load_vector(p.inscribed,
                       element_average(p.inscribed, [f](double, double) { return f; }));
    const auto in_node = p.inscribed.active_node_mask();
    qp.free_mask.assign(full.n_nodes(), 0);
    for (int i = 0; i < full.n_nodes(); ++i)
        qp.free_mask[i] = (in_node[i] && !pair.dirichlet_nodes_inscribed[i]) ? 1 : 0;
    qp.lower.assign(full.n_nodes(), phi_val);
    qp.fixed.assign(full.n_nodes(), 0.0);
    const auto sol = solve_obstacle_qp(qp);
    p.v = sol.v;
    p.phi = NodalField(full.n_nodes(), phi_val);
    p.load_circ = ElementLoad::from_fbar(
        p.circumscribed, element_average(p.circumscribed, [f](double, double) { return f; }));
    p.mu0 = recover_mu0(sol, p.inscribed);
    return p;
}
} // namespace

TEST_CASE("Friedrichs constant") {
    SUBCASE("side-2 square") {
        CHECK(friedrichs_constant(FriedrichsDomain::square_side2) ==
              doctest::Approx(std::sqrt(2.0) / kPi).epsilon(1e-15));
        CHECK(friedrichs_constant(FriedrichsDomain::square_side2) ==
              doctest::Approx(0.450158).epsilon(1e-5));
        CHECK(friedrichs_constant(FriedrichsDomain::unit_disk_in_square) ==
              friedrichs_constant(FriedrichsDomain::square_side2));
    }
    SUBCASE("first eigenfunction nearly attains the constant") {
        const auto mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, 1.0 / 64);
        const auto K = assemble_global(mesh, GlobalMatrix::kbil);
        const auto M = assemble_global(mesh, GlobalMatrix::mbil);
        NodalField v(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i)
            v[i] = std::sin(kPi * (mesh.nodes[i][0] + 1) / 2) *
                   std::sin(kPi * (mesh.nodes[i][1] + 1) / 2);
        const double ratio = std::sqrt(M.quad_form(v.values, v.values) /
                                       K.quad_form(v.values, v.values));
        CHECK(ratio <= kC);
        CHECK(ratio >= kC * 0.99);
    }
    SUBCASE("random discrete fields satisfy the inequality") {
        const auto mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, 0.125);
        const auto K = assemble_global(mesh, GlobalMatrix::kbil);
        const auto M = assemble_global(mesh, GlobalMatrix::mbil);
        const auto bd = mesh.boundary_node_mask();
        std::mt19937 rng(41);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            NodalField v(mesh.n_nodes(), 0.0);
            for (int i = 0; i < mesh.n_nodes(); ++i)
                if (!bd[i]) v[i] = dist(rng);
            CHECK(std::sqrt(M.quad_form(v.values, v.values)) <=
                  kC * std::sqrt(K.quad_form(v.values, v.values)) * (1 + 1e-12));
        }
    }
}

TEST_CASE("flux step") {
    SUBCASE("zero data gives zero flux") {
        const auto mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, 0.5);
        FluxStepOptions opts;
        opts.c_omega = kC;
        const auto tau = flux_step(mesh, 1.0, NodalField(mesh.n_nodes(), 0.0),
                                   ElementField(mesh.n_elements(), 0.0), opts);
        for (double y : tau.values) CHECK(y == 0.0);
    }
    SUBCASE("a linear field is represented exactly") {
        // v = 2x - 3y + 1: grad v = (2,-3) is an RT0 field with zero divergence
        const auto mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, 1.0);
        NodalField v(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i)
            v[i] = 2 * mesh.nodes[i][0] - 3 * mesh.nodes[i][1] + 1;
        for (auto weighting : {FluxWeighting::majorant_consistent, FluxWeighting::paper_literal}) {
            FluxStepOptions opts;
            opts.weighting = weighting;
            opts.c_omega = kC;
            const auto tau = flux_step(mesh, 0.8, v, ElementField(mesh.n_elements(), 0.0), opts);
            for (int e = 0; e < mesh.n_elements(); ++e) {
                const auto& ed = mesh.elem_edges[e];
                CHECK(tau[ed[0]] == doctest::Approx(-3.0).epsilon(1e-9)); // +y normals
                CHECK(tau[ed[2]] == doctest::Approx(-3.0).epsilon(1e-9));
                CHECK(tau[ed[1]] == doctest::Approx(2.0).epsilon(1e-9)); // +x normals
                CHECK(tau[ed[3]] == doctest::Approx(2.0).epsilon(1e-9));
            }
            const auto load = ElementLoad::from_fbar(mesh, ElementField(mesh.n_elements(), 0.0));
            const auto parts = evaluate_majorant(mesh, 0.8, ElementField(mesh.n_elements(), 0.0),
                                                 tau, v, load, NodalField(mesh.n_nodes(), -5.0), kC);
            CHECK(parts.p1 <= 1e-18);
            CHECK(parts.p2 <= 1e-18);
        }
    }
    SUBCASE("P1 dominates P2 and P3 on Benchmark II") {
        auto p = benchmark2_pipeline(1.0 / 16);
        AlgorithmOptions opts;
        const auto state = run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi, p.mu0,
                                          kC, opts);
        CHECK(state.parts.p1 > 1e1 * state.parts.p2);
        CHECK(state.parts.p1 > 1e1 * state.parts.p3);
        // the equilibrium part collapses once the minimization settles
        opts.n_iter = 8;
        const auto settled = run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi,
                                            p.mu0, kC, opts);
        CHECK(settled.parts.p1 > 1e3 * settled.parts.p2);
    }
    SUBCASE("first-order stationarity of the flux objective") {
        auto p = benchmark2_pipeline(0.25);
        const double beta = 1.0;
        ElementField fpm(p.circumscribed.n_elements());
        for (int e = 0; e < p.circumscribed.n_elements(); ++e)
            if (p.circumscribed.active_elements[e])
                fpm[e] = p.load_circ.fvalue[e] + p.mu0[e];
        FluxStepOptions fopts;
        fopts.c_omega = kC;
        const auto tau = flux_step(p.circumscribed, beta, p.v, fpm, fopts);
        // the step minimizes (1+b)/2 P1 + (1+1/b)/2 C^2 P2 over the flux
        auto objective = [&](const EdgeFluxField& t) {
            const auto parts = evaluate_majorant(p.circumscribed, beta, p.mu0, t, p.v,
                                                 p.load_circ, p.phi, kC);
            return 0.5 * (1 + beta) * parts.p1 +
                   0.5 * (1 + 1 / beta) * kC * kC * parts.p2;
        };
        const double base = objective(tau);
        const auto active = p.circumscribed.active_edge_mask();
        std::vector<int> ids;
        for (int s = 0; s < p.circumscribed.n_edges(); ++s)
            if (active[s]) ids.push_back(s);
        std::mt19937 rng(17);
        std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
        for (int t = 0; t < 20; ++t) {
            EdgeFluxField pert = tau;
            const int edge = ids[pick(rng)];
            pert[edge] += (t % 2 ? 1e-3 : -1e-3);
            CHECK(objective(pert) >= base - 1e-12 * std::abs(base));
        }
    }
}

TEST_CASE("flux CG failure is propagated") {
    auto p = benchmark2_pipeline(0.125);
    ElementField fpm(p.circumscribed.n_elements());
    for (int e = 0; e < p.circumscribed.n_elements(); ++e)
        if (p.circumscribed.active_elements[e]) fpm[e] = p.load_circ.fvalue[e];
    FluxStepOptions opts;
    opts.c_omega = kC;
    opts.cg.max_iter = 1;
    CHECK_THROWS_AS(flux_step(p.circumscribed, 1.0, p.v, fpm, opts), std::runtime_error);
}

TEST_CASE("multiplier step") {
    const auto mesh = build_uniform_mesh(Box{0, 0, 1, 1}, 1.0);
    const EdgeFluxField tau0(mesh.n_edges(), 0.0);
    SUBCASE("clip of a nonpositive argument gives zero") {
        const auto mu = multiplier_step(mesh, 1.0, tau0, ElementField(1, 0.0),
                                        ElementField(1, 2.0), ElementField(1, 1.0), kC);
        CHECK(mu[0] == 0.0);
    }
    SUBCASE("arithmetic of the local formula") {
        // -div tau - f = 10 and vbar = phibar
        const auto mu = multiplier_step(mesh, 1.0, tau0, ElementField(1, -10.0),
                                        ElementField(1, 0.5), ElementField(1, 0.5), kC);
        CHECK(mu[0] == doctest::Approx(10.0));
    }
    SUBCASE("contact elements of Benchmark II recover -f at rate O(h)") {
        // the flux trade across the contact interface biases div tau by O(h)
        // (measured constant ~15), so the multiplier settles at -f + O(h)
        double prev = 1e300;
        for (double h : {0.125, 0.0625}) {
            auto p = benchmark2_pipeline(h);
            AlgorithmOptions opts;
            opts.n_iter = 8;
            const auto state = run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi,
                                              p.mu0, kC, opts);
            int e_origin = -1;
            for (int e = 0; e < p.circumscribed.n_elements(); ++e) {
                const auto& nd = p.circumscribed.elements[e];
                if (p.circumscribed.nodes[nd[0]][0] == 0.0 &&
                    p.circumscribed.nodes[nd[0]][1] == 0.0)
                    e_origin = e;
            }
            REQUIRE(e_origin >= 0);
            const double err = std::abs(state.mu[e_origin] - 10.0);
            CHECK(err <= 20.0 * h);
            CHECK(err < prev / 1.5);
            prev = err;
        }
    }
}

TEST_CASE("beta step") {
    SUBCASE("balance point") {
        CHECK(beta_step(kC * kC * 4.0, 4.0, kC, BetaRule::friedrichs_balanced, 1.0) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("P2 = 0 clamps to beta_min") {
        CHECK(beta_step(1.0, 0.0, kC, BetaRule::friedrichs_balanced, 1.0) ==
              doctest::Approx(1e-8));
    }
    SUBCASE("P1 = 0 keeps the previous beta") {
        CHECK(beta_step(0.0, 2.0, kC, BetaRule::friedrichs_balanced, 0.37) ==
              doctest::Approx(0.37));
    }
    SUBCASE("paper rule omits the Friedrichs factor") {
        CHECK(beta_step(1.0, 4.0, kC, BetaRule::paper_literal, 1.0) == doctest::Approx(2.0));
    }
    SUBCASE("the balanced value minimizes the weighted total") {
        std::mt19937 rng(53);
        std::uniform_real_distribution<double> dist(0.1, 5.0);
        for (int t = 0; t < 10; ++t) {
            const double p1 = dist(rng), p2 = dist(rng);
            const double beta = beta_step(p1, p2, kC, BetaRule::friedrichs_balanced, 1.0);
            auto total = [&](double b) {
                return 0.5 * (1 + b) * p1 + 0.5 * (1 + 1 / b) * kC * kC * p2;
            };
            for (double other : {0.5, 1.0, 2.0})
                CHECK(total(beta) <= total(other) * (1 + 1e-12));
        }
    }
}

TEST_CASE("majorant evaluation") {
    SUBCASE("exact representation gives zero total") {
        // v linear, tau = grad v, mu = -f with v = phi everywhere
        const auto mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, 0.5);
        NodalField v(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i)
            v[i] = mesh.nodes[i][0] + 2 * mesh.nodes[i][1];
        EdgeFluxField tau(mesh.n_edges());
        for (int e = 0; e < mesh.n_elements(); ++e) {
            const auto& ed = mesh.elem_edges[e];
            tau[ed[0]] = tau[ed[2]] = 2.0;
            tau[ed[1]] = tau[ed[3]] = 1.0;
        }
        const auto load = ElementLoad::from_fbar(mesh, ElementField(mesh.n_elements(), -2.0));
        const ElementField mu(mesh.n_elements(), 2.0);
        const auto parts = evaluate_majorant(mesh, 0.5, mu, tau, v, load, v, kC);
        CHECK(parts.p1 <= 1e-25);
        CHECK(parts.p2 <= 1e-25);
        CHECK(parts.p3 == 0.0);
        CHECK(parts.total <= 1e-24);
    }
    SUBCASE("constant loading with zero state") {
        const auto mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, 0.5);
        const double c = 3.0, beta = 0.7;
        const auto load = ElementLoad::from_fbar(mesh, ElementField(mesh.n_elements(), c));
        const auto parts =
            evaluate_majorant(mesh, beta, ElementField(mesh.n_elements(), 0.0),
                              EdgeFluxField(mesh.n_edges(), 0.0),
                              NodalField(mesh.n_nodes(), 0.0), load,
                              NodalField(mesh.n_nodes(), -1.0), kC);
        CHECK(parts.p1 == 0.0);
        CHECK(parts.p2 == doctest::Approx(c * c * 4.0).epsilon(1e-14)); // |Omega| = 4
        CHECK(parts.total ==
              doctest::Approx(0.5 * (1 + 1 / beta) * kC * kC * c * c * 4.0).epsilon(1e-14));
    }
    SUBCASE("negative mu is rejected") {
        const auto mesh = build_uniform_mesh(Box{0, 0, 1, 1}, 1.0);
        const auto load = ElementLoad::from_fbar(mesh, ElementField(1, 0.0));
        CHECK_THROWS_AS(evaluate_majorant(mesh, 1.0, ElementField(1, -0.5),
                                          EdgeFluxField(mesh.n_edges()), NodalField(4),
                                          load, NodalField(4), kC),
                        std::invalid_argument);
    }
}

TEST_CASE("algorithm 1") {
    SUBCASE("n_iter = 0 evaluates the initial state") {
        auto p = benchmark2_pipeline(0.25);
        AlgorithmOptions opts;
        opts.n_iter = 0;
        const auto state = run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi, p.mu0,
                                          kC, opts);
        CHECK(std::isfinite(state.parts.total));
        CHECK(state.iterations == 0);
        for (double y : state.tau.values) CHECK(y == 0.0);
    }
    SUBCASE("trace is non-increasing across all sub-steps") {
        for (double h : {0.25, 0.125}) {
            auto p = benchmark2_pipeline(h);
            AlgorithmOptions opts;
            opts.n_iter = 3;
            std::vector<MajorantTraceRow> trace;
            run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi, p.mu0, kC, opts, &trace);
            REQUIRE(trace.size() == 10);
            for (std::size_t k = 1; k < trace.size(); ++k)
                CHECK(trace[k].parts.total <=
                      trace[k - 1].parts.total * (1 + 1e-12) + 1e-300);
        }
    }
    SUBCASE("mu stays nonnegative and P3 nonnegative") {
        auto p = benchmark2_pipeline(0.125);
        AlgorithmOptions opts;
        const auto state = run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi, p.mu0,
                                          kC, opts);
        for (int e = 0; e < p.circumscribed.n_elements(); ++e)
            if (p.circumscribed.active_elements[e]) CHECK(state.mu[e] >= 0.0);
        CHECK(state.parts.p3 >= -1e-12);
    }
    SUBCASE("relative-decrease stop ends the loop early") {
        auto p = benchmark2_pipeline(0.125);
        AlgorithmOptions opts;
        opts.n_iter = 6;
        opts.stop_rel = 0.05;
        const auto state = run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi, p.mu0,
                                          kC, opts);
        CHECK(state.iterations < 6);
        CHECK(state.iterations >= 1);
    }
    SUBCASE("efficiency improves from iteration 1 to 2") {
        auto p = benchmark2_pipeline(1.0 / 32);
        AlgorithmOptions opts;
        std::vector<MajorantTraceRow> trace;
        run_algorithm1(p.circumscribed, p.v, p.load_circ, p.phi, p.mu0, kC, opts, &trace);
        // rows: init, f,m,b (iter1), f,m,b (iter2)
        CHECK(trace[6].parts.total < trace[3].parts.total);
    }
}
