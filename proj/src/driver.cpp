#include "obstacle/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "obstacle/io.hpp"

namespace obstacle {

namespace fs = std::filesystem;

MeshSize parse_mesh_size(const std::string& s) {
    const auto slash = s.find('/');
    try {
        MeshSize m;
        if (slash == std::string::npos) {
            m.num = std::stol(s);
            m.den = 1;
        } else {
            m.num = std::stol(s.substr(0, slash));
            m.den = std::stol(s.substr(slash + 1));
        }
        if (m.num <= 0 || m.den <= 0) throw std::invalid_argument("nonpositive");
        return m;
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid mesh size '" + s + "' (expected p/q)");
    }
}

std::vector<MeshSize> parse_levels(const std::string& s) {
    std::vector<MeshSize> out;
    const auto range = s.find("..");
    if (range != std::string::npos) {
        MeshSize from = parse_mesh_size(s.substr(0, range));
        MeshSize to = parse_mesh_size(s.substr(range + 2));
        const double target = to.value();
        MeshSize cur = from;
        out.push_back(cur);
        while (cur.value() > target * 1.000001) {
            if (cur.num % 2 == 0) cur.num /= 2; else cur.den *= 2;
            out.push_back(cur);
            if (out.size() > 64) throw std::invalid_argument("level range too long: " + s);
        }
        return out;
    }
    std::istringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_mesh_size(tok));
    if (out.empty()) throw std::invalid_argument("empty level list");
    return out;
}

ExactSolution make_benchmark(const RunConfig& cfg) {
    switch (cfg.benchmark) {
        case BenchmarkId::I: return benchmark1(cfg.bench_R);
        case BenchmarkId::II: return benchmark2(cfg.bench_f, cfg.bench_phi);
        case BenchmarkId::III:
            return benchmark3(cfg.bench_f, cfg.bench_phi_max, cfg.bench_rho);
    }
    throw std::invalid_argument("make_benchmark: unknown id");
}

namespace {

AlgorithmOptions algorithm_options(const RunConfig& cfg) {
    AlgorithmOptions o;
    o.beta0 = cfg.beta0;
    o.n_iter = cfg.n_iter;
    o.flux_weighting = cfg.paper_flux ? FluxWeighting::paper_literal
                                      : FluxWeighting::majorant_consistent;
    o.beta_rule = cfg.paper_beta ? BetaRule::paper_literal : BetaRule::friedrichs_balanced;
    o.stop_rel = cfg.stop_rel;
    o.cg = cfg.flux_cg;
    return o;
}

ElementLoad make_load(const RectMesh& mesh, const ExactSolution& exact, bool avg_load,
                      LoadMoments* moments_out) {
    if (exact.constant_load || avg_load) {
        const auto fbar = element_average(mesh, exact.f);
        if (moments_out) *moments_out = load_moments(mesh, fbar);
        return ElementLoad::from_fbar(mesh, fbar);
    }
    LoadMoments m = load_moments(mesh, exact.f);
    if (moments_out) *moments_out = m;
    return ElementLoad::from_moments(mesh, m);
}

NodalField nodal_values(const RectMesh& mesh, const ScalarFn& g) {
    NodalField out(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i)
        out[i] = g(mesh.nodes[i][0], mesh.nodes[i][1]);
    return out;
}

void dump_fields(const RectMesh& maj_mesh, const std::string& dir, const NodalField& v,
                 const MajorantState& state, double beta, const ElementLoad& load,
                 const NodalField& phi) {
    fs::create_directories(dir);
    write_mesh_csv(maj_mesh, dir + "/nodes.csv", dir + "/elements.csv");
    const auto centers = rt0_at_centers(maj_mesh, state.tau);
    std::vector<double> tx(maj_mesh.n_elements(), 0.0), ty(maj_mesh.n_elements(), 0.0);
    for (int e = 0; e < maj_mesh.n_elements(); ++e) {
        tx[e] = centers[e][0];
        ty[e] = centers[e][1];
    }
    const auto local = local_majorant(maj_mesh, beta, state.mu, state.tau, v, load, phi,
                                      state.c_omega);
    write_vtk(maj_mesh, dir + "/fields.vtk", {{"v", v.values}},
              {{"mu", state.mu.values},
               {"tau_x", tx},
               {"tau_y", ty},
               {"majorant_p1", local.p1.values},
               {"majorant_p2", local.p2.values},
               {"majorant_p3", local.p3.values}});

    std::ofstream csv(dir + "/fields.csv");
    csv << "element,tau_x,tau_y,mu,majorant_p1,majorant_p2,majorant_p3\n";
    for (int e = 0; e < maj_mesh.n_elements(); ++e) {
        if (!maj_mesh.active_elements[e]) continue;
        csv << e << ',' << format_double(tx[e]) << ',' << format_double(ty[e]) << ','
            << format_double(state.mu[e]) << ',' << format_double(local.p1[e]) << ','
            << format_double(local.p2[e]) << ',' << format_double(local.p3[e]) << '\n';
    }
}

void write_trace(const std::vector<MajorantTraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    out << "iteration,step,beta,P1,P2,P3,total\n";
    for (const auto& row : trace)
        out << row.iteration << ',' << row.step << ',' << format_double(row.beta) << ','
            << format_double(row.parts.p1) << ',' << format_double(row.parts.p2) << ','
            << format_double(row.parts.p3) << ',' << format_double(row.parts.total) << '\n';
}

void write_qp_trace(const std::vector<QpTraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    out << "sweep,energy,measure\n";
    for (const auto& row : trace)
        out << row.sweep << ',' << format_double(row.energy) << ','
            << format_double(row.measure) << '\n';
}

LevelRun run_square_level(const RunConfig& cfg, const ExactSolution& exact, MeshSize h,
                          const std::string& dump_dir) {
    const RectMesh mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, h.value());
    const auto K = assemble_global(mesh, GlobalMatrix::kbil);

    LoadMoments moments;
    const ElementLoad load = make_load(mesh, exact, cfg.avg_load, &moments);
    const auto b = load_vector(mesh, moments);

    QpProblem qp;
    qp.K = K;
    qp.b = b;
    const auto boundary = mesh.boundary_node_mask();
    qp.free_mask.assign(mesh.n_nodes(), 0);
    for (int i = 0; i < mesh.n_nodes(); ++i) qp.free_mask[i] = boundary[i] ? 0 : 1;
    const auto phi = nodal_values(mesh, exact.phi);
    qp.lower = phi.values;
    qp.fixed.assign(mesh.n_nodes(), 0.0);
    for (int i = 0; i < mesh.n_nodes(); ++i)
        if (boundary[i]) qp.fixed[i] = exact.dirichlet(mesh.nodes[i][0], mesh.nodes[i][1]);

    QpOptions qpo = cfg.qp;
    if (cfg.qp_trace && !dump_dir.empty()) qpo.trace_every = 1;
    const auto sol = solve_obstacle_qp(qp, qpo);
    if (!sol.converged)
        throw std::runtime_error("obstacle QP did not converge (measure " +
                                 std::to_string(sol.residual_measure) + ")");
    if (qpo.trace_every > 0) {
        fs::create_directories(dump_dir);
        write_qp_trace(sol.trace, dump_dir + "/qp_trace.csv");
    }
    const double j_v = discrete_energy(K, b, sol.v.values);
    const auto mu0 = recover_mu0(sol, mesh);

    const double c_omega = friedrichs_constant(FriedrichsDomain::square_side2);
    LevelRun run;
    const auto state = run_algorithm1(mesh, sol.v, load, phi, mu0, c_omega,
                                      algorithm_options(cfg), &run.trace);

    const MeshChain chain = build_chain(mesh);
    std::array<double, 3> err2{};
    for (int l = 0; l < 3; ++l) err2[l] = energy_error_sq(chain, sol.v, exact.u, l);

    run.report = estimate_chain(to_string(exact.id), h.value(), mesh.n_nodes(),
                                mesh.n_edges(), err2, j_v, exact.energy, state);
    if (!dump_dir.empty() && cfg.dump_fields)
        dump_fields(mesh, dump_dir, sol.v, state, state.beta, load, phi);
    return run;
}

LevelRun run_ring_level(const RunConfig& cfg, const ExactSolution& exact, MeshSize h,
                        const std::string& dump_dir) {
    const RectMesh full = build_uniform_mesh(Box{-1, -1, 1, 1}, h.value());
    const RingMeshPair pair = classify_ring(full);
    LevelRun run;
    if (pair.degenerate) {
        run.report.benchmark = to_string(exact.id);
        run.report.h = h.value();
        run.report.n_nodes = full.n_nodes();
        run.report.n_edges = full.n_edges();
        run.report.degenerate = true;
        return run;
    }

    const RectMesh inscribed = full.with_active(pair.inscribed);
    const RectMesh circumscribed = full.with_active(pair.circumscribed);

    const auto K_in = assemble_global(inscribed, GlobalMatrix::kbil);
    LoadMoments moments_in;
    make_load(inscribed, exact, cfg.avg_load, &moments_in);
    const auto b_in = load_vector(inscribed, moments_in);

    QpProblem qp;
    qp.K = K_in;
    qp.b = b_in;
    const auto in_node = inscribed.active_node_mask();
    qp.free_mask.assign(full.n_nodes(), 0);
    for (int i = 0; i < full.n_nodes(); ++i)
        qp.free_mask[i] = (in_node[i] && !pair.dirichlet_nodes_inscribed[i]) ? 1 : 0;
    const auto phi = nodal_values(full, exact.phi);
    qp.lower = phi.values;
    qp.fixed.assign(full.n_nodes(), 0.0);

    QpOptions qpo = cfg.qp;
    if (cfg.qp_trace && !dump_dir.empty()) qpo.trace_every = 1;
    const auto sol = solve_obstacle_qp(qp, qpo);
    if (!sol.converged)
        throw std::runtime_error("obstacle QP did not converge (measure " +
                                 std::to_string(sol.residual_measure) + ")");
    if (qpo.trace_every > 0) {
        fs::create_directories(dump_dir);
        write_qp_trace(sol.trace, dump_dir + "/qp_trace.csv");
    }
    const double j_v_in = discrete_energy(K_in, b_in, sol.v.values);

    // zero extension to the circumscribed rectangulation
    const auto K_ex = assemble_global(circumscribed, GlobalMatrix::kbil);
    LoadMoments moments_ex;
    const ElementLoad load_ex = make_load(circumscribed, exact, cfg.avg_load, &moments_ex);
    const auto b_ex = load_vector(circumscribed, moments_ex);
    const double j_v_ex = discrete_energy(K_ex, b_ex, sol.v.values);

    const auto mu0 = recover_mu0(sol, inscribed);
    const double c_omega = friedrichs_constant(FriedrichsDomain::unit_disk_in_square);
    const auto state = run_algorithm1(circumscribed, sol.v, load_ex, phi, mu0, c_omega,
                                      algorithm_options(cfg), &run.trace);

    const MeshChain chain = build_chain(inscribed);
    run.report = ring_estimate_chain(pair, chain, sol.v, exact.u, j_v_in, j_v_ex,
                                     exact.energy, state);
    run.report.benchmark = to_string(exact.id);
    if (!dump_dir.empty() && cfg.dump_fields)
        dump_fields(circumscribed, dump_dir, sol.v, state, state.beta, load_ex, phi);
    return run;
}

} // namespace

LevelRun run_level(const RunConfig& cfg, const ExactSolution& exact, MeshSize h,
                   const std::string& dump_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    LevelRun run = exact.ring_domain ? run_ring_level(cfg, exact, h, dump_dir)
                                     : run_square_level(cfg, exact, h, dump_dir);
    run.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

GridResult run_grid(const RunConfig& cfg) {
    RunConfig cfg_local = cfg;
    if (const char* env = std::getenv("OBSTACLE_OUT"); env && *env) cfg_local.out_dir = env;
    const ExactSolution exact = make_benchmark(cfg_local);

    fs::create_directories(cfg_local.out_dir);
    if (!fs::is_directory(cfg_local.out_dir))
        throw std::runtime_error("output directory is not writable: " + cfg_local.out_dir);

    const std::size_t n = cfg_local.levels.size();
    GridResult result;
    result.runs.resize(n);
    std::vector<std::string> errors(n);

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned n_threads =
        std::min<std::size_t>(cfg_local.threads > 0 ? cfg_local.threads : hw, n);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= n) return;
            const MeshSize h = cfg_local.levels[k];
            std::string dump;
            if (cfg_local.dump_fields || cfg_local.qp_trace)
                dump = cfg_local.out_dir + "/h_" + std::to_string(h.num) + "_" +
                       std::to_string(h.den);
            try {
                result.runs[k] = run_level(cfg_local, exact, h, dump);
            } catch (const std::exception& ex) {
                errors[k] = ex.what();
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    result.report_path = cfg_local.out_dir + "/report.csv";
    std::ofstream report(result.report_path);
    report << kReportHeader << '\n';
    std::vector<MajorantReport> rows;
    for (std::size_t k = 0; k < n; ++k) {
        if (!errors[k].empty()) continue;
        if (result.runs[k].report.degenerate) continue;
        rows.push_back(result.runs[k].report);
        report << report_csv_row(result.runs[k].report) << '\n';
    }
    report.close();

    result.summary_path = cfg_local.out_dir + "/summary.txt";
    std::ofstream summary(result.summary_path);
    summary << "benchmark " << to_string(cfg_local.benchmark) << '\n';
    switch (cfg_local.benchmark) {
        case BenchmarkId::I:
            summary << "R = " << format_double(cfg_local.bench_R) << '\n';
            break;
        case BenchmarkId::II:
            summary << "f = " << format_double(cfg_local.bench_f)
                    << ", phi = " << format_double(cfg_local.bench_phi)
                    << ", R = " << format_double(exact.contact_radius) << '\n';
            break;
        case BenchmarkId::III:
            summary << "f = " << format_double(cfg_local.bench_f)
                    << ", phi_max = " << format_double(cfg_local.bench_phi_max)
                    << ", rho = " << format_double(cfg_local.bench_rho)
                    << ", R = " << format_double(exact.contact_radius)
                    << ", psi = " << format_double(exact.psi) << '\n';
            break;
    }
    summary << "J(u) = " << format_double(exact.energy) << '\n';
    summary << "majorant iterations = " << cfg_local.n_iter
            << ", beta0 = " << format_double(cfg_local.beta0) << "\n\n";
    summary << convergence_table(rows);
    for (std::size_t k = 0; k < n; ++k) {
        if (!errors[k].empty())
            summary << "level " << cfg_local.levels[k].num << '/' << cfg_local.levels[k].den
                    << " FAILED: " << errors[k] << '\n';
        else if (result.runs[k].report.degenerate)
            summary << "level " << cfg_local.levels[k].num << '/' << cfg_local.levels[k].den
                    << " degenerate mesh (empty inscribed rectangulation), no chain\n";
    }
    summary.close();

    if (cfg_local.majorant_trace) {
        for (std::size_t k = 0; k < n; ++k) {
            if (!errors[k].empty()) continue;
            const MeshSize h = cfg_local.levels[k];
            write_trace(result.runs[k].trace, cfg_local.out_dir + "/trace_h_" +
                                                  std::to_string(h.num) + "_" +
                                                  std::to_string(h.den) + ".csv");
        }
    }

    for (const auto& e : errors)
        if (!e.empty()) result.exit_status = 1;
    return result;
}

} // namespace obstacle
