#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "obstacle/driver.hpp"
#include "obstacle/io.hpp"

using namespace obstacle;

namespace {

// Flat key=value config support: "--config file" is replaced by the file's
// entries as "--key=value" arguments, skipping keys already given on the
// command line so explicit flags win. Unknown keys then fail the normal
// option parse.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    std::size_t pos = args.size();
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            pos = i;
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            pos = i;
            args.erase(args.begin() + i);
            break;
        }
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path);
    std::vector<std::string> extra;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line is not key=value: " + line);
        std::string key = line.substr(first, eq - first);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!key.empty() && key.front() == '-') key.erase(key.begin());
        std::string value = line.substr(eq + 1);
        const auto vfirst = value.find_first_not_of(" \t");
        value = vfirst == std::string::npos ? "" : value.substr(vfirst);
        bool already = false;
        for (const auto& a : args)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) already = true;
        if (!already) extra.push_back("--" + key + "=" + value);
    }
    args.insert(args.begin() + pos, extra.begin(), extra.end());
    return args;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Obstacle problem solver with a guaranteed functional error bound"};
    app.require_subcommand(1);

    // run ------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "solve a benchmark over a mesh-level grid");
    std::string benchmark = "II";
    std::string levels = "1/2..1/64";
    RunConfig cfg;
    run->add_option("--benchmark", benchmark, "benchmark id: I, II or III")->required();
    run->add_option("--R", cfg.bench_R, "contact radius (Benchmark I)");
    run->add_option("--f", cfg.bench_f, "constant loading (Benchmarks II/III)");
    run->add_option("--phi", cfg.bench_phi, "constant obstacle (Benchmark II)");
    run->add_option("--phimax", cfg.bench_phi_max, "obstacle maximum (Benchmark III)");
    run->add_option("--rho", cfg.bench_rho, "sphere radius (Benchmark III)");
    run->add_option("--levels", levels, "mesh sizes: '1/2..1/64' or '1/4,1/8'");
    run->add_option("--iters", cfg.n_iter, "majorant minimization iterations");
    run->add_option("--beta0", cfg.beta0, "initial beta");
    run->add_option("--stop-rel", cfg.stop_rel,
                    "optional relative-decrease stop for the minimization");
    run->add_flag("--avg-load", cfg.avg_load,
                  "use the four-node-average loading everywhere (default: exact moments)");
    run->add_flag("--paper-flux", cfg.paper_flux,
                  "flux system without the Friedrichs weight on the div term");
    run->add_flag("--paper-beta", cfg.paper_beta,
                  "beta update without the Friedrichs factor");
    run->add_option("--omega", cfg.qp.omega, "projected SOR relaxation");
    run->add_option("--qp-tol", cfg.qp.tol, "projected SOR stopping measure");
    run->add_option("--out", cfg.out_dir, "output directory (env OBSTACLE_OUT overrides)");
    run->add_flag("--dump-fields,!--no-dump-fields", cfg.dump_fields,
                  "per-level VTK/CSV field dumps (default: on)");
    run->add_flag("--trace", cfg.majorant_trace, "write per-level majorant trace CSV");
    run->add_flag("--qp-trace", cfg.qp_trace, "write per-level solver trace CSV (sweep,energy,measure)");
    run->add_option("--threads", cfg.threads, "worker pool size (default: cores)");
    std::string config_doc;
    run->add_option("--config", config_doc,
                    "flat key=value config file; command-line flags override it");

    // table ----------------------------------------------------------------
    auto* table = app.add_subcommand("table", "print the convergence table of a report");
    std::string report_path;
    table->add_option("report", report_path, "path to report.csv")->required();

    // mesh -----------------------------------------------------------------
    auto* meshcmd = app.add_subcommand("mesh", "dump a mesh as CSV and VTK");
    std::string mesh_h = "1/16";
    std::string mesh_out = "mesh_out";
    bool mesh_ring = false;
    meshcmd->add_option("--size", mesh_h, "mesh size p/q");
    meshcmd->add_option("--out", mesh_out, "output directory");
    meshcmd->add_flag("--ring", mesh_ring, "restrict to the inscribed ring rectangulation");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    // CLI11 consumes the argument vector in reverse order
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    reversed.pop_back(); // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            cfg.benchmark = benchmark_from_string(benchmark);
            cfg.levels = parse_levels(levels);
            const GridResult result = run_grid(cfg);
            std::cout << "wrote " << result.report_path << " and " << result.summary_path
                      << "\n";
            for (const auto& r : result.runs)
                if (!r.report.benchmark.empty() && !r.report.degenerate)
                    std::printf("h=%-10.6g chain=%s ieff=%.4g [%.2fs]\n", r.report.h,
                                r.report.chain_ok ? "ok" : "VIOLATED", r.report.efficiency,
                                r.solve_seconds);
            return result.exit_status;
        }
        if (table->parsed()) {
            std::cout << convergence_table(read_report_csv(report_path));
            return 0;
        }
        if (meshcmd->parsed()) {
            const MeshSize h = parse_mesh_size(mesh_h);
            RectMesh mesh = build_uniform_mesh(Box{-1, -1, 1, 1}, h.value());
            if (mesh_ring) {
                const auto pair = classify_ring(mesh);
                mesh = mesh.with_active(pair.inscribed);
            }
            std::filesystem::create_directories(mesh_out);
            write_mesh_csv(mesh, mesh_out + "/nodes.csv", mesh_out + "/elements.csv");
            write_vtk(mesh, mesh_out + "/mesh.vtk", {}, {});
            std::cout << "wrote " << mesh_out << ": " << mesh.n_active() << " active of "
                      << mesh.n_elements() << " elements, " << mesh.n_nodes() << " nodes, "
                      << mesh.n_edges() << " edges\n";
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
