#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "obstacle/benchmarks.hpp"
#include "obstacle/error_metrics.hpp"
#include "obstacle/majorant.hpp"
#include "obstacle/qp.hpp"

namespace obstacle {

/// Mesh size as an exact fraction p/q (so "1/64" never goes through a
/// lossy float parse).
struct MeshSize {
    long num = 1;
    long den = 1;
    double value() const { return static_cast<double>(num) / den; }
};

MeshSize parse_mesh_size(const std::string& s);

/// "1/2..1/64" (halving range) or a comma list "1/2,1/8".
std::vector<MeshSize> parse_levels(const std::string& s);

struct RunConfig {
    BenchmarkId benchmark = BenchmarkId::II;
    double bench_R = 0.7;        // Benchmark I
    double bench_f = -10.0;      // II and III
    double bench_phi = -1.0;     // II
    double bench_phi_max = -1.0; // III
    double bench_rho = 1.2;      // III
    std::vector<MeshSize> levels = {{1, 2}, {1, 4}, {1, 8}, {1, 16}, {1, 32}, {1, 64}};

    int n_iter = 2;
    double beta0 = 1.0;
    bool avg_load = false;    // four-node-average loading everywhere
    bool paper_flux = false;  // flux system without the C^2 weight
    bool paper_beta = false;  // beta step without the C factor
    double stop_rel = 0.0;
    QpOptions qp;
    CgOptions flux_cg;

    std::string out_dir = "out";
    bool dump_fields = true;
    bool qp_trace = false;
    bool majorant_trace = false;
    int threads = 0; // 0 -> hardware concurrency
};

ExactSolution make_benchmark(const RunConfig& cfg);

struct LevelRun {
    MajorantReport report;
    std::vector<MajorantTraceRow> trace;
    double solve_seconds = 0.0;
};

/// Solves one (benchmark, h) cell: mesh (+ring classification), obstacle QP,
/// multiplier recovery, Algorithm 1, error levels, report row.
LevelRun run_level(const RunConfig& cfg, const ExactSolution& exact, MeshSize h,
                   const std::string& dump_dir = {});

struct GridResult {
    std::vector<LevelRun> runs;
    std::string report_path;
    std::string summary_path;
    int exit_status = 0;
};

/// Runs the level grid on a worker pool and writes report.csv, summary.txt
/// and optional field dumps under the output directory.
GridResult run_grid(const RunConfig& cfg);

} // namespace obstacle
