#include "obstacle/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace obstacle {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}
} // namespace

void write_mesh_csv(const RectMesh& mesh, const std::string& nodes_path,
                    const std::string& elements_path) {
    auto nodes = open_out(nodes_path);
    nodes << "id,x,y\n";
    for (int i = 0; i < mesh.n_nodes(); ++i)
        nodes << i << ',' << format_double(mesh.nodes[i][0]) << ','
              << format_double(mesh.nodes[i][1]) << '\n';

    auto elems = open_out(elements_path);
    elems << "id,n1,n2,n3,n4,active\n";
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const auto& nd = mesh.elements[e];
        elems << e << ',' << nd[0] << ',' << nd[1] << ',' << nd[2] << ',' << nd[3] << ','
              << int(mesh.active_elements[e]) << '\n';
    }
}

void write_vtk(const RectMesh& mesh, const std::string& path,
               const std::vector<VtkField>& point_data,
               const std::vector<VtkField>& cell_data) {
    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\n";
    out << "obstacle solver fields\n";
    out << "ASCII\n";
    out << "DATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_nodes() << " double\n";
    for (const auto& p : mesh.nodes)
        out << format_double(p[0]) << ' ' << format_double(p[1]) << " 0\n";

    std::vector<int> active;
    for (int e = 0; e < mesh.n_elements(); ++e)
        if (mesh.active_elements[e]) active.push_back(e);

    out << "CELLS " << active.size() << ' ' << active.size() * 5 << '\n';
    for (int e : active) {
        const auto& nd = mesh.elements[e];
        out << "4 " << nd[0] << ' ' << nd[1] << ' ' << nd[2] << ' ' << nd[3] << '\n';
    }
    out << "CELL_TYPES " << active.size() << '\n';
    for (std::size_t k = 0; k < active.size(); ++k) out << "9\n";

    if (!point_data.empty()) {
        out << "POINT_DATA " << mesh.n_nodes() << '\n';
        for (const auto& f : point_data) {
            if (f.values.size() != static_cast<std::size_t>(mesh.n_nodes()))
                throw std::invalid_argument("write_vtk: point field " + f.name + " size mismatch");
            out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : f.values) out << format_double(v) << '\n';
        }
    }
    if (!cell_data.empty()) {
        out << "CELL_DATA " << active.size() << '\n';
        for (const auto& f : cell_data) {
            if (f.values.size() != static_cast<std::size_t>(mesh.n_elements()))
                throw std::invalid_argument("write_vtk: cell field " + f.name + " size mismatch");
            out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
            for (int e : active) out << format_double(f.values[e]) << '\n';
        }
    }
}

const char* const kReportHeader =
    "benchmark,h,n_nodes,n_edges,err2_l0,err2_l1,err2_l2,energy_gap,majorant,"
    "P1,P2,P3,beta,ieff,chain_ok";

std::string report_csv_row(const MajorantReport& r) {
    std::ostringstream os;
    os << r.benchmark << ',' << format_double(r.h) << ',' << r.n_nodes << ',' << r.n_edges
       << ',' << format_double(r.err2_l0) << ',' << format_double(r.err2_l1) << ','
       << format_double(r.err2_l2) << ',' << format_double(r.energy_gap) << ','
       << format_double(r.majorant) << ',' << format_double(r.p1) << ','
       << format_double(r.p2) << ',' << format_double(r.p3) << ','
       << format_double(r.beta) << ',' << format_double(r.efficiency) << ','
       << (r.chain_ok ? 1 : 0);
    return os.str();
}

std::vector<MajorantReport> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty report " + path);
    if (line != kReportHeader)
        throw std::runtime_error("malformed report header in " + path);

    std::vector<MajorantReport> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 15) throw std::runtime_error("malformed report row: " + line);
        MajorantReport r;
        r.benchmark = f[0];
        r.h = std::stod(f[1]);
        r.n_nodes = std::stoi(f[2]);
        r.n_edges = std::stoi(f[3]);
        r.err2_l0 = std::stod(f[4]);
        r.err2_l1 = std::stod(f[5]);
        r.err2_l2 = std::stod(f[6]);
        r.energy_gap = std::stod(f[7]);
        r.majorant = std::stod(f[8]);
        r.p1 = std::stod(f[9]);
        r.p2 = std::stod(f[10]);
        r.p3 = std::stod(f[11]);
        r.beta = std::stod(f[12]);
        r.efficiency = std::stod(f[13]);
        r.chain_ok = f[14] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string convergence_table(const std::vector<MajorantReport>& rows) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-9s %-10s %-12s %-8s %-12s %-12s %-8s %-8s\n",
                  "benchmark", "h", "err2_l2", "ratio", "gap", "majorant", "ieff",
                  "chain");
    os << buf;
    const MajorantReport* prev = nullptr;
    for (const auto& r : rows) {
        double ratio = 0.0;
        if (prev && prev->benchmark == r.benchmark && r.err2_l2 > 0.0)
            ratio = prev->err2_l2 / r.err2_l2;
        std::snprintf(buf, sizeof(buf),
                      "%-9s %-10.6g %-12.5e %-8.3g %-12.5e %-12.5e %-8.4g %-8s\n",
                      r.benchmark.c_str(), r.h, r.err2_l2, ratio, r.energy_gap,
                      r.majorant, r.efficiency, r.chain_ok ? "ok" : "VIOLATED");
        os << buf;
        prev = &r;
    }
    return os.str();
}

} // namespace obstacle
