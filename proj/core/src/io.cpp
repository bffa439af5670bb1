#include "distcap/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "distcap/errors.hpp"

namespace distcap {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("write_csv: cannot open " + path.string());
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) throw Error("read_csv: cannot open " + path.string());
    std::string line;
    std::vector<std::vector<double>> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (first) {
            first = false;
            if (header) {
                while (std::getline(ss, cell, ',')) header->push_back(cell);
            }
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string digest_bytes(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

std::string digest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("digest_file: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return digest_bytes(ss.str());
}

void write_kernel_table(const KernelTable& tab, const std::filesystem::path& csv_path,
                        const std::filesystem::path& json_path) {
    std::vector<std::vector<double>> rows;
    for (int j = 1; j <= tab.grid().size(); ++j)
        rows.push_back({tab.grid().node(j), tab.value(j), tab.smooth(j)});
    write_csv(csv_path, {"t", "value", "smooth_factor"}, rows);

    nlohmann::json meta;
    meta["mu_digest"] = tab.provenance().mu_digest;
    meta["kind"] = tab.provenance().kind;
    meta["m"] = tab.provenance().m;
    meta["sigma"] = tab.sigma();
    meta["grading"] = tab.grid().grading();
    meta["horizon"] = tab.grid().horizon();
    meta["nodes"] = tab.grid().size();
    meta["tolerances"] = {{"rel_tol", tab.provenance().rel_tol}};
    std::ofstream out(json_path);
    out << meta.dump(2) << "\n";
}

KernelTable read_kernel_table(const std::filesystem::path& csv_path,
                              const std::filesystem::path& json_path) {
    std::ifstream jin(json_path);
    if (!jin) throw Error("read_kernel_table: cannot open " + json_path.string());
    nlohmann::json meta = nlohmann::json::parse(jin);
    TimeGrid grid(meta["horizon"].get<double>(), meta["nodes"].get<int>(),
                  meta["grading"].get<double>());
    auto rows = read_csv(csv_path);
    if ((int)rows.size() != grid.size())
        throw Error("read_kernel_table: row count does not match the grid");
    std::vector<double> vals;
    for (auto& r : rows) vals.push_back(r.at(1));
    KernelProvenance prov{meta["mu_digest"].get<std::string>(),
                          meta["kind"].get<std::string>(), meta["m"].get<int>(),
                          meta["tolerances"]["rel_tol"].get<double>()};
    return KernelTable(grid, std::move(vals), meta["sigma"].get<double>(), prov);
}

void write_trajectory(const SampledTrajectory& f, const std::filesystem::path& path) {
    std::vector<std::string> header{"t"};
    for (int d = 1; d <= f.dim(); ++d) header.push_back("v_" + std::to_string(d));
    std::vector<std::vector<double>> rows;
    for (int j = 0; j <= f.grid().size(); ++j) {
        std::vector<double> row{f.grid().node(j)};
        for (int d = 0; d < f.dim(); ++d) row.push_back(f.at(j, d));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

SampledTrajectory read_trajectory(const std::filesystem::path& path, double grading) {
    auto rows = read_csv(path);
    if (rows.size() < 2) throw Error("read_trajectory: need at least two rows");
    int M = (int)rows.size() - 1;
    int dim = (int)rows.front().size() - 1;
    TimeGrid grid(rows.back().at(0), M, grading);
    SampledTrajectory f(grid, dim);
    for (int j = 0; j <= M; ++j)
        for (int d = 0; d < dim; ++d) f.at(j, d) = rows[(size_t)j].at((size_t)d + 1);
    return f;
}

void write_gronwall_bound(const GronwallBound& b, const std::filesystem::path& path) {
    std::vector<std::vector<double>> rows;
    for (int j = 0; j <= b.grid.size(); ++j)
        rows.push_back({b.grid.node(j), b.bound[(size_t)j], (double)b.terms[(size_t)j],
                        b.residual[(size_t)j]});
    write_csv(path, {"t", "bound", "terms", "residual"}, rows);
}

}  // namespace distcap
