#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <vector>

#include "distcap/errors.hpp"
#include "distcap/io.hpp"
#include "distcap/runner.hpp"
#include "distcap/scenario.hpp"

using namespace distcap;

int main(int argc, char** argv) {
    CLI::App app{"distributed-order Caputo calculus and diffusion solver"};
    app.require_subcommand(1);
    app.fallthrough();  // common flags may follow the subcommand

    std::string scenario_path, out_dir = "out";
    double tol = 0.0;
    int threads = 1;
    app.add_option("--scenario", scenario_path, "scenario config file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--tol", tol, "override check tolerance");
    app.add_option("--threads", threads, "worker threads for table builds");

    auto* analyze = app.add_subcommand("analyze-weight", "weight exponents and regime");
    int table_M = 0;
    double table_q = 0.0;
    auto* ktable = app.add_subcommand("kernel-table", "emit k/g (and k_m/g_m) tables");
    ktable->add_option("--grid-M", table_M, "override node count");
    ktable->add_option("--grid-q", table_q, "override grading exponent");
    auto* solve = app.add_subcommand("solve", "run the Galerkin/Volterra solve");
    auto* check = app.add_subcommand("check", "solve and run the requested checks");
    std::string levels_str = "64,128,256,512";
    auto* converge = app.add_subcommand("converge", "manufactured-solution mesh study");
    converge->add_option("--levels", levels_str, "comma-separated node counts");

    CLI11_PARSE(app, argc, argv);

    try {
        Scenario sc = parse_scenario(scenario_path);
        RunOptions opts;
        opts.out_dir = out_dir;
        opts.threads = threads;
        opts.tol = tol;

        if (analyze->parsed()) {
            analyze_weight_command(sc, opts);
            std::printf("weight exponents written to %s\n",
                        (opts.out_dir / "weight_exponents.json").c_str());
            return 0;
        }
        if (ktable->parsed()) {
            int rc = kernel_table_command(sc, opts, table_M, table_q);
            std::printf("kernel tables written to %s (resolvent identity %s)\n",
                        out_dir.c_str(), rc == 0 ? "ok" : "FAILED");
            return rc;
        }
        if (solve->parsed() || check->parsed()) {
            if (solve->parsed()) sc.checks.clear();  // artifacts only
            RunSummary s = run_scenario(sc, opts);
            for (const auto& c : s.checks)
                std::printf("[%s] %s (margin %.3g)\n", c.pass ? "PASS" : "FAIL",
                            c.check.c_str(), c.margin);
            std::printf("manifest: %s\n", s.manifest_path.c_str());
            return s.exit_code;
        }
        if (converge->parsed()) {
            std::vector<int> levels;
            std::stringstream ss(levels_str);
            std::string cell;
            while (std::getline(ss, cell, ',')) levels.push_back(std::stoi(cell));
            auto rows = converge_study(sc, opts, levels);
            bool ok = true;
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (size_t i = 0; i < rows.size(); ++i) {
                std::printf("M=%5d  sup_err=%.4e  factor=%.2f  rate=%.2f\n", rows[i].M,
                            rows[i].err, rows[i].factor, rows[i].rate);
                if (i > 0 && rows[i].factor < 1.5) ok = false;
                double x = std::log2((double)rows[i].M), y = std::log2(rows[i].err);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            if (rows.size() >= 2) {
                double n = (double)rows.size();
                double fitted = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
                std::printf("fitted rate: %.2f\n", fitted);
            }
            return ok ? 0 : 1;
        }
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 1;
}
