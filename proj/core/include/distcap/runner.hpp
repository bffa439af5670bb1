#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "distcap/diagnostics.hpp"
#include "distcap/galerkin.hpp"
#include "distcap/kernels.hpp"
#include "distcap/scenario.hpp"

namespace distcap {

struct RunOptions {
    std::filesystem::path out_dir = ".";
    int threads = 1;
    double tol = 0.0;  // 0 = per-check defaults
};

struct CheckOutcome {
    std::string check;
    bool pass = false;
    double margin = 0.0;
};

struct RunSummary {
    int exit_code = 1;
    std::vector<CheckOutcome> checks;
    std::filesystem::path manifest_path;
};

// weight analysis -> kernel tables -> solve -> requested diagnostics,
// with all CSV/JSON artifacts and a manifest. Exit code 0 iff every
// requested check passes.
RunSummary run_scenario(const Scenario& sc, const RunOptions& opts);

// exponents + serialized weight fragment
void analyze_weight_command(const Scenario& sc, const RunOptions& opts);

// emits k and g tables (and k_m, g_m in the m-regime) plus the resolvent
// identity deviation; returns 0 when the deviation is within tolerance.
int kernel_table_command(const Scenario& sc, const RunOptions& opts, int M_override = 0,
                         double q_override = 0.0);

struct ConvergeRow {
    int M = 0;
    double err = 0.0;
    double factor = 0.0;  // err(previous M) / err(M)
    double rate = 0.0;    // local order log2(factor)
};

// manufactured-solution mesh-convergence study (single mode, affine in time)
std::vector<ConvergeRow> converge_study(const Scenario& sc, const RunOptions& opts,
                                        const std::vector<int>& levels);

// builds grid/tables/basis and solves the scenario; shared by run and tests
struct PreparedRun {
    TimeGrid grid;
    KernelTable ktab, gtab;
    GalerkinSolution solution;
    double u0_l2 = 0.0;
};
PreparedRun solve_scenario(const Scenario& sc, int threads = 1);

}  // namespace distcap
