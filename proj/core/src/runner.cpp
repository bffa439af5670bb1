#include "distcap/runner.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "distcap/errors.hpp"
#include "distcap/fraccalc.hpp"
#include "distcap/io.hpp"

namespace distcap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

json exponents_json(const WeightExponents& e) {
    json j;
    j["c_mu"] = e.c_mu;
    j["gamma"] = e.gamma;
    if (e.gamma_zero) j["gamma_zero"] = *e.gamma_zero;
    if (e.b_mu) j["b_mu"] = *e.b_mu;
    if (e.m) j["m"] = *e.m;
    if (e.gamma_m) j["gamma_m"] = *e.gamma_m;
    j["regime"] = e.intmu_holds() ? "intmu" : "m";
    return j;
}

void write_verdict(const fs::path& path, const std::string& check, bool pass,
                   double margin, json tolerances, const std::string& digest = "") {
    json v;
    v["check"] = check;
    v["pass"] = pass;
    v["margin"] = margin;
    v["tolerances"] = std::move(tolerances);
    if (!digest.empty()) v["scenario_digest"] = digest;
    std::ofstream out(path);
    out << v.dump(2) << "\n";
}

}  // namespace

PreparedRun solve_scenario(const Scenario& sc, int threads) {
    auto exps = derive_exponents(sc.weight);
    const double q = sc.q > 0.0 ? sc.q : default_grading(exps.gamma);
    TimeGrid grid(sc.T, sc.M, q);

    KernelTable ktab = make_k_table(sc.weight, grid);
    KernelTable gtab = make_g_table(sc.weight, grid, {}, threads);

    SpectralBasis basis = SpectralBasis::eigenpairs(sc.domain, sc.modes);
    EllipticCoefficients raw = sc.coefficients();
    validate_ellipticity(raw, basis, sc.T);
    EllipticCoefficients moll = mollify(raw, sc.mollify_index, sc.T);

    auto cached_A = std::make_shared<Mat>();
    auto moll_ptr = std::make_shared<EllipticCoefficients>(moll);
    auto basis_ptr = std::make_shared<SpectralBasis>(basis);
    const bool constant = moll.time_constant;
    auto A_of_t = [cached_A, moll_ptr, basis_ptr, constant](double t, Mat& A) {
        std::vector<double> Fdummy;
        if (constant) {
            if (cached_A->n == 0) assemble_system(*basis_ptr, *moll_ptr, 0.0, *cached_A, Fdummy);
            A = *cached_A;
            return;
        }
        assemble_system(*basis_ptr, *moll_ptr, t, A, Fdummy);
    };
    auto F_of_t = [moll_ptr, basis_ptr](double t, std::vector<double>& F) {
        const SpectralBasis& b = *basis_ptr;
        F.assign((size_t)b.size(), 0.0);
        for (int qd = 0; qd < b.quad_size(); ++qd) {
            double fv = moll_ptr->f(b.quad_x(qd), b.quad_y(qd), t);
            for (int k = 0; k < b.size(); ++k)
                F[(size_t)k] += b.quad_w(qd) * fv * b.phi(k, qd);
        }
    };

    std::vector<double> c0 = project_initial(sc.initial_data(), basis);

    PreparedRun pr{grid, std::move(ktab), std::move(gtab), {}, 0.0};
    pr.solution.basis = basis;
    pr.solution.mu = sc.weight;
    pr.solution.exps = exps;
    pr.solution.grid = grid;
    pr.solution.mollify_index = sc.mollify_index;
    pr.solution.A_of_t = A_of_t;
    pr.solution.F_of_t = F_of_t;
    pr.solution.mollified_coeffs = moll;
    pr.solution.volterra = solve_volterra(pr.gtab, A_of_t, F_of_t, c0, grid, sc.picard_tol);
    // continuation segment length of the contraction argument; the discrete
    // march takes one grid panel at a time and certifies the measured factor
    {
        const double c = c_mu_T(exps, sc.T);
        const double anorm = pr.solution.volterra.a_norm_c1;
        if (anorm > 0.0)
            pr.solution.volterra.delta_analytic =
                std::pow(exps.gamma / (4.0 * c * anorm), 1.0 / exps.gamma);
    }
    pr.u0_l2 = std::sqrt(basis.integrate([&](double x, double y) {
        double v = sc.initial_data()(x, y);
        return v * v;
    }));
    return pr;
}

RunSummary run_scenario(const Scenario& sc, const RunOptions& opts) {
    fs::create_directories(opts.out_dir);
    json manifest;
    manifest["scenario"] = sc.name;
    manifest["scenario_digest"] = sc.source_digest;
    manifest["seed"] = sc.seed;
    manifest["version"] = "distcap 0.1.0";
    json timings;
    std::vector<std::string> artifacts;

    double t0 = now_ms();
    auto exps = derive_exponents(sc.weight);
    {
        json j = exponents_json(exps);
        j["mu_digest"] = sc.weight.digest();
        std::ofstream out(opts.out_dir / "weight_exponents.json");
        out << j.dump(2) << "\n";
        artifacts.push_back("weight_exponents.json");
    }
    timings["weight_ms"] = now_ms() - t0;

    t0 = now_ms();
    PreparedRun pr = solve_scenario(sc, opts.threads);
    timings["solve_ms"] = now_ms() - t0;

    t0 = now_ms();
    write_kernel_table(pr.ktab, opts.out_dir / "kernel_k.csv", opts.out_dir / "kernel_k.json");
    write_kernel_table(pr.gtab, opts.out_dir / "kernel_g.csv", opts.out_dir / "kernel_g.json");
    artifacts.insert(artifacts.end(),
                     {"kernel_k.csv", "kernel_k.json", "kernel_g.csv", "kernel_g.json"});
    if (!exps.intmu_holds()) {
        auto km = make_km_table(sc.weight, *exps.m, pr.grid);
        auto gm = make_gm_table(sc.weight, *exps.m, pr.grid, {}, opts.threads);
        write_kernel_table(km, opts.out_dir / "kernel_k_m.csv", opts.out_dir / "kernel_k_m.json");
        write_kernel_table(gm, opts.out_dir / "kernel_g_m.csv", opts.out_dir / "kernel_g_m.json");
        artifacts.insert(artifacts.end(), {"kernel_k_m.csv", "kernel_k_m.json",
                                           "kernel_g_m.csv", "kernel_g_m.json"});
    }
    timings["tables_ms"] = now_ms() - t0;

    // solution artifact
    {
        write_trajectory(pr.solution.volterra.coeffs, opts.out_dir / "solution.csv");
        json meta;
        meta["domain"] = pr.solution.basis.is_interval() ? "interval" : "rectangle";
        meta["n"] = pr.solution.modes();
        meta["M"] = pr.grid.size();
        meta["q"] = pr.grid.grading();
        meta["T"] = pr.grid.horizon();
        meta["mu_digest"] = sc.weight.digest();
        meta["scenario_digest"] = sc.source_digest;
        meta["tolerances"] = {{"picard_tol", sc.picard_tol}};
        meta["a_norm_c1"] = pr.solution.volterra.a_norm_c1;
        meta["max_rho_measured"] = pr.solution.volterra.max_rho_measured;
        meta["delta_analytic"] = pr.solution.volterra.delta_analytic;
        std::ofstream out(opts.out_dir / "solution.json");
        out << meta.dump(2) << "\n";
        artifacts.insert(artifacts.end(), {"solution.csv", "solution.json"});
    }

    RunSummary summary;
    t0 = now_ms();
    for (const std::string& check : sc.checks) {
        CheckOutcome outcome;
        outcome.check = check;
        if (check == "resolvent_identity") {
            double tol = opts.tol > 0.0 ? opts.tol : 1e-3;
            double dev = verify_resolvent_identity(pr.ktab, pr.gtab, sc.T);
            outcome.pass = dev < tol;
            outcome.margin = tol - dev;
            write_verdict(opts.out_dir / "resolvent_identity_verdict.json", check,
                          outcome.pass, outcome.margin, {{"deviation_tol", tol}},
                          sc.source_digest);
        } else if (check == "energy_identity") {
            double tol = opts.tol > 0.0 ? opts.tol : 5e-2;
            std::vector<double> per_node;
            double resid = energy_identity_residual(pr.solution.volterra.coeffs, sc.weight,
                                                    sc.alpha_nodes, &per_node);
            outcome.pass = resid < tol;
            outcome.margin = tol - resid;
            std::vector<std::vector<double>> rows;
            for (int j = 0; j <= pr.grid.size(); ++j)
                rows.push_back({pr.grid.node(j), per_node[(size_t)j]});
            write_csv(opts.out_dir / "energy_identity.csv", {"t", "residual"}, rows);
            write_verdict(opts.out_dir / "energy_identity_verdict.json", check,
                          outcome.pass, outcome.margin, {{"rel_residual_tol", tol}},
                          sc.source_digest);
            artifacts.push_back("energy_identity.csv");
        } else if (check == "energy_estimate") {
            auto rep = energy_estimate_check(pr.solution, pr.u0_l2, 0.0, sc.alpha_nodes);
            outcome.pass = rep.pass;
            outcome.margin = rep.min_margin;
            std::vector<std::vector<double>> rows;
            for (size_t i = 0; i < rep.t.size(); ++i)
                rows.push_back({rep.t[i], rep.lhs[i], rep.rhs[i]});
            write_csv(opts.out_dir / "energy_estimate.csv", {"t", "lhs", "rhs"}, rows);
            write_verdict(opts.out_dir / "energy_estimate_verdict.json", check,
                          outcome.pass, outcome.margin, {{"c_tilde_1", rep.c_tilde_1}, {"delta_n", rep.delta_n}},
                          sc.source_digest);
            artifacts.push_back("energy_estimate.csv");
        } else if (check == "coercivity") {
            bool all = true;
            double worst = std::numeric_limits<double>::infinity();
            std::vector<std::vector<double>> rows;
            for (int j = pr.grid.size() / 8; j <= pr.grid.size();
                 j += std::max(1, pr.grid.size() / 8)) {
                if (pr.grid.node(j) > 1.0) break;
                auto rep = coercivity_check(pr.solution.volterra.coeffs, sc.weight, j,
                                            sc.alpha_nodes);
                rows.push_back({pr.grid.node(j), rep.lhs, rep.rhs});
                all = all && rep.pass;
                worst = std::min(worst, rep.lhs - rep.rhs);
            }
            outcome.pass = all;
            outcome.margin = worst;
            write_csv(opts.out_dir / "coercivity.csv", {"t", "lhs", "rhs"}, rows);
            write_verdict(opts.out_dir / "coercivity_verdict.json", check, outcome.pass,
                          outcome.margin, {{"tol", 1e-9}}, sc.source_digest);
            artifacts.push_back("coercivity.csv");
        } else if (check == "continuity") {
            auto rep = continuity_report(pr.solution, exps);
            outcome.pass = rep.pass;
            outcome.margin = 1e-3 - rep.reconstruction_deviation;
            std::vector<std::vector<double>> rows;
            for (size_t i = 0; i < rep.sample_t.size(); ++i)
                rows.push_back({rep.sample_t[i], rep.sample_norm[i]});
            write_csv(opts.out_dir / "continuity.csv", {"t", "norm"}, rows);
            json tol;
            tol["regime"] = rep.regime;
            tol["fitted_rate"] = rep.fitted_rate;
            tol["reconstruction_deviation"] = rep.reconstruction_deviation;
            write_verdict(opts.out_dir / "continuity_verdict.json", check, outcome.pass,
                          outcome.margin, tol, sc.source_digest);
            artifacts.push_back("continuity.csv");
        } else if (check == "regularity") {
            auto rep = regularity_monitor(pr.solution);
            std::vector<std::vector<double>> rows;
            for (size_t i = 0; i < rep.t.size(); ++i)
                rows.push_back({rep.t[i], rep.grad_norm2[i], rep.h2_seminorm2[i]});
            write_csv(opts.out_dir / "regularity.csv", {"t", "grad_norm2", "h2_seminorm2"},
                      rows);
            outcome.pass = true;  // monitoring only
            outcome.margin = rep.rhs - rep.h2_time_integral;
            write_verdict(opts.out_dir / "regularity_verdict.json", check, outcome.pass,
                          outcome.margin,
                          {{"h2_time_integral", rep.h2_time_integral}, {"rhs", rep.rhs}},
                          sc.source_digest);
            artifacts.push_back("regularity.csv");
        }
        summary.checks.push_back(outcome);
    }
    timings["checks_ms"] = now_ms() - t0;

    bool all_pass = true;
    json jchecks = json::array();
    for (auto& c : summary.checks) {
        all_pass = all_pass && c.pass;
        jchecks.push_back({{"check", c.check}, {"pass", c.pass}, {"margin", c.margin}});
    }
    manifest["checks"] = jchecks;
    manifest["artifacts"] = artifacts;
    manifest["timings_ms"] = timings;
    manifest["gamma"] = exps.gamma;
    manifest["exit_code"] = all_pass ? 0 : 1;
    summary.manifest_path = opts.out_dir / "run_manifest.json";
    {
        std::ofstream out(summary.manifest_path);
        out << manifest.dump(2) << "\n";
    }
    summary.exit_code = all_pass ? 0 : 1;
    return summary;
}

void analyze_weight_command(const Scenario& sc, const RunOptions& opts) {
    fs::create_directories(opts.out_dir);
    auto exps = derive_exponents(sc.weight);
    json j = exponents_json(exps);
    j["mu_digest"] = sc.weight.digest();
    std::ofstream out(opts.out_dir / "weight_exponents.json");
    out << j.dump(2) << "\n";
    std::ofstream frag(opts.out_dir / "weight_fragment.cfg");
    frag << weight_config_fragment(sc.weight_spec);
}

int kernel_table_command(const Scenario& sc, const RunOptions& opts, int M_override,
                         double q_override) {
    fs::create_directories(opts.out_dir);
    auto exps = derive_exponents(sc.weight);
    const int M = M_override > 0 ? M_override : sc.M;
    const double q = q_override > 0.0 ? q_override
                     : (sc.q > 0.0 ? sc.q : default_grading(exps.gamma));
    TimeGrid grid(sc.T, M, q);

    auto ktab = make_k_table(sc.weight, grid);
    auto gtab = make_g_table(sc.weight, grid, {}, opts.threads);
    write_kernel_table(ktab, opts.out_dir / "kernel_k.csv", opts.out_dir / "kernel_k.json");
    write_kernel_table(gtab, opts.out_dir / "kernel_g.csv", opts.out_dir / "kernel_g.json");
    double dev = verify_resolvent_identity(ktab, gtab, sc.T);

    if (!exps.intmu_holds()) {
        auto km = make_km_table(sc.weight, *exps.m, grid);
        auto gm = make_gm_table(sc.weight, *exps.m, grid, {}, opts.threads);
        write_kernel_table(km, opts.out_dir / "kernel_k_m.csv",
                           opts.out_dir / "kernel_k_m.json");
        write_kernel_table(gm, opts.out_dir / "kernel_g_m.csv",
                           opts.out_dir / "kernel_g_m.json");
    }

    const double tol = opts.tol > 0.0 ? opts.tol : 1e-3;
    write_verdict(opts.out_dir / "resolvent_identity_verdict.json", "resolvent_identity",
                  dev < tol, tol - dev, {{"deviation_tol", tol}}, sc.source_digest);
    return dev < tol ? 0 : 1;
}

std::vector<ConvergeRow> converge_study(const Scenario& sc, const RunOptions& opts,
                                        const std::vector<int>& levels) {
    fs::create_directories(opts.out_dir);
    auto exps = derive_exponents(sc.weight);
    const double q = sc.q > 0.0 ? sc.q : default_grading(exps.gamma);
    SpectralBasis basis = SpectralBasis::eigenpairs(sc.domain, 1);
    const double lambda1 = basis.eigenvalue(0);

    std::vector<ConvergeRow> rows;
    double prev_err = 0.0;
    for (int M : levels) {
        TimeGrid grid(sc.T, M, q);
        KernelTable gtab = make_g_table(sc.weight, grid, {}, opts.threads);

        // manufactured solution u = phi_1 (1+t): f = D^mu u - Lu on mode 1
        SampledTrajectory one_plus_t(grid, 1);
        for (int j = 0; j <= M; ++j) one_plus_t.at(j) = 1.0 + grid.node(j);
        SampledTrajectory dcap = distributed_caputo(one_plus_t, sc.weight, sc.alpha_nodes);
        auto dcap_ptr = std::make_shared<SampledTrajectory>(std::move(dcap));

        auto A_of_t = [lambda1](double, Mat& A) {
            A = Mat(1);
            A(0, 0) = lambda1;
        };
        auto F_of_t = [dcap_ptr, lambda1](double t, std::vector<double>& F) {
            F.assign(1, dcap_ptr->eval(t) + lambda1 * (1.0 + t));
        };
        auto vol = solve_volterra(gtab, A_of_t, F_of_t, {1.0}, grid, sc.picard_tol);

        double err = 0.0;
        for (int j = 0; j <= M; ++j)
            err = std::max(err, std::abs(vol.coeffs.at(j, 0) - (1.0 + grid.node(j))));
        ConvergeRow row;
        row.M = M;
        row.err = err;
        row.factor = prev_err > 0.0 ? prev_err / err : 0.0;
        row.rate = row.factor > 0.0 ? std::log2(row.factor) : 0.0;
        rows.push_back(row);
        prev_err = err;
    }

    std::vector<std::vector<double>> csv;
    for (auto& r : rows) csv.push_back({(double)r.M, r.err, r.factor, r.rate});
    write_csv(opts.out_dir / "converge.csv", {"M", "sup_err", "factor", "rate"}, csv);
    return rows;
}

}  // namespace distcap
