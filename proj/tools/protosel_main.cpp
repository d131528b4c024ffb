#include "protosel/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

using namespace protosel;

namespace {

// The config document wins over command-line flags; a schema_version field is
// required so stale configs fail loudly.
void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    nlohmann::json j;
    in >> j;
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw std::runtime_error("config file must declare schema_version 1");
    if (j.contains("replications")) cfg.replications = j["replications"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("hr_samples")) cfg.hr_samples = j["hr_samples"].get<int>();
    if (j.contains("hr_burnin")) cfg.hr_burnin = j["hr_burnin"].get<int>();
    if (j.contains("hr_thinning")) cfg.hr_thinning = j["hr_thinning"].get<int>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("sigma2")) cfg.sigma2 = j["sigma2"].get<double>();
    if (j.contains("lambda")) cfg.fixed_lambda = j["lambda"].get<double>();
    if (j.contains("smoothed_hr")) cfg.smoothed_hr = j["smoothed_hr"].get<bool>();
    if (j.contains("methods")) cfg.methods = j["methods"].get<std::vector<std::string>>();
}

int cmd_simulate(const std::string& preset, double scale, bool paper_scale, std::uint64_t seed,
                 bool seed_set, const std::string& out_dir, const std::string& config_path,
                 int threads) {
    ExperimentConfig cfg = make_preset(preset);
    if (paper_scale) {
        cfg.replications = preset.rfind("fig4", 0) == 0 ? 600 : 800;
        cfg.hr_samples = 50000;
        cfg.hr_burnin = 10000;
    }
    cfg.replications = std::max(1, static_cast<int>(cfg.replications * scale));
    if (seed_set) cfg.seed = seed;
    cfg.threads = threads;
    if (!config_path.empty()) apply_config_file(cfg, config_path);

    std::filesystem::create_directories(out_dir);
    ExperimentOutput out = run_experiment(cfg);
    write_rows_csv(out_dir + "/" + preset + "_rows.csv", out.rows);
    write_summary_json(out_dir + "/" + preset + "_summary.json", out.summary);

    std::cout << "experiment " << preset << " (" << cfg.replications << " replications, "
              << out.summary.wall_seconds << " s)\n";
    for (const auto& m : out.summary.methods)
        std::printf("  %-10s power@0.05=%.3f power@0.10=%.3f KS-p=%.3f\n", m.method.c_str(),
                    m.power_05, m.power_10, m.ks_uniform_p);
    std::cout << "rows: " << out_dir << "/" << preset << "_rows.csv\n";
    return 0;
}

int cmd_test(const std::string& data, const std::string& groups, const std::string& yfile,
             const std::string& model, const std::string& method, double sigma2, double lambda,
             int tested_group, int hr_samples, int hr_burnin, std::uint64_t seed) {
    auto [design, y] = load_dataset(data, groups, yfile);
    HitAndRunConfig hr;
    hr.n_samples = hr_samples;
    hr.burn_in = hr_burnin;
    hr.seed = seed;
    TestResult res;
    if (model == "multivariate") {
        MultivariateSetup setup;
        setup.design = &design;
        setup.sigma2 = sigma2;
        setup.lambdas.assign(design.n_groups(), lambda);
        setup.hr = hr;
        setup.tested_group = tested_group;
        res = run_multivariate_test(method, setup, y);
    } else if (model == "univariate") {
        UnivariateSetup setup;
        setup.design = &design;
        setup.sigma2 = sigma2;
        setup.lambda = lambda;
        setup.hr = hr;
        res = run_univariate_test(method, setup, y);
    } else {
        throw std::runtime_error("model must be univariate or multivariate");
    }
    nlohmann::json j;
    j["method"] = res.method;
    j["statistic"] = res.statistic;
    j["p_value"] = res.p_value;
    j["reference"] = res.reference;
    j["flags"] = res.flags.to_string();
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_estimate(int replications, std::uint64_t seed, const std::string& out_dir, bool full_grid) {
    EstimationConfig cfg;
    cfg.replications = replications;
    cfg.seed = seed;
    std::vector<EstimationRow> rows;
    if (full_grid) {
        rows = run_estimation_experiment(cfg);
    } else {
        for (const auto& cell : estimation_grid()) {
            if (cell.mu == 0.0 && cell.rho == 0.0 && cell.theta.isConstant(0.4)) {
                auto r = run_estimation_cell(cfg, cell);
                rows.insert(rows.end(), r.begin(), r.end());
            }
        }
    }
    std::filesystem::create_directories(out_dir);
    write_estimation_csv(out_dir + "/estimation_rows.csv", rows);

    // mean ratio per (cell, estimator)
    std::map<std::pair<std::string, std::string>, std::pair<double, int>> agg;
    for (const auto& r : rows) {
        auto& a = agg[{r.cell, r.estimator}];
        a.first += r.ratio_vs_lpml_m;
        a.second += 1;
    }
    for (const auto& [key, acc] : agg)
        std::printf("  %-28s %-8s mean MSE ratio vs LPML-M: %.3f\n", key.first.c_str(),
                    key.second.c_str(), acc.first / acc.second);
    std::cout << "rows: " << out_dir << "/estimation_rows.csv\n";
    return 0;
}

int cmd_bench(int replications, std::uint64_t seed, const std::string& out_dir) {
    BenchConfig cfg;
    cfg.replications = replications;
    cfg.seed = seed;
    auto rows = bench_statistics(cfg);
    std::printf("%8s %6s %16s %14s %10s\n", "sparsity", "n", "ELR(naive) ms", "ELR(S-M) ms",
                "ALR ms");
    for (const auto& r : rows)
        std::printf("%8.2f %6d %16.3f %14.3f %10.4f\n", r.alpha, r.n, r.elr_naive_ms, r.elr_sm_ms,
                    r.alr_ms);
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(out_dir + "/bench.csv");
        out << "sparsity,n,elr_naive_ms,elr_sm_ms,alr_ms\n";
        for (const auto& r : rows)
            out << r.alpha << ',' << r.n << ',' << r.elr_naive_ms << ',' << r.elr_sm_ms << ','
                << r.alr_ms << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"protosel: selective prototype tests, estimation and simulation harness"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "run a named simulation preset");
    std::string preset = "null", out_dir = "out", config_path;
    double scale = 1.0;
    std::uint64_t seed = 0;
    bool paper_scale = false;
    int threads = 0;
    sim->add_option("--preset", preset, "one of: null, table2-*, fig1*, fig4-*, fig5-*")
        ->required();
    sim->add_option("--scale", scale, "replication multiplier (desk-scale default B)");
    sim->add_flag("--paper-scale", paper_scale, "restore B=800/600 and HR 50000/10000");
    auto* seed_opt = sim->add_option("--seed", seed, "root seed");
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--config", config_path, "JSON config document (overrides flags)");
    sim->add_option("--threads", threads, "worker cap (0 = all)");

    auto* tst = app.add_subcommand("test", "run one test on a CSV dataset");
    std::string data, groups, yfile, model = "univariate", method = "ALR-Exact";
    double sigma2 = 1.0, lambda = 1.0;
    int tested_group = 0, hr_samples = 10000, hr_burnin = 2000;
    std::uint64_t test_seed = 1;
    tst->add_option("--data", data, "X.csv (header row; final column y unless --y given)")
        ->required();
    tst->add_option("--groups", groups, "groups CSV: column_index,group_id")->required();
    tst->add_option("--y", yfile, "separate response CSV");
    tst->add_option("--model", model, "univariate | multivariate");
    tst->add_option("--method", method, "test tag, e.g. ELR-HR, ALR-Exact, PT, F");
    tst->add_option("--sigma2", sigma2, "known noise variance")->required();
    tst->add_option("--lambda", lambda, "fixed lasso penalty");
    tst->add_option("--tested-group", tested_group, "group under test (multivariate, 0-based)");
    tst->add_option("--hr-samples", hr_samples, "hit-and-run samples");
    tst->add_option("--hr-burnin", hr_burnin, "hit-and-run burn-in");
    tst->add_option("--seed", test_seed, "sampler seed");

    auto* est = app.add_subcommand("estimate", "prediction-error study of the estimators");
    int est_reps = 120;
    std::uint64_t est_seed = 1;
    std::string est_out = "out", est_preset = "appendixA";
    bool full_grid = false;
    est->add_option("--preset", est_preset, "appendixA");
    est->add_option("--replications", est_reps, "replications per cell");
    est->add_option("--seed", est_seed, "root seed");
    est->add_option("--out", est_out, "output directory");
    est->add_flag("--full-grid", full_grid, "all 40 cells (default: theta=0.4, mu=0, rho=0)");

    auto* ben = app.add_subcommand("bench", "statistic timing table");
    int bench_reps = 200;
    std::uint64_t bench_seed = 7;
    std::string bench_out;
    ben->add_option("--replications", bench_reps, "responses per cell");
    ben->add_option("--seed", bench_seed, "root seed");
    ben->add_option("--out", bench_out, "optional output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(preset, scale, paper_scale, seed, seed_opt->count() > 0, out_dir,
                                config_path, threads);
        if (tst->parsed())
            return cmd_test(data, groups, yfile, model, method, sigma2, lambda, tested_group,
                            hr_samples, hr_burnin, test_seed);
        if (est->parsed()) return cmd_estimate(est_reps, est_seed, est_out, full_grid);
        if (ben->parsed()) return cmd_bench(bench_reps, bench_seed, bench_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
