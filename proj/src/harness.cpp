#include "protosel/harness.hpp"

#include "protosel/dist.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace protosel {

namespace {
using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
}  // namespace

int resolve_threads(int requested) {
    int hw = 1;
#ifdef _OPENMP
    hw = omp_get_max_threads();
#endif
    int cap = hw;
    if (const char* env = std::getenv("PROTOSEL_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) cap = std::min(cap, v);
    }
    if (requested > 0) cap = std::min(cap, requested);
    return std::max(1, cap);
}

GroupedDesign generate_design(int n, const std::vector<int>& group_sizes, double rho,
                              std::uint64_t seed) {
    if (rho < 0.0 || rho >= 1.0) throw std::invalid_argument("generate_design: rho outside [0,1)");
    int p = 0;
    for (int g : group_sizes) p += g;
    Mat raw(n, p);
    std::vector<std::vector<int>> groups;
    int col = 0;
    for (std::size_t k = 0; k < group_sizes.size(); ++k) {
        RandomStream rs(derive_seed(seed, {0xD0u, k}));
        Vec shared(n);
        for (int i = 0; i < n; ++i) shared[i] = rs.normal();
        std::vector<int> idx;
        for (int j = 0; j < group_sizes[k]; ++j, ++col) {
            idx.push_back(col);
            for (int i = 0; i < n; ++i)
                raw(i, col) = std::sqrt(rho) * shared[i] + std::sqrt(1.0 - rho) * rs.normal();
        }
        groups.push_back(std::move(idx));
    }
    return GroupedDesign::standardize(std::move(raw), std::move(groups));
}

Vec generate_response_linear(const GroupedDesign& design, const Vec& beta, double sigma2,
                             std::uint64_t seed) {
    RandomStream rs(seed);
    Vec y = design.X * beta;
    double sigma = std::sqrt(sigma2);
    for (int i = 0; i < y.size(); ++i) y[i] += sigma * rs.normal();
    return y;
}

Vec generate_response_prototype(const std::vector<HatOperator>& hats, const Vec& theta, double mu,
                                double sigma2, std::uint64_t seed, int n) {
    RandomStream rs(seed);
    Vec rhs(n);
    double sigma = std::sqrt(sigma2);
    for (int i = 0; i < n; ++i) rhs[i] = mu + sigma * rs.normal();
    Mat g = Mat::Identity(n, n);
    for (std::size_t k = 0; k < hats.size(); ++k) g -= theta[k] * hats[k].dense();
    Eigen::PartialPivLU<Mat> lu(g);
    Vec y = lu.solve(rhs);
    if (!y.allFinite()) throw std::runtime_error("generate_response_prototype: infeasible theta");
    StackedHats stacked(hats);
    if (stacked.spectrum(theta).min_eig < 1e-10)
        throw std::runtime_error("generate_response_prototype: infeasible theta");
    return y;
}

MethodSummary summarize_method(const std::string& method, const std::vector<ResultRow>& rows) {
    MethodSummary s;
    s.method = method;
    for (const auto& r : rows) {
        if (r.method != method) continue;
        ++s.n;
        s.sorted_pvalues.push_back(r.p_value);
        if (r.p_value <= 0.05) s.power_05 += 1.0;
        if (r.p_value <= 0.10) s.power_10 += 1.0;
    }
    if (s.n > 0) {
        s.power_05 /= s.n;
        s.power_10 /= s.n;
        std::sort(s.sorted_pvalues.begin(), s.sorted_pvalues.end());
        s.ks_uniform_p = ks_uniform_pvalue(s.sorted_pvalues);
    }
    return s;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    auto t_start = Clock::now();
    GroupedDesign design = generate_design(cfg.n, cfg.group_sizes, cfg.rho,
                                           derive_seed(cfg.seed, {0x01u}));
    const int K = design.n_groups();

    // prototype-mode hats on full groups (fig1-style generators)
    std::vector<HatOperator> gen_hats;
    if (cfg.prototype_mode)
        for (int k = 0; k < K; ++k)
            gen_hats.push_back(make_hat(design.group_columns(k), cfg.proto_kind, cfg.ridge_lambda));

    auto needs_lasso = [&](const std::vector<std::string>& methods) {
        for (const auto& m : methods)
            if (m == "ELR-HR" || m == "ELR-Chi" || m == "ALR-HR" || m == "ALR-Exact" ||
                m == "F" || m == "F-HR" || m == "ALR-lasso" || m == "ELR-lasso")
                return true;
        return false;
    };

    // fixed penalties: calibrate once from pilot nulls, then reuse everywhere
    std::vector<double> lambdas;
    if (needs_lasso(cfg.methods)) {
        if (cfg.multivariate) {
            if (!cfg.fixed_lambdas.empty()) {
                lambdas = cfg.fixed_lambdas;
            } else {
                for (int k = 0; k < K; ++k) {
                    int target = std::min(cfg.lambda_target, static_cast<int>(design.groups[k].size()));
                    auto cal = calibrate_lambda(design.group_columns(k), target, cfg.sigma2,
                                                cfg.lambda_trials,
                                                derive_seed(cfg.seed, {0xCAu, static_cast<std::uint64_t>(k)}));
                    lambdas.push_back(cal.lambda);
                }
            }
        } else {
            lambdas.push_back(cfg.fixed_lambda > 0.0
                                  ? cfg.fixed_lambda
                                  : calibrate_lambda(design.X, cfg.lambda_target, cfg.sigma2,
                                                     cfg.lambda_trials, derive_seed(cfg.seed, {0xCAu}))
                                        .lambda);
        }
    }

    const int B = cfg.replications;
    const int n_methods = static_cast<int>(cfg.methods.size());
    std::vector<ResultRow> rows(static_cast<std::size_t>(B) * n_methods);
    const int threads = resolve_threads(cfg.threads);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int b = 0; b < B; ++b) {
        std::uint64_t rep_seed = derive_seed(cfg.seed, {0x02u, static_cast<std::uint64_t>(b)});
        Vec y = cfg.prototype_mode
                    ? generate_response_prototype(gen_hats, cfg.theta, cfg.mu, cfg.sigma2,
                                                  rep_seed, cfg.n)
                    : generate_response_linear(design, cfg.beta, cfg.sigma2, rep_seed);

        HitAndRunConfig hr;
        hr.n_samples = cfg.hr_samples;
        hr.burn_in = cfg.hr_burnin;
        hr.thinning = cfg.hr_thinning;
        hr.seed = derive_seed(cfg.seed, {0x03u, static_cast<std::uint64_t>(b)});

        auto t_rep = Clock::now();
        std::vector<TestResult> results;
        if (cfg.multivariate) {
            MultivariateSetup setup;
            setup.design = &design;
            setup.sigma2 = cfg.sigma2;
            setup.lambdas = lambdas;
            setup.hr = hr;
            setup.oracle_supports = cfg.oracle_supports;
            setup.smoothed_hr = cfg.smoothed_hr;
            setup.tested_group = cfg.tested_group;
            results = run_multivariate_battery(cfg.methods, setup, y);
        } else {
            UnivariateSetup setup;
            setup.design = &design;
            setup.sigma2 = cfg.sigma2;
            setup.lambda = lambdas.empty() ? 0.0 : lambdas[0];
            setup.ridge_lambda = cfg.ridge_lambda;
            setup.hr = hr;
            setup.oracle_support = cfg.oracle_support;
            setup.smoothed_hr = cfg.smoothed_hr;
            results = run_univariate_battery(cfg.methods, setup, y);
        }
        double rep_ms = ms_since(t_rep);
        for (int m = 0; m < n_methods; ++m) {
            ResultRow& row = rows[static_cast<std::size_t>(b) * n_methods + m];
            row.experiment_id = cfg.id;
            row.replication = b;
            row.method = results[m].method;
            row.statistic = results[m].statistic;
            row.p_value = results[m].p_value;
            row.flags = results[m].flags.to_string();
            row.wall_ms = rep_ms / n_methods;
            row.seed = rep_seed;
        }
    }

    ExperimentOutput out;
    out.rows = std::move(rows);
    out.summary.experiment_id = cfg.id;
    out.summary.replications = B;
    out.summary.seed = cfg.seed;
    out.summary.lambdas_used = lambdas;
    for (const auto& m : cfg.methods) out.summary.methods.push_back(summarize_method(m, out.rows));
    out.summary.wall_seconds = ms_since(t_start) / 1000.0;
    return out;
}

namespace {

Vec beta_with_blocks(int p, const std::vector<std::pair<std::vector<int>, double>>& blocks) {
    Vec beta = Vec::Zero(p);
    for (const auto& [idx, val] : blocks)
        for (int j : idx) beta[j] = val;
    return beta;
}

std::vector<int> range_cols(int from, int count) {
    std::vector<int> out;
    for (int j = 0; j < count; ++j) out.push_back(from + j);
    return out;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"null",     "table2-single", "table2-moderate", "table2-spread", "fig1",
            "fig1-null", "fig4-left",     "fig4-right",      "fig5-null",     "fig5-beta2",
            "fig5-beta3"};
}

ExperimentConfig make_preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.id = name;

    auto univariate_roster = [&](bool with_oracle) {
        cfg.methods = {"ELR-HR", "ELR-Chi", "ALR-HR", "ALR-Exact", "PT",
                       "F",      "F-HR",    "LR-all", "t-mean",    "t-PC"};
        if (with_oracle) cfg.methods.push_back("LR-or");
    };

    if (name == "null" || name == "table2-single" || name == "table2-moderate" ||
        name == "table2-spread") {
        cfg.n = 100;
        cfg.group_sizes = {50};
        cfg.rho = 0.0;
        cfg.sigma2 = 1.0;
        cfg.replications = 200;
        if (name == "null") {
            cfg.beta = Vec::Zero(50);
            univariate_roster(false);
        } else if (name == "table2-single") {
            cfg.beta = beta_with_blocks(50, {{range_cols(0, 1), 4.0}});
            cfg.oracle_support = range_cols(0, 1);
            univariate_roster(true);
        } else if (name == "table2-moderate") {
            cfg.beta = beta_with_blocks(50, {{range_cols(0, 5), 4.0 / std::sqrt(5.0)}});
            cfg.oracle_support = range_cols(0, 5);
            univariate_roster(true);
        } else {
            cfg.beta = Vec::Zero(50);
            for (int j = 0; j < 10; ++j) cfg.beta[j] = 4.0 * (11.0 - (j + 1)) / std::sqrt(382.0);
            cfg.oracle_support = range_cols(0, 10);
            univariate_roster(true);
        }
        return cfg;
    }

    if (name == "fig1" || name == "fig1-null") {
        cfg.n = 100;
        cfg.group_sizes = {40};
        cfg.rho = 0.3;
        cfg.sigma2 = 1.0;
        cfg.prototype_mode = true;
        cfg.proto_kind = HatKind::ridge;
        cfg.ridge_lambda = 10.0;
        cfg.theta = Vec::Constant(1, name == "fig1" ? 1.2 : 0.0);
        cfg.mu = 0.0;
        cfg.methods = {"F-classic", "LR-ridge"};
        cfg.replications = 200;
        return cfg;
    }

    if (name == "fig4-left" || name == "fig4-right") {
        cfg.n = 100;
        cfg.group_sizes = {25, 25, 25, 25};
        cfg.rho = 0.3;
        cfg.sigma2 = 1.0;
        cfg.multivariate = true;
        cfg.tested_group = 0;
        std::vector<std::pair<std::vector<int>, double>> blocks = {
            {range_cols(25, 10), 0.5}, {range_cols(50, 2), 0.5}, {range_cols(75, 5), 0.5}};
        if (name == "fig4-right") blocks.push_back({range_cols(0, 2), 2.0});
        cfg.beta = beta_with_blocks(100, blocks);
        cfg.oracle_supports = {range_cols(0, 2), range_cols(25, 10), range_cols(50, 2),
                               range_cols(75, 5)};
        cfg.methods = {"ALR-lasso", "ELR-lasso"};
        cfg.replications = 200;
        // the conditioned-null chain decorrelates slowly at this geometry;
        // thinning keeps the exceedance estimate's effective sample size up
        cfg.hr_thinning = 25;
        return cfg;
    }

    if (name == "fig5-null" || name == "fig5-beta2" || name == "fig5-beta3") {
        cfg.n = 300;
        cfg.group_sizes = {50, 50, 50, 50};
        cfg.rho = 0.0;
        cfg.sigma2 = 1.0;
        cfg.multivariate = true;
        cfg.tested_group = 0;
        double b1 = name == "fig5-beta2" ? 2.0 : (name == "fig5-beta3" ? 3.0 : 0.0);
        std::vector<std::pair<std::vector<int>, double>> blocks = {
            {range_cols(50, 10), 0.5}, {range_cols(100, 2), 0.5}, {range_cols(150, 5), 0.5}};
        if (b1 > 0.0) blocks.push_back({range_cols(0, 2), b1});
        cfg.beta = beta_with_blocks(200, blocks);
        cfg.oracle_supports = {range_cols(0, 2), range_cols(50, 10), range_cols(100, 2),
                               range_cols(150, 5)};
        cfg.methods = {"ALR-lasso", "ALR-all", "ALR-or", "F", "F-all", "t-mean", "t-PC"};
        cfg.replications = 200;
        cfg.hr_thinning = 25;
        return cfg;
    }

    throw std::invalid_argument("unknown preset: " + name);
}

namespace {
std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_rows_csv: cannot open " + path);
    out << "experiment,replication,method,statistic,p_value,flags,wall_ms,seed\n";
    for (const auto& r : rows)
        out << r.experiment_id << ',' << r.replication << ',' << r.method << ','
            << fmt_double(r.statistic) << ',' << fmt_double(r.p_value) << ',' << r.flags << ','
            << fmt_double(r.wall_ms) << ',' << r.seed << '\n';
}

void write_summary_json(const std::string& path, const ExperimentSummary& summary) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["experiment"] = summary.experiment_id;
    j["replications"] = summary.replications;
    j["seed"] = summary.seed;
    j["lambdas_used"] = summary.lambdas_used;
    j["wall_seconds"] = summary.wall_seconds;
    for (const auto& m : summary.methods) {
        nlohmann::json jm;
        jm["n"] = m.n;
        jm["power_at_0.05"] = m.power_05;
        jm["power_at_0.10"] = m.power_10;
        jm["ks_uniform_pvalue"] = m.ks_uniform_p;
        std::vector<double> grid(m.sorted_pvalues.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            grid[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(grid.size());
        jm["qq_uniform_quantiles"] = grid;
        jm["qq_sorted_pvalues"] = m.sorted_pvalues;
        j["methods"][m.method] = jm;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_summary_json: cannot open " + path);
    out << j.dump(2) << '\n';
}

void write_estimation_csv(const std::string& path, const std::vector<EstimationRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_estimation_csv: cannot open " + path);
    out << "cell,estimator,replication,mse,ratio_vs_LPML-M\n";
    for (const auto& r : rows)
        out << r.cell << ',' << r.estimator << ',' << r.replication << ',' << fmt_double(r.mse)
            << ',' << fmt_double(r.ratio_vs_lpml_m) << '\n';
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& s, const std::string& file, int line_no) {
    if (s.empty())
        throw std::runtime_error(file + ": line " + std::to_string(line_no) + ": missing value");
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || !std::isfinite(v))
        throw std::runtime_error(file + ": line " + std::to_string(line_no) +
                                 ": not a number: " + s);
    return v;
}

}  // namespace

std::pair<GroupedDesign, Vec> load_dataset(const std::string& x_path,
                                           const std::string& groups_path,
                                           const std::string& y_path) {
    std::ifstream xin(x_path);
    if (!xin) throw std::runtime_error("load_dataset: cannot open " + x_path);
    std::string line;
    if (!std::getline(xin, line)) throw std::runtime_error(x_path + ": empty file");
    std::vector<std::string> header = split_csv_line(line);
    bool y_inline = y_path.empty();
    if (y_inline && (header.empty() || header.back() != "y"))
        throw std::runtime_error(x_path + ": final column must be named y (or pass a separate y file)");
    int p = static_cast<int>(header.size()) - (y_inline ? 1 : 0);
    if (p < 1) throw std::runtime_error(x_path + ": no predictor columns");

    std::vector<std::vector<double>> data;
    std::vector<double> yvals;
    int line_no = 1;
    while (std::getline(xin, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != static_cast<int>(header.size()))
            throw std::runtime_error(x_path + ": line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, found " +
                                     std::to_string(fields.size()));
        std::vector<double> row(p);
        for (int j = 0; j < p; ++j) row[j] = parse_cell(fields[j], x_path, line_no);
        if (y_inline) yvals.push_back(parse_cell(fields.back(), x_path, line_no));
        data.push_back(std::move(row));
    }
    const int n = static_cast<int>(data.size());
    if (n < 2) throw std::runtime_error(x_path + ": needs at least 2 data rows");

    if (!y_inline) {
        std::ifstream yin(y_path);
        if (!yin) throw std::runtime_error("load_dataset: cannot open " + y_path);
        std::getline(yin, line);  // header
        int yline = 1;
        while (std::getline(yin, line)) {
            ++yline;
            if (line.empty()) continue;
            yvals.push_back(parse_cell(line, y_path, yline));
        }
        if (static_cast<int>(yvals.size()) != n)
            throw std::runtime_error(y_path + ": " + std::to_string(yvals.size()) +
                                     " responses for " + std::to_string(n) + " rows");
    }

    // groups file: column_index,group_id (1-based), ids covering 1..K
    std::ifstream gin(groups_path);
    if (!gin) throw std::runtime_error("load_dataset: cannot open " + groups_path);
    std::getline(gin, line);  // header
    std::vector<int> group_of(p, 0);
    int gline = 1, max_id = 0;
    while (std::getline(gin, line)) {
        ++gline;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw std::runtime_error(groups_path + ": line " + std::to_string(gline) +
                                     ": expected column_index,group_id");
        int col = static_cast<int>(parse_cell(fields[0], groups_path, gline));
        int gid = static_cast<int>(parse_cell(fields[1], groups_path, gline));
        if (col < 1 || col > p)
            throw std::runtime_error(groups_path + ": line " + std::to_string(gline) +
                                     ": unknown column index " + std::to_string(col));
        if (gid < 1)
            throw std::runtime_error(groups_path + ": line " + std::to_string(gline) +
                                     ": group ids must be >= 1");
        if (group_of[col - 1] != 0)
            throw std::runtime_error(groups_path + ": line " + std::to_string(gline) +
                                     ": column " + std::to_string(col) + " assigned twice");
        group_of[col - 1] = gid;
        max_id = std::max(max_id, gid);
    }
    std::vector<std::vector<int>> groups(max_id);
    for (int j = 0; j < p; ++j) {
        if (group_of[j] == 0)
            throw std::runtime_error(groups_path + ": column " + std::to_string(j + 1) +
                                     " has no group");
        groups[group_of[j] - 1].push_back(j);
    }
    for (int g = 0; g < max_id; ++g)
        if (groups[g].empty())
            throw std::runtime_error(groups_path + ": group ids must cover 1.." +
                                     std::to_string(max_id) + "; missing id " + std::to_string(g + 1));

    Mat x(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x(i, j) = data[i][j];
    Vec y = Eigen::Map<Vec>(yvals.data(), yvals.size());
    return {GroupedDesign::standardize(std::move(x), std::move(groups)), std::move(y)};
}

void save_dataset(const std::string& x_path, const std::string& groups_path,
                  const GroupedDesign& design, const Vec& y) {
    std::ofstream xout(x_path);
    if (!xout) throw std::runtime_error("save_dataset: cannot open " + x_path);
    for (int j = 0; j < design.p(); ++j) xout << 'x' << (j + 1) << ',';
    xout << "y\n";
    for (int i = 0; i < design.n(); ++i) {
        for (int j = 0; j < design.p(); ++j) xout << fmt_double(design.X(i, j)) << ',';
        xout << fmt_double(y[i]) << '\n';
    }
    std::ofstream gout(groups_path);
    if (!gout) throw std::runtime_error("save_dataset: cannot open " + groups_path);
    gout << "column_index,group_id\n";
    for (std::size_t k = 0; k < design.groups.size(); ++k)
        for (int j : design.groups[k]) gout << (j + 1) << ',' << (k + 1) << '\n';
}

std::vector<BenchRow> bench_statistics(const BenchConfig& cfg) {
    std::vector<BenchRow> out;
    for (double alpha : cfg.alphas) {
        for (int n : cfg.ns) {
            const int K = 4;
            const int gs = n / K;
            GroupedDesign design = generate_design(
                n, {gs, gs, gs, gs}, cfg.rho,
                derive_seed(cfg.seed, {0xB0u, static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(alpha * 1000)}));
            int m = static_cast<int>(std::floor(0.25 * alpha * n));
            m = std::max(1, m);
            std::vector<HatOperator> hats;
            std::vector<int> sizes;
            for (int k = 0; k < K; ++k) {
                std::vector<int> cols;
                for (int j = 0; j < m; ++j) cols.push_back(design.groups[k][j]);
                hats.push_back(make_hat(design.columns(cols), HatKind::lasso_refit));
                sizes.push_back(m);
            }
            Mat trace_gram = alr_trace_gram(hats);

            BenchRow row;
            row.alpha = alpha;
            row.n = n;
            for (int b = 0; b < cfg.replications; ++b) {
                RandomStream rs(derive_seed(cfg.seed, {0xB1u, static_cast<std::uint64_t>(n),
                                                       static_cast<std::uint64_t>(alpha * 1000),
                                                       static_cast<std::uint64_t>(b)}));
                Vec y(n);
                for (int i = 0; i < n; ++i) y[i] = rs.normal();

                {
                    PrototypeLikelihood pl(hats, y, 1.0);
                    pl.set_inverse_strategy(GInverseStrategy::dense_lu);
                    auto t0 = Clock::now();
                    FitResult full = pl.fit_mle();
                    FitResult restr = pl.fit_mle_restricted({0});
                    volatile double r = 2.0 * (full.loglik_at_opt - restr.loglik_at_opt);
                    (void)r;
                    row.elr_naive_ms += ms_since(t0);
                }
                {
                    PrototypeLikelihood pl(hats, y, 1.0);
                    auto t0 = Clock::now();
                    FitResult full = pl.fit_mle();
                    FitResult restr = pl.fit_mle_restricted({0});
                    volatile double r = 2.0 * (full.loglik_at_opt - restr.loglik_at_opt);
                    (void)r;
                    row.elr_sm_ms += ms_since(t0);
                }
                {
                    auto t0 = Clock::now();
                    volatile double r = alr_multivariate(y, hats, sizes, 1.0, 0, &trace_gram);
                    (void)r;
                    row.alr_ms += ms_since(t0);
                }
            }
            row.elr_naive_ms /= cfg.replications;
            row.elr_sm_ms /= cfg.replications;
            row.alr_ms /= cfg.replications;
            out.push_back(row);
        }
    }
    return out;
}

}  // namespace protosel
