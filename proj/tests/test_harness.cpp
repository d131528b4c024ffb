#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "protosel/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace protosel;

TEST_CASE("generated designs are standardized with the requested correlation") {
    GroupedDesign d = generate_design(100, {10, 10}, 0.3, 1);
    for (int j = 0; j < d.p(); ++j) {
        CHECK(std::fabs(d.X.col(j).mean()) < 1e-12);
        CHECK(d.X.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    // mean within-group correlation lands in the Fisher-z band around 0.3
    double within = 0.0;
    int cnt = 0;
    for (int a = 0; a < 10; ++a)
        for (int b = a + 1; b < 10; ++b) {
            within += d.X.col(a).dot(d.X.col(b));
            ++cnt;
        }
    CHECK(within / cnt > 0.2);
    CHECK(within / cnt < 0.4);

    GroupedDesign d0 = generate_design(100, {10, 10}, 0.0, 2);
    for (int a = 0; a < 20; ++a)
        for (int b = a + 1; b < 20; ++b) CHECK(std::fabs(d0.X.col(a).dot(d0.X.col(b))) < 0.3);

    CHECK_THROWS(generate_design(50, {5}, 1.2, 3));
}

TEST_CASE("linear response generator: beta = 0 draws pure noise") {
    GroupedDesign d = generate_design(200, {5}, 0.0, 4);
    Vec y = generate_response_linear(d, Vec::Zero(5), 2.0, 5);
    double var = (y.array() - y.mean()).square().sum() / y.size();
    CHECK(var == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("prototype response: theta = 0 reduces to mu + noise") {
    GroupedDesign d = generate_design(50, {4}, 0.0, 6);
    std::vector<HatOperator> hats = {make_hat(d.X, HatKind::least_squares)};
    Vec y = generate_response_prototype(hats, Vec::Zero(1), 3.0, 1.0, 7, 50);
    CHECK(y.mean() == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("prototype response covariance matches sigma^2 G^{-2}") {
    const int n = 15;
    GroupedDesign d = generate_design(n, {3}, 0.0, 8);
    std::vector<HatOperator> hats = {make_hat(d.X, HatKind::least_squares)};
    Vec theta = Vec::Constant(1, 0.6);
    const int draws = 5000;
    Mat ys(draws, n);
    for (int b = 0; b < draws; ++b)
        ys.row(b) = generate_response_prototype(hats, theta, 0.0, 1.0, 800 + b, n).transpose();
    Vec mean = ys.colwise().mean();
    Mat centered = ys.rowwise() - mean.transpose();
    Mat cov = centered.transpose() * centered / draws;

    Mat g = Mat::Identity(n, n) - theta[0] * hats[0].dense();
    Mat ginv = g.partialPivLu().inverse();
    Mat expected = ginv * ginv;
    // entrywise within 4 standard errors; var of a sample covariance entry is
    // roughly (v_ii v_jj + v_ij^2)/draws
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double se = std::sqrt((expected(i, i) * expected(j, j) +
                                   expected(i, j) * expected(i, j)) /
                                  draws);
            CHECK(std::fabs(cov(i, j) - expected(i, j)) < 4.0 * se + 1e-12);
        }
}

TEST_CASE("experiment runs are deterministic and summaries recount the rows") {
    ExperimentConfig cfg = make_preset("null");
    cfg.replications = 12;
    cfg.hr_samples = 400;
    cfg.hr_burnin = 100;
    cfg.seed = 99;

    cfg.threads = 1;
    ExperimentOutput serial = run_experiment(cfg);
    cfg.threads = 0;
    ExperimentOutput parallel = run_experiment(cfg);

    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].method == parallel.rows[i].method);
        CHECK(serial.rows[i].statistic == parallel.rows[i].statistic);
        CHECK(serial.rows[i].p_value == parallel.rows[i].p_value);
        CHECK(serial.rows[i].flags == parallel.rows[i].flags);
    }

    for (const auto& m : parallel.summary.methods) {
        int n = 0;
        double hits05 = 0.0;
        for (const auto& r : parallel.rows)
            if (r.method == m.method) {
                ++n;
                if (r.p_value <= 0.05) hits05 += 1.0;
            }
        CHECK(m.n == n);
        CHECK(m.power_05 == doctest::Approx(hits05 / n).epsilon(1e-12));
    }
}

TEST_CASE("csv round trip is bit exact after standardization") {
    GroupedDesign d = generate_design(30, {4, 3}, 0.2, 11);
    Vec y = generate_response_linear(d, Vec::Zero(7), 1.0, 12);
    auto tmp = std::filesystem::temp_directory_path();
    std::string xp = (tmp / "protosel_x.csv").string();
    std::string gp = (tmp / "protosel_g.csv").string();
    save_dataset(xp, gp, d, y);
    auto [d2, y2] = load_dataset(xp, gp);
    REQUIRE(d2.n() == d.n());
    REQUIRE(d2.p() == d.p());
    CHECK((d2.X - d.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((y2 - y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d2.groups == d.groups);
    std::remove(xp.c_str());
    std::remove(gp.c_str());
}

TEST_CASE("dataset loader reports descriptive errors") {
    auto tmp = std::filesystem::temp_directory_path();
    std::string xp = (tmp / "protosel_bad_x.csv").string();
    std::string gp = (tmp / "protosel_bad_g.csv").string();

    {
        std::ofstream x(xp);
        x << "x1,x2,y\n1.0,2.0,0.5\n2.0,1.0\n";  // ragged row
        std::ofstream g(gp);
        g << "column_index,group_id\n1,1\n2,1\n";
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_dataset(xp, gp)),
                         doctest::Contains("line 3"), std::runtime_error);

    {
        std::ofstream x(xp);
        x << "x1,x2,y\n1.0,2.0,0.5\n2.0,,1.0\n1.5,0.7,0.2\n";  // missing value
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_dataset(xp, gp)),
                         doctest::Contains("missing value"), std::runtime_error);

    {
        std::ofstream x(xp);
        x << "x1,x2,y\n1.0,2.0,0.5\n2.0,0.3,1.0\n1.5,0.7,0.2\n";
        std::ofstream g(gp);
        g << "column_index,group_id\n1,1\n2,3\n";  // gap: id 2 missing
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_dataset(xp, gp)),
                         doctest::Contains("missing id 2"), std::runtime_error);

    {
        std::ofstream g(gp);
        g << "column_index,group_id\n1,1\n5,1\n";  // unknown column
    }
    CHECK_THROWS_WITH_AS(static_cast<void>(load_dataset(xp, gp)),
                         doctest::Contains("unknown column index 5"), std::runtime_error);

    std::remove(xp.c_str());
    std::remove(gp.c_str());
}

TEST_CASE("three-column toy csv with groups loads with correct shapes") {
    auto tmp = std::filesystem::temp_directory_path();
    std::string xp = (tmp / "protosel_toy_x.csv").string();
    std::string gp = (tmp / "protosel_toy_g.csv").string();
    {
        std::ofstream x(xp);
        x << "a,b,c,y\n";
        protosel::RandomStream rs(13);
        for (int i = 0; i < 12; ++i) {
            for (int j = 0; j < 3; ++j) x << rs.normal() << ',';
            x << rs.normal() << '\n';
        }
        std::ofstream g(gp);
        g << "column_index,group_id\n1,1\n2,2\n3,2\n";
    }
    auto [d, y] = load_dataset(xp, gp);
    CHECK(d.n() == 12);
    CHECK(d.p() == 3);
    CHECK(d.n_groups() == 2);
    CHECK(d.groups[0].size() == 1);
    CHECK(d.groups[1].size() == 2);
    CHECK(y.size() == 12);
    std::remove(xp.c_str());
    std::remove(gp.c_str());
}

TEST_CASE("presets parameterize the documented designs") {
    ExperimentConfig null_cfg = make_preset("null");
    CHECK(null_cfg.n == 100);
    CHECK(null_cfg.group_sizes == std::vector<int>{50});
    CHECK(null_cfg.beta.norm() == 0.0);
    CHECK(null_cfg.methods.size() == 10);

    ExperimentConfig spread = make_preset("table2-spread");
    CHECK(spread.beta.head(10).norm() > 0.0);
    CHECK(spread.beta[0] == doctest::Approx(4.0 * 10.0 / std::sqrt(382.0)));
    CHECK(spread.beta.tail(40).norm() == 0.0);
    // the 1/sqrt(382) normalizer leaves the norm at 4 sqrt(385/382)
    CHECK(spread.beta.norm() == doctest::Approx(4.0 * std::sqrt(385.0 / 382.0)).epsilon(1e-12));
    CHECK(make_preset("table2-moderate").beta.norm() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(make_preset("table2-single").beta.norm() == doctest::Approx(4.0).epsilon(1e-12));

    ExperimentConfig fig1 = make_preset("fig1");
    CHECK(fig1.prototype_mode);
    CHECK(fig1.theta[0] == doctest::Approx(1.2));
    CHECK(fig1.rho == doctest::Approx(0.3));

    ExperimentConfig fig4 = make_preset("fig4-left");
    CHECK(fig4.multivariate);
    CHECK(fig4.n == 100);
    CHECK(fig4.group_sizes == std::vector<int>({25, 25, 25, 25}));
    CHECK(fig4.beta.head(25).norm() == 0.0);
    CHECK(make_preset("fig4-right").beta.head(2).norm() > 0.0);

    ExperimentConfig fig5 = make_preset("fig5-beta2");
    CHECK(fig5.n == 300);
    CHECK(fig5.methods.size() == 7);
    CHECK_THROWS(make_preset("nope"));
}

TEST_CASE("small end-to-end experiment emits valid rows and files") {
    ExperimentConfig cfg = make_preset("fig1");
    cfg.replications = 30;
    cfg.seed = 4242;
    ExperimentOutput out = run_experiment(cfg);
    REQUIRE(out.rows.size() == 60);
    for (const auto& r : out.rows) {
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
        CHECK(std::isfinite(r.statistic));
    }
    auto tmp = std::filesystem::temp_directory_path();
    std::string rp = (tmp / "protosel_rows.csv").string();
    std::string sp = (tmp / "protosel_summary.json").string();
    write_rows_csv(rp, out.rows);
    write_summary_json(sp, out.summary);
    CHECK(std::filesystem::file_size(rp) > 100);
    CHECK(std::filesystem::file_size(sp) > 100);
    std::remove(rp.c_str());
    std::remove(sp.c_str());
}

TEST_CASE("bench table runs at toy scale and preserves the expected ordering") {
    BenchConfig cfg;
    cfg.alphas = {0.3};
    cfg.ns = {60};
    cfg.replications = 10;
    auto rows = bench_statistics(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].alr_ms < rows[0].elr_sm_ms);
    CHECK(rows[0].alr_ms < rows[0].elr_naive_ms);
    // the naive-vs-iterative gap only opens at large n; see the bench target
}
