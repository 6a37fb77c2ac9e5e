#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "cylwalk/connectivity.hpp"
#include "cylwalk/experiments.hpp"
#include "cylwalk/exponents.hpp"
#include "cylwalk/fitting.hpp"
#include "cylwalk/report.hpp"

using namespace cylwalk;

TEST_CASE("correction exponent phi") {
    CHECK(alpha_star(3) == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
    CHECK(phi(0.1, 3) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(phi(0.5, 3) == doctest::Approx(0.125).epsilon(1e-14));

    // continuity at both branch points, and vanishing limits
    for (int d : {3, 4, 5}) {
        double as = alpha_star(d);
        CHECK(std::abs(phi(as - 1e-9, d) - phi(as + 1e-9, d)) < 1e-7);
        CHECK(std::abs(phi(1.0 / d - 1e-9, d) - phi(1.0 / d + 1e-9, d)) < 1e-7);
        CHECK(phi(1e-12, d) < 1e-11);
        CHECK(phi(1.0 - 1e-12, d) < 1e-11);
    }
    CHECK_THROWS(phi(0.0, 3));
    CHECK_THROWS(phi(1.0, 3));
    CHECK_THROWS(phi(0.5, 2));
}

TEST_CASE("large deviations rate function") {
    CHECK(ldp_rate(0.2, 0.5, 3) == doctest::Approx(1.7).epsilon(1e-14));
    CHECK(ldp_rate(1.0, 1.0, 3) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(ldp_rate(1.0, 1.8, 3) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(ldp_rate(1.0, 2.5, 3) == 0.0);

    // the two middle branches agree at the knee beta = d-1-1/(d-1)
    for (int d : {3, 4, 5}) {
        double knee = d - 1.0 - 1.0 / (d - 1.0);
        CHECK(std::abs(ldp_rate(0.9, knee - 1e-9, d) - ldp_rate(0.9, knee + 1e-9, d)) < 1e-7);
    }
}

TEST_CASE("cover-variant rate dominates") {
    CHECK(cover_ldp_rate(0.5, 1.0, 3) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(cover_ldp_rate(0.1, 2.8, 3) == 0.0);
    for (double a : {0.05, 0.2, 0.4, 0.7, 0.9, 1.3})
        for (double b : {0.1, 0.5, 1.0, 1.6, 2.1})
            CHECK(ldp_rate(a, b, 3) <= cover_ldp_rate(a, b, 3) + 1e-12);
}

TEST_CASE("zeta closed form and grid maximization") {
    CHECK(zeta(0.5, 3) == doctest::Approx(1.125).epsilon(1e-14));
    CHECK(zeta(0.1, 3) == doctest::Approx(1.85).epsilon(1e-14));
    for (int d : {3, 4}) {
        for (double a = 0.05; a < 1.0; a += 0.05) {
            CHECK(std::abs(zeta(a, d) - zeta_by_grid(a, d)) <= 1e-6);
        }
    }
    CHECK(zeta(1.7, 3) == 0.0);
}

TEST_CASE("exponent identity") {
    // d(1 - a - phi) = zeta v d(1-2a) 1{a < 1/d}
    CHECK(3 * (1 - 0.5 - phi(0.5, 3)) == doctest::Approx(zeta(0.5, 3)).epsilon(1e-14));
    CHECK(3 * (1 - 0.1 - phi(0.1, 3)) == doctest::Approx(std::max(zeta(0.1, 3), 3 * (1 - 0.2))).epsilon(1e-14));
    for (int d : {3, 4, 5}) CHECK(exponent_identity_residual(d, 999) <= 1e-12);
}

TEST_CASE("exponent table shape") {
    ExponentTable t = make_exponent_table(3, 999);
    REQUIRE(t.alpha.size() == 998);
    // the band passes through (alpha_*, 1 - 2 alpha_*)
    double as = alpha_star(3);
    size_t nearest = 0;
    for (size_t i = 0; i < t.alpha.size(); ++i)
        if (std::abs(t.alpha[i] - as) < std::abs(t.alpha[nearest] - as)) nearest = i;
    CHECK(t.lower_exp[nearest] / 3.0 == doctest::Approx(1.0 - 2.0 * t.alpha[nearest]).epsilon(1e-6));
    for (size_t i = 0; i < t.alpha.size(); ++i) CHECK(t.lower_exp[i] <= t.upper_exp[i] + 1e-12);
    // rate grid: nonnegative and below the cover-variant envelope
    REQUIRE(t.f.size() == t.alpha.size() * t.beta.size());
    for (size_t k = 0; k < t.f.size(); ++k) {
        CHECK(t.f[k] >= 0.0);
        CHECK(t.f[k] <= t.f_star[k] + 1e-12);
    }
}

TEST_CASE("exponent fitting") {
    // exact power law: slope recovered exactly
    std::vector<double> xs;
    std::vector<std::vector<double>> samples;
    for (int N : {4, 6, 8, 10}) {
        xs.push_back(std::log(N));
        samples.push_back({std::pow(N, 6.0)});
    }
    FitResult fit = fit_exponent(xs, samples, 100, 0.90, 1);
    CHECK(fit.slope == doctest::Approx(6.0).epsilon(1e-9));

    // exact stretched-exponential input: unit slope in transformed coordinates
    std::vector<double> xs2;
    std::vector<std::vector<double>> samples2;
    for (int N : {3, 4, 5, 6}) {
        xs2.push_back(std::pow(N, 1.5));
        samples2.push_back({std::exp(std::pow(N, 1.5))});
    }
    FitResult fit2 = fit_exponent(xs2, samples2, 100, 0.90, 1);
    CHECK(fit2.slope == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS(fit_exponent({1.0, 2.0}, {{1.0}, {2.0}}, 10, 0.9, 1));
}

TEST_CASE("bootstrap interval covers the generating slope") {
    // noisy synthetic medians; the 90% interval should cover the true slope
    // in a fraction consistent with its level (3-sigma binomial slack)
    const double true_slope = 6.0;
    int covered = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        Rng rng(5000 + t);
        std::vector<double> xs;
        std::vector<std::vector<double>> samples;
        for (int N : {4, 6, 8, 10}) {
            xs.push_back(std::log(N));
            std::vector<double> reps;
            for (int r = 0; r < 60; ++r)
                reps.push_back(std::pow(N, true_slope) * std::exp(0.8 * (rng.u01() + rng.u01() - 1.0)));
            samples.push_back(std::move(reps));
        }
        FitResult fit = fit_exponent(xs, samples, 200, 0.90, 99 + t);
        if (fit.ci_lo <= true_slope && true_slope <= fit.ci_hi) ++covered;
    }
    CHECK(covered >= 168);  // 0.9 * 200 minus ~3 binomial sigmas
}

TEST_CASE("config round trip is bit exact") {
    ExperimentConfig cfg;
    cfg.kind = "ldp";
    cfg.d = 3;
    cfg.Ns = {3, 5, 7};
    cfg.alpha = 0.123456789012345;
    cfg.beta = 2.5;
    cfg.replicas = 321;
    cfg.budget_steps = 123456789;
    cfg.seed = 99;
    cfg.gamma = 0.41;
    cfg.gamma_prime = 0.77;
    cfg.xi = 1.25;
    cfg.out_dir = "somewhere/else";
    std::string kv = cfg.to_kv();
    ExperimentConfig back = ExperimentConfig::from_kv(kv);
    CHECK(back.to_kv() == kv);
    CHECK(back.fingerprint() == cfg.fingerprint());
    CHECK_THROWS(ExperimentConfig::from_kv("nonsense-key=1\n"));
}

TEST_CASE("disconnection experiment at the smallest scale") {
    // two-site slice: the walk closes it in a handful of steps
    ExperimentConfig cfg;
    cfg.kind = "tdisc";
    cfg.d = 1;
    cfg.Ns = {2};
    cfg.alpha = 2.0;
    cfg.replicas = 200;
    cfg.budget_steps = 20'000;
    cfg.seed = 11;
    RunRecord rec = run_disconnection_experiment(cfg);
    REQUIRE(rec.rows.size() == 200);
    const auto& per_n = rec.summary["per_N"][0];
    CHECK(per_n["censored"].get<int64_t>() == 0);
    CHECK(per_n["median"].get<double>() <= 9.0);

    // the streaming run agrees with the trajectory-based decision under the
    // same replica stream
    CylinderGeom g{1, 2};
    DriftParams drift = drift_from_alpha(2, 1, 2.0);
    for (int64_t r = 0; r < 40; ++r) {
        uint64_t s = splitmix64(cfg.seed ^ splitmix64((2ull << 8) | 1ull));
        Rng rng1 = Rng::for_replica(s, r);
        TdiscOutcome out = simulate_disconnection_time(g, drift, cfg.budget_steps, rng1);
        Rng rng2 = Rng::for_replica(s, r);
        Trajectory t = simulate_walk(g, drift, Site{{0}, 0}, out.steps_run, rng2);
        auto oracle = disconnection_time(t);
        REQUIRE(oracle.has_value());
        CHECK(!out.censored);
        CHECK(*oracle == out.time);
        int64_t parsed = std::strtoll(rec.rows[r][2].c_str(), nullptr, 10);
        CHECK(parsed == out.time);
    }
}

TEST_CASE("csv round trip reproduces the summary bit-exactly") {
    ExperimentConfig cfg;
    cfg.kind = "cover";
    cfg.d = 1;
    cfg.Ns = {4};
    cfg.replicas = 60;
    cfg.seed = 5;
    cfg.out_dir = "test_out";
    RunRecord rec = run_cover_experiment(cfg);
    std::filesystem::create_directories("test_out");
    write_csv(rec, "test_out/cover.csv");
    RunRecord back = read_csv("test_out/cover.csv");
    CHECK(back.columns == rec.columns);
    CHECK(back.rows == rec.rows);
    summarize_record(back);
    CHECK(back.summary.dump() == rec.summary.dump());

    // a rewrite is byte-identical
    write_csv(back, "test_out/cover2.csv");
    std::ifstream f1("test_out/cover.csv", std::ios::binary), f2("test_out/cover2.csv", std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("empty records still serialize") {
    ExperimentConfig cfg;
    cfg.kind = "tdisc";
    cfg.Ns = {};
    cfg.replicas = 0;
    RunRecord rec;
    rec.config = cfg;
    rec.fingerprint = cfg.fingerprint();
    rec.columns = {"N", "replica", "t_disc", "censored", "distinct_sites", "steps_run", "budget"};
    write_csv(rec, "test_out/empty.csv");
    RunRecord back = read_csv("test_out/empty.csv");
    CHECK(back.columns == rec.columns);
    CHECK(back.rows.empty());
}

TEST_CASE("excursion experiment: degenerate box never disconnects") {
    // at d = 1, N = 3 the standard box is a single site, which no damage
    // set can 1/3-disconnect: exhaust both subsets
    CylinderGeom g{1, 3};
    Region box = Region::box_alpha(g, 1.0);
    REQUIRE(box.size() == 1);
    SiteSet empty(g), full(g);
    full.insert(Site{{0}, 0});
    CHECK(!kappa_disconnects(empty, box, 1.0 / 3.0).found);
    CHECK(!kappa_disconnects(full, box, 1.0 / 3.0).found);

    ExperimentConfig cfg;
    cfg.kind = "ldp";
    cfg.d = 1;
    cfg.Ns = {3};
    cfg.alpha = 1.0;
    cfg.beta = 0.0;  // [N^beta] = 1 excursion
    cfg.replicas = 60;
    cfg.budget_steps = 200'000;
    cfg.seed = 4;
    RunRecord rec = run_excursion_experiment(cfg);
    const auto& per_n = rec.summary["per_N"][0];
    CHECK(per_n["events"].get<int64_t>() == 0);
    CHECK(per_n["frequency"].get<double>() == 0.0);
    CHECK(per_n.contains("frequency_upper95"));  // zero events report a bound
}

TEST_CASE("excursion experiment: ample excursions cover a separating set") {
    ExperimentConfig cfg;
    cfg.kind = "ldp";
    cfg.d = 3;
    cfg.Ns = {4};
    cfg.alpha = 1.0;
    cfg.beta = 3.0;  // 64 excursions
    cfg.replicas = 30;
    cfg.budget_steps = 2'000'000;
    cfg.seed = 21;
    RunRecord rec = run_excursion_experiment(cfg);
    const auto& per_n = rec.summary["per_N"][0];
    // vertical return legs are heavy-tailed, so the occasional replica can
    // exhaust its budget before the outcome settles; censoring is data
    CHECK(per_n["uncensored"].get<int64_t>() >= 28);
    CHECK(per_n["frequency"].get<double>() > 0.9);
}

TEST_CASE("censored medians are flagged, not fabricated") {
    ExperimentConfig cfg;
    cfg.kind = "tdisc";
    cfg.d = 3;
    cfg.Ns = {6};
    cfg.alpha = 2.0;
    cfg.replicas = 20;
    cfg.budget_steps = 2'000;  // far below the typical disconnection time
    cfg.seed = 303;
    RunRecord rec = run_disconnection_experiment(cfg);
    const auto& per_n = rec.summary["per_N"][0];
    CHECK(per_n["censored"].get<int64_t>() > 10);
    CHECK(per_n["median_censored"].get<bool>());
    CHECK(!per_n.contains("median"));
    CHECK(!rec.summary.contains("slope"));
}

TEST_CASE("records are identical across worker counts") {
    ExperimentConfig cfg;
    cfg.kind = "tdisc";
    cfg.d = 1;
    cfg.Ns = {3};
    cfg.alpha = 1.0;
    cfg.replicas = 64;
    cfg.budget_steps = 300'000;
    cfg.seed = 12;
    setenv("CYLWALK_THREADS", "1", 1);
    RunRecord serial = run_disconnection_experiment(cfg);
    setenv("CYLWALK_THREADS", "7", 1);
    RunRecord parallel = run_disconnection_experiment(cfg);
    unsetenv("CYLWALK_THREADS");
    CHECK(serial.rows == parallel.rows);
    CHECK(serial.summary.dump() == parallel.summary.dump());
}

TEST_CASE("worker count honors the environment variable") {
    setenv("CYLWALK_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    unsetenv("CYLWALK_THREADS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("excursion event frequency decays with the torus size") {
    ExperimentConfig cfg;
    cfg.kind = "ldp";
    cfg.d = 3;
    cfg.Ns = {4, 6};
    cfg.alpha = 1.0;
    cfg.beta = 0.3;  // a single excursion at these sizes
    cfg.replicas = 400;
    cfg.budget_steps = 300'000;
    cfg.seed = 77;
    RunRecord rec = run_excursion_experiment(cfg);
    double f4 = rec.summary["per_N"][0]["frequency"].get<double>();
    double f6 = rec.summary["per_N"][1]["frequency"].get<double>();
    CHECK(f4 > f6 + 0.1);
}

TEST_CASE("report emission writes the artifacts") {
    ExperimentConfig cfg;
    cfg.kind = "cover";
    cfg.d = 1;
    cfg.Ns = {4};
    cfg.replicas = 40;
    cfg.seed = 5;
    cfg.out_dir = "test_out/emit";
    cfg.svg = true;
    RunRecord rec = run_cover_experiment(cfg);
    auto files = emit_report(rec);
    for (const std::string& f : files) CHECK(std::filesystem::exists(f));
    CHECK(files.size() == 3);

    auto exp_files = emit_exponent_report(make_exponent_table(3, 201), "test_out/emit", true);
    for (const std::string& f : exp_files) CHECK(std::filesystem::exists(f));
}
