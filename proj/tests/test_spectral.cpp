#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "cylwalk/spectral.hpp"
#include "test_util.hpp"

using namespace cylwalk;

namespace {

// per-target linear-solve oracle for mean hitting times
Eigen::MatrixXd hitting_times_direct(const Eigen::MatrixXd& P) {
    const int64_t n = P.rows();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (int64_t target = 0; target < n; ++target) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n - 1, n - 1);
        Eigen::VectorXd b = Eigen::VectorXd::Ones(n - 1);
        auto idx = [&](int64_t s) { return s < target ? s : s - 1; };
        for (int64_t s = 0; s < n; ++s) {
            if (s == target) continue;
            A(idx(s), idx(s)) += 1.0;
            for (int64_t t = 0; t < n; ++t) {
                if (t == target || P(s, t) == 0.0) continue;
                A(idx(s), idx(t)) -= P(s, t);
            }
        }
        Eigen::VectorXd h = A.partialPivLu().solve(b);
        for (int64_t s = 0; s < n; ++s)
            if (s != target) H(s, target) = h(idx(s));
    }
    return H;
}

Eigen::MatrixXd cycle_chain(int n) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        P(i, (i + 1) % n) += 0.5;
        P(i, (i + n - 1) % n) += 0.5;
    }
    return P;
}

}  // namespace

TEST_CASE("torus spectra in closed form") {
    Spectrum two = torus_spectrum(2, 1);
    REQUIRE(two.values.size() == 2);
    CHECK(two.values[0] == doctest::Approx(1.0));
    CHECK(two.values[1] == doctest::Approx(-1.0));

    Spectrum three = torus_spectrum(3, 1);
    REQUIRE(three.values.size() == 3);
    CHECK(three.values[0] == doctest::Approx(1.0));
    CHECK(three.values[1] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(three.values[2] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("closed-form spectra match dense eigendecompositions") {
    std::vector<std::pair<int, int>> cases;
    for (int N = 2; N <= 20; ++N) cases.push_back({N, 1});
    for (int N = 2; N <= 20; ++N) cases.push_back({N, 2});
    for (int N = 2; N <= 7; ++N) cases.push_back({N, 3});
    for (auto [N, d] : cases) {
        int64_t size = 1;
        for (int i = 0; i < d; ++i) size *= N;
        if (size > 400) continue;
        Spectrum closed = torus_spectrum(N, d);
        Eigen::MatrixXd P = torus_transition_matrix(N, d);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
        std::vector<double> dense(es.eigenvalues().data(), es.eigenvalues().data() + size);
        std::sort(dense.begin(), dense.end(), std::greater<>());
        for (size_t m = 0; m < dense.size(); ++m)
            CHECK(std::abs(closed.values[m] - dense[m]) < 1e-10);
    }
}

TEST_CASE("eigentime quantity") {
    Spectrum flip{{1.0, -1.0}};
    CHECK(u_of_spectrum(flip) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(u_of_spectrum(torus_spectrum(3, 1)) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

    Spectrum reducible{{1.0, 1.0, 0.0}};
    CHECK_THROWS(u_of_spectrum(reducible));

    // recorded empirical ratios: u(Y)/N^d at d = 3, u(Y)/(N^2 log N) at d = 2
    for (int N = 4; N <= 12; ++N) {
        double ratio = u_of_spectrum(torus_spectrum(N, 3)) / std::pow(N, 3);
        CHECK(ratio > 0.0);
        CHECK(ratio < 3.0);
    }
    for (int N = 4; N <= 16; ++N) {
        double ratio = u_of_spectrum(torus_spectrum(N, 2)) / (N * N * std::log(N));
        CHECK(ratio > 0.0);
        CHECK(ratio < 2.0);
    }
}

TEST_CASE("cover tail bound arithmetic") {
    CHECK(cover_tail_bound(4.0 / 3.0, 9, 5) == doctest::Approx(9.0));  // floor(...) = 0
    CHECK(cover_tail_bound(4.0 / 3.0, 9, 100) == doctest::Approx(9.0 * std::exp(-6.0)).epsilon(1e-12));
    double prev = 1e300;
    for (int64_t n = 1; n < 300; n += 7) {
        double b = cover_tail_bound(2.0, 25, n);
        CHECK(b <= prev + 1e-12);
        prev = b;
    }
}

TEST_CASE("maximum hitting time vs twice the eigentime") {
    // two-state flip chain: equality
    Eigen::MatrixXd flip(2, 2);
    flip << 0, 1, 1, 0;
    ChainAnalysis a = eigentime_maxhit_check(flip);
    CHECK(a.max_hit == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(a.u == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(a.inequality_holds);
    CHECK(a.slack == doctest::Approx(0.0).epsilon(1e-9));

    // the 3-cycle: max hit 2 <= 2u = 8/3
    ChainAnalysis c3 = eigentime_maxhit_check(torus_transition_matrix(3, 1));
    CHECK(c3.max_hit == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(c3.u == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
    CHECK(c3.inequality_holds);

    // torus chains and cycles
    for (int N = 3; N <= 8; ++N) {
        CHECK(eigentime_maxhit_check(torus_transition_matrix(N, 1)).inequality_holds);
        CHECK(eigentime_maxhit_check(torus_transition_matrix(N, 2)).inequality_holds);
        CHECK(eigentime_maxhit_check(cycle_chain(N)).inequality_holds);
    }
    CHECK(eigentime_maxhit_check(torus_transition_matrix(5, 2)).inequality_holds);

    // hypercube-like product chain: the two-site torus in dimension 4
    CHECK(eigentime_maxhit_check(torus_transition_matrix(2, 4)).inequality_holds);

    Eigen::MatrixXd asym(2, 2);
    asym << 0.5, 0.5, 0.25, 0.75;
    CHECK_THROWS(eigentime_maxhit_check(asym));
}

TEST_CASE("fundamental-matrix hitting times match per-target solves") {
    for (int N : {3, 4, 5, 6}) {
        Eigen::MatrixXd P = torus_transition_matrix(N, 1);
        Eigen::MatrixXd a = mean_hitting_times(P), b = hitting_times_direct(P);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
    }
    Eigen::MatrixXd P2 = torus_transition_matrix(3, 2);
    CHECK((mean_hitting_times(P2) - hitting_times_direct(P2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("estimated visit kernel is stochastic and flip-symmetric") {
    VisitKernelEstimate est = estimate_visit_kernel(2, 1, 0.0, 10'000, 3000.0, 99);
    REQUIRE(est.p.rows() == 2);
    for (int i = 0; i < 2; ++i) CHECK(est.p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    // symmetry of the transition between the two sites
    double p01 = est.p(0, 1), p10 = est.p(1, 0);
    double se = 2.0 / std::sqrt(static_cast<double>(est.finite_samples));
    CHECK(std::abs(p01 - p10) < 3 * se);
    CHECK(est.finite_fraction > 0.9);

    CHECK_THROWS(estimate_visit_kernel(2, 1, 0.0, 500, 100.0, 1));
}

TEST_CASE("visit chain forgets its past given the present state") {
    // chi-square independence check of (V_0, V_2) given V_1 on sampled
    // two-visit chains
    CylinderGeom g{1, 3};
    DriftParams drift{0.0, std::nullopt};
    const int T = 3;
    std::vector<std::vector<std::vector<double>>> table(
        T, std::vector<std::vector<double>>(T, std::vector<double>(T, 0.0)));
    int64_t kept = 0;
    for (int64_t r = 0; kept < 24'000 && r < 80'000; ++r) {
        Rng rng = Rng::for_replica(4004, r);
        Site start{{static_cast<int>(r % T)}, 0};
        VisitChainSample c = visit_chain_stream(g, drift, start, 2, 20'000.0, rng);
        if (c.stop_times.size() > 2 && c.stop_times[2] != kInfiniteTime) {
            table[c.values[1][0]][c.values[0][0]][c.values[2][0]] += 1.0;
            ++kept;
        }
    }
    double stat = 0.0;
    int df = 0;
    for (int v = 0; v < T; ++v) {
        double total = 0.0;
        std::vector<double> row(T, 0.0), col(T, 0.0);
        for (int u = 0; u < T; ++u)
            for (int w = 0; w < T; ++w) {
                total += table[v][u][w];
                row[u] += table[v][u][w];
                col[w] += table[v][u][w];
            }
        if (total < 50) continue;
        for (int u = 0; u < T; ++u)
            for (int w = 0; w < T; ++w) {
                double expd = row[u] * col[w] / total;
                if (expd < 5) continue;
                stat += (table[v][u][w] - expd) * (table[v][u][w] - expd) / expd;
            }
        df += (T - 1) * (T - 1);
    }
    REQUIRE(df > 0);
    CHECK(stat < testutil::chi2_quantile(df, 0.99));
}

TEST_CASE("visit-chain spectrum identity within Monte Carlo error") {
    auto rows = visit_spectrum_residuals(3, 1, 0.0, 30'000, 20'000.0, 2718, 120);
    REQUIRE(rows.size() == 2);  // eigenvalue groups {1} and {-1/2, -1/2}
    CHECK(rows[0].lambda_y == doctest::Approx(1.0));
    CHECK(std::abs(rows[0].residual) <= 1e-12);  // both estimators give exactly 1
    CHECK(rows[1].multiplicity == 2);
    CHECK(std::abs(rows[1].residual) <= 3.0 * rows[1].sigma);

    // relaxation can only shrink positive eigenvalues (at least one torus
    // jump happens before each visit)
    auto rows5 = visit_spectrum_residuals(5, 1, 0.0, 30'000, 20'000.0, 31415, 120);
    for (const auto& r : rows5) {
        if (r.lambda_y > 0.0 && r.lambda_y < 1.0) CHECK(r.lambda_pv <= r.lambda_y + 3.0 * r.se_pv);
        // nonpositive torus eigenvalues keep the visit chain well relaxed
        if (r.lambda_y <= 0.0) CHECK(r.lambda_pv <= 0.5 + 3.0 * r.se_pv);  // 1/(d+1) at d = 1
    }
}
