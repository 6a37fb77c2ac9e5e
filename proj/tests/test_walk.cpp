#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>

#include "cylwalk/walk.hpp"
#include "test_util.hpp"

using namespace cylwalk;

TEST_CASE("drift from alpha") {
    CHECK(drift_from_alpha(10, 3, 1.0).delta == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(drift_from_alpha(8, 3, 1.0 / 3.0).delta == doctest::Approx(0.125).epsilon(1e-12));
    double prev = 1.0;
    for (double a = 0.25; a <= 4.0; a += 0.25) {
        double delta = drift_from_alpha(6, 2, a).delta;
        CHECK(delta < prev);
        CHECK(delta > 0.0);
        prev = delta;
    }
    CHECK_THROWS(drift_from_alpha(10, 3, 0.0));
    CHECK_THROWS(drift_from_alpha(10, 3, -1.0));
}

TEST_CASE("step frequencies match the drifted kernel") {
    CylinderGeom g{3, 5};
    const int64_t n = 1'000'000;

    for (double delta : {0.0, 0.3}) {
        DriftParams drift{delta, std::nullopt};
        Rng rng(42);
        Site origin{std::vector<int>(3, 0), 0};
        std::vector<double> counts(8, 0.0);
        for (int64_t i = 0; i < n; ++i) counts[sample_move(g, drift, rng)] += 1.0;
        std::vector<double> expected(8, n / 8.0);
        expected[6] = n * (1.0 + delta) / 8.0;
        expected[7] = n * (1.0 - delta) / 8.0;
        double stat = testutil::chi2_stat(counts, expected);
        CHECK(stat < testutil::chi2_quantile(7, 0.99));
        (void)origin;
    }
}

TEST_CASE("vertical increments: holding probability and martingale mean") {
    CylinderGeom g{2, 4};
    DriftParams drift{0.25, std::nullopt};
    Rng rng(7);
    const int64_t steps = 200'000;
    int64_t held = 0;
    for (int64_t i = 0; i < steps; ++i) {
        int m = sample_move(g, drift, rng);
        if (m < 2 * g.d) ++held;
    }
    double p_hold = 2.0 * g.d / (2.0 * g.d + 2.0);
    double se = std::sqrt(p_hold * (1 - p_hold) / steps);
    CHECK(std::abs(static_cast<double>(held) / steps - p_hold) < 3 * se);

    // pi_Z(X_n) - n delta/(d+1) is centered
    const int64_t reps = 10'000, horizon = 200;
    std::vector<double> devs;
    for (int64_t r = 0; r < reps; ++r) {
        Rng rr = Rng::for_replica(99, r);
        DiscreteWalker w(g, drift, Site{std::vector<int>(2, 0), 0});
        for (int64_t i = 0; i < horizon; ++i) w.advance(rr);
        devs.push_back(static_cast<double>(w.z()) - horizon * drift.delta / (g.d + 1));
    }
    double m = testutil::mean(devs), s = testutil::stddev(devs);
    CHECK(std::abs(m) < 3 * s / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("trajectory structure") {
    CylinderGeom g{2, 3};
    DriftParams drift{0.2, std::nullopt};
    Rng rng(5);
    Trajectory t = simulate_walk(g, drift, Site{{0, 0}, 0}, 500, rng);
    REQUIRE(t.steps.size() == 501);
    int64_t zmin = 0, zmax = 0;
    for (size_t i = 1; i < t.steps.size(); ++i) {
        CHECK(are_neighbors(g, t.steps[i - 1], t.steps[i]));
        zmin = std::min(zmin, t.steps[i].z);
        zmax = std::max(zmax, t.steps[i].z);
    }
    CHECK(t.z_min == zmin);
    CHECK(t.z_max == zmax);
    SiteSet again(g);
    for (const Site& s : t.steps) again.insert(s);
    CHECK(again.size() == t.visited.size());
}

TEST_CASE("excursion schedule interleaving and immediate return") {
    CylinderGeom g{1, 3};
    DriftParams drift{0.0, std::nullopt};
    Rng rng(11);
    Region inner = Region::slab(g, 1), outer = Region::slab(g, 2);
    auto [traj, sched] = run_excursions(g, drift, inner, outer, 5, Site{{0}, 0}, rng, 2'000'000);
    REQUIRE(sched.returns.size() >= 1);
    CHECK(sched.returns[0] == 0);  // start inside the inner slab
    CHECK(!sched.budget_exhausted);
    REQUIRE(sched.departures.size() == 5);
    for (size_t i = 0; i < sched.departures.size(); ++i) {
        CHECK(sched.returns[i] <= sched.departures[i]);
        if (i > 0) CHECK(sched.departures[i - 1] < sched.returns[i]);
        CHECK(std::llabs(traj.steps[sched.departures[i]].z) > 2);
        CHECK(std::llabs(traj.steps[sched.returns[i]].z) <= 1);
    }
    CHECK_THROWS(run_excursions(g, drift, outer, inner, 1, Site{{0}, 0}, rng, 1000));
}

TEST_CASE("excursion budget exhaustion is reported, not thrown") {
    CylinderGeom g{1, 3};
    DriftParams up{0.9, std::nullopt};  // strong upward drift rarely returns
    Rng rng(2);
    Region inner = Region::slab(g, 0), outer = Region::slab(g, 1);
    auto [traj, sched] = run_excursions(g, up, inner, outer, 50, Site{{0}, 30}, rng, 500);
    CHECK(sched.budget_exhausted);
    CHECK(static_cast<int64_t>(traj.steps.size()) <= 502);
}

TEST_CASE("first departure time matches the exact absorption law") {
    // d=1, N=3, inner = Slab(1), outer = Slab(2), unbiased: D_1 - R_1 is the
    // absorption time at |z| = 3 of the lazy +-1 walk started at 0
    CylinderGeom g{1, 3};
    DriftParams drift{0.0, std::nullopt};
    Region inner = Region::slab(g, 1), outer = Region::slab(g, 2);

    // exact law by transfer-matrix iteration over z in [-2, 2]
    const int kmax = 400;
    std::vector<double> exact(kmax + 1, 0.0);
    std::map<int, double> dist{{0, 1.0}};
    double absorbed = 0.0;
    for (int k = 1; k <= kmax; ++k) {
        std::map<int, double> next;
        double hit = 0.0;
        for (auto [z, p] : dist) {
            next[z] += p / 2.0;
            for (int dz : {-1, 1}) {
                int nz = z + dz;
                if (std::abs(nz) > 2)
                    hit += p / 4.0;
                else
                    next[nz] += p / 4.0;
            }
        }
        exact[k] = hit;
        absorbed += hit;
        dist = std::move(next);
    }

    const int64_t reps = 20'000;
    std::vector<double> sampled(kmax + 2, 0.0);
    for (int64_t r = 0; r < reps; ++r) {
        Rng rng = Rng::for_replica(1234, r);
        auto [traj, sched] = run_excursions(g, drift, inner, outer, 1, Site{{0}, 0}, rng, 1'000'000);
        REQUIRE(sched.departures.size() == 1);
        int64_t dur = sched.departures[0] - sched.returns[0];
        sampled[std::min<int64_t>(dur, kmax + 1)] += 1.0;
    }

    // adaptive binning, tail lumped
    std::vector<double> obs, exp_counts;
    double co = 0, ce = 0;
    for (int k = 1; k <= kmax; ++k) {
        co += sampled[k];
        ce += exact[k] * reps;
        if (ce >= 25.0) {
            obs.push_back(co);
            exp_counts.push_back(ce);
            co = ce = 0;
        }
    }
    obs.push_back(co + sampled[kmax + 1]);
    exp_counts.push_back(ce + (1.0 - absorbed) * reps);
    double stat = testutil::chi2_stat(obs, exp_counts);
    CHECK(stat < testutil::chi2_quantile(static_cast<int>(obs.size()) - 1, 0.99));
}

TEST_CASE("continuous embedding: rates and skeleton law") {
    CylinderGeom g{1, 3};
    DriftParams drift{0.0, std::nullopt};
    const double horizon = 50.0;
    const int64_t reps = 2'000;
    std::vector<double> y_rates, z_rates, x_rates;
    int64_t up = 0, zc = 0;
    for (int64_t r = 0; r < reps; ++r) {
        Rng rng = Rng::for_replica(77, r);
        ContinuousEmbedding emb = simulate_embedding(g, drift, horizon, Site{{0}, 0}, rng);
        y_rates.push_back(emb.torus_jump_times().size() / horizon);
        z_rates.push_back(emb.height_jump_times().size() / horizon);
        x_rates.push_back(emb.events.size() / horizon);
        for (const auto& e : emb.events)
            if (!e.torus) {
                ++zc;
                up += e.move > 0;
            }
    }
    auto within = [&](std::vector<double>& v, double target) {
        double m = testutil::mean(v), s = testutil::stddev(v) / std::sqrt(static_cast<double>(v.size()));
        CHECK(std::abs(m - target) < 3 * s);
    };
    within(y_rates, 1.0);
    within(z_rates, 1.0 / g.d);
    within(x_rates, (g.d + 1.0) / g.d);
    // unbiased vertical jumps are a fair coin
    double p = static_cast<double>(up) / zc;
    CHECK(std::abs(p - 0.5) < 3 * std::sqrt(0.25 / zc));

    // skeleton occupation at a fixed number of jumps matches the discrete walk
    const int fix = 10;
    auto key = [&](const Site& s) { return s.u[0] * 100 + static_cast<int>(std::clamp<int64_t>(s.z, -4, 4)) + 50; };
    std::map<int, double> occ_a, occ_b;
    for (int64_t r = 0; r < 20'000; ++r) {
        Rng rng = Rng::for_replica(555, r);
        ContinuousEmbedding emb = simulate_embedding(g, drift, 40.0, Site{{0}, 0}, rng);
        auto skel = emb.skeleton();
        if (static_cast<int>(skel.size()) > fix) occ_a[key(skel[fix])] += 1;
        Rng rng2 = Rng::for_replica(556, r);
        Site s{{0}, 0};
        for (int i = 0; i < fix; ++i) s = step(s, g, drift, rng2);
        occ_b[key(s)] += 1;
    }
    std::vector<double> a, b;
    for (auto& [k, v] : occ_a) {
        a.push_back(v);
        b.push_back(occ_b.count(k) ? occ_b[k] : 0.0);
    }
    for (auto& [k, v] : occ_b)
        if (!occ_a.count(k)) {
            a.push_back(0.0);
            b.push_back(v);
        }
    double stat = testutil::chi2_two_sample(a, b);
    CHECK(stat < testutil::chi2_quantile(static_cast<int>(a.size()) - 1, 0.999));
}

TEST_CASE("visit chain basics") {
    CylinderGeom g{1, 3};
    DriftParams drift{0.0, std::nullopt};
    Rng rng(31);
    ContinuousEmbedding emb = simulate_embedding(g, drift, 500.0, Site{{2}, 0}, rng);
    VisitChainSample chain = visit_chain(emb, 3);
    CHECK(chain.values[0] == std::vector<int>{2});
    CHECK(chain.stop_times[0] == 0.0);
    for (size_t i = 1; i < chain.stop_times.size(); ++i) {
        if (chain.stop_times[i] == kInfiniteTime) break;
        CHECK(chain.stop_times[i] > chain.stop_times[i - 1]);
        CHECK(chain.torus_jump_counts[i] >= 1);
    }
    CHECK_THROWS(visit_chain(simulate_embedding(g, drift, 10.0, Site{{0}, 3}, rng), 1));

    // recurrence: the finite fraction grows toward 1 with the budget
    auto finite_fraction = [&](double budget) {
        int fin = 0;
        const int reps = 800;
        for (int r = 0; r < reps; ++r) {
            Rng rr = Rng::for_replica(808, r);
            ContinuousEmbedding e = simulate_embedding(g, drift, budget, Site{{0}, 0}, rr);
            VisitChainSample c = visit_chain(e, 1);
            fin += c.stop_times.size() > 1 && c.stop_times[1] != kInfiniteTime;
        }
        return static_cast<double>(fin) / reps;
    };
    double f_small = finite_fraction(10.0), f_big = finite_fraction(3000.0);
    CHECK(f_big > f_small);
    CHECK(f_big > 0.95);
}

TEST_CASE("streaming visit chain has the materialized law") {
    CylinderGeom g{1, 3};
    DriftParams drift{0.1, std::nullopt};
    const double budget = 2000.0;
    std::vector<double> a, b;
    std::vector<double> ja, jb;
    for (int64_t r = 0; r < 4000; ++r) {
        Rng ra = Rng::for_replica(111, r);
        ContinuousEmbedding emb = simulate_embedding(g, drift, budget, Site{{0}, 0}, ra);
        VisitChainSample c1 = visit_chain(emb, 1);
        if (c1.stop_times.size() > 1 && c1.stop_times[1] != kInfiniteTime) {
            a.push_back(c1.stop_times[1]);
            ja.push_back(static_cast<double>(c1.torus_jump_counts[1]));
        }
        Rng rb = Rng::for_replica(222, r);
        VisitChainSample c2 = visit_chain_stream(g, drift, Site{{0}, 0}, 1, budget, rb);
        if (c2.stop_times.size() > 1 && c2.stop_times[1] != kInfiniteTime) {
            b.push_back(c2.stop_times[1]);
            jb.push_back(static_cast<double>(c2.torus_jump_counts[1]));
        }
    }
    CHECK(testutil::ks_distance(a, b) < 0.05);
    CHECK(testutil::ks_distance(ja, jb) < 0.05);
}

TEST_CASE("visit-time decomposition sampler") {
    CylinderGeom g{1, 3};
    DriftParams drift{0.0, std::nullopt};
    Rng rng(17);
    CHECK(sample_visit_time_sum(g, drift, 0, rng, 100.0) == 0.0);

    // strongly drifted vertical walks escape more often
    auto finite_frac = [&](double delta) {
        DriftParams dp{delta, std::nullopt};
        int fin = 0;
        const int reps = 500;
        for (int r = 0; r < reps; ++r) {
            Rng rr = Rng::for_replica(4242 + static_cast<uint64_t>(delta * 100), r);
            fin += sample_visit_time_sum(g, dp, 1, rr, 2000.0) != kInfiniteTime;
        }
        return static_cast<double>(fin) / reps;
    };
    CHECK(finite_frac(0.8) < finite_frac(0.05));

    // the law of S_n matches the direct visit-chain construction (n = 3)
    const int64_t reps = 4'000;
    const double budget = 30'000.0;
    std::vector<double> via_chain, via_sum;
    for (int64_t r = 0; r < reps; ++r) {
        Rng ra = Rng::for_replica(9001, r);
        ContinuousEmbedding emb = simulate_embedding(g, drift, budget, Site{{0}, 0}, ra);
        VisitChainSample c = visit_chain(emb, 3);
        if (c.stop_times.size() > 3 && c.stop_times[3] != kInfiniteTime) via_chain.push_back(c.stop_times[3]);
        Rng rb = Rng::for_replica(9002, r);
        double s = sample_visit_time_sum(g, drift, 3, rb, budget);
        if (s != kInfiniteTime) via_sum.push_back(s);
    }
    double d = testutil::ks_distance(via_chain, via_sum);
    CHECK(d < 0.05);
}
