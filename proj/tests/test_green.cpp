#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cylwalk/green.hpp"
#include "test_util.hpp"

using namespace cylwalk;

namespace {

Site origin(int d) { return Site{std::vector<int>(d, 0), 0}; }

KilledDomain small_ball(const CylinderGeom& g, int64_t r, int64_t a) {
    return KilledDomain(g, Region::ball_inf(g, origin(g.d), r), a);
}

}  // namespace

TEST_CASE("green function basics") {
    CylinderGeom g{1, 9};
    KilledDomain dom = small_ball(g, 2, 8);
    GreenSolver solver(dom);

    CHECK(solver.value(origin(1), Site{{0}, 7}) == 0.0);  // x' outside B
    CHECK(solver.value(Site{{0}, 7}, origin(1)) == 0.0);  // x outside B
    CHECK(solver.value(origin(1), origin(1)) >= 1.0);     // the n = 0 visit

    SiteSet one(g);
    one.insert(origin(1));
    KilledDomain dot(g, Region::explicit_set(one), 4);
    CHECK(green_exact(dot, origin(1), origin(1)) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(solver.defining_relation_residual(Site{{1}, 1}) < 1e-10);
}

TEST_CASE("green symmetry on random small domains") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        CylinderGeom g{2, 6};
        SiteSet sites(g);
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                for (int64_t z = -2; z <= 2; ++z)
                    if (rng.u01() < 0.7) sites.insert(Site{{a, b}, z});
        if (sites.size() < 4) continue;
        KilledDomain dom(g, Region::explicit_set(sites), 3);
        GreenSolver solver(dom);
        auto packed = sites.sorted_packed();
        for (int probe = 0; probe < 6; ++probe) {
            Site x = unpack_site(g, packed[rng.below(packed.size())]);
            Site y = unpack_site(g, packed[rng.below(packed.size())]);
            CHECK(solver.value(x, y) == doctest::Approx(solver.value(y, x)).epsilon(1e-9));
        }
    }
}

TEST_CASE("monte carlo estimates agree with the exact solve") {
    CylinderGeom g{2, 5};
    KilledDomain dom(g, Region::slab(g, 3), 3);
    GreenSolver solver(dom);
    Rng rng(8);
    for (int trial = 0; trial < 12; ++trial) {
        Site x{{int(rng.below(5)), int(rng.below(5))}, int64_t(rng.below(5)) - 2};
        Site y{{int(rng.below(5)), int(rng.below(5))}, int64_t(rng.below(5)) - 2};
        McEstimate mc = green_mc(dom, x, y, 4000, 4000 + trial);
        double exact = solver.value(x, y);
        CHECK(std::abs(mc.mean - exact) <= 3.0 * mc.stderr_ + 1e-9);
    }

    // a target outside the domain is never visited
    McEstimate zero = green_mc(dom, origin(2), Site{{0, 0}, 5}, 1000, 3);
    CHECK(zero.mean == 0.0);
    CHECK(zero.stderr_ == 0.0);

    CHECK_THROWS(green_mc(dom, origin(2), origin(2), 10, 3));
}

TEST_CASE("monte carlo error shrinks like the square root of the budget") {
    CylinderGeom g{1, 5};
    KilledDomain dom(g, Region::slab(g, 4), 4);
    std::vector<int64_t> budgets{2000, 8000, 32000, 128000};
    std::vector<double> errs;
    for (int64_t b : budgets) errs.push_back(green_mc(dom, origin(1), Site{{1}, 1}, b, 77).stderr_);
    for (size_t i = 1; i < errs.size(); ++i) {
        double ratio = errs[i] / errs[i - 1];
        CHECK(ratio > 0.3);
        CHECK(ratio < 0.7);  // expected 1/2 per 4x budget
    }
}

TEST_CASE("hitting probability bound") {
    CylinderGeom g{2, 8};
    KilledDomain dom(g, Region::slab(g, 6), 6);
    GreenSolver solver(dom);

    // x inside A: the hit is immediate and the bound is at least 1
    std::vector<Site> A{origin(2), Site{{1, 0}, 0}};
    HittingBound hb = hitting_probability_bound(A, solver, origin(2));
    CHECK(hb.lhs == doctest::Approx(1.0));
    CHECK(hb.rhs >= 1.0 - 1e-12);

    // singleton target: the classical ratio identity is an equality
    std::vector<Site> single{Site{{2, 3}, 1}};
    Site far{{5, 5}, -2};
    HittingBound hs = hitting_probability_bound(single, solver, far);
    CHECK(hs.holds);
    CHECK(hs.lhs == doctest::Approx(hs.rhs).epsilon(1e-10));

    // random compact targets
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Site> target;
        SiteSet seen(g);
        int base_u = static_cast<int>(rng.below(8));
        int64_t base_z = static_cast<int64_t>(rng.below(7)) - 3;
        for (int k = 0; k < 4; ++k) {
            Site s{{reduce_mod(base_u + (int)rng.below(3), 8), (int)rng.below(8)},
                   std::clamp<int64_t>(base_z + (int64_t)rng.below(3) - 1, -6, 6)};
            if (!seen.contains(s)) {
                seen.insert(s);
                target.push_back(s);
            }
        }
        Site x{{(int)rng.below(8), (int)rng.below(8)}, (int64_t)rng.below(9) - 4};
        HittingBound b = hitting_probability_bound(target, solver, x);
        CHECK(b.holds);
    }
}

TEST_CASE("enlarging the domain never shrinks the green function") {
    CylinderGeom g{2, 5};
    GreenSolver small(KilledDomain(g, Region::slab(g, 2), 2));
    GreenSolver big(KilledDomain(g, Region::slab(g, 4), 4));
    Rng rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        Site x{{(int)rng.below(5), (int)rng.below(5)}, (int64_t)rng.below(5) - 2};
        Site y{{(int)rng.below(5), (int)rng.below(5)}, (int64_t)rng.below(5) - 2};
        CHECK(big.value(x, y) >= small.value(x, y) - 1e-12);
    }
}

TEST_CASE("slab decay profile") {
    // near-field exponent 1-d, here -2, within +-0.3
    DecayProfile prof = decay_profile(16, 3, 8);
    CHECK(prof.near_slope < -2.0 + 0.3);
    CHECK(prof.near_slope > -2.0 - 0.3);
    CHECK(prof.far_rate > 0.0);
    CHECK(prof.lower_ratio_min > 0.0);

    // the d = 2 analogue decays like 1/r near the source
    DecayProfile p2 = decay_profile(16, 2, 8);
    CHECK(p2.near_slope < -1.0 + 0.4);
    CHECK(p2.near_slope > -1.0 - 0.4);
}
