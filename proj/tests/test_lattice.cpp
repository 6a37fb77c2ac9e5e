#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "cylwalk/lattice.hpp"
#include "cylwalk/rng.hpp"

using namespace cylwalk;

namespace {

Site site(std::vector<int> u, int64_t z) { return Site{std::move(u), z}; }

// brute-force region enumeration oracle over an explicit coordinate window
int64_t count_box_alpha_oracle(const CylinderGeom& g, double alpha) {
    int64_t ht = g.N / 4;
    int64_t hz = box_alpha_half_height(g, alpha);
    Region r = Region::box_alpha(g, alpha);
    int64_t count = 0;
    std::vector<int> u(g.d, 0);
    while (true) {
        for (int64_t z = -hz - 2; z <= hz + 2; ++z)
            count += r.contains(Site{u, z});
        int axis = 0;
        while (axis < g.d) {
            if (++u[axis] < g.N) break;
            u[axis] = 0;
            ++axis;
        }
        if (axis == g.d) break;
    }
    (void)ht;
    return count;
}

SiteSet random_set(const CylinderGeom& g, int64_t lo, int64_t hi, double p, Rng& rng) {
    SiteSet s(g);
    std::vector<int64_t> c(g.d + 1, lo);
    while (true) {
        if (rng.u01() < p) {
            Site x;
            x.u.resize(g.d);
            for (int i = 0; i < g.d; ++i) x.u[i] = reduce_mod(c[i], g.N);
            x.z = c[g.d];
            s.insert(x);
        }
        int axis = 0;
        while (axis <= g.d) {
            if (++c[axis] <= hi) break;
            c[axis] = lo;
            ++axis;
        }
        if (axis == g.d + 1) break;
    }
    return s;
}

}  // namespace

TEST_CASE("neighbor counts and torus wrap") {
    CylinderGeom g3{3, 5};
    auto nb = neighbors(site({0, 0, 0}, 0), g3);
    CHECK(nb.size() == 8);  // 2d + 2 at d = 3
    for (const Site& n : nb) CHECK(are_neighbors(g3, site({0, 0, 0}, 0), n));

    CylinderGeom g1{1, 3};
    auto wrap = neighbors(site({2}, 0), g1);
    CHECK(wrap[0] == site({0}, 0));  // +e_1 wraps
    CHECK(wrap[1] == site({1}, 0));
    CHECK(wrap[2] == site({2}, 1));
    CHECK(wrap[3] == site({2}, -1));
}

TEST_CASE("neighbors on the two-site torus collapse as a multiset") {
    CylinderGeom g{1, 2};
    auto nb = neighbors(site({0}, 5), g);
    REQUIRE(nb.size() == 4);
    CHECK(nb[0] == site({1}, 5));
    CHECK(nb[1] == site({1}, 5));  // +e_1 and -e_1 coincide
    CHECK(nb[2] == site({0}, 6));
    CHECK(nb[3] == site({0}, 4));
}

TEST_CASE("neighbor relation is symmetric") {
    CylinderGeom g{2, 4};
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        Site a = site({int(rng.below(4)), int(rng.below(4))}, int64_t(rng.below(9)) - 4);
        auto nb = neighbors(a, g);
        Site b = nb[rng.below(nb.size())];
        CHECK(are_neighbors(g, b, a));
    }
}

TEST_CASE("box region sizes") {
    // at d alpha >= 1 the box is the radius-[N/4] ball
    CylinderGeom g{3, 8};
    Region box = Region::box_alpha(g, 1.0 / 3.0);
    CHECK(box.size() == 625);  // 5^4
    CHECK(box.size() == count_box_alpha_oracle(g, 1.0 / 3.0));
    Region ball = Region::ball_inf(g, site({0, 0, 0}, 0), 2);
    for (const Site& s : box.members()) CHECK(ball.contains(s));

    // d alpha = 1/2: height half-width floor(8^{1/2}/4) = 0
    Region flat = Region::box_alpha(g, 1.0 / 6.0);
    CHECK(flat.size() == 125);
    CHECK(flat.size() == count_box_alpha_oracle(g, 1.0 / 6.0));

    // equality of membership with the ball for all d alpha >= 1 at small N
    for (int N = 2; N <= 16; ++N) {
        for (int d = 1; d <= 3; ++d) {
            CylinderGeom gg{d, N};
            for (double alpha : {1.0 / d, 2.0 / d, 1.5}) {
                if (d * alpha < 1.0) continue;
                Region b = Region::box_alpha(gg, alpha);
                Region ref = Region::ball_inf(gg, Site{std::vector<int>(d, 0), 0}, N / 4);
                CHECK(b.size() == ref.size());
                for (const Site& s : b.members()) CHECK(ref.contains(s));
            }
        }
    }
}

TEST_CASE("cube region enumeration") {
    CylinderGeom g{2, 6};
    Region c1 = Region::cube(g, site({1, 2}, -3), 1);
    auto m = c1.members();
    REQUIRE(m.size() == 1);
    CHECK(m[0] == site({1, 2}, -3));

    Region c3 = Region::cube(g, site({4, 5}, 0), 3);
    CHECK(c3.size() == 27);
    CHECK(c3.members().size() == 27);
    CHECK(c3.contains(site({0, 1}, 2)));  // wraps both torus axes
}

TEST_CASE("slab membership and projection") {
    CylinderGeom g{1, 4};
    Region s2 = Region::slab(g, 2);
    CHECK(s2.size() == 4 * 5);
    auto zs = project_z(s2.member_set());
    REQUIRE(zs.size() == 5);
    CHECK(zs.front() == -2);
    CHECK(zs.back() == 2);
}

TEST_CASE("relative boundary basics") {
    CylinderGeom g{1, 9};
    SiteSet A(g);
    A.insert(site({0}, 0));
    Region ball = Region::ball_inf(g, site({0}, 0), 1);
    SiteSet B = ball.member_set();
    SiteSet bd = relative_boundary(A, B);
    CHECK(bd.size() == 4);  // the four neighbors of the origin at d = 1

    CHECK(relative_boundary(B, B).size() == 0);  // A = B gives the empty set
}

TEST_CASE("directional boundaries union to the undirected boundary") {
    Rng rng(11);
    for (int d = 1; d <= 2; ++d) {
        CylinderGeom g{d, 11};
        for (int t = 0; t < 30; ++t) {
            SiteSet A = random_set(g, 0, 4, 0.35, rng);
            SiteSet B = random_set(g, 0, 4, 0.8, rng);
            SiteSet whole = relative_boundary(A, B);
            std::set<Packed> unioned;
            for (int i = 1; i <= d + 1; ++i) {
                SiteSet db = relative_boundary(A, B, i);
                for (Packed p : db.raw()) unioned.insert(p);
            }
            CHECK(unioned.size() == static_cast<size_t>(whole.size()));
            for (Packed p : whole.raw()) CHECK(unioned.count(p) == 1);
            for (Packed p : whole.raw()) CHECK(!A.contains_packed(p));
        }
    }
}

TEST_CASE("dilation and erosion") {
    CylinderGeom g{1, 9};
    SiteSet cube(g);
    for (int a = 0; a < 3; ++a)
        for (int z = 0; z < 3; ++z) cube.insert(site({a}, z));
    SiteSet inner = erode(cube, 1);
    REQUIRE(inner.size() == 1);
    CHECK(inner.contains(site({1}, 1)));

    SiteSet grown = dilate(cube, 1);
    CHECK(grown.size() == 25);
    for (Packed p : cube.raw()) CHECK(grown.contains_packed(p));
}

TEST_CASE("dilate/erode adjunction on random pairs") {
    // A inside the l-interior of B iff the l-neighborhood of A is inside B
    Rng rng(23);
    int checked = 0;
    for (int d = 1; d <= 3; ++d) {
        CylinderGeom g{d, 17};
        int reps = d == 3 ? 150 : 425;
        for (int t = 0; t < reps; ++t) {
            int64_t l = 1 + rng.below(2);
            SiteSet A = random_set(g, 0, 6, 0.12, rng);
            SiteSet B = random_set(g, -1, 7, 0.85, rng);
            SiteSet Bin = erode(B, l);
            SiteSet Aout = dilate(A, l);
            bool lhs = true;
            for (Packed p : A.raw())
                if (!Bin.contains_packed(p)) lhs = false;
            bool rhs = true;
            for (Packed p : Aout.raw())
                if (!B.contains_packed(p)) rhs = false;
            CHECK(lhs == rhs);
            ++checked;
        }
    }
    CHECK(checked == 1000);
}

TEST_CASE("projections") {
    CylinderGeom g{2, 4};
    SiteSet slice(g);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) slice.insert(site({a, b}, 0));
    CHECK(project(3, slice).size() == 16);  // drop z: the full torus
    CHECK(project(1, slice).size() == 4);   // drop u1: 4 values of (u2, 0)

    // full cube: pi_1 image has l^d points
    CylinderGeom g3{3, 9};
    SiteSet cube(g3);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int z = 0; z < 3; ++z) cube.insert(site({a, b, c}, z));
    CHECK(project(1, cube).size() == 27);
    CHECK(project(4, cube).size() == 27);
}

TEST_CASE("diameter uses the wrapped metric") {
    CylinderGeom g{1, 6};
    SiteSet s(g);
    s.insert(site({0}, 0));
    CHECK(diameter(s) == 0);

    s.insert(site({3}, 0));  // antipodal on the 6-torus
    CHECK(diameter(s) == 3);

    SiteSet cube(g);
    for (int a = 0; a < 4; ++a)
        for (int z = 0; z < 4; ++z) cube.insert(site({a}, z));
    CHECK(diameter(cube) == 3);  // side l gives l - 1

    SiteSet empty(g);
    CHECK_THROWS(diameter(empty));
}

TEST_CASE("region misuse guards") {
    CylinderGeom g{3, 64};
    Region huge = Region::slab(g, 2'000'000);
    CHECK_THROWS(huge.members());
    CHECK_THROWS(Region::box_alpha(g, -1.0).size());
}
