#include "cylwalk/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cylwalk {

int64_t linf_dist(const CylinderGeom& g, const Site& a, const Site& b) {
    int64_t m = std::llabs(a.z - b.z);
    for (int i = 0; i < g.d; ++i) m = std::max(m, torus_dist(a.u[i], b.u[i], g.N));
    return m;
}

bool are_neighbors(const CylinderGeom& g, const Site& a, const Site& b) {
    // Euclidean distance 1 after wrapping: exactly one coordinate differs,
    // and it differs by a unit step
    int diff_axes = 0;
    bool unit = true;
    for (int i = 0; i < g.d; ++i) {
        int64_t td = torus_dist(a.u[i], b.u[i], g.N);
        if (td != 0) {
            ++diff_axes;
            if (td != 1) unit = false;
        }
    }
    if (a.z != b.z) {
        ++diff_axes;
        if (std::llabs(a.z - b.z) != 1) unit = false;
    }
    return diff_axes == 1 && unit;
}

std::vector<Packed> SiteSet::sorted_packed() const {
    std::vector<Packed> v(set_.begin(), set_.end());
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<Site> SiteSet::sorted_sites() const {
    std::vector<Site> out;
    out.reserve(set_.size());
    for (Packed p : sorted_packed()) out.push_back(unpack_site(geom_, p));
    return out;
}

int64_t box_alpha_half_height(const CylinderGeom& g, double alpha) {
    if (alpha <= 0) throw std::invalid_argument("box_alpha: alpha must be > 0");
    double expo = std::min(static_cast<double>(g.d) * alpha, 1.0);
    double v = std::pow(static_cast<double>(g.N), expo);
    return static_cast<int64_t>(std::floor(v / 4.0 + 1e-9));
}

namespace {

int64_t ipow(int64_t b, int e) {
    int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

// enumerate the image on the cylinder of an integer box
// prod_i [lo_u, hi_u] x [lo_z, hi_z], deduplicating torus wrap
void enumerate_box(const CylinderGeom& g, const std::vector<int64_t>& lo_u, const std::vector<int64_t>& hi_u,
                   int64_t lo_z, int64_t hi_z, SiteSet& out) {
    std::vector<std::vector<int>> axis_vals(g.d);
    for (int i = 0; i < g.d; ++i) {
        std::set<int> vals;
        for (int64_t v = lo_u[i]; v <= hi_u[i]; ++v) {
            vals.insert(reduce_mod(v, g.N));
            if (static_cast<int64_t>(vals.size()) >= g.N) break;
        }
        axis_vals[i].assign(vals.begin(), vals.end());
    }
    Site s;
    s.u.resize(g.d);
    std::vector<size_t> ix(g.d, 0);
    while (true) {
        for (int i = 0; i < g.d; ++i) s.u[i] = axis_vals[i][ix[i]];
        for (int64_t z = lo_z; z <= hi_z; ++z) {
            s.z = z;
            out.insert(s);
        }
        int axis = 0;
        while (axis < g.d) {
            if (++ix[axis] < axis_vals[axis].size()) break;
            ix[axis] = 0;
            ++axis;
        }
        if (axis == g.d) break;
    }
}

constexpr int64_t kEnumerationCap = 50'000'000;

}  // namespace

bool Region::contains(const Site& s) const {
    const CylinderGeom& g = geom_;
    if (const auto* sl = std::get_if<Slab>(&shape_)) return std::llabs(s.z) <= sl->r;
    if (const auto* ba = std::get_if<BoxAlpha>(&shape_)) {
        int64_t ht = g.N / 4;
        int64_t hz = box_alpha_half_height(g, ba->alpha);
        for (int i = 0; i < g.d; ++i)
            if (torus_dist(s.u[i], 0, g.N) > ht) return false;
        return std::llabs(s.z) <= hz;
    }
    if (const auto* c = std::get_if<CubeAt>(&shape_)) {
        if (s.z < c->base.z || s.z >= c->base.z + c->side) return false;
        for (int i = 0; i < g.d; ++i) {
            if (c->side >= g.N) continue;  // wraps the whole torus direction
            int64_t off = reduce_mod(static_cast<int64_t>(s.u[i]) - c->base.u[i], g.N);
            if (off >= c->side) return false;
        }
        return true;
    }
    if (const auto* b = std::get_if<BallInfAt>(&shape_)) {
        if (std::llabs(s.z - b->center.z) > b->radius) return false;
        for (int i = 0; i < g.d; ++i)
            if (torus_dist(s.u[i], b->center.u[i], g.N) > std::min<int64_t>(b->radius, g.N / 2)) return false;
        return true;
    }
    return std::get<ExplicitSites>(shape_).sites.contains(s);
}

int64_t Region::size() const {
    const CylinderGeom& g = geom_;
    if (const auto* sl = std::get_if<Slab>(&shape_)) return g.torus_count() * (2 * sl->r + 1);
    if (const auto* ba = std::get_if<BoxAlpha>(&shape_)) {
        int64_t ht = g.N / 4;
        int64_t hz = box_alpha_half_height(g, ba->alpha);
        return ipow(2 * ht + 1, g.d) * (2 * hz + 1);
    }
    if (const auto* c = std::get_if<CubeAt>(&shape_))
        return ipow(std::min<int64_t>(c->side, g.N), g.d) * c->side;
    if (const auto* b = std::get_if<BallInfAt>(&shape_))
        return ipow(std::min<int64_t>(2 * b->radius + 1, g.N), g.d) * (2 * b->radius + 1);
    return std::get<ExplicitSites>(shape_).sites.size();
}

SiteSet Region::member_set() const {
    const CylinderGeom& g = geom_;
    if (size() > kEnumerationCap)
        throw std::runtime_error("Region::members: region too large to enumerate (" + describe() + ")");
    SiteSet out(g);
    if (const auto* sl = std::get_if<Slab>(&shape_)) {
        std::vector<int64_t> lo(g.d, 0), hi(g.d, g.N - 1);
        enumerate_box(g, lo, hi, -sl->r, sl->r, out);
    } else if (const auto* ba = std::get_if<BoxAlpha>(&shape_)) {
        int64_t ht = g.N / 4;
        int64_t hz = box_alpha_half_height(g, ba->alpha);
        std::vector<int64_t> lo(g.d, -ht), hi(g.d, ht);
        enumerate_box(g, lo, hi, -hz, hz, out);
    } else if (const auto* c = std::get_if<CubeAt>(&shape_)) {
        std::vector<int64_t> lo(g.d), hi(g.d);
        for (int i = 0; i < g.d; ++i) {
            lo[i] = c->base.u[i];
            hi[i] = c->base.u[i] + c->side - 1;
        }
        enumerate_box(g, lo, hi, c->base.z, c->base.z + c->side - 1, out);
    } else if (const auto* b = std::get_if<BallInfAt>(&shape_)) {
        std::vector<int64_t> lo(g.d), hi(g.d);
        for (int i = 0; i < g.d; ++i) {
            lo[i] = b->center.u[i] - b->radius;
            hi[i] = b->center.u[i] + b->radius;
        }
        enumerate_box(g, lo, hi, b->center.z - b->radius, b->center.z + b->radius, out);
    } else {
        out = std::get<ExplicitSites>(shape_).sites;
    }
    return out;
}

std::vector<Site> Region::members() const { return member_set().sorted_sites(); }

std::string Region::describe() const {
    if (const auto* sl = std::get_if<Slab>(&shape_)) return "Slab(" + std::to_string(sl->r) + ")";
    if (const auto* ba = std::get_if<BoxAlpha>(&shape_)) return "BoxAlpha(" + std::to_string(ba->alpha) + ")";
    if (std::get_if<CubeAt>(&shape_)) return "Cube";
    if (std::get_if<BallInfAt>(&shape_)) return "BallInf";
    return "Explicit";
}

std::vector<Site> neighbors(const Site& s, const CylinderGeom& g) {
    std::vector<Site> out;
    out.reserve(2 * g.d + 2);
    for (int m = 0; m < 2 * g.d + 2; ++m) out.push_back(neighbor(s, g, m));
    return out;
}

Site neighbor(const Site& s, const CylinderGeom& g, int move) {
    Site n = s;
    int axis = move / 2;
    int sign = (move % 2 == 0) ? 1 : -1;
    if (axis < g.d) {
        n.u[axis] = reduce_mod(static_cast<int64_t>(n.u[axis]) + sign, g.N);
    } else {
        n.z += sign;
    }
    return n;
}

SiteSet relative_boundary(const SiteSet& A, const SiteSet& B, std::optional<int> direction) {
    const CylinderGeom& g = B.geom();
    SiteSet out(g);
    for (Packed p : B.raw()) {
        if (A.contains_packed(p)) continue;
        Site x = unpack_site(g, p);
        for (int m = 0; m < 2 * g.d + 2; ++m) {
            if (direction && m / 2 != *direction - 1) continue;
            if (A.contains(neighbor(x, g, m))) {
                out.insert_packed(p);
                break;
            }
        }
    }
    return out;
}

SiteSet dilate(const SiteSet& A, int64_t l) {
    const CylinderGeom& g = A.geom();
    if (l < 1) throw std::invalid_argument("dilate: l must be >= 1");
    SiteSet out(g);
    std::vector<int64_t> lo(g.d), hi(g.d);
    for (Packed p : A.raw()) {
        Site s = unpack_site(g, p);
        for (int i = 0; i < g.d; ++i) {
            lo[i] = s.u[i] - l;
            hi[i] = s.u[i] + l;
        }
        enumerate_box(g, lo, hi, s.z - l, s.z + l, out);
    }
    return out;
}

SiteSet erode(const SiteSet& A, int64_t l) {
    const CylinderGeom& g = A.geom();
    if (l < 1) throw std::invalid_argument("erode: l must be >= 1");
    SiteSet out(g);
    // x stays iff the whole l-ball around x lies inside A
    for (Packed p : A.raw()) {
        Site s = unpack_site(g, p);
        SiteSet ball(g);
        std::vector<int64_t> lo(g.d), hi(g.d);
        for (int i = 0; i < g.d; ++i) {
            lo[i] = s.u[i] - l;
            hi[i] = s.u[i] + l;
        }
        enumerate_box(g, lo, hi, s.z - l, s.z + l, ball);
        bool inside = true;
        for (Packed q : ball.raw()) {
            if (!A.contains_packed(q)) {
                inside = false;
                break;
            }
        }
        if (inside) out.insert_packed(p);
    }
    return out;
}

std::vector<std::vector<int64_t>> project(int i, const SiteSet& A) {
    const CylinderGeom& g = A.geom();
    if (i < 1 || i > g.d + 1) throw std::invalid_argument("project: direction out of range");
    std::set<std::vector<int64_t>> tuples;
    for (Packed p : A.raw()) {
        Site s = unpack_site(g, p);
        std::vector<int64_t> t;
        t.reserve(g.d);
        for (int k = 0; k < g.d; ++k)
            if (k != i - 1) t.push_back(s.u[k]);
        if (i != g.d + 1) t.push_back(s.z);
        tuples.insert(std::move(t));
    }
    return {tuples.begin(), tuples.end()};
}

std::vector<int64_t> project_z(const SiteSet& A) {
    std::set<int64_t> zs;
    for (Packed p : A.raw()) zs.insert(static_cast<int64_t>(p >> 32) - (1ll << 31));
    return {zs.begin(), zs.end()};
}

int64_t diameter(const SiteSet& A) {
    if (A.empty()) throw std::invalid_argument("diameter: empty set");
    const CylinderGeom& g = A.geom();
    std::vector<Site> sites = A.sorted_sites();
    int64_t best = 0;
    for (size_t a = 0; a < sites.size(); ++a)
        for (size_t b = a + 1; b < sites.size(); ++b) best = std::max(best, linf_dist(g, sites[a], sites[b]));
    return best;
}

}  // namespace cylwalk
