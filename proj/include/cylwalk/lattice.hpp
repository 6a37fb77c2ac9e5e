#pragma once

// Exact geometry of the discrete cylinder (Z/NZ)^d x Z: sites, neighborhoods,
// standard regions (slabs, boxes, cubes, balls), boundaries and projections.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace cylwalk {

struct CylinderGeom {
    int d = 1;  // torus dimension, >= 1
    int N = 2;  // torus side, >= 2

    void validate() const {
        if (d < 1) throw std::invalid_argument("CylinderGeom: d must be >= 1");
        if (N < 2) throw std::invalid_argument("CylinderGeom: N must be >= 2");
    }

    int64_t torus_count() const {
        int64_t c = 1;
        for (int i = 0; i < d; ++i) c *= N;
        return c;
    }

    bool operator==(const CylinderGeom&) const = default;
};

// A lattice point: d torus coordinates in [0, N) plus an unbounded height.
struct Site {
    std::vector<int> u;  // torus coordinates
    int64_t z = 0;

    bool operator==(const Site&) const = default;
};

using Packed = uint64_t;

// Packed key: biased height in the high 32 bits, torus linear index in the
// low 32, so unsigned order equals (z, torus index) lexicographic order.
inline Packed pack_site(const CylinderGeom& g, const Site& s) {
    uint64_t idx = 0;
    for (int i = g.d - 1; i >= 0; --i) idx = idx * static_cast<uint64_t>(g.N) + static_cast<uint64_t>(s.u[i]);
    uint64_t zb = static_cast<uint64_t>(static_cast<uint32_t>(s.z + (1ll << 31)));
    return (zb << 32) | idx;
}

inline Site unpack_site(const CylinderGeom& g, Packed p) {
    Site s;
    s.u.resize(g.d);
    uint64_t idx = p & 0xFFFFFFFFull;
    for (int i = 0; i < g.d; ++i) {
        s.u[i] = static_cast<int>(idx % g.N);
        idx /= g.N;
    }
    s.z = static_cast<int64_t>((p >> 32)) - (1ll << 31);
    return s;
}

inline int reduce_mod(int64_t v, int N) {
    int64_t m = v % N;
    if (m < 0) m += N;
    return static_cast<int>(m);
}

// torus coordinate unwrapped into the centered window [-N/2, N/2]
inline int64_t unwrap_centered(int u, int N) { return (u <= N / 2) ? u : u - N; }

// wrapped per-coordinate distance on the torus
inline int64_t torus_dist(int64_t a, int64_t b, int N) {
    int64_t diff = a - b;
    diff %= N;
    if (diff < 0) diff += N;
    return std::min(diff, static_cast<int64_t>(N) - diff);
}

int64_t linf_dist(const CylinderGeom& g, const Site& a, const Site& b);
bool are_neighbors(const CylinderGeom& g, const Site& a, const Site& b);

// Deterministic set of sites keyed on packed coordinates.
class SiteSet {
  public:
    SiteSet() = default;
    explicit SiteSet(const CylinderGeom& g) : geom_(g) {}

    const CylinderGeom& geom() const { return geom_; }

    void insert(const Site& s) { set_.insert(pack_site(geom_, s)); }
    void insert_packed(Packed p) { set_.insert(p); }
    bool contains(const Site& s) const { return set_.count(pack_site(geom_, s)) > 0; }
    bool contains_packed(Packed p) const { return set_.count(p) > 0; }
    void erase(const Site& s) { set_.erase(pack_site(geom_, s)); }
    int64_t size() const { return static_cast<int64_t>(set_.size()); }
    bool empty() const { return set_.empty(); }

    const std::unordered_set<Packed>& raw() const& { return set_; }
    void raw() && = delete;  // iterating a temporary's storage would dangle
    std::vector<Packed> sorted_packed() const;
    std::vector<Site> sorted_sites() const;

  private:
    CylinderGeom geom_;
    std::unordered_set<Packed> set_;
};

// ---- regions ----------------------------------------------------------

struct Slab {
    int64_t r;  // T^d_N x [-r, r]
};
struct BoxAlpha {
    double alpha;  // [-[N/4],[N/4]]^d x [-[N^{d.alpha ^ 1}/4], ...]
};
struct CubeAt {
    Site base;
    int64_t side;  // base + [0, side-1]^{d+1}
};
struct BallInfAt {
    Site center;
    int64_t radius;
};
struct ExplicitSites {
    SiteSet sites;
};

// floor of N^{min(d*alpha,1)}/4; a small nudge guards pow() landing a hair
// below an exact integer
int64_t box_alpha_half_height(const CylinderGeom& g, double alpha);

class Region {
  public:
    using Shape = std::variant<Slab, BoxAlpha, CubeAt, BallInfAt, ExplicitSites>;

    Region(const CylinderGeom& g, Shape shape) : geom_(g), shape_(std::move(shape)) { g.validate(); }

    static Region slab(const CylinderGeom& g, int64_t r) { return Region(g, Slab{r}); }
    static Region box_alpha(const CylinderGeom& g, double alpha) { return Region(g, BoxAlpha{alpha}); }
    static Region cube(const CylinderGeom& g, const Site& base, int64_t side) { return Region(g, CubeAt{base, side}); }
    static Region ball_inf(const CylinderGeom& g, const Site& center, int64_t radius) {
        return Region(g, BallInfAt{center, radius});
    }
    static Region explicit_set(SiteSet sites) {
        CylinderGeom g = sites.geom();
        return Region(g, ExplicitSites{std::move(sites)});
    }

    const CylinderGeom& geom() const { return geom_; }
    const Shape& shape() const { return shape_; }

    bool contains(const Site& s) const;
    int64_t size() const;
    // exact member enumeration, sorted by packed key; throws when the region
    // is too large to enumerate (misuse guard)
    std::vector<Site> members() const;
    SiteSet member_set() const;

    std::string describe() const;

  private:
    CylinderGeom geom_;
    Shape shape_;
};

// ---- operations -------------------------------------------------------

// The 2d+2 unit moves in order +e_1, -e_1, ..., +e_{d+1}, -e_{d+1}.
// On the N=2 torus +e_i and -e_i land on the same site; the multiset of
// moves is returned unchanged so transition probabilities stay correct.
std::vector<Site> neighbors(const Site& s, const CylinderGeom& g);
Site neighbor(const Site& s, const CylinderGeom& g, int move);  // move in [0, 2d+2)

// {x in B \ A : some x' in A with |x-x'| = 1}; if direction i (1-based) is
// given, the witnessing neighbor must differ in coordinate i only.
SiteSet relative_boundary(const SiteSet& A, const SiteSet& B, std::optional<int> direction = std::nullopt);

SiteSet dilate(const SiteSet& A, int64_t l);  // A^(l)
SiteSet erode(const SiteSet& A, int64_t l);   // A^(-l)

// projection onto the d-dimensional hyperplane omitting coordinate i
// (1-based, i = d+1 drops the height); tuples sorted lexicographically
std::vector<std::vector<int64_t>> project(int i, const SiteSet& A);
std::vector<int64_t> project_z(const SiteSet& A);  // pi_Z, sorted

int64_t diameter(const SiteSet& A);  // max pairwise wrapped l-inf distance

}  // namespace cylwalk
