#include "cylwalk/isogeom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace cylwalk {

namespace {

int64_t ipow(int64_t b, int e) {
    int64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

using Coords = std::vector<int64_t>;

// dense integer box [lo, hi]^dim with linear indexing
struct FrameBox {
    int dim = 0;
    Coords lo, hi;
    std::vector<int64_t> ext, strides;
    int64_t total = 1;

    void init(Coords lo_, Coords hi_) {
        lo = std::move(lo_);
        hi = std::move(hi_);
        dim = static_cast<int>(lo.size());
        ext.resize(dim);
        strides.resize(dim);
        total = 1;
        for (int i = 0; i < dim; ++i) {
            ext[i] = hi[i] - lo[i] + 1;
            strides[i] = total;
            total *= ext[i];
        }
    }
    bool inside(const Coords& c) const {
        for (int i = 0; i < dim; ++i)
            if (c[i] < lo[i] || c[i] > hi[i]) return false;
        return true;
    }
    int64_t index(const Coords& c) const {
        int64_t ix = 0;
        for (int i = 0; i < dim; ++i) ix += (c[i] - lo[i]) * strides[i];
        return ix;
    }
    Coords coords(int64_t ix) const {
        Coords c(dim);
        for (int i = 0; i < dim; ++i) {
            c[i] = lo[i] + ix % ext[i];
            ix /= ext[i];
        }
        return c;
    }
    template <typename F>
    void for_each(F&& f) const {
        Coords c = lo;
        while (true) {
            f(c);
            int axis = 0;
            while (axis < dim) {
                if (++c[axis] <= hi[axis]) break;
                c[axis] = lo[axis];
                ++axis;
            }
            if (axis == dim) break;
        }
    }
};

// prefix sums with a halo for O(2^dim) box counts
struct PrefixCounts {
    FrameBox box;
    std::vector<int64_t> ps;  // size prod(ext_i + 1)
    std::vector<int64_t> pstrides;

    void build(const FrameBox& b, const std::vector<uint8_t>& indicator) {
        box = b;
        pstrides.resize(b.dim);
        int64_t total = 1;
        for (int i = 0; i < b.dim; ++i) {
            pstrides[i] = total;
            total *= b.ext[i] + 1;
        }
        ps.assign(total, 0);
        b.for_each([&](const Coords& c) {
            int64_t ix = 0;
            for (int i = 0; i < b.dim; ++i) ix += (c[i] - b.lo[i] + 1) * pstrides[i];
            ps[ix] = indicator[b.index(c)];
        });
        // accumulate along each axis
        for (int axis = 0; axis < b.dim; ++axis) {
            for (int64_t ix = 0; ix < total; ++ix) {
                int64_t coord = (ix / pstrides[axis]) % (b.ext[axis] + 1);
                if (coord > 0) ps[ix] += ps[ix - pstrides[axis]];
            }
        }
    }

    // count of indicator within [a, b] (inclusive, clipped to the box)
    int64_t count(Coords a, Coords b) const {
        for (int i = 0; i < box.dim; ++i) {
            a[i] = std::max(a[i], box.lo[i]);
            b[i] = std::min(b[i], box.hi[i]);
            if (a[i] > b[i]) return 0;
        }
        int64_t sum = 0;
        for (int mask = 0; mask < (1 << box.dim); ++mask) {
            int64_t ix = 0;
            int bits = 0;
            for (int i = 0; i < box.dim; ++i) {
                int64_t edge;
                if (mask >> i & 1) {
                    edge = a[i] - box.lo[i];  // exclusive low corner
                    ++bits;
                } else {
                    edge = b[i] - box.lo[i] + 1;
                }
                ix += edge * pstrides[i];
            }
            sum += (bits % 2 ? -1 : 1) * ps[ix];
        }
        return sum;
    }
};

Site frame_to_site(const CylinderGeom& g, const Coords& c) {
    Site s;
    s.u.resize(g.d);
    for (int i = 0; i < g.d; ++i) s.u[i] = reduce_mod(c[i], g.N);
    s.z = c[g.d];
    return s;
}

// directional boundary data on a subgrid (unit steps in k-space)
struct SubgridBoundary {
    int64_t proj_count = 0;
    // projection tuple -> (representative k point, +1/-1 scan direction)
    std::map<Coords, std::pair<Coords, int>> reps;
};

SubgridBoundary subgrid_boundary(const FrameBox& kbox, const std::vector<uint8_t>& mask, int axis) {
    SubgridBoundary out;
    kbox.for_each([&](const Coords& k) {
        if (mask[kbox.index(k)]) return;
        int sign = 0;
        Coords n = k;
        n[axis] = k[axis] + 1;
        if (kbox.inside(n) && mask[kbox.index(n)]) sign = 1;  // positive direction first
        if (sign == 0) {
            n[axis] = k[axis] - 1;
            if (kbox.inside(n) && mask[kbox.index(n)]) sign = -1;
        }
        if (sign == 0) return;
        Coords proj;
        for (int i = 0; i < kbox.dim; ++i)
            if (i != axis) proj.push_back(k[i]);
        auto it = out.reps.find(proj);
        if (it == out.reps.end())
            out.reps.emplace(std::move(proj), std::make_pair(k, sign));
        else if (k < it->second.first)
            it->second = {k, sign};
    });
    out.proj_count = static_cast<int64_t>(out.reps.size());
    return out;
}

int64_t projected_set_size(const FrameBox& kbox, const std::vector<Coords>& pts, int axis) {
    std::set<Coords> proj;
    for (const Coords& k : pts) {
        Coords p;
        for (int i = 0; i < kbox.dim; ++i)
            if (i != axis) p.push_back(k[i]);
        proj.insert(std::move(p));
    }
    return static_cast<int64_t>(proj.size());
}

// per-cube data: directional boundary projections of I within the cube,
// and the projected K occupancy
struct CubeTools {
    const FrameBox& host;
    const std::vector<uint8_t>& in_K;
    const std::vector<uint8_t>& in_I;
    int64_t l;
    int dim;

    // |pi_j(boundary_j(I cap cube))| for each axis, boundary points checked
    // to lie in K
    std::vector<int64_t> boundary_projections(const Coords& base) const {
        std::vector<int64_t> out(dim, 0);
        for (int axis = 0; axis < dim; ++axis) {
            std::vector<uint8_t> face(ipow(l, dim - 1), 0);
            FrameBox cube;
            Coords chi(base);
            for (int i = 0; i < dim; ++i) chi[i] += l - 1;
            cube.init(base, chi);
            int64_t cnt = 0;
            cube.for_each([&](const Coords& c) {
                if (in_I[host.index(c)]) return;
                bool touches = false;
                Coords n = c;
                for (int s = -1; s <= 1 && !touches; s += 2) {
                    n[axis] = c[axis] + s;
                    if (cube.inside(n) && in_I[host.index(n)]) touches = true;
                }
                n[axis] = c[axis];
                if (!touches) return;
                if (!in_K[host.index(c)])
                    throw std::runtime_error("surface extraction: witness boundary escapes K");
                int64_t fix = 0, stride = 1;
                for (int i = 0; i < dim; ++i) {
                    if (i == axis) continue;
                    fix += (c[i] - base[i]) * stride;
                    stride *= l;
                }
                if (!face[fix]) {
                    face[fix] = 1;
                    ++cnt;
                }
            });
            out[axis] = cnt;
        }
        return out;
    }

    int64_t projected_K_count(const Coords& base, int axis) const {
        std::vector<uint8_t> face(ipow(l, dim - 1), 0);
        FrameBox cube;
        Coords chi(base);
        for (int i = 0; i < dim; ++i) chi[i] += l - 1;
        cube.init(base, chi);
        int64_t cnt = 0;
        cube.for_each([&](const Coords& c) {
            if (!in_K[host.index(c)]) return;
            int64_t fix = 0, stride = 1;
            for (int i = 0; i < dim; ++i) {
                if (i == axis) continue;
                fix += (c[i] - base[i]) * stride;
                stride *= l;
            }
            if (!face[fix]) {
                face[fix] = 1;
                ++cnt;
            }
        });
        return cnt;
    }
};

// shared tail of both extractors: per-cube direction votes, majority
// filter, certificate assembly
void finish_certificate(SurfaceCertificate& cert, const std::vector<Coords>& candidates, const CubeTools& tools,
                        int pi_star_axis, const CylinderGeom& g) {
    const int dim = tools.dim;
    cert.candidate_count = static_cast<int64_t>(candidates.size());
    std::vector<int> vote(candidates.size());
    std::vector<int64_t> tally(dim, 0);
    for (size_t i = 0; i < candidates.size(); ++i) {
        std::vector<int64_t> proj = tools.boundary_projections(candidates[i]);
        int best = 0;
        for (int j = 1; j < dim; ++j)
            if (proj[j] > proj[best]) best = j;
        vote[i] = best;
        ++tally[best];
    }
    int star2 = 0;
    for (int j = 1; j < dim; ++j)
        if (tally[j] > tally[star2]) star2 = j;  // ties: lowest index wins
    cert.pi_star = pi_star_axis + 1;
    cert.pi_star_star = star2 + 1;

    std::vector<Coords> kept;
    for (size_t i = 0; i < candidates.size(); ++i)
        if (vote[i] == star2) kept.push_back(candidates[i]);
    std::sort(kept.begin(), kept.end());

    int64_t min_count = -1;
    for (const Coords& c : kept) {
        int64_t cnt = tools.projected_K_count(c, star2);
        cert.per_cube_counts.push_back(cnt);
        cert.base_points.push_back(frame_to_site(g, c));
        if (min_count < 0 || cnt < min_count) min_count = cnt;
    }
    std::set<Coords> proj;
    for (const Coords& c : kept) {
        Coords p;
        for (int i = 0; i < dim; ++i)
            if (i != pi_star_axis) p.push_back(c[i]);
        proj.insert(std::move(p));
    }
    cert.projected_base_count = static_cast<int64_t>(proj.size());
    cert.c_double_prime =
        kept.empty() ? 0.0 : static_cast<double>(min_count) / static_cast<double>(ipow(tools.l, dim - 1));
}

}  // namespace

ProjectionCheck loomis_whitney_best(const SiteSet& A) {
    const CylinderGeom& g = A.geom();
    ProjectionCheck out;
    if (A.empty()) {
        out.best_size = 0;
        out.holds = true;
        out.ratio = 0.0;
        return out;
    }
    int64_t best = -1;
    for (int i = 1; i <= g.d + 1; ++i) {
        int64_t sz = static_cast<int64_t>(project(i, A).size());
        if (sz > best) {
            best = sz;
            out.best_axis = i;
        }
    }
    out.best_size = best;
    double bound = std::pow(static_cast<double>(best), (g.d + 1) / static_cast<double>(g.d));
    out.ratio = static_cast<double>(A.size()) / bound;
    out.holds = static_cast<double>(A.size()) <= bound * (1.0 + 1e-12);
    return out;
}

BoundaryBest directional_boundary_best(const SiteSet& A, const Region& box, double kappa) {
    const CylinderGeom& g = A.geom();
    int64_t box_size = box.size();
    if (static_cast<double>(A.size()) > (1.0 - kappa) * box_size + 1e-9)
        throw std::invalid_argument("directional_boundary_best: A fills more than a (1-kappa) fraction");
    SiteSet Bm = box.member_set();
    BoundaryBest out;
    int64_t best = -1;
    for (int i = 1; i <= g.d + 1; ++i) {
        SiteSet bd = relative_boundary(A, Bm, i);
        int64_t sz = static_cast<int64_t>(project(i, bd).size());
        if (sz > best) {
            best = sz;
            out.best_axis = i;
        }
    }
    out.proj_size = best;
    out.ratio = A.empty() ? 0.0
                          : static_cast<double>(best) /
                                std::pow(static_cast<double>(A.size()), g.d / static_cast<double>(g.d + 1));
    return out;
}

LocatedCell locate_disconnected_box(const SiteSet& K, double alpha, double kappa, const CylinderGeom& g) {
    if (!(kappa > 0.0 && kappa <= 0.5)) throw std::invalid_argument("locate_disconnected_box: kappa in (0, 1/2]");
    TopLabels labels = top_component_labels(K, g);
    if (!labels.disconnected) throw std::invalid_argument("locate_disconnected_box: K does not disconnect the cylinder");

    const int64_t ht = g.N / 4;
    const int64_t hz = box_alpha_half_height(g, alpha);
    const int64_t box_size = ipow(2 * ht + 1, g.d) * (2 * hz + 1);
    const int64_t T = g.torus_count();

    // lexicographic scan of vertical lines
    std::vector<int> u0(g.d, 0);
    LocatedCell out;
    while (true) {
        // torus window around u0
        std::vector<int64_t> widx;
        {
            std::vector<int64_t> off(g.d, -ht);
            while (true) {
                int64_t ix = 0;
                for (int i = g.d - 1; i >= 0; --i) ix = ix * g.N + reduce_mod(u0[i] + off[i], g.N);
                widx.push_back(ix);
                int axis = 0;
                while (axis < g.d) {
                    if (++off[axis] <= ht) break;
                    off[axis] = -ht;
                    ++axis;
                }
                if (axis == g.d) break;
            }
        }
        const int64_t wsize = static_cast<int64_t>(widx.size());
        auto slice_top = [&](int64_t z) -> int64_t {
            if (z > labels.hi) return wsize;
            if (z < labels.lo) return 0;
            int64_t c = 0;
            for (int64_t ix : widx) c += labels.is_top[(z - labels.lo) * T + ix];
            return c;
        };
        int64_t v_lo = labels.lo - hz - 1, v_hi = labels.hi + hz + 1;
        int64_t sum = 0;
        for (int64_t z = v_lo - hz; z <= v_lo + hz; ++z) sum += slice_top(z);
        for (int64_t v = v_lo; v <= v_hi; ++v) {
            double t = static_cast<double>(sum) / box_size;
            if (std::abs(t - 0.5) <= 0.5 - kappa + 1e-12) {
                out.found = true;
                out.x_star.u.assign(u0.begin(), u0.end());
                out.x_star.z = v;
                out.t_value = t;
                // witness: Top component inside the box, validated directly
                SiteSet wit(g);
                Region box = Region::box_alpha(g, alpha);
                std::vector<int64_t> off(g.d, -ht);
                while (true) {
                    Site s;
                    s.u.resize(g.d);
                    for (int i = 0; i < g.d; ++i) s.u[i] = reduce_mod(u0[i] + off[i], g.N);
                    for (int64_t z = v - hz; z <= v + hz; ++z) {
                        s.z = z;
                        if (labels.top(g, s)) wit.insert(s);
                    }
                    int axis = 0;
                    while (axis < g.d) {
                        if (++off[axis] <= ht) break;
                        off[axis] = -ht;
                        ++axis;
                    }
                    if (axis == g.d) break;
                }
                int64_t isz = wit.size();
                if (!(kappa * box_size - 1e-9 <= isz && isz <= (1.0 - kappa) * box_size + 1e-9))
                    throw std::logic_error("locate_disconnected_box: witness volume mismatch");
                // boundary of the witness inside the box must lie in K
                SiteSet boxm(g);
                std::fill(off.begin(), off.end(), -ht);
                while (true) {
                    Site s;
                    s.u.resize(g.d);
                    for (int i = 0; i < g.d; ++i) s.u[i] = reduce_mod(u0[i] + off[i], g.N);
                    for (int64_t z = v - hz; z <= v + hz; ++z) {
                        s.z = z;
                        boxm.insert(s);
                    }
                    int axis = 0;
                    while (axis < g.d) {
                        if (++off[axis] <= ht) break;
                        off[axis] = -ht;
                        ++axis;
                    }
                    if (axis == g.d) break;
                }
                SiteSet wbd = relative_boundary(wit, boxm);
                for (Packed p : wbd.raw())
                    if (!K.contains_packed(p))
                        throw std::logic_error("locate_disconnected_box: witness boundary escapes K");
                out.witness = wit.sorted_sites();
                return out;
            }
            sum += slice_top(v + hz + 1) - slice_top(v - hz);
        }
        // next vertical line
        int axis = 0;
        while (axis < g.d) {
            if (++u0[axis] < g.N) break;
            u0[axis] = 0;
            ++axis;
        }
        if (axis == g.d) break;
    }
    out.diagnostic = "no translate satisfies the density window at this N";
    return out;
}

LocalizedCube localize_to_subcube(const SiteSet& K, int64_t L, const CylinderGeom& g,
                                  const std::vector<Site>* witness) {
    const int64_t R = g.N / 4;
    LocalizedCube out;
    if (R - L < 0) {
        out.diagnostic = "L exceeds the ball radius";
        return out;
    }
    Region ball = Region::ball_inf(g, Site{std::vector<int>(g.d, 0), 0}, R);
    SiteSet I(g);
    if (witness) {
        for (const Site& s : *witness) I.insert(s);
    } else {
        KappaDecision kd = kappa_disconnects(K, ball, 1.0 / 3.0);
        if (!kd.found) {
            out.diagnostic = "K does not 1/3-disconnect the ball";
            return out;
        }
        for (const Site& s : kd.witness) I.insert(s);
    }

    const int64_t kmax = (R - L) / L;
    const int64_t Lvol = ipow(L, g.d + 1);
    auto cube_count = [&](const Coords& base) {
        int64_t cnt = 0;
        Coords c(base);
        while (true) {
            cnt += I.contains(frame_to_site(g, c));
            int axis = 0;
            while (axis < g.d + 1) {
                if (++c[axis] <= base[axis] + L - 1) break;
                c[axis] = base[axis];
                ++axis;
            }
            if (axis == g.d + 1) break;
        }
        return cnt;
    };

    std::optional<Coords> x1, x2;
    Coords k(g.d + 1, -kmax);
    while (true) {
        Coords base(g.d + 1);
        for (int i = 0; i <= g.d; ++i) base[i] = k[i] * L;
        int64_t cnt = cube_count(base);
        if (!x1 && 4 * cnt <= 3 * Lvol) x1 = base;
        if (!x2 && 4 * cnt >= Lvol) x2 = base;
        if (x1 && x2) break;
        int axis = 0;
        while (axis <= g.d) {
            if (++k[axis] <= kmax) break;
            k[axis] = -kmax;
            ++axis;
        }
        if (axis == g.d + 1) break;
    }
    if (!x1 || !x2) {
        out.diagnostic = "no under/over-filled sub-box found at this N";
        return out;
    }

    // axis-ordered lattice path from x1 to x2, first crossing of 1/4
    Coords cur = *x1;
    auto fraction_hits = [&](const Coords& base, int64_t& cnt) {
        cnt = cube_count(base);
        return 4 * cnt >= Lvol;
    };
    int64_t cnt = 0;
    bool hit = fraction_hits(cur, cnt);
    for (int axis = 0; axis <= g.d && !hit; ++axis) {
        int64_t target = (*x2)[axis];
        int stepdir = (target > cur[axis]) ? 1 : -1;
        while (cur[axis] != target && !hit) {
            cur[axis] += stepdir;
            hit = fraction_hits(cur, cnt);
        }
    }
    if (!hit) {
        out.diagnostic = "path walk never crossed the 1/4 threshold";
        return out;
    }
    if (4 * cnt > 3 * Lvol) {
        out.diagnostic = "first crossing overshoots 3/4 (continuity gap at this N)";
        return out;
    }
    out.found = true;
    out.x_star = frame_to_site(g, cur);
    out.fraction = static_cast<double>(cnt) / Lvol;

    // validate the induced witness on the cube
    SiteSet cube(g), J(g);
    Coords c(cur);
    while (true) {
        Site s = frame_to_site(g, c);
        cube.insert(s);
        if (I.contains(s)) J.insert(s);
        int axis = 0;
        while (axis <= g.d) {
            if (++c[axis] <= cur[axis] + L - 1) break;
            c[axis] = cur[axis];
            ++axis;
        }
        if (axis == g.d + 1) break;
    }
    SiteSet jbd = relative_boundary(J, cube);
    for (Packed p : jbd.raw())
        if (!K.contains_packed(p)) throw std::logic_error("localize_to_subcube: witness boundary escapes K");
    return out;
}

int64_t piled_thickness(int64_t half_height, int64_t l) {
    if (half_height < l) return 0;
    return 2 * l * ((half_height - l) / l);
}

int64_t piled_thickness_formula(int64_t half_height, int64_t l) {
    int64_t num = half_height - l;
    int64_t ceil_q = num <= 0 ? 0 : (num + l - 1) / l;
    return 2 * ceil_q * l;
}

SurfaceCertificate extract_surface_cube(const SiteSet& K, const std::vector<Site>& witness_I, int64_t L,
                                        int64_t l, const CylinderGeom& g) {
    if (l < 2 || L < 3 * l) throw std::invalid_argument("extract_surface_cube: need 2 <= l and 3l <= L");
    if (L > g.N) throw std::invalid_argument("extract_surface_cube: cube side exceeds the torus");
    const int dim = g.d + 1;
    FrameBox host;
    host.init(Coords(dim, 0), Coords(dim, L - 1));
    std::vector<uint8_t> in_K(host.total, 0), in_I(host.total, 0);
    auto to_frame = [&](const Site& s) {
        Coords c(dim);
        for (int i = 0; i < g.d; ++i) c[i] = s.u[i];
        c[g.d] = s.z;
        if (!host.inside(c)) throw std::invalid_argument("extract_surface_cube: site outside the cube host");
        return c;
    };
    for (const Site& s : K.sorted_sites()) in_K[host.index(to_frame(s))] = 1;
    for (const Site& s : witness_I) in_I[host.index(to_frame(s))] = 1;

    PrefixCounts pre;
    pre.build(host, in_I);
    const int64_t lvol = ipow(l, dim);

    // sub-grid of cube bases: multiples of l inside the l-interior
    const int64_t kmax = (L - 1 - l) / l;
    FrameBox kbox;
    kbox.init(Coords(dim, 1), Coords(dim, kmax));
    auto base_of = [&](const Coords& k) {
        Coords b(dim);
        for (int i = 0; i < dim; ++i) b[i] = k[i] * l;
        return b;
    };
    auto cube_fill = [&](const Coords& b) {
        Coords hi2(b);
        for (int i = 0; i < dim; ++i) hi2[i] += l - 1;
        return pre.count(b, hi2);
    };

    std::vector<uint8_t> occupied(kbox.total, 0);
    int64_t n_occupied = 0;
    kbox.for_each([&](const Coords& k) {
        if (8 * cube_fill(base_of(k)) > lvol) {
            occupied[kbox.index(k)] = 1;
            ++n_occupied;
        }
    });

    SurfaceCertificate cert;
    cert.host = SurfaceCertificate::Host::Cube;
    cert.L = L;
    cert.side = l;
    const double c4 = std::cbrt(0.5 * (1.0 + 4.0 / 5.0));

    std::vector<Coords> candidates;
    int pi_star_axis = 0;
    if (static_cast<double>(n_occupied) <= c4 * kbox.total) {
        cert.case_taken = "sparse";
        // best directional boundary on the sub-grid
        SubgridBoundary best;
        for (int axis = 0; axis < dim; ++axis) {
            SubgridBoundary sb = subgrid_boundary(kbox, occupied, axis);
            if (sb.proj_count > best.proj_count) {
                best = std::move(sb);
                pi_star_axis = axis;
            }
        }
        if (best.proj_count == 0) {
            cert.shortfalls.push_back("empty sub-grid boundary");
            return cert;
        }
        // per projection value: scan the segment toward the occupied side
        for (const auto& [proj, rep] : best.reps) {
            const Coords& k = rep.first;
            int sign = rep.second;
            Coords b = base_of(k);
            bool placed = false;
            for (int64_t m2 = 1; m2 <= l && !placed; ++m2) {
                Coords c(b);
                c[pi_star_axis] += sign * m2;
                int64_t fill = cube_fill(c);
                if (8 * fill > lvol) {
                    candidates.push_back(c);
                    if (7 * fill > lvol)
                        cert.shortfalls.push_back("membership window overshoot at a scanned base");
                    placed = true;
                }
            }
            if (!placed) cert.shortfalls.push_back("segment scan found no crossing");
        }
    } else {
        cert.case_taken = "dense";
        kbox.for_each([&](const Coords& k) {
            int64_t fill = cube_fill(base_of(k));
            if (8 * fill > lvol && static_cast<double>(fill) <= c4 * lvol + 1e-9)
                candidates.push_back(base_of(k));
        });
        if (candidates.empty()) {
            cert.shortfalls.push_back("dense case produced no mid-filled boxes");
            return cert;
        }
        int64_t bestp = -1;
        for (int axis = 0; axis < dim; ++axis) {
            int64_t sz = projected_set_size(kbox, candidates, axis);
            if (sz > bestp) {
                bestp = sz;
                pi_star_axis = axis;
            }
        }
    }

    CubeTools tools{host, in_K, in_I, l, dim};
    finish_certificate(cert, candidates, tools, pi_star_axis, g);
    cert.c_prime = static_cast<double>(cert.projected_base_count) /
                   std::pow(static_cast<double>(L) / static_cast<double>(l), g.d);
    return cert;
}

SurfaceCertificate extract_surface_box(const SiteSet& K, const std::vector<Site>& witness_I, double alpha,
                                       int64_t l, const CylinderGeom& g) {
    const int64_t ht = g.N / 4;
    const int64_t hz = box_alpha_half_height(g, alpha);
    if (static_cast<double>(g.d) * alpha >= 1.0)
        throw std::invalid_argument("extract_surface_box: requires d*alpha < 1");
    if (l < 2) throw std::invalid_argument("extract_surface_box: need l >= 2");
    const int dim = g.d + 1;
    FrameBox host;
    {
        Coords lo(dim, -ht), hi(dim, ht);
        lo[g.d] = -hz;
        hi[g.d] = hz;
        host.init(lo, hi);
    }
    std::vector<uint8_t> in_K(host.total, 0), in_I(host.total, 0);
    auto to_frame = [&](const Site& s) {
        Coords c(dim);
        for (int i = 0; i < g.d; ++i) c[i] = unwrap_centered(s.u[i], g.N);
        c[g.d] = s.z;
        if (!host.inside(c)) throw std::invalid_argument("extract_surface_box: site outside the box host");
        return c;
    };
    for (const Site& s : K.sorted_sites()) in_K[host.index(to_frame(s))] = 1;
    for (const Site& s : witness_I) in_I[host.index(to_frame(s))] = 1;

    PrefixCounts pre;
    pre.build(host, in_I);
    const int64_t lvol = ipow(l, dim);

    SurfaceCertificate cert;
    cert.host = SurfaceCertificate::Host::FlatBox;
    cert.alpha = alpha;
    cert.side = l;

    // sub-grid of the eroded box: cube bases on the l-lattice; the cube
    // [base, base + l - 1] must stay inside the host
    const int64_t kt = (ht - l) / l;
    const int64_t kz = (hz - l) / l;
    if (ht < l || hz < l) {
        cert.shortfalls.push_back("box too thin for the sub-grid at this N");
        return cert;
    }
    FrameBox kbox;
    {
        Coords lo(dim, -kt), hi(dim, kt);
        lo[g.d] = -kz;
        hi[g.d] = kz;
        kbox.init(lo, hi);
    }
    auto base_of = [&](const Coords& k) {
        Coords b(dim);
        for (int i = 0; i < dim; ++i) b[i] = k[i] * l;
        return b;
    };
    auto cube_fill = [&](const Coords& b) {
        Coords hi2(b);
        for (int i = 0; i < dim; ++i) hi2[i] += l - 1;
        return pre.count(b, hi2);
    };
    std::vector<uint8_t> occupied(kbox.total, 0);
    int64_t n_occupied = 0;
    kbox.for_each([&](const Coords& k) {
        if (6 * cube_fill(base_of(k)) > lvol) {
            occupied[kbox.index(k)] = 1;
            ++n_occupied;
        }
    });

    const double c5 = std::cbrt(0.5 * (1.0 + 3.0 / 4.0));
    const int64_t M = piled_thickness(hz, l);
    const int64_t period = M + l;

    std::vector<Coords> candidates;
    int pi_star_axis = 0;
    if (static_cast<double>(n_occupied) <= c5 * kbox.total) {
        cert.case_taken = "sparse";
        // piled grid over the centered ball: all axes on the l-lattice up
        // to radius N/4
        const int64_t R = g.N / 4;
        const int64_t kr = R / l;
        FrameBox pbox;
        pbox.init(Coords(dim, -kr), Coords(dim, kr));
        std::vector<uint8_t> piled(pbox.total, 0);
        pbox.for_each([&](const Coords& k) {
            // map the vertical coordinate into its copy
            int64_t z = k[g.d] * l;
            int64_t n = floor_div(z + M / 2, period);
            int64_t rel = z - n * period;
            Coords kk(k);
            kk[g.d] = rel / l;
            if (kbox.inside(kk) && occupied[kbox.index(kk)]) piled[pbox.index(k)] = 1;
        });
        int64_t bestp = -1;
        SubgridBoundary best_piled;
        for (int axis = 0; axis < dim; ++axis) {
            SubgridBoundary sb = subgrid_boundary(pbox, piled, axis);
            if (sb.proj_count > bestp) {
                bestp = sb.proj_count;
                pi_star_axis = axis;
                best_piled = std::move(sb);
            }
        }
        if (bestp <= 0) {
            cert.shortfalls.push_back("empty piled-grid boundary");
            return cert;
        }
        if (pi_star_axis == g.d) {
            // vertical case: every projected piled-boundary point must sit
            // over a sub-grid fiber that meets the occupied set without
            // containing it, so the single copy already carries the boundary
            for (const auto& [proj, rep] : best_piled.reps) {
                bool any_in = false, any_out = false;
                Coords k(dim);
                for (int i = 0; i < g.d; ++i) k[i] = proj[i];
                for (int64_t kz2 = -kz; kz2 <= kz; ++kz2) {
                    k[g.d] = kz2;
                    if (!kbox.inside(k)) continue;
                    (occupied[kbox.index(k)] ? any_in : any_out) = true;
                }
                if (!(any_in && any_out)) cert.shortfalls.push_back("piled fiber inclusion violated");
            }
        }
        // descend to a single copy: the copy's own boundary drives the scan
        SubgridBoundary copy = subgrid_boundary(kbox, occupied, pi_star_axis);
        if (copy.proj_count == 0) {
            cert.shortfalls.push_back("empty single-copy boundary");
            return cert;
        }
        for (const auto& [proj, rep] : copy.reps) {
            const Coords& k = rep.first;
            int sign = rep.second;
            Coords b = base_of(k);
            bool placed = false;
            for (int64_t m2 = 1; m2 <= l && !placed; ++m2) {
                Coords c(b);
                c[pi_star_axis] += sign * m2;
                int64_t fill = cube_fill(c);
                if (6 * fill > lvol) {
                    candidates.push_back(c);
                    if (5 * fill > lvol)
                        cert.shortfalls.push_back("membership window overshoot at a scanned base");
                    placed = true;
                }
            }
            if (!placed) cert.shortfalls.push_back("segment scan found no crossing");
        }
    } else {
        cert.case_taken = "dense";
        kbox.for_each([&](const Coords& k) {
            int64_t fill = cube_fill(base_of(k));
            if (6 * fill > lvol && static_cast<double>(fill) <= c5 * lvol + 1e-9)
                candidates.push_back(base_of(k));
        });
        if (candidates.empty()) {
            cert.shortfalls.push_back("dense case produced no mid-filled boxes");
            return cert;
        }
        int64_t bestp = -1;
        for (int axis = 0; axis < dim; ++axis) {
            int64_t sz = projected_set_size(kbox, candidates, axis);
            if (sz > bestp) {
                bestp = sz;
                pi_star_axis = axis;
            }
        }
    }

    CubeTools tools{host, in_K, in_I, l, dim};
    finish_certificate(cert, candidates, tools, pi_star_axis, g);
    double denom = std::pow(static_cast<double>(g.N) / static_cast<double>(l), g.d) *
                   std::pow(static_cast<double>(g.N), static_cast<double>(g.d) * alpha - 1.0);
    cert.c_prime = static_cast<double>(cert.projected_base_count) / denom;
    return cert;
}

CertificateValidation validate_surface_certificate(const SurfaceCertificate& cert, const SiteSet& K,
                                                   const CylinderGeom& g) {
    CertificateValidation v;
    auto fail = [&](const std::string& msg) {
        v.ok = false;
        v.failures.push_back(msg);
    };
    const int dim = g.d + 1;
    const int64_t l = cert.side;
    if (cert.base_points.size() != cert.per_cube_counts.size()) {
        fail("base point / count length mismatch");
        return v;
    }
    // frame coordinates of the base points
    std::vector<Coords> frames;
    for (const Site& s : cert.base_points) {
        Coords c(dim);
        for (int i = 0; i < g.d; ++i)
            c[i] = (cert.host == SurfaceCertificate::Host::Cube) ? s.u[i] : unwrap_centered(s.u[i], g.N);
        c[g.d] = s.z;
        frames.push_back(std::move(c));
    }
    // interior placement and sublattice membership off the scan axis
    for (const Coords& c : frames) {
        for (int i = 0; i < dim; ++i) {
            int64_t lo, hi;
            if (cert.host == SurfaceCertificate::Host::Cube) {
                lo = l;
                hi = cert.L - 1 - l;
            } else {
                int64_t h = (i == g.d) ? box_alpha_half_height(g, cert.alpha) : g.N / 4;
                lo = -(h - l);
                hi = h - l;
            }
            if (c[i] < lo || c[i] > hi) fail("base point outside the l-interior");
            if (i != cert.pi_star - 1 && c[i] % l != 0) fail("projected base point off the l-sublattice");
        }
    }
    // pairwise l-separation
    for (size_t a = 0; a < frames.size(); ++a)
        for (size_t b = a + 1; b < frames.size(); ++b) {
            int64_t m = 0;
            for (int i = 0; i < dim; ++i) m = std::max<int64_t>(m, std::llabs(frames[a][i] - frames[b][i]));
            if (m < l) fail("base points closer than l");
        }
    // recompute the projected-base count
    {
        std::set<Coords> proj;
        for (const Coords& c : frames) {
            Coords p;
            for (int i = 0; i < dim; ++i)
                if (i != cert.pi_star - 1) p.push_back(c[i]);
            proj.insert(std::move(p));
        }
        if (static_cast<int64_t>(proj.size()) != cert.projected_base_count)
            fail("projected base count mismatch");
        if (proj.empty()) fail("empty base family");
    }
    // recompute the per-cube projected K counts
    for (size_t idx = 0; idx < frames.size(); ++idx) {
        const Coords& c = frames[idx];
        std::set<Coords> proj;
        Coords it(c);
        while (true) {
            Site s = frame_to_site(g, it);
            if (K.contains(s)) {
                Coords p;
                for (int i = 0; i < dim; ++i)
                    if (i != cert.pi_star_star - 1) p.push_back(it[i]);
                proj.insert(std::move(p));
            }
            int axis = 0;
            while (axis < dim) {
                if (++it[axis] <= c[axis] + l - 1) break;
                it[axis] = c[axis];
                ++axis;
            }
            if (axis == dim) break;
        }
        if (static_cast<int64_t>(proj.size()) != cert.per_cube_counts[idx]) fail("per-cube count mismatch");
        if (proj.empty()) fail("per-cube count zero");
    }
    if (cert.c_double_prime <= 0.0) fail("per-cube density constant not positive");
    if (cert.c_prime <= 0.0) fail("surface density constant not positive");
    return v;
}

std::string certificate_to_json(const SurfaceCertificate& cert) {
    nlohmann::ordered_json j;
    j["schema"] = "surface-certificate/1";
    j["host"] = cert.host == SurfaceCertificate::Host::Cube ? "cube" : "flat-box";
    j["L"] = cert.L;
    j["alpha"] = cert.alpha;
    j["side"] = cert.side;
    j["pi_star"] = cert.pi_star;
    j["pi_star_star"] = cert.pi_star_star;
    j["case"] = cert.case_taken;
    j["projected_base_count"] = cert.projected_base_count;
    j["c_prime"] = cert.c_prime;
    j["c_double_prime"] = cert.c_double_prime;
    j["candidate_count"] = cert.candidate_count;
    j["shortfalls"] = cert.shortfalls;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (size_t i = 0; i < cert.base_points.size(); ++i) {
        nlohmann::ordered_json p;
        p["u"] = cert.base_points[i].u;
        p["z"] = cert.base_points[i].z;
        p["count"] = cert.per_cube_counts[i];
        pts.push_back(p);
    }
    j["base_points"] = pts;
    return j.dump(2);
}

SurfaceCertificate certificate_from_json(const std::string& text, const CylinderGeom& g) {
    (void)g;
    nlohmann::json j = nlohmann::json::parse(text);
    SurfaceCertificate cert;
    cert.host = j.at("host") == "cube" ? SurfaceCertificate::Host::Cube : SurfaceCertificate::Host::FlatBox;
    cert.L = j.at("L");
    cert.alpha = j.at("alpha");
    cert.side = j.at("side");
    cert.pi_star = j.at("pi_star");
    cert.pi_star_star = j.at("pi_star_star");
    cert.case_taken = j.at("case");
    cert.projected_base_count = j.at("projected_base_count");
    cert.c_prime = j.at("c_prime");
    cert.c_double_prime = j.at("c_double_prime");
    cert.candidate_count = j.at("candidate_count");
    cert.shortfalls = j.at("shortfalls").get<std::vector<std::string>>();
    for (const auto& p : j.at("base_points")) {
        Site s;
        s.u = p.at("u").get<std::vector<int>>();
        s.z = p.at("z");
        cert.base_points.push_back(s);
        cert.per_cube_counts.push_back(p.at("count"));
    }
    return cert;
}

}  // namespace cylwalk
