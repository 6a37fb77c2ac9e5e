#pragma once

// Exact decision procedures: does a damaged set disconnect the cylinder,
// when does a trajectory first disconnect it, and kappa-disconnection of
// finite boxes with witnesses.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cylwalk/lattice.hpp"
#include "cylwalk/walk.hpp"

namespace cylwalk {

struct DisconnectionCertificate {
    bool disconnects = false;
    int64_t window_lo = 0, window_hi = 0;  // decision window in the height coordinate
    // when not disconnected: a vacant path joining the window's bottom
    // slice to its top slice
    std::optional<std::vector<Site>> witness_path;
};

// Exact decision whether K separates the two infinite ends of the
// cylinder. Connectivity is decided on the window [z_min-1, z_max+1]
// around K's vertical extent; every slab outside the window is untouched
// and internally connected, so the full slices at the window's edges stand
// in for the two ends.
DisconnectionCertificate disconnects_cylinder(const SiteSet& K, const CylinderGeom& g);

// Minimal k in [1, order.size()] such that the first k sites of `order`
// disconnect the cylinder, or nullopt. `order` lists distinct damaged
// sites; processed in reverse as re-insertions into the vacant graph with
// union-find, which matches the naive per-prefix decision exactly.
std::optional<int64_t> first_disconnecting_prefix(const CylinderGeom& g, const std::vector<Packed>& order);

// Least n such that X([0,n]) disconnects the cylinder, or nullopt ("not yet").
std::optional<int64_t> disconnection_time(const Trajectory& traj);

// Vacant-component labels of the window around K's vertical extent:
// which window sites connect to the upper end of the cylinder.
struct TopLabels {
    int64_t lo = 0, hi = 0;
    int64_t torus_count = 0;
    std::vector<uint8_t> is_top;  // (z - lo) * torus_count + torus index
    bool disconnected = false;

    bool top(const CylinderGeom& g, const Site& s) const {
        if (s.z > hi) return true;
        if (s.z < lo) return false;
        uint64_t idx = 0;
        for (int i = g.d - 1; i >= 0; --i) idx = idx * g.N + s.u[i];
        return is_top[(s.z - lo) * torus_count + static_cast<int64_t>(idx)] != 0;
    }
};

TopLabels top_component_labels(const SiteSet& K, const CylinderGeom& g);

struct KappaDecision {
    bool found = false;
    std::vector<Site> witness;  // the subset I, sorted
    double kappa = 0.0;
    bool complete = true;       // false: component-union search only (K-site cap hit)
    std::string solver;
};

// Does K kappa-disconnect B: some I in B with volume fraction inside
// [kappa, 1-kappa] whose B-relative boundary lies in K. I must be a union
// of connected components of B minus K, optionally augmented by sites of K
// itself (any component adjacent to an included K-site is then forced in).
// The component-union case is decided by a subset-sum scan over component
// sizes; the augmented case is exhausted while |K in B| <= k_site_cap.
KappaDecision kappa_disconnects(const SiteSet& K, const Region& B, double kappa, int k_site_cap = 24);

struct StopTarget {
    enum class Kind { Hit, Cover, KappaDisconnect };
    Kind kind;
    Region region;
    double kappa = 1.0 / 3.0;  // only for KappaDisconnect
};

// First indices along the trajectory at which each target triggers
// (entrance time / cover time / first kappa-disconnection), nullopt if
// never. Cover and kappa-disconnection are monotone in the prefix, which
// the scan exploits.
std::vector<std::optional<int64_t>> stopping_scan(const Trajectory& traj, const std::vector<StopTarget>& targets);

}  // namespace cylwalk
