#pragma once

// Exact change of measure between the drifted and the unbiased walk, and
// the two-sided comparison bounds for stopped events with bounded vertical
// displacement.

#include <cstdint>
#include <functional>
#include <vector>

#include "cylwalk/walk.hpp"

namespace cylwalk {

struct LogWeight {
    double log_value = 0.0;
    int64_t up_steps = 0;
    int64_t down_steps = 0;
    double value() const { return std::exp(log_value); }
};

// Radon-Nikodym weight of a nearest-neighbor path: every upward step
// contributes a factor 1+delta, every downward step 1-delta, lateral steps
// contribute 1. Kept in log space so long paths do not underflow.
LogWeight path_weight(const CylinderGeom& g, const std::vector<Site>& path, double delta);

using PathPredicate = std::function<bool(const std::vector<Site>&)>;

struct ReweightedPair {
    double p_drift = 0.0;      // exact P^delta[event]
    double reweighted = 0.0;   // exact E^0[event * weight]
};

// Both sides of the change-of-measure identity by exhaustive enumeration of
// all (2d+2)^n paths of length n from `start`; they agree up to roundoff.
ReweightedPair reweighted_probability(const CylinderGeom& g, const Site& start, const PathPredicate& event,
                                      double delta, int n);

// An F_T-measurable event observed at a stopping time T with vertical
// displacement bounded in [b_lo, b_hi] on the event (infinities allowed
// with the conventions (1-d)^inf = 0, (1+d)^inf = inf).
struct StoppedEventSpec {
    // true once the prefix (including the start) has reached the stopping time
    std::function<bool(const std::vector<Site>&)> stopped;
    // evaluated on the stopped prefix
    std::function<bool(const std::vector<Site>&)> event;
    double b_lo = 0.0;
    double b_hi = 0.0;
    // paths not stopped within max_len fall outside the event: the check
    // applies the comparison to A intersected with {T <= max_len}, itself a
    // valid stopped event
    int max_len = 64;
};

struct ComparisonReport {
    double lower = 0.0;    // (1-d)^{b-} (1+d)^{b+} E^0[A, (1-d^2)^{ceil(T/2)}]
    double p_delta = 0.0;  // P^delta[A]
    double upper = 0.0;    // (1-d)^{b'-} (1+d)^{b'+} P^0[A]
    bool lower_holds = false;
    bool upper_holds = false;
    bool upper_vacuous = false;  // upper bound degenerated to +infinity
    double se_lower = 0.0, se_p = 0.0, se_upper = 0.0;  // zero in exact mode
    int64_t samples = 0;                                 // zero in exact mode
};

ComparisonReport drift_comparison_exact(const CylinderGeom& g, const Site& start, const StoppedEventSpec& spec,
                                        double delta);
ComparisonReport drift_comparison_mc(const CylinderGeom& g, const Site& start, const StoppedEventSpec& spec,
                                     double delta, int64_t samples, uint64_t seed);

}  // namespace cylwalk
