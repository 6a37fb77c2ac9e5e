#pragma once

// Simulation of the random walk with vertical drift, in discrete and
// continuous time, together with excursion schedules and the chain of
// relaxed visits to the height-0 slice.

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cylwalk/lattice.hpp"
#include "cylwalk/rng.hpp"

namespace cylwalk {

struct DriftParams {
    double delta = 0.0;           // in [0, 1)
    std::optional<double> alpha;  // when set, delta = N^{-d*alpha}
};

DriftParams drift_from_alpha(int N, int d, double alpha);

struct Trajectory {
    CylinderGeom geom;
    std::vector<Site> steps;  // steps[0] is the start
    SiteSet visited;
    int64_t z_min = 0, z_max = 0;
    uint64_t seed = 0;
};

struct ExcursionSchedule {
    std::optional<Region> inner, outer;
    std::vector<int64_t> returns;     // R_n: successive returns to the inner region
    std::vector<int64_t> departures;  // D_n: departures from the outer region
    bool budget_exhausted = false;
    int64_t budget = 0;
};

// One move of the drifted walk: the 2d lateral moves each have probability
// 1/(2d+2), up has (1+delta)/(2d+2), down has (1-delta)/(2d+2).
int sample_move(const CylinderGeom& g, const DriftParams& drift, Rng& rng);
Site step(const Site& state, const CylinderGeom& g, const DriftParams& drift, Rng& rng);

// Minimal mutable walker for hot loops: keeps coordinates plus the packed
// key incrementally.
class DiscreteWalker {
  public:
    DiscreteWalker(const CylinderGeom& g, const DriftParams& drift, const Site& start);

    void advance(Rng& rng);
    const Site& site() const { return site_; }
    int64_t z() const { return site_.z; }
    Packed packed() const {
        uint64_t zb = static_cast<uint64_t>(static_cast<uint32_t>(site_.z + (1ll << 31)));
        return (zb << 32) | static_cast<uint64_t>(torus_idx_);
    }
    int64_t torus_index() const { return torus_idx_; }

  private:
    CylinderGeom geom_;
    DriftParams drift_;
    Site site_;
    int64_t torus_idx_;
    std::vector<int64_t> strides_;
};

Trajectory simulate_walk(const CylinderGeom& g, const DriftParams& drift, const Site& start, int64_t steps, Rng& rng);

// Runs the walk until k completed excursions (return to `inner`, then
// departure from `outer`) or until the step budget runs out. Budget
// exhaustion is a reported outcome, not a failure.
std::pair<Trajectory, ExcursionSchedule> run_excursions(const CylinderGeom& g, const DriftParams& drift,
                                                        const Region& inner, const Region& outer, int64_t k,
                                                        const Site& start, Rng& rng, int64_t budget_steps);

// ---- continuous-time embedding ----------------------------------------

struct JumpEvent {
    double t;
    bool torus;  // true: torus component jumps, false: height component
    int move;    // torus: lateral move index in [0, 2d); height: +1 / -1
};

// Torus jumps at rate 1, height jumps at rate 1/d, independent, so the
// merged jump process has rate (d+1)/d and its skeleton is the drifted walk.
struct ContinuousEmbedding {
    CylinderGeom geom;
    DriftParams drift;
    Site start;
    double horizon = 0.0;
    std::vector<JumpEvent> events;  // increasing times within [0, horizon]

    std::vector<double> torus_jump_times() const;
    std::vector<double> height_jump_times() const;
    std::vector<Site> skeleton() const;  // discrete walk at merged jump times
};

ContinuousEmbedding simulate_embedding(const CylinderGeom& g, const DriftParams& drift, double horizon,
                                       const Site& start, Rng& rng);

constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

struct VisitChainSample {
    std::vector<double> stop_times;            // S_0 = 0, S_1, ...; infinity marks budget exhaustion
    std::vector<std::vector<int>> values;      // V_n: torus point at S_n (only for finite S_n)
    std::vector<int64_t> torus_jump_counts;    // number of torus jumps in [0, S_n]
    bool exhausted = false;                    // some stage did not finish within the horizon
};

// Visits of the walk to the height-0 slice with one torus jump of
// relaxation in between: each stage waits for one torus jump, then for the
// height component to return to 0. Requires the embedding to start at
// height 0.
VisitChainSample visit_chain(const ContinuousEmbedding& emb, int64_t k);

// Same construction as visit_chain, but the merged-clock embedding is
// generated on the fly and stops at the k-th visit instead of
// materializing the whole horizon. Identical in law; the cheap path for
// Monte Carlo estimators.
VisitChainSample visit_chain_stream(const CylinderGeom& g, const DriftParams& drift, const Site& start,
                                    int64_t k, double time_budget, Rng& rng);

// Independent sampler of the law of S_n built from the renewal
// decomposition (used as a cross-check oracle for visit_chain): each stage
// contributes an Exp(1) wait plus the time for a fresh height walk to hit
// the negated displacement accumulated during the wait. Returns infinity
// when the time budget is exceeded.
double sample_visit_time_sum(const CylinderGeom& g, const DriftParams& drift, int64_t n, Rng& rng,
                             double time_budget);

}  // namespace cylwalk
