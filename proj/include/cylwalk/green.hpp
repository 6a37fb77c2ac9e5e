#pragma once

// Green functions of the unbiased walk killed outside a finite domain,
// exact through a sparse solve and by Monte Carlo, plus the
// hitting-probability bound they feed.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <cstdint>
#include <memory>
#include <vector>

#include "cylwalk/lattice.hpp"
#include "cylwalk/rng.hpp"

namespace cylwalk {

struct KilledDomain {
    CylinderGeom geom;
    Region B;       // finite, contained in the slab S_a
    int64_t a = 0;  // slab half-height

    KilledDomain(const CylinderGeom& g, Region region, int64_t slab_a);
};

// Factorizes I - P_B once; g(., x') columns come from single backsolves.
// g(x, x') counts expected visits to x' before leaving B, so g = 0 off B
// and g(x, x) >= 1 inside.
class GreenSolver {
  public:
    explicit GreenSolver(const KilledDomain& domain);

    int64_t size() const { return static_cast<int64_t>(sites_.size()); }
    const std::vector<Packed>& sites() const { return sites_; }
    int64_t index_of(const Site& s) const;  // -1 if outside B

    Eigen::VectorXd column(const Site& x_prime) const;  // g(., x_prime) over B
    double value(const Site& x, const Site& x_prime) const;

    // max residual of the defining relation g = delta + P_B g
    double defining_relation_residual(const Site& x_prime) const;

    // P_x[H_A < H_{B^c}] by an exact solve
    double hitting_probability(const std::vector<Site>& A, const Site& x) const;

  private:
    KilledDomain domain_;
    std::vector<Packed> sites_;
    std::unordered_map<Packed, int64_t> index_;
    Eigen::SparseMatrix<double> system_;
    // direct factorization up to a size threshold; conjugate gradient on
    // the same SPD system beyond it (3D lattice fill-in makes the direct
    // factorization infeasible at the largest desk scales)
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> direct_;
    std::unique_ptr<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>> cg_;

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

double green_exact(const KilledDomain& domain, const Site& x, const Site& x_prime);

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    int64_t replicas = 0;
};

McEstimate green_mc(const KilledDomain& domain, const Site& x, const Site& x_prime, int64_t replicas,
                    uint64_t seed);

struct HittingBound {
    double lhs = 0.0;  // exact P_x[H_A < H_{B^c}]
    double rhs = 0.0;  // sum_y g(x,y) / inf_y sum_{y'} g(y,y')
    bool holds = false;
};

HittingBound hitting_probability_bound(const std::vector<Site>& A, const KilledDomain& domain, const Site& x);
HittingBound hitting_probability_bound(const std::vector<Site>& A, const GreenSolver& solver, const Site& x);

struct DecayProfile {
    double near_slope = 0.0;       // log-log slope of g(0, x') vs |x'| in the near field
    double far_rate = 0.0;         // log-linear vertical decay rate, positive
    double lower_ratio_min = 0.0;  // min g * |x-x'|^{d-1} over sampled interior pairs
    std::vector<double> radii;
    std::vector<double> mean_g;
};

// Radial profile of g^{S_a}(0, .) at the given torus size: near-field slope
// fitted over 1 <= r <= a/2, vertical decay fitted on the axis beyond a/2.
DecayProfile decay_profile(int N, int d, int64_t a);

}  // namespace cylwalk
