#pragma once

// Spectral analysis of the torus walk and of the chain of relaxed slice
// visits: eigenvalues, the eigentime quantity u, cover-time tail bounds,
// maximum hitting times, and the Monte Carlo cross-check of the visit-chain
// spectrum identity.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cylwalk/walk.hpp"

namespace cylwalk {

struct Spectrum {
    std::vector<double> values;  // sorted decreasing, values[0] = 1
};

// Closed-form eigenvalues of the simple random walk on T^d_N:
// (1/d) sum_i cos(2 pi k_i / N) over k in {0..N-1}^d.
Spectrum torus_spectrum(int N, int d);

// Explicit transition matrix of the torus walk (used by oracles and the
// visit-kernel machinery); states indexed by torus linear index.
Eigen::MatrixXd torus_transition_matrix(int N, int d);

// u(W) = sum_{m>=2} 1/(1 - lambda_m); requires lambda_1 = 1 simple.
double u_of_spectrum(const Spectrum& spec);

// coupon-collector style tail bound |G| exp(-floor(n / (4 e u)))
double cover_tail_bound(double u, int64_t G_size, int64_t n);

struct ChainAnalysis {
    double u = 0.0;
    double max_hit = 0.0;
    int64_t size = 0;
    double sym_residual = 0.0;      // max |E_g H_g' - E_g' H_g|
    bool inequality_holds = false;  // max_hit <= 2u
    double slack = 0.0;             // 2u - max_hit
};

// Exact mean hitting times of a symmetric reversible irreducible chain via
// the fundamental matrix; asserts max hitting time <= 2u and the hitting
// symmetry E_g[H_g'] = E_g'[H_g].
ChainAnalysis eigentime_maxhit_check(const Eigen::MatrixXd& P);
Eigen::MatrixXd mean_hitting_times(const Eigen::MatrixXd& P);

struct VisitKernelEstimate {
    Eigen::MatrixXd p;            // row-normalized, then symmetrized for spectra
    int64_t finite_samples = 0;   // stages that finished within budget
    int64_t total_samples = 0;
    double finite_fraction = 0.0;
    double truncation_tail = 0.0;  // 1 - finite_fraction: recorded truncation bias proxy
};

// Empirical one-step kernel of the slice-visit chain, conditioned on the
// visit completing within the time budget. Starting points cycle through
// the torus so every row is estimated.
VisitKernelEstimate estimate_visit_kernel(int N, int d, double delta, int64_t replicas, double time_budget,
                                          uint64_t seed);

struct SpectrumResidualRow {
    double lambda_y = 0.0;      // torus eigenvalue (group representative)
    int multiplicity = 1;
    double lambda_pv = 0.0;     // eigenvalue of the estimated visit kernel (group mean)
    double se_pv = 0.0;         // bootstrap standard error
    double lambda_mc = 0.0;     // E[lambda_y ^ (#torus jumps)] Monte Carlo estimate
    double se_mc = 0.0;
    double residual = 0.0;
    double sigma = 0.0;         // combined standard error
};

// Two independent Monte Carlo estimators of the visit-chain spectrum: the
// sorted spectrum of the estimated kernel against direct estimates of
// E[lambda_m(Y)^{#torus jumps by the first relaxed visit}], both under the
// same budget conditioning. Degenerate eigenvalue groups are compared as
// multisets through group means.
std::vector<SpectrumResidualRow> visit_spectrum_residuals(int N, int d, double delta, int64_t replicas,
                                                          double time_budget, uint64_t seed,
                                                          int bootstrap_rounds = 200);

}  // namespace cylwalk
