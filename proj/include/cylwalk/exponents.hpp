#pragma once

// The exponent functions governing the disconnection-time scaling laws and
// the closed-form identities between them.

#include <cstdint>
#include <vector>

namespace cylwalk {

// transition point between the two small-alpha branches of phi
double alpha_star(int d);

// correction exponent phi on (0, 1): continuous, vanishing at both ends
double phi(double alpha, int d);

// rate function of the excursion-disconnection event (d >= 3)
double ldp_rate(double alpha, double beta, int d);

// rate of the slice-cover variant: an upper envelope for any valid rate
double cover_ldp_rate(double alpha, double beta, int d);

// g_alpha(beta) = (beta - (d alpha - 1)_+) ^ ldp_rate(alpha, beta)
double g_alpha(double alpha, double beta, int d);

// zeta = sup_beta g_alpha(beta), closed form
double zeta(double alpha, int d);

// independent check: numerical maximization of g_alpha over beta
double zeta_by_grid(double alpha, int d);

// max residual of d(1 - alpha - phi) = zeta v (d(1-2 alpha) 1{alpha < 1/d})
// over a uniform alpha grid avoiding the branch points
double exponent_identity_residual(int d, int grid_points);

struct ExponentTable {
    int d = 3;
    std::vector<double> alpha;
    std::vector<double> phi_v;
    std::vector<double> zeta_v;
    std::vector<double> lower_exp;  // d(1 - alpha - phi(alpha))
    std::vector<double> upper_exp;  // d(1 - alpha)
    // rate values on an (alpha, beta) grid, row-major in alpha
    std::vector<double> beta;
    std::vector<double> f;       // ldp_rate(alpha, beta)
    std::vector<double> f_star;  // cover_ldp_rate(alpha, beta)
};

ExponentTable make_exponent_table(int d, int grid_points, int beta_grid_points = 199);

}  // namespace cylwalk
