#include "cylwalk/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cylwalk {

double alpha_star(int d) {
    if (d < 3) throw std::invalid_argument("alpha_star: d must be >= 3");
    return 1.0 / (d * (2.0 - 1.0 / (d - 1)));
}

double phi(double alpha, int d) {
    if (d < 3) throw std::invalid_argument("phi: d must be >= 3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("phi: alpha must be in (0, 1)");
    const double as = alpha_star(d);
    if (alpha < as) return alpha;
    if (alpha < 1.0 / d) return 1.0 / d + alpha / (d - 1) - alpha;
    return (1.0 - alpha) / ((d - 1.0) * (d - 1.0));
}

double ldp_rate(double alpha, double beta, int d) {
    if (d < 3) throw std::invalid_argument("ldp_rate: d must be >= 3");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("ldp_rate: alpha, beta must be > 0");
    const double dd = d;
    if (alpha < 1.0 / d) {
        double cap = dd - 1.0 - dd * alpha / (dd - 1.0);
        return beta < cap ? cap : 0.0;
    }
    double knee = dd - 1.0 - 1.0 / (dd - 1.0);
    if (beta < knee) return knee;
    if (beta < dd - 1.0) return ((dd - 1.0) * (dd - 1.0) - 1.0) * (dd - 1.0 - beta);
    return 0.0;
}

double cover_ldp_rate(double alpha, double beta, int d) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("cover_ldp_rate: alpha, beta must be > 0");
    double cap = d - std::min(static_cast<double>(d) * alpha, 1.0);
    return beta < cap ? cap : 0.0;
}

double g_alpha(double alpha, double beta, int d) {
    double drift_term = beta - std::max(static_cast<double>(d) * alpha - 1.0, 0.0);
    return std::min(drift_term, ldp_rate(alpha, beta, d));
}

double zeta(double alpha, int d) {
    if (d < 3) throw std::invalid_argument("zeta: d must be >= 3");
    if (!(alpha > 0.0)) throw std::invalid_argument("zeta: alpha must be > 0");
    const double dd = d;
    if (alpha < 1.0 / d) return dd - 1.0 - dd * alpha / (dd - 1.0);
    if (alpha < 1.0) return dd * (1.0 - alpha - (1.0 - alpha) / ((dd - 1.0) * (dd - 1.0)));
    return 0.0;
}

double zeta_by_grid(double alpha, int d) {
    // coarse grid then local refinement; g is min(increasing, nonincreasing)
    // in beta, hence unimodal
    const double b_hi = static_cast<double>(d);
    const int coarse = 200'000;
    double best = 0.0, best_b = b_hi / 2;
    for (int i = 1; i < coarse; ++i) {
        double b = b_hi * i / coarse;
        double v = g_alpha(alpha, b, d);
        if (v > best) {
            best = v;
            best_b = b;
        }
    }
    double lo = std::max(1e-12, best_b - b_hi / coarse), hi = std::min(b_hi, best_b + b_hi / coarse);
    for (int it = 0; it < 200; ++it) {
        double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
        if (g_alpha(alpha, m1, d) < g_alpha(alpha, m2, d))
            lo = m1;
        else
            hi = m2;
    }
    return std::max(best, g_alpha(alpha, 0.5 * (lo + hi), d));
}

double exponent_identity_residual(int d, int grid_points) {
    if (d < 3) throw std::invalid_argument("exponent_identity_residual: d must be >= 3");
    const double as = alpha_star(d);
    double max_res = 0.0;
    for (int i = 1; i < grid_points; ++i) {
        double a = static_cast<double>(i) / grid_points;
        if (std::abs(a - as) < 1e-9 || std::abs(a - 1.0 / d) < 1e-9) continue;  // branch points excluded
        double lhs = d * (1.0 - a - phi(a, d));
        double rhs = zeta(a, d);
        if (a < 1.0 / d) rhs = std::max(rhs, d * (1.0 - 2.0 * a));
        max_res = std::max(max_res, std::abs(lhs - rhs));
    }
    return max_res;
}

ExponentTable make_exponent_table(int d, int grid_points, int beta_grid_points) {
    ExponentTable t;
    t.d = d;
    for (int i = 1; i < grid_points; ++i) {
        double a = static_cast<double>(i) / grid_points;
        t.alpha.push_back(a);
        double p = phi(a, d);
        t.phi_v.push_back(p);
        t.zeta_v.push_back(zeta(a, d));
        t.lower_exp.push_back(d * (1.0 - a - p));
        t.upper_exp.push_back(d * (1.0 - a));
    }
    for (int j = 1; j < beta_grid_points; ++j)
        t.beta.push_back(static_cast<double>(j) / beta_grid_points * (d - 1.0));
    t.f.reserve(t.alpha.size() * t.beta.size());
    t.f_star.reserve(t.alpha.size() * t.beta.size());
    for (double a : t.alpha) {
        for (double b : t.beta) {
            t.f.push_back(ldp_rate(a, b, d));
            t.f_star.push_back(cover_ldp_rate(a, b, d));
        }
    }
    return t;
}

}  // namespace cylwalk
