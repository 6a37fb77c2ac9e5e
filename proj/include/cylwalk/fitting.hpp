#pragma once

// Least-squares exponent fitting in transformed coordinates with bootstrap
// confidence intervals over per-size replica samples.

#include <cstdint>
#include <vector>

namespace cylwalk {

double median_of(std::vector<double> v);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;  // bootstrap percentile interval for the slope
    double ci_hi = 0.0;
    int n_points = 0;
    int64_t dropped_bootstrap = 0;  // rounds with a non-finite statistic
};

struct OlsLine {
    double slope = 0.0, intercept = 0.0;
};
OlsLine ols_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// xs[i] pairs with samples[i]; the fitted y is log(median(samples[i])).
// Bootstrap resamples each sample vector independently; ci_level e.g. 0.90.
FitResult fit_exponent(const std::vector<double>& xs, const std::vector<std::vector<double>>& samples,
                       int bootstrap_rounds, double ci_level, uint64_t seed);

}  // namespace cylwalk
