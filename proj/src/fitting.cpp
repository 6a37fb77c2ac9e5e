#include "cylwalk/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cylwalk/rng.hpp"

namespace cylwalk {

double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median_of: empty sample");
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

OlsLine ols_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("ols_fit: need >= 2 points");
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) throw std::invalid_argument("ols_fit: degenerate abscissae");
    OlsLine line;
    line.slope = (n * sxy - sx * sy) / det;
    line.intercept = (sy - line.slope * sx) / n;
    return line;
}

FitResult fit_exponent(const std::vector<double>& xs, const std::vector<std::vector<double>>& samples,
                       int bootstrap_rounds, double ci_level, uint64_t seed) {
    if (xs.size() != samples.size() || xs.size() < 3)
        throw std::invalid_argument("fit_exponent: need >= 3 sizes with samples");
    std::vector<double> ys;
    for (const auto& s : samples) {
        double m = median_of(s);
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("fit_exponent: medians must be finite and positive");
        ys.push_back(std::log(m));
    }
    FitResult out;
    out.n_points = static_cast<int>(xs.size());
    OlsLine line = ols_fit(xs, ys);
    out.slope = line.slope;
    out.intercept = line.intercept;

    std::vector<double> slopes;
    slopes.reserve(bootstrap_rounds);
    Rng rng(splitmix64(seed ^ 0xb007ull));
    for (int b = 0; b < bootstrap_rounds; ++b) {
        std::vector<double> by;
        bool ok = true;
        for (const auto& s : samples) {
            std::vector<double> draw(s.size());
            for (size_t i = 0; i < s.size(); ++i) draw[i] = s[rng.below(s.size())];
            double m = median_of(draw);
            if (!(m > 0.0) || !std::isfinite(m)) {
                ok = false;
                break;
            }
            by.push_back(std::log(m));
        }
        if (!ok) {
            ++out.dropped_bootstrap;
            continue;
        }
        slopes.push_back(ols_fit(xs, by).slope);
    }
    if (slopes.empty()) {
        out.ci_lo = out.ci_hi = out.slope;
        return out;
    }
    std::sort(slopes.begin(), slopes.end());
    double tail = (1.0 - ci_level) / 2.0;
    auto pick = [&](double q) {
        double pos = q * (slopes.size() - 1);
        size_t i = static_cast<size_t>(pos);
        double w = pos - i;
        return (i + 1 < slopes.size()) ? slopes[i] * (1 - w) + slopes[i + 1] * w : slopes[i];
    };
    out.ci_lo = pick(tail);
    out.ci_hi = pick(1.0 - tail);
    return out;
}

}  // namespace cylwalk
