#include "cylwalk/girsanov.hpp"

#include <cmath>
#include <stdexcept>

namespace cylwalk {

LogWeight path_weight(const CylinderGeom& g, const std::vector<Site>& path, double delta) {
    if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("path_weight: delta must be in [0, 1)");
    LogWeight w;
    for (size_t i = 1; i < path.size(); ++i) {
        if (!are_neighbors(g, path[i - 1], path[i]))
            throw std::invalid_argument("path_weight: consecutive sites must be neighbors");
        int64_t dz = path[i].z - path[i - 1].z;
        if (dz == 1)
            ++w.up_steps;
        else if (dz == -1)
            ++w.down_steps;
    }
    w.log_value = w.up_steps * std::log1p(delta) + w.down_steps * std::log1p(-delta);
    return w;
}

namespace {

// shared exhaustive enumerator: walks every move sequence of length n,
// carrying both path probabilities
template <typename Visit>
void enumerate_paths(const CylinderGeom& g, const Site& start, double delta, int n, Visit&& visit) {
    const int moves = 2 * g.d + 2;
    const double p0 = 1.0 / moves;
    std::vector<Site> path{start};
    std::vector<double> prob_delta{1.0}, prob_zero{1.0};
    std::vector<int> choice{0};
    path.reserve(n + 1);
    while (true) {
        if (static_cast<int>(path.size()) == n + 1) {
            visit(path, prob_delta.back(), prob_zero.back());
        } else {
            int m = choice.back();
            if (m < moves) {
                ++choice.back();
                Site next = neighbor(path.back(), g, m);
                double pd = p0;
                if (m == 2 * g.d) pd = (1.0 + delta) / moves;
                if (m == 2 * g.d + 1) pd = (1.0 - delta) / moves;
                path.push_back(next);
                prob_delta.push_back(prob_delta.back() * pd);
                prob_zero.push_back(prob_zero.back() * p0);
                choice.push_back(0);
                continue;
            }
        }
        // backtrack
        path.pop_back();
        prob_delta.pop_back();
        prob_zero.pop_back();
        choice.pop_back();
        if (choice.empty()) break;
    }
}

double positive_part(double x) { return x > 0 ? x : 0.0; }
double negative_part(double x) { return x < 0 ? -x : 0.0; }

double prefactor(double delta, double b) {
    // (1-d)^{b-} (1+d)^{b+} with (1-d)^inf = 0 and (1+d)^inf = inf
    return std::pow(1.0 - delta, negative_part(b)) * std::pow(1.0 + delta, positive_part(b));
}

}  // namespace

ReweightedPair reweighted_probability(const CylinderGeom& g, const Site& start, const PathPredicate& event,
                                      double delta, int n) {
    if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("reweighted_probability: delta in [0,1)");
    double count = std::pow(static_cast<double>(2 * g.d + 2), n);
    if (count > 1e7)
        throw std::invalid_argument("reweighted_probability: path space too large; use the Monte Carlo mode");
    ReweightedPair out;
    enumerate_paths(g, start, delta, n, [&](const std::vector<Site>& path, double pd, double p0) {
        if (!event(path)) return;
        out.p_drift += pd;
        int64_t up = 0, down = 0;
        for (size_t i = 1; i < path.size(); ++i) {
            int64_t dz = path[i].z - path[i - 1].z;
            up += dz == 1;
            down += dz == -1;
        }
        out.reweighted += p0 * std::pow(1.0 + delta, static_cast<double>(up)) *
                          std::pow(1.0 - delta, static_cast<double>(down));
    });
    return out;
}

ComparisonReport drift_comparison_exact(const CylinderGeom& g, const Site& start, const StoppedEventSpec& spec,
                                        double delta) {
    double count = std::pow(static_cast<double>(2 * g.d + 2), spec.max_len);
    if (count > 2e7) throw std::invalid_argument("drift_comparison_exact: path space too large");
    double e_pairs = 0.0, p_delta = 0.0, p_zero = 0.0;

    const int moves = 2 * g.d + 2;
    const double p0 = 1.0 / moves;
    std::vector<Site> path{start};
    path.reserve(spec.max_len + 1);
    // depth-first over move sequences, pruned at the stopping time
    auto dfs = [&](auto&& self, double pd_acc, double p0_acc) -> void {
        if (spec.stopped(path)) {
            if (!spec.event(path)) return;
            int64_t t = static_cast<int64_t>(path.size()) - 1;
            double dz = static_cast<double>(path.back().z - start.z);
            if (dz < spec.b_lo - 1e-12 || dz > spec.b_hi + 1e-12)
                throw std::runtime_error("drift_comparison: displacement bound violated on the event");
            p_delta += pd_acc;
            p_zero += p0_acc;
            e_pairs += p0_acc * std::pow(1.0 - delta * delta, std::ceil(t / 2.0));
            return;
        }
        if (static_cast<int>(path.size()) == spec.max_len + 1) return;
        for (int m = 0; m < moves; ++m) {
            double pd = p0;
            if (m == 2 * g.d) pd = (1.0 + delta) / moves;
            if (m == 2 * g.d + 1) pd = (1.0 - delta) / moves;
            path.push_back(neighbor(path.back(), g, m));
            self(self, pd_acc * pd, p0_acc * p0);
            path.pop_back();
        }
    };
    dfs(dfs, 1.0, 1.0);

    ComparisonReport rep;
    rep.lower = prefactor(delta, spec.b_lo) * e_pairs;
    rep.p_delta = p_delta;
    rep.upper = prefactor(delta, spec.b_hi) * p_zero;
    rep.upper_vacuous = std::isinf(rep.upper);
    rep.lower_holds = rep.lower <= rep.p_delta + 1e-12;
    rep.upper_holds = rep.upper_vacuous || rep.p_delta <= rep.upper + 1e-12;
    return rep;
}

ComparisonReport drift_comparison_mc(const CylinderGeom& g, const Site& start, const StoppedEventSpec& spec,
                                     double delta, int64_t samples, uint64_t seed) {
    auto run_measure = [&](double walk_delta, uint64_t stream, auto&& accum) {
        DriftParams dr{walk_delta, std::nullopt};
        for (int64_t r = 0; r < samples; ++r) {
            Rng rng = Rng::for_replica(seed ^ stream, static_cast<uint64_t>(r));
            std::vector<Site> path{start};
            path.reserve(spec.max_len + 1);
            while (!spec.stopped(path) && static_cast<int>(path.size()) < spec.max_len + 1)
                path.push_back(step(path.back(), g, dr, rng));
            bool stopped = spec.stopped(path);
            bool in_event = stopped && spec.event(path);
            if (in_event) {
                double dz = static_cast<double>(path.back().z - start.z);
                if (dz < spec.b_lo - 1e-12 || dz > spec.b_hi + 1e-12)
                    throw std::runtime_error("drift_comparison: displacement bound violated on the event");
            }
            accum(path, in_event);
        }
    };

    double sum_pairs = 0.0, sumsq_pairs = 0.0;
    double count0 = 0.0, countd = 0.0;
    run_measure(0.0, 0x755a656 , [&](const std::vector<Site>& path, bool in_event) {
        double v = 0.0;
        if (in_event) {
            int64_t t = static_cast<int64_t>(path.size()) - 1;
            v = std::pow(1.0 - delta * delta, std::ceil(t / 2.0));
            count0 += 1.0;
        }
        sum_pairs += v;
        sumsq_pairs += v * v;
    });
    run_measure(delta, 0x9177e11, [&](const std::vector<Site>&, bool in_event) {
        if (in_event) countd += 1.0;
    });

    const double n = static_cast<double>(samples);
    ComparisonReport rep;
    rep.samples = samples;
    double mean_pairs = sum_pairs / n;
    double var_pairs = (sumsq_pairs / n - mean_pairs * mean_pairs) / n;
    rep.lower = prefactor(delta, spec.b_lo) * mean_pairs;
    rep.se_lower = prefactor(delta, spec.b_lo) * std::sqrt(std::max(0.0, var_pairs));
    rep.p_delta = countd / n;
    rep.se_p = std::sqrt(rep.p_delta * (1.0 - rep.p_delta) / n);
    double p0 = count0 / n;
    double se0 = std::sqrt(p0 * (1.0 - p0) / n);
    rep.upper = prefactor(delta, spec.b_hi) * p0;
    rep.se_upper = prefactor(delta, spec.b_hi) * se0;
    rep.upper_vacuous = std::isinf(rep.upper);
    double tol_lo = 3.0 * std::hypot(rep.se_lower, rep.se_p);
    double tol_hi = 3.0 * std::hypot(rep.se_upper, rep.se_p);
    rep.lower_holds = rep.lower <= rep.p_delta + tol_lo;
    rep.upper_holds = rep.upper_vacuous || rep.p_delta <= rep.upper + tol_hi;
    return rep;
}

}  // namespace cylwalk
