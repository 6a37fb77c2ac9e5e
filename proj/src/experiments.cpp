#include "cylwalk/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "cylwalk/exponents.hpp"
#include "cylwalk/fitting.hpp"
#include "cylwalk/spectral.hpp"
#include "cylwalk/green.hpp"

namespace cylwalk {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_int(int64_t v) { return std::to_string(v); }

double parse_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }
int64_t parse_int(const std::string& s) { return std::strtoll(s.c_str(), nullptr, 10); }

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace

std::string ExperimentConfig::to_kv() const {
    std::ostringstream os;
    os << "kind=" << kind << "\n";
    os << "d=" << d << "\n";
    os << "n=";
    for (size_t i = 0; i < Ns.size(); ++i) os << (i ? "," : "") << Ns[i];
    os << "\n";
    os << "alpha=" << fmt_double(alpha) << "\n";
    os << "beta=" << fmt_double(beta) << "\n";
    os << "replicas=" << replicas << "\n";
    os << "budget-steps=" << budget_steps << "\n";
    os << "seed=" << seed << "\n";
    os << "gamma=" << fmt_double(gamma) << "\n";
    os << "gamma-prime=" << fmt_double(gamma_prime) << "\n";
    os << "slab-a=" << slab_a << "\n";
    os << "xi=" << fmt_double(xi) << "\n";
    os << "fit-coords=" << fit_coords << "\n";
    os << "out=" << out_dir << "\n";
    os << "format=" << format << "\n";
    os << "svg=" << (svg ? 1 : 0) << "\n";
    return os.str();
}

ExperimentConfig ExperimentConfig::from_kv(const std::string& text) {
    ExperimentConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: malformed line: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "kind")
            c.kind = val;
        else if (key == "d")
            c.d = static_cast<int>(parse_int(val));
        else if (key == "n") {
            c.Ns.clear();
            std::istringstream vs(val);
            std::string tok;
            while (std::getline(vs, tok, ',')) c.Ns.push_back(static_cast<int>(parse_int(tok)));
        } else if (key == "alpha")
            c.alpha = parse_double(val);
        else if (key == "beta")
            c.beta = parse_double(val);
        else if (key == "replicas")
            c.replicas = parse_int(val);
        else if (key == "budget-steps")
            c.budget_steps = parse_int(val);
        else if (key == "seed")
            c.seed = static_cast<uint64_t>(parse_int(val));
        else if (key == "gamma")
            c.gamma = parse_double(val);
        else if (key == "gamma-prime")
            c.gamma_prime = parse_double(val);
        else if (key == "slab-a")
            c.slab_a = parse_int(val);
        else if (key == "xi")
            c.xi = parse_double(val);
        else if (key == "fit-coords")
            c.fit_coords = val;
        else if (key == "out")
            c.out_dir = val;
        else if (key == "format")
            c.format = val;
        else if (key == "svg")
            c.svg = parse_int(val) != 0;
        else
            throw std::invalid_argument("config: unknown key: " + key);
    }
    return c;
}

std::string ExperimentConfig::fingerprint() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a("cylwalk-record/1\n" + to_kv())));
    return buf;
}

int worker_count() {
    if (const char* env = std::getenv("CYLWALK_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {

// replica fan-out with deterministic per-replica work
template <typename F>
void parallel_replicas(int64_t n, F&& f) {
    int workers = std::min<int64_t>(worker_count(), n);
    if (workers <= 1) {
        for (int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                int64_t i = next.fetch_add(1);
                if (i >= n) break;
                f(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

uint64_t stream_seed(uint64_t master, int N, int stream_tag) {
    return splitmix64(master ^ splitmix64((static_cast<uint64_t>(N) << 8) | static_cast<uint64_t>(stream_tag)));
}

}  // namespace

TdiscOutcome simulate_disconnection_time(const CylinderGeom& g, const DriftParams& drift, int64_t budget,
                                         Rng& rng) {
    TdiscOutcome out;
    const int64_t slice = g.torus_count();
    Site start;
    start.u.assign(g.d, 0);
    start.z = 0;
    DiscreteWalker w(g, drift, start);
    std::unordered_set<Packed> visited;
    visited.reserve(1 << 12);
    std::vector<Packed> order;
    std::vector<int64_t> step_of;
    visited.insert(w.packed());
    order.push_back(w.packed());
    step_of.push_back(0);

    int64_t n = 0;
    int64_t next_check = std::max<int64_t>(4 * slice, 1024);
    while (n < budget) {
        w.advance(rng);
        ++n;
        Packed p = w.packed();
        if (visited.insert(p).second) {
            order.push_back(p);
            step_of.push_back(n);
        }
        if (n == next_check || n == budget) {
            // a separating set needs at least a slice worth of sites
            if (static_cast<int64_t>(order.size()) >= slice) {
                auto k = first_disconnecting_prefix(g, order);
                if (k) {
                    out.censored = false;
                    out.time = step_of[*k - 1];
                    break;
                }
            }
            next_check = std::min(budget, next_check * 2);
        }
    }
    out.distinct_sites = static_cast<int64_t>(order.size());
    out.steps_run = n;
    return out;
}

namespace {

struct CensoredStats {
    int64_t n = 0, censored = 0;
    bool median_censored = true;
    double median = 0.0;
    std::vector<double> finite_values;
};

CensoredStats censored_stats(const std::vector<double>& values, const std::vector<bool>& censored) {
    CensoredStats s;
    s.n = static_cast<int64_t>(values.size());
    std::vector<double> ordered;
    for (size_t i = 0; i < values.size(); ++i) {
        if (censored[i]) {
            ++s.censored;
        } else {
            ordered.push_back(values[i]);
            s.finite_values.push_back(values[i]);
        }
    }
    std::sort(ordered.begin(), ordered.end());
    // censored values sit above every finite value; the median is finite
    // only when both middle order statistics are finite
    int64_t hi_needed = (s.n % 2 == 1) ? s.n / 2 + 1 : s.n / 2 + 1;
    if (static_cast<int64_t>(ordered.size()) >= hi_needed) {
        s.median_censored = false;
        if (s.n % 2 == 1)
            s.median = ordered[s.n / 2];
        else
            s.median = 0.5 * (ordered[s.n / 2 - 1] + ordered[s.n / 2]);
    }
    return s;
}

}  // namespace

RunRecord run_disconnection_experiment(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.config = cfg;
    rec.fingerprint = cfg.fingerprint();
    rec.columns = {"N", "replica", "t_disc", "censored", "distinct_sites", "steps_run", "budget"};
    for (int N : cfg.Ns) {
        CylinderGeom g{cfg.d, N};
        DriftParams drift = drift_from_alpha(N, cfg.d, cfg.alpha);
        std::vector<TdiscOutcome> outs(cfg.replicas);
        uint64_t s = stream_seed(cfg.seed, N, 1);
        parallel_replicas(cfg.replicas, [&](int64_t r) {
            Rng rng = Rng::for_replica(s, static_cast<uint64_t>(r));
            outs[r] = simulate_disconnection_time(g, drift, cfg.budget_steps, rng);
        });
        for (int64_t r = 0; r < cfg.replicas; ++r) {
            const TdiscOutcome& o = outs[r];
            rec.rows.push_back({fmt_int(N), fmt_int(r), o.censored ? std::string() : fmt_int(o.time),
                                o.censored ? "1" : "0", fmt_int(o.distinct_sites), fmt_int(o.steps_run),
                                fmt_int(cfg.budget_steps)});
        }
    }
    summarize_record(rec);
    return rec;
}

RunRecord run_excursion_experiment(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.config = cfg;
    rec.fingerprint = cfg.fingerprint();
    rec.columns = {"N", "replica", "event", "censored", "excursions", "cube_returns", "steps"};
    for (int N : cfg.Ns) {
        CylinderGeom g{cfg.d, N};
        const int64_t r_unit = static_cast<int64_t>(
            std::floor(std::pow(N, std::min(cfg.d * cfg.alpha, 1.0)) + 1e-9));
        const int64_t r2 = 2 * r_unit, r4 = 4 * r_unit;
        const int64_t n_beta = std::max<int64_t>(1, static_cast<int64_t>(std::floor(std::pow(N, cfg.beta) + 1e-9)));
        Region box = Region::box_alpha(g, cfg.alpha);
        const int64_t ht = g.N / 4;
        const int64_t hz = box_alpha_half_height(g, cfg.alpha);
        const int64_t L = std::max<int64_t>(1, static_cast<int64_t>(std::pow(N, cfg.gamma_prime)));
        const int64_t cube_lo = -(L / 2);

        struct Row {
            int event = 0;
            bool censored = true;
            int64_t excursions = 0, cube_returns = 0, steps = 0;
        };
        std::vector<Row> rows(cfg.replicas);
        uint64_t sd = stream_seed(cfg.seed, N, 2);
        DriftParams unbiased{0.0, std::nullopt};
        parallel_replicas(cfg.replicas, [&](int64_t r) {
            Rng rng = Rng::for_replica(sd, static_cast<uint64_t>(r));
            Site start;
            start.u.assign(cfg.d, 0);
            start.z = 0;
            DiscreteWalker w(g, unbiased, start);
            SiteSet trace_in_box(g);
            auto in_box = [&](const Site& s) {
                if (std::llabs(s.z) > hz) return false;
                for (int i = 0; i < cfg.d; ++i)
                    if (torus_dist(s.u[i], 0, g.N) > ht) return false;
                return true;
            };
            auto in_cube = [&](const Site& s) {
                if (s.z < cube_lo || s.z >= cube_lo + L) return false;
                for (int i = 0; i < cfg.d; ++i) {
                    int64_t c = unwrap_centered(s.u[i], g.N);
                    if (c < cube_lo || c >= cube_lo + L) return false;
                }
                return true;
            };
            auto in_cube_halo = [&](const Site& s) {
                if (s.z < cube_lo - L || s.z >= cube_lo + 2 * L) return false;
                for (int i = 0; i < cfg.d; ++i) {
                    int64_t c = unwrap_centered(s.u[i], g.N);
                    if (c < cube_lo - L || c >= cube_lo + 2 * L) return false;
                }
                return true;
            };
            Row& row = rows[r];
            bool seeking_return = true;       // slabs S_{2r} / S_{4r}
            bool cube_seeking_return = true;  // the small-cube excursion counter
            int64_t n = 0;
            while (true) {
                const Site& site = w.site();
                if (in_box(site)) trace_in_box.insert(site);
                if (seeking_return) {
                    if (std::llabs(site.z) <= r2) seeking_return = false;
                } else if (std::llabs(site.z) > r4) {
                    seeking_return = true;
                    ++row.excursions;
                    if (row.excursions >= n_beta) {
                        row.censored = false;
                        break;
                    }
                }
                if (cube_seeking_return) {
                    if (in_cube(site)) {
                        cube_seeking_return = false;
                        ++row.cube_returns;
                    }
                } else if (!in_cube_halo(site)) {
                    cube_seeking_return = true;
                }
                if (n >= cfg.budget_steps) break;
                w.advance(rng);
                ++n;
            }
            row.steps = n;
            // the event {first 1/3-disconnection before the n_beta-th
            // departure} is monotone in the trace: once the partial trace
            // disconnects, the outcome is settled even if the budget ran out
            KappaDecision kd = kappa_disconnects(trace_in_box, box, 1.0 / 3.0);
            if (kd.found) {
                row.event = 1;
                row.censored = false;
            } else if (!row.censored) {
                row.event = 0;
            }
        });
        for (int64_t r = 0; r < cfg.replicas; ++r) {
            const Row& row = rows[r];
            rec.rows.push_back({fmt_int(N), fmt_int(r), row.censored ? std::string() : fmt_int(row.event),
                                row.censored ? "1" : "0", fmt_int(row.excursions), fmt_int(row.cube_returns),
                                fmt_int(row.steps)});
        }
    }
    summarize_record(rec);
    return rec;
}

RunRecord run_cover_experiment(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.config = cfg;
    rec.fingerprint = cfg.fingerprint();
    rec.columns = {"N", "replica", "cover_time"};
    for (int N : cfg.Ns) {
        CylinderGeom g{cfg.d, N};
        const int64_t T = g.torus_count();
        std::vector<int64_t> covers(cfg.replicas);
        uint64_t sd = stream_seed(cfg.seed, N, 3);
        parallel_replicas(cfg.replicas, [&](int64_t r) {
            Rng rng = Rng::for_replica(sd, static_cast<uint64_t>(r));
            // torus-only walk: uniform lateral move each step
            std::vector<int64_t> strides(cfg.d);
            int64_t s = 1;
            for (int i = 0; i < cfg.d; ++i) {
                strides[i] = s;
                s *= N;
            }
            std::vector<int> u(cfg.d, 0);
            std::vector<char> seen(T, 0);
            int64_t idx = 0, covered = 1, n = 0;
            seen[0] = 1;
            while (covered < T) {
                int m = static_cast<int>(rng.below(2 * cfg.d));
                int axis = m / 2;
                if (m % 2 == 0) {
                    if (++u[axis] == N) {
                        u[axis] = 0;
                        idx -= strides[axis] * (N - 1);
                    } else
                        idx += strides[axis];
                } else {
                    if (u[axis]-- == 0) {
                        u[axis] = N - 1;
                        idx += strides[axis] * (N - 1);
                    } else
                        idx -= strides[axis];
                }
                ++n;
                if (!seen[idx]) {
                    seen[idx] = 1;
                    ++covered;
                }
            }
            covers[r] = n;
        });
        for (int64_t r = 0; r < cfg.replicas; ++r)
            rec.rows.push_back({fmt_int(N), fmt_int(r), fmt_int(covers[r])});
    }
    summarize_record(rec);
    return rec;
}

RunRecord run_spectral_experiment(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.config = cfg;
    rec.fingerprint = cfg.fingerprint();
    rec.columns = {"N", "lambda_y", "multiplicity", "lambda_pv", "se_pv", "lambda_mc", "se_mc", "residual",
                   "sigma"};
    DriftParams drift{0.0, std::nullopt};
    for (int N : cfg.Ns) {
        drift = drift_from_alpha(N, cfg.d, cfg.alpha);
        double budget = static_cast<double>(cfg.budget_steps);
        auto rows = visit_spectrum_residuals(N, cfg.d, drift.delta, cfg.replicas, budget,
                                             stream_seed(cfg.seed, N, 4));
        for (const auto& row : rows) {
            rec.rows.push_back({fmt_int(N), fmt_double(row.lambda_y), fmt_int(row.multiplicity),
                                fmt_double(row.lambda_pv), fmt_double(row.se_pv), fmt_double(row.lambda_mc),
                                fmt_double(row.se_mc), fmt_double(row.residual), fmt_double(row.sigma)});
        }
    }
    summarize_record(rec);
    return rec;
}

RunRecord run_green_experiment(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.config = cfg;
    rec.fingerprint = cfg.fingerprint();
    rec.columns = {"N", "radius", "mean_g"};
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (int N : cfg.Ns) {
        DecayProfile prof = decay_profile(N, cfg.d, cfg.slab_a);
        for (size_t i = 0; i < prof.radii.size(); ++i)
            rec.rows.push_back({fmt_int(N), fmt_double(prof.radii[i]), fmt_double(prof.mean_g[i])});
        nlohmann::ordered_json j;
        j["N"] = N;
        j["near_slope"] = prof.near_slope;
        j["far_rate"] = prof.far_rate;
        j["lower_ratio_min"] = prof.lower_ratio_min;
        j["target_near_slope"] = 1 - cfg.d;
        per_n.push_back(j);
    }
    rec.summary["kind"] = "green";
    rec.summary["profiles"] = per_n;
    rec.summary["fingerprint"] = rec.fingerprint;
    return rec;
}

namespace {

struct ParsedRows {
    // per-N grouped column values (as doubles; empty cells -> NaN)
    std::vector<int> Ns;
    std::map<int, std::vector<std::vector<double>>> by_n;  // N -> rows of parsed cells
};

ParsedRows group_rows(const RunRecord& rec) {
    ParsedRows out;
    for (const auto& row : rec.rows) {
        int N = static_cast<int>(parse_int(row[0]));
        if (!out.by_n.count(N)) out.Ns.push_back(N);
        std::vector<double> cells;
        for (const auto& c : row)
            cells.push_back(c.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(c));
        out.by_n[N].push_back(std::move(cells));
    }
    return out;
}

void summarize_tdisc(RunRecord& rec) {
    const ExperimentConfig& cfg = rec.config;
    ParsedRows pr = group_rows(rec);
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    std::vector<double> xs;
    std::vector<std::vector<double>> samples;
    bool all_medians_finite = true;
    std::vector<double> medians;
    std::string coords = cfg.fit_coords;
    if (coords == "auto") coords = cfg.alpha > 1.0 ? "loglog" : "stretched";
    for (int N : pr.Ns) {
        std::vector<double> values;
        std::vector<bool> cens;
        for (const auto& cells : pr.by_n[N]) {
            bool c = cells[3] != 0.0;
            cens.push_back(c);
            values.push_back(c ? std::numeric_limits<double>::infinity() : cells[2]);
        }
        CensoredStats st = censored_stats(values, cens);
        nlohmann::ordered_json j;
        j["N"] = N;
        j["replicas"] = st.n;
        j["censored"] = st.censored;
        j["median_censored"] = st.median_censored;
        if (!st.median_censored) j["median"] = st.median;
        per_n.push_back(j);
        if (st.median_censored) {
            all_medians_finite = false;
        } else {
            medians.push_back(st.median);
            double x = coords == "loglog" ? std::log(static_cast<double>(N))
                                          : std::pow(N, cfg.d * (1.0 - cfg.alpha));
            xs.push_back(x);
            // bootstrap sample: censored replicas enter as +inf and are
            // rejected inside the median when they dominate
            samples.push_back(values);
        }
    }
    rec.summary = nlohmann::ordered_json();
    rec.summary["kind"] = "tdisc";
    rec.summary["per_N"] = per_n;
    rec.summary["fit_coords"] = coords;
    rec.summary["target_slope"] = coords == "loglog" ? 2.0 * cfg.d : 0.0;
    bool monotone = true;
    for (size_t i = 1; i < medians.size(); ++i)
        if (medians[i] < medians[i - 1]) monotone = false;
    rec.summary["medians_monotone"] = monotone && all_medians_finite;
    if (xs.size() >= 3) {
        FitResult fit = fit_exponent(xs, samples, 400, 0.90, cfg.seed);
        rec.summary["slope"] = fit.slope;
        rec.summary["slope_ci90"] = {fit.ci_lo, fit.ci_hi};
        rec.summary["bootstrap_dropped"] = fit.dropped_bootstrap;
    }
    rec.summary["fingerprint"] = rec.fingerprint;
}

void summarize_ldp(RunRecord& rec) {
    const ExperimentConfig& cfg = rec.config;
    ParsedRows pr = group_rows(rec);
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (int N : pr.Ns) {
        int64_t events = 0, uncensored = 0;
        std::vector<double> returns;
        for (const auto& cells : pr.by_n[N]) {
            if (cells[3] != 0.0) continue;
            ++uncensored;
            events += cells[2] != 0.0;
            returns.push_back(cells[5]);
        }
        nlohmann::ordered_json j;
        j["N"] = N;
        j["uncensored"] = uncensored;
        j["events"] = events;
        double freq = uncensored > 0 ? static_cast<double>(events) / uncensored : 0.0;
        j["frequency"] = freq;
        if (events == 0 && uncensored > 0) {
            // one-sided 95% upper confidence bound for a zero count
            j["frequency_upper95"] = 1.0 - std::pow(0.05, 1.0 / uncensored);
        } else if (uncensored > 0) {
            j["stderr"] = std::sqrt(freq * (1.0 - freq) / uncensored);
        }
        if (cfg.d >= 3) {
            double f = ldp_rate(cfg.alpha, cfg.beta, cfg.d);
            double fs = cover_ldp_rate(cfg.alpha, cfg.beta, cfg.d);
            j["rate_reference"] = f;
            j["rate_cover_reference"] = fs;
            if (freq > 0 && f > 0) j["minus_log_freq_over_N_rate"] = -std::log(freq) / std::pow(N, f);
        }
        if (cfg.xi > 0 && freq > 0) j["minus_log_freq_over_N_xi"] = -std::log(freq) / std::pow(N, cfg.xi);
        if (!returns.empty()) {
            std::sort(returns.begin(), returns.end());
            j["cube_returns_median"] = returns[returns.size() / 2];
            j["cube_returns_max"] = returns.back();
        }
        per_n.push_back(j);
    }
    rec.summary = nlohmann::ordered_json();
    rec.summary["kind"] = "ldp";
    rec.summary["per_N"] = per_n;
    rec.summary["fingerprint"] = rec.fingerprint;
}

void summarize_cover(RunRecord& rec) {
    const ExperimentConfig& cfg = rec.config;
    ParsedRows pr = group_rows(rec);
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (int N : pr.Ns) {
        std::vector<double> covers;
        for (const auto& cells : pr.by_n[N]) covers.push_back(cells[2]);
        std::sort(covers.begin(), covers.end());
        double u = u_of_spectrum(torus_spectrum(N, cfg.d));
        int64_t T = 1;
        for (int i = 0; i < cfg.d; ++i) T *= N;
        nlohmann::ordered_json j;
        j["N"] = N;
        j["u"] = u;
        j["state_count"] = T;
        j["median"] = covers[covers.size() / 2];
        j["max"] = covers.back();
        // tail-vs-bound comparison on a log-spaced grid
        nlohmann::ordered_json grid = nlohmann::ordered_json::array();
        double n_lo = std::max(1.0, u), n_hi = covers.back() * 1.2;
        bool all_ok = true;
        for (int k = 0; k < 20; ++k) {
            double n = n_lo * std::pow(n_hi / n_lo, k / 19.0);
            int64_t ni = static_cast<int64_t>(n);
            double tail = static_cast<double>(covers.end() -
                                              std::lower_bound(covers.begin(), covers.end(), ni)) /
                          covers.size();
            double bound = cover_tail_bound(u, T, std::max<int64_t>(1, ni));
            double sigma = std::sqrt(tail * (1.0 - tail) / covers.size());
            bool ok = tail <= bound + 3.0 * sigma;
            all_ok = all_ok && ok;
            nlohmann::ordered_json e;
            e["n"] = ni;
            e["tail"] = tail;
            e["bound"] = bound;
            e["sigma"] = sigma;
            e["ok"] = ok;
            grid.push_back(e);
        }
        j["grid"] = grid;
        j["bound_dominates"] = all_ok;
        per_n.push_back(j);
    }
    rec.summary = nlohmann::ordered_json();
    rec.summary["kind"] = "cover";
    rec.summary["per_N"] = per_n;
    rec.summary["fingerprint"] = rec.fingerprint;
}

void summarize_spectral(RunRecord& rec) {
    ParsedRows pr = group_rows(rec);
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (int N : pr.Ns) {
        double worst = 0.0;
        bool all_ok = true;
        for (const auto& cells : pr.by_n[N]) {
            double resid = std::abs(cells[7]);
            double sigma = cells[8];
            if (sigma > 0) worst = std::max(worst, resid / sigma);
            if (resid > 3.0 * sigma + 1e-12) all_ok = false;
        }
        nlohmann::ordered_json j;
        j["N"] = N;
        j["max_residual_sigmas"] = worst;
        j["within_3_sigma"] = all_ok;
        per_n.push_back(j);
    }
    rec.summary = nlohmann::ordered_json();
    rec.summary["kind"] = "spectral";
    rec.summary["per_N"] = per_n;
    rec.summary["fingerprint"] = rec.fingerprint;
}

}  // namespace

namespace {

void summarize_geom(RunRecord& rec) {
    ParsedRows pr = group_rows(rec);
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (int N : pr.Ns) {
        int64_t validated = 0, total = 0;
        double min_cp = std::numeric_limits<double>::infinity();
        double min_cpp = std::numeric_limits<double>::infinity();
        for (const auto& cells : pr.by_n[N]) {
            ++total;
            if (cells[2] != 0.0) {
                ++validated;
                min_cp = std::min(min_cp, cells[6]);
                min_cpp = std::min(min_cpp, cells[7]);
            }
        }
        nlohmann::ordered_json j;
        j["N"] = N;
        j["validated"] = validated;
        j["total"] = total;
        j["min_c_prime"] = min_cp;
        j["min_c_double_prime"] = min_cpp;
        per_n.push_back(j);
    }
    rec.summary = nlohmann::ordered_json();
    rec.summary["kind"] = rec.config.kind;
    rec.summary["per_N"] = per_n;
    rec.summary["fingerprint"] = rec.fingerprint;
}

void summarize_green(RunRecord& rec) {
    // the stored rows are exactly the near-field profile, so the slope
    // refit reproduces the run-time value
    ParsedRows pr = group_rows(rec);
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (int N : pr.Ns) {
        std::vector<double> lx, ly;
        for (const auto& cells : pr.by_n[N]) {
            if (cells[1] > 0 && cells[2] > 0) {
                lx.push_back(std::log(cells[1]));
                ly.push_back(std::log(cells[2]));
            }
        }
        nlohmann::ordered_json j;
        j["N"] = N;
        if (lx.size() >= 2) j["near_slope"] = ols_fit(lx, ly).slope;
        j["target_near_slope"] = 1 - rec.config.d;
        per_n.push_back(j);
    }
    rec.summary = nlohmann::ordered_json();
    rec.summary["kind"] = "green";
    rec.summary["profiles"] = per_n;
    rec.summary["fingerprint"] = rec.fingerprint;
}

}  // namespace

void summarize_record(RunRecord& rec) {
    const std::string& kind = rec.config.kind;
    if (kind == "tdisc")
        summarize_tdisc(rec);
    else if (kind == "ldp")
        summarize_ldp(rec);
    else if (kind == "cover")
        summarize_cover(rec);
    else if (kind == "spectral")
        summarize_spectral(rec);
    else if (kind == "geom-cube" || kind == "geom-box")
        summarize_geom(rec);
    else if (kind == "green")
        summarize_green(rec);
    else
        throw std::invalid_argument("summarize_record: unknown kind " + kind);
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind == "tdisc") return run_disconnection_experiment(cfg);
    if (cfg.kind == "ldp") return run_excursion_experiment(cfg);
    if (cfg.kind == "cover") return run_cover_experiment(cfg);
    if (cfg.kind == "spectral") return run_spectral_experiment(cfg);
    if (cfg.kind == "green") return run_green_experiment(cfg);
    if (cfg.kind == "geom-cube" || cfg.kind == "geom-box") return run_geom_experiment(cfg);
    throw std::invalid_argument("run_experiment: unknown kind " + cfg.kind);
}

// ---- synthetic separating surfaces --------------------------------------

namespace {

// I = {x : x[axis] < tau(rest)} inside an integer box frame; returns the
// witness and its exact relative boundary as the damaged set
struct PlaneCut {
    SiteSet K;
    std::vector<Site> I;
};

PlaneCut synth_surface(const CylinderGeom& g, const std::vector<int64_t>& lo, const std::vector<int64_t>& hi,
                       int axis, bool tilted, uint64_t seed, double target_lo, double target_hi) {
    const int dim = g.d + 1;
    for (int attempt = 0; attempt < 500; ++attempt) {
        Rng rng(splitmix64(seed + attempt));
        double mid = 0.5 * (lo[axis] + hi[axis]);
        std::vector<double> tilt(dim, 0.0);
        if (tilted)
            for (int i = 0; i < dim; ++i)
                if (i != axis) tilt[i] = (rng.u01() - 0.5) * 0.4;
        // height offset noise keyed on the transverse coordinates
        uint64_t noise_key = rng.next();

        SiteSet Iset(g), box(g);
        std::vector<int64_t> c(lo);
        int64_t volume = 0, count = 0;
        while (true) {
            double tau = mid;
            if (tilted) {
                uint64_t h = noise_key;
                for (int i = 0; i < dim; ++i) {
                    if (i == axis) continue;
                    tau += tilt[i] * (c[i] - 0.5 * (lo[i] + hi[i]));
                    h = splitmix64(h ^ static_cast<uint64_t>(c[i] + 1000003));
                }
                tau += static_cast<double>(h % 3) - 1.0;  // {-1, 0, 1}
            }
            Site s;
            s.u.resize(g.d);
            for (int i = 0; i < g.d; ++i) s.u[i] = reduce_mod(c[i], g.N);
            s.z = c[g.d];
            box.insert(s);
            ++volume;
            if (static_cast<double>(c[axis]) < tau) {
                Iset.insert(s);
                ++count;
            }
            int ax = 0;
            while (ax < dim) {
                if (++c[ax] <= hi[ax]) break;
                c[ax] = lo[ax];
                ++ax;
            }
            if (ax == dim) break;
        }
        double frac = static_cast<double>(count) / volume;
        if (frac < target_lo || frac > target_hi) continue;  // resample
        PlaneCut out;
        out.K = relative_boundary(Iset, box);
        out.I = Iset.sorted_sites();
        return out;
    }
    throw std::runtime_error("synth_surface: no separator hit the volume window at this geometry");
}

}  // namespace

SurfaceBatchResult run_surface_batch_cube(const CylinderGeom& g, int64_t L, int64_t l, int count,
                                          uint64_t seed) {
    SurfaceBatchResult res;
    res.min_c_prime = std::numeric_limits<double>::infinity();
    res.min_c_double_prime = std::numeric_limits<double>::infinity();
    res.plane_counts_exact = true;
    std::vector<int64_t> lo(g.d + 1, 0), hi(g.d + 1, L - 1);
    for (int i = 0; i < count; ++i) {
        int axis = i % (g.d + 1);
        bool tilted = i >= g.d + 1;  // the first d+1 items are pure plane cuts
        PlaneCut pc = synth_surface(g, lo, hi, axis, tilted, splitmix64(seed ^ (0x5eedull + i)), 0.30, 0.70);
        SurfaceBatchItem item;
        item.cert = extract_surface_cube(pc.K, pc.I, L, l, g);
        CertificateValidation v = validate_surface_certificate(item.cert, pc.K, g);
        item.validated = v.ok;
        item.failures = v.failures;
        if (v.ok) {
            ++res.validated_count;
            res.min_c_prime = std::min(res.min_c_prime, item.cert.c_prime);
            res.min_c_double_prime = std::min(res.min_c_double_prime, item.cert.c_double_prime);
        }
        if (!tilted) {
            int64_t ld = 1;
            for (int k = 0; k < g.d; ++k) ld *= l;
            for (int64_t cnt : item.cert.per_cube_counts)
                if (cnt != ld) res.plane_counts_exact = false;
        }
        res.items.push_back(std::move(item));
    }
    return res;
}

SurfaceBatchResult run_surface_batch_box(const CylinderGeom& g, double alpha, int64_t l, int count,
                                         uint64_t seed) {
    SurfaceBatchResult res;
    res.min_c_prime = std::numeric_limits<double>::infinity();
    res.min_c_double_prime = std::numeric_limits<double>::infinity();
    res.plane_counts_exact = true;
    const int64_t ht = g.N / 4, hz = box_alpha_half_height(g, alpha);
    std::vector<int64_t> lo(g.d + 1, -ht), hi(g.d + 1, ht);
    lo[g.d] = -hz;
    hi[g.d] = hz;
    for (int i = 0; i < count; ++i) {
        // the flat box is separated across the vertical axis or a torus axis
        int axis = (i % 2 == 0) ? g.d : (i / 2) % g.d;
        bool tilted = i >= 2;
        PlaneCut pc = synth_surface(g, lo, hi, axis, tilted, splitmix64(seed ^ (0xb0eedull + i)), 0.35, 0.65);
        SurfaceBatchItem item;
        item.cert = extract_surface_box(pc.K, pc.I, alpha, l, g);
        CertificateValidation v = validate_surface_certificate(item.cert, pc.K, g);
        item.validated = v.ok;
        item.failures = v.failures;
        if (v.ok) {
            ++res.validated_count;
            res.min_c_prime = std::min(res.min_c_prime, item.cert.c_prime);
            res.min_c_double_prime = std::min(res.min_c_double_prime, item.cert.c_double_prime);
        }
        if (!tilted) {
            int64_t ld = 1;
            for (int k = 0; k < g.d; ++k) ld *= l;
            for (int64_t cnt : item.cert.per_cube_counts)
                if (cnt != ld) res.plane_counts_exact = false;
        }
        res.items.push_back(std::move(item));
    }
    return res;
}

RunRecord run_geom_experiment(const ExperimentConfig& cfg) {
    RunRecord rec;
    rec.config = cfg;
    rec.fingerprint = cfg.fingerprint();
    rec.columns = {"N", "item", "validated", "case", "bases", "proj_bases", "c_prime", "c_double_prime",
                   "shortfalls"};
    nlohmann::ordered_json per_n = nlohmann::ordered_json::array();
    for (int N : cfg.Ns) {
        CylinderGeom g{cfg.d, N};
        const int64_t l = std::max<int64_t>(2, static_cast<int64_t>(std::pow(N, cfg.gamma)));
        SurfaceBatchResult res;
        if (cfg.kind == "geom-cube") {
            const int64_t L = std::max<int64_t>(3 * l, static_cast<int64_t>(std::pow(N, cfg.gamma_prime)));
            res = run_surface_batch_cube(g, L, l, static_cast<int>(cfg.replicas), stream_seed(cfg.seed, N, 5));
        } else {
            res = run_surface_batch_box(g, cfg.alpha, l, static_cast<int>(cfg.replicas),
                                        stream_seed(cfg.seed, N, 6));
        }
        for (size_t i = 0; i < res.items.size(); ++i) {
            const SurfaceBatchItem& it = res.items[i];
            rec.rows.push_back({fmt_int(N), fmt_int(static_cast<int64_t>(i)), it.validated ? "1" : "0",
                                it.cert.case_taken, fmt_int(static_cast<int64_t>(it.cert.base_points.size())),
                                fmt_int(it.cert.projected_base_count), fmt_double(it.cert.c_prime),
                                fmt_double(it.cert.c_double_prime),
                                fmt_int(static_cast<int64_t>(it.cert.shortfalls.size()))});
        }
        nlohmann::ordered_json j;
        j["N"] = N;
        j["validated"] = res.validated_count;
        j["total"] = static_cast<int64_t>(res.items.size());
        j["min_c_prime"] = res.min_c_prime;
        j["min_c_double_prime"] = res.min_c_double_prime;
        j["plane_counts_exact"] = res.plane_counts_exact;
        if (!res.items.empty())
            j["sample_certificate"] = nlohmann::ordered_json::parse(certificate_to_json(res.items[0].cert));
        per_n.push_back(j);
    }
    rec.summary["kind"] = cfg.kind;
    rec.summary["per_N"] = per_n;
    rec.summary["fingerprint"] = rec.fingerprint;
    return rec;
}

}  // namespace cylwalk
