#include "cylwalk/walk.hpp"

#include <cmath>
#include <stdexcept>

namespace cylwalk {

DriftParams drift_from_alpha(int N, int d, double alpha) {
    if (N < 2 || d < 1) throw std::invalid_argument("drift_from_alpha: need N >= 2, d >= 1");
    if (alpha <= 0) throw std::invalid_argument("drift_from_alpha: alpha must be > 0");
    DriftParams p;
    p.alpha = alpha;
    p.delta = std::pow(static_cast<double>(N), -static_cast<double>(d) * alpha);
    return p;
}

int sample_move(const CylinderGeom& g, const DriftParams& drift, Rng& rng) {
    // one uniform split exactly into 2d lateral moves and the biased
    // vertical pair
    double v = rng.u01() * (2 * g.d + 2);
    int lat = static_cast<int>(v);
    if (lat < 2 * g.d) return lat;
    double w = v - 2 * g.d;             // in [0, 2)
    return (w < 1.0 + drift.delta) ? 2 * g.d : 2 * g.d + 1;
}

Site step(const Site& state, const CylinderGeom& g, const DriftParams& drift, Rng& rng) {
    return neighbor(state, g, sample_move(g, drift, rng));
}

DiscreteWalker::DiscreteWalker(const CylinderGeom& g, const DriftParams& drift, const Site& start)
    : geom_(g), drift_(drift), site_(start) {
    strides_.resize(g.d);
    int64_t s = 1;
    for (int i = 0; i < g.d; ++i) {
        strides_[i] = s;
        s *= g.N;
    }
    torus_idx_ = 0;
    for (int i = g.d - 1; i >= 0; --i) torus_idx_ = torus_idx_ * g.N + site_.u[i];
}

void DiscreteWalker::advance(Rng& rng) {
    int m = sample_move(geom_, drift_, rng);
    int axis = m / 2;
    if (axis < geom_.d) {
        if (m % 2 == 0) {
            if (++site_.u[axis] == geom_.N) {
                site_.u[axis] = 0;
                torus_idx_ -= strides_[axis] * (geom_.N - 1);
            } else {
                torus_idx_ += strides_[axis];
            }
        } else {
            if (site_.u[axis]-- == 0) {
                site_.u[axis] = geom_.N - 1;
                torus_idx_ += strides_[axis] * (geom_.N - 1);
            } else {
                torus_idx_ -= strides_[axis];
            }
        }
    } else {
        site_.z += (m % 2 == 0) ? 1 : -1;
    }
}

Trajectory simulate_walk(const CylinderGeom& g, const DriftParams& drift, const Site& start, int64_t steps,
                         Rng& rng) {
    Trajectory t{g, {}, SiteSet(g), start.z, start.z, 0};
    t.steps.reserve(steps + 1);
    DiscreteWalker w(g, drift, start);
    t.steps.push_back(start);
    t.visited.insert_packed(w.packed());
    for (int64_t i = 0; i < steps; ++i) {
        w.advance(rng);
        t.steps.push_back(w.site());
        t.visited.insert_packed(w.packed());
        t.z_min = std::min(t.z_min, w.z());
        t.z_max = std::max(t.z_max, w.z());
    }
    return t;
}

std::pair<Trajectory, ExcursionSchedule> run_excursions(const CylinderGeom& g, const DriftParams& drift,
                                                        const Region& inner, const Region& outer, int64_t k,
                                                        const Site& start, Rng& rng, int64_t budget_steps) {
    if (k < 1) throw std::invalid_argument("run_excursions: k must be >= 1");
    // inner must sit inside outer; enumerable inner regions are checked
    if (inner.size() <= 1'000'000) {
        for (const Site& s : inner.members())
            if (!outer.contains(s)) throw std::invalid_argument("run_excursions: inner not contained in outer");
    }
    Trajectory t{g, {}, SiteSet(g), start.z, start.z, 0};
    ExcursionSchedule sched;
    sched.inner = inner;
    sched.outer = outer;
    sched.budget = budget_steps;
    DiscreteWalker w(g, drift, start);
    t.steps.push_back(start);
    t.visited.insert_packed(w.packed());

    bool seeking_return = true;
    int64_t n = 0;
    while (true) {
        if (seeking_return) {
            if (inner.contains(w.site())) {
                sched.returns.push_back(n);
                seeking_return = false;
                continue;
            }
        } else {
            if (!outer.contains(w.site())) {
                sched.departures.push_back(n);
                seeking_return = true;
                if (static_cast<int64_t>(sched.departures.size()) >= k) break;
                continue;
            }
        }
        if (n >= budget_steps) {
            sched.budget_exhausted = true;
            break;
        }
        w.advance(rng);
        ++n;
        t.steps.push_back(w.site());
        t.visited.insert_packed(w.packed());
        t.z_min = std::min(t.z_min, w.z());
        t.z_max = std::max(t.z_max, w.z());
    }
    return {std::move(t), std::move(sched)};
}

std::vector<double> ContinuousEmbedding::torus_jump_times() const {
    std::vector<double> out;
    for (const auto& e : events)
        if (e.torus) out.push_back(e.t);
    return out;
}

std::vector<double> ContinuousEmbedding::height_jump_times() const {
    std::vector<double> out;
    for (const auto& e : events)
        if (!e.torus) out.push_back(e.t);
    return out;
}

std::vector<Site> ContinuousEmbedding::skeleton() const {
    std::vector<Site> out;
    out.reserve(events.size() + 1);
    Site s = start;
    out.push_back(s);
    for (const auto& e : events) {
        if (e.torus) {
            s = neighbor(s, geom, e.move);
        } else {
            s.z += e.move;
        }
        out.push_back(s);
    }
    return out;
}

ContinuousEmbedding simulate_embedding(const CylinderGeom& g, const DriftParams& drift, double horizon,
                                       const Site& start, Rng& rng) {
    if (horizon <= 0) throw std::invalid_argument("simulate_embedding: horizon must be > 0");
    ContinuousEmbedding emb{g, drift, start, horizon, {}};
    double t_y = rng.exponential(1.0);
    double t_z = rng.exponential(1.0 / g.d);
    while (true) {
        if (t_y <= t_z) {
            if (t_y > horizon) break;
            emb.events.push_back({t_y, true, static_cast<int>(rng.below(2 * g.d))});
            t_y += rng.exponential(1.0);
        } else {
            if (t_z > horizon) break;
            int dir = rng.bernoulli((1.0 + drift.delta) / 2.0) ? 1 : -1;
            emb.events.push_back({t_z, false, dir});
            t_z += rng.exponential(1.0 / g.d);
        }
    }
    return emb;
}

VisitChainSample visit_chain(const ContinuousEmbedding& emb, int64_t k) {
    if (emb.start.z != 0) throw std::invalid_argument("visit_chain: embedding must start on the height-0 slice");
    const CylinderGeom& g = emb.geom;
    VisitChainSample out;
    out.stop_times.push_back(0.0);
    out.values.push_back(emb.start.u);
    out.torus_jump_counts.push_back(0);

    Site s = emb.start;
    int64_t y_jumps = 0;
    size_t ei = 0;
    double s_prev = 0.0;
    for (int64_t stage = 1; stage <= k; ++stage) {
        // wait for one torus jump strictly after the previous stop
        bool jumped = false;
        double stop = kInfiniteTime;
        while (ei < emb.events.size()) {
            const JumpEvent& e = emb.events[ei++];
            if (e.torus) {
                s = neighbor(s, g, e.move);
                ++y_jumps;
                if (!jumped && e.t > s_prev) jumped = true;
            } else {
                s.z += e.move;
            }
            if (jumped && s.z == 0) {
                stop = e.t;
                break;
            }
        }
        if (stop == kInfiniteTime) {
            out.stop_times.push_back(kInfiniteTime);
            out.exhausted = true;
            break;
        }
        out.stop_times.push_back(stop);
        out.values.push_back(s.u);
        out.torus_jump_counts.push_back(y_jumps);
        s_prev = stop;
    }
    return out;
}

VisitChainSample visit_chain_stream(const CylinderGeom& g, const DriftParams& drift, const Site& start,
                                    int64_t k, double time_budget, Rng& rng) {
    if (start.z != 0) throw std::invalid_argument("visit_chain_stream: start on the height-0 slice");
    VisitChainSample out;
    out.stop_times.push_back(0.0);
    out.values.push_back(start.u);
    out.torus_jump_counts.push_back(0);

    Site s = start;
    int64_t y_jumps = 0;
    double t_y = rng.exponential(1.0);
    double t_z = rng.exponential(1.0 / g.d);
    double s_prev = 0.0;
    for (int64_t stage = 1; stage <= k; ++stage) {
        bool jumped = false;
        double stop = kInfiniteTime;
        while (true) {
            double t = std::min(t_y, t_z);
            if (t > time_budget) break;
            if (t_y <= t_z) {
                s = neighbor(s, g, static_cast<int>(rng.below(2 * g.d)));
                ++y_jumps;
                if (!jumped && t_y > s_prev) jumped = true;
                t_y += rng.exponential(1.0);
            } else {
                s.z += rng.bernoulli((1.0 + drift.delta) / 2.0) ? 1 : -1;
                t_z += rng.exponential(1.0 / g.d);
            }
            if (jumped && s.z == 0) {
                stop = t;
                break;
            }
        }
        if (stop == kInfiniteTime) {
            out.stop_times.push_back(kInfiniteTime);
            out.exhausted = true;
            break;
        }
        out.stop_times.push_back(stop);
        out.values.push_back(s.u);
        out.torus_jump_counts.push_back(y_jumps);
        s_prev = stop;
    }
    return out;
}

double sample_visit_time_sum(const CylinderGeom& g, const DriftParams& drift, int64_t n, Rng& rng,
                             double time_budget) {
    if (n < 0) throw std::invalid_argument("sample_visit_time_sum: n must be >= 0");
    const double z_rate = 1.0 / g.d;
    const double p_up = (1.0 + drift.delta) / 2.0;
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        double sigma = rng.exponential(1.0);
        total += sigma;
        // displacement of an independent height walk over [0, sigma]
        int64_t disp = 0;
        double t = rng.exponential(z_rate);
        while (t <= sigma) {
            disp += rng.bernoulli(p_up) ? 1 : -1;
            t += rng.exponential(z_rate);
        }
        // fresh height walk from 0 run until it hits -disp
        int64_t pos = 0;
        while (pos != -disp) {
            total += rng.exponential(z_rate);
            if (total > time_budget) return kInfiniteTime;
            pos += rng.bernoulli(p_up) ? 1 : -1;
        }
        if (total > time_budget) return kInfiniteTime;
    }
    return total;
}

}  // namespace cylwalk
