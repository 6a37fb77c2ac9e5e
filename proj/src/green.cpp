#include "cylwalk/green.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cylwalk/walk.hpp"

namespace cylwalk {

KilledDomain::KilledDomain(const CylinderGeom& g, Region region, int64_t slab_a)
    : geom(g), B(std::move(region)), a(slab_a) {
    if (slab_a < 1) throw std::invalid_argument("KilledDomain: slab half-height must be >= 1");
    if (B.size() > 200'000) throw std::invalid_argument("KilledDomain: domain exceeds the exact-solve cap");
    for (const Site& s : B.members())
        if (std::llabs(s.z) > a) throw std::invalid_argument("KilledDomain: B must lie inside the slab");
}

GreenSolver::GreenSolver(const KilledDomain& domain) : domain_(domain) {
    const CylinderGeom& g = domain_.geom;
    SiteSet Bm = domain_.B.member_set();
    sites_ = Bm.sorted_packed();
    for (size_t i = 0; i < sites_.size(); ++i) index_[sites_[i]] = static_cast<int64_t>(i);

    const double p = 1.0 / (2 * g.d + 2);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(sites_.size() * (2 * g.d + 3));
    for (size_t i = 0; i < sites_.size(); ++i) {
        trips.emplace_back(i, i, 1.0);
        Site s = unpack_site(g, sites_[i]);
        for (int m = 0; m < 2 * g.d + 2; ++m) {
            auto it = index_.find(pack_site(g, neighbor(s, g, m)));
            if (it != index_.end()) trips.emplace_back(i, it->second, -p);
        }
    }
    system_.resize(sites_.size(), sites_.size());
    system_.setFromTriplets(trips.begin(), trips.end());
    if (static_cast<int64_t>(sites_.size()) <= 20'000) {
        direct_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        direct_->compute(system_);
        if (direct_->info() != Eigen::Success) throw std::runtime_error("GreenSolver: factorization failed");
    } else {
        cg_ = std::make_unique<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>>();
        cg_->setTolerance(1e-13);
        cg_->setMaxIterations(200'000);
        cg_->compute(system_);
    }
}

Eigen::VectorXd GreenSolver::solve(const Eigen::VectorXd& rhs) const {
    if (direct_) return direct_->solve(rhs);
    Eigen::VectorXd x = cg_->solve(rhs);
    if (cg_->info() != Eigen::Success) throw std::runtime_error("GreenSolver: iteration did not converge");
    return x;
}

int64_t GreenSolver::index_of(const Site& s) const {
    auto it = index_.find(pack_site(domain_.geom, s));
    return it == index_.end() ? -1 : it->second;
}

Eigen::VectorXd GreenSolver::column(const Site& x_prime) const {
    int64_t j = index_of(x_prime);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size());
    if (j < 0) return rhs;
    rhs[j] = 1.0;
    return solve(rhs);
}

double GreenSolver::value(const Site& x, const Site& x_prime) const {
    int64_t i = index_of(x);
    if (i < 0) return 0.0;
    Eigen::VectorXd col = column(x_prime);
    return col[i];
}

double GreenSolver::defining_relation_residual(const Site& x_prime) const {
    int64_t j = index_of(x_prime);
    if (j < 0) throw std::invalid_argument("defining_relation_residual: x' outside the domain");
    Eigen::VectorXd col = column(x_prime);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size());
    rhs[j] = 1.0;
    return (system_ * col - rhs).cwiseAbs().maxCoeff();
}

double GreenSolver::hitting_probability(const std::vector<Site>& A, const Site& x) const {
    const CylinderGeom& g = domain_.geom;
    std::unordered_set<Packed> target;
    for (const Site& s : A) {
        if (index_.find(pack_site(g, s)) == index_.end())
            throw std::invalid_argument("hitting_probability: A must lie inside B");
        target.insert(pack_site(g, s));
    }
    if (target.count(pack_site(g, x))) return 1.0;
    if (index_of(x) < 0) return 0.0;

    // system over B \ A: h - P h = P 1_A contribution
    std::vector<Packed> free_sites;
    std::unordered_map<Packed, int64_t> fidx;
    for (Packed p : sites_) {
        if (target.count(p)) continue;
        fidx[p] = static_cast<int64_t>(free_sites.size());
        free_sites.push_back(p);
    }
    const double p = 1.0 / (2 * g.d + 2);
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free_sites.size());
    for (size_t i = 0; i < free_sites.size(); ++i) {
        trips.emplace_back(i, i, 1.0);
        Site s = unpack_site(g, free_sites[i]);
        for (int m = 0; m < 2 * g.d + 2; ++m) {
            Packed q = pack_site(g, neighbor(s, g, m));
            if (target.count(q)) {
                rhs[i] += p;
            } else {
                auto it = fidx.find(q);
                if (it != fidx.end()) trips.emplace_back(i, it->second, -p);
            }
        }
    }
    Eigen::SparseMatrix<double> M(free_sites.size(), free_sites.size());
    M.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd h;
    if (free_sites.size() <= 20'000) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> s(M);
        h = s.solve(rhs);
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
        cg.setTolerance(1e-13);
        cg.setMaxIterations(200'000);
        cg.compute(M);
        h = cg.solve(rhs);
        if (cg.info() != Eigen::Success) throw std::runtime_error("hitting_probability: iteration did not converge");
    }
    return h[fidx.at(pack_site(g, x))];
}

double green_exact(const KilledDomain& domain, const Site& x, const Site& x_prime) {
    GreenSolver solver(domain);
    return solver.value(x, x_prime);
}

McEstimate green_mc(const KilledDomain& domain, const Site& x, const Site& x_prime, int64_t replicas,
                    uint64_t seed) {
    if (replicas < 1000) throw std::invalid_argument("green_mc: need at least 1000 replicas");
    const CylinderGeom& g = domain.geom;
    DriftParams unbiased{0.0, std::nullopt};
    Packed target = pack_site(g, x_prime);
    double sum = 0.0, sumsq = 0.0;
    for (int64_t r = 0; r < replicas; ++r) {
        Rng rng = Rng::for_replica(seed, static_cast<uint64_t>(r));
        double visits = 0.0;
        DiscreteWalker w(g, unbiased, x);
        while (domain.B.contains(w.site())) {
            if (w.packed() == target) visits += 1.0;
            w.advance(rng);
        }
        sum += visits;
        sumsq += visits * visits;
    }
    McEstimate est;
    est.replicas = replicas;
    est.mean = sum / replicas;
    double var = (sumsq / replicas - est.mean * est.mean) / replicas;
    est.stderr_ = std::sqrt(std::max(0.0, var));
    return est;
}

HittingBound hitting_probability_bound(const std::vector<Site>& A, const GreenSolver& solver, const Site& x) {
    if (A.empty()) throw std::invalid_argument("hitting_probability_bound: A must be nonempty");
    HittingBound out;
    out.lhs = solver.hitting_probability(A, x);

    // numerator: sum_y g(x, y) over A, one backsolve at x by symmetry
    Eigen::VectorXd col_x = solver.column(x);
    double num = 0.0;
    for (const Site& y : A) num += col_x[solver.index_of(y)];

    // denominator: inf over y in A of sum_{y'} g(y, y'), one column per y'
    std::vector<int64_t> idx;
    for (const Site& y : A) idx.push_back(solver.index_of(y));
    double denom = std::numeric_limits<double>::infinity();
    std::vector<double> sums(A.size(), 0.0);
    for (const Site& yp : A) {
        Eigen::VectorXd col = solver.column(yp);
        for (size_t i = 0; i < A.size(); ++i) sums[i] += col[idx[i]];
    }
    for (double s : sums) denom = std::min(denom, s);
    out.rhs = num / denom;
    out.holds = out.lhs <= out.rhs + 1e-10;
    return out;
}

HittingBound hitting_probability_bound(const std::vector<Site>& A, const KilledDomain& domain, const Site& x) {
    GreenSolver solver(domain);
    return hitting_probability_bound(A, solver, x);
}

namespace {

struct Fit {
    double slope, intercept;
};

Fit ols(const std::vector<double>& xs, const std::vector<double>& ys) {
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

}  // namespace

DecayProfile decay_profile(int N, int d, int64_t a) {
    CylinderGeom g{d, N};
    Site origin;
    origin.u.assign(d, 0);
    origin.z = 0;
    KilledDomain dom(g, Region::slab(g, a), a);
    GreenSolver solver(dom);
    Eigen::VectorXd col = solver.column(origin);

    // radial averages over wrapped l-inf shells
    int64_t r_max = std::min<int64_t>(a, g.N / 2);
    std::vector<double> shell_sum(r_max + 1, 0.0);
    std::vector<int64_t> shell_count(r_max + 1, 0);
    const auto& packed = solver.sites();
    for (size_t i = 0; i < packed.size(); ++i) {
        Site s = unpack_site(g, packed[i]);
        int64_t r = linf_dist(g, s, origin);
        if (r <= r_max) {
            shell_sum[r] += col[i];
            ++shell_count[r];
        }
    }

    DecayProfile prof;
    std::vector<double> log_r, log_g;
    int64_t r_near = std::max<int64_t>(2, a / 2);
    for (int64_t r = 1; r <= std::min(r_near, r_max); ++r) {
        double mean = shell_sum[r] / shell_count[r];
        prof.radii.push_back(static_cast<double>(r));
        prof.mean_g.push_back(mean);
        log_r.push_back(std::log(static_cast<double>(r)));
        log_g.push_back(std::log(mean));
    }
    if (log_r.size() < 2) throw std::runtime_error("decay_profile: insufficient dynamic range");
    prof.near_slope = ols(log_r, log_g).slope;

    // vertical far field along the axis
    std::vector<double> zs, log_gz;
    for (int64_t z = a / 2; z < a; ++z) {
        Site s = origin;
        s.z = z;
        double v = col[solver.index_of(s)];
        if (v > 0) {
            zs.push_back(static_cast<double>(z));
            log_gz.push_back(std::log(v));
        }
    }
    if (zs.size() >= 2) prof.far_rate = -ols(zs, log_gz).slope;

    // recorded lower-bound ratio g * r^{d-1} over interior pairs
    int64_t inner = std::max<int64_t>(1, a / 10);
    double ratio_min = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < packed.size(); ++i) {
        Site s = unpack_site(g, packed[i]);
        if (std::llabs(s.z) > a - inner) continue;
        int64_t r = linf_dist(g, s, origin);
        if (r < 1 || r > std::max<int64_t>(1, a / 4)) continue;
        double ratio = col[i] * std::pow(static_cast<double>(r), d - 1);
        ratio_min = std::min(ratio_min, ratio);
    }
    prof.lower_ratio_min = ratio_min;
    return prof;
}

}  // namespace cylwalk
