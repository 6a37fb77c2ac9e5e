#include "cylwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cylwalk {

Spectrum torus_spectrum(int N, int d) {
    if (N < 2 || d < 1) throw std::invalid_argument("torus_spectrum: need N >= 2, d >= 1");
    int64_t total = 1;
    for (int i = 0; i < d; ++i) {
        total *= N;
        if (total > 1'000'000) throw std::invalid_argument("torus_spectrum: state space too large");
    }
    Spectrum s;
    s.values.reserve(total);
    std::vector<int> k(d, 0);
    while (true) {
        double lam = 0.0;
        for (int i = 0; i < d; ++i) lam += std::cos(2.0 * std::numbers::pi * k[i] / N);
        s.values.push_back(lam / d);
        int axis = 0;
        while (axis < d) {
            if (++k[axis] < N) break;
            k[axis] = 0;
            ++axis;
        }
        if (axis == d) break;
    }
    std::sort(s.values.begin(), s.values.end(), std::greater<>());
    return s;
}

Eigen::MatrixXd torus_transition_matrix(int N, int d) {
    CylinderGeom g{d, N};
    int64_t T = g.torus_count();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(T, T);
    std::vector<int64_t> strides(d);
    int64_t s = 1;
    for (int i = 0; i < d; ++i) {
        strides[i] = s;
        s *= N;
    }
    for (int64_t idx = 0; idx < T; ++idx) {
        for (int i = 0; i < d; ++i) {
            int c = static_cast<int>((idx / strides[i]) % N);
            int64_t up = (c + 1 == N) ? idx - strides[i] * (N - 1) : idx + strides[i];
            int64_t dn = (c == 0) ? idx + strides[i] * (N - 1) : idx - strides[i];
            P(idx, up) += 1.0 / (2 * d);
            P(idx, dn) += 1.0 / (2 * d);
        }
    }
    return P;
}

double u_of_spectrum(const Spectrum& spec) {
    if (spec.values.size() < 2) throw std::invalid_argument("u_of_spectrum: need at least two states");
    if (std::abs(spec.values[0] - 1.0) > 1e-9) throw std::invalid_argument("u_of_spectrum: lambda_1 must be 1");
    if (spec.values[1] > 1.0 - 1e-12) throw std::invalid_argument("u_of_spectrum: eigenvalue 1 repeated (reducible chain)");
    double u = 0.0;
    for (size_t m = 1; m < spec.values.size(); ++m) u += 1.0 / (1.0 - spec.values[m]);
    return u;
}

double cover_tail_bound(double u, int64_t G_size, int64_t n) {
    if (u <= 0 || n < 1) throw std::invalid_argument("cover_tail_bound: need u > 0, n >= 1");
    double expo = std::floor(static_cast<double>(n) / (4.0 * std::numbers::e * u));
    return static_cast<double>(G_size) * std::exp(-expo);
}

Eigen::MatrixXd mean_hitting_times(const Eigen::MatrixXd& P) {
    const int64_t n = P.rows();
    // fundamental matrix with the uniform stationary law (rows and columns
    // of P sum to 1 here)
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - P;
    A.array() += 1.0 / static_cast<double>(n);
    Eigen::MatrixXd Z = A.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd H(n, n);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < n; ++j) H(i, j) = static_cast<double>(n) * (Z(j, j) - Z(i, j));
    return H;
}

ChainAnalysis eigentime_maxhit_check(const Eigen::MatrixXd& P) {
    const int64_t n = P.rows();
    if (n != P.cols() || n < 2) throw std::invalid_argument("eigentime_maxhit_check: square matrix of size >= 2");
    if (n > 4000) throw std::invalid_argument("eigentime_maxhit_check: size cap 4000 exceeded");
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("eigentime_maxhit_check: chain must be symmetric");
    for (int64_t i = 0; i < n; ++i)
        if (std::abs(P.row(i).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("eigentime_maxhit_check: rows must sum to 1");
    // irreducibility via reachability
    {
        std::vector<char> vis(n, 0);
        std::vector<int64_t> stack{0};
        vis[0] = 1;
        while (!stack.empty()) {
            int64_t v = stack.back();
            stack.pop_back();
            for (int64_t w = 0; w < n; ++w)
                if (!vis[w] && P(v, w) > 0) {
                    vis[w] = 1;
                    stack.push_back(w);
                }
        }
        for (char c : vis)
            if (!c) throw std::invalid_argument("eigentime_maxhit_check: chain not irreducible");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    Spectrum spec;
    spec.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::sort(spec.values.begin(), spec.values.end(), std::greater<>());
    // the top eigenvalue of a stochastic matrix is 1 up to roundoff
    spec.values[0] = 1.0;

    ChainAnalysis out;
    out.size = n;
    out.u = u_of_spectrum(spec);
    Eigen::MatrixXd H = mean_hitting_times(P);
    out.max_hit = H.maxCoeff();
    out.sym_residual = (H - H.transpose()).cwiseAbs().maxCoeff();
    if (out.sym_residual > 1e-6 * std::max(1.0, out.max_hit))
        throw std::runtime_error("eigentime_maxhit_check: hitting-time symmetry violated");
    out.slack = 2.0 * out.u - out.max_hit;
    out.inequality_holds = out.max_hit <= 2.0 * out.u + 1e-9 * std::max(1.0, out.u);
    return out;
}

namespace {

struct VisitDraw {
    int start_idx;     // torus index of the starting point
    int end_idx;       // torus index at the first relaxed visit
    int64_t jumps;     // torus jumps until then
    bool finite;
};

VisitDraw draw_visit(const CylinderGeom& g, const DriftParams& drift, int64_t start_idx, double budget, Rng& rng) {
    Site start;
    start.u.resize(g.d);
    int64_t idx = start_idx;
    for (int i = 0; i < g.d; ++i) {
        start.u[i] = static_cast<int>(idx % g.N);
        idx /= g.N;
    }
    start.z = 0;
    VisitChainSample chain = visit_chain_stream(g, drift, start, 1, budget, rng);
    VisitDraw out;
    out.start_idx = static_cast<int>(start_idx);
    out.finite = chain.stop_times.size() > 1 && chain.stop_times[1] != kInfiniteTime;
    if (out.finite) {
        int64_t e = 0;
        for (int i = g.d - 1; i >= 0; --i) e = e * g.N + chain.values[1][i];
        out.end_idx = static_cast<int>(e);
        out.jumps = chain.torus_jump_counts[1];
    } else {
        out.end_idx = -1;
        out.jumps = 0;
    }
    return out;
}

}  // namespace

VisitKernelEstimate estimate_visit_kernel(int N, int d, double delta, int64_t replicas, double time_budget,
                                          uint64_t seed) {
    CylinderGeom g{d, N};
    int64_t T = g.torus_count();
    if (T > 10'000) throw std::invalid_argument("estimate_visit_kernel: torus too large");
    if (replicas < 10'000) throw std::invalid_argument("estimate_visit_kernel: need at least 10^4 replicas");
    DriftParams drift{delta, std::nullopt};

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(T, T);
    int64_t finite = 0;
    for (int64_t r = 0; r < replicas; ++r) {
        Rng rng = Rng::for_replica(seed, static_cast<uint64_t>(r));
        VisitDraw v = draw_visit(g, drift, r % T, time_budget, rng);
        if (v.finite) {
            counts(v.start_idx, v.end_idx) += 1.0;
            ++finite;
        }
    }
    if (finite < 100)
        throw std::runtime_error("estimate_visit_kernel: too few finite samples; raise the budget or lower the drift");
    VisitKernelEstimate out;
    out.total_samples = replicas;
    out.finite_samples = finite;
    out.finite_fraction = static_cast<double>(finite) / replicas;
    out.truncation_tail = 1.0 - out.finite_fraction;
    out.p = Eigen::MatrixXd::Zero(T, T);
    for (int64_t i = 0; i < T; ++i) {
        double rowsum = counts.row(i).sum();
        if (rowsum > 0) out.p.row(i) = counts.row(i) / rowsum;
    }
    return out;
}

namespace {

// The visit kernel is a symmetric circulant on the torus, so the estimate
// averages transition counts over displacements and symmetrizes v <-> -v.
// The result is doubly stochastic: its top eigenvalue is exactly 1.
std::vector<double> circulant_spectrum(const CylinderGeom& g, const std::vector<VisitDraw>& draws) {
    const int64_t T = g.torus_count();
    std::vector<double> kernel(T, 0.0);
    std::vector<int64_t> strides(g.d);
    int64_t st = 1;
    for (int i = 0; i < g.d; ++i) {
        strides[i] = st;
        st *= g.N;
    }
    auto displacement = [&](int64_t from, int64_t to) {
        int64_t idx = 0;
        for (int i = 0; i < g.d; ++i) {
            int64_t a = (from / strides[i]) % g.N, b = (to / strides[i]) % g.N;
            idx += strides[i] * ((b - a + g.N) % g.N);
        }
        return idx;
    };
    for (const auto& v : draws) kernel[displacement(v.start_idx, v.end_idx)] += 1.0;
    for (double& k : kernel) k /= static_cast<double>(draws.size());
    // symmetrize over v <-> -v
    std::vector<double> sym(T, 0.0);
    for (int64_t v = 0; v < T; ++v) {
        int64_t neg = 0;
        for (int i = 0; i < g.d; ++i) {
            int64_t c = (v / strides[i]) % g.N;
            neg += strides[i] * ((g.N - c) % g.N);
        }
        sym[v] = 0.5 * (kernel[v] + kernel[neg]);
    }
    Eigen::MatrixXd M(T, T);
    for (int64_t a = 0; a < T; ++a)
        for (int64_t b = 0; b < T; ++b) M(a, b) = sym[displacement(a, b)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + T);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

}  // namespace

std::vector<SpectrumResidualRow> visit_spectrum_residuals(int N, int d, double delta, int64_t replicas,
                                                          double time_budget, uint64_t seed, int bootstrap_rounds) {
    CylinderGeom g{d, N};
    const int64_t T = g.torus_count();
    DriftParams drift{delta, std::nullopt};

    // independent streams for the two estimators
    const uint64_t seed_kernel = splitmix64(seed ^ 0x6b65726e656cull);
    const uint64_t seed_expo = splitmix64(seed ^ 0x6578706full);

    // estimator 1: spectrum of the empirical kernel, with bootstrap errors
    std::vector<VisitDraw> draws;
    draws.reserve(replicas);
    for (int64_t r = 0; r < replicas; ++r) {
        Rng rng = Rng::for_replica(seed_kernel, static_cast<uint64_t>(r));
        VisitDraw v = draw_visit(g, drift, r % T, time_budget, rng);
        if (v.finite) draws.push_back(v);
    }
    if (static_cast<int64_t>(draws.size()) < 100)
        throw std::runtime_error("visit_spectrum_residuals: too few finite samples");

    auto kernel_spectrum = [&](const std::vector<VisitDraw>& ds) { return circulant_spectrum(g, ds); };
    std::vector<double> lam_pv = kernel_spectrum(draws);

    // bootstrap over replica draws
    std::vector<std::vector<double>> boot(bootstrap_rounds);
    Rng brng(splitmix64(seed ^ 0x626f6f74ull));
    for (int b = 0; b < bootstrap_rounds; ++b) {
        std::vector<VisitDraw> resampled(draws.size());
        for (size_t i = 0; i < draws.size(); ++i) resampled[i] = draws[brng.below(draws.size())];
        boot[b] = kernel_spectrum(resampled);
    }
    std::vector<double> se_pv(T, 0.0);
    for (int64_t m = 0; m < T; ++m) {
        double mean = 0.0;
        for (const auto& b : boot) mean += b[m];
        mean /= bootstrap_rounds;
        double var = 0.0;
        for (const auto& b : boot) var += (b[m] - mean) * (b[m] - mean);
        se_pv[m] = std::sqrt(var / std::max(1, bootstrap_rounds - 1));
    }

    // estimator 2: direct Monte Carlo of E[lambda^jumps | visit completed]
    std::vector<int64_t> jump_samples;
    jump_samples.reserve(replicas);
    for (int64_t r = 0; r < replicas; ++r) {
        Rng rng = Rng::for_replica(seed_expo, static_cast<uint64_t>(r));
        VisitDraw v = draw_visit(g, drift, 0, time_budget, rng);
        if (v.finite) jump_samples.push_back(v.jumps);
    }

    Spectrum torus = torus_spectrum(N, d);
    // group equal torus eigenvalues; spectra are compared group-by-group
    std::vector<SpectrumResidualRow> rows;
    size_t m = 0;
    while (m < torus.values.size()) {
        size_t end = m;
        while (end < torus.values.size() && std::abs(torus.values[end] - torus.values[m]) < 1e-12) ++end;
        SpectrumResidualRow row;
        row.lambda_y = torus.values[m];
        row.multiplicity = static_cast<int>(end - m);
        double pv = 0.0, pv_se2 = 0.0;
        for (size_t i = m; i < end; ++i) {
            pv += lam_pv[i];
            pv_se2 += se_pv[i] * se_pv[i];
        }
        row.lambda_pv = pv / row.multiplicity;
        row.se_pv = std::sqrt(pv_se2) / row.multiplicity;

        double mean = 0.0;
        for (int64_t j : jump_samples) mean += std::pow(row.lambda_y, static_cast<double>(j));
        mean /= static_cast<double>(jump_samples.size());
        double var = 0.0;
        for (int64_t j : jump_samples) {
            double x = std::pow(row.lambda_y, static_cast<double>(j)) - mean;
            var += x * x;
        }
        row.lambda_mc = mean;
        row.se_mc = std::sqrt(var / std::max<int64_t>(1, jump_samples.size() - 1) /
                              static_cast<double>(jump_samples.size()));
        row.residual = row.lambda_pv - row.lambda_mc;
        row.sigma = std::sqrt(row.se_pv * row.se_pv + row.se_mc * row.se_mc);
        rows.push_back(row);
        m = end;
    }
    return rows;
}

}  // namespace cylwalk
