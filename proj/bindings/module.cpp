// Python bindings for the main operations: exponent functions, lattice
// queries, walk simulation, disconnection decisions, spectra, Green
// functions, and the experiment drivers.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cylwalk/connectivity.hpp"
#include "cylwalk/experiments.hpp"
#include "cylwalk/exponents.hpp"
#include "cylwalk/girsanov.hpp"
#include "cylwalk/green.hpp"
#include "cylwalk/spectral.hpp"

namespace py = pybind11;
using namespace cylwalk;

namespace {

Site make_site(const std::pair<std::vector<int>, int64_t>& p, const CylinderGeom& g) {
    if (static_cast<int>(p.first.size()) != g.d) throw std::invalid_argument("site has wrong torus dimension");
    Site s;
    s.u.reserve(g.d);
    for (int c : p.first) s.u.push_back(reduce_mod(c, g.N));
    s.z = p.second;
    return s;
}

SiteSet make_set(const std::vector<std::pair<std::vector<int>, int64_t>>& pts, const CylinderGeom& g) {
    SiteSet out(g);
    for (const auto& p : pts) out.insert(make_site(p, g));
    return out;
}

}  // namespace

PYBIND11_MODULE(_cylwalk, m) {
    m.doc() = "disconnection of a discrete cylinder by a drifted random walk: simulation lab bindings";

    // exponent functions
    m.def("alpha_star", &alpha_star, py::arg("d"));
    m.def("phi", &phi, py::arg("alpha"), py::arg("d"));
    m.def("ldp_rate", &ldp_rate, py::arg("alpha"), py::arg("beta"), py::arg("d"));
    m.def("cover_ldp_rate", &cover_ldp_rate, py::arg("alpha"), py::arg("beta"), py::arg("d"));
    m.def("zeta", &zeta, py::arg("alpha"), py::arg("d"));
    m.def("exponent_identity_residual", &exponent_identity_residual, py::arg("d"), py::arg("grid_points") = 999);

    // lattice / walk basics
    m.def(
        "neighbors",
        [](const std::vector<int>& u, int64_t z, int d, int N) {
            CylinderGeom g{d, N};
            g.validate();
            Site s = make_site({u, z}, g);
            std::vector<std::pair<std::vector<int>, int64_t>> out;
            for (const Site& n : neighbors(s, g)) out.push_back({n.u, n.z});
            return out;
        },
        py::arg("u"), py::arg("z"), py::arg("d"), py::arg("N"));
    m.def(
        "drift_from_alpha", [](int N, int d, double alpha) { return drift_from_alpha(N, d, alpha).delta; },
        py::arg("N"), py::arg("d"), py::arg("alpha"));
    m.def(
        "path_weight",
        [](const std::vector<std::pair<std::vector<int>, int64_t>>& path, double delta, int d, int N) {
            CylinderGeom g{d, N};
            g.validate();
            std::vector<Site> sites;
            for (const auto& p : path) sites.push_back(make_site(p, g));
            LogWeight w = path_weight(g, sites, delta);
            return py::make_tuple(w.value(), w.up_steps, w.down_steps);
        },
        py::arg("path"), py::arg("delta"), py::arg("d"), py::arg("N"));

    // connectivity
    m.def(
        "disconnects_cylinder",
        [](const std::vector<std::pair<std::vector<int>, int64_t>>& damaged, int d, int N) {
            CylinderGeom g{d, N};
            g.validate();
            return disconnects_cylinder(make_set(damaged, g), g).disconnects;
        },
        py::arg("damaged"), py::arg("d"), py::arg("N"));
    m.def(
        "disconnection_time_of_path",
        [](const std::vector<std::pair<std::vector<int>, int64_t>>& path, int d,
           int N) -> std::optional<int64_t> {
            CylinderGeom g{d, N};
            g.validate();
            Trajectory t;
            t.geom = g;
            t.visited = SiteSet(g);
            for (const auto& p : path) {
                t.steps.push_back(make_site(p, g));
                t.visited.insert(t.steps.back());
            }
            return disconnection_time(t);
        },
        py::arg("path"), py::arg("d"), py::arg("N"));
    m.def(
        "simulate_disconnection_time",
        [](int d, int N, double alpha, int64_t budget_steps, uint64_t seed, uint64_t replica) {
            CylinderGeom g{d, N};
            g.validate();
            DriftParams drift = drift_from_alpha(N, d, alpha);
            Rng rng = Rng::for_replica(seed, replica);
            TdiscOutcome out = simulate_disconnection_time(g, drift, budget_steps, rng);
            py::dict r;
            r["censored"] = out.censored;
            r["time"] = out.censored ? py::object(py::none()) : py::object(py::int_(out.time));
            r["distinct_sites"] = out.distinct_sites;
            r["steps_run"] = out.steps_run;
            return r;
        },
        py::arg("d"), py::arg("N"), py::arg("alpha"), py::arg("budget_steps"), py::arg("seed"),
        py::arg("replica") = 0);

    // spectra and green functions
    m.def(
        "torus_spectrum", [](int N, int d) { return torus_spectrum(N, d).values; }, py::arg("N"), py::arg("d"));
    m.def(
        "eigentime_u", [](int N, int d) { return u_of_spectrum(torus_spectrum(N, d)); }, py::arg("N"),
        py::arg("d"));
    m.def("cover_tail_bound", &cover_tail_bound, py::arg("u"), py::arg("state_count"), py::arg("n"));
    m.def(
        "green_slab",
        [](int d, int N, int64_t a, const std::pair<std::vector<int>, int64_t>& x,
           const std::pair<std::vector<int>, int64_t>& x_prime) {
            CylinderGeom g{d, N};
            g.validate();
            KilledDomain dom(g, Region::slab(g, a), a);
            return green_exact(dom, make_site(x, g), make_site(x_prime, g));
        },
        py::arg("d"), py::arg("N"), py::arg("a"), py::arg("x"), py::arg("x_prime"));

    // experiment drivers: flat key=value config in, JSON summary out
    m.def(
        "run_experiment_kv",
        [](const std::string& kv) {
            RunRecord rec = run_experiment(ExperimentConfig::from_kv(kv));
            return rec.summary.dump();
        },
        py::arg("config_kv"), "run an experiment from flat key=value text and return the summary as JSON");
}
