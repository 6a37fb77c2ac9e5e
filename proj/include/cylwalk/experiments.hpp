#pragma once

// Experiment orchestration: reproducible replica fan-out, persisted run
// records, and the drivers behind each CLI experiment kind.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cylwalk/isogeom.hpp"
#include "cylwalk/walk.hpp"

namespace cylwalk {

struct ExperimentConfig {
    std::string kind = "tdisc";  // tdisc | ldp | cover | spectral | green | geom-cube | geom-box
    int d = 3;
    std::vector<int> Ns = {4, 6, 8, 10};
    double alpha = 2.0;
    double beta = 1.0;
    int64_t replicas = 200;
    int64_t budget_steps = 20'000'000;
    uint64_t seed = 1;
    double gamma = 0.5;         // l = floor(N^gamma) in the geometry drivers
    double gamma_prime = 0.75;  // L = floor(N^gamma_prime)
    int64_t slab_a = 8;         // slab half-height for the green driver
    double xi = 0.0;            // extra rate-normalization exponent in ldp reports
    std::string fit_coords = "auto";  // loglog | stretched | auto
    std::string out_dir = "out";
    std::string format = "csv";
    bool svg = false;

    // flat key=value text, one pair per line, fixed order; round-trips
    // bit-exactly
    std::string to_kv() const;
    static ExperimentConfig from_kv(const std::string& text);
    std::string fingerprint() const;
};

struct RunRecord {
    ExperimentConfig config;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;  // preformatted cells
    nlohmann::ordered_json summary;
    std::string fingerprint;
};

int worker_count();  // CYLWALK_THREADS when set, hardware concurrency otherwise

struct TdiscOutcome {
    bool censored = true;
    int64_t time = -1;
    int64_t distinct_sites = 0;
    int64_t steps_run = 0;
};

// Exact disconnection time of one replica under a step budget: geometric
// checkpoints, each deciding the exact first index through the reverse
// union-find scan of the first-visit order.
TdiscOutcome simulate_disconnection_time(const CylinderGeom& g, const DriftParams& drift, int64_t budget,
                                         Rng& rng);

RunRecord run_disconnection_experiment(const ExperimentConfig& cfg);
RunRecord run_excursion_experiment(const ExperimentConfig& cfg);
RunRecord run_cover_experiment(const ExperimentConfig& cfg);
RunRecord run_spectral_experiment(const ExperimentConfig& cfg);
RunRecord run_green_experiment(const ExperimentConfig& cfg);
RunRecord run_experiment(const ExperimentConfig& cfg);  // dispatch on kind

// recompute the summary from the stored rows (used when re-ingesting CSV)
void summarize_record(RunRecord& rec);

// ---- synthetic separating surfaces for the geometry pipelines ----------

struct SurfaceBatchItem {
    SurfaceCertificate cert;
    bool validated = false;
    std::vector<std::string> failures;
};

struct SurfaceBatchResult {
    std::vector<SurfaceBatchItem> items;
    int validated_count = 0;
    double min_c_prime = 0.0;
    double min_c_double_prime = 0.0;
    bool plane_counts_exact = false;  // plane-cut inputs give per-cube counts == l^d
};

// Batch of randomized tilted-plane-plus-noise separators of the cube host
// (item 0 is the pure plane cut); every certificate is re-validated.
SurfaceBatchResult run_surface_batch_cube(const CylinderGeom& g, int64_t L, int64_t l, int count, uint64_t seed);
// Flat-box analogue at d*alpha < 1.
SurfaceBatchResult run_surface_batch_box(const CylinderGeom& g, double alpha, int64_t l, int count,
                                         uint64_t seed);

RunRecord run_geom_experiment(const ExperimentConfig& cfg);  // kinds geom-cube / geom-box

}  // namespace cylwalk
