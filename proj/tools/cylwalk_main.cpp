// Command-line front end: runs the simulation experiments, the geometry
// pipelines and the exponent tables, and re-summarizes persisted runs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "cylwalk/experiments.hpp"
#include "cylwalk/report.hpp"

using namespace cylwalk;

namespace {

struct CliArgs {
    ExperimentConfig cfg;
    std::string config_file;
    // track which flags the user set so file values are only overridden
    // where flags appeared
};

void add_common_flags(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_file) {
    cmd->add_option("--config", config_file, "flat key=value config file; flags override it");
    cmd->add_option("--d", cfg.d, "torus dimension");
    cmd->add_option("--n", cfg.Ns, "torus side(s), repeatable");
    cmd->add_option("--alpha", cfg.alpha, "drift exponent: delta = N^{-d alpha}");
    cmd->add_option("--beta", cfg.beta, "excursion-count exponent");
    cmd->add_option("--replicas", cfg.replicas, "replicas per size");
    cmd->add_option("--budget-steps", cfg.budget_steps, "per-replica step budget");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--gamma", cfg.gamma, "small scale: l = floor(N^gamma)");
    cmd->add_option("--gamma-prime", cfg.gamma_prime, "large scale: L = floor(N^gamma_prime)");
    cmd->add_option("--slab-a", cfg.slab_a, "slab half-height for green runs");
    cmd->add_option("--xi", cfg.xi, "extra rate-normalization exponent for ldp reports");
    cmd->add_option("--fit-coords", cfg.fit_coords, "loglog | stretched | auto");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--format", cfg.format, "csv | json");
    cmd->add_flag("--svg", cfg.svg, "also emit SVG plots");
}

ExperimentConfig finalize_config(CLI::App* cmd, ExperimentConfig flags_cfg, const std::string& config_file,
                                 const std::string& kind) {
    ExperimentConfig cfg = flags_cfg;
    if (!config_file.empty()) {
        std::ifstream f(config_file);
        if (!f) throw CLI::ValidationError("--config", "cannot open " + config_file);
        std::stringstream ss;
        ss << f.rdbuf();
        cfg = ExperimentConfig::from_kv(ss.str());
        // flags override file values
        auto seen = [&](const std::string& name) { return cmd->count(name) > 0; };
        if (seen("--d")) cfg.d = flags_cfg.d;
        if (seen("--n")) cfg.Ns = flags_cfg.Ns;
        if (seen("--alpha")) cfg.alpha = flags_cfg.alpha;
        if (seen("--beta")) cfg.beta = flags_cfg.beta;
        if (seen("--replicas")) cfg.replicas = flags_cfg.replicas;
        if (seen("--budget-steps")) cfg.budget_steps = flags_cfg.budget_steps;
        if (seen("--seed")) cfg.seed = flags_cfg.seed;
        if (seen("--gamma")) cfg.gamma = flags_cfg.gamma;
        if (seen("--gamma-prime")) cfg.gamma_prime = flags_cfg.gamma_prime;
        if (seen("--slab-a")) cfg.slab_a = flags_cfg.slab_a;
        if (seen("--xi")) cfg.xi = flags_cfg.xi;
        if (seen("--fit-coords")) cfg.fit_coords = flags_cfg.fit_coords;
        if (seen("--out")) cfg.out_dir = flags_cfg.out_dir;
        if (seen("--format")) cfg.format = flags_cfg.format;
        if (seen("--svg")) cfg.svg = flags_cfg.svg;
    }
    cfg.kind = kind;
    return cfg;
}

int run_and_emit(const ExperimentConfig& cfg) {
    RunRecord rec = run_experiment(cfg);
    for (const std::string& path : emit_report(rec)) std::cout << "wrote " << path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification lab for cylinder disconnection by a drifted random walk"};
    app.require_subcommand(1);

    struct SubSpec {
        const char* name;
        const char* kind;
        const char* help;
    };
    const std::vector<SubSpec> subs = {
        {"simulate", "tdisc", "disconnection-time runs with exact detection"},
        {"ldp", "ldp", "excursion-disconnection event frequencies (unbiased walk)"},
        {"spectral", "spectral", "visit-chain spectrum cross-checks"},
        {"cover", "cover", "torus cover-time tails vs the spectral bound"},
        {"green", "green", "killed Green function decay profiles"},
    };
    std::vector<ExperimentConfig> cfgs(subs.size() + 1);
    std::vector<std::string> config_files(subs.size() + 1);
    std::vector<CLI::App*> cmds;
    for (size_t i = 0; i < subs.size(); ++i) {
        CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].help);
        add_common_flags(cmd, cfgs[i], config_files[i]);
        cmds.push_back(cmd);
    }

    // geom-verify covers both pipeline hosts
    std::string geom_host = "cube";
    CLI::App* geom = app.add_subcommand("geom-verify", "surface-extraction pipelines on synthetic separators");
    add_common_flags(geom, cfgs[subs.size()], config_files[subs.size()]);
    geom->add_option("--host", geom_host, "cube | flat-box");

    int exp_d = 3, exp_grid = 999;
    std::string exp_out = "out";
    bool exp_svg = false;
    CLI::App* expc = app.add_subcommand("exponents", "exponent tables and identity checks");
    expc->add_option("--d", exp_d, "base dimension (>= 3)");
    expc->add_option("--grid", exp_grid, "alpha grid points");
    expc->add_option("--out", exp_out, "output directory");
    expc->add_flag("--svg", exp_svg, "also emit the band figure");

    std::string report_in, report_out = "out";
    bool report_svg = false;
    CLI::App* repc = app.add_subcommand("report", "re-ingest a CSV record and regenerate its summary");
    repc->add_option("--in", report_in, "input CSV path")->required();
    repc->add_option("--out", report_out, "output directory");
    repc->add_flag("--svg", report_svg, "also emit plots");

    CLI11_PARSE(app, argc, argv);

    try {
        for (size_t i = 0; i < subs.size(); ++i) {
            if (cmds[i]->parsed())
                return run_and_emit(finalize_config(cmds[i], cfgs[i], config_files[i], subs[i].kind));
        }
        if (geom->parsed()) {
            std::string kind = geom_host == "cube" ? "geom-cube" : "geom-box";
            return run_and_emit(finalize_config(geom, cfgs[subs.size()], config_files[subs.size()], kind));
        }
        if (expc->parsed()) {
            ExponentTable table = make_exponent_table(exp_d, exp_grid);
            for (const std::string& path : emit_exponent_report(table, exp_out, exp_svg))
                std::cout << "wrote " << path << "\n";
            return 0;
        }
        if (repc->parsed()) {
            RunRecord rec = read_csv(report_in);
            summarize_record(rec);
            rec.config.out_dir = report_out;
            rec.config.svg = report_svg;
            std::string base = report_out + "/" + rec.config.kind;
            std::filesystem::create_directories(report_out);
            write_json_summary(rec, base + ".json");
            std::cout << "wrote " << base << ".json\n";
            if (report_svg) {
                write_record_svg(rec, base + ".svg");
                std::cout << "wrote " << base << ".svg\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
