// Command-line front end: composes the library modules into the experiment
// workflows and emits CSV reports.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "eigenlearn/cli.hpp"
#include "eigenlearn/dataio.hpp"
#include "eigenlearn/version.hpp"

namespace {

using namespace eigenlearn;
using namespace eigenlearn::cli;

void add_kernel_flags(CLI::App* app, KernelOptions& kernel) {
    app->add_option("--kernel", kernel.variant, "relu-ntk | gaussian | laplacian | tabulated");
    app->add_option("--depth", kernel.depth, "NTK hidden-layer count");
    app->add_option("--sigma-w", kernel.sigma_w, "NTK weight scale");
    app->add_option("--sigma-b", kernel.sigma_b, "NTK bias scale");
    app->add_option("--bandwidth", kernel.bandwidth, "Gaussian bandwidth");
    app->add_option("--scale", kernel.scale, "Laplacian scale");
    app->add_option("--jitter", kernel.jitter, "Gram diagonal jitter");
    app->add_option("--profile-file", kernel.profile_file, "two-column angular profile (t, kappa)");
}

void add_domain_flags(CLI::App* app, DomainOptions& domain) {
    app->add_option("--domain", domain.domain, "circle | hypercube | sphere");
    app->add_option("--M", domain.M, "circle cardinality");
    app->add_option("--d", domain.d, "hypercube / sphere dimension");
    app->add_option("--kmax", domain.k_max, "sphere spectrum truncation");
}

int default_workers() {
    if (const char* env = std::getenv("EIGENLEARN_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

// Desk-scale presets reproducing the headline experiment setups.
void apply_simulate_figure(const std::string& name, ExperimentConfig& config) {
    if (name == "fig1a") {
        config.domain = {DomainConfig::Type::Circle, 256, 8, 70};
        config.targets = {TargetSpec::circle_mode(0), TargetSpec::circle_mode(1),
                          TargetSpec::circle_mode(2), TargetSpec::circle_mode(4)};
        config.n_grid = {2, 4, 8, 16, 32, 64, 128, 200};
    } else if (name == "fig1b") {
        config.domain.type = DomainConfig::Type::Hypercube;
        config.domain.d = 8;
        config.targets.clear();
        for (int k = 0; k <= 4; ++k) config.targets.push_back(TargetSpec::hypercube_mode(k));
        config.n_grid = {2, 4, 8, 16, 32, 64, 128, 200};
    } else if (name == "fig1c") {
        config.domain.type = DomainConfig::Type::Sphere;
        config.domain.d = 7;
        config.domain.k_max = 70;
        config.targets = {TargetSpec::sphere_mode(1), TargetSpec::sphere_mode(2)};
        config.n_grid = {8, 16, 32, 64, 128, 256, 400, 512};
    } else if (name == "fig2") {
        config.domain = {DomainConfig::Type::Circle, 10, 8, 70};
        config.targets = {TargetSpec::circle_mode(0)};
        config.n_grid = {2, 5, 8};
        config.trials = 1;
        config.track_conservation = true;
    } else if (name == "fig3") {
        config.domain = {DomainConfig::Type::Circle, 256, 8, 70};
        config.targets = {TargetSpec::circle_mode(1), TargetSpec::circle_mode(10),
                          TargetSpec::circle_mode(40), TargetSpec::circle_mode(100)};
        config.n_grid = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    } else if (name == "figA5") {
        config.domain = {DomainConfig::Type::Circle, 256, 8, 70};
        config.targets = {TargetSpec::circle_mode(1), TargetSpec::circle_mode(2),
                          TargetSpec::circle_mode(5)};
        config.n_grid = {16, 64};
        config.track_msg = true;
    } else {
        throw CLI::ValidationError("--figure", "unknown preset '" + name + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact kernel-regression eigenmode analysis and generalization predictions"};
    app.set_version_flag("--version", eigenlearn::kVersion);
    app.require_subcommand(1);

    // spectrum
    SpectrumOptions spectrum_options;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues and multiplicities of a domain");
    add_domain_flags(spectrum_cmd, spectrum_options.domain);
    add_kernel_flags(spectrum_cmd, spectrum_options.kernel);
    spectrum_cmd->add_option("--output,-o", spectrum_options.output, "spectrum CSV path");
    spectrum_cmd->add_option("--manifest", spectrum_options.manifest, "run manifest path");

    // predict
    PredictOptions predict_options;
    std::string predict_figure;
    auto* predict_cmd = app.add_subcommand("predict", "closed-form learnability/MSE predictions");
    add_domain_flags(predict_cmd, predict_options.domain);
    add_kernel_flags(predict_cmd, predict_options.kernel);
    predict_cmd->add_option("--spectrum-csv", predict_options.spectrum_csv,
                            "read the spectrum from CSV instead of building it");
    predict_cmd->add_option("--targets", predict_options.targets, "target mode levels k");
    predict_cmd->add_option("--n-grid", predict_options.n_grid, "training-set sizes");
    predict_cmd->add_option("--ridge", predict_options.ridge, "ridge parameter");
    predict_cmd->add_flag("--collapse", predict_options.collapse, "emit lambda/C rescaling rows");
    predict_cmd->add_option("--figure", predict_figure, "preset: fig4g");
    predict_cmd->add_option("--output,-o", predict_options.output, "theory CSV path");
    predict_cmd->add_option("--manifest", predict_options.manifest, "run manifest path");

    // simulate
    SimulateOptions simulate_options;
    DomainOptions simulate_domain;
    KernelOptions simulate_kernel;
    std::vector<int> simulate_targets;
    double simulate_noise = 0.0;
    std::string simulate_figure, simulate_config_file;
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo kernel-regression experiments");
    add_domain_flags(simulate_cmd, simulate_domain);
    add_kernel_flags(simulate_cmd, simulate_kernel);
    simulate_cmd->add_option("--config", simulate_config_file, "JSON experiment config");
    simulate_cmd->add_option("--targets", simulate_targets, "target mode levels k");
    simulate_cmd->add_option("--noise-var", simulate_noise, "target noise variance eps^2");
    simulate_cmd->add_option("--n-grid", simulate_options.config.n_grid, "training-set sizes");
    simulate_cmd->add_option("--ridge", simulate_options.config.ridge, "ridge parameter");
    simulate_cmd->add_option("--trials", simulate_options.config.trials, "draws per n");
    simulate_cmd->add_option("--seed", simulate_options.config.seed, "master seed");
    simulate_cmd->add_option("--workers", simulate_options.config.workers, "worker threads");
    simulate_cmd->add_option("--test-size", simulate_options.config.test_size, "sphere test points");
    simulate_cmd->add_flag("--track-ots-mse", simulate_options.config.track_ots_mse);
    simulate_cmd->add_flag("--track-msg", simulate_options.config.track_msg);
    simulate_cmd->add_flag("--track-conservation", simulate_options.config.track_conservation);
    simulate_cmd->add_option("--track-vhat-modes", simulate_options.config.track_vhat_modes);
    simulate_cmd->add_option("--figure", simulate_figure,
                             "preset: fig1a | fig1b | fig1c | fig2 | fig3 | figA5");
    simulate_cmd->add_option("--id", simulate_options.experiment_id, "experiment id column");
    simulate_cmd->add_option("--output,-o", simulate_options.output, "empirical CSV path");
    simulate_cmd->add_option("--manifest", simulate_options.manifest, "run manifest path");

    // compare
    CompareOptions compare_options;
    auto* compare_cmd = app.add_subcommand("compare", "join theory and empirical CSVs with z-scores");
    compare_cmd->add_option("--theory", compare_options.theory_csv, "theory CSV")->required();
    compare_cmd->add_option("--empirical", compare_options.empirical_csv, "empirical CSV")->required();
    compare_cmd->add_option("--z-threshold", compare_options.z_threshold, "gate threshold");
    compare_cmd->add_flag("--no-gate", compare_options.no_gate, "always exit 0 on joined data");
    compare_cmd->add_option("--output,-o", compare_options.output, "report CSV path");
    compare_cmd->add_option("--manifest", compare_options.manifest, "run manifest path");

    // parity
    ParityOptions parity_options;
    auto* parity_cmd = app.add_subcommand("parity", "parity-problem sample-complexity bound");
    parity_cmd->add_option("--d", parity_options.d, "hypercube dimension (odd)");
    parity_cmd->add_option("--epsilon", parity_options.epsilon, "target MSE");
    parity_cmd->add_flag("--empirical", parity_options.empirical, "run the Monte Carlo bound check");
    add_kernel_flags(parity_cmd, parity_options.kernel);
    parity_cmd->add_option("--n-grid", parity_options.n_grid, "training sizes for the check");
    parity_cmd->add_option("--trials", parity_options.trials, "draws per n");
    parity_cmd->add_option("--seed", parity_options.seed, "master seed");
    parity_cmd->add_option("--workers", parity_options.workers, "worker threads");
    parity_cmd->add_option("--output,-o", parity_options.output, "report CSV path");
    parity_cmd->add_option("--manifest", parity_options.manifest, "run manifest path");

    // conservation
    ConservationOptions conservation_options;
    auto* conservation_cmd =
        app.add_subcommand("conservation", "per-mode learnability stack and conservation sums");
    add_domain_flags(conservation_cmd, conservation_options.domain);
    add_kernel_flags(conservation_cmd, conservation_options.kernel);
    conservation_cmd->add_option("--n-grid", conservation_options.n_grid, "training sizes");
    conservation_cmd->add_option("--ridge", conservation_options.ridge, "ridge parameter");
    conservation_cmd->add_option("--trials", conservation_options.trials, "draws per n");
    conservation_cmd->add_option("--seed", conservation_options.seed, "master seed");
    conservation_cmd->add_option("--output,-o", conservation_options.output, "stack CSV path");
    conservation_cmd->add_option("--manifest", conservation_options.manifest, "run manifest path");

    // pipeline
    PipelineOptions pipeline_options;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "empirical-spectrum predictions for a tabular dataset");
    pipeline_cmd->add_option("--data", pipeline_options.data_path, "delimited numeric file")->required();
    pipeline_cmd->add_option("--label-column", pipeline_options.label_column,
                             "label column index (default: last)");
    pipeline_cmd->add_option("--normalization", pipeline_options.normalization,
                             "none | standardize | unit-norm");
    add_kernel_flags(pipeline_cmd, pipeline_options.kernel);
    pipeline_cmd->add_option("--n-grid", pipeline_options.n_grid, "training sizes");
    pipeline_cmd->add_option("--ridge", pipeline_options.ridge, "ridge parameter");
    pipeline_cmd->add_option("--trials", pipeline_options.trials, "draws per n");
    pipeline_cmd->add_option("--seed", pipeline_options.seed, "master seed");
    pipeline_cmd->add_option("--workers", pipeline_options.workers, "worker threads");
    pipeline_cmd->add_option("--max-rows", pipeline_options.max_rows, "eigendecomposition cap");
    pipeline_cmd->add_flag("--allow-large", pipeline_options.allow_large, "override the row cap");
    pipeline_cmd->add_option("--output,-o", pipeline_options.output, "report CSV path");
    pipeline_cmd->add_option("--spectrum-output", pipeline_options.spectrum_output,
                             "also write the empirical spectrum CSV");
    pipeline_cmd->add_option("--manifest", pipeline_options.manifest, "run manifest path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum_cmd->parsed()) return cmd_spectrum(spectrum_options);
        if (predict_cmd->parsed()) {
            if (predict_figure == "fig4g") {
                predict_options.collapse = true;
                if (predict_options.targets.empty()) {
                    predict_options.targets = {0, 1, 2, 3, 4, 5, 6, 7};
                }
                if (predict_options.n_grid.empty()) predict_options.n_grid = {8, 64};
            } else if (!predict_figure.empty()) {
                throw CLI::ValidationError("--figure", "unknown preset '" + predict_figure + "'");
            }
            return cmd_predict(predict_options);
        }
        if (simulate_cmd->parsed()) {
            ExperimentConfig& config = simulate_options.config;
            if (!simulate_config_file.empty()) {
                const auto file_config = load_experiment_config(simulate_config_file);
                const ExperimentConfig defaults;
                // command-line values override file values
                ExperimentConfig merged = file_config;
                if (config.trials != defaults.trials) merged.trials = config.trials;
                if (config.seed != defaults.seed) merged.seed = config.seed;
                if (config.workers != defaults.workers) merged.workers = config.workers;
                if (!config.n_grid.empty()) merged.n_grid = config.n_grid;
                if (config.ridge != defaults.ridge) merged.ridge = config.ridge;
                if (config.test_size != defaults.test_size) merged.test_size = config.test_size;
                merged.track_ots_mse |= config.track_ots_mse;
                merged.track_msg |= config.track_msg;
                merged.track_conservation |= config.track_conservation;
                if (config.track_vhat_modes != 0) merged.track_vhat_modes = config.track_vhat_modes;
                config = merged;
            } else {
                config.domain = simulate_domain.build();
                config.kernel = simulate_kernel.build();
                for (int k : simulate_targets) {
                    TargetSpec t;
                    switch (config.domain.type) {
                        case DomainConfig::Type::Circle: t = TargetSpec::circle_mode(k); break;
                        case DomainConfig::Type::Hypercube: t = TargetSpec::hypercube_mode(k); break;
                        case DomainConfig::Type::Sphere: t = TargetSpec::sphere_mode(k); break;
                    }
                    t.noise_var = simulate_noise;
                    config.targets.push_back(std::move(t));
                }
            }
            if (!simulate_figure.empty()) {
                const KernelSpec kernel = config.kernel;
                apply_simulate_figure(simulate_figure, config);
                config.kernel = kernel;
            }
            if (config.workers == 1) config.workers = default_workers();
            return cmd_simulate(simulate_options);
        }
        if (compare_cmd->parsed()) return cmd_compare(compare_options);
        if (parity_cmd->parsed()) return cmd_parity(parity_options);
        if (conservation_cmd->parsed()) return cmd_conservation(conservation_options);
        if (pipeline_cmd->parsed()) {
            if (pipeline_options.workers == 1) pipeline_options.workers = default_workers();
            return cmd_pipeline(pipeline_options);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
