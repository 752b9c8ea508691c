#include "eigenlearn/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "eigenlearn/csvio.hpp"
#include "eigenlearn/dataio.hpp"
#include "eigenlearn/regression.hpp"
#include "eigenlearn/spectrum.hpp"
#include "eigenlearn/theory.hpp"
#include "eigenlearn/version.hpp"

namespace eigenlearn::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
    Clock::time_point start = Clock::now();
    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

LevelSpectrum build_level_spectrum(const DomainOptions& domain, const KernelSpec& kernel) {
    if (domain.domain == "circle") return circle_spectrum(kernel, domain.M);
    if (domain.domain == "hypercube") return hypercube_spectrum(kernel, domain.d);
    if (domain.domain == "sphere") return sphere_spectrum(kernel, domain.d, domain.k_max);
    throw std::runtime_error("unknown domain '" + domain.domain + "'");
}

}  // namespace

KernelSpec KernelOptions::build() const {
    KernelSpec spec;
    if (variant == "relu-ntk") {
        spec = KernelSpec::relu_ntk(depth, sigma_w, sigma_b);
    } else if (variant == "gaussian") {
        spec = KernelSpec::gaussian(bandwidth);
    } else if (variant == "laplacian") {
        spec = KernelSpec::laplacian(scale);
    } else if (variant == "tabulated") {
        spec = KernelSpec::tabulated(load_tabulated_profile(profile_file));
    } else {
        throw std::runtime_error("unknown kernel variant '" + variant + "'");
    }
    spec.jitter = jitter;
    return spec;
}

DomainConfig DomainOptions::build() const {
    DomainConfig config;
    if (domain == "circle") {
        config.type = DomainConfig::Type::Circle;
        config.M = M;
    } else if (domain == "hypercube") {
        config.type = DomainConfig::Type::Hypercube;
        config.d = d;
    } else if (domain == "sphere") {
        config.type = DomainConfig::Type::Sphere;
        config.d = d;
        config.k_max = k_max;
    } else {
        throw std::runtime_error("unknown domain '" + domain + "'");
    }
    return config;
}

void write_manifest(const ManifestInfo& info, double elapsed_seconds) {
    nlohmann::json j;
    j["artifact_version"] = kVersion;
    j["command"] = info.command;
    j["seed"] = info.seed;
    j["outputs"] = info.outputs;
    j["wall_seconds"] = elapsed_seconds;
    if (!info.config_json.empty()) j["config"] = nlohmann::json::parse(info.config_json);
    std::string path = info.manifest_path;
    if (path.empty()) {
        path = info.outputs.empty() ? "run_manifest.json" : info.outputs.front() + ".manifest.json";
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
    out << j.dump(2) << '\n';
}

int cmd_spectrum(const SpectrumOptions& options) {
    Timer timer;
    const KernelSpec kernel = options.kernel.build();
    const LevelSpectrum levels = build_level_spectrum(options.domain, kernel);
    const Spectrum spectrum = levels.weighted();
    write_spectrum_csv(spectrum, options.output);
    if (!levels.quadrature_converged) {
        std::cerr << "spectrum: quadrature relative change " << levels.quadrature_rel_change
                  << " exceeds 1e-8 when doubling nodes\n";
    }
    write_manifest({"spectrum", options.manifest, {options.output}, 0, ""}, timer.elapsed());
    return 0;
}

int cmd_predict(const PredictOptions& options) {
    Timer timer;
    Spectrum spectrum;
    Spectrum truncation_probe;  // sphere spectrum at twice the truncation
    LevelSpectrum::DomainKind kind = LevelSpectrum::DomainKind::Circle;
    bool have_domain = false;
    if (!options.spectrum_csv.empty()) {
        spectrum = read_spectrum_csv(options.spectrum_csv);
    } else {
        const KernelSpec kernel = options.kernel.build();
        const LevelSpectrum levels = build_level_spectrum(options.domain, kernel);
        spectrum = levels.weighted();
        kind = levels.kind;

        have_domain = true;
        if (kind == LevelSpectrum::DomainKind::Sphere) {
            truncation_probe =
                sphere_spectrum(kernel, options.domain.d, 2 * options.domain.k_max).weighted();
        }
    }

    std::vector<LongRow> rows;
    const std::string id = "predict";
    for (int n : options.n_grid) {
        const TheoryConstants constants = solve_constants(spectrum, n, options.ridge);
        rows.push_back({id, "", n, "C", {}, {}, {}, {}, constants.C});
        rows.push_back({id, "", n, "q", {}, {}, {}, {}, constants.q});
        rows.push_back({id, "", n, "overfit_threshold", {}, {}, {}, {},
                        overfit_threshold(spectrum, options.ridge)});
        rows.push_back(
            {id, "all-modes", n, "conservation_sum", {}, {}, {}, {}, constants.sum_learnability});
        if (truncation_probe.size() > 0 && n > 0) {
            // truncation sensitivity: relative change of C when k_max doubles
            const TheoryConstants doubled = solve_constants(truncation_probe, n, options.ridge);
            const double rel = std::isinf(constants.C)
                                   ? 0.0
                                   : std::abs(doubled.C - constants.C) / std::max(constants.C, 1e-300);
            rows.push_back({id, "", n, "C_truncation_rel_change", {}, {}, {}, {}, rel});
        }

        for (int k : options.targets) {
            Spectrum with_target = spectrum;
            ModeLabel label;
            label.k = k;
            label.family = !have_domain ? ModeLabel::Family::Empirical
                           : kind == LevelSpectrum::DomainKind::Sphere
                               ? ModeLabel::Family::SphereHarmonic
                           : kind == LevelSpectrum::DomainKind::Hypercube
                               ? ModeLabel::Family::HypercubeParity
                           : (k == 0 ? ModeLabel::Family::CircleConstant : ModeLabel::Family::CircleCos);
            const std::size_t entry = with_target.attach_target(label);
            const std::vector<double> mode_lrn = all_learnabilities(with_target, constants);
            // target keys match the simulate naming so compare can join
            std::string target = "k" + std::to_string(k);
            if (have_domain) {
                switch (kind) {
                    case LevelSpectrum::DomainKind::Circle:
                        target = TargetSpec::circle_mode(k).name;
                        break;
                    case LevelSpectrum::DomainKind::Hypercube:
                        target = TargetSpec::hypercube_mode(k).name;
                        break;
                    case LevelSpectrum::DomainKind::Sphere:
                        target = TargetSpec::sphere_mode(k).name;
                        break;
                }
            }

            rows.push_back({id, target, n, "learnability", {}, {}, {}, {}, mode_lrn[entry]});
            const MsePrediction mse = predict_mse(with_target, mode_lrn, constants);
            rows.push_back({id, target, n, "mse", {}, {}, {}, {},
                            mse.divergent ? std::optional<double>{} : std::optional<double>{mse.value}});
            rows.push_back({id, target, n, "mse_divergent", {}, {}, {}, {},
                            mse.divergent ? 1.0 : 0.0});
            rows.push_back({id, target, n, "mse_lower_bound", {}, {}, {}, {},
                            mse_lower_bound(mode_lrn[entry], 1.0)});
            if (n > 0 && !std::isinf(constants.C)) {
                const std::vector<double> rates = learnability_rate(with_target, constants);
                rows.push_back({id, target, n, "dLdn", {}, {}, {}, {}, rates[entry]});
            }
            rows.push_back({id, target, n, "mse_slope_n0", {}, {}, {}, {},
                            mse_slope_at_zero(with_target, options.ridge, entry)});
            if (options.collapse && !std::isinf(constants.C) && constants.C > 0.0) {
                rows.push_back({id, target, n, "lambda_over_C", {}, {}, {}, {},
                                with_target.eigenvalues[entry] / constants.C});
            }
        }
    }
    write_long_csv(rows, options.output);
    write_manifest({"predict", options.manifest, {options.output}, 0, ""}, timer.elapsed());
    return 0;
}

int cmd_simulate(const SimulateOptions& options) {
    Timer timer;
    const AggregateStats stats = run_experiment(options.config);
    write_long_csv(to_long_rows(stats, options.experiment_id), options.output);
    write_manifest({"simulate", options.manifest, {options.output}, options.config.seed,
                    experiment_config_json(options.config)},
                   timer.elapsed());
    return 0;
}

int cmd_compare(const CompareOptions& options) {
    Timer timer;
    const auto theory_rows = read_long_csv(options.theory_csv);
    const auto empirical_rows = read_long_csv(options.empirical_csv);

    struct Key {
        std::string target;
        int n;
        std::string quantity;
        bool operator<(const Key& o) const {
            return std::tie(target, n, quantity) < std::tie(o.target, o.n, o.quantity);
        }
    };

    std::map<Key, double> theory;
    std::set<std::string> theory_quantities;
    for (const auto& r : theory_rows) {
        if (r.theory) {
            theory[{r.target, r.n, r.quantity}] = *r.theory;
            theory_quantities.insert(r.quantity);
        }
    }

    std::vector<LongRow> report;
    std::vector<std::string> missing;
    std::set<Key> matched;
    int failures = 0;
    for (const auto& r : empirical_rows) {
        if (!r.mean) continue;
        const Key key{r.target, r.n, r.quantity};
        const auto it = theory.find(key);
        if (it == theory.end()) {
            missing.push_back("empirical without theory: " + r.target + "/n=" + std::to_string(r.n) +
                              "/" + r.quantity);
            continue;
        }
        matched.insert(key);
        const double diff = std::abs(*r.mean - it->second);
        double z;
        if (r.std_err && *r.std_err > 0.0) {
            z = diff / *r.std_err;
        } else {
            z = diff < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        LongRow row = r;
        row.experiment_id = "compare";
        row.theory = it->second;
        row.quantity = r.quantity + ":z";
        row.mean = z;
        report.push_back(row);
        if (z >= options.z_threshold) ++failures;
    }
    for (const auto& [key, value] : theory) {
        (void)value;
        bool joinable = false;
        for (const auto& r : empirical_rows) {
            if (r.quantity == key.quantity && r.mean) {
                joinable = true;
                break;
            }
        }
        if (joinable && !matched.count(key)) {
            missing.push_back("theory without empirical: " + key.target + "/n=" +
                              std::to_string(key.n) + "/" + key.quantity);
        }
    }

    if (!missing.empty()) {
        std::cerr << "compare: mismatched join keys:\n";
        for (const auto& m : missing) std::cerr << "  " << m << '\n';
        return 2;
    }

    write_long_csv(report, options.output);
    write_manifest({"compare", options.manifest, {options.output}, 0, ""}, timer.elapsed());
    std::cout << "compare: " << report.size() << " joined cells, " << failures << " above z="
              << options.z_threshold << '\n';
    if (failures > 0 && !options.no_gate) return 1;
    return 0;
}

int cmd_parity(const ParityOptions& options) {
    Timer timer;
    std::vector<LongRow> rows;
    const ParityBound bound = parity_bound(options.d, options.epsilon);
    rows.push_back({"parity", "full-parity", 0, "n_min", {}, {}, {}, {},
                    static_cast<double>(bound.n_min)});
    rows.push_back({"parity", "full-parity", 0, "learnability_cap_at_n_min", {}, {}, {}, {},
                    bound.learnability_cap});

    int exit_code = 0;
    if (options.empirical) {
        ExperimentConfig config;
        config.domain.type = DomainConfig::Type::Hypercube;
        config.domain.d = options.d;
        config.kernel = options.kernel.build();
        config.targets = {TargetSpec::hypercube_mode(options.d)};
        config.n_grid = options.n_grid;
        config.trials = options.trials;
        config.seed = options.seed;
        config.workers = options.workers;
        const AggregateStats stats = run_experiment(config);
        for (int n : config.n_grid) {
            const StatRow* row = stats.find(config.targets[0].name, n, "mse");
            if (!row) continue;
            const double floor = parity_mse_floor(options.d, n);
            rows.push_back({"parity", "full-parity", n, "mse", row->mean, row->std_dev, row->std_err,
                            row->trials, row->theory});
            rows.push_back({"parity", "full-parity", n, "mse_floor", {}, {}, {}, {}, floor});
            if (row->mean < floor - 2.0 * row->std_err) exit_code = 1;
        }
    }
    write_long_csv(rows, options.output);
    write_manifest({"parity", options.manifest, {options.output}, options.seed, ""}, timer.elapsed());
    return exit_code;
}

int cmd_conservation(const ConservationOptions& options) {
    Timer timer;
    const KernelSpec kernel = options.kernel.build();
    const DiscreteDomain domain = options.domain.domain == "circle" ? build_circle(options.domain.M)
                                                                    : build_hypercube(options.domain.d);
    const LevelSpectrum levels = options.domain.domain == "circle"
                                     ? circle_spectrum(kernel, options.domain.M)
                                     : hypercube_spectrum(kernel, options.domain.d);
    const Eigen::VectorXd lambdas = domain_eigenvalues(levels, domain);
    const Spectrum spectrum = levels.flatten();

    std::vector<LongRow> rows;
    for (int n : options.n_grid) {
        const TheoryConstants constants = solve_constants(spectrum, n, options.ridge);
        std::vector<std::vector<double>> per_mode(domain.M);
        std::vector<double> sums;
        for (int trial = 0; trial < options.trials; ++trial) {
            Rng rng = Rng::stream(options.seed, static_cast<std::uint64_t>(trial));
            const DatasetDraw draw = sample_dataset(domain.M, n, rng);
            const Eigen::MatrixXd T = transfer_matrix(domain.eigentable, lambdas, draw, options.ridge);
            double sum = 0.0;
            for (int i = 0; i < domain.M; ++i) {
                per_mode[i].push_back(T(i, i));
                sum += T(i, i);
            }
            sums.push_back(sum);
        }
        for (int i = 0; i < domain.M; ++i) {
            double mean = 0.0;
            for (double x : per_mode[i]) mean += x;
            mean /= per_mode[i].size();
            rows.push_back({"conservation", domain.modes[i].to_string(), n, "d_learnability", mean, {},
                            {}, options.trials, {}});
        }
        double mean = 0.0;
        for (double s : sums) mean += s;
        mean /= sums.size();
        rows.push_back({"conservation", "all-modes", n, "conservation_sum", mean, {}, {},
                        options.trials, constants.sum_learnability});
    }
    write_long_csv(rows, options.output);
    write_manifest({"conservation", options.manifest, {options.output}, options.seed, ""},
                   timer.elapsed());
    return 0;
}

int cmd_pipeline(const PipelineOptions& options) {
    Timer timer;
    Normalization norm = Normalization::None;
    if (options.normalization == "standardize") {
        norm = Normalization::Standardize;
    } else if (options.normalization == "unit-norm") {
        norm = Normalization::UnitNorm;
    } else if (options.normalization != "none") {
        throw std::runtime_error("unknown normalization '" + options.normalization + "'");
    }
    const TabularDataset dataset = load_tabular(options.data_path, options.label_column, norm);

    PipelineConfig config;
    config.kernel = options.kernel.build();
    config.n_grid = options.n_grid;
    config.ridge = options.ridge;
    config.trials = options.trials;
    config.seed = options.seed;
    config.workers = options.workers;
    config.max_rows = options.max_rows;
    config.allow_large = options.allow_large;

    const PipelineResult result = empirical_pipeline(dataset, config);
    write_long_csv(result.rows, options.output);
    std::vector<std::string> outputs{options.output};
    if (!options.spectrum_output.empty()) {
        write_spectrum_csv(result.spectrum, options.spectrum_output);
        outputs.push_back(options.spectrum_output);
    }
    write_manifest({"pipeline", options.manifest, outputs, options.seed, ""}, timer.elapsed());
    return 0;
}

}  // namespace eigenlearn::cli
