#include "eigenlearn/dataio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "eigenlearn/regression.hpp"
#include "eigenlearn/rng.hpp"
#include "eigenlearn/theory.hpp"

namespace eigenlearn {

TabularDataset load_tabular(const std::filesystem::path& path, int label_column,
                            Normalization normalization) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_tabular: cannot open " + path.string());

    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::vector<double> row;
        std::string tok;
        while (ss >> tok) {
            try {
                std::size_t used = 0;
                const double val = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                row.push_back(val);
            } catch (const std::exception&) {
                throw std::runtime_error("load_tabular: non-numeric cell '" + tok + "' at line " +
                                         std::to_string(lineno));
            }
        }
        if (row.empty()) continue;
        if (width == 0) {
            width = row.size();
            if (width < 2) {
                throw std::runtime_error("load_tabular: need at least one feature and a label at line " +
                                         std::to_string(lineno));
            }
        } else if (row.size() != width) {
            throw std::runtime_error("load_tabular: ragged row at line " + std::to_string(lineno) +
                                     " (expected " + std::to_string(width) + " cells, got " +
                                     std::to_string(row.size()) + ")");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw std::runtime_error("load_tabular: non-finite value at line " + std::to_string(lineno));
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw std::runtime_error("load_tabular: need at least 2 samples");

    const int N = static_cast<int>(rows.size());
    const int total = static_cast<int>(width);
    const int label_idx = label_column < 0 ? total - 1 : label_column;
    if (label_idx < 0 || label_idx >= total) {
        throw std::runtime_error("load_tabular: label column out of range");
    }

    TabularDataset ds;
    ds.source = path.string();
    ds.normalization = normalization;
    ds.features.resize(N, total - 1);
    ds.labels.resize(N);
    for (int i = 0; i < N; ++i) {
        int c = 0;
        for (int j = 0; j < total; ++j) {
            if (j == label_idx) {
                ds.labels[i] = rows[i][j];
            } else {
                ds.features(i, c++) = rows[i][j];
            }
        }
    }

    if (normalization == Normalization::Standardize) {
        for (int j = 0; j < ds.features.cols(); ++j) {
            const double mean = ds.features.col(j).mean();
            double var = (ds.features.col(j).array() - mean).square().sum() / N;
            const double sd = std::sqrt(var);
            ds.features.col(j).array() -= mean;
            if (sd > 0.0) ds.features.col(j) /= sd;
        }
    } else if (normalization == Normalization::UnitNorm) {
        for (int i = 0; i < N; ++i) {
            const double norm = ds.features.row(i).norm();
            if (norm == 0.0) {
                throw std::runtime_error("load_tabular: zero-norm row " + std::to_string(i + 1) +
                                         " cannot be unit-normalized");
            }
            ds.features.row(i) /= norm;
        }
    }
    return ds;
}

PipelineResult empirical_pipeline(const TabularDataset& dataset, const PipelineConfig& config) {
    const int N = dataset.count();
    if (N > config.max_rows && !config.allow_large) {
        throw std::runtime_error("empirical_pipeline: " + std::to_string(N) +
                                 " rows exceed the desk-scale cap of " + std::to_string(config.max_rows) +
                                 "; pass allow_large to override");
    }
    for (int n : config.n_grid) {
        if (n < 1 || n >= N) {
            throw std::invalid_argument(
                "empirical_pipeline: n must satisfy 1 <= n < N (off-training-set evaluation)");
        }
    }

    KernelSpec kernel = config.kernel;
    const GramMatrix gram = gram_matrix(kernel, dataset.features);

    PipelineResult result;
    result.spectrum = empirical_spectrum(gram, dataset.labels);

    const std::string id = "pipeline";
    for (int n : config.n_grid) {
        const TheoryConstants constants = solve_constants(result.spectrum, n, config.ridge);
        const std::vector<double> mode_lrn = all_learnabilities(result.spectrum, constants);
        const double lrn_naive = predict_learnability(result.spectrum, mode_lrn);
        const MsePrediction mse_naive = predict_mse(result.spectrum, mode_lrn, constants);
        const OtsCorrected corrected = mse_naive.divergent
                                           ? OtsCorrected{ots_correct(lrn_naive, 0.0, n, N).learnability,
                                                          std::numeric_limits<double>::infinity()}
                                           : ots_correct(lrn_naive, mse_naive.value, n, N);

        // exact KRR trials: train on n of the N rows, evaluate on the complement
        std::vector<double> lrn_vals(config.trials), mse_vals(config.trials);
        std::vector<char> ok(config.trials, 0);
        const int workers = std::max(1, config.workers);
        auto body = [&](int t) {
            Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(t));
            const DatasetDraw draw = sample_dataset(N, n, rng);
            std::vector<char> in_draw(N, 0);
            for (int idx : draw.indices) in_draw[idx] = 1;
            std::vector<int> test_idx;
            test_idx.reserve(N - n);
            for (int i = 0; i < N; ++i) {
                if (!in_draw[i]) test_idx.push_back(i);
            }

            Eigen::MatrixXd K_train(n, n);
            Eigen::VectorXd y_train(n);
            for (int a = 0; a < n; ++a) {
                y_train[a] = dataset.labels[draw.indices[a]];
                for (int b = 0; b < n; ++b) {
                    K_train(a, b) = gram.entries(draw.indices[a], draw.indices[b]);
                }
            }
            K_train.diagonal().array() += config.ridge;
            const Eigen::LDLT<Eigen::MatrixXd> solver(K_train);
            if (solver.info() != Eigen::Success || !solver.isPositive()) return;
            const Eigen::VectorXd alpha = solver.solve(y_train);

            double dot = 0.0, norm2 = 0.0, err2 = 0.0;
            Eigen::VectorXd krow(n);
            for (int i : test_idx) {
                for (int a = 0; a < n; ++a) krow[a] = gram.entries(i, draw.indices[a]);
                const double pred = krow.dot(alpha);
                const double y = dataset.labels[i];
                dot += y * pred;
                norm2 += y * y;
                err2 += (y - pred) * (y - pred);
            }
            if (norm2 <= 0.0) return;
            lrn_vals[t] = dot / norm2;
            mse_vals[t] = err2 / static_cast<double>(test_idx.size());
            ok[t] = 1;
        };
        if (workers == 1) {
            for (int t = 0; t < config.trials; ++t) body(t);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (int t = w; t < config.trials; t += workers) body(t);
                });
            }
            for (auto& th : pool) th.join();
        }

        std::vector<double> lrn, mse;
        for (int t = 0; t < config.trials; ++t) {
            if (ok[t]) {
                lrn.push_back(lrn_vals[t]);
                mse.push_back(mse_vals[t]);
            }
        }
        if (lrn.empty()) throw std::runtime_error("empirical_pipeline: all trials failed at n=" + std::to_string(n));
        auto emit = [&](const std::string& quantity, const std::vector<double>& xs, double theory) {
            const int T = static_cast<int>(xs.size());
            const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / T;
            double var = 0.0;
            for (double x : xs) var += (x - mean) * (x - mean);
            const double sd = T > 1 ? std::sqrt(var / (T - 1)) : 0.0;
            LongRow row;
            row.experiment_id = id;
            row.target = "labels";
            row.n = n;
            row.quantity = quantity;
            row.mean = mean;
            row.std_dev = sd;
            row.std_err = sd / std::sqrt(static_cast<double>(T));
            row.trials = T;
            row.theory = theory;
            result.rows.push_back(std::move(row));
        };
        emit("ots_learnability", lrn, corrected.learnability);
        emit("ots_mse", mse, corrected.mse);

        LongRow naive_l{id, "labels", n, "naive_theory_learnability", {}, {}, {}, {}, lrn_naive};
        result.rows.push_back(naive_l);
        LongRow naive_m{id, "labels", n, "naive_theory_mse", {}, {}, {}, {},
                        mse_naive.divergent ? std::optional<double>{} : std::optional<double>{mse_naive.value}};
        result.rows.push_back(naive_m);
        LongRow bound{id, "labels", n, "mse_lower_bound", {}, {}, {}, {},
                      mse_lower_bound(corrected.learnability, result.spectrum.target_norm2())};
        result.rows.push_back(bound);
    }
    return result;
}

namespace {

using nlohmann::json;

KernelSpec kernel_from_json(const json& j) {
    const std::string variant = j.value("variant", "relu-ntk");
    KernelSpec spec;
    if (variant == "relu-ntk") {
        spec = KernelSpec::relu_ntk(j.value("depth", 4), j.value("sigma_w", 1.4), j.value("sigma_b", 0.1));
    } else if (variant == "gaussian") {
        spec = KernelSpec::gaussian(j.value("bandwidth", 1.0));
    } else if (variant == "laplacian") {
        spec = KernelSpec::laplacian(j.value("scale", 1.0));
    } else if (variant == "tabulated") {
        spec = KernelSpec::tabulated(load_tabulated_profile(j.at("profile_file").get<std::string>()));
    } else {
        throw std::runtime_error("config: unknown kernel variant '" + variant + "'");
    }
    spec.jitter = j.value("jitter", 0.0);
    return spec;
}

json kernel_to_json(const KernelSpec& spec) {
    json j;
    j["variant"] = spec.variant_name();
    switch (spec.variant) {
        case KernelSpec::Variant::ReluNtk:
            j["depth"] = spec.ntk.depth;
            j["sigma_w"] = spec.ntk.sigma_w;
            j["sigma_b"] = spec.ntk.sigma_b;
            break;
        case KernelSpec::Variant::Gaussian: j["bandwidth"] = spec.bandwidth; break;
        case KernelSpec::Variant::Laplacian: j["scale"] = spec.scale; break;
        case KernelSpec::Variant::Tabulated: break;
    }
    j["jitter"] = spec.jitter;
    return j;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_experiment_config: cannot open " + path.string());
    json j;
    in >> j;

    ExperimentConfig config;
    const auto& dj = j.at("domain");
    const std::string type = dj.value("type", "circle");
    if (type == "circle") {
        config.domain.type = DomainConfig::Type::Circle;
        config.domain.M = dj.value("M", 256);
    } else if (type == "hypercube") {
        config.domain.type = DomainConfig::Type::Hypercube;
        config.domain.d = dj.value("d", 8);
    } else if (type == "sphere") {
        config.domain.type = DomainConfig::Type::Sphere;
        config.domain.d = dj.value("d", 7);
        config.domain.k_max = dj.value("k_max", 70);
    } else {
        throw std::runtime_error("config: unknown domain type '" + type + "'");
    }
    if (j.contains("kernel")) config.kernel = kernel_from_json(j.at("kernel"));

    for (const auto& tj : j.value("targets", json::array())) {
        TargetSpec t;
        const int k = tj.value("k", 0);
        switch (config.domain.type) {
            case DomainConfig::Type::Circle: t = TargetSpec::circle_mode(k, tj.value("sine", false)); break;
            case DomainConfig::Type::Hypercube:
                t = TargetSpec::hypercube_mode(k, tj.value("subset", 0u));
                break;
            case DomainConfig::Type::Sphere: t = TargetSpec::sphere_mode(k); break;
        }
        t.noise_var = tj.value("noise_var", 0.0);
        if (tj.contains("name")) t.name = tj.at("name").get<std::string>();
        config.targets.push_back(std::move(t));
    }

    config.n_grid = j.value("n_grid", std::vector<int>{});
    config.ridge = j.value("ridge", 0.0);
    config.trials = j.value("trials", 100);
    config.seed = j.value("seed", std::uint64_t{1});
    config.workers = j.value("workers", 1);
    config.test_size = j.value("test_size", 2000);
    config.msg_step = j.value("msg_step", 1e-3);
    config.track_learnability = j.value("track_learnability", true);
    config.track_mse = j.value("track_mse", true);
    config.track_ots_mse = j.value("track_ots_mse", false);
    config.track_msg = j.value("track_msg", false);
    config.track_conservation = j.value("track_conservation", false);
    config.track_vhat_modes = j.value("track_vhat_modes", 0);
    return config;
}

std::string experiment_config_json(const ExperimentConfig& config) {
    json j;
    switch (config.domain.type) {
        case DomainConfig::Type::Circle:
            j["domain"] = {{"type", "circle"}, {"M", config.domain.M}};
            break;
        case DomainConfig::Type::Hypercube:
            j["domain"] = {{"type", "hypercube"}, {"d", config.domain.d}};
            break;
        case DomainConfig::Type::Sphere:
            j["domain"] = {{"type", "sphere"}, {"d", config.domain.d}, {"k_max", config.domain.k_max}};
            break;
    }
    j["kernel"] = kernel_to_json(config.kernel);
    json targets = json::array();
    for (const auto& t : config.targets) {
        json tj;
        tj["name"] = t.name;
        tj["k"] = t.label.k;
        if (t.label.family == ModeLabel::Family::CircleSin) tj["sine"] = true;
        if (t.label.family == ModeLabel::Family::HypercubeParity) tj["subset"] = t.label.subset;
        if (t.noise_var > 0.0) tj["noise_var"] = t.noise_var;
        targets.push_back(tj);
    }
    j["targets"] = targets;
    j["n_grid"] = config.n_grid;
    j["ridge"] = config.ridge;
    j["trials"] = config.trials;
    j["seed"] = config.seed;
    j["workers"] = config.workers;
    j["test_size"] = config.test_size;
    j["track_learnability"] = config.track_learnability;
    j["track_mse"] = config.track_mse;
    j["track_ots_mse"] = config.track_ots_mse;
    j["track_msg"] = config.track_msg;
    j["track_conservation"] = config.track_conservation;
    j["track_vhat_modes"] = config.track_vhat_modes;
    return j.dump(2);
}

}  // namespace eigenlearn
