#include "eigenlearn/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace eigenlearn {

std::string DomainConfig::name() const {
    switch (type) {
        case Type::Circle: return "circle-M" + std::to_string(M);
        case Type::Hypercube: return "hypercube-d" + std::to_string(d);
        case Type::Sphere: return "sphere-d" + std::to_string(d);
    }
    return "?";
}

TargetSpec TargetSpec::circle_mode(int k, bool sine) {
    TargetSpec t;
    t.label.family = k == 0 ? ModeLabel::Family::CircleConstant
                   : sine   ? ModeLabel::Family::CircleSin
                            : ModeLabel::Family::CircleCos;
    t.label.k = k;
    t.name = t.label.to_string();
    return t;
}

TargetSpec TargetSpec::hypercube_mode(int k, std::uint32_t subset) {
    TargetSpec t;
    t.label.family = ModeLabel::Family::HypercubeParity;
    t.label.k = k;
    t.label.subset = subset != 0 ? subset : (k == 0 ? 0 : (1u << k) - 1u);
    t.name = "parity" + std::to_string(k);
    return t;
}

TargetSpec TargetSpec::sphere_mode(int k) {
    TargetSpec t;
    t.label.family = ModeLabel::Family::SphereHarmonic;
    t.label.k = k;
    t.name = "level" + std::to_string(k);
    return t;
}

DatasetDraw sample_dataset(int M, int n, Rng& rng) {
    if (n < 0 || n > M) throw std::invalid_argument("sample_dataset: need 0 <= n <= M");
    std::vector<int> pool(M);
    std::iota(pool.begin(), pool.end(), 0);
    DatasetDraw draw;
    draw.indices.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_index(M - i));
        std::swap(pool[i], pool[j]);
        draw.indices.push_back(pool[i]);
    }
    std::sort(draw.indices.begin(), draw.indices.end());
    return draw;
}

DatasetDraw sample_dataset(int M, int n, std::uint64_t seed) {
    Rng rng(seed);
    DatasetDraw draw = sample_dataset(M, n, rng);
    draw.seed = seed;
    return draw;
}

Eigen::VectorXd add_target_noise(const Eigen::VectorXd& v_star, double noise_var, Rng& rng) {
    if (noise_var < 0.0) throw std::invalid_argument("add_target_noise: negative variance");
    if (noise_var == 0.0) return v_star;
    const double sigma = std::sqrt(noise_var / v_star.size());
    Eigen::VectorXd out = v_star;
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
    return out;
}

Eigen::VectorXd add_target_noise(const Eigen::VectorXd& v_star, double noise_var, int M,
                                 std::uint64_t seed) {
    if (v_star.size() != M) throw std::invalid_argument("add_target_noise: length mismatch");
    Rng rng(seed);
    return add_target_noise(v_star, noise_var, rng);
}

int domain_mode_index(const DiscreteDomain& domain, const ModeLabel& label) {
    for (int i = 0; i < domain.M; ++i) {
        const ModeLabel& m = domain.modes[i];
        if (m.family != label.family || m.k != label.k) continue;
        if (m.family == ModeLabel::Family::HypercubeParity && m.subset != label.subset) continue;
        return i;
    }
    throw std::invalid_argument("domain_mode_index: no mode " + label.to_string());
}

const StatRow* AggregateStats::find(const std::string& target, int n,
                                    const std::string& quantity) const {
    for (const auto& r : rows) {
        if (r.target == target && r.n == n && r.quantity == quantity) return &r;
    }
    return nullptr;
}

namespace {

struct Moments {
    double mean = 0.0, std_dev = 0.0, std_err = 0.0;
    int count = 0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.count = static_cast<int>(xs.size());
    if (m.count == 0) return m;
    m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / m.count;
    if (m.count > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - m.mean) * (x - m.mean);
        m.std_dev = std::sqrt(acc / (m.count - 1));
        m.std_err = m.std_dev / std::sqrt(static_cast<double>(m.count));
    }
    return m;
}

struct TrialOutputs {
    bool failed = false;
    double conservation = 0.0;
    std::vector<double> learnability, mse, ots_mse, msg, inner_clean;
    std::vector<Eigen::VectorXd> vhat_tracked;
};

Spectrum spectrum_from_domain(const DiscreteDomain& domain, const Eigen::VectorXd& lambdas) {
    Spectrum s;
    s.M = domain.M;
    s.eigenvalues.assign(lambdas.data(), lambdas.data() + lambdas.size());
    s.weights.assign(domain.M, 1.0);
    s.labels = domain.modes;
    return s;
}

void run_trials(int trials, int workers, std::vector<TrialOutputs>& results,
                const std::function<void(int, TrialOutputs&)>& body) {
    workers = std::max(1, workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&](int w) {
        for (int t = w; t < trials; t += workers) {
            try {
                body(t, results[t]);
            } catch (const SingularSystemError&) {
                results[t].failed = true;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                results[t].failed = true;
            }
        }
    };
    if (workers == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
}

using TheoryColumns = std::vector<std::optional<double>>;

void aggregate_target_rows(AggregateStats& stats, const ExperimentConfig& config,
                           const std::vector<TrialOutputs>& results, int n,
                           const TheoryColumns& lrn_theory, const TheoryColumns& mse_theory,
                           const TheoryColumns& ots_theory, const TheoryColumns& msg_theory,
                           const TheoryColumns& inner_theory,
                           std::optional<double> conservation_theory) {
    std::vector<double> vals;
    for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
        const auto& target = config.targets[ti];
        auto emit = [&](const char* quantity,
                        const std::function<const std::vector<double>&(const TrialOutputs&)>& pick,
                        const std::optional<double>& theory) {
            vals.clear();
            for (const auto& r : results) {
                if (r.failed) continue;
                const auto& vec = pick(r);
                if (ti < vec.size() && !std::isnan(vec[ti])) vals.push_back(vec[ti]);
            }
            if (vals.empty()) return;
            const Moments m = moments(vals);
            stats.rows.push_back(
                {target.name, n, quantity, m.mean, m.std_dev, m.std_err, m.count, theory});
        };
        if (config.track_learnability) {
            emit("learnability",
                 [](const TrialOutputs& r) -> const std::vector<double>& { return r.learnability; },
                 lrn_theory[ti]);
        }
        if (config.track_mse) {
            emit("mse", [](const TrialOutputs& r) -> const std::vector<double>& { return r.mse; },
                 mse_theory[ti]);
        }
        if (config.track_ots_mse) {
            emit("ots_mse", [](const TrialOutputs& r) -> const std::vector<double>& { return r.ots_mse; },
                 ots_theory[ti]);
        }
        if (config.track_msg) {
            emit("msg", [](const TrialOutputs& r) -> const std::vector<double>& { return r.msg; },
                 msg_theory[ti]);
        }
        if (target.noise_var > 0.0) {
            emit("inner_product_clean",
                 [](const TrialOutputs& r) -> const std::vector<double>& { return r.inner_clean; },
                 inner_theory[ti]);
        }
    }
    if (config.track_conservation) {
        vals.clear();
        for (const auto& r : results) {
            if (!r.failed) vals.push_back(r.conservation);
        }
        if (!vals.empty()) {
            const Moments m = moments(vals);
            stats.rows.push_back({"all-modes", n, "conservation_sum", m.mean, m.std_dev, m.std_err,
                                  m.count, conservation_theory});
        }
    }
}

void collect_vhat_covariance(AggregateStats& stats, const ExperimentConfig& config,
                             const std::vector<TrialOutputs>& results, int n,
                             const std::vector<ModeLabel>& tracked_labels) {
    if (config.track_vhat_modes <= 0) return;
    const int K = static_cast<int>(tracked_labels.size());
    for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
        std::vector<const Eigen::VectorXd*> draws;
        for (const auto& r : results) {
            if (!r.failed && ti < r.vhat_tracked.size()) draws.push_back(&r.vhat_tracked[ti]);
        }
        const int T = static_cast<int>(draws.size());
        if (T < 3) continue;
        VhatCovariance cov;
        cov.target = config.targets[ti].name;
        cov.n = n;
        cov.modes = tracked_labels;
        cov.trials = T;
        cov.mean = Eigen::VectorXd::Zero(K);
        for (const auto* v : draws) cov.mean += *v;
        cov.mean /= T;
        cov.covariance = Eigen::MatrixXd::Zero(K, K);
        Eigen::VectorXd m4 = Eigen::VectorXd::Zero(K);
        for (const auto* v : draws) {
            const Eigen::VectorXd c = *v - cov.mean;
            cov.covariance += c * c.transpose();
            m4 += c.array().pow(4).matrix();
        }
        cov.covariance /= (T - 1);
        m4 /= T;
        cov.sampling_sigma = Eigen::MatrixXd::Zero(K, K);
        for (int a = 0; a < K; ++a) {
            for (int b = 0; b < K; ++b) {
                if (a == b) {
                    const double var = cov.covariance(a, a);
                    cov.sampling_sigma(a, a) = std::sqrt(std::max(0.0, m4[a] - var * var) / T);
                } else {
                    cov.sampling_sigma(a, b) =
                        std::sqrt((cov.covariance(a, a) * cov.covariance(b, b) +
                                   cov.covariance(a, b) * cov.covariance(a, b)) /
                                  T);
                }
            }
        }
        stats.covariances.push_back(std::move(cov));
    }
}

AggregateStats run_discrete(const ExperimentConfig& config) {
    const DiscreteDomain domain = config.domain.type == DomainConfig::Type::Circle
                                      ? build_circle(config.domain.M)
                                      : build_hypercube(config.domain.d);
    const LevelSpectrum levels = config.domain.type == DomainConfig::Type::Circle
                                     ? circle_spectrum(config.kernel, config.domain.M)
                                     : hypercube_spectrum(config.kernel, config.domain.d);
    const Eigen::VectorXd lambdas = domain_eigenvalues(levels, domain);
    const Spectrum base_spectrum = spectrum_from_domain(domain, lambdas);

    std::vector<Eigen::VectorXd> target_coeffs;
    for (const auto& t : config.targets) {
        if (t.coefficients.size() > 0) {
            if (t.coefficients.size() != domain.M) {
                throw std::invalid_argument("run_experiment: coefficient length mismatch");
            }
            target_coeffs.push_back(t.coefficients);
        } else {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(domain.M);
            v[domain_mode_index(domain, t.label)] = 1.0;
            target_coeffs.push_back(v);
        }
    }

    std::vector<int> tracked_modes;
    {
        std::vector<int> order(domain.M);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return lambdas[a] > lambdas[b]; });
        const int K = std::min(config.track_vhat_modes, domain.M);
        tracked_modes.assign(order.begin(), order.begin() + K);
    }
    std::vector<ModeLabel> tracked_labels;
    for (int idx : tracked_modes) tracked_labels.push_back(domain.modes[idx]);

    const bool circle = config.domain.type == DomainConfig::Type::Circle;
    std::vector<double> msg_gram;
    if (config.track_msg) {
        if (!circle) throw std::invalid_argument("run_experiment: msg tracking needs the circle domain");
        msg_gram.resize(domain.M);
        for (int i = 0; i < domain.M; ++i) {
            msg_gram[i] = circle_discrete_gradient_entry(domain.modes[i].k, domain.M);
        }
    }

    AggregateStats stats;
    for (int n : config.n_grid) {
        if (n < 0 || n > domain.M) throw std::invalid_argument("run_experiment: n outside [0, M]");

        const TheoryConstants constants = solve_constants(base_spectrum, n, config.ridge);
        const std::vector<double> mode_lrn = all_learnabilities(base_spectrum, constants);
        TheoryColumns lrn_th(config.targets.size()), mse_th(config.targets.size()),
            ots_th(config.targets.size()), msg_th(config.targets.size()),
            inner_th(config.targets.size());
        for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
            const auto& target = config.targets[ti];
            const Eigen::VectorXd& v = target_coeffs[ti];
            const double clean_lrn = predict_learnability(v, mode_lrn);
            Spectrum with_target = base_spectrum;
            with_target.coefficients.assign(v.data(), v.data() + v.size());
            const MsePrediction clean_mse = predict_mse(with_target, mode_lrn, constants);
            if (target.noise_var > 0.0) {
                const NoisyPrediction noisy =
                    noisy_predictions(with_target, mode_lrn, constants, target.noise_var);
                lrn_th[ti] = noisy.learnability;
                if (!noisy.mse.divergent) mse_th[ti] = noisy.mse.value;
                inner_th[ti] = clean_lrn * v.squaredNorm();
            } else {
                lrn_th[ti] = clean_lrn;
                if (!clean_mse.divergent) mse_th[ti] = clean_mse.value;
                if (n < domain.M && !clean_mse.divergent) {
                    ots_th[ti] = ots_correct(clean_lrn, clean_mse.value, n, domain.M).mse;
                }
                if (config.track_msg) {
                    if (n == 0) {
                        msg_th[ti] = 0.0;
                    } else if (!clean_mse.divergent) {
                        std::vector<double> mean_vhat(domain.M), var_vhat(domain.M);
                        for (int i = 0; i < domain.M; ++i) {
                            mean_vhat[i] = mode_lrn[i] * v[i];
                            var_vhat[i] = mode_lrn[i] * mode_lrn[i] * clean_mse.value / n;
                        }
                        msg_th[ti] = predict_msg_diag(mean_vhat, var_vhat, msg_gram,
                                                      std::vector<double>(domain.M, 1.0));
                    }
                }
            }
        }
        const std::optional<double> conservation_th = constants.sum_learnability;

        std::vector<TrialOutputs> results(config.trials);
        run_trials(config.trials, config.workers, results, [&](int trial, TrialOutputs& out) {
            Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(trial));
            const DatasetDraw draw = sample_dataset(domain.M, n, rng);
            const TransferOperator op(domain.eigentable, lambdas, draw, config.ridge);
            if (config.track_conservation) out.conservation = op.trace();
            for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
                const auto& target = config.targets[ti];
                const Eigen::VectorXd& v_star = target_coeffs[ti];
                const bool noisy = target.noise_var > 0.0;
                const Eigen::VectorXd v = noisy ? add_target_noise(v_star, target.noise_var, rng) : v_star;
                const Eigen::VectorXd vhat = op.apply(v);
                const double nan = std::numeric_limits<double>::quiet_NaN();
                if (config.track_learnability) {
                    out.learnability.push_back(
                        noisy ? v_star.dot(vhat) / (v_star.squaredNorm() + target.noise_var)
                              : d_learnability(v, vhat));
                }
                if (config.track_mse) {
                    out.mse.push_back(noisy ? d_mse_full(v_star, vhat) + target.noise_var
                                            : d_mse_full(v, vhat));
                }
                out.inner_clean.push_back(noisy ? v_star.dot(vhat) : nan);
                if (config.track_ots_mse) {
                    out.ots_mse.push_back(!noisy && n < domain.M ? d_mse_ots(domain, v, vhat, draw)
                                                                 : nan);
                }
                if (config.track_msg) {
                    if (noisy) {
                        out.msg.push_back(nan);
                    } else {
                        const Eigen::VectorXd fhat = domain.eigentable.transpose() * vhat;
                        out.msg.push_back(empirical_msg_circle(fhat));
                    }
                }
                if (!tracked_modes.empty()) {
                    Eigen::VectorXd sub(static_cast<Eigen::Index>(tracked_modes.size()));
                    for (std::size_t j = 0; j < tracked_modes.size(); ++j) {
                        sub[static_cast<Eigen::Index>(j)] = vhat[tracked_modes[j]];
                    }
                    out.vhat_tracked.push_back(std::move(sub));
                }
            }
        });

        int failed = 0;
        for (const auto& r : results) failed += r.failed;
        stats.failed_trials += failed;
        if (failed > config.max_failure_fraction * config.trials) {
            throw std::runtime_error("run_experiment: too many failed trials at n=" + std::to_string(n));
        }
        aggregate_target_rows(stats, config, results, n, lrn_th, mse_th, ots_th, msg_th, inner_th,
                              conservation_th);
        collect_vhat_covariance(stats, config, results, n, tracked_labels);
    }
    return stats;
}

AggregateStats run_sphere(const ExperimentConfig& config) {
    const int d = config.domain.d;
    const LevelSpectrum levels = sphere_spectrum(config.kernel, d, config.domain.k_max);
    const Spectrum base = levels.weighted();

    std::vector<int> target_levels;
    for (const auto& t : config.targets) {
        if (t.label.family != ModeLabel::Family::SphereHarmonic) {
            throw std::invalid_argument("run_experiment: sphere targets must be sphere levels");
        }
        if (t.noise_var > 0.0) {
            throw std::invalid_argument("run_experiment: noisy targets use discrete domains");
        }
        target_levels.push_back(t.label.k);
    }

    AggregateStats stats;
    for (int n : config.n_grid) {
        if (n < 0) throw std::invalid_argument("run_experiment: negative n");
        const TheoryConstants constants = solve_constants(base, n, config.ridge);
        TheoryColumns lrn_th(config.targets.size()), mse_th(config.targets.size()),
            ots_th(config.targets.size()), msg_th(config.targets.size()),
            inner_th(config.targets.size());
        for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
            Spectrum with_target = base;
            const std::size_t entry = with_target.attach_target(config.targets[ti].label);
            const std::vector<double> mode_lrn = all_learnabilities(with_target, constants);
            lrn_th[ti] = mode_lrn[entry];
            const MsePrediction mse = predict_mse(with_target, mode_lrn, constants);
            if (!mse.divergent) mse_th[ti] = mse.value;
            if (config.track_msg) {
                if (n == 0) {
                    msg_th[ti] = 0.0;
                } else if (!mse.divergent) {
                    // tangential gradient entries for the embedded S^d
                    std::vector<double> gram(with_target.size());
                    for (std::size_t i = 0; i < with_target.size(); ++i) {
                        gram[i] = sphere_gradient_entry(with_target.labels[i].k, d);
                    }
                    std::vector<double> mean_vhat(with_target.size(), 0.0), var_vhat(with_target.size());
                    for (std::size_t i = 0; i < with_target.size(); ++i) {
                        mean_vhat[i] = mode_lrn[i] * with_target.coefficients[i];
                        var_vhat[i] = mode_lrn[i] * mode_lrn[i] * mse.value / n;
                    }
                    msg_th[ti] = predict_msg_diag(mean_vhat, var_vhat, gram, with_target.weights);
                }
            }
        }

        std::vector<TrialOutputs> results(config.trials);
        run_trials(config.trials, config.workers, results, [&](int trial, TrialOutputs& out) {
            Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(trial));
            auto draw_points = [&](int count) {
                Eigen::MatrixXd pts(count, d + 1);
                for (int i = 0; i < count; ++i) {
                    double norm2 = 0.0;
                    do {
                        norm2 = 0.0;
                        for (int j = 0; j <= d; ++j) {
                            pts(i, j) = rng.normal();
                            norm2 += pts(i, j) * pts(i, j);
                        }
                    } while (norm2 == 0.0);
                    pts.row(i) /= std::sqrt(norm2);
                }
                return pts;
            };
            const Eigen::MatrixXd train = draw_points(n);
            const Eigen::MatrixXd test = draw_points(config.test_size);
            Eigen::VectorXd axis(d + 1);
            for (int j = 0; j <= d; ++j) axis[j] = rng.normal();
            axis /= axis.norm();

            std::optional<Eigen::LDLT<Eigen::MatrixXd>> solver;
            if (n > 0) {
                GramMatrix gram = gram_matrix(config.kernel, train);
                gram.entries.diagonal().array() += config.ridge;
                solver.emplace(gram.entries);
                if (solver->info() != Eigen::Success || !solver->isPositive()) {
                    throw SingularSystemError("sphere trial: singular kernel matrix", 0.0);
                }
            }
            const Eigen::MatrixXd cross =
                n > 0 ? kernel_cross(config.kernel, test, train) : Eigen::MatrixXd();

            for (std::size_t ti = 0; ti < config.targets.size(); ++ti) {
                const int level = target_levels[ti];
                const Eigen::VectorXd f_test = sphere_level_target(level, d, axis, test);
                Eigen::VectorXd fhat = Eigen::VectorXd::Zero(config.test_size);
                Eigen::VectorXd alpha;
                if (n > 0) {
                    const Eigen::VectorXd f_train = sphere_level_target(level, d, axis, train);
                    alpha = solver->solve(f_train);
                    fhat = cross * alpha;
                }
                if (config.track_learnability) {
                    const double denom = f_test.squaredNorm();
                    out.learnability.push_back(denom > 0.0 ? f_test.dot(fhat) / denom : 0.0);
                }
                if (config.track_mse) {
                    out.mse.push_back((f_test - fhat).squaredNorm() / config.test_size);
                }
                if (config.track_msg) {
                    const int msg_points = std::min(config.test_size, 500);
                    const Eigen::MatrixXd eval = test.topRows(msg_points);
                    auto predict = [&](const Eigen::MatrixXd& pts) -> Eigen::VectorXd {
                        if (n == 0) return Eigen::VectorXd::Zero(pts.rows());
                        return kernel_cross(config.kernel, pts, train) * alpha;
                    };
                    out.msg.push_back(empirical_msg_sphere(predict, eval, d, config.msg_step, rng));
                }
            }
        });

        int failed = 0;
        for (const auto& r : results) failed += r.failed;
        stats.failed_trials += failed;
        if (failed > config.max_failure_fraction * config.trials) {
            throw std::runtime_error("run_experiment: too many failed sphere trials at n=" +
                                     std::to_string(n));
        }
        aggregate_target_rows(stats, config, results, n, lrn_th, mse_th, ots_th, msg_th, inner_th,
                              constants.sum_learnability);
    }
    return stats;
}

}  // namespace

AggregateStats run_experiment(const ExperimentConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
    if (config.targets.empty()) throw std::invalid_argument("run_experiment: no targets");
    if (config.domain.type == DomainConfig::Type::Sphere) return run_sphere(config);
    return run_discrete(config);
}

}  // namespace eigenlearn
