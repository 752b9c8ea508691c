// Monte Carlo experiment harness: samples dataset draws, runs exact-regression
// trials, and aggregates empirical statistics with uncertainty alongside the
// matching theoretical predictions.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eigenlearn/domain.hpp"
#include "eigenlearn/kernel.hpp"
#include "eigenlearn/regression.hpp"
#include "eigenlearn/spectrum.hpp"
#include "eigenlearn/theory.hpp"

namespace eigenlearn {

struct DomainConfig {
    enum class Type { Circle, Hypercube, Sphere };

    Type type = Type::Circle;
    int M = 256;    // circle
    int d = 8;      // hypercube / sphere
    int k_max = 70; // sphere spectrum truncation

    std::string name() const;
};

struct TargetSpec {
    std::string name;  // row key; defaults to the mode label
    ModeLabel label;   // eigenmode target
    Eigen::VectorXd coefficients;  // optional explicit coefficients in domain mode order
    double noise_var = 0.0;        // "noisy mode" targets

    static TargetSpec circle_mode(int k, bool sine = false);
    static TargetSpec hypercube_mode(int k, std::uint32_t subset = 0);  // 0 = first lexicographic
    static TargetSpec sphere_mode(int k);
};

struct ExperimentConfig {
    DomainConfig domain;
    KernelSpec kernel;
    std::vector<TargetSpec> targets;
    std::vector<int> n_grid;
    double ridge = 0.0;
    int trials = 100;
    std::uint64_t seed = 1;
    int workers = 1;
    int test_size = 2000;   // sphere: fresh test points per trial
    double msg_step = 1e-3; // sphere finite-difference step

    bool track_learnability = true;
    bool track_mse = true;
    bool track_ots_mse = false;
    bool track_msg = false;
    bool track_conservation = false;
    int track_vhat_modes = 0;  // leading modes whose vhat covariance is recorded

    double max_failure_fraction = 0.1;
};

struct StatRow {
    std::string target;
    int n = 0;
    std::string quantity;
    double mean = 0.0;
    double std_dev = 0.0;
    double std_err = 0.0;
    int trials = 0;
    std::optional<double> theory;
};

// Empirical covariance of tracked predicted coefficients, with sampling
// uncertainties for variance (4th-moment based) and covariance entries.
struct VhatCovariance {
    std::string target;
    int n = 0;
    std::vector<ModeLabel> modes;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd sampling_sigma;
    int trials = 0;
};

struct AggregateStats {
    std::vector<StatRow> rows;
    std::vector<VhatCovariance> covariances;
    int failed_trials = 0;

    const StatRow* find(const std::string& target, int n, const std::string& quantity) const;
};

// Uniform draw of n of M indices without replacement; deterministic in seed.
DatasetDraw sample_dataset(int M, int n, std::uint64_t seed);
DatasetDraw sample_dataset(int M, int n, Rng& rng);

// v* + vtilde with vtilde_i iid N(0, noise_var / M).
Eigen::VectorXd add_target_noise(const Eigen::VectorXd& v_star, double noise_var, int M,
                                 std::uint64_t seed);
Eigen::VectorXd add_target_noise(const Eigen::VectorXd& v_star, double noise_var, Rng& rng);

AggregateStats run_experiment(const ExperimentConfig& config);

// Mode index within a discrete domain for a target label.
int domain_mode_index(const DiscreteDomain& domain, const ModeLabel& label);

}  // namespace eigenlearn
