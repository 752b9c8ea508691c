// Closed-form generalization predictions: the self-consistent constant C,
// modewise learnabilities, MSE, predictor and transfer covariances, learning
// rates, mean squared gradient, overfitting slopes and thresholds, noise and
// off-training-set corrections, and the parity lower bound.
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "eigenlearn/spectrum.hpp"

namespace eigenlearn {

enum class RidgeConvention {
    LimitForm,  // L_i = lambda_i / (lambda_i + C), sum w lambda/(lambda+C) + ridge/C = n
    FiniteM,    // eigenvalue shift: lambda -> lambda + ridge/M, ridgeless solve, prefactor form
};

struct TheoryConstants {
    double C = std::numeric_limits<double>::infinity();  // infinity sentinel at n = 0
    double q = 0.0;            // sum w lambda/(lambda+C)^2 (+ ridge/C^2 in the limit form)
    double n = 0.0;
    double ridge = 0.0;
    double ridge_shift = 0.0;  // ridge/M when finite-M convention is active
    RidgeConvention convention = RidgeConvention::LimitForm;

    double sum_learnability = 0.0;  // sum w L_i
    double sum_L2 = 0.0;            // sum w L_i^2
    double sum_rate = 0.0;          // sum w L_i (1 - L_i)
    double residual = 0.0;          // defining-equation residual at the solution
};

// Solves sum_i w_i lambda_i/(lambda_i + C) + ridge/C = n for C >= 0 by
// bisection in log space, bracketed by the analytic bounds on C. Entries with
// lambda == 0 are allowed (their learnability is identically zero); negative
// entries are rejected.
TheoryConstants solve_constants(const Spectrum& spectrum, double n, double ridge,
                                RidgeConvention convention = RidgeConvention::LimitForm);

double mode_learnability(double lambda, const TheoryConstants& constants);
std::vector<double> all_learnabilities(const Spectrum& spectrum, const TheoryConstants& constants);

// Weighted average of per-mode learnabilities by squared coefficients.
double predict_learnability(const Eigen::VectorXd& coefficients, const std::vector<double>& learnability);
double predict_learnability(const Spectrum& spectrum, const std::vector<double>& learnability);

struct MsePrediction {
    double value = 0.0;
    bool divergent = false;  // denominator n - sum L^2 <= 0 (double-descent regime)
};

// E(f) = n / (n - sum_m w_m L_m^2) * sum_i w_i (1 - L_i)^2 v_i^2 [+ noise inside the sum].
MsePrediction predict_mse(const Spectrum& spectrum, const std::vector<double>& learnability,
                          const TheoryConstants& constants, double noise_var = 0.0);

// Cov(vhat_i, vhat_j) = (L_i^2 E(f) / n) delta_ij; returns the diagonal.
std::vector<double> predict_vhat_covariance(const std::vector<double>& learnability, double mse,
                                            double n);

// Cov(T_ij, T_kl) over spectrum entry indices.
double transfer_covariance(std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                           const Spectrum& spectrum, const TheoryConstants& constants);

// dL_i/dn = L_i (1 - L_i) / (sum_m w_m L_m (1 - L_m) + ridge/C).
std::vector<double> learnability_rate(const Spectrum& spectrum, const TheoryConstants& constants);

// dE(phi_i)/dn at n = 0.
double mse_slope_at_zero(const Spectrum& spectrum, double ridge, std::size_t entry);

// Eigenvalue threshold below which MSE initially increases with n.
double overfit_threshold(const Spectrum& spectrum, double ridge);

// E|grad fhat|^2 = sum_ij E[vhat_i vhat_j] G_ij with dense G over tracked modes.
double predict_msg(const Eigen::VectorXd& mean_vhat, const Eigen::VectorXd& var_vhat,
                   const Eigen::MatrixXd& gradient_gram);

// Weighted diagonal form used with level-compressed spectra.
double predict_msg_diag(const std::vector<double>& mean_vhat, const std::vector<double>& var_vhat,
                        const std::vector<double>& gram_diag, const std::vector<double>& weights);

// Diagonal gradient-interaction entries for the tracked modes: k^2 on the
// circle, k (k + d - 2) on S^d. Hypercube has no continuous gradient.
std::vector<double> gradient_gram(LevelSpectrum::DomainKind kind, int domain_param,
                                  const std::vector<ModeLabel>& modes);

struct ParityBound {
    long long n_min = 0;          // samples needed for MSE <= epsilon
    double learnability_cap = 0;  // L_d <= n / 2^(d-1) evaluated at n = n_min
};

ParityBound parity_bound(int d, double epsilon);
double parity_learnability_cap(int d, double n);
double parity_mse_floor(int d, double n);  // (1 - n / 2^(d-1))^2, clamped at 0

struct NoisyPrediction {
    double learnability = 0.0;
    MsePrediction mse;
};

// Target-noise extension on top of solved constants: learnability rescaled by
// the clean share of the target norm, MSE with the noise power in the sum.
NoisyPrediction noisy_predictions(const Spectrum& spectrum, const std::vector<double>& learnability,
                                  const TheoryConstants& constants, double noise_var);

struct OtsCorrected {
    double learnability = 0.0;
    double mse = 0.0;
};

// L_ots = (L - n/M) / (1 - n/M), E_ots = E / (1 - n/M).
OtsCorrected ots_correct(double learnability_naive, double mse_naive, double n, double M);

double mse_lower_bound(double learnability, double target_norm2);

}  // namespace eigenlearn
