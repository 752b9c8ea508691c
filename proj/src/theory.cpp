#include "eigenlearn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eigenlearn {

namespace {

struct WorkingSpectrum {
    std::vector<double> lambda;  // possibly ridge-shifted
    std::vector<double> weight;
    double positive_count = 0.0;  // weighted count of lambda > 0
    double trace = 0.0;           // sum w lambda
};

WorkingSpectrum prepare(const Spectrum& s, double shift) {
    WorkingSpectrum w;
    w.lambda.reserve(s.size());
    w.weight.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double l = s.eigenvalues[i];
        if (l < 0.0) throw std::invalid_argument("solve_constants: negative eigenvalue");
        if (s.weights[i] <= 0.0) throw std::invalid_argument("solve_constants: nonpositive weight");
        w.lambda.push_back(l + shift);
        w.weight.push_back(s.weights[i]);
        if (l + shift > 0.0) {
            w.positive_count += s.weights[i];
            w.trace += s.weights[i] * (l + shift);
        }
    }
    return w;
}

// sum w lambda/(lambda + C) + delta/C - n, accumulated in extended precision
long double constraint(const WorkingSpectrum& w, long double C, long double delta, long double n) {
    long double acc = -n;
    for (std::size_t i = 0; i < w.lambda.size(); ++i) {
        const long double l = w.lambda[i];
        if (l > 0.0L) acc += w.weight[i] * (l / (l + C));
    }
    if (delta > 0.0L) acc += delta / C;
    return acc;
}

}  // namespace

TheoryConstants solve_constants(const Spectrum& spectrum, double n, double ridge,
                                RidgeConvention convention) {
    if (n < 0.0) throw std::invalid_argument("solve_constants: n must be >= 0");
    if (ridge < 0.0) throw std::invalid_argument("solve_constants: ridge must be >= 0");

    TheoryConstants out;
    out.n = n;
    out.ridge = ridge;
    out.convention = convention;
    const bool finite_m = convention == RidgeConvention::FiniteM && ridge > 0.0;
    if (finite_m) {
        if (!spectrum.M) throw std::invalid_argument("solve_constants: finite-M convention needs M");
        out.ridge_shift = ridge / *spectrum.M;
    }
    const double effective_ridge = finite_m ? 0.0 : ridge;
    const WorkingSpectrum w = prepare(spectrum, out.ridge_shift);

    if (n == 0.0) {
        out.C = std::numeric_limits<double>::infinity();
        out.q = 0.0;
        return out;
    }

    if (effective_ridge == 0.0 && n >= w.positive_count) {
        if (n > w.positive_count * (1.0 + 1e-12)) {
            throw std::domain_error(
                "solve_constants: no finite root, ridgeless n exceeds the number of positive modes");
        }
        out.C = 0.0;  // n -> M boundary
    } else {
        // bracket: upper bound (delta + sum lambda)/n; lower bound from
        // C >= lambda_l (l/n - 1) over the sorted spectrum
        long double hi = (static_cast<long double>(effective_ridge) + w.trace) / n;
        long double lo = 0.0L;
        {
            std::vector<std::size_t> order(w.lambda.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return w.lambda[a] > w.lambda[b]; });
            double cum = 0.0;
            for (std::size_t r : order) {
                cum += w.weight[r];
                if (cum > n) {
                    lo = std::max<long double>(lo, w.lambda[r] * (cum / n - 1.0));
                }
            }
        }
        if (lo <= 0.0L) lo = std::min<long double>(hi * 1e-24L, 1e-30L);
        if (constraint(w, lo, effective_ridge, n) < 0.0L) {
            // analytic lower bound can exceed the true root by rounding; relax it
            lo = std::min<long double>(hi * 1e-24L, 1e-30L);
        }

        long double mid = hi;
        for (int iter = 0; iter < 200; ++iter) {
            mid = std::sqrt(lo * hi);
            const long double g = constraint(w, mid, effective_ridge, n);
            if (std::fabs(g) <= 1e-13L * std::max<long double>(n, 1.0L)) break;
            if (g > 0.0L) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.C = static_cast<double>(mid);
        out.residual = static_cast<double>(constraint(w, mid, effective_ridge, n));
    }

    long double q = 0.0L, sumL = 0.0L, sumL2 = 0.0L, sumRate = 0.0L;
    const long double C = out.C;
    for (std::size_t i = 0; i < w.lambda.size(); ++i) {
        const long double l = w.lambda[i];
        if (l <= 0.0L) continue;
        const long double li = l / (l + C);
        q += w.weight[i] * (l / ((l + C) * (l + C)));
        sumL += w.weight[i] * li;
        sumL2 += w.weight[i] * li * li;
        sumRate += w.weight[i] * li * (1.0L - li);
    }
    if (effective_ridge > 0.0 && out.C > 0.0) q += effective_ridge / (C * C);
    out.q = static_cast<double>(q);
    out.sum_learnability = static_cast<double>(sumL);
    out.sum_L2 = static_cast<double>(sumL2);
    out.sum_rate = static_cast<double>(sumRate);
    return out;
}

double mode_learnability(double lambda, const TheoryConstants& constants) {
    if (std::isinf(constants.C)) return 0.0;
    const double shifted = lambda + constants.ridge_shift;
    if (shifted <= 0.0) return 0.0;
    return lambda / (shifted + constants.C);
}

std::vector<double> all_learnabilities(const Spectrum& spectrum, const TheoryConstants& constants) {
    std::vector<double> out(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out[i] = mode_learnability(spectrum.eigenvalues[i], constants);
    }
    return out;
}

double predict_learnability(const Eigen::VectorXd& coefficients, const std::vector<double>& learnability) {
    if (static_cast<std::size_t>(coefficients.size()) != learnability.size()) {
        throw std::invalid_argument("predict_learnability: size mismatch");
    }
    double norm2 = 0.0, acc = 0.0;
    for (Eigen::Index i = 0; i < coefficients.size(); ++i) {
        norm2 += coefficients[i] * coefficients[i];
        acc += coefficients[i] * coefficients[i] * learnability[i];
    }
    if (norm2 <= 0.0) throw std::invalid_argument("predict_learnability: zero target norm");
    return acc / norm2;
}

double predict_learnability(const Spectrum& spectrum, const std::vector<double>& learnability) {
    if (!spectrum.has_coefficients()) throw std::invalid_argument("predict_learnability: no coefficients");
    Eigen::VectorXd v(spectrum.size());
    for (std::size_t i = 0; i < spectrum.size(); ++i) v[i] = spectrum.coefficients[i];
    return predict_learnability(v, learnability);
}

MsePrediction predict_mse(const Spectrum& spectrum, const std::vector<double>& learnability,
                          const TheoryConstants& constants, double noise_var) {
    if (learnability.size() != spectrum.size()) throw std::invalid_argument("predict_mse: size mismatch");
    if (noise_var < 0.0) throw std::invalid_argument("predict_mse: negative noise variance");

    double bias = noise_var;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double v = spectrum.has_coefficients() ? spectrum.coefficients[i] : 0.0;
        if (v == 0.0) continue;
        const double r = 1.0 - learnability[i];
        bias += spectrum.weights[i] * r * r * v * v;
    }

    MsePrediction out;
    if (constants.n == 0.0) {
        out.value = bias;  // all learnabilities vanish
        return out;
    }
    const double denom = constants.n - constants.sum_L2;
    if (denom <= 0.0) {
        out.divergent = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = constants.n / denom * bias;
    return out;
}

std::vector<double> predict_vhat_covariance(const std::vector<double>& learnability, double mse,
                                            double n) {
    if (n <= 0.0) throw std::invalid_argument("predict_vhat_covariance: n must be > 0");
    std::vector<double> out(learnability.size());
    for (std::size_t i = 0; i < learnability.size(); ++i) {
        out[i] = learnability[i] * learnability[i] * mse / n;
    }
    return out;
}

double transfer_covariance(std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                           const Spectrum& spectrum, const TheoryConstants& constants) {
    const double denom = constants.n - constants.sum_L2;
    if (denom <= 0.0) throw std::domain_error("transfer_covariance: denominator n - sum L^2 <= 0");
    const auto L = [&](std::size_t idx) {
        return mode_learnability(spectrum.eigenvalues.at(idx), constants);
    };
    const double delta_ik = i == k, delta_jl = j == l, delta_il = i == l, delta_jk = j == k;
    const double delta_ij = i == j, delta_kl = k == l;
    const double structure = delta_ik * delta_jl + delta_il * delta_jk - delta_ij * delta_kl;
    if (structure == 0.0) return 0.0;
    return L(i) * (1.0 - L(j)) * L(k) * (1.0 - L(l)) / denom * structure;
}

std::vector<double> learnability_rate(const Spectrum& spectrum, const TheoryConstants& constants) {
    std::vector<double> out(spectrum.size());
    if (std::isinf(constants.C)) {
        // n = 0 limit: each mode grows at lambda_i / (sum lambda + ridge)
        const double denom = spectrum.trace() + constants.ridge;
        if (denom <= 0.0) throw std::domain_error("learnability_rate: empty spectrum");
        for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = spectrum.eigenvalues[i] / denom;
        return out;
    }
    double denom = constants.sum_rate;
    if (constants.ridge > 0.0 && constants.convention == RidgeConvention::LimitForm) {
        denom += constants.ridge / constants.C;
    }
    if (denom <= 0.0) throw std::domain_error("learnability_rate: all modes saturated");
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double li = mode_learnability(spectrum.eigenvalues[i], constants);
        out[i] = li * (1.0 - li) / denom;
    }
    return out;
}

double mse_slope_at_zero(const Spectrum& spectrum, double ridge, std::size_t entry) {
    if (spectrum.size() == 0) throw std::invalid_argument("mse_slope_at_zero: empty spectrum");
    const double lam = spectrum.eigenvalues.at(entry);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        sum += spectrum.weights[i] * spectrum.eigenvalues[i];
        sum2 += spectrum.weights[i] * spectrum.eigenvalues[i] * spectrum.eigenvalues[i];
    }
    return (sum2 / (sum + ridge) - 2.0 * lam) / (sum + ridge);
}

double overfit_threshold(const Spectrum& spectrum, double ridge) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        sum += spectrum.weights[i] * spectrum.eigenvalues[i];
        sum2 += spectrum.weights[i] * spectrum.eigenvalues[i] * spectrum.eigenvalues[i];
    }
    if (sum + ridge <= 0.0) return 0.0;
    return sum2 / (2.0 * (sum + ridge));
}

double predict_msg(const Eigen::VectorXd& mean_vhat, const Eigen::VectorXd& var_vhat,
                   const Eigen::MatrixXd& gradient_gram) {
    const Eigen::Index m = mean_vhat.size();
    if (var_vhat.size() != m || gradient_gram.rows() != m || gradient_gram.cols() != m) {
        throw std::invalid_argument("predict_msg: dimension mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        acc += (mean_vhat[i] * mean_vhat[i] + var_vhat[i]) * gradient_gram(i, i);
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == i) continue;
            acc += mean_vhat[i] * mean_vhat[j] * gradient_gram(i, j);
        }
    }
    return acc;
}

double predict_msg_diag(const std::vector<double>& mean_vhat, const std::vector<double>& var_vhat,
                        const std::vector<double>& gram_diag, const std::vector<double>& weights) {
    const std::size_t m = mean_vhat.size();
    if (var_vhat.size() != m || gram_diag.size() != m || weights.size() != m) {
        throw std::invalid_argument("predict_msg_diag: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        acc += weights[i] * (mean_vhat[i] * mean_vhat[i] + var_vhat[i]) * gram_diag[i];
    }
    return acc;
}

std::vector<double> gradient_gram(LevelSpectrum::DomainKind kind, int domain_param,
                                  const std::vector<ModeLabel>& modes) {
    if (kind == LevelSpectrum::DomainKind::Hypercube) {
        throw std::invalid_argument("gradient_gram: hypercube has no continuous gradient");
    }
    std::vector<double> out(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double k = modes[i].k;
        out[i] = kind == LevelSpectrum::DomainKind::Circle ? k * k : k * (k + domain_param - 2.0);
    }
    return out;
}

ParityBound parity_bound(int d, double epsilon) {
    if (d < 1 || d % 2 == 0) throw std::invalid_argument("parity_bound: d must be odd and positive");
    if (epsilon <= 0.0 || epsilon >= 1.0) throw std::invalid_argument("parity_bound: epsilon in (0, 1)");
    const double half = std::ldexp(1.0, d - 1);  // 2^(d-1)
    ParityBound out;
    out.n_min = static_cast<long long>(std::ceil(half * (1.0 - std::sqrt(epsilon)) - 1e-12));
    out.learnability_cap = static_cast<double>(out.n_min) / half;
    return out;
}

double parity_learnability_cap(int d, double n) { return n / std::ldexp(1.0, d - 1); }

double parity_mse_floor(int d, double n) {
    const double slack = 1.0 - n / std::ldexp(1.0, d - 1);
    return slack > 0.0 ? slack * slack : 0.0;
}

NoisyPrediction noisy_predictions(const Spectrum& spectrum, const std::vector<double>& learnability,
                                  const TheoryConstants& constants, double noise_var) {
    if (noise_var < 0.0) throw std::invalid_argument("noisy_predictions: negative noise variance");
    NoisyPrediction out;
    const double norm2 = spectrum.target_norm2();
    if (norm2 <= 0.0) throw std::invalid_argument("noisy_predictions: zero clean-target norm");
    const double clean_learnability = predict_learnability(spectrum, learnability);
    out.learnability = norm2 / (norm2 + noise_var) * clean_learnability;
    out.mse = predict_mse(spectrum, learnability, constants, noise_var);
    return out;
}

OtsCorrected ots_correct(double learnability_naive, double mse_naive, double n, double M) {
    if (n >= M) throw std::invalid_argument("ots_correct: requires n < M");
    const double frac = n / M;
    OtsCorrected out;
    out.learnability = (learnability_naive - frac) / (1.0 - frac);
    out.mse = mse_naive / (1.0 - frac);
    return out;
}

double mse_lower_bound(double learnability, double target_norm2) {
    const double r = 1.0 - learnability;
    return target_norm2 * r * r;
}

}  // namespace eigenlearn
