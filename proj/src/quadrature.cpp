#include "eigenlearn/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace eigenlearn {

namespace {

// Monic three-term recurrence coefficient beta_k for the weight (1-t^2)^alpha
// (Jacobi with alpha = beta); the a_k all vanish by symmetry.
long double beta_coeff(int k, long double alpha) {
    const long double kk = k;
    return kk * (kk + 2.0L * alpha) /
           ((2.0L * kk + 2.0L * alpha + 1.0L) * (2.0L * kk + 2.0L * alpha - 1.0L));
}

struct PolyEval {
    long double p;       // orthonormal p_n(x)
    long double dp;      // derivative p_n'(x)
    long double sumsq;   // sum_{k=0}^{n-1} p_k(x)^2
};

PolyEval eval_orthonormal(int n, long double x, long double mu0, const std::vector<long double>& b) {
    long double pm1 = 0.0L, p = 1.0L / std::sqrt(mu0);
    long double dpm1 = 0.0L, dp = 0.0L;
    long double sumsq = p * p;
    for (int k = 0; k < n; ++k) {
        const long double pn = (x * p - b[k] * pm1) / b[k + 1];
        const long double dpn = (p + x * dp - b[k] * dpm1) / b[k + 1];
        pm1 = p; p = pn;
        dpm1 = dp; dp = dpn;
        if (k + 1 < n) sumsq += p * p;
    }
    return {p, dp, sumsq};
}

}  // namespace

JacobiRule gauss_jacobi_symmetric(int n, double alpha) {
    if (n < 1) throw std::invalid_argument("gauss_jacobi_symmetric: n must be >= 1");
    if (alpha <= -1.0) throw std::invalid_argument("gauss_jacobi_symmetric: alpha must be > -1");

    const long double a = alpha;
    const long double mu0 =
        std::exp((2.0L * a + 1.0L) * std::log(2.0L) + 2.0L * std::lgamma(a + 1.0L) - std::lgamma(2.0L * a + 2.0L));

    // b[k] = sqrt(beta_k); b[0] unused by the recurrence start.
    std::vector<long double> b(n + 1);
    b[0] = 1.0L;
    for (int k = 1; k <= n; ++k) b[k] = std::sqrt(beta_coeff(k, a));

    // Double-precision Golub-Welsch eigenvalues as Newton starting points.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd subdiag(std::max(0, n - 1));
    for (int k = 1; k < n; ++k) subdiag[k - 1] = static_cast<double>(b[k]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);

    JacobiRule rule;
    rule.mu0 = mu0;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        long double x = es.eigenvalues()[i];
        for (int iter = 0; iter < 8; ++iter) {
            const auto ev = eval_orthonormal(n, x, mu0, b);
            if (ev.dp == 0.0L) break;
            const long double step = ev.p / ev.dp;
            x -= step;
            if (std::fabs(step) < 1e-20L * (1.0L + std::fabs(x))) break;
        }
        const auto ev = eval_orthonormal(n, x, mu0, b);
        rule.nodes[i] = x;
        rule.weights[i] = 1.0L / ev.sumsq;
    }
    return rule;
}

}  // namespace eigenlearn
