#include "eigenlearn/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace eigenlearn {

namespace {

double ldlt_condition(const Eigen::LDLT<Eigen::MatrixXd>& solver) {
    const Eigen::VectorXd d = solver.vectorD().cwiseAbs();
    if (d.size() == 0) return 1.0;
    const double lo = d.minCoeff();
    const double hi = d.maxCoeff();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

constexpr double kConditionLimit = 1e14;

}  // namespace

TransferOperator::TransferOperator(const Eigen::MatrixXd& eigentable,
                                   const Eigen::VectorXd& eigenvalues, const DatasetDraw& draw,
                                   double ridge)
    : eigenvalues_(eigenvalues), ridge_(ridge) {
    const int M = static_cast<int>(eigentable.rows());
    if (eigenvalues.size() != M) throw std::invalid_argument("TransferOperator: eigenvalue count mismatch");
    if (ridge < 0.0) throw std::invalid_argument("TransferOperator: ridge must be >= 0");
    if ((eigenvalues.array() < 0.0).any()) {
        throw std::invalid_argument("TransferOperator: eigenvalues must be nonnegative");
    }

    std::unordered_set<int> seen;
    for (int idx : draw.indices) {
        if (idx < 0 || idx >= static_cast<int>(eigentable.cols())) {
            throw std::out_of_range("TransferOperator: draw index out of range");
        }
        if (!seen.insert(idx).second) throw std::invalid_argument("TransferOperator: duplicate draw index");
    }

    const int n = draw.n();
    phi_.resize(M, n);
    for (int j = 0; j < n; ++j) phi_.col(j) = eigentable.col(draw.indices[j]);

    if (n == 0) {
        condition_ = 1.0;
        return;
    }
    Eigen::MatrixXd K = phi_.transpose() * eigenvalues_.asDiagonal() * phi_;
    K = ((K + K.transpose()) / 2.0).eval();
    K.diagonal().array() += ridge;
    solver_.compute(K);
    condition_ = ldlt_condition(solver_);
    if (solver_.info() != Eigen::Success || !solver_.isPositive() || condition_ > kConditionLimit) {
        throw SingularSystemError(
            "TransferOperator: kernel system singular or ill-conditioned (condition estimate " +
                std::to_string(condition_) + ")",
            condition_);
    }
}

Eigen::VectorXd TransferOperator::apply(const Eigen::VectorXd& v) const {
    if (v.size() != modes()) throw std::invalid_argument("TransferOperator::apply: size mismatch");
    if (n() == 0) return Eigen::VectorXd::Zero(modes());
    const Eigen::VectorXd rhs = phi_.transpose() * v;
    return eigenvalues_.asDiagonal() * (phi_ * solver_.solve(rhs));
}

double TransferOperator::trace() const {
    if (n() == 0) return 0.0;
    if (ridge_ == 0.0) return static_cast<double>(n());
    // trace(T) = trace(K^-1 (K - ridge I)) = n - ridge * trace(K^-1)
    const Eigen::MatrixXd inv = solver_.solve(Eigen::MatrixXd::Identity(n(), n()));
    return n() - ridge_ * inv.trace();
}

Eigen::MatrixXd TransferOperator::dense() const {
    if (n() == 0) return Eigen::MatrixXd::Zero(modes(), modes());
    const Eigen::MatrixXd solved = solver_.solve(phi_.transpose());
    return eigenvalues_.asDiagonal() * (phi_ * solved);
}

Eigen::MatrixXd transfer_matrix(const Eigen::MatrixXd& eigentable, const Eigen::VectorXd& eigenvalues,
                                const DatasetDraw& draw, double ridge) {
    return TransferOperator(eigentable, eigenvalues, draw, ridge).dense();
}

KrrSolution krr_fit(const KernelSpec& spec, const Eigen::MatrixXd& train_points,
                    const Eigen::VectorXd& train_targets, double ridge) {
    const int n = static_cast<int>(train_points.rows());
    if (n == 0) throw std::invalid_argument("krr_fit: empty training set");
    if (train_targets.size() != n) throw std::invalid_argument("krr_fit: target length mismatch");
    if (ridge < 0.0) throw std::invalid_argument("krr_fit: ridge must be >= 0");
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if ((train_points.row(i) - train_points.row(j)).norm() == 0.0) {
                throw std::invalid_argument("krr_fit: duplicate training points");
            }
        }
    }

    GramMatrix gram = gram_matrix(spec, train_points);
    gram.entries.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> solver(gram.entries);
    const double condition = ldlt_condition(solver);
    if (solver.info() != Eigen::Success || !solver.isPositive() || condition > kConditionLimit) {
        throw SingularSystemError("krr_fit: kernel matrix singular or ill-conditioned (condition estimate " +
                                      std::to_string(condition) + ")",
                                  condition);
    }
    return {solver.solve(train_targets), condition};
}

Eigen::VectorXd krr_apply(const KernelSpec& spec, const Eigen::MatrixXd& train_points,
                          const KrrSolution& solution, const Eigen::MatrixXd& test_points) {
    return kernel_cross(spec, test_points, train_points) * solution.alpha;
}

Eigen::VectorXd krr_predict(const KernelSpec& spec, const Eigen::MatrixXd& train_points,
                            const Eigen::VectorXd& train_targets, double ridge,
                            const Eigen::MatrixXd& test_points, double* condition_out) {
    const KrrSolution sol = krr_fit(spec, train_points, train_targets, ridge);
    if (condition_out) *condition_out = sol.condition;
    return krr_apply(spec, train_points, sol, test_points);
}

double d_learnability(const Eigen::VectorXd& v, const Eigen::VectorXd& vhat) {
    const double norm2 = v.squaredNorm();
    if (norm2 <= 0.0) throw std::invalid_argument("d_learnability: zero target norm");
    return v.dot(vhat) / norm2;
}

double d_mse_full(const Eigen::VectorXd& v, const Eigen::VectorXd& vhat) {
    if (v.size() != vhat.size()) throw std::invalid_argument("d_mse_full: size mismatch");
    return (v - vhat).squaredNorm();
}

double d_mse_ots(const DiscreteDomain& domain, const Eigen::VectorXd& v, const Eigen::VectorXd& vhat,
                 const DatasetDraw& draw) {
    if (draw.n() >= domain.M) throw std::invalid_argument("d_mse_ots: draw covers the whole domain");
    const Eigen::VectorXd f = domain.eigentable.transpose() * v;
    const Eigen::VectorXd fhat = domain.eigentable.transpose() * vhat;
    std::vector<bool> in_draw(domain.M, false);
    for (int idx : draw.indices) in_draw[idx] = true;
    double acc = 0.0;
    for (int j = 0; j < domain.M; ++j) {
        if (in_draw[j]) continue;
        const double r = f[j] - fhat[j];
        acc += r * r;
    }
    return acc / (domain.M - draw.n());
}

double empirical_msg_circle(const Eigen::VectorXd& fhat_values) {
    const int M = static_cast<int>(fhat_values.size());
    if (M < 3) throw std::invalid_argument("empirical_msg_circle: need at least 3 grid values");
    double acc = 0.0;
    for (int j = 0; j < M; ++j) {
        const double diff = fhat_values[(j + 1) % M] - fhat_values[j];
        acc += diff * diff;
    }
    const double scale = M / (2.0 * std::numbers::pi);
    return acc / M * scale * scale;
}

double circle_discrete_gradient_entry(int k, int M) {
    const double s = std::sin(std::numbers::pi * k / M);
    const double scale = M / std::numbers::pi;
    return scale * scale * s * s;
}

double sphere_gradient_entry(int k, int d) { return k * (k + d - 1.0); }

double empirical_msg_sphere(const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& predict,
                            const Eigen::MatrixXd& points, int d, double step, Rng& rng) {
    const int count = static_cast<int>(points.rows());
    if (count == 0) throw std::invalid_argument("empirical_msg_sphere: no evaluation points");
    if (points.cols() != d + 1) throw std::invalid_argument("empirical_msg_sphere: dimension mismatch");

    Eigen::MatrixXd forward(count, d + 1), backward(count, d + 1);
    for (int i = 0; i < count; ++i) {
        Eigen::VectorXd u(d + 1);
        double norm = 0.0;
        do {
            for (int j = 0; j <= d; ++j) u[j] = rng.normal();
            u -= u.dot(points.row(i)) * points.row(i).transpose();
            norm = u.norm();
        } while (norm < 1e-12);
        u /= norm;
        forward.row(i) = std::cos(step) * points.row(i) + std::sin(step) * u.transpose();
        backward.row(i) = std::cos(step) * points.row(i) - std::sin(step) * u.transpose();
    }
    const Eigen::VectorXd fp = predict(forward);
    const Eigen::VectorXd fm = predict(backward);
    const Eigen::VectorXd directional = (fp - fm) / (2.0 * step);
    // a random tangent direction sees |grad|^2 / d on average
    return d * directional.squaredNorm() / count;
}

}  // namespace eigenlearn
