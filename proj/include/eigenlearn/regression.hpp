// Exact kernel ridge regression and the exact learning transfer matrix,
// producing per-draw empirical quantities.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "eigenlearn/domain.hpp"
#include "eigenlearn/kernel.hpp"
#include "eigenlearn/rng.hpp"

namespace eigenlearn {

struct DatasetDraw {
    std::vector<int> indices;  // distinct point indices, sorted
    std::uint64_t seed = 0;

    int n() const { return static_cast<int>(indices.size()); }
};

class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, double condition)
        : std::runtime_error(what), condition(condition) {}
    double condition;
};

// Factorized form of T = Lambda Phi (Phi^T Lambda Phi + ridge I)^-1 Phi^T for
// one dataset draw. `eigentable` rows are eigenfunctions; the design submatrix
// takes the drawn columns.
class TransferOperator {
public:
    TransferOperator(const Eigen::MatrixXd& eigentable, const Eigen::VectorXd& eigenvalues,
                     const DatasetDraw& draw, double ridge);

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;  // vhat = T v
    double trace() const;
    Eigen::MatrixXd dense() const;
    double condition_estimate() const { return condition_; }
    int n() const { return static_cast<int>(phi_.cols()); }
    int modes() const { return static_cast<int>(phi_.rows()); }

private:
    Eigen::MatrixXd phi_;  // M x n
    Eigen::VectorXd eigenvalues_;
    Eigen::LDLT<Eigen::MatrixXd> solver_;
    double ridge_ = 0.0;
    double condition_ = 0.0;
};

Eigen::MatrixXd transfer_matrix(const Eigen::MatrixXd& eigentable, const Eigen::VectorXd& eigenvalues,
                                const DatasetDraw& draw, double ridge);

struct KrrSolution {
    Eigen::VectorXd alpha;
    double condition = 0.0;
};

KrrSolution krr_fit(const KernelSpec& spec, const Eigen::MatrixXd& train_points,
                    const Eigen::VectorXd& train_targets, double ridge);

Eigen::VectorXd krr_apply(const KernelSpec& spec, const Eigen::MatrixXd& train_points,
                          const KrrSolution& solution, const Eigen::MatrixXd& test_points);

Eigen::VectorXd krr_predict(const KernelSpec& spec, const Eigen::MatrixXd& train_points,
                            const Eigen::VectorXd& train_targets, double ridge,
                            const Eigen::MatrixXd& test_points, double* condition_out = nullptr);

// <f, fhat> / ||f||^2 in coefficient space.
double d_learnability(const Eigen::VectorXd& v, const Eigen::VectorXd& vhat);

double d_mse_full(const Eigen::VectorXd& v, const Eigen::VectorXd& vhat);

// Pointwise mean squared error over the M - n points outside the draw.
double d_mse_ots(const DiscreteDomain& domain, const Eigen::VectorXd& v,
                 const Eigen::VectorXd& vhat, const DatasetDraw& draw);

// Discrete mean squared gradient on the circle grid: mean squared neighbor
// difference rescaled by (M / 2 pi)^2.
double empirical_msg_circle(const Eigen::VectorXd& fhat_values);

// Exact gradient Gram entry of the discrete circle difference statistic for
// frequency k (approaches k^2 for k << M).
double circle_discrete_gradient_entry(int k, int M);

// Tangential mean squared gradient of a unit-mean-square level-k function on
// S^d embedded in R^(d+1): the Laplace-Beltrami eigenvalue k (k + d - 1).
double sphere_gradient_entry(int k, int d);

// Central finite differences along random tangent directions on S^d, averaged
// over the given evaluation points; `predict` maps a point matrix to values.
double empirical_msg_sphere(const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& predict,
                            const Eigen::MatrixXd& points, int d, double step, Rng& rng);

}  // namespace eigenlearn
