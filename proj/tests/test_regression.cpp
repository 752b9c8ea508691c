#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "eigenlearn/domain.hpp"
#include "eigenlearn/kernel.hpp"
#include "eigenlearn/montecarlo.hpp"
#include "eigenlearn/regression.hpp"
#include "eigenlearn/rng.hpp"
#include "eigenlearn/spectrum.hpp"
#include "test_util.hpp"

using namespace eigenlearn;

namespace {

struct CircleSetup {
    DiscreteDomain domain;
    Eigen::VectorXd lambdas;
    KernelSpec kernel;
};

CircleSetup circle_setup(int M) {
    CircleSetup s{build_circle(M), {}, KernelSpec::relu_ntk(4, 1.4, 0.1)};
    s.lambdas = domain_eigenvalues(circle_spectrum(s.kernel, M), s.domain);
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("regression");

TEST_CASE("single-point ridgeless regression interpolates") {
    const KernelSpec spec = KernelSpec::relu_ntk(3, 1.4, 0.1);
    Eigen::MatrixXd train(1, 2);
    train << 1.0, 0.0;
    Eigen::VectorXd y(1);
    y << 0.37;
    const Eigen::VectorXd pred = krr_predict(spec, train, y, 0.0, train);
    CHECK(pred[0] == doctest::Approx(0.37));
}

TEST_CASE("huge ridge drives predictions to zero") {
    const CircleSetup s = circle_setup(16);
    const Eigen::MatrixXd pts = s.domain.kernel_points();
    Eigen::MatrixXd train = pts.topRows(8);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(8);
    const Eigen::VectorXd pred = krr_predict(s.kernel, train, y, 1e12, pts);
    CHECK(pred.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("full ridgeless training set reproduces an eigenfunction everywhere") {
    const CircleSetup s = circle_setup(16);
    const Eigen::VectorXd f = s.domain.eigentable.row(1).transpose();  // phi_1
    double condition = 0.0;
    const Eigen::VectorXd pred =
        krr_predict(s.kernel, s.domain.kernel_points(), f, 0.0, s.domain.kernel_points(), &condition);
    CHECK((pred - f).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(condition > 1.0);
}

TEST_CASE("training predictions reproduce targets at ridge zero") {
    const CircleSetup s = circle_setup(32);
    Rng rng(17);
    const DatasetDraw draw = sample_dataset(32, 12, rng);
    Eigen::MatrixXd train(12, 2);
    Eigen::VectorXd y(12);
    for (int i = 0; i < 12; ++i) {
        train.row(i) = s.domain.kernel_points().row(draw.indices[i]);
        y[i] = rng.normal();
    }
    const Eigen::VectorXd pred = krr_predict(s.kernel, train, y, 0.0, train);
    CHECK((pred - y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("duplicate training points are rejected") {
    const KernelSpec spec = KernelSpec::gaussian(1.0);
    Eigen::MatrixXd train(2, 2);
    train << 1.0, 0.0, 1.0, 0.0;
    Eigen::VectorXd y = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(krr_predict(spec, train, y, 0.0, train), std::invalid_argument);
}

TEST_CASE("ill-conditioned systems raise SingularSystemError with a condition estimate") {
    // bandwidth so large that all kernel entries are ~1
    const KernelSpec spec = KernelSpec::gaussian(1e8);
    const DiscreteDomain dom = build_circle(8);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(8);
    try {
        krr_predict(spec, dom.kernel_points(), y, 0.0, dom.kernel_points());
        FAIL("expected SingularSystemError");
    } catch (const SingularSystemError& e) {
        CHECK(e.condition > 1e14);
    }
}

TEST_CASE("transfer matrix limits") {
    const CircleSetup s = circle_setup(10);
    SUBCASE("empty draw gives the zero matrix") {
        const Eigen::MatrixXd T = transfer_matrix(s.domain.eigentable, s.lambdas, {}, 0.0);
        CHECK(T.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("full draw at ridge zero gives the identity") {
        DatasetDraw draw;
        for (int i = 0; i < 10; ++i) draw.indices.push_back(i);
        const Eigen::MatrixXd T = transfer_matrix(s.domain.eigentable, s.lambdas, draw, 0.0);
        CHECK((T - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("trace equals the training set size at ridge zero") {
        Rng rng(3);
        const DatasetDraw draw = sample_dataset(10, 5, rng);
        const TransferOperator op(s.domain.eigentable, s.lambdas, draw, 0.0);
        CHECK(op.trace() == doctest::Approx(5.0).epsilon(1e-10));
        const Eigen::MatrixXd T = op.dense();
        CHECK(T.trace() == doctest::Approx(5.0).epsilon(1e-10));
    }
}

TEST_CASE("transfer path and krr path agree through the eigenbasis") {
    const CircleSetup s = circle_setup(16);
    Rng rng(23);
    const DatasetDraw draw = sample_dataset(16, 7, rng);
    Eigen::VectorXd v(16);
    for (int i = 0; i < 16; ++i) v[i] = rng.normal();

    const TransferOperator op(s.domain.eigentable, s.lambdas, draw, 0.0);
    const Eigen::VectorXd vhat_transfer = op.apply(v);

    const Eigen::VectorXd f = s.domain.eigentable.transpose() * v;
    Eigen::MatrixXd train(7, 2);
    Eigen::VectorXd y(7);
    for (int i = 0; i < 7; ++i) {
        train.row(i) = s.domain.kernel_points().row(draw.indices[i]);
        y[i] = f[draw.indices[i]];
    }
    const Eigen::VectorXd fhat = krr_predict(s.kernel, train, y, 0.0, s.domain.kernel_points());
    const Eigen::VectorXd vhat_krr = decompose_target(s.domain, fhat);
    CHECK((vhat_transfer - vhat_krr).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("d_learnability basics and bounds for eigenfunctions") {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
    v[2] = 1.5;
    CHECK(d_learnability(v, v) == doctest::Approx(1.0));
    CHECK(d_learnability(v, Eigen::VectorXd::Zero(8)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(d_learnability(Eigen::VectorXd::Zero(8), v), std::invalid_argument);

    const CircleSetup s = circle_setup(8);
    Rng rng(31);
    for (double ridge : {0.0, 0.05, 1.0}) {
        for (int trial = 0; trial < 20; ++trial) {
            const DatasetDraw draw = sample_dataset(8, 1 + static_cast<int>(rng.uniform_index(7)), rng);
            const TransferOperator op(s.domain.eigentable, s.lambdas, draw, ridge);
            for (int mode = 0; mode < 8; ++mode) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(8);
                e[mode] = 1.0;
                const double lrn = d_learnability(e, op.apply(e));
                CHECK(lrn >= -1e-10);
                CHECK(lrn <= 1.0 + 1e-10);
            }
        }
    }
}

TEST_CASE("d_mse basics") {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
    v[1] = 2.0;
    CHECK(d_mse_full(v, v) == doctest::Approx(0.0));
    CHECK(d_mse_full(v, Eigen::VectorXd::Zero(6)) == doctest::Approx(4.0));
}

TEST_CASE("low-learnability modes are overfit off the training set") {
    // the smallest-eigenvalue mode always has L <= n/M; its mean OTS MSE must
    // be at least the punting baseline ||f||^2 = 1
    const CircleSetup s = circle_setup(16);
    int worst_mode = 0;
    for (int i = 1; i < 16; ++i) {
        if (s.lambdas[i] < s.lambdas[worst_mode]) worst_mode = i;
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(16);
    e[worst_mode] = 1.0;
    Rng rng(57);
    double acc = 0.0;
    std::vector<double> vals;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        const DatasetDraw draw = sample_dataset(16, 6, rng);
        const TransferOperator op(s.domain.eigentable, s.lambdas, draw, 0.0);
        vals.push_back(d_mse_ots(s.domain, e, op.apply(e), draw));
        acc += vals.back();
    }
    const double mean = acc / trials;
    double var = 0.0;
    for (double x : vals) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (trials - 1.0) / trials);
    CHECK(mean >= 1.0 - 3.0 * se);
}

TEST_CASE("d_mse_ots rejects a full draw") {
    const CircleSetup s = circle_setup(8);
    DatasetDraw draw;
    for (int i = 0; i < 8; ++i) draw.indices.push_back(i);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
    v[0] = 1.0;
    CHECK_THROWS_AS(d_mse_ots(s.domain, v, v, draw), std::invalid_argument);
}

TEST_CASE("discrete circle MSG of pure modes") {
    const DiscreteDomain dom = build_circle(256);
    SUBCASE("constant function has zero gradient") {
        CHECK(empirical_msg_circle(Eigen::VectorXd::Ones(256)) == doctest::Approx(0.0));
    }
    SUBCASE("mode k gives k^2 up to the discretization factor") {
        for (int mode : {1, 9}) {  // rows 1 and 9 are cos modes k=1 and k=5
            const int k = dom.modes[mode].k;
            const Eigen::VectorXd f = dom.eigentable.row(mode).transpose();
            const double msg = empirical_msg_circle(f);
            CHECK(msg == doctest::Approx(circle_discrete_gradient_entry(k, 256)).epsilon(1e-10));
            const double rel_err = std::abs(msg - k * k) / (k * k);
            const double budget = std::pow(2.0 * std::numbers::pi * k / 256.0, 2.0) / 6.0;
            CHECK(rel_err <= budget);
        }
    }
    SUBCASE("needs at least three samples") {
        CHECK_THROWS_AS(empirical_msg_circle(Eigen::VectorXd::Ones(2)), std::invalid_argument);
    }
}

TEST_CASE("sphere MSG finite differences recover level gradients") {
    // exact level-k function: E |grad f|^2 = k (k + d - 2) for unit-mean-square f
    const int d = 3, k = 2;
    Rng rng(77);
    const SpherePointSet set = sample_hypersphere(d, 4000, 31);
    Eigen::VectorXd axis(d + 1);
    for (int i = 0; i <= d; ++i) axis[i] = rng.normal();
    axis /= axis.norm();
    auto predict = [&](const Eigen::MatrixXd& pts) { return sphere_level_target(k, d, axis, pts); };
    const double msg = empirical_msg_sphere(predict, set.points, d, 1e-3, rng);
    // tangential gradient of a level-k mode: the Laplace-Beltrami value k (k + d - 1)
    CHECK(msg == doctest::Approx(sphere_gradient_entry(k, d)).epsilon(0.10));
}

TEST_CASE("ridge acts as a uniform eigenvalue shift") {
    Rng rng(13);
    const int M = 64, n = 16;
    const Eigen::MatrixXd table = testutil::random_eigentable(M, rng);
    Eigen::VectorXd lambdas(M);
    for (int i = 0; i < M; ++i) lambdas[i] = std::pow(10.0, -3.0 * rng.uniform());
    const DatasetDraw draw = sample_dataset(M, n, rng);
    for (double ridge : {1e-3, 1e-1}) {
        CAPTURE(ridge);
        const Eigen::MatrixXd lhs = transfer_matrix(table, lambdas, draw, ridge);
        const Eigen::VectorXd shifted = lambdas.array() + ridge / M;
        const Eigen::MatrixXd rhs = (lambdas.array() / shifted.array()).matrix().asDiagonal() *
                                    transfer_matrix(table, shifted, draw, 0.0);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("learnability grows monotonically under nested draws") {
    const CircleSetup s = circle_setup(8);
    Rng rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = static_cast<int>(rng.uniform_index(4));
        const DatasetDraw draw = sample_dataset(8, n, rng);
        std::vector<char> used(8, 0);
        for (int idx : draw.indices) used[idx] = 1;
        int extra = static_cast<int>(rng.uniform_index(8));
        while (used[extra]) extra = (extra + 1) % 8;
        DatasetDraw bigger = draw;
        bigger.indices.push_back(extra);
        std::sort(bigger.indices.begin(), bigger.indices.end());

        const Eigen::MatrixXd small = transfer_matrix(s.domain.eigentable, s.lambdas, draw, 0.0);
        const Eigen::MatrixXd large = transfer_matrix(s.domain.eigentable, s.lambdas, bigger, 0.0);
        for (int i = 0; i < 8; ++i) {
            CHECK(large(i, i) >= small(i, i) - 1e-10);
        }
    }
}

TEST_CASE("eigenvalue competition and ridge monotonicity (finite differences)") {
    const CircleSetup s = circle_setup(8);
    Rng rng(59);
    for (int trial = 0; trial < 20; ++trial) {
        const DatasetDraw draw = sample_dataset(8, 4, rng);
        const int i = static_cast<int>(rng.uniform_index(8));

        // d T_jj / d lambda_i: own-mode derivative >= 0, cross-mode <= 0
        Eigen::VectorXd up = s.lambdas, down = s.lambdas;
        const double h = s.lambdas[i] * 1e-6;
        up[i] += h;
        down[i] -= h;
        const Eigen::MatrixXd Tu = transfer_matrix(s.domain.eigentable, up, draw, 0.0);
        const Eigen::MatrixXd Td = transfer_matrix(s.domain.eigentable, down, draw, 0.0);
        for (int j = 0; j < 8; ++j) {
            const double deriv = (Tu(j, j) - Td(j, j)) / (2.0 * h);
            if (j == i) {
                CHECK(deriv >= -1e-8);
            } else {
                CHECK(deriv <= 1e-8);
            }
        }

        // T_ii non-increasing along a ridge grid
        double prev = std::numeric_limits<double>::infinity();
        for (double ridge : {0.0, 1e-3, 1e-2, 1e-1, 1.0}) {
            const Eigen::MatrixXd T = transfer_matrix(s.domain.eigentable, s.lambdas, draw, ridge);
            CHECK(T(i, i) <= prev + 1e-8);
            prev = T(i, i);
        }
    }
}

TEST_SUITE_END();
