#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <numbers>

#include "eigenlearn/domain.hpp"
#include "eigenlearn/kernel.hpp"
#include "eigenlearn/rng.hpp"
#include "eigenlearn/spectrum.hpp"
#include "test_util.hpp"

using namespace eigenlearn;

TEST_SUITE_BEGIN("kernel");

TEST_CASE("gaussian kernel at zero distance") {
    const KernelSpec spec = KernelSpec::gaussian(0.7);
    Eigen::VectorXd x(3);
    x << 0.3, -1.1, 2.0;
    CHECK(kernel_eval(spec, x, x) == doctest::Approx(1.0));
}

TEST_CASE("depth-1 relu ntk equals the one-layer arc-cosine closed form") {
    // oracle: with sigma_w = sqrt(2), sigma_b = 0 and cosine t,
    //   Sigma^1 = 2t, Theta^2 = (2/pi) (sqrt(1-t^2) + 2 t (pi - acos t))
    const double sw = std::sqrt(2.0);
    for (double t : {-1.0, -0.6, -0.2, 0.0, 0.3, 0.7, 0.95, 1.0}) {
        CAPTURE(t);
        const double theta = std::acos(t);
        const double closed =
            (2.0 / std::numbers::pi) * (std::sqrt(std::max(0.0, 1.0 - t * t)) + 2.0 * t * (std::numbers::pi - theta));
        const double ts[1] = {t};
        const double via_recursion = ntk_relu_profile(1, sw, 0.0, ts)[0];
        CHECK(via_recursion == doctest::Approx(closed).epsilon(1e-12));
    }
}

TEST_CASE("relu ntk is symmetric in its arguments") {
    const KernelSpec spec = KernelSpec::relu_ntk(4, 1.4, 0.1);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd x = testutil::random_unit(4, rng);
        const Eigen::VectorXd y = testutil::random_unit(4, rng);
        CHECK(kernel_eval(spec, x, y) == kernel_eval(spec, y, x));
    }
}

TEST_CASE("orthant probability at zero correlation is 1/4 (quadrature oracle)") {
    // E[relu'(u) relu'(v)] = P(u > 0, v > 0); at corr 0 this is exactly 1/4.
    // 2-d Gauss-Legendre over [0, 8]^2 of the standard normal density.
    const int N = 80;
    std::vector<double> nodes(N), weights(N);
    {
        // Newton on Legendre polynomials
        for (int i = 0; i < N; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
            for (int it = 0; it < 60; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= N; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double step = p1 / dp;
                x -= step;
                if (std::abs(step) < 1e-15) break;
            }
            nodes[i] = x;
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= N; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = N * (x * p1 - p0) / (x * x - 1.0);
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
    const double half = 4.0;  // map [-1,1] -> [0,8]
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const double u = half * (nodes[i] + 1.0);
        for (int j = 0; j < N; ++j) {
            const double v = half * (nodes[j] + 1.0);
            acc += weights[i] * weights[j] * std::exp(-0.5 * (u * u + v * v));
        }
    }
    acc *= half * half / (2.0 * std::numbers::pi);
    CHECK(acc == doctest::Approx(0.25).epsilon(1e-8));
    // the closed form the layer recursion uses at t = 0
    CHECK((std::numbers::pi - std::acos(0.0)) / (2.0 * std::numbers::pi) == doctest::Approx(0.25));
}

TEST_CASE("ntk profile peaks at t = 1 and is monotone on [0, 1]") {
    // the arc-cosine tangent kernel has a shallow dip near t = -1 (verified
    // against the one-layer closed form), so monotonicity holds from 0 up
    for (int depth : {1, 4}) {
        std::vector<double> ts;
        for (int i = 0; i <= 200; ++i) ts.push_back(-1.0 + i / 100.0);
        const auto vals = ntk_relu_profile(depth, 1.4, 0.1, ts);
        for (std::size_t i = 101; i < vals.size(); ++i) CHECK(vals[i] >= vals[i - 1] - 1e-12);
        CHECK(vals.back() == *std::max_element(vals.begin(), vals.end()));
    }
}

TEST_CASE("ntk profile rejects cosines outside [-1, 1]") {
    const double bad[1] = {1.0 + 1e-9};
    CHECK_THROWS_AS(ntk_relu_profile(4, 1.4, 0.1, bad), std::invalid_argument);
    const double ok[1] = {1.0 + 1e-13};  // clamped
    CHECK(ntk_relu_profile(4, 1.4, 0.1, ok)[0] > 0.0);
}

TEST_CASE("hypercube ntk eigenvalues decrease monotonically in k") {
    const LevelSpectrum levels = hypercube_spectrum(KernelSpec::relu_ntk(4, 1.4, 0.1), 8);
    for (int k = 1; k <= 8; ++k) {
        CHECK(levels.level_eigenvalues[k] < levels.level_eigenvalues[k - 1]);
    }
}

TEST_CASE("gram of a single point") {
    const KernelSpec spec = KernelSpec::relu_ntk(2, 1.4, 0.1);
    Eigen::MatrixXd pts(1, 3);
    pts << 1.0, 0.0, 0.0;
    const GramMatrix g = gram_matrix(spec, pts);
    REQUIRE(g.count == 1);
    CHECK(g.entries(0, 0) == doctest::Approx(spec.profile(1.0)));
}

TEST_CASE("gram on the circle is circulant for every variant") {
    const DiscreteDomain dom = build_circle(10);
    for (const KernelSpec& spec :
         {KernelSpec::relu_ntk(3, 1.4, 0.1), KernelSpec::gaussian(1.0), KernelSpec::laplacian(0.8)}) {
        CAPTURE(spec.variant_name());
        const GramMatrix g = gram_matrix(spec, dom.kernel_points());
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                worst = std::max(worst, std::abs(g.entries(i, (j + i) % 10) - g.entries(0, j)));
            }
        }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("gram matrices are PSD up to tolerance (eigensolver oracle)") {
    Rng rng(21);
    for (const KernelSpec& spec :
         {KernelSpec::relu_ntk(4, 1.4, 0.1), KernelSpec::gaussian(0.9), KernelSpec::laplacian(1.1)}) {
        CAPTURE(spec.variant_name());
        for (int set = 0; set < 20; ++set) {
            Eigen::MatrixXd pts(30, 4);
            for (int i = 0; i < 30; ++i) pts.row(i) = testutil::random_unit(4, rng).transpose();
            const GramMatrix g = gram_matrix(spec, pts);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.entries, Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues().minCoeff() > -1e-8);
        }
    }
}

TEST_CASE("50 random sphere points give a PSD ntk gram") {
    const SpherePointSet set = sample_hypersphere(3, 50, 123);
    const GramMatrix g = gram_matrix(KernelSpec::relu_ntk(4, 1.4, 0.1), set.points);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.entries, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("rotation invariance: kernel value depends only on the cosine") {
    Rng rng(5);
    const KernelSpec spec = KernelSpec::relu_ntk(4, 1.4, 0.1);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = testutil::random_unit(5, rng);
        const Eigen::VectorXd y = testutil::random_unit(5, rng);
        const Eigen::MatrixXd Q = testutil::random_eigentable(5, rng) / std::sqrt(5.0);
        const double direct = kernel_eval(spec, x, y);
        const double rotated = kernel_eval(spec, Q * x, Q * y);
        CHECK(std::abs(direct - rotated) < 1e-10);
        CHECK(std::abs(direct - spec.profile(x.dot(y))) < 1e-10);
    }
}

TEST_CASE("jitter lands on the gram diagonal only") {
    KernelSpec spec = KernelSpec::gaussian(1.0);
    spec.jitter = 1e-3;
    const DiscreteDomain dom = build_circle(6);
    const GramMatrix with = gram_matrix(spec, dom.kernel_points());
    spec.jitter = 0.0;
    const GramMatrix without = gram_matrix(spec, dom.kernel_points());
    CHECK((with.entries - without.entries).diagonal().isApproxToConstant(1e-3, 1e-9));
    CHECK(((with.entries - without.entries).cwiseAbs().sum() -
           (with.entries - without.entries).diagonal().cwiseAbs().sum()) == doctest::Approx(0.0));
}

TEST_CASE("kernel_eval rejects dimension mismatch") {
    Eigen::VectorXd x(2), y(3);
    x.setOnes();
    y.setOnes();
    CHECK_THROWS_AS(kernel_eval(KernelSpec::gaussian(1.0), x, y), std::invalid_argument);
}

TEST_CASE("tabulated profile interpolates and validates its domain") {
    // sample the depth-2 ntk profile and rebuild it through the interpolant
    const KernelSpec ntk = KernelSpec::relu_ntk(2, 1.4, 0.1);
    std::vector<double> ts, vals;
    for (int i = 0; i <= 100; ++i) {
        ts.push_back(-1.0 + i * 0.02);
        vals.push_back(ntk.profile(ts.back()));
    }
    const KernelSpec tab = KernelSpec::tabulated(TabulatedProfile(ts, vals));
    for (double t : {-0.73, -0.11, 0.27, 0.81}) {
        CHECK(tab.profile(t) == doctest::Approx(ntk.profile(t)).epsilon(1e-6));
    }
    CHECK(tab.profile(1.0 + 5e-13) == doctest::Approx(ntk.profile(1.0)));
    CHECK_THROWS_AS(tab.profile(1.0 + 1e-9), std::invalid_argument);

    // Fritsch-Carlson preserves monotone data (cubic samples)
    std::vector<double> mt, mv;
    for (int i = 0; i <= 40; ++i) {
        mt.push_back(-1.0 + i * 0.05);
        mv.push_back(mt.back() * mt.back() * mt.back());
    }
    const TabulatedProfile cubic(mt, mv);
    for (int i = 0; i <= 400; ++i) {
        const double a = -1.0 + i * 0.005;
        const double b = a + 0.005;
        if (b > 1.0) break;
        CHECK(cubic(b) >= cubic(a) - 1e-12);
    }
}

TEST_CASE("tabulated profile loads from a two-column file") {
    const std::string path = "profile_test.tmp";
    {
        std::ofstream out(path);
        out << "# cosine kappa\n";
        out << "-1.0, 0.5\n";
        out << "0.0 1.0\n";
        out << "1.0, 2.0\n";
    }
    const TabulatedProfile profile = load_tabulated_profile(path);
    CHECK(profile(-1.0) == doctest::Approx(0.5));
    CHECK(profile(1.0) == doctest::Approx(2.0));
    CHECK(profile(0.0) == doctest::Approx(1.0));
    std::remove(path.c_str());
}

TEST_SUITE_END();
