#include <doctest.h>

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "eigenlearn/domain.hpp"
#include "eigenlearn/rng.hpp"

using namespace eigenlearn;

TEST_SUITE_BEGIN("domain");

TEST_CASE("circle constant mode is all ones") {
    const DiscreteDomain dom = build_circle(4);
    CHECK(dom.modes[0].family == ModeLabel::Family::CircleConstant);
    for (int j = 0; j < 4; ++j) CHECK(dom.eigentable(0, j) == doctest::Approx(1.0));
}

TEST_CASE("circle M=256 has levels 0..128 with the right degeneracies") {
    const DiscreteDomain dom = build_circle(256);
    REQUIRE(dom.M == 256);
    REQUIRE(static_cast<int>(dom.modes.size()) == 256);
    std::map<int, int> mult;
    for (const auto& m : dom.modes) ++mult[m.k];
    CHECK(mult[0] == 1);
    CHECK(mult[128] == 1);
    for (int k = 1; k < 128; ++k) CHECK(mult[k] == 2);
}

TEST_CASE("circle M=10 orthonormality against direct multiplication") {
    const DiscreteDomain dom = build_circle(10);
    const Eigen::MatrixXd gram = dom.eigentable * dom.eigentable.transpose();
    CHECK((gram - 10.0 * Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("circle orthonormality and completeness for both parities of M") {
    for (int M : {2, 3, 5, 8, 9, 64}) {
        CAPTURE(M);
        const DiscreteDomain dom = build_circle(M);
        CHECK(static_cast<int>(dom.modes.size()) == M);
        const Eigen::MatrixXd gram = dom.eigentable * dom.eigentable.transpose() / M;
        CHECK((gram - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff() < 1e-9);
        for (int i = 0; i < M; ++i) {
            CHECK(dom.eigentable.row(i).squaredNorm() / M == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("circle rejects M < 2") {
    CHECK_THROWS_AS(build_circle(1), std::invalid_argument);
    CHECK_THROWS_AS(build_circle(0), std::invalid_argument);
}

TEST_CASE("hypercube d=1 modes") {
    const DiscreteDomain dom = build_hypercube(1);
    REQUIRE(dom.M == 2);
    CHECK(dom.modes[0].k == 0);
    CHECK(dom.modes[1].k == 1);
    CHECK(dom.eigentable.row(0).isApproxToConstant(1.0));
}

TEST_CASE("hypercube d=8 level degeneracies are binomial") {
    const DiscreteDomain dom = build_hypercube(8);
    REQUIRE(dom.M == 256);
    const int expected[] = {1, 8, 28, 56, 70, 56, 28, 8, 1};
    std::map<int, int> mult;
    for (const auto& m : dom.modes) ++mult[m.k];
    for (int k = 0; k <= 8; ++k) CHECK(mult[k] == expected[k]);
}

TEST_CASE("hypercube d=3 eigentable matches the explicit Walsh construction") {
    const DiscreteDomain dom = build_hypercube(3);
    // oracle: 8x8 Walsh matrix from the tensor-product construction
    Eigen::MatrixXd walsh(1, 1);
    walsh(0, 0) = 1.0;
    for (int r = 0; r < 3; ++r) {
        Eigen::MatrixXd next(2 * walsh.rows(), 2 * walsh.cols());
        next << walsh, walsh, walsh, -walsh;
        walsh = next;
    }
    // every eigentable row equals a distinct Walsh row up to sign
    std::set<int> used;
    for (int i = 0; i < 8; ++i) {
        bool found = false;
        for (int w = 0; w < 8 && !found; ++w) {
            if (used.count(w)) continue;
            if ((dom.eigentable.row(i) - walsh.row(w)).cwiseAbs().maxCoeff() < 1e-12 ||
                (dom.eigentable.row(i) + walsh.row(w)).cwiseAbs().maxCoeff() < 1e-12) {
                used.insert(w);
                found = true;
            }
        }
        CHECK(found);
    }
    const Eigen::MatrixXd gram = dom.eigentable * dom.eigentable.transpose();
    CHECK((gram - 8.0 * Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hypercube rejects d outside [1, 14]") {
    CHECK_THROWS_AS(build_hypercube(0), std::invalid_argument);
    CHECK_THROWS_AS(build_hypercube(15), std::invalid_argument);
}

TEST_CASE("parity closure: products map to symmetric differences exactly") {
    const DiscreteDomain dom = build_hypercube(5);
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int a = static_cast<int>(rng.uniform_index(dom.M));
        const int b = static_cast<int>(rng.uniform_index(dom.M));
        const std::uint32_t sum = dom.modes[a].subset ^ dom.modes[b].subset;
        int c = -1;
        for (int i = 0; i < dom.M; ++i) {
            if (dom.modes[i].subset == sum) {
                c = i;
                break;
            }
        }
        REQUIRE(c >= 0);
        const Eigen::VectorXd product =
            dom.eigentable.row(a).cwiseProduct(dom.eigentable.row(b)).transpose();
        CHECK((product - dom.eigentable.row(c).transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("sphere samples are unit norm and deterministic") {
    const SpherePointSet a = sample_hypersphere(3, 1000, 42);
    for (int i = 0; i < 1000; ++i) {
        CHECK(std::abs(a.points.row(i).norm() - 1.0) < 1e-12);
    }
    const SpherePointSet b = sample_hypersphere(7, 2, 99);
    const SpherePointSet c = sample_hypersphere(7, 2, 99);
    CHECK((b.points - c.points).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sphere sample mean concentrates (CLT bound)") {
    const SpherePointSet set = sample_hypersphere(3, 100000, 5);
    const Eigen::VectorXd mean = set.points.colwise().mean();
    // per-coordinate variance is 1/(d+1); |mean| ~ 1/sqrt(count) << 0.02
    CHECK(mean.norm() < 0.02);
}

TEST_CASE("sphere rejects bad arguments") {
    CHECK_THROWS_AS(sample_hypersphere(1, 10, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_hypersphere(3, 0, 0), std::invalid_argument);
}

TEST_CASE("eigenfunction_value spot checks") {
    const DiscreteDomain circle = build_circle(8);
    for (int j = 0; j < 8; ++j) CHECK(eigenfunction_value(circle, 0, j) == doctest::Approx(1.0));
    // theta = 0 is the point with index M-1 (angles are 2 pi j / M for j = 1..M)
    CHECK(eigenfunction_value(circle, 1, 7) == doctest::Approx(std::sqrt(2.0)));

    const DiscreteDomain cube = build_hypercube(2);
    int mode = -1, point = -1;
    for (int i = 0; i < cube.M; ++i) {
        if (cube.modes[i].subset == 0b11u) mode = i;
    }
    for (int b = 0; b < cube.M; ++b) {
        if (cube.points(b, 0) == 1.0 && cube.points(b, 1) == 1.0) point = b;
    }
    REQUIRE(mode >= 0);
    REQUIRE(point >= 0);
    CHECK(eigenfunction_value(cube, mode, point) == doctest::Approx(1.0));

    CHECK_THROWS_AS(eigenfunction_value(circle, 8, 0), std::out_of_range);
    CHECK_THROWS_AS(eigenfunction_value(circle, 0, -1), std::out_of_range);
}

TEST_CASE("sphere level multiplicities") {
    // S^3: (k+1)^2
    for (int k = 0; k <= 6; ++k) {
        CHECK(sphere_level_multiplicity(k, 3) == doctest::Approx((k + 1.0) * (k + 1.0)));
    }
    // S^2: 2k+1
    for (int k = 0; k <= 6; ++k) {
        CHECK(sphere_level_multiplicity(k, 2) == doctest::Approx(2.0 * k + 1.0));
    }
    CHECK(sphere_level_multiplicity(0, 7) == doctest::Approx(1.0));
    CHECK(sphere_level_multiplicity(1, 7) == doctest::Approx(8.0));
    CHECK(sphere_level_multiplicity(2, 7) == doctest::Approx(35.0));
}

TEST_CASE("sphere level target has unit mean square") {
    Rng rng(11);
    const SpherePointSet set = sample_hypersphere(5, 60000, 17);
    Eigen::VectorXd axis(6);
    for (int i = 0; i < 6; ++i) axis[i] = rng.normal();
    axis /= axis.norm();
    for (int k : {1, 2, 4}) {
        const Eigen::VectorXd f = sphere_level_target(k, 5, axis, set.points);
        CHECK(f.squaredNorm() / set.points.rows() == doctest::Approx(1.0).epsilon(0.05));
    }
}

TEST_CASE("hypercube kernel points live on the unit sphere") {
    const DiscreteDomain cube = build_hypercube(4);
    const Eigen::MatrixXd pts = cube.kernel_points();
    for (int i = 0; i < cube.M; ++i) CHECK(pts.row(i).norm() == doctest::Approx(1.0));
}

TEST_SUITE_END();
