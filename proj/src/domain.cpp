#include "eigenlearn/domain.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "eigenlearn/rng.hpp"

namespace eigenlearn {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::MatrixXd DiscreteDomain::kernel_points() const {
    if (kind == Kind::Hypercube) {
        return points / std::sqrt(static_cast<double>(points.cols()));
    }
    return points;
}

DiscreteDomain build_circle(int M) {
    if (M < 2) throw std::invalid_argument("build_circle: M must be >= 2");

    DiscreteDomain dom;
    dom.kind = DiscreteDomain::Kind::Circle;
    dom.M = M;
    dom.points.resize(M, 2);
    for (int j = 0; j < M; ++j) {
        const double theta = 2.0 * kPi * (j + 1) / M;
        dom.points(j, 0) = std::cos(theta);
        dom.points(j, 1) = std::sin(theta);
    }

    dom.eigentable.resize(M, M);
    dom.modes.reserve(M);
    int row = 0;
    dom.eigentable.row(row++).setOnes();
    dom.modes.push_back({ModeLabel::Family::CircleConstant, 0, 0, 0});

    const int nyquist = M / 2;
    const double sqrt2 = std::numbers::sqrt2;
    for (int k = 1; k <= (M - 1) / 2; ++k) {
        for (int j = 0; j < M; ++j) {
            const double theta = 2.0 * kPi * (j + 1) / M;
            dom.eigentable(row, j) = sqrt2 * std::cos(k * theta);
            dom.eigentable(row + 1, j) = sqrt2 * std::sin(k * theta);
        }
        dom.modes.push_back({ModeLabel::Family::CircleCos, k, 0, 0});
        dom.modes.push_back({ModeLabel::Family::CircleSin, k, 0, 0});
        row += 2;
    }
    if (M % 2 == 0) {
        // Nyquist level: the sine branch vanishes on the grid, and the cosine
        // branch (-1)^j already has unit mean square without the sqrt(2).
        for (int j = 0; j < M; ++j) {
            dom.eigentable(row, j) = (j + 1) % 2 == 0 ? 1.0 : -1.0;
        }
        dom.modes.push_back({ModeLabel::Family::CircleCos, nyquist, 0, 0});
        ++row;
    }
    return dom;
}

namespace {

// Subsets of {0,..,d-1} of size k in lexicographic order, as bitmasks.
void enumerate_subsets(int d, int k, std::vector<std::uint32_t>& out) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k == 0) {
        out.push_back(0);
        return;
    }
    for (;;) {
        std::uint32_t mask = 0;
        for (int i : idx) mask |= 1u << i;
        out.push_back(mask);
        int i = k - 1;
        while (i >= 0 && idx[i] == d - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

DiscreteDomain build_hypercube(int d) {
    if (d < 1 || d > 14) throw std::invalid_argument("build_hypercube: d must be in [1, 14]");

    const int M = 1 << d;
    DiscreteDomain dom;
    dom.kind = DiscreteDomain::Kind::Hypercube;
    dom.M = M;
    dom.points.resize(M, d);
    for (int b = 0; b < M; ++b) {
        for (int i = 0; i < d; ++i) {
            dom.points(b, i) = (b >> i) & 1 ? 1.0 : -1.0;
        }
    }

    std::vector<std::uint32_t> subsets;
    subsets.reserve(M);
    for (int k = 0; k <= d; ++k) enumerate_subsets(d, k, subsets);

    dom.eigentable.resize(M, M);
    dom.modes.reserve(M);
    for (int row = 0; row < M; ++row) {
        const std::uint32_t mask = subsets[row];
        for (int b = 0; b < M; ++b) {
            // phi_S(x) = (-1)^{#(i in S with x_i = +1)}
            const int ones = std::popcount(mask & static_cast<std::uint32_t>(b));
            dom.eigentable(row, b) = ones % 2 == 0 ? 1.0 : -1.0;
        }
        dom.modes.push_back({ModeLabel::Family::HypercubeParity, std::popcount(mask), mask, 0});
    }
    return dom;
}

SpherePointSet sample_hypersphere(int d, int count, std::uint64_t seed) {
    if (d < 2) throw std::invalid_argument("sample_hypersphere: d must be >= 2");
    if (count < 1) throw std::invalid_argument("sample_hypersphere: count must be >= 1");

    SpherePointSet set;
    set.d = d;
    set.seed = seed;
    set.points.resize(count, d + 1);
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        double norm2 = 0.0;
        do {
            for (int j = 0; j <= d; ++j) {
                const double g = rng.normal();
                set.points(i, j) = g;
                norm2 += g * g;
            }
        } while (norm2 == 0.0);
        set.points.row(i) /= std::sqrt(set.points.row(i).squaredNorm());
    }
    return set;
}

double eigenfunction_value(const DiscreteDomain& domain, int mode, int point) {
    if (mode < 0 || mode >= domain.M || point < 0 || point >= domain.M) {
        throw std::out_of_range("eigenfunction_value: index out of range");
    }
    return domain.eigentable(mode, point);
}

double sphere_level_multiplicity(int k, int d) {
    if (k == 0) return 1.0;
    // (2k + d - 1) * (k + d - 2)! / (k! * (d - 1)!)
    double log_m = std::lgamma(k + d - 1.0) - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(d));
    return std::round((2.0 * k + d - 1.0) * std::exp(log_m));
}

std::vector<double> gegenbauer_values(int kmax, double t, int d) {
    std::vector<double> P(kmax + 1);
    P[0] = 1.0;
    if (kmax == 0) return P;
    P[1] = t;
    for (int k = 1; k < kmax; ++k) {
        P[k + 1] = ((2.0 * k + d - 1.0) * t * P[k] - k * P[k - 1]) / (k + d - 1.0);
    }
    return P;
}

Eigen::VectorXd sphere_level_target(int k, int d, const Eigen::VectorXd& axis,
                                    const Eigen::MatrixXd& points) {
    const double scale = std::sqrt(sphere_level_multiplicity(k, d));
    Eigen::VectorXd cosines = points * axis;
    Eigen::VectorXd out(points.rows());
    for (Eigen::Index i = 0; i < cosines.size(); ++i) {
        out[i] = scale * gegenbauer_values(k, cosines[i], d)[k];
    }
    return out;
}

}  // namespace eigenlearn
