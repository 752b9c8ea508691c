// Synthetic input spaces with exact kernel eigenbases: the discretized unit
// circle, the boolean hypercube, and sampled point sets on the hypersphere.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "eigenlearn/modes.hpp"

namespace eigenlearn {

// A finite input space of M points together with the full orthonormal
// eigenfunction table. Rows of `eigentable` are eigenfunctions, columns are
// points, and eigentable * eigentable^T == M * I under the uniform-average
// inner product <g,h> = E_x[g(x) h(x)].
struct DiscreteDomain {
    enum class Kind { Circle, Hypercube };

    Kind kind = Kind::Circle;
    int M = 0;
    Eigen::MatrixXd points;      // M x dim, raw coordinates
    Eigen::MatrixXd eigentable;  // M x M, eigentable(i, j) = phi_i(x_j)
    std::vector<ModeLabel> modes;

    // Points prepared for kernel evaluation: unit-norm rows (hypercube
    // coordinates are scaled by 1/sqrt(d) so every domain is a dot-product
    // domain).
    Eigen::MatrixXd kernel_points() const;

    int dim() const { return static_cast<int>(points.cols()); }
};

struct SpherePointSet {
    int d = 2;  // sphere dimension; points live in R^(d+1)
    Eigen::MatrixXd points;  // count x (d+1), unit-norm rows
    std::uint64_t seed = 0;
};

DiscreteDomain build_circle(int M);
DiscreteDomain build_hypercube(int d);
SpherePointSet sample_hypersphere(int d, int count, std::uint64_t seed);

double eigenfunction_value(const DiscreteDomain& domain, int mode, int point);

// Number of linearly independent level-k harmonics on S^d.
double sphere_level_multiplicity(int k, int d);

// Gegenbauer polynomials P_0..P_kmax of ambient dimension d+1 at t, with the
// P_k(1) = 1 normalization used by the addition theorem.
std::vector<double> gegenbauer_values(int kmax, double t, int d);

// Level-k target on S^d: f(x) = sqrt(m_k) * P_k(axis . x), unit mean-square
// under the uniform sphere measure.
Eigen::VectorXd sphere_level_target(int k, int d, const Eigen::VectorXd& axis,
                                    const Eigen::MatrixXd& points);

}  // namespace eigenlearn
