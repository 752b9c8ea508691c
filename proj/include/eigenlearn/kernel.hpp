// Positive-semidefinite rotation-invariant kernels: the analytic
// fully-connected ReLU NTK, Gaussian, Laplacian, and tabulated angular
// profiles, plus Gram matrix assembly.
#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <vector>

namespace eigenlearn {

struct NtkParams {
    int depth = 4;         // hidden-layer count L >= 1
    double sigma_w = 1.4;
    double sigma_b = 0.1;
};

// Monotone-cubic (Fritsch-Carlson) interpolant of an angular profile sampled
// on t in [-1, 1].
class TabulatedProfile {
public:
    TabulatedProfile() = default;
    TabulatedProfile(std::vector<double> t, std::vector<double> value);

    double operator()(double t) const;
    bool empty() const { return t_.empty(); }

private:
    std::vector<double> t_, v_, slope_;
};

TabulatedProfile load_tabulated_profile(const std::filesystem::path& path);

struct KernelSpec {
    enum class Variant { ReluNtk, Gaussian, Laplacian, Tabulated };

    Variant variant = Variant::ReluNtk;
    NtkParams ntk{};
    double bandwidth = 1.0;  // Gaussian
    double scale = 1.0;      // Laplacian
    TabulatedProfile table{};
    double jitter = 0.0;     // added to Gram diagonals

    static KernelSpec relu_ntk(int depth, double sigma_w, double sigma_b);
    static KernelSpec gaussian(double bandwidth);
    static KernelSpec laplacian(double scale);
    static KernelSpec tabulated(TabulatedProfile profile);

    // Angular profile kappa(t) for unit-norm inputs with cosine t.
    double profile(double t) const;

    const char* variant_name() const;
};

struct GramMatrix {
    Eigen::MatrixXd entries;
    int count = 0;
};

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Theta^L(t) of the fully connected ReLU NTK for each cosine in `cosines`;
// inputs are assumed unit-norm.
std::vector<double> ntk_relu_profile(int depth, double sigma_w, double sigma_b,
                                     std::span<const double> cosines);

// Angular profile in extended precision (tabulated profiles fall back to the
// double-precision interpolant).
long double profile_ext(const KernelSpec& spec, long double t);

// Kernel values between every row of `a` and every row of `b`.
Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b);

GramMatrix gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points);

}  // namespace eigenlearn
