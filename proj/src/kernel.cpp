#include "eigenlearn/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace eigenlearn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCosineTol = 1e-12;

double checked_cosine(double t, const char* who) {
    if (t > 1.0 + kCosineTol || t < -1.0 - kCosineTol) {
        throw std::invalid_argument(std::string(who) + ": cosine outside [-1, 1]: " + std::to_string(t));
    }
    return std::clamp(t, -1.0, 1.0);
}

// One step of the arc-cosine layer recursion. `sig` and `diag` are the
// preactivation covariance and variance, `theta` the accumulated tangent
// kernel value at the same cosine.
template <typename Real>
struct LayerState {
    Real sig, diag, theta, theta_diag;
};

template <typename Real>
LayerState<Real> ntk_layer(const LayerState<Real>& s, Real sw2, Real sb2) {
    constexpr Real pi = std::numbers::pi_v<Real>;
    Real c = s.sig / s.diag;
    c = std::clamp(c, Real(-1), Real(1));
    const Real acos_c = std::acos(c);
    const Real relu_xcov = (s.diag / (2 * pi)) * (std::sqrt(std::max(Real(0), 1 - c * c)) + (pi - acos_c) * c);
    const Real relu_dcov = (pi - acos_c) / (2 * pi);

    LayerState<Real> next;
    next.sig = sw2 * relu_xcov + sb2;
    next.diag = sw2 * (s.diag / 2) + sb2;
    next.theta = next.sig + sw2 * relu_dcov * s.theta;
    next.theta_diag = next.diag + sw2 * Real(0.5) * s.theta_diag;
    return next;
}

template <typename Real>
Real ntk_theta(int depth, Real sw2, Real sb2, Real t) {
    LayerState<Real> s{sw2 * t + sb2, sw2 + sb2, sw2 * t + sb2, sw2 + sb2};
    for (int layer = 0; layer < depth; ++layer) s = ntk_layer(s, sw2, sb2);
    return s.theta;
}

}  // namespace

std::vector<double> ntk_relu_profile(int depth, double sigma_w, double sigma_b,
                                     std::span<const double> cosines) {
    if (depth < 1) throw std::invalid_argument("ntk_relu_profile: depth must be >= 1");
    if (sigma_w <= 0.0) throw std::invalid_argument("ntk_relu_profile: sigma_w must be > 0");
    if (sigma_b < 0.0) throw std::invalid_argument("ntk_relu_profile: sigma_b must be >= 0");
    const double sw2 = sigma_w * sigma_w;
    const double sb2 = sigma_b * sigma_b;

    std::vector<double> out;
    out.reserve(cosines.size());
    for (double t_raw : cosines) {
        const double t = checked_cosine(t_raw, "ntk_relu_profile");
        out.push_back(ntk_theta(depth, sw2, sb2, t));
    }
    return out;
}

long double profile_ext(const KernelSpec& spec, long double t) {
    t = std::clamp(t, -1.0L, 1.0L);
    switch (spec.variant) {
        case KernelSpec::Variant::ReluNtk: {
            const long double sw2 = static_cast<long double>(spec.ntk.sigma_w) * spec.ntk.sigma_w;
            const long double sb2 = static_cast<long double>(spec.ntk.sigma_b) * spec.ntk.sigma_b;
            return ntk_theta(spec.ntk.depth, sw2, sb2, t);
        }
        case KernelSpec::Variant::Gaussian:
            return std::exp(-(2.0L - 2.0L * t) / (2.0L * spec.bandwidth * spec.bandwidth));
        case KernelSpec::Variant::Laplacian:
            return std::exp(-std::sqrt(std::max(0.0L, 2.0L - 2.0L * t)) / spec.scale);
        case KernelSpec::Variant::Tabulated:
            return spec.table(static_cast<double>(t));
    }
    throw std::logic_error("profile_ext: bad variant");
}

TabulatedProfile::TabulatedProfile(std::vector<double> t, std::vector<double> value)
    : t_(std::move(t)), v_(std::move(value)) {
    if (t_.size() != v_.size() || t_.size() < 2) {
        throw std::invalid_argument("TabulatedProfile: need >= 2 matching samples");
    }
    for (std::size_t i = 1; i < t_.size(); ++i) {
        if (t_[i] <= t_[i - 1]) throw std::invalid_argument("TabulatedProfile: abscissae must increase");
    }
    if (t_.front() < -1.0 - kCosineTol || t_.back() > 1.0 + kCosineTol) {
        throw std::invalid_argument("TabulatedProfile: abscissae outside [-1, 1]");
    }

    // Fritsch-Carlson monotone slopes.
    const std::size_t n = t_.size();
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (v_[i + 1] - v_[i]) / (t_[i + 1] - t_[i]);
    slope_.assign(n, 0.0);
    slope_[0] = d[0];
    slope_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        slope_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0.0) {
            slope_[i] = slope_[i + 1] = 0.0;
            continue;
        }
        const double a = slope_[i] / d[i];
        const double b = slope_[i + 1] / d[i];
        const double r = a * a + b * b;
        if (r > 9.0) {
            const double s = 3.0 / std::sqrt(r);
            slope_[i] = s * a * d[i];
            slope_[i + 1] = s * b * d[i];
        }
    }
}

double TabulatedProfile::operator()(double t_raw) const {
    if (empty()) throw std::logic_error("TabulatedProfile: empty");
    double t = checked_cosine(t_raw, "TabulatedProfile");
    t = std::clamp(t, t_.front(), t_.back());
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    i = std::min(i, t_.size() - 2);
    const double h = t_[i + 1] - t_[i];
    const double u = (t - t_[i]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    return h00 * v_[i] + h10 * h * slope_[i] + h01 * v_[i + 1] + h11 * h * slope_[i + 1];
}

TabulatedProfile load_tabulated_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_tabulated_profile: cannot open " + path.string());
    std::vector<double> t, v;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, b;
        if (!(ss >> a >> b)) {
            throw std::runtime_error("load_tabulated_profile: bad row at line " + std::to_string(lineno));
        }
        t.push_back(a);
        v.push_back(b);
    }
    return TabulatedProfile(std::move(t), std::move(v));
}

KernelSpec KernelSpec::relu_ntk(int depth, double sigma_w, double sigma_b) {
    KernelSpec s;
    s.variant = Variant::ReluNtk;
    s.ntk = {depth, sigma_w, sigma_b};
    return s;
}

KernelSpec KernelSpec::gaussian(double bandwidth) {
    if (bandwidth <= 0.0) throw std::invalid_argument("KernelSpec::gaussian: bandwidth must be > 0");
    KernelSpec s;
    s.variant = Variant::Gaussian;
    s.bandwidth = bandwidth;
    return s;
}

KernelSpec KernelSpec::laplacian(double scale) {
    if (scale <= 0.0) throw std::invalid_argument("KernelSpec::laplacian: scale must be > 0");
    KernelSpec s;
    s.variant = Variant::Laplacian;
    s.scale = scale;
    return s;
}

KernelSpec KernelSpec::tabulated(TabulatedProfile profile) {
    KernelSpec s;
    s.variant = Variant::Tabulated;
    s.table = std::move(profile);
    return s;
}

const char* KernelSpec::variant_name() const {
    switch (variant) {
        case Variant::ReluNtk: return "relu-ntk";
        case Variant::Gaussian: return "gaussian";
        case Variant::Laplacian: return "laplacian";
        case Variant::Tabulated: return "tabulated";
    }
    return "?";
}

double KernelSpec::profile(double t_raw) const {
    const double t = checked_cosine(t_raw, "KernelSpec::profile");
    switch (variant) {
        case Variant::ReluNtk: {
            const double ts[1] = {t};
            return ntk_relu_profile(ntk.depth, ntk.sigma_w, ntk.sigma_b, ts)[0];
        }
        case Variant::Gaussian:
            // squared distance between unit vectors with cosine t is 2 - 2t
            return std::exp(-(2.0 - 2.0 * t) / (2.0 * bandwidth * bandwidth));
        case Variant::Laplacian:
            return std::exp(-std::sqrt(std::max(0.0, 2.0 - 2.0 * t)) / scale);
        case Variant::Tabulated:
            return table(t);
    }
    throw std::logic_error("KernelSpec::profile: bad variant");
}

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
    switch (spec.variant) {
        case KernelSpec::Variant::Gaussian: {
            const double r2 = (x - y).squaredNorm();
            return std::exp(-r2 / (2.0 * spec.bandwidth * spec.bandwidth));
        }
        case KernelSpec::Variant::Laplacian:
            return std::exp(-(x - y).norm() / spec.scale);
        case KernelSpec::Variant::ReluNtk:
        case KernelSpec::Variant::Tabulated: {
            const double nx = x.norm(), ny = y.norm();
            if (nx == 0.0 || ny == 0.0) throw std::invalid_argument("kernel_eval: zero-norm input");
            return spec.profile(x.dot(y) / (nx * ny));
        }
    }
    throw std::logic_error("kernel_eval: bad variant");
}

Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("kernel_cross: dimension mismatch");
    Eigen::MatrixXd dots = a * b.transpose();
    switch (spec.variant) {
        case KernelSpec::Variant::Gaussian:
        case KernelSpec::Variant::Laplacian: {
            const Eigen::VectorXd na = a.rowwise().squaredNorm();
            const Eigen::VectorXd nb = b.rowwise().squaredNorm();
            for (Eigen::Index i = 0; i < dots.rows(); ++i) {
                for (Eigen::Index j = 0; j < dots.cols(); ++j) {
                    const double r2 = std::max(0.0, na[i] + nb[j] - 2.0 * dots(i, j));
                    dots(i, j) = spec.variant == KernelSpec::Variant::Gaussian
                                     ? std::exp(-r2 / (2.0 * spec.bandwidth * spec.bandwidth))
                                     : std::exp(-std::sqrt(r2) / spec.scale);
                }
            }
            return dots;
        }
        case KernelSpec::Variant::ReluNtk: {
            const Eigen::VectorXd na = a.rowwise().norm();
            const Eigen::VectorXd nb = b.rowwise().norm();
            std::vector<double> cosines(static_cast<std::size_t>(dots.size()));
            std::size_t idx = 0;
            for (Eigen::Index j = 0; j < dots.cols(); ++j) {
                for (Eigen::Index i = 0; i < dots.rows(); ++i) {
                    cosines[idx++] = std::clamp(dots(i, j) / (na[i] * nb[j]), -1.0, 1.0);
                }
            }
            const auto vals = ntk_relu_profile(spec.ntk.depth, spec.ntk.sigma_w, spec.ntk.sigma_b, cosines);
            idx = 0;
            for (Eigen::Index j = 0; j < dots.cols(); ++j) {
                for (Eigen::Index i = 0; i < dots.rows(); ++i) dots(i, j) = vals[idx++];
            }
            return dots;
        }
        case KernelSpec::Variant::Tabulated: {
            const Eigen::VectorXd na = a.rowwise().norm();
            const Eigen::VectorXd nb = b.rowwise().norm();
            for (Eigen::Index i = 0; i < dots.rows(); ++i) {
                for (Eigen::Index j = 0; j < dots.cols(); ++j) {
                    dots(i, j) = spec.table(std::clamp(dots(i, j) / (na[i] * nb[j]), -1.0, 1.0));
                }
            }
            return dots;
        }
    }
    throw std::logic_error("kernel_cross: bad variant");
}

GramMatrix gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& points) {
    if (points.rows() == 0) throw std::invalid_argument("gram_matrix: empty point list");
    GramMatrix g;
    g.count = static_cast<int>(points.rows());
    g.entries = kernel_cross(spec, points, points);
    // enforce exact symmetry: each unordered pair gets a single value
    for (int i = 0; i < g.count; ++i) {
        for (int j = i + 1; j < g.count; ++j) g.entries(j, i) = g.entries(i, j);
        g.entries(i, i) += spec.jitter;
    }
    return g;
}

}  // namespace eigenlearn
