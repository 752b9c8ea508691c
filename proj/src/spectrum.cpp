#include "eigenlearn/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "eigenlearn/quadrature.hpp"

namespace eigenlearn {

namespace {

// Numerical-noise clip for transform outputs. Kernels are PSD up to -1e-8
// relative to their diagonal scale (tabulated profiles carry interpolation
// error), so the tolerance follows the kernel invariant; analytic kernels
// stay far inside it.
double clip_eigenvalue(double lambda, const char* who, double scale = 0.0) {
    const double tol = std::max(1e-10, 1e-8 * scale);
    if (lambda < -tol) {
        throw std::runtime_error(std::string(who) + ": eigenvalue " + std::to_string(lambda) +
                                 " below the PSD tolerance " + std::to_string(-tol));
    }
    return std::max(lambda, 0.0);
}

void sort_descending(Spectrum& s) {
    std::vector<std::size_t> order(s.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.eigenvalues[a] > s.eigenvalues[b]; });
    Spectrum out = s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.eigenvalues[i] = s.eigenvalues[order[i]];
        out.weights[i] = s.weights[order[i]];
        out.labels[i] = s.labels[order[i]];
        if (s.has_coefficients()) out.coefficients[i] = s.coefficients[order[i]];
    }
    s = std::move(out);
}

}  // namespace

double Spectrum::mode_count() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double Spectrum::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < size(); ++i) t += weights[i] * eigenvalues[i];
    return t;
}

double Spectrum::target_norm2() const {
    double t = 0.0;
    for (double v : coefficients) t += v * v;
    return t;
}

std::size_t Spectrum::attach_target(const ModeLabel& label, double amplitude) {
    if (coefficients.empty()) coefficients.assign(size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        const ModeLabel& l = labels[i];
        const bool match = l.family == label.family && l.k == label.k &&
                           (l.family != ModeLabel::Family::HypercubeParity || l.subset == label.subset);
        if (!match) continue;
        if (weights[i] == 1.0) {
            coefficients[i] = amplitude;
            return i;
        }
        // split one member off the degenerate level
        weights[i] -= 1.0;
        eigenvalues.insert(eigenvalues.begin() + i, eigenvalues[i]);
        weights.insert(weights.begin() + i, 1.0);
        labels.insert(labels.begin() + i, label);
        coefficients.insert(coefficients.begin() + i, amplitude);
        return i;
    }
    throw std::invalid_argument("Spectrum::attach_target: no entry with label " + label.to_string());
}

Spectrum LevelSpectrum::flatten() const {
    if (kind == DomainKind::Sphere) {
        throw std::logic_error("LevelSpectrum::flatten: sphere spectra stay level-weighted");
    }
    Spectrum s;
    const int n_levels = levels();
    for (int k = 0; k < n_levels; ++k) {
        const int mult = static_cast<int>(multiplicities[k]);
        for (int j = 0; j < mult; ++j) {
            s.eigenvalues.push_back(level_eigenvalues[k]);
            s.weights.push_back(1.0);
            ModeLabel label;
            if (kind == DomainKind::Circle) {
                label.family = k == 0 ? ModeLabel::Family::CircleConstant
                               : j == 0 ? ModeLabel::Family::CircleCos
                                        : ModeLabel::Family::CircleSin;
                label.k = k;
            } else {
                label.family = ModeLabel::Family::HypercubeParity;
                label.k = k;
                label.harmonic = j;
                // subset identity is only available through the domain; the
                // spectrum keeps (level, index-within-level)
            }
            s.labels.push_back(label);
        }
    }
    s.M = kind == DomainKind::Circle ? param : (1 << param);
    sort_descending(s);
    return s;
}

Spectrum LevelSpectrum::weighted() const {
    Spectrum s;
    for (int k = 0; k < levels(); ++k) {
        s.eigenvalues.push_back(level_eigenvalues[k]);
        s.weights.push_back(multiplicities[k]);
        ModeLabel label;
        label.family = kind == DomainKind::Sphere   ? ModeLabel::Family::SphereHarmonic
                       : kind == DomainKind::Circle ? (k == 0 ? ModeLabel::Family::CircleConstant
                                                              : ModeLabel::Family::CircleCos)
                                                    : ModeLabel::Family::HypercubeParity;
        label.k = k;
        s.labels.push_back(label);
    }
    if (kind != DomainKind::Sphere) s.M = kind == DomainKind::Circle ? param : (1 << param);
    s.truncation = truncation;
    sort_descending(s);
    return s;
}

LevelSpectrum circle_spectrum(const KernelSpec& spec, int M) {
    const DiscreteDomain dom = build_circle(M);
    KernelSpec clean = spec;
    clean.jitter = 0.0;
    return circle_spectrum_from_gram(gram_matrix(clean, dom.kernel_points()));
}

LevelSpectrum circle_spectrum_from_gram(const GramMatrix& gram) {
    const int M = gram.count;
    if (M < 2) throw std::invalid_argument("circle_spectrum: M must be >= 2");

    // stationarity check: every row must be the first row rotated
    double worst = 0.0;
    for (int i = 1; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            worst = std::max(worst, std::abs(gram.entries(i, (j + i) % M) - gram.entries(0, j)));
        }
    }
    if (worst > 1e-8) {
        throw std::runtime_error("circle_spectrum: Gram is not circulant (max mismatch " +
                                 std::to_string(worst) + ")");
    }

    LevelSpectrum out;
    out.kind = LevelSpectrum::DomainKind::Circle;
    out.param = M;
    const double scale = gram.entries.diagonal().cwiseAbs().maxCoeff();
    const int kmax = M / 2;
    for (int k = 0; k <= kmax; ++k) {
        long double acc = 0.0L;
        for (int j = 0; j < M; ++j) {
            acc += static_cast<long double>(gram.entries(0, j)) *
                   std::cos(2.0L * std::numbers::pi_v<long double> * k * j / M);
        }
        const double lambda = static_cast<double>(acc / M);
        out.level_eigenvalues.push_back(clip_eigenvalue(lambda, "circle_spectrum", scale));
        out.multiplicities.push_back(k == 0 || 2 * k == M ? 1.0 : 2.0);
    }
    return out;
}

namespace {

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return std::round(r);
}

}  // namespace

LevelSpectrum hypercube_spectrum(const KernelSpec& spec, int d) {
    if (d < 1 || d > 14) throw std::invalid_argument("hypercube_spectrum: d must be in [1, 14]");

    // kappa on the d+1 Hamming classes; points are normalized by sqrt(d), so
    // class h has cosine (d - 2h) / d.
    std::vector<long double> kappa(d + 1);
    for (int h = 0; h <= d; ++h) {
        kappa[h] = profile_ext(spec, (static_cast<long double>(d) - 2.0L * h) / d);
    }

    LevelSpectrum out;
    out.kind = LevelSpectrum::DomainKind::Hypercube;
    out.param = d;
    const long double scale = std::exp2l(static_cast<long double>(-d));
    for (int k = 0; k <= d; ++k) {
        long double acc = 0.0L;
        for (int h = 0; h <= d; ++h) {
            // Krawtchouk weight: number of h-flip patterns, signed by overlap with S
            long double kw = 0.0L;
            for (int j = std::max(0, h - (d - k)); j <= std::min(k, h); ++j) {
                const long double term = binom(k, j) * binom(d - k, h - j);
                kw += (j % 2 == 0) ? term : -term;
            }
            acc += kappa[h] * kw;
        }
        out.level_eigenvalues.push_back(clip_eigenvalue(static_cast<double>(acc * scale),
                                                        "hypercube_spectrum",
                                                        static_cast<double>(kappa[0])));
        out.multiplicities.push_back(binom(d, k));
    }
    return out;
}

namespace {

std::vector<double> sphere_levels_once(const KernelSpec& spec, int d, int k_max, int nodes) {
    const JacobiRule rule = gauss_jacobi_symmetric(nodes, (d - 2) / 2.0);
    const int n = static_cast<int>(rule.nodes.size());

    std::vector<long double> acc(k_max + 1, 0.0L);
    // running Gegenbauer recurrence per node keeps memory flat
    std::vector<long double> pm1(n), p(n);
    for (int i = 0; i < n; ++i) {
        pm1[i] = 1.0L;
        p[i] = rule.nodes[i];
    }
    std::vector<long double> kappa(n);
    for (int i = 0; i < n; ++i) kappa[i] = profile_ext(spec, rule.nodes[i]) * rule.weights[i];

    for (int i = 0; i < n; ++i) acc[0] += kappa[i];
    if (k_max >= 1) {
        for (int i = 0; i < n; ++i) acc[1] += kappa[i] * p[i];
    }
    for (int k = 1; k < k_max; ++k) {
        for (int i = 0; i < n; ++i) {
            const long double pn =
                ((2.0L * k + d - 1.0L) * rule.nodes[i] * p[i] - static_cast<long double>(k) * pm1[i]) /
                (k + d - 1.0L);
            pm1[i] = p[i];
            p[i] = pn;
            acc[k + 1] += kappa[i] * pn;
        }
    }

    std::vector<double> out(k_max + 1);
    for (int k = 0; k <= k_max; ++k) out[k] = static_cast<double>(acc[k] / rule.mu0);
    return out;
}

}  // namespace

LevelSpectrum sphere_spectrum(const KernelSpec& spec, int d, int k_max, int nodes) {
    if (d < 2) throw std::invalid_argument("sphere_spectrum: d must be >= 2");
    if (k_max < 0) throw std::invalid_argument("sphere_spectrum: k_max must be >= 0");
    if (nodes <= 0) nodes = std::max(1024, 16 * k_max);

    const std::vector<double> coarse = sphere_levels_once(spec, d, k_max, nodes);
    const std::vector<double> fine = sphere_levels_once(spec, d, k_max, 2 * nodes);

    LevelSpectrum out;
    out.kind = LevelSpectrum::DomainKind::Sphere;
    out.param = d;
    out.truncation = k_max;

    const double floor = std::abs(fine[0]) * 1e-13 + 1e-300;
    double rel = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        if (std::abs(fine[k]) > floor) {
            rel = std::max(rel, std::abs(fine[k] - coarse[k]) / std::abs(fine[k]));
        }
        out.level_eigenvalues.push_back(clip_eigenvalue(fine[k], "sphere_spectrum", std::abs(fine[0])));
        out.multiplicities.push_back(sphere_level_multiplicity(k, d));
    }
    out.quadrature_rel_change = rel;
    out.quadrature_converged = rel <= 1e-8;
    return out;
}

Spectrum empirical_spectrum(const GramMatrix& gram, const Eigen::VectorXd& targets) {
    const int n = gram.count;
    if (n < 2) throw std::invalid_argument("empirical_spectrum: need at least 2 points");
    if (targets.size() != n) throw std::invalid_argument("empirical_spectrum: target length mismatch");
    if (!targets.allFinite()) throw std::invalid_argument("empirical_spectrum: non-finite targets");
    const double asym = (gram.entries - gram.entries.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) throw std::invalid_argument("empirical_spectrum: Gram not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.entries / n);
    if (es.info() != Eigen::Success) throw std::runtime_error("empirical_spectrum: eigensolver failed");

    Spectrum s;
    s.M = n;
    const double ref = std::abs(es.eigenvalues()[n - 1]);
    const double neg_tol = std::max(1e-10, 1e-12 * ref * n);
    for (int i = n - 1; i >= 0; --i) {  // Eigen sorts ascending
        double lambda = es.eigenvalues()[i];
        if (lambda < -neg_tol) {
            throw std::runtime_error("empirical_spectrum: eigenvalue " + std::to_string(lambda) +
                                     " below tolerance");
        }
        lambda = std::max(lambda, 0.0);
        s.eigenvalues.push_back(lambda);
        s.weights.push_back(1.0);
        s.labels.push_back({ModeLabel::Family::Empirical, n - 1 - i, 0, 0});
        s.coefficients.push_back(es.eigenvectors().col(i).dot(targets) / std::sqrt(static_cast<double>(n)));
    }
    return s;
}

Eigen::VectorXd decompose_target(const DiscreteDomain& domain, const Eigen::VectorXd& f) {
    if (f.size() != domain.M) throw std::invalid_argument("decompose_target: length mismatch");
    return domain.eigentable * f / domain.M;
}

Eigen::VectorXd domain_eigenvalues(const LevelSpectrum& levels, const DiscreteDomain& domain) {
    Eigen::VectorXd out(domain.M);
    for (int i = 0; i < domain.M; ++i) {
        const int k = domain.modes[i].k;
        if (k >= levels.levels()) throw std::out_of_range("domain_eigenvalues: level out of range");
        out[i] = levels.level_eigenvalues[k];
    }
    return out;
}

void write_spectrum_csv(const Spectrum& spectrum, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_spectrum_csv: cannot open " + path.string());
    out << "index,level,eigenvalue,multiplicity,coefficient\n";
    out.precision(17);
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out << i << ',' << spectrum.labels[i].k << ',' << spectrum.eigenvalues[i] << ','
            << spectrum.weights[i] << ',' << (spectrum.has_coefficients() ? spectrum.coefficients[i] : 0.0)
            << '\n';
    }
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_spectrum_csv: cannot open " + path.string());
    Spectrum s;
    std::string line;
    bool header = true;
    int lineno = 0;
    bool any_coeff = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.find("eigenvalue") != std::string::npos) continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double index, level, lambda, mult = 1.0, coeff = 0.0;
        if (!(ss >> index >> level >> lambda)) {
            throw std::runtime_error("read_spectrum_csv: bad row at line " + std::to_string(lineno));
        }
        if (ss >> mult) {
            if (!(ss >> coeff)) coeff = 0.0;
        }
        s.eigenvalues.push_back(lambda);
        s.weights.push_back(mult);
        s.labels.push_back({ModeLabel::Family::Empirical, static_cast<int>(level), 0, 0});
        s.coefficients.push_back(coeff);
        if (coeff != 0.0) any_coeff = true;
    }
    if (!any_coeff) s.coefficients.clear();
    return s;
}

}  // namespace eigenlearn
