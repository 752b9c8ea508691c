// Kernel eigenvalues and target eigencoefficients for each domain: analytic
// transforms where symmetry allows (circle DFT, hypercube Hamming classes,
// sphere Gegenbauer projection), dense eigendecomposition for empirical data.
#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <vector>

#include "eigenlearn/domain.hpp"
#include "eigenlearn/kernel.hpp"
#include "eigenlearn/modes.hpp"

namespace eigenlearn {

// Eigenvalues sorted descending. Each entry carries a degeneracy weight:
// flattened finite-domain spectra use weight 1 per mode, sphere spectra keep
// one entry per level with weight m_k. All downstream mode sums are
// weight-aware, which is equivalent to expanding degenerate levels into
// repeated entries. A target coefficient always sits on a weight-1 entry.
struct Spectrum {
    std::vector<double> eigenvalues;
    std::vector<double> weights;
    std::vector<ModeLabel> labels;
    std::vector<double> coefficients;  // empty when no target attached
    std::optional<int> M;              // finite-domain cardinality
    std::optional<int> truncation;     // sphere k_max

    std::size_t size() const { return eigenvalues.size(); }
    bool has_coefficients() const { return !coefficients.empty(); }
    double mode_count() const;   // sum of weights
    double trace() const;        // sum of weight * eigenvalue
    double target_norm2() const; // sum of coefficients^2

    // Attach a unit-amplitude (or `amplitude`) target on the entry matching
    // `label`; weighted entries are split so the target occupies a weight-1
    // entry. Returns the index of that entry.
    std::size_t attach_target(const ModeLabel& label, double amplitude = 1.0);
};

struct LevelSpectrum {
    enum class DomainKind { Circle, Hypercube, Sphere };

    DomainKind kind = DomainKind::Circle;
    int param = 0;  // M for circle, d for hypercube and sphere
    std::vector<double> level_eigenvalues;  // indexed by k
    std::vector<double> multiplicities;
    std::optional<int> truncation;
    double quadrature_rel_change = 0.0;  // sphere convergence report
    bool quadrature_converged = true;

    int levels() const { return static_cast<int>(level_eigenvalues.size()); }
    // Per-mode spectrum, weight 1 per entry (finite domains; sphere would
    // need sum(m_k) entries and is refused).
    Spectrum flatten() const;
    // Per-level spectrum with multiplicity weights.
    Spectrum weighted() const;
};

LevelSpectrum circle_spectrum(const KernelSpec& spec, int M);
// Same transform from an already-assembled Gram on the circle grid; rejects
// non-circulant input.
LevelSpectrum circle_spectrum_from_gram(const GramMatrix& gram);
LevelSpectrum hypercube_spectrum(const KernelSpec& spec, int d);
// nodes = 0 picks a default based on k_max; the rule is doubled once to
// measure convergence.
LevelSpectrum sphere_spectrum(const KernelSpec& spec, int d, int k_max, int nodes = 0);

Spectrum empirical_spectrum(const GramMatrix& gram, const Eigen::VectorXd& targets);

// v = (1/M) * eigentable * f; reconstruction is eigentable^T * v.
Eigen::VectorXd decompose_target(const DiscreteDomain& domain, const Eigen::VectorXd& f);

// Eigenvalue of each domain mode, in domain mode order.
Eigen::VectorXd domain_eigenvalues(const LevelSpectrum& levels, const DiscreteDomain& domain);

void write_spectrum_csv(const Spectrum& spectrum, const std::filesystem::path& path);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

}  // namespace eigenlearn
