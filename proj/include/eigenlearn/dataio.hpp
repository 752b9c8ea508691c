// External dataset ingestion for the empirical-spectrum pipeline, plus
// structured-text experiment configuration files.
#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

#include "eigenlearn/csvio.hpp"
#include "eigenlearn/kernel.hpp"
#include "eigenlearn/montecarlo.hpp"
#include "eigenlearn/spectrum.hpp"

namespace eigenlearn {

enum class Normalization { None, Standardize, UnitNorm };

struct TabularDataset {
    Eigen::MatrixXd features;  // N x D
    Eigen::VectorXd labels;    // length N
    std::string source;
    Normalization normalization = Normalization::None;

    int count() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
};

// Delimited text (comma or whitespace), one sample per row, label in the last
// column unless `label_column` names another 0-based index.
TabularDataset load_tabular(const std::filesystem::path& path, int label_column = -1,
                            Normalization normalization = Normalization::None);

struct PipelineConfig {
    KernelSpec kernel;
    std::vector<int> n_grid;
    double ridge = 0.0;
    int trials = 30;
    std::uint64_t seed = 1;
    int workers = 1;
    int max_rows = 4000;      // desk-scale eigendecomposition cap
    bool allow_large = false; // documented override for the cap
};

struct PipelineResult {
    Spectrum spectrum;   // empirical eigensystem with target coefficients
    std::vector<LongRow> rows;
};

// Training-data-only pipeline: empirical eigensystem on all N rows,
// theory predictions with the off-training-set correction (M := N), and exact
// KRR trials trained on subsets and evaluated on the complement.
PipelineResult empirical_pipeline(const TabularDataset& dataset, const PipelineConfig& config);

// JSON experiment file mirroring ExperimentConfig.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_json(const ExperimentConfig& config);

}  // namespace eigenlearn
