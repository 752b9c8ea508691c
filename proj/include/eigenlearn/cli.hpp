// Subcommand implementations behind the command-line tool. Kept in the
// library so they are testable without spawning processes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eigenlearn/kernel.hpp"
#include "eigenlearn/montecarlo.hpp"

namespace eigenlearn::cli {

struct KernelOptions {
    std::string variant = "relu-ntk";
    int depth = 4;
    double sigma_w = 1.4;
    double sigma_b = 0.1;
    double bandwidth = 1.0;
    double scale = 1.0;
    double jitter = 0.0;
    std::string profile_file;

    KernelSpec build() const;
};

struct DomainOptions {
    std::string domain = "circle";
    int M = 256;
    int d = 8;
    int k_max = 70;

    DomainConfig build() const;
};

struct ManifestInfo {
    std::string command;
    std::string manifest_path;  // empty = next to first output
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::string config_json;
};

void write_manifest(const ManifestInfo& info, double elapsed_seconds);

struct SpectrumOptions {
    DomainOptions domain;
    KernelOptions kernel;
    std::string output = "spectrum.csv";
    std::string manifest;
};
int cmd_spectrum(const SpectrumOptions& options);

struct PredictOptions {
    DomainOptions domain;
    KernelOptions kernel;
    std::string spectrum_csv;  // overrides domain+kernel when set
    std::vector<int> targets;  // mode levels
    std::vector<int> n_grid;
    double ridge = 0.0;
    bool collapse = false;     // emit lambda/C rows
    std::string output = "theory.csv";
    std::string manifest;
};
int cmd_predict(const PredictOptions& options);

struct SimulateOptions {
    ExperimentConfig config;
    std::string experiment_id = "simulate";
    std::string output = "empirical.csv";
    std::string manifest;
};
int cmd_simulate(const SimulateOptions& options);

struct CompareOptions {
    std::string theory_csv;
    std::string empirical_csv;
    std::string output = "compare.csv";
    double z_threshold = 3.0;
    bool no_gate = false;
    std::string manifest;
};
int cmd_compare(const CompareOptions& options);

struct ParityOptions {
    int d = 11;
    double epsilon = 0.01;
    bool empirical = false;  // run the hypercube full-parity bound check
    KernelOptions kernel;
    std::vector<int> n_grid;
    int trials = 100;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string output = "parity.csv";
    std::string manifest;
};
int cmd_parity(const ParityOptions& options);

struct ConservationOptions {
    DomainOptions domain;
    KernelOptions kernel;
    std::vector<int> n_grid;
    double ridge = 0.0;
    int trials = 1;
    std::uint64_t seed = 1;
    std::string output = "conservation.csv";
    std::string manifest;
};
int cmd_conservation(const ConservationOptions& options);

struct PipelineOptions {
    std::string data_path;
    int label_column = -1;
    std::string normalization = "none";
    KernelOptions kernel;
    std::vector<int> n_grid;
    double ridge = 0.0;
    int trials = 30;
    std::uint64_t seed = 1;
    int workers = 1;
    int max_rows = 4000;
    bool allow_large = false;
    std::string output = "pipeline.csv";
    std::string spectrum_output;
    std::string manifest;
};
int cmd_pipeline(const PipelineOptions& options);

}  // namespace eigenlearn::cli
