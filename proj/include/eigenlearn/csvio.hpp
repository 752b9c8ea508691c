// Shared long-format CSV for empirical and theoretical results:
// experiment_id,target,n,quantity,mean,std,stderr,trials,theory
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eigenlearn/montecarlo.hpp"

namespace eigenlearn {

struct LongRow {
    std::string experiment_id;
    std::string target;
    int n = 0;
    std::string quantity;
    std::optional<double> mean, std_dev, std_err;
    std::optional<int> trials;
    std::optional<double> theory;
};

void write_long_csv(const std::vector<LongRow>& rows, const std::filesystem::path& path);
std::vector<LongRow> read_long_csv(const std::filesystem::path& path);

std::vector<LongRow> to_long_rows(const AggregateStats& stats, const std::string& experiment_id);

}  // namespace eigenlearn
