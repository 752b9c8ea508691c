#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "eigenlearn/cli.hpp"
#include "eigenlearn/csvio.hpp"
#include "eigenlearn/spectrum.hpp"

using namespace eigenlearn;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() : path(std::filesystem::temp_directory_path() / "eigenlearn_cli_test") {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int count_levels(const std::string& csv) {
    const Spectrum s = read_spectrum_csv(csv);
    return static_cast<int>(s.size());
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("spectrum subcommand writes the expected level counts") {
    TempDir dir;
    SUBCASE("circle M=256 gives 129 levels") {
        cli::SpectrumOptions options;
        options.domain.domain = "circle";
        options.domain.M = 256;
        options.output = dir.file("circle.csv");
        REQUIRE(cli::cmd_spectrum(options) == 0);
        CHECK(count_levels(options.output) == 129);
        CHECK(std::filesystem::exists(options.output + ".manifest.json"));
    }
    SUBCASE("hypercube d=8 gives 9 levels with binomial multiplicities") {
        cli::SpectrumOptions options;
        options.domain.domain = "hypercube";
        options.domain.d = 8;
        options.output = dir.file("cube.csv");
        REQUIRE(cli::cmd_spectrum(options) == 0);
        const Spectrum s = read_spectrum_csv(options.output);
        REQUIRE(s.size() == 9);
        double total = 0.0;
        for (double w : s.weights) total += w;
        CHECK(total == doctest::Approx(256.0));
    }
    SUBCASE("sphere d=7 kmax=70 gives 71 levels") {
        cli::SpectrumOptions options;
        options.domain.domain = "sphere";
        options.domain.d = 7;
        options.domain.k_max = 70;
        options.output = dir.file("sphere.csv");
        REQUIRE(cli::cmd_spectrum(options) == 0);
        CHECK(count_levels(options.output) == 71);
    }
}

TEST_CASE("predict subcommand emits the schema and the budget identity") {
    TempDir dir;
    cli::PredictOptions options;
    options.domain.domain = "circle";
    options.domain.M = 64;
    options.targets = {0, 1, 2};
    options.n_grid = {0, 8, 24};
    options.output = dir.file("theory.csv");
    REQUIRE(cli::cmd_predict(options) == 0);
    const auto rows = read_long_csv(options.output);

    SUBCASE("n = 0 learnabilities vanish") {
        for (const auto& r : rows) {
            if (r.n == 0 && r.quantity == "learnability") CHECK(*r.theory == 0.0);
        }
    }
    SUBCASE("the budget column sums to n at ridge zero") {
        for (int n : {8, 24}) {
            bool found = false;
            for (const auto& r : rows) {
                if (r.n == n && r.quantity == "conservation_sum") {
                    CHECK(*r.theory == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
                    found = true;
                }
            }
            CHECK(found);
        }
    }
    SUBCASE("per-n constants appear") {
        for (const char* name : {"C", "q", "overfit_threshold"}) {
            int count = 0;
            for (const auto& r : rows) count += r.quantity == name;
            CHECK(count == 3);
        }
    }
}

TEST_CASE("compare subcommand") {
    TempDir dir;
    std::vector<LongRow> theory_rows{
        {"t", "modeA", 8, "learnability", {}, {}, {}, {}, 0.5},
        {"t", "modeA", 16, "learnability", {}, {}, {}, {}, 0.8},
    };
    std::vector<LongRow> empirical_rows{
        {"e", "modeA", 8, "learnability", 0.5, 0.01, 0.001, 100, {}},
        {"e", "modeA", 16, "learnability", 0.81, 0.01, 0.001, 100, {}},
    };
    const std::string theory_csv = dir.file("th.csv");
    const std::string empirical_csv = dir.file("emp.csv");
    write_long_csv(theory_rows, theory_csv);
    write_long_csv(empirical_rows, empirical_csv);

    SUBCASE("identical values give z = 0; gate catches deviations") {
        cli::CompareOptions options;
        options.theory_csv = theory_csv;
        options.empirical_csv = empirical_csv;
        options.output = dir.file("cmp.csv");
        // second cell deviates by 10 stderr -> gate fails
        CHECK(cli::cmd_compare(options) == 1);
        const auto report = read_long_csv(options.output);
        REQUIRE(report.size() == 2);
        CHECK(*report[0].mean == doctest::Approx(0.0));
        CHECK(*report[1].mean == doctest::Approx(10.0));
        options.no_gate = true;
        CHECK(cli::cmd_compare(options) == 0);
    }
    SUBCASE("missing join keys are an error") {
        std::vector<LongRow> extra = empirical_rows;
        extra.push_back({"e", "modeB", 8, "learnability", 0.3, 0.01, 0.001, 100, {}});
        const std::string extra_csv = dir.file("extra.csv");
        write_long_csv(extra, extra_csv);
        cli::CompareOptions options;
        options.theory_csv = theory_csv;
        options.empirical_csv = extra_csv;
        options.output = dir.file("cmp2.csv");
        CHECK(cli::cmd_compare(options) == 2);
    }
}

TEST_CASE("parity subcommand evaluates the analytic bound") {
    TempDir dir;
    cli::ParityOptions options;
    options.d = 11;
    options.epsilon = 0.01;
    options.output = dir.file("parity.csv");
    REQUIRE(cli::cmd_parity(options) == 0);
    const auto rows = read_long_csv(options.output);
    bool found = false;
    for (const auto& r : rows) {
        if (r.quantity == "n_min") {
            CHECK(*r.theory == doctest::Approx(922.0));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("conservation subcommand: stacks sum to n, ridge strictly below") {
    TempDir dir;
    cli::ConservationOptions options;
    options.domain.domain = "circle";
    options.domain.M = 10;
    options.n_grid = {2, 5, 8};
    options.trials = 2;
    options.output = dir.file("cons.csv");
    REQUIRE(cli::cmd_conservation(options) == 0);
    {
        const auto rows = read_long_csv(options.output);
        for (int n : {2, 5, 8}) {
            double stack = 0.0, sum_row = -1.0;
            for (const auto& r : rows) {
                if (r.n != n) continue;
                if (r.quantity == "d_learnability") stack += *r.mean;
                if (r.quantity == "conservation_sum") sum_row = *r.mean;
            }
            CHECK(stack == doctest::Approx(static_cast<double>(n)).epsilon(1e-8));
            CHECK(sum_row == doctest::Approx(static_cast<double>(n)).epsilon(1e-8));
        }
    }
    options.ridge = 0.1;
    options.output = dir.file("cons_ridge.csv");
    REQUIRE(cli::cmd_conservation(options) == 0);
    {
        const auto rows = read_long_csv(options.output);
        for (const auto& r : rows) {
            if (r.quantity == "conservation_sum") CHECK(*r.mean < r.n);
        }
    }
    options.ridge = 0.0;
    options.n_grid = {0};
    options.output = dir.file("cons_zero.csv");
    REQUIRE(cli::cmd_conservation(options) == 0);
    {
        const auto rows = read_long_csv(options.output);
        for (const auto& r : rows) {
            if (r.quantity == "d_learnability") CHECK(*r.mean == 0.0);
        }
    }
}

TEST_SUITE_END();
