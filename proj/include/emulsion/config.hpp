#pragma once

#include "emulsion/entropy.hpp"
#include "emulsion/interface.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace emulsion {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    static inline constexpr int kSchemaVersion = 1;

    int schema_version = kSchemaVersion;
    std::uint64_t seed = 1;
    int threads = 1;

    EntropyTableConfig entropy;
    InterfaceTableConfig interface;
    double a_max = 12.0;

    long perc_length = 512;
    int perc_samples = 64;
    double perc_tol = 0.005;

    double f_tol = 1e-10;
    double curve_tol = 1e-4;
    std::vector<double> curve_alphas{0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0};
    std::vector<double> probe_deltas{0.02, 0.04, 0.08, 0.16};
    double grid_step = 0.25;
    int grid_columns = 16;
    int grid_first_column = 0;
    int grid_row_min = -(1 << 20);
    int grid_row_max = 1 << 20;

    // point parameters for single-point commands
    double p = 0.7;
    double alpha = 0.0;
    double beta = 0.0;
    double mu = 2.0;
    double nu = 1.0;
    double a = 2.5;

    int oracle_L = 8;
    long oracle_n = 1600;
    int oracle_samples = 8;

    // Applies one key=value assignment; throws config_error naming the key.
    void set(const std::string& key, const std::string& value);
    void validate() const;
    // Canonical key=value listing, sorted by key.
    std::map<std::string, std::string> entries() const;
    std::string canonical() const;
    std::string hash() const;
};

// Parses a key=value file ('#' starts a comment). Errors carry "path:line: ".
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

} // namespace emulsion
