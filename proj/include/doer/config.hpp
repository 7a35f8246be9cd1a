#pragma once

// Run configuration: defaults, a flat sectioned key = value file, validation.
//
//   [ensemble]   ws, delta, es, hidden, folds, activation, ridge,
//                output_weight_ratio, mse_mode, init_size
//   [run]        algorithm, seed, replicates, jobs, output_dir
//   [corpus]     sudden, gradual, length
//   [surrogate]  power_noise, heat_rate_noise, outlier_probability
//
// List values are comma separated. '#' and ';' start comment lines.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <doer/datagen.hpp>
#include <doer/harness.hpp>

namespace doer {

struct RunConfig
{
    AlgorithmSpec algorithm;
    SurrogateParams surrogate = SurrogateParams::defaults();
    std::size_t n_sudden = 265;
    std::size_t n_gradual = 235;
    std::size_t length = 2000;
    std::uint64_t master_seed = 1;
    std::size_t replicates = 5;
    std::size_t jobs = 1;
    std::filesystem::path output_dir = "out";

    /// Throws ConfigError on the first violated constraint.
    void validate() const;
};

/// Applies `key` in `section` to cfg. Throws ConfigError for unknown keys or
/// unparsable values.
void apply_setting(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value);

/// Applies every setting in `text` (errors name the 1-based line).
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin = "config");

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

std::vector<double> parse_double_list(const std::string& text);

} // namespace doer
