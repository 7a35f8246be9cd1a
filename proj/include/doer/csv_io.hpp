#pragma once

// CSV formats.
//
//   series:      t,x1,...,x9,power,heat_rate
//   efficiency:  t,efficiency
//   manifest:    series_id,kind,seed,change_points
//                change_points = "index:range" entries joined by ';'
//   steps:       t,pred_<out>...,actual_<out>...,ape_<out>...,ensemble_size,spawned
//
// Every file starts with one '#'-prefixed provenance line carrying the master
// seed. Readers skip '#' lines.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <doer/datagen.hpp>
#include <doer/types.hpp>

namespace doer {

/// Shortest round-trip representation in plain (non-exponent) decimal.
std::string format_decimal(double value);

std::string series_file_name(std::size_t id);
std::string efficiency_file_name(std::size_t id);

void write_series_csv(const std::filesystem::path& path, const Series& series, std::uint64_t master_seed);
void write_efficiency_csv(const std::filesystem::path& path, const Series& series, std::uint64_t master_seed);
void write_manifest_csv(const std::filesystem::path& path, const std::vector<ManifestRow>& rows,
                        std::uint64_t master_seed);
std::vector<ManifestRow> read_manifest_csv(const std::filesystem::path& path);

struct LoadedStream
{
    std::vector<Sample> samples;                // in file order
    std::vector<std::string> output_names{"power", "heat_rate"};
    std::size_t dropped_missing = 0;            // rows with empty / NA / NaN fields
};

/// Reads a series file. With `allow_untimed` an 11-column file without the
/// `t` column is also accepted and rows are indexed by position.
/// Malformed rows throw DataError naming the 1-based line.
LoadedStream read_series_csv(const std::filesystem::path& path, bool allow_untimed = false);

} // namespace doer
