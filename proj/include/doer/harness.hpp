#pragma once

// Prequential (predict, score, then learn) evaluation of the ensemble and its
// single-model baselines, change-window metrics, corpus runs and sweeps.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <doer/datagen.hpp>
#include <doer/ensemble.hpp>
#include <doer/types.hpp>

namespace doer {

enum class AlgorithmKind
{
    static_elm,     // batch ELM trained once, never updated
    os_elm,         // one sequentially updated ELM
    doer_original,  // ensemble, window-only training sets
    doer_modified   // ensemble, window + reservoir training sets
};

std::string to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm(const std::string& name);
std::vector<AlgorithmKind> all_algorithms();

struct AlgorithmSpec
{
    AlgorithmKind kind = AlgorithmKind::doer_modified;
    EnsembleConfig config;
    std::size_t init_size = 0;  // 0: ws + largest hidden candidate

    std::size_t resolved_init_size() const;
};

struct StepRecord
{
    std::int64_t index = 0;
    Eigen::VectorXd prediction;
    Eigen::VectorXd actual;
    Eigen::VectorXd ape;        // percent
    std::size_t ensemble_size = 1;
    bool spawned = false;
};

struct EvalReport
{
    AlgorithmKind algorithm = AlgorithmKind::doer_modified;
    std::vector<std::string> output_names;
    std::size_t init_size = 0;
    std::size_t skipped = 0;    // non-finite or zero-target rows, init block included
    Index hidden = 0;
    std::vector<StepRecord> steps;
    Eigen::VectorXd mape;       // whole scored stream, per output
    std::size_t spawns = 0;
    double wall_seconds = 0;
    std::vector<std::string> diagnostics;

    /// Average of `mape` over outputs.
    double mean_mape() const;
};

// Hook to observe evaluation order.
class PrequentialProbe
{
public:
    virtual ~PrequentialProbe() = default;
    virtual void on_predict(std::int64_t index) = 0;
    virtual void on_learn(std::int64_t index) = 0;
};

/// True for rows the harness can score: finite values and no zero target.
bool is_scorable(const Sample& s);

/// The first `init_size` scorable rows train the model; every later scorable
/// row is predicted, scored, then learned from (STATIC_ELM never learns).
EvalReport prequential_run(const AlgorithmSpec& spec, const std::vector<Sample>& stream,
                           PrequentialProbe* probe = nullptr,
                           std::vector<std::string> output_names = {"power", "heat_rate"});

/// Mean of the stored APEs of steps whose stream index lies in `indices`
/// (inclusive bounds), per output. NaN entries when no step qualifies.
Eigen::VectorXd mape_over(const EvalReport& report, const std::vector<std::pair<std::int64_t, std::int64_t>>& ranges);

/// MAPE over the union of [cp - lead, cp + range] windows, clipped to the
/// scored part of the stream (clipping is reported through `diagnostics`).
Eigen::VectorXd change_window_mape(const EvalReport& report, const std::vector<ChangePoint>& change_points,
                                   std::int64_t lead = 100, std::vector<std::string>* diagnostics = nullptr);

struct Recovery
{
    std::vector<std::optional<std::int64_t>> samples;   // per output; nullopt = not recovered
    Eigen::VectorXd max_ape;  // worst APE from the change until recovery (or the scan end)

    /// Worst output; nullopt if any output did not recover.
    std::optional<std::int64_t> worst() const;
};

/// Scans steps with index >= change_point (up to `horizon` samples when given).
/// A step at index t that is below `threshold_pct` counts t - change_point + 1.
Recovery recovery_time(const EvalReport& report, std::int64_t change_point, double threshold_pct,
                       std::optional<std::int64_t> horizon = std::nullopt);

void write_steps_csv(const std::filesystem::path& path, const EvalReport& report, std::uint64_t master_seed);

struct CorpusSeries
{
    ManifestRow meta;
    std::vector<Sample> samples;
};

struct CorpusLoad
{
    std::vector<CorpusSeries> series;
    std::vector<std::string> failures;
};

/// Reads manifest.csv and every listed series; unreadable series are
/// recorded as failures.
CorpusLoad load_corpus(const std::filesystem::path& dir);

struct SeriesResult
{
    std::size_t series_id = 0;
    DriftKind kind = DriftKind::gradual;
    AlgorithmKind algorithm = AlgorithmKind::doer_modified;
    std::vector<double> window_mape;    // per replicate, mean over outputs
    std::vector<double> stream_mape;
    double mean_window_mape = 0;
    double mean_stream_mape = 0;
};

struct AggregateRow
{
    DriftKind kind = DriftKind::gradual;
    AlgorithmKind algorithm = AlgorithmKind::doer_modified;
    std::size_t series = 0;
    double mean_window_mape = 0;
    double std_window_mape = 0;
    double mean_stream_mape = 0;
    double std_stream_mape = 0;
};

struct CorpusResult
{
    std::vector<SeriesResult> per_series;   // ordered by (series_id, algorithm)
    std::vector<AggregateRow> aggregate;    // ordered by (kind, algorithm name)
    std::vector<std::string> failures;
};

/// Runs every algorithm `replicates` times on every series. Replicate r uses
/// config seed master_seed + r; cells run on up to `jobs` threads and are
/// reduced in a fixed order.
CorpusResult run_corpus(const std::vector<AlgorithmSpec>& algorithms, const std::vector<CorpusSeries>& corpus,
                        std::size_t replicates, std::uint64_t master_seed, std::size_t jobs = 1);

void write_per_series_csv(const std::filesystem::path& path, const CorpusResult& result, std::uint64_t master_seed);
void write_aggregate_csv(const std::filesystem::path& path, const CorpusResult& result, std::uint64_t master_seed);

enum class SweepParam
{
    ws,
    delta,
    es
};

std::string to_string(SweepParam p);
SweepParam parse_sweep_param(const std::string& name);

struct SweepRow
{
    SweepParam param = SweepParam::delta;
    double value = 0;
    bool valid = true;
    std::string note;
    std::size_t runs = 0;
    double mean_mape = 0;           // whole stream, averaged over series
    double std_mape = 0;            // across series
    double mean_window_mape = 0;
};

/// One row per value. Each series contributes its replicate-mean MAPE.
std::vector<SweepRow> parameter_sweep(SweepParam param, const std::vector<double>& values, const AlgorithmSpec& base,
                                      const std::vector<CorpusSeries>& streams, std::size_t replicates,
                                      std::uint64_t master_seed, std::size_t jobs = 1);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows, std::uint64_t master_seed);

/// Sample mean and (n-1) standard deviation; std is 0 for n < 2.
std::pair<double, double> mean_std(const std::vector<double>& values);

} // namespace doer
