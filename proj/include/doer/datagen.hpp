#pragma once

// Synthetic drifting plant streams.
//
// A hidden compressor efficiency follows a piecewise-linear profile. Nine
// plant-style input signals are generated independently of it, and an
// analytic surrogate maps (inputs, efficiency) to gross power and heat rate:
//
//   power     = eff * g_P(x) + noise
//   heat_rate = g_H(x) / eff + noise
//
// The efficiency itself is never part of the model-facing columns.

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace doer {

inline constexpr int kPlantInputs = 9;
using PlantInput = Eigen::Matrix<double, kPlantInputs, 1>;

enum class DriftKind
{
    sudden,
    gradual
};

std::string to_string(DriftKind kind);
DriftKind parse_drift_kind(const std::string& name);

enum class SegmentKind
{
    hold,
    ramp,
    jump
};

struct Segment
{
    std::size_t length = 0;     // samples; always 0 for jumps
    SegmentKind kind = SegmentKind::hold;
    double start = 1.0;
    double end = 1.0;
};

struct ChangePoint
{
    std::int64_t index = 0;     // first sample of the new regime
    std::int64_t range = 0;     // samples the change lasts
};

struct DriftProfile
{
    DriftKind kind = DriftKind::gradual;
    std::vector<Segment> segments;

    std::size_t length() const;
    /// Efficiency at every time step.
    std::vector<double> trajectory() const;
    /// Jump positions (sudden) or ramp onset (gradual), each with its range.
    std::vector<ChangePoint> change_points() const;
};

inline constexpr double kMinEfficiency = 0.85;
inline constexpr double kMaxEfficiency = 1.15;

/// Sudden: 1.0 ramps to 0.9, jumps to 1.1, ramps to 0.9, jumps to 1.1, holds,
/// then ramps to 0.95. Gradual: holds at 1.0, ramps to 0.9, holds.
/// Segment timing is drawn from `seed`; levels are fixed.
DriftProfile build_profile(DriftKind kind, std::size_t length, std::uint64_t seed);

// Bounded correlated plant inputs in normalized units [0, 1]: a slow sinusoid
// plus mixed AR(1) noise per channel.
class InputGenerator
{
public:
    explicit InputGenerator(std::uint64_t seed);

    PlantInput next();

    static constexpr double ar_coefficient = 0.9;

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::array<double, kPlantInputs> phase_{};
    std::array<double, kPlantInputs> state_{};
    std::int64_t t_ = 0;
};

/// T x 9 matrix of consecutive InputGenerator draws.
Eigen::MatrixXd gen_inputs(std::size_t length, std::uint64_t seed);

// g(x) = nominal * (1 + sum_i linear_i u_i + sum bilinear c u_i u_j
//                     + sum quadratic c u_i^2 + sum saturating c tanh(gain u_i))
// with u = x - 0.5.
struct ResponseSurface
{
    struct Pair { int i; int j; double coef; };
    struct Square { int i; double coef; };
    struct Saturating { int i; double gain; double coef; };

    double nominal = 1.0;
    std::array<double, kPlantInputs> linear{};
    std::vector<Pair> bilinear;
    std::vector<Square> quadratic;
    std::vector<Saturating> saturating;

    double operator()(const PlantInput& x) const;
};

struct SurrogateParams
{
    ResponseSurface power;
    ResponseSurface heat_rate;
    double power_noise_std = 2.0;       // 0.5% of nominal
    double heat_rate_noise_std = 45.0;
    double outlier_probability = 0.002;

    static SurrogateParams defaults();
    static SurrogateParams noiseless();
    void validate() const;
};

struct PlantOutput
{
    double power;
    double heat_rate;
};

/// Surrogate plant response. `noise` may be null for a noise-free evaluation.
PlantOutput plant_surrogate(const PlantInput& x, double efficiency, const SurrogateParams& params,
                            std::mt19937_64* noise);

struct StreamRecord
{
    std::int64_t t = 0;
    PlantInput x;
    double power = 0;
    double heat_rate = 0;
    double efficiency = 1.0;    // side channel only
};

struct Series
{
    DriftKind kind = DriftKind::gradual;
    std::uint64_t seed = 0;
    DriftProfile profile;
    std::vector<StreamRecord> records;
};

Series generate_series(DriftKind kind, std::size_t length, std::uint64_t seed, const SurrogateParams& params);

struct ManifestRow
{
    std::size_t series_id = 0;
    DriftKind kind = DriftKind::gradual;
    std::uint64_t seed = 0;
    std::vector<ChangePoint> change_points;
};

/// Seed of series `id` in a corpus.
std::uint64_t series_seed(std::uint64_t master_seed, std::size_t id);

/// Writes sudden series first, then gradual, plus manifest.csv into `dir`.
std::vector<ManifestRow> generate_corpus(std::size_t n_sudden, std::size_t n_gradual, std::size_t length,
                                         std::uint64_t master_seed, const SurrogateParams& params,
                                         const std::filesystem::path& dir);

} // namespace doer
