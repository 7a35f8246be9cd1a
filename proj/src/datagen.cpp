#include <doer/datagen.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <doer/csv_io.hpp>
#include <doer/errors.hpp>
#include <doer/types.hpp>

namespace doer {

std::string to_string(DriftKind kind)
{
    return kind == DriftKind::sudden ? "sudden" : "gradual";
}

DriftKind parse_drift_kind(const std::string& name)
{
    if (name == "sudden") return DriftKind::sudden;
    if (name == "gradual") return DriftKind::gradual;
    throw ArgumentError("unknown drift kind '" + name + "'");
}

std::size_t DriftProfile::length() const
{
    std::size_t n = 0;
    for (const auto& s : segments) n += s.length;
    return n;
}

std::vector<double> DriftProfile::trajectory() const
{
    std::vector<double> eff;
    eff.reserve(length());
    for (const auto& s : segments) {
        for (std::size_t i = 0; i < s.length; ++i) {
            if (s.kind == SegmentKind::ramp && s.length > 1)
                eff.push_back(s.start + (s.end - s.start) * static_cast<double>(i) / static_cast<double>(s.length - 1));
            else
                eff.push_back(s.kind == SegmentKind::ramp ? s.end : s.start);
        }
    }
    return eff;
}

std::vector<ChangePoint> DriftProfile::change_points() const
{
    std::vector<ChangePoint> out;
    std::int64_t t = 0;
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        const bool onset = kind == DriftKind::sudden ? s.kind == SegmentKind::jump
                                                     : s.kind == SegmentKind::ramp;
        if (onset) {
            const std::size_t range = s.kind == SegmentKind::jump && k + 1 < segments.size()
                                          ? segments[k + 1].length
                                          : s.length;
            out.push_back({t, static_cast<std::int64_t>(range)});
        }
        t += static_cast<std::int64_t>(s.length);
    }
    return out;
}

DriftProfile build_profile(DriftKind kind, std::size_t length, std::uint64_t seed)
{
    if (length < 200) throw ArgumentError("build_profile: series length must be >= 200");
    std::mt19937_64 rng(seed);
    auto span = [&](int lo_pct, int hi_pct) {
        std::uniform_int_distribution<std::size_t> dist(length * lo_pct / 100, length * hi_pct / 100);
        return dist(rng);
    };

    DriftProfile p;
    p.kind = kind;
    if (kind == DriftKind::sudden) {
        const std::size_t decline = span(25, 35);
        const std::size_t change = span(15, 25);
        const std::size_t stable = span(10, 20);
        const std::size_t tail = length - decline - change - stable;
        p.segments = {
            {decline, SegmentKind::ramp, 1.0, 0.9},
            {0, SegmentKind::jump, 0.9, 1.1},
            {change, SegmentKind::ramp, 1.1, 0.9},
            {0, SegmentKind::jump, 0.9, 1.1},
            {stable, SegmentKind::hold, 1.1, 1.1},
            {tail, SegmentKind::ramp, 1.1, 0.95},
        };
    } else {
        const std::size_t stable = span(20, 35);
        const std::size_t change = span(20, 40);
        p.segments = {
            {stable, SegmentKind::hold, 1.0, 1.0},
            {change, SegmentKind::ramp, 1.0, 0.9},
            {length - stable - change, SegmentKind::hold, 0.9, 0.9},
        };
    }
    return p;
}

namespace {

// Sinusoid periods in samples (144 = half a day at 5-minute sampling).
constexpr std::array<double, kPlantInputs> kPeriod{144, 131, 173, 144, 151, 113, 181, 144, 167};
constexpr std::array<double, kPlantInputs> kAmplitude{0.22, 0.15, 0.10, 0.18, 0.12, 0.20, 0.10, 0.20, 0.18};
// Loading of each channel's innovation on the shared factor.
constexpr std::array<double, kPlantInputs> kShared{0.3, -0.5, 0.2, 0.6, 0.5, 0.7, 0.1, 0.8, 0.7};
constexpr double kStationaryStd = 0.12;

} // namespace

InputGenerator::InputGenerator(std::uint64_t seed) : rng_(seed)
{
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (auto& ph : phase_) ph = angle(rng_);
    for (auto& s : state_) s = kStationaryStd * normal_(rng_);
}

PlantInput InputGenerator::next()
{
    const double innovation_std = kStationaryStd * std::sqrt(1.0 - ar_coefficient * ar_coefficient);
    const double shared = normal_(rng_);
    PlantInput x;
    for (int c = 0; c < kPlantInputs; ++c) {
        const double own = normal_(rng_);
        const double mixed = kShared[c] * shared + std::sqrt(1.0 - kShared[c] * kShared[c]) * own;
        state_[c] = ar_coefficient * state_[c] + innovation_std * mixed;
        const double wave = kAmplitude[c] * std::sin(2.0 * std::numbers::pi * static_cast<double>(t_) / kPeriod[c] + phase_[c]);
        x(c) = std::clamp(0.5 + wave + state_[c], 0.0, 1.0);
    }
    ++t_;
    return x;
}

Eigen::MatrixXd gen_inputs(std::size_t length, std::uint64_t seed)
{
    InputGenerator gen(seed);
    Eigen::MatrixXd X(static_cast<Index>(length), kPlantInputs);
    for (Index t = 0; t < X.rows(); ++t) X.row(t) = gen.next().transpose();
    return X;
}

double ResponseSurface::operator()(const PlantInput& x) const
{
    const PlantInput u = x.array() - 0.5;
    double g = 1.0;
    for (int i = 0; i < kPlantInputs; ++i) g += linear[i] * u(i);
    for (const auto& p : bilinear) g += p.coef * u(p.i) * u(p.j);
    for (const auto& q : quadratic) g += q.coef * u(q.i) * u(q.i);
    for (const auto& s : saturating) g += s.coef * std::tanh(s.gain * u(s.i));
    return nominal * g;
}

SurrogateParams SurrogateParams::defaults()
{
    // Channel order: 0 inlet temperature, 1 inlet humidity, 2 ambient pressure,
    // 3 inlet pressure drop, 4 exhaust pressure drop, 5 IGV angle,
    // 6 fuel temperature, 7 compressor flow, 8 firing temperature.
    SurrogateParams p;
    p.power.nominal = 400.0;
    p.power.linear = {-0.10, -0.02, 0.04, -0.02, -0.015, 0.0, 0.01, 0.06, 0.04};
    p.power.bilinear = {{0, 7, -0.08}, {5, 8, 0.02}};
    p.power.saturating = {{5, 2.0, 0.05}};

    p.heat_rate.nominal = 9000.0;
    p.heat_rate.linear = {0.03, 0.005, -0.01, 0.015, 0.01, 0.0, -0.005, -0.02, -0.015};
    p.heat_rate.bilinear = {{0, 8, 0.015}};
    p.heat_rate.quadratic = {{5, 0.04}};
    p.heat_rate.saturating = {{5, 2.0, -0.025}};
    return p;
}

SurrogateParams SurrogateParams::noiseless()
{
    SurrogateParams p = defaults();
    p.power_noise_std = 0;
    p.heat_rate_noise_std = 0;
    p.outlier_probability = 0;
    return p;
}

void SurrogateParams::validate() const
{
    if (!(power_noise_std >= 0) || !(heat_rate_noise_std >= 0))
        throw ArgumentError("surrogate noise std must be >= 0");
    if (!(outlier_probability >= 0) || !(outlier_probability < 1))
        throw ArgumentError("outlier probability must be in [0, 1)");
}

PlantOutput plant_surrogate(const PlantInput& x, double efficiency, const SurrogateParams& params,
                            std::mt19937_64* noise)
{
    if (!(efficiency >= kMinEfficiency && efficiency <= kMaxEfficiency))
        throw ArgumentError("plant_surrogate: efficiency " + std::to_string(efficiency) + " outside [0.85, 1.15]");
    PlantOutput out{efficiency * params.power(x), params.heat_rate(x) / efficiency};
    if (noise) {
        std::normal_distribution<double> n01(0.0, 1.0);
        out.power += params.power_noise_std * n01(*noise);
        out.heat_rate += params.heat_rate_noise_std * n01(*noise);
    }
    return out;
}

Series generate_series(DriftKind kind, std::size_t length, std::uint64_t seed, const SurrogateParams& params)
{
    params.validate();
    Series s;
    s.kind = kind;
    s.seed = seed;
    s.profile = build_profile(kind, length, seed);
    const auto eff = s.profile.trajectory();

    InputGenerator inputs(derive_seed(seed, 1));
    std::mt19937_64 noise(derive_seed(seed, 2));
    std::mt19937_64 outliers(derive_seed(seed, 3));
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    s.records.reserve(length);
    for (std::size_t t = 0; t < length; ++t) {
        StreamRecord rec;
        rec.t = static_cast<std::int64_t>(t);
        rec.x = inputs.next();
        rec.efficiency = eff[t];
        const auto out = plant_surrogate(rec.x, rec.efficiency, params, &noise);
        rec.power = out.power;
        rec.heat_rate = out.heat_rate;
        // drawn unconditionally so the outlier rate does not shift the other streams
        if (unif(outliers) < params.outlier_probability) rec.power = 0.0;
        s.records.push_back(rec);
    }
    return s;
}

std::uint64_t series_seed(std::uint64_t master_seed, std::size_t id)
{
    return derive_seed(master_seed, 0x5E21E5ull + id);
}

std::vector<ManifestRow> generate_corpus(std::size_t n_sudden, std::size_t n_gradual, std::size_t length,
                                         std::uint64_t master_seed, const SurrogateParams& params,
                                         const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create corpus directory " + dir.string() + ": " + ec.message());

    std::vector<ManifestRow> manifest;
    for (std::size_t id = 0; id < n_sudden + n_gradual; ++id) {
        const DriftKind kind = id < n_sudden ? DriftKind::sudden : DriftKind::gradual;
        const std::uint64_t seed = series_seed(master_seed, id);
        const Series s = generate_series(kind, length, seed, params);
        write_series_csv(dir / series_file_name(id), s, master_seed);
        write_efficiency_csv(dir / efficiency_file_name(id), s, master_seed);
        manifest.push_back({id, kind, seed, s.profile.change_points()});
    }
    write_manifest_csv(dir / "manifest.csv", manifest, master_seed);
    return manifest;
}

} // namespace doer
