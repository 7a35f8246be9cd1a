#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doer/csv_io.hpp>
#include <doer/datagen.hpp>
#include <doer/errors.hpp>

using namespace doer;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("doer_test_datagen_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

PlantInput constant_input(double v)
{
    return PlantInput::Constant(v);
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const Eigen::ArrayXd ca = a.array() - a.mean(), cb = b.array() - b.mean();
    return (ca * cb).sum() / std::sqrt((ca * ca).sum() * (cb * cb).sum());
}

} // namespace

TEST_CASE("gradual profile")
{
    const auto p = build_profile(DriftKind::gradual, 2000, 5);
    const auto eff = p.trajectory();
    REQUIRE(eff.size() == 2000);
    CHECK(p.length() == 2000);
    CHECK(eff.front() == 1.0);
    CHECK(eff.back() == doctest::Approx(0.9).epsilon(1e-12));
    for (std::size_t t = 1; t < eff.size(); ++t) CHECK(eff[t] <= eff[t - 1] + 1e-15);
    const auto cps = p.change_points();
    REQUIRE(cps.size() == 1);
    CHECK(eff[static_cast<std::size_t>(cps[0].index)] == 1.0);
    CHECK(eff[static_cast<std::size_t>(cps[0].index + cps[0].range - 1)] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("sudden profile has two +0.2 jumps")
{
    for (std::uint64_t seed : {1u, 2u, 3u, 44u}) {
        const auto p = build_profile(DriftKind::sudden, 2000, seed);
        const auto eff = p.trajectory();
        REQUIRE(eff.size() == 2000);
        std::vector<std::int64_t> jumps;
        for (std::size_t t = 1; t < eff.size(); ++t) {
            const double step = eff[t] - eff[t - 1];
            if (step > 0.01) {
                CHECK(step == doctest::Approx(0.2).epsilon(1e-12));
                jumps.push_back(static_cast<std::int64_t>(t));
            } else {
                CHECK(std::fabs(step) < 0.01);
            }
        }
        REQUIRE(jumps.size() == 2);
        const auto cps = p.change_points();
        REQUIRE(cps.size() == 2);
        CHECK(cps[0].index == jumps[0]);
        CHECK(cps[1].index == jumps[1]);
        CHECK(cps[0].range == jumps[1] - jumps[0]);
        CHECK(eff.front() == 1.0);
        CHECK(eff.back() == doctest::Approx(0.95).epsilon(1e-12));
        CHECK(jumps[0] >= 500);
        CHECK(jumps[0] <= 700);
        for (double e : eff) {
            CHECK(e >= kMinEfficiency);
            CHECK(e <= kMaxEfficiency);
        }
    }
}

TEST_CASE("profiles are deterministic per seed")
{
    const auto a = build_profile(DriftKind::sudden, 2000, 9);
    const auto b = build_profile(DriftKind::sudden, 2000, 9);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
        CHECK(a.segments[i].length == b.segments[i].length);
        CHECK(a.segments[i].kind == b.segments[i].kind);
        CHECK(a.segments[i].start == b.segments[i].start);
        CHECK(a.segments[i].end == b.segments[i].end);
    }
    CHECK(a.change_points()[0].index != build_profile(DriftKind::sudden, 2000, 10).change_points()[0].index);
}

TEST_CASE("profiles need room for the pattern")
{
    CHECK_THROWS_AS(build_profile(DriftKind::sudden, 199, 1), ArgumentError);
    CHECK_THROWS_AS(build_profile(DriftKind::gradual, 10, 1), ArgumentError);
    CHECK(build_profile(DriftKind::sudden, 200, 1).length() == 200);
}

TEST_CASE("drift kind names")
{
    CHECK(parse_drift_kind(to_string(DriftKind::sudden)) == DriftKind::sudden);
    CHECK(parse_drift_kind("gradual") == DriftKind::gradual);
    CHECK_THROWS_AS(parse_drift_kind("abrupt"), ArgumentError);
}

TEST_CASE("inputs stay in the unit box")
{
    const auto X = gen_inputs(100000, 3);
    CHECK(X.cols() == kPlantInputs);
    CHECK(X.minCoeff() >= 0.0);
    CHECK(X.maxCoeff() <= 1.0);
}

TEST_CASE("inputs are reproducible, autocorrelated and cross-correlated")
{
    const auto X = gen_inputs(10000, 4);
    CHECK(X == gen_inputs(10000, 4));
    CHECK(X != gen_inputs(10000, 5));
    for (Index c = 0; c < kPlantInputs; ++c) {
        const Eigen::VectorXd a = X.col(c).head(9999), b = X.col(c).tail(9999);
        CHECK(correlation(a, b) > 0.5);
    }
    // channels 8 and 9 share the common factor most strongly
    CHECK(correlation(X.col(7), X.col(8)) > 0.05);
}

TEST_CASE("surrogate at the nominal point returns the nominal outputs")
{
    const auto params = SurrogateParams::noiseless();
    const auto out = plant_surrogate(constant_input(0.5), 1.0, params, nullptr);
    CHECK(out.power == 400.0);
    CHECK(out.heat_rate == 9000.0);
}

TEST_CASE("surrogate matches a hand evaluation of the documented coefficients")
{
    // every input at 0.6, u = 0.1
    const double u = 0.1, th = std::tanh(2.0 * u);
    const double lin_p = -0.10 - 0.02 + 0.04 - 0.02 - 0.015 + 0.0 + 0.01 + 0.06 + 0.04;
    const double g_p = 1 + lin_p * u + (-0.08 + 0.02) * u * u + 0.05 * th;
    const double lin_h = 0.03 + 0.005 - 0.01 + 0.015 + 0.01 + 0.0 - 0.005 - 0.02 - 0.015;
    const double g_h = 1 + lin_h * u + 0.015 * u * u + 0.04 * u * u - 0.025 * th;
    const auto params = SurrogateParams::noiseless();
    const auto at1 = plant_surrogate(constant_input(0.6), 1.0, params, nullptr);
    CHECK(at1.power == doctest::Approx(400.0 * g_p).epsilon(1e-14));
    CHECK(at1.heat_rate == doctest::Approx(9000.0 * g_h).epsilon(1e-14));
    CHECK(at1.power == doctest::Approx(403.5075064045).epsilon(1e-12));

    const auto at = plant_surrogate(constant_input(0.6), 1.1, params, nullptr);
    CHECK(at.power == doctest::Approx(1.1 * 400.0 * g_p).epsilon(1e-14));
    CHECK(at.heat_rate == doctest::Approx(9000.0 * g_h / 1.1).epsilon(1e-14));
}

TEST_CASE("higher efficiency raises power and lowers heat rate")
{
    const auto params = SurrogateParams::noiseless();
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        PlantInput x;
        for (int c = 0; c < kPlantInputs; ++c) x(c) = u(rng);
        const auto lo = plant_surrogate(x, 0.9, params, nullptr);
        const auto hi = plant_surrogate(x, 1.1, params, nullptr);
        CHECK(hi.power > lo.power);
        CHECK(hi.heat_rate < lo.heat_rate);
        const double e = 0.85 + 0.3 * u(rng) * (1 - 1e-3);
        const auto a = plant_surrogate(x, e, params, nullptr);
        const auto b = plant_surrogate(x, e + 1e-4, params, nullptr);
        CHECK(b.power > a.power);
        CHECK(b.heat_rate < a.heat_rate);
    }
}

TEST_CASE("surrogate noise and range checks")
{
    const auto clean = SurrogateParams::noiseless();
    const PlantInput x = constant_input(0.3);
    const auto a = plant_surrogate(x, 1.0, clean, nullptr);
    const auto b = plant_surrogate(x, 1.0, clean, nullptr);
    CHECK(a.power == b.power);
    CHECK(a.heat_rate == b.heat_rate);
    std::mt19937_64 rng(1);
    const auto noisy = plant_surrogate(x, 1.0, SurrogateParams::defaults(), &rng);
    CHECK(noisy.power != a.power);
    CHECK(std::fabs(noisy.power - a.power) < 10 * 2.0);

    CHECK_THROWS_AS(plant_surrogate(x, 0.84, clean, nullptr), ArgumentError);
    CHECK_THROWS_AS(plant_surrogate(x, 1.16, clean, nullptr), ArgumentError);
    CHECK_NOTHROW(plant_surrogate(x, 0.85, clean, nullptr));
    CHECK_NOTHROW(plant_surrogate(x, 1.15, clean, nullptr));

    auto bad = clean;
    bad.power_noise_std = -1;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    bad = clean;
    bad.outlier_probability = 1.0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("generated series")
{
    const auto s = generate_series(DriftKind::sudden, 2000, 77, SurrogateParams::defaults());
    REQUIRE(s.records.size() == 2000);
    const auto eff = s.profile.trajectory();
    for (std::size_t t = 0; t < s.records.size(); ++t) {
        CHECK(s.records[t].t == static_cast<std::int64_t>(t));
        CHECK(s.records[t].efficiency == eff[t]);
    }
    // change points from the side channel
    std::vector<std::int64_t> jumps;
    for (std::size_t t = 1; t < s.records.size(); ++t)
        if (s.records[t].efficiency - s.records[t - 1].efficiency > 0.1) jumps.push_back(static_cast<std::int64_t>(t));
    const auto cps = s.profile.change_points();
    REQUIRE(jumps.size() == cps.size());
    for (std::size_t i = 0; i < jumps.size(); ++i) CHECK(jumps[i] == cps[i].index);
}

TEST_CASE("outliers")
{
    auto params = SurrogateParams::defaults();
    params.outlier_probability = 0;
    for (const auto& r : generate_series(DriftKind::gradual, 5000, 3, params).records) CHECK(r.power != 0.0);
    params.outlier_probability = 0.002;
    std::size_t zeros = 0;
    for (const auto& r : generate_series(DriftKind::gradual, 50000, 3, params).records) zeros += r.power == 0.0;
    CHECK(zeros >= 60);
    CHECK(zeros <= 150);
}

TEST_CASE("inputs do not depend on the efficiency profile")
{
    const auto a = generate_series(DriftKind::sudden, 1000, 12, SurrogateParams::defaults());
    const auto b = generate_series(DriftKind::gradual, 1000, 12, SurrogateParams::defaults());
    for (std::size_t t = 0; t < 1000; ++t) CHECK(a.records[t].x == b.records[t].x);
}

TEST_CASE("decimal formatting round-trips")
{
    CHECK(format_decimal(0.1) == "0.1");
    CHECK(format_decimal(400.0) == "400");
    CHECK(format_decimal(-2.5) == "-2.5");
    CHECK(format_decimal(1e-7) == "0.0000001");
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1000);
    for (int i = 0; i < 1000; ++i) {
        const double v = n(rng);
        CHECK(std::stod(format_decimal(v)) == v);
        CHECK(format_decimal(v).find('e') == std::string::npos);
    }
}

TEST_CASE("series files round-trip")
{
    const auto dir = scratch_dir("roundtrip");
    const auto s = generate_series(DriftKind::gradual, 300, 21, SurrogateParams::defaults());
    write_series_csv(dir / "s.csv", s, 5);
    const auto text = slurp(dir / "s.csv");
    CHECK(text.rfind("# master_seed=5 series_seed=21 kind=gradual\nt,x1,x2,x3,x4,x5,x6,x7,x8,x9,power,heat_rate\n", 0) == 0);
    const auto loaded = read_series_csv(dir / "s.csv");
    REQUIRE(loaded.samples.size() == 300);
    for (std::size_t t = 0; t < 300; ++t) {
        CHECK(loaded.samples[t].index == static_cast<std::int64_t>(t));
        CHECK(loaded.samples[t].x == s.records[t].x);
        CHECK(loaded.samples[t].y(0) == s.records[t].power);
        CHECK(loaded.samples[t].y(1) == s.records[t].heat_rate);
    }
    write_efficiency_csv(dir / "e.csv", s, 5);
    CHECK(slurp(dir / "e.csv").rfind("# master_seed=5 series_seed=21\nt,efficiency\n0,1\n", 0) == 0);
}

TEST_CASE("series reader drops missing values and names bad lines")
{
    const auto dir = scratch_dir("reader");
    const std::string header = "t,x1,x2,x3,x4,x5,x6,x7,x8,x9,power,heat_rate\n";
    const std::string row = ",0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,400,9000\n";
    write_text(dir / "ok.csv", "# comment\n" + header + "0" + row + "1,0.5,,0.5,0.5,0.5,0.5,0.5,0.5,0.5,400,9000\n" +
                                   "2,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5,NA,9000\n" + "3" + row);
    const auto ok = read_series_csv(dir / "ok.csv");
    CHECK(ok.samples.size() == 2);
    CHECK(ok.dropped_missing == 2);
    CHECK(ok.samples[1].index == 3);

    write_text(dir / "bad.csv", header + "0" + row + "1,0.5,abc,0.5,0.5,0.5,0.5,0.5,0.5,0.5,400,9000\n");
    try {
        read_series_csv(dir / "bad.csv");
        FAIL("expected a data error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("bad.csv:3:") != std::string::npos);
    }
    write_text(dir / "short.csv", header + "0,1,2\n");
    CHECK_THROWS_AS(read_series_csv(dir / "short.csv"), DataError);
    write_text(dir / "hdr.csv", "a,b,c\n");
    CHECK_THROWS_AS(read_series_csv(dir / "hdr.csv"), DataError);
    write_text(dir / "empty.csv", "# nothing\n");
    CHECK_THROWS_AS(read_series_csv(dir / "empty.csv"), DataError);
    CHECK_THROWS_AS(read_series_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("untimed files need the flag")
{
    const auto dir = scratch_dir("untimed");
    write_text(dir / "u.csv",
               "x1,x2,x3,x4,x5,x6,x7,x8,x9,power,heat_rate\n0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,390,9100\n"
               "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,391,9101\n");
    CHECK_THROWS_AS(read_series_csv(dir / "u.csv"), DataError);
    const auto s = read_series_csv(dir / "u.csv", true);
    REQUIRE(s.samples.size() == 2);
    CHECK(s.samples[1].index == 1);
    CHECK(s.samples[1].y(0) == 391.0);
}

TEST_CASE("manifest round-trip and errors")
{
    const auto dir = scratch_dir("manifest");
    const std::vector<ManifestRow> rows{{0, DriftKind::sudden, 123, {{600, 350}, {950, 300}}},
                                        {1, DriftKind::gradual, 456, {{500, 700}}},
                                        {2, DriftKind::gradual, 789, {}}};
    write_manifest_csv(dir / "m.csv", rows, 9);
    const auto back = read_manifest_csv(dir / "m.csv");
    REQUIRE(back.size() == 3);
    CHECK(back[0].change_points.size() == 2);
    CHECK(back[0].change_points[1].index == 950);
    CHECK(back[0].change_points[1].range == 300);
    CHECK(back[1].kind == DriftKind::gradual);
    CHECK(back[1].seed == 456);
    CHECK(back[2].change_points.empty());
    CHECK(slurp(dir / "m.csv") == "# master_seed=9\nseries_id,kind,seed,change_points\n0,sudden,123,600:350;950:300\n"
                                  "1,gradual,456,500:700\n2,gradual,789,\n");

    write_text(dir / "bad.csv", "series_id,kind,seed,change_points\n0,sudden,1,12-40\n");
    CHECK_THROWS_AS(read_manifest_csv(dir / "bad.csv"), DataError);
    CHECK_THROWS_AS(read_manifest_csv(dir / "none.csv"), IoError);
}

TEST_CASE("corpus generation")
{
    const auto dir = scratch_dir("corpus");
    const auto m = generate_corpus(2, 1, 300, 42, SurrogateParams::defaults(), dir / "a");
    REQUIRE(m.size() == 3);
    CHECK(m[0].kind == DriftKind::sudden);
    CHECK(m[2].kind == DriftKind::gradual);
    CHECK(m[1].seed == series_seed(42, 1));
    for (std::size_t id = 0; id < 3; ++id) {
        CHECK(fs::exists(dir / "a" / series_file_name(id)));
        CHECK(fs::exists(dir / "a" / efficiency_file_name(id)));
    }
    CHECK(read_manifest_csv(dir / "a" / "manifest.csv").size() == 3);

    generate_corpus(2, 1, 300, 42, SurrogateParams::defaults(), dir / "b");
    for (const auto& entry : fs::directory_iterator(dir / "a"))
        CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));

    const auto single = generate_corpus(0, 1, 300, 42, SurrogateParams::defaults(), dir / "c");
    REQUIRE(single.size() == 1);
    CHECK(single[0].kind == DriftKind::gradual);
}

TEST_CASE("the full corpus split")
{
    // short series keep this quick; the split does not depend on length
    const auto dir = scratch_dir("full");
    const auto m = generate_corpus(265, 235, 200, 1, SurrogateParams::defaults(), dir);
    CHECK(m.size() == 500);
    std::size_t sudden = 0;
    for (const auto& r : m) sudden += r.kind == DriftKind::sudden;
    CHECK(sudden == 265);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir)) files += entry.path().extension() == ".csv";
    CHECK(files == 1001);
    fs::remove_all(dir);
}
