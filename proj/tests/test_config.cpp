#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <doer/config.hpp>
#include <doer/errors.hpp>

using namespace doer;

TEST_CASE("defaults")
{
    const RunConfig cfg;
    CHECK(cfg.algorithm.config.ws == 1000);
    CHECK(cfg.algorithm.config.delta == std::vector<double>{0.04});
    CHECK(cfg.algorithm.config.max_size == 10);
    CHECK(cfg.algorithm.kind == AlgorithmKind::doer_modified);
    CHECK(cfg.n_sudden == 265);
    CHECK(cfg.n_gradual == 235);
    CHECK(cfg.length == 2000);
    CHECK(cfg.replicates == 5);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("a full config file")
{
    RunConfig cfg;
    apply_config_text(cfg, R"(# comment
[ensemble]
ws = 300
delta = 0.02, 0.05
es = 6
hidden = 10,20
folds = 4
activation = tanh
ridge = 1e-4
output_weight_ratio = 3
mse_mode = literal
init_size = 400

; another comment
[run]
algorithm = os-elm
seed = 77
replicates = 2
jobs = 3
output_dir = results/a

[corpus]
sudden = 4
gradual = 5
length = 900

[surrogate]
power_noise = 1.5
heat_rate_noise = 30
outlier_probability = 0
)");
    const auto& e = cfg.algorithm.config;
    CHECK(e.ws == 300);
    CHECK(e.delta == std::vector<double>{0.02, 0.05});
    CHECK(e.max_size == 6);
    CHECK(e.hidden_candidates == std::vector<Index>{10, 20});
    CHECK(e.cv_folds == 4);
    CHECK(e.activation == Activation::tanh);
    CHECK(e.ridge == 1e-4);
    CHECK(e.output_weight_ratio == 3.0);
    CHECK(e.mse_mode == MseMode::literal);
    CHECK(cfg.algorithm.init_size == 400);
    CHECK(cfg.algorithm.kind == AlgorithmKind::os_elm);
    CHECK(cfg.master_seed == 77);
    CHECK(cfg.replicates == 2);
    CHECK(cfg.jobs == 3);
    CHECK(cfg.output_dir == "results/a");
    CHECK(cfg.n_sudden == 4);
    CHECK(cfg.n_gradual == 5);
    CHECK(cfg.length == 900);
    CHECK(cfg.surrogate.power_noise_std == 1.5);
    CHECK(cfg.surrogate.heat_rate_noise_std == 30.0);
    CHECK(cfg.surrogate.outlier_probability == 0.0);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("unknown keys and bad values name the line")
{
    RunConfig cfg;
    auto message = [&](const std::string& text) {
        try {
            apply_config_text(cfg, text, "t.ini");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[ensemble]\nws = 10\nwindow = 5\n").find("t.ini:3:") == 0);
    CHECK(message("[ensemble]\nws = 10\nwindow = 5\n").find("unknown setting 'ensemble.window'") != std::string::npos);
    CHECK(message("[nope]\nws = 1\n").find("t.ini:2:") == 0);
    CHECK(message("ws = 1\n").find("outside of a section") != std::string::npos);
    CHECK(message("[ensemble]\nws = ten\n").find("not a nonnegative integer") != std::string::npos);
    CHECK(message("[ensemble]\nws = -3\n").find("t.ini:2:") == 0);
    CHECK(message("[ensemble]\ndelta = 0.1,,0.2\n").find("not a number") != std::string::npos);
    CHECK(message("[ensemble]\nactivation = relu\n").find("t.ini:2:") == 0);
    CHECK(message("[ensemble]\nmse_mode = exact\n").find("sliding or literal") != std::string::npos);
    CHECK(message("[run]\nalgorithm = svm\n").find("t.ini:2:") == 0);
    CHECK(message("[ensemble\n").find("malformed section") != std::string::npos);
    CHECK(message("[run]\nseed\n").find("expected key = value") != std::string::npos);
}

TEST_CASE("validation catches infeasible settings")
{
    RunConfig cfg;
    apply_setting(cfg, "ensemble", "ws", "50");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    apply_setting(cfg, "ensemble", "delta", "0");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    apply_setting(cfg, "ensemble", "es", "0");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    apply_setting(cfg, "run", "replicates", "0");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    apply_setting(cfg, "corpus", "length", "100");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    apply_setting(cfg, "surrogate", "outlier_probability", "1.5");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("later settings override earlier ones")
{
    RunConfig cfg;
    apply_config_text(cfg, "[ensemble]\nws = 200\n[ensemble]\nws = 300\n");
    CHECK(cfg.algorithm.config.ws == 300);
    apply_setting(cfg, "ensemble", "ws", "400");
    CHECK(cfg.algorithm.config.ws == 400);
}

TEST_CASE("config files")
{
    const auto path = std::filesystem::temp_directory_path() / "doer_test_config.ini";
    {
        std::ofstream out(path);
        out << "[run]\nseed = 9\n";
    }
    RunConfig cfg;
    apply_config_file(cfg, path);
    CHECK(cfg.master_seed == 9);
    CHECK_THROWS_AS(apply_config_file(cfg, path.string() + ".missing"), IoError);
}

TEST_CASE("number lists")
{
    CHECK(parse_double_list("0.01, 0.05,0.1") == std::vector<double>{0.01, 0.05, 0.1});
    CHECK(parse_double_list("2") == std::vector<double>{2.0});
    CHECK_THROWS_AS(parse_double_list(""), ConfigError);
    CHECK_THROWS_AS(parse_double_list("1;2"), ConfigError);
}
