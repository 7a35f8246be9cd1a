#include <doer/config.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include <doer/errors.hpp>

namespace doer {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    double out = 0;
    const auto t = trim(v);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": '" + v + "' is not a number");
    return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v)
{
    std::uint64_t out = 0;
    const auto t = trim(v);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty())
        throw ConfigError(key + ": '" + v + "' is not a nonnegative integer");
    return out;
}

} // namespace

std::vector<double> parse_double_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double("list", item));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

void RunConfig::validate() const
{
    algorithm.config.validate();
    try {
        surrogate.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    if (length < 200) throw ConfigError("corpus length must be >= 200");
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

void apply_setting(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value)
{
    auto& e = cfg.algorithm.config;
    const std::string name = section + "." + key;
    try {
        if (section == "ensemble") {
            if (key == "ws") return void(e.ws = to_unsigned(name, value));
            if (key == "delta") return void(e.delta = parse_double_list(value));
            if (key == "es") return void(e.max_size = to_unsigned(name, value));
            if (key == "hidden") {
                e.hidden_candidates.clear();
                for (double v : parse_double_list(value)) e.hidden_candidates.push_back(static_cast<Index>(v));
                return;
            }
            if (key == "folds") return void(e.cv_folds = static_cast<int>(to_unsigned(name, value)));
            if (key == "activation") return void(e.activation = parse_activation(trim(value)));
            if (key == "ridge") return void(e.ridge = to_double(name, value));
            if (key == "output_weight_ratio") return void(e.output_weight_ratio = to_double(name, value));
            if (key == "init_size") return void(cfg.algorithm.init_size = to_unsigned(name, value));
            if (key == "mse_mode") {
                const auto v = trim(value);
                if (v == "sliding") return void(e.mse_mode = MseMode::sliding);
                if (v == "literal") return void(e.mse_mode = MseMode::literal);
                throw ConfigError(name + ": expected sliding or literal");
            }
        } else if (section == "run") {
            if (key == "algorithm") return void(cfg.algorithm.kind = parse_algorithm(trim(value)));
            if (key == "seed") return void(cfg.master_seed = to_unsigned(name, value));
            if (key == "replicates") return void(cfg.replicates = to_unsigned(name, value));
            if (key == "jobs") return void(cfg.jobs = to_unsigned(name, value));
            if (key == "output_dir") return void(cfg.output_dir = trim(value));
        } else if (section == "corpus") {
            if (key == "sudden") return void(cfg.n_sudden = to_unsigned(name, value));
            if (key == "gradual") return void(cfg.n_gradual = to_unsigned(name, value));
            if (key == "length") return void(cfg.length = to_unsigned(name, value));
        } else if (section == "surrogate") {
            if (key == "power_noise") return void(cfg.surrogate.power_noise_std = to_double(name, value));
            if (key == "heat_rate_noise") return void(cfg.surrogate.heat_rate_noise_std = to_double(name, value));
            if (key == "outlier_probability")
                return void(cfg.surrogate.outlier_probability = to_double(name, value));
        }
    } catch (const ArgumentError& err) {
        throw ConfigError(name + ": " + err.what());
    }
    throw ConfigError("unknown setting '" + name + "'");
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin)
{
    std::istringstream in(text);
    std::string line, section;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        const std::string s = trim(line);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        const auto where = origin + ":" + std::to_string(lineno) + ": ";
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "setting outside of a section");
        try {
            apply_setting(cfg, section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str(), path.string());
}

} // namespace doer
