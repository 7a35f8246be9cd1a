// doer: generate drifting surrogate corpora, run and compare the streaming
// regressors, and sweep ensemble parameters.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
// 4 data error, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <doer/config.hpp>
#include <doer/csv_io.hpp>
#include <doer/errors.hpp>
#include <doer/harness.hpp>

namespace fs = std::filesystem;
using namespace doer;

namespace {

enum Exit
{
    ok = 0,
    other_error = 1,
    config_error = 2,
    io_error = 3,
    data_error = 4
};

// Flag values; applied over the config file only when given.
struct Overrides
{
    std::string config_file;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    std::size_t ws = 0;
    std::string delta;
    std::size_t es = 0;
    std::string hidden;
    std::size_t replicates = 0;
    std::string algorithm;
    std::string out;
    std::size_t sudden = 0, gradual = 0, length = 0;

    CLI::App* app = nullptr;
    std::vector<CLI::Option*> given;

    bool has(const char* name) const
    {
        for (auto* o : given)
            if (o->check_lname(name) && o->count() > 0) return true;
        return false;
    }
};

void add_ensemble_flags(CLI::App* cmd, Overrides& o)
{
    o.given.push_back(cmd->add_option("--ws", o.ws, "Window size for both memories"));
    o.given.push_back(cmd->add_option("--delta", o.delta, "Spawn threshold(s), fractional, comma separated"));
    o.given.push_back(cmd->add_option("--es", o.es, "Maximum ensemble size"));
    o.given.push_back(cmd->add_option("--hidden", o.hidden, "Hidden-layer size candidates, comma separated"));
    o.given.push_back(cmd->add_option("--seed", o.seed, "Master seed"));
}

RunConfig resolve(const Overrides& o)
{
    RunConfig cfg;
    if (!o.config_file.empty()) apply_config_file(cfg, o.config_file);
    auto set = [&](const char* section, const char* key, const std::string& value) {
        apply_setting(cfg, section, key, value);
    };
    if (o.has("jobs")) cfg.jobs = o.jobs;
    if (o.has("seed")) cfg.master_seed = o.seed;
    if (o.has("ws")) cfg.algorithm.config.ws = o.ws;
    if (o.has("delta")) set("ensemble", "delta", o.delta);
    if (o.has("es")) cfg.algorithm.config.max_size = o.es;
    if (o.has("hidden")) set("ensemble", "hidden", o.hidden);
    if (o.has("replicates")) cfg.replicates = o.replicates;
    if (o.has("algorithm")) set("run", "algorithm", o.algorithm);
    if (o.has("out")) cfg.output_dir = o.out;
    if (o.has("sudden")) cfg.n_sudden = o.sudden;
    if (o.has("gradual")) cfg.n_gradual = o.gradual;
    if (o.has("length")) cfg.length = o.length;
    cfg.algorithm.config.seed = cfg.master_seed;
    cfg.validate();
    return cfg;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::string fixed(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

int cmd_generate(const RunConfig& cfg)
{
    ensure_dir(cfg.output_dir);
    const auto manifest =
        generate_corpus(cfg.n_sudden, cfg.n_gradual, cfg.length, cfg.master_seed, cfg.surrogate, cfg.output_dir);
    std::cout << "corpus        " << cfg.output_dir.string() << '\n'
              << "series        " << manifest.size() << " (" << cfg.n_sudden << " sudden, " << cfg.n_gradual
              << " gradual)\n"
              << "length        " << cfg.length << '\n'
              << "master seed   " << cfg.master_seed << '\n';
    if (!manifest.empty())
        std::cout << "series seeds  " << manifest.front().seed << " .. " << manifest.back().seed << '\n';
    return ok;
}

int cmd_run(const RunConfig& cfg, const fs::path& input, bool untimed)
{
    const LoadedStream stream = read_series_csv(input, untimed);
    ensure_dir(cfg.output_dir);
    const EvalReport report = prequential_run(cfg.algorithm, stream.samples, nullptr, stream.output_names);

    const fs::path steps = cfg.output_dir / (input.stem().string() + "_" + to_string(report.algorithm) + "_steps.csv");
    write_steps_csv(steps, report, cfg.master_seed);

    std::size_t max_size = 0;
    double size_sum = 0;
    for (const auto& s : report.steps) {
        max_size = std::max(max_size, s.ensemble_size);
        size_sum += static_cast<double>(s.ensemble_size);
    }
    const double mean_size = report.steps.empty() ? 0.0 : size_sum / static_cast<double>(report.steps.size());

    std::cout << "algorithm       " << to_string(report.algorithm) << '\n'
              << "input           " << input.string() << '\n'
              << "rows dropped    " << stream.dropped_missing << " missing, " << report.skipped << " unscorable\n"
              << "initial block   " << report.init_size << '\n'
              << "hidden neurons  " << report.hidden << '\n'
              << "scored          " << report.steps.size() << '\n';
    for (std::size_t j = 0; j < report.output_names.size(); ++j)
        std::cout << "mape " << report.output_names[j]
                  << std::string(report.output_names[j].size() < 11 ? 11 - report.output_names[j].size() : 1, ' ')
                  << fixed(report.mape(static_cast<Index>(j))) << '\n';
    std::cout << "mape mean       " << fixed(report.mean_mape()) << '\n'
              << "spawns          " << report.spawns << '\n'
              << "ensemble size   mean " << fixed(mean_size, 2) << ", max " << max_size << '\n'
              << "steps           " << steps.string() << '\n';
    std::cout << "summary,algorithm=" << to_string(report.algorithm) << ",scored=" << report.steps.size();
    for (std::size_t j = 0; j < report.output_names.size(); ++j)
        std::cout << ",mape_" << report.output_names[j] << '=' << format_decimal(report.mape(static_cast<Index>(j)));
    std::cout << ",spawns=" << report.spawns << ",max_size=" << max_size << '\n';
    return ok;
}

CorpusLoad load_or_throw(const fs::path& corpus)
{
    CorpusLoad load = load_corpus(corpus);
    for (const auto& f : load.failures) std::cerr << "warning: " << f << '\n';
    if (load.series.empty()) throw DataError("no readable series in " + corpus.string());
    return load;
}

int cmd_compare(const RunConfig& cfg, const fs::path& corpus, const std::vector<std::string>& names)
{
    const CorpusLoad load = load_or_throw(corpus);
    std::vector<AlgorithmSpec> algs;
    for (const auto& n : names) {
        AlgorithmSpec spec = cfg.algorithm;
        spec.kind = parse_algorithm(n);
        algs.push_back(spec);
    }
    const CorpusResult res = run_corpus(algs, load.series, cfg.replicates, cfg.master_seed, cfg.jobs);
    for (const auto& f : res.failures) std::cerr << "warning: " << f << '\n';

    ensure_dir(cfg.output_dir);
    write_aggregate_csv(cfg.output_dir / "aggregate.csv", res, cfg.master_seed);
    write_per_series_csv(cfg.output_dir / "per_series.csv", res, cfg.master_seed);

    std::printf("%-8s %-14s %6s %21s %21s\n", "kind", "algorithm", "series", "window MAPE", "stream MAPE");
    for (const auto& row : res.aggregate)
        std::printf("%-8s %-14s %6zu %10.4f +- %7.4f %10.4f +- %7.4f\n", to_string(row.kind).c_str(),
                    to_string(row.algorithm).c_str(), row.series, row.mean_window_mape, row.std_window_mape,
                    row.mean_stream_mape, row.std_stream_mape);
    std::cout << "aggregate " << (cfg.output_dir / "aggregate.csv").string() << '\n';
    return res.failures.empty() && load.failures.empty() ? ok : data_error;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& corpus, const std::string& param, const std::string& values)
{
    const SweepParam p = parse_sweep_param(param);
    const std::vector<double> vals = parse_double_list(values);
    const CorpusLoad load = load_or_throw(corpus);
    const auto rows = parameter_sweep(p, vals, cfg.algorithm, load.series, cfg.replicates, cfg.master_seed, cfg.jobs);

    ensure_dir(cfg.output_dir);
    const fs::path out = cfg.output_dir / ("sweep_" + param + ".csv");
    write_sweep_csv(out, rows, cfg.master_seed);

    std::printf("%-6s %-10s %-6s %10s %10s %12s\n", "param", "value", "valid", "mean MAPE", "std", "window MAPE");
    for (const auto& row : rows)
        std::printf("%-6s %-10s %-6s %10.4f %10.4f %12.4f %s\n", to_string(row.param).c_str(),
                    format_decimal(row.value).c_str(), row.valid ? "yes" : "no", row.mean_mape, row.std_mape,
                    row.mean_window_mape, row.note.c_str());
    std::cout << "sweep " << out.string() << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Online ensemble regression on drifting streams"};
    app.require_subcommand(1);
    Overrides o;
    app.add_option("--config", o.config_file, "Sectioned key = value configuration file")->check(CLI::ExistingFile);
    o.given.push_back(app.add_option("--jobs", o.jobs, "Worker threads for corpus cells")->check(CLI::PositiveNumber));

    auto* gen = app.add_subcommand("generate", "Write a synthetic drifting corpus and its manifest");
    o.given.push_back(gen->add_option("--out", o.out, "Corpus directory"));
    o.given.push_back(gen->add_option("--sudden", o.sudden, "Number of sudden-drift series"));
    o.given.push_back(gen->add_option("--gradual", o.gradual, "Number of gradual-drift series"));
    o.given.push_back(gen->add_option("--length", o.length, "Samples per series"));
    o.given.push_back(gen->add_option("--seed", o.seed, "Master seed"));

    std::string input;
    bool untimed = false;
    auto* run = app.add_subcommand("run", "Prequential run of one algorithm on one series file");
    run->add_option("input", input, "Series CSV")->required();
    o.given.push_back(run->add_option("--algorithm", o.algorithm, "static-elm, os-elm, doer-original, doer-modified"));
    o.given.push_back(run->add_option("--out", o.out, "Output directory"));
    run->add_flag("--no-efficiency", untimed, "Accept 11-column files without the t column");
    add_ensemble_flags(run, o);

    std::string corpus;
    std::vector<std::string> algorithms;
    for (auto k : all_algorithms()) algorithms.push_back(to_string(k));
    auto* cmp = app.add_subcommand("compare", "Run algorithms over a corpus and aggregate per drift kind");
    cmp->add_option("corpus", corpus, "Corpus directory with manifest.csv")->required();
    cmp->add_option("--algorithms", algorithms, "Algorithms to compare")->delimiter(',');
    o.given.push_back(cmp->add_option("--replicates", o.replicates, "Runs per series"));
    o.given.push_back(cmp->add_option("--out", o.out, "Output directory"));
    add_ensemble_flags(cmp, o);

    std::string param, values;
    auto* sweep = app.add_subcommand("sweep", "Sweep ws, delta or es over a corpus");
    sweep->add_option("corpus", corpus, "Corpus directory with manifest.csv")->required();
    sweep->add_option("--param", param, "ws, delta or es")->required();
    sweep->add_option("--values", values, "Comma separated values")->required();
    o.given.push_back(sweep->add_option("--algorithm", o.algorithm, "Algorithm to sweep"));
    o.given.push_back(sweep->add_option("--replicates", o.replicates, "Runs per series"));
    o.given.push_back(sweep->add_option("--out", o.out, "Output directory"));
    add_ensemble_flags(sweep, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        const RunConfig cfg = resolve(o);
        if (gen->parsed()) return cmd_generate(cfg);
        if (run->parsed()) return cmd_run(cfg, input, untimed);
        if (cmp->parsed()) return cmd_compare(cfg, corpus, algorithms);
        if (sweep->parsed()) return cmd_sweep(cfg, corpus, param, values);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return config_error;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io_error;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return other_error;
    }
    return other_error;
}
