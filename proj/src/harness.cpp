#include <doer/harness.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <thread>

#include <doer/csv_io.hpp>
#include <doer/errors.hpp>

namespace doer {

std::string to_string(AlgorithmKind kind)
{
    switch (kind) {
        case AlgorithmKind::static_elm: return "static-elm";
        case AlgorithmKind::os_elm: return "os-elm";
        case AlgorithmKind::doer_original: return "doer-original";
        case AlgorithmKind::doer_modified: return "doer-modified";
    }
    return "unknown";
}

AlgorithmKind parse_algorithm(const std::string& name)
{
    for (auto k : all_algorithms())
        if (to_string(k) == name) return k;
    throw ArgumentError("unknown algorithm '" + name + "' (static-elm, os-elm, doer-original, doer-modified)");
}

std::vector<AlgorithmKind> all_algorithms()
{
    return {AlgorithmKind::static_elm, AlgorithmKind::os_elm, AlgorithmKind::doer_original,
            AlgorithmKind::doer_modified};
}

std::size_t AlgorithmSpec::resolved_init_size() const
{
    return init_size ? init_size : config.ws + static_cast<std::size_t>(config.max_hidden());
}

double EvalReport::mean_mape() const
{
    return mape.size() ? mape.mean() : std::numeric_limits<double>::quiet_NaN();
}

bool is_scorable(const Sample& s)
{
    return is_finite(s) && s.y.size() > 0 && (s.y.array() != 0).all();
}

namespace {

class Regressor
{
public:
    virtual ~Regressor() = default;
    virtual Eigen::VectorXd predict(const Eigen::VectorXd& x) const = 0;
    virtual void learn(const Sample& s, StepRecord& rec, std::vector<std::string>& diagnostics) = 0;
    virtual Index hidden() const = 0;
};

class SingleElm final : public Regressor
{
public:
    SingleElm(const std::vector<Sample>& init, const EnsembleConfig& cfg, bool sequential)
        : scaler_(Standardizer::fit(init)), sequential_(sequential), state_(fit(init, cfg))
    {
    }

    Eigen::VectorXd predict(const Eigen::VectorXd& x) const override
    {
        return scaler_.unscale_y(doer::predict(state_, scaler_.scale_x(x)));
    }

    void learn(const Sample& s, StepRecord&, std::vector<std::string>& diagnostics) override
    {
        if (!sequential_) return;
        const Sample z = scaler_.apply(s);
        ElmState<double> candidate = state_;
        try {
            sequential_update(candidate, z.x, z.y);
            state_ = std::move(candidate);
        } catch (const std::runtime_error& e) {
            diagnostics.push_back("update skipped at " + std::to_string(s.index) + ": " + e.what());
        }
    }

    Index hidden() const override { return state_.hidden.neurons(); }

private:
    ElmState<double> fit(const std::vector<Sample>& init, const EnsembleConfig& cfg) const
    {
        std::vector<Sample> z;
        z.reserve(init.size());
        for (const auto& s : init) z.push_back(scaler_.apply(s));
        return train_initial_model(z, cfg, choose_hidden_neurons(z, cfg));
    }

    Standardizer scaler_;
    bool sequential_;
    ElmState<double> state_;
};

class EnsembleRegressor final : public Regressor
{
public:
    EnsembleRegressor(const std::vector<Sample>& init, EnsembleConfig cfg) : ensemble_(init, std::move(cfg)) {}

    Eigen::VectorXd predict(const Eigen::VectorXd& x) const override { return ensemble_.predict(x); }

    void learn(const Sample& s, StepRecord& rec, std::vector<std::string>& diagnostics) override
    {
        StepTrace trace = ensemble_.process_sample(s);
        rec.spawned = trace.spawned;
        rec.ensemble_size = ensemble_.size();
        for (auto& d : trace.diagnostics) diagnostics.push_back("t=" + std::to_string(s.index) + ": " + d);
    }

    Index hidden() const override { return ensemble_.hidden_neurons(); }

private:
    Ensemble ensemble_;
};

std::unique_ptr<Regressor> make_regressor(const AlgorithmSpec& spec, const std::vector<Sample>& init)
{
    EnsembleConfig cfg = spec.config;
    switch (spec.kind) {
        case AlgorithmKind::static_elm: return std::make_unique<SingleElm>(init, cfg, false);
        case AlgorithmKind::os_elm: return std::make_unique<SingleElm>(init, cfg, true);
        case AlgorithmKind::doer_original: cfg.memory_mode = MemoryMode::stm_only; break;
        case AlgorithmKind::doer_modified: cfg.memory_mode = MemoryMode::stm_plus_ltm; break;
    }
    return std::make_unique<EnsembleRegressor>(init, std::move(cfg));
}

} // namespace

EvalReport prequential_run(const AlgorithmSpec& spec, const std::vector<Sample>& stream, PrequentialProbe* probe,
                           std::vector<std::string> output_names)
{
    const auto started = std::chrono::steady_clock::now();
    spec.config.validate();
    const std::size_t init_size = spec.resolved_init_size();

    EvalReport report;
    report.algorithm = spec.kind;
    report.output_names = std::move(output_names);
    report.init_size = init_size;

    std::vector<Sample> init;
    std::size_t pos = 0;
    for (; pos < stream.size() && init.size() < init_size; ++pos) {
        if (is_scorable(stream[pos]))
            init.push_back(stream[pos]);
        else
            ++report.skipped;
    }
    if (init.size() < init_size)
        throw ArgumentError("stream has " + std::to_string(init.size()) + " usable rows; the initial block needs " +
                            std::to_string(init_size));

    auto model = make_regressor(spec, init);
    report.hidden = model->hidden();
    const Index r = init.front().y.size();
    if (report.output_names.size() != static_cast<std::size_t>(r)) {
        report.output_names.clear();
        for (Index j = 0; j < r; ++j) report.output_names.push_back("y" + std::to_string(j + 1));
    }

    report.steps.reserve(stream.size() - pos);
    for (; pos < stream.size(); ++pos) {
        const Sample& s = stream[pos];
        if (!is_scorable(s)) {
            ++report.skipped;
            continue;
        }
        StepRecord rec;
        rec.index = s.index;
        if (probe) probe->on_predict(s.index);
        rec.prediction = model->predict(s.x);
        rec.actual = s.y;
        rec.ape = absolute_percentage_error(rec.prediction, s.y);
        if (probe) probe->on_learn(s.index);
        model->learn(s, rec, report.diagnostics);
        if (rec.spawned) ++report.spawns;
        report.steps.push_back(std::move(rec));
    }

    report.mape = Eigen::VectorXd::Zero(r);
    for (const auto& st : report.steps) report.mape += st.ape;
    if (!report.steps.empty())
        report.mape /= static_cast<double>(report.steps.size());
    else
        report.mape.setConstant(std::numeric_limits<double>::quiet_NaN());

    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

Eigen::VectorXd mape_over(const EvalReport& report, const std::vector<std::pair<std::int64_t, std::int64_t>>& ranges)
{
    const Index r = static_cast<Index>(report.output_names.size());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(r);
    std::size_t n = 0;
    for (const auto& st : report.steps) {
        const bool inside = std::any_of(ranges.begin(), ranges.end(), [&](const auto& rg) {
            return st.index >= rg.first && st.index <= rg.second;
        });
        if (!inside) continue;
        acc += st.ape;
        ++n;
    }
    if (n == 0) return Eigen::VectorXd::Constant(r, std::numeric_limits<double>::quiet_NaN());
    return acc / static_cast<double>(n);
}

Eigen::VectorXd change_window_mape(const EvalReport& report, const std::vector<ChangePoint>& change_points,
                                   std::int64_t lead, std::vector<std::string>* diagnostics)
{
    if (report.steps.empty())
        return Eigen::VectorXd::Constant(static_cast<Index>(report.output_names.size()),
                                         std::numeric_limits<double>::quiet_NaN());
    const std::int64_t first = report.steps.front().index, last = report.steps.back().index;
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (const auto& cp : change_points) {
        std::int64_t lo = cp.index - lead, hi = cp.index + cp.range;
        if (lo < first || hi > last) {
            if (diagnostics)
                diagnostics->push_back("change window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                       "] clipped to scored range [" + std::to_string(first) + ", " +
                                       std::to_string(last) + "]");
            lo = std::max(lo, first);
            hi = std::min(hi, last);
        }
        if (lo <= hi) ranges.emplace_back(lo, hi);
    }
    return mape_over(report, ranges);
}

std::optional<std::int64_t> Recovery::worst() const
{
    std::optional<std::int64_t> out;
    for (const auto& s : samples) {
        if (!s) return std::nullopt;
        out = out ? std::max(*out, *s) : *s;
    }
    return out;
}

Recovery recovery_time(const EvalReport& report, std::int64_t change_point, double threshold_pct,
                       std::optional<std::int64_t> horizon)
{
    if (report.steps.empty() || change_point < report.steps.front().index || change_point > report.steps.back().index)
        throw ArgumentError("recovery_time: change point " + std::to_string(change_point) +
                            " is outside the scored range");
    const Index r = static_cast<Index>(report.output_names.size());
    Recovery rec;
    rec.samples.assign(static_cast<std::size_t>(r), std::nullopt);
    rec.max_ape = Eigen::VectorXd::Zero(r);

    auto it = std::lower_bound(report.steps.begin(), report.steps.end(), change_point,
                               [](const StepRecord& s, std::int64_t v) { return s.index < v; });
    for (; it != report.steps.end(); ++it) {
        const std::int64_t count = it->index - change_point + 1;
        if (horizon && count > *horizon) break;
        bool pending = false;
        for (Index j = 0; j < r; ++j) {
            auto& slot = rec.samples[static_cast<std::size_t>(j)];
            if (slot) continue;
            rec.max_ape(j) = std::max(rec.max_ape(j), it->ape(j));
            if (it->ape(j) < threshold_pct)
                slot = count;
            else
                pending = true;
        }
        if (!pending) break;
    }
    return rec;
}

void write_steps_csv(const std::filesystem::path& path, const EvalReport& report, std::uint64_t master_seed)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "# master_seed=" << master_seed << " algorithm=" << to_string(report.algorithm)
        << " hidden=" << report.hidden << " init_size=" << report.init_size << '\n';
    out << 't';
    for (const auto& prefix : {"pred_", "actual_", "ape_"})
        for (const auto& name : report.output_names) out << ',' << prefix << name;
    out << ",ensemble_size,spawned\n";
    for (const auto& st : report.steps) {
        out << st.index;
        for (const auto* v : {&st.prediction, &st.actual, &st.ape})
            for (Index j = 0; j < v->size(); ++j) out << ',' << format_decimal((*v)(j));
        out << ',' << st.ensemble_size << ',' << (st.spawned ? 1 : 0) << '\n';
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

CorpusLoad load_corpus(const std::filesystem::path& dir)
{
    CorpusLoad load;
    for (auto& row : read_manifest_csv(dir / "manifest.csv")) {
        const auto path = dir / series_file_name(row.series_id);
        try {
            auto stream = read_series_csv(path);
            load.series.push_back({std::move(row), std::move(stream.samples)});
        } catch (const std::exception& e) {
            load.failures.push_back("series " + std::to_string(row.series_id) + ": " + e.what());
        }
    }
    return load;
}

std::pair<double, double> mean_std(const std::vector<double>& values)
{
    if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1))};
}

namespace {

struct CellOutcome
{
    double window_mape = std::numeric_limits<double>::quiet_NaN();
    double stream_mape = std::numeric_limits<double>::quiet_NaN();
    std::string failure;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn)
{
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

CellOutcome run_cell(const AlgorithmSpec& spec, const CorpusSeries& series)
{
    CellOutcome out;
    try {
        const EvalReport report = prequential_run(spec, series.samples);
        out.window_mape = change_window_mape(report, series.meta.change_points).mean();
        out.stream_mape = report.mean_mape();
    } catch (const std::exception& e) {
        out.failure = e.what();
    }
    return out;
}

} // namespace

CorpusResult run_corpus(const std::vector<AlgorithmSpec>& algorithms, const std::vector<CorpusSeries>& corpus,
                        std::size_t replicates, std::uint64_t master_seed, std::size_t jobs)
{
    if (replicates == 0) throw ArgumentError("run_corpus: replicates must be >= 1");
    const std::size_t na = algorithms.size(), cells = corpus.size() * na * replicates;
    std::vector<CellOutcome> outcomes(cells);
    parallel_for(cells, jobs, [&](std::size_t c) {
        const std::size_t s = c / (na * replicates), a = (c / replicates) % na, rep = c % replicates;
        AlgorithmSpec spec = algorithms[a];
        spec.config.seed = master_seed + rep;
        outcomes[c] = run_cell(spec, corpus[s]);
    });

    CorpusResult result;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
        for (std::size_t a = 0; a < na; ++a) {
            SeriesResult sr;
            sr.series_id = corpus[s].meta.series_id;
            sr.kind = corpus[s].meta.kind;
            sr.algorithm = algorithms[a].kind;
            bool ok = true;
            for (std::size_t rep = 0; rep < replicates; ++rep) {
                const auto& o = outcomes[(s * na + a) * replicates + rep];
                if (!o.failure.empty()) {
                    result.failures.push_back("series " + std::to_string(sr.series_id) + " " +
                                              to_string(sr.algorithm) + " replicate " + std::to_string(rep) +
                                              ": " + o.failure);
                    ok = false;
                    continue;
                }
                sr.window_mape.push_back(o.window_mape);
                sr.stream_mape.push_back(o.stream_mape);
            }
            if (!ok && sr.window_mape.empty()) continue;
            sr.mean_window_mape = mean_std(sr.window_mape).first;
            sr.mean_stream_mape = mean_std(sr.stream_mape).first;
            result.per_series.push_back(std::move(sr));
        }
    }

    std::set<std::pair<std::string, std::string>> groups;
    for (const auto& sr : result.per_series) groups.insert({to_string(sr.kind), to_string(sr.algorithm)});
    for (const auto& [kind, alg] : groups) {
        std::vector<double> w, st;
        for (const auto& sr : result.per_series)
            if (to_string(sr.kind) == kind && to_string(sr.algorithm) == alg) {
                w.push_back(sr.mean_window_mape);
                st.push_back(sr.mean_stream_mape);
            }
        AggregateRow row;
        row.kind = parse_drift_kind(kind);
        row.algorithm = parse_algorithm(alg);
        row.series = w.size();
        std::tie(row.mean_window_mape, row.std_window_mape) = mean_std(w);
        std::tie(row.mean_stream_mape, row.std_stream_mape) = mean_std(st);
        result.aggregate.push_back(row);
    }
    return result;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path, std::uint64_t master_seed)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "# master_seed=" << master_seed << '\n';
    return out;
}

void close_csv(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace

void write_per_series_csv(const std::filesystem::path& path, const CorpusResult& result, std::uint64_t master_seed)
{
    auto out = open_csv(path, master_seed);
    out << "series_id,kind,algorithm,replicates,window_mape,stream_mape\n";
    for (const auto& sr : result.per_series)
        out << sr.series_id << ',' << to_string(sr.kind) << ',' << to_string(sr.algorithm) << ','
            << sr.window_mape.size() << ',' << format_decimal(sr.mean_window_mape) << ','
            << format_decimal(sr.mean_stream_mape) << '\n';
    close_csv(out, path);
}

void write_aggregate_csv(const std::filesystem::path& path, const CorpusResult& result, std::uint64_t master_seed)
{
    auto out = open_csv(path, master_seed);
    out << "kind,algorithm,series,mean_window_mape,std_window_mape,mean_stream_mape,std_stream_mape\n";
    for (const auto& row : result.aggregate)
        out << to_string(row.kind) << ',' << to_string(row.algorithm) << ',' << row.series << ','
            << format_decimal(row.mean_window_mape) << ',' << format_decimal(row.std_window_mape) << ','
            << format_decimal(row.mean_stream_mape) << ',' << format_decimal(row.std_stream_mape) << '\n';
    close_csv(out, path);
}

std::string to_string(SweepParam p)
{
    switch (p) {
        case SweepParam::ws: return "ws";
        case SweepParam::delta: return "delta";
        case SweepParam::es: return "es";
    }
    return "unknown";
}

SweepParam parse_sweep_param(const std::string& name)
{
    if (name == "ws") return SweepParam::ws;
    if (name == "delta") return SweepParam::delta;
    if (name == "es") return SweepParam::es;
    throw ArgumentError("unknown sweep parameter '" + name + "' (ws, delta, es)");
}

std::vector<SweepRow> parameter_sweep(SweepParam param, const std::vector<double>& values, const AlgorithmSpec& base,
                                      const std::vector<CorpusSeries>& streams, std::size_t replicates,
                                      std::uint64_t master_seed, std::size_t jobs)
{
    if (values.empty()) throw ArgumentError("parameter_sweep: no values");
    if (replicates == 0) throw ArgumentError("parameter_sweep: replicates must be >= 1");

    std::vector<SweepRow> rows;
    for (double v : values) {
        SweepRow row;
        row.param = param;
        row.value = v;
        AlgorithmSpec spec = base;
        switch (param) {
            case SweepParam::ws: spec.config.ws = static_cast<std::size_t>(v); break;
            case SweepParam::delta: spec.config.delta = {v}; break;
            case SweepParam::es: spec.config.max_size = static_cast<std::size_t>(v); break;
        }
        if (param != SweepParam::delta && (v < 0 || v != std::floor(v))) {
            row.valid = false;
            row.note = "value must be a nonnegative integer";
        } else {
            try {
                spec.config.validate();
            } catch (const ConfigError& e) {
                row.valid = false;
                row.note = e.what();
            }
        }
        if (!row.valid) {
            row.mean_mape = row.std_mape = row.mean_window_mape = std::numeric_limits<double>::quiet_NaN();
            rows.push_back(std::move(row));
            continue;
        }

        const CorpusResult res = run_corpus({spec}, streams, replicates, master_seed, jobs);
        std::vector<double> stream_mape, window_mape;
        for (const auto& sr : res.per_series) {
            stream_mape.push_back(sr.mean_stream_mape);
            window_mape.push_back(sr.mean_window_mape);
        }
        row.runs = stream_mape.size() * replicates;
        if (stream_mape.empty()) {
            row.valid = false;
            row.note = res.failures.empty() ? "no runs" : res.failures.front();
            row.mean_mape = row.std_mape = row.mean_window_mape = std::numeric_limits<double>::quiet_NaN();
        } else {
            std::tie(row.mean_mape, row.std_mape) = mean_std(stream_mape);
            row.mean_window_mape = mean_std(window_mape).first;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows, std::uint64_t master_seed)
{
    auto out = open_csv(path, master_seed);
    out << "param,value,valid,runs,mean_mape,std_mape,mean_window_mape,note\n";
    for (const auto& row : rows) {
        std::string note = row.note;
        std::replace(note.begin(), note.end(), ',', ';');
        out << to_string(row.param) << ',' << format_decimal(row.value) << ',' << (row.valid ? 1 : 0) << ','
            << row.runs << ',' << format_decimal(row.mean_mape) << ',' << format_decimal(row.std_mape) << ','
            << format_decimal(row.mean_window_mape) << ',' << note << '\n';
    }
    close_csv(out, path);
}

} // namespace doer
