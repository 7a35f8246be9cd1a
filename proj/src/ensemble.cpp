#include <doer/ensemble.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <doer/errors.hpp>

namespace doer {

namespace {

constexpr std::uint64_t kCvStream = 0xC0FFEE;
constexpr std::uint64_t kReservoirStream = 0x5E5E;

std::vector<Sample> standardize_all(const std::vector<Sample>& samples, const Standardizer& scaler)
{
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(scaler.apply(s));
    return out;
}

double median(std::vector<double> v)
{
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

void EnsembleConfig::validate() const
{
    if (hidden_candidates.empty()) throw ConfigError("hidden_candidates must not be empty");
    for (Index L : hidden_candidates)
        if (L < 1) throw ConfigError("hidden neuron counts must be >= 1");
    if (ws < static_cast<std::size_t>(max_hidden()))
        throw ConfigError("ws (" + std::to_string(ws) + ") must be >= the largest hidden size (" +
                          std::to_string(max_hidden()) + ")");
    if (max_size < 1) throw ConfigError("ES must be >= 1");
    if (delta.empty()) throw ConfigError("delta must not be empty");
    for (double d : delta)
        if (!(d > 0)) throw ConfigError("delta thresholds must be > 0");
    if (cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
    if (!(ridge >= 0)) throw ConfigError("ridge must be >= 0");
    if (!(output_weight_ratio > 0)) throw ConfigError("output_weight_ratio must be > 0");
}

double EnsembleConfig::delta_for(Index j) const
{
    if (delta.size() == 1) return delta.front();
    if (j < 0 || static_cast<std::size_t>(j) >= delta.size())
        throw ConfigError("delta has " + std::to_string(delta.size()) + " entries; output " + std::to_string(j) +
                          " has no threshold");
    return delta[static_cast<std::size_t>(j)];
}

Index EnsembleConfig::max_hidden() const
{
    return hidden_candidates.empty() ? 0 : *std::max_element(hidden_candidates.begin(), hidden_candidates.end());
}

Eigen::VectorXd weighted_vote(const std::vector<Eigen::VectorXd>& outputs, const std::vector<double>& weights,
                              std::vector<std::string>* diagnostics)
{
    if (outputs.empty()) throw ArgumentError("weighted_vote: no outputs");
    if (outputs.size() != weights.size()) throw ArgumentError("weighted_vote: weight count mismatch");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(outputs.front().size());
    double total = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        acc += weights[i] * outputs[i];
        total += weights[i];
    }
    if (total > 0 && std::isfinite(total)) return acc / total;

    if (diagnostics) diagnostics->push_back("member weights sum to zero; using the unweighted mean");
    acc.setZero();
    for (const auto& o : outputs) acc += o;
    return acc / static_cast<double>(outputs.size());
}

Eigen::VectorXd ensemble_predict(const std::vector<EnsembleMember>& members, const Eigen::VectorXd& x,
                                 std::vector<std::string>* diagnostics)
{
    std::vector<Eigen::VectorXd> outputs;
    std::vector<double> weights;
    outputs.reserve(members.size());
    weights.reserve(members.size());
    for (const auto& m : members) {
        outputs.push_back(predict(m.model, x));
        weights.push_back(m.weight);
    }
    return weighted_vote(outputs, weights, diagnostics);
}

double member_error(const EnsembleMember& member, const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    return (y - predict(member.model, x)).squaredNorm();
}

void update_mse(EnsembleMember& member, double error, std::size_t ws, MseMode mode)
{
    const double previous = member.errors.empty() ? 0.0 : member.errors.back();
    member.errors.push_back(error);
    double leaving = 0;
    if (member.errors.size() > ws) {
        leaving = member.errors.front();
        member.errors.pop_front();
    }
    ++member.life;

    const double life = static_cast<double>(member.life);
    if (member.life == 1) {
        member.mse = error;
    } else if (member.life <= ws) {
        member.mse = (life - 1) / life * member.mse + error / life;
    } else if (mode == MseMode::literal) {
        member.mse += (error - previous) / static_cast<double>(ws);
    } else {
        member.mse += (error - leaving) / static_cast<double>(ws);
        // resynchronize once per window so the recurrence cannot drift
        if (member.life % ws == 0)
            member.mse = std::accumulate(member.errors.begin(), member.errors.end(), 0.0) / static_cast<double>(ws);
    }
}

void update_weights(std::vector<EnsembleMember>& members)
{
    if (members.empty()) throw ArgumentError("update_weights: empty ensemble");
    std::vector<double> mses;
    mses.reserve(members.size());
    for (const auto& m : members) mses.push_back(m.mse);
    const double med = median(std::move(mses));
    for (auto& m : members) m.weight = med > 0 ? std::exp(-(m.mse - med) / med) : 1.0;
}

void normalize_weights(std::vector<EnsembleMember>& members)
{
    if (members.empty()) throw ArgumentError("normalize_weights: empty ensemble");
    double total = 0;
    for (const auto& m : members) total += m.weight;
    const bool usable = total > 0 && std::isfinite(total);
    for (auto& m : members) m.weight = usable ? m.weight / total : 1.0 / static_cast<double>(members.size());
}

std::vector<std::uint64_t> prune(std::vector<EnsembleMember>& members, std::size_t max_size)
{
    std::vector<std::uint64_t> removed;
    while (members.size() > max_size) {
        auto worst = std::max_element(members.begin(), members.end(), [](const auto& a, const auto& b) {
            if (a.mse != b.mse) return a.mse < b.mse;
            return a.id > b.id;
        });
        removed.push_back(worst->id);
        members.erase(worst);
    }
    return removed;
}

Eigen::VectorXd absolute_percentage_error(const Eigen::VectorXd& prediction, const Eigen::VectorXd& actual)
{
    if (prediction.size() != actual.size()) throw ArgumentError("absolute_percentage_error: dimension mismatch");
    return ((prediction - actual).array() / actual.array()).abs().matrix() * 100.0;
}

bool check_spawn_trigger(const Eigen::VectorXd& prediction, const Eigen::VectorXd& actual, const EnsembleConfig& cfg)
{
    const Eigen::VectorXd ape = absolute_percentage_error(prediction, actual);
    for (Index j = 0; j < ape.size(); ++j)
        if (ape(j) / 100.0 > cfg.delta_for(j)) return true;
    return false;
}

std::uint64_t member_seed(std::uint64_t seed, std::uint64_t ordinal)
{
    return derive_seed(seed, 1000 + ordinal);
}

Index choose_hidden_neurons(const std::vector<Sample>& init_z, const EnsembleConfig& cfg)
{
    if (cfg.hidden_candidates.size() == 1) return cfg.hidden_candidates.front();
    Eigen::MatrixXd X, Y;
    stack_samples(init_z, X, Y);
    return select_hidden_nodes(X, Y, cfg.hidden_candidates, cfg.cv_folds, derive_seed(cfg.seed, kCvStream),
                               cfg.activation, cfg.ridge)
        .hidden;
}

ElmState<double> train_initial_model(const std::vector<Sample>& init_z, const EnsembleConfig& cfg, Index hidden)
{
    Eigen::MatrixXd X, Y;
    stack_samples(init_z, X, Y);
    const auto layer = init_hidden_layer<double>(hidden, X.cols(), cfg.activation, member_seed(cfg.seed, 0));
    return batch_train(layer, X, Y, cfg.ridge);
}

Ensemble::Ensemble(const std::vector<Sample>& init, EnsembleConfig cfg)
    : cfg_(std::move(cfg)),
      stm_((cfg_.validate(), cfg_.ws)),
      ltm_(cfg_.ws, derive_seed(cfg_.seed, kReservoirStream))
{
    if (init.size() < cfg_.ws)
        throw ConfigError("initial block has " + std::to_string(init.size()) + " samples; ws = " +
                          std::to_string(cfg_.ws) + " requires at least that many");
    for (const auto& s : init)
        if (!is_finite(s)) throw DataError("initial block contains a non-finite sample at index " +
                                           std::to_string(s.index));

    scaler_ = Standardizer::fit(init);
    const auto init_z = standardize_all(init, scaler_);
    distance_weights_ = DistanceWeights::make(init_z.front().x.size(), init_z.front().y.size(), cfg_.output_weight_ratio);
    try {
        hidden_ = choose_hidden_neurons(init_z, cfg_);
        members_.push_back(EnsembleMember{next_id_++, train_initial_model(init_z, cfg_, hidden_), 1.0, 0, 0.0, {}});
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("initial training failed: ") + e.what());
    } catch (const TrainingError& e) {
        throw ConfigError(std::string("initial training failed: ") + e.what());
    }

    for (const auto& z : init_z) {
        stm_.push(z);
        ltm_.offer(z);
    }
}

Eigen::VectorXd Ensemble::predict(const Eigen::VectorXd& x) const
{
    return scaler_.unscale_y(ensemble_predict(members_, scaler_.scale_x(x)));
}

std::vector<std::uint64_t> Ensemble::retrain_all(const Sample& z)
{
    std::vector<std::uint64_t> failed;
    for (auto& m : members_) {
        ElmState<double> candidate = m.model;
        try {
            sequential_update(candidate, z.x, z.y);
            m.model = std::move(candidate);
        } catch (const DataError&) {
            failed.push_back(m.id);
        } catch (const NumericalError&) {
            failed.push_back(m.id);
        }
    }
    return failed;
}

bool Ensemble::spawn_model(const Sample& z, std::vector<std::string>* diagnostics)
{
    std::vector<Sample> training;
    if (cfg_.memory_mode == MemoryMode::stm_plus_ltm) {
        training = select_training_set(stm_, ltm_, z, distance_weights_, cfg_.ws);
    } else {
        training.assign(stm_.entries().begin(), stm_.entries().end());
    }

    last_training_.clear();
    for (const auto& s : training) last_training_.push_back(s.index);

    if (static_cast<Index>(training.size()) < hidden_) {
        if (diagnostics)
            diagnostics->push_back("spawn skipped: " + std::to_string(training.size()) +
                                   " training points for L = " + std::to_string(hidden_));
        return false;
    }

    Eigen::MatrixXd X, Y;
    stack_samples(training, X, Y);
    const std::uint64_t id = next_id_;
    const auto layer = init_hidden_layer<double>(hidden_, X.cols(), cfg_.activation, member_seed(cfg_.seed, id));
    try {
        members_.push_back(EnsembleMember{id, batch_train(layer, X, Y, cfg_.ridge), 1.0, 0, 0.0, {}});
    } catch (const NumericalError& e) {
        if (diagnostics) diagnostics->push_back(std::string("spawn skipped: ") + e.what());
        return false;
    }
    ++next_id_;
    return true;
}

StepTrace Ensemble::process_sample(const Sample& s)
{
    const Index d = scaler_.x_mean().size(), r = scaler_.y_mean().size();
    if (s.x.size() != d || s.y.size() != r)
        throw ArgumentError("process_sample: sample dimensions do not match the ensemble");
    if (!is_finite(s)) throw DataError("process_sample: non-finite sample at index " + std::to_string(s.index));
    if ((s.y.array() == 0).any()) throw DataError("process_sample: zero target at index " + std::to_string(s.index));

    StepTrace trace;
    trace.index = s.index;
    trace.actual = s.y;
    const Sample z = scaler_.apply(s);

    // evaluation
    std::vector<Eigen::VectorXd> outputs;
    std::vector<double> weights;
    for (const auto& m : members_) {
        outputs.push_back(doer::predict(m.model, z.x));
        weights.push_back(m.weight);
    }
    trace.prediction = scaler_.unscale_y(weighted_vote(outputs, weights, &trace.diagnostics));
    for (std::size_t i = 0; i < members_.size(); ++i)
        update_mse(members_[i], (z.y - outputs[i]).squaredNorm(), cfg_.ws, cfg_.mse_mode);
    update_weights(members_);

    // model-set update
    for (std::uint64_t id : retrain_all(z))
        trace.diagnostics.push_back("retrain failed for member " + std::to_string(id));
    trace.ape = absolute_percentage_error(trace.prediction, s.y);
    if (check_spawn_trigger(trace.prediction, s.y, cfg_)) trace.spawned = spawn_model(z, &trace.diagnostics);
    const auto removed = prune(members_, cfg_.max_size);
    if (!removed.empty()) trace.pruned = removed.back();
    normalize_weights(members_);

    stm_.push(z);
    ltm_.offer(z, trace.spawned);

    trace.members.reserve(members_.size());
    for (const auto& m : members_) trace.members.push_back({m.id, m.weight, m.mse, m.life});
    return trace;
}

} // namespace doer
