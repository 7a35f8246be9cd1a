#pragma once

// Online ensemble of OS-ELM regressors with short- and long-term memories.
//
// Per sample: weighted-vote prediction, per-member squared error and windowed
// mse, median-relative reweighting, OS-ELM retraining of every member, and a
// new member whenever the ensemble's absolute percentage error on any output
// exceeds its threshold. The worst-mse member is dropped once the ensemble
// outgrows its size limit.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <doer/elm.hpp>
#include <doer/memory.hpp>
#include <doer/standardizer.hpp>
#include <doer/types.hpp>

namespace doer {

enum class MemoryMode
{
    stm_only,       // new members train on the sliding window only
    stm_plus_ltm    // new members train on distance-selected points from both memories
};

enum class MseMode
{
    sliding,    // exact mean of the last ws errors
    literal     // third branch subtracts the previous error instead of the one leaving the window
};

struct EnsembleConfig
{
    std::size_t ws = 1000;
    std::vector<double> delta{0.04};    // fractional APE threshold per output; one value broadcasts
    std::size_t max_size = 10;
    std::vector<Index> hidden_candidates{10, 20, 40, 80};
    int cv_folds = 5;
    Activation activation = Activation::sigmoid;
    double ridge = 1e-6;
    MemoryMode memory_mode = MemoryMode::stm_plus_ltm;
    MseMode mse_mode = MseMode::sliding;
    double output_weight_ratio = 5.0;
    std::uint64_t seed = 1;

    /// Throws ConfigError on any violated constraint.
    void validate() const;
    /// Threshold for output j.
    double delta_for(Index j) const;
    Index max_hidden() const;
};

struct EnsembleMember
{
    std::uint64_t id = 0;           // creation order
    ElmState<double> model;
    double weight = 1.0;
    std::size_t life = 0;
    double mse = 0.0;
    std::deque<double> errors;      // last min(life, ws) squared errors
};

struct MemberSnapshot
{
    std::uint64_t id;
    double weight;
    double mse;
    std::size_t life;
};

struct StepTrace
{
    std::int64_t index = 0;
    Eigen::VectorXd prediction;     // physical units
    Eigen::VectorXd actual;
    Eigen::VectorXd ape;            // percent
    bool spawned = false;
    std::optional<std::uint64_t> pruned;
    std::vector<MemberSnapshot> members;
    std::vector<std::string> diagnostics;
};

/// sum_i w_i o_i / sum_i w_i; falls back to the plain mean when the weights
/// sum to zero (and reports it through `diagnostics` when given).
Eigen::VectorXd weighted_vote(const std::vector<Eigen::VectorXd>& outputs, const std::vector<double>& weights,
                              std::vector<std::string>* diagnostics = nullptr);

Eigen::VectorXd ensemble_predict(const std::vector<EnsembleMember>& members, const Eigen::VectorXd& x,
                                 std::vector<std::string>* diagnostics = nullptr);

/// Sum of squared residuals over outputs.
double member_error(const EnsembleMember& member, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

void update_mse(EnsembleMember& member, double error, std::size_t ws, MseMode mode = MseMode::sliding);

/// w_i = exp(-(mse_i - median) / median); all ones when the median is 0.
void update_weights(std::vector<EnsembleMember>& members);

void normalize_weights(std::vector<EnsembleMember>& members);

/// Drops the largest-mse member (oldest on ties) until at most `max_size` remain.
std::vector<std::uint64_t> prune(std::vector<EnsembleMember>& members, std::size_t max_size);

/// |yhat_j - y_j| / |y_j| * 100 per output.
Eigen::VectorXd absolute_percentage_error(const Eigen::VectorXd& prediction, const Eigen::VectorXd& actual);

bool check_spawn_trigger(const Eigen::VectorXd& prediction, const Eigen::VectorXd& actual,
                         const EnsembleConfig& cfg);

/// Seed of the hidden layer for the member created `ordinal`-th.
std::uint64_t member_seed(std::uint64_t seed, std::uint64_t ordinal);

/// Hidden-layer size for standardized initial data: CV over the candidates,
/// or the single candidate when only one is configured.
Index choose_hidden_neurons(const std::vector<Sample>& init_z, const EnsembleConfig& cfg);

/// Batch-trained first model on standardized initial data.
ElmState<double> train_initial_model(const std::vector<Sample>& init_z, const EnsembleConfig& cfg, Index hidden);

class Ensemble
{
public:
    /// Fits the standardizer and the first member on `init` (physical units)
    /// and seeds both memories from it.
    Ensemble(const std::vector<Sample>& init, EnsembleConfig cfg);

    /// Runs one full predict / score / update / spawn / prune cycle.
    /// Non-finite samples and zero targets throw DataError without touching state.
    StepTrace process_sample(const Sample& s);

    /// Prediction in physical units.
    Eigen::VectorXd predict(const Eigen::VectorXd& x) const;

    /// OS-ELM step on every member with a standardized sample. Members whose
    /// update throws are left untouched; their ids are returned.
    std::vector<std::uint64_t> retrain_all(const Sample& z);

    /// Trains and appends a member around the standardized sample `z`.
    /// Returns false (with a diagnostic) if the training set is smaller than L.
    bool spawn_model(const Sample& z, std::vector<std::string>* diagnostics = nullptr);

    const std::vector<EnsembleMember>& members() const { return members_; }
    std::vector<EnsembleMember>& members() { return members_; }
    const SlidingWindow& short_term() const { return stm_; }
    const Reservoir& long_term() const { return ltm_; }
    const Standardizer& standardizer() const { return scaler_; }
    const EnsembleConfig& config() const { return cfg_; }
    Index hidden_neurons() const { return hidden_; }
    std::size_t size() const { return members_.size(); }
    /// Stream indices used to train the most recent spawn.
    const std::vector<std::int64_t>& last_training_indices() const { return last_training_; }

private:
    EnsembleConfig cfg_;
    Standardizer scaler_;
    Index hidden_ = 0;
    std::vector<EnsembleMember> members_;
    SlidingWindow stm_;
    Reservoir ltm_;
    DistanceWeights distance_weights_;
    std::uint64_t next_id_ = 0;
    std::vector<std::int64_t> last_training_;
};

} // namespace doer
