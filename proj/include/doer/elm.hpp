#pragma once

// Extreme learning machine primitives.
//
// A model is f(x) = H(x) beta where H(x) = [G(w_1.x + b_1), ..., G(w_L.x + b_L)]
// is a fixed random feature map. Only beta is learned: once by a batch
// least-squares solve, then one sample at a time by the recursive
// least-squares (OS-ELM) update
//
//   R    <- R - (R h)(R h)^T / (1 + h^T R h)
//   beta <- beta + R h (y^T - h^T beta)
//
// where R tracks (H^T H + ridge I)^{-1}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <doer/errors.hpp>
#include <doer/types.hpp>

namespace doer {

enum class Activation
{
    sigmoid,
    sine,
    tanh
};

inline std::string_view to_string(Activation a)
{
    switch (a) {
        case Activation::sigmoid: return "sigmoid";
        case Activation::sine: return "sine";
        case Activation::tanh: return "tanh";
    }
    return "unknown";
}

inline Activation parse_activation(std::string_view name)
{
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "sine") return Activation::sine;
    if (name == "tanh") return Activation::tanh;
    throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

template <class Scalar_ = double>
class HiddenLayer
{
public:
    using scalar_t = Scalar_;
    using vec_t = vec_type<scalar_t>;
    using mat_t = mat_type<scalar_t>;

    HiddenLayer(mat_t weights, vec_t biases, Activation activation)
        : weights_(std::move(weights)), biases_(std::move(biases)), activation_(activation)
    {
        if (weights_.rows() < 1 || weights_.cols() < 1)
            throw ArgumentError("hidden layer needs at least one neuron and one input");
        if (biases_.size() != weights_.rows())
            throw ArgumentError("hidden layer bias count must equal neuron count");
    }

    Index neurons() const { return weights_.rows(); }
    Index inputs() const { return weights_.cols(); }
    /// Row i holds w_i.
    const mat_t& weights() const { return weights_; }
    const vec_t& biases() const { return biases_; }
    Activation activation() const { return activation_; }

    template <class Derived>
    vec_t map(const Eigen::MatrixBase<Derived>& x) const
    {
        if (x.size() != inputs())
            throw ArgumentError("hidden_map: input has dimension " + std::to_string(x.size()) +
                                ", layer expects " + std::to_string(inputs()));
        vec_t z = weights_ * x + biases_;
        apply(z);
        return z;
    }

    /// Maps every row of X (N x d); returns N x L.
    template <class Derived>
    mat_t map_rows(const Eigen::MatrixBase<Derived>& X) const
    {
        if (X.cols() != inputs())
            throw ArgumentError("hidden_map: input has dimension " + std::to_string(X.cols()) +
                                ", layer expects " + std::to_string(inputs()));
        mat_t Z = (X * weights_.transpose()).rowwise() + biases_.transpose();
        apply(Z);
        return Z;
    }

    bool operator==(const HiddenLayer& other) const
    {
        return activation_ == other.activation_ && weights_ == other.weights_ && biases_ == other.biases_;
    }

private:
    template <class Derived>
    void apply(Eigen::MatrixBase<Derived>& z) const
    {
        auto a = z.array();
        switch (activation_) {
            case Activation::sigmoid: a = scalar_t(1) / (scalar_t(1) + (-a).exp()); break;
            case Activation::sine: a = a.sin(); break;
            case Activation::tanh: a = a.tanh(); break;
        }
    }

    mat_t weights_;
    vec_t biases_;
    Activation activation_;
};

/// Random hidden layer with w_i, b_i ~ U(-1, 1); fully determined by the arguments.
template <class Scalar_ = double>
HiddenLayer<Scalar_> init_hidden_layer(Index neurons, Index inputs, Activation activation, std::uint64_t seed)
{
    if (neurons < 1) throw ArgumentError("init_hidden_layer: need at least one hidden neuron");
    if (inputs < 1) throw ArgumentError("init_hidden_layer: need at least one input");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    mat_type<Scalar_> w(neurons, inputs);
    vec_type<Scalar_> b(neurons);
    // row-major fill order keeps a layer's first rows stable across different L
    for (Index i = 0; i < neurons; ++i) {
        for (Index j = 0; j < inputs; ++j) w(i, j) = static_cast<Scalar_>(unif(rng));
        b(i) = static_cast<Scalar_>(unif(rng));
    }
    return HiddenLayer<Scalar_>(std::move(w), std::move(b), activation);
}

template <class Scalar_, class Derived>
vec_type<Scalar_> hidden_map(const HiddenLayer<Scalar_>& layer, const Eigen::MatrixBase<Derived>& x)
{
    return layer.map(x);
}

template <class Scalar_ = double>
struct ElmState
{
    using scalar_t = Scalar_;

    HiddenLayer<scalar_t> hidden;
    mat_type<scalar_t> beta;    // L x r
    mat_type<scalar_t> R;       // L x L
    std::int64_t samples_seen = 0;

    Index outputs() const { return beta.cols(); }
};

/// Least-squares fit of beta on (X, Y); stores R = (H^T H + ridge I)^{-1}.
template <class Scalar_, class DerivedX, class DerivedY>
ElmState<Scalar_> batch_train(const HiddenLayer<Scalar_>& layer,
                              const Eigen::MatrixBase<DerivedX>& X,
                              const Eigen::MatrixBase<DerivedY>& Y,
                              Scalar_ ridge = Scalar_(1e-6))
{
    using mat_t = mat_type<Scalar_>;
    const Index L = layer.neurons();
    if (X.rows() != Y.rows())
        throw ArgumentError("batch_train: input and target row counts differ");
    if (X.rows() < L)
        throw TrainingError("batch_train: " + std::to_string(X.rows()) + " samples cannot fit " +
                            std::to_string(L) + " hidden neurons");
    if (ridge < 0) throw ArgumentError("batch_train: ridge must be nonnegative");
    if (!X.allFinite() || !Y.allFinite()) throw DataError("batch_train: non-finite training data");

    const mat_t H = layer.map_rows(X);
    mat_t A = H.transpose() * H;
    A.diagonal().array() += ridge;
    Eigen::LLT<mat_t> llt(A);
    if (llt.info() != Eigen::Success || !(llt.rcond() > std::numeric_limits<Scalar_>::epsilon()))
        throw NumericalError("batch_train: H^T H is singular; use a positive ridge");

    ElmState<Scalar_> state{layer, llt.solve(H.transpose() * Y.template cast<Scalar_>()),
                            llt.solve(mat_t::Identity(L, L)), static_cast<std::int64_t>(X.rows())};
    state.R = (state.R + state.R.transpose()).eval() * Scalar_(0.5);
    return state;
}

template <class Scalar_, class Derived>
vec_type<Scalar_> predict(const ElmState<Scalar_>& state, const Eigen::MatrixBase<Derived>& x)
{
    return state.beta.transpose() * state.hidden.map(x);
}

/// One OS-ELM step on (x, y); mutates the state in place.
template <class Scalar_, class DerivedX, class DerivedY>
void sequential_update(ElmState<Scalar_>& state,
                       const Eigen::MatrixBase<DerivedX>& x,
                       const Eigen::MatrixBase<DerivedY>& y)
{
    using vec_t = vec_type<Scalar_>;
    if (!x.allFinite() || !y.allFinite()) throw DataError("sequential_update: non-finite sample");
    if (y.size() != state.outputs())
        throw ArgumentError("sequential_update: target has dimension " + std::to_string(y.size()) +
                            ", model expects " + std::to_string(state.outputs()));

    const vec_t h = state.hidden.map(x);
    const vec_t Rh = state.R * h;
    const Scalar_ denom = Scalar_(1) + h.dot(Rh);
    if (!(denom > 0)) throw NumericalError("sequential_update: lost positive definiteness of R");

    state.R.noalias() -= (Rh / denom) * Rh.transpose();
    state.R = (state.R + state.R.transpose()).eval() * Scalar_(0.5);

    const vec_t innovation = y.template cast<Scalar_>() - state.beta.transpose() * h;
    state.beta.noalias() += (state.R * h) * innovation.transpose();
    ++state.samples_seen;
}

struct HiddenSelection
{
    Index hidden = 0;
    std::vector<double> cv_mse;   // one per candidate, same order
};

/// Mean validation MSE of an L-neuron ELM over k folds of a seeded permutation.
template <class DerivedX, class DerivedY>
double cross_validation_mse(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedY>& Y,
                            Index neurons, int folds, std::uint64_t seed,
                            Activation activation = Activation::sigmoid, double ridge = 1e-6)
{
    const Index n = X.rows();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto layer = init_hidden_layer<double>(neurons, X.cols(), activation, derive_seed(seed, neurons));
    double total = 0;
    for (int f = 0; f < folds; ++f) {
        const Index lo = n * f / folds, hi = n * (f + 1) / folds;
        Eigen::MatrixXd Xt(n - (hi - lo), X.cols()), Yt(n - (hi - lo), Y.cols());
        Eigen::MatrixXd Xv(hi - lo, X.cols()), Yv(hi - lo, Y.cols());
        for (Index i = 0, it = 0, iv = 0; i < n; ++i) {
            const Index src = order[static_cast<std::size_t>(i)];
            if (i >= lo && i < hi) {
                Xv.row(iv) = X.row(src);
                Yv.row(iv++) = Y.row(src);
            } else {
                Xt.row(it) = X.row(src);
                Yt.row(it++) = Y.row(src);
            }
        }
        const auto state = batch_train(layer, Xt, Yt, ridge);
        const Eigen::MatrixXd pred = layer.map_rows(Xv) * state.beta;
        total += (pred - Yv).squaredNorm() / static_cast<double>(Yv.size());
    }
    return total / folds;
}

/// k-fold CV choice of the hidden-layer size; ties go to the smaller L.
template <class DerivedX, class DerivedY>
HiddenSelection select_hidden_nodes(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedY>& Y,
                                    const std::vector<Index>& candidates, int folds, std::uint64_t seed,
                                    Activation activation = Activation::sigmoid, double ridge = 1e-6)
{
    if (candidates.empty()) throw ArgumentError("select_hidden_nodes: empty candidate list");
    if (folds < 2) throw ArgumentError("select_hidden_nodes: need at least 2 folds");
    if (X.rows() != Y.rows()) throw ArgumentError("select_hidden_nodes: input and target row counts differ");
    const Index largest = *std::max_element(candidates.begin(), candidates.end());
    // smallest training fold holds n - ceil(n/k) rows
    const Index n = X.rows();
    if (n - (n + folds - 1) / folds < largest)
        throw ArgumentError("select_hidden_nodes: " + std::to_string(n) + " samples are too few for " +
                            std::to_string(folds) + "-fold CV with L = " + std::to_string(largest));

    HiddenSelection out;
    if (candidates.size() == 1) {
        out.hidden = candidates.front();
        return out;
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Index L : candidates) {
        const double mse = cross_validation_mse(X, Y, L, folds, seed, activation, ridge);
        out.cv_mse.push_back(mse);
        if (mse < best || (mse == best && L < out.hidden)) {
            best = mse;
            out.hidden = L;
        }
    }
    return out;
}

} // namespace doer
