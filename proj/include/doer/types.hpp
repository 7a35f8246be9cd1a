#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace doer {

template <class Scalar_, int Rows_ = Eigen::Dynamic>
using vec_type = Eigen::Matrix<Scalar_, Rows_, 1>;

template <class Scalar_, int Rows_ = Eigen::Dynamic, int Cols_ = Eigen::Dynamic>
using mat_type = Eigen::Matrix<Scalar_, Rows_, Cols_, Eigen::ColMajor>;

using Index = Eigen::Index;

// One stream record. `index` is the position in the originating stream and
// doubles as the record's identity inside the memories.
struct Sample
{
    std::int64_t index = 0;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

inline bool is_finite(const Sample& s)
{
    return s.x.allFinite() && s.y.allFinite();
}

// Row-stacks inputs and targets of a sample list.
inline void stack_samples(const std::vector<Sample>& samples, Eigen::MatrixXd& X, Eigen::MatrixXd& Y)
{
    const Index n = static_cast<Index>(samples.size());
    const Index d = n ? samples.front().x.size() : 0;
    const Index r = n ? samples.front().y.size() : 0;
    X.resize(n, d);
    Y.resize(n, r);
    for (Index i = 0; i < n; ++i) {
        X.row(i) = samples[i].x.transpose();
        Y.row(i) = samples[i].y.transpose();
    }
}

// splitmix64 finalizer; derives independent child seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace doer
