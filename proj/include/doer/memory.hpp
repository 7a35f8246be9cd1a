#pragma once

// Short-term (sliding window) and long-term (reservoir) sample memories, and
// the distance-based choice of training data for a newly spawned model.

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include <Eigen/Core>

#include <doer/types.hpp>

namespace doer {

class SlidingWindow
{
public:
    explicit SlidingWindow(std::size_t capacity);

    /// Appends s; evicts the oldest entry when over capacity.
    void push(Sample s);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    /// Oldest first.
    const std::deque<Sample>& entries() const { return entries_; }

private:
    std::size_t capacity_;
    std::deque<Sample> entries_;
};

class Reservoir
{
public:
    Reservoir(std::size_t capacity, std::uint64_t seed);

    /// Offers the t-th stream point. The first `capacity` offers are always
    /// kept; after that a point enters with probability capacity / t (always
    /// if pinned) and replaces a uniformly chosen entry.
    /// Returns whether s was inserted.
    bool offer(Sample s, bool pinned = false);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    std::uint64_t offered() const { return offered_; }
    const std::vector<Sample>& entries() const { return entries_; }
    const std::vector<bool>& pinned() const { return pinned_; }
    bool contains(std::int64_t index) const;

private:
    std::size_t capacity_;
    std::uint64_t offered_ = 0;
    std::vector<Sample> entries_;
    std::vector<bool> pinned_;
    std::mt19937_64 rng_;
};

/// Weights over the extended vector z = (x, y).
struct DistanceWeights
{
    Eigen::VectorXd w;

    /// Inputs get `input_weight`, outputs `output_ratio` times that.
    static DistanceWeights make(Index inputs, Index outputs, double output_ratio = 5.0, double input_weight = 1.0);
};

/// sum_k W_k (z_t^k - z_j^k)^2 over the concatenated (x, y) coordinates.
double weighted_distance(const Eigen::VectorXd& zt, const Eigen::VectorXd& zj, const DistanceWeights& W);
double weighted_distance(const Sample& a, const Sample& b, const DistanceWeights& W);

/// Concatenates (x, y).
Eigen::VectorXd extended(const Sample& s);

/// Training set for a new model around `current`.
///
/// Candidates are the union of both memories (one copy per stream index).
/// Everything closer than tau = mean(dist) - std(dist) is taken; if that
/// leaves fewer than `target` points the set is padded in ascending-distance
/// order up to `target`. `current` is always the first element.
std::vector<Sample> select_training_set(const SlidingWindow& stm, const Reservoir& ltm, const Sample& current,
                                        const DistanceWeights& W, std::size_t target);

} // namespace doer
