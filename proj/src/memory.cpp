#include <doer/memory.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <doer/errors.hpp>

namespace doer {

SlidingWindow::SlidingWindow(std::size_t capacity) : capacity_(capacity)
{
    if (capacity_ == 0) throw ArgumentError("SlidingWindow: capacity must be positive");
}

void SlidingWindow::push(Sample s)
{
    entries_.push_back(std::move(s));
    while (entries_.size() > capacity_) entries_.pop_front();
}

Reservoir::Reservoir(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed)
{
    if (capacity_ == 0) throw ArgumentError("Reservoir: capacity must be positive");
    entries_.reserve(capacity_);
    pinned_.reserve(capacity_);
}

bool Reservoir::offer(Sample s, bool pinned)
{
    ++offered_;
    if (entries_.size() < capacity_) {
        entries_.push_back(std::move(s));
        pinned_.push_back(pinned);
        return true;
    }
    if (!pinned) {
        std::uniform_int_distribution<std::uint64_t> ticket(1, offered_);
        if (ticket(rng_) > capacity_) return false;
    }
    std::uniform_int_distribution<std::size_t> victim(0, capacity_ - 1);
    const std::size_t slot = victim(rng_);
    entries_[slot] = std::move(s);
    pinned_[slot] = pinned;
    return true;
}

bool Reservoir::contains(std::int64_t index) const
{
    return std::any_of(entries_.begin(), entries_.end(), [&](const Sample& e) { return e.index == index; });
}

DistanceWeights DistanceWeights::make(Index inputs, Index outputs, double output_ratio, double input_weight)
{
    if (!(output_ratio > 0) || !(input_weight > 0)) throw ArgumentError("DistanceWeights: weights must be positive");
    DistanceWeights W;
    W.w.resize(inputs + outputs);
    W.w.head(inputs).setConstant(input_weight);
    W.w.tail(outputs).setConstant(input_weight * output_ratio);
    return W;
}

Eigen::VectorXd extended(const Sample& s)
{
    Eigen::VectorXd z(s.x.size() + s.y.size());
    z << s.x, s.y;
    return z;
}

double weighted_distance(const Eigen::VectorXd& zt, const Eigen::VectorXd& zj, const DistanceWeights& W)
{
    if (zt.size() != zj.size() || zt.size() != W.w.size())
        throw ArgumentError("weighted_distance: dimension mismatch");
    return (W.w.array() * (zt - zj).array().square()).sum();
}

double weighted_distance(const Sample& a, const Sample& b, const DistanceWeights& W)
{
    const Index d = a.x.size();
    if (b.x.size() != d || a.y.size() != b.y.size() || W.w.size() != d + a.y.size())
        throw ArgumentError("weighted_distance: dimension mismatch");
    return (W.w.head(d).array() * (a.x - b.x).array().square()).sum() +
           (W.w.tail(a.y.size()).array() * (a.y - b.y).array().square()).sum();
}

std::vector<Sample> select_training_set(const SlidingWindow& stm, const Reservoir& ltm, const Sample& current,
                                        const DistanceWeights& W, std::size_t target)
{
    std::vector<const Sample*> pool;
    pool.reserve(stm.size() + ltm.size());
    std::unordered_set<std::int64_t> seen{current.index};
    for (const auto& s : stm.entries())
        if (seen.insert(s.index).second) pool.push_back(&s);
    for (const auto& s : ltm.entries())
        if (seen.insert(s.index).second) pool.push_back(&s);

    std::vector<Sample> out;
    if (target == 0) return out;
    out.reserve(std::min(target, pool.size() + 1));
    out.push_back(current);
    if (pool.empty()) return out;

    std::vector<double> dist(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) dist[i] = weighted_distance(current, *pool[i], W);

    const double n = static_cast<double>(dist.size());
    const double mean = std::accumulate(dist.begin(), dist.end(), 0.0) / n;
    double var = 0;
    for (double v : dist) var += (v - mean) * (v - mean);
    const double tau = mean - std::sqrt(var / n);
    const bool use_threshold = var > 0 && tau > 0;

    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return pool[a]->index < pool[b]->index;
    });

    // The below-tau set is a prefix of the ascending order and padding
    // continues along it, so both phases reduce to taking a prefix.
    std::size_t below = 0;
    if (use_threshold)
        while (below < order.size() && dist[order[below]] < tau) ++below;
    const std::size_t take = std::max(below, std::min(target - 1, order.size()));
    for (std::size_t i = 0; i < take; ++i) out.push_back(*pool[order[i]]);
    return out;
}

} // namespace doer
