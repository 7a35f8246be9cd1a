#pragma once

#include <vector>

#include <Eigen/Core>

#include <doer/types.hpp>

namespace doer {

// Per-variable affine scaling fitted once on the initial block and frozen.
class Standardizer
{
public:
    Standardizer() = default;

    static Standardizer fit(const std::vector<Sample>& samples);

    Sample apply(const Sample& s) const;
    Eigen::VectorXd scale_x(const Eigen::VectorXd& x) const;
    Eigen::VectorXd scale_y(const Eigen::VectorXd& y) const;
    Eigen::VectorXd unscale_y(const Eigen::VectorXd& yz) const;

    const Eigen::VectorXd& x_mean() const { return x_mean_; }
    const Eigen::VectorXd& x_std() const { return x_std_; }
    const Eigen::VectorXd& y_mean() const { return y_mean_; }
    const Eigen::VectorXd& y_std() const { return y_std_; }

private:
    Eigen::VectorXd x_mean_, x_std_, y_mean_, y_std_;
};

} // namespace doer
