#include <doer/standardizer.hpp>

#include <doer/errors.hpp>

namespace doer {

namespace {

void column_stats(const Eigen::MatrixXd& M, Eigen::VectorXd& mean, Eigen::VectorXd& stdev)
{
    mean = M.colwise().mean().transpose();
    stdev = ((M.rowwise() - mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    // constant columns pass through unscaled
    for (Index j = 0; j < stdev.size(); ++j)
        if (!(stdev(j) > 0)) stdev(j) = 1.0;
}

} // namespace

Standardizer Standardizer::fit(const std::vector<Sample>& samples)
{
    if (samples.empty()) throw ArgumentError("Standardizer::fit: no samples");
    Eigen::MatrixXd X, Y;
    stack_samples(samples, X, Y);
    Standardizer s;
    column_stats(X, s.x_mean_, s.x_std_);
    column_stats(Y, s.y_mean_, s.y_std_);
    return s;
}

Eigen::VectorXd Standardizer::scale_x(const Eigen::VectorXd& x) const
{
    return ((x - x_mean_).array() / x_std_.array()).matrix();
}

Eigen::VectorXd Standardizer::scale_y(const Eigen::VectorXd& y) const
{
    return ((y - y_mean_).array() / y_std_.array()).matrix();
}

Eigen::VectorXd Standardizer::unscale_y(const Eigen::VectorXd& yz) const
{
    return (yz.array() * y_std_.array()).matrix() + y_mean_;
}

Sample Standardizer::apply(const Sample& s) const
{
    return Sample{s.index, scale_x(s.x), scale_y(s.y)};
}

} // namespace doer
