#pragma once

#include <functional>
#include <span>
#include <vector>

namespace iwpost {

struct MeanStdError {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and sample-std / sqrt(n), summed in index order. Needs n >= 2.
MeanStdError mean_std_error(std::span<const double> values);

double normal_cdf(double x) noexcept;

/// sup |F_n(x) - cdf(x)|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// sup |F_a(x) - F_b(x)|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace iwpost
