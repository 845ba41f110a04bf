#pragma once

#include <cstddef>
#include <span>

namespace graspq::testing {

/// Pearson chi-square goodness of fit against equal expected counts.
struct ChiSquare {
  double statistic = 0.0;
  double p_value = 1.0;
};
ChiSquare chi_square_uniform(std::span<const std::size_t> counts);

/// One-sided paired t-test of mean(a - b) > 0.
struct PairedT {
  double mean_diff = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};
PairedT paired_t_greater(std::span<const double> a, std::span<const double> b);

/// One-sided lower confidence bound of the mean.
double mean_lower_bound(std::span<const double> xs, double confidence);

/// Two-sided two-proportion z-test p-value.
double two_proportion_p(std::size_t hits_a, std::size_t n_a, std::size_t hits_b, std::size_t n_b);

}  // namespace graspq::testing
