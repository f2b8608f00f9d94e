#pragma once

#include <span>
#include <vector>

namespace asp {

// Scaled log-sum-exp family: for scale > 0 returns scale * ln(sum_i exp(a_i / scale)),
// for scale == 0 returns max_i a_i, and for scale < 0 the soft-min counterpart.
// Always computed with max (resp. min) subtraction so large magnitudes do not overflow.
double scaled_log_sum_exp(std::span<const double> values, double scale);

// Gradient of scaled_log_sum_exp in its argument: softmax weights for scale != 0,
// uniform over the set of maximizers for scale == 0.
void scaled_softmax_distribution(std::span<const double> values, double scale,
                                 std::span<double> out);

// eps-soft-max: scale * ln(sum exp(a/scale)) for scale > 0, max(a) at scale 0.
// Interpolates between the log-partition function (scale 1) and the max function.
// Throws std::invalid_argument on empty input or negative scale.
double soft_max(std::span<const double> values, double scale);

// The distribution p_i proportional to exp(a_i / scale); at scale 0 the uniform
// distribution over the maximizers. Same input requirements as soft_max.
std::vector<double> soft_max_distribution(std::span<const double> values, double scale);

// Shannon entropy -sum p ln p with 0 * ln 0 := 0.
double entropy(std::span<const double> p);

}  // namespace asp
