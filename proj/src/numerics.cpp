#include "asp/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace asp {

namespace {

double require_nonempty(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("soft_max: empty input");
  return values[0];
}

}  // namespace

double scaled_log_sum_exp(std::span<const double> values, double scale) {
  require_nonempty(values);
  if (scale == 0.0) {
    double best = values[0];
    for (double v : values)
      if (v > best) best = v;
    return best;
  }
  // scale < 0 reduces to -slse(-a, -scale); handled by anchoring at the
  // extremum that keeps every exponent <= 0.
  double anchor = values[0];
  if (scale > 0.0) {
    for (double v : values)
      if (v > anchor) anchor = v;
  } else {
    for (double v : values)
      if (v < anchor) anchor = v;
  }
  double sum = 0.0;
  for (double v : values) sum += std::exp((v - anchor) / scale);
  return anchor + scale * std::log(sum);
}

void scaled_softmax_distribution(std::span<const double> values, double scale,
                                 std::span<double> out) {
  require_nonempty(values);
  if (out.size() != values.size())
    throw std::invalid_argument("scaled_softmax_distribution: size mismatch");
  if (scale == 0.0) {
    double best = values[0];
    for (double v : values)
      if (v > best) best = v;
    int ties = 0;
    for (double v : values)
      if (v == best) ++ties;
    for (size_t i = 0; i < values.size(); ++i)
      out[i] = values[i] == best ? 1.0 / ties : 0.0;
    return;
  }
  double anchor = values[0];
  if (scale > 0.0) {
    for (double v : values)
      if (v > anchor) anchor = v;
  } else {
    for (double v : values)
      if (v < anchor) anchor = v;
  }
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp((values[i] - anchor) / scale);
    sum += out[i];
  }
  for (size_t i = 0; i < values.size(); ++i) out[i] /= sum;
}

double soft_max(std::span<const double> values, double scale) {
  if (scale < 0.0) throw std::invalid_argument("soft_max: negative scale");
  return scaled_log_sum_exp(values, scale);
}

std::vector<double> soft_max_distribution(std::span<const double> values, double scale) {
  if (scale < 0.0) throw std::invalid_argument("soft_max_distribution: negative scale");
  std::vector<double> out(values.size());
  scaled_softmax_distribution(values, scale, out);
  return out;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

}  // namespace asp
