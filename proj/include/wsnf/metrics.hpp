#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wsnf {

/// (1/q) * sum |y_hat_z - y_z|
double mae(std::span<const double> y_hat, std::span<const double> y);

/// Absolute errors, one row per forecast event, one column per step ahead.
class HorizonErrors {
 public:
  explicit HorizonErrors(std::size_t q = 0) : q_(q) {}

  std::size_t horizon() const noexcept { return q_; }
  std::size_t events() const noexcept { return q_ ? abs_.size() / q_ : 0; }
  std::span<const double> row(std::size_t event) const { return {abs_.data() + event * q_, q_}; }

  void add(std::span<const double> y_hat, std::span<const double> y);
  void add_row(std::span<const double> abs_errors);

 private:
  std::size_t q_;
  std::vector<double> abs_;
};

std::vector<double> per_event_mae(const HorizonErrors& errors);

/// Mean of the per-event MAE.
double mae_star(const HorizonErrors& errors);

/// Trailing moving average; output has length n - window + 1.
std::vector<double> smooth(std::span<const double> series, std::size_t window = 10);

/// Column means after dropping the first `warmup_exclude` events.
std::vector<double> mae_by_horizon(const HorizonErrors& errors, std::size_t warmup_exclude);

struct Summary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quantile with linear interpolation between order statistics:
/// position (n-1)*prob in the sorted sample.
double quantile(std::span<const double> sorted, double prob);

Summary summarize(std::span<const double> values);

}  // namespace wsnf
