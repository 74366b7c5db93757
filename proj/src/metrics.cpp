#include "wsnf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsnf/error.hpp"

namespace wsnf {

double mae(std::span<const double> y_hat, std::span<const double> y) {
  if (y_hat.size() != y.size()) throw Error(Errc::rejected_input, "mae: length mismatch");
  if (y.empty()) throw Error(Errc::empty_set, "mae of empty vectors");
  double acc = 0.0;
  for (std::size_t z = 0; z < y.size(); ++z) acc += std::abs(y_hat[z] - y[z]);
  return acc / static_cast<double>(y.size());
}

void HorizonErrors::add(std::span<const double> y_hat, std::span<const double> y) {
  if (y_hat.size() != q_ || y.size() != q_) throw Error(Errc::rejected_input, "HorizonErrors::add: length != q");
  for (std::size_t z = 0; z < q_; ++z) abs_.push_back(std::abs(y_hat[z] - y[z]));
}

void HorizonErrors::add_row(std::span<const double> abs_errors) {
  if (abs_errors.size() != q_) throw Error(Errc::rejected_input, "HorizonErrors::add_row: length != q");
  for (double e : abs_errors) {
    if (!(e >= 0.0)) throw Error(Errc::rejected_input, "absolute errors must be >= 0");
  }
  abs_.insert(abs_.end(), abs_errors.begin(), abs_errors.end());
}

std::vector<double> per_event_mae(const HorizonErrors& errors) {
  std::vector<double> out(errors.events());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto r = errors.row(e);
    out[e] = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  }
  return out;
}

double mae_star(const HorizonErrors& errors) {
  if (errors.events() == 0) throw Error(Errc::empty_set, "mae_star needs at least one event");
  const auto per = per_event_mae(errors);
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(per.size());
}

std::vector<double> smooth(std::span<const double> series, std::size_t window) {
  if (window < 1) throw Error(Errc::rejected_input, "smoothing window must be >= 1");
  if (window > series.size()) throw Error(Errc::rejected_input, "smoothing window longer than series");
  std::vector<double> out(series.size() - window + 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::accumulate(series.begin() + static_cast<std::ptrdiff_t>(i),
                             series.begin() + static_cast<std::ptrdiff_t>(i + window), 0.0) /
             static_cast<double>(window);
  }
  return out;
}

std::vector<double> mae_by_horizon(const HorizonErrors& errors, std::size_t warmup_exclude) {
  if (warmup_exclude >= errors.events()) throw Error(Errc::empty_set, "no events left after warm-up exclusion");
  std::vector<double> out(errors.horizon(), 0.0);
  for (std::size_t e = warmup_exclude; e < errors.events(); ++e) {
    const auto r = errors.row(e);
    for (std::size_t z = 0; z < r.size(); ++z) out[z] += r[z];
  }
  const double n = static_cast<double>(errors.events() - warmup_exclude);
  for (double& v : out) v /= n;
  return out;
}

double quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw Error(Errc::empty_set, "quantile of empty sample");
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::empty_set, "summary of empty sample");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  Summary out;
  out.min = s.front();
  out.max = s.back();
  out.q1 = quantile(s, 0.25);
  out.median = quantile(s, 0.5);
  out.q3 = quantile(s, 0.75);
  out.mean = std::clamp(std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size()), out.min, out.max);
  return out;
}

}  // namespace wsnf
