#include "wsnf/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace wsnf {

Line interpolate_line(double t1, double v1, double t2, double v2) {
  if (!(t2 > t1)) throw Error(Errc::non_monotonic_time, "interpolate_line needs t2 > t1");
  Line line;
  line.m = (v2 - v1) / (t2 - t1);
  line.b = v1 - line.m * t1;
  return line;
}

double aggregate_segment(double t1, double v1, double t2, double v2, double quarter_s) {
  if (t2 < t1) throw Error(Errc::non_monotonic_time, "aggregate_segment needs t2 >= t1");
  return (t2 - t1) / quarter_s * 0.5 * (v1 + v2);
}

std::vector<double> difference(std::span<const double> series) {
  std::vector<double> d;
  if (series.size() < 2) return d;
  d.reserve(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) d.push_back(series[i] - series[i - 1]);
  return d;
}

std::vector<double> dedifferentiate(std::span<const double> diffs, double origin) {
  std::vector<double> out;
  out.reserve(diffs.size() + 1);
  out.push_back(origin);
  double acc = origin;
  for (double d : diffs) out.push_back(acc += d);
  return out;
}

QuarterAggregator::QuarterAggregator(double quarter_s, std::int64_t max_gap)
    : quarter_(quarter_s), max_gap_(max_gap) {
  if (!(quarter_s > 0.0) || !std::isfinite(quarter_s)) throw Error(Errc::rejected_input, "quarter length must be > 0");
  if (max_gap < 1) throw Error(Errc::rejected_input, "max gap must be >= 1");
}

void QuarterAggregator::start(const TimedSample& s, std::int64_t qt) noexcept {
  // The stretch between the quarter start and the first frame is taken at the frame's value.
  v_acc_ = s.v * (std::fmod(s.t, quarter_) / quarter_);
  t_prev_ = s.t;
  v_prev_ = s.v;
  q_prev_ = qt;
  valid_ = true;
}

DiffRing::DiffRing(std::size_t capacity) : buf_(capacity, 0.0f) {
  if (capacity == 0) throw Error(Errc::rejected_input, "ring capacity must be > 0");
}

bool DiffRing::observe(double v_q) noexcept {
  const bool wrote = vq_prev_.has_value();
  if (wrote) {
    buf_[k_ % buf_.size()] = static_cast<float>(v_q - *vq_prev_);
    ++k_;
  }
  vq_prev_ = v_q;
  return wrote;
}

void DiffRing::clear() noexcept {
  std::fill(buf_.begin(), buf_.end(), 0.0f);
  k_ = 0;
  vq_prev_.reset();
}

TrainForecast::TrainForecast(AnnModel model, LearnSchedule schedule)
    : model_(std::move(model)), schedule_(schedule), ring_(model_.topology().p + model_.topology().q) {
  schedule_.validate();
}

std::optional<Forecast> TrainForecast::on_quarter(double v_q, std::int64_t quarter) {
  if (!std::isfinite(v_q)) throw Error(Errc::rejected_input, "non-finite quarter mean");
  if (!ring_.observe(v_q)) return std::nullopt;

  const std::uint64_t k = ring_.count();
  const std::size_t p = model_.topology().p;
  const std::size_t q = model_.topology().q;

  if (k >= p + q) {
    auto x = model_.input();
    for (std::size_t j = 0; j < p; ++j) x[j] = ring_.at(k - p - q + j);
    model_.forward_input();
    auto y = model_.target_buffer();
    for (std::size_t j = 0; j < q; ++j) y[j] = ring_.at(k - q + j);
    model_.backprop(y);
    model_.update(schedule_);
  }
  if (k < p) return std::nullopt;

  auto x = model_.input();
  for (std::size_t j = 0; j < p; ++j) x[j] = ring_.at(k - p + j);
  const auto y_hat = model_.forward_input();

  Forecast f;
  f.origin_quarter = quarter;
  f.values.resize(q);
  double acc = v_q;
  for (std::size_t i = 0; i < q; ++i) f.values[i] = acc += static_cast<double>(y_hat[i]);
  return f;
}

}  // namespace wsnf
