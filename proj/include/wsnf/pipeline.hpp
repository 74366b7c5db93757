#pragma once

// Sink-node stream logic: non-equidistant frames are integrated into
// fixed-interval quarter means, which are differenced into a ring buffer that
// drives on-line training and multi-step forecasting.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wsnf/ann.hpp"
#include "wsnf/error.hpp"

namespace wsnf {

struct TimedSample {
  double t = 0.0;  // seconds
  double v = 0.0;  // degrees C
  std::uint32_t node = 0;
};

struct Line {
  double m = 0.0;  // slope, C/s
  double b = 0.0;  // intercept, C
  double at(double t) const noexcept { return t * m + b; }
};

/// Slope-intercept line through (t1, v1) and (t2, v2). Requires t2 > t1.
Line interpolate_line(double t1, double v1, double t2, double v2);

/// Trapezoid contribution ((t2 - t1) / Q) * (v1 + v2) / 2 of one segment to a quarter mean.
double aggregate_segment(double t1, double v1, double t2, double v2, double quarter_s);

/// d[i] = series[i+1] - series[i]
std::vector<double> difference(std::span<const double> series);

/// Inverse of difference(): {origin, origin + d0, origin + d0 + d1, ...}.
std::vector<double> dedifferentiate(std::span<const double> diffs, double origin);

struct Forecast {
  std::int64_t origin_quarter = 0;
  std::vector<double> values;  // one per future quarter, degrees C
};

struct QuarterRecord {
  std::int64_t index = 0;
  double mean = 0.0;
  std::optional<Forecast> forecast;
};

enum class PushOutcome { started, accepted, reset };

/// Trapezoidal quarter-mean accumulator for frames arriving at irregular
/// times. Missing quarters are interpolated up to `max_gap` quarters; a larger
/// gap restarts aggregation from the new frame.
class QuarterAggregator {
 public:
  explicit QuarterAggregator(double quarter_s = 900.0, std::int64_t max_gap = 4);

  double quarter_seconds() const noexcept { return quarter_; }
  std::int64_t max_gap() const noexcept { return max_gap_; }
  bool has_previous() const noexcept { return valid_; }
  double previous_time() const noexcept { return t_prev_; }
  double previous_value() const noexcept { return v_prev_; }
  std::int64_t previous_quarter() const noexcept { return q_prev_; }
  double accumulator() const noexcept { return v_acc_; }
  std::uint64_t resets() const noexcept { return resets_; }
  std::uint64_t dropped() const noexcept { return dropped_; }

  void clear() noexcept { valid_ = false; v_acc_ = 0.0; }

  /// Feeds one frame. `on_quarter(index, mean)` runs once per quarter that the
  /// frame completes, in order. Late frames throw non_monotonic_time and leave
  /// the state untouched.
  template <class OnQuarter>
  PushOutcome push(const TimedSample& s, OnQuarter&& on_quarter) {
    if (!std::isfinite(s.t) || !std::isfinite(s.v)) throw Error(Errc::rejected_input, "non-finite frame");
    const auto qt = static_cast<std::int64_t>(std::floor(s.t / quarter_));
    if (!valid_) {
      start(s, qt);
      return PushOutcome::started;
    }
    if (s.t < t_prev_) {
      ++dropped_;
      throw Error(Errc::non_monotonic_time, "frame older than the previous one");
    }
    if (qt - q_prev_ > max_gap_) {
      ++resets_;
      start(s, qt);
      return PushOutcome::reset;
    }
    if (s.t > t_prev_) {
      const Line line = interpolate_line(t_prev_, v_prev_, s.t, s.v);
      std::int64_t closing = q_prev_;
      double ti = quarter_ * static_cast<double>(closing + 1);
      while (ti <= s.t) {
        const double vti = line.at(ti);
        v_acc_ += aggregate_segment(t_prev_, v_prev_, ti, vti, quarter_);
        on_quarter(closing, v_acc_);
        v_acc_ = 0.0;
        v_prev_ = vti;
        t_prev_ = ti;
        ++closing;
        ti = quarter_ * static_cast<double>(closing + 1);
      }
      if (t_prev_ < s.t) v_acc_ += aggregate_segment(t_prev_, v_prev_, s.t, s.v, quarter_);
    }
    t_prev_ = s.t;
    v_prev_ = s.v;
    q_prev_ = qt;
    return PushOutcome::accepted;
  }

 private:
  void start(const TimedSample& s, std::int64_t qt) noexcept;

  double quarter_;
  std::int64_t max_gap_;
  bool valid_ = false;
  double t_prev_ = 0.0;
  double v_prev_ = 0.0;
  std::int64_t q_prev_ = 0;
  double v_acc_ = 0.0;
  std::uint64_t resets_ = 0;
  std::uint64_t dropped_ = 0;
};

/// Circular buffer of the last p+q first-order differences (32-bit reals).
class DiffRing {
 public:
  explicit DiffRing(std::size_t capacity);

  std::size_t capacity() const noexcept { return buf_.size(); }
  std::size_t persistent_bytes() const noexcept { return buf_.size() * sizeof(float); }
  std::uint64_t count() const noexcept { return k_; }
  const std::optional<double>& previous_mean() const noexcept { return vq_prev_; }

  /// Element with absolute index i; valid for count() - capacity() <= i < count().
  float at(std::uint64_t i) const noexcept { return buf_[i % buf_.size()]; }

  /// Records mean v_q; returns true when a new difference was written.
  bool observe(double v_q) noexcept;
  void clear() noexcept;

 private:
  std::vector<float> buf_;
  std::uint64_t k_ = 0;
  std::optional<double> vq_prev_;
};

/// Differencing ring plus model: trains once k >= p+q on the pair delayed by q
/// quarters and forecasts once k >= p.
class TrainForecast {
 public:
  TrainForecast(AnnModel model, LearnSchedule schedule);

  std::optional<Forecast> on_quarter(double v_q, std::int64_t quarter);
  std::optional<Forecast> train_and_forecast(double v_q, std::int64_t quarter = 0) {
    return on_quarter(v_q, quarter);
  }
  void reset() noexcept { ring_.clear(); }

  std::size_t horizon() const noexcept { return model_.topology().q; }
  const AnnModel& model() const noexcept { return model_; }
  AnnModel& model() noexcept { return model_; }
  const DiffRing& ring() const noexcept { return ring_; }
  const LearnSchedule& schedule() const noexcept { return schedule_; }
  std::uint64_t train_steps() const noexcept { return model_.alpha(); }

  /// Ring buffer plus model arena, in bytes.
  std::size_t persistent_bytes() const noexcept { return ring_.persistent_bytes() + model_.persistent_bytes(); }

 private:
  AnnModel model_;
  LearnSchedule schedule_;
  DiffRing ring_;
};

/// Aggregator feeding a quarter-level stage (TrainForecast or the Bayesian
/// baseline). The stage is reset whenever the aggregator restarts.
template <class Stage>
class BasicPipeline {
 public:
  BasicPipeline(Stage stage, double quarter_s = 900.0, std::int64_t max_gap = 4)
      : agg_(quarter_s, max_gap), stage_(std::move(stage)) {}

  /// Calls sink(const QuarterRecord&) for each completed quarter. Returns the
  /// last forecast produced during the call, if any.
  template <class Sink>
  std::optional<Forecast> push(const TimedSample& s, Sink&& sink) {
    std::optional<Forecast> last;
    const PushOutcome outcome = agg_.push(s, [&](std::int64_t index, double mean) {
      QuarterRecord rec{index, mean, stage_.on_quarter(mean, index)};
      if (rec.forecast) last = rec.forecast;
      sink(static_cast<const QuarterRecord&>(rec));
    });
    if (outcome == PushOutcome::reset) stage_.reset();
    return last;
  }

  std::optional<Forecast> process_sample(const TimedSample& s) {
    return push(s, [](const QuarterRecord&) {});
  }

  const QuarterAggregator& aggregator() const noexcept { return agg_; }
  const Stage& stage() const noexcept { return stage_; }
  Stage& stage() noexcept { return stage_; }

 private:
  QuarterAggregator agg_;
  Stage stage_;
};

using OnlinePipeline = BasicPipeline<TrainForecast>;

}  // namespace wsnf
