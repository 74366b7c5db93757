#pragma once

// Experiment driver: pushes a frame stream through the on-line engine (or
// the Bayesian baseline), pairs each forecast with the q quarter means that
// follow it, and collects the error statistics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wsnf/ann.hpp"
#include "wsnf/metrics.hpp"
#include "wsnf/pipeline.hpp"
#include "wsnf/stream.hpp"

namespace wsnf {

enum class ModelKind { lin, mlp, bayes };

const char* to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(const std::string& name);

/// Grid-searched defaults on the synthetic sinus stream (see README).
LearnSchedule default_schedule(ModelKind kind);

struct RunConfig {
  ModelKind model = ModelKind::lin;
  std::size_t p = 8;
  std::size_t q = 8;
  std::size_t h = 8;  // ignored unless model == mlp
  double quarter_s = 900.0;
  std::int64_t max_gap = 4;
  LearnSchedule schedule = default_schedule(ModelKind::lin);
  std::uint64_t seed = 1;  // weight initialisation
  std::optional<std::size_t> warmup_exclude;  // events; default warmup_fraction of the events
  double warmup_fraction = 0.015;
  std::size_t smoothing_window = 10;
  bool bayes_intercept = false;
  bool bayes_differenced = false;

  AnnTopology topology() const { return {p, model == ModelKind::mlp ? h : 0, q}; }
};

/// One row per completed quarter.
struct QuarterLog {
  std::int64_t index = 0;
  double actual = 0.0;
  std::vector<double> forecast;  // empty when no forecast was issued at this quarter
};

struct ExperimentResult {
  std::string method;
  HorizonErrors errors;
  std::vector<std::int64_t> event_origin;  // origin quarter of each error row
  std::vector<double> event_mae;
  std::vector<double> smoothed_mae;
  std::vector<double> mae_by_horizon;
  std::optional<Summary> summary;
  std::vector<QuarterLog> quarters;

  std::uint64_t frames = 0;
  std::uint64_t dropped_frames = 0;
  std::uint64_t resets = 0;
  std::uint64_t train_steps = 0;
  std::size_t warmup_excluded = 0;
  bool diverged = false;
  std::string error;

  double mae_star() const;
};

ExperimentResult run_experiment(const RunConfig& cfg, FrameSource& source);

struct GridSpace {
  std::vector<double> eta0;
  std::vector<double> gamma;
  std::vector<double> epsilon;

  std::size_t size() const noexcept { return eta0.size() * gamma.size() * epsilon.size(); }

  static GridSpace defaults();
  /// "eta0=0.1,0.05;gamma=0,0.5;epsilon=0" or a JSON object with the same
  /// keys. Missing keys keep the default axis.
  static GridSpace parse(const std::string& text);
};

struct GridPoint {
  LearnSchedule schedule;
  double mae_star = 0.0;
  std::size_t events = 0;
  bool diverged = false;  // also set when no forecast event was scored
};

using SourceFactory = std::function<std::unique_ptr<FrameSource>()>;

/// Evaluates every schedule on a fresh stream from `factory` and returns them
/// ranked by MAE*, diverged points last. Points are independent and may run
/// in parallel; the ranking is deterministic.
std::vector<GridPoint> grid_search(const GridSpace& space, const RunConfig& base, const SourceFactory& factory);

}  // namespace wsnf
