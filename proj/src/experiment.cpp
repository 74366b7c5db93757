#include "wsnf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "wsnf/bayes.hpp"

namespace wsnf {

const char* to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::lin: return "lin";
    case ModelKind::mlp: return "mlp";
    case ModelKind::bayes: return "bayes";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "lin") return ModelKind::lin;
  if (name == "mlp") return ModelKind::mlp;
  if (name == "bayes") return ModelKind::bayes;
  throw Error(Errc::rejected_input, "unknown model '" + name + "' (lin|mlp|bayes)");
}

LearnSchedule default_schedule(ModelKind kind) {
  switch (kind) {
    case ModelKind::lin: return {0.1, 0.25, 0.0};
    case ModelKind::mlp: return {0.1, 0.5, 0.0};
    case ModelKind::bayes: return {};
  }
  return {};
}

double ExperimentResult::mae_star() const { return wsnf::mae_star(errors); }

namespace {

struct Pending {
  Forecast forecast;
  std::vector<double> actual;
  std::size_t filled = 0;
};

// Pairs each forecast with the q quarter means that follow its origin.
class ErrorCollector {
 public:
  explicit ErrorCollector(ExperimentResult& out, std::size_t q) : out_(out), q_(q) {}

  void operator()(const QuarterRecord& rec) {
    for (auto it = pending_.begin(); it != pending_.end();) {
      const std::int64_t offset = rec.index - it->forecast.origin_quarter;
      if (offset > static_cast<std::int64_t>(q_)) {
        it = pending_.erase(it);  // a target quarter was lost to a reset
        continue;
      }
      if (offset >= 1) {
        it->actual[static_cast<std::size_t>(offset - 1)] = rec.mean;
        ++it->filled;
        if (offset == static_cast<std::int64_t>(q_) && it->filled == q_) {
          out_.errors.add(it->forecast.values, it->actual);
          out_.event_origin.push_back(it->forecast.origin_quarter);
          it = pending_.erase(it);
          continue;
        }
      }
      ++it;
    }
    QuarterLog log{rec.index, rec.mean, {}};
    if (rec.forecast) {
      log.forecast = rec.forecast->values;
      pending_.push_back(Pending{*rec.forecast, std::vector<double>(q_, 0.0), 0});
    }
    out_.quarters.push_back(std::move(log));
  }

 private:
  ExperimentResult& out_;
  std::size_t q_;
  std::deque<Pending> pending_;
};

template <class Pipeline>
void drive(Pipeline& pipeline, FrameSource& source, ExperimentResult& out, std::size_t q) {
  ErrorCollector collect(out, q);
  try {
    while (auto s = source.next()) {
      ++out.frames;
      try {
        pipeline.push(*s, collect);
      } catch (const Error& e) {
        if (e.code() != Errc::non_monotonic_time) throw;
      }
    }
  } catch (const Error& e) {
    if (e.code() != Errc::model_diverged) throw;
    out.diverged = true;
    out.error = e.what();
  }
  out.dropped_frames = pipeline.aggregator().dropped();
  out.resets = pipeline.aggregator().resets();
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& cfg, FrameSource& source) {
  ExperimentResult out;
  out.method = to_string(cfg.model);
  out.errors = HorizonErrors(cfg.q);

  if (cfg.model == ModelKind::bayes) {
    BasicPipeline<BayesForecaster> pipeline(
        BayesForecaster({cfg.p, cfg.q, cfg.bayes_intercept, cfg.bayes_differenced}), cfg.quarter_s, cfg.max_gap);
    drive(pipeline, source, out, cfg.q);
    out.train_steps = pipeline.stage().updates();
  } else {
    OnlinePipeline pipeline(TrainForecast(AnnModel(cfg.topology(), cfg.seed), cfg.schedule), cfg.quarter_s,
                            cfg.max_gap);
    drive(pipeline, source, out, cfg.q);
    out.train_steps = pipeline.stage().train_steps();
  }

  out.event_mae = per_event_mae(out.errors);
  const std::size_t events = out.errors.events();
  if (events == 0) return out;

  out.summary = summarize(out.event_mae);
  if (events >= cfg.smoothing_window) out.smoothed_mae = smooth(out.event_mae, cfg.smoothing_window);
  std::size_t warmup = cfg.warmup_exclude.value_or(
      static_cast<std::size_t>(std::floor(cfg.warmup_fraction * static_cast<double>(events))));
  warmup = std::min(warmup, events - 1);
  out.warmup_excluded = warmup;
  out.mae_by_horizon = mae_by_horizon(out.errors, warmup);
  return out;
}

GridSpace GridSpace::defaults() {
  return {{0.2, 0.1, 0.05, 0.01, 0.005}, {0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 1e-5, 1e-4, 1e-3}};
}

namespace {

std::vector<double> parse_axis(const std::string& list) {
  std::vector<double> out;
  std::stringstream in(list);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok.erase(0, tok.find_first_not_of(" \t\n"));
    tok.erase(tok.find_last_not_of(" \t\n") + 1);
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(Errc::rejected_input, "bad grid value '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(Errc::rejected_input, "empty grid axis");
  return out;
}

}  // namespace

GridSpace GridSpace::parse(const std::string& text) {
  GridSpace space = defaults();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const auto j = nlohmann::json::parse(text);
    auto axis = [&j](const char* key, std::vector<double>& dst) {
      if (!j.contains(key)) return;
      dst = j.at(key).get<std::vector<double>>();
      if (dst.empty()) throw Error(Errc::rejected_input, std::string("empty grid axis ") + key);
    };
    axis("eta0", space.eta0);
    axis("gamma", space.gamma);
    axis("epsilon", space.epsilon);
    return space;
  }
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      if (part.find_first_not_of(" \t\r\n") == std::string::npos) continue;
      throw Error(Errc::rejected_input, "grid axis needs key=values: '" + part + "'");
    }
    std::string key = part.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t\r\n"));
    key.erase(key.find_last_not_of(" \t\r\n") + 1);
    const auto values = parse_axis(part.substr(eq + 1));
    if (key == "eta0") space.eta0 = values;
    else if (key == "gamma") space.gamma = values;
    else if (key == "epsilon") space.epsilon = values;
    else throw Error(Errc::rejected_input, "unknown grid axis '" + key + "'");
  }
  return space;
}

std::vector<GridPoint> grid_search(const GridSpace& space, const RunConfig& base, const SourceFactory& factory) {
  if (space.size() == 0) throw Error(Errc::rejected_input, "empty grid space");
  std::vector<GridPoint> points;
  points.reserve(space.size());
  for (double e : space.eta0)
    for (double g : space.gamma)
      for (double w : space.epsilon) points.push_back(GridPoint{LearnSchedule{e, g, w}, 0.0, 0, false});

  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    GridPoint& pt = points[static_cast<std::size_t>(i)];
    RunConfig cfg = base;
    cfg.schedule = pt.schedule;
    try {
      auto source = factory();
      const ExperimentResult r = run_experiment(cfg, *source);
      pt.events = r.errors.events();
      pt.diverged = r.diverged || !r.summary;
      pt.mae_star = pt.diverged ? std::numeric_limits<double>::infinity() : r.summary->mean;
    } catch (const std::exception&) {
      // Exceptions must not escape a parallel region; treat the point as failed.
      pt.diverged = true;
      pt.mae_star = std::numeric_limits<double>::infinity();
    }
  }

  std::stable_sort(points.begin(), points.end(), [](const GridPoint& a, const GridPoint& b) {
    if (a.diverged != b.diverged) return !a.diverged;
    return a.mae_star < b.mae_star;
  });
  return points;
}

}  // namespace wsnf
