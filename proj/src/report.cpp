#include "wsnf/report.hpp"

#include <fstream>

namespace wsnf {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ingestion, "cannot write " + path.string());
  out.precision(9);
  return out;
}

}  // namespace

void write_summary_csv(const std::filesystem::path& path, std::span<const ExperimentResult> results) {
  auto out = open_csv(path);
  out << "method,min,q1,q2,mean,q3,max\n";
  for (const auto& r : results) {
    if (!r.summary) continue;
    const Summary& s = *r.summary;
    out << r.method << ',' << s.min << ',' << s.q1 << ',' << s.median << ',' << s.mean << ',' << s.q3 << ','
        << s.max << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const ExperimentResult& result, std::size_t window) {
  auto out = open_csv(path);
  out << "event_index,mae,smoothed_mae\n";
  for (std::size_t i = 0; i < result.event_mae.size(); ++i) {
    out << i << ',' << result.event_mae[i] << ',';
    if (window >= 1 && i + 1 >= window && i + 1 - window < result.smoothed_mae.size()) {
      out << result.smoothed_mae[i + 1 - window];
    }
    out << '\n';
  }
}

void write_horizon_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = open_csv(path);
  out << "horizon,mae\n";
  for (std::size_t z = 0; z < result.mae_by_horizon.size(); ++z) out << z + 1 << ',' << result.mae_by_horizon[z] << '\n';
}

void write_forecasts_csv(const std::filesystem::path& path, const ExperimentResult& result, std::size_t q) {
  auto out = open_csv(path);
  out << "quarter_index,actual";
  for (std::size_t z = 1; z <= q; ++z) out << ",h" << z;
  out << '\n';
  for (const auto& row : result.quarters) {
    out << row.index << ',' << row.actual;
    for (std::size_t z = 0; z < q; ++z) {
      out << ',';
      if (z < row.forecast.size()) out << row.forecast[z];
    }
    out << '\n';
  }
}

void write_run_outputs(const std::filesystem::path& dir, const ExperimentResult& result, std::size_t q,
                       std::size_t window) {
  std::filesystem::create_directories(dir);
  write_summary_csv(dir / "summary.csv", std::span<const ExperimentResult>(&result, 1));
  write_trace_csv(dir / "mae_star_trace.csv", result, window);
  write_horizon_csv(dir / "mae_by_horizon.csv", result);
  write_forecasts_csv(dir / "forecasts.csv", result, q);
}

void write_grid_csv(const std::filesystem::path& path, std::span<const GridPoint> points) {
  auto out = open_csv(path);
  out << "rank,eta0,gamma,epsilon,mae_star,events,diverged\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    out << i + 1 << ',' << pt.schedule.eta0 << ',' << pt.schedule.gamma << ',' << pt.schedule.epsilon << ','
        << pt.mae_star << ',' << pt.events << ',' << (pt.diverged ? 1 : 0) << '\n';
  }
}

}  // namespace wsnf
