#pragma once

// CSV outputs of the harness. Every file has one header row; the column
// layout is fixed (schema version 1).

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wsnf/experiment.hpp"

namespace wsnf {

inline constexpr int kCsvSchemaVersion = 1;

/// method,min,q1,q2,mean,q3,max
void write_summary_csv(const std::filesystem::path& path, std::span<const ExperimentResult> results);

/// event_index,mae,smoothed_mae (smoothed column empty until the window fills)
void write_trace_csv(const std::filesystem::path& path, const ExperimentResult& result, std::size_t window);

/// horizon,mae
void write_horizon_csv(const std::filesystem::path& path, const ExperimentResult& result);

/// quarter_index,actual,h1..hq (forecast columns empty when none was issued)
void write_forecasts_csv(const std::filesystem::path& path, const ExperimentResult& result, std::size_t q);

/// All four files into `dir` (created if missing).
void write_run_outputs(const std::filesystem::path& dir, const ExperimentResult& result, std::size_t q,
                       std::size_t window);

/// rank,eta0,gamma,epsilon,mae_star,events,diverged
void write_grid_csv(const std::filesystem::path& path, std::span<const GridPoint> points);

}  // namespace wsnf
