#pragma once

// Pull-based frame sources: synthetic noisy sinus with random inter-arrival,
// a delimited-text dataset reader, and a frame-loss filter.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wsnf/pipeline.hpp"

namespace wsnf {

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<TimedSample> next() = 0;
};

struct SinusConfig {
  std::uint64_t n_frames = 1'000'000;
  double value_min = 10.0;
  double value_max = 30.0;
  double noise_half_width = 1.5;
  double dt_min = 20.0;  // seconds
  double dt_max = 40.0;
  double period_h = 24.0;
  double phase = 0.0;  // radians
  double t0 = 0.0;
  std::uint32_t nodes = 1;  // > 1 tags frames with a rotating node id
  std::uint64_t seed = 1;

  void validate() const;
  double clean_value(double t) const;
};

class SinusSource final : public FrameSource {
 public:
  explicit SinusSource(SinusConfig cfg);
  std::optional<TimedSample> next() override;

 private:
  SinusConfig cfg_;
  std::mt19937_64 rng_;
  std::uint64_t emitted_ = 0;
  double t_ = 0.0;
};

class VectorSource final : public FrameSource {
 public:
  explicit VectorSource(std::vector<TimedSample> frames) : frames_(std::move(frames)) {}
  std::optional<TimedSample> next() override;

 private:
  std::vector<TimedSample> frames_;
  std::size_t pos_ = 0;
};

struct DatasetSpec {
  std::string path;
  char delimiter = '\0';  // '\0' splits on runs of whitespace
  int date_col = -1;      // dd/mm/yyyy; -1 means implicit fixed step
  int time_col = -1;      // HH:MM[:SS]
  int value_col = 0;
  double step_s = 900.0;
  std::optional<std::size_t> limit;          // keep only the first N rows
  std::optional<std::size_t> expected_rows;  // checked after `limit`

  /// UCI SML2010 layout (NEW-DATA-1.T15.txt): whitespace separated, date and
  /// time in the first two columns, dining-room indoor temperature in column 2,
  /// first 2688 quarters.
  static DatasetSpec uci_sml2010(std::string path);
};

/// Reads the whole file; emitted samples are at t = i * step_s.
std::vector<TimedSample> read_dataset(const DatasetSpec& spec);

struct LossModel {
  double drop_prob = 0.0;
  double burst_start_s = 0.0;
  std::int64_t burst_quarters = 0;  // 0 disables the burst
  double quarter_s = 900.0;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Drops frames: every frame inside the burst window, plus each remaining
/// frame independently with drop_prob. Never reorders.
class LossInjector final : public FrameSource {
 public:
  LossInjector(std::unique_ptr<FrameSource> inner, LossModel model);
  std::optional<TimedSample> next() override;
  std::uint64_t dropped() const noexcept { return dropped_; }

 private:
  std::unique_ptr<FrameSource> inner_;
  LossModel model_;
  std::mt19937_64 rng_;
  std::uint64_t dropped_ = 0;
};

}  // namespace wsnf
