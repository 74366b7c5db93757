#include "wsnf/stream.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace wsnf {

void SinusConfig::validate() const {
  if (!(dt_min > 0.0) || !(dt_min <= dt_max)) throw Error(Errc::rejected_input, "sinus: need 0 < dt_min <= dt_max");
  if (!(value_min < value_max)) throw Error(Errc::rejected_input, "sinus: need value_min < value_max");
  if (!(noise_half_width >= 0.0)) throw Error(Errc::rejected_input, "sinus: negative noise width");
  if (!(period_h > 0.0)) throw Error(Errc::rejected_input, "sinus: period must be > 0");
  if (nodes == 0) throw Error(Errc::rejected_input, "sinus: need at least one node");
}

double SinusConfig::clean_value(double t) const {
  const double mid = 0.5 * (value_min + value_max);
  const double amp = 0.5 * (value_max - value_min);
  return mid + amp * std::sin(2.0 * std::numbers::pi * t / (period_h * 3600.0) + phase);
}

SinusSource::SinusSource(SinusConfig cfg) : cfg_(cfg), rng_(cfg.seed), t_(cfg.t0) { cfg_.validate(); }

std::optional<TimedSample> SinusSource::next() {
  if (emitted_ >= cfg_.n_frames) return std::nullopt;
  if (emitted_ > 0) {
    std::uniform_real_distribution<double> dt(cfg_.dt_min, cfg_.dt_max);
    t_ += cfg_.dt_min == cfg_.dt_max ? cfg_.dt_min : dt(rng_);
  }
  double v = cfg_.clean_value(t_);
  if (cfg_.noise_half_width > 0.0) {
    std::uniform_real_distribution<double> noise(-cfg_.noise_half_width, cfg_.noise_half_width);
    v += noise(rng_);
  }
  TimedSample s{t_, v, static_cast<std::uint32_t>(emitted_ % cfg_.nodes)};
  ++emitted_;
  return s;
}

std::optional<TimedSample> VectorSource::next() {
  if (pos_ >= frames_.size()) return std::nullopt;
  return frames_[pos_++];
}

DatasetSpec DatasetSpec::uci_sml2010(std::string path) {
  DatasetSpec s;
  s.path = std::move(path);
  s.delimiter = '\0';
  s.date_col = 0;
  s.time_col = 1;
  s.value_col = 2;
  s.step_s = 900.0;
  s.limit = 2688;
  s.expected_rows = 2688;
  return s;
}

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == '\0') {
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
  } else {
    std::string tok;
    std::istringstream in(line);
    while (std::getline(in, tok, delim)) out.push_back(tok);
  }
  for (auto& tok : out) {
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
    while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
  }
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Seconds since the epoch for "dd/mm/yyyy" and "HH:MM[:SS]".
std::optional<double> parse_timestamp(const std::string& date, const std::string& time) {
  const auto d1 = date.find('/');
  const auto d2 = date.find('/', d1 == std::string::npos ? d1 : d1 + 1);
  if (d1 == std::string::npos || d2 == std::string::npos) return std::nullopt;
  const auto day = parse_int(std::string_view(date).substr(0, d1));
  const auto mon = parse_int(std::string_view(date).substr(d1 + 1, d2 - d1 - 1));
  const auto yr = parse_int(std::string_view(date).substr(d2 + 1));
  if (!day || !mon || !yr) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*yr}, std::chrono::month{static_cast<unsigned>(*mon)},
                                        std::chrono::day{static_cast<unsigned>(*day)}};
  if (!ymd.ok()) return std::nullopt;

  int hms[3] = {0, 0, 0};
  std::size_t field = 0, start = 0;
  for (std::size_t i = 0; i <= time.size(); ++i) {
    if (i == time.size() || time[i] == ':') {
      if (field >= 3) return std::nullopt;
      const auto v = parse_int(std::string_view(time).substr(start, i - start));
      if (!v) return std::nullopt;
      hms[field++] = *v;
      start = i + 1;
    }
  }
  if (field < 2) return std::nullopt;
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + hms[0] * 3600.0 + hms[1] * 60.0 + hms[2];
}

}  // namespace

std::vector<TimedSample> read_dataset(const DatasetSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw Error(Errc::ingestion, "cannot open " + spec.path);
  if (spec.value_col < 0) throw Error(Errc::ingestion, "value column must be >= 0");
  const bool timestamped = spec.date_col >= 0;
  if (timestamped && spec.time_col < 0) throw Error(Errc::ingestion, "date column given without time column");

  std::vector<TimedSample> out;
  std::optional<double> t_first;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  const int needed = std::max({spec.value_col, spec.date_col, spec.time_col});
  while (std::getline(in, line)) {
    ++lineno;
    if (spec.limit && out.size() >= *spec.limit) break;
    const auto fields = split(line, spec.delimiter);
    if (fields.empty() || fields.front().starts_with('#')) continue;
    const std::string where = spec.path + ":" + std::to_string(lineno);
    if (static_cast<int>(fields.size()) <= needed) {
      if (out.empty() && !header_seen) {
        header_seen = true;
        continue;
      }
      throw Error(Errc::ingestion, where + ": missing column " + std::to_string(needed));
    }
    const auto v = parse_double(fields[static_cast<std::size_t>(spec.value_col)]);
    if (!v) {
      if (out.empty() && !header_seen) {
        header_seen = true;
        continue;
      }
      throw Error(Errc::ingestion, where + ": bad value '" + fields[static_cast<std::size_t>(spec.value_col)] + "'");
    }
    double t = static_cast<double>(out.size()) * spec.step_s;
    if (timestamped) {
      const auto ts = parse_timestamp(fields[static_cast<std::size_t>(spec.date_col)],
                                      fields[static_cast<std::size_t>(spec.time_col)]);
      if (!ts) throw Error(Errc::ingestion, where + ": bad timestamp");
      if (!t_first) t_first = *ts;
      const double rel = *ts - *t_first;
      if (std::abs(rel - t) > 1e-6) {
        throw Error(Errc::ingestion, where + ": spacing violation, expected t=" + std::to_string(t) +
                                         " s after the first row, got " + std::to_string(rel));
      }
    }
    out.push_back(TimedSample{t, *v, 0});
  }
  if (out.empty()) throw Error(Errc::ingestion, spec.path + ": no samples");
  if (spec.expected_rows && out.size() != *spec.expected_rows) {
    throw Error(Errc::ingestion, spec.path + ": expected " + std::to_string(*spec.expected_rows) + " rows, got " +
                                     std::to_string(out.size()));
  }
  return out;
}

void LossModel::validate() const {
  if (!(drop_prob >= 0.0 && drop_prob <= 1.0)) throw Error(Errc::rejected_input, "drop probability outside [0,1]");
  if (burst_quarters < 0) throw Error(Errc::rejected_input, "negative burst length");
  if (!(quarter_s > 0.0)) throw Error(Errc::rejected_input, "quarter length must be > 0");
}

LossInjector::LossInjector(std::unique_ptr<FrameSource> inner, LossModel model)
    : inner_(std::move(inner)), model_(model), rng_(model.seed) {
  model_.validate();
}

std::optional<TimedSample> LossInjector::next() {
  const double burst_end = model_.burst_start_s + static_cast<double>(model_.burst_quarters) * model_.quarter_s;
  std::bernoulli_distribution drop(model_.drop_prob);
  while (auto s = inner_->next()) {
    const bool in_burst = model_.burst_quarters > 0 && s->t >= model_.burst_start_s && s->t < burst_end;
    // Draw for every frame so the random sequence does not depend on the burst.
    const bool lost = drop(rng_);
    if (in_burst || lost) {
      ++dropped_;
      continue;
    }
    return s;
  }
  return std::nullopt;
}

}  // namespace wsnf
