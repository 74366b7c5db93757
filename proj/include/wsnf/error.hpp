#pragma once

#include <stdexcept>
#include <string>

namespace wsnf {

enum class Errc {
  rejected_input,
  non_monotonic_time,
  model_diverged,
  singular_design,
  degenerate_prior,
  not_ready,
  ingestion,
  empty_set,
};

const char* to_string(Errc code) noexcept;

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::rejected_input: return "rejected input";
    case Errc::non_monotonic_time: return "non-monotonic time";
    case Errc::model_diverged: return "model diverged";
    case Errc::singular_design: return "singular design";
    case Errc::degenerate_prior: return "degenerate prior";
    case Errc::not_ready: return "not ready";
    case Errc::ingestion: return "ingestion error";
    case Errc::empty_set: return "empty set";
  }
  return "unknown";
}

}  // namespace wsnf
