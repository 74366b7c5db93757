#pragma once

// Recursive Bayesian linear regression used as the accuracy reference. One
// independent linear model per forecast horizon (one column of W each), all
// sharing the design matrix. Memory is not constrained here.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "wsnf/pipeline.hpp"

namespace wsnf {

struct BayesState {
  std::size_t p = 0;
  std::size_t q = 0;
  Eigen::MatrixXd W;   // p x q, column i predicts horizon i
  Eigen::MatrixXd V;   // p x p covariance factor shared by all columns
  Eigen::VectorXd s2;  // per-column error variance
  double n0 = 0.0;     // pooled degrees of freedom behind s2
  bool bootstrapped = false;
};

/// Non-informative fit on n >= p+1 rows: W = (X'X)^-1 X'Y, V = (X'X)^-1,
/// s2_i = |Y_i - X W_i|^2 / (n - p). Throws singular_design when X is rank deficient.
BayesState bootstrap_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Informative-prior update treating the previous estimate as p extra
/// observations. Per column the new estimate solves the weighted least-squares
/// system on X* = [Xt; I], Y* = [Yt_i; W_i], Sigma = blockdiag(I, V s2_i).
BayesState informative_update(const BayesState& state, const Eigen::MatrixXd& Xt, const Eigen::MatrixXd& Yt);

/// x' W, one value per horizon.
Eigen::VectorXd predict(const BayesState& state, const Eigen::VectorXd& x);

/// (I + Xp V Xp') s2_i for every output i.
std::vector<Eigen::MatrixXd> predictive_variance(const BayesState& state, const Eigen::MatrixXd& Xp);

struct BayesOptions {
  std::size_t p = 8;
  std::size_t q = 8;
  bool intercept = false;
  bool differenced = false;  // fit on first differences and dedifferentiate forecasts
};

/// Quarter-level stage for BasicPipeline: builds lagged design rows from the
/// quarter-mean series, bootstraps on p+1 rows, then updates once per quarter.
class BayesForecaster {
 public:
  explicit BayesForecaster(BayesOptions options);

  std::optional<Forecast> on_quarter(double mean, std::int64_t quarter);
  void reset();

  std::size_t horizon() const noexcept { return opt_.q; }
  const BayesOptions& options() const noexcept { return opt_; }
  const BayesState& state() const noexcept { return state_; }
  std::uint64_t updates() const noexcept { return updates_; }
  std::uint64_t skipped_updates() const noexcept { return skipped_; }

 private:
  Eigen::VectorXd design_row(std::size_t first) const;

  BayesOptions opt_;
  BayesState state_;
  std::deque<double> history_;  // modelled series (means or differences)
  std::optional<double> last_mean_;
  std::vector<Eigen::VectorXd> pending_x_;
  std::vector<Eigen::VectorXd> pending_y_;
  std::uint64_t updates_ = 0;
  std::uint64_t skipped_ = 0;
};

}  // namespace wsnf
