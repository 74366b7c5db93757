#include "wsnf/bayes.hpp"

#include <cmath>
#include <string>

namespace wsnf {

namespace {

void require_ready(const BayesState& s) {
  if (!s.bootstrapped) throw Error(Errc::not_ready, "baseline has not been bootstrapped");
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

BayesState bootstrap_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  if (p == 0 || Y.cols() == 0) throw Error(Errc::rejected_input, "bootstrap_fit: empty design");
  if (static_cast<std::size_t>(Y.rows()) != n) throw Error(Errc::rejected_input, "bootstrap_fit: row mismatch");
  if (n <= p) throw Error(Errc::rejected_input, "bootstrap_fit needs n > p rows");
  if (!X.allFinite() || !Y.allFinite()) throw Error(Errc::rejected_input, "bootstrap_fit: non-finite data");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (static_cast<std::size_t>(qr.rank()) < p) {
    throw Error(Errc::singular_design, "design rank " + std::to_string(qr.rank()) + " < " + std::to_string(p));
  }

  BayesState s;
  s.p = p;
  s.q = static_cast<std::size_t>(Y.cols());
  s.W = qr.solve(Y);

  // (X'X)^-1 = P R^-1 R^-T P' from the pivoted factorisation.
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
  const auto& P = qr.colsPermutation();
  s.V = P * (Rinv * Rinv.transpose()) * P.transpose();
  symmetrize(s.V);

  const Eigen::MatrixXd resid = Y - X * s.W;
  const double dof = static_cast<double>(n - p);
  s.s2 = resid.colwise().squaredNorm().transpose() / dof;
  s.n0 = dof;
  s.bootstrapped = true;
  return s;
}

BayesState informative_update(const BayesState& state, const Eigen::MatrixXd& Xt, const Eigen::MatrixXd& Yt) {
  require_ready(state);
  const Eigen::Index p = static_cast<Eigen::Index>(state.p);
  const Eigen::Index n1 = Xt.rows();
  if (n1 < 1) throw Error(Errc::rejected_input, "informative_update needs at least one row");
  if (Xt.cols() != p || Yt.rows() != n1 || Yt.cols() != static_cast<Eigen::Index>(state.q)) {
    throw Error(Errc::rejected_input, "informative_update: shape mismatch");
  }
  if (!Xt.allFinite() || !Yt.allFinite()) throw Error(Errc::rejected_input, "informative_update: non-finite data");
  for (Eigen::Index i = 0; i < state.s2.size(); ++i) {
    if (!(state.s2[i] > 0.0) || !std::isfinite(state.s2[i])) {
      throw Error(Errc::degenerate_prior, "prior variance of column " + std::to_string(i) + " is zero");
    }
  }

  BayesState next = state;
  const Eigen::MatrixXd VXt = state.V * Xt.transpose();  // p x n1
  const Eigen::MatrixXd XVXt = Xt * VXt;                 // n1 x n1
  const Eigen::MatrixXd I_n = Eigen::MatrixXd::Identity(n1, n1);

  // Gain form of the weighted least-squares solution; it avoids inverting V.
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(state.q); ++i) {
    const double s2 = state.s2[i];
    const Eigen::LDLT<Eigen::MatrixXd> S(XVXt * s2 + I_n);
    if (S.info() != Eigen::Success) throw Error(Errc::singular_design, "innovation system is singular");
    const Eigen::VectorXd innovation = Yt.col(i) - Xt * state.W.col(i);
    next.W.col(i) = state.W.col(i) + VXt * s2 * S.solve(innovation);
  }

  const Eigen::LDLT<Eigen::MatrixXd> S1(XVXt + I_n);
  if (S1.info() != Eigen::Success) throw Error(Errc::singular_design, "covariance update is singular");
  next.V = state.V - VXt * S1.solve(VXt.transpose());
  symmetrize(next.V);

  const double dof1 = static_cast<double>(n1 > p ? n1 - p : n1);
  const Eigen::MatrixXd resid = Yt - Xt * next.W;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(state.q); ++i) {
    const double s1 = resid.col(i).squaredNorm() / dof1;
    next.s2[i] = (state.n0 * state.s2[i] + static_cast<double>(n1) * s1) / (state.n0 + static_cast<double>(n1));
  }
  next.n0 = state.n0 + static_cast<double>(n1);
  return next;
}

Eigen::VectorXd predict(const BayesState& state, const Eigen::VectorXd& x) {
  require_ready(state);
  if (x.size() != static_cast<Eigen::Index>(state.p)) throw Error(Errc::rejected_input, "predict: length != p");
  return state.W.transpose() * x;
}

std::vector<Eigen::MatrixXd> predictive_variance(const BayesState& state, const Eigen::MatrixXd& Xp) {
  require_ready(state);
  if (Xp.cols() != static_cast<Eigen::Index>(state.p)) throw Error(Errc::rejected_input, "predictive_variance: cols != p");
  const Eigen::MatrixXd base = Eigen::MatrixXd::Identity(Xp.rows(), Xp.rows()) + Xp * state.V * Xp.transpose();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(state.q);
  for (std::size_t i = 0; i < state.q; ++i) out.push_back(base * state.s2[static_cast<Eigen::Index>(i)]);
  return out;
}

BayesForecaster::BayesForecaster(BayesOptions options) : opt_(options) {
  if (opt_.p < 1 || opt_.q < 1) throw Error(Errc::rejected_input, "baseline needs p >= 1 and q >= 1");
}

Eigen::VectorXd BayesForecaster::design_row(std::size_t first) const {
  const auto cols = static_cast<Eigen::Index>(opt_.p + (opt_.intercept ? 1 : 0));
  Eigen::VectorXd x(cols);
  for (std::size_t j = 0; j < opt_.p; ++j) x[static_cast<Eigen::Index>(j)] = history_[first + j];
  if (opt_.intercept) x[cols - 1] = 1.0;
  return x;
}

std::optional<Forecast> BayesForecaster::on_quarter(double mean, std::int64_t quarter) {
  if (!std::isfinite(mean)) throw Error(Errc::rejected_input, "non-finite quarter mean");
  if (opt_.differenced) {
    const std::optional<double> prev = last_mean_;
    last_mean_ = mean;
    if (!prev) return std::nullopt;
    history_.push_back(mean - *prev);
  } else {
    last_mean_ = mean;
    history_.push_back(mean);
  }
  const std::size_t window = opt_.p + opt_.q;
  while (history_.size() > window) history_.pop_front();

  if (history_.size() == window) {
    Eigen::VectorXd x = design_row(0);
    Eigen::VectorXd y(static_cast<Eigen::Index>(opt_.q));
    for (std::size_t j = 0; j < opt_.q; ++j) y[static_cast<Eigen::Index>(j)] = history_[opt_.p + j];

    if (!state_.bootstrapped) {
      pending_x_.push_back(std::move(x));
      pending_y_.push_back(std::move(y));
      const std::size_t need = static_cast<std::size_t>(pending_x_.front().size()) + 1;
      if (pending_x_.size() >= need) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(need), pending_x_.front().size());
        Eigen::MatrixXd Y(static_cast<Eigen::Index>(need), static_cast<Eigen::Index>(opt_.q));
        for (std::size_t r = 0; r < need; ++r) {
          X.row(static_cast<Eigen::Index>(r)) = pending_x_[r].transpose();
          Y.row(static_cast<Eigen::Index>(r)) = pending_y_[r].transpose();
        }
        try {
          state_ = bootstrap_fit(X, Y);
          pending_x_.clear();
          pending_y_.clear();
        } catch (const Error& e) {
          if (e.code() != Errc::singular_design) throw;
          // Slide the window and retry on the next quarter.
          pending_x_.erase(pending_x_.begin());
          pending_y_.erase(pending_y_.begin());
        }
      }
    } else {
      try {
        state_ = informative_update(state_, x.transpose(), y.transpose());
        ++updates_;
      } catch (const Error& e) {
        // A zero prior variance is the infinitely confident limit: the posterior stays put.
        if (e.code() != Errc::degenerate_prior) throw;
        ++skipped_;
      }
    }
  }

  if (!state_.bootstrapped || history_.size() < opt_.p) return std::nullopt;
  const Eigen::VectorXd y_hat = predict(state_, design_row(history_.size() - opt_.p));
  Forecast f;
  f.origin_quarter = quarter;
  f.values.resize(opt_.q);
  double acc = mean;
  for (std::size_t i = 0; i < opt_.q; ++i) {
    const double v = y_hat[static_cast<Eigen::Index>(i)];
    f.values[i] = opt_.differenced ? (acc += v) : v;
  }
  return f;
}

void BayesForecaster::reset() {
  history_.clear();
  last_mean_.reset();
  pending_x_.clear();
  pending_y_.clear();
}

}  // namespace wsnf
