#pragma once

// Fixed-capacity perceptron / one-hidden-layer MLP trained by sequential
// on-line back-propagation. All state lives in one contiguous arena sized at
// construction, so the persistent memory ledger is just `arena.size()`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wsnf/error.hpp"

namespace wsnf {

struct AnnTopology {
  std::size_t p = 8;  // inputs
  std::size_t h = 0;  // hidden units, 0 selects the perceptron
  std::size_t q = 8;  // outputs

  bool is_perceptron() const noexcept { return h == 0; }

  void validate() const {
    if (p < 1 || q < 1) throw Error(Errc::rejected_input, "topology needs p >= 1 and q >= 1");
  }

  /// Real-number budget as itemised for the embedded target:
  /// p*q + p + 3q for the perceptron, p*h + h*q + 2p + 3h + 2q for the MLP.
  std::size_t budget_reals() const noexcept {
    if (is_perceptron()) return p * q + p + 3 * q;
    return p * h + h * q + 2 * p + 3 * h + 2 * q;
  }

  /// Reals actually held by BasicAnnModel: weights, biases, input copy,
  /// activations, output and gradient vectors. Equals budget_reals() for the
  /// perceptron and for any MLP with p == q.
  std::size_t storage_reals() const noexcept {
    if (is_perceptron()) return p * q + q + p + q + q;
    return h * p + h + q * h + q + p + h + q + q + h;
  }
};

struct LearnSchedule {
  double eta0 = 0.01;    // initial learning rate
  double gamma = 0.0;    // learning-rate decay exponent
  double epsilon = 0.0;  // weight decay

  void validate() const {
    if (!(eta0 > 0.0) || !(gamma >= 0.0) || !(epsilon >= 0.0) || !std::isfinite(eta0) ||
        !std::isfinite(gamma) || !std::isfinite(epsilon)) {
      throw Error(Errc::rejected_input, "schedule needs eta0 > 0, gamma >= 0, epsilon >= 0");
    }
  }

  /// eta0 / (1 + alpha * eta0)^gamma
  double learning_rate(std::uint64_t alpha) const {
    return eta0 / std::pow(1.0 + static_cast<double>(alpha) * eta0, gamma);
  }
};

template <class Real>
inline Real logistic(Real z) {
  using std::exp;  // ADL picks up multiprecision overloads
  return Real(1) / (Real(1) + exp(-z));
}

enum class WeightInit { zero, uniform_fan_in };

template <class Real>
class BasicAnnModel {
 public:
  using value_type = Real;

  /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, biases zero.
  BasicAnnModel(AnnTopology topology, std::uint64_t seed, WeightInit init = WeightInit::uniform_fan_in)
      : topo_(topology) {
    topo_.validate();
    layout();
    arena_.assign(topo_.storage_reals(), Real(0));
    if (init == WeightInit::uniform_fan_in) randomize(seed);
  }

  static BasicAnnModel zeros(AnnTopology topology) { return BasicAnnModel(topology, 0, WeightInit::zero); }

  const AnnTopology& topology() const noexcept { return topo_; }
  std::uint64_t alpha() const noexcept { return alpha_; }
  std::size_t persistent_reals() const noexcept { return arena_.size(); }
  std::size_t persistent_bytes() const noexcept { return arena_.size() * sizeof(Real); }

  // First layer: (h or q) x p, row-major. Second layer: q x h (empty for the perceptron).
  std::span<Real> w1() noexcept { return slice(off_w1_, rows1() * topo_.p); }
  std::span<Real> b1() noexcept { return slice(off_b1_, rows1()); }
  std::span<Real> w2() noexcept { return slice(off_w2_, topo_.h * (topo_.h ? topo_.q : 0)); }
  std::span<Real> b2() noexcept { return slice(off_b2_, topo_.h ? topo_.q : 0); }
  std::span<Real> input() noexcept { return slice(off_x_, topo_.p); }
  std::span<const Real> w1() const noexcept { return slice(off_w1_, rows1() * topo_.p); }
  std::span<const Real> b1() const noexcept { return slice(off_b1_, rows1()); }
  std::span<const Real> w2() const noexcept { return slice(off_w2_, topo_.h * (topo_.h ? topo_.q : 0)); }
  std::span<const Real> b2() const noexcept { return slice(off_b2_, topo_.h ? topo_.q : 0); }
  std::span<const Real> input() const noexcept { return slice(off_x_, topo_.p); }
  std::span<const Real> hidden() const noexcept { return slice(off_hid_, topo_.h); }
  std::span<const Real> output() const noexcept { return slice(off_y_, topo_.q); }
  std::span<const Real> delta_out() const noexcept { return slice(off_dout_, topo_.q); }
  std::span<const Real> delta_hidden() const noexcept { return slice(off_dhid_, topo_.h); }
  std::span<const Real> arena() const noexcept { return arena_; }

  /// Copies x into the input buffer and runs the forward step.
  std::span<const Real> forward(std::span<const Real> x) {
    if (x.size() != topo_.p) throw Error(Errc::rejected_input, "forward: input length != p");
    auto in = input();
    if (x.data() != in.data()) std::copy(x.begin(), x.end(), in.begin());
    return forward_input();
  }

  /// Forward step on whatever is currently in input().
  std::span<const Real> forward_input() noexcept {
    const std::size_t p = topo_.p;
    const Real* x = arena_.data() + off_x_;
    const Real* w1p = arena_.data() + off_w1_;
    const Real* b1p = arena_.data() + off_b1_;
    Real* y = arena_.data() + off_y_;
    if (topo_.is_perceptron()) {
      for (std::size_t i = 0; i < topo_.q; ++i) y[i] = dot(w1p + i * p, x, p) + b1p[i];
    } else {
      Real* hid = arena_.data() + off_hid_;
      for (std::size_t j = 0; j < topo_.h; ++j) hid[j] = logistic(dot(w1p + j * p, x, p) + b1p[j]);
      const Real* w2p = arena_.data() + off_w2_;
      const Real* b2p = arena_.data() + off_b2_;
      for (std::size_t i = 0; i < topo_.q; ++i) y[i] = dot(w2p + i * topo_.h, hid, topo_.h) + b2p[i];
    }
    return output();
  }

  /// delta_out = y_hat - y; for the MLP also delta_hidden = h(1-h) * (W2^T delta_out).
  /// `y` may alias delta_out.
  void backprop(std::span<const Real> y) {
    if (y.size() != topo_.q) throw Error(Errc::rejected_input, "backprop: target length != q");
    const Real* yh = arena_.data() + off_y_;
    Real* dout = arena_.data() + off_dout_;
    for (std::size_t i = 0; i < topo_.q; ++i) dout[i] = yh[i] - y[i];
    if (topo_.is_perceptron()) return;
    const Real* hid = arena_.data() + off_hid_;
    const Real* w2p = arena_.data() + off_w2_;
    Real* dhid = arena_.data() + off_dhid_;
    for (std::size_t j = 0; j < topo_.h; ++j) {
      Real acc(0);
      for (std::size_t i = 0; i < topo_.q; ++i) acc += w2p[i * topo_.h + j] * dout[i];
      dhid[j] = hid[j] * (Real(1) - hid[j]) * acc;
    }
  }

  /// Target staging area for allocation-free training: callers may write the
  /// desired output here and then call backprop(target_buffer()).
  std::span<Real> target_buffer() noexcept { return slice(off_dout_, topo_.q); }

  /// W <- W - eta (delta (x) h + eps W); b <- b - eta delta; alpha += 1.
  void update(const LearnSchedule& schedule) {
    const Real eta = static_cast<Real>(schedule.learning_rate(alpha_));
    const Real eps = static_cast<Real>(schedule.epsilon);
    if (topo_.is_perceptron()) {
      step_layer(off_w1_, off_b1_, off_dout_, off_x_, topo_.q, topo_.p, eta, eps);
    } else {
      step_layer(off_w2_, off_b2_, off_dout_, off_hid_, topo_.q, topo_.h, eta, eps);
      step_layer(off_w1_, off_b1_, off_dhid_, off_x_, topo_.h, topo_.p, eta, eps);
    }
    ++alpha_;
    for (std::size_t i = 0; i < off_x_; ++i) {
      if (!std::isfinite(static_cast<double>(arena_[i]))) {
        throw Error(Errc::model_diverged, "non-finite weight after update " + std::to_string(alpha_));
      }
    }
  }

 private:
  std::size_t rows1() const noexcept { return topo_.is_perceptron() ? topo_.q : topo_.h; }

  void layout() {
    const std::size_t r1 = rows1();
    off_w1_ = 0;
    off_b1_ = off_w1_ + r1 * topo_.p;
    off_w2_ = off_b1_ + r1;
    off_b2_ = off_w2_ + (topo_.h ? topo_.q * topo_.h : 0);
    off_x_ = off_b2_ + (topo_.h ? topo_.q : 0);
    off_hid_ = off_x_ + topo_.p;
    off_y_ = off_hid_ + topo_.h;
    off_dout_ = off_y_ + topo_.q;
    off_dhid_ = off_dout_ + topo_.q;
  }

  void randomize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto fill = [&rng](std::span<Real> w, std::size_t fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : w) v = static_cast<Real>(dist(rng));
    };
    fill(w1(), topo_.p);
    if (!topo_.is_perceptron()) fill(w2(), topo_.h);
  }

  void step_layer(std::size_t off_w, std::size_t off_b, std::size_t off_delta, std::size_t off_in,
                  std::size_t rows, std::size_t cols, Real eta, Real eps) noexcept {
    Real* w = arena_.data() + off_w;
    Real* b = arena_.data() + off_b;
    const Real* d = arena_.data() + off_delta;
    const Real* in = arena_.data() + off_in;
    for (std::size_t r = 0; r < rows; ++r) {
      Real* row = w + r * cols;
      for (std::size_t c = 0; c < cols; ++c) row[c] -= eta * (d[r] * in[c] + eps * row[c]);
      b[r] -= eta * d[r];
    }
  }

  static Real dot(const Real* a, const Real* b, std::size_t n) noexcept {
    Real acc(0);
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
  }

  std::span<Real> slice(std::size_t off, std::size_t n) noexcept { return {arena_.data() + off, n}; }
  std::span<const Real> slice(std::size_t off, std::size_t n) const noexcept { return {arena_.data() + off, n}; }

  AnnTopology topo_;
  std::vector<Real> arena_;
  std::uint64_t alpha_ = 0;
  std::size_t off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0, off_x_ = 0, off_hid_ = 0, off_y_ = 0,
              off_dout_ = 0, off_dhid_ = 0;
};

/// 32-bit model used by the streaming engine.
using AnnModel = BasicAnnModel<float>;

template <class Real>
struct AnnGradients {
  std::vector<Real> w1, b1, w2, b2;
};

/// Loss gradients implied by the deltas of the last backprop call, with the
/// weight-decay term folded into the weight gradients.
template <class Real>
AnnGradients<Real> loss_gradients(const BasicAnnModel<Real>& m, double epsilon = 0.0) {
  const auto& t = m.topology();
  const Real eps = static_cast<Real>(epsilon);
  AnnGradients<Real> g;
  auto outer = [eps](std::span<const Real> d, std::span<const Real> in, std::span<const Real> w,
                     std::vector<Real>& out) {
    out.resize(d.size() * in.size());
    for (std::size_t r = 0; r < d.size(); ++r)
      for (std::size_t c = 0; c < in.size(); ++c)
        out[r * in.size() + c] = d[r] * in[c] + eps * w[r * in.size() + c];
  };
  if (t.is_perceptron()) {
    outer(m.delta_out(), m.input(), m.w1(), g.w1);
    g.b1.assign(m.delta_out().begin(), m.delta_out().end());
  } else {
    outer(m.delta_hidden(), m.input(), m.w1(), g.w1);
    g.b1.assign(m.delta_hidden().begin(), m.delta_hidden().end());
    outer(m.delta_out(), m.hidden(), m.w2(), g.w2);
    g.b2.assign(m.delta_out().begin(), m.delta_out().end());
  }
  return g;
}

/// Plain squared-error term 0.5 * ||y_hat - y||^2.
template <class Real>
Real squared_error(std::span<const Real> y_hat, std::span<const Real> y) {
  if (y_hat.size() != y.size()) throw Error(Errc::rejected_input, "squared_error: length mismatch");
  Real acc(0);
  for (std::size_t i = 0; i < y.size(); ++i) acc += (y_hat[i] - y[i]) * (y_hat[i] - y[i]);
  return acc / Real(2);
}

}  // namespace wsnf
