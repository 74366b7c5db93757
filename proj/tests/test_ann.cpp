#include "doctest.h"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "wsnf/ann.hpp"
#include "wsnf/pipeline.hpp"

using namespace wsnf;
using Dbl = BasicAnnModel<double>;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

// Loss with weight decay, matching the gradient convention of update().
double objective(Dbl& m, const std::vector<double>& x, const std::vector<double>& y, double eps) {
  const auto yh = m.forward(x);
  double l = squared_error<double>(yh, y);
  double reg = 0.0;
  for (double w : m.w1()) reg += w * w;
  for (double w : m.w2()) reg += w * w;
  return l + 0.5 * eps * reg;
}

}  // namespace

TEST_CASE("logistic") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(0.0f) == 0.5f);
  using mp = boost::multiprecision::cpp_bin_float_50;
  const mp ref = mp(1) / (mp(1) + exp(mp(-1)));
  CHECK(std::abs(logistic(1.0) - ref.convert_to<double>()) < 1e-15);
  CHECK(logistic(-40.0) > 0.0);
  CHECK(logistic(40.0) <= 1.0);
}

TEST_CASE("memory ledger") {
  const AnnTopology lin{8, 0, 8}, mlp{8, 8, 8};
  CHECK(lin.budget_reals() == 96);
  CHECK(lin.storage_reals() == 96);
  CHECK(mlp.budget_reals() == 184);
  CHECK(mlp.storage_reals() == 184);
  CHECK(AnnModel(lin, 1).persistent_reals() == 96);
  CHECK(AnnModel(mlp, 1).persistent_reals() == 184);
  CHECK(AnnModel(mlp, 1).persistent_bytes() == 736);

  TrainForecast tf(AnnModel(mlp, 1), LearnSchedule{});
  CHECK(tf.ring().capacity() == 16);
  CHECK(tf.ring().persistent_bytes() == 64);
  CHECK(tf.persistent_bytes() == 800);

  SUBCASE("itemised storage when p != q") {
    const AnnTopology t{4, 8, 2};
    // W1, b1, W2, b2, x, hidden, y_hat, delta_out, delta_hidden
    CHECK(t.storage_reals() == 8 * 4 + 8 + 2 * 8 + 2 + 4 + 8 + 2 + 2 + 8);
    CHECK(t.budget_reals() == 4 * 8 + 8 * 2 + 2 * 4 + 3 * 8 + 2 * 2);
    CHECK(AnnModel(t, 3).persistent_reals() == t.storage_reals());
  }
}

TEST_CASE("initialisation") {
  const AnnTopology t{8, 8, 8};
  AnnModel a(t, 42), b(t, 42), c(t, 43);
  CHECK(std::equal(a.arena().begin(), a.arena().end(), b.arena().begin()));
  CHECK_FALSE(std::equal(a.arena().begin(), a.arena().end(), c.arena().begin()));
  const float bound = 1.0f / std::sqrt(8.0f);
  for (float w : a.w1()) CHECK(std::abs(w) <= bound);
  for (float w : a.w2()) CHECK(std::abs(w) <= bound);
  for (float v : a.b1()) CHECK(v == 0.0f);
  for (float v : a.b2()) CHECK(v == 0.0f);
  auto z = AnnModel::zeros(t);
  for (float v : z.arena()) CHECK(v == 0.0f);
}

TEST_CASE("forward") {
  SUBCASE("zero perceptron predicts zero differences") {
    auto m = AnnModel::zeros({8, 0, 8});
    const std::vector<float> x{1, 2, 3, 4, 5, 6, 7, 8};
    for (float y : m.forward(x)) CHECK(y == 0.0f);
  }
  SUBCASE("zero MLP: hidden 0.5, output 0") {
    auto m = AnnModel::zeros({3, 4, 2});
    const std::vector<float> x{1, -2, 3};
    const auto y = m.forward(x);
    for (float h : m.hidden()) CHECK(h == 0.5f);
    for (float v : y) CHECK(v == 0.0f);
  }
  SUBCASE("identity perceptron") {
    auto m = Dbl::zeros({5, 0, 5});
    for (std::size_t i = 0; i < 5; ++i) m.w1()[i * 5 + i] = 1.0;
    const std::vector<double> x{0.5, -1, 2, 3.25, -7};
    const auto y = m.forward(x);
    for (std::size_t i = 0; i < 5; ++i) CHECK(y[i] == x[i]);
  }
  SUBCASE("MLP matches a long-double oracle") {
    std::mt19937_64 rng(9);
    Dbl m({6, 5, 4}, 9);
    for (auto& b : m.b1()) b = random_vec(rng, 1)[0];
    for (auto& b : m.b2()) b = random_vec(rng, 1)[0];
    const auto x = random_vec(rng, 6, -3, 3);
    const auto y = m.forward(x);
    std::vector<long double> h(5);
    for (std::size_t j = 0; j < 5; ++j) {
      long double z = m.b1()[j];
      for (std::size_t i = 0; i < 6; ++i) z += static_cast<long double>(m.w1()[j * 6 + i]) * x[i];
      h[j] = 1.0L / (1.0L + std::exp(-z));
    }
    for (std::size_t o = 0; o < 4; ++o) {
      long double acc = m.b2()[o];
      for (std::size_t j = 0; j < 5; ++j) acc += static_cast<long double>(m.w2()[o * 5 + j]) * h[j];
      CHECK(std::abs(static_cast<long double>(y[o]) - acc) < 1e-14L);
    }
  }
  SUBCASE("input length checked") {
    AnnModel m({8, 0, 8}, 1);
    const std::vector<float> x(7, 0.0f);
    CHECK_THROWS_AS(m.forward(x), Error);
  }
}

TEST_CASE("backprop deltas") {
  SUBCASE("perceptron: delta = y_hat - y") {
    Dbl m({3, 0, 2}, 5);
    const std::vector<double> x{1, 2, 3}, y{0.25, -0.5};
    const auto yh = m.forward(x);
    const std::vector<double> yhat(yh.begin(), yh.end());
    m.backprop(y);
    CHECK(m.delta_out()[0] == yhat[0] - y[0]);
    CHECK(m.delta_out()[1] == yhat[1] - y[1]);
  }
  SUBCASE("MLP hidden delta") {
    Dbl m({3, 4, 2}, 5);
    const std::vector<double> x{0.3, -0.1, 0.7}, y{1.0, -1.0};
    m.forward(x);
    m.backprop(y);
    for (std::size_t j = 0; j < 4; ++j) {
      const double h = m.hidden()[j];
      const double back = m.w2()[0 * 4 + j] * m.delta_out()[0] + m.w2()[1 * 4 + j] * m.delta_out()[1];
      CHECK(m.delta_hidden()[j] == doctest::Approx(h * (1 - h) * back).epsilon(1e-14));
    }
  }
  SUBCASE("exact target gives zero delta") {
    Dbl m({2, 3, 2}, 1);
    const std::vector<double> x{0.1, 0.2};
    const auto yh = m.forward(x);
    const std::vector<double> y(yh.begin(), yh.end());
    m.backprop(y);
    for (double d : m.delta_out()) CHECK(d == 0.0);
    for (double d : m.delta_hidden()) CHECK(d == 0.0);
  }
  SUBCASE("target length checked") {
    AnnModel m({8, 8, 8}, 1);
    const std::vector<float> y(9, 0.0f);
    CHECK_THROWS_AS(m.backprop(y), Error);
  }
}

TEST_CASE("gradients match central differences (double)") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    const AnnTopology t{dim(rng), trial % 2 ? dim(rng) : 0, dim(rng)};
    const double eps = trial % 3 == 0 ? 1e-3 : 0.0;
    Dbl m(t, static_cast<std::uint64_t>(trial));
    const auto x = random_vec(rng, t.p, -2, 2);
    const auto y = random_vec(rng, t.q, -2, 2);
    m.forward(x);
    m.backprop(y);
    const auto g = loss_gradients(m, eps);

    auto check = [&](std::span<double> w, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i], h = 1e-6;
        w[i] = keep + h;
        const double lp = objective(m, x, y, eps);
        w[i] = keep - h;
        const double lm = objective(m, x, y, eps);
        w[i] = keep;
        const double fd = (lp - lm) / (2 * h);
        CHECK(std::abs(fd - analytic[i]) <= 1e-6 * std::max(1.0, std::abs(fd)));
      }
    };
    check(m.w1(), g.w1);
    check(m.b1(), g.b1);
    if (!t.is_perceptron()) {
      check(m.w2(), g.w2);
      check(m.b2(), g.b2);
    }
  }
}

TEST_CASE("learning rate schedule") {
  const LearnSchedule s{0.1, 0.5, 0.0};
  CHECK(s.learning_rate(0) == 0.1);
  CHECK(s.learning_rate(10) == doctest::Approx(0.1 / std::sqrt(2.0)).epsilon(1e-15));
  const LearnSchedule flat{0.05, 0.0, 0.0};
  CHECK(flat.learning_rate(123456) == 0.05);
  CHECK(s.learning_rate(100) < s.learning_rate(99));

  CHECK_THROWS_AS((LearnSchedule{0.0, 0, 0}.validate()), Error);
  CHECK_THROWS_AS((LearnSchedule{-1.0, 0, 0}.validate()), Error);
  CHECK_THROWS_AS((LearnSchedule{0.1, -0.5, 0}.validate()), Error);
  CHECK_THROWS_AS((LearnSchedule{0.1, 0, -1e-3}.validate()), Error);
  CHECK_THROWS_AS((LearnSchedule{NAN, 0, 0}.validate()), Error);
  CHECK_NOTHROW((LearnSchedule{0.2, 1.0, 1e-3}.validate()));
}

TEST_CASE("update step") {
  SUBCASE("zero gradient and no decay leaves weights unchanged") {
    AnnModel m({8, 8, 8}, 4);
    const std::vector<float> x{1, 2, 3, 4, 5, 6, 7, 8};
    const auto yh = m.forward(x);
    const std::vector<float> y(yh.begin(), yh.end());
    m.backprop(y);
    const std::vector<float> before(m.arena().begin(), m.arena().begin() + 8 * 8 + 8 + 8 * 8 + 8);
    m.update({0.1, 0.0, 0.0});
    CHECK(std::equal(before.begin(), before.end(), m.arena().begin()));
    CHECK(m.alpha() == 1);
  }
  SUBCASE("perceptron step matches the hand formula") {
    Dbl m({3, 0, 2}, 8);
    const LearnSchedule s{0.2, 0.5, 1e-2};
    const std::vector<double> x{1, -1, 0.5}, y{0.3, 0.1};
    // one warm-up step so that alpha = 1 in the checked step
    m.forward(x);
    m.backprop(y);
    m.update(s);
    const std::vector<double> w(m.w1().begin(), m.w1().end()), b(m.b1().begin(), m.b1().end());
    const auto yh = m.forward(x);
    const double d[2] = {yh[0] - y[0], yh[1] - y[1]};
    m.backprop(y);
    const double eta = 0.2 / std::pow(1.0 + 0.2, 0.5);
    m.update(s);
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double expect = w[r * 3 + c] - eta * (d[r] * x[c] + 1e-2 * w[r * 3 + c]);
        CHECK(m.w1()[r * 3 + c] == doctest::Approx(expect).epsilon(1e-14));
      }
      CHECK(m.b1()[r] == doctest::Approx(b[r] - eta * d[r]).epsilon(1e-14));
    }
  }
  SUBCASE("pure decay shrinks weights geometrically, biases untouched") {
    Dbl m({2, 0, 2}, 8);
    m.b1()[0] = 0.7;
    const std::vector<double> x{0, 0};
    m.forward(x);
    const std::vector<double> y{0.7, 0.0};
    m.backprop(y);
    const std::vector<double> w(m.w1().begin(), m.w1().end());
    m.update({0.1, 0.0, 0.5});
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(m.w1()[i] == doctest::Approx(w[i] * 0.95).epsilon(1e-15));
    CHECK(m.b1()[0] == 0.7);
  }
  SUBCASE("small steps descend the loss") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
      Dbl m({4, trial % 2 ? 3u : 0u, 3}, static_cast<std::uint64_t>(trial));
      const auto x = random_vec(rng, 4);
      const auto y = random_vec(rng, 3);
      const double before = objective(m, x, y, 0.0);
      m.forward(x);
      m.backprop(y);
      m.update({1e-3, 0.0, 0.0});
      CHECK(objective(m, x, y, 0.0) < before);
    }
  }
  SUBCASE("divergence is reported") {
    AnnModel m({2, 0, 2}, 1);
    const std::vector<float> x{1e19f, 1e19f}, y{0, 0};
    m.forward(x);
    m.backprop(y);
    CHECK_THROWS_WITH_AS(m.update({1e30, 0.0, 0.0}), doctest::Contains("diverged"), Error);
  }
}

TEST_CASE("topology validation") {
  CHECK_THROWS_AS(AnnModel({0, 0, 8}, 1), Error);
  CHECK_THROWS_AS(AnnModel({8, 4, 0}, 1), Error);
  try {
    AnnModel({0, 0, 1}, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rejected_input);
  }
}
