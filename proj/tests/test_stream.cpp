#include "doctest.h"

#include <cmath>
#include <numbers>

#include "wsnf/stream.hpp"

using namespace wsnf;

namespace {

const std::string kData = WSNF_TEST_DATA;

std::vector<TimedSample> drain(FrameSource& src) {
  std::vector<TimedSample> out;
  while (auto s = src.next()) out.push_back(*s);
  return out;
}

}  // namespace

TEST_CASE("sinus without noise follows the clean curve") {
  SinusConfig c;
  c.n_frames = 2000;
  c.noise_half_width = 0.0;
  SinusSource src(c);
  const auto f = drain(src);
  REQUIRE(f.size() == 2000);
  CHECK(f[0].t == 0.0);
  CHECK(f[0].v == doctest::Approx(20.0));
  for (const auto& s : f) {
    CHECK(s.v == doctest::Approx(20.0 + 10.0 * std::sin(2 * std::numbers::pi * s.t / 86400.0)).epsilon(1e-12));
  }
  CHECK(c.clean_value(6 * 3600.0) == doctest::Approx(30.0));
}

TEST_CASE("sinus value range and inter-arrival times") {
  SinusConfig c;
  c.n_frames = 100'000;
  SinusSource src(c);
  const auto f = drain(src);
  double sum_dt = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i].v >= 10.0 - 1.5);
    CHECK(f[i].v <= 30.0 + 1.5);
    if (i) {
      const double dt = f[i].t - f[i - 1].t;
      CHECK(dt >= 20.0);
      CHECK(dt <= 40.0);
      sum_dt += dt;
    }
  }
  const double mean_dt = sum_dt / static_cast<double>(f.size() - 1);
  CHECK(mean_dt >= 29.0);
  CHECK(mean_dt <= 31.0);
}

TEST_CASE("sinus determinism and node rotation") {
  SinusConfig c;
  c.n_frames = 500;
  c.nodes = 3;
  SinusSource a(c), b(c);
  const auto fa = drain(a), fb = drain(b);
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa[i].t == fb[i].t);
    CHECK(fa[i].v == fb[i].v);
    CHECK(fa[i].node == i % 3);
  }
  c.seed = 2;
  SinusSource d(c);
  CHECK(drain(d)[10].v != fa[10].v);
}

TEST_CASE("sinus config validation") {
  SinusConfig c;
  c.dt_min = 50;
  CHECK_THROWS_AS(SinusSource{c}, Error);
  c = {};
  c.value_min = 30;
  c.value_max = 10;
  CHECK_THROWS_AS(SinusSource{c}, Error);
  c = {};
  c.nodes = 0;
  CHECK_THROWS_AS(SinusSource{c}, Error);
  c = {};
  c.noise_half_width = -1;
  CHECK_THROWS_AS(SinusSource{c}, Error);
}

TEST_CASE("dataset fixture passes through unchanged") {
  DatasetSpec spec = DatasetSpec::uci_sml2010(kData + "/sml_fixture.txt");
  spec.limit = 12;
  spec.expected_rows = 12;
  const auto f = read_dataset(spec);
  REQUIRE(f.size() == 12);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i].t == 900.0 * static_cast<double>(i));
    CHECK(f[i].v == doctest::Approx(18.0 + 0.25 * static_cast<double>(i)));
  }
  spec.value_col = 3;
  spec.limit = 5;
  spec.expected_rows.reset();
  const auto g = read_dataset(spec);
  CHECK(g.size() == 5);
  CHECK(g[4].v == 17.5);
}

TEST_CASE("dataset ingestion errors") {
  auto code_of = [](const DatasetSpec& s) {
    try {
      read_dataset(s);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::rejected_input;
  };
  DatasetSpec spec = DatasetSpec::uci_sml2010(kData + "/sml_fixture.txt");
  CHECK(code_of(spec) == Errc::ingestion);  // only 12 of 2688 rows

  spec = DatasetSpec::uci_sml2010(kData + "/sml_gap.txt");
  spec.limit.reset();
  spec.expected_rows.reset();
  CHECK(code_of(spec) == Errc::ingestion);
  CHECK_THROWS_WITH(read_dataset(spec), doctest::Contains("spacing"));

  spec = DatasetSpec::uci_sml2010(kData + "/empty.txt");
  spec.expected_rows.reset();
  CHECK(code_of(spec) == Errc::ingestion);

  spec = DatasetSpec::uci_sml2010(kData + "/does_not_exist.txt");
  CHECK(code_of(spec) == Errc::ingestion);

  spec = DatasetSpec::uci_sml2010(kData + "/sml_fixture.txt");
  spec.expected_rows.reset();
  spec.value_col = 9;
  CHECK(code_of(spec) == Errc::ingestion);
}

TEST_CASE("implicit-time dataset") {
  DatasetSpec spec;
  spec.path = kData + "/sml_fixture.txt";
  spec.value_col = 2;
  const auto f = read_dataset(spec);
  CHECK(f.size() == 12);
  CHECK(f[3].t == 2700.0);
}

TEST_CASE("loss injection") {
  SinusConfig c;
  c.n_frames = 20'000;
  auto all = [&] {
    SinusSource s(c);
    return drain(s);
  }();

  SUBCASE("zero loss is the identity") {
    LossInjector inj(std::make_unique<SinusSource>(c), LossModel{});
    const auto f = drain(inj);
    REQUIRE(f.size() == all.size());
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i].t == all[i].t);
    CHECK(inj.dropped() == 0);
  }
  SUBCASE("certain loss drops everything") {
    LossModel m;
    m.drop_prob = 1.0;
    LossInjector inj(std::make_unique<SinusSource>(c), m);
    CHECK_FALSE(inj.next().has_value());
    CHECK(inj.dropped() == all.size());
  }
  SUBCASE("partial loss keeps order and roughly the expected share") {
    LossModel m;
    m.drop_prob = 0.2;
    LossInjector inj(std::make_unique<SinusSource>(c), m);
    const auto f = drain(inj);
    for (std::size_t i = 1; i < f.size(); ++i) CHECK(f[i].t > f[i - 1].t);
    const double kept = static_cast<double>(f.size()) / static_cast<double>(all.size());
    CHECK(kept == doctest::Approx(0.8).epsilon(0.02));
    CHECK(inj.dropped() + f.size() == all.size());
  }
  SUBCASE("burst of five quarters causes exactly one reset") {
    LossModel m;
    m.burst_start_s = 900.0 * 100;
    m.burst_quarters = 5;
    LossInjector inj(std::make_unique<SinusSource>(c), m);
    QuarterAggregator agg;
    std::size_t quarters = 0;
    while (auto s = inj.next()) agg.push(*s, [&](std::int64_t, double) { ++quarters; });
    CHECK(agg.resets() == 1);
    CHECK(inj.dropped() > 100);
  }
  SUBCASE("burst of three quarters is bridged") {
    LossModel m;
    m.burst_start_s = 900.0 * 100;
    m.burst_quarters = 3;
    LossInjector inj(std::make_unique<SinusSource>(c), m);
    QuarterAggregator agg;
    while (auto s = inj.next()) agg.push(*s, [](std::int64_t, double) {});
    CHECK(agg.resets() == 0);
  }
  SUBCASE("invalid loss model") {
    LossModel m;
    m.drop_prob = 1.5;
    CHECK_THROWS_AS(LossInjector(std::make_unique<SinusSource>(c), m), Error);
    m = {};
    m.burst_quarters = -1;
    CHECK_THROWS_AS(LossInjector(std::make_unique<SinusSource>(c), m), Error);
  }
}

TEST_CASE("vector source") {
  VectorSource v({{0, 1, 0}, {10, 2, 0}});
  CHECK(v.next()->v == 1);
  CHECK(v.next()->v == 2);
  CHECK_FALSE(v.next().has_value());
}
