#include <doctest.h>

#include "ccl/fractional.hpp"
#include "oracle/brute.hpp"
#include "oracle/projection.hpp"

#include <cmath>

#include <random>

using namespace ccl;

namespace {

MetricSpace line3() { return MetricSpace::from_table({0, 1, 2, 1, 0, 1, 2, 1, 0}, 3, false); }

std::vector<std::size_t> random_subset(std::mt19937_64& rng, std::size_t n, std::size_t max_size) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  std::uniform_int_distribution<std::size_t> sz(1, max_size);
  all.resize(sz(rng));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

TEST_CASE("opt_kcenter examples") {
  auto dup = MetricSpace::from_feature_rows({{0}, {0}, {5}});
  auto fd = Facilities::all(dup);
  std::vector<std::size_t> both{0, 1};
  CHECK(opt_kcenter(dup, both, fd, 1) == 0.0);
  CHECK(opt_kcenter(dup, std::vector<std::size_t>{}, fd, 1) == 0.0);

  auto m = line3();
  auto f = Facilities::all(m);
  std::vector<std::size_t> all{0, 1, 2};
  CHECK(opt_kcenter(m, all, f, 1) == 1.0);

  auto u4 = MetricSpace::from_table({0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0}, 4, false);
  auto f4 = Facilities::all(u4);
  std::vector<std::size_t> c4{0, 1, 2, 3};
  const double lp = opt_kcenter(u4, c4, f4, 3);
  CHECK(lp == oracle::exact_kcenter_radius(u4, c4, f4, 3));
  CHECK(lp <= oracle::integral_kcenter(u4, c4, f4, 3));
}

TEST_CASE("opt_facility and opt_kmedian examples") {
  auto one = MetricSpace::from_table({0, 3, 3, 0}, 2, false);
  Facilities f1{{0, 1}, {7.0, 9.0}};
  CHECK(opt_facility(one, std::vector<std::size_t>{0}, f1) == doctest::Approx(7.0));
  CHECK(opt_facility(one, std::vector<std::size_t>{}, f1) == 0.0);

  auto two = MetricSpace::from_table({0, 2, 2, 0}, 2, false);
  Facilities f2{{0, 1}, {10.0, 10.0}};
  std::vector<std::size_t> c2{0, 1};
  CHECK(opt_facility(two, c2, f2) == doctest::Approx(12.0));
  CHECK(oracle::integral_assignment(two, c2, f2, 0) == 12.0);

  auto m = line3();
  auto f = Facilities::all(m);
  std::vector<std::size_t> all{0, 1, 2};
  CHECK(opt_kmedian(m, all, f, 1) == doctest::Approx(2.0));
  CHECK(opt_kmedian(m, all, f, 3) == doctest::Approx(0.0));
  auto far = MetricSpace::from_table({0, 50, 50, 0}, 2, false);
  CHECK(opt_kmedian(far, std::vector<std::size_t>{0, 1}, Facilities::all(far), 2) == doctest::Approx(0.0));
}

TEST_CASE("optima agree with exact oracles on random small instances") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> cost(1, 10);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + trial % 8;  // up to 10
    auto m = oracle::random_integer_metric(rng, n);
    Facilities f = Facilities::all(m);
    for (auto& c : f.cost) c = cost(rng);
    auto clients = random_subset(rng, n, n);
    const std::size_t k = 1 + trial % 3;
    const double kc = opt_kcenter(m, clients, f, k);
    CHECK(kc == oracle::exact_kcenter_radius(m, clients, f, k));
    if (n <= 10) CHECK(kc <= oracle::integral_kcenter(m, clients, f, k));
    // hint must not change the answer
    CHECK(opt_kcenter(m, clients, f, k, kc + 1.0) == kc);
    CHECK(opt_kcenter(m, clients, f, k, 0.0) == kc);

    if (n <= 8) {
      const double fl = opt_facility(m, clients, f);
      CHECK(fl == doctest::Approx(oracle::exact_assignment_lp(m, clients, f, 0)).epsilon(1e-9));
      CHECK(fl <= oracle::integral_assignment(m, clients, f, 0) + 1e-9);
      const double km = opt_kmedian(m, clients, f, k);
      CHECK(km == doctest::Approx(oracle::exact_assignment_lp(m, clients, f, k)).epsilon(1e-9));
      CHECK(km <= oracle::integral_assignment(m, clients, f, k) + 1e-9);
    }
  }
}

TEST_CASE("multiplicities scale service cost") {
  auto m = line3();
  Facilities f{{0, 2}, {5.0, 5.0}};
  std::vector<std::size_t> c{0, 2};
  std::vector<double> w{10.0, 1.0};
  const double v = opt_facility(m, c, f, w);
  CHECK(v == doctest::Approx(oracle::exact_assignment_lp(m, c, f, 0, w)));
  CHECK(v == doctest::Approx(7.0));  // open facility at 0, serve the single client at 2 from distance 2
}

TEST_CASE("body construction") {
  auto m = line3();
  auto f = Facilities::all(m);
  auto empty = build_body_kcenter(m, std::vector<std::size_t>{}, f, 2, 1.0);
  CHECK(empty.covering.empty());
  auto single = build_body_kcenter(m, std::vector<std::size_t>{0}, f, 1, 1.5);
  REQUIRE(single.covering.size() == 1);
  CHECK(single.covering[0].size() == 2);  // points at distance 0 and 1

  std::mt19937_64 rng(3);
  auto m5 = oracle::random_integer_metric(rng, 5);
  auto f5 = Facilities::all(m5);
  std::vector<std::size_t> c5{0, 1, 2, 3, 4};
  auto b5 = build_body_kcenter(m5, c5, f5, 2, 1.0);
  for (std::size_t r = 0; r < 5; ++r) {
    bool has_self = false;
    for (auto& t : b5.covering[r]) has_self = has_self || t.index == r;
    CHECK(has_self);
  }

  auto two = MetricSpace::from_table({0, 2, 2, 0}, 2, false);
  Facilities f2{{0, 1}, {1.0, 1.0}};
  auto fb = build_body_facility(two, std::vector<std::size_t>{0}, f2, 1.5, 1.0);
  CHECK(fb.covering.size() == 1);
  CHECK(fb.coupling.size() == 2);
  CHECK(fb.packing.size() == 1);
  CHECK(fb.weights == std::vector<double>{1, 1, 0, 0});
  auto none = build_body_facility(two, std::vector<std::size_t>{}, f2, 1.5, 0.0);
  CHECK(none.covering.empty());
  REQUIRE(none.packing.size() == 1);
  CHECK(none.packing_rhs[0] == 0.0);
  auto kb = build_body_kmedian(two, std::vector<std::size_t>{0, 1}, f2, 1, 1.5, 2.0);
  CHECK(kb.covering.size() == 2);
  CHECK(kb.coupling.size() == 4);
  CHECK(kb.packing.size() == 2);
}

TEST_CASE("maintainer steps") {
  std::mt19937_64 rng(8);
  auto m = oracle::random_integer_metric(rng, 8);
  for (auto prob : {Problem::kKCenter, Problem::kFacility, Problem::kKMedian}) {
    Facilities f = Facilities::all(m, prob == Problem::kFacility ? 3.0 : 0.0);
    FractionalMaintainer fm(m, f, {prob, 2, 1.5, 0.25});
    std::vector<std::size_t> c{0, 3, 5};
    auto a = fm.step(c);
    CHECK(a.movement > 0.0);
    auto b = fm.step(c);
    CHECK(b.movement == 0.0);
    CHECK(b.opt == a.opt);
    // zero-weight y changes are free: feasibility holds at each step
    CHECK(fm.body().contains(fm.raw_state(), 0.25));
    if (prob != Problem::kKCenter) {
      CHECK(fm.fractional_cost() <= 1.25 * 1.5 * fm.opt() + 1e-9);
    }
    auto d = fm.step(std::vector<std::size_t>{});
    if (prob == Problem::kFacility) {
      // cost <= (1+eps) beta * 0 closes every paid opening
      CHECK(d.movement > 0.0);
      for (double v : fm.x()) CHECK(v == 0.0);
    } else {
      CHECK(d.movement == 0.0);
    }
  }
}

TEST_CASE("maintainer: far insertion moves") {
  // pairs {0,1} and {2,3} at unit distance, 100 apart
  auto m = MetricSpace::from_table({0, 1, 100, 100, 1, 0, 100, 100, 100, 100, 0, 1, 100, 100, 1, 0}, 4, false);
  FractionalMaintainer fm(m, Facilities::all(m), {Problem::kKCenter, 2, 1.0, 0.25});
  fm.step(std::vector<std::size_t>{0});
  auto r = fm.step(std::vector<std::size_t>{0, 1, 2});
  CHECK(r.opt == 1.0);
  CHECK(r.movement == doctest::Approx(1.0));
  CHECK(fm.body().contains(fm.raw_state(), 0.25));
}

TEST_CASE("assignment bodies project like the exact LP") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t n = 4 + trial % 2;
    auto m = oracle::random_integer_metric(rng, n);
    const bool facility = trial % 2 == 0;
    Facilities f = Facilities::all(m, facility ? 2.0 : 0.0);
    auto clients = random_subset(rng, n, 3);
    const double opt = facility ? opt_facility(m, clients, f) : opt_kmedian(m, clients, f, 2);
    const double beta = 1.0 + 0.25 * static_cast<double>(trial % 3);
    Body b = facility ? build_body_facility(m, clients, f, beta, opt) : build_body_kmedian(m, clients, f, 2, beta, opt);
    FractionalState prev;
    for (std::size_t i = 0; i < b.num_vars; ++i) prev.x.push_back(std::round(u(rng) * 4.0) / 8.0);
    const auto r = project(prev, b, 0.25);
    CHECK(b.contains(r.state.x, 0.25, 1e-9));
    CHECK(r.movement == doctest::Approx(oracle::exact_projection(b, prev.x, 0.25)).epsilon(1e-7));
    CHECK(project(r.state, b, 0.25).movement == 0.0);
    ++checked;
  }
  CHECK(checked == 24);
}
