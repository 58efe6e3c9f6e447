#include <doctest.h>

#include "ccl/harness.hpp"
#include "ccl/round_facility.hpp"
#include "ccl/round_kcenter.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace ccl;

namespace {

const std::vector<double> kNone;

std::vector<std::size_t> pts(std::initializer_list<std::size_t> v) { return v; }

// 0 and 1 sit 12.4042 apart, just inside the separation reach of a radius-10
// ball at 0 and a radius-1 ball at 1.
MetricSpace conflict_metric(double r_old, double r_new, double delta) {
  const double d01 = r_old + r_new + delta * std::min(r_old, r_new) - 0.01;
  return MetricSpace::from_table({0, d01, 5, d01, 0, d01 - 4.9, 5, d01 - 4.9, 0}, 3, false);
}

std::size_t count_drops(const RoundingStep& s, DropReason why) {
  std::size_t n = 0;
  for (const auto& e : s.events) n += e.kind == EventKind::kDrop && e.reason == why;
  return n;
}

std::vector<std::size_t> random_step_clients(std::mt19937_64& rng, std::vector<std::size_t>& active, std::size_t n) {
  std::bernoulli_distribution coin(0.75);
  if (active.empty() || (coin(rng) && active.size() < n)) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::size_t p;
    do {
      p = pick(rng);
    } while (std::find(active.begin(), active.end(), p) != active.end());
    active.push_back(p);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    active.erase(active.begin() + static_cast<long>(pick(rng)));
  }
  return active;
}

}  // namespace

TEST_CASE("k-center parameters") {
  KCenterParams p;
  CHECK(p.alpha == doctest::Approx(5.828427124746));
  CHECK(p.conflict_ratio() == doctest::Approx(2.0 + std::sqrt(2.0)));
  CHECK(p.eta > 0.0);
  CHECK(p.eta < 1.0);
  CHECK(std::pow(2.0, 1.0 / p.eta) == doctest::Approx(p.conflict_ratio()));
}

TEST_CASE("facility parameters") {
  FacilityParams p;
  CHECK(p.conflict_ratio() == doctest::Approx(3.45));
  CHECK(std::pow(2.0, 1.0 / p.eta) == doctest::Approx(3.45));
}

TEST_CASE("k-center: first cover") {
  const auto m = MetricSpace::from_table({0, 8, 8, 0}, 2, false);
  KCenterRounding kc(m, 1);
  const std::vector<double> x{1.0, 0.0};
  const auto s = kc.step(0, pts({0}), x, 2.0);
  REQUIRE(s.events.size() == 1);
  CHECK(s.events[0].kind == EventKind::kAdd);
  CHECK(s.events[0].client == 0);
  CHECK(s.events[0].radius == 2.0);
  CHECK(s.recourse == 1);
  CHECK(kc.engine().audit().drops() == 0);
  CHECK(kc.check_onedrop(1, 1.0).empty());
}

TEST_CASE("k-center: single conflict is dropped with the add") {
  KCenterParams p;
  const auto m = conflict_metric(10.0, 1.0, p.delta);
  KCenterRounding kc(m, 2);
  kc.step(0, pts({0}), std::vector<double>{1, 0, 0}, 10.0);
  REQUIRE(kc.num_centers() == 1);

  const auto conf = kc.check_onedrop(1, 1.0);
  REQUIRE(conf.size() == 1);
  CHECK(kc.engine().balls()[conf[0]].radius > p.conflict_ratio() * 1.0);

  const auto s = kc.step(1, pts({1}), std::vector<double>{1, 1, 0}, 1.0);
  CHECK(count_drops(s, DropReason::kSeparation) == 1);
  CHECK(count_drops(s, DropReason::kLowMass) == 0);
  CHECK(kc.centers() == pts({1}));
  CHECK(s.recourse == 2);
  CHECK(kc.engine().audit().conflict_failures == 0);
  CHECK(kc.engine().audit().min_slack >= -kSlackTol);
}

TEST_CASE("k-center: low mass drops in the first phase") {
  const auto m = MetricSpace::from_table({0, 8, 8, 0}, 2, false);
  KCenterRounding kc(m, 1, KCenterParams{.eps = 0.25});
  kc.step(0, pts({0}), std::vector<double>{1.0, 0.0}, 2.0);
  kc.step(1, pts({0}), std::vector<double>{0.76, 0.24}, 2.0);
  CHECK(kc.num_centers() == 1);
  const auto s = kc.step(2, std::vector<std::size_t>{}, std::vector<double>{0.74, 0.26}, 0.0);
  CHECK(count_drops(s, DropReason::kLowMass) == 1);
  CHECK(kc.engine().audit().low_mass_drops == 1);
  CHECK(kc.num_centers() == 0);
}

TEST_CASE("k-center potential values") {
  const auto m = MetricSpace::from_table({0, 8, 8, 0}, 2, false);
  const std::vector<double> x{1.0, 0.0};
  KCenterRounding empty(m, 1);
  CHECK(empty.potential(x) == 0.0);

  KCenterRounding full(m, 1);
  full.step(0, pts({0}), x, 8.0);
  CHECK(full.potential(x) == doctest::Approx(0.0));

  KCenterRounding half(m, 1);
  half.step(0, pts({0}), x, 4.0);
  CHECK(half.potential(x) == doctest::Approx(-half.params().eta));

  // a deficit adds coef * (1 - mass)
  const std::vector<double> low{0.9, 0.1};
  const double coef = half.engine().rule().coef;
  CHECK(half.potential(low) == doctest::Approx(coef * 0.1 - half.params().eta));
}

TEST_CASE("k-center: invalid inputs") {
  const auto m = MetricSpace::from_table({0, 8, 8, 0}, 2, false);
  CHECK_THROWS_AS(KCenterRounding(m, 0), std::invalid_argument);
  CHECK_THROWS_AS(KCenterRounding(m, 1, KCenterParams{.eps = 0.75}), std::invalid_argument);
  KCenterRounding kc(m, 1);
  CHECK_THROWS_AS(kc.step(0, pts({0}), std::vector<double>{1.0}, 1.0), std::invalid_argument);
  // birth mass below 1 is state corruption
  CHECK_THROWS_AS(kc.step(0, pts({0}), std::vector<double>{0.5, 0.5}, 1.0), InvariantViolation);
}

TEST_CASE("fractional service cost") {
  const auto m = MetricSpace::from_table({0, 1, 3, 1, 0, 2, 3, 2, 0}, 3, false);
  Facilities f{{1, 2}, {1.0, 1.0}};
  CHECK(fractional_service_cost(m, f, 0, std::vector<double>{0.5, 0.5}) == 2.0);
  Facilities g{{0, 2}, {1.0, 1.0}};
  CHECK(fractional_service_cost(m, g, 0, std::vector<double>{1.0, 0.0}) == 0.0);
}

TEST_CASE("service costs match recomputation from the maintained y") {
  std::mt19937_64 rng(3);
  const auto m = MetricSpace::from_feature_rows(gaussian_points(5, 2, 3));
  Facilities f = Facilities::all(m, 2.0);
  FractionalMaintainer fm(m, f, {Problem::kFacility, 1, 1.5, 0.25});
  fm.step(pts({0, 2, 4}));
  const auto r = service_costs(fm);
  REQUIRE(r.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    double s = 0.0;
    const auto y = fm.y(j);
    for (std::size_t i = 0; i < f.size(); ++i) s += y[i] * m(fm.clients()[j], i);
    CHECK(std::abs(r[j] - s) <= 1e-12);
  }
}

TEST_CASE("facility: zero-radius activation opens the co-located facility") {
  const auto m = MetricSpace::from_table({0, 4, 4, 0}, 2, false);
  FacilityRounding fr(m, Facilities::all(m, 1.0));
  const auto s = fr.step(0, pts({1}), std::vector<double>{0.0, 1.0}, std::vector<double>{0.0});
  REQUIRE(fr.num_open() == 1);
  CHECK(fr.open() == pts({1}));
  CHECK(fr.engine().balls()[0].radius == 0.0);
  CHECK(s.recourse == 1);
}

TEST_CASE("facility: cheapest facility in the ball, lowest index on ties") {
  const auto m = MetricSpace::from_table({0, 1, 1, 1, 0, 2, 1, 2, 0}, 3, false);
  Facilities f{{0, 1, 2}, {5.0, 2.0, 2.0}};
  FacilityRounding fr(m, f);
  fr.step(0, pts({0}), std::vector<double>{0.2, 0.4, 0.4}, std::vector<double>{0.9});
  CHECK(fr.open() == pts({1}));
}

TEST_CASE("facility: low mass drops below 1/alpha") {
  const auto m = MetricSpace::from_table({0, 4, 4, 0}, 2, false);
  FacilityRounding fr(m, Facilities::all(m, 1.0));
  fr.step(0, pts({0}), std::vector<double>{1.0, 0.0}, std::vector<double>{0.0});
  fr.step(1, std::vector<std::size_t>{}, std::vector<double>{1.0 / 11.0 + 0.01, 0.0}, kNone);
  CHECK(fr.num_open() == 1);
  const auto s = fr.step(2, std::vector<std::size_t>{}, std::vector<double>{1.0 / 11.0 - 0.01, 0.0}, kNone);
  CHECK(count_drops(s, DropReason::kLowMass) == 1);
  CHECK(fr.num_open() == 0);
}

TEST_CASE("facility: single conflict needs a radius ratio above 3.45") {
  FacilityParams p;
  // old ball radius 10 at point 0, new ball radius 1 at point 1
  const auto m = conflict_metric(10.0, 1.0, p.delta);
  FacilityRounding fr(m, Facilities::all(m, 1.0));
  fr.step(0, pts({0}), std::vector<double>{1, 0, 0}, std::vector<double>{10.0 / p.gamma});
  REQUIRE(fr.num_open() == 1);
  const auto conf = fr.check_onedrop(1, 1.0);
  REQUIRE(conf.size() == 1);
  CHECK(fr.engine().balls()[conf[0]].radius > p.conflict_ratio());
  const auto s = fr.step(1, pts({1}), std::vector<double>{0.5, 1, 0}, std::vector<double>{1.0 / p.gamma});
  CHECK(count_drops(s, DropReason::kSeparation) == 1);
  CHECK(fr.open() == pts({1}));
  CHECK(fr.engine().audit().conflict_failures == 0);
}

TEST_CASE("facility potential values") {
  const auto m = MetricSpace::from_table({0, 8, 8, 0}, 2, false);
  FacilityParams p;
  const std::vector<double> x{1.0, 0.0};
  FacilityRounding empty(m, Facilities::all(m, 1.0));
  CHECK(empty.potential(x) == 0.0);

  FacilityRounding top(m, Facilities::all(m, 1.0));
  top.step(0, pts({0}), x, std::vector<double>{8.0 / p.gamma});
  CHECK(top.engine().balls()[0].radius == doctest::Approx(8.0));
  CHECK(top.potential(x) == doctest::Approx(0.0));

  FacilityRounding eighth(m, Facilities::all(m, 1.0));
  eighth.step(0, pts({0}), x, std::vector<double>{1.0 / p.gamma});
  CHECK(eighth.potential(x) == doctest::Approx(-3.0 * p.eta));

  // radius capped at Delta
  FacilityRounding capped(m, Facilities::all(m, 1.0));
  capped.step(0, pts({0}), x, std::vector<double>{100.0});
  CHECK(capped.engine().balls()[0].radius == 8.0);
}

TEST_CASE("k-median wrapper zeroes opening costs") {
  const auto m = MetricSpace::from_table({0, 1, 2, 1, 0, 1, 2, 1, 0}, 3, false);
  KMedianRounding km(m, Facilities::all(m, 7.0), 1, 0.25);
  CHECK(km.center_bound() == doctest::Approx(11.0 * 1.25));
  for (double c : km.engine().facilities().cost) CHECK(c == 0.0);
  km.step(0, pts({0, 1, 2}), std::vector<double>{1, 1, 1}, std::vector<double>{0, 0, 0});
  CHECK(km.num_open() == 3);
}

TEST_CASE("randomized k-center runs keep every assertion") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    std::mt19937_64 rng(seed);
    const auto m = MetricSpace::from_feature_rows(gaussian_points(30, 3, seed));
    const std::size_t k = 1 + seed % 3;
    FractionalMaintainer fm(m, Facilities::all(m), {Problem::kKCenter, k, 1.5, 0.25});
    KCenterRounding kc(m, k, KCenterParams{.eps = 0.25});
    std::vector<std::size_t> active;
    for (std::size_t t = 0; t < 50; ++t) {
      const auto c = random_step_clients(rng, active, m.size());
      fm.step(c);
      REQUIRE_NOTHROW(kc.step(t, fm.clients(), fm.x(), fm.radius()));
      CHECK(kcenter_objective(m, c, kc.centers()) <= kc.params().alpha * fm.radius() + 1e-9);
      CHECK(static_cast<double>(kc.num_centers()) <= kc.center_bound());
    }
    const auto& a = kc.engine().audit();
    CHECK(a.conflict_failures == 0);
    CHECK(a.violations.empty());
    CHECK(a.min_slack >= -kSlackTol);
  }
}

TEST_CASE("randomized facility runs keep every assertion") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const auto m = MetricSpace::from_feature_rows(gaussian_points(30, 3, seed));
    Facilities f = Facilities::all(m);
    std::uniform_real_distribution<double> cost(1.0, 10.0);
    for (double& c : f.cost) c = cost(rng);
    FractionalMaintainer fm(m, f, {Problem::kFacility, 1, 1.5, 0.25});
    FacilityRounding fr(m, f);
    std::vector<std::size_t> active;
    for (std::size_t t = 0; t < 50; ++t) {
      const auto c = random_step_clients(rng, active, m.size());
      fm.step(c);
      const auto r = service_costs(fm);
      REQUIRE_NOTHROW(fr.step(t, fm.clients(), fm.x(), r));
      CHECK(fr.decomposition(fm.clients(), fm.x(), r).holds());
      const double integral = facility_objective(m, f, fm.clients(), {}, fr.open(), true);
      CHECK(integral <= 11.0 * 1.25 * 1.5 * fm.opt() + 1e-6);
    }
    CHECK(fr.engine().audit().conflict_failures == 0);
    CHECK(fr.engine().audit().violations.empty());
  }
}

TEST_CASE("k-median runs respect the center count bound") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::mt19937_64 rng(200 + seed);
    const auto m = MetricSpace::from_feature_rows(gaussian_points(40, 3, seed));
    FractionalMaintainer fm(m, Facilities::all(m), {Problem::kKMedian, 3, 1.5, 0.25});
    KMedianRounding km(m, Facilities::all(m), 3, 0.25);
    std::vector<std::size_t> active;
    for (std::size_t t = 0; t < 40; ++t) {
      const auto c = random_step_clients(rng, active, m.size());
      fm.step(c);
      REQUIRE_NOTHROW(km.step(t, fm.clients(), fm.x(), service_costs(fm)));
      CHECK(km.num_open() <= 41);
      const double cost = facility_objective(m, km.engine().facilities(), fm.clients(), {}, km.open(), false);
      CHECK(cost <= 11.0 * 1.25 * 1.5 * fm.opt() + 1e-6);
    }
  }
}
